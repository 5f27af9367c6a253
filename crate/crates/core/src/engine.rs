//! Workflow instance execution and batch experiments.
//!
//! An instance runs its workflow's tasks one at a time in topological order
//! (ties by task id). Service tasks go through
//! schedule → anonymize → execute → monitor, and every detected attack is
//! answered by an adaptation decision, its application and trust penalties.
//! User tasks pass through the user monitor and cost one time unit.
//!
//! Instances of a batch start from the same trust snapshot and record their
//! trust updates locally; the batch merges them into the middleware registry
//! afterwards in `(detection time, instance id)` order, so sequential and
//! parallel batches produce identical results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{apply, decide, mitigation_score, ActionCatalog, AdaptationContext, AdaptationKind};
use crate::cloudenv::{
    backup_service, execute_with, AttackInjector, AttackType, Catalog, ExecutionSlot, RandomInjector, PRICE_RANGE,
    RESPONSE_TIME_RANGE,
};
use crate::detection::{
    monitor_user, user_alert, AlertQueue, ServiceMonitor, Submission, TenantIds, TenantRule, UserEvent, UserVerdict,
};
use crate::error::{Error, Result};
use crate::model::{generate_workflow, validate, SizeCategory, Task, WeightVector, Workflow};
use crate::rng::{substream, SimRng, Stream};
use crate::scheduler::{anonymize, schedule};
use crate::trust::{
    tenant_response, Subject, TenantResponse, TrustOp, TrustRegistry, TrustUpdate, DEFAULT_ALPHA, DEFAULT_BETA,
};

/// Time a user task takes. User tasks are free.
pub const USER_TASK_TIME: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Pending,
    Running,
    Completed,
    Skipped,
    TaintedInput,
    ResidualRisk,
}

impl TaskStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, TaskStatus::Pending | TaskStatus::Running)
    }
}

impl fmt::Display for TaskStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    MonitorOk,
    AttackDetected,
    Adaptation,
    TaskDone,
    TrustUpdate,
    IdsAlert,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::MonitorOk => "MONITOR_OK",
            EventKind::AttackDetected => "ATTACK_DETECTED",
            EventKind::Adaptation => "ADAPTATION",
            EventKind::TaskDone => "TASK_DONE",
            EventKind::TrustUpdate => "TRUST_UPDATE",
            EventKind::IdsAlert => "IDS_ALERT",
        }
    }
}

/// One line of the event log.
///
/// `TRUST_UPDATE` entries name the updated subject in the service column and
/// carry the new trust value in the action column. `TASK_DONE` entries carry
/// the task's terminal status in the action column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEntry {
    pub sim_time: f64,
    pub tenant_id: String,
    pub instance_id: String,
    pub task_id: String,
    pub event: EventKind,
    pub attack_type: Option<AttackType>,
    pub service_id: Option<String>,
    pub action: Option<String>,
}

/// Renders a clock reading as `mm:ss`, one time unit per second.
pub fn format_clock(t: f64) -> String {
    let secs = t.max(0.0).floor() as u64;
    format!("{:02}:{:02}", secs / 60, secs % 60)
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            format_clock(self.sim_time),
            self.tenant_id,
            self.instance_id,
            self.task_id,
            self.event.as_str(),
            self.attack_type.map_or("-", AttackType::as_str),
            self.service_id.as_deref().unwrap_or("-"),
            self.action.as_deref().unwrap_or("-"),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChargeKind {
    Execution,
    UserTask,
    Adaptation(AdaptationKind),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Charge {
    pub task_id: String,
    pub kind: ChargeKind,
    pub time: f64,
    pub price: f64,
}

/// Mutable state of one workflow instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceState {
    pub instance_id: String,
    pub tenant_id: String,
    pub workflow_id: String,
    pub clock: f64,
    pub price: f64,
    pub mitigation: f64,
    pub attacks_detected: u32,
    pub statuses: BTreeMap<String, TaskStatus>,
    pub tainted: BTreeSet<String>,
    pub log: Vec<LogEntry>,
    pub charges: Vec<Charge>,
    pub trust_updates: Vec<TrustUpdate>,
}

impl InstanceState {
    pub fn new(instance_id: &str, workflow: &Workflow) -> Self {
        Self {
            instance_id: instance_id.to_owned(),
            tenant_id: workflow.tenant_id.clone(),
            workflow_id: workflow.id.clone(),
            clock: 0.0,
            price: 0.0,
            mitigation: 0.0,
            attacks_detected: 0,
            statuses: workflow
                .tasks
                .iter()
                .map(|t| (t.id.clone(), TaskStatus::Pending))
                .collect(),
            tainted: BTreeSet::new(),
            log: Vec::new(),
            charges: Vec::new(),
            trust_updates: Vec::new(),
        }
    }

    /// Advances the clock by `time` and accrues `price`.
    pub fn charge(&mut self, task_id: &str, kind: ChargeKind, time: f64, price: f64) {
        debug_assert!(time >= 0.0 && price >= 0.0);
        self.clock += time;
        self.price += price;
        self.charges.push(Charge {
            task_id: task_id.to_owned(),
            kind,
            time,
            price,
        });
    }

    pub fn status(&self, task_id: &str) -> TaskStatus {
        self.statuses.get(task_id).copied().unwrap_or(TaskStatus::Pending)
    }

    pub fn set_status(&mut self, task_id: &str, status: TaskStatus) {
        let slot = self.statuses.entry(task_id.to_owned()).or_insert(TaskStatus::Pending);
        assert!(!slot.is_terminal(), "task {task_id} finished twice");
        *slot = status;
    }

    /// Flags `task_id` as consuming skipped output. Returns false when it was
    /// already flagged or has already finished.
    pub fn taint(&mut self, task_id: &str) -> bool {
        !self.status(task_id).is_terminal() && self.tainted.insert(task_id.to_owned())
    }

    fn log(&mut self, task_id: &str, event: EventKind) -> &mut LogEntry {
        self.log.push(LogEntry {
            sim_time: self.clock,
            tenant_id: self.tenant_id.clone(),
            instance_id: self.instance_id.clone(),
            task_id: task_id.to_owned(),
            event,
            attack_type: None,
            service_id: None,
            action: None,
        });
        self.log.last_mut().unwrap()
    }

    pub fn log_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.log {
            writeln!(out, "{entry}").unwrap();
        }
        out
    }

    pub fn totals(&self) -> RunTotals {
        RunTotals {
            time: self.clock,
            price: self.price,
            mitigation: self.mitigation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub attack_rate: f64,
    pub monitor: ServiceMonitor,
    pub beta: f64,
    pub alpha: f64,
    pub max_readapt: u32,
    /// User monitor access-count threshold.
    pub user_threshold: u32,
    pub malicious_user_rate: f64,
    #[serde(skip)]
    pub actions: ActionCatalog,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            attack_rate: 0.0,
            monitor: ServiceMonitor::default(),
            beta: DEFAULT_BETA,
            alpha: DEFAULT_ALPHA,
            max_readapt: 3,
            user_threshold: 5,
            malicious_user_rate: 0.0,
            actions: ActionCatalog::default(),
        }
    }
}

impl EngineConfig {
    fn trust(
        &self,
        state: &mut InstanceState,
        local: &mut TrustRegistry,
        subject: Subject,
        id: &str,
        op: TrustOp,
    ) -> f64 {
        let value = local.apply(subject, id, op).value;
        state.trust_updates.push(TrustUpdate {
            detected_at: state.clock,
            instance_id: state.instance_id.clone(),
            subject,
            subject_id: id.to_owned(),
            op,
        });
        value
    }
}

fn log_trust(state: &mut InstanceState, task_id: &str, attack: AttackType, subject_id: &str, value: f64) {
    let e = state.log(task_id, EventKind::TrustUpdate);
    e.attack_type = Some(attack);
    e.service_id = Some(subject_id.to_owned());
    e.action = Some(format!("{value:.6}"));
}

/// Executes one workflow instance.
///
/// `trust` is the middleware snapshot at instance start; the instance's own
/// updates apply to a local copy (so later tasks see them) and are returned
/// in `InstanceState::trust_updates` for merging. `rng` drives detection and
/// user behaviour; `injector` decides attacks.
pub fn run_instance(
    workflow: &Workflow,
    catalog: &Catalog,
    config: &EngineConfig,
    instance_id: &str,
    trust: &TrustRegistry,
    injector: &mut dyn AttackInjector,
    rng: &mut SimRng,
) -> Result<InstanceState> {
    let violations = validate(workflow);
    if !violations.is_empty() {
        return Err(Error::InvalidWorkflow(violations));
    }
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let order = workflow.topological_order().expect("validated workflow is acyclic");
    let mut state = InstanceState::new(instance_id, workflow);
    let mut local = trust.clone();

    for idx in order {
        let task = &workflow.tasks[idx];
        state.set_status(&task.id, TaskStatus::Running);
        if task.is_service() {
            run_service_task(task, workflow, catalog, config, &mut state, &mut local, injector, rng)?;
        } else {
            run_user_task(task, config, &mut state, &mut local, rng);
        }
    }
    debug_assert!(state.statuses.values().all(|s| s.is_terminal()));
    Ok(state)
}

fn finished_status(state: &InstanceState, task: &Task) -> TaskStatus {
    if state.tainted.contains(&task.id) {
        TaskStatus::TaintedInput
    } else {
        TaskStatus::Completed
    }
}

fn run_user_task(
    task: &Task,
    config: &EngineConfig,
    state: &mut InstanceState,
    local: &mut TrustRegistry,
    rng: &mut SimRng,
) {
    let malicious = rng.gen_bool(config.malicious_user_rate);
    let access_count = if malicious {
        config.user_threshold + 1 + rng.gen_range(0..=config.user_threshold)
    } else {
        rng.gen_range(0..=config.user_threshold)
    };
    let event = UserEvent {
        tenant_id: state.tenant_id.clone(),
        user_id: format!("{}-user", task.id),
        task_id: task.id.clone(),
        access_count,
    };
    state.charge(&task.id, ChargeKind::UserTask, USER_TASK_TIME, 0.0);
    match monitor_user(&event, config.user_threshold) {
        UserVerdict::Benign => {
            state.log(&task.id, EventKind::MonitorOk);
        }
        UserVerdict::Malicious => {
            let alert = user_alert(&event, &state.instance_id, state.clock);
            state.log(&task.id, EventKind::IdsAlert).attack_type = Some(alert.attack_type);
            let op = TrustOp::Penalize {
                attack: alert.attack_type,
                beta: config.beta,
            };
            let tenant = state.tenant_id.clone();
            let value = config.trust(state, local, Subject::Tenant, &tenant, op);
            log_trust(state, &task.id, alert.attack_type, &tenant, value);
        }
    }
    let status = finished_status(state, task);
    state.set_status(&task.id, status);
    state.log(&task.id, EventKind::TaskDone).action = Some(status.to_string());
}

#[allow(clippy::too_many_arguments)]
fn run_service_task(
    task: &Task,
    workflow: &Workflow,
    catalog: &Catalog,
    config: &EngineConfig,
    state: &mut InstanceState,
    local: &mut TrustRegistry,
    injector: &mut dyn AttackInjector,
    rng: &mut SimRng,
) -> Result<()> {
    let mut current = schedule(task, workflow, catalog, &*local)?;
    let request = anonymize(task, &workflow.weights);
    let mut alerts = AlertQueue::new();
    let mut adaptations = 0u32;
    let mut residual: Option<AttackType> = None;

    state.charge(&task.id, ChargeKind::Execution, current.response_time, current.price);
    let mut attempt = 0u32;
    loop {
        let slot = ExecutionSlot {
            instance_id: &state.instance_id,
            start: state.clock - current.response_time,
            attempt,
        };
        let outcome = execute_with(task, current, injector, slot)?;
        if let Some(alert) = config.monitor.observe(&outcome, rng) {
            alerts.push(alert);
        }
        let Some(alert) = alerts.pop() else {
            state.log(&task.id, EventKind::MonitorOk).service_id = Some(current.id.clone());
            let op = TrustOp::Reward { alpha: config.alpha };
            config.trust(state, local, Subject::Service, &current.id, op);
            config.trust(state, local, Subject::Provider, &current.provider_id, op);
            break;
        };

        let attack = alert.attack_type;
        let service_op = TrustOp::Penalize {
            attack,
            beta: config.beta,
        };
        let provider_op = TrustOp::Penalize {
            attack,
            beta: config.beta / 2.0,
        };
        let service_trust = config.trust(state, local, Subject::Service, &current.id, service_op);
        let provider_trust = config.trust(state, local, Subject::Provider, &current.provider_id, provider_op);

        if adaptations >= config.max_readapt {
            residual = Some(attack);
            log_trust(state, &task.id, attack, &current.id, service_trust);
            log_trust(state, &task.id, attack, &current.provider_id, provider_trust);
            break;
        }

        state.attacks_detected += 1;
        {
            let e = state.log(&task.id, EventKind::AttackDetected);
            e.attack_type = Some(attack);
            e.service_id = Some(current.id.clone());
        }

        let backup = backup_service(current, &request, catalog, &*local).ok();
        let ctx = AdaptationContext::from_services(current, backup);
        // weights act on times and prices expressed in catalog range units
        let quoted = ctx.in_units(RESPONSE_TIME_RANGE.1, PRICE_RANGE.1);
        let decision = decide(task, attack, &quoted, &workflow.weights, &config.actions);
        let applied = match apply(decision.chosen, task, workflow, state, &ctx, &config.actions) {
            Err(Error::NoBackup(_)) => apply(AdaptationKind::Reconfig, task, workflow, state, &ctx, &config.actions)?,
            other => other?,
        };
        state.mitigation += mitigation_score(config.actions.spec(applied.kind), &task.requirement, attack);
        {
            let e = state.log(&task.id, EventKind::Adaptation);
            e.attack_type = Some(attack);
            e.service_id = Some(current.id.clone());
            e.action = Some(applied.kind.to_string());
        }
        log_trust(state, &task.id, attack, &current.id, service_trust);
        log_trust(state, &task.id, attack, &current.provider_id, provider_trust);
        adaptations += 1;

        match applied.rerun_on {
            None => break,
            Some(id) => {
                current = catalog
                    .service(&id)
                    .ok_or_else(|| Error::Contract(format!("adaptation re-runs on unknown service {id}")))?;
                attempt += 1;
            }
        }
    }

    let status = match residual {
        Some(_) => TaskStatus::ResidualRisk,
        None if state.status(&task.id) == TaskStatus::Skipped => TaskStatus::Skipped,
        None => finished_status(state, task),
    };
    if status != TaskStatus::Skipped {
        state.set_status(&task.id, status);
    }
    let e = state.log(&task.id, EventKind::TaskDone);
    e.attack_type = residual;
    e.service_id = Some(current.id.clone());
    e.action = Some(status.to_string());
    Ok(())
}

/// Time, price and mitigation of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunTotals {
    pub time: f64,
    pub price: f64,
    pub mitigation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Admission {
    Accepted,
    /// Start deferred by one IDS window.
    Deferred,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub instance_id: String,
    pub tenant_id: String,
    pub workflow_id: String,
    pub tasks: usize,
    pub attacks_detected: u32,
    pub admission: Admission,
    pub totals: RunTotals,
}

/// Batch averages rescaled to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetrics {
    pub avg_time: f64,
    pub avg_price: f64,
    pub avg_mitigation: f64,
}

pub const NORMALIZATION_NOTE: &str =
    "time and price: min-max over all runs of the comparison set; mitigation: divided by the comparison-set maximum; degenerate ranges map to 0; rejected runs excluded";

/// Normalizes several batches against their union.
///
/// Time and price are min-max scaled over every run of every batch;
/// mitigation is divided by the overall maximum. A degenerate range maps to
/// 0. Each batch's result is the mean of its scaled runs.
pub fn normalize(batches: &[&[RunTotals]]) -> Vec<NormalizedMetrics> {
    let all = || batches.iter().flat_map(|b| b.iter());
    let range = |f: fn(&RunTotals) -> f64| {
        all()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let scale = |v: f64, (lo, hi): (f64, f64)| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let time = range(|r| r.time);
    let price = range(|r| r.price);
    let max_mitigation = all().map(|r| r.mitigation).fold(0.0, f64::max);

    batches
        .iter()
        .map(|runs| {
            let n = runs.len().max(1) as f64;
            let mean = |f: &dyn Fn(&RunTotals) -> f64| runs.iter().map(f).sum::<f64>() / n;
            NormalizedMetrics {
                avg_time: mean(&|r| scale(r.time, time)),
                avg_price: mean(&|r| scale(r.price, price)),
                avg_mitigation: mean(&|r| {
                    if max_mitigation > 0.0 {
                        r.mitigation / max_mitigation
                    } else {
                        0.0
                    }
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub batch_size: usize,
    pub normalization: &'static str,
    pub normalized: NormalizedMetrics,
}

/// Everything a batch needs besides the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub category: SizeCategory,
    pub runs: usize,
    pub seed: u64,
    pub weights: WeightVector,
    pub tenants: usize,
    pub engine: EngineConfig,
    /// Tenant IDS rules. Tenants without a rule get [`default_rule`].
    pub rules: Vec<TenantRule>,
    pub parallel: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            category: SizeCategory::Small,
            runs: 100,
            seed: 42,
            weights: WeightVector::new(0.1, 0.1, 0.8),
            tenants: 2,
            engine: EngineConfig::default(),
            rules: Vec::new(),
            parallel: true,
        }
    }
}

/// Spacing of submissions in simulated time.
pub const SUBMISSION_INTERVAL: f64 = 1.0;

/// At most ten submissions per ten time units.
pub fn default_rule(tenant_id: &str) -> TenantRule {
    TenantRule::submissions(tenant_id, 10.0, 10)
}

pub fn tenant_of(run: usize, tenants: usize) -> String {
    format!("tenant{}", run % tenants.max(1))
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub records: Vec<RunRecord>,
    pub instances: Vec<InstanceState>,
    pub trust: TrustRegistry,
}

impl BatchResult {
    /// Totals of admitted runs.
    pub fn admitted_totals(&self) -> Vec<RunTotals> {
        self.records
            .iter()
            .filter(|r| r.admission != Admission::Rejected)
            .map(|r| r.totals)
            .collect()
    }

    pub fn metrics(&self) -> RunMetrics {
        let totals = self.admitted_totals();
        RunMetrics {
            batch_size: self.records.len(),
            normalization: NORMALIZATION_NOTE,
            normalized: normalize(&[&totals])[0],
        }
    }

    pub fn log_text(&self) -> String {
        self.instances.iter().map(InstanceState::log_text).collect()
    }
}

struct Admitted {
    run: usize,
    tenant_id: String,
    admission: Admission,
    preamble: Vec<LogEntry>,
}

fn admit(config: &BatchConfig, registry: &mut TrustRegistry) -> Vec<Admitted> {
    let tenants: Vec<String> = (0..config.tenants.max(1))
        .map(|t| tenant_of(t, config.tenants))
        .collect();
    let mut rules: Vec<TenantRule> = config.rules.clone();
    for t in &tenants {
        if !rules.iter().any(|r| &r.tenant_id == t) {
            rules.push(default_rule(t));
        }
    }
    let mut ids = TenantIds::new(rules);

    (0..config.runs)
        .map(|run| {
            let tenant_id = tenant_of(run, config.tenants);
            let instance_id = format!("instance{run}");
            let response = tenant_response(&registry.score(Subject::Tenant, &tenant_id)).expect("tenant subject");
            let admission = match response {
                TenantResponse::BlockActivity => Admission::Rejected,
                TenantResponse::IsolateResources => Admission::Deferred,
                _ => Admission::Accepted,
            };
            let mut preamble = Vec::new();
            let submission = Submission {
                tenant_id: tenant_id.clone(),
                instance_id: instance_id.clone(),
                at: run as f64 * SUBMISSION_INTERVAL,
            };
            if let Some(alert) = ids.submit(submission) {
                if response != TenantResponse::IgnoreAlerts {
                    let op = TrustOp::Penalize {
                        attack: alert.attack_type,
                        beta: config.engine.beta,
                    };
                    let value = registry.apply(Subject::Tenant, &tenant_id, op).value;
                    let entry = |event, action: Option<String>| LogEntry {
                        sim_time: 0.0,
                        tenant_id: tenant_id.clone(),
                        instance_id: instance_id.clone(),
                        task_id: "-".into(),
                        event,
                        attack_type: Some(alert.attack_type),
                        service_id: if event == EventKind::TrustUpdate {
                            Some(tenant_id.clone())
                        } else {
                            None
                        },
                        action,
                    };
                    preamble.push(entry(EventKind::IdsAlert, None));
                    preamble.push(entry(EventKind::TrustUpdate, Some(format!("{value:.6}"))));
                }
            }
            Admitted {
                run,
                tenant_id,
                admission,
                preamble,
            }
        })
        .collect()
}

/// Generates the workflow of run `run` under `seed`. Depends only on the
/// arguments, so batches sharing a seed share their workflow population.
pub fn batch_workflow(
    category: SizeCategory,
    seed: u64,
    run: usize,
    tenant_id: &str,
    weights: WeightVector,
) -> Workflow {
    let mut rng = substream(seed, Stream::Workflow, run as u64);
    generate_workflow(category, &format!("wf{run}"), tenant_id, weights, &mut rng)
}

/// Runs `config.runs` fresh instances against `catalog`.
pub fn run_batch(config: &BatchConfig, catalog: &Catalog) -> Result<BatchResult> {
    if config.runs == 0 {
        return Err(Error::InvalidConfig("a batch needs at least one run".into()));
    }
    if !config.weights.is_valid() {
        return Err(Error::InvalidConfig(format!("invalid weights {}", config.weights)));
    }
    let mut registry = TrustRegistry::new();
    let admitted = admit(config, &mut registry);
    let snapshot = registry.clone();

    let run_one = |a: &Admitted| -> Result<(RunRecord, InstanceState)> {
        let instance_id = format!("instance{}", a.run);
        let workflow = batch_workflow(config.category, config.seed, a.run, &a.tenant_id, config.weights);
        let mut state = if a.admission == Admission::Rejected {
            InstanceState::new(&instance_id, &workflow)
        } else {
            let mut injector = RandomInjector {
                rate: config.engine.attack_rate,
                rng: substream(config.seed, Stream::Execution, a.run as u64),
            };
            let mut rng = substream(config.seed, Stream::Detection, a.run as u64);
            run_instance(
                &workflow,
                catalog,
                &config.engine,
                &instance_id,
                &snapshot,
                &mut injector,
                &mut rng,
            )?
        };
        state.log.splice(0..0, a.preamble.iter().cloned());
        let record = RunRecord {
            run_id: a.run,
            instance_id,
            tenant_id: a.tenant_id.clone(),
            workflow_id: workflow.id.clone(),
            tasks: workflow.tasks.len(),
            attacks_detected: state.attacks_detected,
            admission: a.admission,
            totals: if a.admission == Admission::Rejected {
                RunTotals {
                    time: 0.0,
                    price: 0.0,
                    mitigation: 0.0,
                }
            } else {
                state.totals()
            },
        };
        Ok((record, state))
    };

    let results: Vec<(RunRecord, InstanceState)> = if config.parallel {
        admitted.par_iter().map(run_one).collect::<Result<_>>()?
    } else {
        admitted.iter().map(run_one).collect::<Result<_>>()?
    };

    let (records, instances): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    registry.merge(instances.iter().flat_map(|s| s.trust_updates.iter().cloned()).collect());
    Ok(BatchResult {
        records,
        instances,
        trust: registry,
    })
}
