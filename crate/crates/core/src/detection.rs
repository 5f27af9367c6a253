//! Monitoring and detection.
//!
//! Three detectors feed the adaptation loop: the middleware service monitor
//! (catches injected attacks on executions), a rule-based tenant IDS over
//! submission rates, and the tenant-side user monitor.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloudenv::{AttackType, ExecutionOutcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlertSource {
    ServiceMonitor,
    TenantIDS,
    UserMonitor,
}

/// A detected violation. Service alerts name the task, service and instance;
/// tenant alerts name only the tenant (and the instance, when one exists).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionAlert {
    pub source: AlertSource,
    pub attack_type: AttackType,
    pub tenant_id: Option<String>,
    pub instance_id: Option<String>,
    pub task_id: Option<String>,
    pub service_id: Option<String>,
    pub attacked_at: f64,
    pub detected_at: f64,
}

/// Parametric stand-in for a trained service-behaviour model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceMonitor {
    pub p_detect: f64,
    pub false_positive_rate: f64,
}

impl Default for ServiceMonitor {
    fn default() -> Self {
        Self {
            p_detect: 1.0,
            false_positive_rate: 0.0,
        }
    }
}

impl ServiceMonitor {
    pub fn new(p_detect: f64) -> Self {
        Self {
            p_detect,
            ..Self::default()
        }
    }

    /// Inspects a finished execution. Detection happens at completion.
    ///
    /// Attacked executions are caught with probability `p_detect`. Clean
    /// executions raise a spurious alert of a uniformly drawn type with
    /// probability `false_positive_rate`; at the default rate of zero no
    /// randomness is consumed for them.
    pub fn observe<R: Rng + ?Sized>(&self, outcome: &ExecutionOutcome, rng: &mut R) -> Option<DetectionAlert> {
        let detected_at = outcome.completed_at();
        let alert = |attack_type, attacked_at| DetectionAlert {
            source: AlertSource::ServiceMonitor,
            attack_type,
            tenant_id: None,
            instance_id: Some(outcome.instance_id.clone()),
            task_id: Some(outcome.task_id.clone()),
            service_id: Some(outcome.service_id.clone()),
            attacked_at,
            detected_at,
        };
        match &outcome.attack {
            Some(attack) => rng
                .gen_bool(self.p_detect)
                .then(|| alert(attack.attack_type, attack.sim_time)),
            None if self.false_positive_rate > 0.0 => rng
                .gen_bool(self.false_positive_rate)
                .then(|| alert(AttackType::sample(rng), outcome.started_at)),
            None => None,
        }
    }
}

pub fn monitor_service<R: Rng + ?Sized>(
    outcome: &ExecutionOutcome,
    p_detect: f64,
    rng: &mut R,
) -> Option<DetectionAlert> {
    ServiceMonitor::new(p_detect).observe(outcome, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleMetric {
    SubmissionsPerWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenantRule {
    pub tenant_id: String,
    pub metric: RuleMetric,
    pub window: f64,
    pub threshold: u32,
}

impl TenantRule {
    pub fn submissions(tenant_id: impl Into<String>, window: f64, threshold: u32) -> Self {
        Self {
            tenant_id: tenant_id.into(),
            metric: RuleMetric::SubmissionsPerWindow,
            window,
            threshold,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.window > 0.0 && self.threshold > 0
    }
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<Vec<TenantRule>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rules: Vec<TenantRule> = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    if let Some(bad) = rules.iter().find(|r| !r.is_valid()) {
        return Err(Error::InvalidConfig(format!(
            "{}: rule for {} needs window > 0 and threshold > 0",
            path.display(),
            bad.tenant_id
        )));
    }
    Ok(rules)
}

/// A workflow submission as seen by the middleware.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Submission {
    pub tenant_id: String,
    pub instance_id: String,
    pub at: f64,
}

/// Submission flooding is reported as DoS-class behaviour.
const IDS_ATTACK_CLASS: AttackType = AttackType::DoS;

/// Evaluates `rule` at time `now` over the trailing window `(now − window, now]`.
/// Alerts when the tenant's submission count strictly exceeds the threshold.
pub fn tenant_ids_check(rule: &TenantRule, log: &[Submission], now: f64) -> Option<DetectionAlert> {
    let count = log
        .iter()
        .filter(|s| s.tenant_id == rule.tenant_id && s.at > now - rule.window && s.at <= now)
        .count();
    (count > rule.threshold as usize).then(|| DetectionAlert {
        source: AlertSource::TenantIDS,
        attack_type: IDS_ATTACK_CLASS,
        tenant_id: Some(rule.tenant_id.clone()),
        instance_id: log
            .iter()
            .rev()
            .find(|s| s.tenant_id == rule.tenant_id && s.at <= now)
            .map(|s| s.instance_id.clone()),
        task_id: None,
        service_id: None,
        attacked_at: now,
        detected_at: now,
    })
}

/// Stateful IDS keeping one sliding window per tenant.
#[derive(Debug, Clone, Default)]
pub struct TenantIds {
    rules: BTreeMap<String, TenantRule>,
    windows: BTreeMap<String, VecDeque<Submission>>,
}

impl TenantIds {
    pub fn new(rules: impl IntoIterator<Item = TenantRule>) -> Self {
        Self {
            rules: rules.into_iter().map(|r| (r.tenant_id.clone(), r)).collect(),
            windows: BTreeMap::new(),
        }
    }

    pub fn rule(&self, tenant_id: &str) -> Option<&TenantRule> {
        self.rules.get(tenant_id)
    }

    /// Records a submission and checks the tenant's rule. Submissions must
    /// arrive in non-decreasing time order.
    pub fn submit(&mut self, submission: Submission) -> Option<DetectionAlert> {
        let rule = self.rules.get(&submission.tenant_id)?;
        let now = submission.at;
        let window = self.windows.entry(submission.tenant_id.clone()).or_default();
        window.push_back(submission);
        while window.front().is_some_and(|s| s.at <= now - rule.window) {
            window.pop_front();
        }
        tenant_ids_check(rule, window.make_contiguous(), now)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserEvent {
    pub tenant_id: String,
    pub user_id: String,
    pub task_id: String,
    pub access_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UserVerdict {
    Benign,
    Malicious,
}

/// Malicious iff the access count exceeds the tenant's threshold.
pub fn monitor_user(event: &UserEvent, threshold: u32) -> UserVerdict {
    if event.access_count > threshold {
        UserVerdict::Malicious
    } else {
        UserVerdict::Benign
    }
}

/// Misbehaving users are reported as user-to-root attempts.
pub fn user_alert(event: &UserEvent, instance_id: &str, at: f64) -> DetectionAlert {
    DetectionAlert {
        source: AlertSource::UserMonitor,
        attack_type: AttackType::U2R,
        tenant_id: Some(event.tenant_id.clone()),
        instance_id: Some(instance_id.to_owned()),
        task_id: Some(event.task_id.clone()),
        service_id: None,
        attacked_at: at,
        detected_at: at,
    }
}

struct Queued(DetectionAlert, u64);

impl Queued {
    fn key(&self) -> (f64, &str, u64) {
        (self.0.detected_at, self.0.instance_id.as_deref().unwrap_or(""), self.1)
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then_with(|| b.1.cmp(a.1))
            .then_with(|| b.2.cmp(&a.2))
    }
}

/// Alerts in delivery order: detection time, then instance id, then arrival.
#[derive(Default)]
pub struct AlertQueue {
    heap: BinaryHeap<Queued>,
    seq: u64,
}

impl AlertQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, alert: DetectionAlert) {
        self.heap.push(Queued(alert, self.seq));
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<DetectionAlert> {
        self.heap.pop().map(|q| q.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

impl Extend<DetectionAlert> for AlertQueue {
    fn extend<I: IntoIterator<Item = DetectionAlert>>(&mut self, alerts: I) {
        for alert in alerts {
            self.push(alert);
        }
    }
}
