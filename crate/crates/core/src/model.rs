//! Workflows, tasks and their security requirements.
//!
//! A workflow is a DAG of service and user tasks. Each task carries a CIA
//! requirement and the set of adaptation actions its tenant allows when a
//! violation is detected on it. This module also holds the random workflow
//! generator used by experiments and the JSON workflow file format.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::AdaptationKind;
use crate::error::{Error, Result};

/// Confidentiality, integrity and availability levels, each in `[0, 1]`.
///
/// Used for task requirements, service strengths, attack impacts and action
/// mitigation impacts alike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityRequirement {
    #[serde(rename = "c")]
    pub confidentiality: f64,
    #[serde(rename = "i")]
    pub integrity: f64,
    #[serde(rename = "a")]
    pub availability: f64,
}

impl SecurityRequirement {
    pub const fn new(confidentiality: f64, integrity: f64, availability: f64) -> Self {
        Self {
            confidentiality,
            integrity,
            availability,
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.confidentiality, self.integrity, self.availability]
    }

    pub fn is_valid(&self) -> bool {
        self.components().iter().all(|v| (0.0..=1.0).contains(v))
    }

    pub fn mean(&self) -> f64 {
        self.components().iter().sum::<f64>() / 3.0
    }

    pub(crate) fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
        )
    }
}

/// Tenant preference weights over time, price and security.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub time: f64,
    pub price: f64,
    pub security: f64,
}

impl WeightVector {
    pub const fn new(time: f64, price: f64, security: f64) -> Self {
        Self { time, price, security }
    }

    pub fn is_valid(&self) -> bool {
        let parts = [self.time, self.price, self.security];
        parts.iter().all(|w| w.is_finite() && *w >= 0.0) && parts.iter().sum::<f64>() > 0.0
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.time * k, self.price * k, self.security * k)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.time, self.price, self.security)
    }
}

impl std::str::FromStr for WeightVector {
    type Err = String;

    /// Parses `time,price,security`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad weight {p:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let [time, price, security] = parts[..] else {
            return Err(format!("expected three comma-separated weights, got {}", parts.len()));
        };
        let w = Self::new(time, price, security);
        if !w.is_valid() {
            return Err(format!("weights must be non-negative with a positive sum: {s}"));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Service,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub kind: TaskKind,
    pub requirement: SecurityRequirement,
    pub allowed_actions: BTreeSet<AdaptationKind>,
    /// Control-flow predecessors.
    pub predecessors: BTreeSet<String>,
    /// Tasks whose output this task consumes.
    pub data_inputs: BTreeSet<String>,
}

impl Task {
    /// A service task with only the mandatory `ReExecute` action allowed.
    pub fn service(id: impl Into<String>, requirement: SecurityRequirement) -> Self {
        Self {
            id: id.into(),
            kind: TaskKind::Service,
            requirement,
            allowed_actions: BTreeSet::from([AdaptationKind::ReExecute]),
            predecessors: BTreeSet::new(),
            data_inputs: BTreeSet::new(),
        }
    }

    pub fn user(id: impl Into<String>, requirement: SecurityRequirement) -> Self {
        Self {
            kind: TaskKind::User,
            ..Self::service(id, requirement)
        }
    }

    pub fn with_actions(mut self, actions: impl IntoIterator<Item = AdaptationKind>) -> Self {
        self.allowed_actions = actions.into_iter().collect();
        self
    }

    pub fn after(mut self, predecessor: impl Into<String>) -> Self {
        self.predecessors.insert(predecessor.into());
        self
    }

    /// Adds `producer` as both a control predecessor and a data input.
    pub fn consumes(mut self, producer: impl Into<String>) -> Self {
        let producer = producer.into();
        self.predecessors.insert(producer.clone());
        self.data_inputs.insert(producer);
        self
    }

    pub fn is_service(&self) -> bool {
        self.kind == TaskKind::Service
    }

    /// Union of control and data dependencies.
    pub fn dependencies(&self) -> impl Iterator<Item = &String> {
        self.predecessors.union(&self.data_inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub id: String,
    pub tenant_id: String,
    pub weights: WeightVector,
    pub tasks: Vec<Task>,
}

impl Workflow {
    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Task indices in execution order: topological, ties broken by task id.
    /// Returns `None` when the dependency graph has a cycle or dangling edge.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let index: BTreeMap<&str, usize> = self.tasks.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        let mut indegree = vec![0usize; self.tasks.len()];
        let mut successors = vec![Vec::new(); self.tasks.len()];
        for (i, task) in self.tasks.iter().enumerate() {
            for dep in task.dependencies() {
                let &d = index.get(dep.as_str())?;
                successors[d].push(i);
                indegree[i] += 1;
            }
        }
        let mut ready: BTreeSet<(&str, usize)> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| (self.tasks[i].id.as_str(), i))
            .collect();
        let mut order = Vec::with_capacity(self.tasks.len());
        while let Some(next) = ready.pop_first() {
            order.push(next.1);
            for &s in &successors[next.1] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert((self.tasks[s].id.as_str(), s));
                }
            }
        }
        (order.len() == self.tasks.len()).then_some(order)
    }

    /// Ids of tasks listing `id` among their data inputs.
    pub fn consumers_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.tasks
            .iter()
            .filter(move |t| t.data_inputs.contains(id))
            .map(|t| t.id.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeCategory {
    Small,
    Medium,
    Large,
}

impl SizeCategory {
    pub const ALL: [SizeCategory; 3] = [SizeCategory::Small, SizeCategory::Medium, SizeCategory::Large];

    /// Inclusive task-count range.
    pub const fn task_range(self) -> (usize, usize) {
        match self {
            SizeCategory::Small => (3, 10),
            SizeCategory::Medium => (10, 50),
            SizeCategory::Large => (50, 100),
        }
    }

    pub fn contains(self, n: usize) -> bool {
        let (lo, hi) = self.task_range();
        (lo..=hi).contains(&n)
    }
}

impl fmt::Display for SizeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SizeCategory::Small => "small",
            SizeCategory::Medium => "medium",
            SizeCategory::Large => "large",
        })
    }
}

impl std::str::FromStr for SizeCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(SizeCategory::Small),
            "medium" => Ok(SizeCategory::Medium),
            "large" => Ok(SizeCategory::Large),
            other => Err(format!(
                "unknown size category {other:?} (expected small, medium or large)"
            )),
        }
    }
}

/// Share of generated tasks that are user tasks.
const USER_TASK_PROBABILITY: f64 = 0.1;
/// Requirement level at which a task is too critical to be skipped.
pub const SKIP_CRITICAL_THRESHOLD: f64 = 0.9;
const OPTIONAL_ACTION_PROBABILITY: f64 = 0.5;
const MAX_PREDECESSORS: usize = 3;

/// Generates a random layered DAG workflow.
///
/// Tasks are spread over `ceil(sqrt(n))` layers. Every task outside the first
/// layer depends on one to three tasks from earlier layers, and consumes the
/// data of each such predecessor with probability one half.
pub fn generate_workflow<R: Rng + ?Sized>(
    category: SizeCategory,
    id: &str,
    tenant_id: &str,
    weights: WeightVector,
    rng: &mut R,
) -> Workflow {
    let (lo, hi) = category.task_range();
    let n = rng.gen_range(lo..=hi);
    let layers = (n as f64).sqrt().ceil() as usize;
    let layer_of = |i: usize| i * layers / n;

    let mut tasks: Vec<Task> = Vec::with_capacity(n);
    for i in 0..n {
        let kind = if rng.gen_bool(USER_TASK_PROBABILITY) {
            TaskKind::User
        } else {
            TaskKind::Service
        };
        let requirement = SecurityRequirement::sample(rng);
        let task_id = match kind {
            TaskKind::Service => format!("serviceTask_{i}"),
            TaskKind::User => format!("userTask_{i}"),
        };
        let mut task = Task {
            id: task_id,
            kind,
            requirement,
            allowed_actions: BTreeSet::new(),
            predecessors: BTreeSet::new(),
            data_inputs: BTreeSet::new(),
        };
        // tasks in earlier layers form a prefix of `tasks`
        let earlier = (0..i).take_while(|&j| layer_of(j) < layer_of(i)).count();
        if earlier > 0 {
            let k = rng.gen_range(1..=MAX_PREDECESSORS).min(earlier);
            let mut picks = sample(rng, earlier, k).into_vec();
            picks.sort_unstable();
            for j in picks {
                let pred = tasks[j].id.clone();
                if rng.gen_bool(0.5) {
                    task.data_inputs.insert(pred.clone());
                }
                task.predecessors.insert(pred);
            }
        }
        tasks.push(assign_allowed_actions(task, rng));
    }

    Workflow {
        id: id.to_owned(),
        tenant_id: tenant_id.to_owned(),
        weights,
        tasks,
    }
}

/// Draws the set of adaptation actions the tenant permits for `task`.
///
/// `ReExecute` is always allowed. `Late`, `Skip`, `Redundancy` and `Reconfig`
/// are each included with probability one half, except that `Skip` is never
/// allowed for a task whose confidentiality or integrity requirement is
/// critical. One draw is consumed per optional action regardless of the
/// outcome, so the stream position does not depend on the requirement.
pub fn assign_allowed_actions<R: Rng + ?Sized>(mut task: Task, rng: &mut R) -> Task {
    let critical = task.requirement.confidentiality >= SKIP_CRITICAL_THRESHOLD
        || task.requirement.integrity >= SKIP_CRITICAL_THRESHOLD;
    let mut allowed = BTreeSet::from([AdaptationKind::ReExecute]);
    for kind in [
        AdaptationKind::Late,
        AdaptationKind::Skip,
        AdaptationKind::Redundancy,
        AdaptationKind::Reconfig,
    ] {
        let drawn = rng.gen_bool(OPTIONAL_ACTION_PROBABILITY);
        if drawn && !(kind == AdaptationKind::Skip && critical) {
            allowed.insert(kind);
        }
    }
    task.allowed_actions = allowed;
    task
}

/// Checks every structural invariant of `workflow`. Returns one
/// human-readable line per violation; an empty list means the workflow is
/// valid.
pub fn validate(workflow: &Workflow) -> Vec<String> {
    let mut violations = Vec::new();

    if !workflow.weights.is_valid() {
        violations.push(format!(
            "weights ({}) must be non-negative with a positive sum",
            workflow.weights
        ));
    }

    let mut ids = BTreeSet::new();
    for task in &workflow.tasks {
        if !ids.insert(task.id.as_str()) {
            violations.push(format!("duplicate task id {}", task.id));
        }
    }

    for task in &workflow.tasks {
        if !task.requirement.is_valid() {
            violations.push(format!("task {}: requirement components must lie in [0,1]", task.id));
        }
        if task.is_service() && task.allowed_actions.is_empty() {
            violations.push(format!(
                "task {}: service task has no allowed adaptation actions",
                task.id
            ));
        }
        for dep in task.dependencies() {
            if dep == &task.id {
                violations.push(format!("task {}: references itself", task.id));
            } else if !ids.contains(dep.as_str()) {
                violations.push(format!("task {}: references missing task {}", task.id, dep));
            }
        }
    }

    if let Some(cycle) = cyclic_tasks(workflow) {
        violations.push(format!("cycle: {}", cycle.join(",")));
    }
    violations
}

/// Tasks lying on a dependency cycle, sorted by id. Self-references and
/// dangling edges are reported separately by `validate` and ignored here.
fn cyclic_tasks(workflow: &Workflow) -> Option<Vec<String>> {
    let ids: BTreeSet<&str> = workflow.tasks.iter().map(|t| t.id.as_str()).collect();
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = ids.iter().map(|&id| (id, BTreeSet::new())).collect();
    for task in &workflow.tasks {
        for dep in task.dependencies() {
            if dep != &task.id && ids.contains(dep.as_str()) {
                edges.get_mut(dep.as_str()).unwrap().insert(task.id.as_str());
            }
        }
    }

    // peel sources, then sinks; what remains sits on or between cycles
    let mut remaining: BTreeSet<&str> = ids;
    for forward in [true, false] {
        let degree = |node: &str, remaining: &BTreeSet<&str>| -> usize {
            if forward {
                edges
                    .iter()
                    .filter(|(from, to)| remaining.contains(*from) && to.contains(node))
                    .count()
            } else {
                edges[node].iter().filter(|to| remaining.contains(*to)).count()
            }
        };
        let mut queue: VecDeque<&str> = remaining
            .iter()
            .copied()
            .filter(|n| degree(n, &remaining) == 0)
            .collect();
        while let Some(node) = queue.pop_front() {
            if !remaining.remove(node) {
                continue;
            }
            let neighbours: Vec<&str> = if forward {
                edges[node].iter().copied().collect()
            } else {
                edges
                    .iter()
                    .filter(|(_, to)| to.contains(node))
                    .map(|(from, _)| *from)
                    .collect()
            };
            for next in neighbours {
                if remaining.contains(next) && degree(next, &remaining) == 0 {
                    queue.push_back(next);
                }
            }
        }
    }
    (!remaining.is_empty()).then(|| remaining.into_iter().map(str::to_owned).collect())
}

pub fn load_workflow(path: impl AsRef<Path>) -> Result<Workflow> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let workflow: Workflow = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    let violations = validate(&workflow);
    if violations.is_empty() {
        Ok(workflow)
    } else {
        Err(Error::InvalidWorkflow(violations))
    }
}

pub fn save_workflow(workflow: &Workflow, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(workflow).expect("workflow serializes");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
