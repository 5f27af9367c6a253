//! Adaptation actions and the cost-driven decision engine.
//!
//! Each action kind has a time/price formula relative to the attacked
//! execution (and, for `ReExecute` and `Redundancy`, a backup service), a CIA
//! mitigation impact, and the set of attack types it mitigates. On a detected
//! attack the engine evaluates
//!
//! ```text
//! mitigation(aa, t, a) = Σ_{obj ∈ {C,I,A}} (1 − obj_t · obj_a) · obj_aa
//! cost(aa, t)          = W_price · (price(aa) + price_overhead(aa))
//!                      + W_time  · (time(aa)  + time_overhead(aa))
//!                      − W_security · mitigation(aa, t, a)
//! ```
//!
//! over every allowed action that mitigates the attack and picks the cheapest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloudenv::{AttackType, Service};
use crate::engine::{ChargeKind, InstanceState, TaskStatus};
use crate::error::{Error, Result};
use crate::model::{SecurityRequirement, Task, WeightVector, Workflow};

/// Declaration order is the final tie-break order of [`decide`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AdaptationKind {
    Late,
    Skip,
    ReExecute,
    Redundancy,
    Reconfig,
}

impl AdaptationKind {
    pub const ALL: [AdaptationKind; 5] = [
        AdaptationKind::Late,
        AdaptationKind::Skip,
        AdaptationKind::ReExecute,
        AdaptationKind::Redundancy,
        AdaptationKind::Reconfig,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AdaptationKind::Late => "Late",
            AdaptationKind::Skip => "Skip",
            AdaptationKind::ReExecute => "ReExecute",
            AdaptationKind::Redundancy => "Redundancy",
            AdaptationKind::Reconfig => "Reconfig",
        }
    }

    pub fn needs_backup(self) -> bool {
        matches!(self, AdaptationKind::ReExecute | AdaptationKind::Redundancy)
    }
}

impl fmt::Display for AdaptationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub kind: AdaptationKind,
    pub mitigation_impact: SecurityRequirement,
    pub mitigates: BTreeSet<AttackType>,
    pub time_overhead: f64,
    pub price_overhead: f64,
}

impl ActionSpec {
    pub fn default_for(kind: AdaptationKind) -> Self {
        use AttackType::*;
        let (impact, mitigates): ((f64, f64, f64), &[AttackType]) = match kind {
            AdaptationKind::Late => ((0.7, 0.6, 0.8), &[DoS]),
            AdaptationKind::Skip => ((0.5, 0.4, 0.6), &[Probe]),
            AdaptationKind::ReExecute => ((0.8, 0.9, 0.7), &[DoS, Probe, U2R, R2L]),
            AdaptationKind::Redundancy => ((0.9, 0.8, 0.9), &[DoS, U2R]),
            AdaptationKind::Reconfig => ((0.6, 0.7, 0.5), &[DoS, Probe, U2R, R2L]),
        };
        Self {
            kind,
            mitigation_impact: SecurityRequirement::new(impact.0, impact.1, impact.2),
            mitigates: mitigates.iter().copied().collect(),
            time_overhead: 0.0,
            price_overhead: 0.0,
        }
    }

    pub fn mitigates(&self, attack: AttackType) -> bool {
        self.mitigates.contains(&attack)
    }
}

/// Scale factors applied to the attacked execution by `Late` and `Reconfig`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Multipliers {
    pub t_late: f64,
    pub t_reconfig: f64,
    pub p_reconfig: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Self {
            t_late: 1.5,
            t_reconfig: 1.2,
            p_reconfig: 1.2,
        }
    }
}

/// The five action specs plus shared multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionCatalog {
    specs: BTreeMap<AdaptationKind, ActionSpec>,
    pub multipliers: Multipliers,
}

impl Default for ActionCatalog {
    fn default() -> Self {
        Self {
            specs: AdaptationKind::ALL
                .iter()
                .map(|&k| (k, ActionSpec::default_for(k)))
                .collect(),
            multipliers: Multipliers::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecOverride {
    mitigation_impact: Option<SecurityRequirement>,
    mitigates: Option<BTreeSet<AttackType>>,
    time_overhead: Option<f64>,
    price_overhead: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogOverride {
    #[serde(rename = "Late")]
    late: Option<SpecOverride>,
    #[serde(rename = "Skip")]
    skip: Option<SpecOverride>,
    #[serde(rename = "ReExecute")]
    re_execute: Option<SpecOverride>,
    #[serde(rename = "Redundancy")]
    redundancy: Option<SpecOverride>,
    #[serde(rename = "Reconfig")]
    reconfig: Option<SpecOverride>,
    multipliers: Option<Multipliers>,
}

impl ActionCatalog {
    pub fn spec(&self, kind: AdaptationKind) -> &ActionSpec {
        &self.specs[&kind]
    }

    pub fn spec_mut(&mut self, kind: AdaptationKind) -> &mut ActionSpec {
        self.specs.get_mut(&kind).expect("all kinds present")
    }

    pub fn specs(&self) -> impl Iterator<Item = &ActionSpec> {
        self.specs.values()
    }

    /// Parses an override document. Absent keys keep their default values.
    pub fn from_override_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let overrides: CatalogOverride = serde_json::from_str(text)?;
        let mut catalog = Self::default();
        let per_kind = [
            (AdaptationKind::Late, overrides.late),
            (AdaptationKind::Skip, overrides.skip),
            (AdaptationKind::ReExecute, overrides.re_execute),
            (AdaptationKind::Redundancy, overrides.redundancy),
            (AdaptationKind::Reconfig, overrides.reconfig),
        ];
        for (kind, o) in per_kind {
            let Some(o) = o else { continue };
            let spec = catalog.spec_mut(kind);
            if let Some(v) = o.mitigation_impact {
                spec.mitigation_impact = v;
            }
            if let Some(v) = o.mitigates {
                spec.mitigates = v;
            }
            if let Some(v) = o.time_overhead {
                spec.time_overhead = v;
            }
            if let Some(v) = o.price_overhead {
                spec.price_overhead = v;
            }
        }
        if let Some(m) = overrides.multipliers {
            catalog.multipliers = m;
        }
        Ok(catalog)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let catalog = Self::from_override_json(&text).map_err(|e| Error::parse(path, e))?;
        catalog
            .check()
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Ok(catalog)
    }

    fn check(&self) -> std::result::Result<(), String> {
        for spec in self.specs.values() {
            if !spec.mitigation_impact.is_valid() {
                return Err(format!("{}: mitigation_impact must lie in [0,1]", spec.kind));
            }
            if !(spec.time_overhead >= 0.0 && spec.price_overhead >= 0.0) {
                return Err(format!("{}: overheads must be non-negative", spec.kind));
            }
        }
        let m = self.multipliers;
        if !(m.t_late > 0.0 && m.t_reconfig > 0.0 && m.p_reconfig > 0.0) {
            return Err("multipliers must be positive".into());
        }
        Ok(())
    }
}

/// Response time and price of one service, as seen by an adaptation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceQuote {
    pub service_id: String,
    pub time: f64,
    pub price: f64,
}

impl From<&Service> for ServiceQuote {
    fn from(s: &Service) -> Self {
        Self {
            service_id: s.id.clone(),
            time: s.response_time,
            price: s.price,
        }
    }
}

/// The attacked execution and, when one exists, the backup service.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationContext {
    pub original: ServiceQuote,
    pub backup: Option<ServiceQuote>,
}

impl AdaptationContext {
    pub fn new(time: f64, price: f64) -> Self {
        Self {
            original: ServiceQuote {
                service_id: String::new(),
                time,
                price,
            },
            backup: None,
        }
    }

    pub fn with_backup(mut self, time: f64, price: f64) -> Self {
        self.backup = Some(ServiceQuote {
            service_id: String::new(),
            time,
            price,
        });
        self
    }

    pub fn from_services(original: &Service, backup: Option<&Service>) -> Self {
        Self {
            original: original.into(),
            backup: backup.map(Into::into),
        }
    }

    /// Copy with every time divided by `time_unit` and every price by
    /// `price_unit`. Action times and prices are homogeneous in the quotes,
    /// so every candidate is rescaled by the same factors.
    pub fn in_units(&self, time_unit: f64, price_unit: f64) -> Self {
        let scale = |q: &ServiceQuote| ServiceQuote {
            service_id: q.service_id.clone(),
            time: q.time / time_unit,
            price: q.price / price_unit,
        };
        Self {
            original: scale(&self.original),
            backup: self.backup.as_ref().map(scale),
        }
    }
}

/// Time and price of carrying out `kind`, before overheads.
pub fn adapt_time_price(kind: AdaptationKind, ctx: &AdaptationContext, m: &Multipliers) -> Result<(f64, f64)> {
    let (t, p) = (ctx.original.time, ctx.original.price);
    let backup = || ctx.backup.as_ref().ok_or_else(|| Error::NoBackup(kind.to_string()));
    Ok(match kind {
        AdaptationKind::Late => (t * m.t_late, p),
        AdaptationKind::Skip => (0.0, 0.0),
        AdaptationKind::ReExecute => {
            let b = backup()?;
            (b.time, b.price)
        }
        AdaptationKind::Redundancy => {
            let b = backup()?;
            (b.time, p + b.price)
        }
        AdaptationKind::Reconfig => (t * m.t_reconfig, p * m.p_reconfig),
    })
}

pub fn mitigation_score(action: &ActionSpec, requirement: &SecurityRequirement, attack: AttackType) -> f64 {
    let impact = attack.impact();
    requirement
        .components()
        .iter()
        .zip(impact.components())
        .zip(action.mitigation_impact.components())
        .map(|((obj_t, obj_a), obj_aa)| (1.0 - obj_t * obj_a) * obj_aa)
        .sum()
}

/// One evaluated candidate of a decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub kind: AdaptationKind,
    pub adapt_time: f64,
    pub adapt_price: f64,
    pub mitigation_score: f64,
    pub cost: f64,
}

fn evaluate(
    spec: &ActionSpec,
    task: &Task,
    attack: AttackType,
    ctx: &AdaptationContext,
    weights: &WeightVector,
    m: &Multipliers,
) -> Result<Candidate> {
    let (adapt_time, adapt_price) = adapt_time_price(spec.kind, ctx, m)?;
    let mitigation = mitigation_score(spec, &task.requirement, attack);
    let cost = weights.price * (adapt_price + spec.price_overhead) + weights.time * (adapt_time + spec.time_overhead)
        - weights.security * mitigation;
    Ok(Candidate {
        kind: spec.kind,
        adapt_time,
        adapt_price,
        mitigation_score: mitigation,
        cost,
    })
}

/// Weighted cost of answering `attack` on `task` with `kind`.
///
/// Fails when the task does not allow `kind`, when `kind` does not mitigate
/// `attack`, or when `kind` needs a backup the context lacks.
pub fn adaptation_cost(
    kind: AdaptationKind,
    task: &Task,
    attack: AttackType,
    ctx: &AdaptationContext,
    weights: &WeightVector,
    actions: &ActionCatalog,
) -> Result<f64> {
    let spec = actions.spec(kind);
    if !task.allowed_actions.contains(&kind) {
        return Err(Error::Inapplicable {
            kind: kind.to_string(),
            reason: format!("not allowed for task {}", task.id),
        });
    }
    if !spec.mitigates(attack) {
        return Err(Error::Inapplicable {
            kind: kind.to_string(),
            reason: format!("does not mitigate {attack}"),
        });
    }
    Ok(evaluate(spec, task, attack, ctx, weights, &actions.multipliers)?.cost)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptationDecision {
    pub chosen: AdaptationKind,
    pub cost: f64,
    /// Mitigation score of the chosen action.
    pub mitigation_score: f64,
    pub candidates: Vec<Candidate>,
    /// Set when no candidate applied and `ReExecute` was chosen by default.
    pub fallback: bool,
}

/// Picks the cheapest allowed action that mitigates `attack`.
///
/// Equal costs prefer the higher mitigation score, then the earlier kind in
/// declaration order. Actions needing a backup are not candidates when the
/// context has none. With no candidates the decision falls back to
/// `ReExecute`.
pub fn decide(
    task: &Task,
    attack: AttackType,
    ctx: &AdaptationContext,
    weights: &WeightVector,
    actions: &ActionCatalog,
) -> AdaptationDecision {
    let candidates: Vec<Candidate> = task
        .allowed_actions
        .iter()
        .map(|&k| actions.spec(k))
        .filter(|spec| spec.mitigates(attack))
        .filter_map(|spec| evaluate(spec, task, attack, ctx, weights, &actions.multipliers).ok())
        .collect();

    let best = candidates.iter().min_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(b.mitigation_score.total_cmp(&a.mitigation_score))
            .then(a.kind.cmp(&b.kind))
    });

    match best {
        Some(best) => AdaptationDecision {
            chosen: best.kind,
            cost: best.cost,
            mitigation_score: best.mitigation_score,
            candidates: candidates.clone(),
            fallback: false,
        },
        None => {
            let spec = actions.spec(AdaptationKind::ReExecute);
            let mitigation = mitigation_score(spec, &task.requirement, attack);
            let cost = evaluate(spec, task, attack, ctx, weights, &actions.multipliers)
                .map(|c| c.cost)
                .unwrap_or(f64::NAN);
            AdaptationDecision {
                chosen: AdaptationKind::ReExecute,
                cost,
                mitigation_score: mitigation,
                candidates,
                fallback: true,
            }
        }
    }
}

/// What an applied adaptation did to the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedAdaptation {
    pub kind: AdaptationKind,
    pub time: f64,
    pub price: f64,
    /// Service whose re-run produces the task result; `None` for `Skip`.
    pub rerun_on: Option<String>,
    /// Tasks newly flagged as consuming skipped output.
    pub tainted: Vec<String>,
}

/// Carries out `kind` for `task` on `state`: charges its time and price
/// (including overheads) and, for `Skip`, marks the task skipped and flags
/// every consumer of its data. The caller re-runs the task on `rerun_on`.
pub fn apply(
    kind: AdaptationKind,
    task: &Task,
    workflow: &Workflow,
    state: &mut InstanceState,
    ctx: &AdaptationContext,
    actions: &ActionCatalog,
) -> Result<AppliedAdaptation> {
    let spec = actions.spec(kind);
    let (time, price) = adapt_time_price(kind, ctx, &actions.multipliers)?;
    let (time, price) = (time + spec.time_overhead, price + spec.price_overhead);
    state.charge(&task.id, ChargeKind::Adaptation(kind), time, price);

    let mut tainted = Vec::new();
    let rerun_on = match kind {
        AdaptationKind::Skip => {
            state.set_status(&task.id, TaskStatus::Skipped);
            for consumer in workflow.consumers_of(&task.id) {
                if state.taint(consumer) {
                    tainted.push(consumer.to_owned());
                }
            }
            None
        }
        AdaptationKind::Late | AdaptationKind::Reconfig => Some(ctx.original.service_id.clone()),
        AdaptationKind::ReExecute | AdaptationKind::Redundancy => ctx.backup.as_ref().map(|b| b.service_id.clone()),
    };
    Ok(AppliedAdaptation {
        kind,
        time,
        price,
        rerun_on,
        tainted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} != {b}");
    }

    fn all_allowed(req: SecurityRequirement) -> Task {
        Task::service("t", req).with_actions(AdaptationKind::ALL)
    }

    #[test]
    fn default_catalog_matches_action_table() {
        let c = ActionCatalog::default();
        assert_eq!(
            c.spec(AdaptationKind::Late).mitigation_impact,
            SecurityRequirement::new(0.7, 0.6, 0.8)
        );
        assert_eq!(
            c.spec(AdaptationKind::Skip).mitigates,
            BTreeSet::from([AttackType::Probe])
        );
        assert_eq!(
            c.spec(AdaptationKind::Redundancy).mitigates,
            BTreeSet::from([AttackType::DoS, AttackType::U2R])
        );
        assert_eq!(c.spec(AdaptationKind::Reconfig).mitigates.len(), 4);
        assert_eq!(c.multipliers, Multipliers::default());
    }

    #[test]
    fn skip_costs_nothing() {
        let ctx = AdaptationContext::new(17.0, 3.5).with_backup(2.0, 2.0);
        assert_eq!(
            adapt_time_price(AdaptationKind::Skip, &ctx, &Multipliers::default()).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn redundancy_pays_both_services() {
        let ctx = AdaptationContext::new(10.0, 2.0).with_backup(4.0, 3.0);
        assert_eq!(
            adapt_time_price(AdaptationKind::Redundancy, &ctx, &Multipliers::default()).unwrap(),
            (4.0, 5.0)
        );
    }

    #[test]
    fn late_scales_time_only() {
        let ctx = AdaptationContext::new(10.0, 2.0);
        assert_eq!(
            adapt_time_price(AdaptationKind::Late, &ctx, &Multipliers::default()).unwrap(),
            (15.0, 2.0)
        );
    }

    #[test]
    fn backup_actions_need_backup() {
        let ctx = AdaptationContext::new(10.0, 2.0);
        for kind in [AdaptationKind::ReExecute, AdaptationKind::Redundancy] {
            assert!(matches!(
                adapt_time_price(kind, &ctx, &Multipliers::default()),
                Err(Error::NoBackup(_))
            ));
        }
    }

    #[test]
    fn zero_impact_scores_zero() {
        let mut spec = ActionSpec::default_for(AdaptationKind::Late);
        spec.mitigation_impact = SecurityRequirement::new(0.0, 0.0, 0.0);
        assert_eq!(
            mitigation_score(&spec, &SecurityRequirement::new(0.3, 0.9, 0.1), AttackType::R2L),
            0.0
        );
    }

    #[test]
    fn mitigation_hand_evaluated() {
        let reexec = ActionSpec::default_for(AdaptationKind::ReExecute);
        assert_close(
            mitigation_score(&reexec, &SecurityRequirement::new(1.0, 1.0, 1.0), AttackType::DoS),
            1.056,
        );
        let skip = ActionSpec::default_for(AdaptationKind::Skip);
        assert_close(
            mitigation_score(&skip, &SecurityRequirement::new(0.5, 0.5, 0.5), AttackType::Probe),
            1.401,
        );
    }

    #[test]
    fn security_only_weights_negate_mitigation() {
        let task = all_allowed(SecurityRequirement::new(0.4, 0.6, 0.8));
        let ctx = AdaptationContext::new(20.0, 4.0).with_backup(9.0, 1.0);
        let actions = ActionCatalog::default();
        for kind in [AdaptationKind::ReExecute, AdaptationKind::Reconfig] {
            let cost = adaptation_cost(
                kind,
                &task,
                AttackType::R2L,
                &ctx,
                &WeightVector::new(0.0, 0.0, 1.0),
                &actions,
            )
            .unwrap();
            assert_close(
                cost,
                -mitigation_score(actions.spec(kind), &task.requirement, AttackType::R2L),
            );
        }
    }

    #[test]
    fn skip_cost_composes() {
        let task = all_allowed(SecurityRequirement::new(0.5, 0.5, 0.5));
        let ctx = AdaptationContext::new(20.0, 4.0);
        let cost = adaptation_cost(
            AdaptationKind::Skip,
            &task,
            AttackType::Probe,
            &ctx,
            &WeightVector::new(0.4, 0.4, 0.2),
            &ActionCatalog::default(),
        )
        .unwrap();
        assert_close(cost, -0.2802);
    }

    #[test]
    fn cost_is_linear_in_weights() {
        let task = all_allowed(SecurityRequirement::new(0.2, 0.7, 0.4));
        let ctx = AdaptationContext::new(12.0, 6.0).with_backup(30.0, 0.5);
        let w = WeightVector::new(0.3, 0.5, 0.2);
        let actions = ActionCatalog::default();
        for kind in AdaptationKind::ALL {
            let Ok(single) = adaptation_cost(kind, &task, AttackType::DoS, &ctx, &w, &actions) else {
                continue;
            };
            let double = adaptation_cost(kind, &task, AttackType::DoS, &ctx, &w.scaled(2.0), &actions).unwrap();
            assert_close(double, 2.0 * single);
        }
    }

    #[test]
    fn inapplicable_actions_rejected() {
        let task = Task::service("t", SecurityRequirement::new(0.5, 0.5, 0.5))
            .with_actions([AdaptationKind::ReExecute, AdaptationKind::Skip]);
        let ctx = AdaptationContext::new(1.0, 1.0).with_backup(1.0, 1.0);
        let w = WeightVector::new(1.0, 1.0, 1.0);
        let actions = ActionCatalog::default();
        assert!(adaptation_cost(AdaptationKind::Skip, &task, AttackType::DoS, &ctx, &w, &actions).is_err());
        assert!(adaptation_cost(AdaptationKind::Late, &task, AttackType::DoS, &ctx, &w, &actions).is_err());
        assert!(adaptation_cost(AdaptationKind::Skip, &task, AttackType::Probe, &ctx, &w, &actions).is_ok());
    }

    #[test]
    fn r2l_candidates_are_reexecute_and_reconfig() {
        let task = all_allowed(SecurityRequirement::new(0.5, 0.5, 0.5));
        let ctx = AdaptationContext::new(10.0, 2.0).with_backup(5.0, 5.0);
        let d = decide(
            &task,
            AttackType::R2L,
            &ctx,
            &WeightVector::new(0.4, 0.4, 0.2),
            &ActionCatalog::default(),
        );
        let kinds: Vec<_> = d.candidates.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, [AdaptationKind::ReExecute, AdaptationKind::Reconfig]);
        assert!(!d.fallback);
    }

    #[test]
    fn single_candidate_wins_regardless_of_weights() {
        let task = Task::service("t", SecurityRequirement::new(0.5, 0.5, 0.5))
            .with_actions([AdaptationKind::ReExecute, AdaptationKind::Late]);
        let ctx = AdaptationContext::new(10.0, 2.0).with_backup(50.0, 10.0);
        for w in [WeightVector::new(1.0, 0.0, 0.0), WeightVector::new(0.0, 0.0, 1.0)] {
            let d = decide(&task, AttackType::Probe, &ctx, &w, &ActionCatalog::default());
            assert_eq!(d.chosen, AdaptationKind::ReExecute);
            assert_eq!(d.candidates.len(), 1);
        }
    }

    #[test]
    fn equal_costs_prefer_higher_mitigation_then_kind_order() {
        // zero weights make every cost 0
        let task = all_allowed(SecurityRequirement::new(0.5, 0.5, 0.5));
        let ctx = AdaptationContext::new(10.0, 2.0).with_backup(5.0, 5.0);
        let w = WeightVector::new(0.0, 0.0, 0.0);
        let d = decide(&task, AttackType::DoS, &ctx, &w, &ActionCatalog::default());
        // Redundancy has the largest impact sum among DoS mitigators
        assert_eq!(d.chosen, AdaptationKind::Redundancy);

        let mut actions = ActionCatalog::default();
        actions.spec_mut(AdaptationKind::Reconfig).mitigation_impact = SecurityRequirement::new(0.9, 0.8, 0.9);
        let d = decide(&task, AttackType::DoS, &ctx, &w, &actions);
        assert_eq!(d.chosen, AdaptationKind::Redundancy);
    }

    #[test]
    fn no_backup_excludes_backup_actions_and_falls_back() {
        let task = Task::service("t", SecurityRequirement::new(0.5, 0.5, 0.5))
            .with_actions([AdaptationKind::ReExecute, AdaptationKind::Redundancy]);
        let ctx = AdaptationContext::new(10.0, 2.0);
        let d = decide(
            &task,
            AttackType::DoS,
            &ctx,
            &WeightVector::new(1.0, 1.0, 1.0),
            &ActionCatalog::default(),
        );
        assert!(d.fallback);
        assert_eq!(d.chosen, AdaptationKind::ReExecute);
        assert!(d.candidates.is_empty());
    }

    #[test]
    fn override_file_replaces_only_named_fields() {
        let json = r#"{"Late": {"time_overhead": 2.5, "mitigates": ["DoS", "R2L"]}, "multipliers": {"t_late": 3.0}}"#;
        let c = ActionCatalog::from_override_json(json).unwrap();
        let late = c.spec(AdaptationKind::Late);
        assert_eq!(late.time_overhead, 2.5);
        assert!(late.mitigates(AttackType::R2L));
        assert_eq!(late.mitigation_impact, SecurityRequirement::new(0.7, 0.6, 0.8));
        assert_eq!(c.multipliers.t_late, 3.0);
        assert_eq!(c.multipliers.t_reconfig, 1.2);
        assert_eq!(
            c.spec(AdaptationKind::Skip),
            &ActionSpec::default_for(AdaptationKind::Skip)
        );
    }

    #[test]
    fn override_file_rejects_unknown_kind() {
        let err = ActionCatalog::from_override_json(r#"{"Resequence": {}}"#).unwrap_err();
        assert!(err.to_string().contains("Resequence"));
    }

    #[test]
    fn unit_rescaling_scales_every_candidate() {
        let ctx = AdaptationContext::new(10.0, 2.0).with_backup(4.0, 3.0);
        let scaled = ctx.in_units(50.0, 10.0);
        let m = Multipliers::default();
        for kind in AdaptationKind::ALL {
            let (t, p) = adapt_time_price(kind, &ctx, &m).unwrap();
            let (ts, ps) = adapt_time_price(kind, &scaled, &m).unwrap();
            assert!((ts - t / 50.0).abs() < 1e-12 && (ps - p / 10.0).abs() < 1e-12, "{kind}");
        }
    }
}
