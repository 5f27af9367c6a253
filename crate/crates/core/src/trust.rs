//! Provider, service and tenant trust.
//!
//! Trust lives in `[0, 1]` and starts at 1. A detected violation multiplies
//! the subject's trust by `1 − β · severity`; a clean execution moves it a
//! fraction `α` of the way back towards 1. A violation on a service penalizes
//! the service with the full β and its provider with β/2.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloudenv::{AttackType, Service};
use crate::error::{Error, Result};
use crate::model::SecurityRequirement;
use crate::scheduler::TrustView;

pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subject {
    Provider,
    Service,
    Tenant,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Subject::Provider => "Provider",
            Subject::Service => "Service",
            Subject::Tenant => "Tenant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustScore {
    pub subject: Subject,
    pub subject_id: String,
    pub value: f64,
}

impl TrustScore {
    pub fn new(subject: Subject, subject_id: impl Into<String>, value: f64) -> Self {
        Self {
            subject,
            subject_id: subject_id.into(),
            value: value.clamp(0.0, 1.0),
        }
    }
}

/// Graded reaction to a tenant's trust level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TenantResponse {
    None,
    /// The tenant's IDS alerts are suppressed.
    IgnoreAlerts,
    /// New submissions are deferred by one IDS window.
    IsolateResources,
    /// New submissions are rejected.
    BlockActivity,
}

pub fn severity_of(impact: &SecurityRequirement) -> f64 {
    impact.mean()
}

/// Mean CIA impact of `attack`.
pub fn severity(attack: AttackType) -> f64 {
    severity_of(&attack.impact())
}

pub fn penalize(mut score: TrustScore, attack: AttackType, beta: f64) -> TrustScore {
    score.value = (score.value * (1.0 - beta * severity(attack))).clamp(0.0, 1.0);
    score
}

pub fn reward(mut score: TrustScore, alpha: f64) -> TrustScore {
    score.value = (score.value + alpha * (1.0 - score.value)).clamp(0.0, 1.0);
    score
}

pub fn tenant_response(score: &TrustScore) -> Result<TenantResponse> {
    if score.subject != Subject::Tenant {
        return Err(Error::Contract(format!(
            "tenant response requested for {} {}",
            score.subject, score.subject_id
        )));
    }
    Ok(match score.value {
        v if v >= 0.6 => TenantResponse::None,
        v if v >= 0.4 => TenantResponse::IgnoreAlerts,
        v if v >= 0.2 => TenantResponse::IsolateResources,
        _ => TenantResponse::BlockActivity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TrustOp {
    Penalize { attack: AttackType, beta: f64 },
    Reward { alpha: f64 },
}

/// One pending registry update, ordered by `(detected_at, instance_id, subject_id)`
/// when merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustUpdate {
    pub detected_at: f64,
    pub instance_id: String,
    pub subject: Subject,
    pub subject_id: String,
    pub op: TrustOp,
}

/// Trust values of every subject seen so far. Unseen subjects have trust 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrustRegistry {
    values: BTreeMap<(Subject, String), f64>,
}

impl TrustRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, subject: Subject, id: &str) -> f64 {
        self.values.get(&(subject, id.to_owned())).copied().unwrap_or(1.0)
    }

    pub fn score(&self, subject: Subject, id: &str) -> TrustScore {
        TrustScore::new(subject, id, self.get(subject, id))
    }

    pub fn set(&mut self, score: TrustScore) {
        self.values.insert((score.subject, score.subject_id), score.value);
    }

    /// Applies `op` and returns the new score.
    pub fn apply(&mut self, subject: Subject, id: &str, op: TrustOp) -> TrustScore {
        let current = self.score(subject, id);
        let next = match op {
            TrustOp::Penalize { attack, beta } => penalize(current, attack, beta),
            TrustOp::Reward { alpha } => reward(current, alpha),
        };
        self.set(next.clone());
        next
    }

    /// Applies updates gathered from independent instances in deterministic
    /// order.
    pub fn merge(&mut self, mut updates: Vec<TrustUpdate>) {
        updates.sort_by(|a, b| {
            a.detected_at
                .total_cmp(&b.detected_at)
                .then_with(|| a.instance_id.cmp(&b.instance_id))
                .then_with(|| a.subject_id.cmp(&b.subject_id))
        });
        for u in updates {
            self.apply(u.subject, &u.subject_id, u.op);
        }
    }

    pub fn snapshot(&self) -> Vec<TrustScore> {
        self.values
            .iter()
            .map(|((subject, id), &value)| TrustScore::new(*subject, id.clone(), value))
            .collect()
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.snapshot()).expect("trust snapshot serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Scheduling trust is the product of service and provider trust.
impl TrustView for TrustRegistry {
    fn trust_of(&self, service: &Service) -> f64 {
        self.get(Subject::Service, &service.id) * self.get(Subject::Provider, &service.provider_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provider(value: f64) -> TrustScore {
        TrustScore::new(Subject::Provider, "provider0", value)
    }

    fn tenant(value: f64) -> TrustScore {
        TrustScore::new(Subject::Tenant, "tenant0", value)
    }

    #[test]
    fn severity_is_mean_impact() {
        assert!((severity(AttackType::DoS) - 0.56).abs() < 1e-12);
        assert!((severity(AttackType::Probe) - 0.44 / 3.0).abs() < 1e-12);
        assert_eq!(severity_of(&SecurityRequirement::new(0.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn penalize_dos_from_full_trust() {
        assert!((penalize(provider(1.0), AttackType::DoS, 0.5).value - 0.72).abs() < 1e-12);
    }

    #[test]
    fn zero_trust_is_absorbing_and_zero_beta_is_identity() {
        assert_eq!(penalize(provider(0.0), AttackType::R2L, 0.5).value, 0.0);
        assert_eq!(penalize(provider(0.37), AttackType::R2L, 0.0).value, 0.37);
    }

    #[test]
    fn reward_moves_towards_one() {
        assert_eq!(reward(provider(1.0), 0.01).value, 1.0);
        assert!((reward(provider(0.5), 0.01).value - 0.505).abs() < 1e-12);
        let mut s = provider(0.1);
        for _ in 0..1000 {
            let next = reward(s.clone(), 0.01);
            assert!(next.value >= s.value && next.value <= 1.0);
            s = next;
        }
        assert!(s.value > 0.99);
    }

    #[test]
    fn tenant_tiers() {
        assert_eq!(tenant_response(&tenant(0.9)).unwrap(), TenantResponse::None);
        assert_eq!(tenant_response(&tenant(0.6)).unwrap(), TenantResponse::None);
        assert_eq!(tenant_response(&tenant(0.4)).unwrap(), TenantResponse::IgnoreAlerts);
        assert_eq!(
            tenant_response(&tenant(0.39)).unwrap(),
            TenantResponse::IsolateResources
        );
        assert_eq!(tenant_response(&tenant(0.2)).unwrap(), TenantResponse::IsolateResources);
        assert_eq!(tenant_response(&tenant(0.1)).unwrap(), TenantResponse::BlockActivity);
    }

    #[test]
    fn tenant_response_rejects_other_subjects() {
        assert!(matches!(tenant_response(&provider(0.5)), Err(Error::Contract(_))));
    }

    #[test]
    fn registry_defaults_to_full_trust_and_combines_for_scheduling() {
        let mut reg = TrustRegistry::new();
        let svc = Service {
            id: "service4".into(),
            provider_id: "provider1".into(),
            response_time: 10.0,
            price: 1.0,
            strength: SecurityRequirement::new(0.5, 0.5, 0.5),
        };
        assert_eq!(reg.trust_of(&svc), 1.0);
        reg.apply(
            Subject::Service,
            "service4",
            TrustOp::Penalize {
                attack: AttackType::DoS,
                beta: 0.5,
            },
        );
        reg.apply(
            Subject::Provider,
            "provider1",
            TrustOp::Penalize {
                attack: AttackType::DoS,
                beta: 0.25,
            },
        );
        assert!((reg.trust_of(&svc) - 0.72 * 0.86).abs() < 1e-12);
    }

    #[test]
    fn merge_order_is_independent_of_input_order() {
        let up = |t: f64, inst: &str, op| TrustUpdate {
            detected_at: t,
            instance_id: inst.into(),
            subject: Subject::Provider,
            subject_id: "provider0".into(),
            op,
        };
        let updates = vec![
            up(5.0, "instance1", TrustOp::Reward { alpha: 0.3 }),
            up(
                5.0,
                "instance0",
                TrustOp::Penalize {
                    attack: AttackType::DoS,
                    beta: 0.5,
                },
            ),
            up(
                1.0,
                "instance2",
                TrustOp::Penalize {
                    attack: AttackType::Probe,
                    beta: 0.5,
                },
            ),
        ];
        let mut a = TrustRegistry::new();
        a.merge(updates.clone());
        let mut b = TrustRegistry::new();
        b.merge(updates.into_iter().rev().collect());
        assert_eq!(a, b);
    }

    #[test]
    fn snapshot_export_format() {
        let mut reg = TrustRegistry::new();
        reg.set(TrustScore::new(Subject::Tenant, "tenant1", 0.5));
        let json = serde_json::to_value(reg.snapshot()).unwrap();
        assert_eq!(json[0]["subject"], "Tenant");
        assert_eq!(json[0]["subject_id"], "tenant1");
        assert_eq!(json[0]["value"], 0.5);
    }
}
