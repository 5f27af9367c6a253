//! Trust-aware service selection.
//!
//! Every service task is matched to the catalog service with the lowest
//! weighted score
//!
//! ```text
//! w_time · normT + w_price · normP − w_security · secFit · trust
//! ```
//!
//! where `normT` and `normP` rescale response time and price from their
//! catalog ranges onto `[0, 1]`, and `secFit` is the mean over C, I and A of
//! how well the service's strength covers the task's requirement (capped at
//! one). Tasks are anonymized first: only the requirement and the weights
//! reach the planner.

use serde::Serialize;

use crate::cloudenv::{Catalog, Service, PRICE_RANGE, RESPONSE_TIME_RANGE};
use crate::error::{Error, Result};
use crate::model::{SecurityRequirement, Task, WeightVector, Workflow};

const FIT_EPSILON: f64 = 1e-6;

/// What the planner sees of a task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchedulingRequest {
    pub requirement: SecurityRequirement,
    pub weights: WeightVector,
    pub anonymized: bool,
}

/// Read-only view of current service trust.
pub trait TrustView {
    /// Effective trust in `service`, in `[0, 1]`.
    fn trust_of(&self, service: &Service) -> f64;
}

/// Every service fully trusted.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullTrust;

impl TrustView for FullTrust {
    fn trust_of(&self, _service: &Service) -> f64 {
        1.0
    }
}

impl<F: Fn(&Service) -> f64> TrustView for F {
    fn trust_of(&self, service: &Service) -> f64 {
        self(service)
    }
}

/// Strips tenant, workflow and task identity.
pub fn anonymize(task: &Task, weights: &WeightVector) -> SchedulingRequest {
    SchedulingRequest {
        requirement: task.requirement,
        weights: *weights,
        anonymized: true,
    }
}

pub fn security_fit(strength: &SecurityRequirement, requirement: &SecurityRequirement) -> f64 {
    strength
        .components()
        .iter()
        .zip(requirement.components())
        .map(|(s, r)| (s / r.max(FIT_EPSILON)).min(1.0))
        .sum::<f64>()
        / 3.0
}

/// Lower is better.
pub fn score(service: &Service, request: &SchedulingRequest, trust: f64) -> f64 {
    let w = &request.weights;
    let norm_time = (service.response_time - RESPONSE_TIME_RANGE.0) / (RESPONSE_TIME_RANGE.1 - RESPONSE_TIME_RANGE.0);
    let norm_price = (service.price - PRICE_RANGE.0) / (PRICE_RANGE.1 - PRICE_RANGE.0);
    w.time * norm_time + w.price * norm_price
        - w.security * security_fit(&service.strength, &request.requirement) * trust
}

/// Lowest-scoring service for `request`; ties go to the smallest service id.
pub fn select<'c>(request: &SchedulingRequest, catalog: &'c Catalog, trust: &dyn TrustView) -> Result<&'c Service> {
    if !request.anonymized {
        return Err(Error::Contract("scheduling request was not anonymized".into()));
    }
    catalog
        .services()
        .iter()
        .map(|s| (score(s, request, trust.trust_of(s)), s))
        .min_by(|(a, sa), (b, sb)| a.total_cmp(b).then_with(|| sa.id.cmp(&sb.id)))
        .map(|(_, s)| s)
        .ok_or(Error::EmptyCatalog)
}

pub fn schedule<'c>(
    task: &Task,
    workflow: &Workflow,
    catalog: &'c Catalog,
    trust: &dyn TrustView,
) -> Result<&'c Service> {
    if !task.is_service() {
        return Err(Error::Contract(format!(
            "user task {} is not scheduled onto a cloud",
            task.id
        )));
    }
    select(&anonymize(task, &workflow.weights), catalog, trust)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloudenv::generate_catalog;
    use crate::rng::seeded;

    fn svc(id: &str, time: f64, price: f64, strength: f64) -> Service {
        Service {
            id: id.into(),
            provider_id: format!("p-{id}"),
            response_time: time,
            price,
            strength: SecurityRequirement::new(strength, strength, strength),
        }
    }

    fn request(weights: WeightVector) -> SchedulingRequest {
        anonymize(&Task::service("t", SecurityRequirement::new(0.5, 0.5, 0.5)), &weights)
    }

    fn workflow(weights: WeightVector) -> Workflow {
        Workflow {
            id: "wf".into(),
            tenant_id: "tenant0".into(),
            weights,
            tasks: vec![Task::service("t", SecurityRequirement::new(0.5, 0.5, 0.5))],
        }
    }

    #[test]
    fn higher_trust_scores_lower() {
        let s = svc("s", 20.0, 5.0, 0.7);
        let r = request(WeightVector::new(0.3, 0.3, 0.4));
        assert!(score(&s, &r, 0.9) < score(&s, &r, 0.5));
    }

    #[test]
    fn fastest_service_has_zero_time_term() {
        let s = svc("s", 1.0, 5.0, 0.7);
        assert_eq!(score(&s, &request(WeightVector::new(1.0, 0.0, 0.0)), 1.0), 0.0);
    }

    #[test]
    fn fit_caps_at_one_and_tolerates_zero_requirements() {
        let strong = SecurityRequirement::new(1.0, 1.0, 1.0);
        assert_eq!(security_fit(&strong, &SecurityRequirement::new(0.0, 0.2, 0.5)), 1.0);
        let weak = SecurityRequirement::new(0.25, 0.0, 0.5);
        let fit = security_fit(&weak, &SecurityRequirement::new(0.5, 0.5, 0.5));
        assert!((fit - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_service_catalog() {
        let catalog = Catalog::from_services(vec![svc("only", 40.0, 9.0, 0.1)]).unwrap();
        let wf = workflow(WeightVector::new(1.0, 1.0, 1.0));
        assert_eq!(schedule(&wf.tasks[0], &wf, &catalog, &FullTrust).unwrap().id, "only");
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let catalog =
            Catalog::from_services(vec![svc("service7", 10.0, 2.0, 0.5), svc("service3", 10.0, 2.0, 0.5)]).unwrap();
        let wf = workflow(WeightVector::new(0.4, 0.4, 0.2));
        assert_eq!(
            schedule(&wf.tasks[0], &wf, &catalog, &FullTrust).unwrap().id,
            "service3"
        );
    }

    #[test]
    fn empty_catalog_is_an_error() {
        let catalog = Catalog::from_services(vec![]).unwrap();
        let wf = workflow(WeightVector::new(0.4, 0.4, 0.2));
        assert!(matches!(
            schedule(&wf.tasks[0], &wf, &catalog, &FullTrust),
            Err(Error::EmptyCatalog)
        ));
    }

    #[test]
    fn user_tasks_are_not_scheduled() {
        let catalog = generate_catalog(5, 3, &mut seeded(1));
        let mut wf = workflow(WeightVector::new(0.4, 0.4, 0.2));
        wf.tasks[0] = Task::user("u", SecurityRequirement::new(0.5, 0.5, 0.5));
        assert!(schedule(&wf.tasks[0], &wf, &catalog, &FullTrust).is_err());
    }

    #[test]
    fn anonymized_request_is_tenant_independent() {
        let req = SecurityRequirement::new(0.3, 0.7, 0.1);
        let w = WeightVector::new(0.4, 0.4, 0.2);
        let a = anonymize(&Task::service("a", req), &w);
        let b = anonymize(&Task::service("b", req).after("x"), &w);
        assert_eq!(a, b);
        assert_eq!(a.requirement, req);
        assert!(a.anonymized);
        let json = serde_json::to_value(&a).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["anonymized", "requirement", "weights"]);
    }

    #[test]
    fn default_catalog_selection_matches_exhaustive_search() {
        // brute force over the 15 services, written independently of `select`
        let catalog = generate_catalog(5, 3, &mut seeded(1));
        let r = request(WeightVector::new(0.4, 0.4, 0.2));
        let mut best: Option<(f64, &str)> = None;
        for s in catalog.services() {
            let sc = score(s, &r, 1.0);
            if best.is_none_or(|(b, id)| sc < b || (sc == b && s.id.as_str() < id)) {
                best = Some((sc, &s.id));
            }
        }
        assert_eq!(select(&r, &catalog, &FullTrust).unwrap().id, best.unwrap().1);
        assert_eq!(best.unwrap().1, "service0");
    }
}
