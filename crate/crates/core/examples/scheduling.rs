//! Schedules the same task under two weight profiles, then again after the
//! chosen service's provider loses trust.
//!
//! cargo run --example scheduling

use wfguard::cloudenv::{backup_service, generate_catalog, AttackType};
use wfguard::model::{SecurityRequirement, Task, WeightVector};
use wfguard::rng::seeded;
use wfguard::scheduler::TrustView;
use wfguard::scheduler::{anonymize, score, select};
use wfguard::trust::{Subject, TrustOp, TrustRegistry};

pub fn main() -> wfguard::Result<()> {
    let catalog = generate_catalog(5, 3, &mut seeded(1));
    let task = Task::service("serviceTask_3", SecurityRequirement::new(0.7, 0.6, 0.8));
    let mut trust = TrustRegistry::new();

    for weights in [WeightVector::new(0.1, 0.1, 0.8), WeightVector::new(0.4, 0.4, 0.2)] {
        let request = anonymize(&task, &weights);
        let chosen = select(&request, &catalog, &trust)?;
        let backup = backup_service(chosen, &request, &catalog, &trust)?;
        println!(
            "weights {weights}: {} (score {:.4}, t {:.1}, p {:.2}), backup {}",
            chosen.id,
            score(chosen, &request, trust.trust_of(chosen)),
            chosen.response_time,
            chosen.price,
            backup.id
        );
    }

    let request = anonymize(&task, &WeightVector::new(0.1, 0.1, 0.8));
    let first = select(&request, &catalog, &trust)?.clone();
    for _ in 0..3 {
        trust.apply(
            Subject::Provider,
            &first.provider_id,
            TrustOp::Penalize {
                attack: AttackType::R2L,
                beta: 0.5,
            },
        );
    }
    let after = select(&request, &catalog, &trust)?;
    println!(
        "{} trust {:.3} after three R2L penalties: {} -> {}",
        first.provider_id,
        trust.get(Subject::Provider, &first.provider_id),
        first.id,
        after.id
    );
    Ok(())
}
