//! One workflow instance with a DoS attack forced onto a service task,
//! printed in the engine's log format.
//!
//! cargo run --example scripted_attack

use wfguard::adaptation::AdaptationKind;
use wfguard::cloudenv::{AttackType, Catalog, ScriptedInjector, Service};
use wfguard::engine::{run_instance, EngineConfig};
use wfguard::model::{SecurityRequirement, Task, WeightVector, Workflow};
use wfguard::rng::seeded;
use wfguard::trust::TrustRegistry;

fn service(id: &str, provider: &str, time: f64, price: f64, strength: f64) -> Service {
    Service {
        id: id.into(),
        provider_id: provider.into(),
        response_time: time,
        price,
        strength: SecurityRequirement::new(strength, strength, strength),
    }
}

pub fn main() -> wfguard::Result<()> {
    let catalog = Catalog::from_services(vec![
        service("service2", "provider0", 30.0, 6.0, 0.4),
        service("service4", "provider1", 12.0, 2.5, 0.9),
        service("service7", "provider2", 18.0, 1.5, 0.8),
    ])?;
    let workflow = Workflow {
        id: "workflow1".into(),
        tenant_id: "tenant1".into(),
        weights: WeightVector::new(0.1, 0.1, 0.8),
        tasks: vec![
            Task::service("serviceTask_5", SecurityRequirement::new(0.5, 0.5, 0.5)),
            Task::service("serviceTask_6", SecurityRequirement::new(0.6, 0.7, 0.8))
                .with_actions([
                    AdaptationKind::Late,
                    AdaptationKind::Skip,
                    AdaptationKind::ReExecute,
                    AdaptationKind::Reconfig,
                ])
                .consumes("serviceTask_5"),
            Task::user("userTask_7", SecurityRequirement::new(0.2, 0.2, 0.2)).consumes("serviceTask_6"),
        ],
    };
    // the re-execution on the backup is attacked too, by a probe
    let mut injector = ScriptedInjector::new()
        .attack("serviceTask_6", 0, AttackType::DoS)
        .attack("serviceTask_6", 1, AttackType::Probe);

    let state = run_instance(
        &workflow,
        &catalog,
        &EngineConfig::default(),
        "instance1",
        &TrustRegistry::new(),
        &mut injector,
        &mut seeded(5),
    )?;
    print!("{}", state.log_text());
    let totals = state.totals();
    println!(
        "\ntime {:.1}, price {:.2}, mitigation {:.4}, attacks detected {}",
        totals.time, totals.price, totals.mitigation, state.attacks_detected
    );
    Ok(())
}
