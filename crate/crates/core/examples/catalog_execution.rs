//! Builds the default five-provider catalog and executes a task on every
//! service with a 30% attack rate.
//!
//! cargo run --example catalog_execution

use wfguard::cloudenv::{execute, generate_catalog};
use wfguard::model::{SecurityRequirement, Task};
use wfguard::rng::seeded;

pub fn main() -> wfguard::Result<()> {
    let catalog = generate_catalog(5, 3, &mut seeded(1));
    println!("{} providers, {} services", catalog.providers().len(), catalog.len());

    let task = Task::service("serviceTask_0", SecurityRequirement::new(0.5, 0.5, 0.5));
    let mut rng = seeded(7);
    let mut clock = 0.0;
    for service in catalog.services() {
        let out = execute(
            &task,
            service,
            0.3,
            &mut rng,
            wfguard::cloudenv::ExecutionSlot::new("instance0", clock),
        )?;
        clock = out.completed_at();
        println!(
            "{:<10} {:<10} t {:>5.1} p {:>4.2} strength ({:.2}, {:.2}, {:.2}) attack {}",
            service.id,
            service.provider_id,
            out.elapsed,
            out.charged,
            service.strength.confidentiality,
            service.strength.integrity,
            service.strength.availability,
            out.attack.map_or("-".to_string(), |a| a.attack_type.to_string())
        );
    }
    println!("all executions done at t = {clock:.1}");
    Ok(())
}
