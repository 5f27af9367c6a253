//! Scores every candidate action for each attack type on one task and shows
//! which one each weight profile picks.
//!
//! cargo run --example adaptation_decision

use wfguard::adaptation::{decide, ActionCatalog, AdaptationContext, AdaptationKind};
use wfguard::cloudenv::AttackType;
use wfguard::model::{SecurityRequirement, Task, WeightVector};

pub fn main() {
    let task =
        Task::service("serviceTask_6", SecurityRequirement::new(0.6, 0.7, 0.8)).with_actions(AdaptationKind::ALL);
    // time and price in catalog range units: 12/50, 2.5/10 and backup 18/50, 1.5/10
    let ctx = AdaptationContext::new(0.24, 0.25).with_backup(0.36, 0.15);
    let actions = ActionCatalog::default();

    for weights in [WeightVector::new(0.1, 0.1, 0.8), WeightVector::new(0.4, 0.4, 0.2)] {
        println!("weights {weights}");
        for attack in AttackType::ALL {
            let d = decide(&task, attack, &ctx, &weights, &actions);
            let scored: Vec<String> = d
                .candidates
                .iter()
                .map(|c| format!("{}={:+.3}", c.kind, c.cost))
                .collect();
            println!("  {attack:<5} -> {:<10} [{}]", d.chosen.as_str(), scored.join(" "));
        }
    }

    let no_backup = AdaptationContext::new(0.24, 0.25);
    let only_backup = task
        .clone()
        .with_actions([AdaptationKind::ReExecute, AdaptationKind::Redundancy]);
    let d = decide(
        &only_backup,
        AttackType::R2L,
        &no_backup,
        &WeightVector::new(0.1, 0.1, 0.8),
        &actions,
    );
    println!(
        "no backup service and nothing else applicable: {} (fallback {})",
        d.chosen, d.fallback
    );
}
