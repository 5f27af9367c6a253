//! Runs the security-first and the cost-first weight profiles on the same
//! workflow population and prints their normalized averages.
//!
//! cargo run --release --example weight_profiles [-- small|medium|large]

use wfguard::experiment::{compare, ExperimentConfig};
use wfguard::model::{SizeCategory, WeightVector};

pub fn main() -> wfguard::Result<()> {
    let category: SizeCategory = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("category is small, medium or large"))
        .unwrap_or(SizeCategory::Small);
    let security_first = ExperimentConfig {
        category,
        runs: 100,
        attack_rate: 0.3,
        weights: WeightVector::new(0.1, 0.1, 0.8),
        ..Default::default()
    };
    let cost_first = ExperimentConfig {
        weights: WeightVector::new(0.4, 0.4, 0.2),
        ..security_first.clone()
    };
    let report = compare(&security_first, &cost_first)?;
    println!("{category}, 100 runs, attack rate 0.3 ({})", report.normalization);
    println!("{:<14} {:>8} {:>8} {:>10}", "weights", "time", "price", "mitigation");
    for arm in [&report.a, &report.b] {
        let n = arm.normalized;
        println!(
            "{:<14} {:>8.4} {:>8.4} {:>10.4}",
            arm.config.weights.to_string(),
            n.avg_time,
            n.avg_price,
            n.avg_mitigation
        );
    }
    Ok(())
}
