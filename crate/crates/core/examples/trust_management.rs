//! Trust dynamics: penalties per attack type, slow recovery through rewards,
//! and the graded responses to a misbehaving tenant.
//!
//! cargo run --example trust_management

use wfguard::cloudenv::AttackType;
use wfguard::trust::{penalize, reward, severity, tenant_response, Subject, TrustScore, DEFAULT_ALPHA, DEFAULT_BETA};

pub fn main() -> wfguard::Result<()> {
    for attack in AttackType::ALL {
        let s = penalize(TrustScore::new(Subject::Service, "service4", 1.0), attack, DEFAULT_BETA);
        println!(
            "{attack:<5} severity {:.3}: service trust 1.000 -> {:.3}",
            severity(attack),
            s.value
        );
    }

    let mut provider = TrustScore::new(Subject::Provider, "provider1", 1.0);
    for _ in 0..3 {
        provider = penalize(provider, AttackType::DoS, DEFAULT_BETA / 2.0);
    }
    print!("provider1 after three DoS: {:.3}", provider.value);
    let mut clean = 0;
    while provider.value < 0.9 {
        provider = reward(provider, DEFAULT_ALPHA);
        clean += 1;
    }
    println!(", back above 0.9 after {clean} clean executions");

    let mut tenant = TrustScore::new(Subject::Tenant, "tenant1", 1.0);
    for alert in 0..8 {
        println!(
            "tenant1 after {alert} IDS alerts: {:.3} {:?}",
            tenant.value,
            tenant_response(&tenant)?
        );
        tenant = penalize(tenant, AttackType::DoS, DEFAULT_BETA);
    }
    Ok(())
}
