//! The three detectors: the service monitor, the per-tenant IDS and the
//! user monitor, feeding one time-ordered alert queue.
//!
//! cargo run --example detection

use wfguard::cloudenv::{execute, generate_catalog, ExecutionSlot};
use wfguard::detection::{
    monitor_user, user_alert, AlertQueue, ServiceMonitor, Submission, TenantIds, TenantRule, UserEvent,
};
use wfguard::model::{SecurityRequirement, Task};
use wfguard::rng::seeded;

pub fn main() -> wfguard::Result<()> {
    let catalog = generate_catalog(5, 3, &mut seeded(1));
    let task = Task::service("serviceTask_0", SecurityRequirement::new(0.5, 0.5, 0.5));
    let monitor = ServiceMonitor::new(0.9);
    let mut rng = seeded(3);
    let mut queue = AlertQueue::new();

    let mut clock = 0.0;
    for service in catalog.services().iter().take(6) {
        let out = execute(&task, service, 0.5, &mut rng, ExecutionSlot::new("instance0", clock))?;
        clock = out.completed_at();
        let alert = monitor.observe(&out, &mut rng);
        println!(
            "{:<10} attacked {:<5} detected {}",
            service.id,
            out.attack.is_some(),
            alert
                .as_ref()
                .map_or("no".into(), |a| format!("{} at {:.1}", a.attack_type, a.detected_at))
        );
        queue.extend(alert);
    }

    // three submissions per window are allowed; the fourth inside ten units trips the rule
    let mut ids = TenantIds::new([TenantRule::submissions("tenant1", 10.0, 3)]);
    for (i, at) in [0.0, 2.0, 4.0, 6.0, 30.0].into_iter().enumerate() {
        let alert = ids.submit(Submission {
            tenant_id: "tenant1".into(),
            instance_id: format!("instance{i}"),
            at,
        });
        println!(
            "tenant1 submits at {at:>4}: {}",
            if alert.is_some() { "IDS alert" } else { "ok" }
        );
        queue.extend(alert);
    }

    for access_count in [2, 9] {
        let event = UserEvent {
            tenant_id: "tenant1".into(),
            user_id: "alice".into(),
            task_id: "userTask_4".into(),
            access_count,
        };
        let verdict = monitor_user(&event, 5);
        println!("user accessed {access_count} records: {verdict:?}");
        if verdict == wfguard::detection::UserVerdict::Malicious {
            queue.push(user_alert(&event, "instance0", 12.0));
        }
    }

    println!("{} alerts in detection order:", queue.len());
    while let Some(a) = queue.pop() {
        println!("  {:>5.1} {:?} {}", a.detected_at, a.source, a.attack_type);
    }
    Ok(())
}
