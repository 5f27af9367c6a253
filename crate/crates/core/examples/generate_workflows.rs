//! Generates one random workflow per size category, prints its shape and
//! round-trips the small one through the JSON workflow format.
//!
//! cargo run --example generate_workflows

use wfguard::model::{generate_workflow, load_workflow, save_workflow, SizeCategory, TaskKind, WeightVector};
use wfguard::rng::{substream, Stream};

pub fn main() -> wfguard::Result<()> {
    let weights = WeightVector::new(0.1, 0.1, 0.8);
    for (i, category) in SizeCategory::ALL.into_iter().enumerate() {
        let mut rng = substream(42, Stream::Workflow, i as u64);
        let wf = generate_workflow(category, &format!("workflow{i}"), "tenant0", weights, &mut rng);
        let users = wf.tasks.iter().filter(|t| t.kind == TaskKind::User).count();
        let edges: usize = wf.tasks.iter().map(|t| t.predecessors.len()).sum();
        println!(
            "{category:<6} {:>3} tasks ({users} user), {edges} edges, acyclic: {}",
            wf.tasks.len(),
            wf.topological_order().is_some()
        );
    }

    let wf = generate_workflow(
        SizeCategory::Small,
        "workflow0",
        "tenant0",
        weights,
        &mut substream(42, Stream::Workflow, 0),
    );
    for task in &wf.tasks {
        let r = task.requirement;
        println!(
            "  {:<14} req ({:.2}, {:.2}, {:.2}) after {:?} actions {:?}",
            task.id, r.confidentiality, r.integrity, r.availability, task.predecessors, task.allowed_actions
        );
    }

    let dir = std::env::temp_dir().join("wfguard-example");
    std::fs::create_dir_all(&dir).map_err(|e| wfguard::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let path = dir.join("workflow0.json");
    save_workflow(&wf, &path)?;
    assert_eq!(load_workflow(&path)?, wf);
    println!("saved and reloaded {}", path.display());
    Ok(())
}
