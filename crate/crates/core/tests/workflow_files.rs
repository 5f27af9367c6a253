use std::fs;

use wfguard::model::{
    generate_workflow, load_workflow, save_workflow, SecurityRequirement, SizeCategory, Task, WeightVector, Workflow,
};
use wfguard::rng::seeded;
use wfguard::Error;

fn workflow(tasks: Vec<Task>) -> Workflow {
    Workflow {
        id: "workflow0".into(),
        tenant_id: "tenant0".into(),
        weights: WeightVector::new(0.1, 0.1, 0.8),
        tasks,
    }
}

#[test]
fn generated_workflows_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded(11);
    for category in SizeCategory::ALL {
        let wf = generate_workflow(
            category,
            "workflow0",
            "tenant0",
            WeightVector::new(0.4, 0.4, 0.2),
            &mut rng,
        );
        let path = dir.path().join(format!("{category}.json"));
        save_workflow(&wf, &path).unwrap();
        let back = load_workflow(&path).unwrap();
        assert_eq!(back, wf);
        for (a, b) in back.tasks.iter().zip(&wf.tasks) {
            assert_eq!(
                a.requirement.confidentiality.to_bits(),
                b.requirement.confidentiality.to_bits()
            );
        }
    }
}

#[test]
fn cyclic_file_is_rejected_with_the_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let req = SecurityRequirement::new(0.5, 0.5, 0.5);
    let wf = workflow(vec![
        Task::service("A", req).after("B"),
        Task::service("B", req).after("A"),
    ]);
    let path = dir.path().join("cyclic.json");
    fs::write(&path, serde_json::to_string(&wf).unwrap()).unwrap();
    match load_workflow(&path) {
        Err(Error::InvalidWorkflow(msgs)) => assert!(
            msgs.iter()
                .any(|m| m.contains("cycle") && m.contains('A') && m.contains('B')),
            "{msgs:?}"
        ),
        other => panic!("expected InvalidWorkflow, got {other:?}"),
    }
}

#[test]
fn dangling_reference_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let req = SecurityRequirement::new(0.5, 0.5, 0.5);
    let wf = workflow(vec![Task::service("A", req).consumes("ghost")]);
    let path = dir.path().join("dangling.json");
    fs::write(&path, serde_json::to_string(&wf).unwrap()).unwrap();
    match load_workflow(&path) {
        Err(Error::InvalidWorkflow(msgs)) => assert!(msgs.iter().any(|m| m.contains("ghost")), "{msgs:?}"),
        other => panic!("expected InvalidWorkflow, got {other:?}"),
    }
}

#[test]
fn malformed_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    assert!(matches!(load_workflow(&path), Err(Error::Parse { .. })));
    assert!(matches!(
        load_workflow(dir.path().join("absent.json")),
        Err(Error::Io { .. })
    ));
}
