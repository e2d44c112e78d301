mod common;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use common::{APARTMENT_BINS, APARTMENT_MAP};
use kondo::agents::visit;
use kondo::env::{GridMap, Point};
use kondo::harness::{load_traces, plan_episodes, run_batch, write_batch, ExperimentConfig, HarnessError};
use kondo::metrics::{evaluate, ipl, normalized_deviations, summarize, summary_header, MetricsError, Stat};
use kondo::session::{AssistanceFidelity, Session, SessionConfig};
use kondo::task::{Bin, Category, ObjectId, ObjectInstance, Scenario};

fn setup(dir: &Path, seeds: usize) -> ExperimentConfig {
    fs::write(dir.join("apartment.map"), APARTMENT_MAP).unwrap();
    fs::write(dir.join("apartment.bins.json"), APARTMENT_BINS).unwrap();
    let config = format!(
        r#"{{
            "map": "apartment.map",
            "difficulties": [6, 12],
            "fidelities": ["none", "optimal"],
            "policies": [{{"kind": "compliant"}}, {{"kind": "noisy_compliant", "p_deviate": 0.5}}],
            "seeds": {seeds},
            "master_seed": 100,
            "out_dir": "out"
        }}"#
    );
    fs::write(dir.join("experiment.json"), config).unwrap();
    ExperimentConfig::load(&dir.join("experiment.json")).unwrap()
}

#[test]
fn batch_writes_reloadable_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path(), 2);
    assert_eq!(config.episode_count(), 16);
    let output = run_batch(&config).unwrap();
    assert_eq!(output.traces.len(), 16);
    assert_eq!(output.summary.len(), 8);
    for (spec, trace) in plan_episodes(&config).iter().zip(&output.traces) {
        assert_eq!(trace.scenario.difficulty, spec.difficulty);
        assert_eq!(trace.fidelity, spec.fidelity);
        assert_eq!(trace.policy, spec.policy.label());
        assert_eq!(trace.scenario.seed, spec.scenario_seed);
    }
    let out = config.out_dir.clone().unwrap();
    write_batch(&output, &out).unwrap();
    let map = kondo::harness::load_map_file(&config.map).unwrap();
    let loaded = load_traces(&out.join("traces"), Some(&map)).unwrap();
    assert_eq!(loaded.len(), 16);
    for ((_, a), b) in loaded.iter().zip(&output.traces) {
        assert_eq!(a, b);
    }
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), summary_header().join(","));
    assert_eq!(lines.count(), 8);
    for row in &output.summary {
        assert_eq!(row.stat("replans").unwrap().count, 2);
        if row.key.policy == "compliant" {
            assert_eq!(row.stat("normalized_deviations").unwrap().mean, 0.0);
            assert!((row.stat("ipl").unwrap().mean - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn batch_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path(), 1);
    let a = run_batch(&config).unwrap();
    let b = run_batch(&config).unwrap();
    let json = |o: &kondo::harness::BatchOutput| o.traces.iter().map(|t| t.to_json()).collect::<String>();
    assert_eq!(json(&a), json(&b));
}

#[test]
fn tampered_traces_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path(), 1);
    let output = run_batch(&config).unwrap();
    let out = dir.path().join("out");
    write_batch(&output, &out).unwrap();
    let traces = out.join("traces");
    let victim = fs::read_dir(&traces).unwrap().map(|e| e.unwrap().path()).find(|p| {
        let t = kondo::session::EpisodeTrace::from_json(&fs::read_to_string(p).unwrap()).unwrap();
        t.replans > 0
    });
    let victim = victim.expect("a noisy episode deviates");
    let mut trace = kondo::session::EpisodeTrace::from_json(&fs::read_to_string(&victim).unwrap()).unwrap();
    trace.replans -= 1;
    fs::write(&victim, trace.to_json()).unwrap();
    assert!(matches!(load_traces(&traces, None), Err(HarnessError::BadTrace { .. })));

    trace.replans += 1;
    trace.traveled += 1.0;
    fs::write(&victim, trace.to_json()).unwrap();
    assert!(load_traces(&traces, None).is_ok());
    let map = kondo::harness::load_map_file(&config.map).unwrap();
    assert!(matches!(load_traces(&traces, Some(&map)), Err(HarnessError::BadTrace { .. })));

    trace.traveled -= 1.0;
    trace.visits[2] = trace.visits[1];
    fs::write(&victim, trace.to_json()).unwrap();
    assert!(matches!(load_traces(&traces, None), Err(HarnessError::BadTrace { .. })));
}

#[test]
fn bad_configs_fail_before_running() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path(), 1);
    let path = dir.path().join("experiment.json");
    let text = fs::read_to_string(&path).unwrap().replace("[6, 12]", "[7]");
    fs::write(&path, text).unwrap();
    assert!(matches!(ExperimentConfig::load(&path), Err(HarnessError::Config(_))));
    assert!(matches!(ExperimentConfig::load(&dir.path().join("missing.json")), Err(HarnessError::Io { .. })));
}

/// Objects at x=0 and x=6 on one row, bin in the middle, start at the bin.
fn corridor() -> (Arc<GridMap>, Scenario) {
    let obj = |i: u32, x: i32| ObjectInstance {
        id: ObjectId(i),
        category: Category::Books,
        pickup: Point::new(x, 0),
        display_name: "novel".into(),
    };
    let scenario = Scenario {
        v: 1,
        map_name: "corridor".into(),
        seed: 0,
        difficulty: 2,
        bins: vec![Bin { id: "bookshelf".into(), category: Category::Books, location: Point::new(3, 0), label: "bookshelf".into() }],
        objects: vec![obj(0, 0), obj(1, 6)],
        start: Point::new(3, 0),
        interact_radius: Some(0.0),
    };
    (Arc::new(GridMap::open(7, 1)), scenario)
}

#[test]
fn corridor_metrics_by_hand() {
    let (map, scenario) = corridor();
    let mut session = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::Optimal)).unwrap();
    // 0 1 2 3 4 and 0 1 3 2 4 both cost 12; ties favour the smaller sequence
    assert_eq!(session.plan().route.0, vec![0, 1, 2, 3, 4]);
    assert_eq!(session.plan().cost, 12.0);
    // go right first, then follow the replan 0 2 1 3 4
    for target in [2, 1, 3, 4] {
        visit(&mut session, target).unwrap();
    }
    let trace = session.trace("by_hand");
    assert_eq!(trace.replans, 1);
    assert_eq!(normalized_deviations(&trace).unwrap(), 0.25);
    assert_eq!(trace.traveled, 3.0 + 6.0 + 3.0 + 0.0);
    let dist = session.distances().clone();
    assert_eq!(ipl(&trace, &dist).unwrap(), 1.0);
    let m = evaluate(&trace, &dist);
    assert_eq!(m.task_distance, 12.0);
    assert_eq!(m.completion_steps, 12 + 4);
    assert!(!m.partial);
}

#[test]
fn partial_episodes_are_flagged() {
    let (map, scenario) = corridor();
    let mut session = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::None)).unwrap();
    let trace = session.trace("idle");
    assert_eq!(normalized_deviations(&trace), Err(MetricsError::IncompleteTrace));
    let m = trace.metrics.clone().unwrap();
    assert!(m.partial);
    assert_eq!(m.ipl, 1.0);
    visit(&mut session, 1).unwrap();
    let m = session.trace("idle").metrics.unwrap();
    assert!(m.partial);
    assert_eq!(m.task_distance, 3.0);
}

#[test]
fn summary_statistics() {
    let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(s.mean, 2.5);
    assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert_eq!(summarize(&[]), Err(MetricsError::EmptyGroup));
}
