use std::collections::BTreeMap;
use std::time::Duration;

use pbatch::bench::{
    aggregate_with_exact, emit_report, load_suite_dir, run_benchmark, BenchConfig, BenchStatus,
};
use pbatch::domain::ObjectiveKind;
use pbatch::encodings::Variant;
use pbatch::instgen::{generate_suite, write_suite, SuiteConfig};
use pbatch::oracle::{solve_exact, OracleLimits};

#[test]
fn suite_round_trip_benchmark_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = SuiteConfig {
        job_levels: vec![4, 6],
        family_levels: vec![2],
        machine_levels: vec![1, 2],
        instances_per_class: 2,
        base_seed: 11,
    };
    let entries = generate_suite(&config).unwrap();
    assert_eq!(entries.len(), 8);
    write_suite(&entries, dir.path()).unwrap();
    let suite = load_suite_dir(dir.path()).unwrap();
    assert_eq!(suite.len(), entries.len());
    for (loaded, e) in suite.iter().zip(&entries) {
        assert_eq!(loaded.instance.to_json(), e.instance.to_json());
    }

    let encodings = ["au", "as+sb", "rs"].map(|s| s.parse::<Variant>().unwrap());
    let config = BenchConfig {
        time_limit: Duration::from_secs(20),
        workers: 2,
        seed: 0,
    };
    let records = run_benchmark(&suite, &encodings, &ObjectiveKind::ALL, &config);
    assert_eq!(records.len(), suite.len() * 3 * 2);

    let mut exact = BTreeMap::new();
    for item in &suite {
        for obj in ObjectiveKind::ALL {
            let (v, _) = solve_exact(&item.instance, obj, OracleLimits::default()).unwrap();
            exact.insert((item.id.clone(), obj), v);
        }
    }
    for r in &records {
        assert_eq!(r.status, BenchStatus::Optimal, "{r:?}");
        assert_eq!(
            r.value,
            exact.get(&(r.instance_id.clone(), r.objective)).copied()
        );
    }

    let summaries = aggregate_with_exact(&records, &exact).unwrap();
    // 4 classes x 3 encodings x 2 objectives
    assert_eq!(summaries.len(), 24);
    for s in &summaries {
        assert_eq!(s.n, 2);
        assert_eq!(s.pct_optimal, 100.0);
        assert_eq!(s.mean_gap_pct, Some(0.0));
    }
    let out = tempfile::tempdir().unwrap();
    let paths = emit_report(&summaries, &records, out.path()).unwrap();
    assert!(paths.iter().all(|p| p.exists()));
    let summary = std::fs::read_to_string(out.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 25);
}
