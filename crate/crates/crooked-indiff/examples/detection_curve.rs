//! The sampling detection test against a deterministic 1/16 subverter:
//! pass rates track (1 - eps)^t.
//!
//!     cargo run --release --example detection_curve

use crooked_indiff::harness::{run_experiment, ExperimentConfig, ParamsCfg, SubverterCfg};
use crooked_indiff::report::ReportFormat;

fn main() {
    let cfg = ExperimentConfig {
        experiment: "detection-curve".into(),
        construction: None,
        params: ParamsCfg {
            n: Some(8),
            l: Some(0),
            ..Default::default()
        },
        subverter: Some(SubverterCfg {
            kind: "input-predicate".into(),
            k: Some(4),
            delta: None,
            tau: None,
            q1: None,
            inner: None,
        }),
        adversary: None,
        worlds: vec![],
        trials: 10_000,
        master_seed: 0xdec0de,
        threads: 0,
        output: None,
        format: ReportFormat::Csv,
        t_values: Some(vec![1, 2, 5, 10, 25, 50, 100]),
        qf_values: None,
        samples: None,
        q1_values: None,
        tolerance: None,
    };
    let report = run_experiment(&cfg).unwrap();
    print!("{}", report.render(ReportFormat::Csv));
    println!("all points within Wilson: {:?}", report.passed);
}
