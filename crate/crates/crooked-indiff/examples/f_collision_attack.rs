//! Oracle-collision pressure: a distinguisher that queries the
//! construction oracle many times and batches a colliding pair drives the
//! preset-envelope flag up with its query budget.
//!
//!     cargo run --release --example f_collision_attack

use crooked_indiff::harness::{run_experiment, ExperimentConfig, ParamsCfg};
use crooked_indiff::report::ReportFormat;

fn main() {
    let cfg = ExperimentConfig {
        experiment: "f-collision-demo".into(),
        construction: Some("exor".into()),
        params: ParamsCfg {
            n: Some(8),
            l: Some(4),
            ..Default::default()
        },
        subverter: None,
        adversary: None,
        worlds: vec![],
        trials: 2000,
        master_seed: 0xfc01,
        threads: 0,
        output: None,
        format: ReportFormat::Csv,
        t_values: None,
        qf_values: Some(vec![2, 8, 16, 32]),
        samples: None,
        q1_values: None,
        tolerance: None,
    };
    let report = run_experiment(&cfg).unwrap();
    print!("{}", report.render(ReportFormat::Csv));
    println!("preset-envelope rate nondecreasing in q_f: {:?}", report.passed);
}
