//! Monte-Carlo estimate of the sponge bad-event rate against its
//! closed-form bound, under both readings of the length term.
//!
//!     cargo run --release --example sponge_bad_probability

use crooked_indiff::harness::{run_experiment, ExperimentConfig, ParamsCfg, SubverterCfg};
use crooked_indiff::report::ReportFormat;

fn main() {
    let cfg = ExperimentConfig {
        experiment: "sponge-bad-prob".into(),
        construction: Some("sponge".into()),
        params: ParamsCfg {
            r: Some(4),
            c: Some(10),
            ell: Some(8),
            s: Some(4),
            ..Default::default()
        },
        subverter: Some(SubverterCfg {
            kind: "input-predicate".into(),
            k: Some(8),
            delta: None,
            tau: None,
            q1: None,
            inner: None,
        }),
        adversary: Some(crooked_indiff::adversary::DistinguisherSpec::ConsistencyMulti {
            count: 4,
        }),
        worlds: vec!["G1a".into()],
        trials: 10_000,
        master_seed: 0x5ba,
        threads: 0,
        output: None,
        format: ReportFormat::JsonLines,
        t_values: None,
        qf_values: None,
        samples: None,
        q1_values: None,
        tolerance: None,
    };
    let report = run_experiment(&cfg).unwrap();
    println!("summary: {}", report.summary.join(" "));
    println!("bad rate within the bad-event bound: {:?}", report.passed);
}
