//! Whole-domain classification: problematic points, robust points, good
//! pairs, robust functions, and critical-set membership, with their
//! ladder bounds.
//!
//!     cargo run --release --example robust_functions

use crooked_indiff::analysis::{DomainScan, MessageMode};
use crooked_indiff::bits::BitStr;
use crooked_indiff::exor::ExorParams;
use crooked_indiff::oracle::{FunctionTable, Point};
use crooked_indiff::rng::SplitRng;
use crooked_indiff::subversion::{run_first_stage, SubverterKind, SubverterSpec};

fn main() {
    let n = 6u8;
    let l = 4u16;
    let spec = SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 4 }, 2);

    let mut table = FunctionTable::new(0x40b, 0, n, l, n).unwrap();
    let (imp, advice) = run_first_stage(&spec, &mut table).unwrap();
    let scan = DomainScan::new(&imp, &table).unwrap();
    let ladder = scan.ladder();
    println!(
        "measured eps {:.4}; ladder: eps1 {:.4}, eps2 {:.4}, p1 {:.4} (vacuous: {})",
        scan.measured_eps(),
        ladder.eps1,
        ladder.eps2,
        ladder.p1,
        ladder.vacuous
    );

    // classify a few points, including an advice point
    let mut probes: Vec<Point> = BitStr::enumerate(n)
        .take(3)
        .map(|x| Point::new(1, x))
        .collect();
    probes.push(advice.iter().next().unwrap().point);
    for p in probes {
        let c = scan.classify(p).unwrap();
        println!(
            "{p:?}: problematic={} robust={} good={} queried_by={} dj={:?}",
            c.d,
            c.robust,
            c.good_pair,
            c.queried_by.len(),
            c.dj
        );
    }

    let (robust, fraction) = scan.is_robust_function().unwrap();
    println!("\nbad-pair fraction {fraction:.4}; function robust: {robust}");

    // critical-set membership across sampled mask vectors
    let mut members = 0;
    let samples = 40;
    for i in 0..samples {
        let mut rng = SplitRng::from_path(0x40c, &[i]);
        let params = ExorParams::sample(n, l, &mut rng).unwrap();
        if scan.in_critical_set(&params, MessageMode::AllMessages).unwrap() {
            members += 1;
        }
    }
    println!(
        "critical-set membership over {samples} sampled mask vectors: {members}/{samples} \
         (outside rate bound p1 = {:.4})",
        ladder.p1
    );
}
