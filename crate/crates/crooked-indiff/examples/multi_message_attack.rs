//! The multi-message scenario: a neighbour-wrapped implementation makes
//! one extra query at the bit-complement of its input, so batching the
//! partner message m ^ 1^n binds every branch point of m before m itself
//! is ever queried. Resampling-based arguments that need a fresh branch
//! point for the second message find none.
//!
//!     cargo run --example multi_message_attack

use crooked_indiff::bits::BitStr;
use crooked_indiff::exor::{multi_message_prefix_check, ExorParams, ExorSimulator};
use crooked_indiff::oracle::FunctionTable;
use crooked_indiff::rng::SplitRng;
use crooked_indiff::subversion::{run_first_stage, SubverterKind, SubverterSpec};

fn main() {
    // one instrumented run, spelled out
    let n = 8u8;
    let l = 8u16;
    let mut tape = FunctionTable::new(0xaaaa, 0x68, n, l, n).unwrap();
    let spec = SubverterSpec::new(SubverterKind::Honest, 0);
    let (inner, _) = run_first_stage(&spec, &mut tape).unwrap();
    let imp = inner.wrap_neighbor();
    let mut rng = SplitRng::from_path(0xaaaa, &[0x6976]);
    let params = ExorParams::sample(n, l, &mut rng).unwrap();
    let m = BitStr::new(0x3c, n).unwrap();
    let partner = m ^ BitStr::all_ones(n);

    let mut sim = ExorSimulator::new(imp, params.clone(), tape);
    sim.batch_query(partner).unwrap();
    println!("batched partner message {partner}");
    for j in 1..=l {
        let alpha = params.branch_point(j, m);
        println!(
            "  branch point {alpha:?} of m={m} already bound: {}",
            sim.list.contains(&alpha)
        );
    }

    // the assertion holds across seeded trials
    let trials = 1000u64;
    let hits = (0..trials)
        .filter(|&t| multi_message_prefix_check(&spec, n, l, 0xbbbb, t).unwrap())
        .count();
    println!("\nassertion rate over {trials} seeded trials: {hits}/{trials}");
}
