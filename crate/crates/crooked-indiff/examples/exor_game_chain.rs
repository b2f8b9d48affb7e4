//! Walk the EXor game chain seed by seed: Real and G0 and G1 answer
//! identically, G2 and Ideal answer identically, and the middle hop
//! diverges exactly on flagged trials.
//!
//!     cargo run --example exor_game_chain

use crooked_indiff::adversary::DistinguisherSpec;
use crooked_indiff::exor::{run_exor_game, ExorGameSpec, ExorWorld};
use crooked_indiff::subversion::{SubverterKind, SubverterSpec};

fn main() {
    let spec = ExorGameSpec::new(
        8,
        8,
        SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 3 }, 0),
        DistinguisherSpec::ConsistencyMulti { count: 4 },
    );
    let worlds = [
        ExorWorld::Real,
        ExorWorld::G0,
        ExorWorld::G1,
        ExorWorld::G2,
        ExorWorld::Ideal,
    ];
    let trials = 400u64;

    let mut equal = [0u64; 4];
    let mut diverged_without_flag = 0u64;
    let mut flagged = 0u64;
    for t in 0..trials {
        let results: Vec<_> = worlds
            .iter()
            .map(|w| run_exor_game(*w, &spec, 0xc4a1, t).unwrap())
            .collect();
        for hop in 0..4 {
            if results[hop].output_bit == results[hop + 1].output_bit {
                equal[hop] += 1;
            } else if hop == 2 && !results[3].bad() {
                diverged_without_flag += 1;
            }
        }
        if results[3].bad() {
            flagged += 1;
        }
    }

    println!("per-seed output equality over {trials} trials:");
    for (hop, count) in equal.iter().enumerate() {
        println!(
            "  {:>5} = {:<5} {count}/{trials}",
            worlds[hop].name(),
            worlds[hop + 1].name()
        );
    }
    println!("G1/G2 divergences without a bad flag: {diverged_without_flag}");
    println!("trials with a bad flag in G2: {flagged}");

    let sample = run_exor_game(ExorWorld::Ideal, &spec, 0xc4a1, 0).unwrap();
    println!(
        "\none ideal trial: {} ledger rows, {} oracle queries, {} implementation calls",
        sample.rows.len(),
        sample.oracle_queries,
        sample.impl_calls
    );
}
