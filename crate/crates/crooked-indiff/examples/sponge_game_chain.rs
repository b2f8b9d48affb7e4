//! Walk the sponge game chain seed by seed: Real, G0 and G1a agree, G1b
//! and G2 agree, and the handoff to the graph simulator is measured as a
//! distribution gap rather than a per-seed identity.
//!
//!     cargo run --example sponge_game_chain

use crooked_indiff::adversary::DistinguisherSpec;
use crooked_indiff::sponge::{run_sponge_game, SpongeGameSpec, SpongeWorld};
use crooked_indiff::subversion::{SubverterKind, SubverterSpec};

fn main() {
    let spec = SpongeGameSpec::new(
        4,
        6,
        8,
        4,
        SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 3 }, 0),
        DistinguisherSpec::ConsistencyMulti { count: 3 },
    );
    let trials = 400u64;
    let pairs = [
        (SpongeWorld::Real, SpongeWorld::G0),
        (SpongeWorld::G0, SpongeWorld::G1a),
        (SpongeWorld::G1a, SpongeWorld::G1b),
        (SpongeWorld::G1b, SpongeWorld::G2),
        (SpongeWorld::G3, SpongeWorld::Ideal),
    ];
    println!("per-seed output equality over {trials} trials:");
    for (wa, wb) in pairs {
        let mut equal = 0u64;
        let mut bad_divergences = 0u64;
        for t in 0..trials {
            let a = run_sponge_game(wa, &spec, 0x59, t).unwrap();
            let b = run_sponge_game(wb, &spec, 0x59, t).unwrap();
            if a.output_bit == b.output_bit {
                equal += 1;
            } else if a.bad || b.bad {
                bad_divergences += 1;
            }
        }
        println!(
            "  {:>4} = {:<5} {equal}/{trials} (divergences with a bad flag: {bad_divergences})",
            wa.name(),
            wb.name()
        );
    }

    let sample = run_sponge_game(SpongeWorld::Ideal, &spec, 0x59, 7).unwrap();
    println!(
        "\none ideal trial: {} construction rows, graph snapshot {} bytes",
        sample.rows.len(),
        sample.graph_snapshot.map(|s| s.len()).unwrap_or(0)
    );
}
