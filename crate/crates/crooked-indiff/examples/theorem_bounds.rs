//! Print the closed-form bounds across a parameter sweep, flagging where
//! they go vacuous.
//!
//!     cargo run --example theorem_bounds

use crooked_indiff::analysis::{
    exor_theorem_bound, sponge_bad_event_bound, sponge_theorem_bound, ExorBoundParams,
    SpongeBoundParams,
};

fn main() {
    println!("EXor advantage bound, n = 12, tau = 2, q1 = 16:");
    println!("{:>8} {:>6} {:>12} {:>8}", "eps", "q2", "bound", "vacuous");
    for eps in [0.0, 1.0 / 4096.0, 1.0 / 256.0] {
        for q2 in [4.0, 16.0, 64.0] {
            let b = exor_theorem_bound(&ExorBoundParams {
                eps,
                q1: 16.0,
                q2,
                tau: 2.0,
                n: 12,
            });
            println!("{eps:>8.5} {q2:>6} {:>12.5} {:>8}", b.value, b.vacuous);
        }
    }

    println!("\nsponge bounds, r = 4, c = 10, ell = 8, s = 4, tau = 1, kappa = 0:");
    println!(
        "{:>10} {:>6} {:>14} {:>14} {:>8}",
        "eps", "q2", "theorem", "bad-event", "vacuous"
    );
    for eps in [1.0 / 4096.0, 1.0 / 256.0] {
        for q2 in [2.0, 4.0, 16.0] {
            let blocks = 3.0;
            let p = SpongeBoundParams {
                eps,
                q: q2 * blocks,
                tau: 1.0,
                q2,
                ell_plus_s: blocks,
                kappa: 0.0,
                rate: 4,
                cap: 10,
            };
            let t = sponge_theorem_bound(&p);
            let b = sponge_bad_event_bound(&p);
            println!(
                "{eps:>10.6} {q2:>6} {:>14.5} {:>14.5} {:>8}",
                t.value, b.value, t.vacuous
            );
        }
    }
}
