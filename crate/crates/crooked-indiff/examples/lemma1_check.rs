//! Resampled-query averages: Monte-Carlo over tables with exact inner
//! enumeration, checked against eps + q1/2^n per query position.
//!
//!     cargo run --release --example lemma1_check

use crooked_indiff::analysis::{check_lemma1, Lemma1Config};
use crooked_indiff::bits::BitStr;
use crooked_indiff::subversion::{SubverterKind, SubverterSpec};

fn main() {
    let kinds: Vec<(&str, SubverterKind)> = vec![
        ("output-predicate k=3", SubverterKind::OutputPredicate { zero_bits: 3 }),
        (
            "trigger k=3",
            SubverterKind::Trigger {
                offset: BitStr::new(0x15, 6).unwrap(),
                zero_bits: 3,
            },
        ),
    ];
    println!(
        "{:24} {:>3} {:>3} {:>10} {:>10} {:>10} {:>6}",
        "kind", "q1", "j", "estimate", "ci_high", "bound", "pass"
    );
    for (label, kind) in kinds {
        for q1 in [0u32, 4] {
            let rows = check_lemma1(&Lemma1Config {
                n: 6,
                l: 2,
                subverter: SubverterSpec::new(kind.clone(), q1),
                tables: 250,
                alphas_per_table: 16,
                tolerance: 0.02,
                seed: 0x1e1 + q1 as u64,
            })
            .unwrap();
            for row in rows {
                println!(
                    "{:24} {:>3} {:>3} {:>10.5} {:>10.5} {:>10.5} {:>6}",
                    label, q1, row.j, row.estimate, row.ci_high, row.bound, row.pass
                );
            }
        }
    }
}
