//! Measure how often each built-in subverter deviates from the function
//! it wraps, exhaustively and by sampling.
//!
//!     cargo run --example crooked_fraction

use crooked_indiff::bits::BitStr;
use crooked_indiff::oracle::{FunctionTable, Transcript};
use crooked_indiff::subversion::{crooked_fraction, FractionMode, Implementation, SubverterKind};

fn main() {
    let n = 8u8;
    let table = FunctionTable::new(0x5eed, 0, n, 2, n).unwrap();
    let kinds = vec![
        ("honest", SubverterKind::Honest),
        ("output-predicate k=3", SubverterKind::OutputPredicate { zero_bits: 3 }),
        ("input-predicate k=4", SubverterKind::InputPredicate { zero_bits: 4 }),
        (
            "trigger k=3",
            SubverterKind::Trigger {
                offset: BitStr::new(0x1f, n).unwrap(),
                zero_bits: 3,
            },
        ),
        (
            "neighbour-wrapped predicate",
            SubverterKind::NeighborWrapped(Box::new(SubverterKind::OutputPredicate {
                zero_bits: 3,
            })),
        ),
    ];

    println!("{:32} {:>10} {:>12} {:>12}", "kind", "nominal", "measured", "declared");
    for (label, kind) in kinds {
        let imp = Implementation::from_parts(kind, Transcript::new());
        let report = crooked_fraction(&imp, &table, FractionMode::Exhaustive).unwrap();
        println!(
            "{:32} {:>10.5} {:>12.5} {:>12.5}",
            label,
            imp.nominal_rate(),
            report.max_fraction(),
            imp.declared_bound(n),
        );
    }

    // sampling mode reports a Wilson interval instead
    let imp = Implementation::from_parts(SubverterKind::OutputPredicate { zero_bits: 3 }, Transcript::new());
    let sampled = crooked_fraction(&imp, &table, FractionMode::Sample(500)).unwrap();
    let est = &sampled.per_index[0];
    let (lo, hi) = est.interval.unwrap();
    println!("\nsampled fraction at index 0: {:.4} in [{:.4}, {:.4}]", est.fraction, lo, hi);
}
