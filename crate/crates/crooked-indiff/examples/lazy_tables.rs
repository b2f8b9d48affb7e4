//! Lazily sampled random functions: query semantics, copy-on-write
//! resampling, and transcript serialization.
//!
//!     cargo run --example lazy_tables

use crooked_indiff::bits::BitStr;
use crooked_indiff::oracle::{FunctionTable, Point, Provenance, Transcript};

fn main() {
    let mut table = FunctionTable::new(0xfeed, 1, 8, 4, 8).unwrap();

    let p = Point::new(2, BitStr::new(0xa7, 8).unwrap());
    let v1 = table.query(p).unwrap();
    let v2 = table.query(p).unwrap();
    println!("h(2, a7) = {v1} (repeat: {v2}), {} point bound", table.queried_len());

    // resampling changes exactly one binding and leaves the original alone
    let beta = v1.flip_low_bit();
    let variant = table.resample(p, beta).unwrap();
    println!(
        "resampled h(2, a7): original {} -> variant {}",
        table.peek(p).unwrap(),
        variant.peek(p).unwrap()
    );
    let agree = BitStr::enumerate(8)
        .filter(|&x| {
            let q = Point::new(3, x);
            table.peek(q).unwrap() == variant.peek(q).unwrap()
        })
        .count();
    println!("index 3 agreement after resample: {agree}/256 points");

    // resampling back restores extensional equality
    let restored = variant.resample(p, v1).unwrap();
    println!(
        "restored table agrees everywhere: {}",
        table.agrees_everywhere(&restored).unwrap()
    );

    // transcripts carry provenance and serialize to JSON lines
    let mut transcript = Transcript::new();
    for (i, x) in BitStr::enumerate(8).take(3).enumerate() {
        let point = Point::new(i as u16, x);
        transcript
            .insert(point, table.peek(point).unwrap(), Provenance::Distinguisher)
            .unwrap();
    }
    print!("{}", transcript.to_jsonl());
}
