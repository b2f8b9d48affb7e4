//! The resampling set at the index of interest: its size floor, the
//! affine transform of the batch value, and the invariance of everything
//! else in the transcript.
//!
//!     cargo run --release --example resampling_identity

use crooked_indiff::analysis::{check_resampling_consequences, DomainScan};
use crooked_indiff::bits::BitStr;
use crooked_indiff::exor::ExorParams;
use crooked_indiff::oracle::FunctionTable;
use crooked_indiff::rng::{derive, SplitRng};
use crooked_indiff::subversion::{run_first_stage, SubverterKind, SubverterSpec};

fn main() {
    let n = 6u8;
    let l = 4u16;
    let spec = SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 4 }, 0);

    let mut shown = 0;
    let mut draw = 0u64;
    while shown < 3 {
        let seed = derive(0x5e7, &[draw]);
        draw += 1;
        let mut table = FunctionTable::new(seed, 0, n, l, n).unwrap();
        let (imp, _) = run_first_stage(&spec, &mut table).unwrap();
        let mut rng = SplitRng::from_path(seed, &[0x6976]);
        let params = ExorParams::sample(n, l, &mut rng).unwrap();
        let m = BitStr::masked(rng.next_u64(), n);
        let scan = DomainScan::new(&imp, &table).unwrap();
        let Some(index) = scan.index_of_interest(&params, m).unwrap() else {
            continue;
        };
        shown += 1;

        let set = scan.resampling_set(&params, m, index).unwrap();
        let floor = 64.0 * (1.0 - scan.ladder().eps1.powf(0.25));
        println!(
            "sample {shown}: m={m}, index of interest {index}, |S| = {} (floor {floor:.1})",
            set.len()
        );

        let probes: Vec<BitStr> = (0..4).map(|_| BitStr::masked(rng.next_u64(), n)).collect();
        let mut identity = 0;
        let mut index_stable = 0;
        let mut invariant = 0;
        for &beta in &set {
            let c = check_resampling_consequences(&imp, &table, &params, m, index, beta, &probes)
                .unwrap();
            identity += u32::from(c.identity_holds);
            index_stable += u32::from(c.index_unchanged);
            invariant += u32::from(c.other_g_unchanged && c.crooked_set_unchanged);
        }
        println!(
            "  affine identity {identity}/{}, index unchanged {index_stable}/{}, \
             rest of transcript unchanged {invariant}/{}",
            set.len(),
            set.len(),
            set.len()
        );
    }
}
