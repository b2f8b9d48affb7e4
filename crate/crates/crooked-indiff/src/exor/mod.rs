//! The enveloped-XOR construction over `l` branch functions and one
//! envelope function: `EXor(R, m) = h(0, g_R(m))` with
//! `g_R(m) = xor_{i=1..l} h(i, m ^ r_i)`.
//!
//! `ExorParams` carries the branch masks `R = (r_1..r_l)`, which the game
//! driver samples after the subverted implementation is fixed.

mod games;
mod simulator;

pub use games::{
    drive_exor_adversary, run_exor_game, ExorGameResult, ExorGameSpec, ExorLedgerRow, ExorWorld,
};
pub use simulator::{multi_message_prefix_check, BatchOutcome, ExorSimulator};

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, PeekService, Point, QueryService};
use crate::rng::SplitRng;
use crate::subversion::{EvaluationRecord, Implementation};

#[derive(Clone, Debug)]
pub struct ExorParams {
    pub n: u8,
    pub l: u16,
    /// Branch masks r_1..r_l.
    pub iv: Vec<BitStr>,
}

impl ExorParams {
    pub fn new(n: u8, l: u16, iv: Vec<BitStr>) -> Result<Self> {
        if l == 0 {
            return Err(Error::Domain("EXor needs at least one branch".into()));
        }
        if iv.len() != l as usize || iv.iter().any(|r| r.width() != n) {
            return Err(Error::Domain(format!(
                "EXor masks must be {l} strings of width {n}"
            )));
        }
        Ok(ExorParams { n, l, iv })
    }

    /// Sample masks from a stream; used at world setup, after stage one.
    pub fn sample(n: u8, l: u16, rng: &mut SplitRng) -> Result<Self> {
        let iv = (0..l).map(|_| BitStr::masked(rng.next_u64(), n)).collect();
        ExorParams::new(n, l, iv)
    }

    /// Branch point `alpha_j = (j, m ^ r_j)`, `j` in `1..=l`.
    pub fn branch_point(&self, j: u16, m: BitStr) -> Point {
        Point::new(j, m ^ self.iv[j as usize - 1])
    }

    pub fn branch_points(&self, m: BitStr) -> Vec<Point> {
        (1..=self.l).map(|j| self.branch_point(j, m)).collect()
    }
}

/// Honest `g_R(m)`: xor of the branch values straight from the oracle.
pub fn g_r_eval(svc: &mut dyn QueryService, params: &ExorParams, m: BitStr) -> Result<BitStr> {
    let mut acc = BitStr::zero(params.n);
    for j in 1..=params.l {
        acc = acc ^ svc.fetch(params.branch_point(j, m))?;
    }
    Ok(acc)
}

/// Subverted `g~_R(m)`: xor of the implementation's branch outputs. Returns
/// the per-branch evaluation records for transcript updates.
pub fn g_r_eval_subverted(
    imp: &Implementation,
    svc: &mut dyn QueryService,
    params: &ExorParams,
    m: BitStr,
) -> Result<(BitStr, Vec<EvaluationRecord>)> {
    let mut acc = BitStr::zero(params.n);
    let mut records = Vec::with_capacity(params.l as usize);
    for j in 1..=params.l {
        let rec = imp.evaluate(svc, params.branch_point(j, m))?;
        acc = acc ^ rec.value;
        records.push(rec);
    }
    Ok((acc, records))
}

/// Honest digest `h(0, g_R(m))`.
pub fn exor_eval(svc: &mut dyn QueryService, params: &ExorParams, m: BitStr) -> Result<BitStr> {
    let g = g_r_eval(svc, params, m)?;
    svc.fetch(Point::new(0, g))
}

/// Subverted digest `h~(0, g~_R(m))`. The envelope record comes last.
pub fn exor_eval_subverted(
    imp: &Implementation,
    svc: &mut dyn QueryService,
    params: &ExorParams,
    m: BitStr,
) -> Result<(BitStr, Vec<EvaluationRecord>)> {
    let (g, mut records) = g_r_eval_subverted(imp, svc, params, m)?;
    let env = imp.evaluate(svc, Point::new(0, g))?;
    let digest = env.value;
    records.push(env);
    Ok((digest, records))
}

/// The ideal-world random oracle, realized from the same tape the games
/// draw their envelope values from: `F(m)` is the slot value at
/// `(0, g~_R(m))`. Restricted to executions without bad events this is an
/// exact lazily-sampled independent oracle, and it is what makes the game
/// chain compare equal seed-by-seed.
pub fn f_value(
    imp: &Implementation,
    params: &ExorParams,
    table: &FunctionTable,
    m: BitStr,
) -> Result<BitStr> {
    let (g, records) = g_r_eval_subverted(imp, &mut PeekService(table), params, m)?;
    for rec in &records {
        if rec.query_log.iter().any(|(p, _)| p.index == 0) {
            return Err(Error::Contract(
                "branch evaluation reached into the envelope index".into(),
            ));
        }
    }
    table.peek(Point::new(0, g))
}
