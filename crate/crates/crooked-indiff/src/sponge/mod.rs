//! The randomized sponge: an `r`-bit rate / `c`-bit capacity state walked
//! by one random function `f : {0,1}^{r+c} -> {0,1}^{r+c}`, with the
//! initial state set to the random string sampled after the subverted
//! implementation is fixed.
//!
//! Messages are exact multiples of the rate (no padding rule); digests are
//! exact multiples too. The squeeze loop appends the rate part first and
//! permutes between blocks, so a call whose output would never be used is
//! not made: a construction query costs `ell/r + s/r - 1` oracle calls.

mod games;
mod graph;

pub use games::{
    drive_sponge_adversary, run_sponge_game, SpongeGameResult, SpongeGameSpec, SpongeLedgerRow,
    SpongeWorld,
};
pub use graph::{CrookedSpongeSim, SpongeSimGraph};

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{Point, QueryService};
use crate::rng::SplitRng;
use crate::subversion::{EvaluationRecord, Implementation};

/// A sponge state `(rate part, capacity part)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Node {
    pub rate: BitStr,
    pub cap: BitStr,
}

impl Node {
    pub fn new(rate: BitStr, cap: BitStr) -> Self {
        Node { rate, cap }
    }

    /// Pack as one `r+c`-bit word, rate in the high bits.
    pub fn to_word(&self) -> BitStr {
        self.rate.concat(self.cap)
    }

    pub fn from_word(w: BitStr, cap_width: u8) -> Self {
        let (rate, cap) = w.split(cap_width);
        Node { rate, cap }
    }

    /// The oracle point for this state (single-index domain).
    pub fn point(&self) -> Point {
        Point::new(0, self.to_word())
    }
}

#[derive(Clone, Debug)]
pub struct SpongeParams {
    pub rate: u8,
    pub cap: u8,
    /// Message length in bits; multiple of the rate.
    pub ell: u8,
    /// Digest length in bits; multiple of the rate.
    pub digest_len: u8,
    /// Random initial state, split (r bits, c bits).
    pub iv: Node,
}

impl SpongeParams {
    pub fn new(rate: u8, cap: u8, ell: u8, digest_len: u8, iv: Node) -> Result<Self> {
        if rate == 0 || cap == 0 || rate + cap > 16 {
            return Err(Error::Domain(format!(
                "sponge state must satisfy 1 <= r, 1 <= c, r+c <= 16 (got r={rate}, c={cap})"
            )));
        }
        if ell == 0 || ell > 16 || !ell.is_multiple_of(rate) {
            return Err(Error::Domain(format!(
                "message length {ell} must be a positive multiple of the rate, at most 16"
            )));
        }
        if digest_len == 0 || digest_len > 16 || !digest_len.is_multiple_of(rate) {
            return Err(Error::Domain(format!(
                "digest length {digest_len} must be a positive multiple of the rate, at most 16"
            )));
        }
        if iv.rate.width() != rate || iv.cap.width() != cap {
            return Err(Error::Domain("initial state split does not match (r, c)".into()));
        }
        Ok(SpongeParams {
            rate,
            cap,
            ell,
            digest_len,
            iv,
        })
    }

    pub fn sample_iv(rate: u8, cap: u8, ell: u8, digest_len: u8, rng: &mut SplitRng) -> Result<Self> {
        let iv = Node::new(
            BitStr::masked(rng.next_u64(), rate),
            BitStr::masked(rng.next_u64(), cap),
        );
        SpongeParams::new(rate, cap, ell, digest_len, iv)
    }

    pub fn state_width(&self) -> u8 {
        self.rate + self.cap
    }

    pub fn absorb_blocks(&self) -> u8 {
        self.ell / self.rate
    }

    pub fn squeeze_blocks(&self) -> u8 {
        self.digest_len / self.rate
    }

    /// Oracle calls per construction query.
    pub fn calls_per_query(&self) -> u32 {
        self.absorb_blocks() as u32 + self.squeeze_blocks() as u32 - 1
    }

    /// `i`-th message block, `0`-based, first-absorbed block in the high bits.
    pub fn block(&self, msg: BitStr, i: u8) -> BitStr {
        msg.slice_from_top(i * self.rate, self.rate)
    }

    pub fn check_message(&self, msg: BitStr) -> Result<()> {
        if msg.width() != self.ell {
            return Err(Error::Domain(format!(
                "message width {} does not match length {}",
                msg.width(),
                self.ell
            )));
        }
        Ok(())
    }
}

/// Honest sponge digest via direct oracle calls.
pub fn sponge_eval(svc: &mut dyn QueryService, params: &SpongeParams, msg: BitStr) -> Result<BitStr> {
    params.check_message(msg)?;
    let mut state = params.iv;
    for i in 0..params.absorb_blocks() {
        let input = Node::new(state.rate ^ params.block(msg, i), state.cap);
        state = Node::from_word(svc.fetch(input.point())?, params.cap);
    }
    let mut digest = state.rate;
    for _ in 1..params.squeeze_blocks() {
        state = Node::from_word(svc.fetch(state.point())?, params.cap);
        digest = digest.concat(state.rate);
    }
    Ok(digest)
}

/// Subverted sponge digest: every call goes through the implementation.
/// Returns the evaluation records in call order.
pub fn sponge_eval_subverted(
    imp: &Implementation,
    svc: &mut dyn QueryService,
    params: &SpongeParams,
    msg: BitStr,
) -> Result<(BitStr, Vec<EvaluationRecord>)> {
    params.check_message(msg)?;
    let mut records = Vec::with_capacity(params.calls_per_query() as usize);
    let mut state = params.iv;
    for i in 0..params.absorb_blocks() {
        let input = Node::new(state.rate ^ params.block(msg, i), state.cap);
        let rec = imp.evaluate(svc, input.point())?;
        state = Node::from_word(rec.value, params.cap);
        records.push(rec);
    }
    let mut digest = state.rate;
    for _ in 1..params.squeeze_blocks() {
        let rec = imp.evaluate(svc, state.point())?;
        state = Node::from_word(rec.value, params.cap);
        digest = digest.concat(state.rate);
        records.push(rec);
    }
    Ok((digest, records))
}
