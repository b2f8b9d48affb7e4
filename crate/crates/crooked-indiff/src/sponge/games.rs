//! The sponge game chain: Real, the interface game G0, the flagging games
//! G1a/G1b (boxed vs highlighted return on a subverted internal call), the
//! honest-construction game G2, and the simulator worlds G3/Ideal.
//!
//! Real, G0 and G1a return the subverted value for every construction call
//! and so agree bit-for-bit; G1b substitutes the honest value whenever the
//! implementation deviates, which makes its construction chain identical
//! to G2's honest chain. G3 and Ideal share the crooked graph simulator
//! with the message oracle.

use crate::adversary::DistinguisherSpec;
use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, PeekService, Point, QueryService};
use crate::rng::{absorb, derive, SplitRng};
use crate::subversion::{run_first_stage, Implementation, SubverterSpec};
use std::collections::{BTreeMap, BTreeSet};

use super::graph::CrookedSpongeSim;
use super::{Node, SpongeParams};

const TAPE_ID: u64 = 0x73;
const ORACLE_ID: u64 = 0x46;
const TRIAL_TAG: u64 = 0x7370_6e67;
const IV_TAG: u64 = 0x6976;
const ADV_TAG: u64 = 0x6164;
const NODE_TAG: u64 = 0x6e6e;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpongeWorld {
    Real,
    G0,
    G1a,
    G1b,
    G2,
    G3,
    Ideal,
}

impl SpongeWorld {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "Real" | "real" => Ok(SpongeWorld::Real),
            "G0" | "g0" => Ok(SpongeWorld::G0),
            "G1a" | "g1a" => Ok(SpongeWorld::G1a),
            "G1b" | "g1b" => Ok(SpongeWorld::G1b),
            "G2" | "g2" => Ok(SpongeWorld::G2),
            "G3" | "g3" => Ok(SpongeWorld::G3),
            "Ideal" | "ideal" => Ok(SpongeWorld::Ideal),
            other => Err(Error::Config(format!("unknown sponge world {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpongeWorld::Real => "Real",
            SpongeWorld::G0 => "G0",
            SpongeWorld::G1a => "G1a",
            SpongeWorld::G1b => "G1b",
            SpongeWorld::G2 => "G2",
            SpongeWorld::G3 => "G3",
            SpongeWorld::Ideal => "Ideal",
        }
    }

    fn uses_simulator(&self) -> bool {
        matches!(self, SpongeWorld::G3 | SpongeWorld::Ideal)
    }
}

#[derive(Clone, Debug)]
pub struct SpongeGameSpec {
    pub rate: u8,
    pub cap: u8,
    pub ell: u8,
    pub digest_len: u8,
    pub subverter: SubverterSpec,
    pub adversary: DistinguisherSpec,
    pub q2_budget: u32,
}

impl SpongeGameSpec {
    pub fn new(
        rate: u8,
        cap: u8,
        ell: u8,
        digest_len: u8,
        subverter: SubverterSpec,
        adversary: DistinguisherSpec,
    ) -> Self {
        let tau = subverter.kind.query_count() as u32 + 1;
        let calls = (ell / rate + digest_len / rate) as u32;
        let q2_budget = adversary.planned_queries() * (tau + 1) * (calls + 2) + 16;
        SpongeGameSpec {
            rate,
            cap,
            ell,
            digest_len,
            subverter,
            adversary,
            q2_budget,
        }
    }
}

/// One row per construction query.
#[derive(Clone, Debug)]
pub struct SpongeLedgerRow {
    pub message: BitStr,
    pub digest: BitStr,
    /// Internal calls whose implementation output deviated.
    pub subverted_calls: u32,
    pub bad_here: bool,
}

#[derive(Clone, Debug)]
pub struct SpongeGameResult {
    pub world: SpongeWorld,
    pub output_bit: u8,
    pub bad: bool,
    pub rows: Vec<SpongeLedgerRow>,
    pub view_digest: u64,
    pub queries_used: u32,
    pub impl_calls: u32,
    /// Simulator graph snapshot, present in the simulator worlds.
    pub graph_snapshot: Option<String>,
}

/// Adversary-facing interface. `primitive` answers `None` for the
/// simulator's distinguished bottom answer.
pub trait SpongeView {
    fn params(&self) -> &SpongeParams;
    fn primitive(&mut self, x: Node) -> Result<Option<Node>>;
    fn construction(&mut self, m: BitStr) -> Result<BitStr>;
}

struct SpongeGameState {
    world: SpongeWorld,
    imp: Implementation,
    params: SpongeParams,
    tape: FunctionTable,
    oracle: FunctionTable,
    sim: Option<CrookedSpongeSim>,
    bad: bool,
    rows: Vec<SpongeLedgerRow>,
    view_digest: u64,
    queries_used: u32,
    budget: u32,
    impl_calls: u32,
}

impl SpongeGameState {
    fn spend(&mut self) -> Result<()> {
        self.queries_used += 1;
        if self.queries_used > self.budget {
            return Err(Error::Budget(format!(
                "second-stage budget {} exhausted",
                self.budget
            )));
        }
        Ok(())
    }

    fn see(&mut self, word: u64) {
        self.view_digest = absorb(self.view_digest, word);
    }

    /// One internal construction call under the flagging interface: the
    /// honest value and the implementation's value, with the world
    /// deciding which one the chain continues from.
    fn chain_call(&mut self, input: Node) -> Result<(Node, bool)> {
        let honest = Node::from_word(self.tape.peek(input.point())?, self.params.cap);
        match self.world {
            SpongeWorld::G2 => Ok((honest, false)),
            SpongeWorld::Real | SpongeWorld::G0 | SpongeWorld::G1a | SpongeWorld::G1b => {
                let rec = self
                    .imp
                    .evaluate(&mut PeekService(&self.tape), input.point())?;
                self.impl_calls += 1;
                let subverted = rec.value != honest.to_word();
                if subverted && matches!(self.world, SpongeWorld::G1a | SpongeWorld::G1b) {
                    self.bad = true;
                }
                let next = match self.world {
                    // boxed: keep the implementation's value
                    SpongeWorld::Real | SpongeWorld::G0 | SpongeWorld::G1a => {
                        Node::from_word(rec.value, self.params.cap)
                    }
                    // highlighted: substitute the honest value
                    SpongeWorld::G1b => honest,
                    _ => unreachable!(),
                };
                Ok((next, subverted))
            }
            SpongeWorld::G3 | SpongeWorld::Ideal => unreachable!("simulator worlds answer via F"),
        }
    }
}

impl SpongeView for SpongeGameState {
    fn params(&self) -> &SpongeParams {
        &self.params
    }

    fn primitive(&mut self, x: Node) -> Result<Option<Node>> {
        self.spend()?;
        let answer = if self.world.uses_simulator() {
            let sim = self.sim.as_mut().expect("simulator world");
            let a = sim.query(x)?;
            self.bad = sim.bad;
            a
        } else {
            Some(Node::from_word(self.tape.peek(x.point())?, self.params.cap))
        };
        match answer {
            Some(y) => self.see(y.to_word().bits() as u64),
            None => self.see(u64::MAX),
        }
        Ok(answer)
    }

    fn construction(&mut self, m: BitStr) -> Result<BitStr> {
        self.spend()?;
        self.params.check_message(m)?;
        let (digest, subverted_calls, bad_here) = if self.world.uses_simulator() {
            (self.oracle.peek(Point::new(0, m))?, 0, false)
        } else {
            let mut state = self.params.iv;
            let mut subverted_calls = 0u32;
            for i in 0..self.params.absorb_blocks() {
                let input = Node::new(state.rate ^ self.params.block(m, i), state.cap);
                let (next, sub) = self.chain_call(input)?;
                state = next;
                subverted_calls += u32::from(sub);
            }
            let mut digest = state.rate;
            for _ in 1..self.params.squeeze_blocks() {
                let (next, sub) = self.chain_call(state)?;
                state = next;
                subverted_calls += u32::from(sub);
                digest = digest.concat(state.rate);
            }
            (digest, subverted_calls, subverted_calls > 0)
        };
        self.rows.push(SpongeLedgerRow {
            message: m,
            digest,
            subverted_calls,
            bad_here,
        });
        self.see(digest.bits() as u64);
        Ok(digest)
    }
}

/// Local memory for the adversary's own walk recomputations.
struct SpongeMemory<'w> {
    view: &'w mut dyn SpongeView,
    known: BTreeMap<Node, Option<Node>>,
}

impl<'w> SpongeMemory<'w> {
    fn new(view: &'w mut dyn SpongeView) -> Self {
        SpongeMemory {
            view,
            known: BTreeMap::new(),
        }
    }

    fn primitive(&mut self, x: Node) -> Result<Option<Node>> {
        if let Some(&a) = self.known.get(&x) {
            return Ok(a);
        }
        let a = self.view.primitive(x)?;
        self.known.insert(x, a);
        Ok(a)
    }
}

impl QueryService for SpongeMemory<'_> {
    fn fetch(&mut self, p: Point) -> Result<BitStr> {
        let cap_width = self.view.params().cap;
        match self.primitive(Node::from_word(p.x, cap_width))? {
            Some(y) => Ok(y.to_word()),
            None => Err(Error::Contract("primitive answered bottom".into())),
        }
    }
}

/// Recompute the digest of `m` through primitive queries, running the
/// implementation locally. `None` when a bottom answer interrupts the walk.
fn emulated_digest(
    mem: &mut SpongeMemory,
    imp: &Implementation,
    m: BitStr,
) -> Result<Option<BitStr>> {
    let params = mem.view.params().clone();
    let mut state = params.iv;
    for i in 0..params.absorb_blocks() {
        let input = Node::new(state.rate ^ params.block(m, i), state.cap);
        match imp.evaluate(mem, input.point()) {
            Ok(rec) => state = Node::from_word(rec.value, params.cap),
            Err(Error::Contract(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    let mut digest = state.rate;
    for _ in 1..params.squeeze_blocks() {
        match imp.evaluate(mem, state.point()) {
            Ok(rec) => state = Node::from_word(rec.value, params.cap),
            Err(Error::Contract(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
        digest = digest.concat(state.rate);
    }
    Ok(Some(digest))
}

fn fresh_message(rng: &mut SplitRng, ell: u8, drawn: &mut BTreeSet<BitStr>) -> BitStr {
    loop {
        let c = BitStr::masked(rng.next_u64(), ell);
        if drawn.insert(c) {
            return c;
        }
    }
}

/// Run the distinguisher against a sponge world; returns its output bit.
pub fn drive_sponge_adversary(
    view: &mut dyn SpongeView,
    spec: &DistinguisherSpec,
    imp: &Implementation,
    rng: &mut SplitRng,
) -> Result<u8> {
    let params = view.params().clone();
    match spec {
        DistinguisherSpec::ConsistencySingle => sponge_consistency(view, imp, rng, 1),
        DistinguisherSpec::ConsistencyMulti { count } => sponge_consistency(view, imp, rng, *count),
        DistinguisherSpec::FCollision { q_f } => {
            let mut mem = SpongeMemory::new(view);
            let mut seen: Vec<(BitStr, BitStr)> = Vec::new();
            let mut collision = None;
            let mut drawn = BTreeSet::new();
            for _ in 0..*q_f {
                let m = fresh_message(rng, params.ell, &mut drawn);
                let y = mem.view.construction(m)?;
                if collision.is_none() {
                    if let Some((prev, _)) = seen.iter().find(|(_, py)| *py == y) {
                        collision = Some((*prev, m));
                    }
                }
                seen.push((m, y));
            }
            let Some((a, b)) = collision else {
                return Ok(0);
            };
            let da = emulated_digest(&mut mem, imp, a)?;
            let db = emulated_digest(&mut mem, imp, b)?;
            Ok(u8::from(da.is_some() && da == db))
        }
        DistinguisherSpec::RandomProbe { q } => {
            let mut acc = 0u64;
            for _ in 0..*q {
                if rng.next_below(2) == 0 {
                    let x = Node::new(
                        BitStr::masked(rng.next_u64(), params.rate),
                        BitStr::masked(rng.next_u64(), params.cap),
                    );
                    match view.primitive(x)? {
                        Some(y) => acc = absorb(acc, y.to_word().bits() as u64),
                        None => acc = absorb(acc, u64::MAX),
                    }
                } else {
                    let m = BitStr::masked(rng.next_u64(), params.ell);
                    acc = absorb(acc, view.construction(m)?.bits() as u64);
                }
            }
            Ok((acc & 1) as u8)
        }
    }
}

fn sponge_consistency(
    view: &mut dyn SpongeView,
    imp: &Implementation,
    rng: &mut SplitRng,
    count: u32,
) -> Result<u8> {
    let ell = view.params().ell;
    let mut mem = SpongeMemory::new(view);
    let mut drawn = BTreeSet::new();
    let mut ok = true;
    for _ in 0..count {
        let m = fresh_message(rng, ell, &mut drawn);
        let answer = mem.view.construction(m)?;
        let local = emulated_digest(&mut mem, imp, m)?;
        ok &= local == Some(answer);
    }
    Ok(u8::from(ok))
}

/// Run one seeded trial of the named world.
pub fn run_sponge_game(
    world: SpongeWorld,
    spec: &SpongeGameSpec,
    master_seed: u64,
    trial: u64,
) -> Result<SpongeGameResult> {
    let trial_key = derive(master_seed, &[TRIAL_TAG, trial]);
    let n = spec.rate + spec.cap;
    let mut tape = FunctionTable::new(trial_key, TAPE_ID, n, 0, n)?;
    let (imp, _advice) = run_first_stage(&spec.subverter, &mut tape)?;
    let mut iv_rng = SplitRng::from_path(trial_key, &[IV_TAG]);
    let params = SpongeParams::sample_iv(spec.rate, spec.cap, spec.ell, spec.digest_len, &mut iv_rng)?;
    let oracle = FunctionTable::new(trial_key, ORACLE_ID, spec.ell, 0, spec.digest_len)?;
    let sim = if world.uses_simulator() {
        Some(CrookedSpongeSim::new(
            params.clone(),
            imp.clone(),
            oracle.clone(),
            SplitRng::from_path(trial_key, &[NODE_TAG]),
        ))
    } else {
        None
    };
    let mut state = SpongeGameState {
        world,
        imp: imp.clone(),
        params,
        tape,
        oracle,
        sim,
        bad: false,
        rows: Vec::new(),
        view_digest: 0,
        queries_used: 0,
        budget: spec.q2_budget,
        impl_calls: 0,
    };
    let mut adv_rng = SplitRng::from_path(trial_key, &[ADV_TAG]);
    let output = drive_sponge_adversary(&mut state, &spec.adversary, &imp, &mut adv_rng)?;
    let graph_snapshot = state.sim.as_ref().map(|s| s.graph().snapshot_json());
    let impl_calls = state.impl_calls + state.sim.as_ref().map_or(0, |s| s.impl_calls);
    Ok(SpongeGameResult {
        world,
        output_bit: output,
        bad: state.bad,
        rows: state.rows,
        view_digest: state.view_digest,
        queries_used: state.queries_used,
        impl_calls,
        graph_snapshot,
    })
}
