//! The EXor game chain: Real, the precomputation game G0, the programming
//! games G1/G2 (boxed vs highlighted branches), and the Ideal world
//! (simulator plus oracle).
//!
//! Every world draws its values from the same trial tape, so adjacent
//! games are bit-identical seed-by-seed until a flagged divergence: the
//! only answers that differ anywhere in the chain are the construction
//! answers of {Real, G0, G1} (subverted envelope) versus {G2, Ideal}
//! (oracle value), and those coincide unless the envelope point of the
//! queried message is crooked.

use crate::adversary::DistinguisherSpec;
use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, PeekService, Point, Provenance, QueryService, Transcript};
use crate::rng::{absorb, derive, SplitRng};
use crate::subversion::{run_first_stage, Implementation, SubverterSpec};
use std::collections::{BTreeMap, BTreeSet};

use super::simulator::ExorSimulator;
use super::{exor_eval_subverted, f_value, g_r_eval_subverted, ExorParams};

const TAPE_ID: u64 = 0x68;
const TRIAL_TAG: u64 = 0x6578_6f72;
const IV_TAG: u64 = 0x6976;
const ADV_TAG: u64 = 0x6164;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExorWorld {
    Real,
    G0,
    G1,
    G2,
    Ideal,
}

impl ExorWorld {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "Real" | "real" => Ok(ExorWorld::Real),
            "G0" | "g0" => Ok(ExorWorld::G0),
            "G1" | "g1" => Ok(ExorWorld::G1),
            "G2" | "g2" => Ok(ExorWorld::G2),
            "Ideal" | "ideal" => Ok(ExorWorld::Ideal),
            other => Err(Error::Config(format!("unknown EXor world {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExorWorld::Real => "Real",
            ExorWorld::G0 => "G0",
            ExorWorld::G1 => "G1",
            ExorWorld::G2 => "G2",
            ExorWorld::Ideal => "Ideal",
        }
    }
}

/// Everything a trial needs besides the seed.
#[derive(Clone, Debug)]
pub struct ExorGameSpec {
    pub n: u8,
    pub l: u16,
    pub subverter: SubverterSpec,
    pub adversary: DistinguisherSpec,
    /// Cap on second-stage oracle interactions, counting the batch
    /// inflation of the adversary's local recomputations.
    pub q2_budget: u32,
    /// Attach the full bookkeeping list to the result for audits. Off by
    /// default: bulk Monte-Carlo runs keep results small.
    pub record_transcript: bool,
}

impl ExorGameSpec {
    pub fn new(n: u8, l: u16, subverter: SubverterSpec, adversary: DistinguisherSpec) -> Self {
        let tau = subverter.kind.query_count() as u32 + 1;
        let q2_budget = adversary.planned_queries() * (tau + 2) * 4 + 16;
        ExorGameSpec {
            n,
            l,
            subverter,
            adversary,
            q2_budget,
            record_transcript: false,
        }
    }

    pub fn with_transcript(mut self) -> Self {
        self.record_transcript = true;
        self
    }
}

/// One row per distinct batched message.
#[derive(Clone, Debug)]
pub struct ExorLedgerRow {
    pub message: BitStr,
    pub g_tilde: BitStr,
    /// This world's construction answer for the message.
    pub construction_value: BitStr,
    /// The implementation's output at the envelope point, computed against
    /// the answers this world gives (what the distinguisher can see).
    pub envelope_view: BitStr,
    /// The oracle value F(m).
    pub oracle_value: BitStr,
    /// envelope_view == oracle_value.
    pub consistent: bool,
    pub bad_preset: bool,
    pub bad_crooked: bool,
    pub branch_mismatch: bool,
}

#[derive(Clone, Debug)]
pub struct ExorGameResult {
    pub world: ExorWorld,
    pub output_bit: u8,
    pub bad_preset: bool,
    pub bad_crooked: bool,
    pub aborted: bool,
    pub rows: Vec<ExorLedgerRow>,
    /// Digest of every answer the adversary saw, for per-seed comparisons.
    pub view_digest: u64,
    pub oracle_queries: u32,
    pub impl_calls: u32,
    pub queries_used: u32,
    /// The bookkeeping list, when `record_transcript` asked for it.
    pub transcript: Option<Transcript>,
}

impl ExorGameResult {
    pub fn bad(&self) -> bool {
        self.bad_preset || self.bad_crooked
    }
}

/// Adversary's interface to a world. Branch points are reachable only
/// through batch queries, which enforces the batch convention.
pub trait ExorView {
    fn params(&self) -> &ExorParams;
    fn envelope(&mut self, w: BitStr) -> Result<BitStr>;
    fn batch(&mut self, m: BitStr) -> Result<Vec<BitStr>>;
    fn construction(&mut self, m: BitStr) -> Result<BitStr>;
}

struct GameState {
    world: ExorWorld,
    imp: Implementation,
    params: ExorParams,
    tape: FunctionTable,
    /// Real/G0/G1/G2 bookkeeping; Ideal delegates to the simulator.
    list: Transcript,
    rows: Vec<ExorLedgerRow>,
    batched: BTreeSet<BitStr>,
    construction_queried: Vec<BitStr>,
    sim: Option<ExorSimulator>,
    bad_preset: bool,
    bad_crooked: bool,
    view_digest: u64,
    queries_used: u32,
    budget: u32,
    oracle_queries: u32,
    impl_calls: u32,
}

impl GameState {
    fn new(
        world: ExorWorld,
        imp: Implementation,
        params: ExorParams,
        tape: FunctionTable,
        budget: u32,
    ) -> Self {
        let sim = if world == ExorWorld::Ideal {
            Some(ExorSimulator::new(imp.clone(), params.clone(), tape.clone()))
        } else {
            None
        };
        let mut list = Transcript::new();
        for e in imp.advice().iter() {
            list.insert(e.point, e.value, e.provenance)
                .expect("advice is duplicate-free");
        }
        GameState {
            world,
            imp,
            params,
            tape,
            list,
            rows: Vec::new(),
            batched: BTreeSet::new(),
            construction_queried: Vec::new(),
            sim,
            bad_preset: false,
            bad_crooked: false,
            view_digest: 0,
            queries_used: 0,
            budget,
            oracle_queries: 0,
            impl_calls: 0,
        }
    }

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

    fn see(&mut self, v: BitStr) {
        self.view_digest = absorb(self.view_digest, v.bits() as u64);
    }

    fn list_value(&mut self, p: Point, provenance: Provenance) -> Result<BitStr> {
        if let Some(v) = self.list.get(&p) {
            return Ok(v);
        }
        let v = self.tape.peek(p)?;
        self.list.insert(p, v, provenance)?;
        Ok(v)
    }

    fn cached_betas(&self, m: BitStr) -> Vec<BitStr> {
        self.params
            .branch_points(m)
            .iter()
            .map(|p| {
                self.list
                    .get(p)
                    .or_else(|| self.imp.advice().get(p))
                    .expect("batched point is bound")
            })
            .collect()
    }

    /// The programming-game batch machinery shared by G0/G1/G2; Real
    /// answers branch queries straight off the table and only fills the
    /// audit row.
    fn run_batch(&mut self, m: BitStr) -> Result<Vec<BitStr>> {
        if self.batched.contains(&m) {
            return Ok(self.cached_betas(m));
        }
        self.batched.insert(m);

        let use_lists = self.world != ExorWorld::Real;
        let mut betas = Vec::with_capacity(self.params.l as usize);
        let mut g = BitStr::zero(self.params.n);
        let mut mismatch = false;

        if use_lists {
            for j in 1..=self.params.l {
                let alpha = self.params.branch_point(j, m);
                let mut svc = EngineListService {
                    list: &mut self.list,
                    tape: &self.tape,
                };
                let rec = self.imp.evaluate(&mut svc, alpha)?;
                self.impl_calls += 1;
                let honest = self
                    .list
                    .get(&alpha)
                    .or_else(|| self.imp.advice().get(&alpha))
                    .expect("branch point bound by first-query rule");
                betas.push(honest);
                g = g ^ rec.value;
                mismatch |= rec.value != honest;
            }
        } else {
            for j in 1..=self.params.l {
                let alpha = self.params.branch_point(j, m);
                let v = self.list_value(alpha, Provenance::Distinguisher)?;
                betas.push(v);
            }
            let (g_pure, records) =
                g_r_eval_subverted(&self.imp, &mut PeekService(&self.tape), &self.params, m)?;
            g = g_pure;
            mismatch = records.iter().zip(betas.iter()).any(|(r, h)| r.value != *h);
        }

        let env = Point::new(0, g);
        let fm = f_value(&self.imp, &self.params, &self.tape, m)?;
        let preset = self.list.contains(&env);
        let flags_tracked = matches!(self.world, ExorWorld::G1 | ExorWorld::G2);
        let mut bad_preset_here = false;
        let mut bad_crooked_here = false;

        if use_lists {
            if preset {
                if flags_tracked {
                    bad_preset_here = true;
                    self.bad_preset = true;
                }
            } else {
                // G0 binds the envelope during its precomputation; G1/G2
                // program the oracle value. Same bits either way.
                self.list.insert(env, fm, Provenance::SimulatorInternal)?;
                if flags_tracked {
                    self.oracle_queries += 1;
                }
            }
        }

        // the distinguisher-visible implementation output at the envelope
        let env_view = if use_lists {
            let mut svc = EngineListService {
                list: &mut self.list,
                tape: &self.tape,
            };
            let v = self.imp.evaluate(&mut svc, env)?.value;
            self.impl_calls += 1;
            v
        } else {
            self.imp.value_on(&self.tape, env)?
        };
        if flags_tracked && !preset && env_view != fm {
            bad_crooked_here = true;
            self.bad_crooked = true;
        }

        let construction_value = match self.world {
            ExorWorld::Real | ExorWorld::G0 | ExorWorld::G1 => env_view,
            ExorWorld::G2 | ExorWorld::Ideal => fm,
        };
        self.rows.push(ExorLedgerRow {
            message: m,
            g_tilde: g,
            construction_value,
            envelope_view: env_view,
            oracle_value: fm,
            consistent: env_view == fm,
            bad_preset: bad_preset_here,
            bad_crooked: bad_crooked_here,
            branch_mismatch: mismatch,
        });
        Ok(betas)
    }

    fn run_batch_ideal(&mut self, m: BitStr) -> Result<Vec<BitStr>> {
        let fresh = !self.batched.contains(&m);
        let out = {
            let sim = self.sim.as_mut().expect("ideal world has a simulator");
            match sim.cached_batch(m).cloned() {
                Some(out) => out,
                None => sim.batch_query(m)?,
            }
        };
        if fresh {
            self.batched.insert(m);
            let fm = f_value(&self.imp, &self.params, &self.tape, m)?;
            let env = Point::new(0, out.g_tilde);
            let env_view = {
                let sim = self.sim.as_ref().unwrap();
                let mut svc = SimListPeek {
                    sim,
                    tape: &self.tape,
                };
                self.imp.evaluate(&mut svc, env)?.value
            };
            self.rows.push(ExorLedgerRow {
                message: m,
                g_tilde: out.g_tilde,
                construction_value: fm,
                envelope_view: env_view,
                oracle_value: fm,
                consistent: env_view == fm,
                bad_preset: out.bad_preset,
                bad_crooked: out.bad_crooked,
                branch_mismatch: out.branch_mismatch,
            });
        }
        Ok(out.betas)
    }

    /// Batch every construction-queried message that was never batched.
    /// Done after the adversary finishes; flag accounting only, the
    /// answers are not part of the adversary's view.
    fn expand_remaining(&mut self) -> Result<()> {
        let pending: Vec<BitStr> = self
            .construction_queried
            .iter()
            .filter(|m| !self.batched.contains(m))
            .copied()
            .collect();
        for m in pending {
            if self.world == ExorWorld::Ideal {
                self.run_batch_ideal(m)?;
            } else {
                self.run_batch(m)?;
            }
        }
        Ok(())
    }

    fn finish(mut self, output_bit: u8, record_transcript: bool) -> Result<ExorGameResult> {
        self.expand_remaining()?;
        let (bad_preset, bad_crooked, aborted, oracle_queries, impl_calls) = match &self.sim {
            Some(sim) => (
                sim.bad_preset,
                sim.bad_crooked,
                sim.aborted,
                sim.oracle_queries,
                sim.impl_calls,
            ),
            None => (
                self.bad_preset,
                self.bad_crooked,
                false,
                self.oracle_queries,
                self.impl_calls,
            ),
        };
        let transcript = record_transcript.then(|| match &self.sim {
            Some(sim) => sim.list.clone(),
            None => self.list.clone(),
        });
        Ok(ExorGameResult {
            world: self.world,
            output_bit,
            bad_preset,
            bad_crooked,
            aborted,
            rows: self.rows,
            view_digest: self.view_digest,
            oracle_queries,
            impl_calls,
            queries_used: self.queries_used,
            transcript,
        })
    }
}

/// List-backed service for the game engine's own implementation runs.
struct EngineListService<'a> {
    list: &'a mut Transcript,
    tape: &'a FunctionTable,
}

impl QueryService for EngineListService<'_> {
    fn fetch(&mut self, p: Point) -> Result<BitStr> {
        if let Some(v) = self.list.get(&p) {
            return Ok(v);
        }
        let v = self.tape.peek(p)?;
        self.list.insert(p, v, Provenance::ImplementationInternal)?;
        Ok(v)
    }
}

/// Read-only view over the simulator's list, for recomputing what the
/// distinguisher can see without disturbing simulator state.
struct SimListPeek<'a> {
    sim: &'a ExorSimulator,
    tape: &'a FunctionTable,
}

impl QueryService for SimListPeek<'_> {
    fn fetch(&mut self, p: Point) -> Result<BitStr> {
        if let Some(v) = self.sim.list.get(&p) {
            return Ok(v);
        }
        self.tape.peek(p)
    }
}

impl ExorView for GameState {
    fn params(&self) -> &ExorParams {
        &self.params
    }

    fn envelope(&mut self, w: BitStr) -> Result<BitStr> {
        self.spend()?;
        let v = match self.world {
            ExorWorld::Ideal => self.sim.as_mut().unwrap().envelope_query(w)?,
            _ => self.list_value(Point::new(0, w), Provenance::Distinguisher)?,
        };
        self.see(v);
        Ok(v)
    }

    fn batch(&mut self, m: BitStr) -> Result<Vec<BitStr>> {
        self.spend()?;
        let betas = match self.world {
            ExorWorld::Ideal => self.run_batch_ideal(m)?,
            _ => self.run_batch(m)?,
        };
        for &b in &betas {
            self.see(b);
        }
        Ok(betas)
    }

    fn construction(&mut self, m: BitStr) -> Result<BitStr> {
        self.spend()?;
        if !self.construction_queried.contains(&m) {
            self.construction_queried.push(m);
        }
        let v = match self.world {
            ExorWorld::Real | ExorWorld::G0 | ExorWorld::G1 => {
                let (digest, _) =
                    exor_eval_subverted(&self.imp, &mut PeekService(&self.tape), &self.params, m)?;
                digest
            }
            ExorWorld::G2 | ExorWorld::Ideal => f_value(&self.imp, &self.params, &self.tape, m)?,
        };
        self.see(v);
        Ok(v)
    }
}

/// Local memory the adversary uses to rerun the implementation on its own
/// transcript: answers come from what it has already seen, missing branch
/// points trigger batch queries, missing envelope points direct queries.
struct AdversaryMemory<'w> {
    view: &'w mut dyn ExorView,
    known: BTreeMap<Point, BitStr>,
}

impl<'w> AdversaryMemory<'w> {
    fn new(view: &'w mut dyn ExorView) -> Self {
        AdversaryMemory {
            view,
            known: BTreeMap::new(),
        }
    }

    fn batch(&mut self, m: BitStr) -> Result<Vec<BitStr>> {
        let betas = self.view.batch(m)?;
        let points = self.view.params().branch_points(m);
        for (p, v) in points.iter().zip(betas.iter()) {
            self.known.entry(*p).or_insert(*v);
        }
        Ok(betas)
    }

    fn envelope(&mut self, w: BitStr) -> Result<BitStr> {
        let v = self.view.envelope(w)?;
        self.known.entry(Point::new(0, w)).or_insert(v);
        Ok(v)
    }

    fn construction(&mut self, m: BitStr) -> Result<BitStr> {
        self.view.construction(m)
    }
}

impl QueryService for AdversaryMemory<'_> {
    fn fetch(&mut self, p: Point) -> Result<BitStr> {
        if let Some(&v) = self.known.get(&p) {
            return Ok(v);
        }
        if p.index == 0 {
            return self.envelope(p.x);
        }
        let m = p.x ^ self.view.params().iv[p.index as usize - 1];
        self.batch(m)?;
        self.known
            .get(&p)
            .copied()
            .ok_or_else(|| Error::Contract(format!("batch for {p:?} did not bind it")))
    }
}

/// Recompute g~_R(m) from the adversary's transcript, batching as needed.
fn emulated_g(mem: &mut AdversaryMemory, imp: &Implementation, m: BitStr) -> Result<BitStr> {
    let params = mem.view.params().clone();
    mem.batch(m)?;
    let mut g = BitStr::zero(params.n);
    for j in 1..=params.l {
        let rec = imp.evaluate(mem, params.branch_point(j, m))?;
        g = g ^ rec.value;
    }
    Ok(g)
}

fn fresh_message(rng: &mut SplitRng, n: u8, drawn: &mut BTreeSet<BitStr>) -> BitStr {
    loop {
        let c = BitStr::masked(rng.next_u64(), n);
        if drawn.insert(c) {
            return c;
        }
    }
}

/// Run the distinguisher against a world view; returns its output bit.
pub fn drive_exor_adversary(
    view: &mut dyn ExorView,
    spec: &DistinguisherSpec,
    imp: &Implementation,
    rng: &mut SplitRng,
) -> Result<u8> {
    let n = view.params().n;
    match spec {
        DistinguisherSpec::ConsistencySingle => consistency_probe(view, imp, rng, 1),
        DistinguisherSpec::ConsistencyMulti { count } => consistency_probe(view, imp, rng, *count),
        DistinguisherSpec::FCollision { q_f } => {
            let mut mem = AdversaryMemory::new(view);
            let mut seen: Vec<(BitStr, BitStr)> = Vec::new();
            let mut collision = None;
            let mut drawn = BTreeSet::new();
            for _ in 0..*q_f {
                let m = fresh_message(rng, n, &mut drawn);
                let y = mem.construction(m)?;
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
            let ga = emulated_g(&mut mem, imp, a)?;
            let gb = emulated_g(&mut mem, imp, b)?;
            Ok(u8::from(ga == gb))
        }
        DistinguisherSpec::RandomProbe { q } => {
            let mut acc = 0u64;
            for _ in 0..*q {
                match rng.next_below(3) {
                    0 => {
                        let w = BitStr::masked(rng.next_u64(), n);
                        acc = absorb(acc, view.envelope(w)?.bits() as u64);
                    }
                    1 => {
                        let m = BitStr::masked(rng.next_u64(), n);
                        for b in view.batch(m)? {
                            acc = absorb(acc, b.bits() as u64);
                        }
                    }
                    _ => {
                        let m = BitStr::masked(rng.next_u64(), n);
                        acc = absorb(acc, view.construction(m)?.bits() as u64);
                    }
                }
            }
            Ok((acc & 1) as u8)
        }
    }
}

/// The consistency game: for each message, compare the construction answer
/// with the implementation's envelope output recomputed from the
/// adversary's own transcript.
fn consistency_probe(
    view: &mut dyn ExorView,
    imp: &Implementation,
    rng: &mut SplitRng,
    count: u32,
) -> Result<u8> {
    let n = view.params().n;
    let mut mem = AdversaryMemory::new(view);
    let mut drawn = BTreeSet::new();
    let mut ok = true;
    for _ in 0..count {
        let m = fresh_message(rng, n, &mut drawn);
        // oracle first, then the batch, per the query convention
        let answer = mem.construction(m)?;
        let g = emulated_g(&mut mem, imp, m)?;
        let local = imp.evaluate(&mut mem, Point::new(0, g))?.value;
        ok &= local == answer;
    }
    Ok(u8::from(ok))
}

/// Run one seeded trial of the named world.
pub fn run_exor_game(
    world: ExorWorld,
    spec: &ExorGameSpec,
    master_seed: u64,
    trial: u64,
) -> Result<ExorGameResult> {
    let trial_key = derive(master_seed, &[TRIAL_TAG, trial]);
    let mut tape = FunctionTable::new(trial_key, TAPE_ID, spec.n, spec.l, spec.n)?;
    let (imp, _advice) = run_first_stage(&spec.subverter, &mut tape)?;
    // masks are sampled after the implementation is fixed
    let mut iv_rng = SplitRng::from_path(trial_key, &[IV_TAG]);
    let params = ExorParams::sample(spec.n, spec.l, &mut iv_rng)?;
    let mut state = GameState::new(world, imp.clone(), params, tape, spec.q2_budget);
    let mut adv_rng = SplitRng::from_path(trial_key, &[ADV_TAG]);
    let output = drive_exor_adversary(&mut state, &spec.adversary, &imp, &mut adv_rng)?;
    state.finish(output, spec.record_transcript)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subversion::SubverterKind;

    fn spec(adversary: DistinguisherSpec, kind: SubverterKind) -> ExorGameSpec {
        ExorGameSpec::new(8, 4, SubverterSpec::new(kind, 0), adversary)
    }

    #[test]
    fn real_equals_g0_per_seed_any_adversary() {
        for adversary in [
            DistinguisherSpec::ConsistencyMulti { count: 3 },
            DistinguisherSpec::RandomProbe { q: 8 },
            DistinguisherSpec::FCollision { q_f: 6 },
        ] {
            let s = spec(adversary, SubverterKind::OutputPredicate { zero_bits: 2 });
            for trial in 0..40 {
                let a = run_exor_game(ExorWorld::Real, &s, 900, trial).unwrap();
                let b = run_exor_game(ExorWorld::G0, &s, 900, trial).unwrap();
                assert_eq!(a.output_bit, b.output_bit);
                assert_eq!(a.view_digest, b.view_digest);
            }
        }
    }

    #[test]
    fn g0_equals_g1_per_seed_any_adversary() {
        for adversary in [
            DistinguisherSpec::ConsistencyMulti { count: 3 },
            DistinguisherSpec::RandomProbe { q: 8 },
        ] {
            let s = spec(adversary, SubverterKind::OutputPredicate { zero_bits: 2 });
            for trial in 0..40 {
                let a = run_exor_game(ExorWorld::G0, &s, 901, trial).unwrap();
                let b = run_exor_game(ExorWorld::G1, &s, 901, trial).unwrap();
                assert_eq!(a.output_bit, b.output_bit);
                assert_eq!(a.view_digest, b.view_digest);
            }
        }
    }

    #[test]
    fn g2_equals_ideal_per_seed_any_adversary() {
        for adversary in [
            DistinguisherSpec::ConsistencyMulti { count: 3 },
            DistinguisherSpec::RandomProbe { q: 8 },
            DistinguisherSpec::FCollision { q_f: 8 },
        ] {
            let s = spec(adversary, SubverterKind::OutputPredicate { zero_bits: 2 });
            for trial in 0..40 {
                let a = run_exor_game(ExorWorld::G2, &s, 902, trial).unwrap();
                let b = run_exor_game(ExorWorld::Ideal, &s, 902, trial).unwrap();
                assert_eq!(a.output_bit, b.output_bit, "trial {trial}");
                assert_eq!(a.view_digest, b.view_digest, "trial {trial}");
                assert_eq!(a.bad_preset, b.bad_preset, "trial {trial}");
                assert_eq!(a.bad_crooked, b.bad_crooked, "trial {trial}");
            }
        }
    }

    #[test]
    fn g1_g2_identical_when_flags_clear() {
        let s = spec(
            DistinguisherSpec::ConsistencyMulti { count: 4 },
            SubverterKind::OutputPredicate { zero_bits: 3 },
        );
        let mut diverged = 0;
        for trial in 0..200 {
            let a = run_exor_game(ExorWorld::G1, &s, 903, trial).unwrap();
            let b = run_exor_game(ExorWorld::G2, &s, 903, trial).unwrap();
            assert_eq!(a.bad(), b.bad(), "flags must agree per seed");
            if !a.bad() {
                assert_eq!(a.output_bit, b.output_bit);
                assert_eq!(a.view_digest, b.view_digest);
            } else if a.output_bit != b.output_bit {
                diverged += 1;
            }
        }
        assert!(diverged > 0, "the subverter should force some divergence");
    }

    #[test]
    fn real_world_consistency_rows_always_hold() {
        let s = spec(
            DistinguisherSpec::ConsistencyMulti { count: 4 },
            SubverterKind::OutputPredicate { zero_bits: 2 },
        );
        for trial in 0..30 {
            let r = run_exor_game(ExorWorld::Real, &s, 904, trial).unwrap();
            assert_eq!(r.output_bit, 1, "real-world consistency cannot fail");
            for row in &r.rows {
                assert_eq!(row.construction_value, row.envelope_view);
            }
        }
    }

    #[test]
    fn ideal_rows_consistent_when_no_flags() {
        let s = spec(
            DistinguisherSpec::ConsistencyMulti { count: 6 },
            SubverterKind::OutputPredicate { zero_bits: 3 },
        );
        for trial in 0..60 {
            let r = run_exor_game(ExorWorld::Ideal, &s, 905, trial).unwrap();
            for row in &r.rows {
                if !row.bad_preset && !row.bad_crooked {
                    assert!(row.consistent, "clean row inconsistent at trial {trial}");
                }
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut s = spec(
            DistinguisherSpec::RandomProbe { q: 50 },
            SubverterKind::Honest,
        );
        s.q2_budget = 5;
        assert!(matches!(
            run_exor_game(ExorWorld::Real, &s, 906, 0),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn chain_holds_with_advice_in_play() {
        // small domain + a fat first stage, so batches regularly cross
        // advice points
        let s = ExorGameSpec::new(
            6,
            2,
            SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 2 }, 8),
            DistinguisherSpec::ConsistencyMulti { count: 4 },
        );
        for trial in 0..100 {
            let real = run_exor_game(ExorWorld::Real, &s, 909, trial).unwrap();
            let g0 = run_exor_game(ExorWorld::G0, &s, 909, trial).unwrap();
            let g1 = run_exor_game(ExorWorld::G1, &s, 909, trial).unwrap();
            let g2 = run_exor_game(ExorWorld::G2, &s, 909, trial).unwrap();
            let ideal = run_exor_game(ExorWorld::Ideal, &s, 909, trial).unwrap();
            assert_eq!(real.view_digest, g0.view_digest);
            assert_eq!(g0.view_digest, g1.view_digest);
            assert_eq!(g2.view_digest, ideal.view_digest);
            assert_eq!(g1.bad(), g2.bad());
            if !g1.bad() {
                assert_eq!(g1.view_digest, g2.view_digest);
            }
        }
    }

    #[test]
    fn transcript_recorded_on_request() {
        let s = spec(
            DistinguisherSpec::ConsistencySingle,
            SubverterKind::Honest,
        );
        let bare = run_exor_game(ExorWorld::Ideal, &s, 908, 0).unwrap();
        assert!(bare.transcript.is_none());
        let with = run_exor_game(ExorWorld::Ideal, &s.clone().with_transcript(), 908, 0).unwrap();
        let t = with.transcript.unwrap();
        assert!(!t.is_empty());
        // every batched envelope binding shows up in the audit list
        for row in &with.rows {
            if !row.bad_preset {
                assert_eq!(t.get(&Point::new(0, row.g_tilde)), Some(row.oracle_value));
            }
        }
    }

    #[test]
    fn results_are_reproducible() {
        let s = spec(
            DistinguisherSpec::RandomProbe { q: 10 },
            SubverterKind::Trigger {
                offset: BitStr::new(0x35, 8).unwrap(),
                zero_bits: 3,
            },
        );
        let a = run_exor_game(ExorWorld::Ideal, &s, 907, 11).unwrap();
        let b = run_exor_game(ExorWorld::Ideal, &s, 907, 11).unwrap();
        assert_eq!(a.view_digest, b.view_digest);
        assert_eq!(a.output_bit, b.output_bit);
        assert_eq!(a.rows.len(), b.rows.len());
    }
}
