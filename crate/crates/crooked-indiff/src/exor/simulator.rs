//! The crooked EXor simulator.
//!
//! Bookkeeping: a list `L` of all pairs the simulator knows, a sublist
//! `L^A` of pairs known to the distinguisher (both start as the advice
//! string), the oracle-response log `L^F`, and the batch log `L^g`.
//!
//! Envelope queries are answered honestly. A batch query for message `m`
//! runs the subverted implementation on every branch point, answering its
//! internal queries from `L` and extending `L` with all of them, while
//! `L^A` only gains the honest branch pairs. If the resulting envelope
//! point is already bound, the simulator flags `bad_preset` and aborts the
//! programming step (the trial keeps running so the flag rate stays
//! measurable); otherwise it binds the envelope point to the oracle value
//! `F(m)` and flags `bad_crooked` when the implementation deviates there.

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, Point, Provenance, QueryService, Transcript};
use crate::rng::SplitRng;
use crate::subversion::{run_first_stage, Implementation, SubverterSpec};

use super::{f_value, ExorParams};

/// What one batch query produced.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub message: BitStr,
    /// Honest branch values, the batch response the distinguisher sees.
    pub betas: Vec<BitStr>,
    /// Subverted branch outputs.
    pub branch_values: Vec<BitStr>,
    pub g_tilde: BitStr,
    /// Oracle value bound at the envelope; `None` when the step aborted.
    pub programmed: Option<BitStr>,
    pub bad_preset: bool,
    pub bad_crooked: bool,
    /// Some branch output differed from the honest value.
    pub branch_mismatch: bool,
}

pub struct ExorSimulator {
    imp: Implementation,
    params: ExorParams,
    tape: FunctionTable,
    pub list: Transcript,
    pub list_a: Transcript,
    pub batches: Vec<BatchOutcome>,
    pub oracle_log: Vec<(BitStr, BitStr)>,
    pub bad_preset: bool,
    pub bad_crooked: bool,
    pub aborted: bool,
    pub oracle_queries: u32,
    pub impl_calls: u32,
}

/// Answers implementation queries from the simulator's list, falling back
/// to the tape and recording every new pair in `L`.
struct ListService<'a> {
    list: &'a mut Transcript,
    tape: &'a FunctionTable,
    provenance: Provenance,
}

impl QueryService for ListService<'_> {
    fn fetch(&mut self, p: Point) -> Result<BitStr> {
        if let Some(v) = self.list.get(&p) {
            return Ok(v);
        }
        let v = self.tape.peek(p)?;
        self.list.insert(p, v, self.provenance)?;
        Ok(v)
    }
}

impl ExorSimulator {
    /// Both lists start as the advice string.
    pub fn new(imp: Implementation, params: ExorParams, tape: FunctionTable) -> Self {
        let mut list = Transcript::new();
        let mut list_a = Transcript::new();
        for e in imp.advice().iter() {
            list.insert(e.point, e.value, e.provenance).expect("advice is duplicate-free");
            list_a.insert(e.point, e.value, e.provenance).expect("advice is duplicate-free");
        }
        ExorSimulator {
            imp,
            params,
            tape,
            list,
            list_a,
            batches: Vec::new(),
            oracle_log: Vec::new(),
            bad_preset: false,
            bad_crooked: false,
            aborted: false,
            oracle_queries: 0,
            impl_calls: 0,
        }
    }

    pub fn params(&self) -> &ExorParams {
        &self.params
    }

    pub fn implementation(&self) -> &Implementation {
        &self.imp
    }

    pub fn tape(&self) -> &FunctionTable {
        &self.tape
    }

    /// Envelope (index-0) query, answered honestly from the list.
    pub fn envelope_query(&mut self, w: BitStr) -> Result<BitStr> {
        let p = Point::new(0, w);
        let v = match self.list.get(&p) {
            Some(v) => v,
            None => {
                let v = self.tape.peek(p)?;
                self.list.insert(p, v, Provenance::Distinguisher)?;
                v
            }
        };
        if !self.list_a.contains(&p) {
            self.list_a.insert(p, v, Provenance::Distinguisher)?;
        }
        Ok(v)
    }

    /// Find a previous batch for `m`, if any.
    pub fn cached_batch(&self, m: BitStr) -> Option<&BatchOutcome> {
        self.batches.iter().find(|b| b.message == m)
    }

    /// Batch query for a fresh message. Duplicates are a convention
    /// violation at this level; callers that tolerate sloppy adversaries
    /// answer them from `cached_batch` instead.
    pub fn batch_query(&mut self, m: BitStr) -> Result<BatchOutcome> {
        if self.cached_batch(m).is_some() {
            return Err(Error::Contract(format!("duplicate batch query for m={m}")));
        }
        let mut betas = Vec::with_capacity(self.params.l as usize);
        let mut branch_values = Vec::with_capacity(self.params.l as usize);
        let mut g = BitStr::zero(self.params.n);
        for j in 1..=self.params.l {
            let alpha = self.params.branch_point(j, m);
            let mut svc = ListService {
                list: &mut self.list,
                tape: &self.tape,
                provenance: Provenance::SimulatorInternal,
            };
            let rec = self.imp.evaluate(&mut svc, alpha)?;
            self.impl_calls += 1;
            let honest = match self.list.get(&alpha) {
                Some(v) => v,
                // the first query was rerouted to the advice string
                None => self.imp.advice().get(&alpha).expect("input bound by first-query rule"),
            };
            if !self.list_a.contains(&alpha) {
                self.list_a.insert(alpha, honest, Provenance::Distinguisher)?;
            }
            betas.push(honest);
            branch_values.push(rec.value);
            g = g ^ rec.value;
        }
        let branch_mismatch = betas
            .iter()
            .zip(branch_values.iter())
            .any(|(h, s)| h != s);

        let env = Point::new(0, g);
        let outcome = if self.list.contains(&env) {
            self.bad_preset = true;
            self.aborted = true;
            BatchOutcome {
                message: m,
                betas,
                branch_values,
                g_tilde: g,
                programmed: None,
                bad_preset: true,
                bad_crooked: false,
                branch_mismatch,
            }
        } else {
            let fm = f_value(&self.imp, &self.params, &self.tape, m)?;
            self.oracle_queries += 1;
            self.oracle_log.push((m, fm));
            self.list.insert(env, fm, Provenance::SimulatorInternal)?;
            self.list_a.insert(env, fm, Provenance::Distinguisher)?;
            let mut svc = ListService {
                list: &mut self.list,
                tape: &self.tape,
                provenance: Provenance::ImplementationInternal,
            };
            let env_view = self.imp.evaluate(&mut svc, env)?.value;
            self.impl_calls += 1;
            let bad_crooked = env_view != fm;
            if bad_crooked {
                self.bad_crooked = true;
            }
            BatchOutcome {
                message: m,
                betas,
                branch_values,
                g_tilde: g,
                programmed: Some(fm),
                bad_preset: false,
                bad_crooked,
                branch_mismatch,
            }
        };
        self.batches.push(outcome.clone());
        Ok(outcome)
    }

    /// `L^A` must stay a sublist of `L`.
    pub fn lists_consistent(&self) -> bool {
        self.list_a
            .iter()
            .all(|e| self.list.get(&e.point) == Some(e.value))
    }
}

/// Stage the multi-message scenario: a neighbour-wrapped implementation is
/// batch-queried on `m ^ 1^n` first; by the time `m` itself is batched,
/// every branch point of `m` must already be bound in `L`.
pub fn multi_message_prefix_check(
    spec: &SubverterSpec,
    n: u8,
    l: u16,
    master_seed: u64,
    trial: u64,
) -> Result<bool> {
    let trial_key = crate::rng::derive(master_seed, &[0x6d6d, trial]);
    let mut tape = FunctionTable::new(trial_key, 0x68, n, l, n)?;
    let (inner, _) = run_first_stage(spec, &mut tape)?;
    let imp = inner.wrap_neighbor();
    let mut rng = SplitRng::from_path(trial_key, &[0x6976]);
    let params = ExorParams::sample(n, l, &mut rng)?;
    let mut adv = SplitRng::from_path(trial_key, &[0x6164]);
    let m = BitStr::masked(adv.next_u64(), n);
    let mut sim = ExorSimulator::new(imp, params.clone(), tape);

    sim.batch_query(m ^ BitStr::all_ones(n))?;
    let all_prefixed = (1..=l).all(|j| sim.list.contains(&params.branch_point(j, m)));

    // the second batch still runs fine; its flags are not this check's concern
    if sim.cached_batch(m).is_none() {
        sim.batch_query(m)?;
    }
    Ok(all_prefixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::PeekService;
    use crate::subversion::SubverterKind;

    fn setup(seed: u64, n: u8, l: u16) -> (FunctionTable, ExorParams) {
        let tape = FunctionTable::new(seed, 0x68, n, l, n).unwrap();
        let mut rng = SplitRng::from_path(seed, &[0x6976]);
        let params = ExorParams::sample(n, l, &mut rng).unwrap();
        (tape, params)
    }

    #[test]
    fn repeat_envelope_queries_are_stable() {
        let (tape, params) = setup(1, 8, 2);
        let mut sim = ExorSimulator::new(Implementation::honest(), params, tape);
        let w = BitStr::new(0x42, 8).unwrap();
        let a = sim.envelope_query(w).unwrap();
        let b = sim.envelope_query(w).unwrap();
        assert_eq!(a, b);
        assert_eq!(sim.list.len(), 1);
    }

    #[test]
    fn fresh_envelope_queries_grow_the_list_by_one() {
        let (tape, params) = setup(2, 8, 2);
        let mut sim = ExorSimulator::new(Implementation::honest(), params, tape);
        for (i, x) in BitStr::enumerate(8).take(10).enumerate() {
            sim.envelope_query(x).unwrap();
            assert_eq!(sim.list.len(), i + 1);
        }
    }

    #[test]
    fn batch_then_envelope_returns_the_programmed_value() {
        let (tape, params) = setup(3, 8, 3);
        let mut sim = ExorSimulator::new(Implementation::honest(), params, tape);
        let m = BitStr::new(0x17, 8).unwrap();
        let out = sim.batch_query(m).unwrap();
        let fm = out.programmed.expect("honest batch cannot abort on a fresh list");
        assert!(!out.bad_preset && !out.bad_crooked && !out.branch_mismatch);
        assert_eq!(sim.envelope_query(out.g_tilde).unwrap(), fm);
        assert!(sim.lists_consistent());
    }

    #[test]
    fn forced_g_collision_aborts_with_bad_preset() {
        // hand-built table at n=4, l=1: bind the two branch points to the
        // same value so g~ collides across two messages
        let (tape, params) = setup(4, 4, 1);
        let m1 = BitStr::new(0x2, 4).unwrap();
        let m2 = BitStr::new(0xb, 4).unwrap();
        let v = BitStr::new(0x7, 4).unwrap();
        let tape = tape
            .with_bindings([
                (params.branch_point(1, m1), v),
                (params.branch_point(1, m2), v),
            ])
            .unwrap();
        let mut sim = ExorSimulator::new(Implementation::honest(), params, tape);
        let first = sim.batch_query(m1).unwrap();
        assert!(!first.bad_preset);
        let second = sim.batch_query(m2).unwrap();
        assert!(second.bad_preset);
        assert!(second.programmed.is_none());
        assert!(sim.aborted);
    }

    #[test]
    fn duplicate_batch_is_a_contract_error() {
        let (tape, params) = setup(5, 8, 2);
        let mut sim = ExorSimulator::new(Implementation::honest(), params, tape);
        let m = BitStr::new(0x31, 8).unwrap();
        sim.batch_query(m).unwrap();
        assert!(matches!(sim.batch_query(m), Err(Error::Contract(_))));
        assert!(sim.cached_batch(m).is_some());
    }

    #[test]
    fn list_growth_per_batch_is_bounded() {
        let (tape, params) = setup(6, 8, 4);
        let imp = Implementation::from_parts(
            SubverterKind::Trigger {
                offset: BitStr::new(0x0d, 8).unwrap(),
                zero_bits: 2,
            },
            Transcript::new(),
        );
        let tau = imp.effective_tau() as usize;
        let l = params.l as usize;
        let mut sim = ExorSimulator::new(imp, params, tape);
        let mut prev = sim.list.len();
        for m in BitStr::enumerate(8).take(12) {
            sim.batch_query(m).unwrap();
            let grown = sim.list.len() - prev;
            assert!(
                grown <= l * tau + 1 + tau,
                "list grew by {grown} in one batch"
            );
            prev = sim.list.len();
            assert!(sim.lists_consistent());
        }
    }

    #[test]
    fn neighbour_wrapped_prefixes_the_partner_message() {
        let spec = SubverterSpec::new(SubverterKind::Honest, 0);
        for trial in 0..50 {
            assert!(multi_message_prefix_check(&spec, 8, 8, 0xaa, trial).unwrap());
        }
    }

    #[test]
    fn simulated_values_match_plain_evaluation() {
        // the simulator answers with the same bits a pure evaluation sees
        let (tape, params) = setup(7, 8, 3);
        let imp = Implementation::from_parts(
            SubverterKind::OutputPredicate { zero_bits: 2 },
            Transcript::new(),
        );
        let mut sim = ExorSimulator::new(imp.clone(), params.clone(), tape.clone());
        for m in BitStr::enumerate(8).take(16) {
            let out = sim.batch_query(m).unwrap();
            let (g_pure, _) =
                super::super::g_r_eval_subverted(&imp, &mut PeekService(&tape), &params, m)
                    .unwrap();
            assert_eq!(out.g_tilde, g_pure);
        }
    }

    #[test]
    fn simulator_honesty_chi_square() {
        // non-programmed envelope answers are uniform across fresh trials
        let mut counts = [0u64; 16];
        let w = BitStr::new(0x9, 4).unwrap();
        for trial in 0..10_000u64 {
            let (tape, params) = setup(0x51u64.wrapping_add(trial), 4, 2);
            let mut sim = ExorSimulator::new(Implementation::honest(), params, tape);
            counts[sim.envelope_query(w).unwrap().bits() as usize] += 1;
        }
        let chi = crate::stats::chi_square_uniform(&counts);
        // df = 15, 0.999 quantile ~ 37.70
        assert!(chi < 37.70, "chi-square {chi} too large for uniform answers");
    }
}
