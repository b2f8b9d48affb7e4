//! The two-stage implementor model: first-stage advice collection, bounded
//! query subverted implementations with hardwired advice, crooked-fraction
//! measurement, and the sampling detection test.
//!
//! Built-in strategies:
//! - `Honest`: returns the oracle value unchanged.
//! - `OutputPredicate`: crooks a point when the top `k` bits of its honest
//!   value are zero (function-dependent crooked set).
//! - `InputPredicate`: crooks a point when the top `k` bits of the input
//!   are zero (deterministic crooked set, exactly `2^-k` per index).
//! - `Trigger`: makes a second query at a fixed offset of the input and
//!   crooks when that neighbour's value matches the predicate.
//! - `NeighborWrapped`: replays an inner implementation, then makes one
//!   extra query at `(i, x ^ 1^n)`; output unchanged.

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, PeekService, Point, Provenance, QueryService, Transcript};
use crate::rng::SplitRng;
use crate::stats::wilson95;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub enum SubverterKind {
    Honest,
    OutputPredicate { zero_bits: u8 },
    InputPredicate { zero_bits: u8 },
    Trigger { offset: BitStr, zero_bits: u8 },
    NeighborWrapped(Box<SubverterKind>),
    /// Honest-output probe whose second query hops to the next index
    /// (mod `modulus`) at a fixed offset. The strategies above never
    /// query outside their input's index, so cross-branch query
    /// dependencies need this kind to show up at all.
    CrossIndex { modulus: u16, offset: BitStr },
}

impl SubverterKind {
    /// Oracle queries one evaluation makes.
    pub fn query_count(&self) -> u16 {
        match self {
            SubverterKind::Honest
            | SubverterKind::OutputPredicate { .. }
            | SubverterKind::InputPredicate { .. } => 1,
            SubverterKind::Trigger { .. } | SubverterKind::CrossIndex { .. } => 2,
            SubverterKind::NeighborWrapped(inner) => inner.query_count() + 1,
        }
    }

    /// Probability that a uniformly random point is crooked (exact for the
    /// deterministic kinds, expectation over tables otherwise).
    pub fn nominal_rate(&self) -> f64 {
        match self {
            SubverterKind::Honest | SubverterKind::CrossIndex { .. } => 0.0,
            SubverterKind::OutputPredicate { zero_bits }
            | SubverterKind::InputPredicate { zero_bits }
            | SubverterKind::Trigger { zero_bits, .. } => 0.5f64.powi(*zero_bits as i32),
            SubverterKind::NeighborWrapped(inner) => inner.nominal_rate(),
        }
    }

    fn validate(&self, n: u8) -> Result<()> {
        match self {
            SubverterKind::Honest => Ok(()),
            SubverterKind::OutputPredicate { zero_bits }
            | SubverterKind::InputPredicate { zero_bits } => {
                if *zero_bits > n {
                    Err(Error::Domain(format!(
                        "predicate needs {zero_bits} bits but width is {n}"
                    )))
                } else {
                    Ok(())
                }
            }
            SubverterKind::Trigger { offset, zero_bits } => {
                if offset.width() != n {
                    return Err(Error::Domain("trigger offset width mismatch".into()));
                }
                if offset.bits() == 0 {
                    return Err(Error::Domain("trigger offset must be nonzero".into()));
                }
                if *zero_bits > n {
                    return Err(Error::Domain("trigger predicate too wide".into()));
                }
                Ok(())
            }
            SubverterKind::NeighborWrapped(inner) => inner.validate(n),
            SubverterKind::CrossIndex { modulus, offset } => {
                if *modulus == 0 {
                    return Err(Error::Domain("cross-index modulus must be positive".into()));
                }
                if offset.width() != n {
                    return Err(Error::Domain("cross-index offset width mismatch".into()));
                }
                Ok(())
            }
        }
    }
}

/// Declarative description of a subverter: strategy, query cap, first-stage
/// budget.
#[derive(Clone, Debug)]
pub struct SubverterSpec {
    pub kind: SubverterKind,
    pub tau: u16,
    pub q1: u32,
}

impl SubverterSpec {
    pub fn new(kind: SubverterKind, q1: u32) -> Self {
        let tau = kind.query_count();
        SubverterSpec { kind, tau, q1 }
    }

    pub fn validate(&self, n: u8) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::Domain("tau must be at least 1".into()));
        }
        if self.tau < self.kind.query_count() {
            return Err(Error::Domain(format!(
                "declared tau {} below the strategy's {} queries",
                self.tau,
                self.kind.query_count()
            )));
        }
        self.kind.validate(n)
    }
}

/// One evaluation of the subverted implementation: output value plus the
/// log of actual oracle queries (advice hits are answered internally and
/// never reach the oracle).
#[derive(Clone, Debug)]
pub struct EvaluationRecord {
    pub input: Point,
    pub value: BitStr,
    pub query_log: Vec<(Point, BitStr)>,
    pub subverted: bool,
    pub advice_hits: u32,
}

/// A fixed subverted implementation with its advice string hardwired.
/// Immutable after the first stage; cheap to share across trials.
#[derive(Clone, Debug)]
pub struct Implementation {
    kind: SubverterKind,
    tau: u16,
    advice: Arc<Transcript>,
}

/// Run the first stage: issue at most `q1` oracle queries and hardwire the
/// resulting transcript into the returned implementation.
pub fn run_first_stage(
    spec: &SubverterSpec,
    table: &mut FunctionTable,
) -> Result<(Implementation, Transcript)> {
    spec.validate(table.n_in())?;
    let mut advice = Transcript::new();
    let per_index = BitStr::domain_size(table.n_in()) as u64;
    let capacity = per_index * (table.index_max() as u64 + 1);
    if spec.q1 as u64 > capacity {
        return Err(Error::Budget(format!(
            "q1 {} exceeds domain size {capacity}",
            spec.q1
        )));
    }
    for t in 0..spec.q1 as u64 {
        // Deterministic sweep: one point per index, then wrap to the next x.
        let index = (t % (table.index_max() as u64 + 1)) as u16;
        let x = BitStr::masked(t / (table.index_max() as u64 + 1), table.n_in());
        let p = Point::new(index, x);
        let v = table.query(p)?;
        advice.insert(p, v, Provenance::FirstStage)?;
    }
    let imp = Implementation {
        kind: spec.kind.clone(),
        tau: spec.tau,
        advice: Arc::new(advice.clone()),
    };
    Ok((imp, advice))
}

impl Implementation {
    /// Honest implementation with empty advice.
    pub fn honest() -> Self {
        Implementation {
            kind: SubverterKind::Honest,
            tau: 1,
            advice: Arc::new(Transcript::new()),
        }
    }

    /// Build directly from a kind and an already-collected advice string.
    pub fn from_parts(kind: SubverterKind, advice: Transcript) -> Self {
        let tau = kind.query_count();
        Implementation {
            kind,
            tau,
            advice: Arc::new(advice),
        }
    }

    pub fn kind(&self) -> &SubverterKind {
        &self.kind
    }

    pub fn advice(&self) -> &Transcript {
        &self.advice
    }

    /// Query cap including the neighbour wrapper's extra query.
    pub fn effective_tau(&self) -> u16 {
        self.kind.query_count()
    }

    pub fn nominal_rate(&self) -> f64 {
        self.kind.nominal_rate()
    }

    /// Bound on the per-index crooked fraction that holds for every table
    /// this lab draws: exact for deterministic kinds, a five-sigma binomial
    /// envelope for function-dependent ones.
    pub fn declared_bound(&self, n: u8) -> f64 {
        let rate = self.nominal_rate();
        match &self.kind {
            SubverterKind::Honest | SubverterKind::InputPredicate { .. } => rate,
            _ => {
                let points = BitStr::domain_size(n) as f64;
                (rate + 5.0 * (rate * (1.0 - rate) / points).sqrt()).min(1.0)
            }
        }
    }

    /// Wrap with the extra-neighbour-query construction; values unchanged.
    pub fn wrap_neighbor(&self) -> Implementation {
        Implementation {
            kind: SubverterKind::NeighborWrapped(Box::new(self.kind.clone())),
            tau: self.tau + 1,
            advice: self.advice.clone(),
        }
    }

    /// Evaluate the implementation at `p`, answering its oracle queries from
    /// `svc`. The wrapper enforces the model conventions: the first oracle
    /// query is `p` itself, queries are distinct, advice points are answered
    /// from the hardwired transcript, and the query count stays within tau.
    pub fn evaluate(&self, svc: &mut dyn QueryService, p: Point) -> Result<EvaluationRecord> {
        let mut ctx = EvalCtx {
            svc,
            advice: &self.advice,
            cap: self.effective_tau(),
            log: Vec::new(),
            seen: BTreeMap::new(),
            advice_hits: 0,
        };
        let honest = ctx.ask(p)?;
        let value = run_kind(&self.kind, &mut ctx, p, honest)?;
        if let Some(first) = ctx.log.first() {
            if !self.advice.contains(&p) && first.0 != p {
                return Err(Error::Contract(format!(
                    "first query {:?} is not the input {:?}",
                    first.0, p
                )));
            }
        }
        Ok(EvaluationRecord {
            input: p,
            value,
            subverted: value != honest,
            query_log: ctx.log,
            advice_hits: ctx.advice_hits,
        })
    }

    /// Convenience: the output value at `p` against a read-only table.
    pub fn value_on(&self, table: &FunctionTable, p: Point) -> Result<BitStr> {
        Ok(self.evaluate(&mut PeekService(table), p)?.value)
    }
}

struct EvalCtx<'a> {
    svc: &'a mut dyn QueryService,
    advice: &'a Transcript,
    cap: u16,
    log: Vec<(Point, BitStr)>,
    seen: BTreeMap<Point, BitStr>,
    advice_hits: u32,
}

impl EvalCtx<'_> {
    fn ask(&mut self, p: Point) -> Result<BitStr> {
        if let Some(v) = self.advice.get(&p) {
            self.advice_hits += 1;
            return Ok(v);
        }
        if let Some(&v) = self.seen.get(&p) {
            return Ok(v);
        }
        if self.log.len() as u16 >= self.cap {
            return Err(Error::Contract(format!(
                "implementation exceeded its {} query cap",
                self.cap
            )));
        }
        let v = self.svc.fetch(p)?;
        self.log.push((p, v));
        self.seen.insert(p, v);
        Ok(v)
    }

    fn has_asked(&self, p: &Point) -> bool {
        self.seen.contains_key(p) || self.advice.contains(p)
    }
}

fn run_kind(kind: &SubverterKind, ctx: &mut EvalCtx, p: Point, honest: BitStr) -> Result<BitStr> {
    match kind {
        SubverterKind::Honest => Ok(honest),
        SubverterKind::OutputPredicate { zero_bits } => {
            if honest.top_bits_zero(*zero_bits) {
                Ok(honest.flip_low_bit())
            } else {
                Ok(honest)
            }
        }
        SubverterKind::InputPredicate { zero_bits } => {
            if p.x.top_bits_zero(*zero_bits) {
                Ok(honest.flip_low_bit())
            } else {
                Ok(honest)
            }
        }
        SubverterKind::Trigger { offset, zero_bits } => {
            let neighbour = ctx.ask(Point::new(p.index, p.x ^ *offset))?;
            if neighbour.top_bits_zero(*zero_bits) {
                Ok(honest.flip_low_bit())
            } else {
                Ok(honest)
            }
        }
        SubverterKind::NeighborWrapped(inner) => {
            let value = run_kind(inner, ctx, p, honest)?;
            let extra = Point::new(p.index, p.x ^ BitStr::all_ones(p.x.width()));
            if !ctx.has_asked(&extra) {
                ctx.ask(extra)?;
            }
            Ok(value)
        }
        SubverterKind::CrossIndex { modulus, offset } => {
            let hop = Point::new((p.index + 1) % *modulus, p.x ^ *offset);
            if hop != p {
                ctx.ask(hop)?;
            }
            Ok(honest)
        }
    }
}

/// How to measure a crooked fraction.
#[derive(Clone, Copy, Debug)]
pub enum FractionMode {
    Exhaustive,
    Sample(u32),
}

#[derive(Clone, Debug)]
pub struct FractionEstimate {
    pub fraction: f64,
    /// Wilson 95% interval in sample mode; absent when exhaustive.
    pub interval: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct FractionReport {
    pub per_index: Vec<FractionEstimate>,
}

impl FractionReport {
    pub fn max_fraction(&self) -> f64 {
        self.per_index
            .iter()
            .map(|e| e.fraction)
            .fold(0.0, f64::max)
    }
}

/// Fraction of inputs per index where the implementation deviates from the
/// table. Exhaustive mode enumerates all `2^n` inputs and requires n <= 12.
pub fn crooked_fraction(
    imp: &Implementation,
    table: &FunctionTable,
    mode: FractionMode,
) -> Result<FractionReport> {
    let n = table.n_in();
    let mut per_index = Vec::with_capacity(table.index_max() as usize + 1);
    match mode {
        FractionMode::Exhaustive => {
            if n > 12 {
                return Err(Error::Size(format!(
                    "exhaustive crooked fraction requires n <= 12, got {n}"
                )));
            }
            for index in 0..=table.index_max() {
                let mut crooked = 0u32;
                for x in BitStr::enumerate(n) {
                    let rec = imp.evaluate(&mut PeekService(table), Point::new(index, x))?;
                    if rec.subverted {
                        crooked += 1;
                    }
                }
                per_index.push(FractionEstimate {
                    fraction: crooked as f64 / BitStr::domain_size(n) as f64,
                    interval: None,
                });
            }
        }
        FractionMode::Sample(m) => {
            if m == 0 {
                return Err(Error::Domain("sample count must be positive".into()));
            }
            let mut rng = SplitRng::from_path(0x6672_6163, &[table.n_in() as u64]);
            for index in 0..=table.index_max() {
                let mut crooked = 0u64;
                for _ in 0..m {
                    let x = BitStr::masked(rng.next_u64(), n);
                    let rec = imp.evaluate(&mut PeekService(table), Point::new(index, x))?;
                    if rec.subverted {
                        crooked += 1;
                    }
                }
                per_index.push(FractionEstimate {
                    fraction: crooked as f64 / m as f64,
                    interval: Some(wilson95(crooked, m as u64)),
                });
            }
        }
    }
    Ok(FractionReport { per_index })
}

/// The sampling detection test: draw `t` uniform points per index and pass
/// only if the implementation agrees with the table on all of them.
pub fn detect(
    imp: &Implementation,
    table: &FunctionTable,
    t: u32,
    rng: &mut SplitRng,
) -> Result<bool> {
    if t == 0 {
        return Err(Error::Domain("detection sample count must be >= 1".into()));
    }
    for index in 0..=table.index_max() {
        for _ in 0..t {
            let x = BitStr::masked(rng.next_u64(), table.n_in());
            let rec = imp.evaluate(&mut PeekService(table), Point::new(index, x))?;
            if rec.subverted {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
