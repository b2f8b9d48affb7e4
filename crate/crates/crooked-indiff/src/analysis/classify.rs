//! Whole-domain classification for one (implementation, table) pair:
//! problematic points, resampling averages, robust points, good pairs,
//! robust functions, the critical set, indices of interest, and the
//! resampling set with its transcript-invariance consequences.
//!
//! A scan evaluates the implementation once on every domain point and
//! inverts the query relation, so `queried_by` lookups and the ladder's
//! measured crook rate are exact. Exhaustive by construction: capped at
//! `n <= 10`.

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::exor::{g_r_eval_subverted, ExorParams};
use crate::oracle::{FunctionTable, PeekService, Point};
use crate::subversion::{EvaluationRecord, Implementation};
use std::cell::RefCell;
use std::collections::BTreeMap;

use super::{d_indicator, dj_value, DjMode, EpsilonLadder};

/// Full classification of one point.
#[derive(Clone, Debug)]
pub struct PointClassification {
    pub d: bool,
    pub dj: Vec<f64>,
    pub robust: bool,
    pub queried_by: Vec<Point>,
    pub good_pair: bool,
}

pub struct DomainScan<'a> {
    imp: &'a Implementation,
    table: &'a FunctionTable,
    ladder: EpsilonLadder,
    measured: f64,
    records: BTreeMap<Point, EvaluationRecord>,
    queried_by: BTreeMap<Point, Vec<Point>>,
    dj_cache: RefCell<BTreeMap<Point, Vec<f64>>>,
    robust_cache: RefCell<BTreeMap<Point, bool>>,
}

/// How widely `in_critical_set` ranges over messages.
#[derive(Clone, Copy, Debug)]
pub enum MessageMode {
    AllMessages,
    Sample(u32),
}

impl<'a> DomainScan<'a> {
    /// Evaluate the implementation on the whole domain and invert the
    /// query relation. The measured crook rate (max per index) feeds the
    /// epsilon ladder.
    pub fn new(imp: &'a Implementation, table: &'a FunctionTable) -> Result<Self> {
        Self::build(imp, table, None)
    }

    /// Same scan, but the ladder is built from an externally supplied
    /// crook rate (used when one rate must be shared across many sampled
    /// tables, as in the robust-function rate checks).
    pub fn with_eps(imp: &'a Implementation, table: &'a FunctionTable, eps: f64) -> Result<Self> {
        Self::build(imp, table, Some(eps))
    }

    fn build(imp: &'a Implementation, table: &'a FunctionTable, eps: Option<f64>) -> Result<Self> {
        let n = table.n_in();
        if n > 10 {
            return Err(Error::Size("domain scans require n <= 10".into()));
        }
        let mut records = BTreeMap::new();
        let mut queried_by: BTreeMap<Point, Vec<Point>> = BTreeMap::new();
        let per_index = BitStr::domain_size(n) as f64;
        let mut max_fraction = 0.0f64;
        for index in 0..=table.index_max() {
            let mut crooked = 0u32;
            for x in BitStr::enumerate(n) {
                let p = Point::new(index, x);
                let rec = imp.evaluate(&mut PeekService(table), p)?;
                if rec.subverted {
                    crooked += 1;
                }
                for (q, _) in &rec.query_log {
                    queried_by.entry(*q).or_default().push(p);
                }
                records.insert(p, rec);
            }
            max_fraction = max_fraction.max(crooked as f64 / per_index);
        }
        let q1 = imp.advice().len() as u32;
        let ladder = EpsilonLadder::new(eps.unwrap_or(max_fraction), q1, n, imp.effective_tau());
        Ok(DomainScan {
            imp,
            table,
            ladder,
            measured: max_fraction,
            records,
            queried_by,
            dj_cache: RefCell::new(BTreeMap::new()),
            robust_cache: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn ladder(&self) -> EpsilonLadder {
        self.ladder
    }

    /// Max per-index crooked fraction seen on this table.
    pub fn measured_eps(&self) -> f64 {
        self.measured
    }

    pub fn record(&self, p: Point) -> Option<&EvaluationRecord> {
        self.records.get(&p)
    }

    /// Problematic-point indicator from the scan.
    pub fn d(&self, p: Point) -> bool {
        self.imp.advice().contains(&p)
            || self.records.get(&p).map(|r| r.subverted).unwrap_or(false)
    }

    /// Exact resampling averages for every query position of `p`.
    pub fn dj(&self, p: Point) -> Result<Vec<f64>> {
        if let Some(v) = self.dj_cache.borrow().get(&p) {
            return Ok(v.clone());
        }
        let positions = self
            .records
            .get(&p)
            .map(|r| r.query_log.len())
            .unwrap_or(0);
        let mut values = Vec::with_capacity(positions);
        for j in 1..=positions {
            values.push(dj_value(self.imp, self.table, p, j as u16, DjMode::Exact)?.value);
        }
        self.dj_cache.borrow_mut().insert(p, values.clone());
        Ok(values)
    }

    /// Unsubverted, and resampling any one query answer keeps the
    /// subversion probability within the ladder threshold.
    pub fn is_robust(&self, p: Point) -> Result<bool> {
        if let Some(&v) = self.robust_cache.borrow().get(&p) {
            return Ok(v);
        }
        let threshold = self.ladder.robust_threshold();
        let robust = !self.d(p) && self.dj(p)?.iter().all(|&v| v <= threshold);
        self.robust_cache.borrow_mut().insert(p, robust);
        Ok(robust)
    }

    /// Points whose evaluation queries `p`.
    pub fn queried_by(&self, p: Point) -> &[Point] {
        self.queried_by.get(&p).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// `(p, h)` is good when `p` is queried only by robust points, and by
    /// few enough of them.
    pub fn is_good_pair(&self, p: Point) -> Result<bool> {
        let queriers = self.queried_by(p);
        if queriers.len() as f64 > self.ladder.querier_cap() {
            return Ok(false);
        }
        for q in queriers {
            if !self.is_robust(*q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn classify(&self, p: Point) -> Result<PointClassification> {
        Ok(PointClassification {
            d: self.d(p),
            dj: self.dj(p)?,
            robust: self.is_robust(p)?,
            queried_by: self.queried_by(p).to_vec(),
            good_pair: self.is_good_pair(p)?,
        })
    }

    /// Fraction of domain points forming bad pairs.
    pub fn bad_fraction(&self) -> Result<f64> {
        let mut bad = 0u32;
        let mut total = 0u32;
        for index in 0..=self.table.index_max() {
            for x in BitStr::enumerate(self.table.n_in()) {
                total += 1;
                if !self.is_good_pair(Point::new(index, x))? {
                    bad += 1;
                }
            }
        }
        Ok(bad as f64 / total as f64)
    }

    /// A function is robust when its bad-pair fraction stays within
    /// `sqrt(eps2)`.
    pub fn is_robust_function(&self) -> Result<(bool, f64)> {
        let fraction = self.bad_fraction()?;
        Ok((fraction <= self.ladder.eps2.sqrt(), fraction))
    }

    /// Smallest branch index whose point forms a good pair and is not
    /// queried by any earlier branch point.
    pub fn index_of_interest(&self, params: &ExorParams, m: BitStr) -> Result<Option<u16>> {
        'candidates: for i in 1..=params.l {
            let alpha_i = params.branch_point(i, m);
            if !self.is_good_pair(alpha_i)? {
                continue;
            }
            for j in 1..i {
                let alpha_j = params.branch_point(j, m);
                let queries_it = self
                    .records
                    .get(&alpha_j)
                    .map(|r| r.query_log.iter().any(|(q, _)| *q == alpha_i))
                    .unwrap_or(false);
                if queries_it {
                    continue 'candidates;
                }
            }
            return Ok(Some(i));
        }
        Ok(None)
    }

    /// Critical-set membership: the function is robust and every message
    /// has an index of interest.
    pub fn in_critical_set(&self, params: &ExorParams, mode: MessageMode) -> Result<bool> {
        let (robust, _) = self.is_robust_function()?;
        if !robust {
            return Ok(false);
        }
        match mode {
            MessageMode::AllMessages => {
                if self.table.n_in() > 6 {
                    return Err(Error::Size(
                        "all-message critical-set checks require n <= 6".into(),
                    ));
                }
                for m in BitStr::enumerate(params.n) {
                    if self.index_of_interest(params, m)?.is_none() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            MessageMode::Sample(count) => {
                let mut rng = crate::rng::SplitRng::from_path(0x6d73, &[count as u64]);
                for _ in 0..count {
                    let m = BitStr::masked(rng.next_u64(), params.n);
                    if self.index_of_interest(params, m)?.is_none() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// The set of replacement values at the index of interest that keep
    /// every querier of the resampled point unsubverted.
    pub fn resampling_set(&self, params: &ExorParams, m: BitStr, i: u16) -> Result<Vec<BitStr>> {
        let alpha_i = params.branch_point(i, m);
        let queriers = self.queried_by(alpha_i).to_vec();
        let mut set = Vec::new();
        for beta in BitStr::enumerate(self.table.n_out()) {
            let resampled = self.table.resample(alpha_i, beta)?;
            let mut keeps_all = true;
            for q in &queriers {
                if d_indicator(self.imp, &resampled, *q)? {
                    keeps_all = false;
                    break;
                }
            }
            if keeps_all {
                set.push(beta);
            }
        }
        Ok(set)
    }
}

/// Everything the resampling proposition asserts for one `(m, i, beta)`
/// choice, checked exhaustively.
#[derive(Clone, Debug)]
pub struct ResamplingConsequences {
    pub identity_holds: bool,
    pub index_unchanged: bool,
    pub other_g_unchanged: bool,
    pub crooked_set_unchanged: bool,
}

/// For `beta` in the resampling set at the index of interest `i` of `m`:
/// the batch value transforms affinely (`g~ under h_beta = beta xor g~
/// under h xor h(alpha_i)`), the index of interest is unchanged, other
/// messages' batch values are unchanged, and the envelope crooked set is
/// unchanged at the probe messages.
pub fn check_resampling_consequences(
    imp: &Implementation,
    table: &FunctionTable,
    params: &ExorParams,
    m: BitStr,
    i: u16,
    beta: BitStr,
    probe_messages: &[BitStr],
) -> Result<ResamplingConsequences> {
    let alpha_i = params.branch_point(i, m);
    let h_alpha = table.peek(alpha_i)?;
    let resampled = table.resample(alpha_i, beta)?;

    let (g_before, _) = g_r_eval_subverted(imp, &mut PeekService(table), params, m)?;
    let (g_after, _) = g_r_eval_subverted(imp, &mut PeekService(&resampled), params, m)?;
    let identity_holds = g_after == beta ^ g_before ^ h_alpha;

    let scan_after = DomainScan::new(imp, &resampled)?;
    let index_unchanged = scan_after.index_of_interest(params, m)? == Some(i);

    let mut other_g_unchanged = true;
    let mut crooked_set_unchanged = true;
    for &probe in probe_messages {
        if probe == m {
            continue;
        }
        let (gb, _) = g_r_eval_subverted(imp, &mut PeekService(table), params, probe)?;
        let (ga, _) = g_r_eval_subverted(imp, &mut PeekService(&resampled), params, probe)?;
        other_g_unchanged &= gb == ga;
        let env = Point::new(0, gb);
        crooked_set_unchanged &=
            d_indicator(imp, table, env)? == d_indicator(imp, &resampled, env)?;
    }

    Ok(ResamplingConsequences {
        identity_holds,
        index_unchanged,
        other_g_unchanged,
        crooked_set_unchanged,
    })
}
