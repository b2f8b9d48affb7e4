//! Exact and Monte-Carlo evaluators for the quantities the security
//! arguments are built from: the problematic-point indicator `d`, the
//! resampled-query averages `D^j`, the epsilon ladder, robust points and
//! functions, critical sets, resampling sets, the closed-form theorem
//! bounds, and the rejection-resampling inequality.

mod classify;

pub use classify::{
    check_resampling_consequences, DomainScan, MessageMode, PointClassification,
    ResamplingConsequences,
};

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, PeekService, Point};
use crate::rng::SplitRng;
use crate::stats::{mean_ci95, wilson95};
use crate::subversion::{run_first_stage, Implementation, SubverterSpec};

/// The derived tolerance chain: `eps1 = eps + q1/2^n`,
/// `eps2 = 3 tau eps1^{1/4}`, `p1 = eps2^{1/2} + 2^-n`. Values are clamped
/// to `[0,1]`; `vacuous` records that some stage exceeded one, in which
/// case bounds built on the ladder say nothing.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonLadder {
    pub eps: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub p1: f64,
    pub vacuous: bool,
}

impl EpsilonLadder {
    pub fn new(eps: f64, q1: u32, n: u8, tau: u16) -> Self {
        let mut vacuous = false;
        let mut clamp = |v: f64| {
            if v > 1.0 {
                vacuous = true;
                1.0
            } else {
                v
            }
        };
        let eps = clamp(eps);
        let eps1 = clamp(eps + q1 as f64 / 2f64.powi(n as i32));
        let eps2 = clamp(3.0 * tau as f64 * eps1.powf(0.25));
        let p1 = clamp(eps2.sqrt() + 2f64.powi(-(n as i32)));
        EpsilonLadder {
            eps,
            eps1,
            eps2,
            p1,
            vacuous,
        }
    }

    /// Threshold for a point to stay robust under resampling.
    pub fn robust_threshold(&self) -> f64 {
        self.eps1.sqrt()
    }

    /// Cap on how many points may query a good point.
    pub fn querier_cap(&self) -> f64 {
        if self.eps1 == 0.0 {
            f64::INFINITY
        } else {
            self.eps1.powf(-0.25)
        }
    }
}

/// Problematic-point indicator: the implementation deviates at `p`, or `p`
/// lies in the advice domain.
pub fn d_indicator(imp: &Implementation, table: &FunctionTable, p: Point) -> Result<bool> {
    if imp.advice().contains(&p) {
        return Ok(true);
    }
    Ok(imp.evaluate(&mut PeekService(table), p)?.subverted)
}

#[derive(Clone, Copy, Debug)]
pub enum DjMode {
    Exact,
    Sample(u32),
}

#[derive(Clone, Copy, Debug)]
pub struct DjEstimate {
    pub value: f64,
    /// Wilson 95% interval in sample mode.
    pub interval: Option<(f64, f64)>,
}

/// Average of `d` over resampling the output of the `j`-th query made by
/// the implementation at `p` (`j` is 1-based). Advice points are
/// problematic under every resampling, so their value is 1.
pub fn dj_value(
    imp: &Implementation,
    table: &FunctionTable,
    p: Point,
    j: u16,
    mode: DjMode,
) -> Result<DjEstimate> {
    if imp.advice().contains(&p) {
        return Ok(DjEstimate {
            value: 1.0,
            interval: None,
        });
    }
    let rec = imp.evaluate(&mut PeekService(table), p)?;
    if j == 0 || j as usize > rec.query_log.len() {
        return Err(Error::Domain(format!(
            "query position {j} outside the implementation's {} queries",
            rec.query_log.len()
        )));
    }
    let target = rec.query_log[j as usize - 1].0;
    let n_out = table.n_out();
    match mode {
        DjMode::Exact => {
            if table.n_in() > 12 {
                return Err(Error::Size("exact D^j enumeration requires n <= 12".into()));
            }
            let mut hits = 0u32;
            for beta in BitStr::enumerate(n_out) {
                let resampled = table.resample(target, beta)?;
                if d_indicator(imp, &resampled, p)? {
                    hits += 1;
                }
            }
            Ok(DjEstimate {
                value: hits as f64 / BitStr::domain_size(n_out) as f64,
                interval: None,
            })
        }
        DjMode::Sample(m) => {
            if m == 0 {
                return Err(Error::Domain("sample count must be positive".into()));
            }
            let mut rng = SplitRng::from_path(0xd6a, &[p.index as u64, p.x.bits() as u64, j as u64]);
            let mut hits = 0u64;
            for _ in 0..m {
                let beta = BitStr::masked(rng.next_u64(), n_out);
                let resampled = table.resample(target, beta)?;
                if d_indicator(imp, &resampled, p)? {
                    hits += 1;
                }
            }
            Ok(DjEstimate {
                value: hits as f64 / m as f64,
                interval: Some(wilson95(hits, m as u64)),
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lemma1Config {
    pub n: u8,
    pub l: u16,
    pub subverter: SubverterSpec,
    pub tables: u32,
    /// Points sampled per table; the inner beta average stays exact.
    pub alphas_per_table: u32,
    pub tolerance: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Lemma1Row {
    pub j: u16,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Estimate `Ex_{alpha,h}[D^j]` over fresh tables conditioned on a fixed
/// advice string, one row per query position, each checked against
/// `eps + q1 2^-n` plus the configured tolerance.
pub fn check_lemma1(cfg: &Lemma1Config) -> Result<Vec<Lemma1Row>> {
    let mut reference = FunctionTable::new(cfg.seed, 0, cfg.n, cfg.l, cfg.n)?;
    let (imp, advice) = run_first_stage(&cfg.subverter, &mut reference)?;
    let bindings: Vec<(Point, BitStr)> = advice.iter().map(|e| (e.point, e.value)).collect();
    let tau = imp.effective_tau();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); tau as usize];
    let mut point_rng = SplitRng::from_path(cfg.seed, &[0x616c]);
    for t in 0..cfg.tables {
        let table = FunctionTable::new(cfg.seed, t as u64 + 1, cfg.n, cfg.l, cfg.n)?
            .with_bindings(bindings.iter().copied())?;
        for _ in 0..cfg.alphas_per_table {
            let p = Point::new(
                point_rng.next_below(cfg.l as u64 + 1) as u16,
                BitStr::masked(point_rng.next_u64(), cfg.n),
            );
            for j in 1..=tau {
                let value = if imp.advice().contains(&p) {
                    1.0
                } else {
                    let rec = imp.evaluate(&mut PeekService(&table), p)?;
                    if (j as usize) > rec.query_log.len() {
                        continue;
                    }
                    dj_value(&imp, &table, p, j, DjMode::Exact)?.value
                };
                samples[j as usize - 1].push(value);
            }
        }
    }
    let bound = imp.nominal_rate() + cfg.subverter.q1 as f64 / 2f64.powi(cfg.n as i32);
    Ok(samples
        .iter()
        .enumerate()
        .map(|(idx, vals)| {
            let (estimate, ci_low, ci_high) = mean_ci95(vals);
            Lemma1Row {
                j: idx as u16 + 1,
                estimate,
                ci_low,
                ci_high,
                bound,
                pass: ci_high <= bound + cfg.tolerance,
            }
        })
        .collect())
}

/// Empirical tail mass and the Markov bound `mean/a`.
pub fn markov_tail(values: &[f64], a: f64) -> Result<(f64, f64)> {
    if a <= 0.0 {
        return Err(Error::Domain("Markov threshold must be positive".into()));
    }
    if values.iter().any(|v| *v < 0.0) {
        return Err(Error::Domain("Markov inequality needs nonnegative values".into()));
    }
    if values.is_empty() {
        return Ok((0.0, 0.0));
    }
    let n = values.len() as f64;
    let tail = values.iter().filter(|v| **v >= a).count() as f64 / n;
    let mean = values.iter().sum::<f64>() / n;
    Ok((tail, mean / a))
}

#[derive(Clone, Copy, Debug)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ExorBoundParams {
    pub eps: f64,
    pub q1: f64,
    pub q2: f64,
    pub tau: f64,
    pub n: u8,
}

/// Closed-form advantage bound for the enveloped-XOR construction:
/// `2 eps q2 + 2 q2 (q1+q2)/2^n + (3 tau (eps + q1/2^n))^{1/8} + 2^-n`.
pub fn exor_theorem_bound(p: &ExorBoundParams) -> BoundValue {
    let pow_n = 2f64.powi(p.n as i32);
    let value = 2.0 * p.eps * p.q2
        + 2.0 * p.q2 * (p.q1 + p.q2) / pow_n
        + (3.0 * p.tau * (p.eps + p.q1 / pow_n)).powf(0.125)
        + 1.0 / pow_n;
    BoundValue {
        value,
        vacuous: value >= 1.0,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpongeBoundParams {
    pub eps: f64,
    /// Total simulator query count entering the quadratic term.
    pub q: f64,
    pub tau: f64,
    pub q2: f64,
    /// Combined message-plus-digest length; the caller picks the reading
    /// (blocks or bits) and should report which.
    pub ell_plus_s: f64,
    /// First-stage query count.
    pub kappa: f64,
    pub rate: u8,
    pub cap: u8,
}

/// Closed-form advantage bound for the randomized sponge:
/// `(q^2 tau^2 + q2 (l+s) kappa)/2^c + 2^r eps q2 (l+s)`.
pub fn sponge_theorem_bound(p: &SpongeBoundParams) -> BoundValue {
    let value = (p.q * p.q * p.tau * p.tau + p.q2 * p.ell_plus_s * p.kappa)
        / 2f64.powi(p.cap as i32)
        + 2f64.powi(p.rate as i32) * p.eps * p.q2 * p.ell_plus_s;
    BoundValue {
        value,
        vacuous: value >= 1.0,
    }
}

/// Bound on the sponge bad-event probability alone:
/// `q2 (l+s) eps 2^r + q2 (l+s) kappa / 2^c`.
pub fn sponge_bad_event_bound(p: &SpongeBoundParams) -> BoundValue {
    let value = p.q2 * p.ell_plus_s * p.eps * 2f64.powi(p.rate as i32)
        + p.q2 * p.ell_plus_s * p.kappa / 2f64.powi(p.cap as i32);
    BoundValue {
        value,
        vacuous: value >= 1.0,
    }
}

/// Exact rejection-resampling check over a small product space: `X` is
/// uniform on `Omega`, the selector picks a coordinate from `X`, `Z`
/// resamples that coordinate, and the inequality
/// `|S|/|Omega| <= sqrt(k Pr(Z in S))` must hold for every event `S`.
#[derive(Clone, Debug)]
pub struct RejectionCheck {
    pub ratio: f64,
    pub probability: f64,
    pub prob_num: u128,
    pub prob_den: u128,
    pub holds: bool,
}

pub fn check_rejection_resampling(
    sizes: &[u32],
    selector: &dyn Fn(&[u32]) -> usize,
    event: &dyn Fn(&[u32]) -> bool,
) -> Result<RejectionCheck> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Domain("coordinate spaces must be nonempty".into()));
    }
    let omega: u128 = sizes.iter().map(|&s| s as u128).product();
    if omega > 1 << 16 {
        return Err(Error::Size("rejection-resampling space exceeds 2^16".into()));
    }
    let k = sizes.len();
    let lcm = sizes.iter().fold(1u128, |acc, &s| {
        let s = s as u128;
        acc / gcd(acc, s) * s
    });

    let mut x = vec![0u32; k];
    let mut s_count: u128 = 0;
    let mut num: u128 = 0;
    loop {
        if event(&x) {
            s_count += 1;
        }
        let j = selector(&x);
        if j >= k {
            return Err(Error::Domain(format!(
                "selector returned coordinate {j} of {k}"
            )));
        }
        let weight = lcm / sizes[j] as u128;
        let mut z = x.clone();
        for v in 0..sizes[j] {
            z[j] = v;
            if event(&z) {
                num += weight;
            }
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == k {
                let den = omega * lcm;
                // (|S|/|Omega|)^2 <= k * num/den, cross-multiplied exactly:
                // s^2 * lcm <= k * num * omega
                let holds = s_count * s_count * lcm <= k as u128 * num * omega;
                return Ok(RejectionCheck {
                    ratio: s_count as f64 / omega as f64,
                    probability: num as f64 / den as f64,
                    prob_num: num,
                    prob_den: den,
                    holds,
                });
            }
            x[pos] += 1;
            if x[pos] < sizes[pos] {
                break;
            }
            x[pos] = 0;
            pos += 1;
        }
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
