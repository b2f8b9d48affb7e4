//! Acceptance suite: one test per claim the lab is expected to uphold,
//! each printing a PASS line with the measured numbers (run with
//! `--nocapture` to see them). Tolerances are pinned here, not computed.

use crooked_indiff::adversary::DistinguisherSpec;
use crooked_indiff::analysis::{
    check_lemma1, check_rejection_resampling, check_resampling_consequences, exor_theorem_bound,
    sponge_bad_event_bound, sponge_theorem_bound, DomainScan, ExorBoundParams, Lemma1Config,
    MessageMode, SpongeBoundParams,
};
use crooked_indiff::bits::BitStr;
use crooked_indiff::exor::{
    multi_message_prefix_check, run_exor_game, ExorGameSpec, ExorParams, ExorWorld,
};
use crooked_indiff::harness::{estimate_exor_advantage, run_trials};
use crooked_indiff::oracle::FunctionTable;
use crooked_indiff::rng::{derive, SplitRng};
use crooked_indiff::sponge::{run_sponge_game, SpongeGameSpec, SpongeWorld};
use crooked_indiff::stats::wilson95;
use crooked_indiff::subversion::{detect, run_first_stage, SubverterKind, SubverterSpec};

const SEED: u64 = 0xacce97;

fn all_adversaries() -> [DistinguisherSpec; 4] {
    [
        DistinguisherSpec::ConsistencySingle,
        DistinguisherSpec::ConsistencyMulti { count: 3 },
        DistinguisherSpec::FCollision { q_f: 6 },
        DistinguisherSpec::RandomProbe { q: 8 },
    ]
}

/// Criterion 1: in the ideal EXor world with an honest handle, every
/// ledger row without a bad flag shows the distinguisher-visible envelope
/// value equal to the oracle value. 10^3 trials, n=8, l=8, 50 messages.
#[test]
fn c1_exor_ideal_world_consistency() {
    let spec = ExorGameSpec::new(
        8,
        8,
        SubverterSpec::new(SubverterKind::Honest, 0),
        DistinguisherSpec::ConsistencyMulti { count: 50 },
    );
    let results = run_trials(1000, 0, |t| run_exor_game(ExorWorld::Ideal, &spec, SEED, t))
        .expect("trials run");
    let mut rows = 0u64;
    let mut clean = 0u64;
    let mut consistent = 0u64;
    for r in &results {
        for row in &r.rows {
            rows += 1;
            if !row.bad_preset && !row.bad_crooked {
                clean += 1;
                consistent += u64::from(row.consistent);
            }
        }
    }
    assert!(rows >= 50_000);
    assert_eq!(
        consistent, clean,
        "criterion 1: {consistent}/{clean} clean rows consistent"
    );
    println!("ACCEPTANCE 1 ideal-world-consistency: PASS ({clean}/{clean} clean rows of {rows})");
}

/// Criterion 2: per-seed output equality along both game chains, all
/// adversary kinds, 10^3 trials per pair.
#[test]
fn c2_game_chain_exactness() {
    let trials_per_kind = 250u64; // x4 kinds = 10^3 per pair
    let mut checked = 0u64;
    for (ai, adversary) in all_adversaries().into_iter().enumerate() {
        let exor_spec = ExorGameSpec::new(
            8,
            8,
            SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 3 }, 0),
            adversary.clone(),
        );
        for (wa, wb) in [
            (ExorWorld::Real, ExorWorld::G0),
            (ExorWorld::G0, ExorWorld::G1),
            (ExorWorld::G2, ExorWorld::Ideal),
        ] {
            let equal = run_trials(trials_per_kind, 0, |t| {
                let trial = t + ai as u64 * trials_per_kind;
                let a = run_exor_game(wa, &exor_spec, SEED, trial)?;
                let b = run_exor_game(wb, &exor_spec, SEED, trial)?;
                Ok(a.output_bit == b.output_bit)
            })
            .expect("exor pairs run");
            let hits = equal.iter().filter(|e| **e).count() as u64;
            assert_eq!(
                hits, trials_per_kind,
                "criterion 2: {}={} under {} broke per-seed equality",
                wa.name(),
                wb.name(),
                adversary.name()
            );
            checked += hits;
        }
        let sponge_spec = SpongeGameSpec::new(
            4,
            6,
            8,
            4,
            SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 3 }, 0),
            adversary.clone(),
        );
        for (wa, wb) in [
            (SpongeWorld::Real, SpongeWorld::G0),
            (SpongeWorld::G0, SpongeWorld::G1a),
            (SpongeWorld::G1b, SpongeWorld::G2),
        ] {
            let equal = run_trials(trials_per_kind, 0, |t| {
                let trial = t + ai as u64 * trials_per_kind;
                let a = run_sponge_game(wa, &sponge_spec, SEED, trial)?;
                let b = run_sponge_game(wb, &sponge_spec, SEED, trial)?;
                Ok(a.output_bit == b.output_bit)
            })
            .expect("sponge pairs run");
            let hits = equal.iter().filter(|e| **e).count() as u64;
            assert_eq!(
                hits, trials_per_kind,
                "criterion 2: {}={} under {} broke per-seed equality",
                wa.name(),
                wb.name(),
                adversary.name()
            );
            checked += hits;
        }
    }
    println!("ACCEPTANCE 2 game-chain-exactness: PASS ({checked} per-seed equalities)");
}

/// Criterion 3: fundamental-lemma instance for EXor at n=8 with a
/// predicate subverter (k=4): |Pr[G1] - Pr[G2]| within the measured bad
/// rate plus twice the interval width, 10^4 trials.
#[test]
fn c3_fundamental_lemma_instance() {
    let spec = ExorGameSpec::new(
        8,
        8,
        SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 4 }, 0),
        DistinguisherSpec::ConsistencyMulti { count: 8 },
    );
    let est = estimate_exor_advantage(ExorWorld::G1, ExorWorld::G2, &spec, 10_000, SEED, 0)
        .expect("advantage estimated");
    let slack = 2.0 * (est.bad_wilson.1 - est.bad_wilson.0);
    assert!(
        est.advantage <= est.bad_rate + slack,
        "criterion 3: advantage {} above bad rate {} + slack {slack}",
        est.advantage,
        est.bad_rate
    );
    println!(
        "ACCEPTANCE 3 fundamental-lemma: PASS (advantage {:.4} <= bad {:.4} + {:.4})",
        est.advantage, est.bad_rate, slack
    );
}

/// Criterion 4: resampled-query averages stay within eps + q1/2^n (+0.02)
/// for every query position, for a one-query and a two-query subverter,
/// q1 in {0, 4}, >= 200 sampled tables with exact inner enumeration.
#[test]
fn c4_lemma1_bound() {
    let kinds: Vec<(SubverterKind, &str)> = vec![
        (SubverterKind::OutputPredicate { zero_bits: 3 }, "predicate"),
        (
            SubverterKind::Trigger {
                offset: BitStr::new(0x15, 6).unwrap(),
                zero_bits: 3,
            },
            "trigger",
        ),
    ];
    for (kind, label) in kinds {
        for q1 in [0u32, 4] {
            let rows = check_lemma1(&Lemma1Config {
                n: 6,
                l: 2,
                subverter: SubverterSpec::new(kind.clone(), q1),
                tables: 200,
                alphas_per_table: 16,
                tolerance: 0.02,
                seed: derive(SEED, &[4, q1 as u64]),
            })
            .expect("lemma1 estimated");
            for row in &rows {
                assert!(
                    row.pass,
                    "criterion 4: {label} q1={q1} j={} ci_high {} above {}",
                    row.j,
                    row.ci_high,
                    row.bound + 0.02
                );
            }
        }
    }
    println!("ACCEPTANCE 4 lemma1-bound: PASS (both kinds, q1 in {{0,4}}, every j)");
}

/// Criterion 5: with a neighbour-wrapped implementation, batching the
/// partner message first leaves every branch point of the second message
/// already bound. 100% over 10^3 trials.
#[test]
fn c5_multi_message_attack() {
    let spec = SubverterSpec::new(SubverterKind::Honest, 0);
    let results = run_trials(1000, 0, |t| {
        multi_message_prefix_check(&spec, 8, 8, SEED, t)
    })
    .expect("trials run");
    let hits = results.iter().filter(|p| **p).count();
    assert_eq!(hits, 1000, "criterion 5: {hits}/1000 trials fully prefixed");
    println!("ACCEPTANCE 5 multi-message-attack: PASS (1000/1000 batches pre-bound)");
}

/// Criterion 6: for every beta in the exhaustively computed resampling
/// set: the batch value transforms affinely, the index of interest is
/// unchanged, and the set is at least 2^n (1 - eps1^{1/4}) large.
/// >= 100 sampled (masks, table, message) triples with an index.
#[test]
fn c6_resampling_identity() {
    let n = 6u8;
    let l = 4u16;
    let spec = SubverterSpec::new(SubverterKind::OutputPredicate { zero_bits: 4 }, 0);
    let mut with_index = 0u64;
    let mut betas_checked = 0u64;
    let mut draw = 0u64;
    while with_index < 100 {
        let seed = derive(SEED, &[6, draw]);
        draw += 1;
        assert!(draw < 400, "criterion 6: not enough samples with an index");
        let mut table = FunctionTable::new(seed, 0, n, l, n).unwrap();
        let (imp, _) = run_first_stage(&spec, &mut table).unwrap();
        let mut rng = SplitRng::from_path(seed, &[0x6976]);
        let params = ExorParams::sample(n, l, &mut rng).unwrap();
        let m = BitStr::masked(rng.next_u64(), n);
        let scan = DomainScan::new(&imp, &table).unwrap();
        let Some(index) = scan.index_of_interest(&params, m).unwrap() else {
            continue;
        };
        with_index += 1;
        let set = scan.resampling_set(&params, m, index).unwrap();
        let floor = 64.0 * (1.0 - scan.ladder().eps1.powf(0.25));
        assert!(
            set.len() as f64 >= floor,
            "criterion 6: |S| = {} below floor {floor}",
            set.len()
        );
        let probes: Vec<BitStr> = (0..4).map(|_| BitStr::masked(rng.next_u64(), n)).collect();
        for beta in set {
            let c = check_resampling_consequences(&imp, &table, &params, m, index, beta, &probes)
                .unwrap();
            assert!(c.identity_holds, "criterion 6: identity fails at beta={beta}");
            assert!(c.index_unchanged, "criterion 6: index moves at beta={beta}");
            assert!(c.other_g_unchanged && c.crooked_set_unchanged);
            betas_checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 6 resampling-identity: PASS ({with_index} triples, {betas_checked} beta values)"
    );
}

/// Criterion 7: sponge bad-event rate at r=4, c=10, ell=8, s=4, kappa=0,
/// deterministic eps = 2^-8 subverter, 4 construction queries: the Wilson
/// upper bound stays within q2 (l+s) eps 2^r (+ 0 for kappa=0), which is
/// 0.75 < 1 under the block-count reading.
#[test]
fn c7_sponge_bad_bound() {
    let spec = SpongeGameSpec::new(
        4,
        10,
        8,
        4,
        SubverterSpec::new(SubverterKind::InputPredicate { zero_bits: 8 }, 0),
        DistinguisherSpec::ConsistencyMulti { count: 4 },
    );
    let results = run_trials(10_000, 0, |t| {
        run_sponge_game(SpongeWorld::G1a, &spec, SEED, t)
    })
    .expect("trials run");
    let bads = results.iter().filter(|r| r.bad).count() as u64;
    let (_, hi) = wilson95(bads, 10_000);
    let bound = sponge_bad_event_bound(&SpongeBoundParams {
        eps: 1.0 / 256.0,
        q: 12.0,
        tau: 1.0,
        q2: 4.0,
        ell_plus_s: 3.0, // block-count reading: 8/4 + 4/4
        kappa: 0.0,
        rate: 4,
        cap: 10,
    });
    assert!(!bound.vacuous, "criterion 7 requires a nonvacuous bound");
    assert!(
        hi <= bound.value,
        "criterion 7: bad CI upper {hi} above bound {}",
        bound.value
    );
    println!(
        "ACCEPTANCE 7 sponge-bad-bound: PASS (rate {:.4}, CI high {:.4} <= {})",
        bads as f64 / 10_000.0,
        hi,
        bound.value
    );
}

/// Criterion 8: detection pass rate matches (1-eps)^t within the Wilson
/// interval for t in {1, 10, 100} at the deterministic eps = 1/16
/// subverter, 10^4 trials each.
#[test]
fn c8_detection_curve() {
    let spec = SubverterSpec::new(SubverterKind::InputPredicate { zero_bits: 4 }, 0);
    for t in [1u32, 10, 100] {
        let passes = run_trials(10_000, 0, |trial| {
            let seed = derive(SEED, &[0x88, t as u64, trial]);
            let mut table = FunctionTable::new(seed, 0, 8, 0, 8)?;
            let (imp, _) = run_first_stage(&spec, &mut table)?;
            let mut rng = SplitRng::from_path(seed, &[0x7361]);
            detect(&imp, &table, t, &mut rng)
        })
        .expect("detection trials run");
        let hits = passes.iter().filter(|p| **p).count() as u64;
        let (lo, hi) = wilson95(hits, 10_000);
        let formula = (15.0f64 / 16.0).powi(t as i32);
        assert!(
            formula >= lo && formula <= hi,
            "criterion 8: t={t}: (15/16)^t = {formula} outside [{lo}, {hi}]"
        );
    }
    println!("ACCEPTANCE 8 detection-curve: PASS (t in {{1,10,100}} all within Wilson)");
}

/// Criterion 9: the rejection-resampling inequality holds with exact
/// arithmetic for 100 random selectors, every singleton event, and 200
/// random events, on a k=3 space with coordinate sizes <= 4.
#[test]
fn c9_rejection_resampling() {
    let sizes = [4u32, 4, 3];
    let omega: u32 = sizes.iter().product();
    let mut rng = SplitRng::from_path(SEED, &[9]);
    let index_of = |x: &[u32]| (x[0] * 12 + x[1] * 3 + x[2]) as usize;
    let mut cases = 0u64;
    for _ in 0..100 {
        let table: Vec<usize> = (0..omega).map(|_| rng.next_below(3) as usize).collect();
        let selector = |x: &[u32]| table[index_of(x)];
        for target in 0..omega as usize {
            let check =
                check_rejection_resampling(&sizes, &selector, &|x| index_of(x) == target).unwrap();
            assert!(check.holds, "criterion 9: singleton {target} violates the bound");
            cases += 1;
        }
        for _ in 0..200 {
            let mask: Vec<bool> = (0..omega).map(|_| rng.next_below(2) == 1).collect();
            let check =
                check_rejection_resampling(&sizes, &selector, &|x| mask[index_of(x)]).unwrap();
            assert!(check.holds, "criterion 9: random event violates the bound");
            cases += 1;
        }
    }
    println!("ACCEPTANCE 9 rejection-resampling: PASS ({cases} exact cases)");
}

/// Criterion 10: closed-form bound substitutions are exact, the bounds are
/// monotone in every parameter, and honest handles sit in the critical set
/// for 100/100 sampled (masks, table) pairs at n=6, l=8.
#[test]
fn c10_bounds_and_honest_critical_set() {
    // substitution cases
    let e = exor_theorem_bound(&ExorBoundParams {
        eps: 0.0,
        q1: 0.0,
        q2: 0.0,
        tau: 1.0,
        n: 8,
    });
    assert!((e.value - 1.0 / 256.0).abs() < 1e-12);
    let s = sponge_theorem_bound(&SpongeBoundParams {
        eps: 0.0,
        q: 10.0,
        tau: 2.0,
        q2: 3.0,
        ell_plus_s: 3.0,
        kappa: 0.0,
        rate: 4,
        cap: 10,
    });
    assert!((s.value - 400.0 / 1024.0).abs() < 1e-12);

    // monotonicity over random parameter pairs
    let mut rng = SplitRng::from_path(SEED, &[10]);
    for _ in 0..500 {
        let base = ExorBoundParams {
            eps: (rng.next_u64() % 50) as f64 / 1000.0,
            q1: (rng.next_u64() % 20) as f64,
            q2: (rng.next_u64() % 20) as f64,
            tau: 1.0 + (rng.next_u64() % 3) as f64,
            n: 8,
        };
        let mut bump = base;
        match rng.next_below(4) {
            0 => bump.eps += 0.005,
            1 => bump.q1 += 1.0,
            2 => bump.q2 += 1.0,
            _ => bump.tau += 1.0,
        }
        assert!(exor_theorem_bound(&bump).value >= exor_theorem_bound(&base).value);

        let sb = SpongeBoundParams {
            eps: base.eps,
            q: base.q2,
            tau: base.tau,
            q2: base.q2,
            ell_plus_s: 2.0 + (rng.next_u64() % 4) as f64,
            kappa: base.q1,
            rate: 4,
            cap: 10,
        };
        let mut sbump = sb;
        match rng.next_below(6) {
            0 => sbump.eps += 0.005,
            1 => sbump.q += 1.0,
            2 => sbump.tau += 1.0,
            3 => sbump.q2 += 1.0,
            4 => sbump.ell_plus_s += 1.0,
            _ => sbump.kappa += 1.0,
        }
        assert!(sponge_theorem_bound(&sbump).value >= sponge_theorem_bound(&sb).value);
    }

    // honest critical-set membership
    let spec = SubverterSpec::new(SubverterKind::Honest, 0);
    let members = run_trials(100, 0, |i| {
        let seed = derive(SEED, &[10, i]);
        let mut table = FunctionTable::new(seed, 0, 6, 8, 6)?;
        let (imp, _) = run_first_stage(&spec, &mut table)?;
        let mut rng = SplitRng::from_path(seed, &[0x6976]);
        let params = ExorParams::sample(6, 8, &mut rng)?;
        let scan = DomainScan::new(&imp, &table)?;
        scan.in_critical_set(&params, MessageMode::AllMessages)
    })
    .expect("critical-set trials run");
    let hits = members.iter().filter(|m| **m).count();
    assert_eq!(hits, 100, "criterion 10: {hits}/100 honest pairs in the critical set");
    println!("ACCEPTANCE 10 bounds-and-critical-set: PASS (substitutions, monotonicity, 100/100)");
}
