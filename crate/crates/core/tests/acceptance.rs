//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use ducci_core::dynamics::{linear_step, max_norm, run_classical, run_orbit, OrbitLimits, Outcome};
use ducci_core::harness::{
    gen_instance, instance_rng, run_sweep, GeneratorProfile, LimitsConfig, ProfileKind,
    SweepConfig, Verdict,
};
use ducci_core::linalg::{RationalMatrix, RationalVector};
use ducci_core::spectral::{
    analyze, classify_spectrum, eigenvalue_valuations, roots_of_unity_order, Claim, RootValuation,
    SpectrumClass, UnityOrder,
};
use ducci_core::{
    padic_abs, parse_rational, vp, DucciInstance, IterationMode, Prime, Rational, Valuation,
};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prime(n: u64) -> Prime {
    Prime::new(n).unwrap()
}

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

const PRIMES: [u64; 3] = [2, 3, 5];

/// diag(1/2, 1/2) over Q_2: exact norms, spectrum, and the 2^k growth law.
fn criterion_1() -> Check {
    let p = prime(2);
    let half = RationalMatrix::diagonal(&[q("1/2"), q("1/2")]);
    ensure(padic_abs(&q("1/2"), p) == q("2"), || "|1/2|_2 != 2".into())?;
    let vals = eigenvalue_valuations(&half, p);
    ensure(vals == vec![RootValuation::from_int(-1); 2], || {
        format!("eigenvalue valuations {vals:?}")
    })?;
    ensure(classify_spectrum(&vals) == SpectrumClass::Expansive, || {
        "spectrum not EXPANSIVE".into()
    })?;

    // oracle: x_k = (1/2)^k (1, 1), so max |x_k|_2 = 2^k
    let mut x = RationalVector::from_i64s(&[1, 1]);
    for k in 0..=60i64 {
        let expected = p.pow(k);
        let got = max_norm(&x, p);
        ensure(got == expected, || {
            format!("step {k}: max norm {got}, expected 2^{k}")
        })?;
        let direct = q("1/2").pow(k as i32);
        ensure(x.iter().all(|c| *c == direct), || {
            format!("step {k}: state {x}")
        })?;
        x = linear_step(&half, &x).unwrap();
    }

    let inst = DucciInstance::new(
        p,
        half.clone(),
        RationalVector::from_i64s(&[1, 1]),
        IterationMode::Linear,
    )
    .unwrap();
    let report = run_orbit(&inst, &OrbitLimits::defaults_for(p));
    ensure(report.outcome == Outcome::NormDiverged { step: 51 }, || {
        format!("orbit outcome {:?}", report.outcome)
    })?;
    let pred = analyze(&half, p, 64).prediction;
    ensure(pred.claim == Claim::UnboundedGrowth, || {
        format!("claim {:?}", pred.claim)
    })?;
    Ok("max |x_k|_2 = 2^k for k <= 60; NormDiverged at step 51".into())
}

/// Contractive entries, linear mode: valuation climbs by at least one per
/// step, passes 50 within 60 steps, and the harness confirms every instance.
fn criterion_2() -> Check {
    let profiles: Vec<GeneratorProfile> = PRIMES
        .iter()
        .flat_map(|&p| {
            (1..=4).map(move |n| {
                GeneratorProfile::new(ProfileKind::ContractiveEntries, n, prime(p), 10)
            })
        })
        .collect();
    let config = SweepConfig {
        profiles: profiles.clone(),
        instances_per_profile: 42,
        modes: vec![IterationMode::Linear],
        limits: LimitsConfig::default(),
        rng_seed: 20_240_601,
        max_order: 64,
        workers: None,
    };
    let total = profiles.len() * config.instances_per_profile;
    ensure(total >= 500, || format!("only {total} instances"))?;

    for (pi, profile) in profiles.iter().enumerate() {
        for ii in 0..config.instances_per_profile {
            let inst = gen_instance(
                profile,
                IterationMode::Linear,
                &mut instance_rng(config.rng_seed, pi, ii),
            );
            let p = inst.p();
            let mut x = inst.seed().clone();
            let mut prev = dynamics_min_val(&x, p);
            let mut passed_50 = false;
            for step in 1..=60 {
                x = linear_step(inst.matrix(), &x).unwrap();
                let v = dynamics_min_val(&x, p);
                ensure(v > prev, || {
                    format!("instance {pi}:{ii} step {step}: {v:?} <= {prev:?}")
                })?;
                prev = v;
                if v > Valuation::Finite(50) {
                    passed_50 = true;
                    break;
                }
            }
            ensure(passed_50, || {
                format!("instance {pi}:{ii}: min valuation {prev:?} after 60 steps")
            })?;
        }
    }

    let report = run_sweep(&config).map_err(|e| e.to_string())?;
    ensure(report.records.len() == total, || "record count".into())?;
    let confirmed = report.count(Verdict::Confirmed);
    ensure(confirmed == total, || {
        let bad = report
            .records
            .iter()
            .find(|r| r.record.verdict != Verdict::Confirmed)
            .unwrap();
        format!(
            "{confirmed}/{total} confirmed; first other: {:?}",
            bad.record
        )
    })?;
    Ok(format!(
        "{total} instances, strict climb past 50 within 60 steps, {confirmed} CONFIRMED"
    ))
}

fn dynamics_min_val(x: &RationalVector, p: Prime) -> Valuation {
    x.iter()
        .map(|c| vp(c, p))
        .min()
        .unwrap_or(Valuation::Infinite)
}

fn sorted_norms(x: &RationalVector, p: Prime) -> Vec<Rational> {
    let mut v: Vec<Rational> = x.iter().map(|c| padic_abs(c, p)).collect();
    v.sort();
    v
}

/// Checks a certified permutation-like orbit: pure cycle, period dividing
/// the order, never zero, norm multiset constant.
fn check_unit_orbit(inst: &DucciInstance, order: u64, label: &str) -> Result<(), String> {
    let p = inst.p();
    let report = run_orbit(inst, &OrbitLimits::defaults_for(p));
    let Outcome::Cycle { preperiod, period } = report.outcome else {
        return Err(format!("{label}: outcome {:?}", report.outcome));
    };
    ensure(order.is_multiple_of(period), || {
        format!("{label}: period {period} does not divide {order}")
    })?;
    ensure(preperiod == 0, || format!("{label}: preperiod {preperiod}"))?;
    let norms0 = sorted_norms(inst.seed(), p);
    let mut x = inst.seed().clone();
    for k in 0..=(preperiod + period) {
        ensure(!x.is_zero(), || format!("{label}: zero state at step {k}"))?;
        ensure(sorted_norms(&x, p) == norms0, || {
            format!("{label}: norm multiset changed at step {k}")
        })?;
        x = inst.step(&x).unwrap();
    }
    Ok(())
}

/// Roots-of-unity spectra: the 4-cycle shift and random permutations.
fn criterion_3() -> Check {
    let p = prime(5);
    let s = RationalMatrix::cyclic_shift(4);
    let unity = roots_of_unity_order(&s, 64);
    ensure(
        unity
            == Some(UnityOrder {
                order: 4,
                certified: true,
            }),
        || format!("shift order {unity:?}"),
    )?;
    let inst = DucciInstance::new(
        p,
        s,
        RationalVector::from_i64s(&[1, 2, 3, 4]),
        IterationMode::Linear,
    )
    .unwrap();
    check_unit_orbit(&inst, 4, "shift")?;

    for i in 0..100 {
        let n = 1 + i % 6;
        let profile = GeneratorProfile::new(ProfileKind::Permutation, n, p, 20);
        let inst = gen_instance(&profile, IterationMode::Linear, &mut instance_rng(3, 0, i));
        let analysis = analyze(inst.matrix(), p, 720);
        let Some(UnityOrder {
            order,
            certified: true,
        }) = analysis.unity
        else {
            return Err(format!("permutation {i}: unity {:?}", analysis.unity));
        };
        ensure(analysis.class == SpectrumClass::Unitary, || {
            format!("permutation {i}: class")
        })?;
        check_unit_orbit(&inst, order, &format!("permutation {i}"))?;
    }
    Ok(
        "shift: order 4 certified, period | 4; 100 permutations: pure cycles, constant norms"
            .into(),
    )
}

/// Closed-form oracle for norm-mode orbits of a diagonal matrix: each
/// component's valuation follows v -> -(v(d) + v). Returns the first
/// repetition among the first four states as (preperiod, period).
fn diagonal_norm_oracle(diag: &[Rational], seed: &RationalVector, p: Prime) -> (u64, u64) {
    let states: Vec<Vec<Option<i64>>> = {
        let mut v: Vec<Option<i64>> = seed.iter().map(|c| vp(c, p).finite()).collect();
        let mut out = vec![v.clone()];
        let a: Vec<Option<i64>> = diag.iter().map(|d| vp(d, p).finite()).collect();
        for _ in 0..3 {
            v = v
                .iter()
                .zip(&a)
                .map(|(vi, ai)| match (vi, ai) {
                    (Some(vi), Some(ai)) => Some(-(ai + vi)),
                    _ => None,
                })
                .collect();
            out.push(v.clone());
        }
        out
    };
    // step 0 entries are arbitrary rationals, later ones are powers of p;
    // compare at the state level
    let as_state = |k: usize, vals: &Vec<Option<i64>>| -> Vec<Rational> {
        if k == 0 {
            seed.entries().to_vec()
        } else {
            vals.iter()
                .map(|v| v.map_or_else(Rational::zero, |v| p.pow(v)))
                .collect()
        }
    };
    let concrete: Vec<Vec<Rational>> = states
        .iter()
        .enumerate()
        .map(|(k, v)| as_state(k, v))
        .collect();
    for j in 1..concrete.len() {
        for i in 0..j {
            if concrete[i] == concrete[j] {
                return (i as u64, (j - i) as u64);
            }
        }
    }
    unreachable!("valuation recurrence has period <= 2 after one step")
}

/// Norm mode on diagonal matrices: the diagonal law holds everywhere, and
/// contractive diagonals cycle instead of terminating.
fn criterion_4() -> Check {
    let profiles: Vec<GeneratorProfile> = PRIMES
        .iter()
        .flat_map(|&p| {
            (1..=4)
                .map(move |n| GeneratorProfile::new(ProfileKind::DiagonalRandom, n, prime(p), 12))
        })
        .collect();
    let config = SweepConfig {
        profiles: profiles.clone(),
        instances_per_profile: 84,
        modes: vec![IterationMode::Norm],
        limits: LimitsConfig::default(),
        rng_seed: 77,
        max_order: 64,
        workers: None,
    };
    let total = profiles.len() * config.instances_per_profile;
    ensure(total >= 1000, || format!("only {total} instances"))?;

    let mut contractive = 0usize;
    for (pi, profile) in profiles.iter().enumerate() {
        for ii in 0..config.instances_per_profile {
            let inst = gen_instance(
                profile,
                IterationMode::Norm,
                &mut instance_rng(config.rng_seed, pi, ii),
            );
            let p = inst.p();
            let diag = inst.matrix().diagonal_entries();
            ensure(diag.iter().all(|d| !d.is_zero()), || {
                "zero diagonal entry".into()
            })?;
            let report = run_orbit(&inst, &OrbitLimits::defaults_for(p));
            let Outcome::Cycle { preperiod, period } = report.outcome else {
                return Err(format!("{pi}:{ii}: outcome {:?}", report.outcome));
            };
            ensure(preperiod <= 1 && (period == 1 || period == 2), || {
                format!("{pi}:{ii}: preperiod {preperiod}, period {period}")
            })?;
            let oracle = diagonal_norm_oracle(&diag, inst.seed(), p);
            ensure(oracle == (preperiod, period), || {
                format!("{pi}:{ii}: oracle {oracle:?} vs observed ({preperiod}, {period})")
            })?;
            if diag.iter().all(|d| vp(d, p) >= Valuation::Finite(1)) {
                contractive += 1;
            }
        }
    }

    let report = run_sweep(&config).map_err(|e| e.to_string())?;
    let mut refuted = 0usize;
    for r in &report.records {
        ensure(r.record.norm_law == Some(Verdict::Confirmed), || {
            format!(
                "{}: diagonal law verdict {:?}",
                r.record.instance_id, r.record.norm_law
            )
        })?;
        if r.class == SpectrumClass::Contractive {
            ensure(r.record.prediction.claim == Claim::Terminates, || {
                "claim".into()
            })?;
            ensure(r.record.verdict == Verdict::Refuted, || {
                format!("{}: verdict {:?}", r.record.instance_id, r.record.verdict)
            })?;
            refuted += 1;
        }
    }
    ensure(refuted == contractive, || {
        format!("{refuted} refuted vs {contractive} contractive")
    })?;
    ensure(contractive >= 20, || {
        format!("only {contractive} contractive diagonals sampled")
    })?;
    Ok(format!(
        "{total} diagonal orbits obey preperiod <= 1, period in {{1,2}}; {refuted} contractive ones REFUTED"
    ))
}

/// Classical map: every seed in {0..15}^4 reaches zero within 1000 steps.
fn criterion_5() -> Check {
    let mut worst = 0u64;
    let mut count = 0usize;
    for a in 0..16u64 {
        for b in 0..16 {
            for c in 0..16 {
                for d in 0..16 {
                    let orbit = std::panic::catch_unwind(|| run_classical([a, b, c, d], 1000))
                        .map_err(|_| format!("panic on ({a},{b},{c},{d})"))?;
                    let Outcome::Terminated { step } = orbit.outcome else {
                        return Err(format!("({a},{b},{c},{d}): {:?}", orbit.outcome));
                    };
                    worst = worst.max(step);
                    count += 1;
                }
            }
        }
    }
    ensure(count == 65_536, || format!("{count} seeds"))?;
    Ok(format!(
        "65536 seeds terminate, longest needs {worst} steps"
    ))
}

fn random_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    Rational::new(
        BigInt::from(rng.gen_range(-bound..=bound)),
        BigInt::from(rng.gen_range(1..=bound)),
    )
}

/// Newton polygons of upper-triangular matrices reproduce the diagonal
/// valuations; finite valuations sum to v_p(det).
fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut nonsingular = 0;
    for i in 0..1000 {
        let n = rng.gen_range(1..=6usize);
        let p = prime(PRIMES[rng.gen_range(0..3)]);
        let m = RationalMatrix::from_fn(n, |r, c| {
            if c >= r {
                // scale some entries by powers of p for varied valuations
                let e = rng.gen_range(-2..=3i64);
                random_rational(&mut rng, 40) * p.pow(e)
            } else {
                Rational::zero()
            }
        });
        let mut expected: Vec<RootValuation> = m
            .diagonal_entries()
            .iter()
            .map(|d| RootValuation::from(vp(d, p)))
            .collect();
        expected.sort();
        let got = eigenvalue_valuations(&m, p);
        ensure(got == expected, || {
            format!("case {i}: {got:?} vs {expected:?}")
        })?;

        let det = m.det();
        if !det.is_zero() {
            nonsingular += 1;
            let sum: Rational = got.iter().filter_map(|v| v.finite().cloned()).sum();
            let vdet = vp(&det, p).finite().unwrap();
            ensure(sum == Rational::from_integer(vdet.into()), || {
                format!("case {i}: sum {sum} vs vp(det) {vdet}")
            })?;
        }
    }
    Ok(format!(
        "1000 triangular matrices match; {nonsingular} determinant checks"
    ))
}

/// Same config, different worker counts, byte-identical reports.
fn criterion_7() -> Check {
    let mut profiles = Vec::new();
    for (k, kind) in [
        ProfileKind::ContractiveEntries,
        ProfileKind::UnitTriangular,
        ProfileKind::Permutation,
        ProfileKind::DiagonalRandom,
        ProfileKind::ExpansiveDiagonal,
        ProfileKind::DenseRandom,
    ]
    .into_iter()
    .enumerate()
    {
        profiles.push(GeneratorProfile::new(
            kind,
            2 + k % 3,
            prime(PRIMES[k % 3]),
            6,
        ));
    }
    let mut config = SweepConfig {
        profiles,
        instances_per_profile: 15,
        modes: vec![IterationMode::Linear, IterationMode::Norm],
        limits: LimitsConfig {
            max_steps: Some(300),
            ..Default::default()
        },
        rng_seed: 0xD0CC1,
        max_order: 64,
        workers: Some(1),
    };
    let serial = run_sweep(&config).map_err(|e| e.to_string())?;
    config.workers = Some(4);
    let parallel = run_sweep(&config).map_err(|e| e.to_string())?;
    config.workers = None;
    let default_pool = run_sweep(&config).map_err(|e| e.to_string())?;
    let again = run_sweep(&config).map_err(|e| e.to_string())?;
    let a = serial.to_jsonl();
    ensure(!a.is_empty(), || "empty report".into())?;
    for (name, other) in [
        ("4 workers", &parallel),
        ("default pool", &default_pool),
        ("rerun", &again),
    ] {
        ensure(other.to_jsonl() == a, || {
            format!("{name}: JSON lines differ")
        })?;
        ensure(other.summary_csv() == serial.summary_csv(), || {
            format!("{name}: summary differs")
        })?;
    }
    Ok(format!(
        "{} records identical across 1, 4 and default workers",
        serial.records.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 worked example diag(1/2,1/2)", criterion_1),
        ("2 contractive family, linear mode", criterion_2),
        ("3 roots-of-unity family", criterion_3),
        ("4 norm-mode diagonal law", criterion_4),
        ("5 classical exhaustive", criterion_5),
        ("6 Newton polygon correctness", criterion_6),
        ("7 sweep determinism", criterion_7),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
