//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p bdrr-cli --test acceptance -- --nocapture` to see
//! the per-criterion lines. Criterion 06 is split: the purity-equivalence
//! part and the independently derived q* value pass; the q* constant printed
//! in the source material is asserted verbatim in its own test and fails,
//! because it contradicts the closed form, the brute-force oracle, and the
//! left-inverse property (see README, "Known discrepancies").

use std::process::Command;
use std::time::Instant;

use bdrr_core::rational::{int, int_u, ratio};
use bdrr_core::{
    build_tpm, catalog_lookup, closed_form_estimator, cn_lower_bound, cn_trace_bound,
    estimate_from_counts, gap_coefficients, induced_distribution, monte_carlo, moore_penrose,
    params_from_gamma, params_from_theta, parse_rat, pure_check, qstar_bruteforce,
    qstar_coefficients, variance_coordinate, variance_pnl_bibd, variance_total,
    variance_via_risk_trace, verify_ldp, CountVector, Distribution, Error, RandomiserSpec, Rat,
    RationalMatrix, SetSystem, SplitMix64,
};
use num_traits::One;

fn finish(criterion: &str, start: Instant, budget_secs: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed < budget_secs {
        println!("acceptance {criterion}: PASS ({elapsed:.2}s, budget {budget_secs}s)");
    } else {
        println!("acceptance {criterion}: FAIL (runtime {elapsed:.2}s, budget {budget_secs}s)");
        panic!("{criterion} exceeded its runtime budget: {elapsed:.2}s >= {budget_secs}s");
    }
}

#[test]
fn acceptance_01_worked_estimate() {
    let start = Instant::now();
    let system = catalog_lookup("pairs-4").unwrap();
    let params = params_from_theta(&system.classify(), &ratio(3, 4)).unwrap();
    let counts = CountVector::new(vec![4, 4, 2, 2, 3, 3], 18).unwrap();
    let estimate = estimate_from_counts(&system, &params, &counts).unwrap();
    assert_eq!(
        estimate,
        vec![ratio(5, 12), ratio(1, 4), ratio(1, 4), ratio(1, 12)]
    );
    finish("01 worked estimate", start, 1.0);
}

/// The printed 12x9 incidence pattern of the affine plane of order 3.
const AG23_PATTERN: [[u8; 9]; 12] = [
    [1, 1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 1, 1],
    [1, 0, 0, 1, 0, 0, 1, 0, 0],
    [0, 1, 0, 0, 1, 0, 0, 1, 0],
    [0, 0, 1, 0, 0, 1, 0, 0, 1],
    [1, 0, 0, 0, 1, 0, 0, 0, 1],
    [0, 1, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 1, 1, 0, 0, 0, 1, 0],
    [1, 0, 0, 0, 0, 1, 0, 1, 0],
    [0, 1, 0, 1, 0, 0, 0, 0, 1],
    [0, 0, 1, 0, 1, 0, 1, 0, 0],
];

#[test]
fn acceptance_02_worked_protocol() {
    let start = Instant::now();
    let system = catalog_lookup("ag23").unwrap();
    let params = params_from_theta(&system.classify(), &ratio(3, 4)).unwrap();
    assert_eq!(params.alpha1, ratio(3, 16));
    assert_eq!(params.alpha2, ratio(1, 32));
    assert_eq!(params.p_star, ratio(3, 4));
    assert_eq!(params.q_star, ratio(9, 32));
    let (g1, g2) = gap_coefficients(&params).unwrap();
    assert_eq!(g1, ratio(23, 15));
    assert_eq!(g2, ratio(-3, 5));

    let q = build_tpm(&system, &params).unwrap();
    assert_eq!(verify_ldp(&q).unwrap(), int(6));
    let expected_q = RationalMatrix::from_fn(12, 9, |i, j| {
        if AG23_PATTERN[i][j] == 1 {
            ratio(3, 16)
        } else {
            ratio(1, 32)
        }
    });
    assert_eq!(
        q, expected_q,
        "transition matrix differs from the printed one"
    );

    let l = closed_form_estimator(&system, &params).unwrap();
    let expected_l = RationalMatrix::from_fn(9, 12, |j, i| {
        if AG23_PATTERN[i][j] == 1 {
            ratio(23, 15)
        } else {
            ratio(-3, 5)
        }
    });
    assert_eq!(
        *l.matrix(),
        expected_l,
        "estimator differs from the printed one"
    );
    finish("02 worked protocol", start, 1.0);
}

#[test]
fn acceptance_03_moore_penrose_theorem() {
    let start = Instant::now();
    let mut verified = 0usize;
    for name in ["warner", "pairs-4", "fano", "ag23", "steiner25"] {
        let system = catalog_lookup(name).unwrap();
        let profile = system.classify();
        for theta in [ratio(1, 3), ratio(1, 2), ratio(3, 4)] {
            let params = match params_from_theta(&profile, &theta) {
                Ok(p) => p,
                // a non-positive gap admits no protocol, hence no estimator
                Err(Error::NonPositivePrivacyGap) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            let q = build_tpm(&system, &params).unwrap();
            let closed = closed_form_estimator(&system, &params).unwrap();
            let generic = moore_penrose(&q, &profile, None).unwrap();
            assert_eq!(closed.matrix(), generic.matrix(), "{name} at theta={theta}");
            verified += 1;
        }
    }
    assert!(
        verified >= 8,
        "only {verified} (design, theta) pairs verified"
    );
    finish("03 moore-penrose theorem", start, 5.0);
}

#[test]
fn acceptance_04_variance_five_routes() {
    let start = Instant::now();
    let system = catalog_lookup("ag23").unwrap();
    let profile = system.classify();
    let params = params_from_theta(&profile, &ratio(1, 2)).unwrap();
    let pi = Distribution::uniform(9);
    let t = 10;
    let expected = ratio(256, 45);

    let summed: Rat = pi
        .probs()
        .iter()
        .map(|p| variance_coordinate(&params, p, t).unwrap())
        .sum();
    assert_eq!(summed, expected, "route (a): per-coordinate sum");

    assert_eq!(
        variance_total(&params, &pi, t).unwrap(),
        expected,
        "route (b): total closed form"
    );

    assert_eq!(
        variance_pnl_bibd(&profile, &params.gamma, &pi, t).unwrap(),
        expected,
        "route (c): BIBD ratio form"
    );

    let q = build_tpm(&system, &params).unwrap();
    let rho = induced_distribution(&q, &pi).unwrap();
    let mp = moore_penrose(&q, &profile, Some(&params)).unwrap();
    assert_eq!(
        variance_via_risk_trace(&mp, &rho, &pi, t).unwrap(),
        expected,
        "route (d): risk trace of the Moore-Penrose estimator"
    );

    assert_eq!(
        cn_lower_bound(&q, &rho, &pi, t).unwrap(),
        expected,
        "route (e): lower bound, met with equality"
    );
    finish("04 variance five routes", start, 1.0);
}

#[test]
fn acceptance_05_bound_tightness() {
    let start = Instant::now();
    let system = catalog_lookup("steiner25").unwrap();
    let profile = system.classify();
    assert_eq!(
        (
            profile.v,
            profile.b,
            profile.replication,
            profile.block_size,
            profile.index
        ),
        (25, 50, Some(8), Some(4), Some(1))
    );
    let gamma = ratio(21, 4); // = (v - k) / k, the tightness point
    let params = params_from_gamma(&profile, &gamma).unwrap();
    let q = build_tpm(&system, &params).unwrap();
    let pi = Distribution::uniform(25);
    let rho = induced_distribution(&q, &pi).unwrap();
    assert_eq!(rho, Distribution::uniform(50));

    // generic-inversion oracle
    let generic_trace = bdrr_core::cn_information_trace(&q, &rho).unwrap();
    // closed-form oracle: trace((Q^T Q)^-1) / b at uniform rho
    let closed_trace = bdrr_core::trace_uniform_bibd(&profile, &params).unwrap() / int_u(50);
    let bound = cn_trace_bound(25, 4, &gamma).unwrap();

    let derived = parse_rat("54271/2023").unwrap();
    assert_eq!(generic_trace, derived);
    assert_eq!(closed_trace, derived);
    assert_eq!(bound, derived, "bound met with equality");
    // the printed value 98213/36125 is a misprint; see README
    assert_ne!(bound, parse_rat("98213/36125").unwrap());
    finish("05 bound tightness", start, 5.0);
}

/// Deterministic random systems on 5..=7 points for the purity sweep.
fn random_small_systems(count: usize, seed: u64) -> Vec<SetSystem> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = 5 + (rng.next_u64() % 3) as usize;
        let block_count = 2 + (rng.next_u64() % 6) as usize;
        let blocks: Vec<Vec<usize>> = (0..block_count)
            .map(|_| {
                let mask = 1 + (rng.next_u64() as usize) % ((1 << v) - 2);
                (0..v).filter(|i| mask & (1 << i) != 0).collect()
            })
            .collect();
        if let Ok(system) = SetSystem::new(v, blocks) {
            out.push(system);
        }
    }
    out
}

/// Per-pair theta-coefficients are constant iff the system is pure.
fn coefficient_constancy(system: &SetSystem) -> bool {
    let v = system.point_count();
    let mut first = None;
    for x in 0..v {
        for xp in 0..v {
            if x == xp {
                continue;
            }
            match qstar_coefficients(system, x, xp) {
                Ok(c) => match &first {
                    None => first = Some(c),
                    Some(f) => {
                        if *f != c {
                            return false;
                        }
                    }
                },
                Err(_) => return false,
            }
        }
    }
    true
}

#[test]
fn acceptance_06_purity_equivalence() {
    let start = Instant::now();
    for name in bdrr_core::catalog_names() {
        let system = catalog_lookup(name).unwrap();
        assert_eq!(
            coefficient_constancy(&system),
            pure_check(&system).is_pure,
            "{name}"
        );
    }
    // pure designs beyond the catalog, since random systems rarely are
    for v in 5..=7 {
        for k in 1..v {
            let system = bdrr_core::k_subset_design(v, k).unwrap();
            assert!(coefficient_constancy(&system) && pure_check(&system).is_pure);
        }
    }
    let systems = random_small_systems(50, 20240809);
    let mut pure_seen = 0;
    for (i, system) in systems.iter().enumerate() {
        assert_eq!(
            coefficient_constancy(system),
            pure_check(system).is_pure,
            "random system {i}"
        );
        if pure_check(system).is_pure {
            pure_seen += 1;
        }
    }
    println!("  (50 random systems, {pure_seen} pure)");
    finish("06 purity equivalence", start, 10.0);
}

#[test]
fn acceptance_06_fano_minus_point_qstar_derived() {
    let start = Instant::now();
    // independently derived: q*(theta) = (3 - theta)/6, confirmed by the
    // closed form and by brute force over all 42 ordered pairs
    let system = catalog_lookup("fano-minus-point").unwrap();
    let profile = system.classify();
    for theta in [
        ratio(1, 2),
        ratio(5, 9),
        ratio(2, 3),
        ratio(3, 4),
        ratio(9, 10),
    ] {
        let expected = (int(3) - &theta) / int(6);
        let params = params_from_theta(&profile, &theta).unwrap();
        assert_eq!(params.q_star, expected, "closed form at theta={theta}");
        for x in 0..6 {
            for xp in 0..6 {
                if x != xp {
                    assert_eq!(
                        qstar_bruteforce(&system, &theta, x, xp).unwrap(),
                        expected,
                        "brute force at theta={theta}, pair ({x},{xp})"
                    );
                }
            }
        }
    }
    finish("06 fano-minus-point q* (derived value)", start, 10.0);
}

#[test]
fn acceptance_06_fano_minus_point_qstar_as_printed() {
    // As stated, this criterion asserts q* = (2 - theta)/3 for the
    // point-deleted Fano design. That value contradicts the design's own
    // closed form q* = theta l/r + (1-theta)(r-l)/(b-r) = (3 - theta)/6,
    // the exhaustive per-pair enumeration, and L Q = I for the closed-form
    // estimator built from it. It is asserted here verbatim and is expected
    // to fail; the companion test above verifies the derived value.
    let start = Instant::now();
    let system = catalog_lookup("fano-minus-point").unwrap();
    let profile = system.classify();
    let mut failed_at = Vec::new();
    for theta in [
        ratio(1, 2),
        ratio(5, 9),
        ratio(2, 3),
        ratio(3, 4),
        ratio(9, 10),
    ] {
        let printed = (int(2) - &theta) / int(3);
        let params = params_from_theta(&profile, &theta).unwrap();
        if params.q_star != printed {
            failed_at.push(format!(
                "theta={theta}: q*={} but printed value is {}",
                params.q_star, printed
            ));
        }
    }
    if failed_at.is_empty() {
        finish("06 fano-minus-point q* (printed value)", start, 10.0);
    } else {
        let elapsed = start.elapsed().as_secs_f64();
        println!(
            "acceptance 06 fano-minus-point q* (printed value): FAIL ({elapsed:.2}s) — \
             the printed constant (2-theta)/3 is inconsistent; derived value is (3-theta)/6"
        );
        panic!(
            "printed q* value does not hold:\n  {}",
            failed_at.join("\n  ")
        );
    }
}

#[test]
fn acceptance_07_warner_cross_check() {
    let start = Instant::now();
    let system = catalog_lookup("warner").unwrap();
    let profile = system.classify();
    for theta in [ratio(3, 5), ratio(3, 4), ratio(9, 10)] {
        let params = params_from_theta(&profile, &theta).unwrap();
        for p1 in [int(0), ratio(1, 4), ratio(1, 2), int(1)] {
            let ours = variance_coordinate(&params, &p1, 1).unwrap();
            let two_theta_minus_1 = int_u(2) * &theta - Rat::one();
            let warner = (&theta - &theta * &theta) / (&two_theta_minus_1 * &two_theta_minus_1)
                + &p1
                - &p1 * &p1;
            assert_eq!(ours, warner, "theta={theta}, p1={p1}");
        }
    }
    finish("07 warner cross-check", start, 1.0);
}

#[test]
fn acceptance_08_monte_carlo_validation() {
    let start = Instant::now();
    let system = catalog_lookup("pairs-4").unwrap();
    let params = params_from_theta(&system.classify(), &ratio(3, 4)).unwrap();
    let spec = RandomiserSpec::new(system, params).unwrap();
    let pi = Distribution::new(vec![ratio(5, 12), ratio(1, 4), ratio(1, 4), ratio(1, 12)]).unwrap();
    let report = monte_carlo(&spec, &pi, 1000, 2000, 42).unwrap();
    for (j, z) in report.per_coordinate_z.iter().enumerate() {
        assert!(
            z.abs() < 4.0,
            "coordinate {j} mean deviates by {z} standard errors"
        );
    }
    let rel = (report.empirical_variance_total - report.analytic_variance_total).abs()
        / report.analytic_variance_total;
    assert!(rel < 0.10, "empirical variance off by {:.1}%", rel * 100.0);
    println!(
        "  (z = {:?}, variance rel. dev. {:.2}%)",
        report.per_coordinate_z,
        rel * 100.0
    );
    finish("08 monte carlo validation", start, 60.0);
}

#[test]
fn acceptance_09_binomial_law() {
    let start = Instant::now();
    let system = catalog_lookup("warner").unwrap();
    let params = params_from_theta(&system.classify(), &ratio(3, 4)).unwrap();
    let q = build_tpm(&system, &params).unwrap();
    let choose = |n: u64, k: u64| -> u64 { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) };
    for p1 in [ratio(1, 4), ratio(1, 2)] {
        let pi = Distribution::new(vec![p1.clone(), Rat::one() - &p1]).unwrap();
        let success = &p1 * params.gap() + &params.q_star;
        for t in 1u64..=4 {
            // exact distribution of the tally T_1 over all 2^t output strings
            let mut dist = vec![Rat::from_integer(0.into()); t as usize + 1];
            for code in 0..(1u64 << t) {
                let mut prob = Rat::one();
                let mut tally = 0usize;
                for bit in 0..t {
                    let y = ((code >> bit) & 1) as usize;
                    let p_y: Rat = (0..2).map(|x| q.get(y, x) * pi.get(x)).sum();
                    prob *= p_y;
                    if y == 0 {
                        tally += 1;
                    }
                }
                dist[tally] += prob;
            }
            for (j, got) in dist.iter().enumerate() {
                let binom = int_u(choose(t, j as u64) as usize)
                    * success.pow(j as i32)
                    * (Rat::one() - &success).pow((t as usize - j) as i32);
                assert_eq!(*got, binom, "t={t}, tally={j}, p1={p1}");
            }
        }
    }
    finish("09 binomial law", start, 5.0);
}

#[test]
fn acceptance_10_cli_determinism() {
    let start = Instant::now();
    let args = [
        "simulate",
        "pairs-4",
        "--theta",
        "3/4",
        "--dist",
        "5/12,1/4,1/4,1/12",
        "--t",
        "200",
        "--reps",
        "100",
        "--seed",
        "42",
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_bdrr"))
            .args(args)
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "repeated runs differ");
    assert!(!a.stdout.is_empty());
    finish("10 cli determinism", start, 60.0);
}
