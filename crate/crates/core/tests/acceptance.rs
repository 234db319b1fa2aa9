//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wishart_core::exact::{db_to_gamma, int, parse_rational, to_f64};
use wishart_core::montecarlo::estimate_pep_grid;
use wishart_core::pep::{
    bound_expectation, diversity_exponent, exact_pep, ordered_exp_integral_traced, pep_curve, CurveSource,
};
use wishart_core::verify::{index_subsets, sweep_configs};
use wishart_core::wishart::{
    build_g, build_joint_pdf, build_psi, conjectured_normalization, degree_ledger, exact_marginal,
    integrate_ordered_simplex, marginal_bound, normalization_constant, predicted_smallest_degree, psi_quotient,
    split_indices, SplitCase,
};
use wishart_core::{Dimensions, IndexSplit, Rational};

/// Fractional tolerance on fitted high-SNR slopes.
const SLOPE_REL_TOL: f64 = 0.02;
/// Absolute slack for float dominance comparisons.
const DOMINANCE_SLACK: f64 = 1e-12;
const DOMINANCE_POINTS: usize = 1000;
const MC_SAMPLES: u64 = 1_000_000;
const MC_SIGMAS: f64 = 4.0;
const MC_SEED: u64 = 0x5EED_2010;
const THEOREM2_CASES: usize = 100;
const THEOREM2_SEED: u64 = 20;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn dims(n: usize, m: usize) -> Dimensions {
    Dimensions::new(n, m).unwrap()
}

fn alpha(text: &[&str]) -> Vec<Rational> {
    text.iter().map(|a| parse_rational(a).unwrap()).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn alphas_3x3() -> Vec<(Vec<Rational>, u32)> {
    vec![
        (alpha(&["1", "0", "0"]), 9),
        (alpha(&["0", "1", "0"]), 4),
        (alpha(&["0", "0", "1"]), 1),
        (alpha(&["0.1", "0", "1"]), 9),
        (alpha(&["3", "0", "5"]), 9),
    ]
}

fn high_snr_grid() -> Vec<f64> {
    (0..=8).map(|i| 5.0 * i as f64).collect()
}

fn criterion_1() -> Outcome {
    let configs = sweep_configs(4);
    for (d, p) in &configs {
        let split = IndexSplit::from_subset(d.y(), p).unwrap();
        let mb = marginal_bound(d, &split).map_err(|e| e.to_string())?;
        let predicted = predicted_smallest_degree(d, &split);
        let ledger = degree_ledger(d, &split);
        ensure(mb.smallest_degree as i64 == predicted && ledger.d_r_smallest == predicted, || {
            format!(
                "N={} M={} p={p:?}: symbolic {} predicted {predicted} ledger {}",
                d.n(),
                d.m(),
                mb.smallest_degree,
                ledger.d_r_smallest
            )
        })?;
    }
    Ok(format!("{} configurations, symbolic smallest degree = closed form = ledger", configs.len()))
}

fn criterion_2() -> Outcome {
    let configs = sweep_configs(4);
    for (d, p) in &configs {
        let case = format!("N={} M={} p={p:?}", d.n(), d.m());
        let split = IndexSplit::from_subset(d.y(), p).unwrap();
        let l = degree_ledger(d, &split);
        let (x, y, k, p1) = (d.x() as i64, d.y() as i64, split.k() as i64, split.p1() as i64);
        ensure(l.d_g_smallest == k * (x - y) + k * (k - 1), || format!("{case}: d_g"))?;
        ensure(l.d_h_org == (y - k) * (x - y) + y * (y - 1) - k * (k - 1), || format!("{case}: d_h_org"))?;
        match split.case {
            SplitCase::AlphaOneZero => {
                ensure(
                    l.d_h_vanishing == (p1 - 1) * (x - y) + 2 * y * (p1 - 1) - p1 * (p1 - 1)
                        && l.d_h_added == y - k - p1 + 1
                        && split.epsilon == Some(split.p1() - 1),
                    || format!("{case}: vanishing/added/epsilon"),
                )?;
            }
            SplitCase::AlphaOnePositive => {
                ensure(l.d_h_vanishing == 0 && l.d_h_added == y - k, || format!("{case}: vanishing/added"))?;
            }
        }
        ensure(l.composed() == l.d_r_smallest, || format!("{case}: composition {:?}", l))?;
        ensure(l.d_r_smallest == (x - p1 + 1) * (y - p1 + 1) - k, || format!("{case}: d_r"))?;

        let g = build_g(d, &split).unwrap();
        let q = psi_quotient(d, &split).unwrap();
        let psi = build_psi(d);
        let psi_deg = (y * (x - y) + y * (y - 1)) as u32;
        ensure(g.total_degree_range() == Some((l.d_g_smallest as u32, l.d_g_smallest as u32)), || {
            format!("{case}: g not homogeneous of degree {}", l.d_g_smallest)
        })?;
        ensure(q.total_degree_range() == Some((l.d_h_org as u32, l.d_h_org as u32)), || {
            format!("{case}: psi/g not homogeneous of degree {}", l.d_h_org)
        })?;
        ensure(psi.total_degree_range() == Some((psi_deg, psi_deg)), || format!("{case}: psi not homogeneous"))?;
        let full = g.embed(d.labels()).unwrap().checked_mul(&q.embed(d.labels()).unwrap()).unwrap();
        ensure(full == psi, || format!("{case}: g * (psi/g) != psi"))?;
    }
    Ok(format!("{} configurations, ledger identities and term-by-term homogeneity", configs.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(THEOREM2_SEED);
    let mut steps_checked = 0;
    for _ in 0..THEOREM2_CASES {
        let k = rng.random_range(1..=4usize);
        let beta: Vec<u32> = (0..k).map(|_| rng.random_range(0..=4)).collect();
        let (res, steps) = ordered_exp_integral_traced(&beta);
        let want = k as u32 + beta.iter().sum::<u32>();
        ensure(res.laurent.len() == 1, || format!("beta={beta:?}: {} Laurent terms", res.laurent.len()))?;
        ensure(res.leading_exponent == want, || format!("beta={beta:?}: exponent {}", res.leading_exponent))?;
        ensure(res.leading_coeff > Rational::zero(), || format!("beta={beta:?}: zeta {}", res.leading_coeff))?;
        ensure(steps.len() == k - 1, || format!("beta={beta:?}: {} Gamma steps", steps.len()))?;
        for s in &steps {
            ensure(s.holds(), || format!("beta={beta:?}: Gamma_{} = {} saw {:?}", s.k, s.expected, s.observed))?;
            steps_checked += 1;
        }
    }
    Ok(format!("{THEOREM2_CASES} random beta, single term zeta*omega^-(K+sum beta), {steps_checked} Gamma_k checks"))
}

fn criterion_4() -> Outcome {
    // Π (X-i)!(Y-i)! for every (N, M) <= 4, reviewed once against the engine.
    let pinned: [((usize, usize), i64); 16] = [
        ((1, 1), 1),
        ((1, 2), 1),
        ((1, 3), 2),
        ((1, 4), 6),
        ((2, 1), 1),
        ((2, 2), 1),
        ((2, 3), 2),
        ((2, 4), 12),
        ((3, 1), 2),
        ((3, 2), 2),
        ((3, 3), 4),
        ((3, 4), 24),
        ((4, 1), 6),
        ((4, 2), 12),
        ((4, 3), 24),
        ((4, 4), 144),
    ];
    for ((n, m), c) in pinned {
        let d = dims(n, m);
        let constant = normalization_constant(&d).map_err(|e| e.to_string())?;
        ensure(constant == int(c), || format!("N={n} M={m}: constant {constant}, pinned {c}"))?;
        ensure(constant == conjectured_normalization(&d), || format!("N={n} M={m}: factorial product differs"))?;
        let total = integrate_ordered_simplex(&build_joint_pdf(&d, true).unwrap(), &d).map_err(|e| e.to_string())?;
        ensure(total.is_one(), || format!("N={n} M={m}: normalized integral {total}"))?;
    }
    Ok("normalized density integrates to exactly 1; constant = prod (X-i)!(Y-i)! for N,M <= 4".into())
}

fn slope_check(d: Dimensions, cases: &[(Vec<Rational>, u32)]) -> Outcome {
    let mut summary = Vec::new();
    for (a, expected) in cases {
        let curve = pep_curve(&d, a, &high_snr_grid(), CurveSource::Exact, 3).map_err(|e| e.to_string())?;
        let d_exp = *expected as f64;
        ensure(curve.predicted_exponent == *expected, || {
            format!("alpha={a:?}: predicted {}", curve.predicted_exponent)
        })?;
        ensure((curve.fitted_slope + d_exp).abs() <= SLOPE_REL_TOL * d_exp, || {
            format!("alpha={:?}: slope {:.4} vs -{expected}", fmt_alpha(a), curve.fitted_slope)
        })?;
        summary.push(format!("[{}] {:.3}", fmt_alpha(a), curve.fitted_slope));
    }
    Ok(format!("slopes over 30-40 dB: {}", summary.join(", ")))
}

fn fmt_alpha(a: &[Rational]) -> String {
    a.iter().map(|x| format!("{}", to_f64(x))).collect::<Vec<_>>().join(" ")
}

fn criterion_5() -> Outcome {
    slope_check(dims(3, 3), &alphas_3x3())
}

fn criterion_6() -> Outcome {
    let cases = vec![
        (alpha(&["1", "0", "0", "100"]), 16),
        (alpha(&["0", "1", "0", "100"]), 9),
        (alpha(&["0", "0", "1", "100"]), 4),
    ];
    slope_check(dims(4, 4), &cases)
}

fn criterion_7() -> Outcome {
    let d = dims(3, 3);
    let norm = normalization_constant(&d).unwrap();
    let mut checks = 0;
    for (a, _) in alphas_3x3() {
        let split = split_indices(&a).unwrap();
        let reduced: Vec<Rational> = (1..=d.y())
            .map(|i| if split.p.contains(&i) { split.alpha_min.clone() } else { Rational::zero() })
            .collect();
        let laurent = bound_expectation(&marginal_bound(&d, &split).unwrap());
        for g in [int(1), int(10), int(100)] {
            let exact = exact_pep(&d, &a, &g).map_err(|e| e.to_string())?;
            let middle = exact_pep(&d, &reduced, &g).map_err(|e| e.to_string())?;
            let omega = Rational::one() + &g * &split.alpha_min;
            let bound = laurent.evaluate(&omega) / &norm;
            ensure(exact <= middle && middle <= bound, || {
                format!(
                    "alpha=[{}] gamma={g}: {} <= {} <= {} fails",
                    fmt_alpha(&a),
                    to_f64(&exact),
                    to_f64(&middle),
                    to_f64(&bound)
                )
            })?;
            checks += 1;
        }
    }
    Ok(format!("{checks} exact rational chains exact <= reduced-weight <= bound"))
}

fn criterion_8() -> Outcome {
    let configs = sweep_configs(4);
    for (d, p) in &configs {
        let split = IndexSplit::from_subset(d.y(), p).unwrap();
        let lead = bound_expectation(&marginal_bound(d, &split).unwrap()).leading_exponent;
        let div = diversity_exponent(d, &split.alpha).unwrap();
        ensure(lead == div, || format!("N={} M={} p={p:?}: leading {lead} vs diversity {div}", d.n(), d.m()))?;
    }
    Ok(format!("{} configurations, leading omega exponent = (N-p1+1)(M-p1+1)", configs.len()))
}

fn criterion_9() -> Outcome {
    let mut total = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for (n, m) in [(2, 2), (3, 2), (3, 3)] {
        let d = dims(n, m);
        for p in index_subsets(d.y()).into_iter().filter(|p| p.len() == 1) {
            let exact = exact_marginal(&d, &p).map_err(|e| e.to_string())?;
            let split = IndexSplit::from_subset(d.y(), &p).unwrap();
            let bound = marginal_bound(&d, &split).unwrap().normalized_density().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * n as u64 + 10 * m as u64 + p[0] as u64);
            for i in 0..DOMINANCE_POINTS {
                let scale = if i % 2 == 0 { 3.0 } else { 30.0 };
                let x: f64 = rng.random_range(0.0..1.0) * scale;
                let f = exact.evaluate_f64(&[x]).unwrap();
                let fhat = bound.evaluate_f64(&[x]).unwrap();
                worst = worst.max(f - fhat);
                ensure(f <= fhat + DOMINANCE_SLACK, || format!("N={n} M={m} p={p:?} mu={x}: {f:e} > {fhat:e}"))?;
                total += 1;
            }
        }
    }
    Ok(format!("{total} points, max(f - f_hat) = {worst:.3e}"))
}

fn criterion_10() -> Outcome {
    let d = dims(3, 3);
    let alphas = [alpha(&["0", "1", "0"]), alpha(&["1", "0", "0"])];
    let grid: Vec<f64> = (0..=6).map(|i| 2.0 * i as f64).collect();
    let gammas: Vec<Rational> = grid.iter().map(|&g| db_to_gamma(g)).collect();
    let alphas_f: Vec<Vec<f64>> = alphas.iter().map(|a| a.iter().map(to_f64).collect()).collect();
    let gammas_f: Vec<f64> = gammas.iter().map(to_f64).collect();

    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_pep_grid(&d, &alphas_f, &gammas_f, MC_SAMPLES, MC_SEED))
            .map_err(|e| e.to_string())
    };
    let many = run(4)?;
    let single = run(1)?;
    ensure(many == single, || "estimates differ between 1 and 4 threads".into())?;

    let mut worst_z: f64 = 0.0;
    for (ai, a) in alphas.iter().enumerate() {
        for (gi, g) in gammas.iter().enumerate() {
            let exact = to_f64(&exact_pep(&d, a, g).map_err(|e| e.to_string())?);
            let est = many[ai][gi];
            let z = if est.stderr > 0.0 { (est.mean - exact).abs() / est.stderr } else { 0.0 };
            worst_z = worst_z.max(z);
            ensure(z <= MC_SIGMAS && (est.stderr > 0.0 || est.mean == exact), || {
                format!("alpha=[{}] {} dB: mc {} ± {} vs exact {exact}", fmt_alpha(a), grid[gi], est.mean, est.stderr)
            })?;
        }
    }
    Ok(format!("14 points at n=1e6 within {MC_SIGMAS} stderr (max |z| = {worst_z:.2}); identical for 1 and 4 threads"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exhaustive smallest degree", criterion_1),
        ("degree ledger consistency", criterion_2),
        ("ordered exponential integral", criterion_3),
        ("normalization", criterion_4),
        ("asymptotic slopes (3x3)", criterion_5),
        ("asymptotic slopes (4x4)", criterion_6),
        ("bound chain", criterion_7),
        ("leading omega exponent", criterion_8),
        ("marginal dominance", criterion_9),
        ("Monte-Carlo cross-validation", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS [{id:>2}] {name}: {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name}: {msg} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
