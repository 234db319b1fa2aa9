use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wishart_core::exact::{int, parse_rational, ratio, to_f64};
use wishart_core::pep::{exact_pep, pep_curve};
use wishart_core::wishart::{
    build_joint_pdf, build_rho_hat, exact_marginal, exact_marginal_unnormalized, marginal_bound,
    normalization_constant, split_indices,
};
use wishart_core::{CurveSource, Dimensions, IndexSplit, Limit, Rational};

fn dims(n: usize, m: usize) -> Dimensions {
    Dimensions::new(n, m).unwrap()
}

fn alpha(v: &[&str]) -> Vec<Rational> {
    v.iter().map(|a| parse_rational(a).unwrap()).collect()
}

/// Strictly decreasing positive point of length `y`.
fn ordered_point(rng: &mut ChaCha8Rng, y: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..y).map(|_| rng.random_range(0.01..12.0)).collect();
    p.sort_by(|a, b| b.partial_cmp(a).unwrap());
    p
}

#[test]
fn full_marginal_is_the_joint_density() {
    for (n, m) in [(1, 1), (2, 2), (3, 2), (3, 3), (2, 4)] {
        let d = dims(n, m);
        let all: Vec<usize> = d.labels();
        assert_eq!(exact_marginal(&d, &all).unwrap(), build_joint_pdf(&d, true).unwrap());
    }
}

#[test]
fn single_marginals_integrate_to_one() {
    for (n, m) in [(2, 2), (3, 2), (3, 3), (4, 3)] {
        let d = dims(n, m);
        for i in d.labels() {
            let f = exact_marginal(&d, &[i]).unwrap();
            let total = f.integrate(i, Limit::Zero, Limit::Infinity).unwrap().as_constant().unwrap();
            assert!(total.is_one(), "N={n} M={m} mu_{i}: {total}");
        }
    }
}

#[test]
fn relaxed_density_dominates_joint() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (n, m, a) in
        [(3, 3, vec!["0", "1", "0"]), (3, 3, vec!["1", "0", "0"]), (4, 3, vec!["0", "0", "2"]), (2, 2, vec!["0", "1"])]
    {
        let d = dims(n, m);
        let split = split_indices(&alpha(&a)).unwrap();
        let joint = build_joint_pdf(&d, false).unwrap();
        let relaxed = build_rho_hat(&d, &split).unwrap();
        for _ in 0..200 {
            let pt = ordered_point(&mut rng, d.y());
            let (rho, rho_hat) = (joint.evaluate_f64(&pt).unwrap(), relaxed.evaluate_f64(&pt).unwrap());
            assert!(rho <= rho_hat * (1.0 + 1e-12) + 1e-300, "{pt:?}: {rho} > {rho_hat}");
        }
    }
}

#[test]
fn bound_dominates_multi_index_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for (n, m, p) in [(3, 3, vec![1, 3]), (3, 3, vec![2, 3]), (4, 3, vec![1, 2]), (3, 2, vec![1, 2])] {
        let d = dims(n, m);
        let exact = exact_marginal(&d, &p).unwrap();
        let bound =
            marginal_bound(&d, &IndexSplit::from_subset(d.y(), &p).unwrap()).unwrap().normalized_density().unwrap();
        for _ in 0..300 {
            let full = ordered_point(&mut rng, d.y());
            let pt: Vec<f64> = p.iter().map(|&i| full[i - 1]).collect();
            let (f, fhat) = (exact.evaluate_f64(&pt).unwrap(), bound.evaluate_f64(&pt).unwrap());
            assert!(f <= fhat + 1e-12, "p={p:?} at {pt:?}: {f} > {fhat}");
        }
    }
}

#[test]
fn unnormalized_marginal_scales() {
    let d = dims(3, 3);
    let c = normalization_constant(&d).unwrap();
    let u = exact_marginal_unnormalized(&d, &[2]).unwrap();
    assert_eq!(u.scale(&c.recip()), exact_marginal(&d, &[2]).unwrap());
}

#[test]
fn pep_is_monotone_and_bounded() {
    let d = dims(3, 2);
    let a = alpha(&["1/2", "3"]);
    let mut prev = exact_pep(&d, &a, &Rational::zero()).unwrap();
    assert!(prev.is_one());
    for g in [ratio(1, 10), int(1), int(4), int(30)] {
        let v = exact_pep(&d, &a, &g).unwrap();
        assert!(v > Rational::zero() && v < prev);
        prev = v;
    }
}

#[test]
fn equal_weights_have_closed_form() {
    // Σ μ_j = ‖H‖², a Gamma(NM, 1) variable.
    for (n, m) in [(1, 3), (2, 2), (3, 2), (4, 4)] {
        let d = dims(n, m);
        let a = vec![Rational::one(); d.y()];
        for g in [ratio(1, 3), int(2)] {
            let want = num_traits::pow((Rational::one() + &g).recip(), n * m);
            assert_eq!(exact_pep(&d, &a, &g).unwrap(), want);
        }
    }
}

#[test]
fn bound_curve_sits_above_exact() {
    let d = dims(3, 3);
    let grid: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    for a in [vec!["0", "1", "0"], vec!["0.1", "0", "1"], vec!["0", "0", "1"]] {
        let a = alpha(&a);
        let exact = pep_curve(&d, &a, &grid, CurveSource::Exact, 3).unwrap();
        let bound = pep_curve(&d, &a, &grid, CurveSource::Bound, 3).unwrap();
        assert_eq!(exact.predicted_exponent, bound.predicted_exponent);
        for (e, b) in exact.points.iter().zip(&bound.points) {
            assert!(e.exact.as_ref().unwrap() <= b.exact.as_ref().unwrap());
        }
        let d_exp = bound.predicted_exponent as f64;
        assert!((bound.fitted_slope + d_exp).abs() < 0.02 * d_exp, "{}", bound.fitted_slope);
        assert!(to_f64(bound.points[0].exact.as_ref().unwrap()) > 0.0);
    }
}
