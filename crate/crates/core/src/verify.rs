//! Property suites behind `wishart verify <suite>`. Each suite returns a
//! report listing every failed case; an empty failure list means the
//! property held everywhere it was checked.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exact::{int, Rational};
use crate::montecarlo;
use crate::pep::{bound_expectation, diversity_exponent, exact_pep, ordered_exp_integral_traced};
use crate::wishart::{
    build_joint_pdf, build_psi, conjectured_normalization, degree_ledger, exact_marginal, integrate_ordered_simplex,
    marginal_bound, normalization_constant, predicted_smallest_degree, Dimensions, IndexSplit,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub case: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: usize,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn new(suite: &'static str) -> Self {
        SuiteReport { suite, checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, case: impl FnOnce() -> String, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(Failure { case: case(), detail: detail() });
        }
    }
}

/// Every nonempty ascending subset of `1..=y`.
pub fn index_subsets(y: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << y)).map(|mask| (1..=y).filter(|i| mask & (1 << (i - 1)) != 0).collect()).collect()
}

/// All `(N, M, p)` configurations with `N, M <= max`.
pub fn sweep_configs(max: usize) -> Vec<(Dimensions, Vec<usize>)> {
    let mut out = Vec::new();
    for n in 1..=max {
        for m in 1..=max {
            let d = Dimensions::new(n, m).unwrap();
            for p in index_subsets(d.y()) {
                out.push((d, p));
            }
        }
    }
    out
}

/// Smallest degree of the symbolic `r`, the degree ledger, the closed-form
/// prediction, `ψ` homogeneity and the leading `ω` exponent all agree.
pub fn theorem1(max: usize) -> SuiteReport {
    let results: Vec<SuiteReport> = sweep_configs(max)
        .into_par_iter()
        .map(|(d, p)| {
            let mut rep = SuiteReport::new("theorem1");
            let case = || format!("N={} M={} p={:?}", d.n(), d.m(), p);
            let split = IndexSplit::from_subset(d.y(), &p).unwrap();
            let mb = match marginal_bound(&d, &split) {
                Ok(mb) => mb,
                Err(e) => {
                    rep.check(false, case, || e.to_string());
                    return rep;
                }
            };
            let predicted = predicted_smallest_degree(&d, &split);
            let ledger = degree_ledger(&d, &split);
            rep.check(mb.smallest_degree as i64 == predicted, case, || {
                format!("smallest degree {} vs predicted {predicted}", mb.smallest_degree)
            });
            rep.check(ledger.d_r_smallest == predicted && ledger.composed() == predicted, case, || {
                format!("ledger {ledger:?} vs predicted {predicted}")
            });
            let (x, y, k) = (d.x() as i64, d.y() as i64, split.k() as i64);
            let g_deg = mb.g.total_degree_range();
            rep.check(g_deg == Some((ledger.d_g_smallest as u32, ledger.d_g_smallest as u32)), case, || {
                format!("g degrees {g_deg:?} vs ledger {}", ledger.d_g_smallest)
            });
            let psi_deg = build_psi(&d).total_degree_range();
            let want = (y * (x - y) + y * (y - 1)) as u32;
            rep.check(psi_deg == Some((want, want)), case, || format!("psi degrees {psi_deg:?} vs {want}"));
            rep.check(ledger.d_g_smallest + ledger.d_h_org == y * (x - y) + y * (y - 1), case, || {
                format!("d_g + d_h_org = {} vs psi degree {want}", ledger.d_g_smallest + ledger.d_h_org)
            });
            rep.check(k >= 1 && mb.r.is_polynomial(), case, || "r is not a pure polynomial".into());
            let lead = bound_expectation(&mb).leading_exponent;
            let div = diversity_exponent(&d, &split.alpha).unwrap();
            rep.check(lead == div, case, || format!("leading omega exponent {lead} vs diversity {div}"));
            rep
        })
        .collect();
    merge("theorem1", results)
}

fn merge(suite: &'static str, parts: Vec<SuiteReport>) -> SuiteReport {
    let mut rep = SuiteReport::new(suite);
    for p in parts {
        rep.checks += p.checks;
        rep.failures.extend(p.failures);
    }
    rep
}

/// Random `β` vectors (`K <= 4`, `β_i <= 4`): one Laurent term with exponent
/// `K + Σβ`, positive coefficient, and the `Γ_k` invariant at every step.
pub fn theorem2(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let betas: Vec<Vec<u32>> = (0..cases)
        .map(|_| {
            let k = rng.random_range(1..=4);
            (0..k).map(|_| rng.random_range(0..=4)).collect()
        })
        .collect();
    let mut rep = SuiteReport::new("theorem2");
    for beta in betas {
        let case = || format!("beta={beta:?}");
        let (res, steps) = ordered_exp_integral_traced(&beta);
        let want = beta.len() as u32 + beta.iter().sum::<u32>();
        rep.check(res.laurent.len() == 1, case, || format!("{} Laurent terms", res.laurent.len()));
        rep.check(res.leading_exponent == want, case, || format!("exponent {} vs {want}", res.leading_exponent));
        rep.check(res.leading_coeff > Rational::zero(), case, || format!("zeta = {}", res.leading_coeff));
        for step in steps {
            rep.check(step.holds(), case, || {
                format!("Gamma_{} = {} but saw {:?}", step.k, step.expected, step.observed)
            });
        }
    }
    rep
}

/// Normalized joint density integrates to exactly one and the normalization
/// constant matches `Π (X-i)! (Y-i)!`.
pub fn normalization(max: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("normalization");
    for n in 1..=max {
        for m in 1..=max {
            let d = Dimensions::new(n, m).unwrap();
            let case = || format!("N={n} M={m}");
            let total = build_joint_pdf(&d, true).and_then(|p| integrate_ordered_simplex(&p, &d));
            rep.check(total.as_ref().is_ok_and(One::is_one), case, || format!("integral {total:?}"));
            let c = normalization_constant(&d).unwrap();
            let conj = conjectured_normalization(&d);
            rep.check(c == conj, case, || format!("constant {c} vs product of factorials {conj}"));
        }
    }
    rep
}

/// `exact_marginal <= f̂` (both normalized) at seeded random points for
/// every single-index marginal of the given sizes.
pub fn dominance(sizes: &[(usize, usize)], points: usize, seed: u64, slack: f64) -> SuiteReport {
    let mut rep = SuiteReport::new("dominance");
    for &(n, m) in sizes {
        let d = Dimensions::new(n, m).unwrap();
        for idx in 1..=d.y() {
            let case = || format!("N={n} M={m} p=[{idx}]");
            let exact = exact_marginal(&d, &[idx]).unwrap();
            let split = IndexSplit::from_subset(d.y(), &[idx]).unwrap();
            let bound = marginal_bound(&d, &split).unwrap().normalized_density().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n * 16 + m) * 16 + idx) as u64);
            for _ in 0..points {
                let x: f64 = rng.random_range(0.0..30.0);
                let (f, fhat) = (exact.evaluate_f64(&[x]).unwrap(), bound.evaluate_f64(&[x]).unwrap());
                rep.check(f <= fhat + slack, case, || format!("at mu={x}: exact {f:e} > bound {fhat:e}"));
            }
        }
    }
    rep
}

/// Monte-Carlo means within `sigmas` standard errors of the exact values.
pub fn mc_cross(
    dims: &Dimensions,
    alphas: &[Vec<Rational>],
    grid_db: &[f64],
    n: u64,
    seed: u64,
    sigmas: f64,
) -> SuiteReport {
    let mut rep = SuiteReport::new("mc-cross");
    let gammas: Vec<Rational> = grid_db.iter().map(|&db| crate::exact::db_to_gamma(db)).collect();
    let gammas_f: Vec<f64> = gammas.iter().map(crate::exact::to_f64).collect();
    let alphas_f: Vec<Vec<f64>> = alphas.iter().map(|a| a.iter().map(crate::exact::to_f64).collect()).collect();
    let est = match montecarlo::estimate_pep_grid(dims, &alphas_f, &gammas_f, n, seed) {
        Ok(e) => e,
        Err(e) => {
            rep.check(false, || "sampling".into(), || e.to_string());
            return rep;
        }
    };
    for (ai, alpha) in alphas.iter().enumerate() {
        for (gi, g) in gammas.iter().enumerate() {
            let case = || {
                format!(
                    "alpha={:?} gamma_db={}",
                    alpha.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    grid_db[gi]
                )
            };
            let exact = crate::exact::to_f64(&exact_pep(dims, alpha, g).unwrap());
            let e = est[ai][gi];
            let ok = (e.mean - exact).abs() <= sigmas * e.stderr || (e.stderr == 0.0 && e.mean == exact);
            rep.check(ok, case, || format!("mc {} ± {} vs exact {exact}", e.mean, e.stderr));
        }
    }
    rep
}

/// Default `mc-cross` configuration: (3,3), α ∈ {[0,1,0], [1,0,0]}, 0–12 dB.
pub fn mc_cross_default(n: u64, seed: u64) -> SuiteReport {
    let d = Dimensions::new(3, 3).unwrap();
    let alphas = vec![vec![int(0), int(1), int(0)], vec![int(1), int(0), int(0)]];
    let grid: Vec<f64> = (0..=6).map(|i| 2.0 * i as f64).collect();
    mc_cross(&d, &alphas, &grid, n, seed, 4.0)
}
