//! Pairwise-error-probability expectations `E[exp(-γ Σ α_j μ_j)]`: exact
//! values, the polynomial upper bound, and diversity-order extraction.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::exact::{self, Rational};
use crate::montecarlo::{self, McError};
use crate::omega::OmegaPoly;
use crate::ring::{ExpPoly, Limit};
use crate::wishart::{
    build_psi, integrate_ordered_simplex, marginal_bound, normalization_constant, split_indices, Dimensions,
    MarginalBound, WishartError,
};

/// Largest `min(N, M)` the exact engine accepts. The Vandermonde expansion
/// and the nested integration blow up combinatorially beyond this.
pub const MAX_EXACT_Y: usize = 4;

pub const DEFAULT_SLOPE_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PepError {
    #[error(transparent)]
    Wishart(#[from] WishartError),
    #[error("exact evaluation supports min(N, M) <= {MAX_EXACT_Y}; got min(N, M) = {0}")]
    Envelope(usize),
    #[error("signal-to-noise ratio must be nonnegative")]
    NegativeGamma,
    #[error("slope fit needs at least 2 finite positive points, got {0}")]
    InsufficientPoints(usize),
    #[error("grid must be strictly ascending")]
    UnsortedGrid,
    #[error(transparent)]
    MonteCarlo(#[from] McError),
}

impl From<crate::ring::RingError> for PepError {
    fn from(e: crate::ring::RingError) -> Self {
        PepError::Wishart(WishartError::Ring(e))
    }
}

fn check_envelope(dims: &Dimensions) -> Result<(), PepError> {
    if dims.y() > MAX_EXACT_Y {
        return Err(PepError::Envelope(dims.y()));
    }
    Ok(())
}

fn check_alpha(dims: &Dimensions, alpha: &[Rational]) -> Result<(), PepError> {
    if alpha.len() != dims.y() {
        return Err(WishartError::AlphaLength { expected: dims.y(), got: alpha.len() }.into());
    }
    split_indices(alpha)?;
    Ok(())
}

/// Exact `E[exp(-γ Σ α_j μ_j)]` under the normalized joint density.
pub fn exact_pep(dims: &Dimensions, alpha: &[Rational], gamma: &Rational) -> Result<Rational, PepError> {
    check_envelope(dims)?;
    check_alpha(dims, alpha)?;
    if gamma.is_negative() {
        return Err(PepError::NegativeGamma);
    }
    let norm = normalization_constant(dims)?;
    Ok(unnormalized_pep(dims, alpha, gamma)? / norm)
}

fn unnormalized_pep(dims: &Dimensions, alpha: &[Rational], gamma: &Rational) -> Result<Rational, PepError> {
    let labels = dims.labels();
    let mut integrand = build_psi(dims);
    for (&i, a) in labels.iter().zip(alpha) {
        let rate = Rational::one() + gamma * a;
        integrand = &integrand * &ExpPoly::exp_decay(labels.clone(), i, rate)?;
    }
    Ok(integrate_ordered_simplex(&integrand, dims)?)
}

/// Laurent polynomial in `ω` produced by an ordered exponential integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedIntegralResult {
    /// Coefficient by `ω` exponent (the exponents are negative).
    pub laurent: BTreeMap<i32, Rational>,
    /// Least `n` such that `ω^{-n}` has a nonzero coefficient.
    pub leading_exponent: u32,
    pub leading_coeff: Rational,
}

impl OrderedIntegralResult {
    fn from_laurent(laurent: BTreeMap<i32, Rational>) -> Self {
        let (&top, coeff) = laurent.iter().next_back().expect("nonzero Laurent polynomial");
        assert!(top <= 0, "positive power of omega in an ordered integral");
        OrderedIntegralResult { leading_exponent: (-top) as u32, leading_coeff: coeff.clone(), laurent }
    }

    pub fn evaluate(&self, omega: &Rational) -> Rational {
        let inv = omega.recip();
        self.laurent.iter().map(|(&e, c)| c * num_traits::pow(inv.clone(), (-e) as usize)).sum()
    }
}

/// Bookkeeping for one step of the nested integration: after integrating
/// `θ_K, …, θ_{K-k+1}`, every term's `ω^{-1}` exponent plus its (integrated)
/// power of `θ_{K-k}` should equal `Γ_k = Σ_{i=1}^{k} β_{K-i+1} + k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaStep {
    pub k: usize,
    pub expected: i64,
    pub observed: Vec<i64>,
}

impl GammaStep {
    pub fn holds(&self) -> bool {
        self.observed.iter().all(|&o| o == self.expected)
    }
}

/// `∫_{∞>θ_1>…>θ_K>0} Π θ_k^{β_k} e^{-ω Σ θ_k}` with the per-step `Γ_k`
/// trace.
pub fn ordered_exp_integral_traced(beta: &[u32]) -> (OrderedIntegralResult, Vec<GammaStep>) {
    let k_total = beta.len();
    assert!(k_total >= 1, "ordered integral needs at least one variable");
    let vars: Vec<usize> = (1..=k_total).collect();
    let mut acc = OmegaPoly::monomial(vars.clone(), beta.to_vec(), vec![1; k_total]);
    let mut steps = Vec::new();
    for k in 1..=k_total {
        let var = k_total - k + 1;
        let upper = if var == 1 { Limit::Infinity } else { Limit::Variable(var - 1) };
        acc = acc.integrate(var, Limit::Zero, upper).expect("ordered exponential integral converges");
        if var > 1 {
            let outer = var - 1;
            let col = acc.column(outer).unwrap();
            let own = beta[outer - 1] as i64;
            let mut observed: Vec<i64> =
                acc.terms().map(|(t, _)| -(t.omega_pow as i64) + t.powers[col] as i64 - own).collect();
            observed.sort_unstable();
            observed.dedup();
            let expected = beta[k_total - k..].iter().map(|&b| b as i64).sum::<i64>() + k as i64;
            steps.push(GammaStep { k, expected, observed });
        }
    }
    (OrderedIntegralResult::from_laurent(acc.laurent().unwrap()), steps)
}

pub fn ordered_exp_integral(beta: &[u32]) -> OrderedIntegralResult {
    ordered_exp_integral_traced(beta).0
}

/// Applies the ordered exponential integral termwise to `r`, giving the
/// bound on `E[exp(-γ α_min Σ μ_p)]` as a Laurent polynomial in
/// `ω = 1 + γ α_min` (unnormalized convention).
pub fn bound_expectation(mb: &MarginalBound) -> OrderedIntegralResult {
    let mut cache: HashMap<Vec<u32>, OrderedIntegralResult> = HashMap::new();
    let mut laurent: BTreeMap<i32, Rational> = BTreeMap::new();
    for (key, coeff) in mb.r.terms() {
        let inner = cache.entry(key.powers.clone()).or_insert_with(|| ordered_exp_integral(&key.powers));
        for (&e, c) in &inner.laurent {
            *laurent.entry(e).or_insert_with(Rational::zero) += coeff * c;
        }
    }
    laurent.retain(|_, c| !c.is_zero());
    OrderedIntegralResult::from_laurent(laurent)
}

/// `(N - p_1 + 1)(M - p_1 + 1)`
pub fn diversity_exponent(dims: &Dimensions, alpha: &[Rational]) -> Result<u32, PepError> {
    check_alpha(dims, alpha)?;
    let p1 = split_indices(alpha)?.p1();
    Ok(((dims.n() - p1 + 1) * (dims.m() - p1 + 1)) as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveSource {
    Exact,
    Bound,
    MonteCarlo,
}

impl CurveSource {
    pub fn name(&self) -> &'static str {
        match self {
            CurveSource::Exact => "exact",
            CurveSource::Bound => "bound",
            CurveSource::MonteCarlo => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub gamma_db: f64,
    pub gamma: Rational,
    /// Present for exact and bound sources.
    pub exact: Option<Rational>,
    pub value: f64,
    /// Present for Monte-Carlo sources.
    pub stderr: Option<f64>,
}

impl CurvePoint {
    fn log10_value(&self) -> Option<f64> {
        match &self.exact {
            Some(v) if v.is_positive() => Some(exact::log10(v)),
            Some(_) => None,
            None => (self.value > 0.0 && self.value.is_finite()).then(|| self.value.log10()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PepCurve {
    pub dims: Dimensions,
    pub alpha: Vec<Rational>,
    pub source: CurveSource,
    pub points: Vec<CurvePoint>,
    pub fitted_slope: f64,
    pub predicted_exponent: u32,
}

fn check_grid(grid_db: &[f64]) -> Result<(), PepError> {
    if grid_db.windows(2).any(|w| w[0] >= w[1]) || grid_db.iter().any(|g| !g.is_finite()) {
        return Err(PepError::UnsortedGrid);
    }
    Ok(())
}

/// Exact or bound curve over a dB grid; slope fitted over the last `window`
/// points.
pub fn pep_curve(
    dims: &Dimensions,
    alpha: &[Rational],
    grid_db: &[f64],
    source: CurveSource,
    window: usize,
) -> Result<PepCurve, PepError> {
    check_envelope(dims)?;
    check_alpha(dims, alpha)?;
    check_grid(grid_db)?;
    let gammas: Vec<Rational> = grid_db.iter().map(|&db| exact::db_to_gamma(db)).collect();
    let values: Vec<Rational> = match source {
        CurveSource::Exact => {
            let norm = normalization_constant(dims)?;
            gammas.par_iter().map(|g| unnormalized_pep(dims, alpha, g).map(|v| v / &norm)).collect::<Result<_, _>>()?
        }
        CurveSource::Bound => {
            let split = split_indices(alpha)?;
            let mb = marginal_bound(dims, &split)?;
            let laurent = bound_expectation(&mb);
            let norm = normalization_constant(dims)?;
            gammas.iter().map(|g| laurent.evaluate(&(Rational::one() + g * &split.alpha_min)) / &norm).collect()
        }
        CurveSource::MonteCarlo => {
            return Err(McError::InvalidArgument(
                "Monte-Carlo curves need a sample count and seed; use mc_curve".into(),
            )
            .into())
        }
    };
    let points = grid_db
        .iter()
        .zip(gammas)
        .zip(values)
        .map(|((&gamma_db, gamma), v)| CurvePoint {
            gamma_db,
            gamma,
            value: exact::to_f64(&v),
            exact: Some(v),
            stderr: None,
        })
        .collect();
    let mut curve = PepCurve {
        dims: *dims,
        alpha: alpha.to_vec(),
        source,
        points,
        fitted_slope: f64::NAN,
        predicted_exponent: diversity_exponent(dims, alpha)?,
    };
    if curve.points.len() >= 2 {
        curve.fitted_slope = slope_fit(&curve, window.min(curve.points.len()))?;
    }
    Ok(curve)
}

/// Monte-Carlo curve from `samples` channels shared across the grid. With
/// `with_exact` each point also carries the exact value, which needs
/// `min(N, M) <= MAX_EXACT_Y`. The slope is NaN when fewer than two of the
/// last `window` estimates are positive.
pub fn mc_curve(
    dims: &Dimensions,
    alpha: &[Rational],
    grid_db: &[f64],
    samples: u64,
    seed: u64,
    window: usize,
    with_exact: bool,
) -> Result<PepCurve, PepError> {
    if with_exact {
        check_envelope(dims)?;
    }
    check_alpha(dims, alpha)?;
    check_grid(grid_db)?;
    let gammas: Vec<Rational> = grid_db.iter().map(|&db| exact::db_to_gamma(db)).collect();
    let gammas_f: Vec<f64> = gammas.iter().map(exact::to_f64).collect();
    let alpha_f: Vec<f64> = alpha.iter().map(exact::to_f64).collect();
    let est = montecarlo::estimate_pep_grid(dims, &[alpha_f], &gammas_f, samples, seed)?;
    let exact_values: Vec<Option<Rational>> = if with_exact {
        let norm = normalization_constant(dims)?;
        gammas
            .par_iter()
            .map(|g| unnormalized_pep(dims, alpha, g).map(|v| Some(v / &norm)))
            .collect::<Result<_, _>>()?
    } else {
        vec![None; gammas.len()]
    };
    let points = grid_db
        .iter()
        .zip(gammas)
        .zip(&est[0])
        .map(|((&gamma_db, gamma), e)| CurvePoint {
            gamma_db,
            gamma,
            exact: None,
            value: e.mean,
            stderr: Some(e.stderr),
        })
        .collect();
    let mut curve = PepCurve {
        dims: *dims,
        alpha: alpha.to_vec(),
        source: CurveSource::MonteCarlo,
        points,
        fitted_slope: f64::NAN,
        predicted_exponent: diversity_exponent(dims, alpha)?,
    };
    // Fit before attaching exact values so the slope reflects the estimates.
    curve.fitted_slope = slope_fit(&curve, window.min(curve.points.len())).unwrap_or(f64::NAN);
    for (p, v) in curve.points.iter_mut().zip(exact_values) {
        p.exact = v;
    }
    Ok(curve)
}

/// Least-squares slope of `log10(value)` against `log10(γ)` over the last
/// `window` points.
pub fn slope_fit(curve: &PepCurve, window: usize) -> Result<f64, PepError> {
    let start = curve.points.len().saturating_sub(window);
    let pts: Vec<(f64, f64)> = curve.points[start..]
        .iter()
        .filter_map(|p| {
            let lv = p.log10_value()?;
            p.gamma.is_positive().then(|| (exact::log10(&p.gamma), lv))
        })
        .collect();
    if window < 2 || pts.len() < window {
        return Err(PepError::InsufficientPoints(pts.len().min(window)));
    }
    least_squares_slope(&pts).ok_or(PepError::InsufficientPoints(pts.len()))
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
