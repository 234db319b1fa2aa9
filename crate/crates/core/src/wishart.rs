//! Joint density of the ordered eigenvalues of an uncorrelated central
//! Wishart matrix, the relaxed bounding density, and the resulting
//! marginal-pdf upper bound `f̂ = r · exp(-Σ μ_p)`.
//!
//! Eigenvalue labels are 1-based: `μ_1 > μ_2 > … > μ_Y > 0`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{factorial, Rational};
use crate::ring::{ExpPoly, Limit, RingError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WishartError {
    #[error("antenna counts must be positive (got N={n}, M={m})")]
    InvalidDimensions { n: usize, m: usize },
    #[error("every weight is zero; the error-probability bound is undefined")]
    AllZeroAlpha,
    #[error("weights must be nonnegative")]
    NegativeAlpha,
    #[error("expected {expected} weights, got {got}")]
    AlphaLength { expected: usize, got: usize },
    #[error("index set {0:?} is not a nonempty ascending subset of 1..=Y")]
    InvalidSubset(Vec<usize>),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Transmit (`N`) and receive (`M`) antenna counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimensions {
    n: usize,
    m: usize,
}

impl Dimensions {
    pub fn new(n: usize, m: usize) -> Result<Self, WishartError> {
        if n == 0 || m == 0 {
            return Err(WishartError::InvalidDimensions { n, m });
        }
        Ok(Dimensions { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `max(N, M)`
    pub fn x(&self) -> usize {
        self.n.max(self.m)
    }

    /// `min(N, M)`, the number of nonzero eigenvalues.
    pub fn y(&self) -> usize {
        self.n.min(self.m)
    }

    pub fn labels(&self) -> Vec<usize> {
        (1..=self.y()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitCase {
    /// `α_1 = 0`: the largest eigenvalue is integrated out.
    AlphaOneZero,
    /// `α_1 > 0`: `p_1 = 1`.
    AlphaOnePositive,
}

/// Partition of `1..=Y` into weighted (`p`) and unweighted (`s`) indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSplit {
    pub alpha: Vec<Rational>,
    pub p: Vec<usize>,
    pub s: Vec<usize>,
    pub case: SplitCase,
    /// Number of `s` indices below `p_1`; only set for [`SplitCase::AlphaOneZero`].
    pub epsilon: Option<usize>,
    pub alpha_min: Rational,
}

impl IndexSplit {
    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn p1(&self) -> usize {
        self.p[0]
    }

    pub fn y(&self) -> usize {
        self.alpha.len()
    }

    /// Split whose weights are 1 on `p` and 0 elsewhere.
    pub fn from_subset(y: usize, p: &[usize]) -> Result<Self, WishartError> {
        let ascending = p.windows(2).all(|w| w[0] < w[1]);
        if p.is_empty() || !ascending || p[0] == 0 || *p.last().unwrap() > y {
            return Err(WishartError::InvalidSubset(p.to_vec()));
        }
        let alpha =
            (1..=y).map(|i| if p.contains(&i) { Rational::one() } else { Rational::zero() }).collect::<Vec<_>>();
        split_indices(&alpha)
    }

    fn check(&self, dims: &Dimensions) -> Result<(), WishartError> {
        if self.y() != dims.y() {
            return Err(WishartError::AlphaLength { expected: dims.y(), got: self.y() });
        }
        Ok(())
    }
}

pub fn split_indices(alpha: &[Rational]) -> Result<IndexSplit, WishartError> {
    if alpha.iter().any(Signed::is_negative) {
        return Err(WishartError::NegativeAlpha);
    }
    let (p, s): (Vec<usize>, Vec<usize>) = (1..=alpha.len()).partition(|&i| !alpha[i - 1].is_zero());
    if p.is_empty() {
        return Err(WishartError::AllZeroAlpha);
    }
    let alpha_min = p.iter().map(|&i| &alpha[i - 1]).min().unwrap().clone();
    let case = if p[0] == 1 { SplitCase::AlphaOnePositive } else { SplitCase::AlphaOneZero };
    let epsilon = match case {
        SplitCase::AlphaOneZero => Some(s.iter().take_while(|&&i| i < p[0]).count()),
        SplitCase::AlphaOnePositive => None,
    };
    Ok(IndexSplit { alpha: alpha.to_vec(), p, s, case, epsilon, alpha_min })
}

/// Product of `μ_i^{X-Y}` and `(μ_i - μ_j)^2` factors over `labels`, leaving
/// out every factor whose variables all lie in `omit`.
fn vandermonde_product(dims: &Dimensions, labels: &[usize], omit: &[usize]) -> ExpPoly {
    let vars = labels.to_vec();
    let pad = (dims.x() - dims.y()) as u32;
    let mut acc = ExpPoly::one(vars.clone());
    for &i in labels {
        if !omit.contains(&i) {
            acc = &acc * &ExpPoly::monomial(vars.clone(), i, pad).unwrap();
        }
    }
    for (a, &i) in labels.iter().enumerate() {
        for &j in &labels[a + 1..] {
            if omit.contains(&i) && omit.contains(&j) {
                continue;
            }
            let diff = &ExpPoly::variable(vars.clone(), i).unwrap() - &ExpPoly::variable(vars.clone(), j).unwrap();
            acc = &acc * &diff.pow(2);
        }
    }
    acc
}

/// Expanded `ψ = Π μ_i^{X-Y} Π_{i<j} (μ_i - μ_j)^2` over `μ_1..μ_Y`.
pub fn build_psi(dims: &Dimensions) -> ExpPoly {
    vandermonde_product(dims, &dims.labels(), &[])
}

fn decay(vars: &[usize], labels: impl IntoIterator<Item = (usize, Rational)>) -> ExpPoly {
    labels.into_iter().fold(ExpPoly::one(vars.to_vec()), |acc, (label, rate)| {
        &acc * &ExpPoly::exp_decay(vars.to_vec(), label, rate).unwrap()
    })
}

/// `ψ / g`, built directly from the factors of `ψ` that involve at least one
/// unweighted eigenvalue.
pub fn psi_quotient(dims: &Dimensions, split: &IndexSplit) -> Result<ExpPoly, WishartError> {
    split.check(dims)?;
    Ok(vandermonde_product(dims, &dims.labels(), &split.p))
}

/// The factor `g = Π μ_{p_k}^{X-Y} Π (μ_{p_k} - μ_{p_j})^2` over the weighted
/// eigenvalues.
pub fn build_g(dims: &Dimensions, split: &IndexSplit) -> Result<ExpPoly, WishartError> {
    split.check(dims)?;
    Ok(vandermonde_product(dims, &split.p, &[]))
}

/// `ψ · exp(-Σ μ_j)`, optionally divided by the exact normalization constant.
pub fn build_joint_pdf(dims: &Dimensions, normalized: bool) -> Result<ExpPoly, WishartError> {
    let labels = dims.labels();
    let pdf = &build_psi(dims) * &decay(&labels, labels.iter().map(|&i| (i, Rational::one())));
    if normalized {
        let c = normalization_constant(dims)?;
        Ok(pdf.scale(&c.recip()))
    } else {
        Ok(pdf)
    }
}

/// Iterated integral over `∞ > μ_1 > … > μ_Y > 0`.
pub fn integrate_ordered_simplex(p: &ExpPoly, dims: &Dimensions) -> Result<Rational, WishartError> {
    let labels = dims.labels();
    let mut acc = p.embed(labels.clone())?;
    for &i in labels.iter().rev() {
        let upper = if i == 1 { Limit::Infinity } else { Limit::Variable(i - 1) };
        acc = acc.integrate(i, Limit::Zero, upper)?;
    }
    Ok(acc.as_constant().expect("all variables integrated"))
}

/// `∫ ψ e^{-Σμ}` over the ordered simplex: the constant the unnormalized
/// density must be divided by.
pub fn normalization_constant(dims: &Dimensions) -> Result<Rational, WishartError> {
    integrate_ordered_simplex(&build_joint_pdf(dims, false)?, dims)
}

/// `Π_{i=1}^{Y} (X-i)! (Y-i)!`. The engine confirms this equals
/// [`normalization_constant`] for every size it is asked about.
pub fn conjectured_normalization(dims: &Dimensions) -> Rational {
    let (x, y) = (dims.x() as u32, dims.y() as u32);
    let prod = (1..=y).fold(BigInt::one(), |acc, i| acc * factorial(x - i) * factorial(y - i));
    Rational::from_integer(prod)
}

/// Relaxed joint density: exponential factors of the unweighted eigenvalues
/// are dropped, except `e^{-μ_1}` when `α_1 = 0`.
pub fn build_rho_hat(dims: &Dimensions, split: &IndexSplit) -> Result<ExpPoly, WishartError> {
    split.check(dims)?;
    let labels = dims.labels();
    let mut kept: Vec<usize> = split.p.clone();
    if split.case == SplitCase::AlphaOneZero {
        kept.insert(0, 1);
    }
    Ok(&build_psi(dims) * &decay(&labels, kept.into_iter().map(|i| (i, Rational::one()))))
}

/// Closed-form degree bookkeeping for the bound polynomial `r = g · h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeLedger {
    pub d_g_smallest: i64,
    pub d_h_org: i64,
    pub d_h_vanishing: i64,
    pub d_h_added: i64,
    pub d_r_smallest: i64,
}

impl DegreeLedger {
    /// `d_g + d_h_org - d_h_vanishing + d_h_added`
    pub fn composed(&self) -> i64 {
        self.d_g_smallest + self.d_h_org - self.d_h_vanishing + self.d_h_added
    }
}

/// `(N - p_1 + 1)(M - p_1 + 1) - K`
pub fn predicted_smallest_degree(dims: &Dimensions, split: &IndexSplit) -> i64 {
    let (n, m, p1, k) = (dims.n() as i64, dims.m() as i64, split.p1() as i64, split.k() as i64);
    (n - p1 + 1) * (m - p1 + 1) - k
}

pub fn degree_ledger(dims: &Dimensions, split: &IndexSplit) -> DegreeLedger {
    let (x, y) = (dims.x() as i64, dims.y() as i64);
    let k = split.k() as i64;
    let p1 = split.p1() as i64;
    let d_g_smallest = k * (x - y) + k * (k - 1);
    let d_h_org = (y - k) * (x - y) + y * (y - 1) - k * (k - 1);
    let (d_h_vanishing, d_h_added) = match split.case {
        SplitCase::AlphaOneZero => ((p1 - 1) * (x - y) + 2 * y * (p1 - 1) - p1 * (p1 - 1), y - k - p1 + 1),
        SplitCase::AlphaOnePositive => (0, y - k),
    };
    let d_r_smallest = (x - p1 + 1) * (y - p1 + 1) - k;
    DegreeLedger { d_g_smallest, d_h_org, d_h_vanishing, d_h_added, d_r_smallest }
}

/// Upper bound to the marginal pdf of the weighted eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalBound {
    pub dims: Dimensions,
    pub split: IndexSplit,
    /// Vandermonde-type factor over the `p` variables.
    pub g: ExpPoly,
    /// Result of integrating `ψ / g` over the `s` variables.
    pub h: ExpPoly,
    /// `g · h`, a pure polynomial over the `p` variables.
    pub r: ExpPoly,
    pub smallest_degree: u32,
    pub ledger: DegreeLedger,
}

impl MarginalBound {
    /// `f̂ = r · exp(-Σ μ_{p_k})` in the unnormalized convention of `ψ`.
    pub fn density(&self) -> ExpPoly {
        let vars = self.r.vars().to_vec();
        &self.r * &decay(&vars, self.split.p.iter().map(|&i| (i, Rational::one())))
    }

    /// `f̂` divided by the joint-density normalization constant, comparable
    /// with [`exact_marginal`].
    pub fn normalized_density(&self) -> Result<ExpPoly, WishartError> {
        Ok(self.density().scale(&normalization_constant(&self.dims)?.recip()))
    }
}

pub fn marginal_bound(dims: &Dimensions, split: &IndexSplit) -> Result<MarginalBound, WishartError> {
    split.check(dims)?;
    let labels = dims.labels();
    let g = build_g(dims, split)?;
    let mut integrand = psi_quotient(dims, split)?;
    if split.case == SplitCase::AlphaOneZero {
        integrand = &integrand * &decay(&labels, [(1, Rational::one())]);
    }
    // Innermost first: decreasing index, each over (0, μ_{s-1}); μ_1 over
    // (0, ∞) when it is unweighted.
    for &s in split.s.iter().rev() {
        let upper = if s == 1 { Limit::Infinity } else { Limit::Variable(s - 1) };
        integrand = integrand.integrate(s, Limit::Zero, upper)?;
    }
    let h = integrand.embed(split.p.clone())?;
    let r = &g * &h;
    let smallest_degree = r.smallest_degree()?;
    let ledger = degree_ledger(dims, split);
    Ok(MarginalBound { dims: *dims, split: split.clone(), g, h, r, smallest_degree, ledger })
}

fn exact_marginal_from(pdf: ExpPoly, dims: &Dimensions, p: &[usize]) -> Result<ExpPoly, WishartError> {
    let y = dims.y();
    let valid = !p.is_empty() && p.windows(2).all(|w| w[0] < w[1]) && p[0] >= 1 && *p.last().unwrap() <= y;
    if !valid {
        return Err(WishartError::InvalidSubset(p.to_vec()));
    }
    let mut acc = pdf;
    for s in (1..=y).rev().filter(|i| !p.contains(i)) {
        let live = acc.vars().to_vec();
        let lower = live.iter().filter(|&&v| v > s).min().map_or(Limit::Zero, |&v| Limit::Variable(v));
        let upper = live.iter().filter(|&&v| v < s).max().map_or(Limit::Infinity, |&v| Limit::Variable(v));
        acc = acc.integrate(s, lower, upper)?;
    }
    Ok(acc)
}

/// True marginal pdf of `(μ_{p_1}, …, μ_{p_K})`, normalized.
pub fn exact_marginal(dims: &Dimensions, p: &[usize]) -> Result<ExpPoly, WishartError> {
    exact_marginal_from(build_joint_pdf(dims, true)?, dims, p)
}

/// Same integral as [`exact_marginal`] applied to the unnormalized `ψ e^{-Σμ}`.
pub fn exact_marginal_unnormalized(dims: &Dimensions, p: &[usize]) -> Result<ExpPoly, WishartError> {
    exact_marginal_from(build_joint_pdf(dims, false)?, dims, p)
}

pub fn smallest_degree(p: &ExpPoly) -> Result<u32, WishartError> {
    Ok(p.smallest_degree()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn dims(n: usize, m: usize) -> Dimensions {
        Dimensions::new(n, m).unwrap()
    }

    fn alpha(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&a| int(a)).collect()
    }

    fn poly(text: &str) -> ExpPoly {
        ExpPoly::parse_text(text).unwrap()
    }

    #[test]
    fn dimensions() {
        let d = dims(2, 4);
        assert_eq!((d.x(), d.y()), (4, 2));
        assert!(Dimensions::new(0, 3).is_err());
    }

    #[test]
    fn psi_small_cases() {
        assert_eq!(build_psi(&dims(2, 2)), poly("# vars mu_1 mu_2\nmu_1^2\n-2*mu_1*mu_2\nmu_2^2"));
        assert_eq!(build_psi(&dims(3, 2)), poly("# vars mu_1 mu_2\nmu_1^3*mu_2\n-2*mu_1^2*mu_2^2\nmu_1*mu_2^3"));
        assert_eq!(build_psi(&dims(1, 1)), ExpPoly::one(vec![1]));
        assert_eq!(build_psi(&dims(1, 3)), poly("# vars mu_1\nmu_1^2"));
    }

    #[test]
    fn joint_pdf_and_normalization() {
        let d = dims(2, 2);
        let pdf = build_joint_pdf(&d, false).unwrap();
        let want = "mu_1^2 * exp(-mu_1 - mu_2)\n-2 * mu_1 * mu_2 * exp(-mu_1 - mu_2)\nmu_2^2 * exp(-mu_1 - mu_2)";
        assert_eq!(pdf, poly(want));
        assert_eq!(normalization_constant(&d).unwrap(), int(1));
        assert_eq!(build_joint_pdf(&dims(1, 1), true).unwrap(), poly("# vars mu_1\nexp(-mu_1)"));
        assert_eq!(normalization_constant(&dims(3, 3)).unwrap(), int(4));
        assert_eq!(conjectured_normalization(&dims(3, 3)), int(4));
    }

    #[test]
    fn ordered_simplex_integrals() {
        assert_eq!(integrate_ordered_simplex(&poly("# vars mu_1\nexp(-mu_1)"), &dims(1, 1)).unwrap(), int(1));
        let pdf = build_joint_pdf(&dims(2, 2), false).unwrap();
        assert_eq!(integrate_ordered_simplex(&pdf, &dims(2, 2)).unwrap(), int(1));
        let divergent = poly("# vars mu_1 mu_2\nmu_1");
        assert!(matches!(
            integrate_ordered_simplex(&divergent, &dims(2, 2)),
            Err(WishartError::Ring(RingError::DivergentIntegral(1)))
        ));
    }

    #[test]
    fn split_examples() {
        let s = split_indices(&alpha(&[1, 0, 0])).unwrap();
        assert_eq!((s.p.clone(), s.s.clone(), s.k(), s.case), (vec![1], vec![2, 3], 1, SplitCase::AlphaOnePositive));
        assert_eq!(s.alpha_min, int(1));
        assert_eq!(s.epsilon, None);

        let s = split_indices(&[ratio(1, 10), int(0), int(1)]).unwrap();
        assert_eq!((s.p.clone(), s.s.clone(), s.k()), (vec![1, 3], vec![2], 2));
        assert_eq!(s.alpha_min, ratio(1, 10));

        let s = split_indices(&alpha(&[0, 1, 0])).unwrap();
        assert_eq!(
            (s.p.clone(), s.s.clone(), s.case, s.epsilon),
            (vec![2], vec![1, 3], SplitCase::AlphaOneZero, Some(1))
        );

        assert_eq!(split_indices(&alpha(&[0, 0, 0])), Err(WishartError::AllZeroAlpha));
        assert_eq!(split_indices(&alpha(&[1, -1])), Err(WishartError::NegativeAlpha));
        assert!(IndexSplit::from_subset(3, &[2, 1]).is_err());
        assert!(IndexSplit::from_subset(3, &[4]).is_err());
    }

    #[test]
    fn rho_hat_branches() {
        let d = dims(2, 2);
        let zero_first = build_rho_hat(&d, &split_indices(&alpha(&[0, 1])).unwrap()).unwrap();
        assert_eq!(zero_first, build_joint_pdf(&d, false).unwrap());
        let positive = build_rho_hat(&d, &split_indices(&alpha(&[1, 0])).unwrap()).unwrap();
        assert_eq!(positive, &build_psi(&d) * &decay(&[1, 2], [(1, int(1))]));
        let d3 = dims(3, 3);
        let r = build_rho_hat(&d3, &split_indices(&alpha(&[0, 1, 0])).unwrap()).unwrap();
        assert_eq!(r, &build_psi(&d3) * &decay(&[1, 2, 3], [(1, int(1)), (2, int(1))]));
    }

    #[test]
    fn bound_two_by_two() {
        let d = dims(2, 2);
        let mb = marginal_bound(&d, &split_indices(&alpha(&[0, 1])).unwrap()).unwrap();
        assert_eq!(mb.g, ExpPoly::one(vec![2]));
        assert_eq!(mb.h, poly("# vars mu_2\nmu_2^2\n-2*mu_2\n2"));
        assert_eq!(mb.r, mb.h);
        assert_eq!(mb.smallest_degree, 0);

        let mb = marginal_bound(&d, &split_indices(&alpha(&[1, 0])).unwrap()).unwrap();
        assert_eq!(mb.r, poly("# vars mu_1\n1/3*mu_1^3"));
        assert_eq!(mb.smallest_degree, 3);
    }

    #[test]
    fn bound_three_by_three_middle() {
        let d = dims(3, 3);
        let split = split_indices(&alpha(&[0, 1, 0])).unwrap();
        let mb = marginal_bound(&d, &split).unwrap();
        assert_eq!(mb.smallest_degree, 3);
        assert!(mb.r.is_polynomial());
        assert_eq!(mb.r.vars(), &[2]);
    }

    #[test]
    fn ledger_examples() {
        let l = degree_ledger(&dims(3, 3), &split_indices(&alpha(&[0, 1, 0])).unwrap());
        assert_eq!(l, DegreeLedger { d_g_smallest: 0, d_h_org: 6, d_h_vanishing: 4, d_h_added: 1, d_r_smallest: 3 });
        let l = degree_ledger(&dims(4, 4), &split_indices(&alpha(&[1, 0, 0, 0])).unwrap());
        assert_eq!(l.d_r_smallest, 15);
        assert_eq!(l.composed(), 15);
        let l = degree_ledger(&dims(2, 2), &split_indices(&alpha(&[0, 1])).unwrap());
        assert_eq!(l.d_r_smallest, 0);
    }

    #[test]
    fn exact_marginals() {
        assert_eq!(exact_marginal(&dims(1, 1), &[1]).unwrap(), poly("# vars mu_1\nexp(-mu_1)"));
        assert_eq!(exact_marginal(&dims(2, 2), &[2]).unwrap(), poly("# vars mu_2\n2*exp(-2*mu_2)"));
        assert_eq!(exact_marginal(&dims(2, 2), &[1, 2]).unwrap(), build_joint_pdf(&dims(2, 2), true).unwrap());
        assert!(exact_marginal(&dims(2, 2), &[]).is_err());
        assert!(exact_marginal(&dims(2, 2), &[3]).is_err());
    }

    #[test]
    fn smallest_degree_examples() {
        assert_eq!(smallest_degree(&poly("mu_2^2\n-2*mu_2\n2")).unwrap(), 0);
        assert_eq!(smallest_degree(&poly("1/3*mu_1^3")).unwrap(), 3);
        assert_eq!(smallest_degree(&build_psi(&dims(3, 2))).unwrap(), 4);
        assert!(matches!(smallest_degree(&ExpPoly::zero(vec![1])), Err(WishartError::Ring(RingError::ZeroPolynomial))));
    }
}
