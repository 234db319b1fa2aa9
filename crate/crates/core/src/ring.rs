//! Sparse exponential polynomials over exact rationals.
//!
//! An [`ExpPoly`] is a finite sum of terms
//! `c · Π μ_i^{a_i} · exp(-Σ r_i μ_i)` with rational `c`, nonnegative integer
//! powers `a_i` and nonnegative rational rates `r_i`. Terms are stored in a
//! `BTreeMap` keyed by `(powers, rates)`, so two polynomials are equal exactly
//! when their canonical forms are equal.
//!
//! Variables are identified by labels (`usize`), printed as `mu_<label>`. The
//! live label list is part of the polynomial; integrating a variable removes
//! its column.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{self, falling_factorial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("mu_{0} is not a live variable")]
    UnknownVariable(usize),
    #[error("duplicate variable label mu_{0}")]
    DuplicateVariable(usize),
    #[error("integral over mu_{0} diverges: a term has zero rate at an infinite limit")]
    DivergentIntegral(usize),
    #[error("limit for mu_{0} references the integration variable itself")]
    BadLimit(usize),
    #[error("exponential rates must be nonnegative")]
    NegativeRate,
    #[error("term has {got} columns, polynomial has {expected}")]
    TermLength { expected: usize, got: usize },
    #[error("exact evaluation is only defined for pure polynomials")]
    RationalExpUnsupported,
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("the zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("expected a pure polynomial (all exponential rates zero)")]
    NotPolynomial,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One end of an integration interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Limit {
    Zero,
    Infinity,
    /// Another live variable, by label.
    Variable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub powers: Vec<u32>,
    pub rates: Vec<Rational>,
}

/// A single term with its coefficient, used for construction and iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpTerm {
    pub coeff: Rational,
    pub powers: Vec<u32>,
    pub rates: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpPoly {
    vars: Vec<usize>,
    terms: BTreeMap<TermKey, Rational>,
}

fn check_labels(vars: &[usize]) -> Result<(), RingError> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(RingError::DuplicateVariable(*v));
        }
    }
    Ok(())
}

impl ExpPoly {
    pub fn zero(vars: Vec<usize>) -> Self {
        check_labels(&vars).expect("variable labels must be distinct");
        ExpPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<usize>, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        let key = p.unit_key();
        p.push(key, c);
        p
    }

    pub fn one(vars: Vec<usize>) -> Self {
        Self::constant(vars, Rational::one())
    }

    /// The monomial `μ_label`.
    pub fn variable(vars: Vec<usize>, label: usize) -> Result<Self, RingError> {
        Self::monomial(vars, label, 1)
    }

    /// `μ_label^power`.
    pub fn monomial(vars: Vec<usize>, label: usize, power: u32) -> Result<Self, RingError> {
        let mut p = Self::zero(vars);
        let col = p.column(label)?;
        let mut key = p.unit_key();
        key.powers[col] = power;
        p.push(key, Rational::one());
        Ok(p)
    }

    /// `exp(-rate · μ_label)`.
    pub fn exp_decay(vars: Vec<usize>, label: usize, rate: Rational) -> Result<Self, RingError> {
        if rate.is_negative() {
            return Err(RingError::NegativeRate);
        }
        let mut p = Self::zero(vars);
        let col = p.column(label)?;
        let mut key = p.unit_key();
        key.rates[col] = rate;
        p.push(key, Rational::one());
        Ok(p)
    }

    pub fn from_terms(vars: Vec<usize>, terms: impl IntoIterator<Item = ExpTerm>) -> Result<Self, RingError> {
        check_labels(&vars)?;
        let mut p = ExpPoly { vars, terms: BTreeMap::new() };
        for t in terms {
            let n = p.vars.len();
            if t.powers.len() != n || t.rates.len() != n {
                return Err(RingError::TermLength { expected: n, got: t.powers.len().max(t.rates.len()) });
            }
            if t.rates.iter().any(Signed::is_negative) {
                return Err(RingError::NegativeRate);
            }
            p.push(TermKey { powers: t.powers, rates: t.rates }, t.coeff);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    /// Same as [`ExpPoly::is_zero`].
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Rational)> {
        self.terms.iter()
    }

    pub fn to_terms(&self) -> Vec<ExpTerm> {
        self.terms
            .iter()
            .map(|(k, c)| ExpTerm { coeff: c.clone(), powers: k.powers.clone(), rates: k.rates.clone() })
            .collect()
    }

    /// The coefficient of the constant term, if every other term is absent.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                let unit = k.powers.iter().all(|&a| a == 0) && k.rates.iter().all(Zero::is_zero);
                unit.then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn column(&self, label: usize) -> Result<usize, RingError> {
        self.vars.iter().position(|&v| v == label).ok_or(RingError::UnknownVariable(label))
    }

    fn unit_key(&self) -> TermKey {
        let n = self.vars.len();
        TermKey { powers: vec![0; n], rates: vec![Rational::zero(); n] }
    }

    fn push(&mut self, key: TermKey, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn same_vars(&self, other: &ExpPoly) -> Result<(), RingError> {
        if self.vars != other.vars {
            return Err(RingError::VariableMismatch { left: self.vars.clone(), right: other.vars.clone() });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &ExpPoly) -> Result<ExpPoly, RingError> {
        self.same_vars(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &ExpPoly) -> Result<ExpPoly, RingError> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &ExpPoly) -> Result<ExpPoly, RingError> {
        self.same_vars(other)?;
        let mut out = ExpPoly::zero(self.vars.clone());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let powers = ka.powers.iter().zip(&kb.powers).map(|(a, b)| a + b).collect();
                let rates = ka.rates.iter().zip(&kb.rates).map(|(a, b)| a + b).collect();
                out.push(TermKey { powers, rates }, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn scale(&self, factor: &Rational) -> ExpPoly {
        if factor.is_zero() {
            return ExpPoly::zero(self.vars.clone());
        }
        ExpPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(k, c)| (k.clone(), c * factor)).collect() }
    }

    pub fn pow(&self, exponent: u32) -> ExpPoly {
        let mut acc = ExpPoly::one(self.vars.clone());
        for _ in 0..exponent {
            acc = &acc * self;
        }
        acc
    }

    /// Re-expresses the polynomial over a larger (or reordered) label list.
    pub fn embed(&self, vars: Vec<usize>) -> Result<ExpPoly, RingError> {
        check_labels(&vars)?;
        let cols = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).ok_or(RingError::UnknownVariable(*v)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = ExpPoly::zero(vars);
        for (k, c) in &self.terms {
            let mut key = out.unit_key();
            for (src, &dst) in cols.iter().enumerate() {
                key.powers[dst] = k.powers[src];
                key.rates[dst] = k.rates[src].clone();
            }
            out.push(key, c.clone());
        }
        Ok(out)
    }

    /// True when every exponential rate is zero.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|k| k.rates.iter().all(Zero::is_zero))
    }

    pub fn total_degree_range(&self) -> Option<(u32, u32)> {
        let degrees = self.terms.keys().map(|k| k.powers.iter().sum::<u32>());
        degrees.fold(None, |acc, d| match acc {
            None => Some((d, d)),
            Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
        })
    }

    /// Minimum total degree over the terms of a nonzero pure polynomial.
    pub fn smallest_degree(&self) -> Result<u32, RingError> {
        if !self.is_polynomial() {
            return Err(RingError::NotPolynomial);
        }
        self.total_degree_range().map(|(lo, _)| lo).ok_or(RingError::ZeroPolynomial)
    }

    fn check_limit(&self, var: usize, limit: Limit) -> Result<(), RingError> {
        if let Limit::Variable(j) = limit {
            if j == var {
                return Err(RingError::BadLimit(var));
            }
            self.column(j)?;
        }
        Ok(())
    }

    /// Definite integral over `μ_var` from `lower` to `upper`. The result
    /// lives on the label list with `var` removed.
    pub fn integrate(&self, var: usize, lower: Limit, upper: Limit) -> Result<ExpPoly, RingError> {
        let col = self.column(var)?;
        self.check_limit(var, lower)?;
        self.check_limit(var, upper)?;

        let mut vars = self.vars.clone();
        vars.remove(col);
        let target = |limit: Limit| match limit {
            Limit::Variable(j) => Some(vars.iter().position(|&v| v == j).unwrap()),
            _ => None,
        };
        let (lower_col, upper_col) = (target(lower), target(upper));
        let mut out = ExpPoly::zero(vars.clone());

        for (key, coeff) in &self.terms {
            let m = key.powers[col];
            let rate = &key.rates[col];
            let mut rest = key.clone();
            rest.powers.remove(col);
            rest.rates.remove(col);
            for (limit, limit_col, sign) in [(upper, upper_col, 1i64), (lower, lower_col, -1i64)] {
                let c = coeff * Rational::from_integer(BigInt::from(sign));
                antiderivative_at(&mut out, &rest, &c, m, rate, limit, limit_col)
                    .map_err(|()| RingError::DivergentIntegral(var))?;
            }
        }
        Ok(out)
    }

    /// Replaces `μ_var` by `value` (zero, another live variable, or the limit
    /// at infinity) and removes its column.
    pub fn substitute(&self, var: usize, value: Limit) -> Result<ExpPoly, RingError> {
        let col = self.column(var)?;
        self.check_limit(var, value)?;
        let mut vars = self.vars.clone();
        vars.remove(col);
        let dst = match value {
            Limit::Variable(j) => Some(vars.iter().position(|&v| v == j).unwrap()),
            _ => None,
        };
        let mut out = ExpPoly::zero(vars);
        for (key, coeff) in &self.terms {
            let m = key.powers[col];
            let rate = key.rates[col].clone();
            let mut rest = key.clone();
            rest.powers.remove(col);
            rest.rates.remove(col);
            match value {
                Limit::Zero => {
                    if m == 0 {
                        out.push(rest, coeff.clone());
                    }
                }
                Limit::Infinity => {
                    if rate.is_zero() {
                        if m > 0 {
                            return Err(RingError::DivergentIntegral(var));
                        }
                        out.push(rest, coeff.clone());
                    }
                }
                Limit::Variable(_) => {
                    let d = dst.unwrap();
                    rest.powers[d] += m;
                    rest.rates[d] += rate;
                    out.push(rest, coeff.clone());
                }
            }
        }
        Ok(out)
    }

    /// Exact value of a pure polynomial at a rational point.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational, RingError> {
        if point.len() != self.vars.len() {
            return Err(RingError::PointLength { expected: self.vars.len(), got: point.len() });
        }
        let mut total = Rational::zero();
        for (key, coeff) in &self.terms {
            if key.rates.iter().any(|r| !r.is_zero()) {
                return Err(RingError::RationalExpUnsupported);
            }
            let mut t = coeff.clone();
            for (x, &a) in point.iter().zip(&key.powers) {
                t *= num_traits::pow(x.clone(), a as usize);
            }
            total += t;
        }
        Ok(total)
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64, RingError> {
        if point.len() != self.vars.len() {
            return Err(RingError::PointLength { expected: self.vars.len(), got: point.len() });
        }
        let mut total = 0.0;
        for (key, coeff) in &self.terms {
            let mut log_part = 0.0;
            let mut t = exact::to_f64(coeff);
            for ((x, &a), r) in point.iter().zip(&key.powers).zip(&key.rates) {
                t *= x.powi(a as i32);
                log_part -= exact::to_f64(r) * x;
            }
            total += t * log_part.exp();
        }
        Ok(total)
    }

    /// Text form with a `# vars` header line, parseable by [`ExpPoly::parse_text`].
    pub fn to_text(&self) -> String {
        let labels: Vec<String> = self.vars.iter().map(|v| format!("mu_{v}")).collect();
        format!("# vars {}\n{self}", labels.join(" "))
    }

    pub fn parse_text(text: &str) -> Result<ExpPoly, RingError> {
        crate::ring_text::parse(text)
    }
}

/// Adds `coeff · rest · A(limit)` to `out`, where `A` is the antiderivative of
/// `θ^m e^{-rate θ}`. Returns `Err(())` if the limit is infinite and the term
/// does not decay.
fn antiderivative_at(
    out: &mut ExpPoly,
    rest: &TermKey,
    coeff: &Rational,
    m: u32,
    rate: &Rational,
    limit: Limit,
    limit_col: Option<usize>,
) -> Result<(), ()> {
    if rate.is_zero() {
        // θ^{m+1} / (m+1)
        let c = coeff / Rational::from_integer(BigInt::from(m + 1));
        match limit {
            Limit::Zero => {}
            Limit::Infinity => return Err(()),
            Limit::Variable(_) => {
                let mut key = rest.clone();
                key.powers[limit_col.unwrap()] += m + 1;
                out.push(key, c);
            }
        }
        return Ok(());
    }
    // -Σ_{i=0}^{m} m!/(m-i)! · rate^{-(i+1)} · θ^{m-i} · e^{-rate θ}
    match limit {
        Limit::Infinity => {}
        Limit::Zero => {
            let denom = num_traits::pow(rate.clone(), m as usize + 1);
            let c = -(coeff * Rational::from_integer(falling_factorial(m, m))) / denom;
            out.push(rest.clone(), c);
        }
        Limit::Variable(_) => {
            let col = limit_col.unwrap();
            let mut denom = rate.clone();
            for i in 0..=m {
                let mut key = rest.clone();
                key.powers[col] += m - i;
                key.rates[col] += rate;
                let c = -(coeff * Rational::from_integer(falling_factorial(m, i))) / &denom;
                out.push(key, c);
                denom *= rate;
            }
        }
    }
    Ok(())
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (key, coeff) in &self.terms {
            let mut line = exact::to_literal(coeff);
            for (v, &a) in self.vars.iter().zip(&key.powers) {
                match a {
                    0 => {}
                    1 => line.push_str(&format!(" * mu_{v}")),
                    _ => line.push_str(&format!(" * mu_{v}^{a}")),
                }
            }
            let rates: Vec<String> = self
                .vars
                .iter()
                .zip(&key.rates)
                .filter(|(_, r)| !r.is_zero())
                .map(|(v, r)| format!("{}*mu_{v}", exact::to_literal(r)))
                .collect();
            if !rates.is_empty() {
                line.push_str(&format!(" * exp(-{})", rates.join(" - ")));
            }
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&ExpPoly> for &ExpPoly {
            type Output = ExpPoly;
            fn $method(self, rhs: &ExpPoly) -> ExpPoly {
                self.$checked(rhs).expect("operands must share a variable list")
            }
        }
        impl std::ops::$tr<ExpPoly> for ExpPoly {
            type Output = ExpPoly;
            fn $method(self, rhs: ExpPoly) -> ExpPoly {
                (&self).$checked(&rhs).expect("operands must share a variable list")
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl std::ops::Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        ExpPoly::neg(self)
    }
}
