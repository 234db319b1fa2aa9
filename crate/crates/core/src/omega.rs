//! Exponential polynomials whose rates are integer multiples of a single
//! symbolic parameter `ω > 0`.
//!
//! A term is `c · ω^e · Π θ_i^{a_i} · exp(-ω Σ k_i θ_i)` with rational `c`,
//! integer `e` (usually negative), and nonnegative integers `a_i`, `k_i`.
//! Once every variable is integrated out the result is a Laurent polynomial
//! in `ω`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exact::{falling_factorial, Rational};
use crate::ring::{Limit, RingError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OmegaKey {
    pub omega_pow: i32,
    pub powers: Vec<u32>,
    pub omega_rates: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaPoly {
    vars: Vec<usize>,
    terms: BTreeMap<OmegaKey, Rational>,
}

impl OmegaPoly {
    pub fn one(vars: Vec<usize>) -> Self {
        let n = vars.len();
        let mut terms = BTreeMap::new();
        terms.insert(OmegaKey { omega_pow: 0, powers: vec![0; n], omega_rates: vec![0; n] }, Rational::one());
        OmegaPoly { vars, terms }
    }

    /// `θ^{powers} · exp(-ω Σ rates_i θ_i)`
    pub fn monomial(vars: Vec<usize>, powers: Vec<u32>, omega_rates: Vec<u32>) -> Self {
        assert_eq!(powers.len(), vars.len());
        assert_eq!(omega_rates.len(), vars.len());
        let mut terms = BTreeMap::new();
        terms.insert(OmegaKey { omega_pow: 0, powers, omega_rates }, Rational::one());
        OmegaPoly { vars, terms }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OmegaKey, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn column(&self, label: usize) -> Result<usize, RingError> {
        self.vars.iter().position(|&v| v == label).ok_or(RingError::UnknownVariable(label))
    }

    fn push(&mut self, key: OmegaKey, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn mul(&self, other: &OmegaPoly) -> Result<OmegaPoly, RingError> {
        if self.vars != other.vars {
            return Err(RingError::VariableMismatch { left: self.vars.clone(), right: other.vars.clone() });
        }
        let mut out = OmegaPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = OmegaKey {
                    omega_pow: ka.omega_pow + kb.omega_pow,
                    powers: ka.powers.iter().zip(&kb.powers).map(|(a, b)| a + b).collect(),
                    omega_rates: ka.omega_rates.iter().zip(&kb.omega_rates).map(|(a, b)| a + b).collect(),
                };
                out.push(key, ca * cb);
            }
        }
        Ok(out)
    }

    /// Definite integral over `θ_var`, removing its column.
    pub fn integrate(&self, var: usize, lower: Limit, upper: Limit) -> Result<OmegaPoly, RingError> {
        let col = self.column(var)?;
        for limit in [lower, upper] {
            if let Limit::Variable(j) = limit {
                if j == var {
                    return Err(RingError::BadLimit(var));
                }
                self.column(j)?;
            }
        }
        let mut vars = self.vars.clone();
        vars.remove(col);
        let target = |limit: Limit| match limit {
            Limit::Variable(j) => vars.iter().position(|&v| v == j),
            _ => None,
        };
        let mut out = OmegaPoly { vars: vars.clone(), terms: BTreeMap::new() };
        for (key, coeff) in &self.terms {
            let m = key.powers[col];
            let k = key.omega_rates[col];
            let mut rest = key.clone();
            rest.powers.remove(col);
            rest.omega_rates.remove(col);
            for (limit, sign) in [(upper, 1i64), (lower, -1i64)] {
                let c = coeff * Rational::from_integer(BigInt::from(sign));
                let dst = target(limit);
                if k == 0 {
                    match limit {
                        Limit::Zero => {}
                        Limit::Infinity => return Err(RingError::DivergentIntegral(var)),
                        Limit::Variable(_) => {
                            let mut t = rest.clone();
                            t.powers[dst.unwrap()] += m + 1;
                            out.push(t, c / Rational::from_integer(BigInt::from(m + 1)));
                        }
                    }
                    continue;
                }
                // antiderivative: -Σ_{i=0}^{m} m!/(m-i)! (kω)^{-(i+1)} θ^{m-i} e^{-kωθ}
                let kq = Rational::from_integer(BigInt::from(k));
                match limit {
                    Limit::Infinity => {}
                    Limit::Zero => {
                        let mut t = rest.clone();
                        t.omega_pow -= m as i32 + 1;
                        let v = -(c * Rational::from_integer(falling_factorial(m, m)))
                            / num_traits::pow(kq, m as usize + 1);
                        out.push(t, v);
                    }
                    Limit::Variable(_) => {
                        let d = dst.unwrap();
                        for i in 0..=m {
                            let mut t = rest.clone();
                            t.omega_pow -= i as i32 + 1;
                            t.powers[d] += m - i;
                            t.omega_rates[d] += k;
                            let v = -(&c * Rational::from_integer(falling_factorial(m, i)))
                                / num_traits::pow(kq.clone(), i as usize + 1);
                            out.push(t, v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Coefficients by `ω` exponent, once no variables remain.
    pub fn laurent(&self) -> Option<BTreeMap<i32, Rational>> {
        if !self.vars.is_empty() {
            return None;
        }
        let mut map = BTreeMap::new();
        for (k, c) in &self.terms {
            *map.entry(k.omega_pow).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c: &mut Rational| !c.is_zero());
        Some(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn single_decay_integral() {
        let p = OmegaPoly::monomial(vec![1], vec![2], vec![1]);
        let got = p.integrate(1, Limit::Zero, Limit::Infinity).unwrap().laurent().unwrap();
        assert_eq!(got, BTreeMap::from([(-3, int(2))]));
    }

    #[test]
    fn doubled_rate_scales_coefficient() {
        let p = OmegaPoly::monomial(vec![1], vec![0], vec![2]);
        let got = p.integrate(1, Limit::Zero, Limit::Infinity).unwrap().laurent().unwrap();
        assert_eq!(got, BTreeMap::from([(-1, ratio(1, 2))]));
    }

    #[test]
    fn divergence_and_bad_limits() {
        let p = OmegaPoly::monomial(vec![1, 2], vec![1, 0], vec![0, 1]);
        assert_eq!(p.integrate(1, Limit::Zero, Limit::Infinity), Err(RingError::DivergentIntegral(1)));
        assert_eq!(p.integrate(1, Limit::Zero, Limit::Variable(1)), Err(RingError::BadLimit(1)));
        assert!(p.laurent().is_none());
    }
}
