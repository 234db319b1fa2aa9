//! Parser for the one-term-per-line text form written by `ExpPoly`'s
//! `Display` impl:
//!
//! ```text
//! # vars mu_1 mu_2
//! -1/3 * mu_1^2 * mu_2 * exp(-1/1*mu_1 - 2/1*mu_2)
//! ```
//!
//! The header is optional; without it the variable list is the sorted set of
//! labels referenced by the terms.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::exact::{parse_rational, Rational};
use crate::ring::{ExpPoly, ExpTerm, RingError};

struct RawTerm {
    coeff: Rational,
    powers: BTreeMap<usize, u32>,
    rates: BTreeMap<usize, Rational>,
}

fn parse_label(s: &str, line: usize) -> Result<usize, RingError> {
    s.trim()
        .strip_prefix("mu_")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| RingError::Parse { line, msg: format!("expected mu_<label>, got {s:?}") })
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_exponential(body: &str, line: usize, term: &mut RawTerm) -> Result<(), RingError> {
    let compact: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    let rest = compact
        .strip_prefix('-')
        .ok_or_else(|| RingError::Parse { line, msg: "exponent must be a negated sum".into() })?;
    for piece in rest.split('-') {
        let (rate, label) = match piece.rsplit_once('*') {
            Some((c, v)) => {
                (parse_rational(c).map_err(|e| RingError::Parse { line, msg: e.to_string() })?, parse_label(v, line)?)
            }
            None => (Rational::one(), parse_label(piece, line)?),
        };
        *term.rates.entry(label).or_insert_with(Rational::zero) += rate;
    }
    Ok(())
}

fn parse_term(text: &str, line: usize) -> Result<RawTerm, RingError> {
    let mut term = RawTerm { coeff: Rational::one(), powers: BTreeMap::new(), rates: BTreeMap::new() };
    for factor in split_top_level(text) {
        let f = factor.trim();
        if let Some(body) = f.strip_prefix("exp(").and_then(|b| b.strip_suffix(')')) {
            parse_exponential(body, line, &mut term)?;
        } else if f.starts_with("mu_") {
            let (label, power) = match f.split_once('^') {
                Some((v, a)) => (
                    parse_label(v, line)?,
                    a.trim().parse::<u32>().map_err(|_| RingError::Parse { line, msg: format!("bad power {a:?}") })?,
                ),
                None => (parse_label(f, line)?, 1),
            };
            *term.powers.entry(label).or_insert(0) += power;
        } else {
            let c = parse_rational(f).map_err(|e| RingError::Parse { line, msg: e.to_string() })?;
            term.coeff *= c;
        }
    }
    Ok(term)
}

pub(crate) fn parse(text: &str) -> Result<ExpPoly, RingError> {
    let mut header: Option<Vec<usize>> = None;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(list) = comment.trim().strip_prefix("vars") {
                let labels = list.split_whitespace().map(|s| parse_label(s, line_no)).collect::<Result<Vec<_>, _>>()?;
                header = Some(labels);
            }
            continue;
        }
        if trimmed == "0" {
            continue;
        }
        raw.push((line_no, parse_term(trimmed, line_no)?));
    }

    let vars = header.unwrap_or_else(|| {
        let mut seen = BTreeSet::new();
        for (_, t) in &raw {
            seen.extend(t.powers.keys().copied());
            seen.extend(t.rates.keys().copied());
        }
        seen.into_iter().collect()
    });

    let mut terms = Vec::with_capacity(raw.len());
    for (line, t) in raw {
        let mut powers = vec![0; vars.len()];
        let mut rates = vec![Rational::zero(); vars.len()];
        for (label, a) in t.powers {
            let col = vars
                .iter()
                .position(|&v| v == label)
                .ok_or(RingError::Parse { line, msg: format!("mu_{label} is not in the declared variable list") })?;
            powers[col] = a;
        }
        for (label, r) in t.rates {
            let col = vars
                .iter()
                .position(|&v| v == label)
                .ok_or(RingError::Parse { line, msg: format!("mu_{label} is not in the declared variable list") })?;
            rates[col] = r;
        }
        terms.push(ExpTerm { coeff: t.coeff, powers, rates });
    }
    ExpPoly::from_terms(vars, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn reads_written_form() {
        let text = "# vars mu_1 mu_2\n7/1\n-1/3 * mu_1^2 * mu_2 * exp(-1/1*mu_1 - 5/2*mu_2)\n";
        let p = ExpPoly::parse_text(text).unwrap();
        assert_eq!(p.vars(), &[1, 2]);
        assert_eq!(p.len(), 2);
        assert_eq!(p.to_text(), text);
        let terms = p.to_terms();
        let t = terms.iter().find(|t| t.powers == vec![2, 1]).unwrap();
        assert_eq!(t.coeff, ratio(-1, 3));
        assert_eq!(t.rates, vec![int(1), ratio(5, 2)]);
    }

    #[test]
    fn infers_variables_without_header() {
        let p = ExpPoly::parse_text("2 * mu_3 * exp(-mu_5)\n").unwrap();
        assert_eq!(p.vars(), &[3, 5]);
        assert_eq!(ExpPoly::parse_text("0\n").unwrap(), ExpPoly::zero(vec![]));
    }

    #[test]
    fn rejects_garbage() {
        assert!(ExpPoly::parse_text("2 * nu_1").is_err());
        assert!(ExpPoly::parse_text("# vars mu_1\n2 * mu_2").is_err());
        assert!(ExpPoly::parse_text("2 * exp(mu_1)").is_err());
        assert!(ExpPoly::parse_text("x").is_err());
    }
}
