//! Shared inputs for the engine benchmarks.

use wishart_core::exact::parse_rational;
use wishart_core::{Dimensions, Rational};

/// Benchmark configurations: `(N, M, weights)`.
pub const CASES: [(usize, usize, &str); 4] =
    [(3, 3, "1,0,0"), (3, 3, "0,1,0"), (4, 4, "0,1,0,100"), (4, 4, "0,0,1,100")];

pub fn case(i: usize) -> (Dimensions, Vec<Rational>) {
    let (n, m, a) = CASES[i];
    let alpha = a.split(',').map(|w| parse_rational(w).unwrap()).collect();
    (Dimensions::new(n, m).unwrap(), alpha)
}

pub fn label(i: usize) -> String {
    let (n, m, a) = CASES[i];
    format!("{n}x{m}/[{a}]")
}
