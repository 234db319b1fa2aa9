//! Exact symbolic and Monte-Carlo tools for the ordered eigenvalues of
//! uncorrelated central Wishart matrices.
//!
//! * [`ring`]: sparse exponential polynomials over exact rationals, with
//!   definite integration.
//! * [`wishart`]: joint eigenvalue density, marginal-pdf upper bound and its
//!   degree bookkeeping, exact marginals.
//! * [`omega`] and [`pep`]: the ordered exponential integral in a symbolic
//!   rate `ω`, exact error-probability expectations, diversity order and
//!   log-log slope fitting.
//! * [`montecarlo`]: seeded channel sampling, Jacobi eigenvalues, estimators.
//! * [`verify`]: property suites used by the command-line `verify` command.

pub mod exact;
pub mod montecarlo;
pub mod omega;
pub mod pep;
pub mod ring;
mod ring_text;
pub mod verify;
pub mod wishart;

pub use exact::Rational;
pub use pep::{CurveSource, OrderedIntegralResult, PepCurve, PepError};
pub use ring::{ExpPoly, ExpTerm, Limit, RingError};
pub use wishart::{Dimensions, IndexSplit, MarginalBound, SplitCase, WishartError};
