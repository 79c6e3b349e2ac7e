//! Eigenvalues of one-dimensional Schrödinger operators from the zeros of
//! power-series coefficients.
//!
//! The wavefunction is factored as `Psi(x) = P(x) R(x)` with a reference
//! function `R(x) = x^alpha exp(-beta x^sigma)`. The coefficients of `P`
//! obey a linear recurrence whose entries are polynomials in the energy;
//! zeros of a high-order coefficient converge to the eigenvalues.
//!
//! Two independent routes check the configuration-space results: the Hill
//! determinant in a Gaussian basis ([`hill_oracle`]) and a momentum-space
//! recursion for the moments of the Fourier transform ([`moment_space`]).

// Dense matrix code reads better with explicit row and column indices.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod hill_oracle;
pub mod linalg;
pub mod model;
pub mod moment_space;
pub mod parallel;
pub mod poly;
pub mod precision;
pub mod recurrence;
pub mod rootfinder;
pub mod tables;

pub use error::{Error, Result};
pub use model::{
    modified_rational, modified_sextic, parse_potential_file, LinearOde, ModifiedSystem, Parity,
    PotentialFile, PotentialSpec, RationalTerm, ReferenceFunction,
};
pub use precision::{agreeing_digits, format_significant, matched_digits, PrecisionContext};
pub use recurrence::{CoefficientSequence, Recurrence};
pub use rootfinder::{ScanWindow, Trace, Tracking};
