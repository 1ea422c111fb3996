//! Connection theory of the degenerate third Painleve equation
//!
//! ```text
//! u'' = (u')^2/u - u'/tau + (-8 eps u^2 + 2 a b)/tau + b^2/u
//! ```
//!
//! The crate represents points of the manifold of monodromy data, evaluates
//! the small- and large-`tau` asymptotic formulae parametrised by those
//! points, applies the Backlund and Lie-point group actions, and checks the
//! connection formulae by integrating the equation numerically.

pub mod asymptotics;
pub mod backlund;
pub mod batch;
pub mod error;
pub mod io;
pub mod linalg;
pub mod monodromy;
pub mod ode;
pub mod params;
pub mod sampling;
pub mod specfun;

pub use error::{Error, ErrorKind, Result};
pub use monodromy::MonodromyPoint;
pub use params::EquationParams;

pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);
