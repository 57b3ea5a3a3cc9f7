//! Heat kernels of Jacobi expansions, compact rank-one symmetric spaces,
//! the unit ball and the unit simplex, together with the closed-form
//! two-sided envelope functions they are compared against.
//!
//! The library evaluates the spectral series
//! `G_t(x,y) = sum_n exp(-t n(n+a+b+1)) P_n(x) P_n(y) / h_n`
//! with controlled truncation error, switching to wide fixed-point
//! arithmetic deep in the Gaussian tail where the series cancels below
//! the double-precision noise floor. On top of that sit the structural
//! identities (reduction formula, quadratic transformations, derivative
//! and comparison relations), the envelope evaluators, and a sweep
//! engine that reports kernel/envelope ratio ranges over parameter grids.

pub mod bigfix;
pub mod envelopes;
pub mod error;
pub mod jacobi_kernel;
pub mod model_spaces;
pub mod quadrature;
pub mod specfun;
pub mod sweep;

pub use error::HeatkError;
pub use specfun::JacobiParams;

/// Default floor on the time variable; below it the series cost and the
/// working precision requirements blow up.
pub const T_MIN_DEFAULT: f64 = 1e-4;
