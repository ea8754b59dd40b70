//! Multi-point positive-integer Lyapunov exponents of the stochastic heat
//! equation `∂_t Z = ½ ∂_xx Z + ξ Z` started from a Dirac delta.
//!
//! For time `t`, strictly increasing locations `x` and multiplicities `m`,
//! the exponent `lim (1/T) log E[∏ Z(Tt, T x_i)^{m_i}]` has three expressions
//! that agree:
//!
//! * γ₁, a quadratic program over `ν = Σ m_i` variables with unit margins
//!   ([`variational::solve_gamma1`]);
//! * γ₂, a quadratic program over `n` variables with margins
//!   `(m_i + m_{i+1})/2` ([`variational::solve_gamma2`]);
//! * γ₃, a closed form over the partition produced by sticky point-mass
//!   dynamics ([`clusters::simulate_inertia`], [`closed_form::gamma3`]).
//!
//! [`closed_form::gamma_report`] evaluates all three. The [`oracle`] module
//! provides an exhaustive reference solver, and [`quadrature`] evaluates the
//! underlying moment directly from its contour-integral representation at
//! small `ν`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod clusters;
pub mod error;
pub mod instance;
pub mod isotonic;
mod one_based;
pub mod oracle;
pub mod quadrature;
pub mod sampling;
pub mod variational;
pub mod verify;

pub use closed_form::{
    gamma3, gamma_report, verify_recursion_identity, GammaReport, RecursionReport,
};
pub use clusters::{
    first_optimal_merge, simulate_inertia, ClusterResult, FirstMerge, MergeEvent,
    PiecewiseLinearPath,
};
pub use error::{Error, Result};
pub use instance::{flatten, validate_instance, FlatInstance, MomentInstance, RawInstance};
pub use quadrature::{
    contour_moment, heat_kernel, lyapunov_rate_estimate, ContourConfig, QuadratureRule,
};
pub use variational::{solve_gamma1, solve_gamma2, VariationalSolution};
