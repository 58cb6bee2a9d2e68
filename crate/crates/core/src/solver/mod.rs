//! The mixed boundary value problem for the harmonic height coordinate:
//! `Δ_g u = 0` in the truncated exterior, `u = 0` on the boundary plane,
//! zero normal flux on the horizon and `u = x3` on the truncation surface.

mod assemble;
mod cg;
mod domain;
mod field;

pub use assemble::{assemble, flux_coefficients, CsrMatrix, LinearSystem};
pub use cg::{conjugate_gradient, iteration_cap, CgOutcome};
pub use domain::{build_domain, Axis, Domain, Tag, Truncation};
pub use field::{min_gradient_on_sigma, node_frame, residual, solve, DiscreteField};
