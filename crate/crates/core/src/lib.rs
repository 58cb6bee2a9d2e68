//! Numerical toolkit for the mass of asymptotically flat 3-manifolds whose
//! boundary is modeled on the plane `{x3 = 0}` of Euclidean half-space.
//!
//! The crate is `no_std` (with `alloc`). It provides:
//!
//! * [`metric`]: closed-form test metrics with exact first and second partials,
//! * [`geometry`]: pointwise tensor calculus (Christoffel symbols, scalar and
//!   boundary mean curvature, covariant gradient/Hessian/Laplacian, charts),
//! * [`mass`]: flux quadrature of the boundary-corrected mass over hemispheres,
//!   spheres and half-cylinders, with extrapolation to infinite radius,
//! * [`solver`]: the mixed Dirichlet/Neumann problem for the harmonic height
//!   coordinate on truncated domains,
//! * [`inequality`]: both sides of the harmonic-level-set mass lower bound plus
//!   the pointwise identities and level-set diagnostics behind it.
//!
//! Enable the `parallel` feature for rayon-backed map-reduce. Reductions use a
//! fixed block decomposition so results do not depend on the worker count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod convergence;
pub mod error;
pub mod geometry;
pub mod inequality;
pub mod jet;
pub mod mass;
pub(crate) mod math;
pub mod metric;
pub mod par;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use jet::Jet;
