//! Exact moment propagation for discrete-time stochastic trigonometric-polynomial
//! systems.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`sysspec`] parses a line-oriented system description and rewrites every
//!    angle state `θ` into the pair `(cos θ, sin θ)`, producing a purely
//!    polynomial system.
//! 2. [`compiler`] expands moment update forms over the exact rationals and grows
//!    a seed moment basis until it is closed, yielding a [`MomentStateSystem`].
//! 3. [`propagator`] evaluates that system in floating point over a horizon,
//!    pulling disturbance moments (raw and trigonometric) from [`distmoments`].
//! 4. [`oracle`] and [`planner`] consume the resulting trajectories: the former
//!    checks them against Monte Carlo and a linearized baseline, the latter uses
//!    them for chance-constrained RRT planning with Dubins steering.
//!
//! Exact algebra is generic over the coefficient ring ([`polyring::Coefficient`]);
//! runtime numerics are generic over [`Scalar`] (`f32`/`f64`). The aliases at the
//! bottom of this file fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod distmoments;
pub mod error;
pub mod oracle;
pub mod planner;
pub mod polyring;
pub mod presets;
pub mod propagator;
pub mod scalar;
pub mod sysspec;

pub use compiler::{CompileOptions, MomentBasis, MomentStateSystem, MomentUpdateForm, MufTerm};
pub use distmoments::{Distribution, DisturbanceModel};
pub use error::{Error, Result};
pub use nalgebra;
pub use polyring::{MultiIndex, Polynomial};
pub use propagator::{MomentState, MomentTrajectory, Propagator};
pub use scalar::{Rational, Scalar};
pub use sysspec::{DependenceGraph, PolynomialSystem, SystemSpec};

/// Polynomial with exact rational coefficients, the compiler's working type.
pub type RationalPolynomial = Polynomial<Rational>;
/// Polynomial with `f64` coefficients.
pub type Polynomial64 = Polynomial<f64>;

pub type Propagator64 = Propagator<f64>;
pub type Propagator32 = Propagator<f32>;
pub type MomentState64 = MomentState<f64>;
pub type MomentTrajectory64 = MomentTrajectory<f64>;
pub type DisturbanceModel64 = DisturbanceModel<f64>;
pub type Distribution64 = Distribution<f64>;
