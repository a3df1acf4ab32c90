//! Fractional calculus with respect to a weight function on arbitrary
//! time scales.
//!
//! The crate provides:
//!
//! - exact time-scale structure (jump operators, graininess,
//!   kappa-restriction, deterministic grids) in [`timescale`];
//! - delta derivatives/integrals and a product quadrature for weakly
//!   singular kernels in [`calculus`];
//! - the fractional operator family (left/right integrals, Hilfer,
//!   Riemann-Liouville and Caputo derivatives, time-scale Beta, series
//!   and Leibniz expansions) in [`operators`];
//! - a Picard fixed-point solver with contraction certification in
//!   [`solver`];
//! - explicit scalar control synthesis with terminal verification in
//!   [`control`];
//! - independent brute-force oracles and an identity audit catalog in
//!   [`oracles`];
//! - JSON/CSV input and output schemas in [`io`].
//!
//! All numeric kernels are generic over the scalar type through the
//! [`real::Real`] trait; `f64` aliases are exported at the crate root.

pub mod beta;
pub mod calculus;
pub mod control;
pub mod error;
pub mod gridfn;
pub mod io;
pub mod operators;
pub mod oracles;
pub mod psi;
pub mod real;
pub mod solver;
pub mod special;
pub mod timescale;

pub use error::{Error, ErrorClass, Result};
pub use real::Real;

/// `f64` time scale.
pub type TimeScale64 = timescale::TimeScale<f64>;
/// `f64` grid.
pub type Grid64 = timescale::Grid<f64>;
/// `f64` grid function.
pub type GridFunction64 = gridfn::GridFunction<f64>;
/// `f64` weight function.
pub type PsiFunction64 = psi::PsiFunction<f64>;
/// `f64` derivative parameter bundle.
pub type FracParams64 = operators::FracParams<f64>;
/// `f64` initial value problem.
pub type IVProblem64 = solver::IVProblem<f64>;
/// `f64` solver configuration.
pub type SolverConfig64 = solver::SolverConfig<f64>;
/// `f64` solver report.
pub type SolverReport64 = solver::SolverReport<f64>;
/// `f64` control problem.
pub type ControlProblem64 = control::ControlProblem<f64>;
/// `f64` control law.
pub type ControlLaw64 = control::ControlLaw<f64>;
