//! Simulation and diagnostics of n-component blended-gas flow in a pipe, modelled by
//! coupled isothermal Euler equations with a velocity-relaxation coupling.
//!
//! The core is generic over the scalar type through [`scalar::Real`]; the aliases
//! below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod driftflux;
pub mod error;
pub mod gas;
pub mod mixture;
pub mod numerics;
pub mod oracles;
pub mod scalar;
pub mod signal;
pub mod solver;

pub use error::{Error, Result, Side};
pub use scalar::Real;

pub type PressureLaw64 = gas::PressureLaw<f64>;
pub type MixtureState64 = mixture::MixtureState<f64>;
pub type Grid64 = mixture::Grid<f64>;
pub type PhysicsParams64 = mixture::PhysicsParams<f64>;
pub type Signal64 = signal::Signal<f64>;
pub type BoundaryConditions64 = solver::BoundaryConditions<f64>;
pub type Discretization64 = solver::Discretization<f64>;
pub type Scenario64 = solver::Scenario<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type DiagnosticsFrame64 = diagnostics::DiagnosticsFrame<f64>;
pub type BoundsReport64 = diagnostics::BoundsReport<f64>;
pub type DriftFluxState64 = driftflux::DriftFluxState<f64>;
