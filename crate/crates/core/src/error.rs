use thiserror::Error;

/// Which end of the pipe a boundary event refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inlet,
    Outlet,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Inlet => f.write_str("inlet (x=0)"),
            Side::Outlet => f.write_str("outlet (x=L)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("density {rho} outside the admissible range of the pressure law: {reason}")]
    Domain { rho: f64, reason: &'static str },

    #[error("riemann coordinate {xi} outside the range of the transform: {reason}")]
    Range { xi: f64, reason: &'static str },

    #[error("adaptive quadrature did not reach tolerance {tol:e} on [{a}, {b}]")]
    Quadrature { a: f64, b: f64, tol: f64 },

    #[error("root finding did not converge for target {target}")]
    RootFinding { target: f64 },

    #[error("vacuum reached at t={t}, cell {cell}, component {component} (riemann coordinate {rho})")]
    Vacuum { t: f64, cell: usize, component: usize, rho: f64 },

    #[error("time step {dt:e} exceeds the CFL bound {bound:e} at t={t}")]
    Cfl { t: f64, dt: f64, bound: f64 },

    #[error("characteristic at the {side} points the wrong way at t={t}, component {component}: speed {speed}")]
    Boundary { t: f64, side: Side, component: usize, speed: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sonic point reached at x={x}, component {component}: p'(rho) - v^2 = {margin:e}")]
    Sonic { x: f64, component: usize, margin: f64 },

    #[error("integration did not converge: {0}")]
    Nonconvergence(String),

    #[error("at t={t}, cell {cell}, component {component}: {source}")]
    InCell { t: f64, cell: usize, component: usize, source: Box<Error> },

    #[error("non-finite value at t={t}, cell {cell}")]
    NonFinite { t: f64, cell: usize },
}

impl Error {
    /// Attaches the failing time, cell and component to a per-cell transform error.
    pub(crate) fn at_cell(self, t: f64, cell: usize, component: usize) -> Self {
        match self {
            Error::Range { xi, reason: VACUUM } => Error::Vacuum { t, cell, component, rho: xi },
            other => Error::InCell { t, cell, component, source: Box::new(other) },
        }
    }
}

/// Reason string used by inverse transforms when the result would fall below the density floor.
pub(crate) const VACUUM: &str = "reconstructed density below the vacuum floor";

pub type Result<T, E = Error> = std::result::Result<T, E>;
