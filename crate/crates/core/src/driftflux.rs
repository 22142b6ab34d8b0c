//! Reduced model in which all components move with one velocity, and the
//! comparison of its solutions with the full model.

use std::sync::Arc;

use crate::diagnostics::{self, BoundsReport, LocalBounds};
use crate::error::{Error, Result, Side};
use crate::gas::PressureLaw;
use crate::mixture::{Grid, MixtureState, PhysicsParams};
use crate::scalar::Real;
use crate::solver::{self, BoundaryConditions, Discretization, Scenario};

/// Per-component densities and one shared velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftFluxState<T> {
    pub laws: Arc<[PressureLaw<T>]>,
    pub grid: Grid<T>,
    pub rho: Vec<Vec<T>>,
    pub v: Vec<T>,
}

impl<T: Real> DriftFluxState<T> {
    pub fn new(laws: impl Into<Arc<[PressureLaw<T>]>>, grid: Grid<T>, rho: Vec<Vec<T>>, v: Vec<T>) -> Result<Self> {
        let laws = laws.into();
        if v.len() != grid.cells {
            return Err(Error::Config(format!("velocity has {} values for {} cells", v.len(), grid.cells)));
        }
        // Reuse the mixture validation for the densities.
        let check = MixtureState::new(laws.clone(), grid, rho.clone(), vec![v.clone(); laws.len()])?;
        Ok(Self { laws: check.laws, grid, rho, v })
    }

    /// Densities of `state` with its barycentric velocity.
    pub fn from_mixture(state: &MixtureState<T>) -> Self {
        let v = (0..state.cells()).map(|k| state.barycentric_velocity(k)).collect();
        Self { laws: state.laws.clone(), grid: state.grid, rho: state.rho.clone(), v }
    }

    /// The same fields as a mixture state with `v_i = v` for every component.
    pub fn to_mixture(&self) -> Result<MixtureState<T>> {
        MixtureState::new(self.laws.clone(), self.grid, self.rho.clone(), vec![self.v.clone(); self.laws.len()])
    }

    pub fn cells(&self) -> usize {
        self.grid.cells
    }

    pub fn components(&self) -> usize {
        self.laws.len()
    }

    fn total_density(&self, k: usize) -> T {
        self.rho.iter().map(|r| r[k]).sum()
    }

    /// `(c_i = p_i'(rho_i) / rho, s^2 = sum c_i rho_i)` at cell `k`.
    fn acoustics(&self, k: usize) -> Result<(Vec<T>, T)> {
        let rho = self.total_density(k);
        let mut c = Vec::with_capacity(self.components());
        let mut s2 = T::zero();
        for (i, law) in self.laws.iter().enumerate() {
            let ci = law.pressure_derivative(self.rho[i][k])? / rho;
            s2 = s2 + ci * self.rho[i][k];
            c.push(ci);
        }
        Ok((c, s2))
    }

    /// Mixture sound speed `s = sqrt(sum_i (rho_i / rho) p_i'(rho_i))` per cell.
    pub fn sound_speed(&self, k: usize) -> Result<T> {
        Ok(self.acoustics(k)?.1.sqrt())
    }
}

pub fn driftflux_cfl_dt<T: Real>(state: &DriftFluxState<T>, disc: &Discretization<T>) -> Result<T> {
    let mut speed = T::zero();
    for k in 0..state.cells() {
        speed = speed.max(state.v[k].abs() + state.sound_speed(k)?);
    }
    if !(speed > T::zero()) || !speed.is_finite() {
        return Err(Error::Degenerate(format!("maximal characteristic speed is {speed}")));
    }
    Ok(disc.cfl * state.grid.dx() / speed)
}

/// Ghost cells in `(rho_1..rho_n, v)` form. At the inlet the velocity is imposed, the
/// outgoing acoustic invariant and the composition are extrapolated; at the outlet
/// the densities are imposed and the outgoing acoustic invariant is extrapolated.
fn ghosts<T: Real>(state: &DriftFluxState<T>, bc: &BoundaryConditions<T>, t: T) -> Result<(Vec<T>, Vec<T>)> {
    let n = state.components();
    let last = state.cells() - 1;
    let vbar = bc.inlet_velocity.value(t);
    let rho_out = bc.outlet_rho(t)?;

    let rho0 = state.total_density(0);
    let s0 = state.sound_speed(0)?;
    let rho_g = rho0 + rho0 / s0 * (vbar - state.v[0]);
    if !(rho_g > T::zero()) {
        return Err(Error::Vacuum { t: t.as_f64(), cell: 0, component: 0, rho: rho_g.as_f64() });
    }
    let mut left: Vec<T> = (0..n).map(|i| state.rho[i][0] * rho_g / rho0).collect();
    left.push(vbar);

    let rho_l = state.total_density(last);
    let s_l = state.sound_speed(last)?;
    let rho_bar: T = rho_out.iter().copied().sum();
    let mut right = rho_out;
    right.push(state.v[last] - s_l / rho_l * (rho_bar - rho_l));
    Ok((left, right))
}

/// One explicit step of the reduced model by characteristic (CIR) upwinding of the
/// quasilinear system frozen at each cell.
pub fn driftflux_step<T: Real>(
    state: &DriftFluxState<T>,
    bc: &BoundaryConditions<T>,
    params: &PhysicsParams<T>,
    disc: &Discretization<T>,
    t: T,
    dt: T,
) -> Result<DriftFluxState<T>> {
    let bound = driftflux_cfl_dt(state, disc)?;
    if dt > bound * (T::one() + T::lit(1e-12)) {
        return Err(Error::Cfl { t: t.as_f64(), dt: dt.as_f64(), bound: bound.as_f64() });
    }
    let n = state.components();
    let cells = state.cells();
    let dx = state.grid.dx();
    let (left, right) = ghosts(state, bc, t)?;
    let column = |k: isize| -> Vec<T> {
        if k < 0 {
            left.clone()
        } else if k as usize >= cells {
            right.clone()
        } else {
            let k = k as usize;
            state.rho.iter().map(|r| r[k]).chain(std::iter::once(state.v[k])).collect()
        }
    };
    let mut rho_new = vec![vec![T::zero(); cells]; n];
    let mut v_new = vec![T::zero(); cells];
    let two = T::lit(2.0);
    let half_theta = params.theta * T::lit(0.5);
    for k in 0..cells {
        let (c, s2) = state.acoustics(k).map_err(|e| e.at_cell(t.as_f64(), k, 0))?;
        let s = s2.sqrt();
        let v = state.v[k];
        let tol = disc.sonic_margin * s;
        let subsonic = v + s >= -tol && v - s <= tol;
        if !subsonic && (k == 0 || k + 1 == cells) {
            let side = if k == 0 { Side::Inlet } else { Side::Outlet };
            let speed = if v - s > tol { v - s } else { v + s };
            return Err(Error::Boundary { t: t.as_f64(), side, component: 0, speed: speed.as_f64() });
        }
        let here = column(k as isize);
        let back: Vec<T> = here.iter().zip(column(k as isize - 1)).map(|(&a, b)| a - b).collect();
        let fwd: Vec<T> = column(k as isize + 1).iter().zip(&here).map(|(&a, &b)| a - b).collect();
        let rho_k: Vec<T> = here[..n].to_vec();
        let mut flux = vec![T::zero(); n + 1];
        // Contact waves moving with v: density perturbations with no pressure signature.
        let d = if v >= T::zero() { &back } else { &fwd };
        let cd: T = (0..n).map(|i| c[i] * d[i]).sum();
        for i in 0..n {
            flux[i] = flux[i] + v * (d[i] - cd / s2 * rho_k[i]);
        }
        // Acoustic waves with speeds v -/+ s and right eigenvectors (rho, -/+ s).
        for sign in [-T::one(), T::one()] {
            let mu = v + sign * s;
            let d = if mu >= T::zero() { &back } else { &fwd };
            let cd: T = (0..n).map(|i| c[i] * d[i]).sum();
            let alpha = (cd + sign * s * d[n]) / (two * s2);
            for i in 0..n {
                flux[i] = flux[i] + mu * alpha * rho_k[i];
            }
            flux[n] = flux[n] + mu * alpha * sign * s;
        }
        for i in 0..n {
            rho_new[i][k] = rho_k[i] - dt / dx * flux[i];
            if !(rho_new[i][k] > T::lit(crate::gas::RHO_MIN)) {
                return Err(Error::Vacuum { t: (t + dt).as_f64(), cell: k, component: i, rho: rho_new[i][k].as_f64() });
            }
        }
        v_new[k] = v - dt / dx * flux[n] - dt * half_theta * v * v.abs();
        if !v_new[k].is_finite() {
            return Err(Error::NonFinite { t: (t + dt).as_f64(), cell: k });
        }
    }
    Ok(DriftFluxState { laws: state.laws.clone(), grid: state.grid, rho: rho_new, v: v_new })
}

/// Integrates the reduced model from `initial` to `disc.t_end` with CFL-limited steps.
pub fn run_driftflux<T: Real>(
    initial: &DriftFluxState<T>,
    bc: &BoundaryConditions<T>,
    params: &PhysicsParams<T>,
    disc: &Discretization<T>,
) -> Result<DriftFluxState<T>> {
    disc.validate()?;
    bc.validate(initial.components())?;
    let mut state = initial.clone();
    let mut t = T::zero();
    while t < disc.t_end {
        let dt = driftflux_cfl_dt(&state, disc)?.min(disc.t_end - t);
        state = driftflux_step(&state, bc, params, disc, t, dt)?;
        t = t + dt;
    }
    Ok(state)
}

/// `sqrt(dx sum_k sum_i (d rho_i)^2 + (d q_i)^2)` between a full and a reduced state.
pub fn field_distance<T: Real>(full: &MixtureState<T>, reduced: &DriftFluxState<T>) -> T {
    let dx = full.grid.dx();
    let mut acc = T::zero();
    for i in 0..full.components() {
        for k in 0..full.cells() {
            let dr = full.rho[i][k] - reduced.rho[i][k];
            let dq = full.rho[i][k] * full.v[i][k] - reduced.rho[i][k] * reduced.v[k];
            acc = acc + dr * dr + dq * dq;
        }
    }
    (dx * acc).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow<T> {
    pub t: T,
    pub lyap_full: T,
    /// Threshold from the bounds accumulated so far; `None` while `beta <= 0`.
    pub s0: Option<T>,
    pub field_distance: T,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport<T> {
    pub omega_bar: T,
    pub rows: Vec<ComparisonRow<T>>,
    pub bounds: BoundsReport<T>,
    pub full: MixtureState<T>,
    pub reduced: DriftFluxState<T>,
}

impl<T: Real> ComparisonReport<T> {
    pub fn terminal_lyap(&self) -> T {
        self.rows.last().map(|r| r.lyap_full).unwrap_or_else(T::zero)
    }
}

/// Runs the full model with coupling `omega_bar` and the reduced model started from
/// the same densities and the barycentric initial velocity, in lockstep.
pub fn compare_models<T: Real>(scenario: &Scenario<T>, omega_bar: T) -> Result<ComparisonReport<T>> {
    scenario.validate()?;
    let params = PhysicsParams::new(scenario.params.theta, omega_bar)?;
    let (bc, disc) = (&scenario.bc, &scenario.disc);
    let mut full = solver::Stepper::new(scenario.initial.clone(), &params)?;
    let mut reduced = DriftFluxState::from_mixture(&scenario.initial);
    let row = |full: &solver::Stepper<T>, reduced: &DriftFluxState<T>, running: LocalBounds<T>| ComparisonRow {
        t: full.t,
        lyap_full: diagnostics::lyapunov(&full.state),
        s0: BoundsReport::from_bounds(running, omega_bar).s0,
        field_distance: field_distance(&full.state, reduced),
    };
    let mut rows = vec![row(&full, &reduced, full.running)];
    while full.t < disc.t_end {
        let dt = solver::cfl_dt(&full.state, disc)?.min(driftflux_cfl_dt(&reduced, disc)?).min(disc.t_end - full.t);
        let t = full.t;
        reduced = driftflux_step(&reduced, bc, &params, disc, t, dt)?;
        full.step(bc, &params, disc, dt)?;
        if full.steps % disc.output_stride == 0 || full.t >= disc.t_end {
            rows.push(row(&full, &reduced, full.running));
        }
    }
    Ok(ComparisonReport {
        omega_bar,
        rows,
        bounds: BoundsReport::from_bounds(full.running, omega_bar),
        full: full.state,
        reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_is_preserved() {
        let laws: Vec<_> = [1.0, 2.0].iter().map(|&a| PressureLaw::isothermal(a).unwrap()).collect();
        let grid = Grid::new(1.0, 12).unwrap();
        let s = DriftFluxState::new(laws, grid, vec![vec![0.9; 12], vec![1.4; 12]], vec![0.0; 12]).unwrap();
        let bc = BoundaryConditions::constant(0.0, &[0.9, 1.4]);
        let params = PhysicsParams::new(0.4, 0.0).unwrap();
        let disc = Discretization::new(12, 0.9, 1.0);
        let dt = driftflux_cfl_dt(&s, &disc).unwrap();
        let next = driftflux_step(&s, &bc, &params, &disc, 0.0, dt).unwrap();
        assert_eq!((next.rho.clone(), next.v.clone()), (s.rho, s.v));
    }

    #[test]
    fn sound_speed_is_density_weighted() {
        let laws: Vec<_> = [1.0, 2.0].iter().map(|&a| PressureLaw::isothermal(a).unwrap()).collect();
        let s = DriftFluxState::new(laws, Grid::new(1.0, 4).unwrap(), vec![vec![1.0; 4], vec![3.0; 4]], vec![0.0; 4])
            .unwrap();
        assert!((s.sound_speed(0).unwrap() - (0.25f64 + 0.75 * 4.0).sqrt()).abs() < 1e-15);
    }
}
