//! Explicit characteristic-upwind integration of the diagonal system in the
//! Riemann invariants, with velocity inflow and density outflow conditions.

use crate::diagnostics::{self, DiagnosticsFrame, LocalBounds};
use crate::error::{Error, Result, Side};
use crate::gas::{riemann_to_component, PressureLaw};
use crate::mixture::{friction_from_invariants, BoundaryTrace, Grid, MixtureState, PhysicsParams};
use crate::scalar::Real;
use crate::signal::Signal;

/// Common inflow velocity at `x = 0` and per-component outflow densities at `x = L`.
#[derive(Debug, Clone)]
pub struct BoundaryConditions<T> {
    pub inlet_velocity: Signal<T>,
    pub outlet_density: Vec<Signal<T>>,
}

impl<T: Real> BoundaryConditions<T> {
    pub fn constant(v: T, rho: &[T]) -> Self {
        Self { inlet_velocity: Signal::Constant(v), outlet_density: rho.iter().map(|&r| Signal::Constant(r)).collect() }
    }

    pub fn validate(&self, components: usize) -> Result<()> {
        if self.outlet_density.len() != components {
            return Err(Error::Config(format!(
                "{} outlet densities given for {components} components",
                self.outlet_density.len()
            )));
        }
        self.inlet_velocity.validate()?;
        self.outlet_density.iter().try_for_each(Signal::validate)
    }

    pub fn outlet_rho(&self, t: T) -> Result<Vec<T>> {
        self.outlet_density
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let r = s.value(t);
                if r > T::zero() {
                    Ok(r)
                } else {
                    Err(Error::Config(format!("outlet density of component {i} is {r} at t={t}")))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization<T> {
    pub cells: usize,
    pub cfl: T,
    pub t_end: T,
    pub output_stride: usize,
    /// Times at which full field snapshots are stored; steps are shortened to hit them.
    pub snapshot_times: Vec<T>,
    /// Tolerated wrong-way characteristic speed at an imposed boundary, as a fraction of the sound speed.
    pub sonic_margin: T,
}

impl<T: Real> Discretization<T> {
    pub fn new(cells: usize, cfl: T, t_end: T) -> Self {
        Self { cells, cfl, t_end, output_stride: 1, snapshot_times: Vec::new(), sonic_margin: T::lit(0.05) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 4 {
            return Err(Error::Config(format!("need at least 4 cells, got {}", self.cells)));
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= T::zero()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be at least 1".into()));
        }
        if !(self.sonic_margin >= T::zero()) {
            return Err(Error::Config("sonic_margin must be non-negative".into()));
        }
        Ok(())
    }
}

/// `plus[i][k] = R+_i`, `minus[i][k] = R-_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannField<T> {
    pub plus: Vec<Vec<T>>,
    pub minus: Vec<Vec<T>>,
}

impl<T: Real> RiemannField<T> {
    pub fn from_state(state: &MixtureState<T>) -> Result<Self> {
        let n = state.components();
        let mut plus = vec![Vec::with_capacity(state.cells()); n];
        let mut minus = vec![Vec::with_capacity(state.cells()); n];
        for (i, law) in state.laws.iter().enumerate() {
            for k in 0..state.cells() {
                let r = law.riemann(state.rho[i][k]).map_err(|e| e.at_cell(0.0, k, i))?;
                plus[i].push(r + state.v[i][k]);
                minus[i].push(r - state.v[i][k]);
            }
        }
        Ok(Self { plus, minus })
    }

    pub fn to_state(&self, laws: &std::sync::Arc<[PressureLaw<T>]>, grid: Grid<T>, t: T) -> Result<MixtureState<T>> {
        let n = laws.len();
        let mut rho = vec![Vec::with_capacity(grid.cells); n];
        let mut v = vec![Vec::with_capacity(grid.cells); n];
        for (i, law) in laws.iter().enumerate() {
            for k in 0..grid.cells {
                let s = riemann_to_component(law, self.plus[i][k], self.minus[i][k])
                    .map_err(|e| e.at_cell(t.as_f64(), k, i))?;
                if !(s.rho.is_finite() && s.v.is_finite()) {
                    return Err(Error::NonFinite { t: t.as_f64(), cell: k });
                }
                rho[i].push(s.rho);
                v[i].push(s.v);
            }
        }
        MixtureState::new(laws.clone(), grid, rho, v)
    }
}

/// Face states at `x = 0` and `x = L` implied by the boundary closure: the outgoing
/// invariant is extrapolated from the adjacent cell and the imposed one follows
/// from the boundary condition.
pub fn boundary_traces<T: Real>(
    state: &MixtureState<T>,
    field: &RiemannField<T>,
    bc: &BoundaryConditions<T>,
    t: T,
) -> Result<(BoundaryTrace<T>, BoundaryTrace<T>)> {
    let n = state.components();
    let last = state.cells() - 1;
    let vbar = bc.inlet_velocity.value(t);
    let rho_out = bc.outlet_rho(t)?;
    let two = T::lit(2.0);
    let mut inlet = BoundaryTrace { rho: Vec::with_capacity(n), v: Vec::with_capacity(n) };
    let mut outlet = BoundaryTrace { rho: Vec::with_capacity(n), v: Vec::with_capacity(n) };
    for (i, law) in state.laws.iter().enumerate() {
        let minus = field.minus[i][0];
        let s = riemann_to_component(law, minus + two * vbar, minus).map_err(|e| e.at_cell(t.as_f64(), 0, i))?;
        inlet.rho.push(s.rho);
        inlet.v.push(vbar);
        let plus = field.plus[i][last];
        outlet.rho.push(rho_out[i]);
        outlet.v.push(plus - law.riemann(rho_out[i])?);
    }
    Ok((inlet, outlet))
}

/// Ghost invariants on both sides: `(left_plus, left_minus, right_plus, right_minus)` per component.
fn ghosts<T: Real>(
    state: &MixtureState<T>,
    field: &RiemannField<T>,
    bc: &BoundaryConditions<T>,
    t: T,
) -> Result<Vec<(T, T, T, T)>> {
    let last = state.cells() - 1;
    let two = T::lit(2.0);
    let vbar = bc.inlet_velocity.value(t);
    let rho_out = bc.outlet_rho(t)?;
    state
        .laws
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let lm = field.minus[i][0];
            let rp = field.plus[i][last];
            Ok((lm + two * vbar, lm, rp, two * law.riemann(rho_out[i])? - rp))
        })
        .collect()
}

/// `dt = cfl dx / max |lambda|`.
pub fn cfl_dt<T: Real>(state: &MixtureState<T>, disc: &Discretization<T>) -> Result<T> {
    let mut speed = T::zero();
    for (i, law) in state.laws.iter().enumerate() {
        for k in 0..state.cells() {
            let c = law.sound_speed(state.rho[i][k])?;
            speed = speed.max(state.v[i][k].abs() + c);
        }
    }
    if !(speed > T::zero()) || !speed.is_finite() {
        return Err(Error::Degenerate(format!("maximal characteristic speed is {speed}")));
    }
    Ok(disc.cfl * state.grid.dx() / speed)
}

/// Aborts when an imposed or extrapolated boundary invariant travels the wrong way
/// by more than `margin` times the local sound speed.
fn check_directions<T: Real>(
    state: &MixtureState<T>,
    speeds: &[Vec<(T, T)>],
    sound: &[Vec<T>],
    margin: T,
    t: T,
) -> Result<()> {
    let last = state.cells() - 1;
    for i in 0..state.components() {
        let (lp0, lm0) = speeds[i][0];
        let (lpl, lml) = speeds[i][last];
        let tol0 = margin * sound[i][0];
        let tol_l = margin * sound[i][last];
        let inlet = if lp0 < -tol0 {
            Some(lp0)
        } else if lm0 > tol0 {
            Some(lm0)
        } else {
            None
        };
        if let Some(speed) = inlet {
            return Err(Error::Boundary { t: t.as_f64(), side: Side::Inlet, component: i, speed: speed.as_f64() });
        }
        let outlet = if lml > tol_l {
            Some(lml)
        } else if lpl < -tol_l {
            Some(lpl)
        } else {
            None
        };
        if let Some(speed) = outlet {
            return Err(Error::Boundary { t: t.as_f64(), side: Side::Outlet, component: i, speed: speed.as_f64() });
        }
    }
    Ok(())
}

/// `(R+, R-)` after one explicit step of length `dt` from time `t`.
#[allow(clippy::too_many_arguments)]
fn advance<T: Real>(
    state: &MixtureState<T>,
    field: &RiemannField<T>,
    bc: &BoundaryConditions<T>,
    params: &PhysicsParams<T>,
    disc: &Discretization<T>,
    t: T,
    dt: T,
) -> Result<(MixtureState<T>, RiemannField<T>)> {
    let bound = cfl_dt(state, disc)?;
    if dt > bound * (T::one() + T::lit(1e-12)) {
        return Err(Error::Cfl { t: t.as_f64(), dt: dt.as_f64(), bound: bound.as_f64() });
    }
    let n = state.components();
    let cells = state.cells();
    let mut speeds = vec![Vec::with_capacity(cells); n];
    let mut sound = vec![Vec::with_capacity(cells); n];
    for (i, law) in state.laws.iter().enumerate() {
        for k in 0..cells {
            let c = law.sound_speed(state.rho[i][k]).map_err(|e| e.at_cell(t.as_f64(), k, i))?;
            let v = state.v[i][k];
            speeds[i].push((v + c, v - c));
            sound[i].push(c);
        }
    }
    check_directions(state, &speeds, &sound, disc.sonic_margin, t)?;
    let ghost = ghosts(state, field, bc, t)?;
    let stiff = params.omega_bar * dt > T::lit(0.5);
    let deviations: Vec<Vec<T>> = (0..cells).map(|k| state.deviations(k)).collect();
    let dx = state.grid.dx();
    let mut plus = vec![vec![T::zero(); cells]; n];
    let mut minus = vec![vec![T::zero(); cells]; n];
    for i in 0..n {
        let (lp, lm, rp, rm) = ghost[i];
        let wp = &field.plus[i];
        let wm = &field.minus[i];
        let at = |w: &[T], k: isize, left: T, right: T| -> T {
            if k < 0 {
                left
            } else if k as usize >= cells {
                right
            } else {
                w[k as usize]
            }
        };
        for k in 0..cells {
            let ki = k as isize;
            let (sp, sm) = speeds[i][k];
            let dp = if sp >= T::zero() { wp[k] - at(wp, ki - 1, lp, rp) } else { at(wp, ki + 1, lp, rp) - wp[k] };
            let dm = if sm >= T::zero() { wm[k] - at(wm, ki - 1, lm, rm) } else { at(wm, ki + 1, lm, rm) - wm[k] };
            let mut theta = friction_from_invariants(params.theta, wp[k], wm[k]);
            if !stiff {
                theta = theta + params.omega_bar * deviations[k][i];
            }
            plus[i][k] = wp[k] - dt / dx * sp * dp - dt * theta;
            minus[i][k] = wm[k] - dt / dx * sm * dm + dt * theta;
        }
    }
    let t_new = t + dt;
    let mut provisional = RiemannField { plus, minus };
    let mut next = provisional.to_state(&state.laws, state.grid, t_new)?;
    if stiff {
        // Exact relaxation of u_i at frozen densities: v_i <- v + u_i e^{-omega dt}.
        let decay = (-params.omega_bar * dt).exp();
        for k in 0..cells {
            let vb = next.barycentric_velocity(k);
            for i in 0..n {
                let v_old = next.v[i][k];
                let v_new = vb + (v_old - vb) * decay;
                next.v[i][k] = v_new;
                provisional.plus[i][k] = provisional.plus[i][k] + (v_new - v_old);
                provisional.minus[i][k] = provisional.minus[i][k] - (v_new - v_old);
            }
        }
    }
    if let Some(k) = (0..cells).find(|&k| next.v.iter().any(|v| !v[k].is_finite())) {
        return Err(Error::NonFinite { t: t_new.as_f64(), cell: k });
    }
    Ok((next, provisional))
}

/// One explicit step of length `dt` from time `t`.
pub fn step<T: Real>(
    state: &MixtureState<T>,
    bc: &BoundaryConditions<T>,
    params: &PhysicsParams<T>,
    disc: &Discretization<T>,
    t: T,
    dt: T,
) -> Result<MixtureState<T>> {
    let field = RiemannField::from_state(state)?;
    advance(state, &field, bc, params, disc, t, dt).map(|(s, _)| s)
}

/// Residuals of the order-0 and order-1 compatibility conditions at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport<T> {
    /// `v_i(0, 0) - vbar(0)`.
    pub inlet_velocity: Vec<T>,
    /// `rho_i(0, L) - rhobar_i(0)`.
    pub outlet_density: Vec<T>,
    /// `rhobar_i'(0) + d/dx (rho_i v_i)(0, L)`.
    pub outlet_density_rate: Vec<T>,
    /// `vbar'(0) + d/dx (v_i^2/2 + P_i'(rho_i))(0, 0) + (theta/2) v_i|v_i| + omega_bar u_i`.
    pub inlet_velocity_rate: Vec<T>,
    pub max_residual: T,
    pub tolerance: T,
    pub passed: bool,
    /// `vbar(0) > 0`, which the synchronization estimate presumes.
    pub inflow_positive: bool,
}

/// Boundary values by linear extrapolation from the two nearest cell centres.
fn extrapolate<T: Real>(near: T, next: T) -> T {
    T::lit(1.5) * near - T::lit(0.5) * next
}

pub fn check_c1_compatibility<T: Real>(
    state: &MixtureState<T>,
    bc: &BoundaryConditions<T>,
    params: &PhysicsParams<T>,
    tolerance: T,
) -> Result<CompatibilityReport<T>> {
    let dx = state.grid.dx();
    let last = state.cells() - 1;
    let zero = T::zero();
    let half = T::lit(0.5);
    let vbar = bc.inlet_velocity.value(zero);
    let vbar_t = bc.inlet_velocity.derivative(zero);
    let rho_out = bc.outlet_rho(zero)?;
    let rho_in: Vec<T> = state.rho.iter().map(|r| extrapolate(r[0], r[1])).collect();
    let v_in: Vec<T> = state.v.iter().map(|v| extrapolate(v[0], v[1])).collect();
    let u_in = crate::mixture::deviations_of(&rho_in, &v_in);
    let mut report = CompatibilityReport {
        inlet_velocity: Vec::new(),
        outlet_density: Vec::new(),
        outlet_density_rate: Vec::new(),
        inlet_velocity_rate: Vec::new(),
        max_residual: zero,
        tolerance,
        passed: true,
        inflow_positive: vbar > zero,
    };
    for (i, law) in state.laws.iter().enumerate() {
        let (r, v) = (&state.rho[i], &state.v[i]);
        report.inlet_velocity.push(v_in[i] - vbar);
        report.outlet_density.push(extrapolate(r[last], r[last - 1]) - rho_out[i]);
        let flux_x = (r[last] * v[last] - r[last - 1] * v[last - 1]) / dx;
        report.outlet_density_rate.push(bc.outlet_density[i].derivative(zero) + flux_x);
        let h = |k: usize| -> Result<T> { Ok(half * v[k] * v[k] + law.potential_first(r[k])?) };
        let h_x = (h(1)? - h(0)?) / dx;
        let src = half * params.theta * v_in[i] * v_in[i].abs() + params.omega_bar * u_in[i];
        report.inlet_velocity_rate.push(vbar_t + h_x + src);
    }
    report.max_residual =
        [&report.inlet_velocity, &report.outlet_density, &report.outlet_density_rate, &report.inlet_velocity_rate]
            .iter()
            .flat_map(|v| v.iter())
            .fold(zero, |m, r| m.max(r.abs()));
    report.passed = report.max_residual <= tolerance;
    Ok(report)
}

/// Everything needed for a run.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub initial: MixtureState<T>,
    pub bc: BoundaryConditions<T>,
    pub params: PhysicsParams<T>,
    pub disc: Discretization<T>,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.disc.validate()?;
        self.bc.validate(self.initial.components())?;
        if self.initial.cells() != self.disc.cells {
            return Err(Error::Config(format!(
                "initial state has {} cells, discretization {}",
                self.initial.cells(),
                self.disc.cells
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub state: MixtureState<T>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub frames: Vec<DiagnosticsFrame<T>>,
    pub snapshots: Vec<Snapshot<T>>,
    pub compatibility: CompatibilityReport<T>,
    pub final_state: MixtureState<T>,
    pub steps: usize,
}

/// Advances a scenario step by step; [`run`] drives it to the horizon.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    pub state: MixtureState<T>,
    pub field: RiemannField<T>,
    pub t: T,
    pub steps: usize,
    pub running: LocalBounds<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(initial: MixtureState<T>, params: &PhysicsParams<T>) -> Result<Self> {
        let field = RiemannField::from_state(&initial)?;
        let running = diagnostics::local_bounds(&initial, params)?;
        Ok(Self { state: initial, field, t: T::zero(), steps: 0, running })
    }

    /// Takes one step of at most `max_dt` (and at most the CFL step).
    pub fn step(
        &mut self,
        bc: &BoundaryConditions<T>,
        params: &PhysicsParams<T>,
        disc: &Discretization<T>,
        max_dt: T,
    ) -> Result<T> {
        let dt = cfl_dt(&self.state, disc)?.min(max_dt);
        let (state, field) = advance(&self.state, &self.field, bc, params, disc, self.t, dt)?;
        self.state = state;
        self.field = field;
        self.t = self.t + dt;
        self.steps += 1;
        self.running = self.running.max(diagnostics::local_bounds(&self.state, params)?);
        Ok(dt)
    }

    pub fn frame(&self, bc: &BoundaryConditions<T>, params: &PhysicsParams<T>) -> Result<DiagnosticsFrame<T>> {
        let (inlet, outlet) = boundary_traces(&self.state, &self.field, bc, self.t)?;
        diagnostics::frame(&self.state, params, self.t, inlet, outlet, self.running)
    }
}

/// Integrates from `t = 0` to `t_end`, emitting frames every `output_stride` steps and at `t_end`.
pub fn run<T: Real>(scenario: &Scenario<T>) -> Result<Trajectory<T>> {
    scenario.validate()?;
    let Scenario { initial, bc, params, disc } = scenario;
    let compatibility = check_c1_compatibility(initial, bc, params, initial.grid.dx())?;
    let mut stepper = Stepper::new(initial.clone(), params)?;
    let mut frames = vec![stepper.frame(bc, params)?];
    let mut stops: Vec<T> =
        disc.snapshot_times.iter().copied().filter(|&s| s >= T::zero() && s <= disc.t_end).collect();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    stops.dedup();
    let mut snapshots = Vec::new();
    let mut next_stop = 0;
    while next_stop < stops.len() && stops[next_stop] <= T::zero() {
        snapshots.push(Snapshot { t: T::zero(), state: stepper.state.clone() });
        next_stop += 1;
    }
    let t_end = disc.t_end;
    while stepper.t < t_end {
        let target = stops.get(next_stop).copied().unwrap_or(t_end).min(t_end);
        let remaining = target - stepper.t;
        stepper.step(bc, params, disc, remaining)?;
        // Absorb the rounding residue when a stop is essentially reached.
        if (target - stepper.t).abs() <= T::epsilon() * T::lit(16.0) * (T::one() + target.abs()) {
            stepper.t = target;
        }
        while next_stop < stops.len() && stepper.t >= stops[next_stop] {
            snapshots.push(Snapshot { t: stops[next_stop], state: stepper.state.clone() });
            next_stop += 1;
        }
        if stepper.steps % disc.output_stride == 0 || stepper.t >= t_end {
            frames.push(stepper.frame(bc, params)?);
        }
    }
    Ok(Trajectory { frames, snapshots, compatibility, final_state: stepper.state, steps: stepper.steps })
}
