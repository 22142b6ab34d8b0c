//! Reference solutions: the uniform decay family, isothermal travelling waves,
//! constant states and stationary profiles.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gas::PressureLaw;
use crate::mixture::{Grid, MixtureState, PhysicsParams};
use crate::numerics::{dopri5, solve_dense, OdeTolerance};
use crate::scalar::Real;
use crate::signal::Signal;
use crate::solver::BoundaryConditions;

/// `v(t) = 1 / (P0 + theta t / 2)`.
pub fn example1_velocity<T: Real>(p0: T, theta: T, t: T) -> T {
    T::one() / (p0 + theta * t * T::lit(0.5))
}

/// x-uniform state with `rho_i = rho0_i` and the common velocity [`example1_velocity`].
pub fn example1_state<T: Real>(
    laws: impl Into<Arc<[PressureLaw<T>]>>,
    grid: Grid<T>,
    rho0: &[T],
    p0: T,
    theta: T,
    t: T,
) -> Result<MixtureState<T>> {
    if !(p0 > T::zero()) {
        return Err(Error::Config(format!("P0 must be positive, got {p0}")));
    }
    let v = example1_velocity(p0, theta, t);
    let rho0 = rho0.to_vec();
    MixtureState::from_fn(laws, grid, move |i, _| (rho0[i], v))
}

/// Boundary data consistent with [`example1_state`].
pub fn example1_boundary<T: Real>(rho0: &[T], p0: T, theta: T) -> BoundaryConditions<T> {
    BoundaryConditions {
        inlet_velocity: Signal::custom(move |t| example1_velocity(p0, theta, t)),
        outlet_density: rho0.iter().map(|&r| Signal::Constant(r)).collect(),
    }
}

/// Isothermal travelling waves `rho_i = alpha_i(lambda t - x)`, `v_i = lambda` with
/// `alpha_i(z) = C_i exp(lambda^2 theta z / (2 a_i^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelingWaveSpec<T> {
    pub lambda: T,
    pub amplitude: Vec<T>,
    pub sound_speed: Vec<T>,
    pub theta: T,
}

impl<T: Real> TravelingWaveSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude.len() != self.sound_speed.len() || self.amplitude.is_empty() {
            return Err(Error::Config("travelling wave needs one amplitude per sound speed".into()));
        }
        let all_positive = self.amplitude.iter().chain(&self.sound_speed).all(|&x| x > T::zero());
        if !(self.lambda > T::zero() && self.theta >= T::zero() && all_positive) {
            return Err(Error::Config("travelling wave parameters must be positive".into()));
        }
        Ok(())
    }

    pub fn laws(&self) -> Result<Vec<PressureLaw<T>>> {
        self.sound_speed.iter().map(|&a| PressureLaw::isothermal(a)).collect()
    }

    pub fn alpha(&self, i: usize, z: T) -> T {
        let a = self.sound_speed[i];
        self.amplitude[i] * (self.lambda * self.lambda * self.theta / (T::lit(2.0) * a * a) * z).exp()
    }

    pub fn density(&self, i: usize, t: T, x: T) -> T {
        self.alpha(i, self.lambda * t - x)
    }

    /// Inflow velocity `lambda` and outflow densities `alpha_i(lambda t - L)`.
    pub fn boundary(&self, length: T) -> BoundaryConditions<T> {
        let outlet_density = (0..self.amplitude.len())
            .map(|i| {
                let spec = self.clone();
                Signal::custom(move |t| spec.density(i, t, length))
            })
            .collect();
        BoundaryConditions { inlet_velocity: Signal::Constant(self.lambda), outlet_density }
    }
}

pub fn example2_state<T: Real>(spec: &TravelingWaveSpec<T>, t: T, grid: Grid<T>) -> Result<MixtureState<T>> {
    spec.validate()?;
    MixtureState::from_fn(spec.laws()?, grid, |i, x| (spec.density(i, t, x), spec.lambda))
}

pub fn constant_state<T: Real>(
    laws: impl Into<Arc<[PressureLaw<T>]>>,
    grid: Grid<T>,
    rho: &[T],
    v: &[T],
) -> Result<MixtureState<T>> {
    MixtureState::from_fn(laws, grid, |i, _| (rho[i], v[i]))
}

/// Constant flow rates and inlet densities of a stationary profile.
#[derive(Debug, Clone)]
pub struct StationarySpec<T> {
    pub laws: Arc<[PressureLaw<T>]>,
    pub params: PhysicsParams<T>,
    pub q_tilde: Vec<T>,
    pub rho_inlet: Vec<T>,
}

impl<T: Real> StationarySpec<T> {
    /// Inlet densities `q_i / vbar` for a common inflow velocity.
    pub fn with_inlet_velocity(
        laws: impl Into<Arc<[PressureLaw<T>]>>,
        params: PhysicsParams<T>,
        q_tilde: Vec<T>,
        vbar: T,
    ) -> Result<Self> {
        if !(vbar > T::zero()) {
            return Err(Error::Config(format!("inlet velocity must be positive, got {vbar}")));
        }
        let rho_inlet = q_tilde.iter().map(|&q| q / vbar).collect();
        Ok(Self { laws: laws.into(), params, q_tilde, rho_inlet })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.laws.len();
        if n == 0 || self.q_tilde.len() != n || self.rho_inlet.len() != n {
            return Err(Error::Config("stationary spec needs one flow rate and inlet density per law".into()));
        }
        if self.rho_inlet.iter().any(|&r| !(r > T::zero())) {
            return Err(Error::Config("stationary inlet densities must be positive".into()));
        }
        let v0 = self.q_tilde[0] / self.rho_inlet[0];
        let scale = T::one() + v0.abs();
        if self.q_tilde.iter().zip(&self.rho_inlet).any(|(&q, &r)| (q / r - v0).abs() > T::tol(1e-12) * scale) {
            return Err(Error::Config("stationary inlet velocities q_i / rho_i must coincide".into()));
        }
        Ok(())
    }

    /// `d rho_i / dx` of the stationary momentum balance.
    fn rhs(&self, x: T, rho: &[T]) -> Result<Vec<T>> {
        let q_sum: T = self.q_tilde.iter().copied().sum();
        let rho_sum: T = rho.iter().copied().sum();
        let half_theta = self.params.theta * T::lit(0.5);
        self.laws
            .iter()
            .enumerate()
            .map(|(i, law)| {
                let (r, q) = (rho[i], self.q_tilde[i]);
                if !(r > T::zero()) {
                    return Err(Error::Domain {
                        rho: r.as_f64(),
                        reason: "stationary density left the positive range",
                    });
                }
                let margin = law.pressure_derivative(r)? - q * q / (r * r);
                if !(margin > T::zero()) {
                    return Err(Error::Sonic { x: x.as_f64(), component: i, margin: margin.as_f64() });
                }
                let force = -half_theta * q * q.abs() / r - self.params.omega_bar * (q - q_sum / rho_sum * r);
                Ok(force / margin)
            })
            .collect()
    }

    /// Densities at each of the ascending positions in `xs`.
    pub fn densities_at(&self, xs: &[T]) -> Result<Vec<Vec<T>>> {
        self.validate()?;
        let tol = OdeTolerance { rtol: T::tol(1e-12), atol: T::tol(1e-14), ..OdeTolerance::default() };
        dopri5(|x, y| self.rhs(x, y), T::zero(), &self.rho_inlet, xs, tol)
    }

    pub fn outlet_densities(&self, length: T) -> Result<Vec<T>> {
        Ok(self.densities_at(&[length])?.pop().unwrap_or_default())
    }
}

/// Stationary profile sampled at the cell centres; `v_i = q_i / rho_i`.
pub fn stationary_profile<T: Real>(spec: &StationarySpec<T>, grid: Grid<T>) -> Result<MixtureState<T>> {
    let samples = spec.densities_at(&grid.centers())?;
    let n = spec.laws.len();
    let mut rho = vec![Vec::with_capacity(grid.cells); n];
    let mut v = vec![Vec::with_capacity(grid.cells); n];
    for row in &samples {
        for i in 0..n {
            rho[i].push(row[i]);
            v[i].push(spec.q_tilde[i] / row[i]);
        }
    }
    MixtureState::new(spec.laws.clone(), grid, rho, v)
}

#[derive(Debug, Clone)]
pub struct ShootingReport<T> {
    pub spec: StationarySpec<T>,
    pub outlet: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

/// Finds flow rates `q_i` (inlet densities `q_i / vbar`) whose stationary profile hits
/// `target` at `x = length`, by Broyden's secant iteration from the flow rates in `initial`.
pub fn shoot_stationary<T: Real>(
    initial: &StationarySpec<T>,
    vbar: T,
    length: T,
    target: &[T],
    tol: T,
    max_iter: usize,
) -> Result<ShootingReport<T>> {
    let n = initial.laws.len();
    if target.len() != n {
        return Err(Error::Config(format!("{} target densities for {n} components", target.len())));
    }
    let make = |q: &[T]| StationarySpec::with_inlet_velocity(initial.laws.clone(), initial.params, q.to_vec(), vbar);
    let residual = |q: &[T]| -> Result<Vec<T>> {
        let out = make(q)?.outlet_densities(length)?;
        Ok(out.iter().zip(target).map(|(&o, &t)| o - t).collect())
    };
    let norm = |r: &[T]| r.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let mut q = initial.q_tilde.clone();
    let mut r = residual(&q)?;
    // Finite-difference Jacobian for the first step, rank-one updates afterwards.
    let mut jac = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let h = T::tol(1e-7) * (T::one() + q[j].abs());
        let mut qh = q.clone();
        qh[j] = qh[j] + h;
        let rh = residual(&qh)?;
        for i in 0..n {
            jac[i][j] = (rh[i] - r[i]) / h;
        }
    }
    for iteration in 0..max_iter {
        if norm(&r) <= tol {
            let spec = make(&q)?;
            let outlet = spec.outlet_densities(length)?;
            return Ok(ShootingReport { spec, outlet, residual: norm(&r), iterations: iteration });
        }
        let mut step = solve_dense(jac.clone(), r.iter().map(|&x| -x).collect())?;
        // Halve the step while it would make a flow rate non-positive.
        while q.iter().zip(&step).any(|(&qi, &si)| !(qi + si > T::zero())) {
            step.iter_mut().for_each(|s| *s = *s * T::lit(0.5));
            if norm(&step) <= T::epsilon() {
                return Err(Error::Nonconvergence("shooting step collapsed".into()));
            }
        }
        let q_new: Vec<T> = q.iter().zip(&step).map(|(&a, &b)| a + b).collect();
        let r_new = residual(&q_new)?;
        let dr: Vec<T> = r_new.iter().zip(&r).map(|(&a, &b)| a - b).collect();
        let ss: T = step.iter().map(|&s| s * s).sum();
        if ss > T::zero() {
            for i in 0..n {
                let jd: T = (0..n).map(|j| jac[i][j] * step[j]).sum();
                for j in 0..n {
                    jac[i][j] = jac[i][j] + (dr[i] - jd) * step[j] / ss;
                }
            }
        }
        q = q_new;
        r = r_new;
    }
    Err(Error::Nonconvergence(format!("shooting did not reach {tol} in {max_iter} iterations")))
}
