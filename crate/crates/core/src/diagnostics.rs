//! Relative-energy Lyapunov function, boundary terms, the perturbation integral,
//! the running constants `M`, `N`, `eps_hat`, `beta` and the synchronization
//! envelope certification.

use crate::error::{Error, Result};
use crate::mixture::{BoundaryTrace, MixtureState, PhysicsParams};
use crate::scalar::Real;

/// Per-state values of the quantities whose suprema define `M`, `N` and `eps_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalBounds<T> {
    /// `max_k [ (theta/2) max_i |v_i| + |v_x| ]`.
    pub m: T,
    /// `max_k (theta/2) |v|`.
    pub n: T,
    /// `2 L max_k sum_i rho_i (P_i'' rho_i_x)^2`.
    pub eps_hat_sq: T,
}

impl<T: Real> LocalBounds<T> {
    pub fn max(self, other: Self) -> Self {
        Self { m: self.m.max(other.m), n: self.n.max(other.n), eps_hat_sq: self.eps_hat_sq.max(other.eps_hat_sq) }
    }
}

/// Diagnostics of one state along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsFrame<T> {
    pub t: T,
    pub lyap: T,
    pub bhat: T,
    pub bl: T,
    pub b0: T,
    pub i: T,
    pub energy_total: T,
    pub energy_mix: T,
    pub inlet: BoundaryTrace<T>,
    pub outlet: BoundaryTrace<T>,
    pub local: LocalBounds<T>,
    /// Maxima of `local` over every step taken so far, not only the emitted frames.
    pub running: LocalBounds<T>,
    /// Whether `sign(v_i)` agrees across components in every cell.
    pub sign_consistent: bool,
}

/// Midpoint rule `dx sum_k f(k)`.
fn integrate<T: Real>(state: &MixtureState<T>, f: impl Fn(usize) -> T) -> T {
    state.grid.dx() * (0..state.cells()).map(f).sum::<T>()
}

/// `L^e = int sum_i rho_i u_i^2 / 2 dx`.
pub fn lyapunov<T: Real>(state: &MixtureState<T>) -> T {
    let half = T::lit(0.5);
    integrate(state, |k| {
        let u = state.deviations(k);
        (0..state.components()).map(|i| half * state.rho[i][k] * u[i] * u[i]).sum()
    })
}

/// `(int sum_i H_i dx, int H_mix dx)` with `H_i = rho_i v_i^2 / 2 + P_i(rho_i)` and
/// `H_mix = rho v^2 / 2 + sum_i P_i(rho_i)`.
pub fn energies<T: Real>(state: &MixtureState<T>) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let dx = state.grid.dx();
    let (mut total, mut mix) = (T::zero(), T::zero());
    for k in 0..state.cells() {
        let mut potential = T::zero();
        let mut kinetic = T::zero();
        for (i, law) in state.laws.iter().enumerate() {
            let (r, v) = (state.rho[i][k], state.v[i][k]);
            potential = potential + law.potential(r)?;
            kinetic = kinetic + half * r * v * v;
        }
        let v = state.barycentric_velocity(k);
        total = total + dx * (kinetic + potential);
        mix = mix + dx * (half * state.total_density(k) * v * v + potential);
    }
    Ok((total, mix))
}

/// Residual of `int sum H_i - int H_mix = L^e` and the magnitude it should be compared to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual<T> {
    pub residual: T,
    pub magnitude: T,
}

impl<T: Real> IdentityResidual<T> {
    pub fn relative(&self) -> T {
        if self.magnitude > T::zero() {
            self.residual / self.magnitude
        } else {
            self.residual
        }
    }
}

pub fn energy_identity_check<T: Real>(state: &MixtureState<T>) -> Result<IdentityResidual<T>> {
    let (total, mix) = energies(state)?;
    let lyap = lyapunov(state);
    Ok(IdentityResidual { residual: (total - mix - lyap).abs(), magnitude: total.abs().max(mix.abs()).max(lyap) })
}

/// `-1/2 sum_i rho_i v_i (v - v_i)^2` at one face.
pub fn boundary_term_at<T: Real>(rho: &[T], v: &[T]) -> T {
    let vb = crate::mixture::barycentric(rho, v);
    let half = T::lit(0.5);
    -half * rho.iter().zip(v).map(|(&r, &vi)| r * vi * (vb - vi) * (vb - vi)).sum::<T>()
}

/// `(B_hat, B_L, B_0)` from explicit face states.
pub fn boundary_terms_from_traces<T: Real>(inlet: &BoundaryTrace<T>, outlet: &BoundaryTrace<T>) -> (T, T, T) {
    let bl = boundary_term_at(&outlet.rho, &outlet.v);
    let b0 = boundary_term_at(&inlet.rho, &inlet.v);
    (bl - b0, bl, b0)
}

/// `(B_hat, B_L, B_0)` using the first and last cells as boundary values.
pub fn boundary_terms<T: Real>(state: &MixtureState<T>) -> (T, T, T) {
    let last = state.cells() - 1;
    let inlet = BoundaryTrace { rho: state.rho_at(0), v: state.v_at(0) };
    let outlet = BoundaryTrace { rho: state.rho_at(last), v: state.v_at(last) };
    boundary_terms_from_traces(&inlet, &outlet)
}

/// Central differences in the interior, first-order one-sided at the ends.
pub fn gradient<T: Real>(f: &[T], dx: T) -> Vec<T> {
    let k = f.len();
    if k < 2 {
        return vec![T::zero(); k];
    }
    (0..k)
        .map(|j| {
            if j == 0 {
                (f[1] - f[0]) / dx
            } else if j == k - 1 {
                (f[k - 1] - f[k - 2]) / dx
            } else {
                (f[j + 1] - f[j - 1]) / (dx + dx)
            }
        })
        .collect()
}

/// `rho_i_x` per component and cell.
pub fn density_gradients<T: Real>(state: &MixtureState<T>) -> Vec<Vec<T>> {
    state.rho.iter().map(|r| gradient(r, state.grid.dx())).collect()
}

/// `v_x` of the barycentric velocity.
pub fn velocity_gradient<T: Real>(state: &MixtureState<T>) -> Vec<T> {
    let v: Vec<T> = (0..state.cells()).map(|k| state.barycentric_velocity(k)).collect();
    gradient(&v, state.grid.dx())
}

/// `I = sum_i int u_i rho_i P_i''(rho_i) rho_i_x dx`.
pub fn integral_i<T: Real>(state: &MixtureState<T>) -> Result<T> {
    let grads = density_gradients(state);
    let dx = state.grid.dx();
    let mut acc = T::zero();
    for k in 0..state.cells() {
        let u = state.deviations(k);
        for (i, law) in state.laws.iter().enumerate() {
            let r = state.rho[i][k];
            acc = acc + dx * u[i] * r * law.potential_second(r)? * grads[i][k];
        }
    }
    Ok(acc)
}

pub fn local_bounds<T: Real>(state: &MixtureState<T>, params: &PhysicsParams<T>) -> Result<LocalBounds<T>> {
    let half_theta = params.theta * T::lit(0.5);
    let vx = velocity_gradient(state);
    let grads = density_gradients(state);
    let mut out = LocalBounds::<T>::default();
    for k in 0..state.cells() {
        let vmax = (0..state.components()).map(|i| state.v[i][k].abs()).fold(T::zero(), T::max);
        out.m = out.m.max(half_theta * vmax + vx[k].abs());
        out.n = out.n.max(half_theta * state.barycentric_velocity(k).abs());
        let mut s = T::zero();
        for (i, law) in state.laws.iter().enumerate() {
            let r = state.rho[i][k];
            let g = law.potential_second(r)? * grads[i][k];
            s = s + r * g * g;
        }
        out.eps_hat_sq = out.eps_hat_sq.max(s);
    }
    out.eps_hat_sq = out.eps_hat_sq * T::lit(2.0) * state.grid.length;
    Ok(out)
}

pub fn sign_consistent<T: Real>(state: &MixtureState<T>) -> bool {
    (0..state.cells()).all(|k| {
        let pos = state.v.iter().any(|v| v[k] > T::zero());
        let neg = state.v.iter().any(|v| v[k] < T::zero());
        !(pos && neg)
    })
}

/// Evaluates every frame quantity of `state` with the given boundary face states.
pub fn frame<T: Real>(
    state: &MixtureState<T>,
    params: &PhysicsParams<T>,
    t: T,
    inlet: BoundaryTrace<T>,
    outlet: BoundaryTrace<T>,
    running: LocalBounds<T>,
) -> Result<DiagnosticsFrame<T>> {
    let (bhat, bl, b0) = boundary_terms_from_traces(&inlet, &outlet);
    let (energy_total, energy_mix) = energies(state)?;
    let local = local_bounds(state, params)?;
    Ok(DiagnosticsFrame {
        t,
        lyap: lyapunov(state),
        bhat,
        bl,
        b0,
        i: integral_i(state)?,
        energy_total,
        energy_mix,
        inlet,
        outlet,
        local,
        running: running.max(local),
        sign_consistent: sign_consistent(state),
    })
}

/// The constants of the synchronization estimate over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport<T> {
    pub m: T,
    pub n: T,
    pub eps_hat: T,
    pub omega_bar: T,
    pub beta: T,
    /// `eps_hat^2 / (4 beta^2)`, defined only for `beta > 0`.
    pub s0: Option<T>,
    pub beta_positive: bool,
}

impl<T: Real> BoundsReport<T> {
    pub fn from_bounds(bounds: LocalBounds<T>, omega_bar: T) -> Self {
        let eps_hat = bounds.eps_hat_sq.max(T::zero()).sqrt();
        let beta = omega_bar - bounds.m - bounds.n;
        let beta_positive = beta > T::zero();
        let s0 = beta_positive.then(|| eps_hat * eps_hat / (T::lit(4.0) * beta * beta));
        Self { m: bounds.m, n: bounds.n, eps_hat, omega_bar, beta, s0, beta_positive }
    }
}

pub fn running_bounds<T: Real>(frames: &[DiagnosticsFrame<T>], params: &PhysicsParams<T>) -> Result<BoundsReport<T>> {
    let bounds = frames
        .iter()
        .map(|f| f.running.max(f.local))
        .reduce(LocalBounds::max)
        .ok_or_else(|| Error::Degenerate("running bounds of an empty trajectory".into()))?;
    Ok(BoundsReport::from_bounds(bounds, params.omega_bar))
}

/// Slack granted to the envelope comparisons: `bound (1 + relative) + absolute`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeTolerance<T> {
    pub relative: T,
    pub absolute: T,
}

impl<T: Real> Default for EnvelopeTolerance<T> {
    fn default() -> Self {
        Self { relative: T::lit(0.05), absolute: T::lit(1e-10) }
    }
}

impl<T: Real> EnvelopeTolerance<T> {
    fn admits(&self, value: T, bound: T) -> bool {
        value <= bound * (T::one() + self.relative) + self.absolute
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation<T> {
    pub t: T,
    pub value: T,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck<T> {
    pub passed: bool,
    pub checked: usize,
    pub first_violation: Option<Violation<T>>,
    /// Largest `value / bound` over the checked samples with a positive bound.
    pub max_ratio: T,
}

impl<T: Real> EnvelopeCheck<T> {
    fn evaluate(samples: impl Iterator<Item = (T, T, T)>, tol: &EnvelopeTolerance<T>) -> Self {
        let mut out = Self { passed: true, checked: 0, first_violation: None, max_ratio: T::zero() };
        for (t, value, bound) in samples {
            out.checked += 1;
            if bound > T::zero() {
                out.max_ratio = out.max_ratio.max(value / bound);
            }
            if !tol.admits(value, bound) && out.first_violation.is_none() {
                out.passed = false;
                out.first_violation = Some(Violation { t, value, bound });
            }
        }
        out
    }
}

/// `B_hat`, `B_L` and `I` at one time, for the hypothesis of the pure exponential decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisSample<T> {
    pub t: T,
    pub bhat: T,
    pub bl: T,
    pub i: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<T> {
    pub bhat_le_i: bool,
    pub i_ge_bl: bool,
    pub first_bhat_violation: Option<T>,
    pub first_bl_violation: Option<T>,
}

pub fn check_decay_hypothesis<T: Real>(samples: &[HypothesisSample<T>], t_star: T) -> HypothesisReport<T> {
    let tail = || samples.iter().filter(|s| s.t >= t_star);
    let first_bhat_violation = tail().find(|s| s.bhat > s.i).map(|s| s.t);
    let first_bl_violation = tail().find(|s| s.i < s.bl).map(|s| s.t);
    HypothesisReport {
        bhat_le_i: first_bhat_violation.is_none(),
        i_ge_bl: first_bl_violation.is_none(),
        first_bhat_violation,
        first_bl_violation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport<T> {
    pub beta: T,
    pub eps_hat: T,
    pub s0: T,
    pub tolerance: EnvelopeTolerance<T>,
    pub envelope_i: EnvelopeCheck<T>,
    pub t_star: Option<T>,
    pub envelope_ii: Option<EnvelopeCheck<T>>,
    pub hypothesis: Option<HypothesisReport<T>>,
}

impl<T: Real> CertReport<T> {
    pub fn passed(&self) -> bool {
        self.envelope_i.passed && self.envelope_ii.as_ref().is_none_or(|c| c.passed)
    }
}

/// `(eps/(2 beta) + e^{-beta t}(sqrt(L0) - eps/(2 beta)))^2`.
pub fn envelope_bound<T: Real>(l0: T, beta: T, eps_hat: T, t: T) -> T {
    let c = eps_hat / (T::lit(2.0) * beta);
    let s = c + (-beta * t).exp() * (l0.max(T::zero()).sqrt() - c);
    s * s
}

/// Checks the synchronization envelope on a `(t, L^e)` series sorted in `t`, and the
/// pure exponential decay from `t_star` on when given. `hypothesis` samples, when
/// supplied, are tested for `B_hat <= I` and `I >= B_L` on `[t_star, T]`.
pub fn certify_envelope<T: Real>(
    series: &[(T, T)],
    beta: T,
    eps_hat: T,
    t_star: Option<T>,
    hypothesis: Option<&[HypothesisSample<T>]>,
    tol: EnvelopeTolerance<T>,
) -> Result<CertReport<T>> {
    if !(beta > T::zero()) {
        return Err(Error::Config(format!("certification needs beta > 0, got {beta}")));
    }
    let &(t0, l0) = series.first().ok_or_else(|| Error::Config("empty L^e series".into()))?;
    if series.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Config("L^e series must be sorted in time".into()));
    }
    let envelope_i =
        EnvelopeCheck::evaluate(series.iter().map(|&(t, l)| (t, l, envelope_bound(l0, beta, eps_hat, t - t0))), &tol);
    let (envelope_ii, hyp) = match t_star {
        None => (None, None),
        Some(ts) => {
            let start = series.partition_point(|&(t, _)| t < ts);
            let Some(&(t_s, l_s)) = series.get(start) else {
                return Err(Error::Config(format!("t_star={ts} lies beyond the series")));
            };
            let two_beta = T::lit(2.0) * beta;
            let check = EnvelopeCheck::evaluate(
                series[start..].iter().map(|&(t, l)| (t, l, (-two_beta * (t - t_s)).exp() * l_s)),
                &tol,
            );
            (Some(check), hypothesis.map(|h| check_decay_hypothesis(h, ts)))
        }
    };
    Ok(CertReport {
        beta,
        eps_hat,
        s0: eps_hat * eps_hat / (T::lit(4.0) * beta * beta),
        tolerance: tol,
        envelope_i,
        t_star,
        envelope_ii,
        hypothesis: hyp,
    })
}

/// `y(t) = alpha^2/(4 beta^2) (1 + c0 e^{-beta t})^2`, a solution of `y' = alpha sqrt(y) - 2 beta y`.
pub fn ode_remark_solution<T: Real>(alpha: T, beta: T, c0: T, t: T) -> Result<T> {
    if !(beta > T::zero()) {
        return Err(Error::Config(format!("ode remark solution needs beta > 0, got {beta}")));
    }
    // c0 = -1 is the branch leaving y(0) = 0; below it 1 + c0 e^{-beta t} changes sign.
    if !(c0 >= -T::one()) {
        return Err(Error::Domain { rho: c0.as_f64(), reason: "ode remark solution needs C0 >= -1" });
    }
    let s = T::one() + c0 * (-beta * t).exp();
    Ok(alpha * alpha / (T::lit(4.0) * beta * beta) * s * s)
}
