//! Pressure laws, pressure potentials and the per-component Riemann transform.
//!
//! For a law `p(rho)` the Riemann coordinate is
//!
//! ```text
//! R(rho) = integral_1^rho sqrt(p'(r)) / r dr
//! ```
//!
//! and the two invariants of a component are `R(rho) + v` and `R(rho) - v`.
//! The pressure potential `P` satisfies `p'(rho) = rho P''(rho)`.

use crate::error::{Error, Result, VACUUM};
use crate::numerics::{adaptive_simpson, bracketed_newton};
use crate::scalar::Real;

/// Densities below this value are treated as vacuum by the inverse transform.
pub const RHO_MIN: f64 = 1e-9;

const QUAD_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-10;

/// Monotone piecewise-cubic (PCHIP) pressure table.
///
/// Interior slopes use the weighted harmonic mean of the neighbouring secants
/// and end slopes use the end secants, so every Hermite segment stays strictly
/// increasing and `p'` is strictly positive on the whole table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    rho: Vec<T>,
    p: Vec<T>,
    slope: Vec<T>,
    anchor: T,
    // R and the potential integral evaluated at each knot, measured from `anchor`.
    riemann_knots: Vec<T>,
    potential_knots: Vec<T>,
}

impl<T: Real> Table<T> {
    pub fn new(rho: Vec<T>, p: Vec<T>) -> Result<Self> {
        if rho.len() != p.len() || rho.len() < 2 {
            return Err(Error::Config("pressure table needs at least two (rho, p) pairs of equal length".into()));
        }
        if rho[0] <= T::zero() {
            return Err(Error::Config("pressure table densities must be positive".into()));
        }
        for w in 0..rho.len() - 1 {
            if !(rho[w + 1] > rho[w]) || !(p[w + 1] > p[w]) {
                return Err(Error::Config("pressure table must be strictly increasing in rho and p".into()));
            }
        }
        let n = rho.len();
        let h: Vec<T> = (0..n - 1).map(|k| rho[k + 1] - rho[k]).collect();
        let secant: Vec<T> = (0..n - 1).map(|k| (p[k + 1] - p[k]) / h[k]).collect();
        let mut slope = vec![T::zero(); n];
        slope[0] = secant[0];
        slope[n - 1] = secant[n - 2];
        for k in 1..n - 1 {
            let two = T::lit(2.0);
            let w1 = two * h[k] + h[k - 1];
            let w2 = h[k] + two * h[k - 1];
            slope[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
        }
        let one = T::one();
        let anchor = if rho[0] <= one && one <= rho[n - 1] { one } else { rho[0] };
        let mut table = Table { rho, p, slope, anchor, riemann_knots: Vec::new(), potential_knots: Vec::new() };
        let tol = T::tol(QUAD_TOL);
        let mut rk = Vec::with_capacity(n);
        let mut pk = Vec::with_capacity(n);
        for k in 0..n {
            let x = table.rho[k];
            rk.push(table.piecewise_integral(anchor, x, |r| table.riemann_integrand(r), tol)?);
            pk.push(table.piecewise_integral(anchor, x, |r| table.potential_integrand(r), tol)?);
        }
        table.riemann_knots = rk;
        table.potential_knots = pk;
        Ok(table)
    }

    pub fn densities(&self) -> &[T] {
        &self.rho
    }

    pub fn pressures(&self) -> &[T] {
        &self.p
    }

    /// Lower integration limit of the Riemann coordinate: 1 when the table covers it,
    /// otherwise the smallest tabulated density.
    pub fn anchor(&self) -> T {
        self.anchor
    }

    fn segment(&self, rho: T) -> Result<usize> {
        let n = self.rho.len();
        if !(rho >= self.rho[0] && rho <= self.rho[n - 1]) {
            return Err(Error::Domain { rho: rho.as_f64(), reason: "outside the tabulated density range" });
        }
        let idx = self.rho.partition_point(|&x| x <= rho);
        Ok(idx.saturating_sub(1).min(n - 2))
    }

    fn eval(&self, rho: T) -> Result<(T, T)> {
        let k = self.segment(rho)?;
        let h = self.rho[k + 1] - self.rho[k];
        let t = (rho - self.rho[k]) / h;
        let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let p = h00 * self.p[k] + h10 * h * self.slope[k] + h01 * self.p[k + 1] + h11 * h * self.slope[k + 1];
        let six = T::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = three * t2 - T::lit(4.0) * t + one;
        let d01 = -six * t2 + six * t;
        let d11 = three * t2 - two * t;
        let dp = (d00 * self.p[k] + d01 * self.p[k + 1]) / h + d10 * self.slope[k] + d11 * self.slope[k + 1];
        Ok((p, dp))
    }

    fn riemann_integrand(&self, r: T) -> T {
        self.eval(r).map(|(_, dp)| dp.sqrt() / r).unwrap_or_else(|_| T::nan())
    }

    fn potential_integrand(&self, r: T) -> T {
        self.eval(r).map(|(p, _)| p / (r * r)).unwrap_or_else(|_| T::nan())
    }

    // Integral from `a` to `b` split at the knots so each piece is a smooth cubic.
    fn piecewise_integral<F: Fn(T) -> T>(&self, a: T, b: T, f: F, tol: T) -> Result<T> {
        if a == b {
            return Ok(T::zero());
        }
        let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
        let mut cuts = vec![lo];
        cuts.extend(self.rho.iter().copied().filter(|&x| x > lo && x < hi));
        cuts.push(hi);
        let pieces = T::lit((cuts.len() - 1) as f64);
        let mut acc = T::zero();
        for w in cuts.windows(2) {
            acc = acc + adaptive_simpson(&f, w[0], w[1], tol / pieces)?;
        }
        Ok(sign * acc)
    }

    // Integral of `f` from the anchor to `rho` using the cached knot value nearest below.
    fn integrate_from_anchor<F: Fn(T) -> T>(&self, rho: T, knots: &[T], f: F) -> Result<T> {
        let k = self.segment(rho)?;
        let tol = T::tol(QUAD_TOL);
        Ok(knots[k] + adaptive_simpson(&f, self.rho[k], rho, tol)?)
    }
}

/// Per-component pressure model `p_i(rho)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PressureLaw<T> {
    /// `p = a^2 rho` with sound speed `a`.
    IsothermalIdeal {
        a: T,
    },
    /// `p = a rho^gamma` with `a > 0`, `gamma > 1`.
    Isentropic {
        a: T,
        gamma: T,
    },
    Tabulated(Table<T>),
}

impl<T: Real> PressureLaw<T> {
    pub fn isothermal(a: T) -> Result<Self> {
        let law = PressureLaw::IsothermalIdeal { a };
        law.validate()?;
        Ok(law)
    }

    pub fn isentropic(a: T, gamma: T) -> Result<Self> {
        let law = PressureLaw::Isentropic { a, gamma };
        law.validate()?;
        Ok(law)
    }

    pub fn tabulated(rho: Vec<T>, p: Vec<T>) -> Result<Self> {
        Ok(PressureLaw::Tabulated(Table::new(rho, p)?))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PressureLaw::IsothermalIdeal { a } if !(a > T::zero() && a.is_finite()) => {
                Err(Error::Config(format!("isothermal sound speed must be positive, got {a}")))
            }
            PressureLaw::Isentropic { a, gamma } if !(a > T::zero() && gamma > T::one() && gamma.is_finite()) => {
                Err(Error::Config(format!("isentropic law needs a > 0 and gamma > 1, got a={a}, gamma={gamma}")))
            }
            _ => Ok(()),
        }
    }

    fn check(&self, rho: T) -> Result<()> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::Domain { rho: rho.as_f64(), reason: "density must be positive and finite" });
        }
        Ok(())
    }

    /// Admissible density interval.
    pub fn density_range(&self) -> (T, T) {
        match self {
            PressureLaw::Tabulated(t) => (t.rho[0], t.rho[t.rho.len() - 1]),
            _ => (T::zero(), T::infinity()),
        }
    }

    pub fn pressure(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        match self {
            PressureLaw::IsothermalIdeal { a } => Ok(*a * *a * rho),
            PressureLaw::Isentropic { a, gamma } => Ok(*a * rho.powf(*gamma)),
            PressureLaw::Tabulated(t) => Ok(t.eval(rho)?.0),
        }
    }

    pub fn pressure_derivative(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        match self {
            PressureLaw::IsothermalIdeal { a } => Ok(*a * *a),
            PressureLaw::Isentropic { a, gamma } => Ok(*a * *gamma * rho.powf(*gamma - T::one())),
            PressureLaw::Tabulated(t) => Ok(t.eval(rho)?.1),
        }
    }

    /// `sqrt(p'(rho))`.
    pub fn sound_speed(&self, rho: T) -> Result<T> {
        Ok(self.pressure_derivative(rho)?.sqrt())
    }

    /// `P''(rho) = p'(rho) / rho`.
    pub fn potential_second(&self, rho: T) -> Result<T> {
        Ok(self.pressure_derivative(rho)? / rho)
    }

    /// Pressure potential `P(rho)`, fixed up to an affine function of `rho`.
    pub fn potential(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        match self {
            PressureLaw::IsothermalIdeal { a } => Ok(*a * *a * rho * rho.ln()),
            PressureLaw::Isentropic { a, gamma } => Ok(*a * rho.powf(*gamma) / (*gamma - T::one())),
            PressureLaw::Tabulated(t) => {
                Ok(rho * t.integrate_from_anchor(rho, &t.potential_knots, |r| t.potential_integrand(r))?)
            }
        }
    }

    /// `P'(rho)`, consistent with [`PressureLaw::potential`].
    pub fn potential_first(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        match self {
            PressureLaw::IsothermalIdeal { a } => Ok(*a * *a * (rho.ln() + T::one())),
            PressureLaw::Isentropic { a, gamma } => Ok(*a * *gamma * rho.powf(*gamma - T::one()) / (*gamma - T::one())),
            PressureLaw::Tabulated(t) => {
                let integral = t.integrate_from_anchor(rho, &t.potential_knots, |r| t.potential_integrand(r))?;
                Ok(integral + t.eval(rho)?.0 / rho)
            }
        }
    }

    /// Riemann coordinate `R(rho)`; zero at the anchor density (1 for closed-form laws).
    pub fn riemann(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        match self {
            PressureLaw::IsothermalIdeal { a } => Ok(*a * rho.ln()),
            PressureLaw::Isentropic { a, gamma } => {
                let g1 = *gamma - T::one();
                let two = T::lit(2.0);
                Ok(two * (*a * *gamma).sqrt() / g1 * (rho.powf(g1 / two) - T::one()))
            }
            PressureLaw::Tabulated(t) => t.integrate_from_anchor(rho, &t.riemann_knots, |r| t.riemann_integrand(r)),
        }
    }

    /// Range `(inf, sup)` of the Riemann coordinate over admissible densities.
    pub fn riemann_range(&self) -> (T, T) {
        match self {
            PressureLaw::IsothermalIdeal { .. } => (T::neg_infinity(), T::infinity()),
            PressureLaw::Isentropic { a, gamma } => {
                let g1 = *gamma - T::one();
                (-T::lit(2.0) * (*a * *gamma).sqrt() / g1, T::infinity())
            }
            PressureLaw::Tabulated(t) => (t.riemann_knots[0], t.riemann_knots[t.riemann_knots.len() - 1]),
        }
    }

    /// Inverse of [`PressureLaw::riemann`]. Fails with a range error when `xi`
    /// lies outside the image of the transform or maps below [`RHO_MIN`].
    pub fn riemann_inverse(&self, xi: T) -> Result<T> {
        if !xi.is_finite() {
            return Err(Error::Range { xi: xi.as_f64(), reason: "non-finite riemann coordinate" });
        }
        let rho = match self {
            PressureLaw::IsothermalIdeal { a } => (xi / *a).exp(),
            PressureLaw::Isentropic { a, gamma } => {
                let g1 = *gamma - T::one();
                let two = T::lit(2.0);
                let base = T::one() + xi * g1 / (two * (*a * *gamma).sqrt());
                if base <= T::zero() {
                    return Err(Error::Range { xi: xi.as_f64(), reason: VACUUM });
                }
                base.powf(two / g1)
            }
            PressureLaw::Tabulated(t) => {
                let knots = &t.riemann_knots;
                let n = knots.len();
                if xi < knots[0] || xi > knots[n - 1] {
                    return Err(Error::Range { xi: xi.as_f64(), reason: "outside the tabulated range" });
                }
                let k = knots.partition_point(|&r| r <= xi).saturating_sub(1).min(n - 2);
                bracketed_newton(
                    |r| Ok(self.riemann(r)? - xi),
                    |r| Ok(self.sound_speed(r)? / r),
                    t.rho[k],
                    t.rho[k + 1],
                    T::tol(1e-15),
                    T::tol(ROOT_TOL) * T::lit(1e-2),
                )?
            }
        };
        if !(rho >= T::lit(RHO_MIN)) {
            return Err(Error::Range { xi: xi.as_f64(), reason: VACUUM });
        }
        Ok(rho)
    }
}

/// Density and velocity of one component at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentState<T> {
    pub rho: T,
    pub v: T,
}

impl<T: Real> ComponentState<T> {
    pub fn new(rho: T, v: T) -> Result<Self> {
        if !(rho > T::zero()) {
            return Err(Error::Domain { rho: rho.as_f64(), reason: "density must be positive" });
        }
        Ok(Self { rho, v })
    }

    /// Mass flow rate `q = rho v`.
    pub fn q(&self) -> T {
        self.rho * self.v
    }
}

/// `(R+, R-) = (R(rho) + v, R(rho) - v)`.
pub fn component_to_riemann<T: Real>(law: &PressureLaw<T>, s: ComponentState<T>) -> Result<(T, T)> {
    let r = law.riemann(s.rho)?;
    Ok((r + s.v, r - s.v))
}

/// `v = (R+ - R-)/2`, `rho = R^{-1}((R+ + R-)/2)`.
pub fn riemann_to_component<T: Real>(law: &PressureLaw<T>, r_plus: T, r_minus: T) -> Result<ComponentState<T>> {
    let half = T::lit(0.5);
    let rho = law.riemann_inverse((r_plus + r_minus) * half)?;
    Ok(ComponentState { rho, v: (r_plus - r_minus) * half })
}

/// Characteristic speeds `(v + c, v - c)` with `c = sqrt(p'(rho))`.
pub fn eigenvalues<T: Real>(law: &PressureLaw<T>, s: ComponentState<T>) -> Result<(T, T)> {
    let c = law.sound_speed(s.rho)?;
    Ok((s.v + c, s.v - c))
}
