//! Small numerical kernels: adaptive quadrature, bracketed root finding,
//! an embedded Runge-Kutta 5(4) integrator and a dense linear solve.

use crate::error::{Error, Result};
use crate::scalar::Real;

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH).ok_or(Error::Quadrature {
        a: a.as_f64(),
        b: b.as_f64(),
        tol: tol.as_f64(),
    })
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Option<T> {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= T::lit(15.0) * tol {
        return Some(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, tol * half, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, tol * half, depth - 1)?;
    Some(l + r)
}

/// Solves `g(x) = 0` on a bracket `[lo, hi]` with `g(lo) <= 0 <= g(hi)` (increasing `g`),
/// using Newton steps that fall back to bisection whenever they leave the bracket.
pub fn bracketed_newton<T: Real, G, D>(g: G, dg: D, mut lo: T, mut hi: T, xtol: T, ftol: T) -> Result<T>
where
    G: Fn(T) -> Result<T>,
    D: Fn(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let mut x = (lo + hi) * half;
    for _ in 0..200 {
        let gx = g(x)?;
        if gx.abs() <= ftol {
            return Ok(x);
        }
        if gx < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= xtol * (T::one() + x.abs()) {
            return Ok((lo + hi) * half);
        }
        let slope = dg(x)?;
        let newton = x - gx / slope;
        x = if slope > T::zero() && newton > lo && newton < hi { newton } else { (lo + hi) * half };
    }
    Err(Error::RootFinding { target: 0.0 })
}

/// Solves the dense system `a x = b` in place by Gaussian elimination with partial pivoting.
pub fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if a[pivot][col].abs() <= T::min_positive_value() {
            return Err(Error::Degenerate("singular matrix in dense solve".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Controls for [`dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeTolerance<T> {
    fn default() -> Self {
        Self { rtol: T::tol(1e-11), atol: T::tol(1e-13), max_steps: 200_000 }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(x, y)` from `x0` through every point of `stops` (ascending,
/// all `>= x0`) with adaptive Dormand-Prince 5(4) steps. Steps are clipped so
/// each stop is hit exactly; the states at the stops are returned in order.
pub fn dopri5<T: Real, F>(f: F, x0: T, y0: &[T], stops: &[T], tol: OdeTolerance<T>) -> Result<Vec<Vec<T>>>
where
    F: Fn(T, &[T]) -> Result<Vec<T>>,
{
    let n = y0.len();
    let mut x = x0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(stops.len());
    let span = stops.last().map(|&s| s - x0).unwrap_or_else(T::zero);
    let mut h = if span > T::zero() { span * T::lit(1e-3) } else { T::one() };
    let mut k1 = f(x, &y)?;
    let mut steps = 0usize;
    let combine = |y: &[T], h: T, terms: &[(f64, &Vec<T>)]| -> Vec<T> {
        (0..n).map(|i| y[i] + h * terms.iter().fold(T::zero(), |acc, (c, k)| acc + T::lit(*c) * k[i])).collect()
    };
    for &stop in stops {
        while x < stop {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Nonconvergence(format!("dopri5 exceeded {} steps", tol.max_steps)));
            }
            let last = stop - x <= h;
            let hh = if last { stop - x } else { h };
            let k2 = f(x + T::lit(0.2) * hh, &combine(&y, hh, &[(A21, &k1)]))?;
            let k3 = f(x + T::lit(0.3) * hh, &combine(&y, hh, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(x + T::lit(0.8) * hh, &combine(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 =
                f(x + T::lit(8.0 / 9.0) * hh, &combine(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
            let k6 = f(x + hh, &combine(&y, hh, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
            let y_new = combine(&y, hh, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + hh, &y_new)?;
            let mut err = T::zero();
            for i in 0..n {
                let e = hh
                    * (T::lit(E1) * k1[i]
                        + T::lit(E3) * k3[i]
                        + T::lit(E4) * k4[i]
                        + T::lit(E5) * k5[i]
                        + T::lit(E6) * k6[i]
                        + T::lit(E7) * k7[i]);
                let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                h = hh * T::lit(0.25);
                continue;
            }
            if err <= T::one() {
                x = if last { stop } else { x + hh };
                y = y_new;
                k1 = k7;
            }
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            };
            // Keep the untruncated step size when the step was only clipped to hit a stop.
            h = if last && err <= T::one() { h.max(hh * factor) } else { hh * factor };
            if h <= T::epsilon() * (T::one() + x.abs()) {
                return Err(Error::Nonconvergence(format!("step size underflow at x={}", x.as_f64())));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(&|x: f64| 1.0 / x, 1.0, std::f64::consts::E, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn simpson_reports_unreachable_tolerance() {
        let r = adaptive_simpson(&|x: f64| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn bracketed_newton_finds_cube_root() {
        let r = bracketed_newton(|x: f64| Ok(x * x * x - 2.0), |x| Ok(3.0 * x * x), 0.0, 2.0, 1e-15, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn dense_solve_matches_hand_computation() {
        let a: Vec<Vec<f64>> = vec![vec![0.0, 2.0], vec![1.0, 1.0]];
        let x = solve_dense(a, vec![4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dopri5_hits_every_stop_of_exponential_decay() {
        let stops: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
        let ys = dopri5(|_, y: &[f64]| Ok(vec![-y[0]]), 0.0, &[1.0], &stops, OdeTolerance::default()).unwrap();
        for (s, y) in stops.iter().zip(&ys) {
            assert!((y[0] - (-s).exp()).abs() < 1e-10, "{s}: {}", y[0]);
        }
    }
}
