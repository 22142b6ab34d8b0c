//! n-component mixture state on a uniform 1-D grid and the pointwise
//! barycentric quantities built from it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gas::{ComponentState, PressureLaw};
use crate::scalar::Real;

/// Uniform cell-centred grid on `[0, length]`: `x_k = (k + 1/2) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub length: T,
    pub cells: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(length: T, cells: usize) -> Result<Self> {
        if !(length > T::zero()) || cells == 0 {
            return Err(Error::Config(format!("grid needs length > 0 and at least one cell, got {length}, {cells}")));
        }
        Ok(Self { length, cells })
    }

    pub fn dx(&self) -> T {
        self.length / T::lit(self.cells as f64)
    }

    pub fn x(&self, k: usize) -> T {
        (T::lit(k as f64) + T::lit(0.5)) * self.dx()
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.cells).map(|k| self.x(k)).collect()
    }
}

/// Friction ratio `theta = lambda_fric / D` and velocity-coupling constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams<T> {
    pub theta: T,
    pub omega_bar: T,
}

impl<T: Real> PhysicsParams<T> {
    pub fn new(theta: T, omega_bar: T) -> Result<Self> {
        if !(theta >= T::zero()) || !(omega_bar >= T::zero()) {
            return Err(Error::Config(format!("need theta >= 0 and omega_bar >= 0, got {theta}, {omega_bar}")));
        }
        Ok(Self { theta, omega_bar })
    }
}

/// `v = sum_i rho_i v_i / sum_i rho_i`.
pub fn barycentric<T: Real>(rho: &[T], v: &[T]) -> T {
    let total: T = rho.iter().copied().sum();
    let flux: T = rho.iter().zip(v).map(|(&r, &u)| r * u).sum();
    flux / total
}

/// `u_i = v_i - v`.
pub fn deviations_of<T: Real>(rho: &[T], v: &[T]) -> Vec<T> {
    let vb = barycentric(rho, v);
    v.iter().map(|&vi| vi - vb).collect()
}

/// `(theta/2) v |v|` written through the Riemann invariants as `(theta/8)|R+ - R-|(R+ - R-)`.
pub fn friction_from_invariants<T: Real>(theta: T, r_plus: T, r_minus: T) -> T {
    let d = r_plus - r_minus;
    theta / T::lit(8.0) * d.abs() * d
}

/// Component densities and velocities at one boundary face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace<T> {
    pub rho: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn barycentric(&self) -> T {
        barycentric(&self.rho, &self.v)
    }
}

/// Grid-sampled densities and velocities of all components at one time.
///
/// `rho[i][k]` and `v[i][k]` hold component `i` at cell `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState<T> {
    pub laws: Arc<[PressureLaw<T>]>,
    pub grid: Grid<T>,
    pub rho: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Real> MixtureState<T> {
    pub fn new(
        laws: impl Into<Arc<[PressureLaw<T>]>>,
        grid: Grid<T>,
        rho: Vec<Vec<T>>,
        v: Vec<Vec<T>>,
    ) -> Result<Self> {
        let laws = laws.into();
        let n = laws.len();
        if n == 0 {
            return Err(Error::Config("a mixture needs at least one component".into()));
        }
        if rho.len() != n || v.len() != n {
            return Err(Error::Config(format!("expected {n} density and velocity profiles")));
        }
        for i in 0..n {
            if rho[i].len() != grid.cells || v[i].len() != grid.cells {
                return Err(Error::Config(format!("component {i} profile length differs from {} cells", grid.cells)));
            }
            if let Some(k) = rho[i].iter().position(|&r| !(r > T::zero() && r.is_finite())) {
                return Err(Error::Domain { rho: rho[i][k].as_f64(), reason: "mixture densities must be positive" });
            }
        }
        Ok(Self { laws, grid, rho, v })
    }

    /// Builds a state by sampling `f(i, x) -> (rho, v)` at the cell centres.
    pub fn from_fn<F>(laws: impl Into<Arc<[PressureLaw<T>]>>, grid: Grid<T>, f: F) -> Result<Self>
    where
        F: Fn(usize, T) -> (T, T),
    {
        let laws = laws.into();
        let n = laws.len();
        let mut rho = vec![Vec::with_capacity(grid.cells); n];
        let mut v = vec![Vec::with_capacity(grid.cells); n];
        for i in 0..n {
            for k in 0..grid.cells {
                let (r, u) = f(i, grid.x(k));
                rho[i].push(r);
                v[i].push(u);
            }
        }
        Self::new(laws, grid, rho, v)
    }

    pub fn components(&self) -> usize {
        self.laws.len()
    }

    pub fn cells(&self) -> usize {
        self.grid.cells
    }

    pub fn component(&self, i: usize, k: usize) -> ComponentState<T> {
        ComponentState { rho: self.rho[i][k], v: self.v[i][k] }
    }

    /// Densities of every component at cell `k`.
    pub fn rho_at(&self, k: usize) -> Vec<T> {
        self.rho.iter().map(|r| r[k]).collect()
    }

    pub fn v_at(&self, k: usize) -> Vec<T> {
        self.v.iter().map(|v| v[k]).collect()
    }

    pub fn total_density(&self, k: usize) -> T {
        self.rho.iter().map(|r| r[k]).sum()
    }

    pub fn barycentric_velocity(&self, k: usize) -> T {
        barycentric(&self.rho_at(k), &self.v_at(k))
    }

    pub fn deviations(&self, k: usize) -> Vec<T> {
        deviations_of(&self.rho_at(k), &self.v_at(k))
    }

    /// Momentum exchange `G_i = omega_bar rho_i u_i`; sums to zero over components.
    pub fn coupling_terms(&self, params: &PhysicsParams<T>, k: usize) -> Vec<T> {
        self.deviations(k).into_iter().zip(&self.rho).map(|(u, r)| params.omega_bar * r[k] * u).collect()
    }

    /// Source `vartheta_i` of the diagonal system at cell `k`, velocity form:
    /// `(theta/8)|R+ - R-|(R+ - R-) + omega_bar u_i`. The invariant `R+_i` receives
    /// `-vartheta_i` and `R-_i` receives `+vartheta_i`.
    pub fn source_vartheta(&self, params: &PhysicsParams<T>, k: usize) -> Vec<T> {
        let two = T::lit(2.0);
        self.deviations(k)
            .into_iter()
            .enumerate()
            .map(|(i, u)| {
                // R+ - R- = 2 v independently of the density anchor.
                let d = two * self.v[i][k];
                friction_from_invariants(params.theta, d, T::zero()) + params.omega_bar * u
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(rho: &[&[f64]], v: &[&[f64]]) -> MixtureState<f64> {
        let n = rho.len();
        let laws: Vec<_> = (0..n).map(|_| PressureLaw::isothermal(1.0).unwrap()).collect();
        let grid = Grid::new(1.0, rho[0].len()).unwrap();
        MixtureState::new(laws, grid, rho.iter().map(|r| r.to_vec()).collect(), v.iter().map(|r| r.to_vec()).collect())
            .unwrap()
    }

    #[test]
    fn grid_is_cell_centred() {
        let g = Grid::new(2.0, 4).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.centers(), vec![0.25, 0.75, 1.25, 1.75]);
        assert!(Grid::new(0.0, 4).is_err());
    }

    #[test]
    fn barycentric_examples() {
        assert_eq!(state(&[&[1.0], &[1.0]], &[&[2.0], &[4.0]]).barycentric_velocity(0), 3.0);
        assert_eq!(state(&[&[3.0], &[1.0]], &[&[0.0], &[4.0]]).barycentric_velocity(0), 1.0);
        assert_eq!(state(&[&[0.7]], &[&[5.0]]).barycentric_velocity(0), 5.0);
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(state(&[&[1.0], &[1.0]], &[&[2.0], &[4.0]]).deviations(0), vec![-1.0, 1.0]);
        assert_eq!(state(&[&[1.0], &[5.0]], &[&[0.3], &[0.3]]).deviations(0), vec![0.0, 0.0]);
        let s = state(&[&[1.0], &[2.0], &[1.0]], &[&[1.0], &[2.0], &[3.0]]);
        assert_eq!(s.barycentric_velocity(0), 2.0);
        let u = s.deviations(0);
        assert_eq!(u, vec![-1.0, 0.0, 1.0]);
        assert_eq!(u.iter().zip([1.0, 2.0, 1.0]).map(|(u, r)| u * r).sum::<f64>(), 0.0);
    }

    #[test]
    fn coupling_examples() {
        let p = PhysicsParams::new(0.0, 2.0).unwrap();
        assert_eq!(state(&[&[1.0], &[3.0]], &[&[0.5], &[0.5]]).coupling_terms(&p, 0), vec![0.0, 0.0]);
        assert_eq!(state(&[&[1.0], &[1.0]], &[&[2.0], &[4.0]]).coupling_terms(&p, 0), vec![-2.0, 2.0]);
        let p = PhysicsParams::new(0.0, 5.0).unwrap();
        let s = state(&[&[1.0], &[2.0], &[1.0]], &[&[1.0], &[2.0], &[3.0]]);
        assert_eq!(s.coupling_terms(&p, 0), vec![-5.0, 0.0, 5.0]);
    }

    #[test]
    fn vartheta_examples() {
        let p = PhysicsParams::new(0.3, 4.0).unwrap();
        assert_eq!(state(&[&[1.0], &[2.0]], &[&[0.0], &[0.0]]).source_vartheta(&p, 0), vec![0.0, 0.0]);
        let p = PhysicsParams::new(0.0, 1.0).unwrap();
        assert_eq!(state(&[&[1.0], &[1.0]], &[&[2.0], &[4.0]]).source_vartheta(&p, 0), vec![-1.0, 1.0]);
        let p = PhysicsParams::new(8.0, 0.0).unwrap();
        let s = state(&[&[1.3]], &[&[1.0]]);
        assert_eq!(s.source_vartheta(&p, 0), vec![4.0]);
        assert_eq!(friction_from_invariants(8.0, 1.0, -1.0), 4.0);
    }

    #[test]
    fn vartheta_matches_velocity_form_source() {
        // (theta/2) v|v| + omega_bar u for mixed signs and densities away from one.
        let p = PhysicsParams::new(0.7, 3.0).unwrap();
        let s = state(&[&[0.4], &[2.5], &[1.1]], &[&[-0.3], &[1.2], &[0.8]]);
        let u = s.deviations(0);
        for (i, th) in s.source_vartheta(&p, 0).into_iter().enumerate() {
            let v = s.v[i][0];
            let expected = 0.35 * v * v.abs() + 3.0 * u[i];
            assert!((th - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_states_are_rejected() {
        let laws = vec![PressureLaw::isothermal(1.0).unwrap()];
        let g = Grid::new(1.0, 2).unwrap();
        assert!(MixtureState::new(laws.clone(), g, vec![vec![1.0, 0.0]], vec![vec![0.0, 0.0]]).is_err());
        assert!(MixtureState::new(laws.clone(), g, vec![vec![1.0]], vec![vec![0.0]]).is_err());
        assert!(MixtureState::<f64>::new(Vec::new(), g, vec![], vec![]).is_err());
        assert!(PhysicsParams::new(-1.0, 1.0).is_err());
    }
}
