use blendflow_core::diagnostics::{energy_identity_check, lyapunov};
use blendflow_core::gas::PressureLaw;
use blendflow_core::mixture::{Grid, MixtureState, PhysicsParams};
use proptest::prelude::*;

fn law(kind: usize, a: f64) -> PressureLaw<f64> {
    match kind {
        0 => PressureLaw::isothermal(a).unwrap(),
        _ => PressureLaw::isentropic(a, 1.2 + 0.2 * a).unwrap(),
    }
}

prop_compose! {
    fn mixture()(n in 1usize..=5, cells in 1usize..6)
        (rho in proptest::collection::vec(proptest::collection::vec(0.05f64..20.0, cells), n),
         v in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, cells), n),
         kinds in proptest::collection::vec((0usize..2, 0.3f64..3.0), n),
         cells in Just(cells))
        -> MixtureState<f64> {
        let laws: Vec<_> = kinds.iter().map(|&(k, a)| law(k, a)).collect();
        MixtureState::new(laws, Grid::new(1.0, cells).unwrap(), rho, v).unwrap()
    }
}

/// `sum_i rho_i |v_i|`, the size of the terms that cancel in the momentum sums.
fn momentum_scale(s: &MixtureState<f64>, k: usize) -> f64 {
    (0..s.components()).map(|i| s.rho[i][k] * s.v[i][k].abs()).sum::<f64>().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn deviations_have_zero_momentum(s in mixture()) {
        for k in 0..s.cells() {
            let u = s.deviations(k);
            let sum: f64 = (0..s.components()).map(|i| s.rho[i][k] * u[i]).sum();
            prop_assert!(sum.abs() <= 1e-12 * momentum_scale(&s, k));
        }
    }

    #[test]
    fn coupling_sums_to_zero(s in mixture(), omega in 0.0f64..100.0) {
        let p = PhysicsParams::new(0.1, omega).unwrap();
        for k in 0..s.cells() {
            let g = s.coupling_terms(&p, k);
            prop_assert!(g.iter().sum::<f64>().abs() <= 1e-12 * omega * momentum_scale(&s, k));
        }
    }

    #[test]
    fn kinetic_decomposition(s in mixture()) {
        // sum rho_i v_i u_i = sum rho_i u_i^2 and sum rho_i v_i^2 = rho v^2 + sum rho_i u_i^2.
        for k in 0..s.cells() {
            let u = s.deviations(k);
            let v = s.barycentric_velocity(k);
            let n = s.components();
            let lhs: f64 = (0..n).map(|i| s.rho[i][k] * s.v[i][k] * u[i]).sum();
            let rhs: f64 = (0..n).map(|i| s.rho[i][k] * u[i] * u[i]).sum();
            let total: f64 = (0..n).map(|i| s.rho[i][k] * s.v[i][k] * s.v[i][k]).sum();
            let scale = total.max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
            prop_assert!((total - s.total_density(k) * v * v - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn energy_identity(s in mixture()) {
        let r = energy_identity_check(&s).unwrap();
        prop_assert!(r.relative() <= 1e-12, "{r:?}");
        prop_assert!(lyapunov(&s) >= 0.0);
    }
}

#[test]
fn single_component_has_no_relative_energy() {
    let s = MixtureState::new(
        vec![law(0, 1.0)],
        Grid::new(2.0, 3).unwrap(),
        vec![vec![1.0, 2.0, 3.0]],
        vec![vec![0.1, -4.0, 2.0]],
    )
    .unwrap();
    assert_eq!(lyapunov(&s), 0.0);
}
