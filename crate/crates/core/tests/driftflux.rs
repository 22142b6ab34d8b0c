use blendflow_core::driftflux::{compare_models, field_distance, run_driftflux, DriftFluxState};
use blendflow_core::gas::PressureLaw;
use blendflow_core::mixture::{Grid, MixtureState, PhysicsParams};
use blendflow_core::oracles::{example1_boundary, example1_state, example1_velocity};
use blendflow_core::solver::{run, BoundaryConditions, Discretization, Scenario};

fn single_gas(cells: usize) -> Scenario<f64> {
    let grid = Grid::new(1.0, cells).unwrap();
    let initial = MixtureState::from_fn(vec![PressureLaw::isothermal(1.0).unwrap()], grid, |_, x: f64| {
        (1.0 + 0.1 * (std::f64::consts::PI * x).sin(), 0.3)
    })
    .unwrap();
    Scenario {
        initial,
        bc: BoundaryConditions::constant(0.3, &[1.0]),
        params: PhysicsParams::new(0.1, 0.0).unwrap(),
        disc: Discretization::new(cells, 0.9, 0.5),
    }
}

fn coarsen(fine: &MixtureState<f64>) -> DriftFluxState<f64> {
    let cells = fine.cells() / 2;
    let grid = Grid::new(fine.grid.length, cells).unwrap();
    let avg = |f: &[f64]| (0..cells).map(|k| 0.5 * (f[2 * k] + f[2 * k + 1])).collect::<Vec<_>>();
    let rho: Vec<Vec<f64>> = fine.rho.iter().map(|r| avg(r)).collect();
    let q: Vec<f64> = avg(&(0..fine.cells()).map(|k| fine.rho[0][k] * fine.v[0][k]).collect::<Vec<_>>());
    let v = q.iter().zip(&rho[0]).map(|(q, r)| q / r).collect();
    DriftFluxState::new(fine.laws.clone(), grid, rho, v).unwrap()
}

#[test]
fn single_gas_models_agree_within_discretization_error() {
    let coarse = single_gas(128);
    let fine = single_gas(256);
    let full = run(&coarse).unwrap().final_state;
    let full_fine = run(&fine).unwrap().final_state;
    let self_error = field_distance(&full, &coarsen(&full_fine));
    let reduced =
        run_driftflux(&DriftFluxState::from_mixture(&coarse.initial), &coarse.bc, &coarse.params, &coarse.disc)
            .unwrap();
    let distance = field_distance(&full, &reduced);
    assert!(distance <= 2.0 * self_error, "{distance} vs {self_error}");
}

#[test]
fn reduced_model_tracks_uniform_decay() {
    let laws: Vec<_> = [1.0, 3.0].iter().map(|&a| PressureLaw::isothermal(a).unwrap()).collect();
    let rho0 = [1.0, 2.0];
    let initial = example1_state(laws, Grid::new(1.0, 64).unwrap(), &rho0, 1.0, 0.2, 0.0).unwrap();
    let disc = Discretization::new(64, 0.9, 10.0);
    let out = run_driftflux(
        &DriftFluxState::from_mixture(&initial),
        &example1_boundary(&rho0, 1.0, 0.2),
        &PhysicsParams::new(0.2, 1.0).unwrap(),
        &disc,
    )
    .unwrap();
    let expected = example1_velocity::<f64>(1.0, 0.2, 10.0);
    for &v in &out.v {
        assert!(((v - expected) / expected).abs() < 1e-3);
    }
    for (r, r0) in out.rho.iter().zip(rho0) {
        let dev = r.iter().map(|&x| (x - r0).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-5, "{dev}");
    }
}

#[test]
fn reduced_mass_change_matches_boundary_flux() {
    let sc = single_gas(64);
    let mut disc = sc.disc.clone();
    disc.t_end = 1e-3;
    let s0 = DriftFluxState::from_mixture(&sc.initial);
    let s1 = run_driftflux(&s0, &sc.bc, &sc.params, &disc).unwrap();
    let dx = sc.initial.grid.dx();
    let mass = |s: &DriftFluxState<f64>| s.rho[0].iter().sum::<f64>() * dx;
    let inflow = 0.3 * s0.rho[0][0];
    let outflow = s0.rho[0][63] * s0.v[63];
    let predicted = (inflow - outflow) * disc.t_end;
    let change = mass(&s1) - mass(&s0);
    assert!((change - predicted).abs() < 0.05 * predicted.abs().max(1e-4), "{change} vs {predicted}");
}

fn desynchronized(omega: f64) -> Scenario<f64> {
    let grid = Grid::new(1.0, 64).unwrap();
    let laws: Vec<_> = [1.0, 1.0].iter().map(|&a| PressureLaw::isothermal(a).unwrap()).collect();
    let initial = MixtureState::from_fn(laws, grid, |i, _| (1.0, 0.2 + 0.2 * i as f64)).unwrap();
    Scenario {
        initial,
        bc: BoundaryConditions::constant(0.3, &[1.0, 1.0]),
        params: PhysicsParams::new(0.1, omega).unwrap(),
        disc: Discretization::new(64, 0.9, 1.0),
    }
}

#[test]
fn stronger_coupling_lowers_terminal_lyapunov() {
    let sc = desynchronized(1.0);
    let terminal: Vec<f64> =
        [5.0, 20.0, 80.0].iter().map(|&w| compare_models(&sc, w).unwrap().terminal_lyap()).collect();
    assert!(terminal[0] > terminal[1] && terminal[1] > terminal[2], "{terminal:?}");
}

#[test]
fn comparison_rows_start_from_matching_states() {
    let rep = compare_models(&desynchronized(20.0), 20.0).unwrap();
    let first = rep.rows[0];
    assert_eq!(first.t, 0.0);
    assert!((first.field_distance - (2.0f64 * 0.01).sqrt()).abs() < 1e-12);
    assert!(rep.rows.windows(2).all(|w| w[1].t > w[0].t));
    assert!(rep.bounds.beta_positive);
    let s0 = rep.bounds.s0.unwrap();
    let entered = rep.rows.iter().position(|r| r.lyap_full <= s0).unwrap();
    assert!(rep.rows[entered..].iter().all(|r| r.lyap_full <= 1.05 * s0));
}
