use blendflow_core::gas::PressureLaw;
use blendflow_core::mixture::{Grid, MixtureState, PhysicsParams};
use blendflow_core::oracles::{
    example1_boundary, example1_state, example1_velocity, example2_state, TravelingWaveSpec,
};
use blendflow_core::solver::{
    boundary_traces, cfl_dt, check_c1_compatibility, run, step, BoundaryConditions, Discretization, RiemannField,
    Scenario,
};
use proptest::prelude::*;

fn iso(a: &[f64]) -> Vec<PressureLaw<f64>> {
    a.iter().map(|&a| PressureLaw::isothermal(a).unwrap()).collect()
}

fn sup_drift(a: &MixtureState<f64>, b: &MixtureState<f64>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.components() {
        for k in 0..a.cells() {
            m = m.max((a.rho[i][k] - b.rho[i][k]).abs()).max((a.v[i][k] - b.v[i][k]).abs());
        }
    }
    m
}

fn run_steps(
    s: &MixtureState<f64>,
    bc: &BoundaryConditions<f64>,
    params: &PhysicsParams<f64>,
    disc: &Discretization<f64>,
    steps: usize,
) -> MixtureState<f64> {
    let mut s = s.clone();
    let mut t = 0.0;
    for _ in 0..steps {
        let dt = cfl_dt(&s, disc).unwrap();
        s = step(&s, bc, params, disc, t, dt).unwrap();
        t += dt;
    }
    s
}

#[test]
fn quiescent_constant_state_survives_1000_steps() {
    let laws = vec![
        PressureLaw::isothermal(1.0).unwrap(),
        PressureLaw::isentropic(2.0, 1.4).unwrap(),
        PressureLaw::tabulated(vec![0.5, 1.0, 2.0, 4.0], vec![0.5, 1.2, 3.0, 7.0]).unwrap(),
    ];
    let rho = [0.7, 1.9, 2.6];
    let s = MixtureState::from_fn(laws, Grid::new(1.0, 32).unwrap(), |i, _| (rho[i], 0.0)).unwrap();
    let bc = BoundaryConditions::constant(0.0, &rho);
    let params = PhysicsParams::new(0.4, 10.0).unwrap();
    let disc = Discretization::new(32, 0.9, 1.0);
    let end = run_steps(&s, &bc, &params, &disc, 1000);
    assert!(sup_drift(&s, &end) <= 1e-13, "{}", sup_drift(&s, &end));
}

#[test]
fn frictionless_uniform_drift_survives_1000_steps() {
    let rho = [1.0, 2.5];
    let s = MixtureState::from_fn(iso(&[1.0, 1.5]), Grid::new(1.0, 32).unwrap(), |i, _| (rho[i], 0.3)).unwrap();
    let bc = BoundaryConditions::constant(0.3, &rho);
    let params = PhysicsParams::new(0.0, 3.0).unwrap();
    let disc = Discretization::new(32, 0.9, 1.0);
    let end = run_steps(&s, &bc, &params, &disc, 1000);
    assert!(sup_drift(&s, &end) <= 1e-13, "{}", sup_drift(&s, &end));
}

#[test]
fn example1_single_step_is_second_order_in_dt() {
    let (rho0, p0, theta) = ([1.0, 2.0], 1.0, 0.2);
    for cells in [16, 64] {
        let s = example1_state(iso(&[1.0, 1.0]), Grid::new(1.0, cells).unwrap(), &rho0, p0, theta, 0.0).unwrap();
        let disc = Discretization::new(cells, 0.9, 1.0);
        let dt = cfl_dt(&s, &disc).unwrap();
        let next =
            step(&s, &example1_boundary(&rho0, p0, theta), &PhysicsParams::new(theta, 1.0).unwrap(), &disc, 0.0, dt)
                .unwrap();
        let exact = example1_velocity(p0, theta, dt);
        for v in next.v.iter().flatten() {
            // Explicit Euler on v' = -(theta/2) v^2: local error (theta^2/4) v^3 dt^2 at leading order.
            assert!((v - exact).abs() <= 0.011 * dt * dt + 1e-15, "{} vs {exact}", v);
        }
    }
}

fn example2_error(cells: usize, horizon: f64) -> f64 {
    let spec =
        TravelingWaveSpec::<f64> { lambda: 1.0, amplitude: vec![1.0, 0.5], sound_speed: vec![1.5, 2.0], theta: 1.0 };
    let grid = Grid::new(1.0, cells).unwrap();
    let sc = Scenario {
        initial: example2_state(&spec, 0.0, grid).unwrap(),
        bc: spec.boundary(1.0),
        params: PhysicsParams::new(1.0, 1.0).unwrap(),
        disc: Discretization::new(cells, 0.9, horizon),
    };
    let end = run(&sc).unwrap().final_state;
    let exact = example2_state(&spec, horizon, grid).unwrap();
    let mut e = 0.0;
    for i in 0..2 {
        for k in 0..cells {
            e += grid.dx() * (end.rho[i][k] - exact.rho[i][k]).abs();
        }
    }
    e
}

#[test]
fn example2_converges_at_first_order() {
    let errors: Vec<f64> = [32, 64, 128, 256].iter().map(|&k| example2_error(k, 1.0)).collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((0.8..=1.2).contains(&order), "{errors:?}");
    }
}

#[test]
fn mass_budget_matches_boundary_fluxes() {
    // Smooth compatible data; the discrete mass change per unit time differs from
    // q(0) - q(L) by O(dx).
    let defects: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&cells| {
            let grid = Grid::new(1.0, cells).unwrap();
            let s = MixtureState::from_fn(iso(&[1.0, 1.3]), grid, |i, x: f64| {
                let phase = std::f64::consts::PI * x;
                (1.0 + 0.1 * (i as f64 + 1.0) * (1.0 - x) * x, 0.3 + 0.05 * phase.sin())
            })
            .unwrap();
            let bc = BoundaryConditions::constant(0.3, &[1.0, 1.0]);
            let params = PhysicsParams::new(0.2, 2.0).unwrap();
            let disc = Discretization::new(cells, 0.5, 1.0);
            let dt = cfl_dt(&s, &disc).unwrap();
            let field = RiemannField::from_state(&s).unwrap();
            let (inlet, outlet) = boundary_traces(&s, &field, &bc, 0.0).unwrap();
            let next = step(&s, &bc, &params, &disc, 0.0, dt).unwrap();
            (0..2)
                .map(|i| {
                    let mass = |st: &MixtureState<f64>| grid.dx() * st.rho[i].iter().sum::<f64>();
                    let rate = (mass(&next) - mass(&s)) / dt;
                    let budget = inlet.rho[i] * inlet.v[i] - outlet.rho[i] * outlet.v[i];
                    (rate - budget).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in defects.windows(2) {
        assert!(w[1] < 0.75 * w[0], "{defects:?}");
    }
    assert!(defects[2] < 0.05, "{defects:?}");
}

#[test]
fn example2_compatibility_residuals_shrink_with_dx() {
    let spec =
        TravelingWaveSpec::<f64> { lambda: 1.0, amplitude: vec![1.0, 2.0], sound_speed: vec![1.5, 2.0], theta: 1.0 };
    let params = PhysicsParams::new(1.0, 4.0).unwrap();
    let r: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&k| {
            let s = example2_state(&spec, 0.0, Grid::new(1.0, k).unwrap()).unwrap();
            check_c1_compatibility(&s, &spec.boundary(1.0), &params, 1.0 / k as f64).unwrap().max_residual
        })
        .collect();
    assert!(r[0] > 0.0);
    for w in r.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.4..0.6).contains(&ratio), "{r:?}");
    }
}

#[test]
fn example2_run_stays_nearly_synchronized() {
    let spec =
        TravelingWaveSpec::<f64> { lambda: 1.0, amplitude: vec![1.0, 1.0], sound_speed: vec![1.5, 2.0], theta: 1.0 };
    let grid = Grid::new(1.0, 128).unwrap();
    let sc = Scenario {
        initial: example2_state(&spec, 0.0, grid).unwrap(),
        bc: spec.boundary(1.0),
        params: PhysicsParams::new(1.0, 1.0).unwrap(),
        disc: Discretization::new(128, 0.9, 0.5),
    };
    let tr = run(&sc).unwrap();
    assert_eq!(tr.frames[0].lyap, 0.0);
    // Only the first-order boundary closure desynchronizes the components.
    assert!(tr.frames.iter().all(|f| f.lyap < 1e-6 && f.b0.abs() < 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn perturbed_runs_stay_finite(
        amp in proptest::collection::vec(-0.05f64..0.05, 4),
        omega in 0.0f64..50.0,
        theta in 0.0f64..1.0,
    ) {
        let grid = Grid::new(1.0, 24).unwrap();
        let s = MixtureState::from_fn(iso(&[1.0, 2.0]), grid, |i, x: f64| {
            let w = (std::f64::consts::PI * x).sin();
            (1.0 + amp[2 * i] * w, 0.2 + amp[2 * i + 1] * w)
        })
        .unwrap();
        let mut disc = Discretization::new(24, 0.9, 0.5);
        disc.output_stride = 50;
        let sc = Scenario {
            initial: s,
            bc: BoundaryConditions::constant(0.2, &[1.0, 1.0]),
            params: PhysicsParams::new(theta, omega).unwrap(),
            disc,
        };
        let tr = run(&sc).unwrap();
        prop_assert!(tr.final_state.rho.iter().chain(&tr.final_state.v).flatten().all(|x| x.is_finite()));
        prop_assert!(tr.frames.iter().all(|f| f.lyap >= 0.0 && f.lyap.is_finite()));
    }
}
