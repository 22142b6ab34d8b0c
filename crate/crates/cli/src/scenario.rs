//! Scenario files: TOML with SI units spelled out in the key names.

use std::path::Path;
use std::sync::Arc;

use blendflow_core::gas::PressureLaw;
use blendflow_core::mixture::{Grid, MixtureState, PhysicsParams};
use blendflow_core::oracles::{self, StationarySpec, TravelingWaveSpec};
use blendflow_core::signal::Signal;
use blendflow_core::solver::{BoundaryConditions, Discretization, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub physics: Physics,
    pub geometry: Geometry,
    pub grid: GridSection,
    pub horizon: Horizon,
    pub components: Vec<LawSpec>,
    pub initial: InitialSpec,
    pub boundary: BoundarySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<StationarySection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub theta_per_m: f64,
    pub omega_bar_per_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub length_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub cells: usize,
    pub cfl: f64,
    /// Fraction of the sound speed by which boundary characteristics must point the right way.
    #[serde(default = "default_sonic_margin")]
    pub sonic_margin: f64,
}

fn default_sonic_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    pub t_end_s: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times_s: Vec<f64>,
}

fn default_stride() -> usize {
    1
}

/// Pressure law of one component, `p` in Pa and `rho` in kg/m^3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    /// `p = a^2 rho`.
    Isothermal {
        sound_speed_m_per_s: f64,
    },
    /// `p = coefficient rho^gamma`.
    Isentropic {
        coefficient_si: f64,
        gamma: f64,
    },
    Tabulated {
        density_kg_per_m3: Vec<f64>,
        pressure_pa: Vec<f64>,
    },
}

impl LawSpec {
    pub fn build(&self) -> Result<PressureLaw<f64>> {
        Ok(match self {
            LawSpec::Isothermal { sound_speed_m_per_s } => PressureLaw::isothermal(*sound_speed_m_per_s)?,
            LawSpec::Isentropic { coefficient_si, gamma } => PressureLaw::isentropic(*coefficient_si, *gamma)?,
            LawSpec::Tabulated { density_kg_per_m3, pressure_pa } => {
                PressureLaw::tabulated(density_kg_per_m3.clone(), pressure_pa.clone())?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Constant { value: f64 },
    Ramp { from: f64, to: f64, duration_s: f64 },
    Sinusoid { mean: f64, amplitude: f64, frequency_hz: f64, phase_rad: f64 },
    Table { t_s: Vec<f64>, values: Vec<f64> },
}

impl SignalSpec {
    pub fn build(&self) -> Signal<f64> {
        match self {
            SignalSpec::Constant { value } => Signal::Constant(*value),
            SignalSpec::Ramp { from, to, duration_s } => Signal::Ramp { from: *from, to: *to, duration: *duration_s },
            SignalSpec::Sinusoid { mean, amplitude, frequency_hz, phase_rad } => {
                Signal::Sinusoid { mean: *mean, amplitude: *amplitude, frequency: *frequency_hz, phase: *phase_rad }
            }
            SignalSpec::Table { t_s, values } => Signal::Table { t: t_s.clone(), values: values.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Spatially constant densities and velocities, one entry per component.
    Uniform {
        density_kg_per_m3: Vec<f64>,
        velocity_m_per_s: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perturbation: Option<Perturbation>,
    },
    /// Piecewise-linear profiles sampled at `x_m`, one row per component.
    Profiles {
        x_m: Vec<f64>,
        density_kg_per_m3: Vec<Vec<f64>>,
        velocity_m_per_s: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perturbation: Option<Perturbation>,
    },
    /// x-uniform decay with `v(t) = 1 / (p0 + theta t / 2)`.
    Example1 { density_kg_per_m3: Vec<f64>, p0_s_per_m: f64 },
    /// Isothermal travelling waves `rho_i = C_i exp(lambda^2 theta (lambda t - x) / (2 a_i^2))`, `v_i = lambda`.
    Example2 { lambda_m_per_s: f64, amplitude_kg_per_m3: Vec<f64> },
}

/// Seeded cell-wise uniform noise in `[-amplitude, amplitude]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub seed: u64,
    #[serde(default)]
    pub density_amplitude_kg_per_m3: f64,
    #[serde(default)]
    pub velocity_amplitude_m_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Signals {
        inlet_velocity_m_per_s: SignalSpec,
        outlet_density_kg_per_m3: Vec<SignalSpec>,
    },
    /// Exact boundary data of the analytic initial family.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    pub flow_rate_kg_per_m2_s: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inlet_velocity_m_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inlet_density_kg_per_m3: Option<Vec<f64>>,
    /// Enables shooting on the flow rates to hit these outlet densities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_outlet_density_kg_per_m3: Option<Vec<f64>>,
    #[serde(default = "default_shoot_tol")]
    pub tolerance: f64,
    #[serde(default = "default_shoot_iter")]
    pub max_iterations: usize,
}

fn default_shoot_tol() -> f64 {
    1e-10
}

fn default_shoot_iter() -> usize {
    50
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(message) => CliError::Parse { path: path.to_path_buf(), message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn laws(&self) -> Result<Arc<[PressureLaw<f64>]>> {
        if self.components.is_empty() {
            return Err(CliError::Config("at least one component is required".into()));
        }
        Ok(self.components.iter().map(LawSpec::build).collect::<Result<Vec<_>>>()?.into())
    }

    pub fn params(&self) -> Result<PhysicsParams<f64>> {
        Ok(PhysicsParams::new(self.physics.theta_per_m, self.physics.omega_bar_per_s)?)
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Ok(Grid::new(self.geometry.length_m, self.grid.cells)?)
    }

    pub fn discretization(&self) -> Discretization<f64> {
        let mut disc = Discretization::new(self.grid.cells, self.grid.cfl, self.horizon.t_end_s);
        disc.output_stride = self.horizon.output_stride;
        disc.snapshot_times = self.horizon.snapshot_times_s.clone();
        disc.sonic_margin = self.grid.sonic_margin;
        disc
    }

    fn check_len<T>(&self, what: &str, v: &[T]) -> Result<()> {
        if v.len() != self.components.len() {
            return Err(CliError::Config(format!(
                "{what} has {} entries for {} components",
                v.len(),
                self.components.len()
            )));
        }
        Ok(())
    }

    fn travelling_wave(&self, lambda: f64, amplitude: &[f64]) -> Result<TravelingWaveSpec<f64>> {
        let sound_speed = self
            .components
            .iter()
            .map(|c| match c {
                LawSpec::Isothermal { sound_speed_m_per_s } => Ok(*sound_speed_m_per_s),
                _ => Err(CliError::Config("example2 needs isothermal components".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let spec =
            TravelingWaveSpec { lambda, amplitude: amplitude.to_vec(), sound_speed, theta: self.physics.theta_per_m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn initial_state(&self) -> Result<MixtureState<f64>> {
        let (laws, grid) = (self.laws()?, self.grid()?);
        match &self.initial {
            InitialSpec::Uniform { density_kg_per_m3, velocity_m_per_s, perturbation } => {
                self.check_len("initial density", density_kg_per_m3)?;
                self.check_len("initial velocity", velocity_m_per_s)?;
                let mut s = oracles::constant_state(laws, grid, density_kg_per_m3, velocity_m_per_s)?;
                perturb(&mut s, perturbation.as_ref())?;
                Ok(s)
            }
            InitialSpec::Profiles { x_m, density_kg_per_m3, velocity_m_per_s, perturbation } => {
                self.check_len("initial density profiles", density_kg_per_m3)?;
                self.check_len("initial velocity profiles", velocity_m_per_s)?;
                let rows = density_kg_per_m3.iter().chain(velocity_m_per_s);
                if x_m.is_empty() || rows.clone().any(|r| r.len() != x_m.len()) {
                    return Err(CliError::Config("every profile needs one value per x_m sample".into()));
                }
                if x_m.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(CliError::Config("x_m must be strictly increasing".into()));
                }
                let mut s = MixtureState::from_fn(laws, grid, |i, x| {
                    (interpolate(x_m, &density_kg_per_m3[i], x), interpolate(x_m, &velocity_m_per_s[i], x))
                })?;
                perturb(&mut s, perturbation.as_ref())?;
                Ok(s)
            }
            InitialSpec::Example1 { density_kg_per_m3, p0_s_per_m } => {
                self.check_len("initial density", density_kg_per_m3)?;
                Ok(oracles::example1_state(laws, grid, density_kg_per_m3, *p0_s_per_m, self.physics.theta_per_m, 0.0)?)
            }
            InitialSpec::Example2 { lambda_m_per_s, amplitude_kg_per_m3 } => {
                self.check_len("amplitude", amplitude_kg_per_m3)?;
                let spec = self.travelling_wave(*lambda_m_per_s, amplitude_kg_per_m3)?;
                Ok(oracles::example2_state(&spec, 0.0, grid)?)
            }
        }
    }

    pub fn boundary(&self) -> Result<BoundaryConditions<f64>> {
        match (&self.boundary, &self.initial) {
            (BoundarySpec::Signals { inlet_velocity_m_per_s, outlet_density_kg_per_m3 }, _) => {
                self.check_len("outlet density", outlet_density_kg_per_m3)?;
                Ok(BoundaryConditions {
                    inlet_velocity: inlet_velocity_m_per_s.build(),
                    outlet_density: outlet_density_kg_per_m3.iter().map(SignalSpec::build).collect(),
                })
            }
            (BoundarySpec::Family, InitialSpec::Example1 { density_kg_per_m3, p0_s_per_m }) => {
                Ok(oracles::example1_boundary(density_kg_per_m3, *p0_s_per_m, self.physics.theta_per_m))
            }
            (BoundarySpec::Family, InitialSpec::Example2 { lambda_m_per_s, amplitude_kg_per_m3 }) => {
                Ok(self.travelling_wave(*lambda_m_per_s, amplitude_kg_per_m3)?.boundary(self.geometry.length_m))
            }
            (BoundarySpec::Family, _) => {
                Err(CliError::Config("family boundary data needs an example1 or example2 initial state".into()))
            }
        }
    }

    pub fn build(&self) -> Result<Scenario<f64>> {
        let scenario = Scenario {
            initial: self.initial_state()?,
            bc: self.boundary()?,
            params: self.params()?,
            disc: self.discretization(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn stationary_spec(&self) -> Result<StationarySpec<f64>> {
        let st = self.stationary.as_ref().ok_or_else(|| CliError::Config("missing [stationary] section".into()))?;
        self.check_len("stationary flow rates", &st.flow_rate_kg_per_m2_s)?;
        let (laws, params, q) = (self.laws()?, self.params()?, st.flow_rate_kg_per_m2_s.clone());
        let spec = match (&st.inlet_velocity_m_per_s, &st.inlet_density_kg_per_m3) {
            (Some(v), None) => StationarySpec::with_inlet_velocity(laws, params, q, *v)?,
            (None, Some(rho)) => {
                self.check_len("stationary inlet density", rho)?;
                StationarySpec { laws, params, q_tilde: q, rho_inlet: rho.clone() }
            }
            _ => {
                return Err(CliError::Config(
                    "[stationary] needs exactly one of inlet_velocity_m_per_s and inlet_density_kg_per_m3".into(),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let j = xs.partition_point(|&s| s <= x);
    if j == 0 {
        return ys[0];
    }
    if j == xs.len() {
        return ys[xs.len() - 1];
    }
    let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    ys[j - 1] + w * (ys[j] - ys[j - 1])
}

fn perturb(state: &mut MixtureState<f64>, p: Option<&Perturbation>) -> Result<()> {
    let Some(p) = p else { return Ok(()) };
    if !(p.density_amplitude_kg_per_m3 >= 0.0 && p.velocity_amplitude_m_per_s >= 0.0) {
        return Err(CliError::Config("perturbation amplitudes must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut noise = |a: f64| if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };
    for i in 0..state.components() {
        for k in 0..state.cells() {
            state.rho[i][k] += noise(p.density_amplitude_kg_per_m3);
            state.v[i][k] += noise(p.velocity_amplitude_m_per_s);
        }
    }
    *state = MixtureState::new(state.laws.clone(), state.grid, state.rho.clone(), state.v.clone())?;
    Ok(())
}
