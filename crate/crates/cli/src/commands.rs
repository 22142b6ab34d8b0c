use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use blendflow_core::diagnostics::{
    certify_envelope, running_bounds, CertReport, DiagnosticsFrame, EnvelopeCheck, EnvelopeTolerance, HypothesisSample,
};
use blendflow_core::driftflux::compare_models;
use blendflow_core::mixture::MixtureState;
use blendflow_core::oracles::{shoot_stationary, stationary_profile};
use blendflow_core::solver::run;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::scenario::ScenarioFile;

/// Fixed 17-significant-digit rendering used in every CSV file.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(CliError::io(path))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))
}

fn per_component(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

pub fn frames_header(n: usize) -> Vec<String> {
    let fixed =
        ["t", "lyap", "bhat", "bl", "b0", "i", "energy_total", "energy_mix", "m", "n", "eps_hat_sq", "sign_consistent"];
    fixed
        .iter()
        .map(|s| s.to_string())
        .chain(per_component("inlet_rho", n))
        .chain(per_component("inlet_v", n))
        .chain(per_component("outlet_rho", n))
        .chain(per_component("outlet_v", n))
        .collect()
}

fn frame_row(f: &DiagnosticsFrame<f64>) -> Vec<String> {
    let scalars =
        [f.t, f.lyap, f.bhat, f.bl, f.b0, f.i, f.energy_total, f.energy_mix, f.local.m, f.local.n, f.local.eps_hat_sq];
    scalars
        .iter()
        .map(|&x| fmt_num(x))
        .chain(std::iter::once(u8::from(f.sign_consistent).to_string()))
        .chain([&f.inlet.rho, &f.inlet.v, &f.outlet.rho, &f.outlet.v].into_iter().flatten().map(|&x| fmt_num(x)))
        .collect()
}

fn field_csv(state: &MixtureState<f64>, t: Option<f64>) -> Result<Vec<u8>> {
    let n = state.components();
    let header: Vec<String> = t
        .map(|_| "t".to_string())
        .into_iter()
        .chain(std::iter::once("x".to_string()))
        .chain(per_component("rho", n))
        .chain(per_component("v", n))
        .collect();
    let rows = (0..state.cells()).map(|k| {
        t.into_iter()
            .chain(std::iter::once(state.grid.x(k)))
            .chain((0..n).map(|i| state.rho[i][k]))
            .chain((0..n).map(|i| state.v[i][k]))
            .map(fmt_num)
            .collect()
    });
    csv_bytes(&header, rows)
}

/// Contents of `bounds.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsFile {
    pub m: f64,
    pub n: f64,
    pub eps_hat: f64,
    pub omega_bar: f64,
    pub beta: f64,
    pub s0: Option<f64>,
    pub beta_positive: bool,
    pub steps: usize,
    pub compatibility_residual: f64,
    pub compatibility_tolerance: f64,
    pub compatible: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub frames_path: PathBuf,
    pub bounds_path: PathBuf,
    pub frames: usize,
    pub snapshots: usize,
    pub bounds: BoundsFile,
}

pub fn cmd_run(scenario_path: &Path, out_dir: &Path, snapshots: Option<Vec<f64>>) -> Result<RunSummary> {
    let file = ScenarioFile::load(scenario_path)?;
    let mut scenario = file.build()?;
    if let Some(times) = snapshots {
        scenario.disc.snapshot_times = times;
        scenario.disc.validate()?;
    }
    let tr = run(&scenario)?;
    let b = running_bounds(&tr.frames, &scenario.params)?;
    let bounds = BoundsFile {
        m: b.m,
        n: b.n,
        eps_hat: b.eps_hat,
        omega_bar: b.omega_bar,
        beta: b.beta,
        s0: b.s0,
        beta_positive: b.beta_positive,
        steps: tr.steps,
        compatibility_residual: tr.compatibility.max_residual,
        compatibility_tolerance: tr.compatibility.tolerance,
        compatible: tr.compatibility.passed,
    };

    ensure_dir(out_dir)?;
    let frames_path = out_dir.join("frames.csv");
    let n = scenario.initial.components();
    write_file(&frames_path, &csv_bytes(&frames_header(n), tr.frames.iter().map(frame_row))?)?;
    let bounds_path = out_dir.join("bounds.json");
    let json = serde_json::to_string_pretty(&bounds).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&bounds_path, json.as_bytes())?;
    if !tr.snapshots.is_empty() {
        let dir = out_dir.join("snapshots");
        ensure_dir(&dir)?;
        for (j, s) in tr.snapshots.iter().enumerate() {
            write_file(&dir.join(format!("snapshot_{j:03}.csv")), &field_csv(&s.state, Some(s.t))?)?;
        }
    }
    Ok(RunSummary { frames_path, bounds_path, frames: tr.frames.len(), snapshots: tr.snapshots.len(), bounds })
}

/// Columns of `frames.csv` needed for certification.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct FrameRecord {
    pub t: f64,
    pub lyap: f64,
    pub bhat: f64,
    pub bl: f64,
    pub i: f64,
}

pub fn read_frames(path: &Path) -> Result<Vec<FrameRecord>> {
    let mut r =
        csv::Reader::from_path(path).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })?;
    r.deserialize()
        .collect::<std::result::Result<Vec<FrameRecord>, _>>()
        .map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

pub fn read_bounds(path: &Path) -> Result<BoundsFile> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationJson {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeJson {
    pub passed: bool,
    pub checked: usize,
    pub max_ratio: f64,
    pub first_violation: Option<ViolationJson>,
}

impl From<&EnvelopeCheck<f64>> for EnvelopeJson {
    fn from(c: &EnvelopeCheck<f64>) -> Self {
        Self {
            passed: c.passed,
            checked: c.checked,
            max_ratio: c.max_ratio,
            first_violation: c.first_violation.as_ref().map(|v| ViolationJson {
                t: v.t,
                value: v.value,
                bound: v.bound,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisJson {
    pub bhat_le_i: bool,
    pub i_ge_bl: bool,
    pub first_bhat_violation: Option<f64>,
    pub first_bl_violation: Option<f64>,
}

/// Contents of `cert.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertFile {
    pub passed: bool,
    pub beta: f64,
    pub eps_hat: f64,
    pub s0: f64,
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub envelope_i: EnvelopeJson,
    pub t_star: Option<f64>,
    pub envelope_ii: Option<EnvelopeJson>,
    pub hypothesis: Option<HypothesisJson>,
}

impl From<&CertReport<f64>> for CertFile {
    fn from(r: &CertReport<f64>) -> Self {
        Self {
            passed: r.passed(),
            beta: r.beta,
            eps_hat: r.eps_hat,
            s0: r.s0,
            relative_tolerance: r.tolerance.relative,
            absolute_tolerance: r.tolerance.absolute,
            envelope_i: (&r.envelope_i).into(),
            t_star: r.t_star,
            envelope_ii: r.envelope_ii.as_ref().map(Into::into),
            hypothesis: r.hypothesis.as_ref().map(|h| HypothesisJson {
                bhat_le_i: h.bhat_le_i,
                i_ge_bl: h.i_ge_bl,
                first_bhat_violation: h.first_bhat_violation,
                first_bl_violation: h.first_bl_violation,
            }),
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Certifies `frames.csv` against `bounds.json`, writes `cert.json` into `out_dir` and
/// prints one verdict line per check to `log`.
pub fn cmd_certify(
    frames_path: &Path,
    bounds_path: &Path,
    t_star: Option<f64>,
    out_dir: &Path,
    log: &mut dyn Write,
) -> Result<CertFile> {
    let frames = read_frames(frames_path)?;
    let bounds = read_bounds(bounds_path)?;
    if !(bounds.beta > 0.0) {
        return Err(CliError::BetaNonPositive {
            m: bounds.m,
            n: bounds.n,
            omega_bar: bounds.omega_bar,
            beta: bounds.beta,
        });
    }
    let series: Vec<(f64, f64)> = frames.iter().map(|f| (f.t, f.lyap)).collect();
    let samples: Vec<HypothesisSample<f64>> =
        frames.iter().map(|f| HypothesisSample { t: f.t, bhat: f.bhat, bl: f.bl, i: f.i }).collect();
    let report =
        certify_envelope(&series, bounds.beta, bounds.eps_hat, t_star, Some(&samples), EnvelopeTolerance::default())?;
    let cert = CertFile::from(&report);

    let line = |log: &mut dyn Write, s: String| writeln!(log, "{s}").map_err(CliError::io("<log>"));
    line(
        log,
        format!(
            "envelope (i): {} (beta={:e}, eps_hat={:e}, S0={:e}, max ratio {:.4})",
            verdict(cert.envelope_i.passed),
            cert.beta,
            cert.eps_hat,
            cert.s0,
            cert.envelope_i.max_ratio
        ),
    )?;
    if let Some(h) = &cert.hypothesis {
        line(log, format!("hypothesis Bhat <= I, I >= BL: {}", verdict(h.bhat_le_i && h.i_ge_bl)))?;
    }
    if let Some(e) = &cert.envelope_ii {
        line(log, format!("envelope (ii): {} (max ratio {:.4})", verdict(e.passed), e.max_ratio))?;
    }

    ensure_dir(out_dir)?;
    let json = serde_json::to_string_pretty(&cert).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&out_dir.join("cert.json"), json.as_bytes())?;
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub terminal_lyap: f64,
    pub s0: Option<f64>,
    pub final_distance: f64,
    pub rows: usize,
}

pub fn cmd_compare(scenario_path: &Path, out_dir: &Path) -> Result<CompareSummary> {
    let file = ScenarioFile::load(scenario_path)?;
    let scenario = file.build()?;
    let rep = compare_models(&scenario, scenario.params.omega_bar)?;
    let header: Vec<String> = ["t", "lyap_full", "s0", "field_distance"].iter().map(|s| s.to_string()).collect();
    let rows = rep.rows.iter().map(|r| {
        vec![fmt_num(r.t), fmt_num(r.lyap_full), r.s0.map(fmt_num).unwrap_or_default(), fmt_num(r.field_distance)]
    });
    ensure_dir(out_dir)?;
    write_file(&out_dir.join("compare.csv"), &csv_bytes(&header, rows)?)?;
    Ok(CompareSummary {
        terminal_lyap: rep.terminal_lyap(),
        s0: rep.bounds.s0,
        final_distance: rep.rows.last().map_or(0.0, |r| r.field_distance),
        rows: rep.rows.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySummary {
    pub outlet: Vec<f64>,
    pub flow_rates: Vec<f64>,
    pub shooting_residual: Option<f64>,
}

pub fn cmd_stationary(scenario_path: &Path, out_dir: &Path) -> Result<StationarySummary> {
    let file = ScenarioFile::load(scenario_path)?;
    let mut spec = file.stationary_spec()?;
    let st = file.stationary.as_ref().expect("checked by stationary_spec");
    let length = file.geometry.length_m;
    let mut shooting_residual = None;
    if let Some(target) = &st.target_outlet_density_kg_per_m3 {
        let vbar = st
            .inlet_velocity_m_per_s
            .ok_or_else(|| CliError::Config("shooting needs inlet_velocity_m_per_s".into()))?;
        let rep = shoot_stationary(&spec, vbar, length, target, st.tolerance, st.max_iterations)?;
        shooting_residual = Some(rep.residual);
        spec = rep.spec;
    }
    let profile = stationary_profile(&spec, file.grid()?)?;
    ensure_dir(out_dir)?;
    write_file(&out_dir.join("stationary.csv"), &field_csv(&profile, None)?)?;
    Ok(StationarySummary { outlet: spec.outlet_densities(length)?, flow_rates: spec.q_tilde, shooting_residual })
}
