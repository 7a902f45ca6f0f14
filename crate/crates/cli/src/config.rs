//! TOML run configuration and its translation into library types.

use serde::Deserialize;

use jang_core::jang::SolverConfig;
use jang_core::model::{ModelData, ZonalFunction};
use jang_core::Real;

use crate::run::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub tau: TauSection,
    #[serde(default)]
    pub newton: NewtonSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Zonal table for m̄(θ) or p̄(θ); `theta` must cover [0, π] increasing.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZonalTable {
    pub theta: Vec<Real>,
    pub values: Vec<Real>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    pub m_bar: Option<Real>,
    pub p_bar: Option<Real>,
    pub m_zonal: Option<ZonalTable>,
    pub p_zonal: Option<ZonalTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub cells: usize,
    pub grading: Real,
    pub r_list: Vec<Real>,
    pub probe_window: (Real, Real),
}

impl Default for MeshSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self { cells: d.cells, grading: d.gamma, r_list: d.r_list, probe_window: d.probe_window }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TauSection {
    pub start: Real,
    pub factor: Real,
    pub min: Real,
    pub polish_zero: bool,
}

impl Default for TauSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self { start: d.tau_start, factor: d.tau_factor, min: d.tau_min, polish_zero: d.polish_zero }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonSection {
    pub tol: Real,
    pub max_iter: usize,
    pub damping_min: Real,
}

impl Default for NewtonSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self { tol: d.newton_tol, max_iter: d.newton_max_iter, damping_min: d.damping_min }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
    /// Glue radii for the Schwarzschild decay check; defaults to
    /// {R_max/8, R_max/4} so the annuli stay inside the solved domain.
    pub glue_radii: Option<Vec<Real>>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
        cfg.solver_config()?; // surfaces mesh/tau/newton problems up front
        if cfg.mesh.r_list.len() < 3 {
            return Err(CliError::Validation(
                "mesh.r_list needs at least 3 radii (flux extrapolation)".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn model(&self) -> Result<ModelData, CliError> {
        let m = &self.model;
        let m_trace = trace_of(m.n, "m", m.m_bar, m.m_zonal.as_ref())?;
        let p_trace = trace_of(m.n, "p", m.p_bar, m.p_zonal.as_ref())?;
        Ok(ModelData::new(m.n, m_trace, p_trace)?)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            tau_start: self.tau.start,
            tau_factor: self.tau.factor,
            tau_min: self.tau.min,
            polish_zero: self.tau.polish_zero,
            newton_tol: self.newton.tol,
            newton_max_iter: self.newton.max_iter,
            damping_min: self.newton.damping_min,
            cells: self.mesh.cells,
            gamma: self.mesh.grading,
            r_list: self.mesh.r_list.clone(),
            probe_window: self.mesh.probe_window,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Builds tr_Ω from either a constant mean value or a zonal table of the
/// per-direction mean (both scale by n-1).
fn trace_of(
    n: usize,
    name: &str,
    bar: Option<Real>,
    zonal: Option<&ZonalTable>,
) -> Result<ZonalFunction, CliError> {
    if !(4..=7).contains(&n) {
        return Err(CliError::Validation(format!(
            "dimension n = {n} unsupported; supported range is 4..=7"
        )));
    }
    let d = (n - 1) as Real;
    match (bar, zonal) {
        (Some(_), Some(_)) => Err(CliError::Validation(format!(
            "model.{name}_bar and model.{name}_zonal are mutually exclusive"
        ))),
        (Some(v), None) => Ok(ZonalFunction::constant(v * d)),
        (None, None) => Ok(ZonalFunction::constant(0.0)),
        (None, Some(t)) => {
            let vals: Vec<Real> = t.values.iter().map(|v| v * d).collect();
            Ok(ZonalFunction::sampled(t.theta.clone(), vals)?)
        }
    }
}
