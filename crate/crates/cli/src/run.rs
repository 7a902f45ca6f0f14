//! Stage execution and report/CSV assembly.

use std::path::{Path, PathBuf};

use jang_core::barrier::{self, BarrierPair};
use jang_core::conformal::{self, YamabeSolution};
use jang_core::grid::RadialField;
use jang_core::jang::{self, ContinuationDiagnostics};
use jang_core::mass::{self, MassReport, RadialMetric};
use jang_core::model::{ModelData, ZonalFunction};
use jang_core::report::{
    AlphaReport, BarrierReport, ConformalReport, GlueSample, IdentityCheck, ModelSummary,
    ReportEnvelope,
};
use jang_core::sphere;
use jang_core::{Error, Real};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input outside the supported domain (exit 2).
    Validation(String),
    /// Solver/numerical failure in a stage (exit 3).
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain(_) => CliError::Validation(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Alpha,
    Barriers,
    Mass,
    Jang,
    Conformal,
    Verify,
    Pipeline,
}

pub const FIXED_CLOCK_SENTINEL: &str = "1970-01-01T00:00:00+00:00";

/// Sweep fan-out cap: JANGLAB_THREADS if set, else the machine parallelism.
fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("JANGLAB_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)),
        Err(e) => Err(CliError::Validation(format!("JANGLAB_THREADS: {e}"))),
        Ok(s) => match s.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(CliError::Validation(format!(
                "JANGLAB_THREADS must be a positive integer, got {s:?}"
            ))),
        },
    }
}

/// Order-preserving parallel map over chunks; the cap bounds worker count.
fn parallel_map<T, U, F>(items: &[T], cap: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    if items.is_empty() {
        return Vec::new();
    }
    let workers = cap.min(items.len()).max(1);
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<U>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

/// Lazily computed pipeline state shared across stages of one run.
struct PipelineState {
    model: ModelData,
    alpha: Option<ZonalFunction>,
    solve: Option<(RadialField, ContinuationDiagnostics)>,
    mass: Option<MassReport>,
    conformal: Option<ConformalParts>,
}

struct ConformalParts {
    report: ConformalReport,
    /// Rows (r, u, R_hat, R_conformal) for the CSV series.
    rows: Vec<Vec<Real>>,
    min_u: Real,
}

impl PipelineState {
    fn new(model: ModelData) -> Self {
        Self { model, alpha: None, solve: None, mass: None, conformal: None }
    }

    fn alpha(&mut self) -> Result<&ZonalFunction, CliError> {
        if self.alpha.is_none() {
            self.alpha = Some(sphere::solve_alpha(&self.model)?);
        }
        Ok(self.alpha.as_ref().unwrap())
    }

    fn solve(&mut self, cfg: &RunConfig) -> Result<&(RadialField, ContinuationDiagnostics), CliError> {
        if self.solve.is_none() {
            let solver = cfg.solver_config()?;
            self.solve = Some(jang::continuation_solve(&self.model, &solver)?);
        }
        Ok(self.solve.as_ref().unwrap())
    }

    fn mass(&mut self, cfg: &RunConfig) -> Result<&MassReport, CliError> {
        if self.mass.is_none() {
            self.mass = Some(mass::mass_report(&self.model, &cfg.mesh.r_list)?);
        }
        Ok(self.mass.as_ref().unwrap())
    }

    fn conformal(&mut self, cfg: &RunConfig) -> Result<&ConformalParts, CliError> {
        if self.conformal.is_none() {
            let parts = compute_conformal(self, cfg)?;
            self.conformal = Some(parts);
        }
        Ok(self.conformal.as_ref().unwrap())
    }
}

fn compute_conformal(state: &mut PipelineState, cfg: &RunConfig) -> Result<ConformalParts, CliError> {
    let n = state.model.n();
    let nf = n as Real;
    state.alpha()?;
    state.solve(cfg)?;
    let alpha_mean = state.alpha.as_ref().unwrap().sphere_mean(n);
    let (f, _diag) = state.solve.as_ref().unwrap();
    let model = &state.model;

    let samples = conformal::graph_samples(model, f)?;
    let ys: YamabeSolution = conformal::yamabe_solve(&samples, n, alpha_mean)?;
    let rc = conformal::conformal_scalar_curvature(&samples, &ys.u, n)?;

    let probe = clipped_window(cfg.mesh.probe_window, f);
    let sy = conformal::schoen_yau_residual(model, f, probe)?;

    // ADM energy of the graph metric ĝ = (A + f'²) dr² + B Ω, extrapolated
    // from flux spheres placed safely inside the outer Dirichlet boundary.
    let rm = model.radial();
    let graph_q = |r: Real| rm.a(r) + f.deriv_at(r) * f.deriv_at(r);
    let graph_b = |r: Real| rm.b(r);
    let graph_metric = RadialMetric { g_rr: &graph_q, g_sph: &graph_b };
    let flux_radii: Vec<Real> = cfg.mesh.r_list.iter().map(|r| 0.8 * r).collect();
    let mut series = Vec::new();
    for &r in &flux_radii {
        series.push((r, mass::adm_energy_flux(&graph_metric, n, r)?));
    }
    let (e_adm, _, _) = mass::richardson_extrapolate(&series, 2.0)?;

    // Energy-shift identity: closed-form E_ADM shifted by the conformal tail
    // against a direct flux of u^{4/(n-2)} ĝ.
    let adm = mass::jang_adm_closed_form(model)?;
    let shift = conformal::energy_shift(adm.trace_form, ys.a, alpha_mean, n);
    let psi = |r: Real| ys.u.value_at(r).powf(4.0 / (nf - 2.0));
    let conf_q = |r: Real| psi(r) * graph_q(r);
    let conf_b = |r: Real| psi(r) * graph_b(r);
    let conf_metric = RadialMetric { g_rr: &conf_q, g_sph: &conf_b };
    let mut conf_series = Vec::new();
    for &r in &flux_radii {
        conf_series.push((r, mass::adm_energy_flux(&conf_metric, n, r)?));
    }
    let (direct, _, _) = mass::richardson_extrapolate(&conf_series, 1.0)?;

    // Schwarzschild glue decay over doubling annuli inside the domain.
    let r_last = *cfg.mesh.r_list.last().unwrap();
    let glue_radii = match &cfg.output.glue_radii {
        Some(v) => v.clone(),
        None => vec![r_last / 8.0, r_last / 4.0],
    };
    let mut glue = Vec::new();
    for &rg in &glue_radii {
        let (_, decay) = conformal::glue_to_schwarzschild(&conf_metric, shift, rg, n)?;
        glue.push(GlueSample { r_glue: rg, decay });
    }

    let mut min_u = Real::INFINITY;
    for &u in ys.u.values() {
        min_u = min_u.min(u);
    }
    let rows: Vec<Vec<Real>> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| vec![s.r, ys.u.values()[i], s.r_hat, rc[i]])
        .collect();

    Ok(ConformalParts {
        report: ConformalReport {
            tail_coefficient: ys.tail_coefficient,
            a: ys.a,
            e_adm_flux: e_adm,
            energy_shift: shift,
            energy_shift_direct_flux: direct,
            schoen_yau_residual: sy,
            glue,
        },
        rows,
        min_u,
    })
}

fn clipped_window(window: (Real, Real), f: &RadialField) -> (Real, Real) {
    let lo = window.0.max(f.grid().r_in() + 1e-9).max(1e-9);
    let hi = window.1.min(f.grid().r_out());
    (lo, hi)
}

fn model_summary(model: &ModelData) -> ModelSummary {
    ModelSummary {
        n: model.n(),
        m_bar_mean: model.m_bar(),
        p_bar_mean: model.p_bar(),
        zonal: !model.is_spherical(),
    }
}

/// Runs one stage (or the whole pipeline) and writes report.json plus the
/// CSV series into `out_dir`.
pub fn run(
    stage: Stage,
    cfg: &RunConfig,
    out_dir: &Path,
    fixed_clock: bool,
) -> Result<PathBuf, CliError> {
    let model = cfg.model()?;
    let created = if fixed_clock {
        FIXED_CLOCK_SENTINEL.to_string()
    } else {
        chrono::Utc::now().to_rfc3339()
    };
    let mut envelope = ReportEnvelope::new(created, model_summary(&model));
    let mut series: Vec<(&'static str, String)> = Vec::new();
    let mut state = PipelineState::new(model);

    let stages: &[Stage] = match stage {
        Stage::Pipeline => &[
            Stage::Alpha,
            Stage::Barriers,
            Stage::Mass,
            Stage::Jang,
            Stage::Conformal,
            Stage::Verify,
        ],
        _ => std::slice::from_ref(&stage),
    };

    for &st in stages {
        match st {
            Stage::Alpha => run_alpha(&mut state, &mut envelope, &mut series)?,
            Stage::Barriers => run_barriers(cfg, &mut state, &mut envelope, &mut series)?,
            Stage::Mass => run_mass(cfg, &mut state, &mut envelope, &mut series)?,
            Stage::Jang => run_jang(cfg, &mut state, &mut envelope, &mut series)?,
            Stage::Conformal => run_conformal(cfg, &mut state, &mut envelope, &mut series)?,
            Stage::Verify => run_verify(cfg, &mut state, &mut envelope)?,
            Stage::Pipeline => unreachable!("pipeline expands to concrete stages"),
        }
    }

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", out_dir.display())))?;
    let report_path = out_dir.join("report.json");
    let mut json = serde_json::to_string_pretty(&envelope)
        .map_err(|e| CliError::Solver(format!("report serialization failed: {e}")))?;
    json.push('\n');
    write_file(&report_path, &json)?;
    for (name, body) in series {
        write_file(&out_dir.join(name), &body)?;
    }
    Ok(report_path)
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn run_alpha(
    state: &mut PipelineState,
    envelope: &mut ReportEnvelope,
    series: &mut Vec<(&'static str, String)>,
) -> Result<(), CliError> {
    let n = state.model.n();
    let source = sphere::trace_source(&state.model);
    let alpha = state.alpha()?;
    envelope.stages.alpha = Some(AlphaReport {
        alpha_mean: alpha.sphere_mean(n),
        alpha_sup: alpha.sup_abs(),
        source_mean: source.sphere_mean(n),
    });
    let pts = 256;
    let rows: Vec<Vec<Real>> = (0..=pts)
        .map(|i| {
            let t = std::f64::consts::PI * i as Real / pts as Real;
            vec![t, source.at(t), alpha.at(t)]
        })
        .collect();
    series.push(("alpha.csv", jang_core::report::csv_table(&["theta", "source", "alpha"], &rows)));
    Ok(())
}

fn run_barriers(
    cfg: &RunConfig,
    state: &mut PipelineState,
    envelope: &mut ReportEnvelope,
    series: &mut Vec<(&'static str, String)>,
) -> Result<(), CliError> {
    let r_last = *cfg.mesh.r_list.last().unwrap();
    let r_max = (1.05 * r_last).max(1.2e3);
    let alpha = state.alpha()?.clone();
    let pair: BarrierPair = barrier::compute_barrier_pair(&state.model, &alpha, None, r_max)?;
    let tail_window = (100.0, (0.9 * r_max).min(1000.0));
    envelope.stages.barriers = Some(BarrierReport {
        constants: pair.constants,
        slope_plus_r0: pair.slope_plus_r0,
        slope_minus_r0: pair.slope_minus_r0,
        k_plus_tail_exponent: barrier::fit_decay_exponent(&pair.k_plus.deviation, tail_window).ok(),
        k_minus_tail_exponent: barrier::fit_decay_exponent(&pair.k_minus.deviation, tail_window)
            .ok(),
    });
    let rows: Vec<Vec<Real>> = pair
        .k_plus
        .k
        .grid()
        .nodes()
        .iter()
        .map(|&r| {
            vec![
                r,
                pair.k_plus.k.value_at(r),
                pair.k_minus.k.value_at(r),
                pair.f_plus.value_at(r),
                pair.f_minus.value_at(r),
                pair.pi.value_at(r),
            ]
        })
        .collect();
    series.push((
        "barriers.csv",
        jang_core::report::csv_table(&["r", "k_plus", "k_minus", "f_plus", "f_minus", "pi"], &rows),
    ));
    Ok(())
}

fn run_mass(
    cfg: &RunConfig,
    state: &mut PipelineState,
    envelope: &mut ReportEnvelope,
    series: &mut Vec<(&'static str, String)>,
) -> Result<(), CliError> {
    envelope.stages.mass = Some(state.mass(cfg)?.clone());
    // Dense per-R sweep for the CSV; per-R evaluations are independent, so
    // they fan out across workers (capped by JANGLAB_THREADS).
    let (lo, hi) = (cfg.mesh.r_list[0], *cfg.mesh.r_list.last().unwrap());
    let sweep = 33usize;
    let radii: Vec<Real> = (0..sweep)
        .map(|i| lo * (hi / lo).powf(i as Real / (sweep - 1) as Real))
        .collect();
    let cap = thread_cap()?;
    let model = &state.model;
    let rows: Vec<Result<Vec<Real>, Error>> = parallel_map(&radii, cap, |&r| {
        Ok(vec![r, mass::mass_flux(model, 0, r)?, mass::mass_flux(model, 1, r)?])
    });
    let rows: Vec<Vec<Real>> = rows.into_iter().collect::<Result<_, _>>()?;
    series.push((
        "mass.csv",
        jang_core::report::csv_table(&["r", "energy_flux", "momentum_flux_1"], &rows),
    ));
    Ok(())
}

fn run_jang(
    cfg: &RunConfig,
    state: &mut PipelineState,
    envelope: &mut ReportEnvelope,
    series: &mut Vec<(&'static str, String)>,
) -> Result<(), CliError> {
    let (f, diag) = state.solve(cfg)?;
    envelope.stages.jang = Some(diag.clone());
    let rows: Vec<Vec<Real>> = f
        .grid()
        .nodes()
        .iter()
        .zip(f.values().iter().zip(f.d1().iter()))
        .map(|(&r, (&v, &d))| vec![r, v, d])
        .collect();
    series.push(("jang.csv", jang_core::report::csv_table(&["r", "f", "df"], &rows)));
    Ok(())
}

fn run_conformal(
    cfg: &RunConfig,
    state: &mut PipelineState,
    envelope: &mut ReportEnvelope,
    series: &mut Vec<(&'static str, String)>,
) -> Result<(), CliError> {
    let parts = state.conformal(cfg)?;
    envelope.stages.conformal = Some(parts.report.clone());
    series.push((
        "conformal.csv",
        jang_core::report::csv_table(&["r", "u", "r_hat", "r_conformal"], &parts.rows),
    ));
    Ok(())
}

fn run_verify(
    cfg: &RunConfig,
    state: &mut PipelineState,
    envelope: &mut ReportEnvelope,
) -> Result<(), CliError> {
    let mass_report = state.mass(cfg)?.clone();
    let diag = state.solve(cfg)?.1.clone();
    let parts = state.conformal(cfg)?;
    // 5% relative, with an absolute floor for the fit noise of zero-mean data.
    let alpha_tol = 0.05 * diag.alpha_mean.abs() + 1e-3;
    let checks = vec![
        IdentityCheck::new(
            "e_flux_vs_closed_form",
            mass_report.relation_checks.flux_vs_closed_form,
            1e-3,
        ),
        IdentityCheck::new("e_adm_vs_(n-1)e", mass_report.relation_checks.adm_vs_energy, 1e-2),
        IdentityCheck::new(
            "adm_trace_vs_alpha_form",
            mass_report.relation_checks.adm_trace_vs_alpha,
            1e-10,
        ),
        IdentityCheck::new("jang_bracket_violation", diag.bracket_violation, 1e-9),
        IdentityCheck::new("alpha_fit_vs_mean", diag.alpha_fit - diag.alpha_mean, alpha_tol),
        IdentityCheck::new(
            "energy_shift_identity",
            parts.report.energy_shift_direct_flux - parts.report.energy_shift,
            1e-2,
        ),
        IdentityCheck::new("u_negative_part", (-parts.min_u).max(0.0), 0.0),
    ];
    envelope.stages.verify = Some(checks);
    Ok(())
}
