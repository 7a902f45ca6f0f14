//! Serializable per-stage reports and CSV assembly.
//!
//! The envelope is versioned so downstream notebooks can detect layout
//! changes; numeric fields use Rust's shortest-roundtrip float formatting,
//! which keeps identical runs byte-identical.

use serde::Serialize;

use crate::barrier::BarrierConstants;
use crate::jang::ContinuationDiagnostics;
use crate::mass::MassReport;
use crate::Real;

pub const SCHEMA_VERSION: u32 = 1;

/// Model echo carried at the top of the report.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub n: usize,
    pub m_bar_mean: Real,
    pub p_bar_mean: Real,
    pub zonal: bool,
}

/// Sphere-stage summary.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaReport {
    pub alpha_mean: Real,
    pub alpha_sup: Real,
    pub source_mean: Real,
}

/// Barrier-stage summary (profile scalars; the curves go to CSV).
#[derive(Debug, Clone, Serialize)]
pub struct BarrierReport {
    pub constants: BarrierConstants,
    pub slope_plus_r0: Real,
    pub slope_minus_r0: Real,
    pub k_plus_tail_exponent: Option<Real>,
    pub k_minus_tail_exponent: Option<Real>,
}

/// Conformal-stage summary.
#[derive(Debug, Clone, Serialize)]
pub struct ConformalReport {
    pub tail_coefficient: Real,
    pub a: Real,
    pub e_adm_flux: Real,
    pub energy_shift: Real,
    pub energy_shift_direct_flux: Real,
    pub schoen_yau_residual: Real,
    pub glue: Vec<GlueSample>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GlueSample {
    pub r_glue: Real,
    pub decay: Real,
}

/// One named identity/consistency check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: Real,
    pub tolerance: Real,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(name: &str, value: Real, tolerance: Real) -> Self {
        Self { name: name.into(), value, tolerance, pass: value.abs() <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct StageReports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barriers: Option<BarrierReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jang: Option<ContinuationDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<Vec<IdentityCheck>>,
}

/// Top-level versioned report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    /// RFC-ish timestamp, or a fixed sentinel under --fixed-clock.
    pub created: String,
    pub model: ModelSummary,
    pub stages: StageReports,
}

impl ReportEnvelope {
    pub fn new(created: String, model: ModelSummary) -> Self {
        Self { schema_version: SCHEMA_VERSION, created, model, stages: StageReports::default() }
    }
}

/// Flat CSV assembly: header row plus numeric rows, shortest-roundtrip
/// formatting, '\n' line endings.
pub fn csv_table(headers: &[&str], rows: &[Vec<Real>]) -> String {
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
