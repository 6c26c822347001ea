//! Batch studies behind the command-line tool: convergence, locality,
//! unisolvency, inf-sup and single solves, with CSV and JSON reports.

mod config;
mod convergence;
mod manufactured;
mod studies;

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub use config::{parse_levels, StudyConfig};
pub use convergence::{run_convergence, variant_gap, ConvergenceReport, ConvergenceRow, RateRow, VariantGap, RATE_THRESHOLD};
pub use manufactured::{ManufacturedSolution, SolutionId};
pub use studies::{run_infsup, run_locality, run_solve, run_unisolvency, LocalityStudy, SolveReport, UnisolvencyReport};

/// Header of the convergence CSV.
pub const CSV_HEADER: &str = "level,h,dofs,err_sigma_l2,err_sigma_energy,err_u_l2,err_du_l2,residual";
/// Header of the rates block that follows it.
pub const RATES_HEADER: &str = "from_level,to_level,rate_sigma_l2,rate_sigma_energy,rate_u_l2,rate_du_l2,rate_combined";

/// Deterministic provenance attached to every JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    /// Source revision baked in at build time via LOCAL_HODGE_REVISION.
    pub revision: &'static str,
    pub command: String,
    /// FNV-1a digest of the serialized result.
    pub digest: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub metadata: RunMetadata,
    pub result: T,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, result: T) -> Result<Self> {
        let body = serde_json::to_vec(&result)?;
        Ok(Report {
            metadata: RunMetadata {
                tool: "local-hodge",
                version: env!("CARGO_PKG_VERSION"),
                revision: option_env!("LOCAL_HODGE_REVISION").unwrap_or("unknown"),
                command: command.to_string(),
                digest: format!("{:016x}", fnv1a(&body)),
            },
            result,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn opt(r: Option<f64>) -> String {
    r.map_or_else(|| "nan".to_string(), |v| format!("{v:.4}"))
}

/// Error table, a blank line, then the rates block. Rates of errors that
/// vanish identically are written as `nan`.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.3e}",
            r.level, r.h, r.dofs, r.err_sigma_l2, r.err_sigma_energy, r.err_u_l2, r.err_du_l2, r.residual
        );
    }
    s.push('\n');
    s.push_str(RATES_HEADER);
    s.push('\n');
    for r in &report.rates {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.from_level,
            r.to_level,
            opt(r.sigma_l2),
            opt(r.sigma_energy),
            opt(r.u_l2),
            opt(r.du_l2),
            opt(r.combined)
        );
    }
    s
}

/// Write `<base>.json` and, when given, `<base>.csv`.
pub fn write_outputs(base: &Path, json: &str, csv: Option<&str>) -> Result<()> {
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(base.with_extension("json"), json)?;
    if let Some(csv) = csv {
        std::fs::write(base.with_extension("csv"), csv)?;
    }
    Ok(())
}
