//! Comparison report rendering.

use std::fmt::Write as _;

use crate::error::Result;
use crate::harness::ComparisonReport;

fn fmt_num(v: f64, digits: usize) -> String {
    if v.is_finite() {
        format!("{v:.digits$}")
    } else {
        "n/a".to_string()
    }
}

/// Human-readable, table-shaped summary.
pub fn render_text(report: &ComparisonReport, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "samples: {} (excluded from metrics: {})", report.samples, report.excluded_samples);
    if let Some(f) = &report.failure {
        let _ = writeln!(s, "FAILED: {} numerical failure at step {}: {}", f.filter, f.step, f.reason);
        return s;
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<24}{:>12}{:>12}{:>14}", "metric", "EKF", "RBC-DEKF", "improvement");
    let _ = writeln!(
        s,
        "{:<24}{:>12}{:>12}{:>13}%",
        "SOC RMSE [%]",
        fmt_num(report.soc_rmse_ekf, 3),
        fmt_num(report.soc_rmse_rbc, 3),
        fmt_num(report.improvement_soc, 1)
    );
    let _ = writeln!(
        s,
        "{:<24}{:>12}{:>12}{:>13}%",
        "voltage RMSE [mV]",
        fmt_num(report.v_rmse_ekf, 3),
        fmt_num(report.v_rmse_rbc, 3),
        fmt_num(report.improvement_v, 1)
    );
    let _ = writeln!(
        s,
        "{:<24}{:>12}{:>12}",
        "max |SOC error| [%]",
        fmt_num(report.max_abs_soc_error_ekf, 3),
        fmt_num(report.max_abs_soc_error_rbc, 3)
    );
    if let Some((ekf, rbc)) = &report.post_convergence {
        let _ = writeln!(s);
        let _ = writeln!(s, "after the convergence window:");
        let _ = writeln!(
            s,
            "{:<24}{:>12}{:>12}",
            "SOC RMSE [%]",
            fmt_num(ekf.soc_rmse_pct, 3),
            fmt_num(rbc.soc_rmse_pct, 3)
        );
        let _ = writeln!(
            s,
            "{:<24}{:>12}{:>12}",
            "voltage RMSE [mV]",
            fmt_num(ekf.v_rmse_mv, 3),
            fmt_num(rbc.v_rmse_mv, 3)
        );
    }
    s
}

pub fn render_json(report: &ComparisonReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| crate::error::Error::Domain(e.to_string()))
}
