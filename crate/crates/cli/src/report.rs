//! Human-readable rendering of metrics and stability reports.

use aerowrench_core::sim::MetricsReport;
use aerowrench_core::stability::StabilityReport;

const CHANNELS: [&str; 6] = [
    "f_x [N]",
    "f_y [N]",
    "f_z [N]",
    "tau_x [N m]",
    "tau_y [N m]",
    "tau_z [N m]",
];

/// Renders per-channel RMSE/peak-error tables for the estimators that ran.
pub fn metrics_table(metrics: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario: {} (t_skip {} s, {} rows in window)\n",
        metrics.scenario, metrics.t_skip, metrics.rows_used
    ));
    out.push_str(&format!(
        "gain condition met: {}, lyapunov violations: {}\n",
        metrics.gain_condition_met, metrics.lyapunov_violations
    ));
    out.push_str(&format!(
        "{:<12} {:>12} {:>12} {:>12} {:>12}\n",
        "channel", "agno rmse", "ekf rmse", "agno max|e|", "ekf max|e|"
    ));
    let dash = |v: Option<f64>| match v {
        Some(x) => format!("{x:>12.5}"),
        None => format!("{:>12}", "-"),
    };
    for (c, channel) in CHANNELS.iter().enumerate() {
        out.push_str(&format!(
            "{:<12} {} {} {} {}\n",
            channel,
            dash(metrics.agno.as_ref().map(|m| m.rmse[c])),
            dash(metrics.ekf.as_ref().map(|m| m.rmse[c])),
            dash(metrics.agno.as_ref().map(|m| m.max_abs_err[c])),
            dash(metrics.ekf.as_ref().map(|m| m.max_abs_err[c])),
        ));
    }
    out
}

/// Renders the per-channel RMSE ratio line used by `compare`.
pub fn ratio_line(metrics: &MetricsReport) -> Option<String> {
    let agno = metrics.agno.as_ref()?;
    let ekf = metrics.ekf.as_ref()?;
    let mut parts = Vec::new();
    for c in 0..6 {
        if agno.rmse[c] > 0.0 {
            parts.push(format!(
                "{} {:.2}",
                ["fx", "fy", "fz", "tx", "ty", "tz"][c],
                ekf.rmse[c] / agno.rmse[c]
            ));
        }
    }
    Some(format!("ekf/agno rmse ratios: {}", parts.join(", ")))
}

/// Renders the stability certificate.
pub fn stability_text(report: &StabilityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "gamma_hat (sup |M'| over envelope): {:.6}\n",
        report.gamma_hat
    ));
    out.push_str(&format!(
        "k_min required (gamma_hat/2):       {:.6}\n",
        report.k_min_required
    ));
    out.push_str(&format!(
        "worst-case effective gain k_eff:    {:.6}\n",
        report.k_eff
    ));
    out.push_str(&format!(
        "convergence time constant tau_c:    {:.4} s\n",
        report.tau_c
    ));
    out.push_str(&format!(
        "ultimate error bound (|Delta| <= eps): {:.4}\n",
        report.ultimate_bound
    ));
    if report.grid_warning {
        out.push_str(
            "warning: envelope grid may be too coarse (gamma_hat moved > 5% on refinement)\n",
        );
    }
    out.push_str(&format!(
        "gain condition 2 k_eff > gamma_hat: {}\n",
        if report.gain_condition_met {
            "MET"
        } else {
            "NOT MET"
        }
    ));
    out
}
