//! CSV serialization of run logs.
//!
//! Fixed column order: `t`, `eta[6]`, `eta_dot[6]`, `Tex_true[6]`,
//! `Tex_agno[6]` (when the observer ran), `Tex_ekf[6]` (when the EKF ran),
//! `u_q[8]`, `V_e`, `k_eff`, `sat_flags`. Floats are written with nine
//! significant digits; writing is deterministic, so identical runs produce
//! byte-identical files.

use aerowrench_core::sim::{LogRow, RunLog};
use aerowrench_core::{Vec6, Vec8};
use anyhow::{bail, Context, Result};
use std::io::Write;
use std::path::Path;

const ETA_NAMES: [&str; 6] = ["x", "y", "z", "phi", "theta", "psi"];
const WRENCH_NAMES: [&str; 6] = ["fx", "fy", "fz", "tx", "ty", "tz"];

fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

/// Header for a log with the given estimator columns.
pub fn header(has_agno: bool, has_ekf: bool) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(ETA_NAMES.iter().map(|n| format!("eta_{n}")));
    cols.extend(ETA_NAMES.iter().map(|n| format!("deta_{n}")));
    cols.extend(WRENCH_NAMES.iter().map(|n| format!("Tex_true_{n}")));
    if has_agno {
        cols.extend(WRENCH_NAMES.iter().map(|n| format!("Tex_agno_{n}")));
    }
    if has_ekf {
        cols.extend(WRENCH_NAMES.iter().map(|n| format!("Tex_ekf_{n}")));
    }
    cols.extend((1..=8).map(|i| format!("u_q_{i}")));
    cols.push("V_e".into());
    cols.push("k_eff".into());
    cols.push("sat_flags".into());
    cols
}

/// Writes a run log as CSV.
pub fn write_csv(log: &RunLog, path: &Path) -> Result<()> {
    let has_agno = log
        .rows
        .first()
        .map(|r| r.tex_agno.is_some())
        .unwrap_or(false);
    let has_ekf = log
        .rows
        .first()
        .map(|r| r.tex_ekf.is_some())
        .unwrap_or(false);
    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot create log file {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{}", header(has_agno, has_ekf).join(","))?;
    for row in &log.rows {
        let mut fields = Vec::with_capacity(40);
        fields.push(fmt(row.t));
        fields.extend(row.eta.iter().map(|&v| fmt(v)));
        fields.extend(row.eta_dot.iter().map(|&v| fmt(v)));
        fields.extend(row.tex_true.iter().map(|&v| fmt(v)));
        if let Some(w6) = &row.tex_agno {
            fields.extend(w6.iter().map(|&v| fmt(v)));
        }
        if let Some(w6) = &row.tex_ekf {
            fields.extend(w6.iter().map(|&v| fmt(v)));
        }
        fields.extend(row.u_q.iter().map(|&v| fmt(v)));
        fields.push(fmt(row.v_e));
        fields.push(fmt(row.k_eff));
        fields.push(row.sat_flags.to_string());
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a run log back from CSV. Metadata that is not part of the column
/// contract (scenario name, gain-condition flag, transient skip) is
/// reconstructed from the file name and defaults; the rows are exact at the
/// written precision.
pub fn read_csv(path: &Path) -> Result<RunLog> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open log file {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let has_agno = cols.contains(&"Tex_agno_fx");
    let has_ekf = cols.contains(&"Tex_ekf_fx");
    let expected = header(has_agno, has_ekf);
    if cols != expected.iter().map(|s| s.as_str()).collect::<Vec<_>>() {
        bail!("unexpected column layout in {}", path.display());
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut it = record.iter();
        let mut next_f64 = || -> Result<f64> {
            it.next()
                .context("missing field")?
                .parse::<f64>()
                .context("bad float field")
        };
        let t = next_f64()?;
        let take6 = |next: &mut dyn FnMut() -> Result<f64>| -> Result<Vec6> {
            let mut v = Vec6::zeros();
            for i in 0..6 {
                v[i] = next()?;
            }
            Ok(v)
        };
        let eta = take6(&mut next_f64)?;
        let eta_dot = take6(&mut next_f64)?;
        let tex_true = take6(&mut next_f64)?;
        let tex_agno = if has_agno {
            Some(take6(&mut next_f64)?)
        } else {
            None
        };
        let tex_ekf = if has_ekf {
            Some(take6(&mut next_f64)?)
        } else {
            None
        };
        let mut u_q = Vec8::zeros();
        for i in 0..8 {
            u_q[i] = next_f64()?;
        }
        let v_e = next_f64()?;
        let k_eff = next_f64()?;
        let sat_flags: u8 = it
            .next()
            .context("missing sat_flags")?
            .parse()
            .context("bad sat_flags")?;
        rows.push(LogRow {
            t,
            eta,
            eta_dot,
            tex_true,
            tex_agno,
            tex_ekf,
            u_q,
            v_e,
            k_eff,
            sat_flags,
        });
    }
    let dt_control = if rows.len() >= 2 {
        rows[1].t - rows[0].t
    } else {
        0.01
    };
    Ok(RunLog {
        scenario: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        dt_control,
        gain_condition_met: true,
        t_skip: 2.0,
        rows,
    })
}
