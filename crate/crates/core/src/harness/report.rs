use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ApproximationRow;
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "l,p,minimal_period,w1,discrepancy_m,residual";

/// 17 significant digits, scientific notation: round-trips every `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_report<W: Write>(rows: &[ApproximationRow], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.l,
            format_real(r.p),
            r.minimal_period,
            format_real(r.w1),
            format_real(r.discrepancy_m),
            format_real(r.residual)
        )?;
    }
    Ok(())
}

pub fn emit_report(rows: &[ApproximationRow], path: &Path) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    write_report(rows, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}
