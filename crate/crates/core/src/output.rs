//! CSV schemas emitted by the command-line tool.

use std::io::Write;

use crate::cdf::Bounds;
use crate::convexity::ConvexityCertificate;
use crate::envelope::TentEnvelope;
use crate::error::Result;

pub const ENVELOPE_HEADER: &str = "x,phi_lower,phi_upper";
pub const CDF_HEADER: &str = "x,f_lower_num,f_upper_num,denom_log2";
pub const SCAN_HEADER: &str = "lambda,status,scale,witness_x,min_margin";

/// Seventeen significant digits, enough to round-trip any binary64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_envelope_csv<W: Write>(env: &TentEnvelope, mut out: W) -> Result<()> {
    writeln!(out, "{ENVELOPE_HEADER}")?;
    for (x, lo, hi) in env.rows() {
        writeln!(out, "{},{},{}", num(x), num(lo), num(hi))?;
    }
    Ok(())
}

/// Bound counts at `x_i = i/M` for `i = 0..=M`.
pub fn write_cdf_csv<W: Write>(bounds: &Bounds<'_>, grid: u32, mut out: W) -> Result<()> {
    writeln!(out, "{CDF_HEADER}")?;
    for i in 0..=grid {
        let x = i as f64 / grid as f64;
        writeln!(
            out,
            "{},{},{},{}",
            num(x),
            bounds.lower_count(x),
            bounds.upper_count(x),
            bounds.depth()
        )?;
    }
    Ok(())
}

pub fn write_scan_csv<W: Write>(certs: &[ConvexityCertificate], mut out: W) -> Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    for c in certs {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(c.lambda0.get()),
            c.status.as_str(),
            num(c.scale),
            c.witness_x.map(num).unwrap_or_default(),
            num(c.min_margin)
        )?;
    }
    Ok(())
}
