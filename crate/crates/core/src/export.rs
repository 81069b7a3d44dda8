//! Plain-text writers shared by the sweep, map and link outputs.
//!
//! Numbers are written with `Display` for `f64`, which prints the shortest
//! string that round-trips, so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// dB floor used when exporting maps.
pub const DB_FLOOR: f64 = -80.0;

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v}")
    }
}

/// CSV with a header row and one line per record, `\n` terminated.
pub fn csv_table<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        push_row(&mut out, &row);
    }
    out
}

/// Headerless CSV matrix, one line per `ncols` values.
pub fn csv_matrix(values: &[f64], ncols: usize) -> String {
    let mut out = String::with_capacity(values.len() * 12);
    for row in values.chunks(ncols.max(1)) {
        push_row(&mut out, row);
    }
    out
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_float(*v));
    }
    out.push('\n');
}

/// 8-bit ASCII graymap of a row-major matrix whose first row is the bottom
/// line of the picture. `[lo, hi]` maps linearly onto `[0, 255]`; NaN is 0.
pub fn pgm_p2(values: &[f64], ncols: usize, lo: f64, hi: f64) -> String {
    let nrows = values.len().checked_div(ncols).unwrap_or(0);
    let mut out = format!("P2\n{ncols} {nrows}\n255\n");
    for row in values.chunks(ncols.max(1)).rev() {
        for (i, v) in row.iter().enumerate() {
            let level = if v.is_nan() {
                0
            } else {
                (((v.clamp(lo, hi) - lo) / (hi - lo)) * 255.0).round() as u8
            };
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{level}");
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
