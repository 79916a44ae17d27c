//! CSV/JSON writers and the post-write validator.
//!
//! Floats are printed like C's `%.12g`: 12 significant digits, trailing
//! zeros dropped, `.` as decimal separator. Lines end in `\n`. Every file
//! starts with the run manifest (as `#` comment lines in CSV, as a
//! `manifest` object in JSON).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::engine::{CycleRecord, TracePoint};

pub const CYCLES_HEADER: &str = "k,t_start,T,node,u,gamma,w,u_av,w_av,t_delta,t_w,t_total";
pub const TRACE_HEADER: &str = "t,node,u_tau,w_tau,delta_i_tau";
pub const ARRIVALS_HEADER: &str = "index,t";
pub const SUMMARY_HEADER: &str =
    "param,value,t_star,spectral_radius,schur,events_to_converge,time_to_converge,t_final";

/// Provenance attached to every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_sha256: String, seed: Option<u64>, outputs: &[&str]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config_sha256,
            seed,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn csv_preamble(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool: {} {}\n# subcommand: {}\n# config_sha256: {}\n# seed: {}\n# outputs: {}\n",
            self.tool,
            self.version,
            self.subcommand,
            self.config_sha256,
            seed,
            self.outputs.join(" ")
        )
    }
}

/// `%.12g`.
pub fn fmt_float(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub fn cycles_csv(manifest: &RunManifest, records: &[CycleRecord]) -> String {
    let mut out = manifest.csv_preamble();
    out.push_str(CYCLES_HEADER);
    out.push('\n');
    for r in records {
        for (i, n) in r.nodes.iter().enumerate() {
            let m = &n.metrics;
            out.push_str(&row(&[
                r.k.to_string(),
                fmt_float(r.t_start),
                fmt_float(r.period),
                (i + 1).to_string(),
                fmt_float(n.u),
                fmt_float(n.gamma),
                fmt_float(n.w),
                fmt_float(m.u_av),
                fmt_float(m.w_av),
                fmt_float(m.t_delta),
                fmt_float(m.t_w),
                fmt_float(m.t_total),
            ]));
        }
    }
    out
}

pub fn trace_csv(manifest: &RunManifest, traces: &[Vec<TracePoint>]) -> String {
    let mut out = manifest.csv_preamble();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for point in traces.iter().flatten() {
        for (i, n) in point.nodes.iter().enumerate() {
            out.push_str(&row(&[
                fmt_float(point.t),
                (i + 1).to_string(),
                fmt_float(n.u),
                fmt_float(n.w),
                fmt_float(n.delta),
            ]));
        }
    }
    out
}

pub fn arrivals_csv(manifest: &RunManifest, arrivals: &[f64]) -> String {
    let mut out = manifest.csv_preamble();
    out.push_str(ARRIVALS_HEADER);
    out.push('\n');
    for (i, t) in arrivals.iter().enumerate() {
        out.push_str(&row(&[i.to_string(), fmt_float(*t)]));
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path, source })
}

/// Parsed data rows of a `cycles.csv` body.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclesRow {
    pub k: usize,
    pub t_start: f64,
    pub period: f64,
    pub node: usize,
    pub u: f64,
    pub gamma: f64,
    pub w: f64,
    pub u_av: f64,
    pub w_av: f64,
    pub t_delta: f64,
    pub t_w: f64,
    pub t_total: f64,
}

pub fn parse_cycles_csv(text: &str) -> Result<Vec<CyclesRow>, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    match lines.next() {
        Some(h) if h == CYCLES_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 12 {
                return Err(format!("row {}: expected 12 fields, got {}", i + 1, f.len()));
            }
            let num = |j: usize| -> Result<f64, String> {
                f[j].parse::<f64>().map_err(|e| format!("row {}: field {}: {e}", i + 1, j + 1))
            };
            let int = |j: usize| -> Result<usize, String> {
                f[j].parse::<usize>().map_err(|e| format!("row {}: field {}: {e}", i + 1, j + 1))
            };
            Ok(CyclesRow {
                k: int(0)?,
                t_start: num(1)?,
                period: num(2)?,
                node: int(3)?,
                u: num(4)?,
                gamma: num(5)?,
                w: num(6)?,
                u_av: num(7)?,
                w_av: num(8)?,
                t_delta: num(9)?,
                t_w: num(10)?,
                t_total: num(11)?,
            })
        })
        .collect()
}

/// Re-read a written `cycles.csv` and re-check nonnegativity and, when
/// `lambda` is given, per-cycle conservation `Σᵢ uᵢᵃᵛ = λ` to `1e-9·λ`.
/// Returns the number of data rows.
pub fn validate_cycles_csv(text: &str, lambda: Option<f64>) -> Result<usize, String> {
    let rows = parse_cycles_csv(text)?;
    let mut per_cycle: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        if !(r.period > 0.0) {
            return Err(format!("row {}: cycle period {} is not positive", i + 1, r.period));
        }
        for (name, v) in [("u", r.u), ("gamma", r.gamma), ("w", r.w), ("u_av", r.u_av)] {
            if !(v >= 0.0) {
                return Err(format!("row {}: {name} = {v} is negative", i + 1));
            }
        }
        *per_cycle.entry(r.k).or_default() += r.u_av;
    }
    if let Some(lambda) = lambda {
        for (k, total) in per_cycle {
            if (total - lambda).abs() > 1e-9 * lambda {
                return Err(format!("cycle {k}: sum of u_av = {total} differs from lambda = {lambda}"));
            }
        }
    }
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_like_c_general() {
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(3.4), "3.4");
        assert_eq!(fmt_float(100.0), "100");
        assert_eq!(fmt_float(4.0 / 3.0), "1.33333333333");
        assert_eq!(fmt_float(75.0_f64.sqrt()), "8.66025403784");
        assert_eq!(fmt_float(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_float(1e-4), "0.0001");
        assert_eq!(fmt_float(123456789012.0), "123456789012");
        assert_eq!(fmt_float(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_float(9.9999999999995), "10");
        assert_eq!(fmt_float(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn twelve_digit_round_trip(x in -1e15f64..1e15) {
            let back: f64 = fmt_float(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    #[test]
    fn validator_flags_bad_rows() {
        let m = RunManifest::new("simulate", "abc".into(), None, &["cycles.csv"]);
        let good = format!("{}{CYCLES_HEADER}\n0,0,1,1,1,1,1,60,1,0,0,0\n0,0,1,2,1,1,1,40,1,0,0,0\n", m.csv_preamble());
        assert_eq!(validate_cycles_csv(&good, Some(100.0)), Ok(2));
        assert!(validate_cycles_csv(&good, Some(99.0)).is_err());
        let negative = good.replace("0,0,1,2,1,1,1,40", "0,0,1,2,1,1,-1,40");
        assert!(validate_cycles_csv(&negative, None).unwrap_err().contains("w = -1"));
        assert!(validate_cycles_csv("k,t\n", None).is_err());
    }
}
