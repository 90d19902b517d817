//! CSV result tables and the run manifest.

use std::path::Path;

use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::harness::{ErrorReport, RegretCurve};

pub const RM_COLUMNS: [&str; 4] = ["policy", "timestep", "mean_regret", "stderr"];
pub const BOUND_COLUMN: &str = "bound_value";
pub const BAI_COLUMNS: [&str; 7] = [
    "policy",
    "K",
    "budget",
    "replications",
    "error_prob",
    "ci_halfwidth",
    "bound_value",
];

/// Formats like C's `%.10g`: ten significant digits, trailing zeros
/// dropped, exponent notation outside `1e-5 <= |x| < 1e10`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Regret table, rows sorted by policy name then timestep. The bound column
/// is present only when `overlay` is set and is empty for policies without
/// a theorem.
pub fn rm_csv(curves: &[RegretCurve], overlay: bool) -> Result<Vec<u8>> {
    let mut w = writer();
    let mut header: Vec<&str> = RM_COLUMNS.to_vec();
    if overlay {
        header.push(BOUND_COLUMN);
    }
    w.write_record(&header)?;
    let mut sorted: Vec<&RegretCurve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.policy.name());
    for c in sorted {
        for (i, t) in c.timesteps.iter().enumerate() {
            let mut row = vec![
                c.policy.name().to_string(),
                t.to_string(),
                fmt_sig(c.mean_regret[i]),
                fmt_sig(c.stderr[i]),
            ];
            if overlay {
                row.push(c.bound.as_ref().map(|b| fmt_sig(b[i])).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
    }
    finish(w)
}

/// Error-probability table, rows sorted by policy name, K, then budget.
pub fn bai_csv(reports: &[ErrorReport]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(BAI_COLUMNS)?;
    let mut sorted: Vec<&ErrorReport> = reports.iter().collect();
    sorted.sort_by_key(|r| (r.policy.name(), r.k, r.budget));
    for r in sorted {
        w.write_record([
            r.policy.name().to_string(),
            r.k.to_string(),
            r.budget.to_string(),
            r.replications.to_string(),
            fmt_sig(r.error_prob),
            fmt_sig(r.ci_halfwidth),
            r.bound.map(fmt_sig).unwrap_or_default(),
        ])?;
    }
    finish(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schema {
    Regret { bound: bool },
    ErrorProb,
}

/// Parsed CSV rows, kept as text apart from the schema check.
#[derive(Clone, Debug)]
pub struct Table {
    pub schema: Schema,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn detect_schema(header: &[String]) -> Result<Schema> {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    if h == RM_COLUMNS {
        Ok(Schema::Regret { bound: false })
    } else if h.len() == 5 && h[..4] == RM_COLUMNS && h[4] == BOUND_COLUMN {
        Ok(Schema::Regret { bound: true })
    } else if h == BAI_COLUMNS {
        Ok(Schema::ErrorProb)
    } else {
        Err(Error::Config(format!(
            "CSV header [{}] matches neither the regret nor the error-probability schema",
            h.join(", ")
        )))
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let schema = detect_schema(&header)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("{} has no data rows", path.display())));
    }
    Ok(Table { schema, header, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub config: &'a ResolvedConfig,
    pub results: String,
    pub wall_time_seconds: f64,
}

pub fn manifest_json(m: &Manifest<'_>) -> Result<String> {
    Ok(serde_json::to_string_pretty(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bai::BaiKind;
    use crate::rm::RmPolicyKind;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.798), "0.798");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt_sig(5530.491), "5530.491");
        assert_eq!(fmt_sig(123456789012.0), "1.23456789e+11");
        assert_eq!(fmt_sig(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_sig(9999999999.5), "1e+10");
        assert_eq!(fmt_sig(0.00012345678901), "0.000123456789");
    }

    fn curve(policy: RmPolicyKind, bound: bool) -> RegretCurve {
        RegretCurve {
            policy,
            replications: 2,
            timesteps: vec![0, 1, 10],
            mean_regret: vec![0.0, 0.5, 2.25],
            stderr: vec![0.0, 0.1, 0.2],
            mean_pulls: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]],
            bound: bound.then(|| vec![0.0, 4.0, 9.0]),
        }
    }

    #[test]
    fn rm_table_layout() {
        let bytes = rm_csv(&[curve(RmPolicyKind::ModMvts, false), curve(RmPolicyKind::UcbRssr, true)], true).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "policy,timestep,mean_regret,stderr,bound_value");
        assert_eq!(lines[1], "mod-mvts,0,0,0,");
        assert_eq!(lines[6], "ucb-rssr,10,2.25,0.2,9");
        assert_eq!(lines.len(), 7);
        let plain = String::from_utf8(rm_csv(&[curve(RmPolicyKind::UcbVv, false)], false).unwrap()).unwrap();
        assert!(plain.starts_with("policy,timestep,mean_regret,stderr\n"));
    }

    #[test]
    fn bai_table_layout() {
        let rep = |policy, k| ErrorReport {
            policy,
            k,
            budget: 5000,
            replications: 100,
            errors: 10,
            error_prob: 0.1,
            ci_halfwidth: 0.0588,
            bound: None,
        };
        let text = String::from_utf8(bai_csv(&[rep(BaiKind::Uniform, 16), rep(BaiKind::Shsr, 32), rep(BaiKind::Shsr, 16)]).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], BAI_COLUMNS.join(","));
        assert_eq!(lines[1], "shsr,16,5000,100,0.1,0.0588,");
        assert!(lines[3].starts_with("uniform,16"));
    }

    #[test]
    fn schema_detection() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(detect_schema(&s(&RM_COLUMNS)).unwrap(), Schema::Regret { bound: false });
        assert_eq!(detect_schema(&s(&BAI_COLUMNS)).unwrap(), Schema::ErrorProb);
        assert!(detect_schema(&s(&["a", "b"])).is_err());
    }

    #[test]
    fn empty_body_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "policy,timestep,mean_regret,stderr\n").unwrap();
        assert!(matches!(read_table(&p), Err(Error::Config(_))));
    }
}
