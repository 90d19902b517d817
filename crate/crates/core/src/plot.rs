//! SVG rendering of result tables. Plots only draw what the CSV contains.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::report::{Schema, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Regret,
    ErrorProb,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regret" => Ok(PlotKind::Regret),
            "error_prob" => Ok(PlotKind::ErrorProb),
            other => Err(Error::Config(format!(
                "unknown plot kind '{other}' (expected regret or error_prob)"
            ))),
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn num(table: &Table, row: &[String], col: &str) -> Result<Option<f64>> {
    let i = table
        .column(col)
        .ok_or_else(|| Error::Config(format!("missing column '{col}'")))?;
    let cell = row[i].trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Config(format!("column '{col}' holds non-numeric value '{cell}'")))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    out: String,
}

impl Frame {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            escape(title)
        );
        let (x0, y0, x1) = (LEFT, HEIGHT - BOTTOM, WIDTH - RIGHT);
        let _ = writeln!(
            out,
            r#"<path class="axis" d="M{x0},{TOP} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
        );
        Self { out }
    }

    fn legend(&mut self, idx: usize, label: &str, color: &str) {
        let x = WIDTH - RIGHT + 15.0;
        let y = TOP + 10.0 + 18.0 * idx as f64;
        let _ = writeln!(
            self.out,
            r#"<g class="legend"><rect x="{x}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{}</text></g>"#,
            y - 10.0,
            x + 18.0,
            y,
            escape(label)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn y_pos(v: f64, ymax: f64) -> f64 {
    let h = HEIGHT - TOP - BOTTOM;
    HEIGHT - BOTTOM - h * (v / ymax).clamp(0.0, 1.0)
}

fn y_ticks(frame: &mut Frame, ymax: f64) {
    for i in 0..=4 {
        let v = ymax * i as f64 / 4.0;
        let y = y_pos(v, ymax);
        let _ = writeln!(
            frame.out,
            r#"<text class="tick" x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            short(v)
        );
    }
}

fn short(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn nice_max(v: f64) -> f64 {
    if !(v > 0.0) || !v.is_finite() {
        1.0
    } else {
        v * 1.05
    }
}

fn regret_svg(table: &Table) -> Result<String> {
    // policy -> (timestep, mean, bound)
    let mut series: BTreeMap<String, Vec<(f64, f64, Option<f64>)>> = BTreeMap::new();
    let has_bound = matches!(table.schema, Schema::Regret { bound: true });
    for row in &table.rows {
        let t = num(table, row, "timestep")?.ok_or_else(|| Error::Config("empty timestep".into()))?;
        let m = num(table, row, "mean_regret")?.ok_or_else(|| Error::Config("empty mean_regret".into()))?;
        let b = if has_bound { num(table, row, "bound_value")? } else { None };
        series.entry(row[0].clone()).or_default().push((t, m, b));
    }
    let tmax = series.values().flatten().map(|p| p.0).fold(1.0, f64::max);
    let ymax = nice_max(series.values().flatten().map(|p| p.1).fold(0.0, f64::max));
    let lx_max = tmax.log10().max(1e-9);
    let w = WIDTH - LEFT - RIGHT;
    let x_pos = |t: f64| LEFT + w * (t.max(1.0).log10() / lx_max);

    let mut f = Frame::new("Cumulative regret");
    y_ticks(&mut f, ymax);
    for d in 0..=lx_max.floor() as i32 {
        let x = x_pos(10f64.powi(d));
        let _ = writeln!(
            f.out,
            r#"<text class="tick" x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#,
            HEIGHT - BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        f.out,
        r#"<text x="{}" y="{}" text-anchor="middle">time step (log scale)</text>"#,
        LEFT + w / 2.0,
        HEIGHT - 10.0
    );
    for (i, (policy, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d = polyline(pts.iter().filter(|p| p.0 >= 1.0).map(|p| (x_pos(p.0), y_pos(p.1, ymax))));
        let _ = writeln!(
            f.out,
            r#"<path class="curve" data-policy="{}" d="{d}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            escape(policy)
        );
        let bound: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.0 >= 1.0)
            .filter_map(|p| p.2.map(|b| (x_pos(p.0), y_pos(b, ymax))))
            .collect();
        if !bound.is_empty() {
            let _ = writeln!(
                f.out,
                r#"<path class="bound" data-policy="{}" d="{}" stroke="{color}" stroke-dasharray="6 4" fill="none"/>"#,
                escape(policy),
                polyline(bound.into_iter())
            );
        }
        f.legend(i, policy, color);
    }
    Ok(f.finish())
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.enumerate() {
        let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
    }
    d
}

fn error_svg(table: &Table) -> Result<String> {
    // (K, budget) -> policy -> (error, bound)
    let mut groups: BTreeMap<(u64, u64), BTreeMap<String, (f64, Option<f64>)>> = BTreeMap::new();
    let mut policies: Vec<String> = Vec::new();
    for row in &table.rows {
        let k = num(table, row, "K")?.ok_or_else(|| Error::Config("empty K".into()))? as u64;
        let n = num(table, row, "budget")?.ok_or_else(|| Error::Config("empty budget".into()))? as u64;
        let e = num(table, row, "error_prob")?.ok_or_else(|| Error::Config("empty error_prob".into()))?;
        let b = num(table, row, "bound_value")?;
        if !policies.contains(&row[0]) {
            policies.push(row[0].clone());
        }
        groups.entry((k, n)).or_default().insert(row[0].clone(), (e, b));
    }
    let ymax = 1.0;
    let w = WIDTH - LEFT - RIGHT;
    let group_w = w / groups.len() as f64;
    let bar_w = group_w * 0.8 / policies.len() as f64;

    let mut f = Frame::new("Error probability");
    y_ticks(&mut f, ymax);
    for (gi, ((k, n), bars)) in groups.iter().enumerate() {
        let gx = LEFT + group_w * gi as f64 + group_w * 0.1;
        let _ = writeln!(
            f.out,
            r#"<text class="tick" x="{}" y="{}" text-anchor="middle">K={k}, n={n}</text>"#,
            gx + group_w * 0.4,
            HEIGHT - BOTTOM + 18.0
        );
        for (pi, policy) in policies.iter().enumerate() {
            let Some(&(e, b)) = bars.get(policy) else { continue };
            let color = PALETTE[pi % PALETTE.len()];
            let x = gx + bar_w * pi as f64;
            let y = y_pos(e, ymax);
            let _ = writeln!(
                f.out,
                r#"<rect class="bar" data-policy="{}" x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                escape(policy),
                bar_w * 0.95,
                HEIGHT - BOTTOM - y
            );
            if let Some(b) = b {
                let yb = y_pos(b, ymax);
                let _ = writeln!(
                    f.out,
                    r#"<path class="bound" data-policy="{}" d="M{x:.2},{yb:.2} L{:.2},{yb:.2}" stroke="black" stroke-dasharray="4 3" fill="none"/>"#,
                    escape(policy),
                    x + bar_w * 0.95
                );
            }
        }
    }
    for (pi, policy) in policies.iter().enumerate() {
        f.legend(pi, policy, PALETTE[pi % PALETTE.len()]);
    }
    Ok(f.finish())
}

/// Renders `table` as `kind`; the kind must match the table's schema.
pub fn render(table: &Table, kind: PlotKind) -> Result<String> {
    match (kind, table.schema) {
        (PlotKind::Regret, Schema::Regret { .. }) => regret_svg(table),
        (PlotKind::ErrorProb, Schema::ErrorProb) => error_svg(table),
        _ => Err(Error::Config(format!(
            "plot kind {kind:?} does not match the CSV schema"
        ))),
    }
}

pub fn kind_for(schema: Schema) -> PlotKind {
    match schema {
        Schema::Regret { .. } => PlotKind::Regret,
        Schema::ErrorProb => PlotKind::ErrorProb,
    }
}
