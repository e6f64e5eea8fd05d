//! Output artifacts: CSV tables, SVG line charts and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ErrorReport;

/// A column-oriented table written as CSV with round-trip float formatting.
pub struct Table {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self {
            header: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.header.push(name.into());
        self.columns.push(values);
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let rows = self.columns.first().map_or(0, Vec::len);
        if let Some(c) = self.columns.iter().find(|c| c.len() != rows) {
            return Err(Error::LengthMismatch {
                expected: rows,
                got: c.len(),
            });
        }
        let mut s = self.header.join(",");
        s.push('\n');
        for i in 0..rows {
            for (j, c) in self.columns.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{:?}", c[i]).unwrap();
            }
            s.push('\n');
        }
        fs::write(path, s)?;
        Ok(())
    }
}

impl Default for Table {
    fn default() -> Self {
        Self::new()
    }
}

pub fn write_errors(path: &Path, rows: &[(String, ErrorReport)]) -> Result<()> {
    let mut s = String::from("family,me,mae,mse\n");
    for (name, r) in rows {
        writeln!(s, "{name},{:?},{:?},{:?}", r.me, r.mae, r.mse).unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn write_timing(path: &Path, rows: &[(String, u32, f64)]) -> Result<()> {
    let mut s = String::from("family,passes,seconds\n");
    for (name, passes, secs) in rows {
        writeln!(s, "{name},{passes},{secs:?}").unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Line chart with one polyline per series, shared x axis.
pub fn svg_plot(xs: &[f64], series: &[(&str, &[f64])]) -> String {
    let (x0, x1) = (
        xs.first().copied().unwrap_or(0.0),
        xs.last().copied().unwrap_or(1.0),
    );
    let all = series.iter().flat_map(|(_, ys)| ys.iter().copied());
    let (mut y0, mut y1) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
        (lo.min(y), hi.max(y))
    });
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let xw = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / xw * (SVG_W - 2.0 * MARGIN);
    let py = |y: f64| SVG_H - MARGIN - (y - y0) / (y1 - y0) * (SVG_H - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN
    )
    .unwrap();
    for (i, (v, anchor)) in [(x0, "start"), (x1, "end")].iter().enumerate() {
        let x = if i == 0 { MARGIN } else { SVG_W - MARGIN };
        writeln!(
            s,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="{anchor}">{v:.3}</text>"#,
            SVG_H - MARGIN + 16.0
        )
        .unwrap();
    }
    for (v, y) in [(y0, SVG_H - MARGIN), (y1, MARGIN)] {
        writeln!(
            s,
            r#"<text x="{}" y="{y}" font-size="12" text-anchor="end">{v:.3}</text>"#,
            MARGIN - 4.0
        )
        .unwrap();
    }
    let stride = (xs.len() / 4000).max(1);
    for (i, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = String::new();
        for j in (0..xs.len().min(ys.len())).step_by(stride) {
            write!(pts, "{:.2},{:.2} ", px(xs[j]), py(ys[j])).unwrap();
        }
        writeln!(
            s,
            r#"<polyline points="{}" stroke="{color}" stroke-width="1" fill="none"/>"#,
            pts.trim_end()
        )
        .unwrap();
        let ly = MARGIN + 16.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{a}" y1="{ly}" x2="{b}" y2="{ly}" stroke="{color}"/><text x="{c}" y="{ty}" font-size="12">{name}</text>"#,
            a = SVG_W - MARGIN - 110.0,
            b = SVG_W - MARGIN - 90.0,
            c = SVG_W - MARGIN - 85.0,
            ty = ly + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Record of one run, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(&path, json + "\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Arguments for re-running the manifest with outputs sent to `out`.
    pub fn replay_args(&self, out: &Path) -> Vec<String> {
        let mut args = Vec::with_capacity(self.argv.len() + 2);
        let mut it = self.argv.iter();
        while let Some(a) = it.next() {
            if a == "--out" {
                it.next();
            } else if !a.starts_with("--out=") {
                args.push(a.clone());
            }
        }
        args.push("--out".into());
        args.push(out.display().to_string());
        args
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_formatting() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        Table::new()
            .column("x", vec![0.0, 0.1])
            .column("y", vec![1.0 / 3.0, 2.5e-20])
            .write(&p)
            .unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "x,y\n0.0,0.3333333333333333\n0.1,2.5e-20\n");
        let bad = Table::new().column("x", vec![0.0]).column("y", vec![]);
        assert!(bad.write(&p).is_err());
    }

    #[test]
    fn replay_args_replace_out() {
        let m = RunManifest {
            tool: "maxmin".into(),
            version: "0".into(),
            command: "approximate".into(),
            argv: ["approximate", "--out", "a", "--n", "5", "--out=b"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            params: serde_json::Value::Null,
            outputs: vec![],
            wall_time_seconds: 0.0,
        };
        assert_eq!(
            m.replay_args(Path::new("z")),
            vec!["approximate", "--n", "5", "--out", "z"]
        );
    }

    #[test]
    fn svg_is_well_formed() {
        let xs = [0.0, 0.5, 1.0];
        let s = svg_plot(&xs, &[("a", &[0.0, 1.0, 0.5]), ("b", &[0.2, 0.2, 0.2])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 2);
    }
}
