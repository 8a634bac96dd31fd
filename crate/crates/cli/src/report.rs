//! Comparison tables over pattern sets.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::CliError;
use crate::document::SetStatsDoc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Md,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" => Ok(Format::Md),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv, md or json)")),
        }
    }
}

/// Metric columns in report order: name and whether larger is better.
pub const METRICS: [(&str, bool); 9] = [
    ("size", false),
    ("length", false),
    ("coverage", true),
    ("wracc", true),
    ("confidence", true),
    ("accuracy", true),
    ("info_gained", true),
    ("odd-range", true),
    ("p-value", false),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub stats: SetStatsDoc,
}

impl ReportRow {
    fn values(&self) -> [Option<f64>; 9] {
        let s = &self.stats;
        [
            Some(s.size as f64),
            s.length,
            s.coverage,
            s.wracc,
            s.confidence,
            s.accuracy,
            s.info_gained,
            s.odd_range,
            s.p_value,
        ]
    }
}

/// `1.93E-13` below 1e-3, plain otherwise.
pub fn format_p(p: f64) -> String {
    if p != 0.0 && p < 1e-3 {
        format!("{p:.2E}")
    } else {
        format!("{p}")
    }
}

fn cell(metric: usize, value: Option<f64>, digits: Option<usize>) -> String {
    match (value, metric) {
        (None, _) => String::new(),
        (Some(v), 0) => format!("{}", v as usize),
        (Some(v), 8) => match digits {
            Some(d) if v >= 1e-3 => format!("{v:.d$}"),
            _ => format_p(v),
        },
        (Some(v), _) => match digits {
            Some(d) => format!("{v:.d$}"),
            None => format!("{v}"),
        },
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("pattern_set");
    for (name, _) in METRICS {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&csv_field(&row.name));
        for (i, v) in row.values().into_iter().enumerate() {
            out.push(',');
            out.push_str(&cell(i, v, None));
        }
        out.push('\n');
    }
    out
}

/// Per row, the metrics on which it is strictly the best and the worst of the
/// compared sets. Empty with fewer than two sets.
pub fn annotations(rows: &[ReportRow]) -> Vec<String> {
    let mut best: Vec<Vec<&str>> = vec![Vec::new(); rows.len()];
    let mut worst: Vec<Vec<&str>> = vec![Vec::new(); rows.len()];
    if rows.len() >= 2 {
        let values: Vec<[Option<f64>; 9]> = rows.iter().map(ReportRow::values).collect();
        for (m, (name, higher)) in METRICS.iter().enumerate() {
            let present: Vec<(usize, f64)> = values.iter().enumerate().filter_map(|(r, v)| v[m].map(|x| (r, x))).collect();
            if present.len() < 2 {
                continue;
            }
            let key = |x: f64| if *higher { x } else { -x };
            let top = present.iter().map(|&(_, x)| key(x)).fold(f64::NEG_INFINITY, f64::max);
            let bottom = present.iter().map(|&(_, x)| key(x)).fold(f64::INFINITY, f64::min);
            if top == bottom {
                continue;
            }
            for &(r, x) in &present {
                if key(x) == top {
                    best[r].push(name);
                } else if key(x) == bottom {
                    worst[r].push(name);
                }
            }
        }
    }
    best.into_iter()
        .zip(worst)
        .map(|(b, w)| {
            let mut parts = Vec::new();
            if !b.is_empty() {
                parts.push(format!("best: {}", b.join(", ")));
            }
            if !w.is_empty() {
                parts.push(format!("worst: {}", w.join(", ")));
            }
            parts.join("; ")
        })
        .collect()
}

pub fn render_md(rows: &[ReportRow]) -> String {
    let mut out = String::from("| pattern set |");
    for (name, _) in METRICS {
        let _ = write!(out, " {name} |");
    }
    out.push_str(" notes |\n|---|");
    out.push_str(&"---:|".repeat(METRICS.len()));
    out.push_str("---|\n");
    for (row, note) in rows.iter().zip(annotations(rows)) {
        let _ = write!(out, "| {} |", row.name.replace('|', "\\|"));
        for (i, v) in row.values().into_iter().enumerate() {
            let text = cell(i, v, Some(3));
            let _ = write!(out, " {} |", if text.is_empty() { "-" } else { &text });
        }
        let _ = writeln!(out, " {note} |");
    }
    out
}

pub fn render_json(rows: &[ReportRow]) -> Result<String, CliError> {
    let value = serde_json::to_value(rows).map_err(|e| CliError::data(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).expect("values serialize");
    text.push('\n');
    Ok(text)
}

pub fn render(rows: &[ReportRow], format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => render_csv(rows),
        Format::Md => render_md(rows),
        Format::Json => render_json(rows)?,
    })
}
