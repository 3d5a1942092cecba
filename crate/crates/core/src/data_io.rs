//! CSV ingestion and report / sample serialization.
//!
//! Numbers use `.` as the decimal separator. Anything else (`1,5`,
//! thousands separators, `NaN`, `inf`) is rejected with the offending line
//! and column rather than coerced.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use crate::coefficients::CoefficientsReport;
use crate::error::{Error, Result};
use crate::estimator::DataMatrix;
use crate::sampler::SampleBatch;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    /// A header name. Without a header, or when no header cell matches, a
    /// name consisting of digits is read as a zero-based index.
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    /// Comma-separated list, e.g. `residual sugar,density,alcohol` or `0,2`.
    pub fn parse_list(text: &str) -> Vec<ColumnSelector> {
        text.split(',')
            .map(|t| ColumnSelector::Name(t.trim().to_string()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSpec {
    pub delimiter: u8,
    pub has_header: bool,
    /// Columns in output order; empty selects every column.
    pub selected_columns: Vec<ColumnSelector>,
}

impl Default for CsvSpec {
    fn default() -> Self {
        CsvSpec {
            delimiter: b',',
            has_header: true,
            selected_columns: Vec::new(),
        }
    }
}

impl CsvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.delimiter != b',' && self.delimiter != b';' {
            return Err(Error::Csv(format!(
                "delimiter must be `,` or `;`, got `{}`",
                self.delimiter.escape_ascii()
            )));
        }
        if self.selected_columns.len() == 1 {
            return Err(Error::Csv("select at least 2 columns".into()));
        }
        Ok(())
    }
}

fn resolve_columns(spec: &CsvSpec, header: Option<&[String]>, width: usize) -> Result<Vec<usize>> {
    if spec.selected_columns.is_empty() {
        return Ok((0..width).collect());
    }
    let mut picked = Vec::with_capacity(spec.selected_columns.len());
    for sel in &spec.selected_columns {
        let idx = match sel {
            ColumnSelector::Index(i) => Some(*i),
            ColumnSelector::Name(name) => header
                .and_then(|h| h.iter().position(|c| c == name))
                .or_else(|| name.parse::<usize>().ok()),
        };
        let idx = match idx {
            Some(i) if i < width => i,
            Some(i) => {
                return Err(Error::Csv(format!(
                    "column index {i} is out of range ({width} columns)"
                )))
            }
            None => {
                let name = match sel {
                    ColumnSelector::Name(n) => n.as_str(),
                    ColumnSelector::Index(_) => unreachable!(),
                };
                return Err(Error::Csv(format!("unknown column `{name}`")));
            }
        };
        if picked.contains(&idx) {
            return Err(Error::Csv(format!("column {idx} selected twice")));
        }
        picked.push(idx);
    }
    Ok(picked)
}

fn parse_cell(text: &str, line: usize, column: &str) -> Result<f64> {
    let cell = text.trim();
    let err = |reason: String| Error::Cell {
        row: line,
        column: column.to_string(),
        reason,
    };
    if cell.is_empty() {
        return Err(err("missing value".into()));
    }
    if !cell
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'))
    {
        return Err(err(format!("`{cell}` is not a number")));
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| err(format!("`{cell}` is not a number")))?;
    if !v.is_finite() {
        return Err(err(format!("`{cell}` is not finite")));
    }
    Ok(v)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.display().to_string(),
            source,
        },
        other => Error::Csv(format!("{}: {other:?}", path.display())),
    }
}

pub fn load_csv(path: impl AsRef<Path>, spec: &CsvSpec) -> Result<DataMatrix> {
    let path = path.as_ref();
    spec.validate()?;
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(spec.has_header)
        .flexible(true)
        .from_reader(file);

    let header: Option<Vec<String>> = if spec.has_header {
        let h = reader.headers().map_err(|e| csv_error(path, e))?;
        Some(h.iter().map(|s| s.trim().to_string()).collect())
    } else {
        None
    };

    let mut records = reader.records();
    let mut width = header.as_ref().map(Vec::len);
    let mut pending = None;
    if width.is_none() {
        pending = records.next().transpose().map_err(|e| csv_error(path, e))?;
        width = pending.as_ref().map(|r| r.len());
    }
    let width = width.unwrap_or(0);
    let picked = resolve_columns(spec, header.as_deref(), width)?;
    let labels: Vec<String> = picked
        .iter()
        .map(|&j| match &header {
            Some(h) => h[j].clone(),
            None => format!("X{}", j + 1),
        })
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); picked.len()];
    for record in pending.into_iter().map(Ok).chain(records) {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != width {
            return Err(Error::Csv(format!(
                "{}: line {line} has {} fields, expected {width}",
                path.display(),
                record.len()
            )));
        }
        for (k, &j) in picked.iter().enumerate() {
            columns[k].push(parse_cell(&record[j], line, &labels[k])?);
        }
    }
    DataMatrix::new(labels, columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            _ => Err(Error::param(format!(
                "unknown format `{s}` (json or table)"
            ))),
        }
    }
}

fn fixed3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn label_set(labels: &[String], skip: Option<usize>, only: Option<usize>) -> String {
    let names: Vec<&str> = labels
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != skip && only.is_none_or(|o| o == *k))
        .map(|(_, s)| s.as_str())
        .collect();
    format!("{{{}}}", names.join(", "))
}

fn render_table(report: &CoefficientsReport) -> String {
    let labels: Vec<String> = report
        .labels
        .clone()
        .unwrap_or_else(|| (1..=report.d).map(|k| k.to_string()).collect());
    let rows: Vec<[String; 4]> = (0..report.d)
        .map(|i| {
            [
                label_set(&labels, None, Some(i)),
                label_set(&labels, Some(i), None),
                fixed3(report.components[i]),
                if i == report.d / 2 {
                    fixed3(report.beta)
                } else {
                    String::new()
                },
            ]
        })
        .collect();
    let head = ["{i}", "D\\{i}", "beta_{i,D\\{i}}", "beta"];
    let width = |c: usize| {
        rows.iter()
            .map(|r| r[c].chars().count())
            .chain([head[c].chars().count()])
            .max()
            .unwrap_or(0)
    };
    let w = [width(0), width(1), width(2), width(3)];
    let mut out = String::new();
    let mut line = |cells: [&str; 4]| {
        let _ = writeln!(
            out,
            "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = w[0],
            w1 = w[1],
            w2 = w[2],
            w3 = w[3]
        );
    };
    line(head);
    for r in &rows {
        line([&r[0], &r[1], &r[2], &r[3]]);
    }
    let mut out = out
        .lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n");
    out.push('\n');
    let source = match report.n {
        Some(n) => format!("empirical, n = {n}"),
        None => "exact".into(),
    };
    let _ = writeln!(out, "\nsource: {source}");
    let _ = writeln!(out, "beta*: {}", fixed3(report.beta_star));
    let _ = writeln!(out, "beta': {}", fixed3(report.beta_nelsen));
    let _ = writeln!(
        out,
        "pairwise average: {}",
        fixed3(report.beta_pairwise_avg)
    );
    if let Some(bij) = &report.beta_ij {
        let fmt = |s: &[usize]| {
            let parts: Vec<String> = s.iter().map(usize::to_string).collect();
            format!("{{{}}}", parts.join(","))
        };
        let _ = writeln!(
            out,
            "beta_{}{}: {}",
            fmt(&bij.i),
            fmt(&bij.j),
            fixed3(bij.value)
        );
    }
    if let Some(ci) = &report.ci {
        let _ = writeln!(
            out,
            "bootstrap {:.0}% ({} replicates, seed {}): beta in [{}, {}]",
            ci.level * 100.0,
            ci.replicates,
            ci.seed,
            fixed3(ci.beta.lower),
            fixed3(ci.beta.upper)
        );
        for (i, c) in ci.components.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {}: [{}, {}]",
                label_set(&labels, None, Some(i)),
                fixed3(c.lower),
                fixed3(c.upper)
            );
        }
    }
    out
}

pub fn render_report(report: &CoefficientsReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Table => Ok(render_table(report)),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_report(
    report: &CoefficientsReport,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    write_file(path.as_ref(), &render_report(report, format)?)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<CoefficientsReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Comma-separated with header `u1,..,ud`; values use the shortest
/// representation that reads back to the same `f64`.
pub fn write_batch_csv<W: std::io::Write>(batch: &SampleBatch, out: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    let io = |source| Error::Io {
        path: "<sample>".into(),
        source,
    };
    let header: Vec<String> = (1..=batch.dim).map(|k| format!("u{k}")).collect();
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let mut line = String::new();
    for i in 0..batch.n {
        line.clear();
        for (k, u) in batch.row(i).iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let _ = write!(line, "{u:?}");
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn save_batch_csv(batch: &SampleBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_batch_csv(batch, file).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}
