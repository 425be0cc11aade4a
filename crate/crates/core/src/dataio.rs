//! Edge-list loading, user sampling, and report serialization.
//!
//! The input format is deliberately dumb: one `(user id, item id)` pair per
//! line in a delimited text file, the common denominator of public rating
//! and tagging dumps. Reports leave as CSV (plot-ready, fixed six-decimal
//! reals) or JSON (lossless, embeds the full resolved config and round-trips
//! back into the report types).

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiment::{CurveReport, MetricsReport};
use crate::graph::{BipartiteGraph, BuildSummary};
use crate::rng;

/// Shape of a delimited edge-list file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeListFormat {
    pub delimiter: char,
    /// Zero-based column of the user id.
    pub user_column: usize,
    /// Zero-based column of the item id.
    pub item_column: usize,
    /// Lines to skip unconditionally at the top of the file.
    pub header_lines: usize,
    /// Lines starting with this character are skipped anywhere in the file.
    pub comment_prefix: Option<char>,
}

impl Default for EdgeListFormat {
    fn default() -> Self {
        EdgeListFormat {
            delimiter: '\t',
            user_column: 0,
            item_column: 1,
            header_lines: 0,
            comment_prefix: Some('#'),
        }
    }
}

impl EdgeListFormat {
    pub fn validate(&self) -> Result<()> {
        if self.user_column == self.item_column {
            return Err(Error::invalid(
                "user and item columns must differ".to_string(),
            ));
        }
        Ok(())
    }
}

/// What loading skipped on the way to the pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadSummary {
    pub pairs: usize,
    pub comment_lines: usize,
    pub blank_lines: usize,
}

/// Read raw `(user, item)` pairs. Duplicates are preserved here — graph
/// construction collapses and counts them. Any line that should carry data
/// but doesn't parse is an error naming the 1-based line number.
pub fn load_edge_list(
    path: impl AsRef<Path>,
    format: &EdgeListFormat,
) -> Result<(Vec<(u64, u64)>, LoadSummary)> {
    format.validate()?;
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut pairs = Vec::new();
    let mut summary = LoadSummary::default();
    let needed = format.user_column.max(format.item_column) + 1;

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if lineno <= format.header_lines {
            continue;
        }
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            summary.blank_lines += 1;
            continue;
        }
        if let Some(prefix) = format.comment_prefix {
            if line.starts_with(prefix) {
                summary.comment_lines += 1;
                continue;
            }
        }
        let fields: Vec<&str> = line.split(format.delimiter).collect();
        if fields.len() < needed {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                reason: format!("expected at least {needed} fields, found {}", fields.len()),
            });
        }
        let parse = |column: usize, what: &str| -> Result<u64> {
            fields[column]
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    reason: format!("invalid {what} id {:?}", fields[column]),
                })
        };
        pairs.push((
            parse(format.user_column, "user")?,
            parse(format.item_column, "item")?,
        ));
        summary.pairs += 1;
    }
    Ok((pairs, summary))
}

/// Load a file straight into a graph, keeping all the diagnostics.
pub fn load_graph(
    path: impl AsRef<Path>,
    format: &EdgeListFormat,
) -> Result<(BipartiteGraph, LoadSummary, BuildSummary)> {
    let (pairs, load) = load_edge_list(path, format)?;
    let (graph, build) = BipartiteGraph::from_edges(&pairs);
    Ok((graph, load, build))
}

/// Write a graph back out as a delimited edge list in canonical order.
pub fn write_edge_list(g: &BipartiteGraph, path: impl AsRef<Path>, delimiter: char) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (user, item) in g.edge_list() {
        use std::fmt::Write;
        writeln!(out, "{user}{delimiter}{item}").expect("write to string");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SampleMethod {
    /// Breadth-first expansion along shared items from seeded random starts:
    /// keeps the sample on a connected, realistically clustered region.
    #[default]
    Snowball,
    /// Uniform draw of users without replacement.
    Uniform,
}

impl fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMethod::Snowball => "snowball",
            SampleMethod::Uniform => "uniform",
        })
    }
}

impl FromStr for SampleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<SampleMethod> {
        match s.to_ascii_lowercase().as_str() {
            "snowball" => Ok(SampleMethod::Snowball),
            "uniform" => Ok(SampleMethod::Uniform),
            other => Err(Error::invalid(format!(
                "unknown sample method {other:?} (expected snowball or uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub max_users: usize,
    pub method: SampleMethod,
    pub seed: u64,
}

/// Cut a dataset down to at most `max_users` users; retained users keep their
/// complete item lists, and items nobody retained holds are dropped. A budget
/// covering the whole graph returns it unchanged. For a fixed seed the
/// retained user set grows monotonically with the budget.
pub fn sample_users(g: &BipartiteGraph, spec: &SampleSpec) -> Result<BipartiteGraph> {
    if spec.max_users == 0 {
        return Err(Error::invalid("max_users must be at least 1"));
    }
    if spec.max_users >= g.n_users() {
        return Ok(g.clone());
    }
    let order = match spec.method {
        SampleMethod::Snowball => snowball_order(g, spec.seed, spec.max_users),
        SampleMethod::Uniform => {
            let mut users: Vec<u32> = (0..g.n_users() as u32).collect();
            let mut rng = rng::seeded(spec.seed);
            rng::partial_shuffle(&mut rng, &mut users, spec.max_users);
            users.truncate(spec.max_users);
            users
        }
    };
    Ok(g.induced_by_users(&order))
}

/// Users in breadth-first discovery order over the shared-item relation,
/// starting from a seeded random permutation of components' entry points,
/// truncated to `budget`. The discovery order does not depend on the budget,
/// which is what makes sampled user sets nest as the budget grows.
fn snowball_order(g: &BipartiteGraph, seed: u64, budget: usize) -> Vec<u32> {
    let n = g.n_users();
    let mut preference: Vec<u32> = (0..n as u32).collect();
    let mut rng = rng::seeded(seed);
    rng::shuffle(&mut rng, &mut preference);

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(budget.min(n));
    let mut queue = std::collections::VecDeque::new();
    for &start in &preference {
        if order.len() >= budget {
            break;
        }
        if visited[start as usize] {
            continue;
        }
        visited[start as usize] = true;
        order.push(start);
        if order.len() >= budget {
            return order;
        }
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &i in g.items_of(u) {
                for &v in g.users_of(i) {
                    if !visited[v as usize] {
                        visited[v as usize] = true;
                        order.push(v);
                        if order.len() >= budget {
                            return order;
                        }
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!(
                "unknown report format {other:?} (expected csv or json)"
            ))),
        }
    }
}

/// Personalization report as CSV: `algorithm,V,O` with six-decimal reals.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("algorithm,V,O\n");
    for row in &report.rows {
        use std::fmt::Write;
        writeln!(
            out,
            "{},{:.6},{:.6}",
            row.algorithm, row.scores.v, row.scores.o
        )
        .expect("write to string");
    }
    out
}

/// Link-prediction curves as CSV: `algorithm,L,R,P,N` rows followed by a
/// `p_bar_tu` reference row carrying the unsplit graph's mean user-level item
/// popularity in the `N` column.
pub fn curves_csv(report: &CurveReport) -> String {
    let mut out = String::from("algorithm,L,R,P,N\n");
    use std::fmt::Write;
    for curve in &report.curves {
        for p in &curve.points {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                curve.algorithm, p.l, p.recall, p.precision, p.novelty
            )
            .expect("write to string");
        }
    }
    writeln!(out, "p_bar_tu,,,,{:.6}", report.mean_user_tag_popularity).expect("write to string");
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn json_text<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_metrics_report(
    report: &MetricsReport,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => metrics_csv(report),
        ReportFormat::Json => json_text(report),
    };
    write_text(path.as_ref(), &text)
}

pub fn write_curve_report(
    report: &CurveReport,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => curves_csv(report),
        ReportFormat::Json => json_text(report),
    };
    write_text(path.as_ref(), &text)
}

pub fn read_metrics_report_json(path: impl AsRef<Path>) -> Result<MetricsReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })
}

pub fn read_curve_report_json(path: impl AsRef<Path>) -> Result<CurveReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })
}
