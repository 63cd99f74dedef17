//! Table columns, operating characteristics and report files.
//!
//! `table.csv` holds one row per (dimension, Δ, class, method):
//!
//! ```text
//! n,delta,class,method,trials_p50,trials_p100,hyperintervals_p50,hyperintervals_p100,solved
//! 2,1e-4,simple,diag-new,166,403,269,685,100
//! ```
//!
//! `records.json` lists every [`BenchmarkRecord`], and each
//! `oc_n<N>_<class>_<method>.dat` holds the `k P(k)` pairs of one operating
//! characteristic after a `#` header line.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BenchmarkRecord;
use crate::error::{input, Error, Result};
use crate::gkls::CLASS_SIZE;

pub const CSV_HEADER: &str =
    "n,delta,class,method,trials_p50,trials_p100,hyperintervals_p50,hyperintervals_p100,solved";

/// One table cell: a count, or the cap marker `> cap (k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    Value(usize),
    /// Not reached within the cap; `unsolved` is shown in trial columns only.
    Capped { cap: usize, unsolved: Option<usize> },
}

impl Column {
    pub fn value(&self) -> Option<usize> {
        match self {
            Column::Value(v) => Some(*v),
            Column::Capped { .. } => None,
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Value(v) => write!(f, "{v}"),
            Column::Capped { cap, unsolved: Some(k) } => write!(f, "> {cap} ({k})"),
            Column::Capped { cap, unsolved: None } => write!(f, "> {cap}"),
        }
    }
}

/// The 50% and 100% columns of one method on one class. The hyperinterval
/// columns are read from the same runs that set the trial columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PercentileColumns {
    pub trials_p50: Column,
    pub trials_p100: Column,
    pub hyperintervals_p50: Column,
    pub hyperintervals_p100: Column,
    pub solved: usize,
}

pub fn percentile_columns(records: &[BenchmarkRecord]) -> Result<PercentileColumns> {
    if records.len() != CLASS_SIZE {
        return input(format!("percentile columns need exactly {CLASS_SIZE} records, got {}", records.len()));
    }
    let first = &records[0];
    if records.iter().any(|r| r.method != first.method || r.class != first.class || r.cap != first.cap) {
        return input("percentile columns need records of a single method, class and cap");
    }
    let mut order: Vec<&BenchmarkRecord> = records.iter().collect();
    order.sort_by_key(|r| (r.trials_to_hit.unwrap_or(usize::MAX), r.function));
    let solved = records.iter().filter(|r| r.hit).count();
    let unsolved = records.len() - solved;
    let cols = |r: &BenchmarkRecord| match r.trials_to_hit {
        Some(k) => (Column::Value(k), Column::Value(r.hyperintervals)),
        None => (
            Column::Capped { cap: r.cap, unsolved: Some(unsolved) },
            Column::Capped { cap: r.cap, unsolved: None },
        ),
    };
    let (trials_p50, hyperintervals_p50) = cols(order[CLASS_SIZE / 2 - 1]);
    let (trials_p100, hyperintervals_p100) = cols(order[CLASS_SIZE - 1]);
    Ok(PercentileColumns { trials_p50, trials_p100, hyperintervals_p50, hyperintervals_p100, solved })
}

/// Δ in the compact exponent form used by the tables, e.g. `1e-4`.
pub fn format_delta(delta: f64) -> String {
    format!("{delta:e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub delta: f64,
    pub class: String,
    pub method: String,
    pub columns: PercentileColumns,
}

/// Groups `records` by (dimension, Δ, class, method) in order of first
/// appearance and computes each group's columns.
pub fn summarize(records: &[BenchmarkRecord]) -> Result<Vec<SummaryRow>> {
    let mut keys: Vec<(usize, u64, &str, &str)> = Vec::new();
    for r in records {
        let key = (r.n, r.delta.to_bits(), r.class.as_str(), r.method.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(n, delta, class, method)| {
            let group: Vec<BenchmarkRecord> = records
                .iter()
                .filter(|r| r.n == n && r.delta.to_bits() == delta && r.class == class && r.method == method)
                .cloned()
                .collect();
            Ok(SummaryRow {
                n,
                delta: f64::from_bits(delta),
                class: class.to_string(),
                method: method.to_string(),
                columns: percentile_columns(&group)?,
            })
        })
        .collect()
}

pub fn render_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let c = &r.columns;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            format_delta(r.delta),
            r.class,
            r.method,
            c.trials_p50,
            c.trials_p100,
            c.hyperintervals_p50,
            c.hyperintervals_p100,
            c.solved
        ));
    }
    out
}

/// Pairs `(k, P(k))`, where `P(k)` counts the problems solved within `k` trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatingCharacteristic {
    pub method: String,
    pub class: String,
    pub n: usize,
    /// Number of problems `M`.
    pub problems: usize,
    pub points: Vec<(usize, usize)>,
}

impl OperatingCharacteristic {
    /// `P(k)` at an arbitrary `k`, read off the step function.
    pub fn at(&self, k: usize) -> usize {
        self.points.iter().take_while(|(kk, _)| *kk <= k).last().map_or(0, |p| p.1)
    }
}

/// Evaluates `P(k)` on `grid` (sorted and deduplicated first).
pub fn operating_characteristics(records: &[BenchmarkRecord], grid: &[usize]) -> OperatingCharacteristic {
    let mut hits: Vec<usize> = records.iter().filter(|r| r.hit).filter_map(|r| r.trials_to_hit).collect();
    hits.sort_unstable();
    let ks: BTreeSet<usize> = grid.iter().copied().collect();
    let points = ks.into_iter().map(|k| (k, hits.partition_point(|&t| t <= k))).collect();
    let first = records.first();
    OperatingCharacteristic {
        method: first.map_or_else(String::new, |r| r.method.clone()),
        class: first.map_or_else(String::new, |r| r.class.clone()),
        n: first.map_or(0, |r| r.n),
        problems: records.len(),
        points,
    }
}

/// Grid of every trial count at which some method in `records` made a hit,
/// plus zero, so that curves drawn over it show every step.
pub fn step_grid(records: &[BenchmarkRecord]) -> Vec<usize> {
    let ks: BTreeSet<usize> = std::iter::once(0).chain(records.iter().filter_map(|r| r.trials_to_hit)).collect();
    ks.into_iter().collect()
}

pub fn render_plotdata(oc: &OperatingCharacteristic) -> String {
    let mut out = format!("# k P(k) method={} class={} n={} M={}\n", oc.method, oc.class, oc.n, oc.problems);
    for (k, p) in &oc.points {
        out.push_str(&format!("{k} {p}\n"));
    }
    out
}

/// Operating characteristics of every (dimension, class, method) group, each
/// over the step grid of its (dimension, class).
pub fn all_characteristics(records: &[BenchmarkRecord]) -> Vec<OperatingCharacteristic> {
    let mut groups: Vec<(usize, &str, &str)> = Vec::new();
    for r in records {
        let key = (r.n, r.class.as_str(), r.method.as_str());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    groups
        .into_iter()
        .map(|(n, class, method)| {
            let in_class: Vec<BenchmarkRecord> =
                records.iter().filter(|r| r.n == n && r.class == class).cloned().collect();
            let mine: Vec<BenchmarkRecord> = in_class.iter().filter(|r| r.method == method).cloned().collect();
            operating_characteristics(&mine, &step_grid(&in_class))
        })
        .collect()
}

pub fn plotdata_file_name(oc: &OperatingCharacteristic) -> String {
    format!("oc_n{}_{}_{}.dat", oc.n, oc.class, oc.method.replace([':', '/'], "_"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Csv,
    Json,
    Plotdata,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Plotdata];
}

/// Writes the requested report files into `dir`, creating it if needed, and
/// returns their paths.
pub fn emit_report(records: &[BenchmarkRecord], dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return input("no records to report");
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    for format in formats {
        match format {
            ReportFormat::Csv => write("table.csv".into(), render_csv(&summarize(records)?))?,
            ReportFormat::Json => write("records.json".into(), render_json(records)?)?,
            ReportFormat::Plotdata => {
                for oc in all_characteristics(records) {
                    write(plotdata_file_name(&oc), render_plotdata(&oc))?;
                }
            }
        }
    }
    Ok(written)
}

pub fn render_json(records: &[BenchmarkRecord]) -> Result<String> {
    let mut text = serde_json::to_string_pretty(records).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn read_records(json: &str) -> Result<Vec<BenchmarkRecord>> {
    serde_json::from_str(json).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, function: usize, trials: Option<usize>) -> BenchmarkRecord {
        BenchmarkRecord {
            method: method.into(),
            class: "simple".into(),
            n: 2,
            delta: 1e-4,
            function,
            trials_to_hit: trials,
            cap: 1_000_000,
            hyperintervals: trials.map_or(7, |t| 2 * t),
            cells_created: 0,
            trials_used: trials.unwrap_or(1_000_000),
            hit: trials.is_some(),
            error: None,
            wall_time: 0.25,
        }
    }

    fn class_of(method: &str, trials: impl Fn(usize) -> Option<usize>) -> Vec<BenchmarkRecord> {
        (1..=100).map(|i| rec(method, i, trials(i))).collect()
    }

    #[test]
    fn order_statistics() {
        let c = percentile_columns(&class_of("direct", |i| Some(101 - i))).unwrap();
        assert_eq!((c.trials_p50, c.trials_p100), (Column::Value(50), Column::Value(100)));
        assert_eq!((c.hyperintervals_p50, c.hyperintervals_p100), (Column::Value(100), Column::Value(200)));
        assert_eq!(c.solved, 100);
        let flat = percentile_columns(&class_of("direct", |_| Some(17))).unwrap();
        assert_eq!((flat.trials_p50, flat.trials_p100), (Column::Value(17), Column::Value(17)));
    }

    #[test]
    fn cap_marker() {
        let c = percentile_columns(&class_of("direct", |i| (i > 4).then_some(i))).unwrap();
        assert_eq!(c.trials_p100.to_string(), "> 1000000 (4)");
        assert_eq!(c.hyperintervals_p100.to_string(), "> 1000000");
        assert_eq!(c.trials_p50, Column::Value(54));
        assert_eq!(c.solved, 96);
    }

    #[test]
    fn cardinality_and_mixing_are_checked() {
        assert!(percentile_columns(&class_of("direct", Some)[..99]).is_err());
        let mut mixed = class_of("direct", Some);
        mixed[3].method = "diag-new".into();
        assert!(percentile_columns(&mixed).is_err());
    }

    #[test]
    fn operating_characteristic_counts() {
        let rs = vec![rec("m", 1, Some(10)), rec("m", 2, Some(20)), rec("m", 3, Some(30)), rec("m", 4, None)];
        let oc = operating_characteristics(&rs, &[25, 15, 0, 30, 1000]);
        assert_eq!(oc.points, vec![(0, 0), (15, 1), (25, 2), (30, 3), (1000, 3)]);
        assert_eq!(oc.at(29), 2);
        assert_eq!(oc.problems, 4);
        assert_eq!(step_grid(&rs), vec![0, 10, 20, 30]);
    }

    #[test]
    fn csv_row_layout() {
        let rs = class_of("diag-new", |i| Some(i));
        let text = render_csv(&summarize(&rs).unwrap());
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("2,1e-4,simple,diag-new,50,100,100,200,100"));
        assert_eq!(format_delta(1e-7), "1e-7");
    }

    #[test]
    fn json_round_trip_drops_wall_time() {
        let rs = class_of("direct-l", |i| (i % 7 != 0).then_some(i * 3));
        let back = read_records(&render_json(&rs).unwrap()).unwrap();
        let zeroed: Vec<_> = rs.iter().cloned().map(|r| BenchmarkRecord { wall_time: 0.0, ..r }).collect();
        assert_eq!(back, zeroed);
        assert!(!render_json(&rs).unwrap().contains("wall_time"));
    }

    #[test]
    fn emit_writes_all_formats() {
        let dir = tempfile::tempdir().unwrap();
        let mut rs = class_of("direct", |i| Some(i * 2));
        rs.extend(class_of("diag-new", Some));
        let files = emit_report(&rs, dir.path(), &ReportFormat::ALL).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["table.csv", "records.json", "oc_n2_simple_direct.dat", "oc_n2_simple_diag-new.dat"]);
        let dat = fs::read_to_string(dir.path().join("oc_n2_simple_diag-new.dat")).unwrap();
        assert!(dat.starts_with("# k P(k) method=diag-new class=simple n=2 M=100\n0 0\n1 1\n2 2\n"));
        assert!(dat.ends_with("200 100\n"));
        assert!(emit_report(&[], dir.path(), &ReportFormat::ALL).is_err());
        let blocked = dir.path().join("table.csv").join("sub");
        assert!(matches!(emit_report(&rs, &blocked, &ReportFormat::ALL), Err(Error::Io(_))));
    }
}
