//! Matrix I/O and the benchmark harness behind the `slproj` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MatrixN;
use crate::projector::project;
use crate::solver::{Algorithm, SolveOptions};
use crate::testgen::{generate_set, Family, TestSetSpec};

pub const BENCH_HEADER: [&str; 10] = [
    "family",
    "n",
    "matrix_index",
    "algorithm",
    "iterations",
    "status",
    "wall_time_ns",
    "distance",
    "lambda",
    "residual",
];

/// Timed repetitions per (matrix, algorithm); the fastest is reported.
pub const BENCH_REPETITIONS: usize = 3;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ILL_POSED: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::Shape { .. }
        | Error::NonFinite(_)
        | Error::DimensionTooSmall(_)
        | Error::Csv(_) => EXIT_PARSE,
        Error::IllPosed(_) | Error::DegenerateProjection(_) => EXIT_ILL_POSED,
        _ => EXIT_FAILURE,
    }
}

#[derive(Deserialize)]
struct JsonMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Reads `{"n": .., "data": [..]}` (row-major) or a CSV of `n` rows with `n` columns.
pub fn parse_matrix(text: &str) -> Result<MatrixN> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let raw: JsonMatrix = serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
        return MatrixN::new(raw.n, raw.data);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(trimmed.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: '{f}'"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    MatrixN::from_rows(&rows)
}

/// Scientific notation with 17 significant digits; enough to round-trip any double.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON form of a matrix; parses back to the identical bits.
pub fn format_matrix(a: &MatrixN) -> String {
    let data: Vec<String> = a.as_slice().iter().map(|&x| format_number(x)).collect();
    format!("{{\"n\":{},\"data\":[{}]}}", a.n(), data.join(","))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub family: Family,
    pub n: usize,
    pub matrix_index: usize,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub status: String,
    pub wall_time_ns: u64,
    pub distance: f64,
    pub lambda: f64,
    pub residual: f64,
}

impl BenchRecord {
    fn fields(&self) -> [String; 10] {
        [
            self.family.to_string(),
            self.n.to_string(),
            self.matrix_index.to_string(),
            self.algorithm.to_string(),
            self.iterations.to_string(),
            self.status.clone(),
            self.wall_time_ns.to_string(),
            format_number(self.distance),
            format_number(self.lambda),
            format_number(self.residual),
        ]
    }
}

/// Per-(family, n, algorithm) statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchGroup {
    pub family: Family,
    pub n: usize,
    pub algorithm: Algorithm,
    pub count: usize,
    pub failures: usize,
    pub min_iterations: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub min_time_ns: u64,
    pub mean_time_ns: f64,
    pub max_time_ns: u64,
}

fn bench_one(family: Family, n: usize, index: usize, a: &MatrixN, alg: Algorithm) -> Result<BenchRecord> {
    let opts = SolveOptions::default();
    let mut best = u64::MAX;
    let mut result = None;
    for _ in 0..BENCH_REPETITIONS {
        let start = Instant::now();
        let r = project(a, Some(alg), &opts)?;
        best = best.min(start.elapsed().as_nanos() as u64);
        result = Some(r);
    }
    let r = result.expect("at least one repetition");
    Ok(BenchRecord {
        family,
        n,
        matrix_index: index,
        algorithm: alg,
        iterations: r.report.iterations,
        status: r.report.status.to_string(),
        wall_time_ns: best,
        distance: r.distance,
        lambda: r.lambda,
        residual: r.report.residual,
    })
}

/// Runs every algorithm on every matrix of every test set.
///
/// Matrices are generated sequentially per set and solved in parallel;
/// records are returned sorted by (family, n, matrix index, algorithm).
pub fn bench_records(specs: &[TestSetSpec], algorithms: &[Algorithm]) -> Result<Vec<BenchRecord>> {
    let mut jobs = Vec::new();
    for spec in specs {
        for (index, a) in generate_set(spec)?.into_iter().enumerate() {
            for &alg in algorithms {
                jobs.push((spec.family, spec.n, index, a.clone(), alg));
            }
        }
    }
    let mut records = jobs
        .par_iter()
        .map(|(family, n, index, a, alg)| bench_one(*family, *n, *index, a, *alg))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|x, y| {
        (x.family, x.n, x.matrix_index, x.algorithm).cmp(&(y.family, y.n, y.matrix_index, y.algorithm))
    });
    Ok(records)
}

pub fn summarize(records: &[BenchRecord]) -> Vec<BenchGroup> {
    let mut groups: BTreeMap<(Family, usize, Algorithm), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.family, r.n, r.algorithm)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((family, n, algorithm), rs)| {
            let count = rs.len();
            let iters: Vec<usize> = rs.iter().map(|r| r.iterations).collect();
            let times: Vec<u64> = rs.iter().map(|r| r.wall_time_ns).collect();
            BenchGroup {
                family,
                n,
                algorithm,
                count,
                failures: rs.iter().filter(|r| r.status != "converged").count(),
                min_iterations: iters.iter().copied().min().unwrap_or(0),
                mean_iterations: iters.iter().sum::<usize>() as f64 / count as f64,
                max_iterations: iters.iter().copied().max().unwrap_or(0),
                min_time_ns: times.iter().copied().min().unwrap_or(0),
                mean_time_ns: times.iter().sum::<u64>() as f64 / count as f64,
                max_time_ns: times.iter().copied().max().unwrap_or(0),
            }
        })
        .collect()
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(BENCH_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// `<dir>/<stem>_summary.csv` for a record file `<dir>/<stem>.<ext>`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    out.with_file_name(format!("{stem}_summary.csv"))
}

pub fn write_summary(path: &Path, groups: &[BenchGroup]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "family",
        "n",
        "algorithm",
        "count",
        "failures",
        "min_iterations",
        "mean_iterations",
        "max_iterations",
        "min_time_ns",
        "mean_time_ns",
        "max_time_ns",
    ])?;
    for g in groups {
        w.write_record([
            g.family.to_string(),
            g.n.to_string(),
            g.algorithm.to_string(),
            g.count.to_string(),
            g.failures.to_string(),
            g.min_iterations.to_string(),
            format_number(g.mean_iterations),
            g.max_iterations.to_string(),
            g.min_time_ns.to_string(),
            format_number(g.mean_time_ns),
            g.max_time_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the benchmark, writes the record CSV to `out` and the summary next to it.
pub fn run_bench(specs: &[TestSetSpec], algorithms: &[Algorithm], out: &Path) -> Result<Vec<BenchRecord>> {
    let records = bench_records(specs, algorithms)?;
    write_records(out, &records)?;
    write_summary(&summary_path(out), &summarize(&records))?;
    Ok(records)
}

/// One test set per (family, n) pair, families outermost.
pub fn bench_specs(sizes: &[usize], count: usize, seed: u64, families: &[Family]) -> Vec<TestSetSpec> {
    families
        .iter()
        .flat_map(|&f| sizes.iter().map(move |&n| TestSetSpec::new(n, count, seed, f)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let a = parse_matrix(r#"{"n":2,"data":[2.35,0,0,1.9]}"#).unwrap();
        assert_eq!(a, MatrixN::from_diag(&[2.35, 1.9]).unwrap());
        assert_eq!(parse_matrix("1,0\n0,1").unwrap(), MatrixN::identity(2));
        assert!(matches!(parse_matrix(r#"{"n":2,"data":[1,2,3]}"#), Err(Error::Shape { .. })));
        assert!(matches!(parse_matrix("1,0\n0"), Err(Error::Shape { .. })));
        assert!(matches!(parse_matrix("1,x\n0,1"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("1,inf\n0,1"), Err(Error::NonFinite(1))));
        assert!(matches!(parse_matrix("{\"n\":2"), Err(Error::Parse(_))));
    }

    #[test]
    fn format_round_trips() {
        let a = MatrixN::new(2, vec![0.1, -1.0 / 3.0, 5e-324, 1.7976931348623157e308]).unwrap();
        let back = parse_matrix(&format_matrix(&a)).unwrap();
        for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_PARSE);
        assert_eq!(
            exit_code(&Error::IllPosed(crate::error::IllPosedReason::TraceZero)),
            EXIT_ILL_POSED
        );
        assert_eq!(exit_code(&Error::SingularInput), EXIT_FAILURE);
    }

    #[test]
    fn small_bench_is_complete_and_sorted() {
        let specs = bench_specs(&[2, 3], 2, 42, &Family::ALL);
        let records = bench_records(&specs, &Algorithm::ALL).unwrap();
        assert_eq!(records.len(), 4 * 2 * 2 * 4);
        let keys: Vec<_> = records.iter().map(|r| (r.family, r.n, r.matrix_index, r.algorithm)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        assert_eq!(summarize(&records).len(), 4 * 2 * 4);
    }
}
