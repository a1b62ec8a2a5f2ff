//! Per-run CSV output.
//!
//! Floats are written with six decimals. A run that exceeded its time budget
//! has `DNF` in the accuracy column.

use std::io::{Read, Write};
use std::path::Path;

use enrs_core::SearchStats;
use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::experiment::RunReport;
use crate::BenchError;

pub const HEADER: &str =
    "dataset,algorithm,run,seed,accuracy,train_seconds,candidates_visited,candidates_evaluated,candidates_pruned";

const DNF: &str = "DNF";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    dataset: String,
    algorithm: String,
    run: usize,
    seed: u64,
    accuracy: String,
    train_seconds: String,
    candidates_visited: u64,
    candidates_evaluated: u64,
    candidates_pruned: u64,
}

/// A CSV row read back. Accuracy is `None` for DNF runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub train_seconds: f64,
    pub stats: SearchStats,
}

pub fn write_csv<W: Write>(out: W, reports: &[RunReport]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in reports {
        w.serialize(Row {
            dataset: r.dataset.clone(),
            algorithm: r.algorithm.to_string(),
            run: r.run,
            seed: r.seed,
            accuracy: r.accuracy.map_or_else(|| DNF.to_string(), |a| format!("{a:.6}")),
            train_seconds: format!("{:.6}", r.train_seconds),
            candidates_visited: r.stats.candidates_visited,
            candidates_evaluated: r.stats.candidates_evaluated,
            candidates_pruned: r.stats.candidates_pruned,
        })?;
    }
    if reports.is_empty() {
        w.write_record(HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv_file(path: &Path, reports: &[RunReport]) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(std::io::BufWriter::new(file), reports)
}

fn parse_float(field: &str, value: &str) -> Result<f64, BenchError> {
    value
        .parse()
        .map_err(|_| BenchError::Csv(format!("bad {field} value {value:?}")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != HEADER {
        return Err(BenchError::Csv(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.deserialize::<Row>() {
        let row = row?;
        out.push(CsvRecord {
            dataset: row.dataset,
            algorithm: row.algorithm.parse()?,
            run: row.run,
            seed: row.seed,
            accuracy: if row.accuracy == DNF {
                None
            } else {
                Some(parse_float("accuracy", &row.accuracy)?)
            },
            train_seconds: parse_float("train_seconds", &row.train_seconds)?,
            stats: SearchStats {
                candidates_visited: row.candidates_visited,
                candidates_evaluated: row.candidates_evaluated,
                candidates_pruned: row.candidates_pruned,
                distance_early_abandons: 0,
            },
        });
    }
    Ok(out)
}
