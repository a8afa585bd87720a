//! CSV ingestion and label files.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::metrics::Point;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
}

/// Which column holds ground-truth labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    First,
    Last,
    /// Zero-based column index.
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "first" => Ok(LabelColumn::First),
            "last" => Ok(LabelColumn::Last),
            other => other.parse().map(LabelColumn::Index).map_err(|_| {
                format!("expected 'first', 'last' or a zero-based index, got '{other}'")
            }),
        }
    }
}

impl LabelColumn {
    fn resolve(self, columns: usize) -> Option<usize> {
        match self {
            LabelColumn::First => Some(0),
            LabelColumn::Last => columns.checked_sub(1),
            LabelColumn::Index(i) if i < columns => Some(i),
            LabelColumn::Index(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub truth: Option<Vec<i64>>,
}

fn parse_label(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    let v: f64 = cell.parse().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}

/// Reads a comma-separated numeric table, optionally splitting off a label
/// column. Row order is preserved. Blank lines are skipped.
pub fn load_dataset(
    path: &Path,
    has_header: bool,
    label_column: Option<LabelColumn>,
) -> Result<Dataset, DatasetError> {
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut points = Vec::new();
    let mut truth = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_at: Option<usize> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DatasetError::Parse {
                path: shown.clone(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parse_err = |message: String| DatasetError::Parse {
            path: shown.clone(),
            line,
            message,
        };
        match width {
            None => {
                width = Some(record.len());
                if let Some(spec) = label_column {
                    let idx = spec.resolve(record.len()).ok_or_else(|| {
                        parse_err(format!(
                            "label column {spec:?} does not exist in {} columns",
                            record.len()
                        ))
                    })?;
                    if record.len() < 2 {
                        return Err(parse_err(
                            "a labelled row needs at least one feature column".into(),
                        ));
                    }
                    label_at = Some(idx);
                }
            }
            Some(w) if w != record.len() => {
                return Err(parse_err(format!(
                    "expected {w} columns, found {}",
                    record.len()
                )));
            }
            Some(_) => {}
        }
        let mut features = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_at {
                let label = parse_label(cell).ok_or_else(|| {
                    parse_err(format!("column {col}: label '{cell}' is not an integer"))
                })?;
                truth.push(label);
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("column {col}: '{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("column {col}: '{cell}' is not finite")));
            }
            features.push(v);
        }
        points.push(Point::new(features).map_err(|e| parse_err(e.to_string()))?);
    }
    if points.is_empty() {
        return Err(DatasetError::Shape {
            path: shown,
            message: "no data rows".into(),
        });
    }
    Ok(Dataset {
        points,
        truth: label_column.map(|_| truth),
    })
}

/// Reads one integer label per line; blank lines are ignored.
pub fn read_labels(path: &Path) -> Result<Vec<i64>, DatasetError> {
    let shown = path.display().to_string();
    let io_err = |source| DatasetError::Io {
        path: shown.clone(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        let label = parse_label(cell).ok_or_else(|| DatasetError::Parse {
            path: shown.clone(),
            line: i as u64 + 1,
            message: format!("'{cell}' is not an integer label"),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_table() {
        let f = file("1,2\n3,4\n5,6\n7,8\n");
        let d = load_dataset(f.path(), false, None).unwrap();
        assert_eq!(d.points.len(), 4);
        assert!(d.points.iter().all(|p| p.dimension() == 2));
        assert_eq!(d.points[3].features(), &[7.0, 8.0]);
        assert!(d.truth.is_none());
    }

    #[test]
    fn header_and_last_label() {
        let f = file("x,y,class\n1,2,0\n3,4,1\n5,6,1.0\n");
        let d = load_dataset(f.path(), true, Some(LabelColumn::Last)).unwrap();
        assert_eq!(d.points[0].features(), &[1.0, 2.0]);
        assert_eq!(d.truth, Some(vec![0, 1, 1]));
        let d = load_dataset(f.path(), true, Some(LabelColumn::Index(0))).unwrap();
        assert_eq!(d.points[0].features(), &[2.0, 0.0]);
        assert_eq!(d.truth, Some(vec![1, 3, 5]));
    }

    #[test]
    fn bad_cell_names_its_line() {
        let f = file("1,2\n1,2\n1,2\n1,2\n1,2\n1,2\n1,abc\n1,2\n");
        let err = load_dataset(f.path(), false, None).unwrap_err();
        assert!(err.to_string().contains(":7:"), "{err}");
    }

    #[test]
    fn ragged_rows_rejected() {
        let f = file("1,2\n3\n");
        let err = load_dataset(f.path(), false, None).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
        let f = file("1,2,0.5\n");
        assert!(load_dataset(f.path(), false, Some(LabelColumn::Last)).is_err());
        let f = file("1,inf\n");
        assert!(load_dataset(f.path(), false, None).is_err());
    }

    #[test]
    fn missing_file() {
        let err = load_dataset(Path::new("/nonexistent/data.csv"), false, None).unwrap_err();
        assert!(matches!(err, DatasetError::Io { .. }));
    }

    #[test]
    fn label_files() {
        let f = file("0\n-1\n\n2\n");
        assert_eq!(read_labels(f.path()).unwrap(), vec![0, -1, 2]);
        let f = file("0\nx\n");
        assert!(read_labels(f.path())
            .unwrap_err()
            .to_string()
            .contains(":2:"));
    }
}
