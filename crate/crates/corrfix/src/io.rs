//! CSV formats: time-series panels and square matrices.
//!
//! Panel files have a date column first and one column per instrument; an
//! empty cell is a missing observation. Matrix files are square numeric
//! grids with an optional header row and/or label column. An empty cell in a
//! matrix is filled from its mirror image, so upper-triangle-only files load.

use std::fs;
use std::io::Write;
use std::path::Path;

use corrfix_core::{Matrix, SymmetricMatrix, TimeSeriesPanel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}, column '{column}': cannot parse '{cell}' as a number")]
    BadNumber { line: usize, column: String, cell: String },
    #[error("panel has {0} data rows, at least 2 required")]
    TooFewRows(usize),
    #[error("panel header needs a date column and at least one instrument")]
    BadHeader,
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix cell ({row}, {col}) and its mirror are both empty")]
    EmptyCell { row: usize, col: usize },
    #[error("precision must be in 1..=17, got {0}")]
    BadPrecision(usize),
    #[error(transparent)]
    Core(#[from] corrfix_core::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn reader(text: &str, has_headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

/// Parses a panel CSV (dates in rows, instruments in columns).
pub fn parse_panel(text: &str) -> Result<TimeSeriesPanel> {
    let mut rdr = reader(text, true);
    let header = rdr.headers()?.clone();
    if header.len() < 2 {
        return Err(FormatError::BadHeader);
    }
    let instruments: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut dates = Vec::new();
    let mut values: Vec<Vec<Option<f64>>> = vec![Vec::new(); instruments.len()];

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(FormatError::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        dates.push(record[0].to_string());
        for (k, cell) in record.iter().skip(1).enumerate() {
            let value = if cell.is_empty() {
                None
            } else {
                Some(parse_number(cell).ok_or_else(|| FormatError::BadNumber {
                    line,
                    column: instruments[k].clone(),
                    cell: cell.to_string(),
                })?)
            };
            values[k].push(value);
        }
    }
    if dates.len() < 2 {
        return Err(FormatError::TooFewRows(dates.len()));
    }
    Ok(TimeSeriesPanel::new(instruments, dates, values)?)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn is_label(cell: &str) -> bool {
    !cell.is_empty() && parse_number(cell).is_none()
}

/// A square grid as read from disk, before any symmetry handling.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub grid: Matrix,
    pub labels: Option<Vec<String>>,
}

impl MatrixFile {
    /// Applies the ingestion rule: symmetrize within tolerance, else fail.
    pub fn into_symmetric(self) -> Result<SymmetricMatrix> {
        Ok(SymmetricMatrix::from_matrix(self.grid)?)
    }
}

/// Reads a square grid with optional header row and label column.
///
/// A header row is present when the first cell of the file is not a number
/// (an empty corner cell counts); a label column is present when the first
/// cell of the first data row is a non-numeric label.
pub fn read_grid(text: &str) -> Result<MatrixFile> {
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for record in reader(text, false).records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(FormatError::NotSquare { rows: 0, cols: 0 });
    }

    let header = if parse_number(&rows[0].1[0]).is_none() {
        Some(rows.remove(0).1)
    } else {
        None
    };
    let has_row_labels = rows.first().is_some_and(|(_, r)| is_label(&r[0]));

    let n = rows.len();
    let mut row_labels = Vec::new();
    let mut cells: Vec<Option<f64>> = Vec::with_capacity(n * n);
    let col_names: Vec<String> = match &header {
        Some(h) if has_row_labels => h.iter().skip(1).cloned().collect(),
        Some(h) => h.clone(),
        None => (1..=n).map(|c| c.to_string()).collect(),
    };
    for (line, mut row) in rows {
        if has_row_labels {
            row_labels.push(row.remove(0));
        }
        if row.len() != n {
            return Err(FormatError::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
        for (k, cell) in row.iter().enumerate() {
            if cell.is_empty() {
                cells.push(None);
            } else {
                let v = parse_number(cell).ok_or_else(|| FormatError::BadNumber {
                    line,
                    column: col_names.get(k).cloned().unwrap_or_else(|| (k + 1).to_string()),
                    cell: cell.clone(),
                })?;
                cells.push(Some(v));
            }
        }
    }

    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = cells[i * n + j]
                .or(cells[j * n + i])
                .ok_or(FormatError::EmptyCell { row: i + 1, col: j + 1 })?;
            data.push(v);
        }
    }
    let labels = match header {
        Some(_) if col_names.len() == n => Some(col_names),
        _ if has_row_labels => Some(row_labels),
        _ => None,
    };
    Ok(MatrixFile {
        grid: Matrix::from_row_major(n, data)?,
        labels,
    })
}

pub fn read_matrix(text: &str) -> Result<SymmetricMatrix> {
    read_grid(text)?.into_symmetric()
}

/// Fixed-precision, row-major CSV. With `labels`, adds a header row and a
/// label column.
pub fn write_matrix(a: &SymmetricMatrix, precision: usize, labels: Option<&[String]>) -> Result<String> {
    if !(1..=17).contains(&precision) {
        return Err(FormatError::BadPrecision(precision));
    }
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if let Some(labels) = labels {
        let mut head = vec![String::new()];
        head.extend(labels.iter().cloned());
        wtr.write_record(&head)?;
    }
    for i in 0..a.dim() {
        let mut record: Vec<String> = Vec::with_capacity(a.dim() + 1);
        if let Some(labels) = labels {
            record.push(labels[i].clone());
        }
        record.extend(a.row(i).iter().map(|x| format_fixed(*x, precision)));
        wtr.write_record(&record)?;
    }
    let bytes = wtr.into_inner().map_err(|e| FormatError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `{:.p}` without the sign on values that round to zero.
pub fn format_fixed(x: f64, precision: usize) -> String {
    let s = format!("{x:.precision$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| FormatError::Io(e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_column_panel() {
        let p = parse_panel("date,x\n1,1.0\n2,2.0\n3,2.5\n").unwrap();
        assert_eq!(p.instruments(), &["x".to_string()]);
        assert_eq!(p.dates().len(), 3);
    }

    #[test]
    fn empty_cell_is_missing() {
        let p = parse_panel("date,a,b\nd1,1,2\nd2,,3\nd3,4,5\n").unwrap();
        assert_eq!(p.missing_count(), 1);
        assert_eq!(p.series(0)[1], None);
        assert_eq!(p.series(1)[1], Some(3.0));
    }

    #[test]
    fn panel_errors_name_position() {
        let err = parse_panel("date,a,b\nd1,1,2\nd2,oops,3\n").unwrap_err();
        match err {
            FormatError::BadNumber { line, column, cell } => {
                assert_eq!((line, column.as_str(), cell.as_str()), (3, "a", "oops"));
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(parse_panel("date,a\nd1,1\n"), Err(FormatError::TooFewRows(1))));
        assert!(matches!(
            parse_panel("date,a,a\nd1,1,2\nd2,2,3\n"),
            Err(FormatError::Core(_))
        ));
        assert!(matches!(parse_panel("date,a\nd1,1\nd1,2\n"), Err(FormatError::Core(_))));
        assert!(matches!(parse_panel("date\nd1\nd2\n"), Err(FormatError::BadHeader)));
    }

    #[test]
    fn write_identity_fixed_precision() {
        let i2 = SymmetricMatrix::identity(2).unwrap();
        assert_eq!(write_matrix(&i2, 3, None).unwrap(), "1.000,0.000\n0.000,1.000\n");
        assert!(matches!(write_matrix(&i2, 0, None), Err(FormatError::BadPrecision(0))));
        assert!(matches!(
            write_matrix(&i2, 18, None),
            Err(FormatError::BadPrecision(18))
        ));
    }

    #[test]
    fn negative_zero_is_unsigned() {
        assert_eq!(format_fixed(-1e-17, 3), "0.000");
        assert_eq!(format_fixed(-0.0005, 3), "-0.001");
        assert_eq!(format_fixed(-0.25, 2), "-0.25");
    }

    #[test]
    fn labeled_round_trip() {
        let labels = vec!["a".to_string(), "b, c".to_string()];
        let m = SymmetricMatrix::from_row_major(2, vec![1.0, 0.25, 0.25, 1.0]).unwrap();
        let text = write_matrix(&m, 4, Some(&labels)).unwrap();
        assert_eq!(text, ",a,\"b, c\"\na,1.0000,0.2500\n\"b, c\",0.2500,1.0000\n");
        let back = read_grid(&text).unwrap();
        assert_eq!(back.labels, Some(labels));
        assert_eq!(back.into_symmetric().unwrap(), m);
    }

    #[test]
    fn header_only_labels() {
        let f = read_grid("x,y\n1,0.5\n0.5,1\n").unwrap();
        assert_eq!(f.labels, Some(vec!["x".to_string(), "y".to_string()]));
    }

    #[test]
    fn upper_triangle_is_mirrored() {
        let m = read_matrix("1,0.2,-0.3\n,1,0.4\n,,1\n").unwrap();
        assert_eq!(m.get(2, 0), -0.3);
        assert_eq!(m.get(2, 1), 0.4);
    }

    #[test]
    fn matrix_read_errors() {
        assert!(matches!(
            read_matrix("1,2\n2,1,3\n"),
            Err(FormatError::NotSquare { .. })
        ));
        assert!(matches!(
            read_matrix("1,2,3\n2,1,3\n"),
            Err(FormatError::NotSquare { .. })
        ));
        assert!(matches!(
            read_matrix("1,x\n2,1\n"),
            Err(FormatError::BadNumber { line: 1, .. })
        ));
        assert!(matches!(
            read_matrix("1,0.5\n0.6,1\n"),
            Err(FormatError::Core(corrfix_core::Error::Asymmetric { .. }))
        ));
        assert!(matches!(
            read_matrix("1,\n,1\n"),
            Err(FormatError::EmptyCell { row: 1, col: 2 })
        ));
        assert!(read_matrix("").is_err());
    }

    #[test]
    fn small_asymmetry_is_averaged() {
        let m = read_matrix("1,0.5\n0.5000000000001,1\n").unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
