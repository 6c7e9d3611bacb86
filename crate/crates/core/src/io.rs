//! CSV ingestion and export of paths.
//!
//! The first column is time, every other column a channel; the header row
//! supplies the channel names. Lines starting with `#` are comments.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::path::Path;

pub fn load_csv<R: Read>(source: R) -> Result<Path> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(source);
    let header = rdr
        .headers()
        .map_err(|e| Error::CsvFormat(e.to_string()))?
        .clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::CsvFormat("empty file".into()));
    }
    if header.len() < 2 {
        return Err(Error::CsvFormat("need a time column and at least one data column".into()));
    }
    let n = header.len() - 1;
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        // 1-based data row, not counting the header
        let row = r + 1;
        let rec = rec.map_err(|e| Error::CsvFormat(format!("row {row}: {e}")))?;
        if rec.len() != header.len() {
            return Err(Error::Csv {
                row,
                column: rec.len().min(header.len()) + 1,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                row,
                column: c + 1,
                message: format!("non-numeric value '{cell}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    row,
                    column: c + 1,
                    message: format!("non-finite value '{cell}'"),
                });
            }
            if c == 0 {
                if let Some(&prev) = times.last() {
                    if v <= prev {
                        return Err(Error::Csv {
                            row,
                            column: 1,
                            message: format!("time {v} does not increase past {prev}"),
                        });
                    }
                }
                times.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if times.is_empty() {
        return Err(Error::CsvFormat("no data rows".into()));
    }
    Path::from_flat(times, values, n, names)
}

pub fn load_csv_file(path: &std::path::Path) -> Result<Path> {
    load_csv(std::fs::File::open(path)?)
}

/// Writes `a` with a `time_column` header; floats use the shortest
/// representation that parses back to the same value.
pub fn save_csv<W: Write>(a: &Path, time_column: &str, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![time_column.to_owned()];
    header.extend(a.names().iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (k, &t) in a.times().iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(a.point(k).iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::CsvFormat(format!("{other:?}")),
    }
}
