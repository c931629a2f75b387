use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::schema::{DatasetSchema, ISO_FORMAT, UNIX_SECONDS};
use super::series::MultivariateSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cell values treated as missing in every column.
pub const MISSING_SENTINELS: [&str; 2] = ["", "?"];

/// Reads a dataset file according to `schema`.
pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<MultivariateSeries<F>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::with_capacity(1 << 20, file), schema)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<F: Scalar, R: Read>(reader: R, schema: &DatasetSchema) -> Result<MultivariateSeries<F>> {
    let delimiter = u8::try_from(schema.delimiter)
        .map_err(|_| Error::Schema(format!("delimiter {:?} is not ASCII", schema.delimiter)))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };

    let ts_idx = schema
        .timestamp_columns
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;
    if ts_idx.is_empty() {
        return Err(Error::Schema("schema declares no timestamp column".into()));
    }
    let names: Vec<String> = match &schema.variables {
        Some(vars) => vars.clone(),
        None => header
            .iter()
            .enumerate()
            .filter(|(i, _)| !ts_idx.contains(i))
            .map(|(_, h)| h.clone())
            .collect(),
    };
    let var_idx = names.iter().map(|n| find(n)).collect::<Result<Vec<_>>>()?;
    let nullable: Vec<bool> = names.iter().map(|n| schema.nullable.contains(n)).collect();
    let target = match &schema.target {
        Some(t) => t.clone(),
        None => names
            .first()
            .cloned()
            .ok_or_else(|| Error::Schema("dataset has no numeric variables".into()))?,
    };

    let mut rows: Vec<(NaiveDateTime, Vec<F>, usize)> = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut stamp = String::new();
    while rdr.read_record(&mut record)? {
        // header is line 1
        let line = record.position().map(|p| p.line() as usize).unwrap_or(rows.len() + 2);
        stamp.clear();
        for (k, &i) in ts_idx.iter().enumerate() {
            if k > 0 {
                stamp.push(' ');
            }
            stamp.push_str(record.get(i).unwrap_or("").trim());
        }
        let ts = parse_timestamp(&stamp, &schema.timestamp_format).map_err(|message| Error::Parse {
            line,
            message,
        })?;
        let mut values = Vec::with_capacity(var_idx.len());
        for (k, &i) in var_idx.iter().enumerate() {
            let cell = record.get(i).unwrap_or("").trim();
            let v = if MISSING_SENTINELS.contains(&cell) {
                f64::NAN
            } else {
                match cell.parse::<f64>() {
                    Ok(v) => v,
                    Err(_) if nullable[k] => f64::NAN,
                    Err(_) => {
                        return Err(Error::Parse {
                            line,
                            message: format!("column `{}`: cannot parse {cell:?} as a number", names[k]),
                        })
                    }
                }
            };
            values.push(F::lit(v));
        }
        rows.push((ts, values, line));
    }

    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Parse {
            line: w[1].2,
            message: format!("duplicate timestamp {}", w[1].0),
        });
    }
    let timestamps = rows.iter().map(|r| r.0).collect();
    let values = rows.into_iter().flat_map(|r| r.1).collect();
    MultivariateSeries::new(timestamps, names, values, target)
}

fn parse_timestamp(s: &str, format: &str) -> std::result::Result<NaiveDateTime, String> {
    if format == UNIX_SECONDS {
        let secs: f64 = s
            .parse()
            .map_err(|_| format!("cannot parse {s:?} as epoch seconds"))?;
        let whole = secs.floor();
        let nanos = ((secs - whole) * 1e9).round() as u32;
        return DateTime::from_timestamp(whole as i64, nanos.min(999_999_999))
            .map(|d| d.naive_utc())
            .ok_or_else(|| format!("epoch seconds {s} out of range"));
    }
    NaiveDateTime::parse_from_str(s, format)
        .or_else(|_| NaiveDate::parse_from_str(s, format).map(|d| d.and_hms_opt(0, 0, 0).unwrap()))
        .map_err(|e| format!("cannot parse timestamp {s:?} with format {format:?}: {e}"))
}

/// Writes the series as CSV with an ISO-8601 `timestamp` column. Missing
/// values are written as empty cells.
pub fn write_csv<F: Scalar, W: Write>(series: &MultivariateSeries<F>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend(series.names().iter().cloned());
    wtr.write_record(&header)?;
    let mut fields: Vec<String> = Vec::with_capacity(series.width() + 1);
    for (ts, row) in series.timestamps().iter().zip(series.rows()) {
        fields.clear();
        fields.push(ts.format(ISO_FORMAT).to_string());
        fields.extend(row.iter().map(|v| if v.is_nan() { String::new() } else { v.to_string() }));
        wtr.write_record(&fields)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv<F: Scalar>(series: &MultivariateSeries<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(series, std::io::BufWriter::new(file))
}
