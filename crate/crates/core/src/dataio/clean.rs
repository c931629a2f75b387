use chrono::{DateTime, Duration};

use super::series::MultivariateSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Removes every row holding a missing (NaN) cell. Returns the cleaned series
/// and the number of rows dropped.
pub fn drop_missing<F: Scalar>(series: &MultivariateSeries<F>) -> (MultivariateSeries<F>, usize) {
    let keep: Vec<usize> = series
        .rows()
        .enumerate()
        .filter(|(_, r)| r.iter().all(|v| !v.is_nan()))
        .map(|(t, _)| t)
        .collect();
    let removed = series.len() - keep.len();
    if removed == 0 {
        return (series.clone(), 0);
    }
    let timestamps = keep.iter().map(|&t| series.timestamps()[t]).collect();
    let values = keep.iter().flat_map(|&t| series.row(t).iter().copied()).collect();
    let cleaned = MultivariateSeries::new(timestamps, series.names().to_vec(), values, series.target())
        .expect("subset of a valid series is valid");
    (cleaned, removed)
}

/// Smallest gap between consecutive rows, or `None` for fewer than two rows.
pub fn native_interval<F: Scalar>(series: &MultivariateSeries<F>) -> Option<Duration> {
    series.timestamps().windows(2).map(|w| w[1] - w[0]).min()
}

/// Averages rows into consecutive bins of width `resolution`, aligned to the
/// Unix epoch. Each output row is stamped with its bin start; empty bins are
/// omitted.
pub fn resample<F: Scalar>(series: &MultivariateSeries<F>, resolution: Duration) -> Result<MultivariateSeries<F>> {
    let width = resolution.num_milliseconds();
    if width <= 0 {
        return Err(Error::Argument(format!("resolution must be positive, got {resolution}")));
    }
    if let Some(native) = native_interval(series) {
        if resolution < native {
            return Err(Error::Argument(format!(
                "resolution {}s is finer than the native sampling interval {}s",
                resolution.num_seconds(),
                native.num_seconds()
            )));
        }
    }

    let m = series.width();
    let mut timestamps = Vec::new();
    let mut values: Vec<F> = Vec::new();
    let mut sums = vec![F::zero(); m];
    let mut count = 0usize;
    let mut current: Option<i64> = None;

    let flush = |bin: i64, sums: &mut [F], count: usize, timestamps: &mut Vec<_>, values: &mut Vec<F>| {
        let start = DateTime::from_timestamp_millis(bin * width)
            .expect("bin start within chrono range")
            .naive_utc();
        timestamps.push(start);
        let n = F::from_usize_lossy(count);
        values.extend(sums.iter().map(|&s| s / n));
        sums.iter_mut().for_each(|s| *s = F::zero());
    };

    for (ts, row) in series.timestamps().iter().zip(series.rows()) {
        let bin = ts.and_utc().timestamp_millis().div_euclid(width);
        if let Some(cur) = current {
            if cur != bin {
                flush(cur, &mut sums, count, &mut timestamps, &mut values);
                count = 0;
            }
        }
        current = Some(bin);
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v;
        }
        count += 1;
    }
    if let Some(cur) = current {
        flush(cur, &mut sums, count, &mut timestamps, &mut values);
    }
    MultivariateSeries::new(timestamps, series.names().to_vec(), values, series.target())
}

/// Parses durations such as `30m`, `30min`, `10 minutes`, `1h`, `90s`, `1d`.
pub fn parse_resolution(text: &str) -> Result<Duration> {
    let t = text.trim();
    let split = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let n: i64 = num
        .parse()
        .map_err(|_| Error::Argument(format!("cannot parse resolution {text:?}")))?;
    let d = match unit.trim().to_ascii_lowercase().as_str() {
        "s" | "sec" | "secs" | "second" | "seconds" => Duration::seconds(n),
        "" | "m" | "min" | "mins" | "minute" | "minutes" | "t" => Duration::minutes(n),
        "h" | "hr" | "hour" | "hours" => Duration::hours(n),
        "d" | "day" | "days" => Duration::days(n),
        other => return Err(Error::Argument(format!("unknown resolution unit {other:?} in {text:?}"))),
    };
    if n <= 0 {
        return Err(Error::Argument(format!("resolution must be positive, got {text:?}")));
    }
    Ok(d)
}
