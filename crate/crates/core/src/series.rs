//! Loading, validating, and slicing valuation-ratio time series.
//!
//! A [`Series`] is immutable after construction: every constructor runs the
//! full validation pass (strictly increasing dates, uniform at the declared
//! frequency, all values finite), so downstream numeric code never re-checks.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling frequency of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    /// Trading days; gaps allowed, order strict.
    Daily,
    /// Consecutive calendar months; timestamps normalized to the first of
    /// the month.
    Monthly,
}

impl std::fmt::Display for Frequency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frequency::Daily => write!(f, "daily"),
            Frequency::Monthly => write!(f, "monthly"),
        }
    }
}

/// How date cells are written in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DateFormat {
    /// Decide from the first data row: `YYYY-MM` means month, else full date.
    #[default]
    Auto,
    /// `YYYY-MM-DD`.
    IsoDate,
    /// `YYYY-MM`, implying a monthly series.
    IsoMonth,
}

/// Column schema for delimited input files.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub date_column: String,
    pub value_column: String,
    pub date_format: DateFormat,
    pub delimiter: u8,
    /// `None`: monthly when dates are `YYYY-MM`, daily otherwise.
    pub frequency: Option<Frequency>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            value_column: "value".into(),
            date_format: DateFormat::Auto,
            delimiter: b',',
            frequency: None,
        }
    }
}

/// A validated, immutable time series of ratio observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    name: String,
    frequency: Frequency,
    timestamps: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl Series {
    /// Build a series from raw parts, running the full validation pass.
    pub fn from_parts(
        name: impl Into<String>,
        frequency: Frequency,
        timestamps: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if timestamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: timestamps.len(),
                right: values.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::EmptyInput(name));
        }
        let timestamps = match frequency {
            Frequency::Monthly => timestamps
                .iter()
                .map(|d| NaiveDate::from_ymd_opt(d.year(), d.month(), 1).unwrap())
                .collect(),
            Frequency::Daily => timestamps,
        };
        validate_timeline(&timestamps, frequency, None)?;
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { index });
            }
        }
        Ok(Self {
            name,
            frequency,
            timestamps,
            values,
        })
    }

    /// Synthetic monthly series starting 2000-01, used by the generators.
    pub fn synthetic_monthly(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let timestamps = (0..values.len()).map(month_from_2000).collect();
        Self::from_parts(name, Frequency::Monthly, timestamps, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    /// Render the timestamp at `index` the way it is written on disk:
    /// `YYYY-MM` for monthly series, `YYYY-MM-DD` for daily.
    pub fn date_label(&self, index: usize) -> String {
        let d = self.timestamps[index];
        match self.frequency {
            Frequency::Monthly => format!("{:04}-{:02}", d.year(), d.month()),
            Frequency::Daily => d.format("%Y-%m-%d").to_string(),
        }
    }

    /// Sub-series of observations with `from <= timestamp <= to` (inclusive).
    pub fn slice(&self, from: NaiveDate, to: NaiveDate) -> Result<Series> {
        if from > to {
            return Err(Error::InvalidRange {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        let lo = self.timestamps.partition_point(|d| *d < from);
        let hi = self.timestamps.partition_point(|d| *d <= to);
        if lo >= hi {
            return Err(Error::EmptyRange {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        Ok(Series {
            name: self.name.clone(),
            frequency: self.frequency,
            timestamps: self.timestamps[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        })
    }
}

fn month_from_2000(offset: usize) -> NaiveDate {
    let m0 = 2000 * 12 + offset as i64;
    NaiveDate::from_ymd_opt((m0 / 12) as i32, (m0 % 12 + 1) as u32, 1).unwrap()
}

fn month_index(d: NaiveDate) -> i64 {
    d.year() as i64 * 12 + (d.month() as i64 - 1)
}

/// Strict increase everywhere; consecutive months when monthly. `lines`
/// carries per-row file line numbers for error reporting (1-based), when the
/// timeline came from a file.
fn validate_timeline(dates: &[NaiveDate], frequency: Frequency, lines: Option<&[u64]>) -> Result<()> {
    for i in 1..dates.len() {
        let line = lines.map_or(i as u64 + 1, |l| l[i]);
        let (prev, next) = (dates[i - 1], dates[i]);
        if next == prev {
            return Err(Error::DuplicateDate {
                line,
                date: next.to_string(),
            });
        }
        if next < prev {
            return Err(Error::NonMonotonicDates {
                line,
                prev: prev.to_string(),
                next: next.to_string(),
            });
        }
        if frequency == Frequency::Monthly && month_index(next) != month_index(prev) + 1 {
            return Err(Error::NonConsecutiveMonths {
                line,
                prev: prev.to_string(),
                next: next.to_string(),
            });
        }
    }
    Ok(())
}

/// Load a series from a delimited file; the series name is the file stem.
pub fn load_series(path: &Path, schema: &CsvSchema) -> Result<Series> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    read_series(file, &name, schema)
}

/// Parse a series from any reader. Rows are taken in file order and then
/// checked for strict date increase; blank value cells are rejected rather
/// than imputed, because the recursive tests are position-sensitive.
pub fn read_series<R: Read>(reader: R, name: &str, schema: &CsvSchema) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(schema.delimiter)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h.trim() == schema.date_column)
        .ok_or_else(|| Error::MissingColumn(schema.date_column.clone()))?;
    let value_idx = headers
        .iter()
        .position(|h| h.trim() == schema.value_column)
        .ok_or_else(|| Error::MissingColumn(schema.value_column.clone()))?;

    let mut resolved_format: Option<DateFormat> = match schema.date_format {
        DateFormat::Auto => None,
        f => Some(f),
    };
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut lines: Vec<u64> = Vec::new();

    for record in rdr.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e
                .position()
                .map(|p| p.line())
                .unwrap_or(lines.last().copied().unwrap_or(1) + 1),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date_cell = record.get(date_idx).unwrap_or("").trim();
        let value_cell = record.get(value_idx).unwrap_or("").trim();

        if date_cell.is_empty() && value_cell.is_empty() {
            continue; // trailing blank line
        }

        let format = *resolved_format.get_or_insert_with(|| infer_format(date_cell));
        let date = parse_date(date_cell, format).ok_or_else(|| Error::MalformedRow {
            line,
            reason: format!("unparseable date {date_cell:?}"),
        })?;

        if value_cell.is_empty() {
            return Err(Error::MissingValue { line });
        }
        let value: f64 = value_cell.parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("unparseable number {value_cell:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("non-finite value {value_cell:?}"),
            });
        }

        dates.push(date);
        values.push(value);
        lines.push(line);
    }

    if values.is_empty() {
        return Err(Error::EmptyInput(name.to_string()));
    }

    let frequency = schema.frequency.unwrap_or_else(|| {
        match resolved_format.unwrap_or(DateFormat::IsoDate) {
            DateFormat::IsoMonth => Frequency::Monthly,
            _ => Frequency::Daily,
        }
    });
    if frequency == Frequency::Monthly {
        for d in dates.iter_mut() {
            *d = NaiveDate::from_ymd_opt(d.year(), d.month(), 1).unwrap();
        }
    }
    validate_timeline(&dates, frequency, Some(&lines))?;

    Ok(Series {
        name: name.to_string(),
        frequency,
        timestamps: dates,
        values,
    })
}

fn infer_format(cell: &str) -> DateFormat {
    // YYYY-MM has exactly one separator.
    if cell.bytes().filter(|b| *b == b'-').count() == 1 {
        DateFormat::IsoMonth
    } else {
        DateFormat::IsoDate
    }
}

fn parse_date(cell: &str, format: DateFormat) -> Option<NaiveDate> {
    match format {
        DateFormat::IsoDate => NaiveDate::parse_from_str(cell, "%Y-%m-%d").ok(),
        DateFormat::IsoMonth => {
            let (y, m) = cell.split_once('-')?;
            let y: i32 = y.parse().ok()?;
            let m: u32 = m.parse().ok()?;
            NaiveDate::from_ymd_opt(y, m, 1)
        }
        DateFormat::Auto => parse_date(cell, infer_format(cell)),
    }
}

/// Write a series in the canonical `date,value` schema. Monthly timestamps
/// are written as `YYYY-MM`, values in shortest round-trip form, so loading
/// the output reproduces the series exactly.
pub fn write_series<W: Write>(series: &Series, mut out: W) -> Result<()> {
    writeln!(out, "date,value")?;
    for i in 0..series.len() {
        writeln!(out, "{},{}", series.date_label(i), series.values()[i])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn monthly(csv: &str) -> Result<Series> {
        read_series(csv.as_bytes(), "test", &CsvSchema::default())
    }

    #[test]
    fn loads_well_formed_monthly_rows() {
        let s = monthly("date,value\n2000-01,24.1\n2000-02,25.3\n2000-03,23.8\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.frequency(), Frequency::Monthly);
        assert_eq!(s.values(), &[24.1, 25.3, 23.8]);
        assert_eq!(s.date_label(0), "2000-01");
    }

    #[test]
    fn rejects_out_of_order_dates() {
        let err = monthly("date,value\n2000-02,1.0\n2000-01,2.0\n").unwrap_err();
        assert!(matches!(err, Error::NonMonotonicDates { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_unparseable_number_with_line() {
        let err = monthly("date,value\n2000-01,abc\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_blank_value_cell() {
        let err = monthly("date,value\n2000-01,1.0\n2000-02,\n").unwrap_err();
        assert!(matches!(err, Error::MissingValue { line: 3 }), "{err}");
    }

    #[test]
    fn rejects_duplicate_dates() {
        let err = monthly("date,value\n2000-01,1.0\n2000-01,2.0\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateDate { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_monthly_gaps() {
        let err = monthly("date,value\n2000-01,1.0\n2000-03,2.0\n").unwrap_err();
        assert!(matches!(err, Error::NonConsecutiveMonths { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_empty_input_and_missing_columns() {
        assert!(matches!(monthly("date,value\n"), Err(Error::EmptyInput(_))));
        let err = monthly("when,value\n2000-01,1.0\n").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "date"));
    }

    #[test]
    fn rejects_non_finite_values() {
        let err = monthly("date,value\n2000-01,NaN\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn daily_allows_gaps_monthly_does_not() {
        let s = read_series(
            "date,value\n2000-01-03,1.0\n2000-01-04,1.1\n2000-01-07,1.2\n".as_bytes(),
            "d",
            &CsvSchema::default(),
        )
        .unwrap();
        assert_eq!(s.frequency(), Frequency::Daily);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn slice_counts_inclusively() {
        let values: Vec<f64> = (0..24).map(|i| 10.0 + i as f64).collect();
        let s = Series::synthetic_monthly("s", values).unwrap();
        let sub = s
            .slice(
                NaiveDate::from_ymd_opt(2000, 10, 1).unwrap(),
                NaiveDate::from_ymd_opt(2001, 3, 1).unwrap(),
            )
            .unwrap();
        assert_eq!(sub.len(), 6);
        assert_eq!(sub.date_label(0), "2000-10");
    }

    #[test]
    fn slice_full_range_is_identity() {
        let s = Series::synthetic_monthly("s", (0..36).map(|i| i as f64 * 0.5 + 1.0).collect())
            .unwrap();
        let full = s.slice(s.timestamps()[0], *s.timestamps().last().unwrap()).unwrap();
        assert_eq!(full, s);
    }

    #[test]
    fn slice_outside_range_errors() {
        let s = Series::synthetic_monthly("s", vec![1.0, 2.0, 3.0]).unwrap();
        let err = s
            .slice(
                NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
                NaiveDate::from_ymd_opt(2010, 12, 1).unwrap(),
            )
            .unwrap_err();
        assert!(matches!(err, Error::EmptyRange { .. }));
        let err = s
            .slice(
                NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
                NaiveDate::from_ymd_opt(2009, 1, 1).unwrap(),
            )
            .unwrap_err();
        assert!(matches!(err, Error::InvalidRange { .. }));
    }

    proptest! {
        // Round trip: write then read reproduces timestamps and values
        // to full precision.
        #[test]
        fn write_read_round_trips(
            start in 0usize..600,
            values in proptest::collection::vec(-1.0e9f64..1.0e9, 1..60),
        ) {
            let timestamps = (start..start + values.len()).map(super::month_from_2000).collect();
            let s = Series::from_parts("rt", Frequency::Monthly, timestamps, values).unwrap();
            let mut buf = Vec::new();
            write_series(&s, &mut buf).unwrap();
            let back = read_series(buf.as_slice(), "rt", &CsvSchema::default()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
