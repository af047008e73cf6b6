//! Parsing of external data files into validated [`AnnualSeries`].
//!
//! Input is delimiter-separated UTF-8 text with one header row; the delimiter
//! (comma or semicolon) is auto-detected from the header. Decimal separator is
//! always '.'. Three column layouts cover the supported sources:
//!
//! - [`ColumnSchema::plain`] - two columns, year then value;
//! - [`ColumnSchema::fao`] - named columns `Year` and `Value` located by
//!   header name (case-insensitive), as in FAOSTAT exports;
//! - [`ColumnSchema::silso`] - sunspot-style files addressed by column index:
//!   year, month and value (monthly files: 0, 1, 3), with `-1` as the missing
//!   marker.
//!
//! Missing values: an empty field or `NA` is always treated as missing; `-1`
//! only when the schema sets the sentinel flag. Sub-annual records are
//! averaged to one value per year; a year with no records at all aborts the
//! run, since the analysis chain assumes gap-free series.

use crate::error::{Error, Result};

/// One parsed data row.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub year: i32,
    /// 1-12 when the schema carries a month column.
    pub month: Option<u32>,
    /// `None` when the field was a missing marker.
    pub value: Option<f64>,
    pub quality_flag: Option<String>,
}

/// Column layout of an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSchema {
    pub year_col: ColumnRef,
    pub month_col: Option<ColumnRef>,
    pub value_col: ColumnRef,
    pub quality_col: Option<ColumnRef>,
    /// Treat `-1` as a missing-value sentinel.
    pub sentinel_minus_one: bool,
}

/// A column addressed either by zero-based index or by header name.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnSchema {
    /// Plain `year,value` layout.
    pub fn plain() -> Self {
        ColumnSchema {
            year_col: ColumnRef::Index(0),
            month_col: None,
            value_col: ColumnRef::Index(1),
            quality_col: None,
            sentinel_minus_one: false,
        }
    }

    /// FAOSTAT-style layout with named `Year` and `Value` columns.
    pub fn fao() -> Self {
        ColumnSchema {
            year_col: ColumnRef::Name("Year".into()),
            month_col: None,
            value_col: ColumnRef::Name("Value".into()),
            quality_col: None,
            sentinel_minus_one: false,
        }
    }

    /// SILSO monthly sunspot layout: year, month, value at indices 0, 1, 3,
    /// with -1 marking missing values.
    pub fn silso() -> Self {
        ColumnSchema {
            year_col: ColumnRef::Index(0),
            month_col: Some(ColumnRef::Index(1)),
            value_col: ColumnRef::Index(3),
            quality_col: None,
            sentinel_minus_one: true,
        }
    }

    /// Look up a schema by its CLI name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "plain" => Some(Self::plain()),
            "fao" => Some(Self::fao()),
            "silso" => Some(Self::silso()),
            _ => None,
        }
    }

    fn resolve(&self, header: &[&str], col: &ColumnRef, line: usize) -> Result<usize> {
        match col {
            ColumnRef::Index(i) => Ok(*i),
            ColumnRef::Name(name) => header
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("header has no column named {name:?}"),
                }),
        }
    }
}

/// Averaging policy for [`annualize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPolicy {
    /// Minimum number of non-missing records a year must carry.
    pub min_records_per_year: usize,
}

impl Default for MeanPolicy {
    fn default() -> Self {
        MeanPolicy {
            min_records_per_year: 1,
        }
    }
}

/// A gap-free yearly series: one finite value per consecutive year.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries {
    start_year: i32,
    values: Vec<f64>,
    pub label: String,
    pub unit: String,
}

impl AnnualSeries {
    /// Minimum usable length for the analysis chain.
    pub const MIN_LEN: usize = 8;

    pub fn new(start_year: i32, values: Vec<f64>, label: &str, unit: &str) -> Result<Self> {
        if values.len() < Self::MIN_LEN {
            return Err(Error::InsufficientData {
                len: values.len(),
                min: Self::MIN_LEN,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(AnnualSeries {
            start_year,
            values,
            label: label.to_string(),
            unit: unit.to_string(),
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len() as i32).map(move |i| self.start_year + i)
    }

    /// Same year axis, different values (used when a pipeline stage transforms
    /// the series).
    pub fn with_values(&self, values: Vec<f64>, label: &str) -> Result<Self> {
        AnnualSeries::new(self.start_year, values, label, &self.unit)
    }
}

fn detect_delimiter(header: &str) -> char {
    if header.matches(';').count() > header.matches(',').count() {
        ';'
    } else {
        ','
    }
}

fn is_missing(field: &str, sentinel_minus_one: bool) -> bool {
    let f = field.trim();
    f.is_empty() || f == "NA" || (sentinel_minus_one && f == "-1")
}

/// Parse delimiter-separated text into records. Line numbers in errors are
/// 1-based and count the header.
pub fn parse_csv(bytes: &[u8], schema: &ColumnSchema) -> Result<Vec<RawRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;
    let mut lines = text.lines();
    let header_line = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "empty input".into(),
    })?;
    let delim = detect_delimiter(header_line);
    let header: Vec<&str> = header_line.split(delim).collect();

    let year_idx = schema.resolve(&header, &schema.year_col, 1)?;
    let month_idx = schema
        .month_col
        .as_ref()
        .map(|c| schema.resolve(&header, c, 1))
        .transpose()?;
    let value_idx = schema.resolve(&header, &schema.value_col, 1)?;
    let quality_idx = schema
        .quality_col
        .as_ref()
        .map(|c| schema.resolve(&header, c, 1))
        .transpose()?;

    let mut records = Vec::new();
    for (i, raw_line) in lines.enumerate() {
        let line_no = i + 2;
        if raw_line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw_line.split(delim).collect();
        let need = [Some(year_idx), month_idx, Some(value_idx), quality_idx]
            .iter()
            .flatten()
            .cloned()
            .max()
            .unwrap_or(0);
        if fields.len() <= need {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected at least {} columns, found {}",
                    need + 1,
                    fields.len()
                ),
            });
        }
        let year: i32 = fields[year_idx].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("cannot parse year from {:?}", fields[year_idx].trim()),
        })?;
        let month = match month_idx {
            Some(mi) => {
                let m: u32 = fields[mi].trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("cannot parse month from {:?}", fields[mi].trim()),
                })?;
                if !(1..=12).contains(&m) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("month {m} out of range"),
                    });
                }
                Some(m)
            }
            None => None,
        };
        let raw_value = fields[value_idx];
        let value = if is_missing(raw_value, schema.sentinel_minus_one) {
            None
        } else {
            let v: f64 = raw_value.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("cannot parse value from {:?}", raw_value.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "value is not finite".into(),
                });
            }
            Some(v)
        };
        let quality_flag = quality_idx.map(|qi| fields[qi].trim().to_string());
        records.push(RawRecord {
            year,
            month,
            value,
            quality_flag,
        });
    }
    Ok(records)
}

/// Collapse records to one value per year by arithmetic mean of the year's
/// non-missing records. The year span must be gap-free.
pub fn annualize(
    records: &[RawRecord],
    policy: MeanPolicy,
    label: &str,
    unit: &str,
) -> Result<AnnualSeries> {
    let years: Vec<i32> = records.iter().map(|r| r.year).collect();
    let (&first, &last) = match (years.iter().min(), years.iter().max()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InsufficientData {
                len: 0,
                min: AnnualSeries::MIN_LEN,
            })
        }
    };
    let span = (last - first + 1) as usize;
    if span < AnnualSeries::MIN_LEN {
        return Err(Error::InsufficientData {
            len: span,
            min: AnnualSeries::MIN_LEN,
        });
    }
    let mut sums = vec![0.0f64; span];
    let mut counts = vec![0usize; span];
    for r in records {
        if let Some(v) = r.value {
            let idx = (r.year - first) as usize;
            sums[idx] += v;
            counts[idx] += 1;
        }
    }
    let min_count = policy.min_records_per_year.max(1);
    let mut values = Vec::with_capacity(span);
    for (i, (&s, &c)) in sums.iter().zip(counts.iter()).enumerate() {
        if c < min_count {
            return Err(Error::MissingYear {
                year: first + i as i32,
            });
        }
        values.push(s / c as f64);
    }
    AnnualSeries::new(first, values, label, unit)
}
