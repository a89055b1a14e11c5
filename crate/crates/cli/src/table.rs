//! Versioned CSV tables.
//!
//! Every file starts with `# schema: <name>/<version>`, optionally followed
//! by `# key: value` metadata lines, then an ordinary CSV header row.

use std::collections::BTreeMap;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub columns: &'static [&'static str],
    /// Trailing columns a reader tolerates being absent.
    pub optional: usize,
}

pub const SCAN: Schema = Schema {
    name: "eit-scan",
    version: 1,
    columns: &["delta2_hz", "absorption_per_m", "transmission"],
    optional: 0,
};

pub const SERIES: Schema = Schema {
    name: "eit-series",
    version: 1,
    columns: &["power_w", "omega_c_hz", "fwhm_hz", "fwhm_sigma_hz"],
    optional: 1,
};

pub const SLOPES: Schema = Schema {
    name: "eit-slopes",
    version: 1,
    columns: &["temperature_k", "slope_hz_per_w", "intercept_hz"],
    optional: 0,
};

pub const FIT: Schema = Schema {
    name: "eit-fit",
    version: 1,
    columns: &["model", "parameter", "value", "sigma"],
    optional: 0,
};

impl Schema {
    pub fn tag(&self) -> String {
        format!("{}/{}", self.name, self.version)
    }
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self, schema: &Schema) -> Vec<u8> {
        let mut out = format!("# schema: {}\n", schema.tag()).into_bytes();
        for (k, v) in &self.meta {
            out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn parse(bytes: &[u8], schema: &Schema) -> Result<Self, CliError> {
        let text = std::str::from_utf8(bytes).map_err(CliError::data)?;
        let first = text.lines().next().unwrap_or("");
        let tag = first
            .strip_prefix("# schema:")
            .map(str::trim)
            .ok_or_else(|| CliError::Data(format!("missing `# schema:` line, expected {}", schema.tag())))?;
        let (name, version) = tag
            .rsplit_once('/')
            .ok_or_else(|| CliError::Data(format!("malformed schema tag `{tag}`")))?;
        if name != schema.name {
            return Err(CliError::Data(format!("expected a {} file, found {name}", schema.name)));
        }
        if version.parse::<u32>().ok() != Some(schema.version) {
            return Err(CliError::Data(format!(
                "unsupported {} version `{version}`, this build reads version {}",
                schema.name, schema.version
            )));
        }
        let meta = text
            .lines()
            .skip(1)
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l[1..].split_once(':'))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();

        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(CliError::data)?
            .iter()
            .map(String::from)
            .collect();
        let required = &schema.columns[..schema.columns.len() - schema.optional];
        if columns.len() < required.len()
            || columns.len() > schema.columns.len()
            || columns.iter().zip(schema.columns).any(|(a, b)| a != b)
        {
            return Err(CliError::Data(format!(
                "columns {columns:?} do not match {}: {:?}",
                schema.tag(),
                schema.columns
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Data(format!("row {}: {e}", i + 1)))?;
            rows.push(rec.iter().map(String::from).collect());
        }
        Ok(Table { meta, columns, rows })
    }

    /// Numeric column by name; empty cells are an error.
    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        self.optional_column(name)?
            .ok_or_else(|| CliError::Data(format!("missing column {name}")))?
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| CliError::Data(format!("{name}, row {}: empty cell", i + 1))))
            .collect()
    }

    /// None when the column is absent; None cells where they are empty.
    pub fn optional_column(&self, name: &str) -> Result<Option<Vec<Option<f64>>>, CliError> {
        let Some(j) = self.columns.iter().position(|c| c == name) else {
            return Ok(None);
        };
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[j].trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>()
                    .map(Some)
                    .map_err(|e| CliError::Data(format!("{name}, row {}: `{cell}`: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.parse().ok())
    }
}
