//! Sweep rows and their CSV/JSON forms.

use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ExperimentError, FamilyId, Metric, Provenance};

/// One `(series, distance, θ)` point.
///
/// The family label, distance parameters, provenance, seed, and sample counts
/// are enough to regenerate the row on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub dx: usize,
    pub dz: usize,
    pub h: Option<usize>,
    /// Realized X-cut fraction (ensemble mean for random codes).
    pub q_shor: Option<f64>,
    pub seed: Option<u64>,
    pub theta_over_pi: f64,
    pub provenance: Provenance,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(with = "lenient")]
    pub kappa: f64,
    pub r1: f64,
    pub r1_stderr: Option<f64>,
    pub diamond: Option<f64>,
    pub diamond_stderr: Option<f64>,
    pub n_codes: Option<usize>,
    pub n_samples: Option<usize>,
}

impl SweepRow {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::R1 => Some(self.r1),
            Metric::Diamond => self.diamond,
        }
    }

    pub fn family_id(&self) -> Result<FamilyId, ExperimentError> {
        self.family.parse().map_err(ExperimentError::Table)
    }
}

/// Non-finite floats are written as strings so JSON keeps them.
mod lenient {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.collect_str(x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Rows ordered by series, then distance, then angle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Key identifying one series within a table.
pub(crate) type SeriesKey = (String, Option<usize>, Provenance, Option<u64>, Option<usize>, Option<usize>);

pub(crate) fn series_key(r: &SweepRow) -> SeriesKey {
    (r.family.clone(), r.h, r.provenance, r.seed, r.n_codes, r.n_samples)
}

impl SweepTable {
    /// Sorts rows and checks that angles are strictly increasing within
    /// every `(series, distance)`.
    pub fn new(mut rows: Vec<SweepRow>) -> Result<Self, ExperimentError> {
        rows.sort_by(|a, b| {
            series_key(a)
                .partial_cmp(&series_key(b))
                .expect("keys are comparable")
                .then(a.dz.cmp(&b.dz))
                .then(a.dx.cmp(&b.dx))
                .then(a.theta_over_pi.total_cmp(&b.theta_over_pi))
        });
        for w in rows.windows(2) {
            if series_key(&w[0]) == series_key(&w[1])
                && w[0].dz == w[1].dz
                && w[0].dx == w[1].dx
                && w[0].theta_over_pi >= w[1].theta_over_pi
            {
                return Err(ExperimentError::Table(format!(
                    "duplicate angle {} for {} at {}x{}",
                    w[0].theta_over_pi, w[0].family, w[0].dx, w[0].dz
                )));
            }
        }
        if let Some(r) = rows.iter().find(|r| !r.theta_over_pi.is_finite()) {
            return Err(ExperimentError::Table(format!("non-finite angle in {}", r.family)));
        }
        Ok(SweepTable { rows })
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Splits into per-series tables, in key order.
    pub fn series(&self) -> Vec<SweepTable> {
        let mut out: Vec<SweepTable> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(t) if series_key(&t.rows[0]) == series_key(r) => t.rows.push(r.clone()),
                _ => out.push(SweepTable { rows: vec![r.clone()] }),
            }
        }
        out
    }

    /// Distinct `dz` values, ascending.
    pub fn distances(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.rows.iter().map(|r| r.dz).collect();
        d.dedup();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ExperimentError> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wtr.write_record(CSV_COLUMNS).map_err(table_err)?;
        }
        for r in &self.rows {
            wtr.serialize(r).map_err(table_err)?;
        }
        wtr.flush().map_err(|e| ExperimentError::Table(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String, ExperimentError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| ExperimentError::Table(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, ExperimentError> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers().map_err(table_err)?.clone();
        if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
            return Err(ExperimentError::Table(format!(
                "unexpected columns, expected {}",
                CSV_COLUMNS.join(",")
            )));
        }
        let rows = rdr
            .deserialize()
            .collect::<Result<Vec<SweepRow>, _>>()
            .map_err(table_err)?;
        Self::new(rows)
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let t: SweepTable = serde_json::from_str(text).map_err(|e| ExperimentError::Table(e.to_string()))?;
        Self::new(t.rows)
    }
}

/// Column order of the CSV form.
pub const CSV_COLUMNS: [&str; 17] = [
    "family",
    "dx",
    "dz",
    "h",
    "q_shor",
    "seed",
    "theta_over_pi",
    "provenance",
    "epsilon",
    "delta",
    "kappa",
    "r1",
    "r1_stderr",
    "diamond",
    "diamond_stderr",
    "n_codes",
    "n_samples",
];

fn table_err(e: csv::Error) -> ExperimentError {
    ExperimentError::Table(e.to_string())
}
