//! Sweeps, threshold estimates, and random-code ensembles.
//!
//! A [`Source`] names a code family and how its channel is obtained. A sweep
//! evaluates a source on a grid of angles (given as `θ/π`) and distances and
//! returns a [`SweepTable`]; [`find_crossings`] turns a table into a
//! [`ThresholdEstimate`].

mod ensemble;
mod sweep;
mod table;
mod threshold;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic_families::AnalyticError;
use crate::code_model::CodeError;
use crate::exact_backend::{ExactError, Recovery};

pub use ensemble::{
    ensemble_estimate, ensemble_sweep, interpolation_curve, monte_carlo_estimate, EnsembleEstimate, EnsembleParams,
    Estimate, InterpolationCurve, QShorEstimate,
};
pub use sweep::{parse_theta_grid, sweep, Backend, Source};
pub use table::{SweepRow, SweepTable};
pub use threshold::{find_crossings, find_crossings_by_series, PairCrossing, ThresholdEstimate, REFINE_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("{0}")]
    Invalid(String),
    #[error("table error: {0}")]
    Table(String),
}

/// Figure of merit compared across distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Average infidelity of one round, `ε / 3`.
    #[default]
    R1,
    /// Syndrome-averaged `2|sin θ_s|`.
    Diamond,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::R1 => "r1",
            Metric::Diamond => "diamond",
        })
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r1" => Ok(Metric::R1),
            "diamond" => Ok(Metric::Diamond),
            _ => Err(format!("unknown metric {s:?}, expected r1 or diamond")),
        }
    }
}

/// How a row's numbers were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Analytic,
    Sampled,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::Analytic => "analytic",
            Provenance::Sampled => "sampled",
        })
    }
}

/// Code families a sweep can range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "rep")]
    Repetition,
    #[serde(rename = "zshor")]
    ZShor,
    #[serde(rename = "xshor")]
    XShor,
    #[serde(rename = "zstacked")]
    ZStacked,
    #[serde(rename = "rsc")]
    RotatedSurface,
    #[serde(rename = "random")]
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Repetition => "rep",
            Family::ZShor => "zshor",
            Family::XShor => "xshor",
            Family::ZStacked => "zstacked",
            Family::RotatedSurface => "rsc",
            Family::Random => "random",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "rep" => Family::Repetition,
            "zshor" => Family::ZShor,
            "xshor" => Family::XShor,
            "zstacked" => Family::ZStacked,
            "rsc" => Family::RotatedSurface,
            "random" => Family::Random,
            _ => return Err(format!("unknown family {s:?}")),
        })
    }
}

/// Row label for a series: `name[@q_shor][+ml]`, where `@q_shor` carries the
/// requested density of a random ensemble and `+ml` marks likelihood-based
/// recovery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyId {
    pub family: Family,
    pub q_shor: Option<f64>,
    pub recovery: Recovery,
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if let Some(q) = self.q_shor {
            write!(f, "@{q}")?;
        }
        if self.recovery == Recovery::Ml {
            f.write_str("+ml")?;
        }
        Ok(())
    }
}

impl FromStr for FamilyId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (rest, recovery) = match s.strip_suffix("+ml") {
            Some(r) => (r, Recovery::Ml),
            None => (s, Recovery::MinWeight),
        };
        let (name, q_shor) = match rest.split_once('@') {
            Some((n, q)) => (n, Some(q.parse::<f64>().map_err(|e| format!("bad q_shor in {s:?}: {e}"))?)),
            None => (rest, None),
        };
        Ok(FamilyId {
            family: name.parse()?,
            q_shor,
            recovery,
        })
    }
}
