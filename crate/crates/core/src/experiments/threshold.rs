//! Threshold estimates from crossings of consecutive-distance curves.

use serde::Serialize;

use super::table::series_key;
use super::{ExperimentError, Family, Metric, Source, SweepRow, SweepTable};

/// Bisection stops once a crossing is known to this width (units of π).
pub const REFINE_TOLERANCE: f64 = 1e-3;

/// Where the curves of two consecutive distances cross.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairCrossing {
    pub d_lo: usize,
    pub d_hi: usize,
    /// Bracket of the crossing in units of π; the metric difference has
    /// opposite signs at the two ends.
    pub lower_over_pi: f64,
    pub upper_over_pi: f64,
    pub refined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub family: String,
    pub h: Option<usize>,
    pub metric: Metric,
    pub distances: Vec<usize>,
    /// Every sign change of `metric(d_hi) - metric(d_lo)` for every
    /// consecutive pair.
    pub crossings: Vec<PairCrossing>,
    /// Smallest and largest crossing bracket ends. When no pair crosses only
    /// one side is known: `lower` is the top of the grid if larger codes are
    /// better everywhere, `upper` the bottom of the grid if they are worse
    /// everywhere.
    pub lower_over_pi: Option<f64>,
    pub upper_over_pi: Option<f64>,
    pub one_sided: bool,
    /// Largest grid angle where the metric decreases across every pair.
    pub clearly_below_over_pi: Option<f64>,
    /// Smallest grid angle where the metric increases across every pair.
    pub clearly_above_over_pi: Option<f64>,
}

impl ThresholdEstimate {
    /// Centre of the bracket, or the known side when one-sided.
    pub fn midpoint_over_pi(&self) -> Option<f64> {
        match (self.lower_over_pi, self.upper_over_pi) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }
}

/// One metric curve per distance, on the angles common to all distances.
struct Curves {
    distances: Vec<usize>,
    thetas: Vec<f64>,
    rows: Vec<Vec<SweepRow>>,
}

fn curves(table: &SweepTable, metric: Metric) -> Result<Curves, ExperimentError> {
    let distances = table.distances();
    if distances.len() < 2 {
        return Err(ExperimentError::Invalid(format!(
            "crossings need at least two distances, table has {}",
            distances.len()
        )));
    }
    let per_d: Vec<Vec<&SweepRow>> = distances
        .iter()
        .map(|&d| table.rows.iter().filter(|r| r.dz == d).collect())
        .collect();
    for (d, rows) in distances.iter().zip(&per_d) {
        let mut dx: Vec<usize> = rows.iter().map(|r| r.dx).collect();
        dx.dedup();
        if dx.len() > 1 {
            return Err(ExperimentError::Table(format!("several d_x values at distance {d}")));
        }
    }
    let mut thetas: Vec<f64> = per_d[0].iter().map(|r| r.theta_over_pi).collect();
    thetas.retain(|t| per_d.iter().all(|rows| rows.iter().any(|r| r.theta_over_pi == *t)));
    if thetas.is_empty() {
        return Err(ExperimentError::Invalid("distances share no angles".into()));
    }
    let rows = per_d
        .iter()
        .map(|rows| {
            thetas
                .iter()
                .map(|t| (*rows.iter().find(|r| r.theta_over_pi == *t).expect("common angle")).clone())
                .collect::<Vec<SweepRow>>()
        })
        .collect::<Vec<_>>();
    for r in rows.iter().flatten() {
        if r.metric(metric).is_none() {
            return Err(ExperimentError::Invalid(format!(
                "metric {metric} is not available for {} rows",
                r.family
            )));
        }
    }
    Ok(Curves {
        distances,
        thetas,
        rows,
    })
}

/// Threshold estimate for a table holding exactly one series.
///
/// Crossings are located on the grid and, for analytic and exact sources of
/// named families, refined by bisection on the source to
/// [`REFINE_TOLERANCE`]. Ensemble rows are not refined.
pub fn find_crossings(table: &SweepTable, metric: Metric) -> Result<ThresholdEstimate, ExperimentError> {
    let first = table
        .rows
        .first()
        .ok_or_else(|| ExperimentError::Invalid("empty table".into()))?;
    if table.rows.iter().any(|r| series_key(r) != series_key(first)) {
        return Err(ExperimentError::Invalid(
            "table holds several series; use find_crossings_by_series".into(),
        ));
    }
    let c = curves(table, metric)?;
    let source = Source::from_row(first)?;
    let refine = source.family != Family::Random;
    let value = |r: &SweepRow| r.metric(metric).expect("checked in curves");

    let mut crossings = Vec::new();
    let mut all_neg = true;
    let mut all_pos = true;
    let nt = c.thetas.len();
    let mut below = vec![true; nt];
    let mut above = vec![true; nt];
    for p in 0..c.distances.len() - 1 {
        let (lo, hi) = (&c.rows[p], &c.rows[p + 1]);
        let diff: Vec<f64> = (0..nt).map(|j| value(&hi[j]) - value(&lo[j])).collect();
        for j in 0..nt {
            below[j] &= diff[j] < 0.0;
            above[j] &= diff[j] > 0.0;
            all_neg &= diff[j] <= 0.0;
            all_pos &= diff[j] >= 0.0;
        }
        // Sign changes between consecutive nonzero differences.
        let nonzero: Vec<usize> = (0..nt).filter(|&j| diff[j] != 0.0).collect();
        for w in nonzero.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (diff[a] < 0.0) == (diff[b] < 0.0) {
                continue;
            }
            let (mut ta, mut tb) = (c.thetas[a], c.thetas[b]);
            let mut refined = false;
            if refine {
                let f = |t: f64| -> Result<f64, ExperimentError> {
                    let h = source.rows(hi[0].dx, hi[0].dz, &[t])?;
                    let l = source.rows(lo[0].dx, lo[0].dz, &[t])?;
                    Ok(value(&h[0]) - value(&l[0]))
                };
                let sa = diff[a] < 0.0;
                while tb - ta > REFINE_TOLERANCE {
                    let mid = 0.5 * (ta + tb);
                    let fm = f(mid)?;
                    if fm == 0.0 {
                        ta = mid;
                        tb = mid;
                        break;
                    }
                    if (fm < 0.0) == sa {
                        ta = mid;
                    } else {
                        tb = mid;
                    }
                }
                refined = true;
            }
            crossings.push(PairCrossing {
                d_lo: c.distances[p],
                d_hi: c.distances[p + 1],
                lower_over_pi: ta,
                upper_over_pi: tb,
                refined,
            });
        }
    }

    let (lower, upper, one_sided) = if crossings.is_empty() {
        let (first_t, last_t) = (c.thetas[0], c.thetas[nt - 1]);
        match (all_neg, all_pos) {
            (true, false) => (Some(last_t), None, true),
            (false, true) => (None, Some(first_t), true),
            _ => (None, None, true),
        }
    } else {
        let lo = crossings.iter().map(|x| x.lower_over_pi).fold(f64::INFINITY, f64::min);
        let hi = crossings.iter().map(|x| x.upper_over_pi).fold(f64::NEG_INFINITY, f64::max);
        (Some(lo), Some(hi), false)
    };

    Ok(ThresholdEstimate {
        family: first.family.clone(),
        h: first.h,
        metric,
        distances: c.distances,
        crossings,
        lower_over_pi: lower,
        upper_over_pi: upper,
        one_sided,
        clearly_below_over_pi: (0..nt).rev().find(|&j| below[j]).map(|j| c.thetas[j]),
        clearly_above_over_pi: (0..nt).find(|&j| above[j]).map(|j| c.thetas[j]),
    })
}

/// [`find_crossings`] for every series in a table.
pub fn find_crossings_by_series(table: &SweepTable, metric: Metric) -> Result<Vec<ThresholdEstimate>, ExperimentError> {
    table.series().iter().map(|t| find_crossings(t, metric)).collect()
}
