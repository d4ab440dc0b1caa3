//! Evaluating a source over angles and distances.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::ensemble::{ensemble_sweep, EnsembleParams};
use super::{ExperimentError, Family, FamilyId, Provenance, SweepRow, SweepTable};
use crate::analytic_families::{
    repetition_diamond, repetition_exact, wrap_angle, x_shor_channel, z_shor_channel, z_stacked_channel,
};
use crate::code_model::{
    build_code, family_rotated_surface, family_x_shor, family_z_shor, family_z_stacked, Coloring,
};
use crate::exact_backend::{ExactEnumerator, Recovery};
use crate::pauli_channel::LogicalPTM;

/// How channels are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    /// Closed-form sums (rep, zshor, xshor, zstacked).
    Analytic,
    /// Full enumeration of a single code per distance.
    Exact,
    /// Random colorings (family `random` only).
    Ensemble(EnsembleParams),
}

/// A series of codes indexed by distance `dz`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Source {
    pub family: Family,
    /// Fixed `d_x`; `None` means square codes (`d_x = dz`). Ignored for `rep`.
    pub dx: Option<usize>,
    /// Block height, required for `zstacked` and rejected otherwise.
    pub h: Option<usize>,
    pub recovery: Recovery,
    pub backend: Backend,
}

impl Source {
    pub fn analytic(family: Family) -> Self {
        Source {
            family,
            dx: None,
            h: None,
            recovery: Recovery::MinWeight,
            backend: Backend::Analytic,
        }
    }

    pub fn exact(family: Family) -> Self {
        Source {
            backend: Backend::Exact,
            ..Self::analytic(family)
        }
    }

    pub fn ensemble(params: EnsembleParams) -> Self {
        Source {
            recovery: params.recovery,
            backend: Backend::Ensemble(params),
            ..Self::analytic(Family::Random)
        }
    }

    pub fn with_h(mut self, h: usize) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_dx(mut self, dx: usize) -> Self {
        self.dx = Some(dx);
        self
    }

    pub fn with_recovery(mut self, recovery: Recovery) -> Self {
        self.recovery = recovery;
        if let Backend::Ensemble(p) = &mut self.backend {
            p.recovery = recovery;
        }
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Invalid(m.to_string()));
        match (self.family, self.h) {
            (Family::ZStacked, None) => return bad("zstacked needs a block height h"),
            (Family::ZStacked, Some(_)) => {}
            (_, Some(_)) => return bad("h is only meaningful for zstacked"),
            _ => {}
        }
        if self.dx.is_some() && matches!(self.family, Family::ZStacked | Family::RotatedSurface | Family::Repetition) {
            return bad("dx is fixed by the family for rep, zstacked and rsc");
        }
        match self.backend {
            Backend::Analytic => {
                if matches!(self.family, Family::RotatedSurface | Family::Random) {
                    return bad("no closed form for rsc or random codes; use the exact backend or an ensemble");
                }
            }
            Backend::Exact => {
                if self.family == Family::Random {
                    return bad("random codes are evaluated as ensembles");
                }
            }
            Backend::Ensemble(p) => {
                if self.family != Family::Random {
                    return bad("ensembles are only defined for random codes");
                }
                p.validate()?;
            }
        }
        Ok(())
    }

    /// Row label.
    pub fn family_id(&self) -> FamilyId {
        FamilyId {
            family: self.family,
            q_shor: match self.backend {
                Backend::Ensemble(p) => Some(p.q_shor),
                _ => None,
            },
            recovery: self.recovery,
        }
    }

    /// `d_x` used at distance `dz`.
    pub fn dx_for(&self, dz: usize) -> usize {
        match self.family {
            Family::Repetition => 1,
            _ => self.dx.unwrap_or(dz),
        }
    }

    /// Rebuilds the source that produced a row.
    pub fn from_row(row: &SweepRow) -> Result<Self, ExperimentError> {
        let id = row.family_id()?;
        let backend = match (id.family, row.provenance) {
            (Family::Random, _) => Backend::Ensemble(EnsembleParams {
                q_shor: id
                    .q_shor
                    .ok_or_else(|| ExperimentError::Table("random rows need a q_shor label".into()))?,
                n_codes: row.n_codes.unwrap_or(1),
                n_samples: row.n_samples.unwrap_or(0),
                seed: row.seed.unwrap_or(0),
                recovery: id.recovery,
            }),
            (_, Provenance::Analytic) => Backend::Analytic,
            (_, Provenance::Exact) => Backend::Exact,
            (_, Provenance::Sampled) => {
                return Err(ExperimentError::Table("sampled rows must be random ensembles".into()))
            }
        };
        let fixed_dx = match id.family {
            Family::Repetition | Family::ZStacked | Family::RotatedSurface | Family::Random => None,
            _ => Some(row.dx),
        };
        Ok(Source {
            family: id.family,
            dx: fixed_dx,
            h: row.h,
            recovery: id.recovery,
            backend,
        })
    }

    fn coloring(&self, dx: usize, dz: usize) -> Result<Coloring, ExperimentError> {
        Ok(match self.family {
            Family::Repetition => family_z_shor(1, dz)?,
            Family::ZShor => family_z_shor(dx, dz)?,
            Family::XShor => family_x_shor(dx, dz)?,
            Family::ZStacked => family_z_stacked(dz, self.h.unwrap_or(0))?,
            Family::RotatedSurface => family_rotated_surface(dz)?,
            Family::Random => return Err(ExperimentError::Invalid("random codes have no single coloring".into())),
        })
    }

    /// Rows for one code size at the given angles (in units of π).
    pub fn rows(&self, dx: usize, dz: usize, thetas_over_pi: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
        self.validate()?;
        let label = self.family_id().to_string();
        let base = |t: f64, prov: Provenance, ptm: LogicalPTM, q: Option<f64>| SweepRow {
            family: label.clone(),
            dx,
            dz,
            h: self.h,
            q_shor: q,
            seed: None,
            theta_over_pi: t,
            provenance: prov,
            epsilon: ptm.epsilon,
            delta: ptm.delta,
            kappa: ptm.coherence(),
            r1: ptm.r1(),
            r1_stderr: None,
            diamond: None,
            diamond_stderr: None,
            n_codes: None,
            n_samples: None,
        };
        match self.backend {
            Backend::Analytic => {
                let q = self.coloring(dx, dz)?.x_cut_fraction();
                thetas_over_pi
                    .iter()
                    .map(|&t| {
                        let theta = t * PI;
                        let (ptm, diamond) = match self.family {
                            Family::Repetition => (
                                repetition_exact(dz, theta, self.recovery)?,
                                Some(repetition_diamond(dz, theta, self.recovery)?),
                            ),
                            Family::ZShor => (
                                z_shor_channel(dx, dz, theta, self.recovery)?,
                                Some(repetition_diamond(dz, wrap_angle(dx as f64 * theta), self.recovery)?),
                            ),
                            Family::XShor => {
                                self.require_min_weight()?;
                                (x_shor_channel(dx, dz, theta)?, None)
                            }
                            Family::ZStacked => {
                                self.require_min_weight()?;
                                (z_stacked_channel(dz, self.h.unwrap_or(0), theta)?, None)
                            }
                            _ => unreachable!("validated"),
                        };
                        let mut row = base(t, Provenance::Analytic, ptm, q);
                        row.diamond = diamond;
                        Ok(row)
                    })
                    .collect()
            }
            Backend::Exact => {
                let coloring = self.coloring(dx, dz)?;
                let q = coloring.x_cut_fraction();
                let e = ExactEnumerator::new(&build_code(&coloring))?;
                let thetas: Vec<f64> = thetas_over_pi.iter().map(|t| t * PI).collect();
                Ok(e.summaries(&thetas, self.recovery)
                    .into_iter()
                    .zip(thetas_over_pi)
                    .map(|(s, &t)| {
                        let mut row = base(t, Provenance::Exact, s.ptm, q);
                        row.diamond = Some(s.diamond);
                        row
                    })
                    .collect())
            }
            Backend::Ensemble(p) => {
                let thetas: Vec<f64> = thetas_over_pi.iter().map(|t| t * PI).collect();
                let est = ensemble_sweep(dx, dz, &p, &thetas)?;
                Ok(est
                    .into_iter()
                    .zip(thetas_over_pi)
                    .map(|(e, &t)| {
                        let ptm = LogicalPTM::new(e.epsilon, e.delta);
                        let prov = if p.n_samples > 0 { Provenance::Sampled } else { Provenance::Exact };
                        let mut row = base(t, prov, ptm, e.realized_q_shor);
                        row.r1 = e.r1.mean;
                        row.r1_stderr = Some(e.r1.stderr);
                        row.diamond = Some(e.diamond.mean);
                        row.diamond_stderr = Some(e.diamond.stderr);
                        row.seed = Some(p.seed);
                        row.n_codes = Some(p.n_codes);
                        row.n_samples = Some(p.n_samples);
                        row
                    })
                    .collect())
            }
        }
    }

    fn require_min_weight(&self) -> Result<(), ExperimentError> {
        if self.recovery != Recovery::MinWeight {
            return Err(ExperimentError::Invalid(format!(
                "{} channels are only available under minimum-weight recovery",
                self.family
            )));
        }
        Ok(())
    }
}

/// Evaluates `source` at every `(distance, θ/π)` pair. Distances are `dz`
/// values; `d_x` follows [`Source::dx_for`].
pub fn sweep(source: &Source, thetas_over_pi: &[f64], distances: &[usize]) -> Result<SweepTable, ExperimentError> {
    if thetas_over_pi.is_empty() {
        return Err(ExperimentError::Invalid("empty angle grid".into()));
    }
    if distances.is_empty() {
        return Err(ExperimentError::Invalid("empty distance list".into()));
    }
    source.validate()?;
    let parts: Vec<Vec<SweepRow>> = distances
        .par_iter()
        .map(|&d| source.rows(source.dx_for(d), d, thetas_over_pi))
        .collect::<Result<_, _>>()?;
    SweepTable::new(parts.into_iter().flatten().collect())
}

/// Parses `A:B:STEP` (inclusive of `B` up to rounding) or a comma list.
/// Values are rounded to 12 decimals so that grids print cleanly.
pub fn parse_theta_grid(s: &str) -> Result<Vec<f64>, ExperimentError> {
    let bad = |m: String| ExperimentError::Invalid(m);
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| bad(format!("bad number {x:?}: {e}")));
    let round = |x: f64| (x * 1e12).round() / 1e12;
    let parts: Vec<&str> = s.split(':').collect();
    let grid: Vec<f64> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(bad(format!("grid {s:?} needs A <= B and STEP > 0")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| round(a + i as f64 * step)).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad(format!("cannot parse angle grid {s:?}"))),
    };
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(bad("angles must be finite".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("angles must be strictly increasing".into()));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_theta_grid("0.05:0.45:0.05").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[8], 0.45);
        assert_eq!(parse_theta_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_theta_grid("0.2,0.1").is_err());
        assert!(parse_theta_grid("0:1:0").is_err());
        assert!(parse_theta_grid("a").is_err());
    }

    #[test]
    fn analytic_and_exact_agree() {
        let thetas = [0.1, 0.2, 0.3];
        let a = sweep(&Source::analytic(Family::ZShor), &thetas, &[3]).unwrap();
        let e = sweep(&Source::exact(Family::ZShor), &thetas, &[3]).unwrap();
        for (x, y) in a.rows.iter().zip(&e.rows) {
            assert!((x.epsilon - y.epsilon).abs() < 1e-12);
            assert!((x.diamond.unwrap() - y.diamond.unwrap()).abs() < 1e-12);
        }
        assert_eq!(Source::from_row(&a.rows[0]).unwrap(), Source::analytic(Family::ZShor).with_dx(3));
    }

    #[test]
    fn invalid_sources() {
        assert!(Source::analytic(Family::RotatedSurface).validate().is_err());
        assert!(Source::analytic(Family::ZStacked).validate().is_err());
        assert!(Source::analytic(Family::ZShor).with_h(2).validate().is_err());
        assert!(sweep(&Source::analytic(Family::Repetition), &[], &[3]).is_err());
        let ml = Source::analytic(Family::XShor).with_recovery(Recovery::Ml);
        assert!(sweep(&ml, &[0.1], &[3]).is_err());
        let big = sweep(&Source::exact(Family::ZShor), &[0.1], &[7]);
        assert!(matches!(big, Err(ExperimentError::Exact(_))));
    }
}
