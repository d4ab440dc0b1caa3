//! Logical channels of repetition-based families at arbitrary distance.
//!
//! Everything reduces to the length-`l` repetition code. Its syndromes group
//! into classes by the weight `w ≤ (l-1)/2` of the lighter of the two
//! consistent errors; class `w` holds `C(l, w)` syndromes, each with
//! amplitudes `|A0| = |c|^(l-w) |s|^w` and `|A1| = |c|^w |s|^(l-w)` for
//! `c = cos(θ/2)`, `s = sin(θ/2)`, and with the sign of `i A1 conj(A0)` equal
//! to `sign(c s) · (-1)^(w + (l-1)/2)`. Sums run in the log domain.
//!
//! Stacking `d_x` copies along Z-type pairs zips the rotation into one chain
//! at angle `d_x θ`; gluing copies along X-type pairs composes their channels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_backend::Recovery;
use crate::pauli_channel::LogicalPTM;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("distance must be odd and positive, got {0}")]
    BadDistance(usize),
    #[error("d_x must be positive")]
    ZeroWidth,
    #[error("block height must satisfy 1 <= h <= l, got h={h} for l={l}")]
    BadHeight { l: usize, h: usize },
    #[error("the large-distance approximation needs |θ| < π/2, got {0}")]
    OutsideValidity(f64),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyKind {
    #[serde(rename = "rep")]
    Repetition { l: usize },
    ZShor { d_x: usize, d_z: usize },
    XShor { d_x: usize, d_z: usize },
    ZStacked { l: usize, h: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub recovery: Recovery,
}

/// Coherence and infidelity thresholds, equal for every family here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub theta_th: f64,
    pub theta_th_r1: f64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, recovery: Recovery) -> Self {
        FamilySpec { kind, recovery }
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        match self.kind {
            FamilyKind::Repetition { l } => check_l(l),
            FamilyKind::ZShor { d_x, d_z } | FamilyKind::XShor { d_x, d_z } => {
                check_l(d_z)?;
                if d_x == 0 {
                    return Err(AnalyticError::ZeroWidth);
                }
                Ok(())
            }
            FamilyKind::ZStacked { l, h } => {
                check_l(l)?;
                check_h(l, h)
            }
        }
    }

    fn require_min_weight(&self, what: &str) -> Result<(), AnalyticError> {
        if self.recovery != Recovery::MinWeight {
            return Err(AnalyticError::Unsupported(format!(
                "{what} is only available under minimum-weight recovery"
            )));
        }
        Ok(())
    }

    /// Logical channel at angle `theta`.
    pub fn channel(&self, theta: f64) -> Result<LogicalPTM, AnalyticError> {
        match self.kind {
            FamilyKind::Repetition { l } => repetition_exact(l, theta, self.recovery),
            FamilyKind::ZShor { d_x, d_z } => z_shor_channel(d_x, d_z, theta, self.recovery),
            FamilyKind::XShor { d_x, d_z } => {
                self.require_min_weight("the X-Shor channel")?;
                x_shor_channel(d_x, d_z, theta)
            }
            FamilyKind::ZStacked { l, h } => {
                self.require_min_weight("the stacked channel")?;
                z_stacked_channel(l, h, theta)
            }
        }
    }
}

fn check_l(l: usize) -> Result<(), AnalyticError> {
    if l == 0 || l.is_multiple_of(2) {
        return Err(AnalyticError::BadDistance(l));
    }
    Ok(())
}

fn check_h(l: usize, h: usize) -> Result<(), AnalyticError> {
    if h == 0 || h > l {
        return Err(AnalyticError::BadHeight { l, h });
    }
    Ok(())
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// `k · ln x`, taking `0 · ln 0 = 0`.
fn klog(k: usize, ln: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: usize) -> f64 {
    // Exact summation is cheap at the distances used here and avoids a
    // gamma-function dependency.
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Running log-sum-exp.
#[derive(Clone, Copy)]
struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, ln: f64) {
        if ln == f64::NEG_INFINITY {
            return;
        }
        if ln > self.max {
            self.scaled = self.scaled * (self.max - ln).exp() + 1.0;
            self.max = ln;
        } else {
            self.scaled += (ln - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            0.0
        } else {
            self.scaled * self.max.exp()
        }
    }
}

/// One class of repetition-code syndromes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepetitionClass {
    /// Weight of the lighter consistent error.
    pub weight: usize,
    /// `ln C(l, w)`: the class holds this many syndromes.
    pub ln_multiplicity: f64,
    /// Probability of each syndrome in the class.
    pub p: f64,
    /// Logical angle of each syndrome in the class.
    pub theta_s: f64,
}

/// Per-class log amplitudes `(ln|A0|, ln|A1|, sign)` after applying `recovery`.
fn class_terms(l: usize, theta: f64, recovery: Recovery) -> Vec<(usize, f64, f64, f64, f64)> {
    let theta = wrap_angle(theta);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (lc, ls) = (c.abs().ln(), s.abs().ln());
    let base_sign = if c * s < 0.0 { -1.0 } else { 1.0 };
    let half = (l - 1) / 2;
    (0..=half)
        .map(|w| {
            let mut a0 = klog(l - w, lc) + klog(w, ls);
            let mut a1 = klog(w, lc) + klog(l - w, ls);
            let mut sign = base_sign * if (w + half).is_multiple_of(2) { 1.0 } else { -1.0 };
            if recovery == Recovery::Ml && a1 > a0 {
                std::mem::swap(&mut a0, &mut a1);
                sign = -sign;
            }
            (w, ln_binomial(l, w), a0, a1, sign)
        })
        .collect()
}

/// Syndrome classes of the length-`l` repetition code.
pub fn repetition_classes(l: usize, theta: f64, recovery: Recovery) -> Result<Vec<RepetitionClass>, AnalyticError> {
    check_l(l)?;
    Ok(class_terms(l, theta, recovery)
        .into_iter()
        .map(|(w, lm, a0, a1, sign)| {
            let (m0, m1) = (a0.exp(), a1.exp());
            RepetitionClass {
                weight: w,
                ln_multiplicity: lm,
                p: m0 * m0 + m1 * m1,
                theta_s: 2.0 * (sign * m1).atan2(m0),
            }
        })
        .collect())
}

/// Exact channel of the length-`l` repetition code.
pub fn repetition_exact(l: usize, theta: f64, recovery: Recovery) -> Result<LogicalPTM, AnalyticError> {
    check_l(l)?;
    let mut eps = LogSum::new();
    let (mut pos, mut neg) = (LogSum::new(), LogSum::new());
    for (_, lm, a0, a1, sign) in class_terms(l, theta, recovery) {
        // p (1 - cos θ_s) = 2|A1|², p sin θ_s = 2 σ |A0||A1|
        eps.add(lm + 2.0 * a1);
        let d = lm + a0 + a1;
        if sign > 0.0 {
            pos.add(d)
        } else {
            neg.add(d)
        }
    }
    Ok(LogicalPTM::new(2.0 * eps.value(), 2.0 * (pos.value() - neg.value())))
}

/// Syndrome-averaged diamond distance of the repetition code.
pub fn repetition_diamond(l: usize, theta: f64, recovery: Recovery) -> Result<f64, AnalyticError> {
    check_l(l)?;
    let mut acc = LogSum::new();
    for (_, lm, a0, a1, _) in class_terms(l, theta, recovery) {
        acc.add(lm + a0 + a1);
    }
    Ok(4.0 * acc.value())
}

/// Large-distance approximation of the repetition channel,
/// `ε ≈ sqrt(2/(π l)) sin^(l+1) θ / cos θ`, `δ ≈ ε cos θ / sin θ`.
pub fn repetition_stirling(l: usize, theta: f64) -> Result<LogicalPTM, AnalyticError> {
    check_l(l)?;
    if theta.abs() >= PI / 2.0 {
        return Err(AnalyticError::OutsideValidity(theta));
    }
    let pre = (2.0 / (PI * l as f64)).sqrt();
    let eps = pre * theta.sin().powi(l as i32 + 1) / theta.cos();
    let delta = pre * theta.sin().powi(l as i32);
    Ok(LogicalPTM::new(eps, delta))
}

/// Z-Shor code: a repetition code rotated by the zipped angle `d_x θ`.
pub fn z_shor_channel(d_x: usize, d_z: usize, theta: f64, recovery: Recovery) -> Result<LogicalPTM, AnalyticError> {
    check_l(d_z)?;
    if d_x == 0 {
        return Err(AnalyticError::ZeroWidth);
    }
    repetition_exact(d_z, wrap_angle(d_x as f64 * theta), recovery)
}

/// X-Shor code: `d_x` repetition channels composed.
pub fn x_shor_channel(d_x: usize, d_z: usize, theta: f64) -> Result<LogicalPTM, AnalyticError> {
    check_l(d_z)?;
    if d_x == 0 {
        return Err(AnalyticError::ZeroWidth);
    }
    Ok(repetition_exact(d_z, theta, Recovery::MinWeight)?.power(d_x as u64))
}

/// Stacked code `C_{l,h}`: `⌊l/h⌋` zipped blocks at angle `hθ` and `l mod h`
/// single rows at angle `θ`, all composed.
pub fn z_stacked_channel(l: usize, h: usize, theta: f64) -> Result<LogicalPTM, AnalyticError> {
    check_l(l)?;
    check_h(l, h)?;
    let (blocks, rest) = (l / h, l % h);
    let block = repetition_exact(l, wrap_angle(h as f64 * theta), Recovery::MinWeight)?;
    let row = repetition_exact(l, theta, Recovery::MinWeight)?;
    Ok(block.power(blocks as u64).compose(&row.power(rest as u64)))
}

/// Angle below which the family suppresses logical noise with distance.
pub fn closed_form_threshold(family: &FamilySpec) -> Result<Thresholds, AnalyticError> {
    family.validate()?;
    let th = match family.kind {
        FamilyKind::Repetition { .. } => PI / 2.0,
        FamilyKind::ZShor { d_x, .. } => {
            family.require_min_weight("the Z-Shor threshold")?;
            PI / (2.0 * d_x as f64)
        }
        FamilyKind::XShor { .. } => {
            family.require_min_weight("the X-Shor threshold")?;
            PI / 2.0
        }
        FamilyKind::ZStacked { h, .. } => {
            family.require_min_weight("the stacked threshold")?;
            PI / (2.0 * h as f64)
        }
    };
    Ok(Thresholds {
        theta_th: th,
        theta_th_r1: th,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Direct sum over all `2^l` errors of the repetition chain.
    fn brute_rep(l: usize, theta: f64) -> LogicalPTM {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let full = (1u64 << l) - 1;
        let (mut e, mut d) = (0.0, 0.0);
        for v in 0u64..1 << l {
            let w = v.count_ones() as usize;
            if w > l / 2 {
                continue;
            }
            // v is the lighter representative; its complement is v ^ full.
            let wc = (v ^ full).count_ones() as usize;
            let a0 = num_complex::Complex64::new(0.0, -1.0).powi(w as i32) * c.powi((l - w) as i32) * s.powi(w as i32);
            let a1 = num_complex::Complex64::new(0.0, -1.0).powi(wc as i32) * c.powi(w as i32) * s.powi(wc as i32);
            let r = crate::exact_backend::resolve(a0, a1, Recovery::MinWeight);
            e += r.eps;
            d += r.delta;
        }
        LogicalPTM::new(e, d)
    }

    #[test]
    fn single_qubit() {
        let p = repetition_exact(1, 0.7, Recovery::MinWeight).unwrap();
        assert_relative_eq!(p.epsilon, 1.0 - 0.7f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(p.delta, 0.7f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn matches_brute_force_sum() {
        for l in [3, 5, 7, 9, 11] {
            for k in 1..20 {
                let theta = k as f64 * 0.15 - 1.5;
                let a = repetition_exact(l, theta, Recovery::MinWeight).unwrap();
                let b = brute_rep(l, theta);
                assert!((a.epsilon - b.epsilon).abs() < 1e-13, "l={l} θ={theta}");
                assert!((a.delta - b.delta).abs() < 1e-13, "l={l} θ={theta}");
            }
        }
    }

    #[test]
    fn closed_form_delta() {
        // δ = 2 (sin θ / 2)^l C(l-1, (l-1)/2) under minimum-weight recovery.
        for l in [3usize, 9, 31, 101] {
            let theta = 0.3 * PI;
            let want = 2.0 * ((theta.sin() / 2.0).ln() * l as f64 + ln_binomial(l - 1, (l - 1) / 2)).exp();
            let got = repetition_exact(l, theta, Recovery::MinWeight).unwrap().delta;
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn diamond_closed_form() {
        // Σ_w C(l,w) over the lower half is 2^(l-1), so the average is 2|sin θ|^l.
        for l in [1usize, 3, 7, 21] {
            let d = repetition_diamond(l, 0.4, Recovery::MinWeight).unwrap();
            assert_relative_eq!(d, 2.0 * 0.4f64.sin().powi(l as i32), max_relative = 1e-12);
        }
    }

    #[test]
    fn large_distance_is_finite() {
        for l in [501usize, 1001, 2001] {
            let p = repetition_exact(l, 0.45 * PI, Recovery::MinWeight).unwrap();
            assert!(p.epsilon.is_finite() && p.epsilon > 0.0);
            let q = repetition_exact(l, 0.55 * PI, Recovery::MinWeight).unwrap();
            assert!(q.epsilon.is_finite());
        }
        assert_eq!(repetition_exact(5, 0.0, Recovery::MinWeight).unwrap(), LogicalPTM::IDENTITY);
    }

    #[test]
    fn stirling_domain() {
        assert!(repetition_stirling(11, PI / 2.0).is_err());
        assert!(repetition_stirling(10, 0.2).is_err());
        assert!(repetition_stirling(11, 1e-9).unwrap().epsilon < 1e-90);
    }

    #[test]
    fn family_reductions() {
        let t = 0.21;
        let rep = repetition_exact(5, t, Recovery::MinWeight).unwrap();
        assert_eq!(z_shor_channel(1, 5, t, Recovery::MinWeight).unwrap(), rep);
        assert_eq!(x_shor_channel(1, 5, t).unwrap(), rep);
        let a = z_stacked_channel(7, 1, t).unwrap();
        let b = x_shor_channel(7, 7, t).unwrap();
        assert_relative_eq!(a.epsilon, b.epsilon, max_relative = 1e-12);
        let a = z_stacked_channel(7, 7, t).unwrap();
        let b = z_shor_channel(7, 7, t, Recovery::MinWeight).unwrap();
        assert_relative_eq!(a.epsilon, b.epsilon, max_relative = 1e-12);
        assert!(z_stacked_channel(7, 0, t).is_err());
        assert!(z_stacked_channel(7, 8, t).is_err());
    }

    #[test]
    fn thresholds() {
        let spec = |kind| FamilySpec::new(kind, Recovery::MinWeight);
        let th = |kind| closed_form_threshold(&spec(kind)).unwrap().theta_th;
        assert_eq!(th(FamilyKind::Repetition { l: 5 }), PI / 2.0);
        assert_eq!(th(FamilyKind::ZShor { d_x: 3, d_z: 3 }), PI / 6.0);
        assert_eq!(th(FamilyKind::XShor { d_x: 3, d_z: 3 }), PI / 2.0);
        assert_eq!(th(FamilyKind::ZStacked { l: 7, h: 2 }), PI / 4.0);
        assert_eq!(th(FamilyKind::ZStacked { l: 7, h: 3 }), PI / 6.0);
        let ml = FamilySpec::new(FamilyKind::XShor { d_x: 3, d_z: 3 }, Recovery::Ml);
        assert!(matches!(closed_form_threshold(&ml), Err(AnalyticError::Unsupported(_))));
    }

    #[test]
    fn wrapping() {
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn ml_never_worse(l in (0usize..15).prop_map(|k| 2 * k + 1), theta in -3.1..3.1f64) {
            let mw = repetition_exact(l, theta, Recovery::MinWeight).unwrap();
            let ml = repetition_exact(l, theta, Recovery::Ml).unwrap();
            prop_assert!(ml.epsilon <= mw.epsilon + 1e-12);
            if theta.abs() < PI / 2.0 - 1e-9 {
                prop_assert!((ml.epsilon - mw.epsilon).abs() < 1e-14);
            }
        }

        #[test]
        fn kappa_zips(d_x in 1usize..6, d_z in (0usize..6).prop_map(|k| 2 * k + 1), theta in 0.01..0.5f64) {
            let a = z_shor_channel(d_x, d_z, theta, Recovery::MinWeight).unwrap();
            let b = repetition_exact(d_z, wrap_angle(d_x as f64 * theta), Recovery::MinWeight).unwrap();
            prop_assert_eq!(a.coherence(), b.coherence());
        }

        #[test]
        fn stacked_channel_is_physical(l in (1usize..20).prop_map(|k| 2 * k + 1), h in 1usize..6, theta in -1.5..1.5f64) {
            prop_assume!(h <= l);
            let p = z_stacked_channel(l, h, theta).unwrap();
            let r2 = (1.0 - p.epsilon).powi(2) + p.delta.powi(2);
            prop_assert!(r2 <= 1.0 + 1e-12);
            prop_assert!(p.epsilon >= -1e-15);
        }
    }
}
