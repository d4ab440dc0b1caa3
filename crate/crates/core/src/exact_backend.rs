//! Exact syndrome distribution of a code under uniform Z-rotation.
//!
//! The rotation `U = Π_q exp(-i θ/2 Z_q)` expands as `Σ_v c_v Z(v)` with
//! `c_v = cos(θ/2)^(n-|v|) · (-i sin(θ/2))^|v|`. For syndrome `s` and recovery
//! `h_s` the post-recovery logical operator is `A0 · I + A1 · Z̄`, where `A0`
//! sums `c_v` over the coset `h_s S_Z` and `A1` over `h_s Z̄ S_Z`. That is a
//! logical rotation by
//!
//! ```text
//! θ_s = 2 atan2(σ |A1|, |A0|),  σ = sign(i A1 conj(A0)),
//! ```
//!
//! occurring with probability `p_s = |A0|² + |A1|²`.
//!
//! The enumeration walks every syndrome in Gray-code order (one pure error per
//! generator), and inside each syndrome every element of both cosets, so the
//! total work is `2^n` popcounts. Both cosets of a syndrome are told apart by
//! their overlap parity with logical `X`: `v` and `h_s` differ by an element of
//! `S_Z` exactly when they have the same parity.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{validate, CompassCode};
use crate::decoder::{DecodeError, MatchingGraph, MinWeightTable, Syndrome};
use crate::f2;
use crate::pauli_channel::LogicalPTM;

/// Largest code the enumeration accepts.
pub const MAX_EXACT_QUBITS: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("code has {n} qubits, exact enumeration is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("code failed validation: {0}")]
    InvalidCode(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Which correction is applied for each syndrome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recovery {
    /// Minimum-weight matching.
    #[default]
    MinWeight,
    /// The more likely of the two logical classes. Ties keep the
    /// minimum-weight choice.
    Ml,
}

impl fmt::Display for Recovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recovery::MinWeight => "minweight",
            Recovery::Ml => "ml",
        })
    }
}

impl FromStr for Recovery {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minweight" | "mwpm" => Ok(Recovery::MinWeight),
            "ml" => Ok(Recovery::Ml),
            _ => Err(format!("unknown recovery {s:?}, expected minweight or ml")),
        }
    }
}

/// One syndrome with nonzero probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyndromeEntry {
    pub syndrome: Syndrome,
    pub p: f64,
    /// Logical rotation angle in `(-π, π]`.
    pub theta_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyndromeDistribution {
    pub theta: f64,
    pub recovery: Recovery,
    pub entries: Vec<SyndromeEntry>,
}

impl SyndromeDistribution {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    /// Syndrome-averaged logical channel.
    pub fn channel(&self) -> LogicalPTM {
        let (mut e, mut d) = (0.0, 0.0);
        for x in &self.entries {
            e += x.p * (1.0 - x.theta_s.cos());
            d += x.p * x.theta_s.sin();
        }
        LogicalPTM::new(e, d)
    }

    pub fn diamond(&self) -> f64 {
        crate::pauli_channel::diamond_average(self.entries.iter().map(|e| (e.p, e.theta_s)))
    }
}

/// Channel-level results of one enumeration at one angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub theta: f64,
    pub ptm: LogicalPTM,
    /// `Σ_s p_s · 2|sin θ_s|`.
    pub diamond: f64,
    pub total_probability: f64,
}

/// Per-syndrome logical rotation derived from the two coset amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    pub p: f64,
    pub theta_s: f64,
    /// `p (1 - cos θ_s)`, computed without cancellation.
    pub eps: f64,
    /// `p sin θ_s`.
    pub delta: f64,
    /// `p · 2|sin θ_s|`.
    pub diamond: f64,
}

/// Turns the identity and flip amplitudes under minimum-weight recovery into
/// a logical rotation under `recovery`.
pub fn resolve(a0: Complex64, a1: Complex64, recovery: Recovery) -> Resolved {
    let (mut m0, mut m1) = (a0.norm(), a1.norm());
    // sign(i A1 conj(A0)) = sign(-Im(A1 conj(A0)))
    let mut sign = if (a1 * a0.conj()).im > 0.0 { -1.0 } else { 1.0 };
    if recovery == Recovery::Ml && m1 > m0 {
        std::mem::swap(&mut m0, &mut m1);
        sign = -sign;
    }
    let p = m0 * m0 + m1 * m1;
    // With A0 = 0 this gives exactly π.
    let theta_s = 2.0 * (sign * m1).atan2(m0);
    Resolved {
        p,
        theta_s,
        eps: 2.0 * m1 * m1,
        delta: 2.0 * sign * m0 * m1,
        diamond: 4.0 * m0 * m1,
    }
}

/// Precomputed `cos(θ/2)^(n-w) sin(θ/2)^w` for every weight `w`.
struct Weights(Vec<f64>);

impl Weights {
    fn new(n: usize, theta: f64) -> Self {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        Weights((0..=n).map(|w| c.powi((n - w) as i32) * s.powi(w as i32)).collect())
    }

    /// `Σ_w hist[w] · weight_w · (-i)^w`.
    fn amplitude(&self, hist: &[u32]) -> Complex64 {
        let mut acc = [0.0f64; 4];
        for (w, (&h, &x)) in hist.iter().zip(&self.0).enumerate() {
            acc[w & 3] += h as f64 * x;
        }
        Complex64::new(acc[0] - acc[2], acc[3] - acc[1])
    }
}

/// Reusable enumeration state for one code.
pub struct ExactEnumerator {
    n: usize,
    m: usize,
    pure: Vec<u64>,
    stabs: Vec<u64>,
    zbar: u64,
    xbar: u64,
    table: MinWeightTable,
}

/// Number of chunks is `2^CHUNK_BITS` (fewer for small codes); fixed so that
/// results do not depend on the thread count.
const CHUNK_BITS: usize = 8;

impl ExactEnumerator {
    pub fn new(code: &CompassCode) -> Result<Self, ExactError> {
        let n = code.n_qubits();
        if n > MAX_EXACT_QUBITS {
            return Err(ExactError::TooLarge {
                n,
                limit: MAX_EXACT_QUBITS,
            });
        }
        let report = validate(code);
        if let Some(bad) = report.failures().next() {
            return Err(ExactError::InvalidCode(format!("{}: {}", bad.name, bad.detail)));
        }
        let rows: Vec<_> = code.x_stabilizers.iter().map(|s| s.support.clone()).collect();
        let pure = f2::pure_errors(&rows, n)
            .ok_or_else(|| ExactError::InvalidCode("dependent X generators".into()))?;
        let graph = MatchingGraph::new(code)?;
        let table = graph.min_weight_table(&code.logical_x)?;
        let mask = |b: &crate::code_model::Bits| b.iter_ones().fold(0u64, |a, q| a | 1 << q);
        Ok(ExactEnumerator {
            n,
            m: rows.len(),
            pure: pure.iter().map(mask).collect(),
            stabs: code.z_stabilizers.iter().map(|s| mask(&s.support)).collect(),
            zbar: code.logical_z.to_mask(),
            xbar: code.logical_x.to_mask(),
            table,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn n_syndromes(&self) -> u64 {
        1 << self.m
    }

    fn chunks(&self) -> (usize, usize) {
        let bits = self.m.min(CHUNK_BITS);
        (1 << bits, 1 << (self.m - bits))
    }

    fn histogram(&self, base: u64, hist: &mut [u32]) {
        hist.fill(0);
        let mut v = base;
        hist[v.count_ones() as usize] += 1;
        for i in 1u64..1 << self.stabs.len() {
            v ^= self.stabs[i.trailing_zeros() as usize];
            hist[v.count_ones() as usize] += 1;
        }
    }

    /// Calls `visit(g, id_hist, flip_hist)` for every syndrome index `g` in
    /// chunk `chunk`, where the histograms count coset elements by weight for
    /// the minimum-weight identity and flip classes.
    fn scan_chunk(&self, chunk: usize, mut visit: impl FnMut(u64, &[u32], &[u32])) {
        let (_, size) = self.chunks();
        let start = (chunk * size) as u64;
        let mut g = start ^ (start >> 1);
        let mut r = (0..self.m)
            .filter(|j| g >> j & 1 == 1)
            .fold(0u64, |a, j| a ^ self.pure[j]);
        let mut h0 = vec![0u32; self.n + 1];
        let mut h1 = vec![0u32; self.n + 1];
        for sigma in start..start + size as u64 {
            if sigma > start {
                let j = sigma.trailing_zeros() as usize;
                g ^= 1 << j;
                r ^= self.pure[j];
            }
            let same = ((r & self.xbar).count_ones() % 2 == 1) == self.table.parity(g as usize);
            let (id, flip) = if same { (r, r ^ self.zbar) } else { (r ^ self.zbar, r) };
            self.histogram(id, &mut h0);
            self.histogram(flip, &mut h1);
            visit(g, &h0, &h1);
        }
    }

    /// Minimum-weight coset amplitudes `(syndrome index, A0, A1)` at one angle,
    /// in syndrome-index order.
    pub fn amplitudes(&self, theta: f64) -> Vec<(u64, Complex64, Complex64)> {
        let w = Weights::new(self.n, theta);
        let (count, _) = self.chunks();
        let mut out: Vec<_> = (0..count)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut part = Vec::new();
                self.scan_chunk(c, |g, h0, h1| part.push((g, w.amplitude(h0), w.amplitude(h1))));
                part
            })
            .collect();
        out.sort_by_key(|x| x.0);
        out
    }

    /// Full distribution at one angle, syndromes in index order. Syndromes
    /// with probability exactly zero are omitted.
    pub fn distribution(&self, theta: f64, recovery: Recovery) -> SyndromeDistribution {
        let entries = self
            .amplitudes(theta)
            .into_iter()
            .filter_map(|(g, a0, a1)| {
                let r = resolve(a0, a1, recovery);
                (r.p > 0.0).then(|| SyndromeEntry {
                    syndrome: Syndrome::from_index(g, self.m),
                    p: r.p,
                    theta_s: r.theta_s,
                })
            })
            .collect();
        SyndromeDistribution {
            theta,
            recovery,
            entries,
        }
    }

    /// Per-chunk sums for every angle, reduced in chunk order.
    fn chunk_sums(&self, weights: &[Weights], recovery: Recovery) -> Vec<Vec<[f64; 4]>> {
        let (count, _) = self.chunks();
        (0..count)
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![[0.0f64; 4]; weights.len()];
                self.scan_chunk(c, |_, h0, h1| {
                    for (a, w) in acc.iter_mut().zip(weights) {
                        let r = resolve(w.amplitude(h0), w.amplitude(h1), recovery);
                        a[0] += r.eps;
                        a[1] += r.delta;
                        a[2] += r.diamond;
                        a[3] += r.p;
                    }
                });
                acc
            })
            .collect()
    }

    /// Logical channel and diamond average at several angles in one pass.
    pub fn summaries(&self, thetas: &[f64], recovery: Recovery) -> Vec<ChannelSummary> {
        let weights: Vec<_> = thetas.iter().map(|&t| Weights::new(self.n, t)).collect();
        let sums = self.chunk_sums(&weights, recovery);
        thetas
            .iter()
            .enumerate()
            .map(|(i, &theta)| {
                let mut t = [0.0f64; 4];
                for chunk in &sums {
                    for k in 0..4 {
                        t[k] += chunk[i][k];
                    }
                }
                ChannelSummary {
                    theta,
                    ptm: LogicalPTM::new(t[0], t[1]),
                    diamond: t[2],
                    total_probability: t[3],
                }
            })
            .collect()
    }

    /// Draws logical angles `θ_s` by inverse transform sampling without
    /// storing the distribution. `uniforms[t]` holds draws in `[0, 1)` for
    /// `thetas[t]`; the result has the same shape and order.
    pub fn sample_angles(&self, thetas: &[f64], recovery: Recovery, uniforms: &[Vec<f64>]) -> (Vec<ChannelSummary>, Vec<Vec<f64>>) {
        assert_eq!(thetas.len(), uniforms.len());
        let weights: Vec<_> = thetas.iter().map(|&t| Weights::new(self.n, t)).collect();
        let sums = self.chunk_sums(&weights, recovery);
        let (count, _) = self.chunks();

        // Cumulative probability at the start of every chunk, per angle.
        let mut starts = vec![vec![0.0f64; count + 1]; thetas.len()];
        for (t, st) in starts.iter_mut().enumerate() {
            for c in 0..count {
                st[c + 1] = st[c] + sums[c][t][3];
            }
        }
        // Targets per chunk: (angle, draw index, cumulative target).
        let mut targets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); count];
        for (t, us) in uniforms.iter().enumerate() {
            let total = starts[t][count];
            for (k, &u) in us.iter().enumerate() {
                let x = u * total;
                let c = starts[t][1..].partition_point(|&s| s <= x).min(count - 1);
                targets[c].push((t, k, x));
            }
        }
        for tg in &mut targets {
            tg.sort_by(|a, b| (a.0, a.2).partial_cmp(&(b.0, b.2)).expect("finite targets"));
        }

        let hits: Vec<Vec<(usize, usize, f64)>> = (0..count)
            .into_par_iter()
            .map(|c| {
                let tg = &targets[c];
                let mut out = Vec::with_capacity(tg.len());
                if tg.is_empty() {
                    return out;
                }
                let mut acc: Vec<f64> = (0..thetas.len()).map(|t| starts[t][c]).collect();
                let mut last = vec![None::<f64>; thetas.len()];
                let mut cursor: Vec<usize> = (0..thetas.len())
                    .map(|t| tg.partition_point(|x| x.0 < t))
                    .collect();
                let ends: Vec<usize> = (0..thetas.len()).map(|t| tg.partition_point(|x| x.0 <= t)).collect();
                self.scan_chunk(c, |_, h0, h1| {
                    for t in 0..thetas.len() {
                        if cursor[t] == ends[t] {
                            continue;
                        }
                        let w = &weights[t];
                        let r = resolve(w.amplitude(h0), w.amplitude(h1), recovery);
                        if r.p == 0.0 {
                            continue;
                        }
                        acc[t] += r.p;
                        last[t] = Some(r.theta_s);
                        while cursor[t] < ends[t] && tg[cursor[t]].2 < acc[t] {
                            out.push((t, tg[cursor[t]].1, r.theta_s));
                            cursor[t] += 1;
                        }
                    }
                });
                // Rounding can leave targets just past the running sum.
                for t in 0..thetas.len() {
                    while cursor[t] < ends[t] {
                        let theta_s = last[t].expect("chunk with targets has positive mass");
                        out.push((t, tg[cursor[t]].1, theta_s));
                        cursor[t] += 1;
                    }
                }
                out
            })
            .collect();

        let mut samples: Vec<Vec<f64>> = uniforms.iter().map(|u| vec![0.0; u.len()]).collect();
        for (t, k, theta_s) in hits.into_iter().flatten() {
            samples[t][k] = theta_s;
        }
        let summaries = thetas
            .iter()
            .enumerate()
            .map(|(i, &theta)| {
                let mut t = [0.0f64; 4];
                for chunk in &sums {
                    for k in 0..4 {
                        t[k] += chunk[i][k];
                    }
                }
                ChannelSummary {
                    theta,
                    ptm: LogicalPTM::new(t[0], t[1]),
                    diamond: t[2],
                    total_probability: t[3],
                }
            })
            .collect();
        (summaries, samples)
    }
}

/// Exact syndrome distribution of `code` at angle `theta`.
pub fn syndrome_distribution(code: &CompassCode, theta: f64, recovery: Recovery) -> Result<SyndromeDistribution, ExactError> {
    Ok(ExactEnumerator::new(code)?.distribution(theta, recovery))
}

/// Exact logical channel of `code` at angle `theta`.
pub fn logical_channel(code: &CompassCode, theta: f64, recovery: Recovery) -> Result<LogicalPTM, ExactError> {
    Ok(ExactEnumerator::new(code)?.summaries(&[theta], recovery)[0].ptm)
}
