//! Logical channels of the form produced by Z-rotations with Pauli recovery.
//!
//! The channel fixes `Z` and acts on the `(X, Y)` plane as
//!
//! ```text
//! [[1 - ε,  -δ  ],
//!  [  δ,   1 - ε]]
//! ```
//!
//! which is multiplication by the complex number `1 - ε + iδ`. A single
//! rotation by `θ` has `ε = 1 - cos θ`, `δ = sin θ`.

use serde::{Deserialize, Serialize};

/// The `(X, Y)` block of a logical Pauli transfer matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalPTM {
    pub epsilon: f64,
    pub delta: f64,
}

/// Polar form: the block equals `exp(lam) · R(phi)`.
///
/// `lam = -inf` marks a channel that fully dephases the `(X, Y)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPTM {
    pub lam: f64,
    pub phi: f64,
}

impl LogicalPTM {
    pub const IDENTITY: LogicalPTM = LogicalPTM {
        epsilon: 0.0,
        delta: 0.0,
    };

    pub fn new(epsilon: f64, delta: f64) -> Self {
        LogicalPTM { epsilon, delta }
    }

    /// Channel of a single physical rotation `exp(-i θ/2 Z)`.
    pub fn rotation(theta: f64) -> Self {
        let h = (theta / 2.0).sin();
        LogicalPTM {
            epsilon: 2.0 * h * h,
            delta: theta.sin(),
        }
    }

    /// The 2x2 `(X, Y)` block, row-major.
    pub fn block(&self) -> [[f64; 2]; 2] {
        let a = 1.0 - self.epsilon;
        [[a, -self.delta], [self.delta, a]]
    }

    /// Full 4x4 PTM in the `(I, X, Y, Z)` basis.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let b = self.block();
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, b[0][0], b[0][1], 0.0],
            [0.0, b[1][0], b[1][1], 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    /// Apply `self` then `other`. Composition is commutative.
    pub fn compose(&self, other: &LogicalPTM) -> LogicalPTM {
        let (ea, da) = (self.epsilon, self.delta);
        let (eb, db) = (other.epsilon, other.delta);
        LogicalPTM {
            epsilon: ea + eb - ea * eb + da * db,
            delta: da * (1.0 - eb) + db * (1.0 - ea),
        }
    }

    pub fn to_polar(&self) -> PolarPTM {
        let (e, d) = (self.epsilon, self.delta);
        // |1 - ε + iδ|^2 = 1 - 2ε + ε² + δ²
        let lam = 0.5 * (-2.0 * e + e * e + d * d).ln_1p();
        PolarPTM {
            lam,
            phi: d.atan2(1.0 - e),
        }
    }

    pub fn from_polar(p: PolarPTM) -> Self {
        if p.lam == f64::NEG_INFINITY {
            return LogicalPTM {
                epsilon: 1.0,
                delta: 0.0,
            };
        }
        let r = p.lam.exp();
        let h = (p.phi / 2.0).sin();
        LogicalPTM {
            // 1 - r cos φ = (1 - r) + r (1 - cos φ)
            epsilon: -p.lam.exp_m1() + r * 2.0 * h * h,
            delta: r * p.phi.sin(),
        }
    }

    /// `m`-fold composition with itself.
    pub fn power(&self, m: u64) -> LogicalPTM {
        match m {
            0 => LogicalPTM::IDENTITY,
            1 => *self,
            _ => {
                let p = self.to_polar();
                LogicalPTM::from_polar(PolarPTM {
                    lam: p.lam * m as f64,
                    phi: p.phi * m as f64,
                })
            }
        }
    }

    /// Average infidelity of one round: `ε / 3`.
    pub fn r1(&self) -> f64 {
        self.epsilon / 3.0
    }

    /// `δ² / ε`; zero for the identity and infinite for a pure rotation of
    /// vanishing infidelity.
    pub fn coherence(&self) -> f64 {
        if self.epsilon == 0.0 {
            if self.delta == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.delta * self.delta / self.epsilon
        }
    }
}

/// Exact average infidelity after `m` rounds.
pub fn rm_exact(ptm: &LogicalPTM, m: u64) -> f64 {
    ptm.power(m).epsilon / 3.0
}

/// Second-order expansion of the `m`-round infidelity,
/// `m ε / 3 - m (m - 1) δ² / 6`.
pub fn rm_expansion(ptm: &LogicalPTM, m: u64) -> f64 {
    let m = m as f64;
    m * ptm.epsilon / 3.0 - m * (m - 1.0) * ptm.delta * ptm.delta / 6.0
}

/// Diamond distance of a single logical rotation by `theta_s` from identity.
pub fn diamond_rotation(theta_s: f64) -> f64 {
    2.0 * theta_s.sin().abs()
}

/// Syndrome-averaged diamond distance `Σ_s p_s · 2|sin θ_s|`.
pub fn diamond_average(entries: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    entries.into_iter().map(|(p, t)| p * diamond_rotation(t)).sum()
}
