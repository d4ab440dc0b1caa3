//! Compass codes under uniform coherent Z-rotation.
//!
//! The crate builds 2D compass codes from cell colorings, decodes X-syndromes
//! with exact minimum-weight matching, computes the logical channel of a code
//! under the rotation `exp(-i θ/2 Z)` on every qubit (exactly for small codes,
//! in closed form for repetition-based families), and estimates thresholds
//! from distance sweeps.
//!
//! Module map:
//!
//! * [`code_model`]: colorings, named families, stabilizers, validation, JSON files.
//! * [`decoder`]: matching graph, minimum-weight decoding, brute-force oracle.
//! * [`exact_backend`]: full enumeration of the syndrome distribution.
//! * [`pauli_channel`]: the `(ε, δ)` block of the logical PTM and derived metrics.
//! * [`analytic_families`]: repetition sums and the families built from them.
//! * [`experiments`]: sweeps, crossing detection, random ensembles.

pub mod analytic_families;
pub mod code_model;
pub mod decoder;
pub mod exact_backend;
pub mod experiments;
mod f2;
pub mod pauli_channel;

pub use analytic_families::{FamilyKind, FamilySpec};
pub use code_model::{build_code, Cell, Coloring, CompassCode, PauliKind, PauliSupport};
pub use decoder::{decode_bruteforce, decode_mwpm, MatchingGraph, Syndrome};
pub use exact_backend::{Recovery, SyndromeDistribution};
pub use pauli_channel::{LogicalPTM, PolarPTM};

/// Version string stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
