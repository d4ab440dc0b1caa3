//! Compass codes on a `d_x × d_z` qubit grid.
//!
//! Qubit `(r, c)` has index `r * d_z + c`. A [`Coloring`] assigns every cell of
//! the `(d_x - 1) × (d_z - 1)` cell grid one of two cuts. An X-cut in cell
//! `(r, c)` splits the vertical X strip between columns `c` and `c + 1` between
//! rows `r` and `r + 1`; a Z-cut splits the horizontal Z strip between rows `r`
//! and `r + 1` between columns `c` and `c + 1`. The remaining strip segments are
//! the stabilizer generators. Logical `Z` is `Z` on row 0, logical `X` is `X`
//! on column 0.

use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::f2;

/// Qubit bit-vector used for Pauli supports and syndromes.
pub type Bits = BitVec<u64, Lsb0>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("d_z must be odd, got {0}")]
    EvenDz(usize),
    #[error("grid dimensions must be positive, got {d_x}x{d_z}")]
    EmptyGrid { d_x: usize, d_z: usize },
    #[error("cell grid must be {rows}x{cols}, {detail}")]
    CellShape {
        rows: usize,
        cols: usize,
        detail: String,
    },
    #[error("distance must be odd and positive, got {0}")]
    BadDistance(usize),
    #[error("block height must satisfy 1 <= h <= l, got h={h} for l={l}")]
    BadHeight { l: usize, h: usize },
    #[error("q_shor must lie in [0, 1], got {0}")]
    BadFraction(f64),
    #[error("malformed code file: {0}")]
    Json(String),
}

/// Orientation of the cut drawn in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    #[serde(rename = "X")]
    XCut,
    #[serde(rename = "Z")]
    ZCut,
}

impl Cell {
    fn symbol(self) -> char {
        match self {
            Cell::XCut => 'X',
            Cell::ZCut => 'Z',
        }
    }
}

/// A cell coloring together with the qubit grid it lives on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    d_x: usize,
    d_z: usize,
    cells: Vec<Cell>,
}

impl Coloring {
    /// Builds a coloring from row-major cells.
    pub fn new(d_x: usize, d_z: usize, cells: Vec<Cell>) -> Result<Self, CodeError> {
        check_dims(d_x, d_z)?;
        let (rows, cols) = (d_x - 1, d_z - 1);
        if cells.len() != rows * cols {
            return Err(CodeError::CellShape {
                rows,
                cols,
                detail: format!("got {} cells", cells.len()),
            });
        }
        Ok(Coloring { d_x, d_z, cells })
    }

    /// Builds a coloring from a list of cell rows. When the cell grid is empty
    /// both `[]` and a list of empty rows are accepted.
    pub fn from_rows(d_x: usize, d_z: usize, rows: Vec<Vec<Cell>>) -> Result<Self, CodeError> {
        check_dims(d_x, d_z)?;
        let (nr, nc) = (d_x - 1, d_z - 1);
        if nr * nc == 0 && rows.iter().all(|r| r.is_empty()) && rows.len() <= nr {
            return Ok(Coloring {
                d_x,
                d_z,
                cells: Vec::new(),
            });
        }
        if rows.len() != nr {
            return Err(CodeError::CellShape {
                rows: nr,
                cols: nc,
                detail: format!("got {} rows", rows.len()),
            });
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != nc) {
            return Err(CodeError::CellShape {
                rows: nr,
                cols: nc,
                detail: format!("row {i} has {} cells", r.len()),
            });
        }
        Ok(Coloring {
            d_x,
            d_z,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    /// Uniform coloring.
    pub fn filled(d_x: usize, d_z: usize, cell: Cell) -> Result<Self, CodeError> {
        check_dims(d_x, d_z)?;
        Self::new(d_x, d_z, vec![cell; (d_x - 1) * (d_z - 1)])
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn n_qubits(&self) -> usize {
        self.d_x * self.d_z
    }

    pub fn cell_rows(&self) -> usize {
        self.d_x - 1
    }

    pub fn cell_cols(&self) -> usize {
        self.d_z - 1
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, r: usize, c: usize) -> Cell {
        self.cells[r * self.cell_cols() + c]
    }

    /// Cell rows, top to bottom. Empty when the cell grid is empty.
    pub fn rows(&self) -> Vec<&[Cell]> {
        if self.cells.is_empty() {
            return Vec::new();
        }
        self.cells.chunks(self.cell_cols()).collect()
    }

    /// Fraction of X-cut cells, `None` for an empty cell grid.
    pub fn x_cut_fraction(&self) -> Option<f64> {
        if self.cells.is_empty() {
            return None;
        }
        let x = self.cells.iter().filter(|&&c| c == Cell::XCut).count();
        Some(x as f64 / self.cells.len() as f64)
    }

    /// Serializes to the code-file format `{"d_x", "d_z", "cells"}`, one cell
    /// row per line.
    pub fn to_json(&self) -> String {
        let rows = self.rows();
        let mut s = format!("{{\n  \"d_x\": {},\n  \"d_z\": {},\n  \"cells\": [", self.d_x, self.d_z);
        for (i, row) in rows.iter().enumerate() {
            s.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
            let items: Vec<String> = row.iter().map(|c| format!("\"{}\"", c.symbol())).collect();
            s.push_str(&items.join(", "));
            s.push(']');
        }
        if !rows.is_empty() {
            s.push_str("\n  ");
        }
        s.push_str("]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CodeError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            d_x: usize,
            d_z: usize,
            cells: Vec<Vec<Cell>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| CodeError::Json(e.to_string()))?;
        Self::from_rows(raw.d_x, raw.d_z, raw.cells)
    }
}

impl fmt::Display for Coloring {
    /// One line per cell row, `X`/`Z` per cell.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: String = row.iter().map(|c| c.symbol()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn check_dims(d_x: usize, d_z: usize) -> Result<(), CodeError> {
    if d_x == 0 || d_z == 0 {
        return Err(CodeError::EmptyGrid { d_x, d_z });
    }
    if d_z.is_multiple_of(2) {
        return Err(CodeError::EvenDz(d_z));
    }
    Ok(())
}

fn check_distance(l: usize) -> Result<(), CodeError> {
    if l == 0 || l.is_multiple_of(2) {
        return Err(CodeError::BadDistance(l));
    }
    Ok(())
}

/// All cells Z-cut: `d_x` stacked repetition codes against Z errors.
pub fn family_z_shor(d_x: usize, d_z: usize) -> Result<Coloring, CodeError> {
    Coloring::filled(d_x, d_z, Cell::ZCut)
}

/// All cells X-cut.
pub fn family_x_shor(d_x: usize, d_z: usize) -> Result<Coloring, CodeError> {
    Coloring::filled(d_x, d_z, Cell::XCut)
}

/// Rotated surface code: checkerboard with X-cuts where `r + c` is even.
pub fn family_rotated_surface(l: usize) -> Result<Coloring, CodeError> {
    check_distance(l)?;
    let cells = (0..l.saturating_sub(1))
        .flat_map(|r| (0..l - 1).map(move |c| (r, c)))
        .map(|(r, c)| if (r + c) % 2 == 0 { Cell::XCut } else { Cell::ZCut })
        .collect();
    Coloring::new(l, l, cells)
}

/// Stacked Z-Shor blocks of height `h` on an `l × l` grid.
///
/// The first `⌊l/h⌋ · h` rows form blocks of `h` rows each; the remaining
/// `l mod h` rows are single-row blocks. Cell rows on block boundaries are
/// X-cut, all other cells are Z-cut.
pub fn family_z_stacked(l: usize, h: usize) -> Result<Coloring, CodeError> {
    check_distance(l)?;
    if h == 0 || h > l {
        return Err(CodeError::BadHeight { l, h });
    }
    let full = (l / h) * h;
    let mut cells = Vec::with_capacity((l - 1) * (l - 1));
    for r in 0..l - 1 {
        let boundary = (r + 1) % h == 0 || r + 1 >= full;
        let cell = if boundary { Cell::XCut } else { Cell::ZCut };
        cells.extend(std::iter::repeat_n(cell, l - 1));
    }
    Coloring::new(l, l, cells)
}

/// A random coloring with the fraction it actually realized.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomColoring {
    pub coloring: Coloring,
    pub requested_q_shor: f64,
    /// `None` when the cell grid is empty.
    pub realized_q_shor: Option<f64>,
}

/// Each cell independently X-cut with probability `q_shor`.
pub fn random_coloring(d_x: usize, d_z: usize, q_shor: f64, seed: u64) -> Result<RandomColoring, CodeError> {
    check_dims(d_x, d_z)?;
    if !(0.0..=1.0).contains(&q_shor) {
        return Err(CodeError::BadFraction(q_shor));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = (0..(d_x - 1) * (d_z - 1))
        .map(|_| if rng.gen_bool(q_shor) { Cell::XCut } else { Cell::ZCut })
        .collect();
    let coloring = Coloring::new(d_x, d_z, cells)?;
    let realized_q_shor = coloring.x_cut_fraction();
    Ok(RandomColoring {
        coloring,
        requested_q_shor: q_shor,
        realized_q_shor,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

/// A pure X-type or Z-type Pauli operator given by its support.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliSupport {
    pub kind: PauliKind,
    pub support: Bits,
}

impl PauliSupport {
    pub fn identity(kind: PauliKind, n: usize) -> Self {
        PauliSupport {
            kind,
            support: Bits::repeat(false, n),
        }
    }

    pub fn from_qubits(kind: PauliKind, n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(kind, n);
        for q in qubits {
            p.support.set(q, true);
        }
        p
    }

    /// Number of qubits the operator acts on (not its weight).
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.len() == 0
    }

    pub fn weight(&self) -> usize {
        self.support.count_ones()
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter_ones()
    }

    pub fn overlap(&self, other: &PauliSupport) -> usize {
        self.support
            .as_raw_slice()
            .iter()
            .zip(other.support.as_raw_slice())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn commutes_with(&self, other: &PauliSupport) -> bool {
        self.kind == other.kind || self.overlap(other).is_multiple_of(2)
    }

    /// Product with another operator of the same kind (phases ignored).
    pub fn mul_assign(&mut self, other: &PauliSupport) {
        debug_assert_eq!(self.kind, other.kind);
        self.support ^= &other.support;
    }

    /// Support as a `u64` mask. Panics past 64 qubits.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64, "support wider than 64 qubits");
        self.qubits().fold(0u64, |m, q| m | (1 << q))
    }

    pub fn from_mask(kind: PauliKind, n: usize, mask: u64) -> Self {
        Self::from_qubits(kind, n, (0..n.min(64)).filter(|q| mask >> q & 1 == 1))
    }
}

impl fmt::Display for PauliSupport {
    /// Bit string over qubits `0..n`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.support.iter() {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A compass code: coloring plus derived generators and logicals.
#[derive(Clone, Debug, PartialEq)]
pub struct CompassCode {
    pub coloring: Coloring,
    pub x_stabilizers: Vec<PauliSupport>,
    pub z_stabilizers: Vec<PauliSupport>,
    pub logical_z: PauliSupport,
    pub logical_x: PauliSupport,
}

impl CompassCode {
    pub fn n_qubits(&self) -> usize {
        self.coloring.n_qubits()
    }

    pub fn d_x(&self) -> usize {
        self.coloring.d_x()
    }

    pub fn d_z(&self) -> usize {
        self.coloring.d_z()
    }
}

/// Derives generators and logicals from a coloring.
pub fn build_code(coloring: &Coloring) -> CompassCode {
    let (d_x, d_z) = (coloring.d_x(), coloring.d_z());
    let n = d_x * d_z;
    let q = |r: usize, c: usize| r * d_z + c;

    let mut x_stabilizers = Vec::new();
    for c in 0..d_z - 1 {
        let mut top = 0;
        for r in 0..d_x {
            if r == d_x - 1 || coloring.cell(r, c) == Cell::XCut {
                let qubits = (top..=r).flat_map(|rr| [q(rr, c), q(rr, c + 1)]);
                x_stabilizers.push(PauliSupport::from_qubits(PauliKind::X, n, qubits));
                top = r + 1;
            }
        }
    }

    let mut z_stabilizers = Vec::new();
    for r in 0..d_x - 1 {
        let mut left = 0;
        for c in 0..d_z {
            if c == d_z - 1 || coloring.cell(r, c) == Cell::ZCut {
                let qubits = (left..=c).flat_map(|cc| [q(r, cc), q(r + 1, cc)]);
                z_stabilizers.push(PauliSupport::from_qubits(PauliKind::Z, n, qubits));
                left = c + 1;
            }
        }
    }

    CompassCode {
        coloring: coloring.clone(),
        x_stabilizers,
        z_stabilizers,
        logical_z: PauliSupport::from_qubits(PauliKind::Z, n, (0..d_z).map(|c| q(0, c))),
        logical_x: PauliSupport::from_qubits(PauliKind::X, n, (0..d_x).map(|r| q(r, 0))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of every structural check, in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks the stabilizer group and logicals of a code.
pub fn validate(code: &CompassCode) -> ValidationReport {
    let n = code.n_qubits();
    let xs = &code.x_stabilizers;
    let zs = &code.z_stabilizers;
    let mut checks = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| {
        checks.push(ValidationCheck { name, passed, detail });
    };

    let c = &code.coloring;
    push(
        "grid_shape",
        c.d_z() % 2 == 1 && c.cells().len() == (c.d_x() - 1) * (c.d_z() - 1),
        format!("{}x{} qubits, {} cells", c.d_x(), c.d_z(), c.cells().len()),
    );

    let all = xs.iter().chain(zs).chain([&code.logical_z, &code.logical_x]);
    let kinds_ok = xs.iter().all(|s| s.kind == PauliKind::X)
        && zs.iter().all(|s| s.kind == PauliKind::Z)
        && code.logical_z.kind == PauliKind::Z
        && code.logical_x.kind == PauliKind::X;
    let bad_len = all.clone().filter(|p| p.len() != n).count();
    push(
        "support_shape",
        kinds_ok && bad_len == 0,
        format!("{bad_len} supports not of length {n}"),
    );

    push(
        "generator_count",
        xs.len() + zs.len() + 1 == n,
        format!("{} X + {} Z generators for {n} qubits", xs.len(), zs.len()),
    );

    let empty = xs.iter().chain(zs).filter(|s| s.weight() == 0).count();
    push("nonempty_generators", empty == 0, format!("{empty} empty generators"));

    let odd = xs.iter().chain(zs).filter(|s| s.weight() % 2 == 1).count();
    push("even_generator_weight", odd == 0, format!("{odd} generators of odd weight"));

    push(
        "odd_logical_z_weight",
        code.logical_z.weight() % 2 == 1,
        format!("weight {}", code.logical_z.weight()),
    );

    let clashes = xs
        .iter()
        .flat_map(|x| zs.iter().map(move |z| (x, z)))
        .filter(|(x, z)| !x.commutes_with(z))
        .count();
    push("stabilizers_commute", clashes == 0, format!("{clashes} anticommuting X/Z pairs"));

    let lz_bad = xs.iter().filter(|x| !x.commutes_with(&code.logical_z)).count();
    push(
        "logical_z_commutes",
        lz_bad == 0,
        format!("{lz_bad} X generators anticommute with logical Z"),
    );
    let lx_bad = zs.iter().filter(|z| !z.commutes_with(&code.logical_x)).count();
    push(
        "logical_x_commutes",
        lx_bad == 0,
        format!("{lx_bad} Z generators anticommute with logical X"),
    );
    push(
        "logicals_anticommute",
        !code.logical_z.commutes_with(&code.logical_x),
        format!("overlap {}", code.logical_z.overlap(&code.logical_x)),
    );

    for (name, gens) in [("x_degree", xs), ("z_degree", zs)] {
        let mut deg = vec![0usize; n];
        for s in gens {
            for q in s.qubits() {
                deg[q] += 1;
            }
        }
        let max = deg.iter().copied().max().unwrap_or(0);
        push(name, max <= 2, format!("max generators per qubit {max}"));
    }

    let supports = |g: &[PauliSupport]| g.iter().map(|s| s.support.clone()).collect::<Vec<_>>();
    let (rx, rz) = (f2::rank(&supports(xs)), f2::rank(&supports(zs)));
    push(
        "independent_generators",
        rx == xs.len() && rz == zs.len(),
        format!("X rank {rx}/{}, Z rank {rz}/{}", xs.len(), zs.len()),
    );

    ValidationReport { checks }
}

/// Reads a `{"d_x","d_z","cells"}` file body.
impl FromStr for Coloring {
    type Err = CodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Coloring::from_json(s)
    }
}
