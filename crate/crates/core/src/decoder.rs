//! Minimum-weight decoding of X-syndromes (Z errors).
//!
//! Every qubit lies in at most two X generators, so Z errors are edges of a
//! graph whose nodes are the X generators plus one boundary node. A qubit in a
//! single generator is an edge to the boundary. Qubits in no generator cannot
//! be detected and never appear in a correction.
//!
//! Ties between equal-weight corrections are broken deterministically: among
//! all minimum-weight corrections the one whose sorted qubit list is
//! lexicographically smallest wins. This is realised exactly by giving qubit
//! `q` the integer weight `2^n - 2^(n-1-q)`, which keeps weight first and then
//! prefers low qubit indices. On parallel edges it picks the lowest-index
//! qubit.

use std::collections::HashMap;
use std::convert::Infallible;
use std::fmt;
use std::str::FromStr;

use rustworkx_core::max_weight_matching::max_weight_matching;
use rustworkx_core::petgraph::graph::{NodeIndex, UnGraph};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::code_model::{Bits, CompassCode, PauliKind, PauliSupport};

/// Largest code the matching decoder accepts (perturbed weights live in `u128`).
pub const MAX_MATCHING_QUBITS: usize = 100;
/// Largest code the brute-force decoder accepts.
pub const MAX_BRUTEFORCE_QUBITS: usize = 20;
/// Largest number of X generators [`MinWeightTable`] accepts.
pub const MAX_TABLE_CHECKS: usize = 26;
/// Largest code [`MinWeightTable`] accepts (table costs live in `u64`).
pub const MAX_TABLE_QUBITS: usize = 57;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("syndrome has {found} bits, code has {expected} X generators")]
    SyndromeLength { expected: usize, found: usize },
    #[error("code has {n} qubits, limit is {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("syndrome cannot be produced by any Z error")]
    Infeasible,
    #[error("invalid syndrome string: {0}")]
    Parse(String),
    #[error("matching failed: {0}")]
    Matching(String),
}

/// Outcomes of the X generators, in generator order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub bits: Bits,
}

impl Syndrome {
    pub fn zeros(m: usize) -> Self {
        Syndrome {
            bits: Bits::repeat(false, m),
        }
    }

    /// Bit `j` of `index` is generator `j`.
    pub fn from_index(index: u64, m: usize) -> Self {
        Syndrome {
            bits: (0..m).map(|j| j < 64 && index >> j & 1 == 1).collect(),
        }
    }

    pub fn from_flagged(m: usize, flagged: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::zeros(m);
        for j in flagged {
            s.bits.set(j, true);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.bits.not_any()
    }

    pub fn flagged(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    /// Inverse of [`Syndrome::from_index`]; `None` past 64 generators.
    pub fn index(&self) -> Option<u64> {
        (self.len() <= 64).then(|| self.flagged().fold(0u64, |a, j| a | 1 << j))
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits.iter() {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Syndrome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Syndrome {
    type Err = DecodeError;
    /// A string of `0`/`1`, one character per generator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(DecodeError::Parse(format!("unexpected character {c:?}"))),
            })
            .collect::<Result<Bits, _>>()?;
        Ok(Syndrome { bits })
    }
}

/// X-syndrome of a Z error.
pub fn syndrome_of(code: &CompassCode, error: &PauliSupport) -> Syndrome {
    Syndrome {
        bits: code
            .x_stabilizers
            .iter()
            .map(|s| s.overlap(error) % 2 == 1)
            .collect(),
    }
}

/// One qubit seen as an edge between two nodes (possibly the boundary).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub qubit: usize,
    pub a: usize,
    pub b: usize,
}

/// Decoding graph with all-pairs shortest paths.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    n_qubits: usize,
    n_checks: usize,
    edges: Vec<Edge>,
    undetectable: Vec<usize>,
    dist: Vec<Option<u128>>,
    // Last hop into `node` on the shortest path from `src`: `(previous node, qubit)`.
    pred: Vec<Option<(usize, usize)>>,
}

impl MatchingGraph {
    pub fn new(code: &CompassCode) -> Result<Self, DecodeError> {
        let n = code.n_qubits();
        if n > MAX_MATCHING_QUBITS {
            return Err(DecodeError::TooLarge {
                n,
                limit: MAX_MATCHING_QUBITS,
            });
        }
        let m = code.x_stabilizers.len();
        let boundary = m;
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (j, s) in code.x_stabilizers.iter().enumerate() {
            for q in s.qubits() {
                incident[q].push(j);
            }
        }
        let mut edges = Vec::new();
        let mut undetectable = Vec::new();
        for (q, checks) in incident.iter().enumerate() {
            match checks[..] {
                [] => undetectable.push(q),
                [a] => edges.push(Edge { qubit: q, a, b: boundary }),
                [a, b] => edges.push(Edge { qubit: q, a, b }),
                _ => unreachable!("compass code qubits lie in at most two X generators"),
            }
        }
        let mut g = MatchingGraph {
            n_qubits: n,
            n_checks: m,
            edges,
            undetectable,
            dist: Vec::new(),
            pred: Vec::new(),
        };
        g.all_pairs();
        Ok(g)
    }

    fn nodes(&self) -> usize {
        self.n_checks + 1
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Index of the boundary node.
    pub fn boundary(&self) -> usize {
        self.n_checks
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Qubits in no X generator.
    pub fn undetectable_qubits(&self) -> &[usize] {
        &self.undetectable
    }

    fn qubit_weight(&self, q: usize) -> u128 {
        let n = self.n_qubits as u32;
        (1u128 << n) - (1u128 << (n - 1 - q as u32))
    }

    fn all_pairs(&mut self) {
        let nn = self.nodes();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nn];
        for e in &self.edges {
            adj[e.a].push((e.b, e.qubit));
            adj[e.b].push((e.a, e.qubit));
        }
        self.dist = vec![None; nn * nn];
        self.pred = vec![None; nn * nn];
        for src in 0..nn {
            // Dense Dijkstra; node counts stay small.
            let row = src * nn;
            let mut done = vec![false; nn];
            self.dist[row + src] = Some(0);
            loop {
                let next = (0..nn)
                    .filter(|&v| !done[v])
                    .filter_map(|v| self.dist[row + v].map(|d| (d, v)))
                    .min();
                let Some((d, u)) = next else { break };
                done[u] = true;
                for &(v, q) in &adj[u] {
                    let cand = d + self.qubit_weight(q);
                    if self.dist[row + v].is_none_or(|old| cand < old) {
                        self.dist[row + v] = Some(cand);
                        self.pred[row + v] = Some((u, q));
                    }
                }
            }
        }
    }

    fn perturbed(&self, a: usize, b: usize) -> Option<u128> {
        self.dist[a * self.nodes() + b]
    }

    /// Number of qubits on the shortest path between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        let unit = 1u128 << self.n_qubits;
        self.perturbed(a, b).map(|d| d.div_ceil(unit) as usize)
    }

    /// Qubits on the shortest path between two nodes.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        self.perturbed(a, b)?;
        let row = a * self.nodes();
        let mut out = Vec::new();
        let mut v = b;
        while v != a {
            let (u, q) = self.pred[row + v].expect("reachable node has a predecessor");
            out.push(q);
            v = u;
        }
        Some(out)
    }

    fn check_len(&self, s: &Syndrome) -> Result<(), DecodeError> {
        if s.len() != self.n_checks {
            return Err(DecodeError::SyndromeLength {
                expected: self.n_checks,
                found: s.len(),
            });
        }
        Ok(())
    }

    /// Exact minimum-weight correction for a syndrome.
    pub fn decode(&self, s: &Syndrome) -> Result<PauliSupport, DecodeError> {
        self.check_len(s)?;
        let flagged: Vec<usize> = s.flagged().collect();
        let k = flagged.len();
        let mut out = PauliSupport::identity(PauliKind::Z, self.n_qubits);
        if k == 0 {
            return Ok(out);
        }
        let bnd = self.boundary();

        // Flagged nodes 0..k, and a private boundary copy k + i for each. Any
        // two copies may pair at no cost, so a perfect matching of this graph
        // is a pairing of flagged nodes with each other or the boundary.
        let mut costs: Vec<(usize, usize, u128)> = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if let Some(d) = self.perturbed(flagged[i], flagged[j]) {
                    costs.push((i, j, d));
                }
            }
            if let Some(d) = self.perturbed(flagged[i], bnd) {
                costs.push((i, k + i, d));
            }
        }
        let top = costs.iter().map(|c| c.2).max().unwrap_or(0) as i128 + 1;
        let mut g: UnGraph<(), i128> = UnGraph::with_capacity(2 * k, costs.len() + k * k / 2);
        let nodes: Vec<NodeIndex> = (0..2 * k).map(|_| g.add_node(())).collect();
        for &(i, j, d) in &costs {
            g.add_edge(nodes[i], nodes[j], top - d as i128);
        }
        for i in 0..k {
            for j in i + 1..k {
                g.add_edge(nodes[k + i], nodes[k + j], top);
            }
        }
        let matching = max_weight_matching(&g, true, |e| Ok::<i128, Infallible>(*e.weight()), false)
            .map_err(|e| DecodeError::Matching(format!("{e:?}")))?;
        if matching.len() != k {
            return Err(DecodeError::Infeasible);
        }
        for (u, v) in matching {
            let (u, v) = (u.min(v), u.max(v));
            let path = if v < k {
                self.path(flagged[u], flagged[v])
            } else if u < k && v == k + u {
                self.path(flagged[u], bnd)
            } else if u >= k {
                continue;
            } else {
                return Err(DecodeError::Matching(format!("unexpected pair ({u}, {v})")));
            };
            for q in path.expect("matched pairs are connected") {
                let cur = out.support[q];
                out.support.set(q, !cur);
            }
        }
        Ok(out)
    }

    /// Minimum correction weight and its overlap parity with `probe` for
    /// every syndrome, by dynamic programming over flagged subsets.
    pub fn min_weight_table(&self, probe: &PauliSupport) -> Result<MinWeightTable, DecodeError> {
        let m = self.n_checks;
        if self.n_qubits > MAX_TABLE_QUBITS {
            return Err(DecodeError::TooLarge {
                n: self.n_qubits,
                limit: MAX_TABLE_QUBITS,
            });
        }
        if m > MAX_TABLE_CHECKS {
            return Err(DecodeError::TooLarge {
                n: m,
                limit: MAX_TABLE_CHECKS,
            });
        }
        let bnd = self.boundary();
        let path_parity = |a: usize, b: usize| -> bool {
            self.path(a, b)
                .map(|p| p.iter().filter(|&&q| probe.support[q]).count() % 2 == 1)
                .unwrap_or(false)
        };
        let to_b: Vec<Option<(u64, bool)>> = (0..m)
            .map(|i| self.perturbed(i, bnd).map(|d| (d as u64, path_parity(i, bnd))))
            .collect();
        let pair: Vec<Option<(u64, bool)>> = (0..m * m)
            .map(|ij| {
                let (i, j) = (ij / m, ij % m);
                self.perturbed(i, j).map(|d| (d as u64, path_parity(i, j)))
            })
            .collect();

        const INF: u64 = u64::MAX;
        let size = 1usize << m;
        let mut cost = vec![INF; size];
        let mut parity = Bits::repeat(false, size);
        cost[0] = 0;
        for s in 1..size {
            let i = s.trailing_zeros() as usize;
            let rest = s & !(1 << i);
            let mut best = INF;
            let mut best_par = false;
            if let Some((d, p)) = to_b[i] {
                if cost[rest] != INF {
                    best = cost[rest] + d;
                    best_par = parity[rest] ^ p;
                }
            }
            let mut others = rest;
            while others != 0 {
                let j = others.trailing_zeros() as usize;
                others &= others - 1;
                let sub = rest & !(1 << j);
                if let (Some((d, p)), true) = (pair[i * m + j], cost[sub] != INF) {
                    let c = cost[sub] + d;
                    if c < best {
                        best = c;
                        best_par = parity[sub] ^ p;
                    }
                }
            }
            cost[s] = best;
            parity.set(s, best_par);
        }
        Ok(MinWeightTable {
            unit: 1u64 << self.n_qubits,
            cost,
            parity,
        })
    }
}

/// Per-syndrome minimum correction weight and probe parity, indexed by
/// [`Syndrome::index`].
#[derive(Clone, Debug)]
pub struct MinWeightTable {
    unit: u64,
    cost: Vec<u64>,
    parity: Bits,
}

impl MinWeightTable {
    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    /// `None` when no Z error produces the syndrome.
    pub fn weight(&self, index: usize) -> Option<usize> {
        let c = self.cost[index];
        (c != u64::MAX).then(|| c.div_ceil(self.unit) as usize)
    }

    /// Parity of the overlap of the chosen correction with the probe.
    pub fn parity(&self, index: usize) -> bool {
        self.parity[index]
    }
}

/// Minimum-weight correction via matching.
pub fn decode_mwpm(graph: &MatchingGraph, s: &Syndrome) -> Result<PauliSupport, DecodeError> {
    graph.decode(s)
}

/// `a` beats `b` when lighter, or equally heavy and the lowest qubit where
/// they differ belongs to `a`.
fn prefer(a: u64, b: u64) -> bool {
    let (wa, wb) = (a.count_ones(), b.count_ones());
    wa < wb || (wa == wb && a != b && (a >> (a ^ b).trailing_zeros()) & 1 == 1)
}

fn bruteforce_setup(code: &CompassCode) -> Result<(usize, Vec<u64>), DecodeError> {
    let n = code.n_qubits();
    if n > MAX_BRUTEFORCE_QUBITS {
        return Err(DecodeError::TooLarge {
            n,
            limit: MAX_BRUTEFORCE_QUBITS,
        });
    }
    let mut flips = vec![0u64; n];
    for (j, s) in code.x_stabilizers.iter().enumerate() {
        for q in s.qubits() {
            flips[q] |= 1 << j;
        }
    }
    Ok((n, flips))
}

/// Best correction for every reachable syndrome by enumerating all `2^n` Z errors.
pub fn bruteforce_table(code: &CompassCode) -> Result<HashMap<u64, u64>, DecodeError> {
    let (n, flips) = bruteforce_setup(code)?;
    let mut best: HashMap<u64, u64> = HashMap::new();
    let (mut v, mut s) = (0u64, 0u64);
    for i in 0u64..1 << n {
        if i > 0 {
            let q = i.trailing_zeros() as usize;
            v ^= 1 << q;
            s ^= flips[q];
        }
        best.entry(s)
            .and_modify(|b| {
                if prefer(v, *b) {
                    *b = v
                }
            })
            .or_insert(v);
    }
    Ok(best)
}

/// Minimum-weight correction by exhaustive search.
pub fn decode_bruteforce(code: &CompassCode, s: &Syndrome) -> Result<PauliSupport, DecodeError> {
    let (n, flips) = bruteforce_setup(code)?;
    let m = code.x_stabilizers.len();
    if s.len() != m {
        return Err(DecodeError::SyndromeLength {
            expected: m,
            found: s.len(),
        });
    }
    let target = s.index().expect("at most 20 generators");
    let mut best: Option<u64> = None;
    let (mut v, mut syn) = (0u64, 0u64);
    for i in 0u64..1 << n {
        if i > 0 {
            let q = i.trailing_zeros() as usize;
            v ^= 1 << q;
            syn ^= flips[q];
        }
        if syn == target && best.is_none_or(|b| prefer(v, b)) {
            best = Some(v);
        }
    }
    best.map(|b| PauliSupport::from_mask(PauliKind::Z, n, b))
        .ok_or(DecodeError::Infeasible)
}
