//! Binary LDPC codes used as source coders.
//!
//! A parity-check matrix H of size MxN (M < N) compresses a length-N
//! bitplane x to the length-M syndrome `s = Hx mod 2`. Construction is
//! Progressive Edge Growth ([`peg`]); matrices interchange via the alist
//! text format ([`alist`]).

mod alist;
mod codes;
mod peg;

pub use alist::{read_alist, read_alist_from, write_alist, write_alist_to};
pub use codes::{table_distribution, CodeKind, CodeRate};
pub use peg::{column_degree_sequence, peg_construct};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bitplanes::{BitSeq, Bitplane};

#[derive(Debug, Error)]
pub enum LdpcError {
    #[error("rate d_v/delta_c = {d_v}/{delta_c} is not below 1")]
    RateNotBelowOne { d_v: usize, delta_c: usize },
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),
    #[error("degree sequence unrealizable: {0}")]
    Unrealizable(String),
    #[error("plane length {plane_len} does not match code length {n}")]
    LengthMismatch { plane_len: usize, n: usize },
    #[error("alist format error: {0}")]
    AlistFormat(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Edge-perspective degree distribution pair (lambda over source/variable
/// nodes, rho over syndrome/check nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    lambda: BTreeMap<usize, f64>,
    rho: BTreeMap<usize, f64>,
}

impl DegreeDistribution {
    pub fn new(
        lambda: impl IntoIterator<Item = (usize, f64)>,
        rho: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self, LdpcError> {
        let lambda: BTreeMap<usize, f64> = lambda.into_iter().collect();
        let rho: BTreeMap<usize, f64> = rho.into_iter().collect();
        for (name, map) in [("lambda", &lambda), ("rho", &rho)] {
            if map.is_empty() {
                return Err(LdpcError::InvalidDistribution(format!("{name} is empty")));
            }
            if let Some((&d, _)) = map.iter().find(|(&d, _)| d < 1) {
                return Err(LdpcError::InvalidDistribution(format!(
                    "{name} has degree {d} < 1"
                )));
            }
            if let Some((&d, &f)) = map.iter().find(|(_, &f)| !(f >= 0.0)) {
                return Err(LdpcError::InvalidDistribution(format!(
                    "{name}_{d} = {f} is negative"
                )));
            }
            let total: f64 = map.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(LdpcError::InvalidDistribution(format!(
                    "{name} fractions sum to {total}, not 1"
                )));
            }
        }
        Ok(DegreeDistribution { lambda, rho })
    }

    /// All degrees constant: d_v per source node, delta_c per syndrome node.
    pub fn regular(d_v: usize, delta_c: usize) -> Result<Self, LdpcError> {
        if d_v >= delta_c {
            return Err(LdpcError::RateNotBelowOne { d_v, delta_c });
        }
        Self::new([(d_v, 1.0)], [(delta_c, 1.0)])
    }

    pub fn lambda(&self) -> &BTreeMap<usize, f64> {
        &self.lambda
    }

    pub fn rho(&self) -> &BTreeMap<usize, f64> {
        &self.rho
    }

    pub fn is_regular(&self) -> bool {
        self.lambda.len() == 1 && self.rho.len() == 1
    }

    pub fn max_source_degree(&self) -> usize {
        *self.lambda.keys().last().unwrap()
    }
}

/// Rate of a regular code, `d_v / delta_c`.
pub fn regular_rate(d_v: usize, delta_c: usize) -> Result<f64, LdpcError> {
    if d_v >= delta_c {
        return Err(LdpcError::RateNotBelowOne { d_v, delta_c });
    }
    Ok(d_v as f64 / delta_c as f64)
}

/// Design rate of a distribution: `(sum_j rho_j/j) / (sum_i lambda_i/i)`.
pub fn design_rate(dist: &DegreeDistribution) -> f64 {
    let num: f64 = dist.rho.iter().map(|(&j, &f)| f / j as f64).sum();
    let den: f64 = dist.lambda.iter().map(|(&i, &f)| f / i as f64).sum();
    num / den
}

/// Sparse MxN binary parity-check matrix, kept as a Tanner graph
/// (adjacency in both directions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    num_rows: usize,
    num_cols: usize,
    /// Row indices adjacent to each column, ascending.
    col_rows: Vec<Vec<u32>>,
    /// Column indices adjacent to each row, ascending.
    row_cols: Vec<Vec<u32>>,
    /// Construction seed, when PEG-built.
    pub seed: Option<u64>,
}

impl ParityCheckMatrix {
    /// Build from an explicit edge set; duplicate edges are rejected.
    pub fn from_edges(
        num_rows: usize,
        num_cols: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self, LdpcError> {
        let mut h = ParityCheckMatrix {
            num_rows,
            num_cols,
            col_rows: vec![Vec::new(); num_cols],
            row_cols: vec![Vec::new(); num_rows],
            seed: None,
        };
        for &(r, c) in edges {
            assert!(r < num_rows && c < num_cols, "edge ({r},{c}) out of bounds");
            if h.col_rows[c].contains(&(r as u32)) {
                return Err(LdpcError::Unrealizable(format!("duplicate edge ({r},{c})")));
            }
            h.col_rows[c].push(r as u32);
            h.row_cols[r].push(c as u32);
        }
        for rows in &mut h.col_rows {
            rows.sort_unstable();
        }
        for cols in &mut h.row_cols {
            cols.sort_unstable();
        }
        Ok(h)
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn num_edges(&self) -> usize {
        self.col_rows.iter().map(Vec::len).sum()
    }

    pub fn rate(&self) -> f64 {
        self.num_rows as f64 / self.num_cols as f64
    }

    pub fn rows_of_col(&self, col: usize) -> &[u32] {
        &self.col_rows[col]
    }

    pub fn cols_of_row(&self, row: usize) -> &[u32] {
        &self.row_cols[row]
    }

    pub fn col_degrees(&self) -> Vec<usize> {
        self.col_rows.iter().map(Vec::len).collect()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.row_cols.iter().map(Vec::len).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.col_rows
            .iter()
            .enumerate()
            .flat_map(|(c, rows)| rows.iter().map(move |&r| (r as usize, c)))
    }

    /// GF(2) rank via elimination on bit-packed rows. The source-coding
    /// rate R = M/N presumes full rank; callers should warn when the
    /// returned rank is below M.
    pub fn gf2_rank(&self) -> usize {
        let words = self.num_cols.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = self
            .row_cols
            .iter()
            .map(|cols| {
                let mut packed = vec![0u64; words];
                for &c in cols {
                    packed[c as usize / 64] |= 1 << (c % 64);
                }
                packed
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.num_cols {
            let (w, bit) = (col / 64, col % 64);
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> bit & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] >> bit & 1 == 1 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }
}

/// Length-M syndrome of one bitplane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub bits: BitSeq,
    pub plane_index: usize,
}

/// `s = Hx mod 2`: syndrome bit m is the parity of the plane bits at the
/// columns adjacent to row m.
pub fn encode_syndrome(h: &ParityCheckMatrix, plane: &Bitplane) -> Result<Syndrome, LdpcError> {
    if plane.bits.len() != h.num_cols {
        return Err(LdpcError::LengthMismatch {
            plane_len: plane.bits.len(),
            n: h.num_cols,
        });
    }
    let mut bits = BitSeq::zeros(h.num_rows);
    for (m, cols) in h.row_cols.iter().enumerate() {
        let parity = cols
            .iter()
            .fold(false, |acc, &c| acc ^ plane.bits.get(c as usize));
        if parity {
            bits.set(m, true);
        }
    }
    Ok(Syndrome {
        bits,
        plane_index: plane.plane_index,
    })
}

/// Shortest cycle length of the Tanner graph, or `None` for an acyclic
/// graph. Cycles in a bipartite graph have even length >= 4.
pub fn girth(h: &ParityCheckMatrix) -> Option<usize> {
    // BFS from every column node; a cycle through the start shows up as an
    // edge between two reached nodes whose distances certify a closed walk.
    // Nodes 0..N are columns, N..N+M are rows.
    let n = h.num_cols;
    let total = n + h.num_rows;
    let mut best: Option<usize> = None;
    let mut dist = vec![u32::MAX; total];
    let mut parent = vec![u32::MAX; total];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        dist.fill(u32::MAX);
        parent.fill(u32::MAX);
        queue.clear();
        dist[start] = 0;
        queue.push_back(start as u32);
        while let Some(u) = queue.pop_front() {
            let ui = u as usize;
            if let Some(limit) = best {
                // Any cycle first seen from u has length >= 2 * dist[u].
                if 2 * dist[ui] as usize >= limit {
                    continue;
                }
            }
            let neighbors: &[u32] = if ui < n {
                &h.col_rows[ui]
            } else {
                &h.row_cols[ui - n]
            };
            for &v in neighbors {
                let vi = if ui < n {
                    v as usize + n
                } else {
                    v as usize
                };
                if dist[vi] == u32::MAX {
                    dist[vi] = dist[ui] + 1;
                    parent[vi] = u;
                    queue.push_back(vi as u32);
                } else if parent[ui] != vi as u32 && parent[vi] != u {
                    // Non-tree edge closing a walk of length
                    // dist[u] + dist[v] + 1 through `start`.
                    let len = dist[ui] as usize + dist[vi] as usize + 1;
                    if best.is_none_or(|b| len < b) {
                        best = Some(len);
                    }
                }
            }
        }
        if best == Some(4) {
            break;
        }
    }
    best
}
