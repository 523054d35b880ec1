//! Standard-form conic programs, SDPA file exchange, the interior-point
//! solver and the solution quality metrics.
//!
//! An [`SdpData`] encodes
//!
//! ```text
//! maximize ⟨c, X⟩  subject to  ⟨A_i, X⟩ = b_i (i = 1..m),  X ∈ K
//! ```
//!
//! where `K` is a product of free, nonnegative and PSD blocks and `⟨F, X⟩`
//! is the trace inner product. Symmetric matrices are stored by their upper
//! triangle. The dual (moment side) is `minimize bᵀy s.t. Σ y_i A_i − c ∈ K*`.

mod certify;
mod ipm;
mod sdpa;

pub use certify::{certify_metrics, extract_candidate, ratio, Metrics, Ratio, SOLVED_TOL};
pub use ipm::{solve_ipm, IpmOptions};
pub use sdpa::{export_sdpa, import_sdpa, read_sdpa, write_sdpa};

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid SDP data: {0}")]
    Invalid(String),
    #[error("SDPA line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Free,
    Nonneg,
    Psd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub size: usize,
}

/// One coefficient of a block matrix; `i ≤ j`, and `i == j` unless the
/// block is PSD. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpData {
    pub m: usize,
    pub blocks: Vec<BlockSpec>,
    pub c: Vec<Entry>,
    /// `(row, entry)` pairs, sorted by row, block, i, j.
    pub rows: Vec<(usize, Entry)>,
    pub rhs: Vec<f64>,
    pub row_labels: Vec<String>,
}

impl SdpData {
    /// Sorts entries into canonical order.
    pub fn canonicalize(&mut self) {
        let key = |e: &Entry| (e.block, e.i, e.j);
        self.c.sort_by_key(key);
        self.rows.sort_by_key(|(r, e)| (*r, key(e)));
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.rhs.len() != self.m {
            return Err(SdpError::Invalid(format!(
                "rhs has {} entries, m = {}",
                self.rhs.len(),
                self.m
            )));
        }
        if !self.row_labels.is_empty() && self.row_labels.len() != self.m {
            return Err(SdpError::Invalid("row label count differs from m".into()));
        }
        if let Some(v) = self.rhs.iter().find(|v| !v.is_finite()) {
            return Err(SdpError::Invalid(format!("non-finite rhs value {v}")));
        }
        let check = |e: &Entry| -> Result<(), SdpError> {
            let b = self
                .blocks
                .get(e.block)
                .ok_or_else(|| SdpError::Invalid(format!("block {} out of range", e.block)))?;
            if e.i > e.j || e.j >= b.size {
                return Err(SdpError::Invalid(format!(
                    "entry ({}, {}) invalid for block {} of size {}",
                    e.i, e.j, e.block, b.size
                )));
            }
            if b.kind != BlockKind::Psd && e.i != e.j {
                return Err(SdpError::Invalid(format!(
                    "off-diagonal entry in vector block {}",
                    e.block
                )));
            }
            if !e.value.is_finite() {
                return Err(SdpError::Invalid(format!("non-finite value {}", e.value)));
            }
            Ok(())
        };
        let mut seen = std::collections::HashSet::new();
        for e in &self.c {
            check(e)?;
            if !seen.insert((usize::MAX, e.block, e.i, e.j)) {
                return Err(SdpError::Invalid("duplicate objective entry".into()));
            }
        }
        for (r, e) in &self.rows {
            if *r >= self.m {
                return Err(SdpError::Invalid(format!("row {r} out of range")));
            }
            check(e)?;
            if !seen.insert((*r, e.block, e.i, e.j)) {
                return Err(SdpError::Invalid(format!(
                    "duplicate entry row {r} block {} ({}, {})",
                    e.block, e.i, e.j
                )));
            }
        }
        Ok(())
    }

    /// Number of stored coefficients in the constraint rows.
    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(0)
    }

    /// Evaluates `⟨c, X⟩`.
    pub fn objective_value(&self, x: &[BlockValue]) -> f64 {
        self.c.iter().map(|e| e.value * x[e.block].pair(e.i, e.j)).sum()
    }

    /// Evaluates `⟨A_i, X⟩` for every row.
    pub fn row_values(&self, x: &[BlockValue]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (r, e) in &self.rows {
            out[*r] += e.value * x[e.block].pair(e.i, e.j);
        }
        out
    }
}

/// Primal value of one block: a vector for free and nonnegative blocks,
/// a symmetric matrix for PSD blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue {
    Vector(Vec<f64>),
    Matrix(DMatrix<f64>),
}

impl BlockValue {
    /// Contribution factor of an upper-triangle coefficient at `(i, j)` to
    /// the trace inner product: `X_ii` on the diagonal, `2 X_ij` off it.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        match self {
            BlockValue::Vector(v) => v[i],
            BlockValue::Matrix(x) => {
                if i == j {
                    x[(i, i)]
                } else {
                    x[(i, j)] + x[(j, i)]
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdpStatus {
    Optimal,
    NearOptimal,
    MaxIter,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

impl SdpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::NearOptimal => "near-optimal",
            SdpStatus::MaxIter => "max-iter",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Unbounded => "unbounded",
            SdpStatus::NumericalTrouble => "numerical-trouble",
        }
    }

    /// Whether the objective values carry meaning.
    pub fn has_value(&self) -> bool {
        matches!(self, SdpStatus::Optimal | SdpStatus::NearOptimal)
    }
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// `⟨c, X⟩` at the returned iterate.
    pub primal_obj: f64,
    /// `bᵀy` at the returned iterate.
    pub dual_obj: f64,
    pub x_primal: Vec<BlockValue>,
    /// Dual vector `y` of the moment side, one value per row.
    pub y_dual: Vec<f64>,
    pub iterations: usize,
    /// `|primal − dual| / (1 + |primal| + |dual|)`.
    pub gap: f64,
    /// `‖A(X) − b‖∞ / (1 + ‖b‖∞)`.
    pub primal_residual: f64,
    /// `‖Σ y_i A_i − c − Z‖∞ / (1 + ‖c‖∞)`.
    pub dual_residual: f64,
}

impl SdpSolution {
    /// The value reported as the relaxation bound: the primal objective.
    pub fn objective(&self) -> f64 {
        self.primal_obj
    }
}
