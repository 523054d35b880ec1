use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::SosProgram;
use crate::poly::{Monomial, Polynomial};
use crate::sdp::{BlockKind, BlockSpec, BlockValue, Entry, SdpData, SdpSolution};

/// Coefficients below this magnitude are dropped during assembly.
pub const DROP_TOL: f64 = 1e-14;

/// Where each program variable lives in the assembled SDP.
struct Layout {
    /// Index in block 0 of each free block's first coefficient.
    free_offset: Vec<usize>,
    nfree: usize,
    /// For each SOS block: `Nonneg(index)` or `Psd(block)`.
    sos: Vec<Slot>,
    nonneg_block: Option<usize>,
    blocks: Vec<BlockSpec>,
}

#[derive(Clone, Copy)]
enum Slot {
    Nonneg(usize),
    Psd(usize),
}

fn layout(prog: &SosProgram) -> Layout {
    let mut free_offset = Vec::new();
    let mut nfree = 1;
    for b in &prog.free_blocks {
        free_offset.push(nfree);
        nfree += b.support.len();
    }
    let nnonneg = prog.sos_blocks.iter().filter(|b| b.basis.len() == 1).count();
    let mut blocks = vec![BlockSpec {
        kind: BlockKind::Free,
        size: nfree,
    }];
    let nonneg_block = (nnonneg > 0).then(|| {
        blocks.push(BlockSpec {
            kind: BlockKind::Nonneg,
            size: nnonneg,
        });
        1
    });
    let mut sos = Vec::new();
    let mut k = 0;
    for b in &prog.sos_blocks {
        if b.basis.len() == 1 {
            sos.push(Slot::Nonneg(k));
            k += 1;
        } else {
            sos.push(Slot::Psd(blocks.len()));
            blocks.push(BlockSpec {
                kind: BlockKind::Psd,
                size: b.basis.len(),
            });
        }
    }
    Layout {
        free_offset,
        nfree,
        sos,
        nonneg_block,
        blocks,
    }
}

/// Lowers the coefficient-matching identity to standard form: one row per
/// monomial of `matching_support`, `ρ` as the first free scalar, SOS blocks
/// of size 1 as nonnegative scalars, larger ones as PSD blocks.
pub fn assemble_sdp(prog: &SosProgram) -> SdpData {
    let rows_of: Vec<Monomial> = prog.matching_support.to_vec();
    let index: BTreeMap<&Monomial, usize> = rows_of.iter().enumerate().map(|(k, m)| (m, k)).collect();
    let lay = layout(prog);
    let mut acc: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    let mut add = |row: usize, block: usize, i: usize, j: usize, v: f64| {
        *acc.entry((row, block, i, j)).or_insert(0.0) += v;
    };

    add(index[&Monomial::one(prog.nvars())], 0, 0, 0, 1.0);
    for (b, &off) in prog.free_blocks.iter().zip(&lay.free_offset) {
        for (k, s) in b.support.iter().enumerate() {
            for (w, c) in b.weight.terms() {
                add(index[&s.mul(w)], 0, off + k, off + k, c);
            }
        }
    }
    for (b, slot) in prog.sos_blocks.iter().zip(&lay.sos) {
        match *slot {
            Slot::Nonneg(k) => {
                let sq = b.basis[0].scale(2);
                for (w, c) in b.weight.terms() {
                    add(index[&sq.mul(w)], lay.nonneg_block.unwrap(), k, k, c);
                }
            }
            Slot::Psd(blk) => {
                for (p, u) in b.basis.iter().enumerate() {
                    for (q, v) in b.basis.iter().enumerate().skip(p) {
                        let uv = u.mul(v);
                        for (w, c) in b.weight.terms() {
                            add(index[&uv.mul(w)], blk, p, q, c);
                        }
                    }
                }
            }
        }
    }

    let rows: Vec<(usize, Entry)> = acc
        .into_iter()
        .filter(|(_, v)| v.abs() >= DROP_TOL)
        .map(|((row, block, i, j), value)| (row, Entry { block, i, j, value }))
        .collect();
    let rhs = rows_of.iter().map(|m| prog.target.coeff(m)).collect();
    let row_labels = rows_of.iter().map(|m| m.to_text(&prog.var_names)).collect();
    SdpData {
        m: rows_of.len(),
        blocks: lay.blocks,
        c: vec![Entry {
            block: 0,
            i: 0,
            j: 0,
            value: 1.0,
        }],
        rows,
        rhs,
        row_labels,
    }
}

/// Reads `(ρ, σ_k, λ_l)` back from a solution of [`assemble_sdp`]`(prog)`.
pub fn multipliers(prog: &SosProgram, sol: &SdpSolution) -> (f64, Vec<Polynomial>, Vec<Polynomial>) {
    let n = prog.nvars();
    let lay = layout(prog);
    let free = match &sol.x_primal[0] {
        BlockValue::Vector(v) => v.clone(),
        BlockValue::Matrix(_) => vec![0.0; lay.nfree],
    };
    let rho = free[0];
    let lambdas = prog
        .free_blocks
        .iter()
        .zip(&lay.free_offset)
        .map(|(b, &off)| {
            let mut p = Polynomial::zero(n);
            for (k, s) in b.support.iter().enumerate() {
                p.add_term(s.clone(), free[off + k]);
            }
            p
        })
        .collect();
    let sigmas = prog
        .sos_blocks
        .iter()
        .zip(&lay.sos)
        .map(|(b, slot)| {
            let mut p = Polynomial::zero(n);
            match *slot {
                Slot::Nonneg(k) => {
                    if let BlockValue::Vector(v) = &sol.x_primal[lay.nonneg_block.unwrap()] {
                        p.add_term(b.basis[0].scale(2), v[k]);
                    }
                }
                Slot::Psd(blk) => {
                    let x: &DMatrix<f64> = match &sol.x_primal[blk] {
                        BlockValue::Matrix(x) => x,
                        BlockValue::Vector(_) => return p,
                    };
                    for (i, u) in b.basis.iter().enumerate() {
                        for (j, v) in b.basis.iter().enumerate() {
                            p.add_term(u.mul(v), x[(i, j)]);
                        }
                    }
                }
            }
            p
        })
        .collect();
    (rho, sigmas, lambdas)
}

/// `target − ρ − Σ w_k σ_k − Σ v_l λ_l` at the returned iterate; identically
/// zero for an exactly feasible point.
pub fn identity_residual(prog: &SosProgram, sol: &SdpSolution) -> Polynomial {
    let n = prog.nvars();
    let (rho, sigmas, lambdas) = multipliers(prog, sol);
    let mut r = &prog.target - &Polynomial::constant(n, rho);
    for (b, s) in prog.sos_blocks.iter().zip(&sigmas) {
        r = &r - &(&b.weight * s);
    }
    for (b, l) in prog.free_blocks.iter().zip(&lambdas) {
        r = &r - &(&b.weight * l);
    }
    r
}
