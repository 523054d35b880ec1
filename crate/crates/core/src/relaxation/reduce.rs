use std::collections::BTreeSet;

use super::{BlockRole, SosProgram};
use crate::poly::Monomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReductionReport {
    /// σ_0 basis monomials eliminated, over all σ_0 blocks.
    pub removed: usize,
    /// Passes until the fixed point, including the final unchanged pass.
    pub passes: usize,
}

fn sub(a: &Monomial, b: &Monomial) -> Option<Monomial> {
    let e: Option<Vec<u32>> = a
        .exponents()
        .iter()
        .zip(b.exponents())
        .map(|(x, y)| x.checked_sub(*y))
        .collect();
    e.map(Monomial::new)
}

fn in_sumset(target: &Monomial, g: &BTreeSet<Monomial>) -> bool {
    g.iter()
        .any(|b| sub(target, b).is_some_and(|rest| g.contains(&rest)))
}

/// Removes σ_0 basis monomials `α` whose square `x^{2α}` can only be matched
/// by the diagonal entry `X_αα`.
///
/// `α` goes when `2α ∉ T ∪ (G∖{α}) + (G∖{α})`, where `T` holds the
/// constant monomial (ρ is free), the target support and every achievable
/// support of the weighted blocks. With several σ_0 blocks, the full sum
/// sets of the other σ_0 blocks are added to `T`. Removal only enlarges the
/// set of removable monomials, so the fixed point does not depend on order.
pub fn reduce_basis(prog: &SosProgram) -> (SosProgram, ReductionReport) {
    let n = prog.nvars();
    let mut t: BTreeSet<Monomial> = prog.target.terms().map(|(m, _)| m.clone()).collect();
    t.insert(Monomial::one(n));
    for b in &prog.sos_blocks {
        if !matches!(b.role, BlockRole::Sigma0(_)) {
            t.extend(b.achievable().to_vec());
        }
    }
    for b in &prog.free_blocks {
        t.extend(b.achievable().to_vec());
    }

    let sigma0: Vec<usize> = prog
        .sos_blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| matches!(b.role, BlockRole::Sigma0(_)))
        .map(|(k, _)| k)
        .collect();
    let mut bases: Vec<BTreeSet<Monomial>> = sigma0
        .iter()
        .map(|&k| prog.sos_blocks[k].basis.iter().cloned().collect())
        .collect();

    let mut report = ReductionReport::default();
    loop {
        report.passes += 1;
        let mut changed = false;
        for h in 0..bases.len() {
            let mut others: BTreeSet<Monomial> = BTreeSet::new();
            for (k, g) in bases.iter().enumerate() {
                if k != h {
                    for a in g {
                        for b in g {
                            others.insert(a.mul(b));
                        }
                    }
                }
            }
            let current: Vec<Monomial> = bases[h].iter().cloned().collect();
            for a in current {
                let sq = a.scale(2);
                if t.contains(&sq) || others.contains(&sq) {
                    continue;
                }
                bases[h].remove(&a);
                if in_sumset(&sq, &bases[h]) {
                    bases[h].insert(a);
                } else {
                    report.removed += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = prog.clone();
    for (&k, g) in sigma0.iter().zip(bases) {
        out.sos_blocks[k].basis = g.into_iter().collect();
    }
    out.refresh_support();
    (out, report)
}
