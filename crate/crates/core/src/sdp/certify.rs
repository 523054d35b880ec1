use super::SdpSolution;
use crate::poly::Monomial;
use crate::pop::{ConstraintKind, Pop};
use crate::relaxation::SosProgram;

/// Threshold on both metrics for an instance to count as solved.
pub const SOLVED_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `|sdpobj − f(x̂)| / max(1, |f(x̂)|)`.
    pub eps_obj: f64,
    /// `min_k f_k(x̂)`, equalities entering as `−|f_k(x̂)|`; 0 without constraints.
    pub eps_feas: f64,
    pub pop_obj: f64,
    pub solved: bool,
}

/// Projects the moment vector onto `ℝⁿ`: `x̂_i = y_{e_i} / y_0`.
///
/// Returns `None` when some degree-one monomial has no row or the
/// constant-monomial moment vanishes.
pub fn extract_candidate(sol: &SdpSolution, prog: &SosProgram, pop: &Pop) -> Option<Vec<f64>> {
    let n = pop.nvars();
    let rows = prog.matching_support.to_vec();
    if rows.len() != sol.y_dual.len() {
        return None;
    }
    let at = |m: &Monomial| rows.binary_search(m).ok().map(|k| sol.y_dual[k]);
    let y0 = at(&Monomial::one(n))?;
    if y0 == 0.0 || !y0.is_finite() {
        return None;
    }
    (0..n).map(|i| at(&Monomial::var(n, i)).map(|v| v / y0)).collect()
}

/// Objective and feasibility errors of a candidate point.
pub fn certify_metrics(pop: &Pop, xhat: &[f64], sdpobj: f64) -> Result<Metrics, crate::poly::PolyError> {
    let fx = pop.objective.eval(xhat)?;
    let eps_obj = (sdpobj - fx).abs() / fx.abs().max(1.0);
    let mut eps_feas = f64::INFINITY;
    for c in &pop.constraints {
        let v = c.poly.eval(xhat)?;
        let v = match c.kind {
            ConstraintKind::Geq0 => v,
            ConstraintKind::Eq0 => -v.abs(),
        };
        eps_feas = eps_feas.min(v);
    }
    if pop.constraints.is_empty() {
        eps_feas = 0.0;
    }
    Ok(Metrics {
        eps_obj,
        eps_feas,
        pop_obj: fx,
        solved: eps_obj < SOLVED_TOL && eps_feas > -SOLVED_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    /// `None` when the adaptive value is zero.
    pub value: Option<f64>,
    pub same_sign: bool,
}

/// `ref_obj / adaptive_obj`.
pub fn ratio(ref_obj: f64, adaptive_obj: f64) -> Ratio {
    Ratio {
        value: (adaptive_obj != 0.0).then(|| ref_obj / adaptive_obj),
        same_sign: ref_obj.signum() == adaptive_obj.signum() && ref_obj != 0.0 && adaptive_obj != 0.0,
    }
}
