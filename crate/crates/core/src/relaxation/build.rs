use super::{BlockRole, FreeBlock, RelaxError, SosBlock, SosProgram};
use crate::perturb::{theta_poly, PerturbSpec, PerturbVariant};
use crate::poly::{monomial_basis, monomial_basis_on, Monomial, Polynomial, SupportSet};
use crate::pop::{assign_constraints, CliqueCover, ConstraintKind, Pop};

/// `r̃ = ⌊r/d − 1/2⌋` for a constraint of degree `d`; `None` when `2r < d`.
/// Constant constraints get 0.
pub fn adaptive_order(r: u32, d: u32) -> Option<u32> {
    if d == 0 {
        Some(0)
    } else if 2 * r < d {
        None
    } else {
        Some((2 * r - d) / (2 * d))
    }
}

fn check_objective(pop: &Pop, r: u32) -> Result<(), RelaxError> {
    let d = pop.objective.degree();
    if 2 * r < d {
        return Err(RelaxError::OrderTooSmall {
            r,
            needed: d,
            what: "the objective".into(),
        });
    }
    Ok(())
}

fn too_small(r: u32, j: usize, d: u32) -> RelaxError {
    RelaxError::OrderTooSmall {
        r,
        needed: d,
        what: format!("constraint {}", j + 1),
    }
}

fn sigma0(n: usize, r: u32) -> SosBlock {
    SosBlock {
        label: "sigma0".into(),
        role: BlockRole::Sigma0(None),
        basis: monomial_basis(n, r),
        weight: Polynomial::constant(n, 1.0),
    }
}

fn sigma0_cliques(n: usize, r: u32, cover: &CliqueCover) -> Vec<SosBlock> {
    cover
        .cliques
        .iter()
        .enumerate()
        .map(|(h, c)| SosBlock {
            label: format!("sigma0[{}]", h + 1),
            role: BlockRole::Sigma0(Some(h)),
            basis: monomial_basis_on(n, c, r),
            weight: Polynomial::constant(n, 1.0),
        })
        .collect()
}

fn sos_multiplier(j: usize, basis: Vec<Monomial>, weight: &Polynomial) -> SosBlock {
    SosBlock {
        label: format!("sigma[{}]", j + 1),
        role: BlockRole::Constraint(j),
        basis,
        weight: weight.clone(),
    }
}

fn free_multiplier(j: usize, support: Vec<Monomial>, weight: &Polynomial) -> FreeBlock {
    FreeBlock {
        label: format!("lambda[{}]", j + 1),
        constraint: j,
        support,
        weight: weight.clone(),
    }
}

/// `k F̃_j` in graded-lex order.
fn support_power(f: &Polynomial, k: u32) -> Vec<Monomial> {
    SupportSet::support(f).union_zero().minkowski_power(k).to_vec()
}

fn radius(pop: &Pop) -> Result<f64, RelaxError> {
    pop.radius.ok_or(RelaxError::MissingRadius)
}

/// Lasserre's dense relaxation: `σ_0 ∈ Σ_r`, `σ_j ∈ Σ_{r_j}` with
/// `r_j = r − ⌈deg f_j / 2⌉`, free multipliers of degree `2r − deg f_j`.
pub fn build_lasserre(pop: &Pop, r: u32) -> Result<SosProgram, RelaxError> {
    check_objective(pop, r)?;
    let n = pop.nvars();
    let mut sos = vec![sigma0(n, r)];
    let mut free = Vec::new();
    for (j, c) in pop.constraints.iter().enumerate() {
        let d = c.poly.degree();
        match c.kind {
            ConstraintKind::Geq0 => {
                let rj = r.checked_sub(d.div_ceil(2)).ok_or_else(|| too_small(r, j, d))?;
                sos.push(sos_multiplier(j, monomial_basis(n, rj), &c.poly));
            }
            ConstraintKind::Eq0 => {
                let k = (2 * r).checked_sub(d).ok_or_else(|| too_small(r, j, d))?;
                free.push(free_multiplier(j, monomial_basis(n, k), &c.poly));
            }
        }
    }
    Ok(SosProgram::new(pop.var_names.clone(), pop.objective.clone(), sos, free))
}

/// Adaptive SOS relaxation: `σ_j` restricted to squares supported on
/// `r̃_j F̃_j`. With a cover, `σ_0` splits into one block per clique.
pub fn build_adaptive(
    pop: &Pop,
    r: u32,
    cover: Option<&CliqueCover>,
) -> Result<SosProgram, RelaxError> {
    check_objective(pop, r)?;
    let n = pop.nvars();
    let mut sos = match cover {
        Some(cv) => sigma0_cliques(n, r, cv),
        None => vec![sigma0(n, r)],
    };
    let mut free = Vec::new();
    for (j, c) in pop.constraints.iter().enumerate() {
        let d = c.poly.degree();
        let k = adaptive_order(r, d).ok_or_else(|| too_small(r, j, d))?;
        match c.kind {
            ConstraintKind::Geq0 => sos.push(sos_multiplier(j, support_power(&c.poly, k), &c.poly)),
            ConstraintKind::Eq0 => {
                free.push(free_multiplier(j, support_power(&c.poly, 2 * k), &c.poly))
            }
        }
    }
    Ok(SosProgram::new(pop.var_names.clone(), pop.objective.clone(), sos, free))
}

/// Correlative-sparse relaxation: `σ_{0,h} ∈ Σ_{r, C_h}` and
/// `σ_j ∈ Σ_{r_j, D_j}`.
pub fn build_sparse(pop: &Pop, r: u32, cover: &CliqueCover) -> Result<SosProgram, RelaxError> {
    check_objective(pop, r)?;
    let n = pop.nvars();
    let assign = assign_constraints(pop, cover)?;
    let mut sos = sigma0_cliques(n, r, cover);
    let mut free = Vec::new();
    for (j, c) in pop.constraints.iter().enumerate() {
        let d = c.poly.degree();
        let vars = &assign.clique_union[j];
        match c.kind {
            ConstraintKind::Geq0 => {
                let rj = r.checked_sub(d.div_ceil(2)).ok_or_else(|| too_small(r, j, d))?;
                sos.push(sos_multiplier(j, monomial_basis_on(n, vars, rj), &c.poly));
            }
            ConstraintKind::Eq0 => {
                let k = (2 * r).checked_sub(d).ok_or_else(|| too_small(r, j, d))?;
                free.push(free_multiplier(j, monomial_basis_on(n, vars, k), &c.poly));
            }
        }
    }
    Ok(SosProgram::new(pop.var_names.clone(), pop.objective.clone(), sos, free))
}

fn multipliers_over_support(
    pop: &Pop,
    rtilde: u32,
    sos: &mut Vec<SosBlock>,
    free: &mut Vec<FreeBlock>,
) {
    for (j, c) in pop.constraints.iter().enumerate() {
        match c.kind {
            ConstraintKind::Geq0 => sos.push(sos_multiplier(j, support_power(&c.poly, rtilde), &c.poly)),
            ConstraintKind::Eq0 => {
                free.push(free_multiplier(j, support_power(&c.poly, 2 * rtilde), &c.poly))
            }
        }
    }
}

/// Perturbed relaxation with target `f + ε Θ_{r,b}` (or `f + ε Σ_h Θ_{r,h,b}`
/// with a cover) and multipliers over `r̃ F̃_j`.
pub fn build_perturbed(
    pop: &Pop,
    r: u32,
    rtilde: u32,
    eps: f64,
    cover: Option<&CliqueCover>,
) -> Result<SosProgram, RelaxError> {
    if !(eps >= 0.0) {
        return Err(RelaxError::NegativeEps(eps));
    }
    let b = radius(pop)?;
    check_objective(pop, r)?;
    let n = pop.nvars();
    let mut target = pop.objective.clone();
    let mut sos = match cover {
        Some(cv) => {
            for c in &cv.cliques {
                let spec = PerturbSpec {
                    clique: Some(c.clone()),
                    ..PerturbSpec::theta(r, b)
                };
                target = &target + &theta_poly(&spec, n)?.scale(eps);
            }
            sigma0_cliques(n, r, cv)
        }
        None => {
            target = &target + &theta_poly(&PerturbSpec::theta(r, b), n)?.scale(eps);
            vec![sigma0(n, r)]
        }
    };
    let mut free = Vec::new();
    multipliers_over_support(pop, rtilde, &mut sos, &mut free);
    Ok(SosProgram::new(pop.var_names.clone(), target, sos, free))
}

/// Relaxation with target `f + ε θ_r`, multipliers over `r̃ F̃_j` and one
/// scalar `μ_i ≥ 0` per variable over the monomial `x_i^{d(r̃+1)}` with
/// weight `b² − x_i²`.
pub fn build_alternative(
    pop: &Pop,
    r: u32,
    rtilde: u32,
    eps: f64,
) -> Result<SosProgram, RelaxError> {
    if !(eps >= 0.0) {
        return Err(RelaxError::NegativeEps(eps));
    }
    let b = radius(pop)?;
    check_objective(pop, r)?;
    let n = pop.nvars();
    let spec = PerturbSpec {
        variant: PerturbVariant::ThetaFactorial,
        ..PerturbSpec::theta(r, b)
    };
    let target = &pop.objective + &theta_poly(&spec, n)?.scale(eps);
    let mut sos = vec![sigma0(n, r)];
    let mut free = Vec::new();
    multipliers_over_support(pop, rtilde, &mut sos, &mut free);
    let d = pop.max_degree();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = d * (rtilde + 1);
        let mut w = Polynomial::constant(n, b * b);
        let mut sq = vec![0; n];
        sq[i] = 2;
        w.add_term(Monomial::new(sq), -1.0);
        sos.push(SosBlock {
            label: format!("mu[{}]", i + 1),
            role: BlockRole::Mu(i),
            basis: vec![Monomial::new(e)],
            weight: w,
        });
    }
    Ok(SosProgram::new(pop.var_names.clone(), target, sos, free))
}
