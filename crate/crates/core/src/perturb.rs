//! Perturbation and penalty polynomials used by the perturbed relaxations,
//! together with the certified bounds they depend on.

use thiserror::Error;

use crate::poly::{Monomial, PolyError, Polynomial};
use crate::pop::{CliqueCover, ConstraintKind, Pop};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("R_{index} = {value} must be positive")]
    NonPositiveBound { index: usize, value: f64 },
    #[error("expected {expected} per-constraint values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("dominating polynomial g_{index} vanishes at the query point")]
    DivisionByZero { index: usize },
    #[error("invalid perturbation parameters: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbVariant {
    /// `Θ_{r,b}(x) = 1 + Σ_i (x_i / b)^{2r}`
    ThetaRB,
    /// `θ_r(x) = Σ_i Σ_{k=0}^{r} x_i^{2k} / k!`
    ThetaFactorial,
    /// `φ_{r,b}`, see [`phi_poly`].
    PhiRB,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbSpec {
    pub r: u32,
    pub b: f64,
    pub eps: f64,
    pub variant: PerturbVariant,
    /// Restricts the sum over `i` to these variables (the `Θ_{r,h,b}` form).
    pub clique: Option<Vec<usize>>,
}

impl PerturbSpec {
    pub fn theta(r: u32, b: f64) -> Self {
        PerturbSpec {
            r,
            b,
            eps: 1.0,
            variant: PerturbVariant::ThetaRB,
            clique: None,
        }
    }

    pub fn validate(&self) -> Result<(), PerturbError> {
        if self.r < 1 {
            return Err(PerturbError::InvalidSpec("order r must be at least 1".into()));
        }
        if !(self.b >= 1.0) {
            return Err(PerturbError::InvalidSpec(format!("radius b = {} < 1", self.b)));
        }
        if !(self.eps >= 0.0) {
            return Err(PerturbError::InvalidSpec(format!("eps = {} < 0", self.eps)));
        }
        Ok(())
    }
}

/// `Θ_{r,b}` (or its clique restriction) and `θ_r`, unscaled by `eps`.
///
/// `PhiRB` is not a pure function of the spec; use [`phi_poly`] for it.
pub fn theta_poly(spec: &PerturbSpec, n: usize) -> Result<Polynomial, PerturbError> {
    spec.validate()?;
    let vars: Vec<usize> = match &spec.clique {
        Some(c) => c.clone(),
        None => (0..n).collect(),
    };
    let mut p = Polynomial::zero(n);
    match spec.variant {
        PerturbVariant::ThetaRB => {
            p.add_term(Monomial::one(n), 1.0);
            let w = spec.b.powi(-2 * spec.r as i32);
            for &i in &vars {
                let mut e = vec![0; n];
                e[i] = 2 * spec.r;
                p.add_term(Monomial::new(e), w);
            }
        }
        PerturbVariant::ThetaFactorial => {
            let mut fact = 1.0;
            for k in 0..=spec.r {
                if k > 0 {
                    fact *= k as f64;
                }
                for &i in &vars {
                    let mut e = vec![0; n];
                    e[i] = 2 * k;
                    p.add_term(Monomial::new(e), 1.0 / fact);
                }
            }
        }
        PerturbVariant::PhiRB => {
            return Err(PerturbError::InvalidSpec(
                "phi needs the problem data; call phi_poly".into(),
            ))
        }
    }
    Ok(p)
}

/// Certified upper bound `Σ_α |c_α| b^{|α|} ≥ max_{[-b,b]ⁿ} |f|`.
pub fn bound_r(f: &Polynomial, b: f64) -> f64 {
    f.terms()
        .map(|(m, c)| c.abs() * b.powi(m.degree() as i32))
        .sum()
}

/// Grid estimate of `max_{[-b,b]ⁿ} |f|` on `points` nodes per axis. Never
/// a certified value; callers report it next to [`bound_r`].
pub fn bound_r_grid(f: &Polynomial, b: f64, points: usize) -> f64 {
    let n = f.nvars();
    let points = points.max(2);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut best = 0.0f64;
    loop {
        for i in 0..n {
            x[i] = -b + 2.0 * b * idx[i] as f64 / (points - 1) as f64;
        }
        best = best.max(f.eval(&x).map(f64::abs).unwrap_or(0.0));
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    best
}

/// Certified bounds `R_j` for every constraint of `pop` on `[-b, b]ⁿ`.
pub fn constraint_bounds(pop: &Pop, b: f64) -> Vec<f64> {
    pop.constraints.iter().map(|c| bound_r(&c.poly, b)).collect()
}

fn psi_term(f: &Polynomial, rj: f64, r: u32) -> Polynomial {
    let n = f.nvars();
    let inner = &Polynomial::constant(n, 1.0) - &f.scale(1.0 / rj);
    let prod = f * &inner.pow(2 * r);
    -&prod
}

fn check_bounds(pop: &Pop, bounds: &[f64]) -> Result<(), PerturbError> {
    if bounds.len() != pop.constraints.len() {
        return Err(PerturbError::LengthMismatch {
            expected: pop.constraints.len(),
            found: bounds.len(),
        });
    }
    for (j, &v) in bounds.iter().enumerate() {
        if !(v > 0.0) {
            return Err(PerturbError::NonPositiveBound {
                index: j + 1,
                value: v,
            });
        }
    }
    Ok(())
}

/// `ψ_r(x) = -Σ_j f_j(x) (1 - f_j(x)/R_j)^{2r}` over the inequality constraints.
pub fn psi_poly(pop: &Pop, r: u32, bounds: &[f64]) -> Result<Polynomial, PerturbError> {
    check_bounds(pop, bounds)?;
    let mut acc = Polynomial::zero(pop.nvars());
    for (c, &rj) in pop.constraints.iter().zip(bounds) {
        if c.kind == ConstraintKind::Geq0 {
            acc = &acc + &psi_term(&c.poly, rj, r);
        }
    }
    Ok(acc)
}

/// `ψ_{r,h}` for every clique `h`, summing only over `J_h`.
pub fn psi_poly_cliques(
    pop: &Pop,
    r: u32,
    bounds: &[f64],
    cover: &CliqueCover,
) -> Result<Vec<Polynomial>, PerturbError> {
    check_bounds(pop, bounds)?;
    let assign = crate::pop::assign_constraints(pop, cover)
        .map_err(|e| PerturbError::InvalidSpec(e.to_string()))?;
    Ok(assign
        .constraints_of_clique
        .iter()
        .map(|js| {
            let mut acc = Polynomial::zero(pop.nvars());
            for &j in js {
                let c = &pop.constraints[j];
                if c.kind == ConstraintKind::Geq0 {
                    acc = &acc + &psi_term(&c.poly, bounds[j], r);
                }
            }
            acc
        })
        .collect())
}

/// Pointwise `ψ̃_r(x) = -Σ_j f_j(x) (1 - f_j(x)/g_j(x))^{2r}`; the quotient
/// is rational so nothing is expanded.
pub fn psi_rational_eval(
    pop: &Pop,
    dominators: &[Polynomial],
    r: u32,
    x: &[f64],
) -> Result<f64, PerturbError> {
    if dominators.len() != pop.constraints.len() {
        return Err(PerturbError::LengthMismatch {
            expected: pop.constraints.len(),
            found: dominators.len(),
        });
    }
    let mut acc = 0.0;
    for (j, (c, g)) in pop.constraints.iter().zip(dominators).enumerate() {
        if c.kind != ConstraintKind::Geq0 {
            continue;
        }
        let fv = c.poly.eval(x)?;
        let gv = g.eval(x)?;
        if gv == 0.0 {
            return Err(PerturbError::DivisionByZero { index: j + 1 });
        }
        acc -= fv * (1.0 - fv / gv).powi(2 * r as i32);
    }
    Ok(acc)
}

/// Sample points of `[-b, b]ⁿ` where some `|f_j| > g_j`. Dominance is only
/// ever validated by sampling.
pub fn dominance_violations(
    pop: &Pop,
    dominators: &[Polynomial],
    b: f64,
    points: usize,
) -> Result<Vec<Vec<f64>>, PerturbError> {
    let n = pop.nvars();
    let points = points.max(2);
    let mut bad = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx
            .iter()
            .map(|&k| -b + 2.0 * b * k as f64 / (points - 1) as f64)
            .collect();
        for (c, g) in pop.constraints.iter().zip(dominators) {
            if c.poly.eval(&x)?.abs() > g.eval(&x)? {
                bad.push(x.clone());
                break;
            }
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    Ok(bad)
}

/// `γ = max(1, max_{j=0..m} Σ_α |c_α| (√2 b)^{|α|})`, with `f_0` the objective.
///
/// The term-wise bound gives `|f_j| ≤ γ` on `‖x‖∞ ≤ √2 b` and
/// `|f_j| ≤ γ ‖x/b‖∞^d` beyond it.
pub fn bound_gamma(pop: &Pop, b: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * b;
    std::iter::once(&pop.objective)
        .chain(pop.constraints.iter().map(|c| &c.poly))
        .map(|p| bound_r(p, s))
        .fold(1.0, f64::max)
}

/// `φ_{r,b}(x) = -((m+2)γ/b²) Σ_i (x_i/b)^{2d(r+1)} (b² - x_i²)`.
pub fn phi_poly(pop: &Pop, r: u32, b: f64, gamma: f64) -> Polynomial {
    let n = pop.nvars();
    let m = pop.constraints.len() as f64;
    let d = pop.max_degree();
    let k = 2 * d * (r + 1);
    let lead = -(m + 2.0) * gamma / (b * b);
    let w = b.powi(-(k as i32));
    let mut p = Polynomial::zero(n);
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = k;
        p.add_term(Monomial::new(e.clone()), lead * w * b * b);
        e[i] = k + 2;
        p.add_term(Monomial::new(e), -lead * w);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;
    use crate::pop::parse_pop;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn theta_examples() {
        let p = theta_poly(&PerturbSpec::theta(2, 1.0), 2).unwrap();
        assert_eq!(p, parse_polynomial("1 + x^4 + y^4", &names(&["x", "y"])).unwrap());
        let q = theta_poly(&PerturbSpec::theta(1, 2.0), 1).unwrap();
        assert_eq!(q, parse_polynomial("1 + 1/4*x^2", &names(&["x"])).unwrap());
        let mut spec = PerturbSpec::theta(2, 1.0);
        spec.variant = PerturbVariant::ThetaFactorial;
        let t = theta_poly(&spec, 1).unwrap();
        assert_eq!(t, parse_polynomial("1 + x^2 + 1/2*x^4", &names(&["x"])).unwrap());
        assert_eq!(t.eval(&[0.0]).unwrap(), 1.0);
        let t3 = theta_poly(&spec, 3).unwrap();
        assert_eq!(t3.eval(&[0.0, 0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn theta_clique_form() {
        let mut spec = PerturbSpec::theta(1, 1.0);
        spec.clique = Some(vec![1]);
        let p = theta_poly(&spec, 3).unwrap();
        assert_eq!(p, parse_polynomial("1 + y^2", &names(&["x", "y", "z"])).unwrap());
    }

    #[test]
    fn invalid_spec() {
        assert!(theta_poly(&PerturbSpec::theta(0, 1.0), 1).is_err());
        assert!(theta_poly(&PerturbSpec::theta(1, 0.5), 1).is_err());
    }

    #[test]
    fn bound_r_examples() {
        let v = names(&["x", "y"]);
        let f = parse_polynomial("x*y - 1/16", &v).unwrap();
        assert_eq!(bound_r(&f, 1.0), 1.0625);
        assert_eq!(bound_r_grid(&f, 1.0, 41), 1.0625);
        assert_eq!(bound_r(&Polynomial::constant(1, -3.5), 2.0), 3.5);
        let x = parse_polynomial("x", &names(&["x"])).unwrap();
        assert_eq!(bound_r(&x, 3.0), 3.0);
    }

    #[test]
    fn psi_single_constraint() {
        let pop = parse_pop("vars x\nmin x\nst x >= 0\n").unwrap();
        let psi = psi_poly(&pop, 1, &[1.0]).unwrap();
        let expect = parse_polynomial("-x*(1 - x)^2", &names(&["x"]));
        // the grammar has no parentheses; build the reference by hand
        assert!(expect.is_err());
        let x = Polynomial::var(1, 0);
        let one = Polynomial::constant(1, 1.0);
        let reference = -&(&x * &(&one - &x).pow(2));
        assert_eq!(psi, reference);
        // vanishes where f_j = R_j
        assert_eq!(psi.eval(&[1.0]).unwrap(), 0.0);
        assert!(matches!(
            psi_poly(&pop, 1, &[0.0]),
            Err(PerturbError::NonPositiveBound { index: 1, .. })
        ));
    }

    #[test]
    fn psi_degree() {
        let pop = parse_pop("vars x y\nmin x\nst x*y - 1 >= 0\nst x >= 0\n").unwrap();
        let r = 2;
        let psi = psi_poly(&pop, r, &constraint_bounds(&pop, 1.0)).unwrap();
        assert_eq!(psi.degree(), (2 * r + 1) * 2);
    }

    #[test]
    fn psi_rational_example() {
        let pop = parse_pop("vars x\nmin x\nst 1 - x^4 >= 0\n").unwrap();
        let g = parse_polynomial("2 + 2*x^2", &names(&["x"])).unwrap();
        let v0 = psi_rational_eval(&pop, std::slice::from_ref(&g), 1, &[0.0]).unwrap();
        assert!((v0 + 0.25).abs() < 1e-15);
        let v1 = psi_rational_eval(&pop, std::slice::from_ref(&g), 1, &[1.0]).unwrap();
        assert_eq!(v1, 0.0);
        assert!(dominance_violations(&pop, &[g], 1.0, 101).unwrap().is_empty());
        let zero = Polynomial::zero(1);
        assert!(matches!(
            psi_rational_eval(&pop, &[zero], 1, &[0.0]),
            Err(PerturbError::DivisionByZero { index: 1 })
        ));
    }

    #[test]
    fn gamma_examples() {
        let pop = parse_pop("vars x y\nmin 2*x + y\n").unwrap();
        assert!((bound_gamma(&pop, 1.0) - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        let c = parse_pop("vars x\nmin 5\n").unwrap();
        assert_eq!(bound_gamma(&c, 1.0), 5.0);
        let z = parse_pop("vars x\nmin 0\n").unwrap();
        assert_eq!(bound_gamma(&z, 1.0), 1.0);
    }

    #[test]
    fn phi_examples() {
        let pop = parse_pop("vars x\nmin x^2\n").unwrap();
        let phi = phi_poly(&pop, 1, 1.0, 1.0);
        // exponent 2d(r+1) = 8
        assert_eq!(phi, parse_polynomial("-2*x^8 + 2*x^10", &names(&["x"])).unwrap());
        assert_eq!(phi.eval(&[0.0]).unwrap(), 0.0);
        let pop2 = parse_pop("vars x y\nmin x^2 + y\nst x >= 0\n").unwrap();
        let phi2 = phi_poly(&pop2, 2, 3.0, 4.0);
        assert_eq!(phi2.degree(), 2 * 2 * 3 + 2);
        assert!(phi2.eval(&[3.0, -3.0]).unwrap().abs() < 1e-9);
    }
}
