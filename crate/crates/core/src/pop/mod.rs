//! Polynomial optimization problems: `minimize f(x)` subject to `f_j(x) ≥ 0`
//! or `f_j(x) = 0`, with an optional variable box.

mod parse;
mod sparsity;

pub use parse::parse_pop;
pub use sparsity::{assign_constraints, chordal_cliques, csp_graph, CliqueCover, CspGraph, Assignment};

use thiserror::Error;

use crate::poly::{PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Poly {
        line: usize,
        #[source]
        source: PolyError,
    },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("inconsistent bounds for `{name}`: {lower} > {upper}")]
    InconsistentBounds { name: String, lower: f64, upper: f64 },
    #[error("invalid box radius {0}; it must be at least 1")]
    InvalidRadius(f64),
    #[error("polynomial has {found} variables, problem has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Geq0,
    Eq0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub poly: Polynomial,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn geq(poly: Polynomial) -> Self {
        Constraint {
            poly,
            kind: ConstraintKind::Geq0,
        }
    }

    pub fn eq(poly: Polynomial) -> Self {
        Constraint {
            poly,
            kind: ConstraintKind::Eq0,
        }
    }
}

/// Per-variable bounds `lower_i ≤ x_i ≤ upper_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl VarBox {
    /// Largest absolute finite bound, if any.
    pub fn max_abs(&self) -> Option<f64> {
        self.lower
            .iter()
            .chain(&self.upper)
            .filter(|v| v.is_finite())
            .map(|v| v.abs())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pop {
    pub var_names: Vec<String>,
    pub objective: Polynomial,
    pub constraints: Vec<Constraint>,
    pub var_box: Option<VarBox>,
    /// Radius `b ≥ 1` of the cube `[-b, b]ⁿ` assumed to contain a minimizer.
    pub radius: Option<f64>,
}

impl Pop {
    pub fn new(
        var_names: Vec<String>,
        objective: Polynomial,
        constraints: Vec<Constraint>,
    ) -> Result<Self, PopError> {
        let pop = Pop {
            var_names,
            objective,
            constraints,
            var_box: None,
            radius: None,
        };
        pop.validate()?;
        Ok(pop)
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn with_radius(mut self, b: f64) -> Result<Self, PopError> {
        if !(b >= 1.0) || !b.is_finite() {
            return Err(PopError::InvalidRadius(b));
        }
        self.radius = Some(b);
        Ok(self)
    }

    /// Attaches a box and appends `x_i - l_i ≥ 0`, `u_i - x_i ≥ 0` for every
    /// finite bound; the radius defaults to `max(1, max |bound|)`.
    pub fn with_box(mut self, var_box: VarBox) -> Result<Self, PopError> {
        let n = self.nvars();
        for i in 0..n {
            let (l, u) = (var_box.lower[i], var_box.upper[i]);
            if l > u {
                return Err(PopError::InconsistentBounds {
                    name: self.var_names[i].clone(),
                    lower: l,
                    upper: u,
                });
            }
            let x = Polynomial::var(n, i);
            if l.is_finite() {
                self.constraints
                    .push(Constraint::geq(&x - &Polynomial::constant(n, l)));
            }
            if u.is_finite() {
                self.constraints
                    .push(Constraint::geq(&Polynomial::constant(n, u) - &x));
            }
        }
        if self.radius.is_none() {
            if let Some(m) = var_box.max_abs() {
                self.radius = Some(m.max(1.0));
            }
        }
        self.var_box = Some(var_box);
        Ok(self)
    }

    /// Adds pairwise bound products `(u_i - x_i)(x_k - l_k)` and friends as
    /// extra `≥ 0` constraints, for every pair `i ≤ k` of boxed variables.
    pub fn with_bound_products(&self) -> Pop {
        let mut out = self.clone();
        let Some(bx) = &self.var_box else {
            return out;
        };
        let n = self.nvars();
        let mut factors: Vec<Vec<Polynomial>> = vec![Vec::new(); n];
        for i in 0..n {
            let x = Polynomial::var(n, i);
            if bx.lower[i].is_finite() {
                factors[i].push(&x - &Polynomial::constant(n, bx.lower[i]));
            }
            if bx.upper[i].is_finite() {
                factors[i].push(&Polynomial::constant(n, bx.upper[i]) - &x);
            }
        }
        for i in 0..n {
            for k in i..n {
                for (a, fa) in factors[i].iter().enumerate() {
                    for (c, fk) in factors[k].iter().enumerate() {
                        // for i == k only the mixed product (x - l)(u - x) is new
                        if i == k && a >= c {
                            continue;
                        }
                        out.constraints.push(Constraint::geq(fa * fk));
                    }
                }
            }
        }
        out
    }

    /// `d = max(deg f, deg f_1, …, deg f_m)`.
    pub fn max_degree(&self) -> u32 {
        self.constraints
            .iter()
            .map(|c| c.poly.degree())
            .chain(std::iter::once(self.objective.degree()))
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), PopError> {
        let n = self.nvars();
        let check = |p: &Polynomial| {
            if p.nvars() != n {
                Err(PopError::DimensionMismatch {
                    expected: n,
                    found: p.nvars(),
                })
            } else {
                Ok(())
            }
        };
        check(&self.objective)?;
        for c in &self.constraints {
            check(&c.poly)?;
        }
        if let Some(b) = self.radius {
            if !(b >= 1.0) {
                return Err(PopError::InvalidRadius(b));
            }
        }
        Ok(())
    }

    /// Evaluates the objective.
    pub fn objective_at(&self, x: &[f64]) -> Result<f64, PolyError> {
        self.objective.eval(x)
    }

    /// Renders the problem in the line-oriented POP file format. Bound
    /// constraints introduced by a box are emitted as ordinary constraints.
    pub fn to_text(&self) -> String {
        let names = &self.var_names;
        let mut s = format!("vars {}\n", names.join(" "));
        s.push_str(&format!("min {}\n", self.objective.to_text(names)));
        for c in &self.constraints {
            let rel = match c.kind {
                ConstraintKind::Geq0 => ">=",
                ConstraintKind::Eq0 => "==",
            };
            s.push_str(&format!("st {} {rel} 0\n", c.poly.to_text(names)));
        }
        if let Some(b) = self.radius {
            s.push_str(&format!("radius {b}\n"));
        }
        s
    }
}
