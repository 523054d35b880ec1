//! Symbolic SOS relaxations of a [`Pop`](crate::pop::Pop), basis reduction
//! and lowering to [`SdpData`](crate::sdp::SdpData).
//!
//! Every relaxation has the shape
//!
//! ```text
//! maximize ρ  s.t.  target − ρ = Σ_k w_k σ_k + Σ_l v_l λ_l
//! ```
//!
//! with `σ_k` SOS over a monomial basis and `λ_l` free polynomials over a
//! support.

mod assemble;
mod build;
mod reduce;

pub use assemble::{assemble_sdp, identity_residual, multipliers};
pub use build::{
    adaptive_order, build_adaptive, build_alternative, build_lasserre, build_perturbed,
    build_sparse,
};
pub use reduce::{reduce_basis, ReductionReport};

use std::str::FromStr;

use thiserror::Error;

use crate::perturb::PerturbError;
use crate::poly::{Monomial, Polynomial, SupportSet};
use crate::pop::{chordal_cliques, csp_graph, Pop, PopError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxError {
    #[error("relaxation order {r} too small: {what} needs 2r >= {needed}")]
    OrderTooSmall { r: u32, needed: u32, what: String },
    #[error("the box radius b is required for this relaxation; add `radius` to the POP or pass --radius")]
    MissingRadius,
    #[error("eps = {0} must be nonnegative")]
    NegativeEps(f64),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Pop(#[from] PopError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockRole {
    /// `σ_0`, or `σ_{0,h}` for clique `h`.
    Sigma0(Option<usize>),
    /// Multiplier of constraint `j` (0-based).
    Constraint(usize),
    /// `μ_i` of the alternative relaxation, for variable `i`.
    Mu(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosBlock {
    pub label: String,
    pub role: BlockRole,
    /// Graded-lex sorted, duplicate free.
    pub basis: Vec<Monomial>,
    pub weight: Polynomial,
}

impl SosBlock {
    /// Monomials `β + γ + δ` reachable by `weight · u_Bᵀ X u_B`.
    pub fn achievable(&self) -> SupportSet {
        let n = self.weight.nvars();
        let mut out = SupportSet::new(n);
        for (a, p) in self.basis.iter().enumerate() {
            for q in &self.basis[a..] {
                let pq = p.mul(q);
                for (w, _) in self.weight.terms() {
                    out.insert(pq.mul(w));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBlock {
    pub label: String,
    /// Equality constraint index (0-based).
    pub constraint: usize,
    pub support: Vec<Monomial>,
    pub weight: Polynomial,
}

impl FreeBlock {
    pub fn achievable(&self) -> SupportSet {
        let mut out = SupportSet::new(self.weight.nvars());
        for s in &self.support {
            for (w, _) in self.weight.terms() {
                out.insert(s.mul(w));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosProgram {
    pub var_names: Vec<String>,
    pub target: Polynomial,
    pub sos_blocks: Vec<SosBlock>,
    pub free_blocks: Vec<FreeBlock>,
    /// Rows of the coefficient-matching system, in graded-lex order.
    pub matching_support: SupportSet,
}

impl SosProgram {
    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub(crate) fn new(
        var_names: Vec<String>,
        target: Polynomial,
        sos_blocks: Vec<SosBlock>,
        free_blocks: Vec<FreeBlock>,
    ) -> Self {
        let n = var_names.len();
        let mut p = SosProgram {
            var_names,
            target,
            sos_blocks,
            free_blocks,
            matching_support: SupportSet::new(n),
        };
        p.refresh_support();
        p
    }

    /// Recomputes `matching_support` as `{0} ∪ supp(target) ∪` every
    /// block's achievable support.
    pub fn refresh_support(&mut self) {
        let mut s = SupportSet::support(&self.target).union_zero();
        for b in &self.sos_blocks {
            s.extend(b.achievable().to_vec());
        }
        for b in &self.free_blocks {
            s.extend(b.achievable().to_vec());
        }
        self.matching_support = s;
    }

    pub fn sigma0_blocks(&self) -> impl Iterator<Item = &SosBlock> {
        self.sos_blocks
            .iter()
            .filter(|b| matches!(b.role, BlockRole::Sigma0(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lasserre,
    Adaptive,
    Sparse,
    AdaptiveSparse,
    Perturbed,
    Alternative,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Lasserre,
        Method::Adaptive,
        Method::Sparse,
        Method::AdaptiveSparse,
        Method::Perturbed,
        Method::Alternative,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Lasserre => "lasserre",
            Method::Adaptive => "adaptive",
            Method::Sparse => "sparse",
            Method::AdaptiveSparse => "adaptive-sparse",
            Method::Perturbed => "perturbed",
            Method::Alternative => "alternative",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = RelaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| RelaxError::UnknownMethod(s.to_string()))
    }
}

/// Options shared by every method; fields a method does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub r: u32,
    pub eps: f64,
    /// Uniform multiplier order for the perturbed relaxations. Defaults to
    /// the smallest adaptive order `r̃_j` over the constraints.
    pub rtilde: Option<u32>,
    /// Use the correlative-sparsity clique cover where the method allows.
    pub sparse: bool,
    pub bound_products: bool,
    pub reduce: bool,
}

impl BuildOptions {
    pub fn new(r: u32) -> Self {
        BuildOptions {
            r,
            eps: 0.0,
            rtilde: None,
            sparse: false,
            bound_products: false,
            reduce: true,
        }
    }
}

/// Builds (and by default reduces) the relaxation `method` of order `opts.r`.
pub fn build(pop: &Pop, method: Method, opts: &BuildOptions) -> Result<SosProgram, RelaxError> {
    let owned;
    let pop = if opts.bound_products {
        owned = pop.with_bound_products();
        &owned
    } else {
        pop
    };
    let cover = || -> Result<_, RelaxError> { Ok(chordal_cliques(&csp_graph(pop))?) };
    let rtilde = || {
        opts.rtilde.unwrap_or_else(|| {
            pop.constraints
                .iter()
                .filter_map(|c| adaptive_order(opts.r, c.poly.degree()))
                .min()
                .unwrap_or(0)
        })
    };
    let prog = match method {
        Method::Lasserre => build_lasserre(pop, opts.r)?,
        Method::Adaptive if opts.sparse => build_adaptive(pop, opts.r, Some(&cover()?))?,
        Method::Adaptive => build_adaptive(pop, opts.r, None)?,
        Method::Sparse => build_sparse(pop, opts.r, &cover()?)?,
        Method::AdaptiveSparse => build_adaptive(pop, opts.r, Some(&cover()?))?,
        Method::Perturbed if opts.sparse => {
            build_perturbed(pop, opts.r, rtilde(), opts.eps, Some(&cover()?))?
        }
        Method::Perturbed => build_perturbed(pop, opts.r, rtilde(), opts.eps, None)?,
        Method::Alternative => build_alternative(pop, opts.r, rtilde(), opts.eps)?,
    };
    Ok(if opts.reduce { reduce_basis(&prog).0 } else { prog })
}
