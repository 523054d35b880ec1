//! Sums-of-squares relaxations for polynomial optimization: sparse
//! polynomials, POP models, Lasserre/adaptive/sparse/perturbed relaxations,
//! an embedded SDP interior-point solver and a benchmark harness.

pub mod bench;
pub mod perturb;
pub mod pipeline;
pub mod poly;
pub mod pop;
pub mod relaxation;
pub mod sdp;

pub use pipeline::{solve_pop, Error, Outcome};
