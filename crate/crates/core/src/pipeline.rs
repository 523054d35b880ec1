//! End-to-end solve of one POP with one relaxation.

use std::time::Instant;

use thiserror::Error;

use crate::perturb::PerturbError;
use crate::poly::PolyError;
use crate::pop::{Pop, PopError};
use crate::relaxation::{assemble_sdp, build, BuildOptions, Method, RelaxError, SosProgram};
use crate::sdp::{
    certify_metrics, extract_candidate, solve_ipm, IpmOptions, Metrics, SdpData, SdpError,
    SdpSolution,
};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Pop(#[from] PopError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub program: SosProgram,
    pub sdp: SdpData,
    pub solution: SdpSolution,
    /// Degree-one moments scaled by the zeroth one.
    pub candidate: Option<Vec<f64>>,
    /// Present when the solver produced a value and a candidate exists.
    pub metrics: Option<Metrics>,
    /// Wall time of build, solve and certification.
    pub seconds: f64,
}

impl Outcome {
    /// The bound, when the solver status carries a value.
    pub fn objective(&self) -> Option<f64> {
        self.solution
            .status
            .has_value()
            .then(|| self.solution.objective())
    }

    pub fn solved(&self) -> bool {
        self.metrics.is_some_and(|m| m.solved)
    }
}

/// Builds, reduces, assembles, solves and certifies.
pub fn solve_pop(
    pop: &Pop,
    method: Method,
    opts: &BuildOptions,
    ipm: &IpmOptions,
) -> Result<Outcome, Error> {
    let start = Instant::now();
    let program = build(pop, method, opts)?;
    let sdp = assemble_sdp(&program);
    let solution = solve_ipm(&sdp, ipm)?;
    let candidate = extract_candidate(&solution, &program, pop);
    let value = solution.status.has_value().then(|| solution.objective());
    let metrics = match (&candidate, value) {
        (Some(x), Some(v)) => Some(certify_metrics(pop, x, v)?),
        _ => None,
    };
    Ok(Outcome {
        program,
        sdp,
        solution,
        candidate,
        metrics,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pop::parse_pop;

    #[test]
    fn st_e08_lasserre_extracts_minimizer() {
        let pop = parse_pop(include_str!("../data/st_e08.pop")).unwrap();
        let out = solve_pop(&pop, Method::Lasserre, &BuildOptions::new(3), &IpmOptions::default()).unwrap();
        let x = out.candidate.unwrap();
        let s6 = 6f64.sqrt();
        let s2 = 2f64.sqrt();
        assert!((x[0] - (s6 - s2) / 8.0).abs() < 1e-4, "{x:?}");
        assert!((x[1] - (s6 + s2) / 8.0).abs() < 1e-4);
        let m = out.metrics.unwrap();
        assert!(m.eps_obj < 1e-6, "{m:?}");
    }
}
