//! Instance generators, built-in problems and the batch harness.
//!
//! Random instances come from Xoshiro256++ seeded per instance with
//! `stream_seed(family, seed, index)`, a SplitMix64 mix of the three values.
//! The same `(family, seed, index)` always yields the same POP bytes.

use std::io::Write;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;
use thiserror::Error;

use crate::pipeline::{solve_pop, Outcome};
use crate::poly::{Monomial, Polynomial};
use crate::pop::{parse_pop, Constraint, Pop, VarBox};
use crate::relaxation::{BuildOptions, Method};
use crate::sdp::{ratio, IpmOptions, SOLVED_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error("unknown family `{0}` (expected copositivity, boxqp or builtin)")]
    UnknownFamily(String),
    #[error("unsupported family `{0}`: bilinear matrix eigenvalue instances are out of scope")]
    UnsupportedFamily(String),
    #[error("unknown built-in problem `{0}` (expected st_e08 or prestel_delzell)")]
    UnknownBuiltin(String),
    #[error("generator rejected {0} consecutive positive definite matrices")]
    Rejection(usize),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Copositivity,
    BoxQp,
    Builtin,
}

impl Family {
    fn tag(self) -> u64 {
        match self {
            Family::Copositivity => 1,
            Family::BoxQp => 2,
            Family::Builtin => 3,
        }
    }
}

impl FromStr for Family {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "copositivity" => Ok(Family::Copositivity),
            "boxqp" => Ok(Family::BoxQp),
            "builtin" => Ok(Family::Builtin),
            "bmiep" => Err(BenchError::UnsupportedFamily(s.into())),
            _ => Err(BenchError::UnknownFamily(s.into())),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of instance `index` in a batch of `family` with master `seed`.
pub fn stream_seed(family: Family, seed: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(family.tag()) ^ seed) ^ index)
}

fn var_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// `xᵀ Q x + cᵀ x` for symmetric `q`.
fn quadratic(q: &DMatrix<f64>, c: &[f64]) -> Polynomial {
    let n = q.nrows();
    let mut p = Polynomial::zero(n);
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 2;
        p.add_term(Monomial::new(e), q[(i, i)]);
        for k in i + 1..n {
            let mut e = vec![0; n];
            e[i] = 1;
            e[k] = 1;
            p.add_term(Monomial::new(e), 2.0 * q[(i, k)]);
        }
        p.add_term(Monomial::var(n, i), c[i]);
    }
    p
}

/// `min xᵀAx s.t. x ≥ 0, 1 − Σ x_i = 0` with `A_ii = √n/2`, off-diagonal
/// entries uniform on `[−1, 1]`, redrawn while `A` is positive definite.
pub fn gen_copositivity_matrix(n: usize, seed: u64) -> Result<DMatrix<f64>, BenchError> {
    if n < 2 {
        return Err(BenchError::Config(format!("copositivity needs n >= 2, got {n}")));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let diag = (n as f64).sqrt() / 2.0;
    for _ in 0..1000 {
        let mut a = DMatrix::from_element(n, n, 0.0);
        for i in 0..n {
            a[(i, i)] = diag;
            for k in i + 1..n {
                let v: f64 = rng.random_range(-1.0..=1.0);
                a[(i, k)] = v;
                a[(k, i)] = v;
            }
        }
        if Cholesky::new(a.clone()).is_none() {
            return Ok(a);
        }
    }
    Err(BenchError::Rejection(1000))
}

pub fn gen_copositivity(n: usize, seed: u64) -> Result<Pop, BenchError> {
    let a = gen_copositivity_matrix(n, seed)?;
    let mut cons: Vec<Constraint> = (0..n).map(|i| Constraint::geq(Polynomial::var(n, i))).collect();
    let mut simplex = Polynomial::constant(n, 1.0);
    for i in 0..n {
        simplex.add_term(Monomial::var(n, i), -1.0);
    }
    cons.push(Constraint::eq(simplex));
    let pop = Pop::new(var_names(n), quadratic(&a, &vec![0.0; n]), cons)
        .and_then(|p| p.with_radius(1.0))
        .map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(pop)
}

/// `min xᵀQx + cᵀx s.t. 0 ≤ x_i ≤ 1`; each upper-triangle entry of `Q` and
/// each entry of `c` is present with probability `density`, uniform on
/// `[−50, 50]`.
pub fn gen_boxqp(n: usize, density: f64, seed: u64) -> Result<Pop, BenchError> {
    if n < 2 {
        return Err(BenchError::Config(format!("boxqp needs n >= 2, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(BenchError::Config(format!("density {density} outside (0, 1]")));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let draw = |rng: &mut Xoshiro256PlusPlus| {
        if rng.random::<f64>() < density {
            rng.random_range(-50.0..=50.0)
        } else {
            0.0
        }
    };
    let mut q = DMatrix::from_element(n, n, 0.0);
    for i in 0..n {
        for k in i..n {
            let v = draw(&mut rng);
            q[(i, k)] = v;
            q[(k, i)] = v;
        }
    }
    let c: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
    Pop::new(var_names(n), quadratic(&q, &c), vec![])
        .and_then(|p| {
            p.with_box(VarBox {
                lower: vec![0.0; n],
                upper: vec![1.0; n],
            })
        })
        .map_err(|e| BenchError::Config(e.to_string()))
}

/// A named problem with its known optimum and minimizers.
#[derive(Debug, Clone)]
pub struct BuiltinPop {
    pub name: &'static str,
    pub pop: Pop,
    pub optimum: f64,
    pub solutions: Vec<Vec<f64>>,
}

pub const BUILTIN_NAMES: [&str; 2] = ["st_e08", "prestel_delzell"];

pub fn builtin_pop(name: &str) -> Result<BuiltinPop, BenchError> {
    let parse = |s: &str| parse_pop(s).expect("built-in POP parses");
    match name {
        "st_e08" => {
            let (s6, s2) = (6f64.sqrt(), 2f64.sqrt());
            Ok(BuiltinPop {
                name: "st_e08",
                pop: parse(include_str!("../data/st_e08.pop")),
                optimum: (3.0 * s6 - s2) / 8.0,
                solutions: vec![vec![(s6 - s2) / 8.0, (s6 + s2) / 8.0]],
            })
        }
        "prestel_delzell" | "prestel-delzell" => Ok(BuiltinPop {
            name: "prestel_delzell",
            pop: parse(include_str!("../data/prestel_delzell.pop")),
            optimum: -1.5,
            solutions: vec![vec![0.5, 1.0], vec![1.0, 0.5]],
        }),
        _ => Err(BenchError::UnknownBuiltin(name.into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub family: Family,
    pub n: usize,
    pub density: f64,
    pub count: usize,
    pub seed: u64,
    /// The first method is the reference for `ratio`.
    pub methods: Vec<Method>,
    pub r: u32,
    pub eps: f64,
    pub ipm: IpmOptions,
    /// Name for `Family::Builtin`.
    pub builtin: Option<String>,
    /// Spread instances over the rayon pool (needs the `parallel` feature).
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(family: Family, n: usize, methods: Vec<Method>, r: u32) -> Self {
        BenchConfig {
            family,
            n,
            density: 1.0,
            count: 1,
            seed: 0,
            methods,
            r,
            eps: 0.0,
            ipm: IpmOptions::default(),
            builtin: None,
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.methods.is_empty() {
            return Err(BenchError::Config("method list is empty".into()));
        }
        if self.count == 0 {
            return Err(BenchError::Config("count must be at least 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(BenchError::Config(format!("density {} outside (0, 1]", self.density)));
        }
        if self.r == 0 {
            return Err(BenchError::Config("order r must be at least 1".into()));
        }
        if self.family == Family::Builtin {
            builtin_pop(self.builtin.as_deref().unwrap_or(""))?;
        }
        Ok(())
    }

    /// Instance `index` of this batch.
    pub fn instance(&self, index: usize) -> Result<Pop, BenchError> {
        let seed = stream_seed(self.family, self.seed, index as u64);
        match self.family {
            Family::Copositivity => gen_copositivity(self.n, seed),
            Family::BoxQp => gen_boxqp(self.n, self.density, seed),
            Family::Builtin => Ok(builtin_pop(self.builtin.as_deref().unwrap_or(""))?.pop),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub instance: usize,
    pub method: Method,
    pub r: u32,
    pub sdp_obj: Option<f64>,
    pub pop_obj: Option<f64>,
    pub eps_obj: Option<f64>,
    pub eps_feas: Option<f64>,
    /// Reference objective over this method's objective.
    pub ratio: Option<f64>,
    /// Solver status, or `error` when the pipeline failed.
    pub status: String,
    pub error: Option<String>,
    pub iterations: usize,
    pub seconds: f64,
    pub rows: usize,
    pub max_block: usize,
    pub nnz: usize,
}

impl BenchRecord {
    pub fn solved_at(&self, tol: f64) -> bool {
        matches!((self.eps_obj, self.eps_feas), (Some(o), Some(f)) if o < tol && f > -tol)
    }

    pub fn solved(&self) -> bool {
        self.solved_at(SOLVED_TOL)
    }

    fn from_outcome(instance: usize, method: Method, r: u32, out: Result<Outcome, String>) -> Self {
        match out {
            Ok(o) => BenchRecord {
                instance,
                method,
                r,
                sdp_obj: o.objective(),
                pop_obj: o.metrics.map(|m| m.pop_obj),
                eps_obj: o.metrics.map(|m| m.eps_obj),
                eps_feas: o.metrics.map(|m| m.eps_feas),
                ratio: None,
                status: o.solution.status.as_str().into(),
                error: None,
                iterations: o.solution.iterations,
                seconds: o.seconds,
                rows: o.sdp.m,
                max_block: o.sdp.max_block(),
                nnz: o.sdp.nnz(),
            },
            Err(e) => BenchRecord {
                instance,
                method,
                r,
                sdp_obj: None,
                pop_obj: None,
                eps_obj: None,
                eps_feas: None,
                ratio: None,
                status: "error".into(),
                error: Some(e),
                iterations: 0,
                seconds: 0.0,
                rows: 0,
                max_block: 0,
                nnz: 0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub min: f64,
    pub ave: f64,
    pub max: f64,
}

impl Stats {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Stats> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        Some(Stats {
            min: v.iter().cloned().fold(f64::INFINITY, f64::min),
            ave: v.iter().sum::<f64>() / v.len() as f64,
            max: v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub instances: usize,
    pub solved: usize,
    pub ratio: Option<Stats>,
    pub seconds: Option<Stats>,
}

pub fn summarize(methods: &[Method], records: &[BenchRecord]) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|&m| {
            let mine: Vec<&BenchRecord> = records.iter().filter(|r| r.method == m).collect();
            MethodSummary {
                method: m,
                instances: mine.len(),
                solved: mine.iter().filter(|r| r.solved()).count(),
                ratio: Stats::of(mine.iter().filter_map(|r| r.ratio)),
                seconds: Stats::of(mine.iter().filter(|r| r.error.is_none()).map(|r| r.seconds)),
            }
        })
        .collect()
}

fn run_instance(cfg: &BenchConfig, index: usize) -> Vec<BenchRecord> {
    let pop = cfg.instance(index);
    let mut recs: Vec<BenchRecord> = cfg
        .methods
        .iter()
        .map(|&m| {
            let out = pop.as_ref().map_err(|e| e.to_string()).and_then(|pop| {
                let mut opts = BuildOptions::new(cfg.r);
                opts.eps = cfg.eps;
                solve_pop(pop, m, &opts, &cfg.ipm).map_err(|e| e.to_string())
            });
            BenchRecord::from_outcome(index, m, cfg.r, out)
        })
        .collect();
    if let Some(reference) = recs[0].sdp_obj {
        for rec in &mut recs {
            rec.ratio = rec.sdp_obj.and_then(|v| ratio(reference, v).value);
        }
    }
    recs
}

/// Runs every instance × method. Failures are recorded, never fatal;
/// records come back in instance order, then method order.
pub fn run_bench(cfg: &BenchConfig) -> Result<(Vec<BenchRecord>, Vec<MethodSummary>), BenchError> {
    cfg.validate()?;
    let per_instance: Vec<Vec<BenchRecord>> = if cfg.parallel {
        run_all_parallel(cfg)
    } else {
        (0..cfg.count).map(|i| run_instance(cfg, i)).collect()
    };
    let records: Vec<BenchRecord> = per_instance.into_iter().flatten().collect();
    let summary = summarize(&cfg.methods, &records);
    Ok((records, summary))
}

#[cfg(feature = "parallel")]
fn run_all_parallel(cfg: &BenchConfig) -> Vec<Vec<BenchRecord>> {
    use rayon::prelude::*;
    (0..cfg.count).into_par_iter().map(|i| run_instance(cfg, i)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all_parallel(cfg: &BenchConfig) -> Vec<Vec<BenchRecord>> {
    (0..cfg.count).map(|i| run_instance(cfg, i)).collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    instance: usize,
    method: &'a str,
    r: u32,
    sdp_obj: Option<f64>,
    pop_obj: Option<f64>,
    eps_obj: Option<f64>,
    eps_feas: Option<f64>,
    ratio: Option<f64>,
    status: &'a str,
    iters: usize,
    rows: usize,
    max_block: usize,
    nnz: usize,
    seconds: Option<f64>,
}

/// Writes the records as CSV. With `with_time = false` the `seconds` column
/// is left empty so that reruns compare byte for byte.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W, with_time: bool) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            instance: r.instance,
            method: r.method.as_str(),
            r: r.r,
            sdp_obj: r.sdp_obj,
            pop_obj: r.pop_obj,
            eps_obj: r.eps_obj,
            eps_feas: r.eps_feas,
            ratio: r.ratio,
            status: &r.status,
            iters: r.iterations,
            rows: r.rows,
            max_block: r.max_block,
            nnz: r.nnz,
            seconds: with_time.then_some(r.seconds),
        })
        .map_err(|e| BenchError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| BenchError::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pop::csp_graph;

    #[test]
    fn copositivity_diagonal_and_rejection() {
        let a = gen_copositivity_matrix(5, 42).unwrap();
        for i in 0..5 {
            assert!((a[(i, i)] - 1.118034).abs() < 1e-6);
        }
        assert!(a.clone().symmetric_eigenvalues().min() < 0.0);
        assert_eq!(a, a.transpose());
        let pop = gen_copositivity(5, 42).unwrap();
        assert_eq!(pop.constraints.len(), 6);
        assert_eq!(pop.to_text(), gen_copositivity(5, 42).unwrap().to_text());
    }

    #[test]
    fn boxqp_shapes() {
        let pop = gen_boxqp(2, 1.0, 7).unwrap();
        assert_eq!(pop.constraints.len(), 4);
        assert_eq!(pop.radius, Some(1.0));
        assert_eq!(pop.to_text(), gen_boxqp(2, 1.0, 7).unwrap().to_text());
        // tiny density: almost surely no cross terms
        let pop = gen_boxqp(6, 1e-9, 3).unwrap();
        let g = csp_graph(&pop);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn builtins() {
        let b = builtin_pop("st_e08").unwrap();
        assert!((b.optimum - 0.741781958247055).abs() < 1e-15);
        let p = builtin_pop("prestel_delzell").unwrap();
        assert_eq!(p.optimum, -1.5);
        assert_eq!(p.solutions, vec![vec![0.5, 1.0], vec![1.0, 0.5]]);
        for x in &p.solutions {
            assert_eq!(p.pop.objective.eval(x).unwrap(), -1.5);
        }
        assert!(builtin_pop("nope").is_err());
    }

    #[test]
    fn family_names() {
        assert_eq!("boxqp".parse::<Family>(), Ok(Family::BoxQp));
        assert!(matches!("bmiep".parse::<Family>(), Err(BenchError::UnsupportedFamily(_))));
        assert!(matches!("x".parse::<Family>(), Err(BenchError::UnknownFamily(_))));
    }

    #[test]
    fn empty_methods_rejected() {
        let cfg = BenchConfig::new(Family::Copositivity, 3, vec![], 2);
        assert!(matches!(run_bench(&cfg), Err(BenchError::Config(_))));
    }

    #[test]
    fn streams_differ() {
        let a = stream_seed(Family::BoxQp, 1, 0);
        assert_ne!(a, stream_seed(Family::BoxQp, 1, 1));
        assert_ne!(a, stream_seed(Family::Copositivity, 1, 0));
        assert_ne!(a, stream_seed(Family::BoxQp, 2, 0));
    }
}
