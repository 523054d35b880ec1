//! Property checks shared by the property suite and the acceptance run.
//! Each check returns `Err(description)` on the first counterexample.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use asos::bench::{
    gen_boxqp, gen_copositivity_matrix, run_bench, stream_seed, write_csv, BenchConfig, Family,
};
use asos::perturb::{
    bound_gamma, bound_r, bound_r_grid, constraint_bounds, psi_poly, theta_poly, PerturbSpec,
    PerturbVariant,
};
use asos::poly::{monomial_basis, Monomial, Polynomial};
use asos::pop::{chordal_cliques, parse_pop, Constraint, CspGraph, Pop};
use asos::relaxation::{
    assemble_sdp, build, identity_residual, reduce_basis, BlockRole, BuildOptions, Method,
};
use asos::sdp::{
    read_sdpa, solve_ipm, write_sdpa, BlockKind, BlockSpec, Entry, IpmOptions, SdpData, SdpStatus,
};

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Polynomials in `n` variables with small integer coefficients, so that
/// ring identities hold exactly in floating point.
pub fn poly_strategy(n: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let monos = monomial_basis(n, max_deg);
    prop::collection::vec((prop::sample::select(monos), -5i32..=5), 1..=max_terms).prop_map(
        move |terms| {
            Polynomial::from_terms(n, terms.into_iter().map(|(m, c)| (m, c as f64))).unwrap()
        },
    )
}

pub fn poly_arith_identities() -> Result<(), String> {
    let s = (1usize..=3).prop_flat_map(|n| {
        (
            poly_strategy(n, 3, 5),
            poly_strategy(n, 3, 5),
            poly_strategy(n, 2, 4),
            prop::collection::vec(-1.5f64..1.5, n),
        )
    });
    run(200, s, |(a, b, c, x)| {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        #[allow(clippy::eq_op)]
        let zero = &a - &a;
        prop_assert!(zero.is_zero());
        prop_assert_eq!(&(&a * &a) * &a, a.pow(3));
        let lhs = (&a * &b).eval(&x).unwrap();
        let rhs = a.eval(&x).unwrap() * b.eval(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        if !a.is_zero() && !b.is_zero() {
            prop_assert_eq!((&a * &b).degree(), a.degree() + b.degree());
        }
        Ok(())
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

pub fn basis_count_binomial() -> Result<(), String> {
    run(60, (1usize..=6, 0u32..=5), |(n, r)| {
        let b = monomial_basis(n, r);
        prop_assert_eq!(b.len() as u64, binomial((n as u64) + r as u64, r as u64));
        prop_assert!(b.windows(2).all(|w| w[0] < w[1]), "not strictly graded-lex sorted");
        prop_assert!(b.iter().all(|m| m.degree() <= r));
        Ok(())
    })
}

fn graph_strategy() -> impl Strategy<Value = CspGraph> {
    (1usize..=9).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.3), n * (n - 1) / 2).prop_map(move |bits| {
            let mut g = CspGraph::new(n);
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        g.add_edge(a, b);
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

pub fn chordal_rip() -> Result<(), String> {
    run(200, graph_strategy(), |g| {
        let cover = chordal_cliques(&g).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let ext = &cover.extension;
        prop_assert!(cover.rip_ordered && cover.has_rip(), "RIP fails: {:?}", cover.cliques);
        for (a, b) in g.edges() {
            prop_assert!(ext.has_edge(a, b));
            prop_assert!(cover.cliques.iter().any(|c| c.contains(&a) && c.contains(&b)));
        }
        let covered: BTreeSet<usize> = cover.cliques.iter().flatten().copied().collect();
        prop_assert_eq!(covered.len(), g.nodes());
        for c in &cover.cliques {
            for (i, a) in c.iter().enumerate() {
                for b in &c[i + 1..] {
                    prop_assert!(ext.has_edge(*a, *b), "clique {:?} not complete", c);
                }
            }
        }
        for (i, c) in cover.cliques.iter().enumerate() {
            for (k, d) in cover.cliques.iter().enumerate() {
                prop_assert!(i == k || !c.iter().all(|v| d.contains(v)), "{:?} not maximal", c);
            }
        }
        // later neighbors of every vertex form a clique: the order is perfect
        let pos: Vec<usize> = {
            let mut p = vec![0; g.nodes()];
            for (k, &v) in cover.elimination_order.iter().enumerate() {
                p[v] = k;
            }
            p
        };
        for &v in &cover.elimination_order {
            let later: Vec<usize> = ext.neighbors(v).iter().copied().filter(|&u| pos[u] > pos[v]).collect();
            for (i, a) in later.iter().enumerate() {
                for b in &later[i + 1..] {
                    prop_assert!(ext.has_edge(*a, *b));
                }
            }
        }
        Ok(())
    })
}

fn sdp_strategy() -> impl Strategy<Value = SdpData> {
    let blocks = prop::collection::vec((0u8..3, 1usize..4), 1..4);
    (1usize..5, blocks).prop_flat_map(|(m, blocks)| {
        let specs: Vec<BlockSpec> = blocks
            .iter()
            .map(|&(k, s)| BlockSpec {
                kind: match k {
                    0 => BlockKind::Free,
                    1 => BlockKind::Nonneg,
                    _ => BlockKind::Psd,
                },
                size: s,
            })
            .collect();
        let nb = specs.len();
        let entry = (0..=m, 0..nb, 0usize..3, 0usize..3, -1e3f64..1e3);
        (
            Just(specs),
            Just(m),
            prop::collection::vec(entry, 0..20),
            prop::collection::vec(-1e3f64..1e3, m),
        )
            .prop_map(|(specs, m, raw, rhs)| {
                let mut seen = BTreeSet::new();
                let mut c = Vec::new();
                let mut rows = Vec::new();
                for (row, block, i, j, value) in raw {
                    let b = &specs[block];
                    let (i, j) = (i % b.size, j % b.size);
                    let (i, j) = if b.kind == BlockKind::Psd { (i.min(j), i.max(j)) } else { (i, i) };
                    if value == 0.0 || !seen.insert((row, block, i, j)) {
                        continue;
                    }
                    let e = Entry { block, i, j, value };
                    if row == 0 {
                        c.push(e);
                    } else {
                        rows.push((row - 1, e));
                    }
                }
                let mut sdp = SdpData {
                    m,
                    blocks: specs,
                    c,
                    rows,
                    rhs,
                    row_labels: (0..m).map(|k| format!("r{k}")).collect(),
                };
                sdp.canonicalize();
                sdp
            })
    })
}

pub fn sdpa_round_trip() -> Result<(), String> {
    run(200, sdp_strategy(), |sdp| {
        let text = write_sdpa(&sdp).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let back = read_sdpa(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let again = write_sdpa(&back).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&text, &again);
        prop_assert_eq!(back.m, sdp.m);
        prop_assert_eq!(&back.rhs, &sdp.rhs);
        Ok(())
    })
}

/// Small instances used by the reconstruction check.
pub fn reconstruction_instances() -> Vec<(String, Pop, Method, u32)> {
    let st = parse_pop(include_str!("../../data/st_e08.pop")).unwrap();
    let pd = parse_pop(include_str!("../../data/prestel_delzell.pop")).unwrap();
    let mut out = vec![
        ("st_e08".to_string(), st.clone(), Method::Lasserre, 2),
        ("st_e08".to_string(), st.clone(), Method::Lasserre, 3),
        ("st_e08".to_string(), st.clone(), Method::Adaptive, 2),
        ("st_e08".to_string(), st.clone(), Method::Adaptive, 6),
        ("st_e08".to_string(), st.clone(), Method::Sparse, 3),
        ("st_e08".to_string(), st.clone(), Method::Perturbed, 3),
        ("st_e08".to_string(), st, Method::Alternative, 2),
        ("prestel_delzell".to_string(), pd, Method::Lasserre, 3),
        (
            "quartic".to_string(),
            parse_pop("vars x\nmin x^4 - 3*x^3 + 2*x^2 + x + 1\n").unwrap(),
            Method::Lasserre,
            2,
        ),
    ];
    for i in 0..3 {
        let pop = gen_boxqp(3, 0.6, stream_seed(Family::BoxQp, 11, i)).unwrap();
        out.push((format!("boxqp{i}"), pop.clone(), Method::Lasserre, 2));
        out.push((format!("boxqp{i}"), pop, Method::Adaptive, 2));
    }
    out
}

/// On every instance the solver marks `Optimal`, the identity
/// `target − ρ − Σ w σ − Σ v λ` has all coefficients within `tol`.
pub fn identity_reconstruction(tol: f64) -> Result<usize, String> {
    let mut checked = 0;
    for (name, pop, method, r) in reconstruction_instances() {
        let mut opts = BuildOptions::new(r);
        opts.eps = 1e-2;
        let prog = build(&pop, method, &opts).map_err(|e| e.to_string())?;
        let sol = solve_ipm(&assemble_sdp(&prog), &IpmOptions::default()).map_err(|e| e.to_string())?;
        if sol.status != SdpStatus::Optimal {
            continue;
        }
        let res = identity_residual(&prog, &sol);
        let worst = res.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
        if worst > tol {
            return Err(format!("{name} {method} r={r}: residual {worst:.3e}"));
        }
        checked += 1;
    }
    Ok(checked)
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn pop_of(objective: Polynomial, cons: Vec<Polynomial>) -> Option<Pop> {
    let n = objective.nvars();
    let cons = cons
        .into_iter()
        .filter(|p| p.degree() > 0)
        .map(Constraint::geq)
        .collect();
    Pop::new(names(n), objective, cons).ok()
}

/// For `x ∈ [−1,1]²` with `f_j(x) ∈ [0, R_j]`: `ψ_r(x) ≤ ψ_{r+1}(x) ≤ 0`.
pub fn psi_monotone() -> Result<(), String> {
    let s = (
        prop::collection::vec(poly_strategy(2, 2, 4), 1..4),
        prop::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0), 200),
    );
    run(60, s, |(cons, pts)| {
        let Some(pop) = pop_of(Polynomial::var(2, 0), cons) else {
            return Ok(());
        };
        if pop.constraints.is_empty() {
            return Ok(());
        }
        let bounds = constraint_bounds(&pop, 1.0);
        if bounds.iter().any(|&b| b <= 0.0) {
            return Ok(());
        }
        let psis: Vec<Polynomial> = (1..=4).map(|r| psi_poly(&pop, r, &bounds).unwrap()).collect();
        for (x, y) in pts {
            let p = [x, y];
            let feasible = pop
                .constraints
                .iter()
                .zip(&bounds)
                .all(|(c, &rj)| (0.0..=rj).contains(&c.poly.eval(&p).unwrap()));
            if !feasible {
                continue;
            }
            let vals: Vec<f64> = psis.iter().map(|q| q.eval(&p).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12, "not monotone at {:?}: {:?}", p, vals);
            }
            prop_assert!(vals[3] <= 1e-12);
        }
        Ok(())
    })
}

/// `|f(x)|/γ ≤ 1` on `‖x‖∞ ≤ √2 b`, and `≤ ‖x/b‖∞^d` beyond it.
pub fn gamma_certificate() -> Result<(), String> {
    let s = (
        (1usize..=3).prop_flat_map(|n| (Just(n), poly_strategy(n, 3, 5), poly_strategy(n, 2, 4))),
        1.0f64..3.0,
        any::<u64>(),
    );
    run(40, s, |((n, f, g), b, seed)| {
        let Some(pop) = pop_of(f, vec![g]) else {
            return Ok(());
        };
        let gamma = bound_gamma(&pop, b);
        prop_assert!(gamma >= 1.0);
        let d = pop.max_degree() as i32;
        let polys: Vec<&Polynomial> =
            std::iter::once(&pop.objective).chain(pop.constraints.iter().map(|c| &c.poly)).collect();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let s2 = std::f64::consts::SQRT_2 * b;
        for k in 0..2000 {
            let x: Vec<f64> = if k < 1000 {
                (0..n).map(|_| rng.random_range(-s2..=s2)).collect()
            } else {
                let t = rng.random_range(s2..=10.0 * b);
                let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-t..=t)).collect();
                let i = rng.random_range(0..n);
                x[i] = if rng.random::<bool>() { t } else { -t };
                x
            };
            let norm = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for p in &polys {
                let v = p.eval(&x).unwrap().abs() / gamma;
                let cap = if norm <= s2 { 1.0 } else { (norm / b).powi(d) };
                prop_assert!(v <= cap + 1e-12, "γ fails at {:?}: {} > {}", x, v, cap);
            }
        }
        Ok(())
    })
}

/// `R̂ ≥` the 50ⁿ-grid maximum of `|f|` over the box.
pub fn bound_r_dominance() -> Result<(), String> {
    let s = (1usize..=3).prop_flat_map(|n| (poly_strategy(n, 3, 5), 1.0f64..2.5));
    run(100, s, |(f, b)| {
        let rhat = bound_r(&f, b);
        let grid = bound_r_grid(&f, b, 50);
        prop_assert!(rhat >= grid - 1e-12 * (1.0 + grid), "{} < {}", rhat, grid);
        Ok(())
    })
}

/// `Θ_{r,b} − 1` has nonnegative coefficients on even monomials only.
pub fn theta_even_nonneg() -> Result<(), String> {
    run(60, (1usize..=4, 1u32..=4, 1.0f64..4.0, any::<bool>()), |(n, r, b, fact)| {
        let mut spec = PerturbSpec::theta(r, b);
        if fact {
            spec.variant = PerturbVariant::ThetaFactorial;
        }
        let t = theta_poly(&spec, n).unwrap();
        for (m, c) in t.terms() {
            if m.is_one() {
                continue;
            }
            prop_assert!(c > 0.0);
            prop_assert!(m.exponents().iter().all(|e| e % 2 == 0));
        }
        prop_assert!(t.eval(&vec![0.0; n]).unwrap() >= 1.0);
        Ok(())
    })
}

/// `deg ψ_r = d (2r + 1)` for a single constraint of degree `d`.
pub fn psi_degree() -> Result<(), String> {
    let s = (1usize..=3).prop_flat_map(|n| poly_strategy(n, 3, 4)).prop_flat_map(|g| (Just(g), 1u32..=3));
    run(60, s, |(g, r)| {
        let n = g.nvars();
        let Some(pop) = pop_of(Polynomial::var(n, 0), vec![g]) else {
            return Ok(());
        };
        let Some(c) = pop.constraints.first() else {
            return Ok(());
        };
        let d = c.poly.degree();
        let psi = psi_poly(&pop, r, &constraint_bounds(&pop, 1.0)).unwrap();
        prop_assert_eq!(psi.degree(), d * (2 * r + 1));
        Ok(())
    })
}

fn basis_of(prog: &asos::relaxation::SosProgram, role: BlockRole) -> BTreeSet<Monomial> {
    prog.sos_blocks
        .iter()
        .filter(|b| b.role == role)
        .flat_map(|b| b.basis.iter().cloned())
        .collect()
}

fn pop_strategy() -> impl Strategy<Value = Option<Pop>> {
    (1usize..=3).prop_flat_map(|n| {
        (
            poly_strategy(n, 4, 5),
            prop::collection::vec(poly_strategy(n, 3, 3), 0..3),
            prop::option::of(poly_strategy(n, 2, 3)),
        )
            .prop_map(|(f, cons, eq)| {
                let mut pop = pop_of(f, cons)?;
                if let Some(e) = eq.filter(|e| e.degree() > 0) {
                    pop.constraints.push(Constraint::eq(e));
                }
                pop.validate().ok()?;
                Some(pop)
            })
    })
}

/// Every adaptive multiplier basis (and equality support) sits inside the
/// Lasserre one of the same order.
pub fn adaptive_within_lasserre() -> Result<(), String> {
    run(80, (pop_strategy(), 1u32..=4), |(pop, r)| {
        let Some(pop) = pop else { return Ok(()) };
        let mut opts = BuildOptions::new(r);
        opts.reduce = false;
        let (Ok(las), Ok(ada)) = (
            build(&pop, Method::Lasserre, &opts),
            build(&pop, Method::Adaptive, &opts),
        ) else {
            return Ok(());
        };
        for b in &ada.sos_blocks {
            let lb = basis_of(&las, b.role);
            for m in &b.basis {
                prop_assert!(lb.contains(m), "{} not in Lasserre block {:?}", m.to_text(&pop.var_names), b.role);
            }
        }
        for fb in &ada.free_blocks {
            let lf: BTreeSet<Monomial> = las
                .free_blocks
                .iter()
                .filter(|l| l.constraint == fb.constraint)
                .flat_map(|l| l.support.iter().cloned())
                .collect();
            prop_assert!(fb.support.iter().all(|m| lf.contains(m)));
        }
        Ok(())
    })
}

/// Reducing a reduced program changes nothing.
pub fn reduce_idempotent() -> Result<(), String> {
    run(80, (pop_strategy(), 1u32..=4, 0usize..4), |(pop, r, k)| {
        let Some(pop) = pop else { return Ok(()) };
        let method = [Method::Lasserre, Method::Adaptive, Method::Perturbed, Method::Alternative][k];
        let mut opts = BuildOptions::new(r);
        opts.reduce = false;
        opts.eps = 1e-2;
        let Ok(prog) = build(&pop, method, &opts) else {
            return Ok(());
        };
        let (once, rep) = reduce_basis(&prog);
        let (twice, rep2) = reduce_basis(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(rep2.removed, 0);
        prop_assert!(rep.passes >= 1);
        Ok(())
    })
}

/// Mean of the accepted copositivity off-diagonal entries over `draws`.
pub fn copositivity_offdiag_mean(draws: usize) -> f64 {
    let n = 5;
    let per = n * (n - 1) / 2;
    let mut sum = 0.0;
    let mut count = 0;
    let mut i = 0;
    while count < draws {
        let a = gen_copositivity_matrix(n, stream_seed(Family::Copositivity, 99, i)).unwrap();
        for r in 0..n {
            for c in r + 1..n {
                sum += a[(r, c)];
            }
        }
        count += per;
        i += 1;
    }
    sum / count as f64
}

/// Fraction of nonzero upper-triangle coefficients in seeded BoxQP draws.
pub fn boxqp_density(n: usize, density: f64, instances: u64) -> f64 {
    let mut nz = 0usize;
    let mut total = 0usize;
    for i in 0..instances {
        let pop = gen_boxqp(n, density, stream_seed(Family::BoxQp, 5, i)).unwrap();
        // quadratic coefficients, one per upper-triangle entry
        nz += pop.objective.terms().filter(|(m, c)| m.degree() == 2 && *c != 0.0).count();
        total += n * (n + 1) / 2;
    }
    nz as f64 / total as f64
}

/// The number of solved records never grows as the threshold tightens.
pub fn solved_monotone() -> Result<(), String> {
    let mut cfg = BenchConfig::new(Family::BoxQp, 3, vec![Method::Lasserre, Method::Adaptive], 2);
    cfg.count = 6;
    cfg.seed = 3;
    let (records, _) = run_bench(&cfg).map_err(|e| e.to_string())?;
    let mut last = usize::MAX;
    for k in 1..=12 {
        let tol = 10f64.powi(-k);
        let solved = records.iter().filter(|r| r.solved_at(tol)).count();
        if solved > last {
            return Err(format!("{solved} solved at 1e-{k}, {last} at the looser threshold"));
        }
        last = solved;
    }
    Ok(())
}

/// Two runs of the same configuration give byte-identical CSV without the
/// timing column, in both scheduling modes.
pub fn csv_deterministic() -> Result<(), String> {
    let mut cfg = BenchConfig::new(Family::BoxQp, 3, vec![Method::Lasserre, Method::Adaptive], 2);
    cfg.count = 4;
    cfg.seed = 21;
    let csv = |parallel: bool| -> Result<Vec<u8>, String> {
        let mut c = cfg.clone();
        c.parallel = parallel;
        let (records, _) = run_bench(&c).map_err(|e| e.to_string())?;
        let mut out = Vec::new();
        write_csv(&records, &mut out, false).map_err(|e| e.to_string())?;
        Ok(out)
    };
    let a = csv(true)?;
    let b = csv(true)?;
    let c = csv(false)?;
    if a != b || a != c {
        return Err("CSV output differs between runs".into());
    }
    Ok(())
}
