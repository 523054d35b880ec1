//! Infeasible-start primal-dual path following (HKM direction, Mehrotra
//! predictor-corrector) on free × nonnegative × PSD blocks.
//!
//! Internally the solver works on `min ⟨C, X⟩ s.t. A(X) = b` with `C = −c`
//! and dual `max bᵀy s.t. Aᵀy + S = C`, `S_free = 0`. Free variables are
//! kept unsplit and eliminated through a saddle-point Schur system.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use super::{BlockKind, BlockValue, SdpData, SdpError, SdpSolution, SdpStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct IpmOptions {
    /// Target for relative gap and scaled residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Level accepted as `NearOptimal` once progress stalls.
    pub near_tol: f64,
    /// Log `iter mu p-res d-res gap` lines to standard error.
    pub verbose: bool,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            tol: 1e-8,
            max_iter: 100,
            near_tol: 1e-5,
            verbose: false,
        }
    }
}

const BLOWUP: f64 = 1e12;
const CERT: f64 = 1e8;
const STALL_ITERS: usize = 12;

struct PsdBlock {
    size: usize,
    c: DMatrix<f64>,
    /// `(row, [(p, q, value)])` with `p ≤ q`.
    rows: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

struct Model {
    m: usize,
    b: DVector<f64>,
    af: DMatrix<f64>,
    cf: DVector<f64>,
    /// Per nonnegative variable: `(row, value)`.
    al: Vec<Vec<(usize, f64)>>,
    cl: DVector<f64>,
    psd: Vec<PsdBlock>,
    nu: f64,
    norm_b: f64,
    norm_c: f64,
}

#[derive(Clone)]
struct Iterate {
    xs: Vec<DMatrix<f64>>,
    ss: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    sl: DVector<f64>,
    xf: DVector<f64>,
    y: DVector<f64>,
}

struct Residuals {
    rp: DVector<f64>,
    rd_s: Vec<DMatrix<f64>>,
    rd_l: DVector<f64>,
    rd_f: DVector<f64>,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
    mu: f64,
}

impl Residuals {
    fn merit(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.gap)
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn mat_norm_inf(v: &DMatrix<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `⟨A, Z⟩` for an upper-triangle coefficient list and a dense `Z`.
fn apply_row(entries: &[(usize, usize, f64)], z: &DMatrix<f64>) -> f64 {
    entries
        .iter()
        .map(|&(p, q, v)| {
            if p == q {
                v * z[(p, p)]
            } else {
                v * (z[(p, q)] + z[(q, p)])
            }
        })
        .sum()
}

impl Model {
    fn new(sdp: &SdpData) -> Result<(Model, Vec<Option<usize>>, Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<usize>), SdpError> {
        // drop rows without coefficients; their rhs must vanish
        let mut used = vec![false; sdp.m];
        for (r, _) in &sdp.rows {
            used[*r] = true;
        }
        let mut row_map = vec![None; sdp.m];
        let mut m = 0;
        for (r, u) in used.iter().enumerate() {
            if *u {
                row_map[r] = Some(m);
                m += 1;
            }
        }
        let mut free_idx = Vec::new();
        let mut nonneg_idx = Vec::new();
        let mut psd_of_block = vec![usize::MAX; sdp.blocks.len()];
        let mut psd = Vec::new();
        let mut flat = vec![0usize; sdp.blocks.len()];
        for (k, blk) in sdp.blocks.iter().enumerate() {
            match blk.kind {
                BlockKind::Free => {
                    flat[k] = free_idx.len();
                    free_idx.extend((0..blk.size).map(|i| (k, i)));
                }
                BlockKind::Nonneg => {
                    flat[k] = nonneg_idx.len();
                    nonneg_idx.extend((0..blk.size).map(|i| (k, i)));
                }
                BlockKind::Psd => {
                    psd_of_block[k] = psd.len();
                    psd.push(PsdBlock {
                        size: blk.size,
                        c: DMatrix::zeros(blk.size, blk.size),
                        rows: Vec::new(),
                    });
                }
            }
        }
        let nf = free_idx.len();
        let nl = nonneg_idx.len();
        let mut b = DVector::zeros(m);
        for (r, v) in sdp.rhs.iter().enumerate() {
            if let Some(i) = row_map[r] {
                b[i] = *v;
            }
        }
        let mut af = DMatrix::zeros(m, nf);
        let mut cf = DVector::zeros(nf);
        let mut al = vec![Vec::new(); nl];
        let mut cl = DVector::zeros(nl);
        for e in &sdp.c {
            match sdp.blocks[e.block].kind {
                BlockKind::Free => cf[flat[e.block] + e.i] = -e.value,
                BlockKind::Nonneg => cl[flat[e.block] + e.i] = -e.value,
                BlockKind::Psd => {
                    let c = &mut psd[psd_of_block[e.block]].c;
                    c[(e.i, e.j)] = -e.value;
                    c[(e.j, e.i)] = -e.value;
                }
            }
        }
        for (r, e) in &sdp.rows {
            let i = row_map[*r].expect("used row");
            match sdp.blocks[e.block].kind {
                BlockKind::Free => af[(i, flat[e.block] + e.i)] = e.value,
                BlockKind::Nonneg => al[flat[e.block] + e.i].push((i, e.value)),
                BlockKind::Psd => {
                    let rows = &mut psd[psd_of_block[e.block]].rows;
                    match rows.last_mut() {
                        Some((ri, list)) if *ri == i => list.push((e.i, e.j, e.value)),
                        _ => rows.push((i, vec![(e.i, e.j, e.value)])),
                    }
                }
            }
        }
        let nu = psd.iter().map(|p| p.size).sum::<usize>() as f64 + nl as f64;
        let norm_b = norm_inf(&b);
        let norm_c = norm_inf(&cf)
            .max(norm_inf(&cl))
            .max(psd.iter().map(|p| mat_norm_inf(&p.c)).fold(0.0, f64::max));
        Ok((
            Model {
                m,
                b,
                af,
                cf,
                al,
                cl,
                psd,
                nu,
                norm_b,
                norm_c,
            },
            row_map,
            free_idx,
            nonneg_idx,
            psd_of_block,
        ))
    }

    /// `Aᵀy` restricted to the PSD blocks, as dense symmetric matrices.
    fn aty_psd(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.psd
            .iter()
            .map(|blk| {
                let mut s = DMatrix::zeros(blk.size, blk.size);
                for (r, list) in &blk.rows {
                    let yr = y[*r];
                    if yr == 0.0 {
                        continue;
                    }
                    for &(p, q, v) in list {
                        s[(p, q)] += yr * v;
                        if p != q {
                            s[(q, p)] += yr * v;
                        }
                    }
                }
                s
            })
            .collect()
    }

    fn aty_l(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.al.len(),
            self.al.iter().map(|col| col.iter().map(|&(r, v)| v * y[r]).sum::<f64>()),
        )
    }

    /// `A(Z)` over the PSD blocks plus `A_l z_l`.
    fn apply(&self, zs: &[DMatrix<f64>], zl: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, z) in self.psd.iter().zip(zs) {
            for (r, list) in &blk.rows {
                out[*r] += apply_row(list, z);
            }
        }
        for (k, col) in self.al.iter().enumerate() {
            for &(r, v) in col {
                out[r] += v * zl[k];
            }
        }
        out
    }

    fn residuals(&self, it: &Iterate) -> Residuals {
        let rp = &self.b - self.apply(&it.xs, &it.xl) - &self.af * &it.xf;
        let aty = self.aty_psd(&it.y);
        let rd_s: Vec<DMatrix<f64>> = self
            .psd
            .iter()
            .zip(&aty)
            .zip(&it.ss)
            .map(|((blk, a), s)| &blk.c - a - s)
            .collect();
        let rd_l = &self.cl - self.aty_l(&it.y) - &it.sl;
        let rd_f = &self.cf - self.af.transpose() * &it.y;
        let pobj = self
            .psd
            .iter()
            .zip(&it.xs)
            .map(|(blk, x)| inner(&blk.c, x))
            .sum::<f64>()
            + self.cl.dot(&it.xl)
            + self.cf.dot(&it.xf);
        let dobj = self.b.dot(&it.y);
        let comp = it.xs.iter().zip(&it.ss).map(|(x, s)| inner(x, s)).sum::<f64>() + it.xl.dot(&it.sl);
        let mu = if self.nu > 0.0 { comp / self.nu } else { 0.0 };
        let dres = rd_s
            .iter()
            .map(mat_norm_inf)
            .fold(norm_inf(&rd_l), f64::max)
            .max(norm_inf(&rd_f));
        Residuals {
            pinf: norm_inf(&rp) / (1.0 + self.norm_b),
            dinf: dres / (1.0 + self.norm_c),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            rp,
            rd_s,
            rd_l,
            rd_f,
            pobj,
            dobj,
            mu,
        }
    }

    /// Schur matrix `M_ij = ⟨A_i, X A_j S⁻¹⟩ + Σ_k a_ik a_jk x_k / s_k`.
    fn schur(&self, it: &Iterate, sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut mm = DMatrix::zeros(self.m, self.m);
        for ((blk, x), si) in self.psd.iter().zip(&it.xs).zip(sinv) {
            let s = blk.size;
            let mut g = DMatrix::zeros(s, s);
            for (j, list) in &blk.rows {
                g.fill(0.0);
                if 2 * list.len() > s {
                    let mut p = DMatrix::zeros(s, s);
                    for &(u, v, a) in list {
                        p.column_mut(v).axpy(a, &x.column(u), 1.0);
                        if u != v {
                            p.column_mut(u).axpy(a, &x.column(v), 1.0);
                        }
                    }
                    g.gemm(1.0, &p, si, 0.0);
                } else {
                    for &(u, v, a) in list {
                        g.ger(a, &x.column(u), &si.column(v), 1.0);
                        if u != v {
                            g.ger(a, &x.column(v), &si.column(u), 1.0);
                        }
                    }
                }
                for (i, li) in &blk.rows {
                    mm[(*i, *j)] += apply_row(li, &g);
                }
            }
        }
        for (k, col) in self.al.iter().enumerate() {
            let d = it.xl[k] / it.sl[k];
            for &(i, vi) in col {
                for &(j, vj) in col {
                    mm[(i, j)] += d * vi * vj;
                }
            }
        }
        let t = mm.transpose();
        (mm + t) * 0.5
    }
}

struct Saddle {
    m: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    minv_af: DMatrix<f64>,
    k: Option<LU<f64, Dyn, Dyn>>,
}

impl Saddle {
    fn factor(m: DMatrix<f64>, af: &DMatrix<f64>) -> Option<Saddle> {
        let scale = m.diagonal().iter().fold(1e-300f64, |a, v| a.max(v.abs()));
        let mut chol = None;
        for reg in [0.0, 1e-14, 1e-12, 1e-10, 1e-8] {
            let mut mr = m.clone();
            if reg > 0.0 {
                for i in 0..mr.nrows() {
                    mr[(i, i)] += reg * scale;
                }
            }
            if let Some(c) = Cholesky::new(mr) {
                chol = Some(c);
                break;
            }
        }
        let chol = chol?;
        if af.ncols() == 0 {
            return Some(Saddle {
                minv_af: DMatrix::zeros(m.nrows(), 0),
                m,
                chol,
                k: None,
            });
        }
        let minv_af = chol.solve(af);
        let mut k = af.transpose() * &minv_af;
        let ks = k.diagonal().iter().fold(1e-300f64, |a, v| a.max(v.abs()));
        for i in 0..k.nrows() {
            k[(i, i)] += 1e-15 * ks;
        }
        Some(Saddle {
            m,
            chol,
            minv_af,
            k: Some(LU::new(k)),
        })
    }

    fn solve_once(&self, rhs: &DVector<f64>, rf: &DVector<f64>, af: &DMatrix<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let t = self.chol.solve(rhs);
        match &self.k {
            None => Some((t, DVector::zeros(0))),
            Some(lu) => {
                let r = af.transpose() * &t - rf;
                let dxf = lu.solve(&r)?;
                let dy = t - &self.minv_af * &dxf;
                Some((dy, dxf))
            }
        }
    }

    /// Solves `[M A_f; A_fᵀ 0][Δy; Δx_f] = [rhs; r_f]` with two steps of
    /// iterative refinement.
    fn solve(&self, rhs: &DVector<f64>, rf: &DVector<f64>, af: &DMatrix<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let (mut dy, mut dxf) = self.solve_once(rhs, rf, af)?;
        for _ in 0..2 {
            let e1 = rhs - &self.m * &dy - af * &dxf;
            let e2 = rf - af.transpose() * &dy;
            let (cy, cf) = self.solve_once(&e1, &e2, af)?;
            dy += cy;
            dxf += cf;
        }
        Some((dy, dxf))
    }
}

/// Largest `α` with `X + α ΔX ⪰ 0`, or infinity.
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(ch) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(w) = l.solve_lower_triangular(&t.transpose()) else {
        return 0.0;
    };
    let w = (&w + w.transpose()) * 0.5;
    let lmin = w.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_vec(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dxs: Vec<DMatrix<f64>>,
    dss: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dsl: DVector<f64>,
    dxf: DVector<f64>,
    dy: DVector<f64>,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    model: &Model,
    it: &Iterate,
    res: &Residuals,
    sinv: &[DMatrix<f64>],
    saddle: &Saddle,
    target: f64,
    corr: Option<&Direction>,
) -> Option<Direction> {
    // H = target S⁻¹ − X − ΔX_a ΔS_a S⁻¹ − X R_d S⁻¹
    let hs: Vec<DMatrix<f64>> = (0..model.psd.len())
        .map(|k| {
            let x = &it.xs[k];
            let si = &sinv[k];
            let mut h = si * target - x;
            let mut inner = x * &res.rd_s[k];
            if let Some(c) = corr {
                inner += &c.dxs[k] * &c.dss[k];
            }
            h -= inner * si;
            h
        })
        .collect();
    let hl = DVector::from_iterator(
        model.al.len(),
        (0..model.al.len()).map(|k| {
            let (x, s) = (it.xl[k], it.sl[k]);
            let mut v = target / s - x - x * res.rd_l[k] / s;
            if let Some(c) = corr {
                v -= c.dxl[k] * c.dsl[k] / s;
            }
            v
        }),
    );
    let rhs = &res.rp - model.apply(&hs, &hl);
    let (dy, dxf) = saddle.solve(&rhs, &res.rd_f, &model.af)?;
    let aty = model.aty_psd(&dy);
    let dss: Vec<DMatrix<f64>> = res.rd_s.iter().zip(&aty).map(|(r, a)| r - a).collect();
    let dxs: Vec<DMatrix<f64>> = (0..model.psd.len())
        .map(|k| {
            let d = &hs[k] + &it.xs[k] * &aty[k] * &sinv[k];
            (&d + d.transpose()) * 0.5
        })
        .collect();
    let dsl = &res.rd_l - model.aty_l(&dy);
    let dxl = DVector::from_iterator(
        model.al.len(),
        (0..model.al.len()).map(|k| hl[k] + it.xl[k] * (res.rd_l[k] - dsl[k]) / it.sl[k]),
    );
    if dy.iter().chain(dxf.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    Some(Direction {
        dxs,
        dss,
        dxl,
        dsl,
        dxf,
        dy,
    })
}

fn step_lengths(it: &Iterate, d: &Direction) -> (f64, f64) {
    let mut ap = max_step_vec(&it.xl, &d.dxl);
    let mut ad = max_step_vec(&it.sl, &d.dsl);
    for k in 0..it.xs.len() {
        ap = ap.min(max_step_psd(&it.xs[k], &d.dxs[k]));
        ad = ad.min(max_step_psd(&it.ss[k], &d.dss[k]));
    }
    (ap, ad)
}

fn advance(it: &Iterate, d: &Direction, ap: f64, ad: f64) -> Iterate {
    Iterate {
        xs: it.xs.iter().zip(&d.dxs).map(|(x, dx)| x + dx * ap).collect(),
        ss: it.ss.iter().zip(&d.dss).map(|(s, ds)| s + ds * ad).collect(),
        xl: &it.xl + &d.dxl * ap,
        sl: &it.sl + &d.dsl * ad,
        xf: &it.xf + &d.dxf * ap,
        y: &it.y + &d.dy * ad,
    }
}

fn complementarity(it: &Iterate) -> f64 {
    it.xs.iter().zip(&it.ss).map(|(x, s)| inner(x, s)).sum::<f64>() + it.xl.dot(&it.sl)
}

fn invert_spd(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let ch = Cholesky::new(s.clone())?;
    let inv = ch.inverse();
    Some((&inv + inv.transpose()) * 0.5)
}

/// Solves `sdp` with a primal-dual interior-point method. Deterministic and
/// single-threaded.
pub fn solve_ipm(sdp: &SdpData, opts: &IpmOptions) -> Result<SdpSolution, SdpError> {
    sdp.validate()?;
    if sdp.m == 0 {
        return Err(SdpError::Invalid("no constraint rows".into()));
    }
    for (r, v) in sdp.rhs.iter().enumerate() {
        if *v != 0.0 && !sdp.rows.iter().any(|(row, _)| *row == r) {
            return Ok(trivial(sdp, SdpStatus::Infeasible));
        }
    }
    let (model, row_map, free_idx, nonneg_idx, psd_of_block) = Model::new(sdp)?;

    // starting point scaled to the data
    let mut a_norm: Vec<f64> = vec![0.0; model.m];
    for blk in &model.psd {
        for (r, list) in &blk.rows {
            a_norm[*r] += list
                .iter()
                .map(|&(p, q, v)| if p == q { v * v } else { 2.0 * v * v })
                .sum::<f64>();
        }
    }
    for col in &model.al {
        for &(r, v) in col {
            a_norm[r] += v * v;
        }
    }
    for r in 0..model.m {
        a_norm[r] += model.af.row(r).norm_squared();
    }
    let a_norm: Vec<f64> = a_norm.into_iter().map(f64::sqrt).collect();
    let sq = model.nu.max(1.0).sqrt();
    let xi = (0..model.m)
        .map(|r| sq * (1.0 + model.b[r].abs()) / (1.0 + a_norm[r]))
        .fold(10.0f64, f64::max);
    let c_frob = model
        .psd
        .iter()
        .map(|p| p.c.norm_squared())
        .sum::<f64>()
        + model.cl.norm_squared();
    let c_frob = c_frob.sqrt();
    let eta = a_norm.iter().cloned().fold(10.0f64.max(sq).max(c_frob), f64::max);
    let mut it = Iterate {
        xs: model.psd.iter().map(|p| DMatrix::identity(p.size, p.size) * xi).collect(),
        ss: model.psd.iter().map(|p| DMatrix::identity(p.size, p.size) * eta).collect(),
        xl: DVector::from_element(model.al.len(), xi),
        sl: DVector::from_element(model.al.len(), eta),
        xf: DVector::zeros(model.af.ncols()),
        y: DVector::zeros(model.m),
    };

    let mut best: Option<(f64, Iterate, usize)> = None;
    let mut since_best = 0;
    let mut status = None;
    let mut iters = 0;
    for k in 0..=opts.max_iter {
        iters = k;
        let res = model.residuals(&it);
        if opts.verbose {
            eprintln!(
                "{:4}  {:.3e}  {:.3e}  {:.3e}  {:.3e}",
                k, res.mu, res.pinf, res.dinf, res.gap
            );
        }
        let merit = res.merit();
        if !merit.is_finite() {
            status = Some(SdpStatus::NumericalTrouble);
            break;
        }
        if best.as_ref().is_none_or(|(b, _, _)| merit < *b) {
            best = Some((merit, it.clone(), k));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if res.pinf <= opts.tol && res.dinf <= opts.tol && res.gap <= opts.tol {
            status = Some(SdpStatus::Optimal);
            break;
        }
        // divergence certificates
        let dres = res.dinf * (1.0 + model.norm_c);
        let pres = res.pinf * (1.0 + model.norm_b);
        if res.dobj > CERT * (1.0 + model.norm_c + dres) && res.pinf > opts.tol {
            status = Some(SdpStatus::Infeasible);
            best = Some((merit, it.clone(), k));
            break;
        }
        if -res.pobj > CERT * (1.0 + model.norm_b + pres) && res.dinf > opts.tol {
            status = Some(SdpStatus::Unbounded);
            best = Some((merit, it.clone(), k));
            break;
        }
        let size = it
            .xs
            .iter()
            .map(mat_norm_inf)
            .fold(norm_inf(&it.xl).max(norm_inf(&it.xf)), f64::max);
        if size > BLOWUP || norm_inf(&it.y) > BLOWUP {
            break;
        }
        if k == opts.max_iter || since_best >= STALL_ITERS {
            break;
        }

        let Some(sinv) = it.ss.iter().map(invert_spd).collect::<Option<Vec<_>>>() else {
            break;
        };
        let mm = model.schur(&it, &sinv);
        let Some(saddle) = Saddle::factor(mm, &model.af) else {
            break;
        };
        let Some(pred) = direction(&model, &it, &res, &sinv, &saddle, 0.0, None) else {
            break;
        };
        let (ap, ad) = step_lengths(&it, &pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = if model.nu > 0.0 {
            complementarity(&advance(&it, &pred, ap, ad)) / model.nu
        } else {
            0.0
        };
        let sigma = if res.mu > 0.0 {
            (mu_aff / res.mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };
        let Some(corr) = direction(&model, &it, &res, &sinv, &saddle, sigma * res.mu, Some(&pred))
        else {
            break;
        };
        let (ap, ad) = step_lengths(&it, &corr);
        let tau = 0.9 + 0.08 * ap.min(ad).min(1.0);
        let (ap, ad) = ((tau * ap).min(1.0), (tau * ad).min(1.0));
        if ap < 1e-10 && ad < 1e-10 {
            break;
        }
        it = advance(&it, &corr, ap, ad);
    }

    let (_, chosen, _) = best.expect("at least one iterate");
    let res = model.residuals(&chosen);
    let status = status.unwrap_or_else(|| {
        if res.merit() <= opts.tol {
            SdpStatus::Optimal
        } else if res.merit() <= opts.near_tol {
            SdpStatus::NearOptimal
        } else if iters >= opts.max_iter {
            SdpStatus::MaxIter
        } else {
            SdpStatus::NumericalTrouble
        }
    });
    let status = match status {
        // the best iterate may not be the last one
        SdpStatus::Optimal if res.merit() > opts.tol => SdpStatus::NearOptimal,
        s => s,
    };

    let mut x_primal: Vec<BlockValue> = sdp
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => BlockValue::Matrix(DMatrix::zeros(b.size, b.size)),
            _ => BlockValue::Vector(vec![0.0; b.size]),
        })
        .collect();
    for (k, &(blk, i)) in free_idx.iter().enumerate() {
        if let BlockValue::Vector(v) = &mut x_primal[blk] {
            v[i] = chosen.xf[k];
        }
    }
    for (k, &(blk, i)) in nonneg_idx.iter().enumerate() {
        if let BlockValue::Vector(v) = &mut x_primal[blk] {
            v[i] = chosen.xl[k];
        }
    }
    for (blk, &p) in psd_of_block.iter().enumerate() {
        if p != usize::MAX {
            x_primal[blk] = BlockValue::Matrix(chosen.xs[p].clone());
        }
    }
    let y_dual = row_map
        .iter()
        .map(|r| r.map_or(0.0, |i| -chosen.y[i]))
        .collect();
    Ok(SdpSolution {
        status,
        primal_obj: -res.pobj,
        dual_obj: -res.dobj,
        x_primal,
        y_dual,
        iterations: iters,
        gap: res.gap,
        primal_residual: res.pinf,
        dual_residual: res.dinf,
    })
}

fn trivial(sdp: &SdpData, status: SdpStatus) -> SdpSolution {
    SdpSolution {
        status,
        primal_obj: f64::NAN,
        dual_obj: f64::NAN,
        x_primal: sdp
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Psd => BlockValue::Matrix(DMatrix::zeros(b.size, b.size)),
                _ => BlockValue::Vector(vec![0.0; b.size]),
            })
            .collect(),
        y_dual: vec![0.0; sdp.m],
        iterations: 0,
        gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pop::parse_pop;
    use crate::relaxation::{assemble_sdp, build, BuildOptions, Method};
    use crate::sdp::{BlockSpec, Entry};

    fn solve_pop(src: &str, method: Method, r: u32) -> SdpSolution {
        let pop = parse_pop(src).unwrap();
        let prog = build(&pop, method, &BuildOptions::new(r)).unwrap();
        solve_ipm(&assemble_sdp(&prog), &IpmOptions::default()).unwrap()
    }

    #[test]
    fn scalar_lp() {
        // max -x s.t. x - s = 1, s >= 0, x free: optimum -1
        let sdp = SdpData {
            m: 1,
            blocks: vec![
                BlockSpec { kind: BlockKind::Free, size: 1 },
                BlockSpec { kind: BlockKind::Nonneg, size: 1 },
            ],
            c: vec![Entry { block: 0, i: 0, j: 0, value: -1.0 }],
            rows: vec![
                (0, Entry { block: 0, i: 0, j: 0, value: 1.0 }),
                (0, Entry { block: 1, i: 0, j: 0, value: -1.0 }),
            ],
            rhs: vec![1.0],
            row_labels: vec!["1".into()],
        };
        let sol = solve_ipm(&sdp, &IpmOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_obj + 1.0).abs() < 1e-7, "{}", sol.primal_obj);
        assert!((sol.dual_obj + 1.0).abs() < 1e-7);
    }

    #[test]
    fn square_has_bound_zero() {
        let sol = solve_pop("vars x\nmin x^2\n", Method::Lasserre, 1);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.primal_obj.abs() < 1e-7);
    }

    #[test]
    fn st_e08_lasserre_bounds() {
        let src = include_str!("../../data/st_e08.pop");
        let s2 = solve_pop(src, Method::Lasserre, 2);
        assert!(s2.status.has_value(), "{:?}", s2.status);
        let s3 = solve_pop(src, Method::Lasserre, 3);
        assert!(s3.status.has_value(), "{:?}", s3.status);
        assert!((s3.primal_obj - 0.741782).abs() < 1e-5, "{}", s3.primal_obj);
        assert!(s2.primal_obj <= s3.primal_obj + 1e-6);
    }

    #[test]
    fn univariate_quartic_matches_grid() {
        // univariate nonnegativity = SOS, so the bound is the global minimum
        let src = "vars x\nmin x^4 - 3*x^3 + 2*x^2 + x + 1\n";
        let sol = solve_pop(src, Method::Lasserre, 2);
        let f = |x: f64| x.powi(4) - 3.0 * x.powi(3) + 2.0 * x * x + x + 1.0;
        let grid = (-40000..=40000)
            .map(|k| f(k as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_obj - grid).abs() < 1e-6, "{} vs {}", sol.primal_obj, grid);
    }

    #[test]
    fn weak_duality_and_determinism() {
        let src = include_str!("../../data/st_e08.pop");
        let a = solve_pop(src, Method::Adaptive, 2);
        let b = solve_pop(src, Method::Adaptive, 2);
        assert_eq!(a, b);
        assert!(a.primal_obj <= a.dual_obj + 1e-6);
    }

    #[test]
    fn unbounded_below_is_infeasible() {
        let sol = solve_pop("vars x\nmin x^3\n", Method::Lasserre, 2);
        assert_eq!(sol.status, SdpStatus::Infeasible, "{sol:?}");
    }
}
