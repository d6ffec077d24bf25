//! Assembly of the discrete saddle-point problem and its solution by a
//! diagonally preconditioned primal-dual hybrid gradient method.
//!
//! Primal variables are the chain `T` and one n-vector `λ(z)` per sample;
//! dual variables are the cochain `ω` and the boundary multiplier `φ`:
//!
//! ```text
//! min_{T, λ} max_{ω, φ}  ⟨T, ω⟩_h − Σ_z ⟨λ(z), (Wω)(z)⟩ + ⟨∂T − S, φ⟩_h
//!                        + Σ_z Ψ**(z, λ(z)) + ι_G(T)
//! ```
//!
//! `G` holds the pushforward constraints `π♯T = 1` (per fiber, optionally
//! with nonnegativity), enforced by projection inside the primal step.

use rayon::prelude::*;

use crate::cubical::{Block, Chain, CubicalComplex};
use crate::error::{Error, Result};
use crate::lifting::{CostModel, PointContext, PointCost};
use crate::sparse::SparseMatrix;
use crate::whitney::{sampling_operator, Sample};

/// How `φ` enters the problem.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// `∂T = S` everywhere.
    Dirichlet(Chain),
    /// `spt ∂T ⊂ (∂X) × Y`: `φ` vanishes on cubes over `∂X`.
    Free,
}

/// Everything needed to assemble a [`SaddleProblem`].
#[derive(Clone, Debug)]
pub struct ProblemDescription<'a> {
    pub complex: &'a CubicalComplex,
    pub model: &'a CostModel,
    pub samples: &'a [Sample],
    pub boundary: BoundaryCondition,
    /// Adds `π₂♯T = 1` and nonnegativity of both aligned components.
    pub bijective: bool,
}

/// Assembled bilinear saddle-point instance.
#[derive(Clone, Debug)]
pub struct SaddleProblem {
    pub n: usize,
    pub comps: usize,
    /// `H^n` per n-cube.
    pub volumes: Vec<f64>,
    /// Sampling operator, rows `sample · comps + component`.
    pub w: SparseMatrix,
    pub wt: SparseMatrix,
    /// Volume-weighted boundary operator restricted to active `φ` rows.
    pub b: SparseMatrix,
    pub bt: SparseMatrix,
    /// Volume-weighted boundary datum on the active rows.
    pub b_offset: Vec<f64>,
    /// `(n-1)`-cube id of every active `φ` row.
    pub boundary_rows: Vec<usize>,
    pub costs: Vec<PointCost>,
    /// Cube ids per pushforward fiber.
    pub fibers: Vec<Vec<u32>>,
    pub fiber_nonneg: Vec<bool>,
}

impl SaddleProblem {
    pub fn num_cubes(&self) -> usize {
        self.volumes.len()
    }

    pub fn num_samples(&self) -> usize {
        self.costs.len()
    }

    /// `Σ_z Ψ**(z, λ(z))`.
    pub fn energy(&self, lambda: &[f64]) -> f64 {
        lambda.chunks(self.comps).zip(&self.costs).map(|(v, c)| c.psi(v)).sum()
    }
}

/// Builds the saddle problem from a complex, cost model and samples.
pub fn assemble(desc: &ProblemDescription) -> Result<SaddleProblem> {
    let complex = desc.complex;
    let model = desc.model;
    model.validate(complex)?;
    let (n, big_n) = model.dims();
    if desc.bijective && n != big_n {
        return Err(Error::InvalidConfig(format!(
            "bijective constraints need n = N, got n = {n}, N = {big_n}"
        )));
    }
    if desc.samples.is_empty() {
        return Err(Error::InvalidConfig("no sample points".into()));
    }

    let costs = desc
        .samples
        .iter()
        .map(|s| {
            let z = s.position(complex);
            model.at(&PointContext::new(&z, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let w = sampling_operator(complex, desc.samples, n);
    let wt = w.transpose();
    let volumes = complex.volumes(n);

    let boundary_full = complex.boundary_matrix(n);
    let lower_volumes = complex.volumes(n - 1);
    let (boundary_rows, datum): (Vec<usize>, Vec<f64>) = match &desc.boundary {
        BoundaryCondition::Dirichlet(s) => {
            if s.degree != n - 1 || s.coeffs.len() != complex.num_cubes(n - 1) {
                return Err(Error::DimensionMismatch {
                    expected: complex.num_cubes(n - 1),
                    got: s.coeffs.len(),
                });
            }
            ((0..complex.num_cubes(n - 1)).collect(), s.coeffs.clone())
        }
        BoundaryCondition::Free => {
            let domain = complex.projected(Block::First(n));
            let domain_mask = (1u32 << n) - 1;
            let rows = (0..complex.num_cubes(n - 1))
                .filter(|&id| {
                    let (base, m) = complex.cube_parts(n - 1, id);
                    let xm = m & domain_mask;
                    let xid = domain
                        .cube_id(&base[..n], xm)
                        .expect("projection of a cube lies in the projected set");
                    domain.is_interior(xm.count_ones() as usize, xid)
                })
                .collect();
            (rows, vec![0.0; complex.num_cubes(n - 1)])
        }
    };
    let mut b = boundary_full.select_rows(&boundary_rows);
    let row_weights: Vec<f64> = boundary_rows.iter().map(|&r| lower_volumes[r]).collect();
    b.scale_rows(&row_weights);
    let b_offset = boundary_rows.iter().map(|&r| lower_volumes[r] * datum[r]).collect();
    let bt = b.transpose();

    let mut fibers = Vec::new();
    let mut fiber_nonneg = Vec::new();
    let blocks: &[Block] = if desc.bijective {
        &[Block::First(n), Block::Last(big_n)]
    } else {
        &[Block::First(n)]
    };
    for &block in blocks {
        let (push, _) = complex.pushforward_matrix(n, block);
        for r in 0..push.rows() {
            let (idx, _) = push.row(r);
            if !idx.is_empty() {
                fibers.push(idx.to_vec());
                fiber_nonneg.push(desc.bijective);
            }
        }
    }

    Ok(SaddleProblem {
        n,
        comps: complex.orientations(n).len(),
        volumes,
        w,
        wt,
        b,
        bt,
        b_offset,
        boundary_rows,
        costs,
        fibers,
        fiber_nonneg,
    })
}

/// Step size rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioning {
    /// Row/column absolute sums of the coupling operator.
    Diagonal,
    /// `τ = σ = 0.95 / ‖K‖`.
    Scalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Relative tolerance on both residuals.
    pub tolerance: f64,
    pub preconditioning: Preconditioning,
    /// Over-relaxation of the primal extrapolation.
    pub theta: f64,
    /// Residuals are evaluated every this many iterations.
    pub check_every: usize,
    /// Iterates with a larger max-norm abort the run.
    pub divergence_bound: f64,
    /// Primal steps are multiplied and dual steps divided by this.
    pub primal_weight: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            tolerance: 1e-4,
            preconditioning: Preconditioning::Diagonal,
            theta: 1.0,
            check_every: 50,
            divergence_bound: 1e12,
            primal_weight: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.check_every == 0 {
            return Err(Error::InvalidConfig("iteration counts must be positive".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::NegativeParameter {
                name: "tolerance",
                value: self.tolerance,
            });
        }
        if !(self.primal_weight > 0.0) || !self.primal_weight.is_finite() {
            return Err(Error::NegativeParameter {
                name: "primal weight",
                value: self.primal_weight,
            });
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!("theta = {} outside [0, 1]", self.theta)));
        }
        Ok(())
    }
}

/// Primal and dual iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    pub omega: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `Σ_z Ψ**(z, λ(z))`.
    pub energy: f64,
    /// `max |∂T − S|` over the active boundary rows.
    pub boundary_violation: f64,
    /// `max |π♯T − 1|` over all fibers.
    pub pushforward_violation: f64,
    /// `‖D T − Wᵀλ‖ / ‖D T‖`.
    pub stationarity: f64,
    pub history: Vec<HistoryEntry>,
}

/// Euclidean projection onto `{Σ v = 1, v ≥ 0}`.
pub fn project_simplex(v: &mut [f64]) {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Euclidean projection onto `{Σ v = 1}`.
pub fn project_hyperplane(v: &mut [f64]) {
    let shift = (1.0 - v.iter().sum::<f64>()) / v.len() as f64;
    for x in v.iter_mut() {
        *x += shift;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Steps {
    tau_t: Vec<f64>,
    tau_l: Vec<f64>,
    sigma_w: Vec<f64>,
    sigma_b: Vec<f64>,
}

/// The problem in the scaled multipliers `λ̃(z) = λ(z) / c(z)`, `c(z)` the
/// mean volume of the n-cubes whose forms are sampled at `z`. Without it
/// the `λ`–`ω` coupling is off by the cell volume from `D`.
struct Operator<'a> {
    sp: &'a SaddleProblem,
    w: SparseMatrix,
    wt: SparseMatrix,
    scale: Vec<f64>,
}

impl<'a> Operator<'a> {
    fn new(sp: &'a SaddleProblem) -> Self {
        let mut scale = Vec::with_capacity(sp.num_samples());
        for s in 0..sp.num_samples() {
            let (mut num, mut den) = (0.0, 0.0);
            for r in s * sp.comps..(s + 1) * sp.comps {
                let (idx, vals) = sp.w.row(r);
                for (&j, v) in idx.iter().zip(vals) {
                    num += v.abs() * sp.volumes[j as usize].abs();
                    den += v.abs();
                }
            }
            scale.push(if den > 0.0 && num > 0.0 { num / den } else { 1.0 });
        }
        let row_scale: Vec<f64> = scale.iter().flat_map(|&c| std::iter::repeat_n(c, sp.comps)).collect();
        let mut w = sp.w.clone();
        w.scale_rows(&row_scale);
        let wt = w.transpose();
        Self { sp, w, wt, scale }
    }

    /// `K x = [D T − Wᵀλ ; B T]`.
    fn forward(&self, t: &[f64], lambda: &[f64], out_w: &mut [f64], out_b: &mut [f64]) {
        self.wt.matvec_into(lambda, out_w);
        for ((o, v), x) in out_w.iter_mut().zip(&self.sp.volumes).zip(t) {
            *o = v * x - *o;
        }
        self.sp.b.matvec_into(t, out_b);
    }

    /// `Kᵀ y = [D ω + Bᵀφ ; −W ω]`.
    fn adjoint(&self, omega: &[f64], phi: &[f64], out_t: &mut [f64], out_l: &mut [f64]) {
        self.sp.bt.matvec_into(phi, out_t);
        for ((o, v), w) in out_t.iter_mut().zip(&self.sp.volumes).zip(omega) {
            *o += v * w;
        }
        self.w.matvec_into(omega, out_l);
        for o in out_l.iter_mut() {
            *o = -*o;
        }
    }
}

fn operator_norm(op: &Operator) -> f64 {
    let sp = op.sp;
    let (nt, nl) = (sp.num_cubes(), sp.w.rows());
    let mut t = vec![1.0; nt];
    let mut l = vec![1.0; nl];
    let mut yw = vec![0.0; nt];
    let mut yb = vec![0.0; sp.b.rows()];
    let mut est = 0.0;
    for _ in 0..50 {
        let scale = (norm(&t).powi(2) + norm(&l).powi(2)).sqrt();
        t.iter_mut().chain(l.iter_mut()).for_each(|x| *x /= scale);
        op.forward(&t, &l, &mut yw, &mut yb);
        op.adjoint(&yw, &yb, &mut t, &mut l);
        est = (norm(&t).powi(2) + norm(&l).powi(2)).sqrt().sqrt();
    }
    est
}

fn step_sizes(op: &Operator, mode: Preconditioning) -> Steps {
    let sp = op.sp;
    let (nt, nl, nb) = (sp.num_cubes(), sp.w.rows(), sp.b.rows());
    match mode {
        Preconditioning::Scalar => {
            let s = 0.95 / operator_norm(op).max(f64::MIN_POSITIVE);
            Steps {
                tau_t: vec![s; nt],
                tau_l: vec![s; nl],
                sigma_w: vec![s; nt],
                sigma_b: vec![s; nb],
            }
        }
        Preconditioning::Diagonal => {
            let inv = |s: f64| if s > 0.0 { 1.0 / s } else { 1.0 };
            let b_cols = sp.b.col_abs_sums();
            let mut tau_t: Vec<f64> = (0..nt).map(|j| inv(sp.volumes[j].abs() + b_cols[j])).collect();
            for fiber in &sp.fibers {
                let m = fiber.iter().map(|&j| tau_t[j as usize]).fold(f64::INFINITY, f64::min);
                for &j in fiber {
                    tau_t[j as usize] = m;
                }
            }
            let w_rows = op.w.row_abs_sums();
            let mut tau_l: Vec<f64> = w_rows.iter().map(|&s| inv(s)).collect();
            for chunk in tau_l.chunks_mut(sp.comps) {
                let m = chunk.iter().copied().fold(f64::INFINITY, f64::min);
                chunk.iter_mut().for_each(|x| *x = m);
            }
            let w_cols = op.w.col_abs_sums();
            let sigma_w = (0..nt).map(|j| inv(sp.volumes[j].abs() + w_cols[j])).collect();
            let sigma_b = sp.b.row_abs_sums().into_iter().map(inv).collect();
            Steps {
                tau_t,
                tau_l,
                sigma_w,
                sigma_b,
            }
        }
    }
}

fn project_fibers(sp: &SaddleProblem, t: &mut [f64], scratch: &mut Vec<f64>) {
    for (fiber, &nonneg) in sp.fibers.iter().zip(&sp.fiber_nonneg) {
        scratch.clear();
        scratch.extend(fiber.iter().map(|&j| t[j as usize]));
        if nonneg {
            project_simplex(scratch);
        } else {
            project_hyperplane(scratch);
        }
        for (&j, &v) in fiber.iter().zip(scratch.iter()) {
            t[j as usize] = v;
        }
    }
}

/// A feasible starting point: uniform mass on every fiber, all else zero.
pub fn initial_state(sp: &SaddleProblem) -> SolverState {
    let mut t = vec![0.0; sp.num_cubes()];
    for fiber in &sp.fibers {
        let v = 1.0 / fiber.len() as f64;
        for &j in fiber {
            t[j as usize] = v;
        }
    }
    SolverState {
        t,
        lambda: vec![0.0; sp.w.rows()],
        omega: vec![0.0; sp.num_cubes()],
        phi: vec![0.0; sp.b.rows()],
    }
}

/// Runs PDHG from [`initial_state`].
pub fn pdhg_run(sp: &SaddleProblem, cfg: &SolverConfig) -> Result<(SolverState, SolverReport)> {
    pdhg_run_from(sp, cfg, initial_state(sp))
}

/// Runs PDHG from a given state.
pub fn pdhg_run_from(sp: &SaddleProblem, cfg: &SolverConfig, start: SolverState) -> Result<(SolverState, SolverReport)> {
    cfg.validate()?;
    let (nt, nl, nb) = (sp.num_cubes(), sp.w.rows(), sp.b.rows());
    if start.t.len() != nt || start.lambda.len() != nl || start.omega.len() != nt || start.phi.len() != nb {
        return Err(Error::Shape("starting state does not match the problem".into()));
    }
    let op = Operator::new(sp);
    let mut steps = step_sizes(&op, cfg.preconditioning);
    let pw = cfg.primal_weight;
    steps.tau_t.iter_mut().chain(steps.tau_l.iter_mut()).for_each(|s| *s *= pw);
    steps.sigma_w.iter_mut().chain(steps.sigma_b.iter_mut()).for_each(|s| *s /= pw);
    let SolverState {
        mut t,
        mut lambda,
        mut omega,
        mut phi,
    } = start;
    for (v, c) in lambda.chunks_mut(sp.comps).zip(&op.scale) {
        v.iter_mut().for_each(|x| *x /= c);
    }

    let mut kx_w = vec![0.0; nt];
    let mut kx_b = vec![0.0; nb];
    op.forward(&t, &lambda, &mut kx_w, &mut kx_b);
    let mut kty_t = vec![0.0; nt];
    let mut kty_l = vec![0.0; nl];
    op.adjoint(&omega, &phi, &mut kty_t, &mut kty_l);

    let mut kty_t_old = kty_t.clone();
    let mut kty_l_old = kty_l.clone();
    let mut t_old = t.clone();
    let mut l_old = lambda.clone();
    let mut kxo_w = kx_w.clone();
    let mut kxo_b = kx_b.clone();
    let mut omega_old = omega.clone();
    let mut phi_old = phi.clone();
    let mut scratch = Vec::new();
    let offset_norm = norm(&sp.b_offset);

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;

    for it in 1..=cfg.max_iters {
        iterations = it;
        t_old.copy_from_slice(&t);
        l_old.copy_from_slice(&lambda);
        omega_old.copy_from_slice(&omega);
        phi_old.copy_from_slice(&phi);
        std::mem::swap(&mut kxo_w, &mut kx_w);
        std::mem::swap(&mut kxo_b, &mut kx_b);

        // primal step
        for ((x, g), s) in t.iter_mut().zip(&kty_t).zip(&steps.tau_t) {
            *x -= s * g;
        }
        project_fibers(sp, &mut t, &mut scratch);
        lambda
            .par_chunks_mut(sp.comps)
            .zip(kty_l.par_chunks(sp.comps))
            .zip(steps.tau_l.par_chunks(sp.comps))
            .zip(sp.costs.par_iter().zip(op.scale.par_iter()))
            .for_each(|(((v, g), s), (cost, c))| {
                for (x, gi) in v.iter_mut().zip(g) {
                    *x -= s[0] * gi;
                }
                cost.prox(v, s[0] * c);
            });

        // dual step on the extrapolated primal
        op.forward(&t, &lambda, &mut kx_w, &mut kx_b);
        let th = cfg.theta;
        for ((y, s), (a, b)) in omega.iter_mut().zip(&steps.sigma_w).zip(kx_w.iter().zip(&kxo_w)) {
            *y += s * ((1.0 + th) * a - th * b);
        }
        for (((y, s), (a, b)), off) in phi
            .iter_mut()
            .zip(&steps.sigma_b)
            .zip(kx_b.iter().zip(&kxo_b))
            .zip(&sp.b_offset)
        {
            *y += s * ((1.0 + th) * a - th * b - off);
        }

        std::mem::swap(&mut kty_t, &mut kty_t_old);
        std::mem::swap(&mut kty_l, &mut kty_l_old);
        op.adjoint(&omega, &phi, &mut kty_t, &mut kty_l);

        if it % cfg.check_every == 0 || it == cfg.max_iters {
            let bound = max_abs(&t).max(max_abs(&lambda)).max(max_abs(&omega)).max(max_abs(&phi));
            if !bound.is_finite() || bound > cfg.divergence_bound {
                return Err(Error::Diverged {
                    iteration: it,
                    reason: format!("iterate magnitude {bound:e}"),
                });
            }
            let mut p2 = 0.0;
            for j in 0..nt {
                let r = (t_old[j] - t[j]) / steps.tau_t[j] - (kty_t_old[j] - kty_t[j]);
                p2 += r * r;
            }
            for j in 0..nl {
                let r = (l_old[j] - lambda[j]) / steps.tau_l[j] - (kty_l_old[j] - kty_l[j]);
                p2 += r * r;
            }
            let mut d2 = 0.0;
            for i in 0..nt {
                let r = (omega_old[i] - omega[i]) / steps.sigma_w[i] + (kx_w[i] - kxo_w[i]);
                d2 += r * r;
            }
            for i in 0..nb {
                let r = (phi_old[i] - phi[i]) / steps.sigma_b[i] + (kx_b[i] - kxo_b[i]);
                d2 += r * r;
            }
            let kty_norm = (norm(&kty_t).powi(2) + norm(&kty_l).powi(2)).sqrt();
            let dt: Vec<f64> = t.iter().zip(&sp.volumes).map(|(x, v)| x * v).collect();
            primal_residual = p2.sqrt() / kty_norm.max(1e-12);
            dual_residual = d2.sqrt() / (norm(&dt) + offset_norm).max(1e-12);
            let energy = scaled_energy(sp, &op.scale, &lambda);
            history.push(HistoryEntry {
                iteration: it,
                primal_residual,
                dual_residual,
                energy,
            });
            if primal_residual.max(dual_residual) <= cfg.tolerance {
                converged = true;
                break;
            }
        }
    }

    for (v, c) in lambda.chunks_mut(sp.comps).zip(&op.scale) {
        v.iter_mut().for_each(|x| *x *= c);
    }
    let state = SolverState {
        t,
        lambda,
        omega,
        phi,
    };
    let report = SolverReport {
        iterations,
        converged,
        primal_residual,
        dual_residual,
        energy: sp.energy(&state.lambda),
        boundary_violation: boundary_violation(sp, &state.t),
        pushforward_violation: pushforward_violation(sp, &state.t),
        stationarity: stationarity(sp, &state.t, &state.lambda),
        history,
    };
    Ok((state, report))
}

fn scaled_energy(sp: &SaddleProblem, scale: &[f64], lambda: &[f64]) -> f64 {
    lambda
        .chunks(sp.comps)
        .zip(&sp.costs)
        .zip(scale)
        .map(|((v, cost), c)| c * cost.psi(v))
        .sum()
}

/// `max |∂T − S|` over active rows, unweighted.
pub fn boundary_violation(sp: &SaddleProblem, t: &[f64]) -> f64 {
    let bt = sp.b.matvec(t);
    let mut worst: f64 = 0.0;
    for (i, (a, b)) in bt.iter().zip(&sp.b_offset).enumerate() {
        let scale = sp.b.row(i).1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    worst
}

/// `max |π♯T − 1|` over fibers.
pub fn pushforward_violation(sp: &SaddleProblem, t: &[f64]) -> f64 {
    sp.fibers
        .iter()
        .map(|f| (f.iter().map(|&j| t[j as usize]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `‖D T − Wᵀλ‖ / ‖D T‖`.
pub fn stationarity(sp: &SaddleProblem, t: &[f64], lambda: &[f64]) -> f64 {
    let wl = sp.wt.matvec(lambda);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..t.len() {
        let dt = sp.volumes[j] * t[j];
        num += (dt - wl[j]).powi(2);
        den += dt * dt;
    }
    num.sqrt() / den.sqrt().max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_projection_example() {
        let mut v = [0.5, 0.7, -0.2];
        project_simplex(&mut v);
        assert!((v[0] - 0.4).abs() < 1e-12 && (v[1] - 0.6).abs() < 1e-12 && v[2] == 0.0);
        let mut v = [0.5, 0.7, -0.2];
        project_hyperplane(&mut v);
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.7).abs() < 1e-15 && (v[2] + 0.2).abs() < 1e-15);
    }

    /// Projected gradient descent on `½|x − v|²` over the simplex.
    fn simplex_projection_oracle(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut x = vec![1.0 / n as f64; n];
        for _ in 0..20000 {
            // Frank-Wolfe step toward the best vertex
            let grad: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
            let (best, _) = grad
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &g)| if g < acc.1 { (i, g) } else { acc });
            let mut dir: Vec<f64> = x.iter().map(|a| -a).collect();
            dir[best] += 1.0;
            let num: f64 = -grad.iter().zip(&dir).map(|(g, d)| g * d).sum::<f64>();
            let den: f64 = dir.iter().map(|d| d * d).sum();
            if den == 0.0 {
                break;
            }
            let step = (num / den).clamp(0.0, 1.0);
            for (a, d) in x.iter_mut().zip(&dir) {
                *a += step * d;
            }
        }
        x
    }

    #[test]
    fn simplex_projection_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let v: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.5)).collect();
            let mut p = v.clone();
            project_simplex(&mut p);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
            let q = simplex_projection_oracle(&v);
            let dp: f64 = p.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
            let dq: f64 = q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(dp <= dq + 1e-9);
            for (a, b) in p.iter().zip(&q) {
                assert!((a - b).abs() < 1e-3);
            }
        }
    }
}
