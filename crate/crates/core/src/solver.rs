//! Decoupled (alternating-direction) iteration for the mixed discrete
//! system, its monitors and the post-processed displacement.
//!
//! Each outer step first solves the constitutive nonlinearity cell by cell
//! and then the regularized part together with the equilibrium constraint,
//! which reduces to an SPD system on the displacement.

use rayon::prelude::*;
use thiserror::Error;

use crate::fem::assembly::{extend, p0_schur_local, q1disc_schur_local, restrict, stiffness_local, SchurSystem};
use crate::fem::norms::{gradient_l2_norm, stress_lp_norm};
use crate::fem::{Discretization, DisplacementField, StressField, StressSpace};
use crate::linalg::{cg_jacobi, pcg, Csr, LinalgError, SkylineCholesky};
use crate::material::{apply_a, solve_local_step1, MaterialError, Regularizer};
use crate::problems::Problem;
use crate::tensor::SymTensor;

/// Additive floor in the frozen power-law denominators.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// PCG iterations with a stale factorization before refactoring.
const REFACTOR_ITERATIONS: usize = 30;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("local constitutive solve failed in cell {cell}: {source}")]
    Local { cell: usize, source: MaterialError },
    #[error("linear solve failed: {0}")]
    Linear(#[from] LinalgError),
    #[error("step 2 subiterations hit the cap of {cap} (last increment {increment:e})")]
    SubiterationCap { cap: usize, increment: f64 },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

/// Backend for the displacement Schur systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Envelope Cholesky; matrices that change between solves are handled
    /// by CG preconditioned with the most recent factorization.
    Direct,
    /// Jacobi-preconditioned CG to the given relative residual.
    ConjugateGradient { rtol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Pseudo-time increment.
    pub tau: f64,
    /// Tolerance on the relative increment that stops the outer iteration.
    pub tol: f64,
    /// Tolerance on the relative increment of step-2 subiterations.
    pub sub_tol: f64,
    pub max_outer: usize,
    pub max_sub: usize,
    pub linear_solver: LinearSolver,
}

impl SolverConfig {
    /// `sub_tol = tol / 5`, direct linear solves.
    pub fn new(tau: f64, tol: f64) -> Result<Self, SolverError> {
        let c = SolverConfig {
            tau,
            tol,
            sub_tol: tol / 5.0,
            max_outer: 100_000,
            max_sub: 200,
            linear_solver: LinearSolver::Direct,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(SolverError::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.tol > 0.0) || !(self.sub_tol > 0.0) {
            return Err(SolverError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_outer == 0 || self.max_sub == 0 {
            return Err(SolverError::InvalidConfig("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// One outer iteration as recorded by [`Solver::run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Relative increment of the stopping rule.
    pub quotient: f64,
    /// `|| B^T T - F ||` over the free dofs, relative to `|| F ||`.
    pub constraint_residual: f64,
    pub sub_iterations: usize,
}

/// Iterates `(T^k, u^k)` with the auxiliary tensors
/// `Lambda^k = T^k + tau B^k`, `Theta^k = 2 T^k - Lambda^k`, where
/// `B^k = T^k / n - eps_h(u^k) - G_h`.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub k: usize,
    pub t: StressField,
    pub u: DisplacementField,
    pub t_half: Option<StressField>,
    pub lambda: StressField,
    pub theta: StressField,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub state: IterationState,
    pub converged: bool,
    pub iterations: usize,
    pub final_quotient: f64,
}

/// Cached SPD solver for one Schur system.
#[derive(Debug)]
struct SpdSolver {
    kind: LinearSolver,
    factor: Option<SkylineCholesky>,
    warm: Vec<f64>,
}

impl SpdSolver {
    fn new(kind: LinearSolver, n: usize) -> Self {
        SpdSolver { kind, factor: None, warm: vec![0.0; n] }
    }

    /// Solves `a x = b`. With `a_changed` the cached factor is used as a
    /// preconditioner and rebuilt when it stops being effective.
    fn solve(&mut self, a: &Csr, b: &[f64], a_changed: bool) -> Result<Vec<f64>, SolverError> {
        match self.kind {
            LinearSolver::Direct => {
                if self.factor.is_none() {
                    self.factor = Some(SkylineCholesky::factor(a)?);
                    let x = self.factor.as_ref().unwrap().solve(b);
                    self.warm.clone_from(&x);
                    return Ok(x);
                }
                if !a_changed {
                    return Ok(self.factor.as_ref().unwrap().solve(b));
                }
                let mut x = self.warm.clone();
                let f = self.factor.as_ref().unwrap();
                let res = pcg(a, b, &mut x, |r, z| f.solve_into(r, z), 1e-13, REFACTOR_ITERATIONS);
                let x = match res {
                    Ok(stats) if stats.iterations < REFACTOR_ITERATIONS / 2 => x,
                    Ok(_) => {
                        self.factor = Some(SkylineCholesky::factor(a)?);
                        x
                    }
                    Err(_) => {
                        self.factor = Some(SkylineCholesky::factor(a)?);
                        self.factor.as_ref().unwrap().solve(b)
                    }
                };
                self.warm.clone_from(&x);
                Ok(x)
            }
            LinearSolver::ConjugateGradient { rtol } => {
                let mut x = self.warm.clone();
                cg_jacobi(a, b, &mut x, rtol, 20 * a.n_rows + 100)?;
                self.warm.clone_from(&x);
                Ok(x)
            }
        }
    }
}

/// Mandel-coordinate projector onto spherical 2D tensors.
const P_SPH: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 0.0]];

fn mandel_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// `a P_sph + b P_dev` in Mandel coordinates.
fn iso_mandel(a: f64, b: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            m[i][j] = a * P_SPH[i][j] + b * (id - P_SPH[i][j]);
        }
    }
    m
}

/// Step 2 with a linear regularizer `reg = a P_sph + b P_dev`: the stress
/// satisfies `T = D^{-1}(eps_h(u) + R)` with the constant
/// `D^{-1} = P_sph/(1/tau + a) + P_dev/(1/tau + b)`.
struct LinearStep {
    dinv: [[f64; 3]; 3],
    system: SchurSystem,
    lift: Vec<f64>,
    solver: SpdSolver,
}

/// The decoupled iterative solver bound to one problem.
pub struct Solver<'p> {
    problem: &'p Problem,
    config: SolverConfig,
    regularizer: Regularizer,
    /// `sum_K G_K^T G_K / |K|` with its Dirichlet lift.
    base: SchurSystem,
    base_lift: Vec<f64>,
    base_solver: SpdSolver,
    /// Constant-coefficient system of the linear step 2.
    linear: Option<LinearStep>,
    /// Reweighted system of the nonlinear step 2.
    weighted: Option<(SchurSystem, SpdSolver)>,
    load_free: Vec<f64>,
}

impl<'p> Solver<'p> {
    pub fn new(problem: &'p Problem, config: SolverConfig) -> Result<Self, SolverError> {
        config.validate()?;
        if problem.disc.spaces.stress != StressSpace::P0 {
            return Err(SolverError::Unsupported(
                "the decoupled iteration needs piecewise constant stresses".into(),
            ));
        }
        let disc = &problem.disc;
        let identity = iso_mandel(1.0, 1.0);
        let mut base = SchurSystem::new(disc);
        let base_lift = base.assemble(disc, |k| p0_schur_local(&disc.cells[k], &identity), &problem.boundary);
        let n_free = disc.spaces.n_free();
        let regularizer = problem.reg.regularizer();
        let linear = match regularizer.linear_factors(2) {
            Some((a, b)) => {
                let dinv = iso_mandel(1.0 / (1.0 / config.tau + a), 1.0 / (1.0 / config.tau + b));
                let mut system = SchurSystem::new(disc);
                let lift = system.assemble(disc, |k| p0_schur_local(&disc.cells[k], &dinv), &problem.boundary);
                Some(LinearStep { dinv, system, lift, solver: SpdSolver::new(config.linear_solver, n_free) })
            }
            None => None,
        };
        Ok(Solver {
            problem,
            config,
            regularizer,
            base,
            base_lift,
            base_solver: SpdSolver::new(config.linear_solver, n_free),
            linear,
            weighted: None,
            load_free: restrict(disc, &problem.load),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn disc(&self) -> &Discretization {
        &self.problem.disc
    }

    /// `sum_K G_K^T w_K(r_K)` over the free dofs, for cell tensors `r`.
    fn coupling_rhs<W>(&self, r: &[SymTensor], weight: W) -> Vec<f64>
    where
        W: Fn(usize, [f64; 3]) -> [f64; 3],
    {
        let disc = self.disc();
        let mut out = vec![0.0; disc.spaces.n_free()];
        for k in 0..disc.n_cells() {
            let rm = weight(k, r[k].to_mandel2());
            let (dofs, nd) = disc.cell_dofs(k);
            let g = &disc.cells[k].g;
            for j in 0..nd {
                if let Some(fj) = disc.spaces.free_index(dofs[j]) {
                    out[fj] += g[0][j] * rm[0] + g[1][j] * rm[1] + g[2][j] * rm[2];
                }
            }
        }
        out
    }

    /// Solves `sum_K G_K^T (eps_h(u) + G_h)_K = F` and sets
    /// `T = eps_h(u) + G_h`.
    pub fn initialize(&mut self) -> Result<IterationState, SolverError> {
        let src = &self.problem.source;
        let gterm = self.coupling_rhs(src, |_, m| m);
        let rhs: Vec<f64> =
            (0..self.load_free.len()).map(|i| self.load_free[i] - gterm[i] + self.base_lift[i]).collect();
        let uf = self.base_solver.solve(&self.base.matrix, &rhs, false)?;
        let u = extend(self.disc(), &uf, &self.problem.boundary);
        let eps = self.disc().average_strain(&u);
        let t: Vec<SymTensor> = eps.iter().zip(src).map(|(e, g)| *e + *g).collect();
        Ok(self.make_state(0, StressField::from_cells(t), u, &eps, None))
    }

    fn make_state(
        &self,
        k: usize,
        t: StressField,
        u: DisplacementField,
        eps: &[SymTensor],
        t_half: Option<StressField>,
    ) -> IterationState {
        let (lambda, theta) = auxiliary(&t, eps, &self.problem.source, self.config.tau, self.problem.reg.n);
        IterationState { k, t, u, t_half, lambda, theta, history: Vec::new() }
    }

    /// Cellwise resolvent of the constitutive map:
    /// `T/tau + A(T) = T^k/tau + eps_h(u^k) + G_h - reg(T^k)`.
    pub fn step1(&self, state: &IterationState) -> Result<StressField, SolverError> {
        let eps = self.disc().average_strain(&state.u);
        self.step1_with(&state.t, &eps)
    }

    fn step1_with(&self, t: &StressField, eps: &[SymTensor]) -> Result<StressField, SolverError> {
        let tau = self.config.tau;
        let law = self.problem.law;
        let reg = self.regularizer;
        let src = &self.problem.source;
        let values = (0..t.values.len())
            .into_par_iter()
            .map(|k| {
                let tk = t.values[k];
                let r_hat = (1.0 / tau) * tk + eps[k] + src[k] - reg.apply(&tk);
                solve_local_step1(&r_hat, tau, &law).map_err(|source| SolverError::Local { cell: k, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StressField::from_cells(values))
    }

    /// `R = T^{k+1/2}/tau - A(T^{k+1/2}) + G_h` per cell.
    fn step2_data(&self, t_half: &StressField) -> Vec<SymTensor> {
        let tau = self.config.tau;
        let law = self.problem.law;
        t_half
            .values
            .par_iter()
            .zip(self.problem.source.par_iter())
            .map(|(th, g)| (1.0 / tau) * *th - apply_a(th, &law) + *g)
            .collect()
    }

    /// Linear regularization: `T/tau + reg(T) = eps_h(u) + R` with the
    /// equilibrium constraint, solved through a constant Schur matrix.
    pub fn step2_linear(&mut self, t_half: &StressField) -> Result<(StressField, DisplacementField), SolverError> {
        let r = self.step2_data(t_half);
        let step = self.linear.as_ref().ok_or_else(|| SolverError::Unsupported("linear step 2 requires t = 1".into()))?;
        let dinv = step.dinv;
        let gr = self.coupling_rhs(&r, |_, m| mandel_apply(&dinv, m));
        let step = self.linear.as_mut().unwrap();
        let rhs: Vec<f64> = (0..gr.len()).map(|i| self.load_free[i] - gr[i] + step.lift[i]).collect();
        let uf = step.solver.solve(&step.system.matrix, &rhs, false)?;
        let u = extend(&self.problem.disc, &uf, &self.problem.boundary);
        let eps = self.problem.disc.average_strain(&u);
        let t = eps
            .iter()
            .zip(&r)
            .map(|(e, r)| SymTensor::from_mandel2(mandel_apply(&dinv, (*e + *r).to_mandel2())))
            .collect();
        Ok((StressField::from_cells(t), u))
    }

    /// Power-law regularization: frozen-coefficient subiterations starting
    /// from `guess`. Returns the new pair and the subiteration count.
    pub fn step2_nonlinear(
        &mut self,
        t_half: &StressField,
        guess: (&StressField, &DisplacementField),
    ) -> Result<(StressField, DisplacementField, usize), SolverError> {
        let Regularizer::Power { n, t: texp } = self.regularizer else {
            return Err(SolverError::Unsupported("nonlinear step 2 requires t > 1".into()));
        };
        let tau = self.config.tau;
        let r = self.step2_data(t_half);
        let expo = 1.0 - 1.0 / texp;
        let (mut t_prev, mut u_prev) = (guess.0.clone(), guess.1.clone());
        let n_free = self.disc().spaces.n_free();
        if self.weighted.is_none() {
            self.weighted = Some((SchurSystem::new(self.disc()), SpdSolver::new(self.config.linear_solver, n_free)));
        }
        let mut last = f64::INFINITY;
        for sub in 1..=self.config.max_sub {
            // D^{-1} per cell from the frozen denominators
            let dinv: Vec<[[f64; 3]; 3]> = t_prev
                .values
                .par_iter()
                .map(|tp| {
                    let w_tr = 1.0 / (tp.trace().abs() + DENOMINATOR_FLOOR).powf(expo);
                    let w_d = 1.0 / (tp.deviatoric().norm() + DENOMINATOR_FLOOR).powf(expo);
                    let alpha = 1.0 / tau + 2.0 * w_tr / n;
                    let beta = 1.0 / tau + w_d / n;
                    iso_mandel(1.0 / alpha, 1.0 / beta)
                })
                .collect();
            let problem = self.problem;
            let disc = &problem.disc;
            let gr = self.coupling_rhs(&r, |k, m| mandel_apply(&dinv[k], m));
            let (sys, solver) = self.weighted.as_mut().unwrap();
            let lift = sys.assemble(disc, |k| p0_schur_local(&disc.cells[k], &dinv[k]), &problem.boundary);
            let rhs: Vec<f64> = (0..n_free).map(|i| self.load_free[i] - gr[i] + lift[i]).collect();
            let uf = solver.solve(&sys.matrix, &rhs, true)?;
            let u = extend(disc, &uf, &problem.boundary);
            let eps = disc.average_strain(&u);
            let t: Vec<SymTensor> = (0..eps.len())
                .map(|k| SymTensor::from_mandel2(mandel_apply(&dinv[k], (eps[k] + r[k]).to_mandel2())))
                .collect();
            let t = StressField::from_cells(t);
            let inc = relative_increment(disc, (&t, &u), (&t_prev, &u_prev), 1.0);
            t_prev = t;
            u_prev = u;
            last = inc;
            if inc <= self.config.sub_tol {
                return Ok((t_prev, u_prev, sub));
            }
        }
        Err(SolverError::SubiterationCap { cap: self.config.max_sub, increment: last })
    }

    /// Lebesgue index of the stress increment in the stopping rule.
    pub fn stopping_p(&self) -> f64 {
        if self.regularizer.is_linear() {
            2.0
        } else {
            1.0
        }
    }

    /// One outer iteration from `state`.
    pub fn iterate(&mut self, state: &IterationState) -> Result<(IterationState, IterationRecord), SolverError> {
        let t_half = self.step1(state)?;
        let (t, u, subs) = if self.regularizer.is_linear() {
            let (t, u) = self.step2_linear(&t_half)?;
            (t, u, 0)
        } else {
            self.step2_nonlinear(&t_half, (&state.t, &state.u))?
        };
        let disc = self.disc();
        let quotient = relative_increment(disc, (&t, &u), (&state.t, &state.u), self.stopping_p());
        let eps = disc.average_strain(&u);
        let record = IterationRecord {
            k: state.k + 1,
            quotient,
            constraint_residual: constraint_residual(self.problem, &t),
            sub_iterations: subs,
        };
        let next = self.make_state(state.k + 1, t, u, &eps, Some(t_half));
        Ok((next, record))
    }

    /// Iterates until the stopping rule holds or `max_outer` is reached.
    pub fn run(&mut self) -> Result<RunReport, SolverError> {
        self.run_with(|_| {})
    }

    /// As [`Solver::run`], calling `observe` on the initial state and after
    /// every iteration.
    pub fn run_with<O>(&mut self, mut observe: O) -> Result<RunReport, SolverError>
    where
        O: FnMut(&IterationState),
    {
        let mut state = self.initialize()?;
        observe(&state);
        let mut history = Vec::new();
        let mut quotient = f64::INFINITY;
        for _ in 0..self.config.max_outer {
            let (mut next, record) = self.iterate(&state)?;
            quotient = record.quotient;
            history.push(record);
            observe(&next);
            next.history = Vec::new();
            state = next;
            if quotient <= self.config.tol {
                let iterations = state.k;
                state.history = history;
                return Ok(RunReport { state, converged: true, iterations, final_quotient: quotient });
            }
        }
        let iterations = state.k;
        state.history = history;
        Ok(RunReport { state, converged: false, iterations, final_quotient: quotient })
    }
}

/// `Lambda = T + tau B`, `Theta = 2T - Lambda` with `B = T/n - eps - G`.
/// These are the monitors of the scaled linear regularizer.
fn auxiliary(t: &StressField, eps: &[SymTensor], src: &[SymTensor], tau: f64, n: f64) -> (StressField, StressField) {
    let lambda: Vec<SymTensor> = (0..t.values.len())
        .map(|k| {
            let tk = t.values[k];
            tk + tau * ((1.0 / n) * tk - eps[k] - src[k])
        })
        .collect();
    let theta = t.values.iter().zip(&lambda).map(|(tk, l)| 2.0 * *tk - *l).collect();
    (StressField::from_cells(lambda), StressField::from_cells(theta))
}

/// Relative increment
/// `(|T1 - T0|_p + |grad(u1 - u0)|_2) / (|T0|_p + |grad u0|_2)`.
pub fn relative_increment(
    disc: &Discretization,
    new: (&StressField, &DisplacementField),
    old: (&StressField, &DisplacementField),
    p: f64,
) -> f64 {
    let dt = StressField {
        per_cell: new.0.per_cell,
        values: new.0.values.iter().zip(&old.0.values).map(|(a, b)| *a - *b).collect(),
    };
    let du = DisplacementField { values: new.1.values.iter().zip(&old.1.values).map(|(a, b)| a - b).collect() };
    let num = stress_lp_norm(disc, &dt, p) + gradient_l2_norm(disc, &du);
    let den = stress_lp_norm(disc, old.0, p) + gradient_l2_norm(disc, old.1);
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `|| sum_K G_K^T T_K - F ||` over the free dofs relative to `|| F ||`
/// (absolute when `F = 0`).
pub fn constraint_residual(problem: &Problem, t: &StressField) -> f64 {
    let disc = &problem.disc;
    let mut r = vec![0.0; disc.spaces.n_disp_dofs()];
    for k in 0..disc.n_cells() {
        let m = t.values[k].to_mandel2();
        let (dofs, nd) = disc.cell_dofs(k);
        let g = &disc.cells[k].g;
        for j in 0..nd {
            r[dofs[j]] += g[0][j] * m[0] + g[1][j] * m[1] + g[2][j] * m[2];
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &d in disc.spaces.free_dofs() {
        num += (r[d] - problem.load[d]).powi(2);
        den += problem.load[d].powi(2);
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// `L2` distances of the monitors from their values at a reference solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitors {
    pub lambda: f64,
    pub theta: f64,
    pub t: f64,
}

/// Monitors of `state` against `reference`, where `reference` is (close to)
/// the discrete solution.
pub fn lm_monitors(disc: &Discretization, state: &IterationState, reference: &IterationState) -> Monitors {
    let dist = |a: &StressField, b: &StressField| -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .zip(&disc.cells)
            .map(|((x, y), op)| op.area * (*x - *y).norm_sq())
            .sum::<f64>()
            .sqrt()
    };
    Monitors {
        lambda: dist(&state.lambda, &reference.lambda),
        theta: dist(&state.theta, &reference.theta),
        t: dist(&state.t, &reference.t),
    }
}

/// Displacement `u~` with
/// `int eps(u~) : eps(v) = int (reg(T) + A(T) - G) : eps(v)` for all `v`.
pub fn postprocess_displacement(problem: &Problem, t: &StressField) -> Result<DisplacementField, SolverError> {
    let disc = &problem.disc;
    let reg = problem.reg.regularizer();
    let mut sys = SchurSystem::new(disc);
    let lift = sys.assemble(disc, |k| stiffness_local(disc, k), &problem.boundary);
    let mut rhs = lift;
    for k in 0..disc.n_cells() {
        let tk = t.values[k];
        let m = (reg.apply(&tk) + apply_a(&tk, &problem.law) - problem.source[k]).to_mandel2();
        let (dofs, nd) = disc.cell_dofs(k);
        let g = &disc.cells[k].g;
        for j in 0..nd {
            if let Some(fj) = disc.spaces.free_index(dofs[j]) {
                rhs[fj] += g[0][j] * m[0] + g[1][j] * m[1] + g[2][j] * m[2];
            }
        }
    }
    let uf = SkylineCholesky::factor(&sys.matrix)?.solve(&rhs);
    Ok(extend(disc, &uf, &problem.boundary))
}

/// Direct solve of the linear mixed system
/// `int T:S - int eps(u):S = 0`, `int eps(v):T = int f.v` (`A(T) = T`)
/// for either stress space.
pub fn solve_linear_mixed(problem: &Problem) -> Result<(StressField, DisplacementField), SolverError> {
    let disc = &problem.disc;
    let identity = iso_mandel(1.0, 1.0);
    let mut sys = SchurSystem::new(disc);
    let lift = match disc.spaces.stress {
        StressSpace::P0 => sys.assemble(disc, |k| p0_schur_local(&disc.cells[k], &identity), &problem.boundary),
        StressSpace::Q1Disc => sys.assemble(disc, |k| q1disc_schur_local(&disc.cells[k]), &problem.boundary),
    };
    let load = restrict(disc, &problem.load);
    let rhs: Vec<f64> = load.iter().zip(&lift).map(|(a, b)| a + b).collect();
    let uf = SkylineCholesky::factor(&sys.matrix)?.solve(&rhs);
    let u = extend(disc, &uf, &problem.boundary);
    Ok((disc.project_strain(&u), u))
}

/// Right-hand side of the a-priori stress bound
/// `(16 d^2/(n+1)) |F|^{1+1/n} + 2 C2 sqrt(2d) |Omega|^{1/(n+1)} |F| + 4 C1 kappa |Omega|`,
/// with `|F|` the `L_{1+1/n}` norm of a tensor `F` with `-div F = f`.
pub fn a_priori_stress_bound(f_norm: f64, n: f64, c1: f64, c2: f64, kappa: f64, area: f64, d: f64) -> f64 {
    16.0 * d * d / (n + 1.0) * f_norm.powf(1.0 + 1.0 / n)
        + 2.0 * c2 * (2.0 * d).sqrt() * area.powf(1.0 / (n + 1.0)) * f_norm
        + 4.0 * c1 * kappa * area
}

/// Left-hand side `(1/(n+1)) |T|_{1+1/n}^{1+1/n} + C1 |T|_1` of the bound.
pub fn a_priori_stress_measure(disc: &Discretization, t: &StressField, n: f64, c1: f64) -> f64 {
    let q = 1.0 + 1.0 / n;
    stress_lp_norm(disc, t, q).powf(q) / (n + 1.0) + c1 * stress_lp_norm(disc, t, 1.0)
}
