//! Drivers for the numerical studies: smooth-solution convergence, the
//! large-`n` sweep, the notched specimen, the linear inf-sup study and the
//! checkerboard quotient. Each returns a [`Table`] ready for CSV output.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::diagnostics::{checkerboard_decay_study, eoc, DiagnosticsError};
use crate::fem::norms::{error_norms, linf_norms, ExactFields};
use crate::fem::{FemError, StressSpace};
use crate::io::{write_vtk, IoError, Location, VtkField};
use crate::material::{LinearForm, MaterialError, RegularizationParams};
use crate::problems::{
    closed_form_fd_deviation, crack_problem, linear, linear_problem, smooth, smooth_problem, SourceMode,
};
use crate::solver::{solve_linear_mixed, LinearSolver, Solver, SolverConfig, SolverError};
use crate::builtin_law;

/// Tolerance of the finite-difference check run before manufactured studies.
pub const FD_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("closed-form data deviates from finite differences by {0:e}")]
    ClosedForm(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::Float)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

/// Formats `x` with six significant digits and no trailing zeros.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if !(1e-4..1e7).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Float(x) => format_sig6(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(t) => t.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Missing => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Float(x) => Some(x),
            Value::Int(i) => Some(i as f64),
            _ => None,
        }
    }
}

/// Rows of one study. Every row of an iterative study carries
/// `iterations`, `quotient` and `converged` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    /// Appends the rows of `other`, which must have the same header.
    pub fn append(&mut self, other: Table) {
        assert_eq!(self.header, other.header, "tables with different headers");
        self.rows.extend(other.rows);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of column `name` as floats (missing entries are `None`).
    pub fn floats(&self, name: &str) -> Vec<Option<f64>> {
        let c = self.column(name).unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r[c].as_f64()).collect()
    }

    /// `true` unless a `converged` column holds `false`.
    pub fn all_converged(&self) -> bool {
        match self.column("converged") {
            Some(c) => self.rows.iter().all(|r| r[c] != Value::Bool(false)),
            None => true,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Value::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Parameters shared by the iterative studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationParams {
    pub tau: f64,
    pub tol: f64,
    pub linear_solver: LinearSolver,
    pub max_outer: usize,
}

impl IterationParams {
    pub fn new(tau: f64, tol: f64) -> Self {
        IterationParams { tau, tol, linear_solver: LinearSolver::Direct, max_outer: 100_000 }
    }

    fn config(&self) -> Result<SolverConfig, SolverError> {
        let mut c = SolverConfig::new(self.tau, self.tol)?;
        c.linear_solver = self.linear_solver;
        c.max_outer = self.max_outer;
        Ok(c)
    }
}

/// Lebesgue index of the stress error: 2 for linear regularization, 1
/// otherwise.
pub fn stress_error_index(t: f64) -> f64 {
    if t == 1.0 {
        2.0
    } else {
        1.0
    }
}

fn check_closed_forms() -> Result<(), ExperimentError> {
    let dev = closed_form_fd_deviation(100, 2024);
    if dev > FD_CHECK_TOL {
        return Err(ExperimentError::ClosedForm(dev));
    }
    Ok(())
}

/// Errors of one manufactured run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothRun {
    pub h: f64,
    pub e_u: f64,
    pub e_t: f64,
    pub iterations: usize,
    pub quotient: f64,
    pub converged: bool,
}

pub fn smooth_run(
    cells: usize,
    reg: RegularizationParams,
    mode: SourceMode,
    params: &IterationParams,
) -> Result<SmoothRun, ExperimentError> {
    let problem = smooth_problem(cells, builtin_law(), reg, mode)?;
    let mut solver = Solver::new(&problem, params.config()?)?;
    let rep = solver.run()?;
    let exact = ExactFields { u: Some(&smooth::u), grad_u: &smooth::grad_u, stress: &smooth::stress };
    let e = error_norms(&problem.disc, &rep.state.u, &rep.state.t, &exact, stress_error_index(reg.t));
    Ok(SmoothRun {
        h: 1.0 / cells as f64,
        e_u: e.e_u,
        e_t: e.e_t,
        iterations: rep.iterations,
        quotient: rep.final_quotient,
        converged: rep.converged,
    })
}

/// Convergence under refinement on `2^level x 2^level` meshes.
pub fn run_validate(
    reg: RegularizationParams,
    levels: &[u32],
    params: &IterationParams,
) -> Result<Table, ExperimentError> {
    check_closed_forms()?;
    let runs = levels
        .iter()
        .map(|&l| smooth_run(1 << l, reg, SourceMode::Regularized, params))
        .collect::<Result<Vec<_>, _>>()?;
    let h: Vec<f64> = runs.iter().map(|r| r.h).collect();
    let eu = eoc(&h, &runs.iter().map(|r| r.e_u).collect::<Vec<_>>());
    let et = eoc(&h, &runs.iter().map(|r| r.e_t).collect::<Vec<_>>());
    let mut t = Table::new(&["h", "n", "t", "e_u", "eoc_u", "e_T", "eoc_T", "iterations", "quotient", "converged"]);
    for (i, r) in runs.iter().enumerate() {
        let prev = |v: &[Option<f64>]| if i == 0 { None } else { v[i - 1] };
        t.push(vec![
            r.h.into(),
            reg.n.into(),
            reg.t.into(),
            r.e_u.into(),
            prev(&eu).into(),
            r.e_t.into(),
            prev(&et).into(),
            r.iterations.into(),
            r.quotient.into(),
            r.converged.into(),
        ]);
    }
    Ok(t)
}

/// Errors at a fixed mesh for each `n`, with data chosen so that the smooth
/// pair solves the unregularized system. `t = n` when `t_equals_n`,
/// otherwise `t = 1`.
pub fn run_n_sweep(
    ns: &[f64],
    t_equals_n: bool,
    level: u32,
    linear_form: LinearForm,
    params: &IterationParams,
) -> Result<Table, ExperimentError> {
    check_closed_forms()?;
    let mut table = Table::new(&["h", "n", "t", "p", "e_u", "e_T", "iterations", "quotient", "converged"]);
    for &n in ns {
        let t = if t_equals_n { n } else { 1.0 };
        let reg = RegularizationParams::new(n, t)?.with_linear_form(linear_form);
        let r = smooth_run(1 << level, reg, SourceMode::Unregularized, params)?;
        table.push(vec![
            r.h.into(),
            n.into(),
            t.into(),
            stress_error_index(t).into(),
            r.e_u.into(),
            r.e_t.into(),
            r.iterations.into(),
            r.quotient.into(),
            r.converged.into(),
        ]);
    }
    Ok(table)
}

/// Sup norms of the notched specimen for each traction magnitude. When
/// `vtk_dir` is given, writes `crack_f<f>.vtk` with the displacement, its
/// magnitude `u_mag` and the cellwise stress norm.
pub fn run_crack(
    forces: &[f64],
    level: usize,
    reg: RegularizationParams,
    params: &IterationParams,
    vtk_dir: Option<&Path>,
) -> Result<Table, ExperimentError> {
    let mut table = Table::new(&["f", "grad_u_linf", "T_linf", "iterations", "quotient", "converged"]);
    for &f in forces {
        let problem = crack_problem(level, f, reg)?;
        let mut solver = Solver::new(&problem, params.config()?)?;
        let rep = solver.run()?;
        let norms = linf_norms(&problem.disc, &rep.state.u, &rep.state.t);
        if let Some(dir) = vtk_dir {
            let mesh = &problem.disc.mesh;
            let disp: Vec<[f64; 2]> = (0..mesh.n_nodes()).map(|i| rep.state.u.node(i)).collect();
            let mag = disp.iter().map(|v| v[0].hypot(v[1])).collect();
            let stress = rep.state.t.values.iter().map(|t| t.norm()).collect();
            let fields = vec![
                VtkField::vector2("u", Location::Node, &disp),
                VtkField::scalar("u_mag", Location::Node, mag),
                VtkField::scalar("T_norm", Location::Cell, stress),
            ];
            write_vtk(&dir.join(format!("crack_f{}.vtk", format_sig6(f))), mesh, &format!("crack f={f}"), fields)?;
        }
        table.push(vec![
            f.into(),
            norms.grad_u.into(),
            norms.stress.into(),
            rep.iterations.into(),
            rep.final_quotient.into(),
            rep.converged.into(),
        ]);
    }
    Ok(table)
}

/// Linear mixed problem with `A(T) = T` on `2^level` meshes; errors
/// `|grad(u - u_h)|_2`, `|u - u_h|_2` and `|T - T_h|_1`.
pub fn run_infsup(levels: &[u32], stress: StressSpace) -> Result<Table, ExperimentError> {
    check_closed_forms()?;
    let exact = ExactFields { u: Some(&linear::u), grad_u: &linear::grad_u, stress: &linear::stress };
    let mut rows = Vec::new();
    for &l in levels {
        let problem = linear_problem(1 << l, stress, false)?;
        let (t, u) = solve_linear_mixed(&problem)?;
        let e1 = error_norms(&problem.disc, &u, &t, &exact, 1.0);
        rows.push((1.0 / (1u64 << l) as f64, e1.e_u, e1.e_u_l2.unwrap_or(f64::NAN), e1.e_t));
    }
    let h: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let eocs = [
        eoc(&h, &rows.iter().map(|r| r.1).collect::<Vec<_>>()),
        eoc(&h, &rows.iter().map(|r| r.2).collect::<Vec<_>>()),
        eoc(&h, &rows.iter().map(|r| r.3).collect::<Vec<_>>()),
    ];
    let label = match stress {
        StressSpace::P0 => "Q0",
        StressSpace::Q1Disc => "Q1disc",
    };
    let mut table = Table::new(&[
        "h", "stress", "e_grad_u", "eoc_grad_u", "e_u_l2", "eoc_u_l2", "e_T_l1", "eoc_T_l1", "iterations", "quotient", "converged",
    ]);
    for (i, r) in rows.iter().enumerate() {
        let prev = |v: &[Option<f64>]| if i == 0 { None } else { v[i - 1] };
        table.push(vec![
            r.0.into(),
            label.into(),
            r.1.into(),
            prev(&eocs[0]).into(),
            r.2.into(),
            prev(&eocs[1]).into(),
            r.3.into(),
            prev(&eocs[2]).into(),
            1usize.into(),
            0.0.into(),
            true.into(),
        ]);
    }
    Ok(table)
}

/// Checkerboard quotients for each `n` over the interior-node counts `ns`,
/// followed by the fitted decay exponent of each `n`.
pub fn run_checkerboard(ns: &[usize], exponents: &[f64]) -> Result<Table, ExperimentError> {
    let mut table = Table::new(&["n", "N", "h", "ratio", "fitted_exponent", "predicted_exponent"]);
    for &n in exponents {
        let study = checkerboard_decay_study(ns, n)?;
        for (r, &m) in study.reports.iter().zip(ns) {
            table.push(vec![n.into(), m.into(), r.h.into(), r.ratio.into(), Value::Missing, Value::Missing]);
        }
        table.push(vec![
            n.into(),
            Value::Missing,
            Value::Missing,
            Value::Missing,
            study.exponent.into(),
            (1.0 / (n + 1.0)).into(),
        ]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.144383456), "0.144383");
        assert_eq!(format_sig6(166.3354), "166.335");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(-2.5e-7), "-2.5e-7");
        assert_eq!(format_sig6(1234567.0), "1234570");
        assert_eq!(format_sig6(f64::NAN), "NaN");
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["a", "b", "converged"]);
        t.push(vec![1.5.into(), Value::Missing, true.into()]);
        t.push(vec![2usize.into(), "x".into(), false.into()]);
        assert_eq!(t.to_csv(), "a,b,converged\n1.5,,true\n2,x,false\n");
        assert!(!t.all_converged());
        assert_eq!(t.floats("a"), vec![Some(1.5), Some(2.0)]);
    }

    #[test]
    fn validate_coarse_rows() {
        let reg = RegularizationParams::new(1.0, 1.0).unwrap();
        let t = run_validate(reg, &[1, 2], &IterationParams::new(0.01, 1e-5)).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.all_converged());
        // displacement error equals the interpolation error h / sqrt(3)
        let eu = t.floats("e_u");
        assert!((eu[1].unwrap() - 0.25 / 3f64.sqrt()).abs() < 1e-3);
        assert_eq!(t.floats("eoc_u")[0], None);
    }

    #[test]
    fn crack_zero_force_gives_zero_fields() {
        let reg = RegularizationParams::new(100.0, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let t = run_crack(&[0.0], 1, reg, &IterationParams::new(2.0, 1e-5), Some(dir.path())).unwrap();
        assert_eq!(t.floats("grad_u_linf"), vec![Some(0.0)]);
        assert_eq!(t.floats("T_linf"), vec![Some(0.0)]);
        assert!(dir.path().join("crack_f0.vtk").exists());
    }

    #[test]
    fn infsup_and_checkerboard_tables() {
        let t = run_infsup(&[1, 2], StressSpace::P0).unwrap();
        assert_eq!(t.rows.len(), 2);
        let c = run_checkerboard(&[3, 7], &[1.0]).unwrap();
        assert_eq!(c.rows.len(), 3);
        assert!(c.floats("fitted_exponent")[2].unwrap() > 0.0);
    }

    #[test]
    fn q1disc_stress_changes_u_h_only_at_higher_order() {
        let mut gaps = Vec::new();
        for n in [4, 8, 16] {
            let (_, u0) = solve_linear_mixed(&linear_problem(n, StressSpace::P0, false).unwrap()).unwrap();
            let (_, u1) = solve_linear_mixed(&linear_problem(n, StressSpace::Q1Disc, false).unwrap()).unwrap();
            let gap = u0.values.iter().zip(&u1.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            gaps.push(gap);
        }
        // not identical, but the gap shrinks faster than h^2
        assert!(gaps[0] > 1e-8);
        assert!(gaps[1] < gaps[0] / 8.0 && gaps[2] < gaps[1] / 8.0, "{gaps:?}");

        let q0 = run_infsup(&[2, 3, 4], StressSpace::P0).unwrap();
        let q1 = run_infsup(&[2, 3, 4], StressSpace::Q1Disc).unwrap();
        let (e0, e1) = (q0.floats("e_T_l1"), q1.floats("e_T_l1"));
        for (a, b) in e0.iter().zip(&e1) {
            assert!(b.unwrap() < a.unwrap());
        }
        let rate = q1.floats("eoc_T_l1")[2].unwrap();
        assert!((0.9..1.1).contains(&rate), "{rate}");
    }

    #[test]
    fn tables_are_deterministic() {
        let reg = RegularizationParams::new(2.0, 2.0).unwrap();
        let p = IterationParams::new(0.01, 1e-4);
        let a = run_validate(reg, &[2], &p).unwrap().to_csv();
        let b = run_validate(reg, &[2], &p).unwrap().to_csv();
        assert_eq!(a, b);
    }
}
