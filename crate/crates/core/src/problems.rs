//! Boundary value problems: manufactured smooth solutions, the notched
//! (crack) specimen and a linear mixed elasticity test problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fem::assembly::Traction;
use crate::fem::{
    assemble_load, assemble_stress_source, Discretization, DisplacementField, FemError, StressSpace,
};
use crate::material::{apply_a, apply_a_n, builtin_law, MaterialLaw, RegularizationParams};
use crate::mesh::{crack_mesh, uniform_square_mesh, BoundaryTag, Mesh};
use crate::tensor::SymTensor;

/// A discretized problem: mesh, spaces, constitutive data and loads.
#[derive(Debug, Clone)]
pub struct Problem {
    pub disc: Discretization,
    pub law: MaterialLaw,
    pub reg: RegularizationParams,
    /// `int f . phi + int l . phi` for every displacement dof.
    pub load: Vec<f64>,
    /// Prescribed values on the Dirichlet nodes, zero elsewhere.
    pub boundary: DisplacementField,
    /// Cell averages of the constitutive source `G` (zero when absent).
    pub source: Vec<SymTensor>,
}

impl Problem {
    /// Assembles a problem on `mesh` with body force `f`, tractions,
    /// Dirichlet data `g` on `dirichlet_tags` and an optional source `G`.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        mesh: Mesh,
        stress: StressSpace,
        dirichlet_tags: &[BoundaryTag],
        law: MaterialLaw,
        reg: RegularizationParams,
        f: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
        tractions: &[Traction<'_>],
        g: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
        source: Option<&(dyn Fn([f64; 2]) -> SymTensor + Sync)>,
    ) -> Result<Problem, FemError> {
        let disc = Discretization::new(mesh, stress, dirichlet_tags)?;
        let load = assemble_load(&disc, f, tractions)?;
        let boundary = DisplacementField::boundary_values(&disc.mesh, &disc.spaces, g);
        let source = match source {
            Some(gfun) if stress == StressSpace::P0 => {
                let s = assemble_stress_source(&disc, gfun);
                s.chunks_exact(3)
                    .zip(&disc.cells)
                    .map(|(m, op)| SymTensor::from_mandel2([m[0] / op.area, m[1] / op.area, m[2] / op.area]))
                    .collect()
            }
            _ => vec![SymTensor::zero(2); disc.n_cells()],
        };
        Ok(Problem { disc, law, reg, load, boundary, source })
    }

    pub fn has_source(&self) -> bool {
        self.source.iter().any(|t| t.norm() != 0.0)
    }
}

/// How the constitutive source of the smooth manufactured problem is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    /// `G = A_n(T) - eps(u)`: the exact pair solves the regularized system.
    Regularized,
    /// `G = A(T) - eps(u)`: the exact pair solves the unregularized system.
    Unregularized,
}

/// Smooth solution `u = (y(1-y), 0)`, `T = diag(e^x, cos y)` on the unit
/// square.
pub mod smooth {
    use super::*;

    pub fn u(p: [f64; 2]) -> [f64; 2] {
        [p[1] * (1.0 - p[1]), 0.0]
    }

    pub fn grad_u(p: [f64; 2]) -> [[f64; 2]; 2] {
        [[0.0, 1.0 - 2.0 * p[1]], [0.0, 0.0]]
    }

    pub fn strain(p: [f64; 2]) -> SymTensor {
        SymTensor::from_full2(grad_u(p))
    }

    pub fn stress(p: [f64; 2]) -> SymTensor {
        SymTensor::diag2(p[0].exp(), p[1].cos())
    }

    /// `f = -div T`.
    pub fn body_force(p: [f64; 2]) -> [f64; 2] {
        [-p[0].exp(), p[1].sin()]
    }

    pub fn source(p: [f64; 2], mode: SourceMode, law: &MaterialLaw, reg: &RegularizationParams) -> SymTensor {
        let t = stress(p);
        let a = match mode {
            SourceMode::Regularized => apply_a_n(&t, law, reg),
            SourceMode::Unregularized => apply_a(&t, law),
        };
        a - strain(p)
    }
}

/// Smooth solution `u = (x e^y, sin x)`, `T = eps(u)` of the linear mixed
/// problem with `A(T) = T`.
pub mod linear {
    use super::*;

    pub fn u(p: [f64; 2]) -> [f64; 2] {
        [p[0] * p[1].exp(), p[0].sin()]
    }

    pub fn grad_u(p: [f64; 2]) -> [[f64; 2]; 2] {
        [[p[1].exp(), p[0] * p[1].exp()], [p[0].cos(), 0.0]]
    }

    pub fn stress(p: [f64; 2]) -> SymTensor {
        SymTensor::from_full2(grad_u(p))
    }

    /// `f = -div eps(u)`.
    pub fn body_force(p: [f64; 2]) -> [f64; 2] {
        [-0.5 * p[0] * p[1].exp(), 0.5 * (p[0].sin() - p[1].exp())]
    }
}

/// Manufactured smooth problem on the uniform `n x n` square mesh.
pub fn smooth_problem(
    n: usize,
    law: MaterialLaw,
    reg: RegularizationParams,
    mode: SourceMode,
) -> Result<Problem, FemError> {
    let mesh = uniform_square_mesh(n)?;
    let g = move |p: [f64; 2]| smooth::source(p, mode, &law, &reg);
    Problem::assemble(
        mesh,
        StressSpace::P0,
        &[BoundaryTag::DirichletAll],
        law,
        reg,
        &smooth::body_force,
        &[],
        &smooth::u,
        Some(&g),
    )
}

/// Linear mixed problem with exact solution [`linear::u`] on the uniform
/// `n x n` square mesh (a triangle split when `simplicial`).
pub fn linear_problem(n: usize, stress: StressSpace, simplicial: bool) -> Result<Problem, FemError> {
    let mut mesh = uniform_square_mesh(n)?;
    if simplicial {
        mesh = mesh.split_to_triangles();
    }
    let reg = RegularizationParams::new(1.0, 1.0).expect("valid parameters");
    Problem::assemble(
        mesh,
        stress,
        &[BoundaryTag::DirichletAll],
        MaterialLaw::identity(2),
        reg,
        &linear::body_force,
        &[],
        &linear::u,
        None,
    )
}

/// Notched specimen clamped on IV and loaded by the traction `(f, 0)` on III.
pub fn crack_problem(level: usize, f: f64, reg: RegularizationParams) -> Result<Problem, FemError> {
    let mesh = crack_mesh(level);
    let traction = move |_: [f64; 2]| [f, 0.0];
    Problem::assemble(
        mesh,
        StressSpace::P0,
        &[BoundaryTag::IV],
        builtin_law(),
        reg,
        &|_| [0.0, 0.0],
        &[Traction { tag: BoundaryTag::III, value: &traction }],
        &|_| [0.0, 0.0],
        None,
    )
}

/// A field and its closed-form derivative.
type GradCase<'a> = (&'a dyn Fn([f64; 2]) -> [f64; 2], fn([f64; 2]) -> [[f64; 2]; 2]);
type DivCase<'a> = (&'a dyn Fn([f64; 2]) -> SymTensor, fn([f64; 2]) -> [f64; 2]);

/// Largest deviation between the closed-form derivatives of the
/// manufactured fields and central finite differences (step `1e-6`) at
/// `samples` random points of the unit square.
pub fn closed_form_fd_deviation(samples: usize, seed: u64) -> f64 {
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let fd_grad = |u: &dyn Fn([f64; 2]) -> [f64; 2], p: [f64; 2]| {
        let mut g = [[0.0; 2]; 2];
        for j in 0..2 {
            let (mut a, mut b) = (p, p);
            a[j] += h;
            b[j] -= h;
            let (ua, ub) = (u(a), u(b));
            for i in 0..2 {
                g[i][j] = (ua[i] - ub[i]) / (2.0 * h);
            }
        }
        g
    };
    let fd_div = |t: &dyn Fn([f64; 2]) -> SymTensor, p: [f64; 2]| {
        let mut d = [0.0; 2];
        for j in 0..2 {
            let (mut a, mut b) = (p, p);
            a[j] += h;
            b[j] -= h;
            let (ta, tb) = (t(a), t(b));
            for i in 0..2 {
                d[i] += (ta.get(i, j) - tb.get(i, j)) / (2.0 * h);
            }
        }
        d
    };
    for _ in 0..samples {
        let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let cases: [GradCase<'_>; 2] =
            [(&smooth::u, smooth::grad_u), (&linear::u, linear::grad_u)];
        for (u, grad) in cases {
            let (g, fd) = (grad(p), fd_grad(u, p));
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((g[i][j] - fd[i][j]).abs());
                }
            }
        }
        let forces: [DivCase<'_>; 2] =
            [(&smooth::stress, smooth::body_force), (&linear::stress, linear::body_force)];
        for (t, f) in forces {
            let (fv, div) = (f(p), fd_div(t, p));
            for i in 0..2 {
                worst = worst.max((fv[i] + div[i]).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_finite_differences() {
        assert!(closed_form_fd_deviation(100, 7) < 1e-6);
    }

    #[test]
    fn smooth_data_examples() {
        assert_eq!(smooth::body_force([0.0, 0.0]), [-1.0, 0.0]);
        assert_eq!(smooth::stress([0.0, 0.0]), SymTensor::identity(2));
        // G = A(T) - eps(u) for the builtin law at the origin: T = I, eps(u) has xy = 1/2
        let law = builtin_law();
        let reg = RegularizationParams::new(1.0, 1.0).unwrap();
        let g = smooth::source([0.0, 0.0], SourceMode::Unregularized, &law, &reg);
        let lam = 2.0 / 5f64.sqrt();
        assert!((g - SymTensor::new2(lam, -0.5, lam)).norm() < 1e-15);
        let gr = smooth::source([0.0, 0.0], SourceMode::Regularized, &law, &reg);
        assert!((gr - g - SymTensor::identity(2)).norm() < 1e-15);
    }

    #[test]
    fn problem_assembly() {
        let law = builtin_law();
        let reg = RegularizationParams::new(1.0, 1.0).unwrap();
        let p = smooth_problem(4, law, reg, SourceMode::Regularized).unwrap();
        assert_eq!(p.source.len(), 16);
        assert!(p.has_source());
        // boundary values interpolate u on x = 0 and vanish in the interior
        let mesh = &p.disc.mesh;
        for (i, x) in mesh.nodes.iter().enumerate() {
            let v = p.boundary.node(i);
            if p.disc.spaces.is_dirichlet_node(i) {
                assert_eq!(v, smooth::u(*x));
            } else {
                assert_eq!(v, [0.0, 0.0]);
            }
        }
        let c = crack_problem(1, 0.5, RegularizationParams::new(100.0, 1.0).unwrap()).unwrap();
        assert!(!c.has_source());
        let total: f64 = c.load.iter().step_by(2).sum();
        assert!((total - 0.5 * 2.0).abs() < 1e-14);
    }
}
