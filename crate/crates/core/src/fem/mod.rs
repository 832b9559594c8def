//! Mixed finite element discretization: piecewise constant (or
//! discontinuous bilinear) symmetric stress, continuous Q1/P1 displacement.
//!
//! Stress components are handled in Mandel coordinates `[xx, yy, sqrt2 xy]`
//! so that the stress mass matrix of a P0 cell is `|K|` times the identity.

pub mod assembly;
pub mod element;
pub mod norms;
pub mod quadrature;

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{BoundaryTag, CellKind, Mesh, MeshError};
use crate::tensor::SymTensor;
use element::{point_data, shape_strain};
use quadrature::Rule;

pub use assembly::{
    assemble_coupling, assemble_load, assemble_stress_mass, assemble_stress_source, project_p0,
    strain_stiffness, SchurSystem,
};
pub use norms::{error_norms, linf_norms, modular_phi_n, phi_n, ErrorNorms, ExactFields, LinfNorms};

/// Quadrature points per direction for assembly.
pub const ASSEMBLY_QUAD: usize = 3;
/// Quadrature points per direction for error norms.
pub const ERROR_QUAD: usize = 5;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("boundary tag {0} does not occur on the mesh")]
    UnknownTag(BoundaryTag),
    #[error("stress space {0:?} is not available on {1:?} cells")]
    UnsupportedSpace(StressSpace, CellKind),
    #[error("field length {got} does not match the space ({expected})")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Discrete stress space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StressSpace {
    /// One constant symmetric tensor per cell (P0 on triangles, Q0 on quads).
    P0,
    /// Discontinuous bilinear symmetric tensors, four nodal tensors per cell.
    Q1Disc,
}

impl StressSpace {
    pub fn dofs_per_cell(self) -> usize {
        match self {
            StressSpace::P0 => 1,
            StressSpace::Q1Disc => 4,
        }
    }
}

/// Stress and displacement spaces with the Dirichlet-constrained node set.
///
/// Displacement dof `2 * node + comp`; free dofs are numbered consecutively.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpaces {
    pub stress: StressSpace,
    pub kind: CellKind,
    n_nodes: usize,
    n_cells: usize,
    dirichlet: Vec<bool>,
    free: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
}

impl FunctionSpaces {
    pub fn new(mesh: &Mesh, stress: StressSpace, dirichlet_tags: &[BoundaryTag]) -> Result<Self, FemError> {
        if stress == StressSpace::Q1Disc && mesh.kind() != CellKind::Quad {
            return Err(FemError::UnsupportedSpace(stress, mesh.kind()));
        }
        for &tag in dirichlet_tags {
            if !mesh.has_tag(tag) {
                return Err(FemError::UnknownTag(tag));
            }
        }
        let dirichlet = mesh.dirichlet_nodes(dirichlet_tags);
        let mut free = vec![None; 2 * mesh.n_nodes()];
        let mut free_dofs = Vec::new();
        for (node, &fixed) in dirichlet.iter().enumerate() {
            if !fixed {
                for c in 0..2 {
                    free[2 * node + c] = Some(free_dofs.len());
                    free_dofs.push(2 * node + c);
                }
            }
        }
        Ok(FunctionSpaces {
            stress,
            kind: mesh.kind(),
            n_nodes: mesh.n_nodes(),
            n_cells: mesh.n_cells(),
            dirichlet,
            free,
            free_dofs,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_disp_dofs(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    #[inline]
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free[dof]
    }

    /// Global dof of each free index.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn is_dirichlet_node(&self, node: usize) -> bool {
        self.dirichlet[node]
    }

    /// Number of tensor-valued stress dofs.
    pub fn n_stress_tensors(&self) -> usize {
        self.n_cells * self.stress.dofs_per_cell()
    }

    /// Number of scalar stress dofs (three Mandel components per tensor).
    pub fn n_stress_dofs(&self) -> usize {
        3 * self.n_stress_tensors()
    }
}

/// Stress field: `per_cell` tensors for each cell, cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StressField {
    pub per_cell: usize,
    pub values: Vec<SymTensor>,
}

impl StressField {
    pub fn zeros(spaces: &FunctionSpaces) -> Self {
        StressField {
            per_cell: spaces.stress.dofs_per_cell(),
            values: vec![SymTensor::zero(2); spaces.n_stress_tensors()],
        }
    }

    pub fn from_cells(values: Vec<SymTensor>) -> Self {
        StressField { per_cell: 1, values }
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() / self.per_cell
    }

    pub fn cell(&self, k: usize) -> &[SymTensor] {
        &self.values[k * self.per_cell..(k + 1) * self.per_cell]
    }

    /// Value at reference point `(xi, eta)` of cell `k`.
    pub fn eval(&self, kind: CellKind, k: usize, xi: f64, eta: f64) -> SymTensor {
        let c = self.cell(k);
        if self.per_cell == 1 {
            return c[0];
        }
        let (psi, _) = element::shape(kind, xi, eta);
        let mut t = SymTensor::zero(2);
        for (a, ta) in c.iter().enumerate() {
            t += psi[a] * *ta;
        }
        t
    }

    pub fn to_mandel(&self) -> Vec<f64> {
        self.values.iter().flat_map(|t| t.to_mandel2()).collect()
    }

    pub fn from_mandel(per_cell: usize, v: &[f64]) -> Self {
        StressField {
            per_cell,
            values: v.chunks_exact(3).map(|c| SymTensor::from_mandel2([c[0], c[1], c[2]])).collect(),
        }
    }
}

/// Nodal displacement values, `values[2 * node + comp]`. Entries on
/// Dirichlet nodes hold the prescribed boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub values: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(spaces: &FunctionSpaces) -> Self {
        DisplacementField { values: vec![0.0; spaces.n_disp_dofs()] }
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        [self.values[2 * i], self.values[2 * i + 1]]
    }

    /// Nodal interpolant of `g`.
    pub fn interpolate(mesh: &Mesh, g: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        DisplacementField { values: mesh.nodes.iter().flat_map(|&p| g(p)).collect() }
    }

    /// Interpolates `g` on the Dirichlet nodes only.
    pub fn boundary_values(mesh: &Mesh, spaces: &FunctionSpaces, g: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut u = DisplacementField::zeros(spaces);
        for (i, &p) in mesh.nodes.iter().enumerate() {
            if spaces.is_dirichlet_node(i) {
                let v = g(p);
                u.values[2 * i] = v[0];
                u.values[2 * i + 1] = v[1];
            }
        }
        u
    }
}

/// Precomputed per-cell operators.
#[derive(Debug, Clone)]
pub struct CellOp {
    pub area: f64,
    /// `G[c][2a + comp] = int_K eps(phi_a e_comp)_c` (Mandel component `c`).
    pub g: [[f64; 8]; 3],
    pub q1: Option<Box<Q1DiscOp>>,
}

/// Cell blocks of the discontinuous bilinear stress space.
#[derive(Debug, Clone)]
pub struct Q1DiscOp {
    /// `b[a][c][j] = int_K psi_a eps(phi_j)_c`.
    pub b: [[[f64; 8]; 3]; 4],
    /// Scalar mass `int_K psi_a psi_b`.
    pub m: [[f64; 4]; 4],
    pub m_inv: [[f64; 4]; 4],
}

/// A mesh with its spaces and precomputed cell operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub spaces: FunctionSpaces,
    pub cells: Vec<CellOp>,
}

impl Discretization {
    pub fn new(mesh: Mesh, stress: StressSpace, dirichlet_tags: &[BoundaryTag]) -> Result<Self, FemError> {
        let spaces = FunctionSpaces::new(&mesh, stress, dirichlet_tags)?;
        let rule = Rule::for_cell(mesh.kind(), ASSEMBLY_QUAD);
        let cells = (0..mesh.n_cells())
            .into_par_iter()
            .map(|k| cell_op(&mesh, k, &rule, stress))
            .collect();
        Ok(Discretization { mesh, spaces, cells })
    }

    pub fn kind(&self) -> CellKind {
        self.mesh.kind()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    /// Global displacement dofs of cell `k` in local order `2a + comp`.
    #[inline]
    pub fn cell_dofs(&self, k: usize) -> ([usize; 8], usize) {
        let mut dofs = [0; 8];
        let cell = self.mesh.cell(k);
        for (a, &v) in cell.iter().enumerate() {
            dofs[2 * a] = 2 * v;
            dofs[2 * a + 1] = 2 * v + 1;
        }
        (dofs, 2 * cell.len())
    }

    /// Local displacement vector of cell `k`.
    #[inline]
    pub fn local_u(&self, k: usize, u: &DisplacementField) -> [f64; 8] {
        let (dofs, nd) = self.cell_dofs(k);
        let mut out = [0.0; 8];
        for i in 0..nd {
            out[i] = u.values[dofs[i]];
        }
        out
    }

    /// `int_K eps(u)` in Mandel coordinates.
    #[inline]
    pub fn strain_integral(&self, k: usize, u: &DisplacementField) -> [f64; 3] {
        let lu = self.local_u(k, u);
        let g = &self.cells[k].g;
        let mut e = [0.0; 3];
        for c in 0..3 {
            e[c] = (0..8).map(|j| g[c][j] * lu[j]).sum();
        }
        e
    }

    /// Cell averages of `eps(u)`.
    pub fn average_strain(&self, u: &DisplacementField) -> Vec<SymTensor> {
        (0..self.n_cells())
            .into_par_iter()
            .map(|k| {
                let e = self.strain_integral(k, u);
                let a = self.cells[k].area;
                SymTensor::from_mandel2([e[0] / a, e[1] / a, e[2] / a])
            })
            .collect()
    }

    /// `L2` projection of `eps(u)` onto the stress space.
    pub fn project_strain(&self, u: &DisplacementField) -> StressField {
        match self.spaces.stress {
            StressSpace::P0 => StressField::from_cells(self.average_strain(u)),
            StressSpace::Q1Disc => {
                let mut values = Vec::with_capacity(4 * self.n_cells());
                for k in 0..self.n_cells() {
                    let op = self.cells[k].q1.as_ref().expect("Q1disc operators");
                    let lu = self.local_u(k, u);
                    let mut rhs = [[0.0; 3]; 4];
                    for a in 0..4 {
                        for c in 0..3 {
                            rhs[a][c] = (0..8).map(|j| op.b[a][c][j] * lu[j]).sum();
                        }
                    }
                    for a in 0..4 {
                        let mut m = [0.0; 3];
                        for b in 0..4 {
                            for c in 0..3 {
                                m[c] += op.m_inv[a][b] * rhs[b][c];
                            }
                        }
                        values.push(SymTensor::from_mandel2(m));
                    }
                }
                StressField { per_cell: 4, values }
            }
        }
    }

    /// Scalar stress dof index of Mandel component `c` of local tensor `a`
    /// in cell `k`.
    #[inline]
    pub fn stress_dof(&self, k: usize, a: usize, c: usize) -> usize {
        3 * (k * self.spaces.stress.dofs_per_cell() + a) + c
    }
}

fn cell_op(mesh: &Mesh, k: usize, rule: &Rule, stress: StressSpace) -> CellOp {
    let (xv, nv) = mesh.cell_coords(k);
    let kind = mesh.kind();
    let mut g = [[0.0; 8]; 3];
    let mut area = 0.0;
    let mut q1 = (stress == StressSpace::Q1Disc).then(|| {
        Box::new(Q1DiscOp { b: [[[0.0; 8]; 3]; 4], m: [[0.0; 4]; 4], m_inv: [[0.0; 4]; 4] })
    });
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let pd = point_data(kind, &xv, p[0], p[1]);
        let wj = w * pd.det_j;
        area += wj;
        for a in 0..nv {
            for comp in 0..2 {
                let e = shape_strain(pd.grads[a], comp);
                for c in 0..3 {
                    g[c][2 * a + comp] += wj * e[c];
                }
                if let Some(op) = q1.as_mut() {
                    for s in 0..4 {
                        for c in 0..3 {
                            op.b[s][c][2 * a + comp] += wj * pd.values[s] * e[c];
                        }
                    }
                }
            }
        }
        if let Some(op) = q1.as_mut() {
            for s in 0..4 {
                for r in 0..4 {
                    op.m[s][r] += wj * pd.values[s] * pd.values[r];
                }
            }
        }
    }
    if let Some(op) = q1.as_mut() {
        op.m_inv = invert4(&op.m);
    }
    CellOp { area, g, q1 }
}

/// Gauss-Jordan inverse of an SPD 4x4 matrix.
pub(crate) fn invert4(m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let p = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        inv.swap(col, p);
        let d = a[col][col];
        for j in 0..4 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::uniform_square_mesh;

    #[test]
    fn spaces_constrain_boundary_nodes() {
        let mesh = uniform_square_mesh(3).unwrap();
        let s = FunctionSpaces::new(&mesh, StressSpace::P0, &[BoundaryTag::DirichletAll]).unwrap();
        assert_eq!(s.n_free(), 2 * 4);
        assert_eq!(s.n_stress_dofs(), 27);
        assert!(FunctionSpaces::new(&mesh, StressSpace::P0, &[BoundaryTag::III]).is_err());
        let tri = mesh.split_to_triangles();
        assert!(FunctionSpaces::new(&tri, StressSpace::Q1Disc, &[]).is_err());
    }

    #[test]
    fn strain_integral_of_linear_field() {
        let mesh = uniform_square_mesh(2).unwrap();
        let disc = Discretization::new(mesh.clone(), StressSpace::P0, &[BoundaryTag::DirichletAll]).unwrap();
        // u = (2x + y, 3y): eps = [[2, 1/2], [1/2, 3]]
        let u = DisplacementField::interpolate(&mesh, |p| [2.0 * p[0] + p[1], 3.0 * p[1]]);
        for t in disc.average_strain(&u) {
            assert!((t - SymTensor::new2(2.0, 0.5, 3.0)).norm() < 1e-14);
        }
        let rigid = DisplacementField::interpolate(&mesh, |p| [1.0 - p[1], p[0]]);
        for t in disc.average_strain(&rigid) {
            assert!(t.norm() < 1e-14);
        }
    }

    #[test]
    fn q1disc_projection_reproduces_bilinear_strain() {
        let mesh = uniform_square_mesh(2).unwrap();
        let disc = Discretization::new(mesh.clone(), StressSpace::Q1Disc, &[BoundaryTag::DirichletAll]).unwrap();
        // u = (x y, 0): eps_xx = y, eps_xy = x / 2
        let u = DisplacementField::interpolate(&mesh, |p| [p[0] * p[1], 0.0]);
        let t = disc.project_strain(&u);
        for k in 0..disc.n_cells() {
            let (xv, _) = disc.mesh.cell_coords(k);
            for (a, ta) in t.cell(k).iter().enumerate() {
                let p = xv[a];
                assert!((*ta - SymTensor::new2(p[1], 0.5 * p[0], 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn invert4_roundtrip() {
        let m = [[4.0, 2.0, 1.0, 2.0], [2.0, 4.0, 2.0, 1.0], [1.0, 2.0, 4.0, 2.0], [2.0, 1.0, 2.0, 4.0]];
        let inv = invert4(&m);
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
