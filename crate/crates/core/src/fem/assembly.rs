//! Global assembly: coupling and mass matrices, load and source vectors,
//! the stress projector and displacement-space Schur systems.

use rayon::prelude::*;

use super::element::{point_data, shape_strain};
use super::quadrature::{gauss_legendre, Rule};
use super::{CellOp, Discretization, DisplacementField, FemError, StressField, StressSpace, ASSEMBLY_QUAD, ERROR_QUAD};
use crate::linalg::Csr;
use crate::mesh::{BoundaryTag, Mesh};
use crate::tensor::SymTensor;

/// `B[stress dof, disp dof] = int S_basis : eps(phi)` over all displacement
/// dofs (Dirichlet columns included).
pub fn assemble_coupling(disc: &Discretization) -> Csr {
    let mut t = Vec::new();
    for k in 0..disc.n_cells() {
        let (dofs, nd) = disc.cell_dofs(k);
        let op = &disc.cells[k];
        match disc.spaces.stress {
            StressSpace::P0 => {
                for c in 0..3 {
                    for j in 0..nd {
                        t.push((disc.stress_dof(k, 0, c), dofs[j], op.g[c][j]));
                    }
                }
            }
            StressSpace::Q1Disc => {
                let q1 = op.q1.as_ref().expect("Q1disc operators");
                for a in 0..4 {
                    for c in 0..3 {
                        for j in 0..nd {
                            t.push((disc.stress_dof(k, a, c), dofs[j], q1.b[a][c][j]));
                        }
                    }
                }
            }
        }
    }
    Csr::from_triplets(disc.spaces.n_stress_dofs(), disc.spaces.n_disp_dofs(), &t)
}

/// Block-diagonal stress mass matrix in Mandel coordinates.
pub fn assemble_stress_mass(disc: &Discretization) -> Csr {
    let mut t = Vec::new();
    for k in 0..disc.n_cells() {
        let op = &disc.cells[k];
        match disc.spaces.stress {
            StressSpace::P0 => {
                for c in 0..3 {
                    let i = disc.stress_dof(k, 0, c);
                    t.push((i, i, op.area));
                }
            }
            StressSpace::Q1Disc => {
                let q1 = op.q1.as_ref().expect("Q1disc operators");
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..3 {
                            t.push((disc.stress_dof(k, a, c), disc.stress_dof(k, b, c), q1.m[a][b]));
                        }
                    }
                }
            }
        }
    }
    let n = disc.spaces.n_stress_dofs();
    Csr::from_triplets(n, n, &t)
}

/// Cell averages of a tensor field.
pub fn project_p0<F>(f: F, mesh: &Mesh) -> StressField
where
    F: Fn([f64; 2]) -> SymTensor + Sync,
{
    let rule = Rule::for_cell(mesh.kind(), ERROR_QUAD);
    let values = (0..mesh.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, _) = mesh.cell_coords(k);
            let mut acc = SymTensor::zero(2);
            let mut area = 0.0;
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let pd = point_data(mesh.kind(), &xv, p[0], p[1]);
                acc += (w * pd.det_j) * f(pd.x);
                area += w * pd.det_j;
            }
            (1.0 / area) * acc
        })
        .collect();
    StressField::from_cells(values)
}

/// Boundary traction datum on the edges carrying `tag`.
pub struct Traction<'a> {
    pub tag: BoundaryTag,
    pub value: &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync),
}

/// `int f . phi + sum over traction edges of int l . phi` for every
/// displacement dof (Dirichlet entries included).
pub fn assemble_load<F>(disc: &Discretization, f: F, tractions: &[Traction<'_>]) -> Result<Vec<f64>, FemError>
where
    F: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    for tr in tractions {
        if !disc.mesh.has_tag(tr.tag) {
            return Err(FemError::UnknownTag(tr.tag));
        }
    }
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ASSEMBLY_QUAD);
    let locals: Vec<[f64; 8]> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, nv) = disc.mesh.cell_coords(k);
            let mut out = [0.0; 8];
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let pd = point_data(kind, &xv, p[0], p[1]);
                let fv = f(pd.x);
                for a in 0..nv {
                    for c in 0..2 {
                        out[2 * a + c] += w * pd.det_j * fv[c] * pd.values[a];
                    }
                }
            }
            out
        })
        .collect();
    let mut load = vec![0.0; disc.spaces.n_disp_dofs()];
    for (k, loc) in locals.iter().enumerate() {
        let (dofs, nd) = disc.cell_dofs(k);
        for i in 0..nd {
            load[dofs[i]] += loc[i];
        }
    }
    let (s, w) = gauss_legendre(ASSEMBLY_QUAD);
    for tr in tractions {
        for e in disc.mesh.boundary_edges_with(tr.tag) {
            let (a, b) = (disc.mesh.nodes[e.nodes[0]], disc.mesh.nodes[e.nodes[1]]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            for (&sq, &wq) in s.iter().zip(&w) {
                let x = [a[0] + sq * (b[0] - a[0]), a[1] + sq * (b[1] - a[1])];
                let l = (tr.value)(x);
                for c in 0..2 {
                    load[2 * e.nodes[0] + c] += wq * len * l[c] * (1.0 - sq);
                    load[2 * e.nodes[1] + c] += wq * len * l[c] * sq;
                }
            }
        }
    }
    Ok(load)
}

/// `int G : S_basis` for every scalar (Mandel) stress dof.
pub fn assemble_stress_source<F>(disc: &Discretization, g: F) -> Vec<f64>
where
    F: Fn([f64; 2]) -> SymTensor + Sync,
{
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ASSEMBLY_QUAD);
    let per = disc.spaces.stress.dofs_per_cell();
    let locals: Vec<Vec<f64>> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, _) = disc.mesh.cell_coords(k);
            let mut out = vec![0.0; 3 * per];
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let pd = point_data(kind, &xv, p[0], p[1]);
                let gm = g(pd.x).to_mandel2();
                for a in 0..per {
                    let psi = if per == 1 { 1.0 } else { pd.values[a] };
                    for c in 0..3 {
                        out[3 * a + c] += w * pd.det_j * psi * gm[c];
                    }
                }
            }
            out
        })
        .collect();
    locals.concat()
}

/// Local `G^T W G / |K|` for a P0 cell with Mandel weight `w`.
#[inline]
pub fn p0_schur_local(op: &CellOp, w: &[[f64; 3]; 3]) -> [[f64; 8]; 8] {
    let mut wg = [[0.0; 8]; 3];
    for r in 0..3 {
        for j in 0..8 {
            wg[r][j] = (0..3).map(|c| w[r][c] * op.g[c][j]).sum::<f64>() / op.area;
        }
    }
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = (0..3).map(|r| op.g[r][i] * wg[r][j]).sum();
        }
    }
    out
}

/// Local `B^T M^{-1} B` for a discontinuous-Q1 cell.
pub fn q1disc_schur_local(op: &CellOp) -> [[f64; 8]; 8] {
    let q1 = op.q1.as_ref().expect("Q1disc operators");
    let mut out = [[0.0; 8]; 8];
    for a in 0..4 {
        for b in 0..4 {
            let m = q1.m_inv[a][b];
            for c in 0..3 {
                for i in 0..8 {
                    for j in 0..8 {
                        out[i][j] += m * q1.b[a][c][i] * q1.b[b][c][j];
                    }
                }
            }
        }
    }
    out
}

/// Local strain stiffness `int eps(phi_i) : eps(phi_j)`.
pub fn stiffness_local(disc: &Discretization, k: usize) -> [[f64; 8]; 8] {
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ASSEMBLY_QUAD);
    let (xv, nv) = disc.mesh.cell_coords(k);
    let mut out = [[0.0; 8]; 8];
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let pd = point_data(kind, &xv, p[0], p[1]);
        let mut e = [[0.0; 3]; 8];
        for a in 0..nv {
            for comp in 0..2 {
                e[2 * a + comp] = shape_strain(pd.grads[a], comp);
            }
        }
        for i in 0..2 * nv {
            for j in 0..2 * nv {
                out[i][j] += w * pd.det_j * (0..3).map(|c| e[i][c] * e[j][c]).sum::<f64>();
            }
        }
    }
    out
}

/// Full strain stiffness on the free dofs together with the Dirichlet lift.
pub fn strain_stiffness(disc: &Discretization, boundary: &DisplacementField) -> (Csr, Vec<f64>) {
    let mut sys = SchurSystem::new(disc);
    let lift = sys.assemble(disc, |k| stiffness_local(disc, k), boundary);
    (sys.matrix, lift)
}

/// Symmetric matrix on the free displacement dofs assembled from 8x8 cell
/// blocks, with a reusable sparsity pattern.
#[derive(Debug, Clone)]
pub struct SchurSystem {
    pub matrix: Csr,
    scatter: Vec<usize>,
}

const SKIP: usize = usize::MAX;

impl SchurSystem {
    pub fn new(disc: &Discretization) -> Self {
        let spaces = &disc.spaces;
        let mut entries = Vec::new();
        for k in 0..disc.n_cells() {
            let (dofs, nd) = disc.cell_dofs(k);
            for i in 0..nd {
                if let Some(fi) = spaces.free_index(dofs[i]) {
                    for j in 0..nd {
                        if let Some(fj) = spaces.free_index(dofs[j]) {
                            entries.push((fi, fj));
                        }
                    }
                }
            }
        }
        let n = spaces.n_free();
        let matrix = Csr::pattern(n, n, entries.into_iter());
        let mut scatter = vec![SKIP; 64 * disc.n_cells()];
        for k in 0..disc.n_cells() {
            let (dofs, nd) = disc.cell_dofs(k);
            for i in 0..nd {
                for j in 0..nd {
                    if let (Some(fi), Some(fj)) = (spaces.free_index(dofs[i]), spaces.free_index(dofs[j])) {
                        scatter[64 * k + 8 * i + j] = matrix.find(fi, fj).expect("pattern entry");
                    }
                }
            }
        }
        SchurSystem { matrix, scatter }
    }

    /// Overwrites the matrix with the sum of the cell blocks and returns the
    /// lift vector `-K_{free, dirichlet} g` over the free dofs.
    pub fn assemble<F>(&mut self, disc: &Discretization, local: F, boundary: &DisplacementField) -> Vec<f64>
    where
        F: Fn(usize) -> [[f64; 8]; 8] + Sync,
    {
        let locals: Vec<[[f64; 8]; 8]> = (0..disc.n_cells()).into_par_iter().map(&local).collect();
        self.matrix.values.iter_mut().for_each(|v| *v = 0.0);
        let spaces = &disc.spaces;
        let mut lift = vec![0.0; spaces.n_free()];
        for (k, loc) in locals.iter().enumerate() {
            let (dofs, nd) = disc.cell_dofs(k);
            for i in 0..nd {
                let Some(fi) = spaces.free_index(dofs[i]) else { continue };
                for j in 0..nd {
                    let s = self.scatter[64 * k + 8 * i + j];
                    if s != SKIP {
                        self.matrix.values[s] += loc[i][j];
                    } else {
                        lift[fi] -= loc[i][j] * boundary.values[dofs[j]];
                    }
                }
            }
        }
        lift
    }
}

/// Restriction of a full displacement-dof vector to the free dofs.
pub fn restrict(disc: &Discretization, full: &[f64]) -> Vec<f64> {
    disc.spaces.free_dofs().iter().map(|&d| full[d]).collect()
}

/// Displacement field with free values `free` and boundary values taken
/// from `boundary`.
pub fn extend(disc: &Discretization, free: &[f64], boundary: &DisplacementField) -> DisplacementField {
    let mut u = boundary.clone();
    for (&d, &v) in disc.spaces.free_dofs().iter().zip(free) {
        u.values[d] = v;
    }
    u
}
