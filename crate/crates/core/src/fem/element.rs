//! Bilinear (Q1) and linear (P1) Lagrange elements and the geometry map.
//!
//! Reference Q1 nodes are `(0,0), (1,0), (1,1), (0,1)`; reference P1 nodes
//! are `(0,0), (1,0), (0,1)`, matching counter-clockwise cell connectivity.

use crate::mesh::CellKind;

/// Shape values and reference gradients at `(xi, eta)`.
#[inline]
pub fn shape(kind: CellKind, xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    match kind {
        CellKind::Quad => (
            [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), xi * eta, (1.0 - xi) * eta],
            [[-(1.0 - eta), -(1.0 - xi)], [1.0 - eta, -xi], [eta, xi], [-eta, 1.0 - xi]],
        ),
        CellKind::Triangle => (
            [1.0 - xi - eta, xi, eta, 0.0],
            [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        ),
    }
}

/// Geometry and physical shape data at one reference point of a cell.
#[derive(Debug, Clone, Copy)]
pub struct PointData {
    pub x: [f64; 2],
    pub det_j: f64,
    pub values: [f64; 4],
    /// Physical gradients of the shape functions.
    pub grads: [[f64; 2]; 4],
}

/// Evaluates the isoparametric map of a cell with vertex coordinates `xv`.
#[inline]
pub fn point_data(kind: CellKind, xv: &[[f64; 2]; 4], xi: f64, eta: f64) -> PointData {
    let nv = kind.vertices();
    let (values, dref) = shape(kind, xi, eta);
    let mut x = [0.0; 2];
    let mut j = [[0.0; 2]; 2]; // j[r][c] = d x_r / d xi_c
    for a in 0..nv {
        for r in 0..2 {
            x[r] += values[a] * xv[a][r];
            for c in 0..2 {
                j[r][c] += xv[a][r] * dref[a][c];
            }
        }
    }
    let det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [[j[1][1] / det_j, -j[0][1] / det_j], [-j[1][0] / det_j, j[0][0] / det_j]];
    let mut grads = [[0.0; 2]; 4];
    for a in 0..nv {
        // grad_x N = J^{-T} grad_xi N
        grads[a][0] = inv[0][0] * dref[a][0] + inv[1][0] * dref[a][1];
        grads[a][1] = inv[0][1] * dref[a][0] + inv[1][1] * dref[a][1];
    }
    PointData { x, det_j, values, grads }
}

/// Reference coordinates of the cell vertices.
pub fn reference_vertices(kind: CellKind) -> &'static [[f64; 2]] {
    match kind {
        CellKind::Quad => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        CellKind::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
    }
}

/// Mandel-coordinate strain `[e_xx, e_yy, sqrt2 e_xy]` of shape function
/// `a`, displacement component `comp`.
#[inline]
pub fn shape_strain(grad: [f64; 2], comp: usize) -> [f64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if comp == 0 {
        [grad[0], 0.0, s * grad[1]]
    } else {
        [0.0, grad[1], s * grad[0]]
    }
}
