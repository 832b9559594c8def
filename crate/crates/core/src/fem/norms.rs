//! Error norms, discrete maximum norms and the modular error functional.

use rayon::prelude::*;

use super::element::{point_data, reference_vertices};
use super::quadrature::Rule;
use super::{Discretization, DisplacementField, StressField, ERROR_QUAD};
use crate::tensor::SymTensor;

pub type VectorFn<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);
pub type GradientFn<'a> = &'a (dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Sync);
pub type TensorFn<'a> = &'a (dyn Fn([f64; 2]) -> SymTensor + Sync);

/// Closed-form reference fields for error measurement.
#[derive(Clone, Copy)]
pub struct ExactFields<'a> {
    pub u: Option<VectorFn<'a>>,
    /// `grad_u[i][j] = d u_i / d x_j`.
    pub grad_u: GradientFn<'a>,
    pub stress: TensorFn<'a>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `|| grad(u - u_h) ||_{L2}`.
    pub e_u: f64,
    /// `|| T - T_h ||_{Lp}`.
    pub e_t: f64,
    /// `|| u - u_h ||_{L2}` when the exact displacement is available.
    pub e_u_l2: Option<f64>,
}

/// `grad u_h` on cell `k` at a point with physical shape gradients `grads`.
#[inline]
pub fn local_gradient(lu: &[f64; 8], grads: &[[f64; 2]; 4], nv: usize) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for a in 0..nv {
        for c in 0..2 {
            for d in 0..2 {
                g[c][d] += lu[2 * a + c] * grads[a][d];
            }
        }
    }
    g
}

/// Errors by tensor-product Gauss quadrature with [`ERROR_QUAD`] points per
/// direction; `p` is the Lebesgue index of the stress error.
pub fn error_norms(
    disc: &Discretization,
    u_h: &DisplacementField,
    t_h: &StressField,
    exact: &ExactFields<'_>,
    p: f64,
) -> ErrorNorms {
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ERROR_QUAD);
    let sums: Vec<[f64; 3]> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, nv) = disc.mesh.cell_coords(k);
            let lu = disc.local_u(k, u_h);
            let mut acc = [0.0; 3];
            for (q, &w) in rule.points.iter().zip(&rule.weights) {
                let pd = point_data(kind, &xv, q[0], q[1]);
                let wj = w * pd.det_j;
                let gh = local_gradient(&lu, &pd.grads, nv);
                let ge = (exact.grad_u)(pd.x);
                let mut du = 0.0;
                for c in 0..2 {
                    for d in 0..2 {
                        du += (ge[c][d] - gh[c][d]).powi(2);
                    }
                }
                acc[0] += wj * du;
                let dt = ((exact.stress)(pd.x) - t_h.eval(kind, k, q[0], q[1])).norm();
                acc[1] += wj * dt.powf(p);
                if let Some(u) = exact.u {
                    let ue = u(pd.x);
                    for c in 0..2 {
                        let uh: f64 = (0..nv).map(|a| lu[2 * a + c] * pd.values[a]).sum();
                        acc[2] += wj * (ue[c] - uh).powi(2);
                    }
                }
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 3];
    for s in &sums {
        for i in 0..3 {
            tot[i] += s[i];
        }
    }
    ErrorNorms { e_u: tot[0].sqrt(), e_t: tot[1].powf(1.0 / p), e_u_l2: exact.u.map(|_| tot[2].sqrt()) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinfNorms {
    /// Largest Frobenius norm of `grad u_h`.
    pub grad_u: f64,
    /// Largest Frobenius norm of `T_h`.
    pub stress: f64,
}

/// Maxima over all error-quadrature points and cell vertices.
pub fn linf_norms(disc: &Discretization, u_h: &DisplacementField, t_h: &StressField) -> LinfNorms {
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ERROR_QUAD);
    let mut samples = rule.points.clone();
    samples.extend_from_slice(reference_vertices(kind));
    let maxima: Vec<(f64, f64)> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, nv) = disc.mesh.cell_coords(k);
            let lu = disc.local_u(k, u_h);
            let mut m = (0.0f64, 0.0f64);
            for q in &samples {
                let pd = point_data(kind, &xv, q[0], q[1]);
                let g = local_gradient(&lu, &pd.grads, nv);
                let gn = (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)).sqrt();
                m.0 = m.0.max(gn);
                m.1 = m.1.max(t_h.eval(kind, k, q[0], q[1]).norm());
            }
            m
        })
        .collect();
    let (grad_u, stress) = maxima.iter().fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    LinfNorms { grad_u, stress }
}

/// `Phi_n(s) = s^2 / (1 + s)^(1 - 1/n)`.
#[inline]
pub fn phi_n(s: f64, n: f64) -> f64 {
    s * s / (1.0 + s).powf(1.0 - 1.0 / n)
}

/// Modular `int Phi_n(|D|)` of a discrete stress field `D`.
pub fn modular_phi_n(disc: &Discretization, diff: &StressField, n: f64) -> f64 {
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ERROR_QUAD);
    let parts: Vec<f64> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, _) = disc.mesh.cell_coords(k);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(q, &w)| {
                    let pd = point_data(kind, &xv, q[0], q[1]);
                    w * pd.det_j * phi_n(diff.eval(kind, k, q[0], q[1]).norm(), n)
                })
                .sum()
        })
        .collect();
    parts.iter().sum()
}

/// `|| S ||_{Lp}` of a discrete stress field.
pub fn stress_lp_norm(disc: &Discretization, s: &StressField, p: f64) -> f64 {
    if s.per_cell == 1 {
        let total: f64 = s.values.iter().zip(&disc.cells).map(|(t, op)| op.area * t.norm().powf(p)).sum();
        return total.powf(1.0 / p);
    }
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ERROR_QUAD);
    let mut total = 0.0;
    for k in 0..disc.n_cells() {
        let (xv, _) = disc.mesh.cell_coords(k);
        for (q, &w) in rule.points.iter().zip(&rule.weights) {
            let pd = point_data(kind, &xv, q[0], q[1]);
            total += w * pd.det_j * s.eval(kind, k, q[0], q[1]).norm().powf(p);
        }
    }
    total.powf(1.0 / p)
}

/// `|| grad u ||_{L2}` of a discrete displacement field.
pub fn gradient_l2_norm(disc: &Discretization, u: &DisplacementField) -> f64 {
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, 2);
    let parts: Vec<f64> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, nv) = disc.mesh.cell_coords(k);
            let lu = disc.local_u(k, u);
            let mut acc = 0.0;
            for (q, &w) in rule.points.iter().zip(&rule.weights) {
                let pd = point_data(kind, &xv, q[0], q[1]);
                let g = local_gradient(&lu, &pd.grads, nv);
                acc += w * pd.det_j * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2));
            }
            acc
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// `|| eps(u) ||_{Lp}` of a discrete displacement field.
pub fn strain_lp_norm(disc: &Discretization, u: &DisplacementField, p: f64) -> f64 {
    let kind = disc.kind();
    let rule = Rule::for_cell(kind, ERROR_QUAD);
    let parts: Vec<f64> = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let (xv, nv) = disc.mesh.cell_coords(k);
            let lu = disc.local_u(k, u);
            let mut acc = 0.0;
            for (q, &w) in rule.points.iter().zip(&rule.weights) {
                let pd = point_data(kind, &xv, q[0], q[1]);
                let e = SymTensor::from_full2(local_gradient(&lu, &pd.grads, nv));
                acc += w * pd.det_j * e.norm().powf(p);
            }
            acc
        })
        .collect();
    parts.iter().sum::<f64>().powf(1.0 / p)
}
