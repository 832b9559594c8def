//! Inf-sup experiments for the stress/displacement pairs and convergence
//! order estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fem::norms::{strain_lp_norm, stress_lp_norm};
use crate::fem::{Discretization, DisplacementField, FemError, StressField, StressSpace};
use crate::mesh::{checkerboard_partition, CellKind, MeshError};
use crate::tensor::SymTensor;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("displacement has zero strain")]
    ZeroStrain,
    #[error("supremizer needs piecewise constant stresses")]
    Unsupported,
    #[error("checkerboard mode needs a Cartesian-numbered mesh")]
    NotCartesian,
    #[error("need at least two samples to fit a rate")]
    TooFewSamples,
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Stress/displacement pair of an inf-sup measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacePair {
    /// Piecewise constants on triangles with continuous linears.
    P0P1,
    /// Piecewise constants on quadrilaterals with continuous bilinears.
    Q0Q1,
}

impl SpacePair {
    pub fn label(self) -> &'static str {
        match self {
            SpacePair::P0P1 => "P0/P1",
            SpacePair::Q0Q1 => "Q0/Q1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupReport {
    pub h: f64,
    pub ratio: f64,
    pub n: f64,
    pub pair: SpacePair,
}

/// Cellwise supremizer `T_K = e_K |e_K|^{n-1} / |K|^n`, `e_K = int_K eps(v)`.
pub fn supremizer(disc: &Discretization, v: &DisplacementField, n: f64) -> Result<StressField, DiagnosticsError> {
    if disc.spaces.stress != StressSpace::P0 {
        return Err(DiagnosticsError::Unsupported);
    }
    let values = (0..disc.n_cells())
        .into_par_iter()
        .map(|k| {
            let e = SymTensor::from_mandel2(disc.strain_integral(k, v));
            let norm = e.norm();
            if norm == 0.0 {
                SymTensor::zero(2)
            } else {
                (norm.powf(n - 1.0) / disc.cells[k].area.powf(n)) * e
            }
        })
        .collect();
    Ok(StressField::from_cells(values))
}

/// `b(T, v) / (|T|_{L_{1+1/n}} |eps(v)|_{L_{n+1}})` for the cellwise
/// supremizer `T` of `v`.
pub fn supremizer_ratio(disc: &Discretization, v: &DisplacementField, n: f64) -> Result<f64, DiagnosticsError> {
    let t = supremizer(disc, v, n)?;
    let strain = strain_lp_norm(disc, v, n + 1.0);
    if strain == 0.0 {
        return Err(DiagnosticsError::ZeroStrain);
    }
    let b: f64 = (0..disc.n_cells())
        .map(|k| {
            let e = disc.strain_integral(k, v);
            let m = t.values[k].to_mandel2();
            m[0] * e[0] + m[1] * e[1] + m[2] * e[2]
        })
        .sum();
    let tn = stress_lp_norm(disc, &t, 1.0 + 1.0 / n);
    if tn == 0.0 {
        return Ok(0.0);
    }
    Ok(b / (tn * strain))
}

/// Displacement with random interior nodal values in `[-1, 1]`.
pub fn random_displacement(disc: &Discretization, rng: &mut impl Rng) -> DisplacementField {
    let mut u = DisplacementField::zeros(&disc.spaces);
    for &d in disc.spaces.free_dofs() {
        u.values[d] = rng.gen_range(-1.0..=1.0);
    }
    u
}

/// Supremizer ratios of `samples` random displacements.
pub fn random_ratios(disc: &Discretization, n: f64, samples: usize, seed: u64) -> Result<Vec<f64>, DiagnosticsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| supremizer_ratio(disc, &random_displacement(disc, &mut rng), n)).collect()
}

/// Spurious mode on a Cartesian mesh: both components equal `+1` at interior
/// node `(i, j)` when `i + j` is odd, `-1` when even, and vanish on the
/// boundary.
pub fn checkerboard_mode(disc: &Discretization) -> Result<DisplacementField, DiagnosticsError> {
    let grid = disc.mesh.grid().ok_or(DiagnosticsError::NotCartesian)?;
    let mut u = DisplacementField::zeros(&disc.spaces);
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            let s = if (i + j) % 2 == 1 { 1.0 } else { -1.0 };
            let node = grid.node(i, j);
            u.values[2 * node] = s;
            u.values[2 * node + 1] = s;
        }
    }
    Ok(u)
}

/// Size of `int_K eps(v)` over interior and boundary cells of a Cartesian mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStrainBounds {
    /// Largest `|int_K eps(v)|` over interior cells.
    pub interior_max: f64,
    /// Smallest and largest `|int_K eps(v)| / h` over boundary cells.
    pub boundary_min_over_h: f64,
    pub boundary_max_over_h: f64,
}

pub fn cell_strain_bounds(disc: &Discretization, v: &DisplacementField) -> Result<CellStrainBounds, DiagnosticsError> {
    let grid = disc.mesh.grid().ok_or(DiagnosticsError::NotCartesian)?;
    let h = 1.0 / grid.nx as f64;
    let mut b = CellStrainBounds { interior_max: 0.0, boundary_min_over_h: f64::INFINITY, boundary_max_over_h: 0.0 };
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.cell(i, j);
            let e = SymTensor::from_mandel2(disc.strain_integral(k, v)).norm();
            if i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.ny {
                b.boundary_min_over_h = b.boundary_min_over_h.min(e / h);
                b.boundary_max_over_h = b.boundary_max_over_h.max(e / h);
            } else {
                b.interior_max = b.interior_max.max(e);
            }
        }
    }
    Ok(b)
}

/// Checkerboard quotient on `checkerboard_partition(n_interior)`. The
/// supremizer vanishes on interior cells, where the mode has zero mean strain.
pub fn checkerboard_ratio(n_interior: usize, n: f64) -> Result<InfSupReport, DiagnosticsError> {
    let mesh = checkerboard_partition(n_interior)?;
    let h = 1.0 / (n_interior + 1) as f64;
    let disc = Discretization::new(mesh, StressSpace::P0, &[crate::mesh::BoundaryTag::DirichletAll])?;
    let v = checkerboard_mode(&disc)?;
    let ratio = supremizer_ratio(&disc, &v, n)?;
    Ok(InfSupReport { h, ratio, n, pair: SpacePair::Q0Q1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayStudy {
    pub reports: Vec<InfSupReport>,
    /// Least-squares slope of `log ratio` against `log h`.
    pub exponent: f64,
}

pub fn checkerboard_decay_study(ns: &[usize], n: f64) -> Result<DecayStudy, DiagnosticsError> {
    let reports = ns.par_iter().map(|&m| checkerboard_ratio(m, n)).collect::<Result<Vec<_>, _>>()?;
    let h: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let ratio: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
    let exponent = fit_rate(&h, &ratio)?;
    Ok(DecayStudy { reports, exponent })
}

/// Least-squares slope of `log y` against `log h`.
pub fn fit_rate(h: &[f64], y: &[f64]) -> Result<f64, DiagnosticsError> {
    if h.len() < 2 || h.len() != y.len() {
        return Err(DiagnosticsError::TooFewSamples);
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Experimental orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` of
/// consecutive entries; `None` when either error is at round-off level.
pub fn eoc(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    const ROUND_OFF: f64 = 1e-13;
    h.windows(2)
        .zip(e.windows(2))
        .map(|(hw, ew)| {
            if ew[0] <= ROUND_OFF || ew[1] <= ROUND_OFF {
                None
            } else {
                Some((ew[0] / ew[1]).ln() / (hw[0] / hw[1]).ln())
            }
        })
        .collect()
}

/// Smallest supremizer ratio over random samples on a uniform square mesh,
/// optionally split into triangles.
pub fn random_min_ratio(cells: usize, simplicial: bool, n: f64, samples: usize, seed: u64) -> Result<InfSupReport, DiagnosticsError> {
    let mut mesh = crate::mesh::uniform_square_mesh(cells)?;
    if simplicial {
        mesh = mesh.split_to_triangles();
    }
    let pair = match mesh.kind() {
        CellKind::Triangle => SpacePair::P0P1,
        CellKind::Quad => SpacePair::Q0Q1,
    };
    let disc = Discretization::new(mesh, StressSpace::P0, &[crate::mesh::BoundaryTag::DirichletAll])?;
    let ratios = random_ratios(&disc, n, samples, seed)?;
    let ratio = ratios.into_iter().fold(f64::INFINITY, f64::min);
    Ok(InfSupReport { h: 1.0 / cells as f64, ratio, n, pair })
}
