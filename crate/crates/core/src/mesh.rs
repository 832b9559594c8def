//! Structured two-dimensional meshes with tagged boundaries.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("boundary tagging error: {0}")]
    Tagging(String),
    #[error("mesh file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Quad,
    Triangle,
}

impl CellKind {
    pub fn vertices(self) -> usize {
        match self {
            CellKind::Quad => 4,
            CellKind::Triangle => 3,
        }
    }
}

/// Boundary segment labels of the crack geometry, plus a catch-all label for
/// fully clamped domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    I,
    II,
    III,
    IV,
    DirichletAll,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] =
        [BoundaryTag::I, BoundaryTag::II, BoundaryTag::III, BoundaryTag::IV, BoundaryTag::DirichletAll];
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryTag::I => "I",
            BoundaryTag::II => "II",
            BoundaryTag::III => "III",
            BoundaryTag::IV => "IV",
            BoundaryTag::DirichletAll => "DIRICHLET_ALL",
        };
        f.write_str(s)
    }
}

impl FromStr for BoundaryTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "I" => Ok(BoundaryTag::I),
            "II" => Ok(BoundaryTag::II),
            "III" => Ok(BoundaryTag::III),
            "IV" => Ok(BoundaryTag::IV),
            "DIRICHLET_ALL" => Ok(BoundaryTag::DirichletAll),
            other => Err(format!("unknown boundary tag `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Cartesian numbering of a tensor-product mesh: node `(i, j)` has index
/// `j * (nx + 1) + i`, cell `(i, j)` has index `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
}

impl GridInfo {
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    kind: CellKind,
    conn: Vec<usize>,
    pub boundary: Vec<BoundaryEdge>,
    grid: Option<GridInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMetrics {
    pub h_max: f64,
    pub h_min: f64,
    /// Largest ratio `h_K / rho_K` of diameter to inscribed-ball diameter.
    pub eta_max: f64,
}

impl Mesh {
    pub fn new(
        nodes: Vec<[f64; 2]>,
        kind: CellKind,
        conn: Vec<usize>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<Self, MeshError> {
        if !conn.len().is_multiple_of(kind.vertices()) {
            return Err(MeshError::InvalidParameter("connectivity length".into()));
        }
        if let Some(&bad) = conn.iter().find(|&&v| v >= nodes.len()) {
            return Err(MeshError::InvalidParameter(format!("node index {bad} out of range")));
        }
        let mesh = Mesh { nodes, kind, conn, boundary, grid: None };
        mesh.validate()?;
        Ok(mesh)
    }

    #[inline]
    pub fn kind(&self) -> CellKind {
        self.kind
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.conn.len() / self.kind.vertices()
    }

    #[inline]
    pub fn cell(&self, k: usize) -> &[usize] {
        let nv = self.kind.vertices();
        &self.conn[k * nv..(k + 1) * nv]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.conn.chunks_exact(self.kind.vertices())
    }

    pub fn grid(&self) -> Option<GridInfo> {
        self.grid
    }

    pub fn cell_coords(&self, k: usize) -> ([[f64; 2]; 4], usize) {
        let mut out = [[0.0; 2]; 4];
        let cell = self.cell(k);
        for (o, &v) in out.iter_mut().zip(cell) {
            *o = self.nodes[v];
        }
        (out, cell.len())
    }

    /// Polygon area by the shoelace formula (exact for bilinear quads).
    pub fn cell_area(&self, k: usize) -> f64 {
        let (x, nv) = self.cell_coords(k);
        polygon_area(&x[..nv])
    }

    /// Cell diameter `h_K`: the largest vertex-to-vertex distance.
    pub fn cell_diameter(&self, k: usize) -> f64 {
        let (x, nv) = self.cell_coords(k);
        let mut h: f64 = 0.0;
        for a in 0..nv {
            for b in a + 1..nv {
                h = h.max(dist(x[a], x[b]));
            }
        }
        h
    }

    /// Diameter of the largest disc inscribed in the (convex) cell.
    pub fn cell_inscribed_diameter(&self, k: usize) -> f64 {
        let (x, nv) = self.cell_coords(k);
        2.0 * inscribed_radius(&x[..nv])
    }

    pub fn dirichlet_nodes(&self, tags: &[BoundaryTag]) -> Vec<bool> {
        let mut mark = vec![false; self.n_nodes()];
        for e in &self.boundary {
            if tags.contains(&e.tag) {
                mark[e.nodes[0]] = true;
                mark[e.nodes[1]] = true;
            }
        }
        mark
    }

    pub fn boundary_edges_with(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary.iter().filter(move |e| e.tag == tag)
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.boundary.iter().any(|e| e.tag == tag)
    }

    /// Checks orientation, conformity and boundary tagging.
    pub fn validate(&self) -> Result<(), MeshError> {
        for k in 0..self.n_cells() {
            let (x, nv) = self.cell_coords(k);
            for a in 0..nv {
                let p = x[(a + nv - 1) % nv];
                let c = x[a];
                let n = x[(a + 1) % nv];
                let cross = (n[0] - c[0]) * (p[1] - c[1]) - (n[1] - c[1]) * (p[0] - c[0]);
                if cross <= 0.0 {
                    return Err(MeshError::DegenerateCell {
                        cell: k,
                        reason: format!("non-positive corner Jacobian at local vertex {a}"),
                    });
                }
            }
        }
        let edges = self.edge_cells();
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary {
            *tagged.entry(edge_key(e.nodes[0], e.nodes[1])).or_default() += 1;
        }
        for (key, cells) in &edges {
            match cells.len() {
                1 => match tagged.get(key) {
                    Some(1) => {}
                    Some(c) => {
                        return Err(MeshError::Tagging(format!("edge {key:?} tagged {c} times")))
                    }
                    None => return Err(MeshError::Tagging(format!("boundary edge {key:?} untagged"))),
                },
                2 => {
                    if tagged.contains_key(key) {
                        return Err(MeshError::Tagging(format!("interior edge {key:?} is tagged")));
                    }
                }
                n => {
                    return Err(MeshError::NonConforming(format!("edge {key:?} shared by {n} cells")))
                }
            }
        }
        for key in tagged.keys() {
            if !edges.contains_key(key) {
                return Err(MeshError::Tagging(format!("tagged edge {key:?} is not a cell edge")));
            }
        }
        Ok(())
    }

    fn edge_cells(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, cell) in self.cells().enumerate() {
            let nv = cell.len();
            for a in 0..nv {
                map.entry(edge_key(cell[a], cell[(a + 1) % nv])).or_default().push(k);
            }
        }
        map
    }

    /// Splits every quadrilateral `[a, b, c, d]` into `[a, b, c]` and `[a, c, d]`.
    pub fn split_to_triangles(&self) -> Mesh {
        match self.kind {
            CellKind::Triangle => self.clone(),
            CellKind::Quad => {
                let mut conn = Vec::with_capacity(self.n_cells() * 6);
                for c in self.cells() {
                    conn.extend_from_slice(&[c[0], c[1], c[2], c[0], c[2], c[3]]);
                }
                Mesh {
                    nodes: self.nodes.clone(),
                    kind: CellKind::Triangle,
                    conn,
                    boundary: self.boundary.clone(),
                    grid: None,
                }
            }
        }
    }

    /// Uniform refinement: quadrisection through edge midpoints (and the
    /// vertex average for quadrilaterals). Boundary edges keep their tags.
    pub fn refine(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            *mids.entry(edge_key(a, b)).or_insert_with(|| {
                let (pa, pb) = (nodes[a], nodes[b]);
                nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                nodes.len() - 1
            })
        };
        let mut conn = Vec::with_capacity(self.conn.len() * 4);
        for c in self.cells() {
            match self.kind {
                CellKind::Quad => {
                    let m01 = midpoint(c[0], c[1], &mut nodes);
                    let m12 = midpoint(c[1], c[2], &mut nodes);
                    let m23 = midpoint(c[2], c[3], &mut nodes);
                    let m30 = midpoint(c[3], c[0], &mut nodes);
                    let p = [c[0], c[1], c[2], c[3]].map(|v| nodes[v]);
                    nodes.push([
                        0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
                        0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
                    ]);
                    let ctr = nodes.len() - 1;
                    conn.extend_from_slice(&[c[0], m01, ctr, m30]);
                    conn.extend_from_slice(&[m01, c[1], m12, ctr]);
                    conn.extend_from_slice(&[ctr, m12, c[2], m23]);
                    conn.extend_from_slice(&[m30, ctr, m23, c[3]]);
                }
                CellKind::Triangle => {
                    let m01 = midpoint(c[0], c[1], &mut nodes);
                    let m12 = midpoint(c[1], c[2], &mut nodes);
                    let m20 = midpoint(c[2], c[0], &mut nodes);
                    conn.extend_from_slice(&[c[0], m01, m20]);
                    conn.extend_from_slice(&[m01, c[1], m12]);
                    conn.extend_from_slice(&[m20, m12, c[2]]);
                    conn.extend_from_slice(&[m01, m12, m20]);
                }
            }
        }
        let mut boundary = Vec::with_capacity(self.boundary.len() * 2);
        for e in &self.boundary {
            let m = mids[&edge_key(e.nodes[0], e.nodes[1])];
            boundary.push(BoundaryEdge { nodes: [e.nodes[0], m], tag: e.tag });
            boundary.push(BoundaryEdge { nodes: [m, e.nodes[1]], tag: e.tag });
        }
        Mesh { nodes, kind: self.kind, conn, boundary, grid: None }
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn polygon_area(x: &[[f64; 2]]) -> f64 {
    let n = x.len();
    0.5 * (0..n).map(|i| x[i][0] * x[(i + 1) % n][1] - x[(i + 1) % n][0] * x[i][1]).sum::<f64>()
}

/// Largest inscribed circle of a convex counter-clockwise polygon with at
/// most four edges: the optimum of a 3-variable LP sits on three active edge
/// constraints, so all triples are enumerated.
fn inscribed_radius(x: &[[f64; 2]]) -> f64 {
    let n = x.len();
    // edge i: unit inward normal nu_i, constraint nu_i . c - r >= nu_i . x_i
    let lines: Vec<([f64; 2], f64)> = (0..n)
        .map(|i| {
            let (a, b) = (x[i], x[(i + 1) % n]);
            let len = dist(a, b);
            let nu = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
            (nu, nu[0] * a[0] + nu[1] * a[1])
        })
        .collect();
    if n == 3 {
        let s = 0.5 * (0..3).map(|i| dist(x[i], x[(i + 1) % 3])).sum::<f64>();
        return polygon_area(x) / s;
    }
    let mut best: f64 = 0.0;
    for skip in 0..n {
        let act: Vec<usize> = (0..n).filter(|&i| i != skip).collect();
        // rows: nu . c - r = d
        let m: Vec<[f64; 4]> =
            act.iter().map(|&i| [lines[i].0[0], lines[i].0[1], -1.0, lines[i].1]).collect();
        if let Some(sol) = solve3(&m) {
            let (c, r) = ([sol[0], sol[1]], sol[2]);
            if r <= 0.0 {
                continue;
            }
            let feasible =
                lines.iter().all(|(nu, d)| nu[0] * c[0] + nu[1] * c[1] - r >= d - 1e-12 * (1.0 + r));
            if feasible {
                best = best.max(r);
            }
        }
    }
    best
}

fn solve3(m: &[[f64; 4]]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let a = [[m[0][0], m[0][1], m[0][2]], [m[1][0], m[1][1], m[1][2]], [m[2][0], m[2][1], m[2][2]]];
    let d = det(a);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut b = a;
        for row in 0..3 {
            b[row][col] = m[row][3];
        }
        *o = det(b) / d;
    }
    Some(out)
}

/// `n x n` congruent squares on the unit square, all boundary edges clamped.
pub fn uniform_square_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("N must be at least 1".into()));
    }
    let grid = GridInfo { nx: n, ny: n };
    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut conn = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            conn.extend_from_slice(&[
                grid.node(i, j),
                grid.node(i + 1, j),
                grid.node(i + 1, j + 1),
                grid.node(i, j + 1),
            ]);
        }
    }
    let tag = BoundaryTag::DirichletAll;
    let mut boundary = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary.push(BoundaryEdge { nodes: [grid.node(i, 0), grid.node(i + 1, 0)], tag });
        boundary.push(BoundaryEdge { nodes: [grid.node(n, i), grid.node(n, i + 1)], tag });
        boundary.push(BoundaryEdge { nodes: [grid.node(i + 1, n), grid.node(i, n)], tag });
        boundary.push(BoundaryEdge { nodes: [grid.node(0, i + 1), grid.node(0, i)], tag });
    }
    Ok(Mesh { nodes, kind: CellKind::Quad, conn, boundary, grid: Some(grid) })
}

/// `(N+1) x (N+1)` squares with mesh size `1/(N+1)` and Cartesian numbering;
/// interior nodes are `(i, j)` with `1 <= i, j <= N`.
pub fn checkerboard_partition(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("N must be at least 1".into()));
    }
    uniform_square_mesh(n + 1)
}

/// The notched rectangle `(0,1) x (0,2)` minus the triangle with vertices
/// `(0,1/2)`, `(1/2,1)`, `(0,3/2)`.
///
/// The coarse mesh has four quadrilaterals (two trapezoids against the notch,
/// two squares on the right); each level quadrisects every cell, so level 6
/// has 16384 cells and smallest diameter `sqrt(2)/128`.
/// Tags: I on `x = 0`, II on the notch faces, III on `x = 1`, IV on `y = 0`
/// and `y = 2`.
pub fn crack_mesh(refine_levels: usize) -> Mesh {
    let nodes = vec![
        [0.0, 0.0],
        [0.5, 0.0],
        [1.0, 0.0],
        [0.0, 0.5],
        [0.5, 1.0],
        [1.0, 1.0],
        [0.0, 1.5],
        [0.5, 2.0],
        [1.0, 2.0],
        [0.0, 2.0],
    ];
    let conn = vec![0, 1, 4, 3, 1, 2, 5, 4, 6, 4, 7, 9, 4, 5, 8, 7];
    use BoundaryTag::*;
    let e = |a, b, tag| BoundaryEdge { nodes: [a, b], tag };
    let boundary = vec![
        e(3, 0, I),
        e(9, 6, I),
        e(3, 4, II),
        e(4, 6, II),
        e(2, 5, III),
        e(5, 8, III),
        e(0, 1, IV),
        e(1, 2, IV),
        e(8, 7, IV),
        e(7, 9, IV),
    ];
    let mut mesh = Mesh { nodes, kind: CellKind::Quad, conn, boundary, grid: None };
    for _ in 0..refine_levels {
        mesh = mesh.refine();
    }
    mesh
}

pub fn mesh_metrics(m: &Mesh) -> Result<MeshMetrics, MeshError> {
    let mut out = MeshMetrics { h_max: 0.0, h_min: f64::INFINITY, eta_max: 0.0 };
    for k in 0..m.n_cells() {
        let h = m.cell_diameter(k);
        let rho = m.cell_inscribed_diameter(k);
        if !(m.cell_area(k) > 0.0) || !(rho > 0.0) {
            return Err(MeshError::DegenerateCell { cell: k, reason: "zero area".into() });
        }
        out.h_max = out.h_max.max(h);
        out.h_min = out.h_min.min(h);
        out.eta_max = out.eta_max.max(h / rho);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        let m = uniform_square_mesh(4).unwrap();
        assert_eq!(m.n_cells(), 16);
        assert_eq!(m.n_nodes(), 25);
        assert_eq!(uniform_square_mesh(2).unwrap().boundary.len(), 8);
        assert!(uniform_square_mesh(0).is_err());
        m.validate().unwrap();
    }

    #[test]
    fn uniform_metrics() {
        let m = uniform_square_mesh(1).unwrap();
        let mm = mesh_metrics(&m).unwrap();
        assert!((mm.h_max - 2f64.sqrt()).abs() < 1e-15);
        let mm = mesh_metrics(&uniform_square_mesh(4).unwrap()).unwrap();
        assert_eq!(mm.h_min, mm.h_max);
        let mm = mesh_metrics(&uniform_square_mesh(128).unwrap()).unwrap();
        assert!((mm.h_max - 2f64.sqrt() / 128.0).abs() < 1e-15);
        assert!((mm.h_min - mm.h_max).abs() < 1e-15);
        assert!((mm.eta_max - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn checkerboard_partition_counts() {
        assert_eq!(checkerboard_partition(1).unwrap().n_cells(), 4);
        let m = checkerboard_partition(3).unwrap();
        let g = m.grid().unwrap();
        assert_eq!(1.0 / g.nx as f64, 0.25);
        let m = checkerboard_partition(7).unwrap();
        assert_eq!(m.n_cells(), 64);
        let dir = m.dirichlet_nodes(&[BoundaryTag::DirichletAll]);
        assert_eq!(dir.iter().filter(|d| !**d).count(), 49);
    }

    #[test]
    fn refinement_halves_uniform_sizes_and_keeps_tags() {
        let m = uniform_square_mesh(3).unwrap();
        let r = m.refine();
        r.validate().unwrap();
        let (a, b) = (mesh_metrics(&m).unwrap(), mesh_metrics(&r).unwrap());
        assert!((b.h_max - 0.5 * a.h_max).abs() < 1e-15);
        assert!((b.h_min - 0.5 * a.h_min).abs() < 1e-15);
        assert_eq!(r.boundary.len(), 2 * m.boundary.len());
        assert!(r.boundary.iter().all(|e| e.tag == BoundaryTag::DirichletAll));
    }

    #[test]
    fn crack_mesh_structure() {
        for level in 0..4 {
            let m = crack_mesh(level);
            m.validate().unwrap();
            assert_eq!(m.n_cells(), 4 * 4usize.pow(level as u32));
            // the notch tip is a node at every level
            assert!(m.nodes.iter().any(|p| p[0] == 0.5 && p[1] == 1.0));
            for tag in [BoundaryTag::I, BoundaryTag::II, BoundaryTag::III, BoundaryTag::IV] {
                assert!(m.has_tag(tag));
            }
            assert!(!m.has_tag(BoundaryTag::DirichletAll));
            // tagged lengths: I = 1, II = sqrt(2), III = 2, IV = 2
            let len = |tag| -> f64 {
                m.boundary_edges_with(tag).map(|e| dist(m.nodes[e.nodes[0]], m.nodes[e.nodes[1]])).sum()
            };
            assert!((len(BoundaryTag::I) - 1.0).abs() < 1e-12);
            assert!((len(BoundaryTag::II) - 2f64.sqrt()).abs() < 1e-12);
            assert!((len(BoundaryTag::III) - 2.0).abs() < 1e-12);
            assert!((len(BoundaryTag::IV) - 2.0).abs() < 1e-12);
            let area: f64 = (0..m.n_cells()).map(|k| m.cell_area(k)).sum();
            assert!((area - 1.75).abs() < 1e-12);
        }
    }

    #[test]
    fn crack_mesh_target_level() {
        let m = crack_mesh(6);
        assert_eq!(m.n_cells(), 16384);
        let mm = mesh_metrics(&m).unwrap();
        assert!((mm.h_min - 0.011).abs() <= 0.1 * 0.011, "h_min = {}", mm.h_min);
    }

    #[test]
    fn triangle_split() {
        let m = uniform_square_mesh(2).unwrap().split_to_triangles();
        m.validate().unwrap();
        assert_eq!(m.n_cells(), 8);
        let area: f64 = (0..m.n_cells()).map(|k| m.cell_area(k)).sum();
        assert!((area - 1.0).abs() < 1e-15);
        // right isoceles triangle with legs 1/2: inscribed diameter (2 - sqrt 2)/2
        assert!((m.cell_inscribed_diameter(0) - (2.0 - 2f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn inscribed_disc_of_rectangle_and_trapezoid() {
        assert!((inscribed_radius(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]) - 0.5).abs() < 1e-14);
        let r = inscribed_radius(&[[0.0, 0.0], [0.5, 0.0], [0.5, 1.0], [0.0, 0.5]]);
        assert!(r > 0.0 && r < 0.25 + 1e-14);
    }

    #[test]
    fn validation_catches_untagged_edges() {
        let mut m = uniform_square_mesh(2).unwrap();
        m.boundary.pop();
        assert!(matches!(m.validate(), Err(MeshError::Tagging(_))));
        let mut m = uniform_square_mesh(2).unwrap();
        m.conn.swap(0, 1);
        assert!(m.validate().is_err());
    }
}
