//! Plain-text mesh files and legacy ASCII VTK output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! parsed file re-exports to the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::mesh::{BoundaryEdge, CellKind, Mesh, MeshError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("vtk parse error at line {line}: {msg}")]
    Vtk { line: usize, msg: String },
    #[error("field `{name}` has {got} values, expected {expected}")]
    FieldLength { name: String, got: usize, expected: usize },
}

/// Serializes `mesh` as
/// `n_nodes n_cells n_edges quad|triangle`, then one `x y` line per node,
/// one connectivity line per cell and one `a b TAG` line per boundary edge.
pub fn write_mesh_text(mesh: &Mesh) -> String {
    let kind = match mesh.kind() {
        CellKind::Quad => "quad",
        CellKind::Triangle => "triangle",
    };
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {} {}", mesh.n_nodes(), mesh.n_cells(), mesh.boundary.len(), kind);
    for x in &mesh.nodes {
        let _ = writeln!(s, "{:?} {:?}", x[0], x[1]);
    }
    for c in mesh.cells() {
        let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    for e in &mesh.boundary {
        let _ = writeln!(s, "{} {} {}", e.nodes[0], e.nodes[1], e.tag);
    }
    s
}

pub fn read_mesh_text(text: &str) -> Result<Mesh, MeshError> {
    let end = text.lines().count();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let perr = |line: usize, msg: &str| MeshError::Parse { line: line + 1, msg: msg.to_string() };
    let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 {
        return Err(perr(hl, "header needs `n_nodes n_cells n_edges kind`"));
    }
    let count = |s: &str| s.parse::<usize>().map_err(|_| perr(hl, "bad count"));
    let (nn, nc, ne) = (count(h[0])?, count(h[1])?, count(h[2])?);
    let kind = match h[3] {
        "quad" => CellKind::Quad,
        "triangle" => CellKind::Triangle,
        _ => return Err(perr(hl, "cell kind must be `quad` or `triangle`")),
    };
    let mut nodes = Vec::with_capacity(nn);
    for _ in 0..nn {
        let (i, l) = lines.next().ok_or_else(|| perr(end, "missing node line"))?;
        let v: Vec<f64> = l.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| perr(i, "bad coordinate"))?;
        if v.len() != 2 {
            return Err(perr(i, "node line needs two coordinates"));
        }
        nodes.push([v[0], v[1]]);
    }
    let mut conn = Vec::with_capacity(nc * kind.vertices());
    for _ in 0..nc {
        let (i, l) = lines.next().ok_or_else(|| perr(end, "missing cell line"))?;
        let v: Vec<usize> = l.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| perr(i, "bad node index"))?;
        if v.len() != kind.vertices() {
            return Err(perr(i, "wrong vertex count"));
        }
        conn.extend(v);
    }
    let mut boundary = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (i, l) = lines.next().ok_or_else(|| perr(end, "missing boundary line"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(perr(i, "boundary line needs `a b TAG`"));
        }
        let a = f[0].parse().map_err(|_| perr(i, "bad node index"))?;
        let b = f[1].parse().map_err(|_| perr(i, "bad node index"))?;
        let tag = f[2].parse().map_err(|e: String| perr(i, &e))?;
        boundary.push(BoundaryEdge { nodes: [a, b], tag });
    }
    if let Some((i, _)) = lines.next() {
        return Err(perr(i, "trailing content"));
    }
    Mesh::new(nodes, kind, conn, boundary)
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_text(mesh))?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> Result<Mesh, MeshError> {
    read_mesh_text(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Node,
    Cell,
}

/// A named data array; `components` is 1 (scalars) or 3 (vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct VtkField {
    pub name: String,
    pub location: Location,
    pub components: usize,
    pub data: Vec<f64>,
}

impl VtkField {
    pub fn scalar(name: &str, location: Location, data: Vec<f64>) -> Self {
        VtkField { name: name.to_string(), location, components: 1, data }
    }

    /// Planar vectors padded with a zero third component.
    pub fn vector2(name: &str, location: Location, data: &[[f64; 2]]) -> Self {
        let flat = data.iter().flat_map(|v| [v[0], v[1], 0.0]).collect();
        VtkField { name: name.to_string(), location, components: 3, data: flat }
    }
}

/// Contents of a legacy unstructured-grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkDataset {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub fields: Vec<VtkField>,
}

const VTK_TRIANGLE: u8 = 5;
const VTK_QUAD: u8 = 9;

impl VtkDataset {
    pub fn from_mesh(mesh: &Mesh, title: &str, fields: Vec<VtkField>) -> Result<Self, IoError> {
        for f in &fields {
            let expected = f.components
                * match f.location {
                    Location::Node => mesh.n_nodes(),
                    Location::Cell => mesh.n_cells(),
                };
            if f.data.len() != expected {
                return Err(IoError::FieldLength { name: f.name.clone(), got: f.data.len(), expected });
            }
        }
        let ty = match mesh.kind() {
            CellKind::Quad => VTK_QUAD,
            CellKind::Triangle => VTK_TRIANGLE,
        };
        Ok(VtkDataset {
            title: title.to_string(),
            points: mesh.nodes.iter().map(|x| [x[0], x[1], 0.0]).collect(),
            cells: mesh.cells().map(|c| c.to_vec()).collect(),
            cell_types: vec![ty; mesh.n_cells()],
            fields,
        })
    }

    pub fn to_vtk_string(&self) -> String {
        let mut s = String::new();
        s.push_str("# vtk DataFile Version 3.0\n");
        let _ = writeln!(s, "{}", self.title);
        s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        let size: usize = self.cells.iter().map(|c| c.len() + 1).sum();
        let _ = writeln!(s, "CELLS {} {}", self.cells.len(), size);
        for c in &self.cells {
            let mut line = c.len().to_string();
            for v in c {
                let _ = write!(line, " {v}");
            }
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(s, "CELL_TYPES {}", self.cell_types.len());
        for t in &self.cell_types {
            let _ = writeln!(s, "{t}");
        }
        for (loc, header, count) in [
            (Location::Node, "POINT_DATA", self.points.len()),
            (Location::Cell, "CELL_DATA", self.cells.len()),
        ] {
            let fields: Vec<&VtkField> = self.fields.iter().filter(|f| f.location == loc).collect();
            if fields.is_empty() {
                continue;
            }
            let _ = writeln!(s, "{header} {count}");
            for f in fields {
                if f.components == 1 {
                    let _ = writeln!(s, "SCALARS {} double 1\nLOOKUP_TABLE default", f.name);
                    for v in &f.data {
                        let _ = writeln!(s, "{v:?}");
                    }
                } else {
                    let _ = writeln!(s, "VECTORS {} double", f.name);
                    for v in f.data.chunks_exact(3) {
                        let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
                    }
                }
            }
        }
        s
    }

    /// Parses the subset of the legacy format written by
    /// [`VtkDataset::to_vtk_string`].
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let lines: Vec<&str> = text.lines().collect();
        let err = |line: usize, msg: &str| IoError::Vtk { line: line + 1, msg: msg.to_string() };
        if lines.len() < 5 || !lines[0].starts_with("# vtk DataFile") {
            return Err(err(0, "missing vtk header"));
        }
        if lines[2] != "ASCII" || lines[3] != "DATASET UNSTRUCTURED_GRID" {
            return Err(err(2, "only ASCII unstructured grids are supported"));
        }
        let title = lines[1].to_string();
        let mut i = 4;
        let header = |i: usize, key: &str| -> Result<Vec<&str>, IoError> {
            let f: Vec<&str> = lines.get(i).ok_or_else(|| err(i, "unexpected end of file"))?.split_whitespace().collect();
            if f.first() != Some(&key) {
                return Err(err(i, &format!("expected {key}")));
            }
            Ok(f)
        };
        let num = |i: usize, s: &str| s.parse::<usize>().map_err(|_| err(i, "bad count"));
        let floats = |i: usize| -> Result<Vec<f64>, IoError> {
            lines
                .get(i)
                .ok_or_else(|| err(i, "unexpected end of file"))?
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(i, "bad number"))
        };
        let f = header(i, "POINTS")?;
        let np = num(i, f.get(1).ok_or_else(|| err(i, "missing count"))?)?;
        i += 1;
        let mut points = Vec::with_capacity(np);
        for _ in 0..np {
            let v = floats(i)?;
            if v.len() != 3 {
                return Err(err(i, "point needs three coordinates"));
            }
            points.push([v[0], v[1], v[2]]);
            i += 1;
        }
        let f = header(i, "CELLS")?;
        let nc = num(i, f.get(1).ok_or_else(|| err(i, "missing count"))?)?;
        i += 1;
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let v: Vec<usize> = lines
                .get(i)
                .ok_or_else(|| err(i, "unexpected end of file"))?
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(i, "bad index"))?;
            if v.is_empty() || v[0] + 1 != v.len() {
                return Err(err(i, "cell size mismatch"));
            }
            cells.push(v[1..].to_vec());
            i += 1;
        }
        header(i, "CELL_TYPES")?;
        i += 1;
        let mut cell_types = Vec::with_capacity(nc);
        for _ in 0..nc {
            let t = lines.get(i).and_then(|l| l.trim().parse().ok()).ok_or_else(|| err(i, "bad cell type"))?;
            cell_types.push(t);
            i += 1;
        }
        let mut fields = Vec::new();
        let mut location = None;
        while i < lines.len() {
            let f: Vec<&str> = lines[i].split_whitespace().collect();
            match f.first().copied() {
                Some("POINT_DATA") => location = Some((Location::Node, np)),
                Some("CELL_DATA") => location = Some((Location::Cell, nc)),
                Some(kw @ ("SCALARS" | "VECTORS")) => {
                    let (loc, count) = location.ok_or_else(|| err(i, "data array outside a data section"))?;
                    let name = f.get(1).ok_or_else(|| err(i, "missing array name"))?.to_string();
                    let components = if kw == "SCALARS" {
                        i += 1;
                        if lines.get(i).map(|l| l.trim()) != Some("LOOKUP_TABLE default") {
                            return Err(err(i, "expected LOOKUP_TABLE default"));
                        }
                        1
                    } else {
                        3
                    };
                    let mut data = Vec::with_capacity(count * components);
                    for _ in 0..count {
                        i += 1;
                        let v = floats(i)?;
                        if v.len() != components {
                            return Err(err(i, "wrong component count"));
                        }
                        data.extend(v);
                    }
                    fields.push(VtkField { name, location: loc, components, data });
                }
                None => {}
                Some(_) => return Err(err(i, "unrecognized section")),
            }
            i += 1;
        }
        Ok(VtkDataset { title, points, cells, cell_types, fields })
    }
}

/// Writes `mesh` with `fields` as a legacy ASCII VTK file.
pub fn write_vtk(path: &Path, mesh: &Mesh, title: &str, fields: Vec<VtkField>) -> Result<(), IoError> {
    let ds = VtkDataset::from_mesh(mesh, title, fields)?;
    std::fs::write(path, ds.to_vtk_string())?;
    Ok(())
}
