use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::error::MeshError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Msh,
    Json,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "msh" => Some(MeshFormat::Msh),
            "json" => Some(MeshFormat::Json),
            _ => None,
        }
    }
}

impl std::str::FromStr for MeshFormat {
    type Err = MeshError;
    fn from_str(s: &str) -> Result<Self, MeshError> {
        match s.to_ascii_lowercase().as_str() {
            "msh" | "gmsh" => Ok(MeshFormat::Msh),
            "json" => Ok(MeshFormat::Json),
            other => Err(MeshError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonBoundaryEdge {
    pub edge: [usize; 2],
    pub tag: String,
}

/// `{nodes: [[x, y]...], triangles: [[a, b, c]...], boundary: [{edge: [a, b], tag}...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub boundary: Vec<JsonBoundaryEdge>,
}

impl JsonMesh {
    pub fn into_mesh(self) -> Result<TriMesh, MeshError> {
        let tags: Vec<_> = self.boundary.into_iter().map(|b| (b.edge, b.tag)).collect();
        TriMesh::new(self.nodes, self.triangles, &tags)
    }

    pub fn from_mesh(mesh: &TriMesh) -> Self {
        JsonMesh {
            nodes: mesh.nodes().to_vec(),
            triangles: mesh.triangles().to_vec(),
            boundary: mesh
                .boundary_edges()
                .iter()
                .map(|e| JsonBoundaryEdge { edge: e.nodes, tag: e.tag.clone() })
                .collect(),
        }
    }
}

/// Reads a mesh; `format` defaults to the file extension.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let format = match format.or_else(|| MeshFormat::from_path(path)) {
        Some(f) => f,
        None => return Err(MeshError::UnknownFormat(name)),
    };
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io { path: name.clone(), source })?;
    match format {
        MeshFormat::Msh => parse_msh(&text, &name),
        MeshFormat::Json => parse_json_mesh(&text, &name),
    }
}

pub fn parse_json_mesh(text: &str, name: &str) -> Result<TriMesh, MeshError> {
    let raw: JsonMesh = serde_json::from_str(text).map_err(|e| MeshError::Parse {
        path: name.to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    raw.into_mesh()
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    name: &'a str,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str, MeshError> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok(l);
                    }
                }
                None => return Err(self.err("unexpected end of file")),
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Parse { path: self.name.to_string(), line: self.line, msg: msg.into() }
    }

    fn parse<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T, MeshError> {
        tok.and_then(|t| t.parse().ok()).ok_or_else(|| self.err(format!("expected {what}")))
    }
}

/// Gmsh MSH 2.2 ASCII: nodes, 2-node lines with physical tags, 3-node triangles.
pub fn parse_msh(text: &str, name: &str) -> Result<TriMesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), name, line: 0 };
    let mut physical: HashMap<i64, String> = HashMap::new();
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut lines_raw: Vec<([i64; 2], i64)> = Vec::new();
    let mut tris_raw: Vec<[i64; 3]> = Vec::new();
    let mut seen_format = false;
    while let Ok(l) = lines.next_line() {
        match l {
            "$MeshFormat" => {
                let v = lines.next_line()?;
                let mut it = v.split_whitespace();
                let version: f64 = lines.parse(it.next(), "version")?;
                let file_type: i64 = lines.parse(it.next(), "file type")?;
                if !(2.0..3.0).contains(&version) || file_type != 0 {
                    return Err(lines.err(format!("unsupported MSH version {version} (type {file_type})")));
                }
                seen_format = true;
                expect_end(&mut lines, "$EndMeshFormat")?;
            }
            "$PhysicalNames" => {
                let l = lines.next_line()?;
                let n: usize = lines.parse(Some(l), "count")?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let mut it = l.splitn(3, char::is_whitespace);
                    let _dim: i64 = lines.parse(it.next(), "dimension")?;
                    let id: i64 = lines.parse(it.next(), "physical id")?;
                    let nm = it.next().unwrap_or("").trim().trim_matches('"').to_string();
                    physical.insert(id, nm);
                }
                expect_end(&mut lines, "$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let l = lines.next_line()?;
                let n: usize = lines.parse(Some(l), "node count")?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let mut it = l.split_whitespace();
                    let id: i64 = lines.parse(it.next(), "node id")?;
                    let x: f64 = lines.parse(it.next(), "x")?;
                    let y: f64 = lines.parse(it.next(), "y")?;
                    node_ids.insert(id, nodes.len());
                    nodes.push([x, y]);
                }
                expect_end(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                let l = lines.next_line()?;
                let n: usize = lines.parse(Some(l), "element count")?;
                for _ in 0..n {
                    let l = lines.next_line()?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    let ty: i64 = lines.parse(toks.get(1).copied(), "element type")?;
                    let ntags: usize = lines.parse(toks.get(2).copied(), "tag count")?;
                    let tag: i64 = if ntags > 0 { lines.parse(toks.get(3).copied(), "physical tag")? } else { 0 };
                    let conn = &toks[(3 + ntags).min(toks.len())..];
                    let ids = |k: usize| -> Result<Vec<i64>, MeshError> {
                        if conn.len() < k {
                            return Err(lines.err("too few element nodes"));
                        }
                        conn[..k].iter().map(|t| lines.parse(Some(t), "node id")).collect()
                    };
                    match ty {
                        1 => {
                            let v = ids(2)?;
                            lines_raw.push(([v[0], v[1]], tag));
                        }
                        2 => {
                            let v = ids(3)?;
                            tris_raw.push([v[0], v[1], v[2]]);
                        }
                        _ => {}
                    }
                }
                expect_end(&mut lines, "$EndElements")?;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // skip unknown sections
                let end = format!("$End{}", &other[1..]);
                loop {
                    if lines.next_line()? == end {
                        break;
                    }
                }
            }
            _ => return Err(lines.err(format!("unexpected line `{l}`"))),
        }
    }
    if !seen_format {
        return Err(MeshError::Parse { path: name.to_string(), line: 1, msg: "missing $MeshFormat".into() });
    }
    let map = |id: i64| -> Result<usize, MeshError> {
        node_ids.get(&id).copied().ok_or_else(|| MeshError::Parse {
            path: name.to_string(),
            line: 0,
            msg: format!("element references unknown node {id}"),
        })
    };
    let mut tris = Vec::with_capacity(tris_raw.len());
    for t in tris_raw {
        tris.push([map(t[0])?, map(t[1])?, map(t[2])?]);
    }
    let mut tags = Vec::with_capacity(lines_raw.len());
    for (e, tag) in lines_raw {
        let nm = physical.get(&tag).cloned().unwrap_or_else(|| tag.to_string());
        tags.push(([map(e[0])?, map(e[1])?], nm));
    }
    TriMesh::new(nodes, tris, &tags)
}

fn expect_end(lines: &mut Lines<'_>, end: &str) -> Result<(), MeshError> {
    let l = lines.next_line()?;
    if l != end {
        return Err(lines.err(format!("expected {end}, found `{l}`")));
    }
    Ok(())
}

/// Writes a mesh as MSH 2.2 ASCII with physical names for the boundary tags.
pub fn write_msh(mesh: &TriMesh) -> String {
    use std::fmt::Write;
    let tags = mesh.tags();
    let tag_id: HashMap<&str, usize> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), i + 1)).collect();
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    let _ = writeln!(s, "$PhysicalNames\n{}", tags.len() + 1);
    for (i, t) in tags.iter().enumerate() {
        let _ = writeln!(s, "1 {} \"{}\"", i + 1, t);
    }
    let _ = writeln!(s, "2 {} \"domain\"\n$EndPhysicalNames", tags.len() + 1);
    let _ = writeln!(s, "$Nodes\n{}", mesh.num_nodes());
    for (i, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{} {} {} 0", i + 1, p[0], p[1]);
    }
    s.push_str("$EndNodes\n");
    let nb = mesh.boundary_edges().len();
    let _ = writeln!(s, "$Elements\n{}", nb + mesh.num_triangles());
    let mut id = 1;
    for e in mesh.boundary_edges() {
        let _ = writeln!(s, "{} 1 2 {} 1 {} {}", id, tag_id[e.tag.as_str()], e.nodes[0] + 1, e.nodes[1] + 1);
        id += 1;
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} 2 2 {} 1 {} {} {}", id, tags.len() + 1, t[0] + 1, t[1] + 1, t[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}
