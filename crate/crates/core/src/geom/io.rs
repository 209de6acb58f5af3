//! Wavefront OBJ meshes and JSON link files.
//!
//! S³ meshes use four-component vertex lines `v x y z w` and carry a
//! `# ambient: S3` header comment. Links are stored as
//! `{"gamma1": [[x,y,z(,w)], ...], "gamma2": [...]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Ambient, Point, PolyLink, TriMesh};
use crate::error::{Error, Result};

pub const S3_HEADER: &str = "# ambient: S3";
pub const R3_HEADER: &str = "# ambient: R3";

pub fn mesh_to_obj(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices.len() * 64 + mesh.faces.len() * 24);
    out.push_str(match mesh.ambient {
        Ambient::S3 => S3_HEADER,
        Ambient::R3 => R3_HEADER,
    });
    out.push('\n');
    for v in &mesh.vertices {
        match mesh.ambient {
            Ambient::S3 => writeln!(out, "v {:.17e} {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z, v.w),
            Ambient::R3 => writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z),
        }
        .expect("write to string");
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).expect("write to string");
    }
    out
}

/// Parses an OBJ mesh. The ambient comes from the header comment when
/// present, otherwise from the vertex arity (four components mean S³).
/// Polygonal faces are fan-triangulated; texture/normal indices are ignored.
pub fn mesh_from_obj(text: &str) -> Result<TriMesh> {
    let mut ambient: Option<Ambient> = None;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut arity4 = false;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        let err = |msg: String| Error::Parse { line: ln + 1, msg };
        if let Some(c) = line.strip_prefix('#') {
            if let Some(a) = c.trim().strip_prefix("ambient:") {
                ambient = Some(a.trim().parse().map_err(|_| err(format!("bad ambient '{}'", a.trim())))?);
            }
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> =
                    it.map(|t| t.parse::<f64>().map_err(|e| err(format!("{e}: '{t}'")))).collect::<Result<_>>()?;
                match c.len() {
                    3 => vertices.push(Point::new(c[0], c[1], c[2], 0.0)),
                    4 => {
                        arity4 = true;
                        vertices.push(Point::new(c[0], c[1], c[2], c[3]));
                    }
                    n => return Err(err(format!("vertex with {n} components"))),
                }
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or(t);
                        let i: i64 = head.parse().map_err(|e| err(format!("{e}: '{t}'")))?;
                        let n = vertices.len() as i64;
                        let k = if i < 0 { n + i } else { i - 1 };
                        if k < 0 {
                            return Err(err(format!("bad index {i}")));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err("face with fewer than 3 vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    let ambient = ambient.unwrap_or(if arity4 { Ambient::S3 } else { Ambient::R3 });
    TriMesh::new(vertices, faces, ambient)
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_obj(mesh))?;
    Ok(())
}

pub fn read_obj(path: &Path) -> Result<TriMesh> {
    mesh_from_obj(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkFile {
    gamma1: Vec<Vec<f64>>,
    gamma2: Vec<Vec<f64>>,
}

pub fn link_to_json(link: &PolyLink) -> String {
    let conv = |c: &[Point]| -> Vec<Vec<f64>> { c.iter().map(|p| p.as_slice()[..link.dim].to_vec()).collect() };
    serde_json::to_string_pretty(&LinkFile { gamma1: conv(&link.gamma1), gamma2: conv(&link.gamma2) })
        .expect("serializable link")
}

pub fn link_from_json(text: &str) -> Result<PolyLink> {
    let f: LinkFile = serde_json::from_str(text)?;
    let dim = f.gamma1.first().map_or(0, |p| p.len());
    let conv = |c: &[Vec<f64>]| -> Result<Vec<Point>> {
        c.iter()
            .map(|p| match p.len() {
                n if n != dim => Err(Error::Input(format!("mixed point dimensions {n} and {dim}"))),
                3 => Ok(Point::new(p[0], p[1], p[2], 0.0)),
                4 => Ok(Point::new(p[0], p[1], p[2], p[3])),
                n => Err(Error::Input(format!("points must have 3 or 4 coordinates, got {n}"))),
            })
            .collect()
    };
    PolyLink::new(conv(&f.gamma1)?, conv(&f.gamma2)?, dim)
}

pub fn read_link(path: &Path) -> Result<PolyLink> {
    link_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_link(link: &PolyLink, path: &Path) -> Result<()> {
    std::fs::write(path, link_to_json(link))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{clifford_torus, hopf_link, tube_torus};

    #[test]
    fn s3_obj_roundtrip_is_exact() {
        let m = clifford_torus(12);
        let text = mesh_to_obj(&m);
        assert!(text.starts_with(S3_HEADER));
        let back = mesh_from_obj(&text).unwrap();
        assert_eq!(back.ambient, Ambient::S3);
        assert_eq!(back.faces, m.faces);
        for (a, b) in back.vertices.iter().zip(&m.vertices) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn r3_obj_uses_three_components() {
        let m = tube_torus(2.0, 1.0, 8);
        let text = mesh_to_obj(&m);
        let vline = text.lines().find(|l| l.starts_with("v ")).unwrap();
        assert_eq!(vline.split_whitespace().count(), 4);
        assert_eq!(mesh_from_obj(&text).unwrap().ambient, Ambient::R3);
    }

    #[test]
    fn quads_are_fan_triangulated() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert_eq!(mesh_from_obj(text).unwrap().faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn malformed_vertex_reports_line() {
        let err = mesh_from_obj("v 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn link_json_roundtrip() {
        let l = hopf_link(16);
        let back = link_from_json(&link_to_json(&l)).unwrap();
        assert_eq!(back.dim, 4);
        assert_eq!(back.gamma1.len(), 16);
        assert!((back.gamma2[3] - l.gamma2[3]).norm() < 1e-15);
    }
}
