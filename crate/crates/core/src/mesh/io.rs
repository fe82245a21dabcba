use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use super::{weld, TriangleMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Stl,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => Some(MeshFormat::Stl),
            "off" => Some(MeshFormat::Off),
            _ => None,
        }
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn load_mesh(bytes: &[u8], format: MeshFormat, name: &str) -> Result<TriangleMesh> {
    match format {
        MeshFormat::Obj => parse_obj(text(bytes)?, name),
        MeshFormat::Off => parse_off(text(bytes)?, name),
        MeshFormat::Stl => parse_stl(bytes, name),
    }
}

/// Loads a mesh, picking the format from the file extension.
pub fn load_mesh_file(path: &Path) -> Result<TriangleMesh> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| Error::Config(format!("unknown mesh format: {}", path.display())))?;
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mesh")
        .to_string();
    load_mesh(&bytes, format, &name)
}

fn text(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| perr(0, format!("not UTF-8 text: {e}")))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| perr(line, "missing coordinate"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("bad number {tok:?}")))?;
    if !v.is_finite() {
        return Err(perr(line, "non-finite coordinate"));
    }
    Ok(v)
}

fn fan(poly: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn parse_obj(src: &str, name: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), ln)?;
                let y = parse_f64(toks.next(), ln)?;
                let z = parse_f64(toks.next(), ln)?;
                vertices.push(Vector3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for t in toks {
                    let head = t.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| perr(ln, format!("bad face index {t:?}")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(perr(ln, "face index 0 is invalid"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(perr(ln, format!("face index {idx} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(perr(ln, "face with fewer than 3 vertices"));
                }
                fan(&poly, &mut faces);
            }
            // normals, texture coordinates, groups and materials are ignored
            _ => {}
        }
    }
    TriangleMesh::new(name, vertices, faces)
}

fn parse_off(src: &str, name: &str) -> Result<TriangleMesh> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty OFF file"))?;
    let rest_of_header = header
        .strip_prefix("OFF")
        .ok_or_else(|| perr(ln, "missing OFF header"))?
        .trim();
    let (ln, counts) = if rest_of_header.is_empty() {
        lines.next().ok_or_else(|| perr(ln, "missing element counts"))?
    } else {
        (ln, rest_of_header)
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(ln, format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(perr(ln, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated vertex list"))?;
        let mut t = l.split_whitespace();
        vertices.push(Vector3::new(
            parse_f64(t.next(), ln)?,
            parse_f64(t.next(), ln)?,
            parse_f64(t.next(), ln)?,
        ));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated face list"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad index {t:?}"))))
            .collect::<Result<_>>()?;
        let k = *idx.first().ok_or_else(|| perr(ln, "empty face record"))?;
        if k < 3 || idx.len() < k + 1 {
            return Err(perr(ln, "malformed face record"));
        }
        let poly = &idx[1..=k];
        if poly.iter().any(|&i| i >= nv) {
            return Err(perr(ln, "face index out of range"));
        }
        fan(poly, &mut faces);
    }
    TriangleMesh::new(name, vertices, faces)
}

fn parse_stl(bytes: &[u8], name: &str) -> Result<TriangleMesh> {
    let looks_ascii = bytes.starts_with(b"solid")
        && std::str::from_utf8(bytes).map(|s| s.contains("facet")).unwrap_or(false);
    let mut raw = Vec::new();
    if looks_ascii {
        let src = text(bytes)?;
        for (i, line) in src.lines().enumerate() {
            let mut t = line.split_whitespace();
            if t.next() == Some("vertex") {
                raw.push(Vector3::new(
                    parse_f64(t.next(), i + 1)?,
                    parse_f64(t.next(), i + 1)?,
                    parse_f64(t.next(), i + 1)?,
                ));
            }
        }
        if raw.len() % 3 != 0 {
            return Err(perr(0, "vertex count is not a multiple of 3"));
        }
    } else {
        if bytes.len() < 84 {
            return Err(perr(0, "binary STL shorter than its header"));
        }
        let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if bytes.len() < 84 + count * 50 {
            return Err(perr(0, "binary STL truncated"));
        }
        for t in 0..count {
            let rec = &bytes[84 + t * 50..84 + (t + 1) * 50];
            // skip the stored facet normal; it is recomputed from the winding
            for v in 0..3 {
                let off = 12 + v * 12;
                let c = |k: usize| {
                    f32::from_le_bytes(rec[off + 4 * k..off + 4 * k + 4].try_into().unwrap()) as f64
                };
                let p = Vector3::new(c(0), c(1), c(2));
                if !p.iter().all(|x| x.is_finite()) {
                    return Err(perr(0, "non-finite coordinate"));
                }
                raw.push(p);
            }
        }
    }
    let mut faces: Vec<[usize; 3]> = (0..raw.len() / 3).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect();
    let vertices = weld(&raw, &mut faces);
    TriangleMesh::new(name, vertices, faces)
}

pub fn write_obj<W: Write>(mesh: &TriangleMesh, mut w: W) -> Result<()> {
    writeln!(w, "# {}", mesh.name)?;
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

pub fn write_off<W: Write>(mesh: &TriangleMesh, mut w: W) -> Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertices.len(), mesh.faces.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, PrimitiveSpec};

    #[test]
    fn smallest_off() {
        let src = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let m = load_mesh(src.as_bytes(), MeshFormat::Off, "t").unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (3, 1));
    }

    #[test]
    fn obj_zero_area_face_is_dropped() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n";
        let m = load_mesh(src.as_bytes(), MeshFormat::Obj, "t").unwrap();
        assert_eq!(m.face_count(), 1);
        assert_eq!(m.dropped_faces, 1);
    }

    #[test]
    fn obj_slash_tokens_quads_and_negative_indices() {
        let src = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 -1//1\n";
        let m = load_mesh(src.as_bytes(), MeshFormat::Obj, "q").unwrap();
        assert_eq!(m.face_count(), 2);
        assert!((m.surface_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            load_mesh(b"v 0 0\n", MeshFormat::Obj, "x"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_mesh(b"v 0 0 0\nf 1 2 3\n", MeshFormat::Obj, "x"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(load_mesh(b"OFF\n3 1\n0 0 0\n", MeshFormat::Off, "x"), Err(Error::Parse { .. })));
        assert!(matches!(load_mesh(b"xyz", MeshFormat::Stl, "x"), Err(Error::Parse { .. })));
        assert_eq!(load_mesh(b"v 0 0 0\n", MeshFormat::Obj, "x"), Err(Error::EmptyMesh));
    }

    fn to_binary_stl(m: &TriangleMesh) -> Vec<u8> {
        let mut out = vec![0u8; 80];
        out.extend_from_slice(&(m.faces.len() as u32).to_le_bytes());
        for f in &m.faces {
            out.extend_from_slice(&[0u8; 12]);
            for &i in f {
                for k in 0..3 {
                    out.extend_from_slice(&(m.vertices[i][k] as f32).to_le_bytes());
                }
            }
            out.extend_from_slice(&[0u8; 2]);
        }
        out
    }

    fn to_ascii_stl(m: &TriangleMesh) -> String {
        let mut s = String::from("solid s\n");
        for f in &m.faces {
            s.push_str("facet normal 0 0 0\nouter loop\n");
            for &i in f {
                let v = m.vertices[i];
                s.push_str(&format!("vertex {} {} {}\n", v.x, v.y, v.z));
            }
            s.push_str("endloop\nendfacet\n");
        }
        s.push_str("endsolid s\n");
        s
    }

    #[test]
    fn stl_binary_and_ascii_weld_into_closed_meshes() {
        let cube = generate_primitive(&PrimitiveSpec::cuboid(1.0, 2.0, 0.5, 2)).unwrap();
        for bytes in [to_binary_stl(&cube), to_ascii_stl(&cube).into_bytes()] {
            let m = load_mesh(&bytes, MeshFormat::Stl, "c").unwrap();
            assert_eq!(m.face_count(), cube.face_count());
            assert_eq!(m.vertex_count(), cube.vertex_count());
            assert!(m.oriented);
            assert!((m.volume().unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn obj_and_off_writers_round_trip() {
        let cyl = generate_primitive(&PrimitiveSpec::cylinder(0.5, 1.0, 16)).unwrap();
        let mut buf = Vec::new();
        write_obj(&cyl, &mut buf).unwrap();
        let back = load_mesh(&buf, MeshFormat::Obj, &cyl.name).unwrap();
        assert_eq!(back.faces, cyl.faces);
        let mut buf = Vec::new();
        write_off(&cyl, &mut buf).unwrap();
        let back = load_mesh(&buf, MeshFormat::Off, &cyl.name).unwrap();
        assert_eq!(back.vertices, cyl.vertices);
    }
}
