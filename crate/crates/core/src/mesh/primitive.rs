use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{weld, TriangleMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Box,
    Sphere,
    Cylinder,
}

impl PrimitiveKind {
    /// Box: cells per edge. Sphere: icosphere subdivisions. Cylinder: segments.
    pub fn default_resolution(self) -> u32 {
        match self {
            PrimitiveKind::Box => 8,
            PrimitiveKind::Sphere => 3,
            PrimitiveKind::Cylinder => 64,
        }
    }

    fn min_resolution(self) -> u32 {
        match self {
            PrimitiveKind::Box => 1,
            PrimitiveKind::Sphere => 1,
            PrimitiveKind::Cylinder => 8,
        }
    }

    fn dim_count(self) -> usize {
        match self {
            PrimitiveKind::Box => 3,
            PrimitiveKind::Sphere => 1,
            PrimitiveKind::Cylinder => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Box => "box",
            PrimitiveKind::Sphere => "sphere",
            PrimitiveKind::Cylinder => "cylinder",
        }
    }
}

/// Box dims are full edge lengths `[sx, sy, sz]`; sphere `[radius]`;
/// cylinder `[radius, height]` with the axis along z. All are centered on
/// the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpec {
    pub kind: PrimitiveKind,
    pub dims: Vec<f64>,
    pub resolution: u32,
}

impl PrimitiveSpec {
    pub fn cuboid(sx: f64, sy: f64, sz: f64, cells: u32) -> Self {
        PrimitiveSpec {
            kind: PrimitiveKind::Box,
            dims: vec![sx, sy, sz],
            resolution: cells,
        }
    }

    pub fn sphere(radius: f64, subdivisions: u32) -> Self {
        PrimitiveSpec {
            kind: PrimitiveKind::Sphere,
            dims: vec![radius],
            resolution: subdivisions,
        }
    }

    pub fn cylinder(radius: f64, height: f64, segments: u32) -> Self {
        PrimitiveSpec {
            kind: PrimitiveKind::Cylinder,
            dims: vec![radius, height],
            resolution: segments,
        }
    }
}

pub fn generate_primitive(spec: &PrimitiveSpec) -> Result<TriangleMesh> {
    let kind = spec.kind;
    if spec.dims.len() != kind.dim_count() || !spec.dims.iter().all(|d| *d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidDims(format!(
            "{} needs {} positive dims, got {:?}",
            kind.name(),
            kind.dim_count(),
            spec.dims
        )));
    }
    if spec.resolution < kind.min_resolution() {
        return Err(Error::InvalidDims(format!(
            "{} resolution must be >= {}, got {}",
            kind.name(),
            kind.min_resolution(),
            spec.resolution
        )));
    }
    let (vertices, mut faces) = match kind {
        PrimitiveKind::Box => cuboid(&spec.dims, spec.resolution as usize),
        PrimitiveKind::Sphere => icosphere(spec.dims[0], spec.resolution),
        PrimitiveKind::Cylinder => cylinder(spec.dims[0], spec.dims[1], spec.resolution as usize),
    };
    let vertices = weld(&vertices, &mut faces);
    // All primitives are convex around the origin.
    for f in &mut faces {
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }
    let mesh = TriangleMesh::new(kind.name(), vertices, faces)?;
    debug_assert!(mesh.oriented);
    Ok(mesh)
}

fn cuboid(dims: &[f64], cells: usize) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let half = [dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0];
    let coord = |axis: usize, i: usize| -half[axis] + dims[axis] * i as f64 / cells as f64;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for side in [-1.0, 1.0] {
            let base = vertices.len();
            for i in 0..=cells {
                for j in 0..=cells {
                    let mut p = Vector3::zeros();
                    p[a] = side * half[a];
                    // Exact endpoints so shared edges weld bit-for-bit.
                    p[b] = if i == cells { half[b] } else { coord(b, i) };
                    p[c] = if j == cells { half[c] } else { coord(c, j) };
                    vertices.push(p);
                }
            }
            let idx = |i: usize, j: usize| base + i * (cells + 1) + j;
            for i in 0..cells {
                for j in 0..cells {
                    faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                    faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                }
            }
        }
    }
    (vertices, faces)
}

fn icosphere(radius: f64, subdivisions: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vs: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                vs.push(((vs[a] + vs[b]) / 2.0).normalize());
                vs.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    (vertices, faces)
}

/// Side wall and caps are split into rings so tiles stay roughly square,
/// which keeps face centroids spread evenly over the surface.
fn cylinder(radius: f64, height: f64, segments: usize) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let edge = TAU * radius / segments as f64;
    let wall_rings = ((height / edge).round() as usize).max(1);
    let cap_rings = ((radius / edge).round() as usize).max(1);
    let half = height / 2.0;
    let ring_point = |k: usize, r: f64, z: f64| {
        let ang = TAU * (k % segments) as f64 / segments as f64;
        Vector3::new(r * ang.cos(), r * ang.sin(), z)
    };

    let mut vertices = Vec::new();
    let mut faces = Vec::new();

    // wall: rows 0..=wall_rings from bottom to top
    let wall = |row: usize, k: usize| row * segments + k % segments;
    for row in 0..=wall_rings {
        let z = if row == wall_rings {
            half
        } else {
            -half + height * row as f64 / wall_rings as f64
        };
        for k in 0..segments {
            vertices.push(ring_point(k, radius, z));
        }
    }
    for row in 0..wall_rings {
        for k in 0..segments {
            faces.push([wall(row, k), wall(row, k + 1), wall(row + 1, k + 1)]);
            faces.push([wall(row, k), wall(row + 1, k + 1), wall(row + 1, k)]);
        }
    }

    for z in [-half, half] {
        let center = vertices.len();
        vertices.push(Vector3::new(0.0, 0.0, z));
        // ring j has radius r*j/cap_rings; the outer ring reuses wall vertices
        let mut ring_start = Vec::new();
        for j in 1..cap_rings {
            ring_start.push(vertices.len());
            let r = radius * j as f64 / cap_rings as f64;
            for k in 0..segments {
                vertices.push(ring_point(k, r, z));
            }
        }
        let outer_row = if z < 0.0 { 0 } else { wall_rings };
        let ring = |j: usize, k: usize| -> usize {
            if j == cap_rings {
                wall(outer_row, k)
            } else {
                ring_start[j - 1] + k % segments
            }
        };
        for k in 0..segments {
            faces.push([center, ring(1, k), ring(1, k + 1)]);
        }
        for j in 1..cap_rings {
            for k in 0..segments {
                faces.push([ring(j, k), ring(j + 1, k), ring(j + 1, k + 1)]);
                faces.push([ring(j, k), ring(j + 1, k + 1), ring(j, k + 1)]);
            }
        }
    }
    (vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_box_has_twelve_faces() {
        let m = generate_primitive(&PrimitiveSpec::cuboid(1.0, 1.0, 1.0, 1)).unwrap();
        assert_eq!(m.face_count(), 12);
        assert!(m.oriented);
        assert!((m.volume().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn subdivided_box_is_closed() {
        let m = generate_primitive(&PrimitiveSpec::cuboid(1.0, 0.7, 0.5, 8)).unwrap();
        assert_eq!(m.face_count(), 6 * 64 * 2);
        assert!(m.oriented);
        assert!((m.volume().unwrap() - 0.35).abs() < 1e-12);
        assert!((m.surface_area() - 2.0 * (0.7 + 0.5 + 0.35)).abs() < 1e-12);
    }

    #[test]
    fn sphere_volume_close_to_analytic() {
        let m = generate_primitive(&PrimitiveSpec::sphere(1.0, 3)).unwrap();
        assert_eq!(m.face_count(), 20 * 64);
        let v = m.volume().unwrap();
        assert!((v / (4.0 * PI / 3.0) - 1.0).abs() < 0.02, "volume {v}");
    }

    #[test]
    fn ellipsoid_volume() {
        let m = generate_primitive(&PrimitiveSpec::sphere(1.0, 3))
            .unwrap()
            .scaled(0.5, 1.0, 1.5)
            .unwrap();
        let v = m.volume().unwrap();
        assert!((v / (4.0 * PI / 3.0 * 0.75) - 1.0).abs() < 0.02);
    }

    #[test]
    fn cylinder_area_close_to_analytic() {
        let m = generate_primitive(&PrimitiveSpec::cylinder(1.0, 2.0, 64)).unwrap();
        assert!(m.oriented);
        let a = m.surface_area();
        assert!((a / (2.0 * PI * 2.0 + 2.0 * PI) - 1.0).abs() < 0.02, "area {a}");
        let v = m.volume().unwrap();
        assert!((v / (2.0 * PI) - 1.0).abs() < 0.02);
    }

    #[test]
    fn invalid_dims_and_resolution() {
        assert!(matches!(
            generate_primitive(&PrimitiveSpec::cuboid(1.0, 0.0, 1.0, 1)),
            Err(Error::InvalidDims(_))
        ));
        assert!(matches!(
            generate_primitive(&PrimitiveSpec::cylinder(1.0, 1.0, 4)),
            Err(Error::InvalidDims(_))
        ));
        let bad = PrimitiveSpec {
            kind: PrimitiveKind::Sphere,
            dims: vec![1.0, 2.0],
            resolution: 2,
        };
        assert!(matches!(generate_primitive(&bad), Err(Error::InvalidDims(_))));
    }
}
