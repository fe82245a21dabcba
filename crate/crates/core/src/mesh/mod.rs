//! Triangle meshes and the contact-candidate sets sampled from them.
//!
//! Faces are wound counter-clockwise when seen from outside, so the right-hand
//! face normal points out of the object. Contact normals point the other way:
//! into the object, along the direction a fingertip pushes.

mod io;
mod primitive;

pub use io::{load_mesh, load_mesh_file, write_obj, write_off, MeshFormat};
pub use primitive::{generate_primitive, PrimitiveKind, PrimitiveSpec};

use std::collections::HashMap;
use std::io::Write;

use nalgebra::Vector3;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Faces with area at or below this are dropped at construction.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
    /// Closed, consistently wound and outward facing.
    pub oriented: bool,
    /// Number of faces removed as degenerate when the mesh was built.
    pub dropped_faces: usize,
}

impl TriangleMesh {
    /// Builds a mesh, dropping degenerate faces and resolving orientation.
    ///
    /// A closed mesh whose windings agree across every edge is marked
    /// `oriented`; if its signed volume is negative the whole mesh is flipped
    /// so normals face outward.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Vector3<f64>>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut kept = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for (fi, f) in faces.into_iter().enumerate() {
            if f.iter().any(|&i| i >= nv) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("face {fi} references a vertex out of range"),
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                dropped += 1;
                continue;
            }
            let area = tri_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
            if !(area > DEGENERATE_AREA) {
                dropped += 1;
                continue;
            }
            kept.push(f);
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut mesh = TriangleMesh {
            name: name.into(),
            vertices,
            faces: kept,
            oriented: false,
            dropped_faces: dropped,
        };
        if mesh.is_closed_and_consistent() {
            if mesh.signed_volume() < 0.0 {
                for f in &mut mesh.faces {
                    f.swap(1, 2);
                }
            }
            mesh.oriented = true;
        }
        Ok(mesh)
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn corners(&self, f: &[usize; 3]) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        (self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]])
    }

    /// Every directed edge appears once and its reverse appears once.
    fn is_closed_and_consistent(&self) -> bool {
        let mut directed: HashMap<(usize, usize), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &c)| c == 1 && directed.get(&(b, a)) == Some(&1))
    }

    fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let (a, b, c) = self.corners(f);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Enclosed volume as a sum of signed tetrahedra against the origin.
    pub fn volume(&self) -> Result<f64> {
        if !self.oriented {
            return Err(Error::NotOriented);
        }
        Ok(self.signed_volume())
    }

    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let (a, b, c) = self.corners(f);
                tri_area(&a, &b, &c)
            })
            .sum()
    }

    /// Area-weighted mean of face centroids.
    pub fn surface_centroid(&self) -> Vector3<f64> {
        let mut acc = Vector3::zeros();
        let mut total = 0.0;
        for f in &self.faces {
            let (a, b, c) = self.corners(f);
            let w = tri_area(&a, &b, &c);
            acc += (a + b + c) * (w / 3.0);
            total += w;
        }
        acc / total
    }

    /// Per-axis scaling. Negative or zero factors are rejected.
    pub fn scaled(&self, sx: f64, sy: f64, sz: f64) -> Result<TriangleMesh> {
        if !(sx > 0.0 && sy > 0.0 && sz > 0.0) {
            return Err(Error::InvalidDims(format!(
                "scale factors must be positive, got ({sx}, {sy}, {sz})"
            )));
        }
        let mut out = self.clone();
        for v in &mut out.vertices {
            v.x *= sx;
            v.y *= sy;
            v.z *= sz;
        }
        Ok(out)
    }

    /// Applies `x -> r x + t` to every vertex. `r` must be a rotation.
    pub fn transformed(&self, r: &nalgebra::Matrix3<f64>, t: &Vector3<f64>) -> TriangleMesh {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v = r * *v + t;
        }
        out
    }

    pub fn to_contacts(&self) -> Result<ContactCandidateSet> {
        mesh_to_contacts(self)
    }
}

pub fn scale_mesh(mesh: &TriangleMesh, sx: f64, sy: f64, sz: f64) -> Result<TriangleMesh> {
    mesh.scaled(sx, sy, sz)
}

pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64> {
    mesh.volume()
}

pub fn mesh_surface_area(mesh: &TriangleMesh) -> f64 {
    mesh.surface_area()
}

pub(crate) fn tri_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// A candidate fingertip contact: a surface point and the inward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactCandidateSet {
    pub source: String,
    pub entries: Vec<Contact>,
    /// Inward directions were inferred from the centroid heuristic rather
    /// than from a consistent winding.
    pub orientation_inferred: bool,
}

impl ContactCandidateSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV with header `px,py,pz,nx,ny,nz`, one row per entry in order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "px,py,pz,nx,ny,nz")?;
        for c in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                c.point.x, c.point.y, c.point.z, c.normal.x, c.normal.y, c.normal.z
            )?;
        }
        Ok(())
    }

    /// Uniformly rescales every contact point about the origin.
    pub fn scaled(&self, factor: f64) -> ContactCandidateSet {
        let mut out = self.clone();
        for c in &mut out.entries {
            c.point *= factor;
        }
        out
    }
}

/// One contact per face: the triangle centroid with the inward face normal.
///
/// Unoriented meshes fall back to flipping each normal against the vector
/// from the mesh centroid to the face centroid, which is exact for
/// star-shaped objects.
pub fn mesh_to_contacts(mesh: &TriangleMesh) -> Result<ContactCandidateSet> {
    let center = mesh.surface_centroid();
    let scale = mesh
        .vertices
        .iter()
        .map(|v| (v - center).norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut entries = Vec::with_capacity(mesh.faces.len());
    for (fi, f) in mesh.faces.iter().enumerate() {
        let (a, b, c) = mesh.corners(f);
        let centroid = (a + b + c) / 3.0;
        let mut outward = (b - a).cross(&(c - a)).normalize();
        if !mesh.oriented {
            let radial = centroid - center;
            let s = outward.dot(&radial);
            if s.abs() <= 1e-12 * scale {
                return Err(Error::OrientationUnknown(fi));
            }
            if s < 0.0 {
                outward = -outward;
            }
        }
        entries.push(Contact {
            point: centroid,
            normal: -outward,
        });
    }
    Ok(ContactCandidateSet {
        source: mesh.name.clone(),
        entries,
        orientation_inferred: !mesh.oriented,
    })
}

/// Adds i.i.d. zero-mean Gaussian noise to every contact location.
pub fn perturb_contacts(set: &ContactCandidateSet, sigma: f64, rng: &mut Rng) -> Result<ContactCandidateSet> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Config(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut out = set.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    for c in &mut out.entries {
        c.point += Vector3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
    }
    Ok(out)
}

/// Merges vertices with bit-identical coordinates.
pub(crate) fn weld(vertices: &[Vector3<f64>], faces: &mut [[usize; 3]]) -> Vec<Vector3<f64>> {
    let mut map: HashMap<[u64; 3], usize> = HashMap::new();
    let mut out = Vec::new();
    let mut remap = Vec::with_capacity(vertices.len());
    for v in vertices {
        // Normalize -0.0 so mirrored coordinates weld.
        let key = [
            (v.x + 0.0).to_bits(),
            (v.y + 0.0).to_bits(),
            (v.z + 0.0).to_bits(),
        ];
        let idx = *map.entry(key).or_insert_with(|| {
            out.push(*v);
            out.len() - 1
        });
        remap.push(idx);
    }
    for f in faces.iter_mut() {
        for i in f.iter_mut() {
            *i = remap[*i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn unit_triangle() -> TriangleMesh {
        TriangleMesh::new(
            "tri",
            vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    fn unit_cube() -> TriangleMesh {
        generate_primitive(&PrimitiveSpec::cuboid(1.0, 1.0, 1.0, 1)).unwrap()
    }

    #[test]
    fn single_triangle_area_and_no_volume() {
        let m = unit_triangle();
        assert!(!m.oriented);
        assert!((m.surface_area() - 0.5).abs() < 1e-15);
        assert_eq!(m.volume(), Err(Error::NotOriented));
    }

    #[test]
    fn single_triangle_contact_is_centroid_with_flipped_normal() {
        let m = unit_triangle();
        // Unoriented: the centroid heuristic cannot decide for a flat patch
        // whose centroid coincides with the mesh centroid.
        assert!(matches!(m.to_contacts(), Err(Error::OrientationUnknown(0))));

        let mut m = m;
        m.oriented = true;
        let c = m.to_contacts().unwrap();
        assert_eq!(c.len(), 1);
        let e = c.entries[0];
        assert!((e.point - Vector3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((e.normal - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn cube_contacts_point_inward() {
        let cube = unit_cube();
        let c = cube.to_contacts().unwrap();
        assert_eq!(c.len(), 12);
        for (e, f) in c.entries.iter().zip(&cube.faces) {
            assert!(e.normal.dot(&e.point) < 0.0);
            assert!((e.normal.norm() - 1.0).abs() < 1e-9);
            let (a, b, cc) = cube.corners(f);
            let outward = (b - a).cross(&(cc - a)).normalize();
            assert!((e.normal.dot(&outward) + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cube_volume_and_area() {
        let cube = unit_cube();
        assert!((cube.volume().unwrap() - 1.0).abs() < 1e-12);
        assert!((cube.surface_area() - 6.0).abs() < 1e-12);
        let stretched = cube.scaled(2.0, 1.0, 1.0).unwrap();
        assert!((stretched.volume().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(cube.scaled(1.0, 1.0, 1.0).unwrap(), cube);
    }

    #[test]
    fn inverted_winding_is_flipped_outward() {
        let mut cube = unit_cube();
        for f in &mut cube.faces {
            f.swap(0, 1);
        }
        let rebuilt = TriangleMesh::new("c", cube.vertices.clone(), cube.faces.clone()).unwrap();
        assert!(rebuilt.oriented);
        assert!((rebuilt.volume().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unoriented_mesh_uses_centroid_rule() {
        let mut cube = unit_cube();
        // Flip one face so windings disagree.
        cube.faces[3].swap(0, 1);
        let m = TriangleMesh::new("c", cube.vertices.clone(), cube.faces.clone()).unwrap();
        assert!(!m.oriented);
        let c = m.to_contacts().unwrap();
        assert!(c.orientation_inferred);
        assert!(c.entries.iter().all(|e| e.normal.dot(&e.point) < 0.0));
    }

    #[test]
    fn empty_after_cleaning_is_an_error() {
        let r = TriangleMesh::new(
            "flat",
            vec![Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0), Vector3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        );
        assert_eq!(r, Err(Error::EmptyMesh));
    }

    #[test]
    fn perturbation_zero_sigma_and_determinism() {
        let c = unit_cube().to_contacts().unwrap();
        assert_eq!(perturb_contacts(&c, 0.0, &mut seeded(1)).unwrap(), c);
        let a = perturb_contacts(&c, 0.1, &mut seeded(5)).unwrap();
        let b = perturb_contacts(&c, 0.1, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.entries.iter().zip(&c.entries).all(|(x, y)| x.normal == y.normal));
        assert!(perturb_contacts(&c, -1.0, &mut seeded(5)).is_err());
    }

    #[test]
    fn perturbation_std_matches_sigma() {
        let entries = vec![
            Contact {
                point: Vector3::zeros(),
                normal: Vector3::z()
            };
            10_000
        ];
        let set = ContactCandidateSet {
            source: "pts".into(),
            entries,
            orientation_inferred: false,
        };
        let out = perturb_contacts(&set, 0.01, &mut seeded(3)).unwrap();
        for axis in 0..3 {
            let xs: Vec<f64> = out.entries.iter().map(|e| e.point[axis]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            let sd = var.sqrt();
            assert!((sd - 0.01).abs() < 0.0005, "axis {axis}: sd {sd}");
        }
    }

    #[test]
    fn csv_export_header_and_rows() {
        let c = unit_cube().to_contacts().unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("px,py,pz,nx,ny,nz"));
        assert_eq!(lines.count(), 12);
    }
}
