//! Convex hulls of small point sets.
//!
//! Grasps have a handful of contacts, so the hull is found by testing every
//! point triple as a supporting plane. That is exact about which points lie
//! on a face, which matters for contacts sampled from flat object faces:
//! coplanar hull faces are re-triangulated deterministically instead of being
//! left to the insertion order of an incremental algorithm.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Relative tolerance for point-on-plane and collinearity tests.
const PLANE_TOL: f64 = 1e-9;

/// A hull triangle, wound counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub v: [usize; 3],
    pub normal: Vector3<f64>,
    pub area: f64,
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub facets: Vec<Facet>,
    /// Directed edge `(a, b)` to the facet that contains it in CCW order.
    edge_owner: HashMap<(usize, usize), usize>,
}

impl Hull {
    /// The facet on the other side of the directed edge `(a, b)` of `facet`.
    pub fn across(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_owner.get(&(b, a)).copied()
    }

    pub fn total_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    pub fn volume(&self, points: &[Vector3<f64>]) -> f64 {
        let origin = points[self.facets[0].v[0]];
        self.facets
            .iter()
            .map(|f| {
                let (a, b, c) = (points[f.v[0]] - origin, points[f.v[1]] - origin, points[f.v[2]] - origin);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }
}

fn diameter(points: &[Vector3<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

/// Triangulated convex hull of at least four non-coplanar points.
///
/// Fails with `DegenerateGrasp` when the points are coplanar or when any of
/// them is not a strict hull vertex (inside the hull, or on a hull face or
/// edge).
pub fn convex_hull(points: &[Vector3<f64>]) -> Result<Hull> {
    let n = points.len();
    if n < 4 {
        return Err(Error::DegenerateGrasp(format!("hull needs 4 points, got {n}")));
    }
    let diam = diameter(points);
    if !(diam > 0.0) {
        return Err(Error::DegenerateGrasp("coincident points".into()));
    }
    let tol = PLANE_TOL * diam;

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut faces: Vec<(Vec<usize>, Vector3<f64>)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let cross = (points[j] - points[i]).cross(&(points[k] - points[i]));
                if cross.norm() <= tol * diam {
                    continue;
                }
                let nrm = cross.normalize();
                let d: Vec<f64> = points.iter().map(|p| (p - points[i]).dot(&nrm)).collect();
                let above = d.iter().any(|&x| x > tol);
                let below = d.iter().any(|&x| x < -tol);
                match (above, below) {
                    (true, true) => continue,
                    (false, false) => return Err(Error::DegenerateGrasp("points are coplanar".into())),
                    _ => {}
                }
                let outward = if above { -nrm } else { nrm };
                let on: Vec<usize> = (0..n).filter(|&l| d[l].abs() <= tol).collect();
                if seen.insert(on.clone()) {
                    faces.push((on, outward));
                }
            }
        }
    }

    let mut facets = Vec::new();
    let mut used = BTreeSet::new();
    for (on, outward) in &faces {
        let polygon = face_polygon(points, on, outward, tol)?;
        for tri in triangulate_convex(points, &polygon) {
            let (a, b, c) = (points[tri[0]], points[tri[1]], points[tri[2]]);
            let cross = (b - a).cross(&(c - a));
            used.extend(tri);
            facets.push(Facet {
                v: tri,
                normal: cross.normalize(),
                area: 0.5 * cross.norm(),
            });
        }
    }
    if used.len() < n {
        return Err(Error::DegenerateGrasp(format!(
            "only {} of {n} points are hull vertices",
            used.len()
        )));
    }

    let mut edge_owner = HashMap::new();
    for (fi, f) in facets.iter().enumerate() {
        for k in 0..3 {
            if edge_owner.insert((f.v[k], f.v[(k + 1) % 3]), fi).is_some() {
                return Err(Error::DegenerateGrasp("hull is not a closed surface".into()));
            }
        }
    }
    if edge_owner.keys().any(|&(a, b)| !edge_owner.contains_key(&(b, a))) {
        return Err(Error::DegenerateGrasp("hull is not a closed surface".into()));
    }
    Ok(Hull { facets, edge_owner })
}

/// Vertices of a hull face, counter-clockwise seen from outside. Points on
/// the plane that are not strict corners are left out.
fn face_polygon(
    points: &[Vector3<f64>],
    on: &[usize],
    outward: &Vector3<f64>,
    tol: f64,
) -> Result<Vec<usize>> {
    if on.len() == 3 {
        let (a, b, c) = (points[on[0]], points[on[1]], points[on[2]]);
        return Ok(if (b - a).cross(&(c - a)).dot(outward) > 0.0 {
            vec![on[0], on[1], on[2]]
        } else {
            vec![on[0], on[2], on[1]]
        });
    }
    let seed = if outward.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = outward.cross(&seed).normalize();
    let e2 = outward.cross(&e1);
    let origin = points[on[0]];
    let flat: Vec<(usize, Vector2<f64>)> = on
        .iter()
        .map(|&i| {
            let r = points[i] - origin;
            (i, Vector2::new(r.dot(&e1), r.dot(&e2)))
        })
        .collect();
    Ok(convex_polygon_2d(&flat, tol))
}

/// Andrew's monotone chain; returns strict corners in CCW order.
pub(crate) fn convex_polygon_2d(pts: &[(usize, Vector2<f64>)], tol: f64) -> Vec<usize> {
    let mut sorted: Vec<&(usize, Vector2<f64>)> = pts.iter().collect();
    sorted.sort_by(|a, b| {
        a.1.x
            .total_cmp(&b.1.x)
            .then(a.1.y.total_cmp(&b.1.y))
            .then(a.0.cmp(&b.0))
    });
    // Turn test scaled by the segment length: keeps only left turns whose
    // apex sits further than `tol` from the chord.
    let left = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        let cross = (a - o).perp(&(b - o));
        cross > tol * (b - o).norm()
    };
    let mut chain: Vec<&(usize, Vector2<f64>)> = Vec::new();
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &&(usize, Vector2<f64>)>> = if pass == 0 {
            Box::new(sorted.iter())
        } else {
            Box::new(sorted.iter().rev())
        };
        for p in iter {
            while chain.len() >= start + 2
                && !left(&chain[chain.len() - 2].1, &chain[chain.len() - 1].1, &p.1)
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop();
    }
    chain.iter().map(|p| p.0).collect()
}

/// Greedy minimum-weight triangulation of a convex polygon: diagonals are
/// accepted shortest first when they cross none already taken.
fn triangulate_convex(points: &[Vector3<f64>], poly: &[usize]) -> Vec<[usize; 3]> {
    let k = poly.len();
    if k == 3 {
        return vec![[poly[0], poly[1], poly[2]]];
    }
    let mut diagonals: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..k {
        for b in a + 2..k {
            if a == 0 && b == k - 1 {
                continue;
            }
            diagonals.push(((points[poly[a]] - points[poly[b]]).norm(), a, b));
        }
    }
    diagonals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let crosses = |(a, b): (usize, usize), (c, d): (usize, usize)| {
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    };
    let mut taken: Vec<(usize, usize)> = Vec::new();
    for &(_, a, b) in &diagonals {
        if taken.len() == k - 3 {
            break;
        }
        if taken.iter().all(|&t| !crosses(t, (a, b))) {
            taken.push((a, b));
        }
    }
    let connected = |a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        b == a + 1 || (a == 0 && b == k - 1) || taken.contains(&(a, b))
    };
    let mut tris = Vec::with_capacity(k - 2);
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                if connected(a, b) && connected(b, c) && connected(a, c) {
                    // a < b < c along a CCW polygon keeps the CCW winding
                    tris.push([poly[a], poly[b], poly[c]]);
                }
            }
        }
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn check_closed(h: &Hull, points: &[Vector3<f64>]) {
        let n = points.len();
        assert_eq!(h.facets.len(), 2 * n - 4);
        let centroid = points.iter().sum::<Vector3<f64>>() / n as f64;
        for f in &h.facets {
            let a = points[f.v[0]];
            assert!(f.normal.dot(&(a - centroid)) > 0.0, "normal must face outward");
            for k in 0..3 {
                assert!(h.across(f.v[k], f.v[(k + 1) % 3]).is_some());
            }
        }
    }

    #[test]
    fn tetrahedron() {
        let pts = vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0)];
        let h = convex_hull(&pts).unwrap();
        check_closed(&h, &pts);
        assert!((h.volume(&pts) - 1.0 / 6.0).abs() < 1e-15);
        assert!((h.total_area() - (1.5 + 3f64.sqrt() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn cube_corners_have_coplanar_faces() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(v(x, y, z));
                }
            }
        }
        let h = convex_hull(&pts).unwrap();
        check_closed(&h, &pts);
        assert_eq!(h.facets.len(), 12);
        assert!((h.volume(&pts) - 1.0).abs() < 1e-12);
        assert!((h.total_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn pentagon_face_is_triangulated() {
        let mut pts: Vec<_> = (0..5)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 5.0;
                v(a.cos(), a.sin(), 0.0)
            })
            .collect();
        pts.push(v(0.1, 0.2, 1.0));
        let h = convex_hull(&pts).unwrap();
        check_closed(&h, &pts);
    }

    #[test]
    fn interior_and_edge_points_are_rejected() {
        let base = vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0)];
        let mut inside = base.clone();
        inside.push(v(0.1, 0.1, 0.1));
        assert!(matches!(convex_hull(&inside), Err(Error::DegenerateGrasp(_))));
        let mut on_edge = base.clone();
        on_edge.push(v(0.5, 0.0, 0.0));
        assert!(matches!(convex_hull(&on_edge), Err(Error::DegenerateGrasp(_))));
        let mut on_face = base;
        on_face.push(v(0.2, 0.2, 0.0));
        assert!(matches!(convex_hull(&on_face), Err(Error::DegenerateGrasp(_))));
    }

    #[test]
    fn coplanar_points_are_rejected() {
        let pts = vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(1.0, 1.0, 0.0)];
        assert!(matches!(convex_hull(&pts), Err(Error::DegenerateGrasp(_))));
    }
}
