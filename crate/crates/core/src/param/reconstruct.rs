use nalgebra::{Vector2, Vector3};

use super::{max_component_deviation, parameterize, parameterize_planar, Dimensionality, ParamVector};
use crate::error::{Error, Result};
use crate::grasp::{Grasp, PlanarGrasp};

/// Re-parameterizing a reconstruction must reproduce the input this closely.
pub const ROUND_TRIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Reconstructed {
    Spatial(Grasp),
    Planar(PlanarGrasp),
}

pub fn reconstruct(q: &ParamVector) -> Result<Reconstructed> {
    match q.shape.dimensionality {
        Dimensionality::Spatial => reconstruct_spatial(q).map(Reconstructed::Spatial),
        Dimensionality::Planar => reconstruct_planar(q).map(Reconstructed::Planar),
    }
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleVector(msg.into())
}

fn check_triangle(g1: f64, g2: f64) -> Result<()> {
    if g1 + g2 >= std::f64::consts::PI {
        return Err(infeasible(format!("triangle angles {g1} + {g2} >= π")));
    }
    Ok(())
}

fn unit_from_angles(az: f64, el: f64) -> Vector3<f64> {
    Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

/// Rebuilds a grasp in the canonical frame: the first facet in the
/// xy-plane with outward normal +z, its reference edge along +x from the
/// origin.
pub fn reconstruct_spatial(q: &ParamVector) -> Result<Grasp> {
    if q.shape.dimensionality != Dimensionality::Spatial {
        return Err(Error::ShapeMismatch(format!("{} is not spatial", q.shape)));
    }
    if q.shape.normalized {
        return Err(Error::NotApplicable("reconstruction takes unnormalized vectors".into()));
    }
    q.check_ranges()?;
    let n = q.shape.n;
    let v = &q.values;
    if n == 2 {
        return Grasp::points_only(vec![Vector3::zeros(), Vector3::new(v[0], 0.0, 0.0)]);
    }
    let (g1, g2, d) = (v[0], v[1], v[2]);
    check_triangle(g1, g2)?;
    for j in 0..n - 3 {
        check_triangle(v[3 + 3 * j], v[4 + 3 * j])?;
    }
    let r = d * g2.sin() / (g1 + g2).sin();
    let base = vec![
        Vector3::zeros(),
        Vector3::new(d, 0.0, 0.0),
        Vector3::new(r * g1.cos(), r * g1.sin(), 0.0),
    ];
    let normals = q.shape.with_normals.then(|| {
        let off = 3 * n - 6;
        (0..n)
            .map(|k| unit_from_angles(v[off + 2 * k], v[off + 2 * k + 1]))
            .collect::<Vec<_>>()
    });

    // Remaining contacts hang off the reference edge, walked from v_b to
    // v_a, on the inner side of the first facet.
    let (pa, pb) = (base[0], base[1]);
    let e = (pa - pb) / d;
    let perp_parent = Vector3::new(g1.cos(), g1.sin(), 0.0);
    let perp_parent = (perp_parent - e * perp_parent.dot(&e)).normalize();
    let mut pts = base;
    for j in 0..n - 3 {
        let (a1, a2, theta) = (v[3 + 3 * j], v[4 + 3 * j], v[5 + 3 * j]);
        let perp = perp_parent * theta.cos() - Vector3::z() * theta.sin();
        let r = d * a2.sin() / (a1 + a2).sin();
        pts.push(pb + (e * a1.cos() + perp * a1.sin()) * r);
    }
    let g = Grasp::new(pts, normals)?;
    let back = parameterize(&g).map_err(|err| infeasible(format!("rebuilt contacts are invalid: {err}")))?;
    if max_component_deviation(&back, q)? >= ROUND_TRIP_TOL {
        return Err(infeasible("angles and lengths do not describe this polyhedron"));
    }
    Ok(g)
}

/// Rebuilds a convex planar polygon with `v0` at the origin and the first
/// edge along +x.
pub fn reconstruct_planar(q: &ParamVector) -> Result<PlanarGrasp> {
    if q.shape.dimensionality != Dimensionality::Planar {
        return Err(Error::ShapeMismatch(format!("{} is not planar", q.shape)));
    }
    if q.shape.normalized {
        return Err(Error::NotApplicable("reconstruction takes unnormalized vectors".into()));
    }
    q.check_ranges()?;
    let n = q.shape.n;
    let v = &q.values;
    let gamma = &v[..n - 1];
    let lens = &v[n - 1..2 * n - 3];
    if gamma.iter().any(|&g| g >= std::f64::consts::PI) {
        return Err(infeasible("interior angle of π"));
    }
    let dir = |h: f64| Vector2::new(h.cos(), h.sin());
    let mut pts = vec![Vector2::zeros()];
    let mut heading = 0.0;
    for (i, &len) in lens.iter().enumerate() {
        if i > 0 {
            heading += std::f64::consts::PI - gamma[i];
        }
        let last = pts[i];
        pts.push(last + dir(heading) * len);
    }
    heading += std::f64::consts::PI - gamma[n - 2];
    let (from, u, w) = (pts[n - 2], dir(heading), dir(gamma[0]));
    // from + s u = t w
    let det = u.perp(&w);
    if det.abs() < 1e-12 {
        return Err(infeasible("closing edges are parallel"));
    }
    let s = w.perp(&from) / det;
    let t = u.perp(&from) / det;
    if !(s > 0.0 && t > 0.0) {
        return Err(infeasible("polygon does not close convexly"));
    }
    pts.push(w * t);

    let normals = q.shape.with_normals.then(|| {
        (0..n)
            .map(|k| {
                let e = (pts[(k + 1) % n] - pts[k]).normalize();
                let th = v[2 * n - 3 + k];
                Vector2::new(e.x * th.cos() - e.y * th.sin(), e.x * th.sin() + e.y * th.cos())
            })
            .collect()
    });
    let g = PlanarGrasp::new(pts, normals)?;
    let back = parameterize_planar(&g)?;
    if max_component_deviation(&back, q)? >= ROUND_TRIP_TOL {
        return Err(infeasible("angles and lengths do not describe a convex polygon"));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::{parameterize_spatial, Shape};

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn tetrahedron_distances() {
        let s = 1.0 / (2.0 * 2f64.sqrt());
        let g = Grasp::points_only(vec![v(s, s, s), v(s, -s, -s), v(-s, s, -s), v(-s, -s, s)]).unwrap();
        let q = parameterize_spatial(&g).unwrap();
        let back = reconstruct_spatial(&q).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(((back.points[i] - back.points[j]).norm() - 1.0).abs() < 1e-9);
            }
        }
        assert_eq!(back.points[0], Vector3::zeros());
        assert!(back.points[3].z < 0.0);
    }

    #[test]
    fn angle_sum_is_infeasible() {
        let q = ParamVector::new(vec![2.0, 1.5, 1.0], Shape::spatial(3, false, false)).unwrap();
        assert!(matches!(reconstruct_spatial(&q), Err(Error::InfeasibleVector(_))));
    }

    #[test]
    fn five_points_with_normals_round_trip() {
        let pts = vec![
            v(1.0, 0.0, 0.1),
            v(-0.5, 0.9, 0.0),
            v(-0.4, -0.8, 0.2),
            v(0.1, 0.05, 1.2),
            v(-0.05, 0.1, -0.9),
        ];
        let normals: Vec<_> = pts.iter().map(|p: &Vector3<f64>| -p.normalize()).collect();
        let g = Grasp::new(pts, Some(normals)).unwrap();
        let q = parameterize_spatial(&g).unwrap();
        let back = reconstruct_spatial(&q).unwrap();
        let q2 = parameterize_spatial(&back).unwrap();
        assert!(max_component_deviation(&q, &q2).unwrap() < 1e-9);
    }

    #[test]
    fn planar_round_trip() {
        let p = |x: f64, y: f64| Vector2::new(x, y);
        let g = PlanarGrasp::new(
            vec![p(0.0, 0.0), p(2.0, 0.1), p(2.5, 1.0), p(0.3, 1.5), p(-0.4, 0.8)],
            Some(vec![p(1.0, 0.0), p(0.0, 1.0), p(-1.0, 0.0), p(0.0, -1.0), p(0.6, 0.8)]),
        )
        .unwrap();
        let q = parameterize_planar(&g).unwrap();
        let back = reconstruct_planar(&q).unwrap();
        assert!(max_component_deviation(&parameterize_planar(&back).unwrap(), &q).unwrap() < 1e-9);
    }
}
