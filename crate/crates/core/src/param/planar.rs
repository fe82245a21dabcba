use std::cmp::Ordering;

use nalgebra::{DMatrix, Vector2};

use super::{tol_cmp, tol_cmp_slices, Dimensionality, ParamVector, Shape};
use crate::error::{Error, Result};
use crate::grasp::PlanarGrasp;
use crate::hull::convex_polygon_2d;

/// Interior angle at `at` between the rays to `p` and `q`.
pub(crate) fn corner_angle_2d(at: &Vector2<f64>, p: &Vector2<f64>, q: &Vector2<f64>) -> f64 {
    let (u, v) = (p - at, q - at);
    u.perp(&v).abs().atan2(u.dot(&v))
}

/// Signed angle from `e` to `n`.
pub(crate) fn signed_angle_2d(e: &Vector2<f64>, n: &Vector2<f64>) -> f64 {
    let a = e.perp(n).atan2(e.dot(n));
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

pub fn parameterize_planar(grasp: &PlanarGrasp) -> Result<ParamVector> {
    let n = grasp.n();
    if n < 3 {
        return Err(Error::InvalidGrasp(format!("planar parameterization needs n >= 3, got {n}")));
    }
    let pts = &grasp.points;
    let c = pts.iter().sum::<Vector2<f64>>() / n as f64;
    let m = DMatrix::from_fn(n, 2, |i, j| pts[i][j] - c[j]);
    let s = m.singular_values();
    let (hi, lo) = (s.max(), s.min());
    if !(lo >= super::spatial::FLATNESS_TOL * hi) || hi == 0.0 {
        return Err(Error::DegenerateGrasp("contacts are collinear".into()));
    }
    let diameter = pts
        .iter()
        .flat_map(|a| pts.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    let tagged: Vec<(usize, Vector2<f64>)> = pts.iter().copied().enumerate().collect();
    let poly = convex_polygon_2d(&tagged, 1e-9 * diameter);
    if poly.len() < n {
        return Err(Error::NonConvexUnsupported);
    }

    let edge = |k: usize| (pts[poly[(k + 1) % n]] - pts[poly[k]]).norm();
    let longest = (0..n).map(edge).fold(0.0, f64::max);
    let mut best: Option<Vec<f64>> = None;
    for start in (0..n).filter(|&k| tol_cmp(edge(k), longest).is_eq()) {
        let order: Vec<usize> = (0..n).map(|k| poly[(start + k) % n]).collect();
        let p = |k: usize| pts[order[k % n]];
        let mut values = Vec::with_capacity(3 * n - 3);
        for k in 0..n - 1 {
            values.push(corner_angle_2d(&p(k), &p(k + 1), &p(k + n - 1)));
        }
        for k in 0..n - 2 {
            values.push((p(k + 1) - p(k)).norm());
        }
        if let Some(normals) = &grasp.normals {
            for k in 0..n {
                values.push(signed_angle_2d(&(p(k + 1) - p(k)), &normals[order[k]]));
            }
        }
        if best.as_ref().is_none_or(|b| tol_cmp_slices(&values, b) == Ordering::Less) {
            best = Some(values);
        }
    }
    ParamVector::new(
        best.expect("polygon has edges"),
        Shape {
            n,
            with_normals: grasp.with_normals(),
            normalized: false,
            dimensionality: Dimensionality::Planar,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn p(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn unit_square() {
        let g = PlanarGrasp::new(vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)], None).unwrap();
        let q = parameterize_planar(&g).unwrap();
        assert_eq!(q.dim(), 5);
        for (a, b) in q.values.iter().zip([FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimensions_with_normals() {
        let n = |x: f64, y: f64| p(x, y).normalize();
        let g = PlanarGrasp::new(
            vec![p(0.0, 0.0), p(2.0, 0.0), p(2.5, 1.0), p(0.0, 1.5)],
            Some(vec![n(1.0, 1.0), n(-1.0, 0.2), n(-1.0, -1.0), n(0.3, -1.0)]),
        )
        .unwrap();
        assert_eq!(parameterize_planar(&g).unwrap().dim(), 9);
        let g3 = PlanarGrasp::new(
            vec![p(0.0, 0.0), p(2.0, 0.0), p(0.5, 1.0)],
            Some(vec![n(1.0, 1.0), n(-1.0, 0.2), n(0.0, -1.0)]),
        )
        .unwrap();
        let q = parameterize_planar(&g3).unwrap();
        assert_eq!(q.dim(), 6);
        q.check_ranges().unwrap();
    }

    #[test]
    fn rejects_collinear_and_concave() {
        let line = PlanarGrasp::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)], None).unwrap();
        assert!(matches!(parameterize_planar(&line), Err(Error::DegenerateGrasp(_))));
        let dart = PlanarGrasp::new(vec![p(0.0, 0.0), p(4.0, 0.0), p(2.0, 3.0), p(2.0, 1.0)], None).unwrap();
        assert!(matches!(parameterize_planar(&dart), Err(Error::NonConvexUnsupported)));
    }

    #[test]
    fn triangle_angles_and_longest_edge() {
        let g = PlanarGrasp::new(vec![p(0.0, 0.0), p(3.0, 0.0), p(0.0, 4.0)], None).unwrap();
        let q = parameterize_planar(&g).unwrap();
        assert!((q.values[2] - 5.0).abs() < 1e-12);
        let sum: f64 = q.values[..2].iter().sum();
        assert!((sum - FRAC_PI_2).abs() < 1e-12);
    }
}
