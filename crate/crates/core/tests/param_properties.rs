use graspid_core::grasp::Grasp;
use graspid_core::param::{
    max_component_deviation, normalize_scale, parameterize, parameterize_with_polyhedron, reconstruct_spatial,
};
use graspid_core::rng;
use nalgebra::{Rotation3, Unit, UnitQuaternion, Vector3, Vector4};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn unit(r: &mut rng::Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| StandardNormal.sample(r));
        let n: f64 = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Points on a random ellipsoid are always in convex position.
fn random_grasp(seed: u64, n: usize, normals: bool) -> Grasp {
    let mut r = rng::seeded(seed);
    let axes = Vector3::from_fn(|_, _| r.random_range(0.3..2.0));
    loop {
        let pts: Vec<_> = (0..n).map(|_| unit(&mut r).component_mul(&axes)).collect();
        let ns = normals.then(|| (0..n).map(|_| unit(&mut r)).collect());
        let g = Grasp::new(pts, ns).unwrap();
        if parameterize(&g).is_ok() {
            return g;
        }
    }
}

fn random_rotation(r: &mut rng::Rng) -> Rotation3<f64> {
    let q = Vector4::from_fn(|_, _| StandardNormal.sample(r));
    UnitQuaternion::from_quaternion(nalgebra::Quaternion::from(q)).to_rotation_matrix()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rigid_motion_leaves_vector_unchanged(seed in any::<u64>(), n in 3usize..=6, normals in any::<bool>()) {
        let g = random_grasp(seed, n, normals);
        let mut r = rng::seeded(seed ^ 0x5a5a);
        let rot = random_rotation(&mut r);
        let t = Vector3::from_fn(|_, _| r.random_range(-10.0..10.0));
        let q = parameterize(&g).unwrap();
        let q2 = parameterize(&g.transformed(rot.matrix(), &t)).unwrap();
        prop_assert!(max_component_deviation(&q, &q2).unwrap() < 1e-8);
    }

    #[test]
    fn scaling_is_removed_by_normalization(seed in any::<u64>(), n in 3usize..=6, normals in any::<bool>(), xi in 0.1f64..5.0) {
        let g = random_grasp(seed, n, normals);
        let mut r = rng::seeded(seed ^ 0xa5a5);
        let rot = random_rotation(&mut r);
        let moved = g.scaled(xi).transformed(rot.matrix(), &Vector3::new(1.0, -2.0, 0.5));
        let (q, p) = parameterize_with_polyhedron(&g).unwrap();
        let (q2, p2) = parameterize_with_polyhedron(&moved).unwrap();
        let a = normalize_scale(&q, p.scale).unwrap();
        let b = normalize_scale(&q2, p2.scale).unwrap();
        prop_assert!(max_component_deviation(&a, &b).unwrap() < 1e-8);
    }

    #[test]
    fn reconstruction_round_trips(seed in any::<u64>(), n in 3usize..=7, normals in any::<bool>()) {
        let g = random_grasp(seed, n, normals);
        let (q, poly) = parameterize_with_polyhedron(&g).unwrap();
        let back = reconstruct_spatial(&q).unwrap();
        let q2 = parameterize(&back).unwrap();
        prop_assert!(max_component_deviation(&q, &q2).unwrap() < 1e-6);
        // the rebuilt contacts come out in chain order
        let ordered = g.subset(&poly.vertex_order);
        for (a, b) in pairwise(&ordered.points).iter().zip(pairwise(&back.points)) {
            prop_assert!((a - b).abs() <= 1e-6 * a);
        }
        if let (Some(ns), Some(bs)) = (&ordered.normals, &back.normals) {
            // normals agree up to the rotation taking one frame to the other
            for i in 0..n {
                for j in i + 1..n {
                    prop_assert!((ns[i].dot(&ns[j]) - bs[i].dot(&bs[j])).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn angles_stay_in_range(seed in any::<u64>(), n in 3usize..=8, normals in any::<bool>()) {
        let q = parameterize(&random_grasp(seed, n, normals)).unwrap();
        prop_assert!(q.check_ranges().is_ok());
        prop_assert!(q.values.iter().all(|v| v.is_finite()));
    }
}

fn pairwise(p: &[Vector3<f64>]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            out.push((p[i] - p[j]).norm());
        }
    }
    out
}

#[test]
fn contact_order_does_not_matter() {
    for n in 3..=5 {
        for normals in [false, true] {
            let g = random_grasp(n as u64 * 31 + normals as u64, n, normals);
            let base = parameterize(&g).unwrap();
            for p in permutations(n) {
                let q = parameterize(&g.subset(&p)).unwrap();
                assert!(max_component_deviation(&q, &base).unwrap() < 1e-9, "n={n} perm={p:?}");
            }
        }
    }
}

#[test]
fn symmetric_solids_are_order_and_frame_invariant() {
    let s = 1.0 / (2.0 * 2f64.sqrt());
    let tet = vec![
        Vector3::new(s, s, s),
        Vector3::new(s, -s, -s),
        Vector3::new(-s, s, -s),
        Vector3::new(-s, -s, s),
    ];
    let oct = vec![
        Vector3::x(),
        -Vector3::x(),
        Vector3::y(),
        -Vector3::y(),
        Vector3::z(),
        -Vector3::z(),
    ];
    let mut r = rng::seeded(7);
    for pts in [tet, oct] {
        let n = pts.len();
        let g = Grasp::points_only(pts).unwrap();
        let base = parameterize(&g).unwrap();
        for p in permutations(n).into_iter().step_by(7) {
            let rot = random_rotation(&mut r);
            let axis = Unit::new_normalize(unit(&mut r));
            let extra = Rotation3::from_axis_angle(&axis, 0.3);
            let moved = g.subset(&p).transformed(&(rot * extra).into_inner(), &Vector3::new(0.1, 0.2, 0.3));
            let q = parameterize(&moved).unwrap();
            assert!(max_component_deviation(&q, &base).unwrap() < 1e-8);
        }
    }
}
