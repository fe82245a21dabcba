use std::cmp::Ordering;

use nalgebra::Vector3;

use super::{corner_angle, spread, tol_cmp, tol_cmp_slices, ParamVector, Shape, TIE_TOL};
use crate::error::{Error, Result};
use crate::grasp::Grasp;
use crate::hull::{convex_hull, Facet, Hull};

/// Smallest-to-largest singular value ratio below which contacts are
/// considered collinear (n = 3) or coplanar (n >= 4).
pub const FLATNESS_TOL: f64 = 1e-6;

/// Normals closer than this to the first facet's axis get azimuth 0.
pub const POLE_TOL: f64 = 1e-9;

/// One parameterized triangle of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    /// `(v_a, v_b, third)` with the third vertex left of `v_a -> v_b` seen
    /// from outside; γ1 is measured at `v_a` and γ2 at `v_b`.
    pub facet: [usize; 3],
    /// The first facet, which this triangle shares its reference edge with.
    pub parent: Option<[usize; 3]>,
    /// Dihedral angle against the parent.
    pub dihedral: Option<f64>,
}

/// The convex hull of a grasp together with its parameterization chain.
#[derive(Debug, Clone)]
pub struct GraspPolyhedron {
    pub points: Vec<Vector3<f64>>,
    pub facets: Vec<Facet>,
    pub chain: Vec<ChainLink>,
    /// Contact indices in the order the chain introduces them.
    pub vertex_order: Vec<usize>,
    pub total_area: f64,
    /// √total_area, the normalization length.
    pub scale: f64,
}

impl GraspPolyhedron {
    pub fn volume(&self) -> f64 {
        if self.facets.len() < 4 {
            return 0.0;
        }
        let o = self.points[self.facets[0].v[0]];
        self.facets
            .iter()
            .map(|f| {
                let (a, b, c) = (self.points[f.v[0]] - o, self.points[f.v[1]] - o, self.points[f.v[2]] - o);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }
}

/// Hull and chain for contact points alone.
pub fn build_polyhedron(points: &[Vector3<f64>]) -> Result<GraspPolyhedron> {
    let grasp = Grasp::points_only(points.to_vec())?;
    Ok(analyze(&grasp)?.1)
}

pub fn parameterize_spatial(grasp: &Grasp) -> Result<ParamVector> {
    Ok(analyze(grasp)?.0)
}

/// The vector along with the polyhedron and chain that produced it.
pub fn parameterize_with_polyhedron(grasp: &Grasp) -> Result<(ParamVector, GraspPolyhedron)> {
    analyze(grasp)
}

#[derive(Clone)]
struct Leaf {
    values: Vec<f64>,
    chain: Vec<ChainLink>,
    order: Vec<usize>,
    /// Outward normal of the first facet.
    up: Vector3<f64>,
}

fn analyze(grasp: &Grasp) -> Result<(ParamVector, GraspPolyhedron)> {
    let n = grasp.n();
    if n < 3 {
        return Err(Error::InvalidGrasp(format!("spatial parameterization needs n >= 3, got {n}")));
    }
    let pts = &grasp.points;
    let s = spread(pts);
    let thin = if n == 3 { s[1] } else { s[2] };
    if !(thin >= FLATNESS_TOL * s[0]) || s[0] == 0.0 {
        return Err(Error::DegenerateGrasp(if n == 3 {
            "contacts are collinear".into()
        } else {
            "contacts are coplanar".into()
        }));
    }

    let (leaves, facets) = if n == 3 {
        triangle_leaves(grasp)
    } else {
        let hull = convex_hull(pts)?;
        let leaves = hull_leaves(&hull, pts);
        (leaves, hull.facets)
    };

    let mut best: Option<(Vec<f64>, Leaf)> = None;
    for leaf in leaves {
        let full = full_vector(grasp, &leaf);
        let better = match &best {
            None => true,
            Some((b, _)) => tol_cmp_slices(&full, b) == Ordering::Less,
        };
        if better {
            best = Some((full, leaf));
        }
    }
    let (values, leaf) = best.expect("at least one chain");

    let facets = if n == 3 {
        let [a, b, c] = leaf.chain[0].facet;
        let cross = (pts[b] - pts[a]).cross(&(pts[c] - pts[a]));
        vec![Facet {
            v: [a, b, c],
            normal: cross.normalize(),
            area: 0.5 * cross.norm(),
        }]
    } else {
        facets
    };
    let total_area: f64 = facets.iter().map(|f| f.area).sum();
    let poly = GraspPolyhedron {
        points: pts.clone(),
        facets,
        chain: leaf.chain,
        vertex_order: leaf.order,
        total_area,
        scale: total_area.sqrt(),
    };
    let q = ParamVector::new(values, Shape::spatial(n, grasp.with_normals(), false))?;
    Ok((q, poly))
}

/// Geometry values followed by the normal encoding for one chain choice.
fn full_vector(grasp: &Grasp, leaf: &Leaf) -> Vec<f64> {
    let mut out = leaf.values.clone();
    if let Some(normals) = &grasp.normals {
        let [a, b, _] = leaf.chain[0].facet;
        let (u, v, w) = frame(&grasp.points[a], &grasp.points[b], &leaf.up);
        for &k in &leaf.order {
            let (az, el) = azimuth_elevation(&normals[k], &u, &v, &w);
            out.push(az);
            out.push(el);
        }
    }
    out
}

/// Orthonormal frame of the first facet: `u` along its reference edge,
/// `w` its outward normal, `v = w × u`.
pub(crate) fn frame(
    va: &Vector3<f64>,
    vb: &Vector3<f64>,
    up: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let u = (vb - va).normalize();
    // re-orthogonalize against rounding in the stored facet normal
    let w = (up - u * u.dot(up)).normalize();
    (u, w.cross(&u), w)
}

pub(crate) fn azimuth_elevation(
    n: &Vector3<f64>,
    u: &Vector3<f64>,
    v: &Vector3<f64>,
    w: &Vector3<f64>,
) -> (f64, f64) {
    let (x, y, z) = (n.dot(u), n.dot(v), n.dot(w));
    let r = x.hypot(y);
    // azimuth is undefined at the poles
    if r <= POLE_TOL {
        return (0.0, z.atan2(r));
    }
    let mut az = y.atan2(x);
    if az <= -std::f64::consts::PI {
        az = std::f64::consts::PI;
    }
    (az, z.atan2(r))
}

fn edge_len(pts: &[Vector3<f64>], a: usize, b: usize) -> f64 {
    (pts[a] - pts[b]).norm()
}

/// Rotations of a CCW triangle whose first edge is (one of) the longest.
fn longest_edge_labelings(pts: &[Vector3<f64>], tri: [usize; 3]) -> Vec<[usize; 3]> {
    let rots = [tri, [tri[1], tri[2], tri[0]], [tri[2], tri[0], tri[1]]];
    let lens: Vec<f64> = rots.iter().map(|r| edge_len(pts, r[0], r[1])).collect();
    let max = lens.iter().copied().fold(0.0, f64::max);
    rots.iter()
        .zip(&lens)
        .filter(|(_, &l)| tol_cmp(l, max).is_eq())
        .map(|(r, _)| *r)
        .collect()
}

fn first_link_values(pts: &[Vector3<f64>], [a, b, c]: [usize; 3]) -> [f64; 3] {
    [
        corner_angle(&pts[a], &pts[b], &pts[c]),
        corner_angle(&pts[b], &pts[a], &pts[c]),
        edge_len(pts, a, b),
    ]
}

fn triangle_leaves(grasp: &Grasp) -> (Vec<Leaf>, Vec<Facet>) {
    let pts = &grasp.points;
    let cross = (pts[1] - pts[0]).cross(&(pts[2] - pts[0]));
    let nrm = cross.normalize();
    let orientations = [(nrm, [0, 1, 2]), (-nrm, [0, 2, 1])];
    let leaves_for = |(up, tri): (Vector3<f64>, [usize; 3])| -> Vec<Leaf> {
        longest_edge_labelings(pts, tri)
            .into_iter()
            .map(|lab| Leaf {
                values: first_link_values(pts, lab).to_vec(),
                chain: vec![ChainLink {
                    facet: lab,
                    parent: None,
                    dihedral: None,
                }],
                order: lab.to_vec(),
                up,
            })
            .collect()
    };

    let Some(normals) = &grasp.normals else {
        let all = orientations.into_iter().flat_map(leaves_for).collect();
        return (all, Vec::new());
    };
    // Side choice: the mean contact normal must not point below the
    // triangle; when it lies in the plane, the first normal's azimuth
    // must fall in [0, π).
    let mean: Vector3<f64> = normals.iter().sum();
    let s = mean.dot(&nrm);
    let chosen: Vec<Leaf> = if s > TIE_TOL {
        leaves_for(orientations[0])
    } else if s < -TIE_TOL {
        leaves_for(orientations[1])
    } else {
        let all: Vec<Leaf> = orientations.into_iter().flat_map(leaves_for).collect();
        let upper: Vec<Leaf> = all
            .iter()
            .filter(|leaf| {
                let [a, b, _] = leaf.chain[0].facet;
                let (u, v, w) = frame(&pts[a], &pts[b], &leaf.up);
                let (az, _) = azimuth_elevation(&normals[leaf.order[0]], &u, &v, &w);
                // azimuths near 0 or π keep both sides for the final tie-break
                (-TIE_TOL..std::f64::consts::PI - TIE_TOL).contains(&az)
            })
            .cloned()
            .collect();
        if upper.is_empty() {
            all
        } else {
            upper
        }
    };
    (chosen, Vec::new())
}

/// Largest facet first: area, then perimeter, then sorted edge lengths.
fn facet_rank(pts: &[Vector3<f64>], f: &Facet) -> (f64, f64, [f64; 3]) {
    let mut e = [
        edge_len(pts, f.v[0], f.v[1]),
        edge_len(pts, f.v[1], f.v[2]),
        edge_len(pts, f.v[2], f.v[0]),
    ];
    e.sort_by(|a, b| b.total_cmp(a));
    (f.area, e.iter().sum(), e)
}

fn rank_cmp(a: &(f64, f64, [f64; 3]), b: &(f64, f64, [f64; 3])) -> Ordering {
    tol_cmp(a.0, b.0)
        .then_with(|| tol_cmp(a.1, b.1))
        .then_with(|| tol_cmp_slices(&a.2, &b.2))
}

fn hull_leaves(hull: &Hull, pts: &[Vector3<f64>]) -> Vec<Leaf> {
    let ranks: Vec<_> = hull.facets.iter().map(|f| facet_rank(pts, f)).collect();
    let best = ranks
        .iter()
        .copied()
        .max_by(rank_cmp)
        .expect("hull has facets");
    let mut leaves = Vec::new();
    for (fi, f) in hull.facets.iter().enumerate() {
        if rank_cmp(&ranks[fi], &best).is_ne() {
            continue;
        }
        for lab in longest_edge_labelings(pts, f.v) {
            leaves.push(fan_leaf(pts, lab, f.normal));
        }
    }
    leaves
}

/// Every remaining contact `t` spans the triangle `(v_b, v_a, t)` with the
/// reference edge of the first facet. Triangles are listed by decreasing
/// dihedral angle against the first facet, so the first one is the hull
/// facet across the reference edge.
fn fan_leaf(pts: &[Vector3<f64>], lab: [usize; 3], up: Vector3<f64>) -> Leaf {
    let [a, b, c] = lab;
    let mut rest: Vec<(usize, [f64; 3])> = (0..pts.len())
        .filter(|k| !lab.contains(k))
        .map(|t| {
            let g1 = corner_angle(&pts[b], &pts[a], &pts[t]);
            let g2 = corner_angle(&pts[a], &pts[b], &pts[t]);
            (t, [g1, g2, dihedral(pts, a, b, c, t)])
        })
        .collect();
    rest.sort_by(|x, y| {
        tol_cmp(y.1[2], x.1[2])
            .then_with(|| tol_cmp(x.1[0], y.1[0]))
            .then_with(|| tol_cmp(x.1[1], y.1[1]))
    });
    let mut values = first_link_values(pts, lab).to_vec();
    let mut chain = vec![ChainLink {
        facet: lab,
        parent: None,
        dihedral: None,
    }];
    let mut order = lab.to_vec();
    for (t, v) in rest {
        values.extend(v);
        chain.push(ChainLink {
            facet: [b, a, t],
            parent: Some(lab),
            dihedral: Some(v[2]),
        });
        order.push(t);
    }
    Leaf {
        values,
        chain,
        order,
        up,
    }
}

/// Interior dihedral angle along edge `(a, b)` between the half-planes
/// through `c` and `d`.
pub(crate) fn dihedral(pts: &[Vector3<f64>], a: usize, b: usize, c: usize, d: usize) -> f64 {
    let e = (pts[b] - pts[a]).normalize();
    let perp = |x: usize| {
        let r = pts[x] - pts[a];
        r - e * r.dot(&e)
    };
    let (pc, pd) = (perp(c), perp(d));
    pc.cross(&pd).norm().atan2(pc.dot(&pd))
}
