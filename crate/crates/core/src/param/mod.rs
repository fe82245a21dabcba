//! Grasp parameterization: a frame-invariant, injective vector per grasp.
//!
//! Spatial grasps with `n >= 3` are described through the triangulated convex
//! hull of their contacts. The largest facet contributes its two base angles
//! and the length of its longest edge. Every other contact spans a triangle
//! with that edge, described by its two base angles and its dihedral angle
//! against the largest facet; the first of these is the hull facet across
//! the edge. Normals are encoded as azimuth and elevation in a
//! frame built from the first facet. The layout is
//!
//! ```text
//! [γ1, γ2, d, (γ1, γ2, ϑ) × (n - 3), (azimuth, elevation) × n]
//! ```
//!
//! with `w = 3n - 6` entries without normals and `5n - 6` with them. Planar
//! grasps use `[γ × (n - 1), d × (n - 2), θ × n]`, and two-finger grasps are
//! the single contact distance.

mod planar;
mod reconstruct;
mod spatial;

pub use planar::parameterize_planar;
pub use reconstruct::{reconstruct, reconstruct_planar, reconstruct_spatial, Reconstructed};
pub use spatial::{build_polyhedron, parameterize_spatial, parameterize_with_polyhedron, ChainLink, GraspPolyhedron};

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::Grasp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimensionality {
    Planar,
    Spatial,
}

impl fmt::Display for Dimensionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimensionality::Planar => "planar",
            Dimensionality::Spatial => "spatial",
        })
    }
}

impl std::str::FromStr for Dimensionality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planar" => Ok(Dimensionality::Planar),
            "spatial" => Ok(Dimensionality::Spatial),
            _ => Err(Error::Config(format!("unknown dimensionality {s:?}"))),
        }
    }
}

/// What a vector component measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Interior triangle angle, radians in (0, π).
    Angle,
    /// Dihedral angle against the first facet, [0, π].
    Dihedral,
    /// Length in mesh units, or in units of √area once normalized.
    Length,
    /// Normal azimuth in (−π, π]; compared on the circle.
    Azimuth,
    /// Normal elevation in [−π/2, π/2].
    Elevation,
    /// Planar normal angle against the following edge, (−π, π]; circular.
    NormalAngle,
}

impl Component {
    pub fn is_circular(self) -> bool {
        matches!(self, Component::Azimuth | Component::NormalAngle)
    }
}

/// Metadata shared by every vector produced under one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n: usize,
    pub with_normals: bool,
    pub normalized: bool,
    pub dimensionality: Dimensionality,
}

impl Shape {
    pub fn spatial(n: usize, with_normals: bool, normalized: bool) -> Shape {
        Shape {
            n,
            with_normals,
            normalized,
            dimensionality: Dimensionality::Spatial,
        }
    }

    pub fn dim(&self) -> usize {
        dimension(self.n, self.with_normals, self.dimensionality)
    }

    pub fn layout(&self) -> Vec<Component> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.dim());
        if n == 2 {
            out.push(Component::Length);
            return out;
        }
        match self.dimensionality {
            Dimensionality::Spatial => {
                out.extend([Component::Angle, Component::Angle, Component::Length]);
                for _ in 0..n - 3 {
                    out.extend([Component::Angle, Component::Angle, Component::Dihedral]);
                }
                if self.with_normals {
                    for _ in 0..n {
                        out.extend([Component::Azimuth, Component::Elevation]);
                    }
                }
            }
            Dimensionality::Planar => {
                out.extend(std::iter::repeat_n(Component::Angle, n - 1));
                out.extend(std::iter::repeat_n(Component::Length, n - 2));
                if self.with_normals {
                    out.extend(std::iter::repeat_n(Component::NormalAngle, n));
                }
            }
        }
        out
    }

    /// Same shape, ignoring the normalization flag.
    pub fn same_grasp_kind(&self, other: &Shape) -> bool {
        self.n == other.n && self.with_normals == other.with_normals && self.dimensionality == other.dimensionality
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} normals={} normalized={}",
            self.dimensionality, self.n, self.with_normals, self.normalized
        )
    }
}

/// Length of the parameter vector.
pub fn dimension(n: usize, with_normals: bool, dimensionality: Dimensionality) -> usize {
    if n == 2 {
        return 1;
    }
    match (dimensionality, with_normals) {
        (Dimensionality::Spatial, true) => 5 * n - 6,
        (Dimensionality::Spatial, false) => 3 * n - 6,
        (Dimensionality::Planar, true) => 3 * n - 3,
        (Dimensionality::Planar, false) => 2 * n - 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub shape: Shape,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, shape: Shape) -> Result<Self> {
        if values.len() != shape.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{shape} expects {} values, got {}",
                shape.dim(),
                values.len()
            )));
        }
        Ok(ParamVector { values, shape })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Checks every component against its declared range.
    pub fn check_ranges(&self) -> Result<()> {
        for (i, (kind, &v)) in self.shape.layout().iter().zip(&self.values).enumerate() {
            let ok = match kind {
                Component::Angle => v > 0.0 && v < PI,
                Component::Dihedral => (0.0..=PI).contains(&v),
                Component::Length => v > 0.0 && v.is_finite(),
                Component::Azimuth | Component::NormalAngle => v > -PI && v <= PI,
                Component::Elevation => (-PI / 2.0..=PI / 2.0).contains(&v),
            };
            if !ok {
                return Err(Error::InfeasibleVector(format!("component {i} ({kind:?}) = {v} out of range")));
            }
        }
        Ok(())
    }

    /// CSV row: `n,with_normals,normalized,dimensionality,q1,...,qw`.
    pub fn to_csv_row(&self) -> String {
        let mut s = format!(
            "{},{},{},{}",
            self.shape.n, self.shape.with_normals, self.shape.normalized, self.shape.dimensionality
        );
        for v in &self.values {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let mut it = row.trim().split(',');
        let bad = |what: &str| Error::Parse {
            line: 0,
            msg: format!("bad {what} in parameter row"),
        };
        let n: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("n"))?;
        let with_normals: bool = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("with_normals"))?;
        let normalized: bool = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("normalized"))?;
        let dimensionality: Dimensionality = it
            .next()
            .ok_or_else(|| bad("dimensionality"))?
            .parse()?;
        let values = it
            .map(|t| t.parse::<f64>().map_err(|_| bad("value")))
            .collect::<Result<Vec<_>>>()?;
        ParamVector::new(
            values,
            Shape {
                n,
                with_normals,
                normalized,
                dimensionality,
            },
        )
    }
}

/// Signed difference `a - b`, wrapped onto (−π, π] for circular components.
#[inline]
pub fn component_diff(kind: Component, a: f64, b: f64) -> f64 {
    let d = a - b;
    if kind.is_circular() {
        wrap_angle(d)
    } else {
        d
    }
}

/// Maps an angle onto (−π, π].
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x % std::f64::consts::TAU;
    if y <= -PI {
        y += std::f64::consts::TAU;
    } else if y > PI {
        y -= std::f64::consts::TAU;
    }
    y
}

/// Euclidean distance with wrapped differences on circular components.
pub fn vector_distance(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.shape, b.shape)));
    }
    let layout = a.shape.layout();
    Ok(squared_distance(&layout, &a.values, &b.values).sqrt())
}

#[inline]
pub(crate) fn squared_distance(layout: &[Component], a: &[f64], b: &[f64]) -> f64 {
    layout
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&k, (&x, &y))| component_diff(k, x, y).powi(2))
        .sum()
}

/// Largest per-component deviation, circular where the layout says so.
pub fn max_component_deviation(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    if !a.shape.same_grasp_kind(&b.shape) || a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.shape, b.shape)));
    }
    Ok(a.shape
        .layout()
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(&k, (&x, &y))| component_diff(k, x, y).abs())
        .fold(0.0, f64::max))
}

/// Divides the length entries by `scale` (the square root of the grasp
/// polyhedron's total facet area).
pub fn normalize_scale(q: &ParamVector, scale: f64) -> Result<ParamVector> {
    if q.shape.normalized {
        return Err(Error::NotApplicable("vector is already normalized".into()));
    }
    if q.shape.n == 2 {
        return Err(Error::NotApplicable("two-finger distance would always normalize to 1".into()));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NotApplicable(format!("scale must be positive, got {scale}")));
    }
    let mut out = q.clone();
    for (v, kind) in out.values.iter_mut().zip(q.shape.layout()) {
        if kind == Component::Length {
            *v /= scale;
        }
    }
    out.shape.normalized = true;
    Ok(out)
}

/// Parameterizes any spatial grasp; `n = 2` yields the contact distance.
pub fn parameterize(grasp: &Grasp) -> Result<ParamVector> {
    if grasp.n() == 2 {
        parameterize_two_finger(grasp)
    } else {
        parameterize_spatial(grasp)
    }
}

/// Parameterizes and, when requested, scale-normalizes in one step.
pub fn parameterize_as(grasp: &Grasp, normalize: bool) -> Result<ParamVector> {
    if !normalize {
        return parameterize(grasp);
    }
    let (q, poly) = parameterize_with_polyhedron(grasp)?;
    normalize_scale(&q, poly.scale)
}

pub fn parameterize_two_finger(grasp: &Grasp) -> Result<ParamVector> {
    if grasp.n() != 2 || grasp.with_normals() {
        return Err(Error::InvalidGrasp("two-finger parameterization takes exactly 2 points without normals".into()));
    }
    let d = (grasp.points[0] - grasp.points[1]).norm();
    if !(d >= 1e-12) {
        return Err(Error::DegenerateGrasp("coincident contacts".into()));
    }
    ParamVector::new(vec![d], Shape::spatial(2, false, false))
}

/// Relative tolerance used when comparing areas and lengths for ties.
pub(crate) const TIE_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn tol_cmp(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

pub(crate) fn tol_cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| tol_cmp(x, y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Singular values of the centered point matrix, largest first.
pub(crate) fn spread(points: &[Vector3<f64>]) -> Vec<f64> {
    let n = points.len();
    let c = points.iter().sum::<Vector3<f64>>() / n as f64;
    let m = DMatrix::from_fn(n, 3, |i, j| points[i][j] - c[j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Interior angle at `at` in the triangle `(at, p, q)`.
#[inline]
pub(crate) fn corner_angle(at: &Vector3<f64>, p: &Vector3<f64>, q: &Vector3<f64>) -> f64 {
    let (u, v) = (p - at, q - at);
    u.cross(&v).norm().atan2(u.dot(&v))
}
