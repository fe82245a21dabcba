use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Normals must be unit length to within this tolerance.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A spatial grasp: n contact points and, optionally, the inward contact
/// normal at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct Grasp {
    pub points: Vec<Vector3<f64>>,
    pub normals: Option<Vec<Vector3<f64>>>,
}

impl Grasp {
    pub fn new(points: Vec<Vector3<f64>>, normals: Option<Vec<Vector3<f64>>>) -> Result<Self> {
        validate(points.len(), normals.as_ref().map(|n| (n.len(), n.iter().map(|v| v.norm()))))?;
        if points.iter().flat_map(|p| p.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrasp("non-finite contact point".into()));
        }
        Ok(Grasp { points, normals })
    }

    pub fn points_only(points: Vec<Vector3<f64>>) -> Result<Self> {
        Grasp::new(points, None)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn with_normals(&self) -> bool {
        self.normals.is_some()
    }

    /// The same grasp seen from another frame: `p -> r p + t`, `n -> r n`.
    pub fn transformed(&self, r: &Matrix3<f64>, t: &Vector3<f64>) -> Grasp {
        Grasp {
            points: self.points.iter().map(|p| r * p + t).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| r * n).collect()),
        }
    }

    /// Uniform scaling of the contact locations; normals are unchanged.
    pub fn scaled(&self, xi: f64) -> Grasp {
        Grasp {
            points: self.points.iter().map(|p| p * xi).collect(),
            normals: self.normals.clone(),
        }
    }

    /// Sub-grasp made of the listed contacts, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Grasp {
        Grasp {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| idx.iter().map(|&i| ns[i]).collect()),
        }
    }

    /// Drops the normals, keeping only contact locations.
    pub fn without_normals(&self) -> Grasp {
        Grasp {
            points: self.points.clone(),
            normals: None,
        }
    }
}

/// A planar grasp in the xy-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrasp {
    pub points: Vec<Vector2<f64>>,
    pub normals: Option<Vec<Vector2<f64>>>,
}

impl PlanarGrasp {
    pub fn new(points: Vec<Vector2<f64>>, normals: Option<Vec<Vector2<f64>>>) -> Result<Self> {
        validate(points.len(), normals.as_ref().map(|n| (n.len(), n.iter().map(|v| v.norm()))))?;
        Ok(PlanarGrasp { points, normals })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn with_normals(&self) -> bool {
        self.normals.is_some()
    }
}

fn validate(n: usize, normals: Option<(usize, impl Iterator<Item = f64>)>) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidGrasp(format!("need at least 2 contacts, got {n}")));
    }
    if let Some((count, mut norms)) = normals {
        if n < 3 {
            return Err(Error::InvalidGrasp("normals are not defined for 2-finger grasps".into()));
        }
        if count != n {
            return Err(Error::InvalidGrasp(format!("{n} points but {count} normals")));
        }
        if let Some(bad) = norms.find(|len| !((len - 1.0).abs() <= UNIT_TOLERANCE)) {
            return Err(Error::InvalidGrasp(format!("normal has length {bad}")));
        }
    }
    Ok(())
}
