//! Geometric grasp quality and its relation to classifier certainty.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{spearman, RankCorrelation};
use super::TAG_QUALITY;
use crate::classify::Classifier;
use crate::error::{Error, Result};
use crate::grasp::Grasp;
use crate::mesh::{ContactCandidateSet, TriangleMesh};
use crate::param::{build_polyhedron, parameterize_as};
use crate::rng;
use crate::sampling::sample_grasp;

/// Pairs required before a correlation is reported.
pub const MIN_PAIRS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspQuality {
    /// Grasp polyhedron volume over object volume.
    pub volume_ratio: f64,
    /// Circular mean of the pairwise angles between contact normals.
    pub mean_normal_angle: Option<f64>,
}

/// `atan2` of the mean sine and mean cosine.
pub fn circular_mean(angles: &[f64]) -> f64 {
    let n = angles.len() as f64;
    let s = angles.iter().map(|a| a.sin()).sum::<f64>() / n;
    let c = angles.iter().map(|a| a.cos()).sum::<f64>() / n;
    s.atan2(c)
}

pub fn mean_normal_angle(normals: &[nalgebra::Vector3<f64>]) -> f64 {
    let mut angles = Vec::new();
    for i in 0..normals.len() {
        for j in i + 1..normals.len() {
            angles.push(normals[i].dot(&normals[j]).clamp(-1.0, 1.0).acos());
        }
    }
    circular_mean(&angles)
}

pub fn grasp_quality(grasp: &Grasp, mesh: &TriangleMesh) -> Result<GraspQuality> {
    quality_with_volume(grasp, mesh.volume()?)
}

fn quality_with_volume(grasp: &Grasp, object_volume: f64) -> Result<GraspQuality> {
    let poly = build_polyhedron(&grasp.points)?;
    Ok(GraspQuality {
        volume_ratio: poly.volume() / object_volume.abs(),
        mean_normal_angle: grasp.normals.as_deref().map(mean_normal_angle),
    })
}

/// One prediction with the quality of the grasp that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualitySample {
    pub object: usize,
    pub volume_ratio: f64,
    pub mean_normal_angle: Option<f64>,
    /// Largest predicted class probability.
    pub certainty: f64,
    pub correct: bool,
}

/// Samples `per_object` grasps of every object and records the quality of
/// each next to the prediction `h` makes for it.
pub fn quality_samples<C: Classifier + ?Sized>(
    objects: &[ContactCandidateSet],
    meshes: &[TriangleMesh],
    h: &C,
    per_object: usize,
    seed: u64,
) -> Result<Vec<QualitySample>> {
    if objects.len() != meshes.len() || objects.len() != h.classes() {
        return Err(Error::ShapeMismatch(format!(
            "{} contact sets, {} meshes, {} classes",
            objects.len(),
            meshes.len(),
            h.classes()
        )));
    }
    let volumes = meshes.iter().map(|m| m.volume()).collect::<Result<Vec<_>>>()?;
    let shape = h.shape();
    let jobs: Vec<(usize, usize)> = (0..objects.len())
        .flat_map(|l| (0..per_object).map(move |i| (l, i)))
        .collect();
    jobs.par_iter()
        .map(|&(l, i)| {
            let mut r = rng::stream(seed, &[TAG_QUALITY, l as u64, i as u64]);
            let g = sample_grasp(&objects[l], shape.n, true, &mut r)?;
            let quality = quality_with_volume(&g, volumes[l])?;
            let g = if shape.with_normals { g } else { g.without_normals() };
            let q = parameterize_as(&g, shape.normalized)?;
            let p = h.predict_vector(&q)?;
            Ok(QualitySample {
                object: l,
                volume_ratio: quality.volume_ratio,
                mean_normal_angle: quality.mean_normal_angle,
                certainty: p.max(),
                correct: p.argmax() == l,
            })
        })
        .collect()
}

/// Spearman correlation between volume ratio and certainty.
pub fn quality_correlation(samples: &[QualitySample]) -> Result<RankCorrelation> {
    if samples.len() < MIN_PAIRS {
        return Err(Error::Config(format!(
            "need at least {MIN_PAIRS} quality/certainty pairs, got {}",
            samples.len()
        )));
    }
    let v: Vec<f64> = samples.iter().map(|s| s.volume_ratio).collect();
    let c: Vec<f64> = samples.iter().map(|s| s.certainty).collect();
    spearman(&v, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, PrimitiveSpec};
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    #[test]
    fn inscribed_tetrahedron_takes_a_third_of_the_cube() {
        let cube = generate_primitive(&PrimitiveSpec::cuboid(1.0, 1.0, 1.0, 2)).unwrap();
        let h: f64 = 0.5;
        let pts: Vec<Vector3<f64>> = vec![
            Vector3::new(h, h, h),
            Vector3::new(h, -h, -h),
            Vector3::new(-h, h, -h),
            Vector3::new(-h, -h, h),
        ];
        assert!(((pts[0] - pts[1]).norm() - 2f64.sqrt()).abs() < 1e-15);
        let q = grasp_quality(&Grasp::points_only(pts).unwrap(), &cube).unwrap();
        assert!((q.volume_ratio - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(q.mean_normal_angle, None);
    }

    #[test]
    fn normal_angles() {
        let z = Vector3::z();
        assert_eq!(mean_normal_angle(&[z, z, z]), 0.0);
        let a = 10f64.to_radians();
        assert!(circular_mean(&[2.0 * PI - a, a]).abs() < 1e-12);
        // pairwise angles of ±x and +y: π, π/2, π/2
        let m = mean_normal_angle(&[Vector3::x(), -Vector3::x(), Vector3::y()]);
        let expect = (2.0f64 / 3.0).atan2(-1.0 / 3.0);
        assert!((m - expect).abs() < 1e-12);
    }

    #[test]
    fn coplanar_grasp_is_degenerate() {
        let cube = generate_primitive(&PrimitiveSpec::cuboid(1.0, 1.0, 1.0, 2)).unwrap();
        let g = Grasp::points_only(vec![Vector3::zeros(), Vector3::x(), Vector3::y(), Vector3::new(1.0, 1.0, 0.0)])
            .unwrap();
        assert!(matches!(grasp_quality(&g, &cube), Err(Error::DegenerateGrasp(_))));
    }

    #[test]
    fn too_few_pairs() {
        let s = QualitySample {
            object: 0,
            volume_ratio: 0.1,
            mean_normal_angle: None,
            certainty: 0.5,
            correct: true,
        };
        assert!(quality_correlation(&vec![s; 10]).is_err());
        assert!(matches!(quality_correlation(&vec![s; 100]), Err(Error::DegenerateVariance(_))));
    }
}
