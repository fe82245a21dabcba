use std::f64::consts::{PI, TAU};

use super::{ClassDistribution, Classifier};
use crate::error::{Error, Result};
use crate::param::{ParamVector, Shape};
use crate::sampling::LabeledDataset;

pub const BANDWIDTH_FLOOR: f64 = 1e-3;

/// log of the Gaussian kernel `(2πσ²)^(−w/2) exp(−sq / 2σ²)` at squared
/// distance `sq`.
#[inline]
pub fn log_kernel(sq: f64, w: usize, sigma: f64) -> f64 {
    -0.5 * w as f64 * (TAU * sigma * sigma).ln() - sq / (2.0 * sigma * sigma)
}

/// Scott-style rule for one sample: median per-dimension standard
/// deviation times `M^(−1/(w+4))`, floored.
pub fn scott_bandwidth(rows: &[&[f64]]) -> f64 {
    let m = rows.len();
    if m < 2 {
        return BANDWIDTH_FLOOR;
    }
    let w = rows[0].len();
    let mut stds: Vec<f64> = (0..w)
        .map(|k| {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / m as f64;
            let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            var.sqrt()
        })
        .collect();
    stds.sort_by(f64::total_cmp);
    let median = if w % 2 == 1 {
        stds[w / 2]
    } else {
        0.5 * (stds[w / 2 - 1] + stds[w / 2])
    };
    (median * (m as f64).powf(-1.0 / (w as f64 + 4.0))).max(BANDWIDTH_FLOOR)
}

/// One bandwidth per model: the mean of the per-class rule values.
pub fn select_bandwidth(per_class: &[Vec<&[f64]>]) -> f64 {
    if per_class.is_empty() {
        return BANDWIDTH_FLOOR;
    }
    per_class.iter().map(|rows| scott_bandwidth(rows)).sum::<f64>() / per_class.len() as f64
}

/// Per-class Gaussian kernel density estimates over the training vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    pub shape: Shape,
    pub class_names: Vec<String>,
    pub sigma: f64,
    /// Row-major training vectors of each class.
    pub data: Vec<Vec<f64>>,
    circular: Vec<bool>,
}

impl KdeModel {
    pub fn new(shape: Shape, class_names: Vec<String>, sigma: f64, data: Vec<Vec<f64>>) -> Result<Self> {
        let w = shape.dim();
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidModel(format!("bandwidth must be positive, got {sigma}")));
        }
        if data.len() != class_names.len() || data.len() < 2 {
            return Err(Error::InvalidModel("need data for at least two named classes".into()));
        }
        for (c, d) in data.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::EmptyClass(c));
            }
            if d.len() % w != 0 {
                return Err(Error::ShapeMismatch(format!("class {c} data is not a multiple of w = {w}")));
            }
        }
        let circular = shape.layout().iter().map(|k| k.is_circular()).collect();
        Ok(KdeModel {
            shape,
            class_names,
            sigma,
            data,
            circular,
        })
    }

    /// Fits on every row of `ds`; `sigma = None` selects the bandwidth.
    pub fn fit(ds: &LabeledDataset, sigma: Option<f64>) -> Result<Self> {
        ds.check()?;
        let per_class: Vec<Vec<&[f64]>> = (0..ds.classes()).map(|c| ds.class_rows(c).collect()).collect();
        if let Some(c) = per_class.iter().position(|rows| rows.is_empty()) {
            return Err(Error::EmptyClass(c));
        }
        let sigma = sigma.unwrap_or_else(|| select_bandwidth(&per_class));
        let data = per_class.iter().map(|rows| rows.concat()).collect();
        KdeModel::new(ds.shape(), ds.class_names.clone(), sigma, data)
    }

    pub fn class_count(&self, t: usize) -> usize {
        self.data[t].len() / self.shape.dim()
    }

    #[inline]
    fn squared_distance(&self, q: &[f64], x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..q.len() {
            let mut d = q[k] - x[k];
            if self.circular[k] && d.abs() > PI {
                d -= TAU * (d / TAU).round();
            }
            s += d * d;
        }
        s
    }

    /// log P(q | class t), summed in log space.
    pub fn class_log_likelihood(&self, q: &[f64], t: usize) -> f64 {
        let w = self.shape.dim();
        let sq: Vec<f64> = self.data[t].chunks_exact(w).map(|x| self.squared_distance(q, x)).collect();
        let min = sq.iter().copied().fold(f64::INFINITY, f64::min);
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        let s: f64 = sq.iter().map(|&d| (-(d - min) * inv).exp()).sum();
        log_kernel(min, w, self.sigma) + s.ln() - (sq.len() as f64).ln()
    }

    pub fn log_likelihoods(&self, q: &[f64]) -> Vec<f64> {
        (0..self.data.len()).map(|t| self.class_log_likelihood(q, t)).collect()
    }
}

/// `(1/M_t) Σ_j K_σ(q − q_j)` over the training vectors of class `t`.
pub fn kde_likelihood(model: &KdeModel, q: &ParamVector, t: usize) -> Result<f64> {
    model.check_shape(&q.shape)?;
    if t >= model.data.len() {
        return Err(Error::ShapeMismatch(format!("class {t} out of range")));
    }
    Ok(model.class_log_likelihood(&q.values, t).exp())
}

impl Classifier for KdeModel {
    fn classes(&self) -> usize {
        self.data.len()
    }

    fn shape(&self) -> Shape {
        self.shape
    }

    /// Likelihoods normalized across classes. When every likelihood
    /// underflows to zero the uniform distribution is returned, flagged.
    fn predict(&self, q: &[f64]) -> ClassDistribution {
        let ll = self.log_likelihoods(q);
        let max = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max.exp() > 0.0) {
            let mut u = ClassDistribution::uniform(ll.len());
            u.fallback = true;
            return u;
        }
        ClassDistribution::from_log_weights(&ll)
    }

    fn log_evidence(&self, q: &[f64]) -> Vec<f64> {
        self.log_likelihoods(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::Dimensionality;

    fn one_d() -> Shape {
        // the two-finger shape has a single length entry
        Shape {
            n: 2,
            with_normals: false,
            normalized: false,
            dimensionality: Dimensionality::Spatial,
        }
    }

    #[test]
    fn kernel_at_zero() {
        let m = KdeModel::new(one_d(), vec!["a".into(), "b".into()], 1.0, vec![vec![0.3], vec![5.0]]).unwrap();
        let q = ParamVector::new(vec![0.3], one_d()).unwrap();
        let v = kde_likelihood(&m, &q, 0).unwrap();
        assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        let far = ParamVector::new(vec![1e6], one_d()).unwrap();
        assert_eq!(kde_likelihood(&m, &far, 0).unwrap(), 0.0);
    }

    #[test]
    fn matches_direct_sum() {
        let shape = Shape::spatial(3, false, false);
        let pts = vec![0.1, 0.2, 1.0, 0.4, 0.1, 1.2, 0.3, 0.3, 0.9];
        let m = KdeModel::new(shape, vec!["a".into(), "b".into()], 0.37, vec![pts.clone(), vec![1.0, 1.0, 1.0]]).unwrap();
        let q = [0.2, 0.25, 1.05];
        let direct: f64 = pts
            .chunks(3)
            .map(|x| {
                let sq: f64 = x.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                (2.0 * PI * 0.37 * 0.37).powf(-1.5) * (-sq / (2.0 * 0.37 * 0.37)).exp()
            })
            .sum::<f64>()
            / 3.0;
        let got = m.class_log_likelihood(&q, 0).exp();
        assert!((got - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn symmetric_and_underflow_predictions() {
        let m = KdeModel::new(one_d(), vec!["a".into(), "b".into()], 0.5, vec![vec![-1.0], vec![1.0]]).unwrap();
        let p = m.predict(&[0.0]);
        assert!((p.probs[0] - 0.5).abs() < 1e-15 && !p.fallback);
        assert!(m.predict(&[-1.0]).probs[0] > 0.99);
        let u = m.predict(&[1e9]);
        assert!(u.fallback);
        assert_eq!(u.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn bandwidth_rule() {
        let single: Vec<&[f64]> = vec![&[1.0, 2.0]];
        assert_eq!(select_bandwidth(&[single]), BANDWIDTH_FLOOR);
    }
}
