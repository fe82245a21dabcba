use super::{ClassDistribution, Classifier};
use crate::error::{Error, Result};
use crate::param::{squared_distance, Component, Shape};
use crate::sampling::LabeledDataset;

pub const DEFAULT_K: usize = 5;

/// Guards the inverse-distance weight of an exact match.
const EPS: f64 = 1e-12;

/// Inverse-distance weighted vote among the k nearest training vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub shape: Shape,
    pub class_names: Vec<String>,
    pub k: usize,
    /// Row-major training vectors.
    pub data: Vec<f64>,
    pub labels: Vec<usize>,
    layout: Vec<Component>,
}

impl KnnModel {
    pub fn new(shape: Shape, class_names: Vec<String>, k: usize, data: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        let w = shape.dim();
        if data.len() != labels.len() * w {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} rows of width {w}",
                data.len(),
                labels.len()
            )));
        }
        if k == 0 || k > labels.len() {
            return Err(Error::InvalidK {
                k,
                available: labels.len(),
            });
        }
        if class_names.len() < 2 || labels.iter().any(|&l| l >= class_names.len()) {
            return Err(Error::InvalidModel("labels must index at least two classes".into()));
        }
        Ok(KnnModel {
            shape,
            class_names,
            k,
            data,
            labels,
            layout: shape.layout(),
        })
    }

    pub fn fit(ds: &LabeledDataset, k: usize) -> Result<Self> {
        ds.check()?;
        KnnModel::new(ds.shape(), ds.class_names.clone(), k, ds.rows.concat(), ds.labels.clone())
    }

    /// `(distance, index)` of the k nearest rows; equal distances keep
    /// training order.
    pub fn neighbors(&self, q: &[f64]) -> Vec<(f64, usize)> {
        let w = self.shape.dim();
        let mut d: Vec<(f64, usize)> = self
            .data
            .chunks_exact(w)
            .enumerate()
            .map(|(i, x)| (squared_distance(&self.layout, q, x).sqrt(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_by(cmp);
        d
    }
}

impl Classifier for KnnModel {
    fn classes(&self) -> usize {
        self.class_names.len()
    }

    fn shape(&self) -> Shape {
        self.shape
    }

    fn predict(&self, q: &[f64]) -> ClassDistribution {
        let mut w = vec![0.0; self.classes()];
        for (d, i) in self.neighbors(q) {
            w[self.labels[i]] += 1.0 / (d + EPS);
        }
        ClassDistribution::from_weights(&w)
    }
}
