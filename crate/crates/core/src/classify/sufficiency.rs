use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::error::{Error, Result};
use crate::sampling::LabeledDataset;

/// Row-stochastic confusion matrix with the sufficiency analysis: a class
/// is satisfied when its own label is strictly the most frequent
/// prediction for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    /// `confusion[i][j]` = fraction of class-i samples labeled j.
    pub confusion: Vec<Vec<f64>>,
    pub satisfied: Vec<bool>,
    pub sufficient: bool,
    pub m_p: usize,
    /// `m_p / m × 100`.
    pub eta: f64,
    pub accuracy: f64,
}

impl SufficiencyReport {
    pub fn from_confusion(confusion: Vec<Vec<f64>>, accuracy: f64) -> Self {
        let satisfied: Vec<bool> = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().all(|(j, &v)| j == i || row[i] > v))
            .collect();
        let m_p = satisfied.iter().filter(|&&s| s).count();
        let m = confusion.len();
        SufficiencyReport {
            confusion,
            sufficient: m_p == m,
            satisfied,
            m_p,
            eta: 100.0 * m_p as f64 / m as f64,
            accuracy,
        }
    }
}

pub fn confusion_matrix<C: Classifier + ?Sized>(h: &C, test: &LabeledDataset) -> Result<SufficiencyReport> {
    test.check()?;
    h.check_shape(&test.shape())?;
    let m = test.classes();
    let counts = test.class_counts();
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(c));
    }
    let predicted: Vec<usize> = test.rows.par_iter().map(|r| h.predict(r).argmax()).collect();
    let mut confusion = vec![vec![0.0; m]; m];
    for (&truth, &p) in test.labels.iter().zip(&predicted) {
        confusion[truth][p] += 1.0;
    }
    for (row, &c) in confusion.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|v| *v /= c as f64);
    }
    let hits = test.labels.iter().zip(&predicted).filter(|(a, b)| a == b).count();
    Ok(SufficiencyReport::from_confusion(confusion, hits as f64 / test.len() as f64))
}
