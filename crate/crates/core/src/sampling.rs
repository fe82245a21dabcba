//! Random grasps drawn from contact-candidate sets, labeled datasets, and
//! z-finger sub-grasps.

use nalgebra::Vector3;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::Grasp;
use crate::mesh::ContactCandidateSet;
use crate::param::{parameterize, parameterize_as, ParamVector, Shape};
use crate::rng::{self, Rng};

/// Degenerate draws tolerated before giving up on one grasp.
pub const RETRY_BUDGET: usize = 100;

/// Share of each class held out for validation.
pub const VALIDATION_FRACTION: f64 = 0.15;

/// Stream tags keep the counter spaces of different consumers apart.
pub(crate) const TAG_DATA: u64 = 1;
pub(crate) const TAG_SPLIT: u64 = 2;

/// How grasps are drawn and turned into vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspOptions {
    pub n: usize,
    pub with_normals: bool,
    pub normalize: bool,
    /// Std of the Gaussian noise added to each contact location.
    pub sigma: f64,
}

impl GraspOptions {
    pub fn new(n: usize, with_normals: bool) -> Self {
        GraspOptions {
            n,
            with_normals,
            normalize: false,
            sigma: 0.0,
        }
    }

    pub fn shape(&self) -> Shape {
        Shape::spatial(self.n, self.with_normals, self.normalize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidGrasp(format!("n must be at least 2, got {}", self.n)));
        }
        if self.n == 2 && (self.with_normals || self.normalize) {
            return Err(Error::InvalidGrasp("two-finger grasps take neither normals nor normalization".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidGrasp(format!("noise sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// `n` distinct contacts chosen uniformly at random.
pub fn draw_contacts(
    contacts: &ContactCandidateSet,
    n: usize,
    with_normals: bool,
    sigma: f64,
    rng: &mut Rng,
) -> Result<Grasp> {
    if contacts.len() < n {
        return Err(Error::TooFewCandidates {
            have: contacts.len(),
            need: n,
        });
    }
    let idx = index::sample(rng, contacts.len(), n);
    let mut points: Vec<Vector3<f64>> = idx.iter().map(|i| contacts.entries[i].point).collect();
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidGrasp(e.to_string()))?;
        for p in &mut points {
            for x in p.iter_mut() {
                *x += noise.sample(rng);
            }
        }
    }
    let normals = with_normals.then(|| idx.iter().map(|i| contacts.entries[i].normal).collect());
    Grasp::new(points, normals)
}

/// Draws grasps until one parameterizes, returning both.
pub fn sample_parameterized(
    contacts: &ContactCandidateSet,
    opts: &GraspOptions,
    rng: &mut Rng,
) -> Result<(Grasp, ParamVector)> {
    opts.validate()?;
    for _ in 0..RETRY_BUDGET {
        let g = draw_contacts(contacts, opts.n, opts.with_normals, opts.sigma, rng)?;
        match parameterize_as(&g, opts.normalize) {
            Ok(q) => return Ok((g, q)),
            Err(Error::DegenerateGrasp(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::PersistentDegeneracy(RETRY_BUDGET))
}

/// A non-degenerate grasp of `n` distinct contacts.
pub fn sample_grasp(contacts: &ContactCandidateSet, n: usize, with_normals: bool, rng: &mut Rng) -> Result<Grasp> {
    sample_noisy_grasp(contacts, n, with_normals, 0.0, rng)
}

/// As [`sample_grasp`], with Gaussian noise of std `sigma` on every
/// contact location.
pub fn sample_noisy_grasp(
    contacts: &ContactCandidateSet,
    n: usize,
    with_normals: bool,
    sigma: f64,
    rng: &mut Rng,
) -> Result<Grasp> {
    if n == 2 && with_normals {
        return Err(Error::InvalidGrasp("normals are not defined for 2-finger grasps".into()));
    }
    for _ in 0..RETRY_BUDGET {
        let g = draw_contacts(contacts, n, with_normals, sigma, rng)?;
        match parameterize(&g) {
            Ok(_) => return Ok(g),
            Err(Error::DegenerateGrasp(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::PersistentDegeneracy(RETRY_BUDGET))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub shape: Shape,
    pub sigma: f64,
    pub seed: u64,
    pub per_class: usize,
}

/// Parameterized grasps labeled with the object they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub meta: DatasetMeta,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn shape(&self) -> Shape {
        self.meta.shape
    }

    pub fn vector(&self, i: usize) -> ParamVector {
        ParamVector {
            values: self.rows[i].clone(),
            shape: self.meta.shape,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Rows of class `label`.
    pub fn class_rows(&self, label: usize) -> impl Iterator<Item = &[f64]> {
        self.rows
            .iter()
            .zip(&self.labels)
            .filter(move |(_, &l)| l == label)
            .map(|(r, _)| r.as_slice())
    }

    pub fn check(&self) -> Result<()> {
        let w = self.meta.shape.dim();
        if self.rows.len() != self.labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows but {} labels",
                self.rows.len(),
                self.labels.len()
            )));
        }
        if self.class_names.len() < 2 {
            return Err(Error::ShapeMismatch("need at least two classes".into()));
        }
        if let Some(r) = self.rows.iter().find(|r| r.len() != w) {
            return Err(Error::ShapeMismatch(format!("row of width {} in a w = {w} dataset", r.len())));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.class_names.len()) {
            return Err(Error::ShapeMismatch(format!("label {l} out of range")));
        }
        Ok(())
    }

    fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            meta: self.meta.clone(),
        }
    }

    /// Holds out `fraction` of every class, chosen by a seeded shuffle.
    /// Returns `(train, validation)`.
    pub fn split(&self, fraction: f64, seed: u64) -> (LabeledDataset, LabeledDataset) {
        let mut train = Vec::new();
        let mut valid = Vec::new();
        for c in 0..self.classes() {
            let members: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == c).collect();
            let held = (members.len() as f64 * fraction).round() as usize;
            let mut r = rng::stream(seed, &[TAG_SPLIT, c as u64]);
            let pick = index::sample(&mut r, members.len(), held);
            let mut is_held = vec![false; members.len()];
            for k in pick.iter() {
                is_held[k] = true;
            }
            for (k, &i) in members.iter().enumerate() {
                if is_held[k] {
                    valid.push(i);
                } else {
                    train.push(i);
                }
            }
        }
        train.sort_unstable();
        valid.sort_unstable();
        (self.subset(&train), self.subset(&valid))
    }

    /// The standard 85/15 training/validation split.
    pub fn validation_split(&self) -> (LabeledDataset, LabeledDataset) {
        self.split(VALIDATION_FRACTION, self.meta.seed)
    }
}

/// Samples `per_class` vectors from every object. Sample `i` of class `l`
/// draws from its own stream, so the result is independent of thread count.
pub fn generate_dataset(
    objects: &[ContactCandidateSet],
    class_names: &[String],
    opts: &GraspOptions,
    per_class: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    opts.validate()?;
    if objects.len() != class_names.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} objects but {} class names",
            objects.len(),
            class_names.len()
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..objects.len())
        .flat_map(|l| (0..per_class).map(move |i| (l, i)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(l, i)| {
            let mut r = rng::stream(seed, &[TAG_DATA, l as u64, i as u64]);
            sample_parameterized(&objects[l], opts, &mut r).map(|(_, q)| q.values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        rows,
        labels: jobs.iter().map(|&(l, _)| l).collect(),
        class_names: class_names.to_vec(),
        meta: DatasetMeta {
            shape: opts.shape(),
            sigma: opts.sigma,
            seed,
            per_class,
        },
    })
}

/// n choose k.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn check_z(n: usize, z: usize) -> Result<()> {
    if z < 3 || z > n {
        return Err(Error::InvalidZ { z, n });
    }
    Ok(())
}

/// Every z-finger sub-grasp, in lexicographic order of contact indices.
pub fn z_combinations(grasp: &Grasp, z: usize) -> Result<Vec<Grasp>> {
    check_z(grasp.n(), z)?;
    Ok(combinations(grasp.n(), z).iter().map(|c| grasp.subset(c)).collect())
}

/// `k` distinct z-finger sub-grasps chosen uniformly without replacement.
pub fn sample_z_combinations(grasp: &Grasp, z: usize, k: usize, rng: &mut Rng) -> Result<Vec<Grasp>> {
    check_z(grasp.n(), z)?;
    let all = combinations(grasp.n(), z);
    if k == 0 || k > all.len() {
        return Err(Error::InvalidK {
            k,
            available: all.len(),
        });
    }
    let mut pick: Vec<usize> = index::sample(rng, all.len(), k).into_vec();
    pick.sort_unstable();
    Ok(pick.iter().map(|&i| grasp.subset(&all[i])).collect())
}

/// Distribution of the number of fingers that make contact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteGraspPolicy {
    /// `(z, probability)` pairs with increasing `z`.
    pub probs: Vec<(usize, f64)>,
}

impl IncompleteGraspPolicy {
    pub fn new(mut probs: Vec<(usize, f64)>) -> Result<Self> {
        probs.sort_by_key(|p| p.0);
        if probs.is_empty() {
            return Err(Error::InvalidPolicy("empty distribution".into()));
        }
        if let Some(&(z, _)) = probs.iter().find(|p| p.0 < 3) {
            return Err(Error::InvalidPolicy(format!("z = {z} is below 3")));
        }
        if probs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPolicy("repeated z".into()));
        }
        if probs.iter().any(|p| !(p.1 >= 0.0)) {
            return Err(Error::InvalidPolicy("negative probability".into()));
        }
        let total: f64 = probs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPolicy(format!("probabilities sum to {total}")));
        }
        Ok(IncompleteGraspPolicy { probs })
    }

    /// Four-finger hand: Pr(z=3) = 0.4, Pr(z=4) = 0.6.
    pub fn p4() -> Self {
        IncompleteGraspPolicy {
            probs: vec![(3, 0.4), (4, 0.6)],
        }
    }

    /// Five-finger hand: Pr(z=3) = 0.2, Pr(z=4) = 0.3, Pr(z=5) = 0.5.
    pub fn p5() -> Self {
        IncompleteGraspPolicy {
            probs: vec![(3, 0.2), (4, 0.3), (5, 0.5)],
        }
    }

    /// All `n` fingers always touch.
    pub fn full(n: usize) -> Result<Self> {
        IncompleteGraspPolicy::new(vec![(n, 1.0)])
    }

    pub fn max_z(&self) -> usize {
        self.probs.last().map_or(0, |p| p.0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.probs.iter().map(|p| p.0).collect()
    }

    pub fn probability(&self, z: usize) -> f64 {
        self.probs.iter().find(|p| p.0 == z).map_or(0.0, |p| p.1)
    }

    pub fn draw(&self, rng: &mut Rng) -> usize {
        let w = WeightedIndex::new(self.probs.iter().map(|p| p.1)).expect("validated weights");
        self.probs[w.sample(rng)].0
    }
}

/// Draws a finger count from `policy`, then a grasp with that many contacts.
pub fn sample_incomplete(
    contacts: &ContactCandidateSet,
    policy: &IncompleteGraspPolicy,
    with_normals: bool,
    rng: &mut Rng,
) -> Result<Grasp> {
    let z = policy.draw(rng);
    sample_grasp(contacts, z, with_normals, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, mesh_to_contacts, PrimitiveSpec};

    fn cube_contacts(cells: u32) -> ContactCandidateSet {
        mesh_to_contacts(&generate_primitive(&PrimitiveSpec::cuboid(1.0, 1.0, 1.0, cells)).unwrap()).unwrap()
    }

    #[test]
    fn distinct_contacts() {
        let c = cube_contacts(4);
        let mut r = rng::seeded(1);
        for _ in 0..50 {
            let g = sample_grasp(&c, 4, true, &mut r).unwrap();
            for i in 0..4 {
                for j in i + 1..4 {
                    assert_ne!(g.points[i], g.points[j]);
                }
            }
        }
    }

    #[test]
    fn too_few_candidates() {
        let c = cube_contacts(1);
        let mut r = rng::seeded(1);
        assert!(matches!(
            sample_grasp(&c, 13, false, &mut r),
            Err(Error::TooFewCandidates { have: 12, need: 13 })
        ));
    }

    #[test]
    fn flat_plate_exhausts_retries() {
        let mut c = cube_contacts(3);
        c.entries.retain(|e| e.normal.z > 0.5);
        let mut r = rng::seeded(3);
        assert!(matches!(
            sample_grasp(&c, 4, false, &mut r),
            Err(Error::PersistentDegeneracy(RETRY_BUDGET))
        ));
    }

    #[test]
    fn seeded_sampling_repeats() {
        let c = cube_contacts(4);
        let a = sample_grasp(&c, 5, true, &mut rng::seeded(9)).unwrap();
        let b = sample_grasp(&c, 5, true, &mut rng::seeded(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn combination_counts() {
        for (n, c) in [(4, 4), (5, 10), (6, 20), (7, 35)] {
            assert_eq!(binomial(n, 3), c);
            assert_eq!(combinations(n, 3).len(), c);
        }
        for (n, c) in [(5, 5), (6, 15), (7, 35)] {
            assert_eq!(combinations(n, 4).len(), c);
        }
        assert_eq!(combinations(5, 5), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(combinations(4, 3)[1], vec![0, 1, 3]);
    }

    #[test]
    fn z_subsets() {
        let c = cube_contacts(4);
        let g = sample_grasp(&c, 7, true, &mut rng::seeded(2)).unwrap();
        assert_eq!(z_combinations(&g, 3).unwrap().len(), 35);
        assert_eq!(z_combinations(&g, 7).unwrap(), vec![g.clone()]);
        assert!(matches!(z_combinations(&g, 2), Err(Error::InvalidZ { .. })));
        let four = sample_z_combinations(&g, 3, 4, &mut rng::seeded(5)).unwrap();
        assert_eq!(four.len(), 4);
        assert_eq!(four, sample_z_combinations(&g, 3, 4, &mut rng::seeded(5)).unwrap());
        assert_eq!(sample_z_combinations(&g, 3, 35, &mut rng::seeded(5)).unwrap().len(), 35);
        assert!(matches!(
            sample_z_combinations(&g, 3, 36, &mut rng::seeded(5)),
            Err(Error::InvalidK { k: 36, available: 35 })
        ));
    }

    #[test]
    fn policies() {
        assert!(IncompleteGraspPolicy::new(vec![(2, 0.5), (3, 0.5)]).is_err());
        assert!(IncompleteGraspPolicy::new(vec![(3, 0.5), (4, 0.4)]).is_err());
        let full = IncompleteGraspPolicy::full(5).unwrap();
        let mut r = rng::seeded(4);
        assert!((0..100).all(|_| full.draw(&mut r) == 5));
        let c = cube_contacts(4);
        let g = sample_incomplete(&c, &IncompleteGraspPolicy::p5(), true, &mut r).unwrap();
        assert!((3..=5).contains(&g.n()));
    }

    #[test]
    fn dataset_counts_and_split() {
        let objs = vec![cube_contacts(3), cube_contacts(4)];
        let names = vec!["a".to_string(), "b".to_string()];
        let opts = GraspOptions::new(4, true);
        let ds = generate_dataset(&objs, &names, &opts, 40, 11).unwrap();
        ds.check().unwrap();
        assert_eq!(ds.class_counts(), vec![40, 40]);
        assert_eq!(ds.rows[0].len(), 14);
        let (train, valid) = ds.validation_split();
        assert_eq!(valid.class_counts(), vec![6, 6]);
        assert_eq!(train.len() + valid.len(), 80);
        assert_eq!(ds, generate_dataset(&objs, &names, &opts, 40, 11).unwrap());
    }
}
