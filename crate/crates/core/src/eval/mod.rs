//! Recognition experiments over many seeded trials, and their reports.
//!
//! Trial `t` of object `l` draws everything it needs from streams addressed
//! by `(l, t)`, so methods compared under one seed see the same grasps and
//! results do not depend on the number of worker threads.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::Classifier;
use crate::error::{Error, Result};
use crate::mesh::{ContactCandidateSet, PrimitiveSpec, TriangleMesh};
use crate::recognition::{Method, ObjectSampler, RecognitionResult, Recognizer, DEFAULT_MAX_GRASPS};
use crate::rng;
use crate::sampling::{sample_parameterized, DatasetMeta, GraspOptions, IncompleteGraspPolicy, LabeledDataset};

mod quality;
mod stats;

pub use quality::{
    circular_mean, grasp_quality, mean_normal_angle, quality_correlation, quality_samples, GraspQuality,
    QualitySample, MIN_PAIRS,
};
pub use stats::{median, proportion_gain_test, ranks, sign_test, spearman, RankCorrelation, SampleStats};

pub(crate) const TAG_TRIAL: u64 = 3;
pub(crate) const TAG_VARIATION: u64 = 4;
pub(crate) const TAG_QUALITY: u64 = 5;
const TAG_DATA: u64 = 1;

/// Everything that defines one batch of recognition trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub method: Method,
    pub threshold: f64,
    pub trials: usize,
    pub max_grasps: usize,
    pub seed: u64,
    /// Fingers per physical grasp; ignored when `policy` is set.
    pub n: usize,
    pub with_normals: bool,
    /// Contact-location noise std.
    pub sigma: f64,
    /// `(z, k)` sub-grasp splitting.
    pub split: Option<(usize, usize)>,
    pub policy: Option<IncompleteGraspPolicy>,
    /// Each trial scales its object uniformly by a factor from this range.
    pub scale_range: Option<(f64, f64)>,
}

impl TrialConfig {
    pub fn new(method: Method, n: usize, with_normals: bool, seed: u64) -> Self {
        TrialConfig {
            method,
            threshold: crate::recognition::DEFAULT_THRESHOLD,
            trials: 300,
            max_grasps: DEFAULT_MAX_GRASPS,
            seed,
            n,
            with_normals,
            sigma: 0.0,
            split: None,
            policy: None,
            scale_range: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_grasps == 0 {
            return Err(Error::Config("trials and max_grasps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold must lie in [0, 1], got {}", self.threshold)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Config(format!("noise sigma must be >= 0, got {}", self.sigma)));
        }
        if let Some((lo, hi)) = self.scale_range {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::Config(format!("bad scale range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Models used by a batch of trials.
#[derive(Clone, Copy)]
pub struct Models<'a> {
    /// One per finger count.
    pub models: &'a [&'a dyn Classifier],
    /// Auxiliary classifier for an initial prior.
    pub prior: Option<&'a dyn Classifier>,
}

impl<'a> Models<'a> {
    pub fn new(models: &'a [&'a dyn Classifier]) -> Self {
        Models { models, prior: None }
    }

    pub fn with_prior(mut self, h: &'a dyn Classifier) -> Self {
        self.prior = Some(h);
        self
    }

    fn recognizer(&self, cfg: &TrialConfig, threshold: f64, max_grasps: usize) -> Result<Recognizer<'a>> {
        let mut r = Recognizer::new(self.models, cfg.method, threshold)?.with_max_grasps(max_grasps);
        if let Some((z, k)) = cfg.split {
            r = r.with_split(z, k);
        }
        if let Some(p) = self.prior {
            r = r.with_prior_model(p);
        }
        Ok(r)
    }

    fn check(&self, classes: usize, cfg: &TrialConfig) -> Result<()> {
        if let Some(h) = self.models.iter().chain(self.prior.iter()).find(|h| h.classes() != classes) {
            return Err(Error::ShapeMismatch(format!(
                "{classes} objects but a model with {} classes",
                h.classes()
            )));
        }
        if let Some(h) = self.models.iter().find(|h| h.shape().with_normals && !cfg.with_normals) {
            return Err(Error::ShapeMismatch(format!(
                "model {} needs contact normals but trials sample without",
                h.shape()
            )));
        }
        if cfg.scale_range.is_some() && self.models.iter().chain(self.prior.iter()).any(|h| !h.shape().normalized) {
            return Err(Error::NotNormalizedModel);
        }
        Ok(())
    }
}

/// Runs trial `t` on `contacts`, with streams addressed by `(l, t)`.
fn run_one(
    contacts: &ContactCandidateSet,
    l: usize,
    t: usize,
    models: &Models,
    cfg: &TrialConfig,
    threshold: f64,
    max_grasps: usize,
) -> Result<RecognitionResult> {
    let key = |c: u64| rng::stream(cfg.seed, &[TAG_TRIAL, l as u64, t as u64, c]);
    let scaled;
    let contacts = match cfg.scale_range {
        Some((lo, hi)) => {
            let s = if lo == hi { lo } else { key(2).random_range(lo..=hi) };
            scaled = contacts.scaled(s);
            &scaled
        }
        None => contacts,
    };
    let mut sampler = ObjectSampler::new(contacts, cfg.n, cfg.with_normals, key(0)).with_noise(cfg.sigma);
    if let Some(p) = &cfg.policy {
        sampler = sampler.with_policy(p.clone());
    }
    models
        .recognizer(cfg, threshold, max_grasps)?
        .run(&mut sampler, &mut key(1))
}

fn run_all(
    objects: &[ContactCandidateSet],
    models: &Models,
    cfg: &TrialConfig,
    threshold: f64,
    max_grasps: usize,
) -> Result<Vec<(usize, usize, RecognitionResult)>> {
    let jobs: Vec<(usize, usize)> = (0..objects.len())
        .flat_map(|l| (0..cfg.trials).map(move |t| (l, t)))
        .collect();
    jobs.par_iter()
        .map(|&(l, t)| run_one(&objects[l], l, t, models, cfg, threshold, max_grasps).map(|r| (l, t, r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub object: String,
    pub label: usize,
    pub trial: usize,
    pub method: Method,
    pub converged: bool,
    /// Physical grasps used.
    pub samples: usize,
    pub updates: usize,
    pub predicted: usize,
    pub correct: bool,
    pub certainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub name: String,
    pub trials: usize,
    pub converged: usize,
    /// Percent of trials that converged to the right class.
    pub success_converged: f64,
    /// Percent of trials whose final decision is right, converged or not.
    pub success: f64,
    pub samples_converged: SampleStats,
    pub samples_unconverged: SampleStats,
    pub samples_all: SampleStats,
    pub updates_all: SampleStats,
}

impl ObjectSummary {
    fn of(name: &str, records: &[&TrialRecord]) -> Self {
        let n = records.len();
        let pct = |k: usize| if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 };
        let samples = |pred: &dyn Fn(&TrialRecord) -> bool| {
            let v: Vec<f64> = records.iter().filter(|r| pred(r)).map(|r| r.samples as f64).collect();
            SampleStats::of(&v)
        };
        let updates: Vec<f64> = records.iter().map(|r| r.updates as f64).collect();
        ObjectSummary {
            name: name.to_string(),
            trials: n,
            converged: records.iter().filter(|r| r.converged).count(),
            success_converged: pct(records.iter().filter(|r| r.converged && r.correct).count()),
            success: pct(records.iter().filter(|r| r.correct).count()),
            samples_converged: samples(&|r| r.converged),
            samples_unconverged: samples(&|r| !r.converged),
            samples_all: samples(&|_| true),
            updates_all: SampleStats::of(&updates),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub method: Method,
    pub threshold: f64,
    pub seed: u64,
    pub class_names: Vec<String>,
    pub objects: Vec<ObjectSummary>,
    pub overall: ObjectSummary,
    /// Row-stochastic; rows are true objects, columns final decisions.
    pub confusion: Vec<Vec<f64>>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl TrialReport {
    fn build(cfg: &TrialConfig, names: &[String], columns: usize, results: Vec<(usize, usize, RecognitionResult)>) -> Self {
        let records: Vec<TrialRecord> = results
            .into_iter()
            .map(|(l, t, r)| TrialRecord {
                object: names[l].clone(),
                label: l,
                trial: t,
                method: cfg.method,
                converged: r.converged,
                samples: r.grasps,
                updates: r.updates,
                predicted: r.predicted,
                correct: r.predicted == l,
                certainty: r.certainty,
            })
            .collect();
        let mut confusion = vec![vec![0.0; columns]; names.len()];
        for r in &records {
            confusion[r.label][r.predicted] += 1.0;
        }
        for row in &mut confusion {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        let objects = names
            .iter()
            .enumerate()
            .map(|(l, name)| {
                let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.label == l).collect();
                ObjectSummary::of(name, &rs)
            })
            .collect();
        let all: Vec<&TrialRecord> = records.iter().collect();
        TrialReport {
            method: cfg.method,
            threshold: cfg.threshold,
            seed: cfg.seed,
            class_names: names.to_vec(),
            objects,
            overall: ObjectSummary::of("all", &all),
            confusion,
            records,
        }
    }
}

fn check_names(objects: &[ContactCandidateSet], names: &[String]) -> Result<()> {
    if objects.len() != names.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} objects but {} names",
            objects.len(),
            names.len()
        )));
    }
    Ok(())
}

/// `cfg.trials` recognitions of every object. Object `l` is class `l`.
pub fn run_trials(
    objects: &[ContactCandidateSet],
    names: &[String],
    models: &Models,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    cfg.validate()?;
    check_names(objects, names)?;
    models.check(objects.len(), cfg)?;
    let results = run_all(objects, models, cfg, cfg.threshold, cfg.max_grasps)?;
    Ok(TrialReport::build(cfg, names, objects.len(), results))
}

/// As [`run_trials`] with every query object rescaled per trial; models
/// must work on scale-normalized vectors.
pub fn scaled_object_trials(
    objects: &[ContactCandidateSet],
    names: &[String],
    models: &Models,
    cfg: &TrialConfig,
    scale_range: (f64, f64),
) -> Result<TrialReport> {
    let cfg = TrialConfig {
        scale_range: Some(scale_range),
        ..cfg.clone()
    };
    run_trials(objects, names, models, &cfg)
}

/// Success rate after a forced number of grasps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub class_names: Vec<String>,
    pub trials: usize,
    /// `hits[l][k - 1]`: trials of object `l` right after `k` grasps.
    pub hits: Vec<Vec<usize>>,
}

impl SuccessCurve {
    pub fn max_k(&self) -> usize {
        self.hits.first().map_or(0, Vec::len)
    }

    /// Percent of object `l` trials right after `k` grasps.
    pub fn object_rate(&self, l: usize, k: usize) -> f64 {
        100.0 * self.hits[l][k - 1] as f64 / self.trials as f64
    }

    pub fn total_hits(&self, k: usize) -> usize {
        self.hits.iter().map(|h| h[k - 1]).sum()
    }

    pub fn total_trials(&self) -> usize {
        self.trials * self.hits.len()
    }

    pub fn rate(&self, k: usize) -> f64 {
        100.0 * self.total_hits(k) as f64 / self.total_trials() as f64
    }
}

/// Runs every trial for exactly `max_k` grasps, ignoring the threshold,
/// and scores the decision standing after each grasp.
pub fn success_vs_samples(
    objects: &[ContactCandidateSet],
    names: &[String],
    models: &Models,
    cfg: &TrialConfig,
    max_k: usize,
) -> Result<SuccessCurve> {
    cfg.validate()?;
    check_names(objects, names)?;
    models.check(objects.len(), cfg)?;
    if max_k == 0 {
        return Err(Error::Config("max_k must be at least 1".into()));
    }
    let results = run_all(objects, models, cfg, f64::INFINITY, max_k)?;
    let mut hits = vec![vec![0; max_k]; objects.len()];
    for (l, _, r) in &results {
        let d = r.decisions_per_grasp();
        for (k, &p) in d.iter().enumerate().take(max_k) {
            if p == *l {
                hits[*l][k] += 1;
            }
        }
    }
    Ok(SuccessCurve {
        class_names: names.to_vec(),
        trials: cfg.trials,
        hits,
    })
}

/// A deterministic `fraction` of every class, kept in the original order.
pub fn subsample(ds: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let (kept, _) = ds.split(1.0 - fraction, seed);
    if let Some(c) = kept.class_counts().iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(c));
    }
    Ok(kept)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    pub fraction: f64,
    pub rows: usize,
    pub success: f64,
    pub success_converged: f64,
    pub samples: SampleStats,
}

/// Refits a model on shrinking subsets of `ds` and reruns the trials.
pub fn data_ablation<F>(
    ds: &LabeledDataset,
    fractions: &[f64],
    fit: F,
    objects: &[ContactCandidateSet],
    cfg: &TrialConfig,
) -> Result<Vec<AblationPoint>>
where
    F: Fn(&LabeledDataset) -> Result<Box<dyn Classifier>>,
{
    fractions
        .iter()
        .map(|&f| {
            let sub = subsample(ds, f, cfg.seed)?;
            let h = fit(&sub)?;
            let models = [h.as_ref()];
            let report = run_trials(objects, &ds.class_names, &Models::new(&models), cfg)?;
            Ok(AblationPoint {
                fraction: f,
                rows: sub.len(),
                success: report.overall.success,
                success_converged: report.overall.success_converged,
                samples: report.overall.samples_all,
            })
        })
        .collect()
}

/// `count` copies of a primitive, each stretched along x, y and z by
/// independent factors from `range`.
pub fn primitive_variations(
    spec: &PrimitiveSpec,
    count: usize,
    range: (f64, f64),
    seed: u64,
) -> Result<Vec<TriangleMesh>> {
    let base = crate::mesh::generate_primitive(spec)?;
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, &[TAG_VARIATION, spec.kind as u64, i as u64]);
            let mut f = || r.random_range(range.0..=range.1);
            let (sx, sy, sz) = (f(), f(), f());
            base.scaled(sx, sy, sz)
        })
        .collect()
}

/// Training vectors for object families, each family pooled over its
/// variations: sample `i` of family `f` comes from variation `i mod len`.
pub fn pooled_dataset(
    families: &[Vec<ContactCandidateSet>],
    names: &[String],
    opts: &GraspOptions,
    per_class: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    opts.validate()?;
    if families.len() != names.len() || families.iter().any(Vec::is_empty) {
        return Err(Error::ShapeMismatch("every family needs a name and at least one variation".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..families.len())
        .flat_map(|f| (0..per_class).map(move |i| (f, i)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(f, i)| {
            let mut r = rng::stream(seed, &[TAG_DATA, f as u64, i as u64]);
            let v = &families[f][i % families[f].len()];
            sample_parameterized(v, opts, &mut r).map(|(_, q)| q.values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        rows,
        labels: jobs.iter().map(|&(f, _)| f).collect(),
        class_names: names.to_vec(),
        meta: DatasetMeta {
            shape: opts.shape(),
            sigma: opts.sigma,
            seed,
            per_class,
        },
    })
}

/// How often each query object was recognized as each family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryTable {
    pub families: Vec<String>,
    pub queries: Vec<String>,
    pub trials: usize,
    /// `rates[q][f]`: percent of query-q trials decided as family f.
    pub rates: Vec<Vec<f64>>,
}

pub fn geometry_recognition(
    queries: &[ContactCandidateSet],
    query_names: &[String],
    families: &[String],
    models: &Models,
    cfg: &TrialConfig,
) -> Result<GeometryTable> {
    cfg.validate()?;
    check_names(queries, query_names)?;
    models.check(families.len(), cfg)?;
    if models.models.iter().any(|h| !h.shape().normalized) {
        return Err(Error::NotNormalizedModel);
    }
    let results = run_all(queries, models, cfg, cfg.threshold, cfg.max_grasps)?;
    let mut rates = vec![vec![0.0; families.len()]; queries.len()];
    for (q, _, r) in &results {
        rates[*q][r.predicted] += 100.0 / cfg.trials as f64;
    }
    Ok(GeometryTable {
        families: families.to_vec(),
        queries: query_names.to_vec(),
        trials: cfg.trials,
        rates,
    })
}

fn csv_err(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(csv_err)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut w: W) -> Result<()> {
    writeln!(w, "object,trial,method,converged,samples,updates,predicted,correct,certainty")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.object, r.trial, r.method, r.converged, r.samples, r.updates, r.predicted, r.correct, r.certainty
        )?;
    }
    Ok(())
}

/// Square matrix with class names as the header row and first column.
pub fn write_matrix_csv<W: Write>(rows: &[String], columns: &[String], m: &[Vec<f64>], mut w: W) -> Result<()> {
    writeln!(w, "truth,{}", columns.join(","))?;
    for (name, row) in rows.iter().zip(m) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{name},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_curve_csv<W: Write>(curve: &SuccessCurve, mut w: W) -> Result<()> {
    writeln!(w, "k,{},all", curve.class_names.join(","))?;
    for k in 1..=curve.max_k() {
        let cells: Vec<String> = (0..curve.hits.len()).map(|l| curve.object_rate(l, k).to_string()).collect();
        writeln!(w, "{k},{},{}", cells.join(","), curve.rate(k))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ClassDistribution;
    use crate::mesh::{generate_primitive, mesh_to_contacts};
    use crate::param::Shape;
    use crate::recognition::{IcMode, PriorKind};

    fn objects() -> (Vec<ContactCandidateSet>, Vec<String>) {
        let specs = [PrimitiveSpec::cuboid(1.0, 0.7, 0.5, 3), PrimitiveSpec::sphere(0.5, 1)];
        let objs = specs
            .iter()
            .map(|s| mesh_to_contacts(&generate_primitive(s).unwrap()).unwrap())
            .collect();
        (objs, vec!["box".into(), "sphere".into()])
    }

    /// The same distribution for every query.
    struct Fixed {
        probs: Vec<f64>,
        normalized: bool,
    }

    impl Classifier for Fixed {
        fn classes(&self) -> usize {
            self.probs.len()
        }
        fn shape(&self) -> Shape {
            Shape::spatial(3, false, self.normalized)
        }
        fn predict(&self, _: &[f64]) -> ClassDistribution {
            ClassDistribution::new(self.probs.clone()).unwrap()
        }
    }

    #[test]
    fn uniform_classifier_scores_chance() {
        let (objs, names) = objects();
        let h = Fixed {
            probs: vec![0.5, 0.5],
            normalized: false,
        };
        let models = [&h as &dyn Classifier];
        let mut cfg = TrialConfig::new(Method::Bc(PriorKind::Uniform), 3, false, 7);
        cfg.trials = 20;
        cfg.max_grasps = 5;
        let r = run_trials(&objs, &names, &Models::new(&models), &cfg).unwrap();
        assert_eq!(r.overall.converged, 0);
        assert_eq!(r.overall.success, 50.0);
        assert_eq!(r.overall.success_converged, 0.0);
        assert_eq!(r.objects[0].samples_unconverged.mean, Some(5.0));
        assert_eq!(r.objects[0].samples_converged.count, 0);
        for row in &r.confusion {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_reports() {
        let (objs, names) = objects();
        let h = Fixed {
            probs: vec![0.7, 0.3],
            normalized: false,
        };
        let models = [&h as &dyn Classifier];
        let mut cfg = TrialConfig::new(Method::Ic(IcMode::FullAccumulate), 3, false, 3);
        cfg.trials = 10;
        let run = || {
            let r = run_trials(&objs, &names, &Models::new(&models), &cfg).unwrap();
            let mut a = Vec::new();
            write_json(&r, &mut a).unwrap();
            write_trials_csv(&r.records, &mut a).unwrap();
            write_matrix_csv(&names, &names, &r.confusion, &mut a).unwrap();
            a
        };
        let one = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(one, pool.install(run));
    }

    #[test]
    fn scaled_trials_need_normalized_models() {
        let (objs, names) = objects();
        let h = Fixed {
            probs: vec![0.7, 0.3],
            normalized: false,
        };
        let models = [&h as &dyn Classifier];
        let cfg = TrialConfig::new(Method::Bc(PriorKind::Uniform), 3, false, 3);
        let err = scaled_object_trials(&objs, &names, &Models::new(&models), &cfg, (0.1, 5.0)).unwrap_err();
        assert_eq!(err, Error::NotNormalizedModel);
    }

    #[test]
    fn forced_curve_has_every_k() {
        let (objs, names) = objects();
        let h = Fixed {
            probs: vec![0.9, 0.1],
            normalized: false,
        };
        let models = [&h as &dyn Classifier];
        let mut cfg = TrialConfig::new(Method::Ic(IcMode::ArgmaxOnly), 3, false, 1);
        cfg.trials = 8;
        let c = success_vs_samples(&objs, &names, &Models::new(&models), &cfg, 6).unwrap();
        assert_eq!(c.max_k(), 6);
        for k in 1..=6 {
            assert_eq!(c.object_rate(0, k), 100.0);
            assert_eq!(c.object_rate(1, k), 0.0);
            assert_eq!(c.rate(k), 50.0);
        }
    }

    #[test]
    fn variations_stay_in_range() {
        let v = primitive_variations(&PrimitiveSpec::cuboid(1.0, 1.0, 1.0, 1), 5, (0.5, 1.5), 2).unwrap();
        assert_eq!(v.len(), 5);
        for m in &v {
            let vol = m.volume().unwrap();
            assert!((0.125 - 1e-12..=3.375 + 1e-12).contains(&vol));
        }
        assert_ne!(v[0], v[1]);
    }
}
