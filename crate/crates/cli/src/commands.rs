use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use graspid_core::classify::{Classifier, KdeModel, KnnModel, MlpModel, Model, ModelKind};
use graspid_core::dataset::{load_dataset, save_dataset};
use graspid_core::eval::{
    self, quality_correlation, quality_samples, run_trials, scaled_object_trials, success_vs_samples, Models,
    TrialConfig,
};
use graspid_core::grasp::Grasp;
use graspid_core::mesh::{
    generate_primitive, load_mesh_file, mesh_to_contacts, write_obj, write_off, ContactCandidateSet, PrimitiveKind,
    PrimitiveSpec, TriangleMesh,
};
use graspid_core::param::Shape;
use graspid_core::recognition::{
    write_trace, GraspSource, GraspStream, Method, ObjectSampler, PriorKind, RecognitionResult, Recognizer,
};
use graspid_core::rng;
use graspid_core::sampling::{generate_dataset, LabeledDataset};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};

/// Stream tag for self-play recognition.
const TAG_RECOGNIZE: u64 = 6;

pub struct LoadedObject {
    pub name: String,
    pub mesh: TriangleMesh,
    pub contacts: ContactCandidateSet,
}

fn default_dims(kind: PrimitiveKind) -> Vec<f64> {
    match kind {
        PrimitiveKind::Box => vec![1.0, 1.0, 1.0],
        PrimitiveKind::Sphere => vec![0.5],
        PrimitiveKind::Cylinder => vec![0.5, 1.0],
    }
}

pub fn load_objects(cfg: &RunConfig) -> CliResult<Vec<LoadedObject>> {
    cfg.objects
        .iter()
        .map(|o| {
            let mesh = match (&o.mesh, o.primitive) {
                (Some(p), _) => {
                    let path = cfg.resolve(p);
                    load_mesh_file(&path).context(|| format!("loading {}", path.display()))?
                }
                (None, Some(kind)) => {
                    let spec = PrimitiveSpec {
                        kind,
                        dims: if o.dims.is_empty() { default_dims(kind) } else { o.dims.clone() },
                        resolution: o.resolution.unwrap_or(kind.default_resolution()),
                    };
                    generate_primitive(&spec).context(|| format!("object {:?}", o.name))?
                }
                (None, None) => unreachable!("validated"),
            };
            let contacts = mesh_to_contacts(&mesh).context(|| format!("contacts of {:?}", o.name))?;
            Ok(LoadedObject {
                name: o.name.clone(),
                mesh,
                contacts,
            })
        })
        .collect()
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(graspid_core::Error::from)
            .context(|| format!("creating {}", dir.display()))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(graspid_core::Error::from)
        .context(|| format!("creating {}", path.display()))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush()
        .map_err(graspid_core::Error::from)
        .context(|| format!("writing {}", path.display()))
}

pub fn gen_data(cfg: &RunConfig, out: Option<&Path>) -> CliResult<PathBuf> {
    cfg.validate_objects()?;
    cfg.validate_grasp()?;
    if cfg.data.per_class == 0 {
        return Err(CliError::Validation("data.per_class must be at least 1".into()));
    }
    let path = out.map_or_else(|| cfg.resolve(&cfg.data.path), Path::to_path_buf);
    let t0 = Instant::now();
    let objects = load_objects(cfg)?;
    for o in &objects {
        eprintln!("{}: {} contact candidates", o.name, o.contacts.len());
    }
    let contacts: Vec<ContactCandidateSet> = objects.iter().map(|o| o.contacts.clone()).collect();
    let ds = generate_dataset(
        &contacts,
        &cfg.class_names(),
        &cfg.grasp.options(),
        cfg.data.per_class,
        cfg.seed,
    )
    .context(|| "generating grasps".into())?;
    let secs = t0.elapsed().as_secs_f64();
    eprintln!(
        "generated {} vectors in {secs:.2} s ({:.2} s per object)",
        ds.len(),
        secs / objects.len() as f64
    );
    save_dataset(&ds, &path).context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn check_dataset(cfg: &RunConfig, ds: &LabeledDataset) -> CliResult<()> {
    let want = cfg.grasp.options().shape();
    if ds.shape() != want {
        return Err(CliError::MetadataMismatch(format!(
            "dataset is {} but the config asks for {}",
            ds.shape(),
            want
        )));
    }
    if !cfg.objects.is_empty() && ds.class_names != cfg.class_names() {
        return Err(CliError::MetadataMismatch(format!(
            "dataset classes {:?} differ from config objects {:?}",
            ds.class_names,
            cfg.class_names()
        )));
    }
    Ok(())
}

pub fn fit(cfg: &RunConfig, ds: &LabeledDataset) -> CliResult<Model> {
    let m = &cfg.model;
    Ok(match m.kind {
        ModelKind::Kde => Model::Kde(KdeModel::fit(ds, m.bandwidth)?),
        ModelKind::Knn => Model::Knn(KnnModel::fit(ds, m.k)?),
        ModelKind::Mlp => {
            let (train, valid) = ds.validation_split();
            let mlp = graspid_core::classify::MlpConfig {
                seed: cfg.seed,
                ..m.mlp.clone()
            };
            let (model, log) = MlpModel::train(&train, Some(&valid), &mlp)?;
            let best = log.best_epoch.checked_sub(1).and_then(|e| log.val_accuracy.get(e));
            eprintln!(
                "kept epoch {} of {}, validation accuracy {:.4}",
                log.best_epoch,
                log.losses.len(),
                best.copied().unwrap_or(f64::NAN)
            );
            Model::Mlp(model)
        }
    })
}

pub fn train(cfg: &RunConfig, data: Option<&Path>, out: Option<&Path>) -> CliResult<PathBuf> {
    let data = data.map_or_else(|| cfg.resolve(&cfg.data.path), Path::to_path_buf);
    let out = out.map_or_else(|| cfg.resolve(&cfg.model.path), Path::to_path_buf);
    if !data.is_file() {
        return Err(CliError::Validation(format!("dataset not found: {}", data.display())));
    }
    let ds = load_dataset(&data).context(|| format!("reading {}", data.display()))?;
    check_dataset(cfg, &ds)?;
    let model = fit(cfg, &ds)?;
    let mut w = create(&out)?;
    graspid_core::classify::write_model(&model, &mut w).context(|| format!("writing {}", out.display()))?;
    finish(w, &out)?;
    eprintln!("{} model on {} vectors written to {}", model.kind(), ds.len(), out.display());
    Ok(out)
}

fn load_model_file(path: &Path) -> CliResult<Model> {
    if !path.is_file() {
        return Err(CliError::Validation(format!("model not found: {}", path.display())));
    }
    graspid_core::classify::load_model(path).context(|| format!("reading {}", path.display()))
}

/// The main model, models for other finger counts, and the prior model.
pub struct ModelBundle {
    pub models: Vec<Model>,
    pub prior: Option<Model>,
}

impl ModelBundle {
    pub fn load(cfg: &RunConfig, main: Option<&Path>, methods: &[Method]) -> CliResult<Self> {
        let main = main.map_or_else(|| cfg.resolve(&cfg.model.path), Path::to_path_buf);
        let mut models = vec![load_model_file(&main)?];
        for p in &cfg.recognition.extra_models {
            models.push(load_model_file(&cfg.resolve(p))?);
        }
        let needs_prior = methods.contains(&Method::Bc(PriorKind::Initial));
        let prior = match (&cfg.recognition.prior_model, needs_prior) {
            (Some(p), true) => Some(load_model_file(&cfg.resolve(p))?),
            (None, true) => {
                return Err(CliError::Validation("bc-ip needs recognition.prior_model".into()));
            }
            _ => None,
        };
        let bundle = ModelBundle { models, prior };
        bundle.check(cfg)?;
        Ok(bundle)
    }

    fn check(&self, cfg: &RunConfig) -> CliResult<()> {
        let names = self.models[0].class_names().to_vec();
        let g = &cfg.grasp;
        for m in self.models.iter().chain(&self.prior) {
            let s: Shape = m.shape();
            if m.class_names() != names.as_slice() {
                return Err(CliError::MetadataMismatch("models disagree on the class names".into()));
            }
            if s.with_normals && !g.normals {
                return Err(CliError::MetadataMismatch(format!("model {s} needs normals, config has none")));
            }
            if s.normalized != g.normalize {
                return Err(CliError::MetadataMismatch(format!(
                    "model {s} but config normalize = {}",
                    g.normalize
                )));
            }
        }
        if !cfg.objects.is_empty() && names != cfg.class_names() {
            return Err(CliError::MetadataMismatch(format!(
                "model classes {names:?} differ from config objects {:?}",
                cfg.class_names()
            )));
        }
        let n = self.models[0].shape().n;
        let policy = cfg.policy()?;
        match (cfg.recognition.z, &policy) {
            (_, Some(p)) => {
                for z in p.support() {
                    let routed = cfg.recognition.z.map_or(z, |s| s.min(z));
                    if !self.models.iter().any(|m| m.shape().n == routed) {
                        return Err(graspid_core::Error::MissingModelForZ(routed).into());
                    }
                }
            }
            (Some(z), None) if n != z => {
                return Err(CliError::MetadataMismatch(format!("z = {z} but the model is for n = {n}")));
            }
            (None, None) if n != g.n => {
                return Err(CliError::MetadataMismatch(format!(
                    "grasps have n = {} but the model is for n = {n}",
                    g.n
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn view(&self) -> Vec<&dyn Classifier> {
        self.models.iter().map(|m| m as &dyn Classifier).collect()
    }

    pub fn class_names(&self) -> Vec<String> {
        self.models[0].class_names().to_vec()
    }
}

fn trial_config(cfg: &RunConfig, method: Method) -> CliResult<TrialConfig> {
    let r = &cfg.recognition;
    Ok(TrialConfig {
        method,
        threshold: r.threshold,
        trials: cfg.evaluation.trials,
        max_grasps: r.max_grasps,
        seed: cfg.seed,
        n: cfg.grasp.n,
        with_normals: cfg.grasp.normals,
        sigma: cfg.grasp.sigma,
        split: r.z.map(|z| (z, r.combinations)),
        policy: cfg.policy()?,
        scale_range: None,
    })
}

/// One recorded grasp per JSON line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspLine {
    pub points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<[f64; 3]>>,
}

impl GraspLine {
    pub fn from_grasp(g: &Grasp) -> Self {
        let arr = |v: &Vector3<f64>| [v.x, v.y, v.z];
        GraspLine {
            points: g.points.iter().map(arr).collect(),
            normals: g.normals.as_ref().map(|ns| ns.iter().map(arr).collect()),
        }
    }
}

pub fn read_grasp_stream(path: &Path) -> CliResult<Vec<Grasp>> {
    let f = File::open(path).map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line
            .map_err(graspid_core::Error::from)
            .context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Validation(format!("{}:{}: {msg}", path.display(), i + 1));
        let g: GraspLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let v = |a: &[f64; 3]| Vector3::new(a[0], a[1], a[2]);
        let grasp = Grasp::new(
            g.points.iter().map(v).collect(),
            g.normals.as_ref().map(|ns| ns.iter().map(v).collect()),
        )
        .map_err(|e| bad(e.to_string()))?;
        out.push(grasp);
    }
    Ok(out)
}

pub enum Query<'a> {
    /// Self-play on a mesh file.
    Mesh(&'a Path),
    /// Self-play on a configured object.
    Object(&'a str),
    /// Recorded grasps.
    Stream(&'a Path),
}

#[derive(Debug, Clone, Serialize)]
pub struct RecognizeOutput {
    pub predicted_class: String,
    pub class_names: Vec<String>,
    #[serde(flatten)]
    pub result: RecognitionResult,
}

pub fn recognize(cfg: &RunConfig, query: Query, model: Option<&Path>) -> CliResult<RecognizeOutput> {
    cfg.validate_grasp()?;
    cfg.validate_recognition()?;
    let method = cfg.recognition.method;
    let bundle = ModelBundle::load(cfg, model, &[method])?;
    let view = bundle.view();
    let r = &cfg.recognition;
    let mut rec = Recognizer::new(&view, method, r.threshold)?.with_max_grasps(r.max_grasps);
    if let Some(z) = r.z {
        rec = rec.with_split(z, r.combinations);
    }
    if let Some(p) = &bundle.prior {
        rec = rec.with_prior_model(p);
    }
    let mut combos = rng::stream(cfg.seed, &[TAG_RECOGNIZE, 1]);
    let contacts;
    let mut source: Box<dyn GraspSource> = match query {
        Query::Stream(path) => {
            let grasps = read_grasp_stream(path)?;
            let needs_normals = bundle.models.iter().any(|m| m.shape().with_normals);
            if let Some((i, _)) = grasps.iter().enumerate().find(|(_, g)| needs_normals && !g.with_normals()) {
                return Err(CliError::MetadataMismatch(format!(
                    "grasp {} has no normals but the model needs them",
                    i + 1
                )));
            }
            Box::new(GraspStream::new(grasps))
        }
        Query::Mesh(path) => {
            let mesh = load_mesh_file(path).context(|| format!("loading {}", path.display()))?;
            contacts = mesh_to_contacts(&mesh).context(|| format!("contacts of {}", path.display()))?;
            Box::new(sampler(cfg, &contacts)?)
        }
        Query::Object(name) => {
            cfg.validate_objects()?;
            let objects = load_objects(cfg)?;
            let o = objects
                .into_iter()
                .find(|o| o.name == name)
                .ok_or_else(|| CliError::Validation(format!("no object named {name:?} in the config")))?;
            contacts = o.contacts;
            Box::new(sampler(cfg, &contacts)?)
        }
    };
    let result = rec.run(source.as_mut(), &mut combos).context(|| "recognition".into())?;
    let class_names = bundle.class_names();
    Ok(RecognizeOutput {
        predicted_class: class_names[result.predicted].clone(),
        class_names,
        result,
    })
}

fn sampler<'a>(cfg: &RunConfig, contacts: &'a ContactCandidateSet) -> CliResult<ObjectSampler<'a>> {
    let mut s = ObjectSampler::new(
        contacts,
        cfg.grasp.n,
        cfg.grasp.normals,
        rng::stream(cfg.seed, &[TAG_RECOGNIZE, 0]),
    )
    .with_noise(cfg.grasp.sigma);
    if let Some(p) = cfg.policy()? {
        s = s.with_policy(p);
    }
    Ok(s)
}

pub fn write_recognition(out: &RecognizeOutput, json: Option<&Path>, trace: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(out).expect("serializable");
    match json {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}")
                .map_err(graspid_core::Error::from)
                .context(|| format!("writing {}", p.display()))?;
            finish(w, p)?;
        }
        None => crate::emit(&text),
    }
    if let Some(p) = trace {
        let mut w = create(p)?;
        write_trace(&out.result.trace, &mut w).context(|| format!("writing {}", p.display()))?;
        finish(w, p)?;
    }
    Ok(())
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> graspid_core::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).context(|| format!("writing {}", path.display()))?;
    finish(w, path)
}

/// Runs the configured experiments and writes their reports; returns the
/// files written.
pub fn evaluate(cfg: &RunConfig, out: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    cfg.validate_objects()?;
    cfg.validate_grasp()?;
    cfg.validate_recognition()?;
    let methods = if cfg.evaluation.methods.is_empty() {
        vec![cfg.recognition.method]
    } else {
        cfg.evaluation.methods.clone()
    };
    if cfg.evaluation.trials == 0 {
        return Err(CliError::Validation("evaluation.trials must be at least 1".into()));
    }
    if let Some([lo, hi]) = cfg.evaluation.scale_range {
        if !(lo > 0.0 && lo <= hi) {
            return Err(CliError::Validation(format!("bad scale range [{lo}, {hi}]")));
        }
        if !cfg.grasp.normalize {
            return Err(graspid_core::Error::NotNormalizedModel.into());
        }
    }
    let bundle = ModelBundle::load(cfg, None, &methods)?;
    let dir = out.map_or_else(|| cfg.resolve(&cfg.evaluation.report_dir), Path::to_path_buf);
    let objects = load_objects(cfg)?;
    let contacts: Vec<ContactCandidateSet> = objects.iter().map(|o| o.contacts.clone()).collect();
    let names = cfg.class_names();
    let view = bundle.view();
    let mut models = Models::new(&view);
    if let Some(p) = &bundle.prior {
        models = models.with_prior(p);
    }
    let mut written = Vec::new();
    for method in methods {
        let tc = trial_config(cfg, method)?;
        let t0 = Instant::now();
        let report = run_trials(&contacts, &names, &models, &tc).context(|| format!("{method} trials"))?;
        eprintln!(
            "{method}: success {:.1}% (converged-correct {:.1}%), mean grasps {:.2}, {:.1} s",
            report.overall.success,
            report.overall.success_converged,
            report.overall.samples_all.mean.unwrap_or(0.0),
            t0.elapsed().as_secs_f64()
        );
        let base = dir.join(method.to_string());
        let p = base.with_extension("json");
        write_with(&p, |w| eval::write_json(&report, w))?;
        written.push(p);
        let p = dir.join(format!("{method}_trials.csv"));
        write_with(&p, |w| eval::write_trials_csv(&report.records, w))?;
        written.push(p);
        let p = dir.join(format!("{method}_confusion.csv"));
        write_with(&p, |w| eval::write_matrix_csv(&names, &names, &report.confusion, w))?;
        written.push(p);

        if cfg.evaluation.max_k > 0 {
            let curve = success_vs_samples(&contacts, &names, &models, &tc, cfg.evaluation.max_k)
                .context(|| format!("{method} success curve"))?;
            let p = dir.join(format!("{method}_curve.csv"));
            write_with(&p, |w| eval::write_curve_csv(&curve, w))?;
            written.push(p);
        }
        if let Some([lo, hi]) = cfg.evaluation.scale_range {
            let report = scaled_object_trials(&contacts, &names, &models, &tc, (lo, hi))
                .context(|| format!("{method} scaled trials"))?;
            let p = dir.join(format!("{method}_scaled.json"));
            write_with(&p, |w| eval::write_json(&report, w))?;
            written.push(p);
            let p = dir.join(format!("{method}_scaled_trials.csv"));
            write_with(&p, |w| eval::write_trials_csv(&report.records, w))?;
            written.push(p);
        }
        if !cfg.evaluation.ablation.is_empty() {
            let data = cfg.resolve(&cfg.data.path);
            if !data.is_file() {
                return Err(CliError::Validation(format!(
                    "ablation needs the dataset: {} not found",
                    data.display()
                )));
            }
            let ds = load_dataset(&data).context(|| format!("reading {}", data.display()))?;
            check_dataset(cfg, &ds)?;
            let fit_box = |sub: &LabeledDataset| -> graspid_core::Result<Box<dyn Classifier>> {
                fit(cfg, sub)
                    .map(|m| Box::new(m) as Box<dyn Classifier>)
                    .map_err(|e| match e {
                        CliError::Core { source, .. } => source,
                        other => graspid_core::Error::Config(other.to_string()),
                    })
            };
            let points = eval::data_ablation(&ds, &cfg.evaluation.ablation, fit_box, &contacts, &tc)
                .context(|| format!("{method} data ablation"))?;
            let p = dir.join(format!("{method}_ablation.json"));
            write_with(&p, |w| eval::write_json(&points, w))?;
            written.push(p);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub samples: usize,
    pub correlation: eval::RankCorrelation,
    pub mean_volume_ratio: f64,
    pub accuracy: f64,
}

pub fn quality(cfg: &RunConfig, per_object: usize, out: Option<&Path>) -> CliResult<QualityReport> {
    cfg.validate_objects()?;
    cfg.validate_grasp()?;
    let bundle = ModelBundle::load(cfg, None, &[])?;
    let objects = load_objects(cfg)?;
    let contacts: Vec<ContactCandidateSet> = objects.iter().map(|o| o.contacts.clone()).collect();
    let meshes: Vec<TriangleMesh> = objects.into_iter().map(|o| o.mesh).collect();
    let samples = quality_samples(&contacts, &meshes, &bundle.models[0], per_object, cfg.seed)
        .context(|| "sampling grasp quality".into())?;
    let correlation = quality_correlation(&samples).context(|| "quality correlation".into())?;
    let report = QualityReport {
        samples: samples.len(),
        correlation,
        mean_volume_ratio: samples.iter().map(|s| s.volume_ratio).sum::<f64>() / samples.len() as f64,
        accuracy: samples.iter().filter(|s| s.correct).count() as f64 / samples.len() as f64,
    };
    if let Some(p) = out {
        write_with(p, |w| {
            writeln!(w, "object,volume_ratio,mean_normal_angle,certainty,correct")?;
            for s in &samples {
                let angle = s.mean_normal_angle.map_or(String::new(), |a| a.to_string());
                writeln!(w, "{},{},{angle},{},{}", s.object, s.volume_ratio, s.certainty, s.correct)?;
            }
            Ok(())
        })?;
    }
    Ok(report)
}

pub struct PrimitiveRequest {
    pub kind: PrimitiveKind,
    pub dims: Vec<f64>,
    pub resolution: Option<u32>,
    /// Randomly stretched copies instead of the base shape.
    pub variations: usize,
    pub range: (f64, f64),
    pub seed: u64,
}

/// Writes the primitive (or its variations) next to `out`, choosing OBJ or
/// OFF by extension.
pub fn primitives(req: &PrimitiveRequest, out: &Path) -> CliResult<Vec<PathBuf>> {
    let spec = PrimitiveSpec {
        kind: req.kind,
        dims: if req.dims.is_empty() { default_dims(req.kind) } else { req.dims.clone() },
        resolution: req.resolution.unwrap_or(req.kind.default_resolution()),
    };
    let off = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"));
    let meshes = if req.variations == 0 {
        vec![generate_primitive(&spec).context(|| req.kind.name().into())?]
    } else {
        if !(req.range.0 > 0.0 && req.range.0 <= req.range.1) {
            return Err(CliError::Validation(format!("bad range {:?}", req.range)));
        }
        eval::primitive_variations(&spec, req.variations, req.range, req.seed)
            .context(|| req.kind.name().into())?
    };
    let mut written = Vec::new();
    for (i, m) in meshes.iter().enumerate() {
        let path = if meshes.len() == 1 {
            out.to_path_buf()
        } else {
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
            let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("obj");
            out.with_file_name(format!("{stem}_{i:04}.{ext}"))
        };
        write_with(&path, |w| if off { write_off(m, w) } else { write_obj(m, w) })?;
        written.push(path);
    }
    Ok(written)
}
