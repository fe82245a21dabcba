//! TOML run configuration. Relative paths are resolved against the
//! directory of the config file.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use graspid_core::classify::{MlpConfig, ModelKind, DEFAULT_K};
use graspid_core::mesh::PrimitiveKind;
use graspid_core::recognition::{Method, DEFAULT_COMBINATIONS, DEFAULT_MAX_GRASPS, DEFAULT_THRESHOLD};
use graspid_core::sampling::{GraspOptions, IncompleteGraspPolicy};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub objects: Vec<ObjectConfig>,
    #[serde(default)]
    pub grasp: GraspConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub recognition: RecognitionConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// An object is either a mesh file or a generated primitive.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub name: String,
    #[serde(default)]
    pub mesh: Option<PathBuf>,
    #[serde(default)]
    pub primitive: Option<PrimitiveKind>,
    #[serde(default)]
    pub dims: Vec<f64>,
    #[serde(default)]
    pub resolution: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraspConfig {
    pub n: usize,
    pub normals: bool,
    pub normalize: bool,
    pub sigma: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            n: 4,
            normals: true,
            normalize: false,
            sigma: 0.0,
        }
    }
}

impl GraspConfig {
    pub fn options(&self) -> GraspOptions {
        GraspOptions {
            n: self.n,
            with_normals: self.normals,
            normalize: self.normalize,
            sigma: self.sigma,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub per_class: usize,
    pub path: PathBuf,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            per_class: 2000,
            path: "dataset.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub path: PathBuf,
    /// KDE bandwidth; selected from the data when absent.
    pub bandwidth: Option<f64>,
    pub k: usize,
    pub mlp: MlpConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Kde,
            path: "model.bin".into(),
            bandwidth: None,
            k: DEFAULT_K,
            mlp: MlpConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PolicyConfig {
    /// `"p4"` or `"p5"`.
    Named(String),
    /// Finger count to probability.
    Table(BTreeMap<String, f64>),
}

impl PolicyConfig {
    pub fn build(&self) -> CliResult<IncompleteGraspPolicy> {
        match self {
            PolicyConfig::Named(s) if s == "p4" => Ok(IncompleteGraspPolicy::p4()),
            PolicyConfig::Named(s) if s == "p5" => Ok(IncompleteGraspPolicy::p5()),
            PolicyConfig::Named(s) => Err(CliError::Validation(format!("unknown policy {s:?}"))),
            PolicyConfig::Table(t) => {
                let probs = t
                    .iter()
                    .map(|(z, p)| {
                        z.parse::<usize>()
                            .map(|z| (z, *p))
                            .map_err(|_| CliError::Validation(format!("bad finger count {z:?} in policy")))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(IncompleteGraspPolicy::new(probs)?)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecognitionConfig {
    pub method: Method,
    pub threshold: f64,
    pub max_grasps: usize,
    /// Split each grasp into z-finger sub-grasps.
    pub z: Option<usize>,
    pub combinations: usize,
    /// Auxiliary classifier for the initial prior.
    pub prior_model: Option<PathBuf>,
    /// Models for other finger counts.
    pub extra_models: Vec<PathBuf>,
    pub policy: Option<PolicyConfig>,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        RecognitionConfig {
            method: Method::Bc(graspid_core::recognition::PriorKind::Uniform),
            threshold: DEFAULT_THRESHOLD,
            max_grasps: DEFAULT_MAX_GRASPS,
            z: None,
            combinations: DEFAULT_COMBINATIONS,
            prior_model: None,
            extra_models: Vec::new(),
            policy: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub trials: usize,
    pub methods: Vec<Method>,
    pub report_dir: PathBuf,
    /// Forced-count success curve up to this many grasps; 0 skips it.
    pub max_k: usize,
    pub scale_range: Option<[f64; 2]>,
    /// Training-set fractions for the data ablation.
    pub ablation: Vec<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            trials: 300,
            methods: Vec::new(),
            report_dir: "reports".into(),
            max_k: 0,
            scale_range: None,
            ablation: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::parse(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn class_names(&self) -> Vec<String> {
        self.objects.iter().map(|o| o.name.clone()).collect()
    }

    pub fn policy(&self) -> CliResult<Option<IncompleteGraspPolicy>> {
        self.recognition.policy.as_ref().map(PolicyConfig::build).transpose()
    }

    /// Checks the objects section, including that mesh files exist.
    pub fn validate_objects(&self) -> CliResult<()> {
        if self.objects.len() < 2 {
            return Err(CliError::Validation("at least two [[objects]] are required".into()));
        }
        let mut seen = HashSet::new();
        for o in &self.objects {
            if o.name.is_empty() || o.name.contains([',', '\n']) {
                return Err(CliError::Validation(format!("bad object name {:?}", o.name)));
            }
            if !seen.insert(&o.name) {
                return Err(CliError::Validation(format!("object {:?} appears twice", o.name)));
            }
            match (&o.mesh, &o.primitive) {
                (Some(m), None) => {
                    let p = self.resolve(m);
                    if !p.is_file() {
                        return Err(CliError::Validation(format!(
                            "mesh for {:?} not found: {}",
                            o.name,
                            p.display()
                        )));
                    }
                }
                (None, Some(_)) => {}
                _ => {
                    return Err(CliError::Validation(format!(
                        "object {:?} needs exactly one of mesh or primitive",
                        o.name
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn validate_grasp(&self) -> CliResult<()> {
        self.grasp
            .options()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn validate_recognition(&self) -> CliResult<()> {
        let r = &self.recognition;
        if !(0.0..=1.0).contains(&r.threshold) {
            return Err(CliError::Validation(format!("threshold must lie in [0, 1], got {}", r.threshold)));
        }
        if r.max_grasps == 0 || r.combinations == 0 {
            return Err(CliError::Validation("max_grasps and combinations must be at least 1".into()));
        }
        if let Some(z) = r.z {
            if z < 3 || z > self.grasp.n {
                return Err(CliError::Validation(format!("z = {z} must lie in [3, n = {}]", self.grasp.n)));
            }
        }
        self.policy()?;
        Ok(())
    }
}
