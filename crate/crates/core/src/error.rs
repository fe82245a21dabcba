use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // mesh
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh has no valid faces")]
    EmptyMesh,
    #[error("cannot resolve inward normal direction for face {0}")]
    OrientationUnknown(usize),
    #[error("mesh is not consistently oriented; volume is undefined")]
    NotOriented,
    #[error("invalid primitive dimensions: {0}")]
    InvalidDims(String),

    // grasp parameterization
    #[error("degenerate grasp: {0}")]
    DegenerateGrasp(String),
    #[error("planar grasp is not in convex position")]
    NonConvexUnsupported,
    #[error("scale normalization not applicable: {0}")]
    NotApplicable(String),
    #[error("infeasible parameter vector: {0}")]
    InfeasibleVector(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid grasp: {0}")]
    InvalidGrasp(String),

    // sampling
    #[error("object has {have} contact candidates, need {need}")]
    TooFewCandidates { have: usize, need: usize },
    #[error("no non-degenerate grasp after {0} attempts")]
    PersistentDegeneracy(usize),
    #[error("invalid finger count z = {z} for n = {n}")]
    InvalidZ { z: usize, n: usize },
    #[error("cannot draw {k} of {available} combinations")]
    InvalidK { k: usize, available: usize },
    #[error("invalid incomplete-grasp policy: {0}")]
    InvalidPolicy(String),

    // classifiers
    #[error("training diverged (non-finite loss at epoch {0})")]
    DivergenceDetected(usize),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),

    // recognition
    #[error("grasp source exhausted")]
    SamplerExhausted,
    #[error("no model for z = {0}")]
    MissingModelForZ(usize),

    // evaluation
    #[error("model was trained without scale normalization")]
    NotNormalizedModel,
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
