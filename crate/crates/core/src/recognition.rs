//! Sequential recognition: evidence from successive grasps of one object is
//! accumulated until a certainty threshold is crossed.
//!
//! [`IcSession`] sums classifier outputs, [`BcSession`] keeps a Bayesian
//! posterior. [`Recognizer`] drives either session from a [`GraspSource`],
//! optionally splitting each physical grasp into z-finger sub-grasps or
//! routing grasps with different finger counts to different models.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::{argmax, ClassDistribution, Classifier};
use crate::error::{Error, Result};
use crate::grasp::Grasp;
use crate::mesh::ContactCandidateSet;
use crate::param::parameterize_as;
use crate::rng::{self, Rng};
use crate::sampling::{binomial, combinations, sample_noisy_grasp, sample_z_combinations, IncompleteGraspPolicy};

pub const DEFAULT_THRESHOLD: f64 = 0.85;
/// Physical grasps tried before giving up.
pub const DEFAULT_MAX_GRASPS: usize = 100;
/// z-finger sub-grasps applied per physical grasp.
pub const DEFAULT_COMBINATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged(usize),
    Continue,
}

impl Status {
    pub fn is_converged(self) -> bool {
        matches!(self, Status::Converged(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcMode {
    /// Only the winning class of each prediction scores.
    ArgmaxOnly,
    /// The whole prediction is added to the score.
    FullAccumulate,
}

/// Iterative classification state.
#[derive(Debug, Clone, PartialEq)]
pub struct IcSession {
    pub s: Vec<f64>,
    pub threshold: f64,
    pub iteration: usize,
    pub mode: IcMode,
}

impl IcSession {
    pub fn new(m: usize, threshold: f64, mode: IcMode) -> Self {
        IcSession {
            s: vec![0.0; m],
            threshold,
            iteration: 0,
            mode,
        }
    }

    pub fn decision(&self) -> usize {
        argmax(&self.s)
    }

    /// `ŝ_max`: the raw leading score after the first update, its share of
    /// the total afterwards.
    pub fn certainty(&self) -> f64 {
        let o = self.decision();
        let total: f64 = self.s.iter().sum();
        match self.iteration {
            0 => 0.0,
            1 => self.s[o],
            _ if total > 0.0 => self.s[o] / total,
            _ => 0.0,
        }
    }

    pub fn normalized(&self) -> Vec<f64> {
        let total: f64 = self.s.iter().sum();
        if total > 0.0 {
            self.s.iter().map(|x| x / total).collect()
        } else {
            vec![1.0 / self.s.len() as f64; self.s.len()]
        }
    }

    pub fn status(&self) -> Status {
        if self.iteration > 0 && self.certainty() > self.threshold {
            Status::Converged(self.decision())
        } else {
            Status::Continue
        }
    }

    pub fn update(&mut self, p: &ClassDistribution) -> Status {
        match self.mode {
            IcMode::ArgmaxOnly => {
                let i = p.argmax();
                self.s[i] += p.probs[i];
            }
            IcMode::FullAccumulate => {
                for (s, p) in self.s.iter_mut().zip(&p.probs) {
                    *s += p;
                }
            }
        }
        self.iteration += 1;
        self.status()
    }
}

pub fn ic_update(session: &mut IcSession, p: &ClassDistribution) -> Status {
    session.update(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// Uniform over the classes.
    Uniform,
    /// Prediction of an auxiliary classifier on the first grasp.
    Initial,
}

/// Bayesian classification state, kept as unnormalized log posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct BcSession {
    pub log_posterior: Vec<f64>,
    pub posterior: ClassDistribution,
    pub threshold: f64,
    pub iteration: usize,
    /// Updates dropped because every class had zero likelihood.
    pub skipped: usize,
    pub prior: PriorKind,
}

impl BcSession {
    pub fn uniform(m: usize, threshold: f64) -> Self {
        BcSession {
            log_posterior: vec![0.0; m],
            posterior: ClassDistribution::uniform(m),
            threshold,
            iteration: 0,
            skipped: 0,
            prior: PriorKind::Uniform,
        }
    }

    pub fn with_prior(prior: &ClassDistribution, threshold: f64) -> Self {
        let log_posterior: Vec<f64> = prior.probs.iter().map(|p| p.ln()).collect();
        BcSession {
            posterior: ClassDistribution::from_log_weights(&log_posterior),
            log_posterior,
            threshold,
            iteration: 0,
            skipped: 0,
            prior: PriorKind::Initial,
        }
    }

    pub fn decision(&self) -> usize {
        self.posterior.argmax()
    }

    pub fn certainty(&self) -> f64 {
        self.posterior.max()
    }

    pub fn status(&self) -> Status {
        if self.iteration > 0 && self.certainty() > self.threshold {
            Status::Converged(self.decision())
        } else {
            Status::Continue
        }
    }

    /// Multiplies the posterior by `exp(log_likelihoods)`. When no class
    /// keeps a representable weight the update is dropped and counted in
    /// `skipped`; the return value is then `None`.
    pub fn update_log(&mut self, log_likelihoods: &[f64]) -> Option<Status> {
        let next: Vec<f64> = self
            .log_posterior
            .iter()
            .zip(log_likelihoods)
            .map(|(a, b)| if b.is_nan() { f64::NEG_INFINITY } else { a + b })
            .collect();
        let max = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            self.skipped += 1;
            return None;
        }
        // rebase so the accumulator stays bounded
        self.log_posterior = next.iter().map(|x| x - max).collect();
        self.posterior = ClassDistribution::from_log_weights(&self.log_posterior);
        self.iteration += 1;
        Some(self.status())
    }
}

/// Bayes update with likelihoods on the linear scale.
pub fn bc_update(session: &mut BcSession, likelihoods: &[f64]) -> Option<Status> {
    let logs: Vec<f64> = likelihoods.iter().map(|l| l.ln()).collect();
    session.update_log(&logs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    Ic(IcMode),
    Bc(PriorKind),
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Ic(IcMode::ArgmaxOnly),
        Method::Ic(IcMode::FullAccumulate),
        Method::Bc(PriorKind::Uniform),
        Method::Bc(PriorKind::Initial),
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ic(IcMode::ArgmaxOnly) => "ic",
            Method::Ic(IcMode::FullAccumulate) => "ic-full",
            Method::Bc(PriorKind::Uniform) => "bc-np",
            Method::Bc(PriorKind::Initial) => "bc-ip",
        })
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?} (expected ic, ic-full, bc-np or bc-ip)")))
    }
}

/// Yields physical grasps; `None` ends the stream.
pub trait GraspSource {
    fn next_grasp(&mut self) -> Result<Option<Grasp>>;
}

impl<F: FnMut() -> Result<Option<Grasp>>> GraspSource for F {
    fn next_grasp(&mut self) -> Result<Option<Grasp>> {
        self()
    }
}

/// Recorded grasps replayed in order.
#[derive(Debug, Clone)]
pub struct GraspStream {
    grasps: std::vec::IntoIter<Grasp>,
}

impl GraspStream {
    pub fn new(grasps: Vec<Grasp>) -> Self {
        GraspStream {
            grasps: grasps.into_iter(),
        }
    }
}

impl GraspSource for GraspStream {
    fn next_grasp(&mut self) -> Result<Option<Grasp>> {
        Ok(self.grasps.next())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fingers {
    Fixed(usize),
    Policy(IncompleteGraspPolicy),
}

/// Endless random grasps of one object.
#[derive(Debug, Clone)]
pub struct ObjectSampler<'a> {
    pub contacts: &'a ContactCandidateSet,
    pub fingers: Fingers,
    pub with_normals: bool,
    pub sigma: f64,
    pub rng: Rng,
}

impl<'a> ObjectSampler<'a> {
    pub fn new(contacts: &'a ContactCandidateSet, n: usize, with_normals: bool, rng: Rng) -> Self {
        ObjectSampler {
            contacts,
            fingers: Fingers::Fixed(n),
            with_normals,
            sigma: 0.0,
            rng,
        }
    }

    pub fn with_policy(mut self, policy: IncompleteGraspPolicy) -> Self {
        self.fingers = Fingers::Policy(policy);
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }
}

impl GraspSource for ObjectSampler<'_> {
    fn next_grasp(&mut self) -> Result<Option<Grasp>> {
        let n = match &self.fingers {
            Fingers::Fixed(n) => *n,
            Fingers::Policy(p) if p.probs.len() == 1 => p.probs[0].0,
            Fingers::Policy(p) => p.draw(&mut self.rng),
        };
        sample_noisy_grasp(self.contacts, n, self.with_normals, self.sigma, &mut self.rng).map(Some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// Prior taken from the auxiliary classifier.
    Prior,
    Update,
    /// Degenerate grasp or all-zero likelihood; the state is unchanged.
    Skipped,
}

/// One line of the recognition trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub kind: RecordKind,
    /// Session update count after this record.
    pub iteration: usize,
    /// 1-based index of the physical grasp.
    pub grasp: usize,
    pub z: usize,
    /// Classifier output: probabilities for IC and for the prior, log
    /// likelihoods for BC. Empty for skipped degenerate grasps.
    pub input: Vec<f64>,
    /// Score vector for IC, posterior for BC.
    pub state: Vec<f64>,
    pub decision: usize,
    pub certainty: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub method: Method,
    pub predicted: usize,
    /// Physical grasps consumed, including one spent on an initial prior.
    pub grasps: usize,
    /// Session updates applied.
    pub updates: usize,
    pub converged: bool,
    pub certainty: f64,
    /// The source ran dry before convergence or the budget.
    pub exhausted: bool,
    pub skipped: usize,
    pub trace: Vec<TraceRecord>,
}

impl RecognitionResult {
    /// The decision standing after each physical grasp, for reading a run
    /// out at a fixed number of samples.
    pub fn decisions_per_grasp(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for r in &self.trace {
            if r.grasp > out.len() {
                let fill = out.last().copied().unwrap_or(r.decision);
                out.resize(r.grasp - 1, fill);
                out.push(r.decision);
            } else {
                out[r.grasp - 1] = r.decision;
            }
        }
        out
    }
}

/// Writes the trace as JSON lines.
pub fn write_trace<W: Write>(trace: &[TraceRecord], mut w: W) -> Result<()> {
    for r in trace {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

enum Session {
    Ic(IcSession),
    Bc(BcSession),
}

impl Session {
    fn decision(&self) -> usize {
        match self {
            Session::Ic(s) => s.decision(),
            Session::Bc(s) => s.decision(),
        }
    }
    fn certainty(&self) -> f64 {
        match self {
            Session::Ic(s) => s.certainty(),
            Session::Bc(s) => s.certainty(),
        }
    }
    fn state(&self) -> Vec<f64> {
        match self {
            Session::Ic(s) => s.s.clone(),
            Session::Bc(s) => s.posterior.probs.clone(),
        }
    }
    fn iteration(&self) -> usize {
        match self {
            Session::Ic(s) => s.iteration,
            Session::Bc(s) => s.iteration,
        }
    }
    fn status(&self) -> Status {
        match self {
            Session::Ic(s) => s.status(),
            Session::Bc(s) => s.status(),
        }
    }
}

/// Runs one recognition: which models to use, how to combine their outputs,
/// and when to stop.
#[derive(Clone, Copy)]
pub struct Recognizer<'a> {
    models: &'a [&'a dyn Classifier],
    prior_model: Option<&'a dyn Classifier>,
    pub method: Method,
    pub threshold: f64,
    pub max_grasps: usize,
    /// `(z, k)`: grasps with more than z fingers are split into k z-finger
    /// sub-grasps, each one update.
    pub split: Option<(usize, usize)>,
}

impl<'a> Recognizer<'a> {
    /// `models` holds one classifier per finger count; each grasp is
    /// routed to the model whose shape has its number of contacts.
    pub fn new(models: &'a [&'a dyn Classifier], method: Method, threshold: f64) -> Result<Self> {
        let first = models
            .first()
            .ok_or_else(|| Error::Config("recognition needs at least one model".into()))?;
        let m = first.classes();
        for (i, h) in models.iter().enumerate() {
            if h.classes() != m {
                return Err(Error::ShapeMismatch(format!(
                    "models disagree on the class count ({} and {})",
                    m,
                    h.classes()
                )));
            }
            if models[..i].iter().any(|g| g.shape().n == h.shape().n) {
                return Err(Error::Config(format!("two models for n = {}", h.shape().n)));
            }
        }
        if !(threshold >= 0.0) {
            return Err(Error::Config(format!("threshold must be >= 0, got {threshold}")));
        }
        Ok(Recognizer {
            models,
            prior_model: None,
            method,
            threshold,
            max_grasps: DEFAULT_MAX_GRASPS,
            split: None,
        })
    }

    pub fn with_prior_model(mut self, h: &'a dyn Classifier) -> Self {
        self.prior_model = Some(h);
        self
    }

    pub fn with_max_grasps(mut self, max: usize) -> Self {
        self.max_grasps = max;
        self
    }

    pub fn with_split(mut self, z: usize, k: usize) -> Self {
        self.split = Some((z, k));
        self
    }

    pub fn classes(&self) -> usize {
        self.models[0].classes()
    }

    fn model_for(&self, z: usize) -> Result<&'a dyn Classifier> {
        self.models
            .iter()
            .find(|h| h.shape().n == z)
            .copied()
            .ok_or(Error::MissingModelForZ(z))
    }

    /// Parameterizes `g` for `h`. `Ok(None)` marks a degenerate grasp.
    fn vector_for(h: &dyn Classifier, g: &Grasp) -> Result<Option<Vec<f64>>> {
        let shape = h.shape();
        let g = match (shape.with_normals, g.with_normals()) {
            (true, false) => {
                return Err(Error::ShapeMismatch(format!("model {shape} needs contact normals")));
            }
            (false, true) => g.without_normals(),
            _ => g.clone(),
        };
        match parameterize_as(&g, shape.normalized) {
            Ok(q) => {
                h.check_shape(&q.shape)?;
                Ok(Some(q.values))
            }
            Err(Error::DegenerateGrasp(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Sub-grasps of one physical grasp that each produce an update.
    fn pieces(&self, g: &Grasp, rng: &mut Rng) -> Result<Vec<Grasp>> {
        match self.split {
            Some((z, k)) if g.n() > z => {
                let k = k.min(binomial(g.n(), z));
                sample_z_combinations(g, z, k, rng)
            }
            _ => Ok(vec![g.clone()]),
        }
    }

    /// Prior from the auxiliary classifier, or `None` when `g` is
    /// degenerate for it.
    fn initial_prior(&self, g: &Grasp) -> Result<Option<(ClassDistribution, usize)>> {
        let h = self
            .prior_model
            .ok_or_else(|| Error::Config("an initial prior needs an auxiliary classifier".into()))?;
        if h.classes() != self.classes() {
            return Err(Error::ShapeMismatch("prior classifier has a different class count".into()));
        }
        let z = h.shape().n;
        let g = if g.n() > z && z >= 3 {
            g.subset(&combinations(g.n(), z)[0])
        } else if g.n() == z {
            g.clone()
        } else {
            return Err(Error::MissingModelForZ(g.n()));
        };
        Ok(Self::vector_for(h, &g)?.map(|q| (h.predict(&q), z)))
    }

    pub fn run(&self, source: &mut dyn GraspSource, rng: &mut Rng) -> Result<RecognitionResult> {
        let m = self.classes();
        let mut session = match self.method {
            Method::Ic(mode) => Session::Ic(IcSession::new(m, self.threshold, mode)),
            Method::Bc(_) => Session::Bc(BcSession::uniform(m, self.threshold)),
        };
        let mut trace = Vec::new();
        let mut grasps = 0;
        let mut skipped = 0;
        let mut exhausted = false;
        let mut need_prior = self.method == Method::Bc(PriorKind::Initial);

        let record = |session: &Session, kind, grasp, z, input: Vec<f64>| TraceRecord {
            kind,
            iteration: session.iteration(),
            grasp,
            z,
            input,
            state: session.state(),
            decision: session.decision(),
            certainty: session.certainty(),
            converged: session.status().is_converged(),
        };

        'grasps: while grasps < self.max_grasps {
            let Some(g) = source.next_grasp()? else {
                exhausted = true;
                break;
            };
            grasps += 1;
            if need_prior {
                match self.initial_prior(&g)? {
                    Some((p, z)) => {
                        session = Session::Bc(BcSession::with_prior(&p, self.threshold));
                        trace.push(record(&session, RecordKind::Prior, grasps, z, p.probs));
                        need_prior = false;
                    }
                    None => {
                        skipped += 1;
                        trace.push(record(&session, RecordKind::Skipped, grasps, g.n(), Vec::new()));
                    }
                }
                continue;
            }
            for piece in self.pieces(&g, rng)? {
                let z = piece.n();
                let h = self.model_for(z)?;
                let Some(q) = Self::vector_for(h, &piece)? else {
                    skipped += 1;
                    trace.push(record(&session, RecordKind::Skipped, grasps, z, Vec::new()));
                    continue;
                };
                let (input, applied) = match &mut session {
                    Session::Ic(s) => {
                        let p = h.predict(&q);
                        s.update(&p);
                        (p.probs, true)
                    }
                    Session::Bc(s) => {
                        let ll = h.log_evidence(&q);
                        let applied = s.update_log(&ll).is_some();
                        (ll, applied)
                    }
                };
                let kind = if applied {
                    RecordKind::Update
                } else {
                    skipped += 1;
                    RecordKind::Skipped
                };
                trace.push(record(&session, kind, grasps, z, input));
                if session.status().is_converged() {
                    break 'grasps;
                }
            }
        }
        if grasps == 0 {
            return Err(Error::SamplerExhausted);
        }
        let status = session.status();
        Ok(RecognitionResult {
            method: self.method,
            predicted: session.decision(),
            grasps,
            updates: session.iteration(),
            converged: status.is_converged(),
            certainty: session.certainty(),
            exhausted,
            skipped,
            trace,
        })
    }
}

/// Iterative classification with one model.
pub fn run_ic<C: Classifier>(
    source: &mut dyn GraspSource,
    h: &C,
    mode: IcMode,
    threshold: f64,
    max_grasps: usize,
) -> Result<RecognitionResult> {
    let models: [&dyn Classifier; 1] = [h];
    Recognizer::new(&models, Method::Ic(mode), threshold)?
        .with_max_grasps(max_grasps)
        .run(source, &mut rng::seeded(0))
}

/// Bayesian classification with one model; `prior` selects the initial
/// prior, uniform when absent.
pub fn run_bc<C: Classifier>(
    source: &mut dyn GraspSource,
    h: &C,
    prior: Option<&dyn Classifier>,
    threshold: f64,
    max_grasps: usize,
) -> Result<RecognitionResult> {
    let models: [&dyn Classifier; 1] = [h];
    let method = Method::Bc(if prior.is_some() {
        PriorKind::Initial
    } else {
        PriorKind::Uniform
    });
    let mut r = Recognizer::new(&models, method, threshold)?.with_max_grasps(max_grasps);
    if let Some(p) = prior {
        r = r.with_prior_model(p);
    }
    r.run(source, &mut rng::seeded(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::Shape;
    use nalgebra::Vector3;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn dist(p: &[f64]) -> ClassDistribution {
        ClassDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn ic_examples() {
        let mut s = IcSession::new(3, 0.85, IcMode::ArgmaxOnly);
        assert_eq!(s.update(&dist(&[0.7, 0.2, 0.1])), Status::Continue);
        assert_eq!(s.s, vec![0.7, 0.0, 0.0]);
        assert_eq!(s.certainty(), 0.7);

        let mut s = IcSession::new(3, 0.85, IcMode::ArgmaxOnly);
        assert_eq!(s.update(&dist(&[0.9, 0.05, 0.05])), Status::Converged(0));

        let mut s = IcSession::new(3, 0.85, IcMode::ArgmaxOnly);
        assert_eq!(s.update(&dist(&[0.6, 0.4, 0.0])), Status::Continue);
        assert_eq!(ic_update(&mut s, &dist(&[0.8, 0.1, 0.1])), Status::Converged(0));
        assert!((s.s[0] - 1.4).abs() < 1e-15);
        assert_eq!(&s.s[1..], &[0.0, 0.0]);
        assert_eq!(s.certainty(), 1.0);
    }

    #[test]
    fn ic_full_accumulate() {
        let mut s = IcSession::new(3, 0.85, IcMode::FullAccumulate);
        s.update(&dist(&[0.6, 0.4, 0.0]));
        s.update(&dist(&[0.2, 0.7, 0.1]));
        assert!((s.s.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert_eq!(s.decision(), 1);
        assert!((s.certainty() - 0.55).abs() < 1e-12);
    }

    #[test]
    fn bc_examples() {
        let mut s = BcSession::uniform(2, 0.85);
        bc_update(&mut s, &[0.8, 0.2]).unwrap();
        assert!((s.posterior.probs[0] - 0.8).abs() < 1e-12);

        let before = s.posterior.clone();
        bc_update(&mut s, &[0.3, 0.3]).unwrap();
        assert!((s.posterior.probs[0] - before.probs[0]).abs() < 1e-12);

        let mut s = BcSession::with_prior(&dist(&[0.8, 0.2]), 0.85);
        assert_eq!(bc_update(&mut s, &[0.2, 0.8]), Some(Status::Continue));
        assert!((s.posterior.probs[0] - 0.5).abs() < 1e-12);
        assert!((s.posterior.probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bc_all_zero_is_skipped() {
        let mut s = BcSession::uniform(3, 0.85);
        bc_update(&mut s, &[0.5, 0.3, 0.2]).unwrap();
        let before = s.clone();
        assert_eq!(s.update_log(&[f64::NEG_INFINITY; 3]), None);
        assert_eq!(s.posterior, before.posterior);
        assert_eq!(s.iteration, 1);
        assert_eq!(s.skipped, 1);
    }

    #[test]
    fn bc_zero_threshold_converges_at_once() {
        let mut s = BcSession::uniform(4, 0.0);
        assert_eq!(bc_update(&mut s, &[1.0; 4]), Some(Status::Converged(0)));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("bc".parse::<Method>().is_err());
    }

    /// Answers from a fixed script, one entry per call.
    struct Scripted {
        n: usize,
        calls: AtomicUsize,
        script: Vec<Vec<f64>>,
    }

    impl Classifier for Scripted {
        fn classes(&self) -> usize {
            self.script[0].len()
        }
        fn shape(&self) -> Shape {
            Shape::spatial(self.n, false, false)
        }
        fn predict(&self, _: &[f64]) -> ClassDistribution {
            let i = self.calls.fetch_add(1, Ordering::SeqCst).min(self.script.len() - 1);
            ClassDistribution::new(self.script[i].clone()).unwrap()
        }
    }

    fn scripted(n: usize, script: Vec<Vec<f64>>) -> Scripted {
        Scripted {
            n,
            calls: AtomicUsize::new(0),
            script,
        }
    }

    fn random_grasps(n: usize, count: usize, seed: u64) -> GraspStream {
        use rand::Rng as _;
        let mut r = rng::seeded(seed);
        GraspStream::new(
            (0..count)
                .map(|_| {
                    let pts = (0..n)
                        .map(|_| Vector3::new(r.random(), r.random(), r.random()))
                        .collect();
                    Grasp::points_only(pts).unwrap()
                })
                .collect(),
        )
    }

    #[test]
    fn oracle_converges_in_one_step() {
        let h = scripted(4, vec![vec![0.0, 1.0, 0.0]]);
        let r = run_ic(&mut random_grasps(4, 10, 1), &h, IcMode::ArgmaxOnly, 0.85, 100).unwrap();
        assert!(r.converged);
        assert_eq!((r.predicted, r.grasps, r.updates), (1, 1, 1));
    }

    #[test]
    fn uniform_never_converges() {
        let h = scripted(3, vec![vec![0.25; 4]]);
        let r = run_ic(&mut random_grasps(3, 200, 2), &h, IcMode::FullAccumulate, 0.85, 100).unwrap();
        assert!(!r.converged && !r.exhausted);
        assert_eq!((r.predicted, r.grasps), (0, 100));
        let r = run_bc(&mut random_grasps(3, 200, 2), &h, None, 0.85, 30).unwrap();
        assert!(!r.converged);
        assert_eq!(r.grasps, 30);
    }

    #[test]
    fn argmax_only_concentrates_a_uniform_classifier() {
        // every vote goes to the tie winner, so the share reaches 1 at once
        let h = scripted(3, vec![vec![0.25; 4]]);
        let r = run_ic(&mut random_grasps(3, 10, 2), &h, IcMode::ArgmaxOnly, 0.85, 100).unwrap();
        assert!(r.converged);
        assert_eq!((r.predicted, r.grasps), (0, 2));
    }

    #[test]
    fn empty_source_is_exhausted() {
        let h = scripted(3, vec![vec![0.5, 0.5]]);
        let err = run_ic(&mut GraspStream::new(Vec::new()), &h, IcMode::ArgmaxOnly, 0.85, 10).unwrap_err();
        assert_eq!(err, Error::SamplerExhausted);
        let r = run_ic(&mut random_grasps(3, 3, 3), &h, IcMode::FullAccumulate, 0.85, 10).unwrap();
        assert!(r.exhausted);
        assert_eq!(r.grasps, 3);
    }

    #[test]
    fn split_exits_early_and_counts_physical_grasps() {
        let h = scripted(3, vec![vec![0.5, 0.5], vec![0.05, 0.95]]);
        let models: [&dyn Classifier; 1] = [&h];
        let r = Recognizer::new(&models, Method::Bc(PriorKind::Uniform), 0.85)
            .unwrap()
            .with_split(3, 4)
            .run(&mut random_grasps(4, 10, 4), &mut rng::seeded(1))
            .unwrap();
        assert!(r.converged);
        assert_eq!((r.grasps, r.updates, r.predicted), (1, 2, 1));

        let h = scripted(3, vec![vec![0.5, 0.5]]);
        let models: [&dyn Classifier; 1] = [&h];
        let r = Recognizer::new(&models, Method::Ic(IcMode::FullAccumulate), 0.85)
            .unwrap()
            .with_split(3, 4)
            .with_max_grasps(3)
            .run(&mut random_grasps(4, 10, 4), &mut rng::seeded(1))
            .unwrap();
        assert_eq!((r.grasps, r.updates), (3, 12));
        assert_eq!(r.trace.iter().filter(|t| t.grasp == 2).count(), 4);
    }

    #[test]
    fn initial_prior_spends_the_first_grasp() {
        let h = scripted(3, vec![vec![0.5, 0.5]]);
        let oracle = scripted(3, vec![vec![0.0, 1.0]]);
        let r = run_bc(&mut random_grasps(3, 10, 5), &h, Some(&oracle), 0.85, 100).unwrap();
        assert_eq!(r.trace[0].kind, RecordKind::Prior);
        assert!(r.converged);
        assert_eq!((r.grasps, r.updates, r.predicted), (2, 1, 1));
    }

    #[test]
    fn missing_model_for_z() {
        let h4 = scripted(4, vec![vec![0.5, 0.5]]);
        let models: [&dyn Classifier; 1] = [&h4];
        let err = Recognizer::new(&models, Method::Ic(IcMode::ArgmaxOnly), 0.85)
            .unwrap()
            .run(&mut random_grasps(3, 5, 6), &mut rng::seeded(1))
            .unwrap_err();
        assert_eq!(err, Error::MissingModelForZ(3));
    }

    #[test]
    fn trace_lines_parse_back() {
        let h = scripted(3, vec![vec![0.6, 0.4], vec![0.9, 0.1]]);
        let r = run_ic(&mut random_grasps(3, 10, 7), &h, IcMode::ArgmaxOnly, 0.85, 100).unwrap();
        let mut buf = Vec::new();
        write_trace(&r.trace, &mut buf).unwrap();
        let lines: Vec<TraceRecord> = std::str::from_utf8(&buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines, r.trace);
        assert_eq!(r.decisions_per_grasp(), vec![0, 0]);
    }
}
