//! Model files: a UTF-8 header of `key: value` lines closed by
//! `end_header`, then the parameters as little-endian f64.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{ClassDistribution, Classifier, KdeModel, KnnModel, MlpModel};
use crate::error::{Error, Result};
use crate::param::{Dimensionality, Shape};

pub const MODEL_VERSION: u32 = 1;
const MAGIC: &str = "graspid-model";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Kde,
    Knn,
    Mlp,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Kde => "kde",
            ModelKind::Knn => "knn",
            ModelKind::Mlp => "mlp",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kde" => Ok(ModelKind::Kde),
            "knn" => Ok(ModelKind::Knn),
            "mlp" => Ok(ModelKind::Mlp),
            _ => Err(Error::Config(format!("unknown model kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Kde(KdeModel),
    Knn(KnnModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Kde(_) => ModelKind::Kde,
            Model::Knn(_) => ModelKind::Knn,
            Model::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn class_names(&self) -> &[String] {
        match self {
            Model::Kde(m) => &m.class_names,
            Model::Knn(m) => &m.class_names,
            Model::Mlp(m) => &m.class_names,
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Kde(m) => m,
            Model::Knn(m) => m,
            Model::Mlp(m) => m,
        }
    }
}

impl Classifier for Model {
    fn classes(&self) -> usize {
        self.inner().classes()
    }
    fn shape(&self) -> Shape {
        self.inner().shape()
    }
    fn predict(&self, q: &[f64]) -> ClassDistribution {
        self.inner().predict(q)
    }
    fn log_evidence(&self, q: &[f64]) -> Vec<f64> {
        self.inner().log_evidence(q)
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_model<W: Write>(model: &Model, mut w: W) -> Result<()> {
    let shape = model.shape();
    let mut header: Vec<(&str, String)> = vec![
        ("version", MODEL_VERSION.to_string()),
        ("kind", model.kind().to_string()),
        ("classes", model.class_names().join(",")),
        ("n", shape.n.to_string()),
        ("with_normals", shape.with_normals.to_string()),
        ("normalized", shape.normalized.to_string()),
        ("dimensionality", shape.dimensionality.to_string()),
    ];
    let mut payload: Vec<f64> = Vec::new();
    match model {
        Model::Kde(m) => {
            header.push(("sigma", m.sigma.to_string()));
            let counts: Vec<usize> = (0..m.data.len()).map(|t| m.class_count(t)).collect();
            header.push(("counts", join(&counts)));
            for d in &m.data {
                payload.extend(d);
            }
        }
        Model::Knn(m) => {
            header.push(("k", m.k.to_string()));
            header.push(("rows", m.labels.len().to_string()));
            payload.extend(m.labels.iter().map(|&l| l as f64));
            payload.extend(&m.data);
        }
        Model::Mlp(m) => {
            header.push(("layers", join(&m.sizes)));
            payload.extend(&m.mean);
            payload.extend(&m.inv_std);
            payload.extend(&m.params);
        }
    }
    header.push(("payload", payload.len().to_string()));
    writeln!(w, "{MAGIC}")?;
    for (k, v) in header {
        writeln!(w, "{k}: {v}")?;
    }
    writeln!(w, "end_header")?;
    for x in payload {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidModel(msg.into())
}

pub fn read_model<R: BufRead>(mut r: R) -> Result<Model> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(bad("not a model file"));
    }
    let mut h = BTreeMap::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("header is not terminated"));
        }
        let t = line.trim_end();
        if t == "end_header" {
            break;
        }
        let (k, v) = t.split_once(':').ok_or_else(|| bad(format!("bad header line {t:?}")))?;
        h.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| h.get(k).ok_or_else(|| bad(format!("header is missing {k:?}")));
    let parse = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(format!("bad {k}"))) };
    let list = |k: &str| -> Result<Vec<usize>> {
        get(k)?
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad(format!("bad {k}"))))
            .collect()
    };
    let version = parse("version")?;
    if version != MODEL_VERSION as u64 {
        return Err(bad(format!("unsupported model version {version}")));
    }
    let kind: ModelKind = get("kind")?.parse()?;
    let dimensionality: Dimensionality = get("dimensionality")?.parse()?;
    let flag = |k: &str| -> Result<bool> { get(k)?.parse().map_err(|_| bad(format!("bad {k}"))) };
    let shape = Shape {
        n: parse("n")? as usize,
        with_normals: flag("with_normals")?,
        normalized: flag("normalized")?,
        dimensionality,
    };
    let class_names: Vec<String> = get("classes")?.split(',').map(str::to_string).collect();
    let len = parse("payload")? as usize;
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes).map_err(|_| bad("payload is truncated"))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(bad("trailing bytes after payload"));
    }
    let payload: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let w = shape.dim();
    match kind {
        ModelKind::Kde => {
            let sigma: f64 = get("sigma")?.parse().map_err(|_| bad("bad sigma"))?;
            let counts = list("counts")?;
            if counts.iter().sum::<usize>() * w != payload.len() {
                return Err(bad("payload does not match the class counts"));
            }
            let mut data = Vec::new();
            let mut off = 0;
            for c in counts {
                data.push(payload[off..off + c * w].to_vec());
                off += c * w;
            }
            Ok(Model::Kde(KdeModel::new(shape, class_names, sigma, data)?))
        }
        ModelKind::Knn => {
            let k = parse("k")? as usize;
            let rows = parse("rows")? as usize;
            if rows * (w + 1) != payload.len() {
                return Err(bad("payload does not match the row count"));
            }
            let labels = payload[..rows]
                .iter()
                .map(|&l| {
                    if l >= 0.0 && l.fract() == 0.0 {
                        Ok(l as usize)
                    } else {
                        Err(bad("bad label"))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Model::Knn(KnnModel::new(shape, class_names, k, payload[rows..].to_vec(), labels)?))
        }
        ModelKind::Mlp => {
            let sizes = list("layers")?;
            let w0 = *sizes.first().ok_or_else(|| bad("no layers"))?;
            if payload.len() < 2 * w0 {
                return Err(bad("payload is too short"));
            }
            Ok(Model::Mlp(MlpModel::new(
                shape,
                class_names,
                sizes,
                payload[2 * w0..].to_vec(),
                payload[..w0].to_vec(),
                payload[w0..2 * w0].to_vec(),
            )?))
        }
    }
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    read_model(std::io::BufReader::new(std::fs::File::open(path)?))
}
