//! Dataset files: `# key: value` manifest lines followed by a CSV table
//! `label,q1,...,qw`.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::param::{Dimensionality, Shape};
use crate::sampling::{DatasetMeta, LabeledDataset};

pub const FORMAT_VERSION: u32 = 1;

pub fn write_dataset<W: Write>(ds: &LabeledDataset, mut w: W) -> Result<()> {
    let s = ds.meta.shape;
    writeln!(w, "# graspid-dataset: {FORMAT_VERSION}")?;
    writeln!(w, "# classes: {}", ds.class_names.join(","))?;
    writeln!(w, "# n: {}", s.n)?;
    writeln!(w, "# with_normals: {}", s.with_normals)?;
    writeln!(w, "# normalized: {}", s.normalized)?;
    writeln!(w, "# dimensionality: {}", s.dimensionality)?;
    writeln!(w, "# sigma: {}", ds.meta.sigma)?;
    writeln!(w, "# seed: {}", ds.meta.seed)?;
    writeln!(w, "# per_class: {}", ds.meta.per_class)?;
    let counts: Vec<String> = ds.class_counts().iter().map(|c| c.to_string()).collect();
    writeln!(w, "# counts: {}", counts.join(","))?;
    let header: Vec<String> = (1..=s.dim()).map(|i| format!("q{i}")).collect();
    writeln!(w, "label,{}", header.join(","))?;
    let mut line = String::new();
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        line.clear();
        line.push_str(&label.to_string());
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn save_dataset(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_dataset(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<LabeledDataset> {
    let mut manifest = std::collections::BTreeMap::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut seen_header = false;
    let mut width = 0;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let ln = i + 1;
        if let Some(kv) = line.strip_prefix('#') {
            let (k, v) = kv
                .split_once(':')
                .ok_or_else(|| parse_err(ln, "manifest line without ':'"))?;
            manifest.insert(k.trim().to_string(), v.trim().to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            width = line.split(',').count() - 1;
            seen_header = true;
            continue;
        }
        let mut it = line.split(',');
        let label: usize = it
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| parse_err(ln, "bad label"))?;
        let row = it
            .map(|t| t.trim().parse::<f64>().map_err(|_| parse_err(ln, format!("bad value {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(parse_err(ln, format!("expected {width} values, got {}", row.len())));
        }
        labels.push(label);
        rows.push(row);
    }

    let get = |k: &str| {
        manifest
            .get(k)
            .ok_or_else(|| parse_err(0, format!("manifest is missing {k:?}")))
    };
    let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| parse_err(0, format!("bad {k}"))) };
    let flag = |k: &str| -> Result<bool> { get(k)?.parse().map_err(|_| parse_err(0, format!("bad {k}"))) };
    let version = num("graspid-dataset")?;
    if version != FORMAT_VERSION as u64 {
        return Err(parse_err(0, format!("unsupported dataset version {version}")));
    }
    let dimensionality: Dimensionality = get("dimensionality")?.parse()?;
    let shape = Shape {
        n: num("n")? as usize,
        with_normals: flag("with_normals")?,
        normalized: flag("normalized")?,
        dimensionality,
    };
    let ds = LabeledDataset {
        rows,
        labels,
        class_names: get("classes")?.split(',').map(|s| s.trim().to_string()).collect(),
        meta: DatasetMeta {
            shape,
            sigma: get("sigma")?.parse().map_err(|_| parse_err(0, "bad sigma"))?,
            seed: num("seed")?,
            per_class: num("per_class")? as usize,
        },
    };
    if seen_header && width != shape.dim() {
        return Err(Error::ShapeMismatch(format!("table has {width} columns, {shape} needs {}", shape.dim())));
    }
    ds.check()?;
    let counts: Vec<usize> = get("counts")?
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| parse_err(0, "bad counts")))
        .collect::<Result<_>>()?;
    if counts != ds.class_counts() {
        return Err(Error::ShapeMismatch(format!(
            "manifest counts {counts:?} disagree with table {:?}",
            ds.class_counts()
        )));
    }
    Ok(ds)
}

pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    let f = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(f))
}
