use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use graspid::commands::{self, PrimitiveRequest, Query};
use graspid::{emit, CliError, CliResult, RunConfig, EXIT_NOT_CONVERGED};
use graspid_core::mesh::PrimitiveKind;

#[derive(Parser)]
#[command(name = "graspid", version, about = "Object recognition from sequences of grasps")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample labeled grasp vectors from the configured objects.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset path, overriding data.path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the configured classifier to a dataset.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Model path, overriding model.path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recognize one object from self-played or recorded grasps.
    Recognize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Mesh to grasp.
        #[arg(long, group = "query")]
        mesh: Option<PathBuf>,
        /// Configured object to grasp.
        #[arg(long, group = "query")]
        object: Option<String>,
        /// JSON-lines file of recorded grasps.
        #[arg(long, group = "query")]
        grasps: Option<PathBuf>,
        /// Result JSON; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-update trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run recognition trials and write reports.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory, overriding evaluation.report_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a primitive mesh or randomly stretched variations of it.
    Primitives {
        #[arg(long, value_parser = parse_kind)]
        kind: PrimitiveKind,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<f64>,
        #[arg(long)]
        resolution: Option<u32>,
        #[arg(long, default_value_t = 0)]
        variations: usize,
        #[arg(long, default_value_t = 0.5)]
        min_factor: f64,
        #[arg(long, default_value_t = 1.5)]
        max_factor: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// .obj or .off
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlate grasp-polyhedron volume with classifier certainty.
    Quality {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        per_object: usize,
        /// Per-sample CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<PrimitiveKind, String> {
    match s {
        "box" => Ok(PrimitiveKind::Box),
        "sphere" => Ok(PrimitiveKind::Sphere),
        "cylinder" => Ok(PrimitiveKind::Cylinder),
        _ => Err(format!("unknown primitive {s:?} (box, sphere, cylinder)")),
    }
}

fn load(path: &Path, seed: Option<u64>, workers: &mut Option<usize>) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if workers.is_none() {
        *workers = cfg.workers;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<i32> {
    let mut workers = cli.workers;
    let cmd = cli.command;
    let cfg = match &cmd {
        Command::GenData { config, seed, .. }
        | Command::Recognize { config, seed, .. }
        | Command::Evaluate { config, seed, .. }
        | Command::Quality { config, seed, .. } => Some(load(config, *seed, &mut workers)?),
        Command::Train { config, .. } => Some(load(config, None, &mut workers)?),
        Command::Primitives { .. } => None,
    };
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Validation("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let cfg = cfg.as_ref();
    match cmd {
        Command::GenData { out, .. } => {
            let p = commands::gen_data(cfg.expect("loaded"), out.as_deref())?;
            emit(&p.display().to_string());
        }
        Command::Train { data, out, .. } => {
            let p = commands::train(cfg.expect("loaded"), data.as_deref(), out.as_deref())?;
            emit(&p.display().to_string());
        }
        Command::Recognize {
            model,
            mesh,
            object,
            grasps,
            out,
            trace,
            ..
        } => {
            let query = match (&mesh, &object, &grasps) {
                (Some(m), _, _) => Query::Mesh(m),
                (_, Some(o), _) => Query::Object(o),
                (_, _, Some(g)) => Query::Stream(g),
                _ => return Err(CliError::Validation("give one of --mesh, --object or --grasps".into())),
            };
            let r = commands::recognize(cfg.expect("loaded"), query, model.as_deref())?;
            commands::write_recognition(&r, out.as_deref(), trace.as_deref())?;
            if !r.result.converged {
                return Ok(EXIT_NOT_CONVERGED);
            }
        }
        Command::Evaluate { out, .. } => {
            for p in commands::evaluate(cfg.expect("loaded"), out.as_deref())? {
                emit(&p.display().to_string());
            }
        }
        Command::Primitives {
            kind,
            dims,
            resolution,
            variations,
            min_factor,
            max_factor,
            seed,
            out,
        } => {
            let req = PrimitiveRequest {
                kind,
                dims,
                resolution,
                variations,
                range: (min_factor, max_factor),
                seed,
            };
            for p in commands::primitives(&req, &out)? {
                emit(&p.display().to_string());
            }
        }
        Command::Quality { per_object, out, .. } => {
            let r = commands::quality(cfg.expect("loaded"), per_object, out.as_deref())?;
            emit(&serde_json::to_string_pretty(&r).expect("serializable"));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("graspid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
