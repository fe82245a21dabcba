use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graspid::commands::GraspLine;
use graspid_core::classify::{load_model, Classifier, KdeModel, Model};
use graspid_core::dataset::load_dataset;
use graspid_core::mesh::{generate_primitive, load_mesh_file, PrimitiveSpec};
use graspid_core::rng;
use graspid_core::sampling::sample_grasp;
use sha2::{Digest, Sha256};

const CONFIG: &str = r#"seed = 5
[[objects]]
name = "box"
primitive = "box"
dims = [1.0, 0.7, 0.5]
[[objects]]
name = "ball"
primitive = "sphere"
dims = [0.4]
[[objects]]
name = "can"
primitive = "cylinder"
dims = [0.3, 0.8]
[data]
per_class = 100
[evaluation]
trials = 10
"#;

fn graspid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graspid"))
        .args(args)
        .output()
        .expect("run graspid")
}

fn ok(args: &[&str]) -> Output {
    let out = graspid(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn setup(extra: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("{CONFIG}{extra}")).unwrap();
    (dir, cfg)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn digest(p: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(p).unwrap()).to_vec()
}

#[test]
fn gen_data_is_reproducible_across_workers() {
    let (dir, cfg) = setup("");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["--workers", "1", "gen-data", "--config", s(&cfg), "--out", s(&a)]);
    ok(&["--workers", "3", "gen-data", "--config", s(&cfg), "--out", s(&b)]);
    assert_eq!(digest(&a), digest(&b));
    let ds = load_dataset(&a).unwrap();
    assert_eq!(ds.len(), 300);
    assert_eq!(ds.class_counts(), vec![100; 3]);
    assert_eq!(ds.shape().dim(), 14);
}

#[test]
fn missing_mesh_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 1\n[[objects]]\nname = \"a\"\nmesh = \"nowhere.obj\"\n[[objects]]\nname = \"b\"\nprimitive = \"box\"\n",
    )
    .unwrap();
    let out = graspid(&["gen-data", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.obj"));
}

#[test]
fn trained_model_matches_a_direct_fit() {
    let (dir, cfg) = setup("");
    ok(&["gen-data", "--config", s(&cfg)]);
    ok(&["train", "--config", s(&cfg)]);
    let ds = load_dataset(&dir.path().join("dataset.csv")).unwrap();
    let direct = KdeModel::fit(&ds, None).unwrap();
    let loaded = load_model(&dir.path().join("model.bin")).unwrap();
    assert_eq!(loaded, Model::Kde(direct.clone()));
    for row in ds.rows.iter().step_by(17) {
        let a = direct.predict(row).probs;
        let b = loaded.predict(row).probs;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

fn write_stream(path: &Path, normals: bool) {
    let cube = generate_primitive(&PrimitiveSpec::cuboid(1.0, 0.7, 0.5, 8)).unwrap();
    let contacts = cube.to_contacts().unwrap();
    let mut text = String::new();
    for i in 0..5 {
        let mut r = rng::stream(9, &[i]);
        let g = sample_grasp(&contacts, 4, normals, &mut r).unwrap();
        text.push_str(&serde_json::to_string(&GraspLine::from_grasp(&g)).unwrap());
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn recognize_a_recorded_stream() {
    let (dir, cfg) = setup("");
    ok(&["gen-data", "--config", s(&cfg)]);
    ok(&["train", "--config", s(&cfg)]);
    let stream = dir.path().join("grasps.jsonl");
    write_stream(&stream, true);
    let out = dir.path().join("result.json");
    let trace = dir.path().join("trace.jsonl");
    let run = graspid(&[
        "recognize",
        "--config",
        s(&cfg),
        "--grasps",
        s(&stream),
        "--out",
        s(&out),
        "--trace",
        s(&trace),
    ]);
    let code = run.status.code().unwrap();
    assert!(code == 0 || code == 4, "{}", String::from_utf8_lossy(&run.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["converged"].as_bool().unwrap(), code == 0);
    assert!(v["grasps"].as_u64().unwrap() <= 5);
    assert_eq!(v["class_names"].as_array().unwrap().len(), 3);
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().count() >= 1);
    for line in lines.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }

    let bare = dir.path().join("bare.jsonl");
    write_stream(&bare, false);
    let run = graspid(&["recognize", "--config", s(&cfg), "--grasps", s(&bare)]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn evaluate_writes_a_report_per_method() {
    let (dir, cfg) = setup("methods = [\"ic\", \"bc-np\"]\n");
    ok(&["gen-data", "--config", s(&cfg)]);
    ok(&["train", "--config", s(&cfg)]);
    ok(&["evaluate", "--config", s(&cfg)]);
    let reports = dir.path().join("reports");
    for m in ["ic", "bc-np"] {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(reports.join(format!("{m}.json"))).unwrap()).unwrap();
        assert_eq!(v["method"], m);
        assert_eq!(v["seed"], 5);
        assert_eq!(v["objects"].as_array().unwrap().len(), 3);
        let rows = std::fs::read_to_string(reports.join(format!("{m}_trials.csv"))).unwrap();
        assert_eq!(rows.lines().count(), 1 + 30);
    }
}

#[test]
fn primitives_writes_a_loadable_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("can.obj");
    ok(&["primitives", "--kind", "cylinder", "--dims", "0.3,0.8", "--out", s(&out)]);
    let mesh = load_mesh_file(&out).unwrap();
    let v = mesh.volume().unwrap();
    assert!((v - std::f64::consts::PI * 0.09 * 0.8).abs() / v < 0.01);
}
