#[allow(dead_code)]
#[path = "../../core/tests/common/corpus.rs"]
mod corpus;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use topoforge::analysis::{extract_bar_graph, Canvas};
use topoforge::dataset::format::{read_designs, write_designs};
use topoforge::dataset::Dataset;
use topoforge::image::DesignImage;
use topoforge::scenario::Scenario;

fn topoforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoforge"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = topoforge(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn write_scenario(dir: &Path, name: &str, s: &Scenario) {
    fs::write(dir.join(name), s.to_json().unwrap()).unwrap();
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn help_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--help"]);
    for sub in ["optimize", "dataset", "evaluate", "bench", "count-bars", "losses"] {
        ok(d.path(), &[sub, "--help"]);
    }
}

#[test]
fn optimize_reference_case() {
    let d = tempfile::tempdir().unwrap();
    write_scenario(d.path(), "cantilever.json", &Scenario::cantilever(60, 20, 0.4));
    let out = ok(
        d.path(),
        &["optimize", "--nx", "60", "--ny", "20", "--volfrac", "0.4", "--scenario", "cantilever.json", "--out", "d.tpfg"],
    );
    let s = json(&out);
    assert_eq!(s["converged"], true);
    assert!(s["iterations"].as_u64().unwrap() <= 200);
    assert!((s["volume_fraction"].as_f64().unwrap() - 0.4).abs() <= 1e-3);

    let (first, designs) = read_designs(&d.path().join("d.tpfg")).unwrap();
    assert_eq!((first, designs.len()), (0, 1));
    assert_eq!((designs[0].width(), designs[0].height()), (61, 21));

    let trace = fs::read_to_string(d.path().join("d.tpfg.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,compliance,volfrac,change"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len() as u64, s["iterations"].as_u64().unwrap());
    assert!(rows.last().unwrap()[3] <= 0.01);
}

#[test]
fn optimize_error_codes() {
    let d = tempfile::tempdir().unwrap();
    let missing = topoforge(d.path(), &["optimize", "--out", "d.tpfg"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("Usage"));

    let mut free = Scenario::cantilever(8, 4, 0.4);
    free.fixed_nodes.clear();
    write_scenario(d.path(), "free.json", &free);
    let singular = topoforge(d.path(), &["optimize", "--scenario", "free.json", "--out", "f.tpfg"]);
    assert_eq!(singular.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&singular.stderr).contains("solve"));

    write_scenario(d.path(), "c.json", &Scenario::cantilever(8, 4, 0.4));
    let clash = topoforge(d.path(), &["optimize", "--scenario", "c.json", "--nx", "9", "--out", "c.tpfg"]);
    assert_eq!(clash.status.code(), Some(2));
    let bad_vf = topoforge(d.path(), &["optimize", "--cantilever", "--volfrac", "1.5", "--out", "c.tpfg"]);
    assert_eq!(bad_vf.status.code(), Some(2));

    let threads = Command::new(env!("CARGO_BIN_EXE_topoforge"))
        .args(["bench", "--nx", "4", "--ny", "4", "--sizes", "1"])
        .env("TOPOFORGE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

const DS: [&str; 6] = ["--nx", "24", "--ny", "24", "--shard-size", "2"];

fn dataset(dir: &Path, split: &str, n: &str, seed: &str) -> Value {
    let mut args = vec!["dataset", "--split", split, "--n", n, "--seed", seed, "--out", "ds", "--check-draws", "2000"];
    args.extend(DS);
    json(&ok(dir, &args))
}

#[test]
fn dataset_is_reproducible_and_evaluates_against_itself() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let s = dataset(a.path(), "validation", "3", "7");
    dataset(b.path(), "validation", "3", "7");
    assert_eq!(s["records"], 3);
    assert!(s["ks_volfrac"].as_f64().is_some());
    let (da, db) = (a.path().join("ds/validation"), b.path().join("ds/validation"));
    assert_eq!(tree(&da), tree(&db));
    let m: Value = serde_json::from_slice(&fs::read(da.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["record_count"], 3);

    // stored designs against themselves
    let out = json(&ok(a.path(), &["evaluate", "--records", "ds/validation", "--out", "self"]));
    for group in ["complexity", "volume"] {
        for (col, rate) in out[group].as_object().unwrap() {
            assert_eq!(rate.as_f64(), Some(1.0), "{group} {col}");
        }
    }
    for col in ["≤2.5%", "≤5%", "≤7.5%", "≤10%"] {
        assert_eq!(out["compliance"][col].as_f64(), Some(1.0), "{col}");
    }
    assert_eq!(out["mse"].as_f64(), Some(0.0));
    assert_eq!(out["monotone"], true);

    let csv = fs::read_to_string(a.path().join("self/report.csv")).unwrap();
    let columns: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(
        &columns[..7],
        ["Cx_g≤Cx_i", "≤+1bar", "≤+2bars", "V_g≤V_i", "≤2.5%", "≤5%", "≤10%"]
    );

    // candidates from a design file: one extra bar each, plus one with no record
    let ds = Dataset::open(&da).unwrap();
    let mut candidates = Vec::new();
    for k in 0..ds.len() as u64 {
        let r = ds.read_record(k).unwrap();
        candidates.push(with_extra_bar(&r.design, &r.scenario));
    }
    candidates.push(DesignImage::filled(25, 25, 1.0));
    write_designs(&a.path().join("extra.tpfg"), 0, &candidates).unwrap();
    let out = json(&ok(
        a.path(),
        &["evaluate", "--records", "ds/validation", "--designs", "extra.tpfg", "--out", "extra", "--format", "json"],
    ));
    assert_eq!(out["complexity"]["Cx_g≤Cx_i"].as_f64(), Some(0.0));
    assert_eq!(out["complexity"]["≤+1bar"].as_f64(), Some(1.0));
    assert_eq!(out["unpaired"].as_array().unwrap().len(), 1);
    assert_eq!(out["unpaired"][0]["index"], 3);
    assert!(a.path().join("extra/summary.json").exists());
    assert!(!a.path().join("extra/report.csv").exists());
}

/// The design with one short free-standing stroke added where it adds
/// exactly one bar.
fn with_extra_bar(design: &DesignImage, scenario: &Scenario) -> DesignImage {
    let base = extract_bar_graph(design, scenario).total();
    let (w, h) = (design.width(), design.height());
    for y in 1..h - 1 {
        for x0 in 0..w.saturating_sub(8) {
            let mut c = Canvas::new(w, h);
            c.segment((x0 as f64, y as f64), ((x0 + 7) as f64, y as f64), 2.0);
            let stroke = c.to_image();
            if stroke.values().iter().zip(design.values()).any(|(s, v)| *s > 0.0 && *v >= 0.2) {
                continue;
            }
            let v = stroke.values().iter().zip(design.values()).map(|(s, v)| s.max(*v)).collect();
            let cand = DesignImage::new(w, h, v).unwrap();
            if extract_bar_graph(&cand, scenario).total() == base + 1 {
                return cand;
            }
        }
    }
    panic!("no spot for an extra bar");
}

#[test]
fn test_split_records_have_interior_loads() {
    let d = tempfile::tempdir().unwrap();
    dataset(d.path(), "test", "2", "500");
    let ds = Dataset::open(d.path().join("ds/test")).unwrap();
    for k in 0..ds.len() as u64 {
        let s = ds.read_record(k).unwrap().scenario;
        let interior = s.loads.iter().any(|l| l.i > 0 && l.i < s.nx && l.j > 0 && l.j < s.ny);
        assert!(interior, "record {k} has only boundary loads");
    }
}

#[test]
fn count_bars_fixtures() {
    let d = tempfile::tempdir().unwrap();
    for (case, want) in [
        (corpus::single_bar(), (0, 1, 0)),
        (corpus::plus_sign(), (0, 0, 4)),
        (corpus::reference_truss(), (5, 2, 6)),
    ] {
        write_designs(&d.path().join("x.tpfg"), 0, &[case.design.clone()]).unwrap();
        write_scenario(d.path(), "s.json", &case.scenario);
        let out = ok(d.path(), &["count-bars", "--design", "x.tpfg", "--scenario", "s.json", "--out", "bars.json"]);
        let total = want.0 + want.1 + want.2;
        assert_eq!(
            out.trim(),
            format!("clamped {} loaded {} internal {} total {total}", want.0, want.1, want.2),
            "{}",
            case.name
        );
        let g = json(&fs::read_to_string(d.path().join("bars.json")).unwrap());
        assert_eq!(g["bars"].as_array().unwrap().len(), total);
    }
    let unreadable = topoforge(d.path(), &["count-bars", "--design", "none.tpfg", "--scenario", "s.json"]);
    assert_eq!(unreadable.status.code(), Some(2));
    let beyond = topoforge(d.path(), &["count-bars", "--design", "x.tpfg", "--index", "1", "--scenario", "s.json"]);
    assert_eq!(beyond.status.code(), Some(2));
}

#[test]
fn losses_from_json_batch() {
    let d = tempfile::tempdir().unwrap();
    let batch = serde_json::json!({
        "designs": [[1.0, 1.0], [0.0, 1.0]],
        "predicted": [[0.0, 0.0], [0.0, 1.0]],
        "disc_fake": [0.5, 0.5],
        "disc_real": [0.5, 0.5],
        "counts": [4.0, 4.0],
        "predicted_counts": [5.0, 3.0],
        "counter_accuracy": 0.9,
    });
    fs::write(d.path().join("b.json"), batch.to_string()).unwrap();
    let out = json(&ok(d.path(), &["losses", "--batch", "b.json"]));
    let g = &out["generator"];
    assert_eq!(g["reconstruction"].as_f64(), Some(0.5));
    assert_eq!(g["counting"].as_f64(), Some(0.5));
    assert_eq!(g["adversarial"].as_f64(), Some(0.5f64.ln()));
    let want = 0.5 + 0.01 * 0.5f64.ln() + 0.1 * 0.9 * 0.5;
    assert!((g["total"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(out["discriminator"].as_f64(), Some(-2.0 * 0.5f64.ln()));
    assert_eq!(out["counter_accuracy"]["exact"].as_f64(), Some(0.0));
    assert_eq!(out["counter_accuracy"]["within_1"].as_f64(), Some(1.0));

    fs::write(d.path().join("bad.json"), r#"{"designs": [[1.0]], "predicted": [[1.0]], "disc_fake": [2.0], "counts": [1], "predicted_counts": [1], "counter_accuracy": 1}"#).unwrap();
    assert_eq!(topoforge(d.path(), &["losses", "--batch", "bad.json"]).status.code(), Some(2));
}

#[test]
fn bench_reports_positive_times() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["bench", "--nx", "16", "--ny", "16", "--sizes", "1,3", "--out", "bench.csv"]);
    assert_eq!(out, fs::read_to_string(d.path().join("bench.csv")).unwrap());
    let rows: Vec<Vec<&str>> = out.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().any(|r| r[0] == "1" && r[1] == "per_design"));
    for r in &rows {
        let per: f64 = r[3].parse().unwrap();
        assert!(per.is_finite() && per > 0.0);
    }
    assert!(out.lines().last().unwrap().contains("1.13"));
}
