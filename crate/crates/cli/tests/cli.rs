use std::path::PathBuf;
use std::process::{Command, Output};

const MODELS: [&str; 6] = [
    "trafficlight.xfo",
    "clock-orchestra.xfo",
    "waterdropper-goryeo.xfo",
    "calligraphy.xfo",
    "village-gangjin.xfo",
    "windshield.xfo",
];

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).display().to_string()
}

fn xfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xfo")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn every_model_validates_silently() {
    for m in MODELS {
        let o = xfo(&["validate", &model(m)]);
        assert_eq!(o.status.code(), Some(0), "{m}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{m}");
    }
}

#[test]
fn broken_model_exits_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.xfo");
    std::fs::write(&path, "object Lamp { quality hue : nowhere }\n").unwrap();
    let o = xfo(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("bad.xfo"));
    assert_eq!(xfo(&["compile", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let o = xfo(&["compile"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(xfo(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(xfo(&["metrics", &model("trafficlight.xfo")]).status.code(), Some(2));
    let light = model("trafficlight.xfo");
    assert_eq!(xfo(&["run", &light, "--world", "demo", "--chain", "cycle", "--bind", "light"]).status.code(), Some(2));
    assert_eq!(xfo(&["expand", "--root", "no way"]).status.code(), Some(2));
    assert_eq!(xfo(&["--help"]).status.code(), Some(0));
}

#[test]
fn compile_prints_a_stable_fingerprint() {
    let a = xfo(&["compile", &model("trafficlight.xfo")]);
    let b = xfo(&["compile", &model("trafficlight.xfo")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a).trim().len(), 16);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cycle_trace_ends_green() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("out.ndjson");
    let o = xfo(&[
        "run",
        &model("trafficlight.xfo"),
        "--world",
        "demo",
        "--chain",
        "cycle",
        "--ticks",
        "10",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("end\tcompleted"));
    let text = std::fs::read_to_string(&trace).unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["edits"][1], "create color(light1, green)");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for i in 0..3 {
        let trace = dir.path().join(format!("t{i}.ndjson"));
        let o = xfo(&[
            "run",
            &model("trafficlight.xfo"),
            "--world",
            "demo",
            "--chain",
            "cycle",
            "--seed",
            "42",
            "--trace",
            trace.to_str().unwrap(),
        ]);
        seen.push((o.stdout, std::fs::read(&trace).unwrap()));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn tight_budget_keeps_the_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.ndjson");
    let light = model("trafficlight.xfo");
    let o = xfo(&[
        "run",
        &light,
        "--world",
        "demo",
        "--chain",
        "cycle",
        "--ticks",
        "2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 3);
    assert_eq!(xfo(&["run", &light, "--world", "nowhere"]).status.code(), Some(1));
}

#[test]
fn equiv_reports_both_verdicts() {
    let light = model("trafficlight.xfo");
    let o = xfo(&["equiv", &light, "--a", "green_first", "--b", "green_reordered", "--space", "demo:light1.color"]);
    assert_eq!(stdout(&o), "equivalent\t3 states\n");
    let o = xfo(&[
        "equiv",
        &light,
        "--a",
        "green_first",
        "--b",
        "yellow_only",
        "--space",
        "demo:light1.color=red|yellow|green",
    ]);
    assert!(stdout(&o).starts_with("counterexample\tlight1.color=red\n"));
    let o = xfo(&["equiv", &light, "--a", "cycle", "--b", "cycle", "--space", "demo:light1.color", "--bound", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn metrics_are_tab_separated() {
    let o = xfo(&[
        "metrics",
        &model("waterdropper-goryeo.xfo"),
        &model("village-gangjin.xfo"),
        "--specificity",
        "CeladonDropper",
        "--exhaustivity",
        "glaze,moisture,YangbanCalligrapher",
    ]);
    assert_eq!(stdout(&o), "specificity\tCeladonDropper\t3\nexhaustivity\tglaze,moisture,YangbanCalligrapher\t2\n");
    let o = xfo(&["metrics", &model("trafficlight.xfo"), "--orthogonality", "trafficlight", "trafficlight"]);
    assert_eq!(stdout(&o), "orthogonality\ttrafficlight trafficlight\t0\n");
    let o = xfo(&["metrics", &model("trafficlight.xfo"), "--specificity", "Teapot"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inus_reads_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fire.field");
    std::fs::write(
        &path,
        "outcome fire\nconditions short_circuit flammable_material arson\nsufficient short_circuit flammable_material\nsufficient arson\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let o = xfo(&["inus", p, "--condition", "short_circuit"]);
    assert_eq!(stdout(&o), "inus\tfire\tshort_circuit\ttrue\tflammable_material,short_circuit\n");
    let o = xfo(&["inus", p, "--condition", "arson"]);
    assert_eq!(stdout(&o), "inus\tfire\tarson\tfalse\t-\n");
    assert_eq!(xfo(&["inus", p, "--condition", "comet"]).status.code(), Some(1));
}

#[test]
fn expanded_family_validates() {
    let o = xfo(&["expand", "--root", "brew"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("brewing.xfo");
    std::fs::write(&path, &o.stdout).unwrap();
    let v = xfo(&["validate", path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(v.stdout.is_empty());
}
