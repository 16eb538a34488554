use std::path::PathBuf;

use xfo_core::lang::{compile, format_diagnostics, has_errors, load_files};

pub const MODELS: [&str; 6] = [
    "trafficlight.xfo",
    "clock-orchestra.xfo",
    "waterdropper-goryeo.xfo",
    "calligraphy.xfo",
    "village-gangjin.xfo",
    "windshield.xfo",
];

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

#[test]
fn every_model_compiles_alone_and_together() {
    let all: Vec<PathBuf> = MODELS.iter().map(|m| models_dir().join(m)).collect();
    for path in &all {
        let (modules, diags) = load_files(std::slice::from_ref(path)).unwrap();
        assert!(!has_errors(&diags), "{}", format_diagnostics(&diags));
        if let Err(d) = compile(&modules) {
            panic!("{}: {}", path.display(), format_diagnostics(&d));
        }
    }
    let (modules, diags) = load_files(&all).unwrap();
    assert!(diags.is_empty(), "{}", format_diagnostics(&diags));
    let compiled = compile(&modules).unwrap_or_else(|d| panic!("{}", format_diagnostics(&d)));
    assert!(compiled.warnings.is_empty(), "{}", format_diagnostics(&compiled.warnings));
}
