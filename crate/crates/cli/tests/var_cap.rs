//! Sets the process environment, so it runs as its own test binary.

mod common;

use std::path::Path;

use common::run;

fn politics(dir: &Path, quantize: bool) -> String {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/politics.toml");
    let out = dir.to_str().unwrap();
    run(&["synth", "--config", config.to_str().unwrap(), "--out", out]).unwrap();
    let mut text = std::fs::read_to_string(&config)
        .unwrap()
        .replace("../out/politics/survey.csv", dir.join("survey.csv").to_str().unwrap());
    if !quantize {
        text = text.replace("[quantize]\nk = 25\n", "");
    }
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn variable_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    // Over a thousand distinct rating vectors: the unquantized problem is too big.
    let direct = politics(dir.path(), false);
    let err = run(&["solve", "--config", &direct, "--out", out]).unwrap_err();
    assert!(matches!(err, privf_cli::CliError::Core(privf_core::Error::VariableCap { .. })), "{err}");
    assert_eq!(err.exit_code(), 2);

    let quantized = politics(dir.path(), true);
    run(&["solve", "--config", &quantized, "--out", out]).unwrap();

    std::env::set_var("PRIVF_VAR_CAP", "100");
    let err = run(&["solve", "--config", &quantized, "--out", out]).unwrap_err();
    assert!(err.to_string().contains("100"), "{err}");
    std::env::set_var("PRIVF_VAR_CAP", "lots");
    assert_eq!(run(&["solve", "--config", &quantized, "--out", out]).unwrap_err().exit_code(), 2);
    std::env::remove_var("PRIVF_VAR_CAP");
}
