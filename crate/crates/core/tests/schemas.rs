use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use reset_fpt::cli::Scenario;

fn root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn validator(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("schemas").join(name)).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn scenarios() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value, what: &str) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

#[test]
fn scenario_files_match_the_schema_and_round_trip() {
    let v = validator("scenario.schema.json");
    let files = scenarios();
    assert!(files.len() >= 5);
    for p in files {
        let text = std::fs::read_to_string(&p).unwrap();
        assert_valid(&v, &serde_json::from_str(&text).unwrap(), &p.display().to_string());
        let once = Scenario::parse(&text).unwrap().to_json();
        assert_valid(&v, &serde_json::from_str(&once).unwrap(), "serialized scenario");
        assert_eq!(once, Scenario::parse(&once).unwrap().to_json());
    }
}

#[test]
fn schema_rejects_what_the_parser_rejects() {
    let v = validator("scenario.schema.json");
    let text = std::fs::read_to_string(root().join("scenarios/forward_exit_probability.json")).unwrap();
    for bad in [
        text.replace("\"schema_version\": 1", "\"schema_version\": 2"),
        text.replace("\"name\"", "\"extra\": true, \"name\""),
        text.replace("\"uniform\"", "\"cauchy\""),
    ] {
        let doc: Value = serde_json::from_str(&bad).unwrap();
        assert!(!v.is_valid(&doc));
        assert!(Scenario::parse(&bad).is_err());
    }
}

fn output_of(args: &[&str]) -> (Option<i32>, Value) {
    let o = Command::new(env!("CARGO_BIN_EXE_reset-fpt")).args(args).output().unwrap();
    let text = if o.stdout.is_empty() {
        String::from_utf8(o.stderr).unwrap()
    } else {
        String::from_utf8(o.stdout).unwrap()
    };
    (o.status.code(), serde_json::from_str(text.trim().lines().last().map_or("", |_| text.trim())).unwrap())
}

#[test]
fn command_outputs_match_the_schema() {
    let v = validator("output.schema.json");
    for p in scenarios() {
        let name = p.file_name().unwrap().to_str().unwrap();
        let cmd = name.split('_').next().unwrap();
        let path = p.to_str().unwrap();
        let (code, doc) = output_of(&[cmd, "--scenario", path, "--format", "json", "--paths", "500", "--dt", "1e-3"]);
        assert!(matches!(code, Some(0) | Some(2)), "{name}: {code:?}");
        assert_valid(&v, &doc, name);
    }
    let (code, doc) = output_of(&["verify", "--format", "json"]);
    assert_eq!(code, Some(0));
    assert_valid(&v, &doc, "verify");
}
