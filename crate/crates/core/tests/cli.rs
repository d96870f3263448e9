use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/sample").join(name)
}

fn storygem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_storygem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{e}: {stderr}"))
}

#[test]
fn smoke_run_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("beer.svg");
    let o = storygem(&[
        "--input",
        sample("beer.txt").to_str().unwrap(),
        "--vectors",
        sample("toy.vec").to_str().unwrap(),
        "--optimize-font",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(&out).unwrap();
    roxmltree::Document::parse(&svg).unwrap();
    let summary = String::from_utf8_lossy(&o.stdout);
    assert!(summary.contains("laid out 50 words"), "{summary}");
}

#[test]
fn format_both_writes_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("plum");
    let o = storygem(&[
        "--input",
        sample("plum.txt").to_str().unwrap(),
        "--vectors",
        sample("toy.vec").to_str().unwrap(),
        "--max-words",
        "12",
        "--format",
        "both",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["words"].as_array().unwrap().len(), 12);
    assert!(base.with_extension("svg").is_file());
}

#[test]
fn missing_input_is_a_config_error() {
    let o = storygem(&["--input", "/no/such/file.txt", "--vectors", sample("toy.vec").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["stage"], "config");
    assert!(e["detail"].as_str().unwrap().starts_with("--input"));
}

#[test]
fn out_of_range_k_names_the_flag() {
    let o = storygem(&[
        "--input",
        sample("beer.txt").to_str().unwrap(),
        "--vectors",
        sample("toy.vec").to_str().unwrap(),
        "--k",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_json(&o)["detail"].as_str().unwrap().starts_with("--k"));
}

#[test]
fn all_oov_fails_in_embeddings_stage() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("oov.txt");
    std::fs::write(&input, "zzqv qqzx xqzz").unwrap();
    let o = storygem(&["--input", input.to_str().unwrap(), "--vectors", sample("toy.vec").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["stage"], "embeddings");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"input": {:?}, "vectors": {:?}, "max-words": 8, "format": "json"}}"#,
            sample("florida.txt"),
            sample("toy.vec")
        ),
    )
    .unwrap();
    let o = storygem(&["--config", cfg.to_str().unwrap(), "--max-words", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["words"].as_array().unwrap().len(), 5);
}

#[test]
fn output_is_deterministic() {
    let run = || {
        let o = storygem(&[
            "--input",
            sample("beer.txt").to_str().unwrap(),
            "--vectors",
            sample("toy.vec").to_str().unwrap(),
            "--seed",
            "11",
            "--max-words",
            "25",
        ]);
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run(), run());
}
