use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use textmut::dataset::DatasetBundle;
use textmut::eval::parse_records;
use textmut::OperatorId;

fn textmut(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_textmut"))
        .args(args)
        .env_remove("TEXTMUT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn small_corpus(dir: &Path) -> String {
    let path = dir.join("captions.jsonl");
    let lines: String = textmut::dataset::SAMPLE_CAPTIONS.lines().take(400).map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, lines).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn mutate_goldens() {
    let o = textmut(&["mutate", "--op", "delete_articles", "--rate", "1.0"], "Please share and like the video\nAn owl on a branch.\n");
    assert_eq!(stdout(&o), "Please share and like video\nowl on branch.\n");
    let o = textmut(&["mutate", "--op", "alpha_epsilon", "--char-rate", "1.0", "--uppercase"], "Eagle tea\n");
    assert_eq!(stdout(&o), "Εαglε tεα\n");
}

fn with_env_seed(seed: &str, args: &[&str], stdin: &str) -> String {
    let mut child = Command::new(env!("CARGO_BIN_EXE_textmut"))
        .args(args)
        .env("TEXTMUT_SEED", seed)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    stdout(&child.wait_with_output().unwrap())
}

#[test]
fn seed_precedence() {
    let text: String = (0..20).map(|i| format!("a man rides bike number {i} down the quiet street\n")).collect();
    let mutate = ["mutate"];
    let flag5 = stdout(&textmut(&["--seed", "5", "mutate"], &text));
    let flag9 = stdout(&textmut(&["--seed", "9", "mutate"], &text));
    let default = stdout(&textmut(&mutate, &text));
    assert_ne!(flag5, flag9);
    assert_eq!(flag5, stdout(&textmut(&["--seed", "5", "mutate"], &text)));
    assert_eq!(with_env_seed("5", &mutate, &text), flag5);
    assert_eq!(with_env_seed("5", &["--seed", "9", "mutate"], &text), flag9);
    assert_eq!(default, stdout(&textmut(&["--seed", "0", "mutate"], &text)));
}

#[test]
fn exit_codes() {
    assert_eq!(textmut(&["frobnicate"], "").status.code(), Some(2));
    assert_eq!(textmut(&["mutate", "--rate"], "").status.code(), Some(2));
    let o = textmut(&["mutate", "--op", "nope"], "x\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    assert_eq!(textmut(&["eval", "--model", "/nonexistent", "--bundle", "/nonexistent"], "").status.code(), Some(1));
}

#[test]
fn help_lists_operators() {
    let help = stdout(&textmut(&["--help"], ""));
    for op in OperatorId::all() {
        assert!(help.contains(op.name()), "{}", op.name());
        assert!(help.contains(op.definition()), "{}", op.name());
    }
}

#[test]
fn lexicon_check() {
    let out = stdout(&textmut(&["lexicon", "check"], ""));
    assert!(!out.is_empty());
}

#[test]
fn dataset_train_eval_report_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let input = small_corpus(dir);
    let b1 = dir.join("b1");
    let b2 = dir.join("b2");
    for (b, w) in [(&b1, "1"), (&b2, "3")] {
        stdout(&textmut(&["--seed", "7", "dataset", "--input", &input, "--out", b.to_str().unwrap(), "--workers", w], ""));
    }
    let m1 = DatasetBundle::read(&b1).unwrap().manifest;
    let m2 = DatasetBundle::read(&b2).unwrap().manifest;
    assert_eq!(m1.checksum, m2.checksum);
    assert_eq!(m1.seed, 7);

    let model = dir.join("model.bin");
    let b1s = b1.to_str().unwrap();
    let ms = model.to_str().unwrap();
    stdout(&textmut(&["--seed", "7", "train", "--bundle", b1s, "--out", ms, "--dim", "4096"], ""));
    let table = stdout(&textmut(&["eval", "--model", ms, "--bundle", b1s], ""));
    assert!(table.starts_with("Operator Type"));
    assert!(table.contains("Mode  individual"));

    let records = dir.join("report.jsonl");
    let rs = records.to_str().unwrap();
    stdout(&textmut(&["eval", "--model", ms, "--bundle", b1s, "--format", "records", "--out", rs], ""));
    let report = parse_records(&std::fs::read_to_string(&records).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert_eq!(stdout(&textmut(&["report", rs], "")), table);
}
