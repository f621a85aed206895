#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const K4: &str = r#"{"type":"graphic","vertices":4,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#;
pub const U24_BASES: &str = r#"{"type":"uniform_bases","matroid":{"type":"uniform","n":4,"r":2}}"#;
pub const DPP: &str = r#"{"type":"dpp_alpha","kernel":[[2,1,0,0.5],[1,2,0.3,0],[0,0.3,1,0.2],[0.5,0,0.2,1.5]],"k":2,"alpha":0.5}"#;
pub const SPLIT: &str = r#"{"type":"explicit","n":4,"d":2,"terms":[{"set":[0,1],"coef":1},{"set":[2,3],"coef":1}]}"#;

/// Writes the fixtures into `dir` and returns the directory.
pub fn fixtures(dir: &Path) -> PathBuf {
    for (name, text) in [("k4.json", K4), ("u24.json", U24_BASES), ("dpp.json", DPP), ("split.json", SPLIT)] {
        std::fs::write(dir.join(name), text).unwrap();
    }
    dir.to_path_buf()
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matroid-walks")).current_dir(dir).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The randomized commands with fixed arguments, as run by the determinism checks.
pub fn randomized_commands() -> Vec<Vec<&'static str>> {
    vec![
        vec!["sample", "--dist", "u24.json", "--count", "40", "--seed", "5"],
        vec!["count-bases", "--matroid", "k4.json", "--eps", "0.2", "--delta", "0.1", "--seed", "7"],
        vec!["count-indep", "--matroid", "k4.json", "--k", "2", "--eps", "0.2", "--delta", "0.1", "--seed", "7"],
        vec!["reliability", "--matroid", "k4.json", "--p", "0.5", "--eps", "0.2", "--delta", "0.1", "--seed", "7"],
        vec!["cluster", "--matroid", "k4.json", "--p", "1", "--q", "0.5", "--eps", "0.2", "--delta", "0.1", "--seed", "7"],
        vec!["tutte", "--matroid", "k4.json", "--x", "1.5", "--y", "2", "--eps", "0.2", "--delta", "0.1", "--seed", "7"],
        vec!["dpp-z", "--dist", "dpp.json", "--eps", "0.2", "--delta", "0.1", "--seed", "7"],
    ]
}

/// Output with the wall-clock field of the sample metadata removed, the only
/// part of any output that depends on timing.
pub fn without_timing(text: &str) -> String {
    text.lines()
        .map(|line| match serde_json::from_str::<serde_json::Value>(line) {
            Ok(serde_json::Value::Object(mut m)) if m.contains_key("wall_ms") => {
                m.remove("wall_ms");
                serde_json::Value::Object(m).to_string()
            }
            _ => line.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
