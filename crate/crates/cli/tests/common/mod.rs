//! Golden-file cases for the CLI.
//!
//! `golden/cases.txt` lists one case per line:
//! `name verb input p q exit-code`. The expected stdout of case `name` is
//! `golden/name.out`. Set `RECTSCAN_BLESS=1` to rewrite the expected files.

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

pub struct Case {
    pub name: String,
    pub verb: String,
    pub input: String,
    pub p: usize,
    pub q: usize,
    pub code: i32,
}

pub fn load_cases() -> Vec<Case> {
    let text = std::fs::read_to_string(golden_dir().join("cases.txt")).expect("cases.txt");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            assert_eq!(f.len(), 6, "bad case line: {l}");
            Case {
                name: f[0].to_string(),
                verb: f[1].to_string(),
                input: f[2].to_string(),
                p: f[3].parse().unwrap(),
                q: f[4].parse().unwrap(),
                code: f[5].parse().unwrap(),
            }
        })
        .collect()
}

pub fn run_bin(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_rectscan"))
        .args(args)
        .output()
        .expect("spawn rectscan");
    (
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
        out.status.code().unwrap_or(-1),
    )
}

/// Runs every case; returns the number checked and the mismatches.
pub fn check_goldens() -> (usize, Vec<String>) {
    let bless = std::env::var_os("RECTSCAN_BLESS").is_some();
    let dir = golden_dir();
    let mut bad = Vec::new();
    let cases = load_cases();
    for c in &cases {
        let input = dir.join(&c.input);
        let (p, q) = (c.p.to_string(), c.q.to_string());
        let (stdout, stderr, code) =
            run_bin(&[&c.verb, input.to_str().unwrap(), "-p", &p, "-q", &q]);
        let expected_path = dir.join(format!("{}.out", c.name));
        if bless {
            std::fs::write(&expected_path, &stdout).unwrap();
        }
        let expected = std::fs::read_to_string(&expected_path).unwrap_or_default();
        if code != c.code {
            bad.push(format!("{}: exit {code}, expected {}", c.name, c.code));
        }
        if stdout != expected {
            bad.push(format!(
                "{}: stdout differs from {}",
                c.name,
                expected_path.display()
            ));
        }
        if code == 2 && stderr.lines().count() != 1 {
            bad.push(format!("{}: expected a one-line diagnostic", c.name));
        }
    }
    (cases.len(), bad)
}
