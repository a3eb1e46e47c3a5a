#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Run `tse` in `dir` and return its output regardless of exit status.
pub fn tse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tse"))
        .args(args)
        .current_dir(dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn tse")
}

/// Run `tse` and panic with its stderr unless it succeeds.
pub fn tse_ok(dir: &Path, args: &[&str]) -> String {
    let out = tse(dir, args);
    assert!(
        out.status.success(),
        "tse {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

/// Digest of every file under `dir`, keyed by relative path.
pub fn digests(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, sha256(&p));
            }
        }
    }
    out
}

/// Write `corpus.txt` by repeating the fixture corpus `n` times.
pub fn repeated_fixture_corpus(dir: &Path, n: usize) {
    let text = std::fs::read_to_string(fixture("corpus.txt")).unwrap();
    std::fs::write(dir.join("corpus.txt"), text.repeat(n)).unwrap();
}

/// Rows of a lexsub report table, split on whitespace.
pub fn table_rows(stdout: &str) -> Vec<Vec<String>> {
    stdout
        .lines()
        .take_while(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}
