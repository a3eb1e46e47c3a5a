//! Run manifests: enough to reproduce a run, with no timestamps so that
//! repeated runs produce identical manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Cli;

/// Files a command read and wrote.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    command: String,
    argv: Vec<String>,
    flags: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let mut f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn digests(paths: &[PathBuf]) -> anyhow::Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
        .collect()
}

pub fn emit(cli: &Cli, argv: &[String], outcome: &Outcome) -> anyhow::Result<()> {
    let mut seeds = BTreeMap::new();
    seeds.insert("seed".to_string(), cli.global.seed);
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: cli.command.name().to_string(),
        argv: argv.to_vec(),
        flags: serde_json::to_value(cli)?,
        seeds,
        inputs: digests(&outcome.inputs)?,
        outputs: digests(&outcome.outputs)?,
    };
    let json = serde_json::to_string_pretty(&m)?;
    let target = cli.global.manifest.clone().or_else(|| {
        outcome.outputs.first().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match target {
        Some(path) => {
            std::fs::write(&path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?
        }
        None => writeln!(io::stderr(), "{}", serde_json::to_string(&m)?)?,
    }
    Ok(())
}

pub fn recorded_argv(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&text).with_context(|| format!("{} is not a manifest", path.display()))?;
    if m.argv.is_empty() {
        bail!("{}: empty argv", path.display());
    }
    Ok(m.argv)
}
