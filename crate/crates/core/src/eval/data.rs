//! Evaluation dataset formats.
//!
//! Lexical substitution (tab separated):
//! `id  target  pos  target_index  context  gold`, where `context` is
//! space-separated and `gold` is `sub:weight;sub:weight;...`.
//!
//! Context-aware similarity (tab separated):
//! `id  word1  pos1  word2  pos2  context1  context2  score`, with the target
//! of each context marked as `<b>word</b>`. Extra trailing columns (such as
//! individual annotator ratings) are ignored.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::corpus::read_lines;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    pub fn parse(s: &str) -> Option<Pos> {
        match s.trim().trim_end_matches('.').to_ascii_lowercase().as_str() {
            "n" | "noun" => Some(Pos::Noun),
            "v" | "verb" => Some(Pos::Verb),
            "a" | "j" | "adj" | "adjective" => Some(Pos::Adj),
            "r" | "adv" | "adverb" => Some(Pos::Adv),
            _ => None,
        }
    }

    /// One-letter code used in data files.
    pub fn short(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adj => "a",
            Pos::Adv => "r",
        }
    }

    /// Column label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Pos::Noun => "n.",
            Pos::Verb => "v.",
            Pos::Adj => "adj.",
            Pos::Adv => "adv.",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexsubInstance {
    pub id: String,
    pub target: String,
    pub pos: Pos,
    /// Raw whitespace-separated context tokens.
    pub context: Vec<String>,
    pub target_index: usize,
    /// Gold substitutes with annotator counts.
    pub gold: Vec<(String, u32)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LexsubDataset {
    pub instances: Vec<LexsubInstance>,
    /// Multiword gold substitutes removed while parsing.
    pub dropped_multiword: usize,
    /// Instances skipped because no single-word gold substitute remained.
    pub dropped_instances: usize,
}

impl LexsubDataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut ds = LexsubDataset::default();
        for (lineno, line) in read_lines(path)? {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::parse(path, lineno, m);
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 6 {
                return Err(err(format!("expected 6 tab-separated columns, found {}", cols.len())));
            }
            let pos = Pos::parse(cols[2]).ok_or_else(|| err(format!("unknown part of speech {:?}", cols[2])))?;
            let target_index: usize = cols[3]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad target index {:?}", cols[3])))?;
            let context: Vec<String> = cols[4].split_whitespace().map(str::to_string).collect();
            if target_index >= context.len() {
                return Err(err(format!(
                    "target index {target_index} outside context of {} tokens",
                    context.len()
                )));
            }
            let mut gold = Vec::new();
            for entry in cols[5].split(';').map(str::trim).filter(|e| !e.is_empty()) {
                let (sub, weight) = entry
                    .rsplit_once(':')
                    .ok_or_else(|| err(format!("gold entry {entry:?} lacks :weight")))?;
                let weight: u32 = weight
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad gold weight in {entry:?}")))?;
                if weight == 0 {
                    return Err(err(format!("gold weight must be >= 1 in {entry:?}")));
                }
                let sub = sub.trim();
                if sub.split_whitespace().count() != 1 {
                    ds.dropped_multiword += 1;
                    continue;
                }
                gold.push((sub.to_string(), weight));
            }
            if gold.is_empty() {
                ds.dropped_instances += 1;
                continue;
            }
            ds.instances.push(LexsubInstance {
                id: cols[0].trim().to_string(),
                target: cols[1].trim().to_string(),
                pos,
                context,
                target_index,
                gold,
            });
        }
        Ok(ds)
    }

    pub fn write_to<W: Write>(instances: &[LexsubInstance], mut w: W) -> Result<()> {
        for inst in instances {
            let gold: Vec<String> = inst.gold.iter().map(|(s, c)| format!("{s}:{c}")).collect();
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                inst.id,
                inst.target,
                inst.pos.short(),
                inst.target_index,
                inst.context.join(" "),
                gold.join(";")
            )?;
        }
        Ok(())
    }

    pub fn save(instances: &[LexsubInstance], path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        Self::write_to(instances, &mut w)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScwsInstance {
    pub id: String,
    pub word1: String,
    pub pos1: String,
    pub context1: Vec<String>,
    pub index1: usize,
    pub word2: String,
    pub pos2: String,
    pub context2: Vec<String>,
    pub index2: usize,
    pub human_score: f64,
}

/// Split a context on whitespace and locate the `<b>...</b>` target.
pub fn parse_marked_context(s: &str) -> Option<(Vec<String>, usize)> {
    let spaced = s.replace("<b>", " <b> ").replace("</b>", " </b> ");
    let mut tokens = Vec::new();
    let mut target = None;
    let mut inside = false;
    for t in spaced.split_whitespace() {
        match t {
            "<b>" => inside = true,
            "</b>" => inside = false,
            _ => {
                if inside && target.is_none() {
                    target = Some(tokens.len());
                }
                tokens.push(t.to_string());
            }
        }
    }
    target.map(|i| (tokens, i))
}

fn mark_context(tokens: &[String], index: usize) -> String {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| if i == index { format!("<b>{t}</b>") } else { t.clone() })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn load_scws(path: impl AsRef<Path>) -> Result<Vec<ScwsInstance>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (lineno, line) in read_lines(path)? {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::parse(path, lineno, m);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(err(format!("expected 8 tab-separated columns, found {}", cols.len())));
        }
        let (context1, index1) =
            parse_marked_context(cols[5]).ok_or_else(|| err("context1 has no <b>target</b> marker".into()))?;
        let (context2, index2) =
            parse_marked_context(cols[6]).ok_or_else(|| err("context2 has no <b>target</b> marker".into()))?;
        let human_score: f64 = cols[7]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad score {:?}", cols[7])))?;
        out.push(ScwsInstance {
            id: cols[0].trim().to_string(),
            word1: cols[1].trim().to_string(),
            pos1: cols[2].trim().to_string(),
            context1,
            index1,
            word2: cols[3].trim().to_string(),
            pos2: cols[4].trim().to_string(),
            context2,
            index2,
            human_score,
        });
    }
    Ok(out)
}

pub fn write_scws<W: Write>(instances: &[ScwsInstance], mut w: W) -> Result<()> {
    for s in instances {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.id,
            s.word1,
            s.pos1,
            s.word2,
            s.pos2,
            mark_context(&s.context1, s.index1),
            mark_context(&s.context2, s.index2),
            s.human_score
        )?;
    }
    Ok(())
}

pub fn save_scws(instances: &[ScwsInstance], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_scws(instances, &mut w)?;
    w.flush()?;
    Ok(())
}
