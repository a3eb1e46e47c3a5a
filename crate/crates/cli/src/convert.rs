//! Converters from the distributed substitution datasets to the TSV read by
//! `eval-lexsub`. The SemEval files are not always well-formed XML, so a
//! small tolerant tag scanner is used instead of a strict parser.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context};

use tse_core::eval::{LexsubDataset, LexsubInstance, Pos};

use crate::commands::{ConvertLexsubArgs, LexsubFormat, Outcome};
use crate::usage;

#[derive(Debug, PartialEq)]
enum Event<'a> {
    Open(&'a str, Vec<(&'a str, String)>),
    Close(&'a str),
    Text(&'a str),
}

fn unescape(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

fn attributes(s: &str) -> Vec<(&str, String)> {
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(eq) = rest.find('=') {
        let name = rest[..eq].trim();
        let after = rest[eq + 1..].trim_start();
        let Some(q) = after.chars().next().filter(|c| *c == '"' || *c == '\'') else {
            break;
        };
        let Some(end) = after[1..].find(q) else { break };
        out.push((name, unescape(&after[1..1 + end])));
        rest = &after[end + 2..];
    }
    out
}

/// Split markup into tags and text. Self-closing tags yield an open and a
/// close event; declarations and comments are skipped.
fn scan(src: &str) -> Vec<Event<'_>> {
    let mut events = Vec::new();
    let mut rest = src;
    while !rest.is_empty() {
        match rest.find('<') {
            Some(0) => {
                let Some(end) = rest.find('>') else { break };
                let tag = &rest[1..end];
                rest = &rest[end + 1..];
                if tag.starts_with('?') || tag.starts_with('!') {
                    continue;
                }
                if let Some(name) = tag.strip_prefix('/') {
                    events.push(Event::Close(name.trim()));
                    continue;
                }
                let (tag, self_closing) = match tag.strip_suffix('/') {
                    Some(t) => (t, true),
                    None => (tag, false),
                };
                let (name, attrs) = tag.split_once(char::is_whitespace).unwrap_or((tag, ""));
                events.push(Event::Open(name, attributes(attrs)));
                if self_closing {
                    events.push(Event::Close(name));
                }
            }
            Some(i) => {
                events.push(Event::Text(&rest[..i]));
                rest = &rest[i..];
            }
            None => {
                events.push(Event::Text(rest));
                break;
            }
        }
    }
    events
}

fn attr<'a>(attrs: &'a [(&str, String)], name: &str) -> Option<&'a str> {
    attrs.iter().find(|(n, _)| *n == name).map(|(_, v)| v.as_str())
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// `lemma.pos id :: sub n;sub n;` lines.
fn semeval_gold(path: &Path) -> anyhow::Result<HashMap<String, Vec<(String, u32)>>> {
    let mut gold = HashMap::new();
    for (i, line) in read(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, subs)) = line.split_once("::") else {
            bail!("{}:{}: missing '::'", path.display(), i + 1);
        };
        let mut key = key.split_whitespace();
        let (Some(_item), Some(id)) = (key.next(), key.next()) else {
            bail!("{}:{}: expected 'lemma.pos id ::'", path.display(), i + 1);
        };
        let mut entries = Vec::new();
        for e in subs.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let Some((sub, n)) = e.rsplit_once(char::is_whitespace) else {
                bail!("{}:{}: bad substitute {e:?}", path.display(), i + 1);
            };
            let n: u32 = n
                .parse()
                .with_context(|| format!("{}:{}: bad count in {e:?}", path.display(), i + 1))?;
            entries.push((sub.trim().to_string(), n));
        }
        gold.insert(id.to_string(), entries);
    }
    Ok(gold)
}

fn semeval(xml: &Path, gold_path: &Path) -> anyhow::Result<(Vec<LexsubInstance>, usize)> {
    let src = read(xml)?;
    let gold = semeval_gold(gold_path)?;
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut item: Option<(String, Pos)> = None;
    let mut id: Option<String> = None;
    let mut context: Option<(Vec<String>, Option<usize>)> = None;
    let mut in_head = false;
    for ev in scan(&src) {
        match ev {
            Event::Open("lexelt", a) => {
                let it = attr(&a, "item").unwrap_or_default();
                item = it
                    .rsplit_once('.')
                    .and_then(|(lemma, pos)| Some((lemma.to_string(), Pos::parse(pos)?)));
                if item.is_none() {
                    log::warn!("skipping lexelt {it:?} with unknown word class");
                }
            }
            Event::Open("instance", a) => id = attr(&a, "id").map(str::to_string),
            Event::Open("context", _) => context = Some((Vec::new(), None)),
            Event::Open("head", _) => in_head = true,
            Event::Close("head") => in_head = false,
            Event::Text(t) => {
                if let Some((toks, head)) = context.as_mut() {
                    for w in unescape(t).split_whitespace() {
                        if in_head && head.is_none() {
                            *head = Some(toks.len());
                        }
                        toks.push(w.to_string());
                    }
                }
            }
            Event::Close("context") => {
                let (toks, head) = context.take().unwrap_or_default();
                let (Some((lemma, pos)), Some(iid), Some(h)) = (&item, &id, head) else {
                    skipped += 1;
                    continue;
                };
                match gold.get(iid) {
                    Some(g) if !g.is_empty() => out.push(LexsubInstance {
                        id: iid.clone(),
                        target: lemma.clone(),
                        pos: *pos,
                        context: toks,
                        target_index: h,
                        gold: g.clone(),
                    }),
                    _ => skipped += 1,
                }
            }
            _ => {}
        }
    }
    Ok((out, skipped))
}

fn coinco_pos(tag: &str) -> Option<Pos> {
    match tag.chars().next()? {
        'N' => Some(Pos::Noun),
        'V' => Some(Pos::Verb),
        'J' => Some(Pos::Adj),
        'R' => Some(Pos::Adv),
        _ => None,
    }
}

fn coinco(xml: &Path) -> anyhow::Result<(Vec<LexsubInstance>, usize)> {
    struct Tok {
        id: String,
        lemma: String,
        pos: Option<Pos>,
        gold: Vec<(String, u32)>,
    }
    let src = read(xml)?;
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut words: Vec<String> = Vec::new();
    let mut toks: Vec<(usize, Tok)> = Vec::new();
    let mut current: Option<Tok> = None;
    for ev in scan(&src) {
        match ev {
            Event::Open("sent", _) => {
                words.clear();
                toks.clear();
            }
            Event::Open("token", a) => {
                words.push(attr(&a, "wordform").unwrap_or("_").to_string());
                current = Some(Tok {
                    id: attr(&a, "id").unwrap_or_default().to_string(),
                    lemma: attr(&a, "lemma").unwrap_or_default().to_string(),
                    pos: attr(&a, "posMASC").and_then(coinco_pos),
                    gold: Vec::new(),
                });
            }
            Event::Open("subst", a) => {
                if let (Some(t), Some(l), Some(f)) = (current.as_mut(), attr(&a, "lemma"), attr(&a, "freq")) {
                    let f: u32 = f.parse().with_context(|| format!("bad freq {f:?}"))?;
                    t.gold.push((l.to_string(), f));
                }
            }
            Event::Close("token") => {
                if let Some(t) = current.take() {
                    if !t.gold.is_empty() {
                        toks.push((words.len() - 1, t));
                    }
                }
            }
            Event::Close("sent") => {
                for (idx, t) in toks.drain(..) {
                    let Some(pos) = t.pos else {
                        skipped += 1;
                        continue;
                    };
                    out.push(LexsubInstance {
                        id: t.id,
                        target: t.lemma,
                        pos,
                        context: words.clone(),
                        target_index: idx,
                        gold: t.gold,
                    });
                }
            }
            _ => {}
        }
    }
    Ok((out, skipped))
}

pub fn run(a: &ConvertLexsubArgs) -> anyhow::Result<Outcome> {
    let mut inputs = vec![a.xml.clone()];
    let (instances, skipped) = match a.format {
        LexsubFormat::Semeval07 => {
            let Some(gold) = &a.gold else {
                return usage("--format semeval07 requires --gold");
            };
            inputs.push(gold.clone());
            semeval(&a.xml, gold)?
        }
        LexsubFormat::Coinco => coinco(&a.xml)?,
    };
    if instances.is_empty() {
        bail!("no instances found in {}", a.xml.display());
    }
    // Tabs and separators inside fields would break the TSV.
    let instances: Vec<LexsubInstance> = instances
        .into_iter()
        .map(|mut i| {
            i.context = i.context.iter().map(|w| w.replace(char::is_whitespace, "_")).collect();
            i.gold = i.gold.into_iter().map(|(s, n)| (s.replace(['\t', ';', ':'], " "), n)).collect();
            i
        })
        .collect();
    LexsubDataset::save(&instances, &a.out)?;
    eprintln!("wrote {} instances, skipped {skipped}", instances.len());
    Ok(Outcome {
        inputs,
        outputs: vec![a.out.clone()],
    })
}
