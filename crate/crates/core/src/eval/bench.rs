//! Benchmark drivers for context-aware similarity and lexical substitution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{normalize_token, Vocabulary};
use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::eval::data::{LexsubDataset, LexsubInstance, Pos, ScwsInstance};
use crate::eval::metrics::{gap, spearman};
use crate::hdp::TopicModel;
use crate::inference::{sim_pair, sim_sge_c, sim_tse_expected, sim_tse_sampled, ScoredContext, ScoringOptions};

fn context_of(words: &[String], index: usize, lemma: &str, vocab: &Vocabulary) -> Result<ScoredContext> {
    let normalized: Vec<String> = words
        .iter()
        .map(|w| normalize_token(w).unwrap_or_default())
        .collect();
    let lemma = normalize_token(lemma);
    ScoredContext::from_words(&normalized, index, lemma.as_deref(), vocab)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScwsReport {
    pub rho: f64,
    pub n: usize,
    /// Pairs scored 0 because a target word has no representation.
    pub oov_pairs: usize,
    pub scores: Vec<f64>,
}

/// Score every pair with [`sim_pair`] and correlate with the human ratings.
pub fn eval_scws(
    model: &EmbeddingModel,
    hdp: Option<&TopicModel>,
    vocab: &Vocabulary,
    data: &[ScwsInstance],
    opts: &ScoringOptions,
) -> Result<ScwsReport> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty similarity dataset".into()));
    }
    let scored: Vec<Option<f64>> = data
        .par_iter()
        .map(|inst| {
            let c1 = context_of(&inst.context1, inst.index1, &inst.word1, vocab)?;
            let c2 = context_of(&inst.context2, inst.index2, &inst.word2, vocab)?;
            sim_pair(model, hdp, &c1, &c2, opts)
        })
        .collect::<Result<_>>()?;
    let oov_pairs = scored.iter().filter(|s| s.is_none()).count();
    let scores: Vec<f64> = scored.into_iter().map(|s| s.unwrap_or(0.0)).collect();
    let human: Vec<f64> = data.iter().map(|i| i.human_score).collect();
    let rho = spearman(&scores, &human)?;
    Ok(ScwsReport {
        rho,
        n: data.len(),
        oov_pairs,
        scores,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LexsubScorer {
    Sampled,
    Expected,
    SgeC,
}

impl fmt::Display for LexsubScorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LexsubScorer::Sampled => "smp",
            LexsubScorer::Expected => "exp",
            LexsubScorer::SgeC => "sge+c",
        })
    }
}

impl FromStr for LexsubScorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "smp" | "sampled" => Ok(LexsubScorer::Sampled),
            "exp" | "expected" => Ok(LexsubScorer::Expected),
            "sge+c" | "sgec" | "sge-c" => Ok(LexsubScorer::SgeC),
            _ => Err(Error::InvalidArgument(format!("unknown scorer {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceGap {
    pub id: String,
    pub target: String,
    pub pos: Pos,
    pub gap: f64,
    /// Candidates that received a score.
    pub scored: usize,
    pub candidates: usize,
    /// No candidate could be scored; the ranking is purely lexicographic.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosGap {
    pub pos: Pos,
    pub n: usize,
    /// Mean GAP, `None` when there are no instances of this class.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexsubReport {
    pub scorer: LexsubScorer,
    pub instances: Vec<InstanceGap>,
    pub overall: f64,
    /// One row per word class in [`Pos::ALL`] order.
    pub per_pos: Vec<PosGap>,
    pub fallback_instances: usize,
    pub dropped_multiword: usize,
    pub dropped_instances: usize,
}

impl LexsubReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.instances.iter().map(|i| i.gap).collect()
    }

    pub fn gaps_for(&self, pos: Pos) -> Vec<f64> {
        self.instances.iter().filter(|i| i.pos == pos).map(|i| i.gap).collect()
    }
}

/// Candidate substitutes per (target, word class): the union of the gold
/// substitutes of all instances sharing that key.
pub fn candidate_pools(instances: &[LexsubInstance]) -> BTreeMap<(String, Pos), Vec<String>> {
    let mut pools: BTreeMap<(String, Pos), BTreeSet<String>> = BTreeMap::new();
    for inst in instances {
        pools
            .entry((inst.target.clone(), inst.pos))
            .or_default()
            .extend(inst.gold.iter().map(|(s, _)| s.clone()));
    }
    pools.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()
}

/// Order candidates by descending score, ties and unscorable candidates
/// (placed last) lexicographically.
pub fn rank_candidates(scored: &[(String, Option<f64>)]) -> Vec<String> {
    let mut items: Vec<&(String, Option<f64>)> = scored.iter().collect();
    items.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.0.cmp(&b.0)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.0.cmp(&b.0),
    });
    items.into_iter().map(|(s, _)| s.clone()).collect()
}

/// Rank the pooled candidates of every instance and report mean GAP overall
/// and per word class.
pub fn eval_lexsub(
    model: &EmbeddingModel,
    hdp: Option<&TopicModel>,
    vocab: &Vocabulary,
    dataset: &LexsubDataset,
    scorer: LexsubScorer,
    opts: &ScoringOptions,
) -> Result<LexsubReport> {
    if dataset.instances.is_empty() {
        return Err(Error::InvalidArgument("empty substitution dataset".into()));
    }
    let pools = candidate_pools(&dataset.instances);
    let instances: Vec<InstanceGap> = dataset
        .instances
        .par_iter()
        .map(|inst| {
            let mut ctx = context_of(&inst.context, inst.target_index, &inst.target, vocab)?;
            if scorer != LexsubScorer::SgeC && model.variant().has_topic_table() {
                if let Some(hdp) = hdp {
                    ctx.infer_topics(hdp, opts);
                }
            }
            let pool = &pools[&(inst.target.clone(), inst.pos)];
            let mut scored = Vec::with_capacity(pool.len());
            for cand in pool {
                let id = normalize_token(cand).and_then(|c| vocab.id(&c));
                let score = match id {
                    None => None,
                    Some(s) => match scorer {
                        LexsubScorer::Sampled => sim_tse_sampled(model, hdp, s, &ctx, opts)?,
                        LexsubScorer::Expected => sim_tse_expected(model, hdp, s, &ctx, opts)?,
                        LexsubScorer::SgeC => sim_sge_c(model, s, &ctx, opts)?,
                    },
                };
                scored.push((cand.clone(), score));
            }
            let n_scored = scored.iter().filter(|s| s.1.is_some()).count();
            let ranking = rank_candidates(&scored);
            Ok(InstanceGap {
                id: inst.id.clone(),
                target: inst.target.clone(),
                pos: inst.pos,
                gap: gap(&ranking, &inst.gold)?,
                scored: n_scored,
                candidates: pool.len(),
                fallback: n_scored == 0,
            })
        })
        .collect::<Result<_>>()?;

    let overall = instances.iter().map(|i| i.gap).sum::<f64>() / instances.len() as f64;
    let per_pos = Pos::ALL
        .iter()
        .map(|&pos| {
            let gs: Vec<f64> = instances.iter().filter(|i| i.pos == pos).map(|i| i.gap).collect();
            PosGap {
                pos,
                n: gs.len(),
                gap: (!gs.is_empty()).then(|| gs.iter().sum::<f64>() / gs.len() as f64),
            }
        })
        .collect();
    let fallback_instances = instances.iter().filter(|i| i.fallback).count();
    if fallback_instances > 0 {
        log::warn!("{fallback_instances} instances had no scorable candidate");
    }
    Ok(LexsubReport {
        scorer,
        instances,
        overall,
        per_pos,
        fallback_instances,
        dropped_multiword: dataset.dropped_multiword,
        dropped_instances: dataset.dropped_instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_puts_unscorable_last() {
        let scored = vec![
            ("d".to_string(), None),
            ("b".to_string(), Some(0.5)),
            ("a".to_string(), Some(0.5)),
            ("c".to_string(), Some(0.9)),
            ("aa".to_string(), None),
        ];
        assert_eq!(rank_candidates(&scored), vec!["c", "a", "b", "aa", "d"]);
    }

    #[test]
    fn pools_union_gold_per_target() {
        let inst = |id: &str, target: &str, pos, gold: &[&str]| LexsubInstance {
            id: id.into(),
            target: target.into(),
            pos,
            context: vec![target.into()],
            target_index: 0,
            gold: gold.iter().map(|g| (g.to_string(), 1)).collect(),
        };
        let pools = candidate_pools(&[
            inst("1", "bright", Pos::Adj, &["smart", "shiny"]),
            inst("2", "bright", Pos::Adj, &["vivid"]),
            inst("3", "bright", Pos::Noun, &["light"]),
        ]);
        assert_eq!(pools[&("bright".to_string(), Pos::Adj)], vec!["shiny", "smart", "vivid"]);
        assert_eq!(pools[&("bright".to_string(), Pos::Noun)], vec!["light"]);
    }

    #[test]
    fn scorer_names_round_trip() {
        for s in [LexsubScorer::Sampled, LexsubScorer::Expected, LexsubScorer::SgeC] {
            assert_eq!(s.to_string().parse::<LexsubScorer>().unwrap(), s);
        }
    }
}
