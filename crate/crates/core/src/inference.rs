//! Context-aware similarity scores for word similarity and lexical
//! substitution.
//!
//! Every scorer is a deterministic function of the models, the context and
//! the seed in [`ScoringOptions`].

use crate::corpus::Vocabulary;
use crate::embeddings::{EmbeddingModel, TopicInfo, Variant};
use crate::error::{Error, Result};
use crate::hdp::{doc_rng, FoldIn, TopicModel};
use crate::{TopicId, WordId};

/// `u·v / (‖u‖ ‖v‖)`, or 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    Ok(cosine_unchecked(u, v))
}

pub(crate) fn cosine_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot / (nu.sqrt() * nv.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoringOptions {
    /// Context words taken from each side of the target.
    pub window: usize,
    /// Use the target's sampled topic for the substitute instead of folding
    /// in the sentence with the substitute spliced in.
    pub reuse_target_topic: bool,
    pub foldin: FoldIn,
    pub seed: u64,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            window: 10,
            reuse_target_topic: false,
            foldin: FoldIn::default(),
            seed: 1,
        }
    }
}

/// A sentence with one marked target token.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredContext {
    /// Vocabulary ids; `None` for out-of-vocabulary tokens.
    pub tokens: Vec<Option<WordId>>,
    pub target_index: usize,
    /// Topic of each token from fold-in, aligned with `tokens`.
    pub hard_topics: Option<Vec<TopicId>>,
    /// Document-topic distribution of the sentence.
    pub topic_dist: Option<Vec<f64>>,
}

impl ScoredContext {
    pub fn new(tokens: Vec<Option<WordId>>, target_index: usize) -> Result<Self> {
        if target_index >= tokens.len() {
            return Err(Error::InvalidArgument(format!(
                "target index {target_index} outside a context of {} tokens",
                tokens.len()
            )));
        }
        Ok(ScoredContext {
            tokens,
            target_index,
            hard_topics: None,
            topic_dist: None,
        })
    }

    /// Map words to ids. An out-of-vocabulary target token is replaced by
    /// `lemma` when the lemma is known.
    pub fn from_words<S: AsRef<str>>(
        words: &[S],
        target_index: usize,
        lemma: Option<&str>,
        vocab: &Vocabulary,
    ) -> Result<Self> {
        let mut tokens: Vec<Option<WordId>> = words.iter().map(|w| vocab.id(w.as_ref())).collect();
        if let Some(slot) = tokens.get_mut(target_index) {
            if slot.is_none() {
                *slot = lemma.and_then(|l| vocab.id(l));
            }
        }
        Self::new(tokens, target_index)
    }

    pub fn target(&self) -> Option<WordId> {
        self.tokens[self.target_index]
    }

    /// In-vocabulary words within `window` positions of the target,
    /// excluding the target itself.
    pub fn window_words(&self, window: usize) -> Vec<WordId> {
        let lo = self.target_index.saturating_sub(window);
        let hi = (self.target_index + window).min(self.tokens.len() - 1);
        (lo..=hi)
            .filter(|&i| i != self.target_index)
            .filter_map(|i| self.tokens[i])
            .collect()
    }

    /// Fold the sentence into `hdp` and store the sampled topics and the
    /// sentence's topic distribution.
    pub fn infer_topics(&mut self, hdp: &TopicModel, opts: &ScoringOptions) {
        let (labels, dist) = fold_in_tokens(hdp, &self.tokens, opts, 0);
        self.hard_topics = Some(labels);
        self.topic_dist = Some(dist);
    }

    fn ensure_topics(&self, hdp: Option<&TopicModel>, opts: &ScoringOptions) -> Result<ScoredContext> {
        let mut ctx = self.clone();
        if ctx.hard_topics.is_none() || ctx.topic_dist.is_none() {
            let hdp = hdp.ok_or_else(|| Error::Config("topic inference needs a topic model".into()))?;
            ctx.infer_topics(hdp, opts);
        }
        Ok(ctx)
    }
}

fn fold_in_tokens(hdp: &TopicModel, tokens: &[Option<WordId>], opts: &ScoringOptions, stream: usize) -> (Vec<TopicId>, Vec<f64>) {
    let ids: Vec<WordId> = tokens.iter().map(|t| t.unwrap_or(WordId::MAX)).collect();
    let (labels, dist) = hdp.fold_in(&ids, opts.foldin, &mut doc_rng(opts.seed, stream));
    (labels, dist.0)
}

fn check_topics(model: &EmbeddingModel, hdp: Option<&TopicModel>) -> Result<()> {
    if let Some(hdp) = hdp {
        if model.variant().has_topic_table() && hdp.num_topics() != model.num_topics() {
            return Err(Error::ShapeMismatch(format!(
                "topic model has {} topics, embeddings {}",
                hdp.num_topics(),
                model.num_topics()
            )));
        }
    }
    Ok(())
}

/// Topic information for a target word in a context, per the model variant.
fn target_info<'a>(model: &EmbeddingModel, ctx: &'a ScoredContext) -> TopicInfo<'a> {
    match model.variant() {
        Variant::Sge => TopicInfo::None,
        Variant::Htle | Variant::HtleAdd => match &ctx.hard_topics {
            Some(h) => TopicInfo::Hard(h[ctx.target_index]),
            None => TopicInfo::None,
        },
        Variant::Stle => match &ctx.topic_dist {
            Some(p) => TopicInfo::Dist(p),
            None => TopicInfo::None,
        },
    }
}

fn word_vector(model: &EmbeddingModel, word: WordId, info: TopicInfo<'_>) -> Result<Option<Vec<f64>>> {
    if !model.contains(word) {
        return Ok(None);
    }
    model.embed_target(word, info).map(Some)
}

/// Cosine of two words, each represented in its own context. `None` when
/// either target has no representation.
pub fn sim_pair(
    model: &EmbeddingModel,
    hdp: Option<&TopicModel>,
    ctx1: &ScoredContext,
    ctx2: &ScoredContext,
    opts: &ScoringOptions,
) -> Result<Option<f64>> {
    check_topics(model, hdp)?;
    let (Some(w1), Some(w2)) = (ctx1.target(), ctx2.target()) else {
        return Ok(None);
    };
    let (c1, c2) = if model.variant() == Variant::Sge {
        (ctx1.clone(), ctx2.clone())
    } else {
        (ctx1.ensure_topics(hdp, opts)?, ctx2.ensure_topics(hdp, opts)?)
    };
    let (Some(h1), Some(h2)) = (
        word_vector(model, w1, target_info(model, &c1))?,
        word_vector(model, w2, target_info(model, &c2))?,
    ) else {
        return Ok(None);
    };
    Ok(Some(cosine_unchecked(&h1, &h2)))
}

fn mean_context_cosine(model: &EmbeddingModel, h: &[f64], context: &[WordId]) -> f64 {
    if context.is_empty() {
        return 0.0;
    }
    let sum: f64 = context
        .iter()
        .map(|&c| cosine_unchecked(h, model.output_row(c).expect("context word in vocabulary")))
        .sum();
    sum / context.len() as f64
}

fn check_context(model: &EmbeddingModel, context: &[WordId]) -> Result<()> {
    match context.iter().find(|&&c| c as usize >= model.vocab_size()) {
        Some(&c) => Err(Error::UnknownWord(c)),
        None => Ok(()),
    }
}

/// `cos(h(s, τ), h(t, τ')) + Σ_c cos(h(s, τ), o(c)) / C` with explicit
/// topic information; the context term is 0 when `context` is empty.
pub fn sampled_score(
    model: &EmbeddingModel,
    substitute: WordId,
    substitute_topic: TopicInfo<'_>,
    target: WordId,
    target_topic: TopicInfo<'_>,
    context: &[WordId],
) -> Result<Option<f64>> {
    check_context(model, context)?;
    let (Some(hs), Some(ht)) = (
        word_vector(model, substitute, substitute_topic)?,
        word_vector(model, target, target_topic)?,
    ) else {
        return Ok(None);
    };
    Ok(Some(cosine_unchecked(&hs, &ht) + mean_context_cosine(model, &hs, context)))
}

/// `Σ_{τ,τ'} p(τ) p'(τ') cos(h(s, τ), h(t, τ')) + Σ_τ p(τ) Σ_c cos(h(s, τ), o(c)) / C`.
///
/// `p_sub` weights the substitute's topics and `p_target` the target's.
/// Topics with zero probability are skipped.
pub fn expected_score(
    model: &EmbeddingModel,
    substitute: WordId,
    target: WordId,
    p_sub: &[f64],
    p_target: &[f64],
    context: &[WordId],
) -> Result<Option<f64>> {
    check_context(model, context)?;
    if !model.contains(substitute) || !model.contains(target) {
        return Ok(None);
    }
    if !model.variant().has_topic_table() {
        return sampled_score(model, substitute, TopicInfo::None, target, TopicInfo::None, context);
    }
    for p in [p_sub, p_target] {
        if p.len() != model.num_topics() {
            return Err(Error::MalformedDistribution(format!(
                "{} entries for {} topics",
                p.len(),
                model.num_topics()
            )));
        }
    }
    let active = |p: &[f64]| -> Vec<(TopicId, f64)> {
        p.iter()
            .enumerate()
            .filter(|&(_, &x)| x != 0.0)
            .map(|(k, &x)| (k as TopicId, x))
            .collect()
    };
    let targets: Vec<(f64, Vec<f64>)> = active(p_target)
        .into_iter()
        .map(|(k, p)| Ok((p, model.embed_target(target, TopicInfo::Hard(k))?)))
        .collect::<Result<_>>()?;
    let mut score = 0.0;
    for (k, p) in active(p_sub) {
        let hs = model.embed_target(substitute, TopicInfo::Hard(k))?;
        for (pt, ht) in &targets {
            score += p * pt * cosine_unchecked(&hs, ht);
        }
        score += p * mean_context_cosine(model, &hs, context);
    }
    Ok(Some(score))
}

/// Sampled scorer: the target's topic comes from folding in the sentence and
/// the substitute's from folding in the sentence with the substitute in
/// place of the target.
pub fn sim_tse_sampled(
    model: &EmbeddingModel,
    hdp: Option<&TopicModel>,
    substitute: WordId,
    ctx: &ScoredContext,
    opts: &ScoringOptions,
) -> Result<Option<f64>> {
    check_topics(model, hdp)?;
    let Some(target) = ctx.target() else {
        return Ok(None);
    };
    let context = ctx.window_words(opts.window);
    if model.variant() == Variant::Sge {
        return sampled_score(model, substitute, TopicInfo::None, target, TopicInfo::None, &context);
    }
    if !model.contains(substitute) {
        return Ok(None);
    }
    let ctx = ctx.ensure_topics(hdp, opts)?;
    let target_topic = ctx.hard_topics.as_ref().expect("inferred")[ctx.target_index];
    let substitute_topic = if opts.reuse_target_topic {
        target_topic
    } else {
        let hdp = hdp.ok_or_else(|| Error::Config("topic inference needs a topic model".into()))?;
        let mut spliced = ctx.tokens.clone();
        spliced[ctx.target_index] = Some(substitute);
        fold_in_tokens(hdp, &spliced, opts, substitute as usize + 1).0[ctx.target_index]
    };
    sampled_score(
        model,
        substitute,
        TopicInfo::Hard(substitute_topic),
        target,
        TopicInfo::Hard(target_topic),
        &context,
    )
}

/// Expected scorer: both topic distributions are the sentence's
/// document-topic distribution.
pub fn sim_tse_expected(
    model: &EmbeddingModel,
    hdp: Option<&TopicModel>,
    substitute: WordId,
    ctx: &ScoredContext,
    opts: &ScoringOptions,
) -> Result<Option<f64>> {
    check_topics(model, hdp)?;
    let Some(target) = ctx.target() else {
        return Ok(None);
    };
    let context = ctx.window_words(opts.window);
    if model.variant() == Variant::Sge {
        return sampled_score(model, substitute, TopicInfo::None, target, TopicInfo::None, &context);
    }
    let ctx = ctx.ensure_topics(hdp, opts)?;
    let p = ctx.topic_dist.as_ref().expect("inferred");
    expected_score(model, substitute, target, p, p, &context)
}

/// Plain skip-gram score `cos(h(s), h(t)) + Σ_c cos(h(s), o(c)) / C`.
pub fn sim_sge_c(
    model: &EmbeddingModel,
    substitute: WordId,
    ctx: &ScoredContext,
    opts: &ScoringOptions,
) -> Result<Option<f64>> {
    let Some(target) = ctx.target() else {
        return Ok(None);
    };
    sampled_score(
        model,
        substitute,
        TopicInfo::None,
        target,
        TopicInfo::None,
        &ctx.window_words(opts.window),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_cases() {
        let v = [0.3, -1.2, 4.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let expected = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        assert!((cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.974632).abs() < 1e-6);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch(1, 2))));
    }

    #[test]
    fn window_skips_oov_and_target() {
        let ctx = ScoredContext::new(vec![Some(0), None, Some(2), Some(3), Some(4), Some(5)], 3).unwrap();
        assert_eq!(ctx.window_words(1), vec![2, 4]);
        assert_eq!(ctx.window_words(2), vec![2, 4, 5]);
        assert_eq!(ctx.window_words(10), vec![0, 2, 4, 5]);
        let lone = ScoredContext::new(vec![Some(1)], 0).unwrap();
        assert!(lone.window_words(10).is_empty());
        assert!(ScoredContext::new(vec![Some(1)], 1).is_err());
    }
}
