use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{keep_probability_for_frequency, Corpus, NegativeSampler, DEFAULT_NEGATIVE_POWER};
use crate::embeddings::sgns::{step_raw, RawTables, Scratch};
use crate::embeddings::{EmbeddingModel, InputRow, Table, Variant};
use crate::error::{Error, Result};
use crate::hdp::{DocTopicDist, TopicLabeling};
use crate::{TopicId, WordId};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub variant: Variant,
    pub dim: usize,
    /// Maximum context offset; the effective window is drawn from `[1, window]`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial step size, decayed linearly to `1e-4` of its value.
    pub learning_rate: f64,
    pub seed: u64,
    /// Number of most probable document topics updated per `Stle` token;
    /// `None` updates every topic with non-zero probability.
    pub stle_top_m: Option<usize>,
    /// Frequency subsampling threshold; `None` disables subsampling.
    pub subsample: Option<f64>,
    pub negative_power: f64,
    /// Worker threads. More than one enables unsynchronized parallel updates.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            variant: Variant::Sge,
            dim: 100,
            window: 10,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 1,
            stle_top_m: Some(10),
            subsample: Some(1e-4),
            negative_power: DEFAULT_NEGATIVE_POWER,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.dim < 1 {
            return bad("dim must be >= 1");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if self.stle_top_m == Some(0) {
            return bad("stle_top_m must be >= 1");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0) {
                return bad("subsample threshold must be > 0");
            }
        }
        if self.threads < 1 {
            return bad("threads must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean loss per (target, context) update in each epoch.
    pub epoch_loss: Vec<f64>,
    pub updates: u64,
    pub num_pairs: usize,
}

/// Truncated, renormalized per-document topic weights for `Stle`.
pub(crate) fn stle_mixture(dist: &DocTopicDist, top_m: Option<usize>) -> Vec<(TopicId, f64)> {
    let mut ws: Vec<(TopicId, f64)> = dist
        .probs()
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > 0.0)
        .map(|(k, &p)| (k as TopicId, p))
        .collect();
    if let Some(m) = top_m {
        if ws.len() > m {
            ws.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            ws.truncate(m);
            ws.sort_by_key(|w| w.0);
        }
        let z: f64 = ws.iter().map(|w| w.1).sum();
        ws.iter_mut().for_each(|w| w.1 /= z);
    }
    ws
}

enum TopicSource<'a> {
    None,
    Labels(&'a TopicLabeling),
    Mixtures(Vec<Vec<(TopicId, f64)>>),
}

pub fn train(
    corpus: &Corpus,
    labeling: Option<&TopicLabeling>,
    doc_topics: Option<&[DocTopicDist]>,
    config: &TrainConfig,
) -> Result<EmbeddingModel> {
    train_with_report(corpus, labeling, doc_topics, config).map(|(m, _)| m)
}

/// Train a model and report per-epoch losses.
///
/// With `threads == 1` the result is a deterministic function of the inputs
/// and the seed.
pub fn train_with_report(
    corpus: &Corpus,
    labeling: Option<&TopicLabeling>,
    doc_topics: Option<&[DocTopicDist]>,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainReport)> {
    config.validate()?;
    let variant = config.variant;
    let vocab_size = corpus.vocab.len();
    if corpus.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }

    let (source, num_topics) = match variant {
        Variant::Sge => (TopicSource::None, 0),
        Variant::Htle | Variant::HtleAdd => {
            let labeling = labeling
                .ok_or_else(|| Error::Config(format!("variant {variant} requires a topic labeling")))?;
            labeling.check_shape(corpus)?;
            (TopicSource::Labels(labeling), labeling.num_topics)
        }
        Variant::Stle => {
            let dists = doc_topics.ok_or_else(|| {
                Error::Config(format!("variant {variant} requires document topic distributions"))
            })?;
            if dists.len() != corpus.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} topic distributions for {} documents",
                    dists.len(),
                    corpus.len()
                )));
            }
            let k = dists.first().map_or(0, |d| d.num_topics());
            for (d, dist) in dists.iter().enumerate() {
                let s: f64 = dist.probs().iter().sum();
                if dist.num_topics() != k || (s - 1.0).abs() > 1e-6 || dist.probs().iter().any(|&p| !(p >= 0.0)) {
                    return Err(Error::MalformedDistribution(format!("document {d}")));
                }
            }
            (
                TopicSource::Mixtures(dists.iter().map(|d| stle_mixture(d, config.stle_top_m)).collect()),
                k,
            )
        }
    };

    let mut pair_weight: BTreeMap<(WordId, TopicId), f64> = BTreeMap::new();
    match &source {
        TopicSource::None => {}
        TopicSource::Labels(l) => {
            for (doc, labels) in corpus.documents.iter().zip(&l.labels) {
                for (&w, &k) in doc.tokens.iter().zip(labels) {
                    *pair_weight.entry((w, k)).or_insert(0.0) += 1.0;
                }
            }
        }
        TopicSource::Mixtures(mix) => {
            for (doc, ws) in corpus.documents.iter().zip(mix) {
                for &w in &doc.tokens {
                    for &(k, p) in ws {
                        *pair_weight.entry((w, k)).or_insert(0.0) += p;
                    }
                }
            }
        }
    }
    let pairs: Vec<((WordId, TopicId), f64)> = pair_weight.into_iter().collect();
    let mut model = EmbeddingModel::new(variant, config.dim, num_topics, vocab_size, &pairs)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    model.init_uniform(&mut rng);

    let sampler = NegativeSampler::new(&corpus.vocab, config.negative_power)?;
    let total = corpus.vocab.total_tokens().max(1) as f64;
    let keep: Vec<f64> = corpus
        .vocab
        .counts()
        .iter()
        .map(|&c| match config.subsample {
            Some(t) => keep_probability_for_frequency(c as f64 / total, t),
            None => 1.0,
        })
        .collect();

    let tables = RawTables::new(&mut model);
    let ctx = Shared {
        corpus,
        source: &source,
        model: &model,
        sampler: &sampler,
        keep: &keep,
        config,
        total_work: (config.epochs * corpus.token_count()).max(1) as f64,
        progress: AtomicU64::new(0),
    };
    let mut report = TrainReport {
        num_pairs: model.pairs().len(),
        ..Default::default()
    };

    for epoch in 0..config.epochs {
        let (loss, updates) = if config.threads == 1 {
            // SAFETY: the tables belong to `model`, which is not otherwise
            // accessed while this epoch runs.
            unsafe { ctx.run_worker(&tables, &mut rng, 0, 1) }
        } else {
            let results: Vec<(f64, u64)> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..config.threads)
                    .map(|t| {
                        let ctx = &ctx;
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                            rng.set_stream((epoch * config.threads + t + 1) as u64);
                            // SAFETY: workers share the tables without locks;
                            // racing row updates are accepted as noise.
                            unsafe { ctx.run_worker(&tables, &mut rng, t, config.threads) }
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            results
                .into_iter()
                .fold((0.0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1))
        };
        report.updates += updates;
        report.epoch_loss.push(if updates > 0 { loss / updates as f64 } else { 0.0 });
        log::debug!(
            "epoch {}: mean loss {:.5} over {updates} updates",
            epoch + 1,
            report.epoch_loss[epoch]
        );
    }
    Ok((model, report))
}

struct Shared<'a> {
    corpus: &'a Corpus,
    source: &'a TopicSource<'a>,
    /// Read-only view for row lookups; parameter values are only touched
    /// through the raw tables.
    model: &'a EmbeddingModel,
    sampler: &'a NegativeSampler,
    keep: &'a [f64],
    config: &'a TrainConfig,
    total_work: f64,
    progress: AtomicU64,
}

impl Shared<'_> {
    /// Process documents `worker, worker + stride, ...` for one epoch.
    unsafe fn run_worker(&self, tables: &RawTables, rng: &mut ChaCha8Rng, worker: usize, stride: usize) -> (f64, u64) {
        let cfg = self.config;
        let lr0 = cfg.learning_rate;
        let mut scratch = Scratch::new(cfg.dim);
        let mut negatives = Vec::with_capacity(cfg.negatives);
        let mut kept: Vec<usize> = Vec::new();
        let mut rows: Vec<InputRow> = Vec::new();
        let mut loss = 0.0;
        let mut updates = 0u64;

        for (d, doc) in self.corpus.documents.iter().enumerate().skip(worker).step_by(stride) {
            let done = self.progress.fetch_add(doc.tokens.len() as u64, Ordering::Relaxed) as f64;
            let lr = lr0 * (1.0 - done / self.total_work).max(1e-4);

            kept.clear();
            for (i, &w) in doc.tokens.iter().enumerate() {
                let p = self.keep[w as usize];
                if p >= 1.0 || rng.random::<f64>() < p {
                    kept.push(i);
                }
            }

            for (pos, &i) in kept.iter().enumerate() {
                let w = doc.tokens[i];
                self.target_rows(d, i, w, &mut rows);
                let b = rng.random_range(1..=cfg.window);
                let lo = pos.saturating_sub(b);
                let hi = (pos + b).min(kept.len() - 1);
                for (q, &j) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if q == pos {
                        continue;
                    }
                    let context = doc.tokens[j];
                    negatives.clear();
                    for _ in 0..cfg.negatives {
                        let n = self.sampler.sample(rng);
                        if n != context {
                            negatives.push(n);
                        }
                    }
                    loss += step_raw(tables, &rows, context, &negatives, lr, &mut scratch);
                    updates += 1;
                }
            }
        }
        (loss, updates)
    }

    fn target_rows(&self, doc: usize, pos: usize, w: WordId, out: &mut Vec<InputRow>) {
        out.clear();
        let pair_row = |k: TopicId| {
            self.model
                .pair_index(w, k)
                .expect("every training pair has a row")
        };
        match self.source {
            TopicSource::None => out.push(InputRow {
                table: Table::Generic,
                row: w as usize,
                weight: 1.0,
            }),
            TopicSource::Labels(l) => {
                let k = l.labels[doc][pos];
                out.push(InputRow {
                    table: Table::Topic,
                    row: pair_row(k),
                    weight: 1.0,
                });
                if self.config.variant == Variant::HtleAdd {
                    out.push(InputRow {
                        table: Table::Generic,
                        row: w as usize,
                        weight: 1.0,
                    });
                }
            }
            TopicSource::Mixtures(mix) => {
                for &(k, p) in &mix[doc] {
                    out.push(InputRow {
                        table: Table::Topic,
                        row: pair_row(k),
                        weight: p,
                    });
                }
            }
        }
    }
}
