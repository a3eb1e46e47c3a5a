//! Hierarchical Dirichlet Process topic model.
//!
//! Training uses the direct-assignment collapsed Gibbs sampler: every token
//! carries a topic assignment, topics are integrated out, and the global topic
//! weights `beta` are represented explicitly by stick-breaking with one
//! leftover mass `beta_u` for not-yet-created topics. After each sweep the
//! table counts are resampled from their Antoniak distributions and `beta` is
//! redrawn from `Dir(m_1, ..., m_K, gamma)`.
//!
//! A trained [`TopicModel`] is frozen and applied to new text by fold-in
//! Gibbs sweeps that resample only document-local assignments.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;

use crate::binio;
use crate::corpus::{read_lines, Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::{TopicId, WordId};

const MAGIC: &[u8; 4] = b"HDP1";

/// Entries below this probability are omitted from doc-topic files.
pub const DOC_TOPIC_FILE_MIN_PROB: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdpHyper {
    /// Top-level concentration.
    pub gamma: f64,
    /// Document-level concentration.
    pub alpha0: f64,
    /// Symmetric Dirichlet parameter of the topic-word distributions.
    pub eta: f64,
    pub max_topics: usize,
}

impl Default for HdpHyper {
    fn default() -> Self {
        HdpHyper {
            gamma: 1.0,
            alpha0: 1.0,
            eta: 0.01,
            max_topics: 500,
        }
    }
}

impl HdpHyper {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("gamma", self.gamma)?;
        positive("alpha0", self.alpha0)?;
        positive("eta", self.eta)?;
        if self.max_topics < 1 {
            return Err(Error::InvalidArgument("max_topics must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HdpConfig {
    pub hyper: HdpHyper,
    pub iterations: usize,
    pub seed: u64,
    /// Topics holding a smaller share of the tokens are removed after training.
    pub prune_threshold: f64,
    /// Resample `gamma` and `alpha0` under Gamma(1, 1) priors after each sweep.
    pub resample_hyper: bool,
}

impl Default for HdpConfig {
    fn default() -> Self {
        HdpConfig {
            hyper: HdpHyper::default(),
            iterations: 1000,
            seed: 1,
            prune_threshold: 1e-4,
            resample_hyper: false,
        }
    }
}

/// Number of fold-in sweeps and how many of them are discarded as burn-in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldIn {
    pub sweeps: usize,
    pub burn_in: usize,
}

impl Default for FoldIn {
    fn default() -> Self {
        FoldIn {
            sweeps: 20,
            burn_in: 5,
        }
    }
}

/// Frozen HDP state: topic-word counts and global topic weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicModel {
    hyper: HdpHyper,
    vocab_size: usize,
    topic_word: Vec<u32>,
    topic_count: Vec<u64>,
    /// `K` active weights followed by the unassigned remainder.
    beta: Vec<f64>,
    /// Training-time index of each retained topic, in retained order.
    source_topics: Vec<u32>,
}

impl TopicModel {
    /// Assemble a model from raw counts. `beta` holds `K` weights, optionally
    /// followed by the unassigned remainder.
    pub fn from_counts(
        hyper: HdpHyper,
        vocab_size: usize,
        topic_word: Vec<u32>,
        mut beta: Vec<f64>,
    ) -> Result<Self> {
        hyper.validate()?;
        if vocab_size == 0 || topic_word.is_empty() || !topic_word.len().is_multiple_of(vocab_size) {
            return Err(Error::ShapeMismatch(format!(
                "{} counts do not form rows of length {vocab_size}",
                topic_word.len()
            )));
        }
        let k = topic_word.len() / vocab_size;
        if beta.len() == k {
            beta.push(0.0);
        }
        if beta.len() != k + 1 || beta.iter().any(|&b| !(b >= 0.0) || !b.is_finite()) {
            return Err(Error::ShapeMismatch(format!(
                "expected {k} or {} non-negative topic weights, got {}",
                k + 1,
                beta.len()
            )));
        }
        let topic_count = topic_word
            .chunks(vocab_size)
            .map(|row| row.iter().map(|&c| c as u64).sum())
            .collect();
        Ok(TopicModel {
            hyper,
            vocab_size,
            topic_word,
            topic_count,
            beta,
            source_topics: (0..k as u32).collect(),
        })
    }

    pub fn num_topics(&self) -> usize {
        self.topic_count.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn hyper(&self) -> &HdpHyper {
        &self.hyper
    }

    pub fn topic_word_count(&self, topic: TopicId, word: WordId) -> u32 {
        self.topic_word[topic as usize * self.vocab_size + word as usize]
    }

    pub fn topic_count(&self, topic: TopicId) -> u64 {
        self.topic_count[topic as usize]
    }

    pub fn total_count(&self) -> u64 {
        self.topic_count.iter().sum()
    }

    /// Global weights of the active topics (without the unassigned remainder).
    pub fn beta(&self) -> &[f64] {
        &self.beta[..self.num_topics()]
    }

    pub fn beta_unassigned(&self) -> f64 {
        self.beta[self.num_topics()]
    }

    /// Training-time topic index of each retained topic.
    pub fn source_topics(&self) -> &[u32] {
        &self.source_topics
    }

    /// Smoothed topic-word probability `(n_kw + eta) / (n_k + eta |V|)`.
    #[inline]
    pub fn phi(&self, topic: TopicId, word: WordId) -> f64 {
        let eta = self.hyper.eta;
        (self.topic_word_count(topic, word) as f64 + eta)
            / (self.topic_count[topic as usize] as f64 + eta * self.vocab_size as f64)
    }

    /// The full smoothed word distribution of one topic.
    pub fn topic_distribution(&self, topic: TopicId) -> Vec<f64> {
        (0..self.vocab_size as WordId).map(|w| self.phi(topic, w)).collect()
    }

    /// `beta` restricted to active topics and renormalized.
    pub fn global_distribution(&self) -> Vec<f64> {
        normalized(self.beta())
    }

    /// Topic with the largest global weight; lowest id on ties.
    pub fn most_probable_topic(&self) -> TopicId {
        argmax(self.beta()) as TopicId
    }

    /// Fold-in Gibbs sampling of one document with topics frozen.
    ///
    /// Tokens outside the model vocabulary do not participate and are labeled
    /// with the globally most probable topic.
    pub fn fold_in<R: Rng + ?Sized>(
        &self,
        tokens: &[WordId],
        cfg: FoldIn,
        rng: &mut R,
    ) -> (Vec<TopicId>, DocTopicDist) {
        let k_total = self.num_topics();
        let fallback = self.most_probable_topic();
        let prior: Vec<f64> = self.beta().iter().map(|b| self.hyper.alpha0 * b).collect();
        let prior_sum: f64 = prior.iter().sum();

        let known: Vec<usize> = (0..tokens.len())
            .filter(|&i| (tokens[i] as usize) < self.vocab_size)
            .collect();
        let mut labels = vec![fallback; tokens.len()];
        if known.is_empty() {
            return (labels, DocTopicDist(self.global_distribution()));
        }

        let mut phi = Vec::with_capacity(known.len() * k_total);
        for &i in &known {
            phi.extend((0..k_total as TopicId).map(|k| self.phi(k, tokens[i])));
        }

        let mut ndk = vec![0u32; k_total];
        let mut weights = vec![0.0; k_total];
        let mut z = vec![0usize; known.len()];
        for (j, zj) in z.iter_mut().enumerate() {
            let row = &phi[j * k_total..(j + 1) * k_total];
            for k in 0..k_total {
                weights[k] = (ndk[k] as f64 + prior[k]) * row[k];
            }
            *zj = sample_discrete(&weights, rng);
            ndk[*zj] += 1;
        }

        let n = known.len() as f64;
        let theta = |ndk: &[u32], acc: &mut [f64]| {
            for k in 0..k_total {
                acc[k] += (ndk[k] as f64 + prior[k]) / (n + prior_sum);
            }
        };
        let mut acc = vec![0.0; k_total];
        let mut kept = 0usize;
        for sweep in 0..cfg.sweeps {
            for (j, zj) in z.iter_mut().enumerate() {
                ndk[*zj] -= 1;
                let row = &phi[j * k_total..(j + 1) * k_total];
                for k in 0..k_total {
                    weights[k] = (ndk[k] as f64 + prior[k]) * row[k];
                }
                *zj = sample_discrete(&weights, rng);
                ndk[*zj] += 1;
            }
            if sweep >= cfg.burn_in {
                theta(&ndk, &mut acc);
                kept += 1;
            }
        }
        if kept == 0 {
            theta(&ndk, &mut acc);
        }
        for (j, &i) in known.iter().enumerate() {
            labels[i] = z[j] as TopicId;
        }
        (labels, DocTopicDist(normalized(&acc)))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        binio::write_u32(&mut w, self.num_topics() as u32)?;
        binio::write_u32(&mut w, self.vocab_size as u32)?;
        binio::write_f64(&mut w, self.hyper.gamma)?;
        binio::write_f64(&mut w, self.hyper.alpha0)?;
        binio::write_f64(&mut w, self.hyper.eta)?;
        binio::write_u32(&mut w, self.hyper.max_topics as u32)?;
        for &c in &self.topic_word {
            binio::write_u32(&mut w, c)?;
        }
        binio::write_f64s(&mut w, &self.beta)?;
        for &s in &self.source_topics {
            binio::write_u32(&mut w, s)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let magic = binio::read_magic(&mut r)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "not a topic model file (magic {:?})",
                String::from_utf8_lossy(&magic)
            )));
        }
        let k = binio::read_u32(&mut r)? as usize;
        let v = binio::read_u32(&mut r)? as usize;
        let hyper = HdpHyper {
            gamma: binio::read_f64(&mut r)?,
            alpha0: binio::read_f64(&mut r)?,
            eta: binio::read_f64(&mut r)?,
            max_topics: binio::read_u32(&mut r)? as usize,
        };
        let topic_word = (0..k * v)
            .map(|_| binio::read_u32(&mut r))
            .collect::<std::io::Result<Vec<_>>>()?;
        let beta = binio::read_f64s(&mut r, k + 1)?;
        let source_topics = (0..k)
            .map(|_| binio::read_u32(&mut r))
            .collect::<std::io::Result<Vec<_>>>()?;
        let mut model = TopicModel::from_counts(hyper, v, topic_word, beta)?;
        model.source_topics = source_topics;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(File::open(path)?))
    }
}

/// One topic id per token, congruent with the labeled corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopicLabeling {
    pub num_topics: usize,
    pub labels: Vec<Vec<TopicId>>,
}

impl TopicLabeling {
    pub fn check_shape(&self, corpus: &Corpus) -> Result<()> {
        if self.labels.len() != corpus.len() {
            return Err(Error::ShapeMismatch(format!(
                "labeling has {} documents, corpus has {}",
                self.labels.len(),
                corpus.len()
            )));
        }
        for (doc, labels) in corpus.documents.iter().zip(&self.labels) {
            if doc.tokens.len() != labels.len() {
                return Err(Error::ShapeMismatch(format!(
                    "document {} has {} tokens but {} labels",
                    doc.id,
                    doc.tokens.len(),
                    labels.len()
                )));
            }
        }
        if let Some(&bad) = self.labels.iter().flatten().find(|&&k| k as usize >= self.num_topics) {
            return Err(Error::ShapeMismatch(format!(
                "topic label {bad} out of range for {} topics",
                self.num_topics
            )));
        }
        Ok(())
    }

    /// Write `word|k` tokens with the corpus line structure.
    pub fn write_to<W: Write>(&self, corpus: &Corpus, mut w: W) -> Result<()> {
        self.check_shape(corpus)?;
        for (doc, labels) in corpus.documents.iter().zip(&self.labels) {
            for (i, (&t, &k)) in doc.tokens.iter().zip(labels).enumerate() {
                if i > 0 {
                    w.write_all(b" ")?;
                }
                write!(w, "{}|{}", corpus.vocab.token(t).unwrap_or_default(), k)?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(corpus, &mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Read a `word|k` file. Returns the implied corpus and the labels.
    ///
    /// `num_topics` defaults to one more than the largest label.
    pub fn load(
        path: impl AsRef<Path>,
        vocab: &Vocabulary,
        num_topics: Option<usize>,
    ) -> Result<(Corpus, TopicLabeling)> {
        let path = path.as_ref();
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        let mut max_label = None;
        for (lineno, line) in read_lines(path)? {
            let line = line?;
            let mut ids = Vec::new();
            let mut ks = Vec::new();
            for tok in line.split_whitespace() {
                let (word, k) = tok
                    .rsplit_once('|')
                    .ok_or_else(|| Error::parse(path, lineno, format!("token {tok:?} lacks |topic")))?;
                let k: TopicId = k
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad topic id in {tok:?}")))?;
                let id = vocab
                    .id(word)
                    .ok_or_else(|| Error::parse(path, lineno, format!("word {word:?} not in vocabulary")))?;
                max_label = max_label.max(Some(k));
                ids.push(id);
                ks.push(k);
            }
            docs.push(ids);
            labels.push(ks);
        }
        let num_topics = num_topics.unwrap_or_else(|| max_label.map_or(1, |m| m as usize + 1));
        let labeling = TopicLabeling { num_topics, labels };
        let corpus = Corpus::from_ids(docs, vocab.clone())?;
        labeling.check_shape(&corpus)?;
        Ok((corpus, labeling))
    }
}

/// Probability vector over the `K` topics of one document.
#[derive(Clone, Debug, PartialEq)]
pub struct DocTopicDist(pub Vec<f64>);

impl DocTopicDist {
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn num_topics(&self) -> usize {
        self.0.len()
    }

    pub fn argmax(&self) -> TopicId {
        argmax(&self.0) as TopicId
    }

    /// Write `doc_id k:p ...` lines, keeping entries with `p >= 1e-4` and
    /// renormalizing the kept entries.
    pub fn write_all<W: Write>(dists: &[DocTopicDist], mut w: W) -> Result<()> {
        for (d, dist) in dists.iter().enumerate() {
            write!(w, "{d}")?;
            let kept: Vec<(usize, f64)> = dist
                .0
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, p)| p >= DOC_TOPIC_FILE_MIN_PROB)
                .collect();
            let z: f64 = kept.iter().map(|&(_, p)| p).sum();
            for (k, p) in kept {
                write!(w, " {k}:{:.12}", p / z)?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_all(dists: &[DocTopicDist], path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        Self::write_all(dists, &mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Read a doc-topic file into dense vectors of length `num_topics`
    /// (default: one more than the largest topic id seen).
    pub fn load_all(path: impl AsRef<Path>, num_topics: Option<usize>) -> Result<Vec<DocTopicDist>> {
        let path = path.as_ref();
        let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut max_k = 0usize;
        for (lineno, line) in read_lines(path)? {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(doc) = fields.next() else { continue };
            let doc: usize = doc
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad document id {doc:?}")))?;
            if doc != sparse.len() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected document {}, found {doc}", sparse.len()),
                ));
            }
            let mut entries = Vec::new();
            for f in fields {
                let parsed = f
                    .split_once(':')
                    .and_then(|(k, p)| Some((k.parse::<usize>().ok()?, p.parse::<f64>().ok()?)));
                let (k, p) = parsed.ok_or_else(|| Error::parse(path, lineno, format!("bad entry {f:?}")))?;
                if !(p >= 0.0) {
                    return Err(Error::parse(path, lineno, format!("negative probability in {f:?}")));
                }
                max_k = max_k.max(k + 1);
                entries.push((k, p));
            }
            sparse.push(entries);
        }
        let k_total = num_topics.unwrap_or(max_k).max(1);
        if max_k > k_total {
            return Err(Error::ShapeMismatch(format!(
                "topic id {} out of range for {k_total} topics",
                max_k - 1
            )));
        }
        Ok(sparse
            .into_iter()
            .map(|entries| {
                let mut v = vec![0.0; k_total];
                for (k, p) in entries {
                    v[k] += p;
                }
                let z: f64 = v.iter().sum();
                if z > 0.0 {
                    v.iter_mut().for_each(|p| *p /= z);
                } else {
                    v.iter_mut().for_each(|p| *p = 1.0 / k_total as f64);
                }
                DocTopicDist(v)
            })
            .collect())
    }
}

struct Slot {
    word_counts: Vec<u32>,
    total: u64,
    beta: f64,
    born: u64,
}

/// Direct-assignment Gibbs sampler state for one chain.
pub struct HdpSampler<'a> {
    docs: &'a [Document],
    vocab_size: usize,
    hyper: HdpHyper,
    z: Vec<Vec<u32>>,
    doc_counts: Vec<Vec<u32>>,
    slots: Vec<Slot>,
    active: Vec<usize>,
    free: Vec<usize>,
    beta_u: f64,
    born_counter: u64,
    total_tokens: u64,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl<'a> HdpSampler<'a> {
    /// Initialize by sequentially adding every token from its conditional.
    pub fn new(corpus: &'a Corpus, hyper: HdpHyper, seed: u64) -> Result<Self> {
        hyper.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let total_tokens = corpus.token_count() as u64;
        if total_tokens == 0 {
            return Err(Error::EmptyCorpus);
        }
        let vocab_size = corpus.vocab.len();
        if let Some(bad) = corpus
            .documents
            .iter()
            .flat_map(|d| &d.tokens)
            .find(|&&w| w as usize >= vocab_size)
        {
            return Err(Error::UnknownWord(*bad));
        }
        let mut s = HdpSampler {
            docs: &corpus.documents,
            vocab_size,
            hyper,
            z: corpus.documents.iter().map(|d| vec![0; d.tokens.len()]).collect(),
            doc_counts: vec![Vec::new(); corpus.len()],
            slots: Vec::new(),
            active: Vec::new(),
            free: Vec::new(),
            beta_u: 1.0,
            born_counter: 0,
            total_tokens,
            rng: ChaCha8Rng::seed_from_u64(seed),
            weights: Vec::new(),
        };
        for d in 0..s.docs.len() {
            for i in 0..s.docs[d].tokens.len() {
                let w = s.docs[d].tokens[i] as usize;
                let k = s.draw_topic(d, w, true);
                s.z[d][i] = k as u32;
                s.add(d, w, k);
            }
        }
        s.resample_beta();
        Ok(s)
    }

    pub fn num_topics(&self) -> usize {
        self.active.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn hyper(&self) -> &HdpHyper {
        &self.hyper
    }

    /// Tokens currently counted in topic totals.
    pub fn assigned_tokens(&self) -> u64 {
        self.active.iter().map(|&s| self.slots[s].total).sum()
    }

    /// One Gibbs sweep over all tokens followed by a `beta` update.
    pub fn sweep(&mut self) {
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].tokens.len() {
                let w = self.docs[d].tokens[i] as usize;
                let old = self.z[d][i] as usize;
                self.remove(d, w, old);
                let k = self.draw_topic(d, w, true);
                self.z[d][i] = k as u32;
                self.add(d, w, k);
            }
        }
        self.resample_beta();
    }

    pub fn run(&mut self, sweeps: usize, resample_hyper: bool) {
        for _ in 0..sweeps {
            self.sweep();
            if resample_hyper {
                self.resample_concentrations();
            }
        }
    }

    /// Joint log probability of the words given the current assignments.
    pub fn log_likelihood(&self) -> f64 {
        let eta = self.hyper.eta;
        let v = self.vocab_size as f64;
        let mut ll = 0.0;
        for (d, doc) in self.docs.iter().enumerate() {
            for (i, &w) in doc.tokens.iter().enumerate() {
                let slot = &self.slots[self.z[d][i] as usize];
                ll += ((slot.word_counts[w as usize] as f64 + eta) / (slot.total as f64 + eta * v)).ln();
            }
        }
        ll
    }

    /// Recount everything from the assignments and compare with the cached counts.
    pub fn check_invariants(&self) -> Result<()> {
        let n_slots = self.slots.len();
        let mut word_counts = vec![vec![0u32; self.vocab_size]; n_slots];
        let mut totals = vec![0u64; n_slots];
        for (d, doc) in self.docs.iter().enumerate() {
            let mut local = vec![0u32; n_slots];
            for (i, &w) in doc.tokens.iter().enumerate() {
                let k = self.z[d][i] as usize;
                if k >= n_slots || !self.is_active(k) {
                    return Err(Error::ShapeMismatch(format!("token assigned to dead topic slot {k}")));
                }
                word_counts[k][w as usize] += 1;
                totals[k] += 1;
                local[k] += 1;
            }
            for k in 0..n_slots {
                if local[k] != self.ndk(d, k) {
                    return Err(Error::ShapeMismatch(format!("document {d} count drift in slot {k}")));
                }
            }
        }
        for &k in &self.active {
            if totals[k] != self.slots[k].total || word_counts[k] != self.slots[k].word_counts {
                return Err(Error::ShapeMismatch(format!("topic slot {k} count drift")));
            }
            if totals[k] == 0 {
                return Err(Error::ShapeMismatch(format!("empty active topic slot {k}")));
            }
        }
        if self.assigned_tokens() != self.total_tokens {
            return Err(Error::ShapeMismatch(format!(
                "{} tokens assigned, {} in corpus",
                self.assigned_tokens(),
                self.total_tokens
            )));
        }
        if self.active.len() > self.hyper.max_topics {
            return Err(Error::ShapeMismatch("more active topics than max_topics".into()));
        }
        let beta_sum: f64 = self.active.iter().map(|&k| self.slots[k].beta).sum::<f64>() + self.beta_u;
        if (beta_sum - 1.0).abs() > 1e-9 {
            return Err(Error::ShapeMismatch(format!("beta sums to {beta_sum}")));
        }
        Ok(())
    }

    /// Prune small topics, reassign their tokens among the survivors and
    /// freeze the result. Retained topics keep their creation order.
    pub fn into_model(mut self, prune_threshold: f64) -> TopicModel {
        let total = self.total_tokens as f64;
        let largest = *self
            .active
            .iter()
            .max_by(|&&a, &&b| self.slots[a].total.cmp(&self.slots[b].total).then(b.cmp(&a)))
            .expect("at least one topic");
        let (keep, drop): (Vec<usize>, Vec<usize>) = self
            .active
            .iter()
            .partition(|&&k| k == largest || self.slots[k].total as f64 / total >= prune_threshold);

        if !drop.is_empty() {
            for &k in &drop {
                self.beta_u += self.slots[k].beta;
                self.slots[k].beta = 0.0;
            }
            self.active = keep.clone();
            let mut is_dropped = vec![false; self.slots.len()];
            for &k in &drop {
                is_dropped[k] = true;
            }
            for d in 0..self.docs.len() {
                for i in 0..self.docs[d].tokens.len() {
                    let old = self.z[d][i] as usize;
                    if !is_dropped[old] {
                        continue;
                    }
                    let w = self.docs[d].tokens[i] as usize;
                    self.remove_counts(d, w, old);
                    let k = self.draw_topic(d, w, false);
                    self.z[d][i] = k as u32;
                    self.add(d, w, k);
                }
            }
        }

        let mut order = keep;
        order.sort_by_key(|&k| self.slots[k].born);
        let mut topic_word = Vec::with_capacity(order.len() * self.vocab_size);
        let mut beta = Vec::with_capacity(order.len() + 1);
        let mut source_topics = Vec::with_capacity(order.len());
        for &k in &order {
            topic_word.extend_from_slice(&self.slots[k].word_counts);
            beta.push(self.slots[k].beta);
            source_topics.push(self.slots[k].born as u32);
        }
        beta.push(self.beta_u);
        let mut model = TopicModel::from_counts(self.hyper, self.vocab_size, topic_word, beta)
            .expect("sampler state is consistent");
        model.source_topics = source_topics;
        model
    }

    fn is_active(&self, k: usize) -> bool {
        self.active.contains(&k)
    }

    #[inline]
    fn ndk(&self, d: usize, k: usize) -> u32 {
        self.doc_counts[d].get(k).copied().unwrap_or(0)
    }

    fn add(&mut self, d: usize, w: usize, k: usize) {
        let counts = &mut self.doc_counts[d];
        if counts.len() <= k {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
        self.slots[k].word_counts[w] += 1;
        self.slots[k].total += 1;
    }

    fn remove_counts(&mut self, d: usize, w: usize, k: usize) {
        self.doc_counts[d][k] -= 1;
        self.slots[k].word_counts[w] -= 1;
        self.slots[k].total -= 1;
    }

    /// Remove a token and retire its topic if it becomes empty.
    fn remove(&mut self, d: usize, w: usize, k: usize) {
        self.remove_counts(d, w, k);
        if self.slots[k].total == 0 {
            self.beta_u += self.slots[k].beta;
            self.slots[k].beta = 0.0;
            self.active.retain(|&s| s != k);
            self.free.push(k);
        }
    }

    /// Sample a topic for word `w` in document `d` (token already removed).
    /// Returns a slot index, creating a new topic if that option is drawn.
    fn draw_topic(&mut self, d: usize, w: usize, allow_new: bool) -> usize {
        let alpha0 = self.hyper.alpha0;
        let eta = self.hyper.eta;
        let v_eta = eta * self.vocab_size as f64;
        self.weights.clear();
        for &k in &self.active {
            let slot = &self.slots[k];
            let ndk = self.doc_counts[d].get(k).copied().unwrap_or(0) as f64;
            self.weights.push(
                (ndk + alpha0 * slot.beta) * (slot.word_counts[w] as f64 + eta) / (slot.total as f64 + v_eta),
            );
        }
        let can_grow = allow_new && self.active.len() < self.hyper.max_topics;
        if can_grow {
            self.weights.push(alpha0 * self.beta_u / self.vocab_size as f64);
        }
        let j = sample_discrete(&self.weights, &mut self.rng);
        if j < self.active.len() {
            self.active[j]
        } else {
            self.new_topic()
        }
    }

    fn new_topic(&mut self) -> usize {
        let b = Beta::new(1.0, self.hyper.gamma)
            .expect("gamma > 0")
            .sample(&mut self.rng);
        let beta = b * self.beta_u;
        self.beta_u *= 1.0 - b;
        let born = self.born_counter;
        self.born_counter += 1;
        let k = match self.free.pop() {
            Some(k) => {
                let slot = &mut self.slots[k];
                slot.word_counts.iter_mut().for_each(|c| *c = 0);
                slot.total = 0;
                slot.beta = beta;
                slot.born = born;
                k
            }
            None => {
                self.slots.push(Slot {
                    word_counts: vec![0; self.vocab_size],
                    total: 0,
                    beta,
                    born,
                });
                self.slots.len() - 1
            }
        };
        self.active.push(k);
        k
    }

    /// Table counts per topic, each drawn from its Antoniak distribution.
    fn sample_tables(&mut self) -> Vec<u64> {
        let alpha0 = self.hyper.alpha0;
        let mut m = vec![0u64; self.active.len()];
        for d in 0..self.docs.len() {
            for (j, &k) in self.active.iter().enumerate() {
                let n = self.doc_counts[d].get(k).copied().unwrap_or(0);
                if n == 0 {
                    continue;
                }
                let ab = alpha0 * self.slots[k].beta;
                m[j] += 1;
                for i in 1..n {
                    if self.rng.random::<f64>() < ab / (ab + i as f64) {
                        m[j] += 1;
                    }
                }
            }
        }
        m
    }

    fn resample_beta(&mut self) {
        let m = self.sample_tables();
        let mut draws = Vec::with_capacity(m.len() + 1);
        for &mk in &m {
            draws.push(gamma_draw(mk as f64, &mut self.rng));
        }
        draws.push(gamma_draw(self.hyper.gamma, &mut self.rng));
        let z: f64 = draws.iter().sum();
        if !(z > 0.0) {
            return;
        }
        for (j, &k) in self.active.iter().enumerate() {
            self.slots[k].beta = draws[j] / z;
        }
        self.beta_u = draws[m.len()] / z;
        // Normalization residue goes to the unassigned mass.
        let s: f64 = self.active.iter().map(|&k| self.slots[k].beta).sum();
        self.beta_u = (1.0 - s).max(0.0);
    }

    /// Auxiliary-variable updates for `alpha0` and `gamma` with Gamma(1, 1) priors.
    fn resample_concentrations(&mut self) {
        let (a, b) = (1.0, 1.0);
        let m = self.sample_tables();
        let m_total: f64 = m.iter().sum::<u64>() as f64;
        let k = self.active.len() as f64;

        let alpha0 = self.hyper.alpha0;
        let mut sum_log_w = 0.0;
        let mut sum_s = 0.0;
        for doc in self.docs {
            let n = doc.tokens.len() as f64;
            if n == 0.0 {
                continue;
            }
            let w: f64 = Beta::new(alpha0 + 1.0, n).expect("positive").sample(&mut self.rng);
            sum_log_w += w.max(f64::MIN_POSITIVE).ln();
            if self.rng.random::<f64>() < n / (n + alpha0) {
                sum_s += 1.0;
            }
        }
        let shape = (a + m_total - sum_s).max(f64::MIN_POSITIVE);
        self.hyper.alpha0 = gamma_draw(shape, &mut self.rng) / (b - sum_log_w);

        let gamma = self.hyper.gamma;
        let eta: f64 = Beta::new(gamma + 1.0, m_total.max(1.0))
            .expect("positive")
            .sample(&mut self.rng);
        let rate = b - eta.max(f64::MIN_POSITIVE).ln();
        let odds = (a + k - 1.0) / (m_total * rate);
        let shape = if self.rng.random::<f64>() < odds / (1.0 + odds) {
            a + k
        } else {
            a + k - 1.0
        };
        self.hyper.gamma = gamma_draw(shape.max(f64::MIN_POSITIVE), &mut self.rng) / rate;
    }
}

/// Train a topic model with a single deterministic chain.
pub fn train_hdp(corpus: &Corpus, config: &HdpConfig) -> Result<TopicModel> {
    if config.iterations < 1 {
        return Err(Error::InvalidArgument("iterations must be >= 1".into()));
    }
    let mut sampler = HdpSampler::new(corpus, config.hyper, config.seed)?;
    for it in 0..config.iterations {
        sampler.sweep();
        if config.resample_hyper {
            sampler.resample_concentrations();
        }
        if log::log_enabled!(log::Level::Debug) && (it + 1) % 50 == 0 {
            log::debug!(
                "hdp iteration {}: K={} loglik={:.3}",
                it + 1,
                sampler.num_topics(),
                sampler.log_likelihood()
            );
        }
    }
    Ok(sampler.into_model(config.prune_threshold))
}

pub(crate) fn doc_rng(seed: u64, doc: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(doc as u64);
    rng
}

/// Fold every document of `corpus` into `model`, returning hard labels and
/// averaged document-topic distributions. Each document uses its own random
/// stream so the result does not depend on scheduling.
pub fn fold_in_corpus(
    model: &TopicModel,
    corpus: &Corpus,
    seed: u64,
    cfg: FoldIn,
) -> Result<(TopicLabeling, Vec<DocTopicDist>)> {
    if corpus.vocab.len() != model.vocab_size() {
        return Err(Error::ShapeMismatch(format!(
            "corpus vocabulary has {} words, model was trained on {}",
            corpus.vocab.len(),
            model.vocab_size()
        )));
    }
    let (labels, dists): (Vec<_>, Vec<_>) = corpus
        .documents
        .par_iter()
        .map(|doc| model.fold_in(&doc.tokens, cfg, &mut doc_rng(seed, doc.id)))
        .unzip();
    Ok((
        TopicLabeling {
            num_topics: model.num_topics(),
            labels,
        },
        dists,
    ))
}

/// Hard-label every token of `corpus` with a sampled topic.
pub fn label_corpus(model: &TopicModel, corpus: &Corpus, seed: u64, cfg: FoldIn) -> Result<TopicLabeling> {
    fold_in_corpus(model, corpus, seed, cfg).map(|(l, _)| l)
}

/// Averaged fold-in topic distribution of one document; global weights if empty.
pub fn infer_doc_topics(model: &TopicModel, doc: &Document, seed: u64, cfg: FoldIn) -> DocTopicDist {
    model.fold_in(&doc.tokens, cfg, &mut doc_rng(seed, doc.id)).1
}

/// `Σ log φ_z(w)` over all labeled tokens.
pub fn corpus_log_likelihood(model: &TopicModel, labeling: &TopicLabeling, corpus: &Corpus) -> Result<f64> {
    labeling.check_shape(corpus)?;
    if labeling.num_topics > model.num_topics() {
        return Err(Error::ShapeMismatch(format!(
            "labeling uses {} topics, model has {}",
            labeling.num_topics,
            model.num_topics()
        )));
    }
    let mut ll = 0.0;
    for (doc, labels) in corpus.documents.iter().zip(&labeling.labels) {
        for (&w, &k) in doc.tokens.iter().zip(labels) {
            if w as usize >= model.vocab_size() {
                return Err(Error::UnknownWord(w));
            }
            ll += model.phi(k, w).ln();
        }
    }
    Ok(ll)
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Draw an index proportionally to non-negative `weights`.
pub(crate) fn sample_discrete<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // Rounding can leave u marginally above the last bucket.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let z: f64 = v.iter().sum();
    if z > 0.0 {
        v.iter().map(|x| x / z).collect()
    } else {
        vec![1.0 / v.len() as f64; v.len()]
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
