//! Skip-gram embeddings with topic-sensitive target representations.
//!
//! The input (target) side of the network depends on the [`Variant`]:
//!
//! | variant   | target representation                      |
//! |-----------|--------------------------------------------|
//! | `Sge`     | `r0(w)`                                    |
//! | `Htle`    | `r(w, τ)`                                  |
//! | `HtleAdd` | `r'(w, τ) + r0(w)`                         |
//! | `Stle`    | `Σ_k p(τ_k | d) · r''(w, τ_k)`             |
//!
//! The output (context) side is always one row per plain word.

mod io;
mod sgns;
mod train;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::inference::cosine_unchecked;
use crate::{TopicId, WordId};

pub use io::{export_text, load_model, save_model, FORMAT_VERSION};
pub use sgns::{logistic, sgns_loss, sgns_step, Target};
pub use train::{train, train_with_report, TrainConfig, TrainReport};

pub(crate) const NO_ROW: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Sge,
    Htle,
    HtleAdd,
    Stle,
}

impl Variant {
    pub fn has_topic_table(self) -> bool {
        !matches!(self, Variant::Sge)
    }

    pub fn has_generic_table(self) -> bool {
        matches!(self, Variant::Sge | Variant::HtleAdd)
    }

    pub fn needs_labeling(self) -> bool {
        matches!(self, Variant::Htle | Variant::HtleAdd)
    }

    pub fn needs_doc_topics(self) -> bool {
        matches!(self, Variant::Stle)
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Variant::Sge => 0,
            Variant::Htle => 1,
            Variant::HtleAdd => 2,
            Variant::Stle => 3,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0 => Variant::Sge,
            1 => Variant::Htle,
            2 => Variant::HtleAdd,
            3 => Variant::Stle,
            _ => return None,
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Sge => "sge",
            Variant::Htle => "htle",
            Variant::HtleAdd => "htleadd",
            Variant::Stle => "stle",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sge" => Ok(Variant::Sge),
            "htle" => Ok(Variant::Htle),
            "htleadd" | "htle-add" | "htle_add" => Ok(Variant::HtleAdd),
            "stle" => Ok(Variant::Stle),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

/// Topic information accompanying a target word.
#[derive(Clone, Copy, Debug)]
pub enum TopicInfo<'a> {
    /// No context; topic variants use the word's dominant training topic.
    None,
    Hard(TopicId),
    /// Probability over all `K` topics.
    Dist(&'a [f64]),
}

/// An entry of the input space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entry {
    Word(WordId),
    Pair(WordId, TopicId),
}

impl Entry {
    pub fn word(self) -> WordId {
        match self {
            Entry::Word(w) | Entry::Pair(w, _) => w,
        }
    }

    /// `word` for plain entries, `word#k` for topic entries.
    pub fn name(self, vocab: &Vocabulary) -> String {
        match self {
            Entry::Word(w) => vocab.token(w).unwrap_or("<unk>").to_string(),
            Entry::Pair(w, k) => format!("{}#{k}", vocab.token(w).unwrap_or("<unk>")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub entry: Entry,
    pub cosine: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Table {
    Topic,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct InputRow {
    pub table: Table,
    pub row: usize,
    pub weight: f64,
}

/// Parameter tables of a trained model.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    variant: Variant,
    dim: usize,
    num_topics: usize,
    vocab_size: usize,
    /// Sorted (word, topic) pairs owning a row of `topic_rows`.
    pairs: Vec<(WordId, TopicId)>,
    pair_index: HashMap<(WordId, TopicId), u32>,
    /// Per word, the pair row used when a requested pair has no row.
    fallback: Vec<u32>,
    topic_rows: Vec<f64>,
    generic_rows: Vec<f64>,
    output_rows: Vec<f64>,
}

impl EmbeddingModel {
    /// A model with all rows zero.
    ///
    /// `pairs` lists the (word, topic) entries with their training weight; the
    /// heaviest pair of each word becomes that word's fallback row. Ignored
    /// for `Sge`.
    pub fn new(
        variant: Variant,
        dim: usize,
        num_topics: usize,
        vocab_size: usize,
        pairs: &[((WordId, TopicId), f64)],
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        let mut sorted: Vec<((WordId, TopicId), f64)> = if variant.has_topic_table() {
            pairs.to_vec()
        } else {
            Vec::new()
        };
        sorted.sort_by_key(|p| p.0);
        sorted.dedup_by_key(|p| p.0);
        for &((w, k), _) in &sorted {
            if w as usize >= vocab_size || k as usize >= num_topics {
                return Err(Error::ShapeMismatch(format!(
                    "pair ({w}, {k}) outside {vocab_size} words x {num_topics} topics"
                )));
            }
        }
        let mut fallback = vec![NO_ROW; vocab_size];
        let mut best = vec![f64::NEG_INFINITY; vocab_size];
        for (i, &((w, _), weight)) in sorted.iter().enumerate() {
            if weight > best[w as usize] {
                best[w as usize] = weight;
                fallback[w as usize] = i as u32;
            }
        }
        let pair_list: Vec<(WordId, TopicId)> = sorted.iter().map(|p| p.0).collect();
        Ok(Self::from_tables(
            variant,
            dim,
            num_topics,
            vocab_size,
            pair_list,
            fallback,
            vec![0.0; sorted.len() * dim],
            if variant.has_generic_table() {
                vec![0.0; vocab_size * dim]
            } else {
                Vec::new()
            },
            vec![0.0; vocab_size * dim],
        ))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_tables(
        variant: Variant,
        dim: usize,
        num_topics: usize,
        vocab_size: usize,
        pairs: Vec<(WordId, TopicId)>,
        fallback: Vec<u32>,
        topic_rows: Vec<f64>,
        generic_rows: Vec<f64>,
        output_rows: Vec<f64>,
    ) -> Self {
        let pair_index = pairs.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();
        EmbeddingModel {
            variant,
            dim,
            num_topics,
            vocab_size,
            pairs,
            pair_index,
            fallback,
            topic_rows,
            generic_rows,
            output_rows,
        }
    }

    /// Input rows uniform in `[-0.5/dim, 0.5/dim]`, topic table first.
    pub fn init_uniform<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let scale = 0.5 / self.dim as f64;
        for x in self.topic_rows.iter_mut().chain(self.generic_rows.iter_mut()) {
            *x = (rng.random::<f64>() * 2.0 - 1.0) * scale;
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn pairs(&self) -> &[(WordId, TopicId)] {
        &self.pairs
    }

    pub fn has_pair(&self, word: WordId, topic: TopicId) -> bool {
        self.pair_index.contains_key(&(word, topic))
    }

    /// Topics for which `word` has its own row.
    pub fn topics_of(&self, word: WordId) -> Vec<TopicId> {
        let start = self.pairs.partition_point(|&(w, _)| w < word);
        self.pairs[start..]
            .iter()
            .take_while(|&&(w, _)| w == word)
            .map(|&(_, k)| k)
            .collect()
    }

    /// The word's dominant training topic, if it has topic rows.
    pub fn dominant_topic(&self, word: WordId) -> Option<TopicId> {
        match self.fallback.get(word as usize) {
            Some(&r) if r != NO_ROW => Some(self.pairs[r as usize].1),
            _ => None,
        }
    }

    pub fn topic_rows(&self) -> &[f64] {
        &self.topic_rows
    }

    pub fn topic_rows_mut(&mut self) -> &mut [f64] {
        &mut self.topic_rows
    }

    pub fn generic_rows(&self) -> &[f64] {
        &self.generic_rows
    }

    pub fn generic_rows_mut(&mut self) -> &mut [f64] {
        &mut self.generic_rows
    }

    pub fn output_rows(&self) -> &[f64] {
        &self.output_rows
    }

    pub fn output_rows_mut(&mut self) -> &mut [f64] {
        &mut self.output_rows
    }

    pub fn pair_row(&self, word: WordId, topic: TopicId) -> Option<&[f64]> {
        let &r = self.pair_index.get(&(word, topic))?;
        Some(self.row(Table::Topic, r as usize))
    }

    pub fn pair_row_mut(&mut self, word: WordId, topic: TopicId) -> Option<&mut [f64]> {
        let r = *self.pair_index.get(&(word, topic))? as usize;
        Some(&mut self.topic_rows[r * self.dim..(r + 1) * self.dim])
    }

    pub fn generic_row(&self, word: WordId) -> Option<&[f64]> {
        if self.generic_rows.is_empty() || word as usize >= self.vocab_size {
            return None;
        }
        Some(self.row(Table::Generic, word as usize))
    }

    pub fn generic_row_mut(&mut self, word: WordId) -> Option<&mut [f64]> {
        if self.generic_rows.is_empty() || word as usize >= self.vocab_size {
            return None;
        }
        let d = self.dim;
        Some(&mut self.generic_rows[word as usize * d..(word as usize + 1) * d])
    }

    /// Context representation of a plain word.
    pub fn output_row(&self, word: WordId) -> Option<&[f64]> {
        if word as usize >= self.vocab_size {
            return None;
        }
        let d = self.dim;
        Some(&self.output_rows[word as usize * d..(word as usize + 1) * d])
    }

    pub fn output_row_mut(&mut self, word: WordId) -> Option<&mut [f64]> {
        if word as usize >= self.vocab_size {
            return None;
        }
        let d = self.dim;
        Some(&mut self.output_rows[word as usize * d..(word as usize + 1) * d])
    }

    pub(crate) fn row(&self, table: Table, r: usize) -> &[f64] {
        let d = self.dim;
        match table {
            Table::Topic => &self.topic_rows[r * d..(r + 1) * d],
            Table::Generic => &self.generic_rows[r * d..(r + 1) * d],
        }
    }

    pub(crate) fn pair_index(&self, word: WordId, topic: TopicId) -> Option<usize> {
        self.pair_index.get(&(word, topic)).map(|&r| r as usize)
    }

    /// Whether `word` has any input representation.
    pub fn contains(&self, word: WordId) -> bool {
        if word as usize >= self.vocab_size {
            return false;
        }
        match self.variant {
            Variant::Sge | Variant::HtleAdd => true,
            Variant::Htle | Variant::Stle => self.fallback[word as usize] != NO_ROW,
        }
    }

    fn check_word(&self, word: WordId) -> Result<()> {
        if !self.contains(word) {
            return Err(Error::Oov(format!("word id {word} has no input representation")));
        }
        Ok(())
    }

    fn check_topic(&self, topic: TopicId) -> Result<()> {
        if topic as usize >= self.num_topics {
            return Err(Error::InvalidArgument(format!(
                "topic {topic} out of range for {} topics",
                self.num_topics
            )));
        }
        Ok(())
    }

    /// Rows (and weights) of the representation of `word` under one topic.
    fn push_topic_rows(&self, word: WordId, topic: TopicId, weight: f64, out: &mut Vec<InputRow>) {
        let own = self.pair_index(word, topic);
        match self.variant {
            Variant::Sge => out.push(InputRow {
                table: Table::Generic,
                row: word as usize,
                weight,
            }),
            Variant::HtleAdd => {
                if let Some(r) = own {
                    out.push(InputRow {
                        table: Table::Topic,
                        row: r,
                        weight,
                    });
                }
                out.push(InputRow {
                    table: Table::Generic,
                    row: word as usize,
                    weight,
                });
            }
            Variant::Htle | Variant::Stle => out.push(InputRow {
                table: Table::Topic,
                row: own.unwrap_or(self.fallback[word as usize] as usize),
                weight,
            }),
        }
    }

    /// Resolve the input rows of a target for inference. Pairs without a row
    /// fall back to the word's dominant pair (`Htle`, `Stle`) or to the
    /// generic row alone (`HtleAdd`).
    pub(crate) fn inference_rows(&self, word: WordId, info: TopicInfo<'_>, out: &mut Vec<InputRow>) -> Result<()> {
        self.check_word(word)?;
        out.clear();
        if self.variant == Variant::Sge {
            self.push_topic_rows(word, 0, 1.0, out);
            return Ok(());
        }
        match info {
            TopicInfo::None => {
                let k = self.dominant_topic(word);
                match k {
                    Some(k) => self.push_topic_rows(word, k, 1.0, out),
                    // HtleAdd word without any pair rows.
                    None => out.push(InputRow {
                        table: Table::Generic,
                        row: word as usize,
                        weight: 1.0,
                    }),
                }
            }
            TopicInfo::Hard(k) => {
                self.check_topic(k)?;
                self.push_topic_rows(word, k, 1.0, out);
            }
            TopicInfo::Dist(p) => {
                self.check_weights(p)?;
                for (k, &pk) in p.iter().enumerate() {
                    if pk != 0.0 {
                        self.push_topic_rows(word, k as TopicId, pk, out);
                    }
                }
            }
        }
        Ok(())
    }

    fn check_weights(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_topics {
            return Err(Error::MalformedDistribution(format!(
                "{} entries for {} topics",
                p.len(),
                self.num_topics
            )));
        }
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::MalformedDistribution("entries must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn combine(&self, rows: &[InputRow], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for r in rows {
            let src = self.row(r.table, r.row);
            if r.weight == 1.0 {
                for (o, s) in out.iter_mut().zip(src) {
                    *o += s;
                }
            } else {
                for (o, s) in out.iter_mut().zip(src) {
                    *o += r.weight * s;
                }
            }
        }
    }

    /// The target representation `h(w)` of a word given its topic information.
    ///
    /// A distribution must sum to one; see [`EmbeddingModel::embed_weighted`]
    /// for unnormalized weights.
    pub fn embed_target(&self, word: WordId, info: TopicInfo<'_>) -> Result<Vec<f64>> {
        if let TopicInfo::Dist(p) = info {
            if self.variant.has_topic_table() {
                self.check_weights(p)?;
                let s: f64 = p.iter().sum();
                if (s - 1.0).abs() > 1e-6 {
                    return Err(Error::MalformedDistribution(format!("sums to {s}")));
                }
            }
        }
        let mut rows = Vec::new();
        self.inference_rows(word, info, &mut rows)?;
        let mut out = vec![0.0; self.dim];
        self.combine(&rows, &mut out);
        Ok(out)
    }

    /// `Σ_k weights[k] · h(w, k)` without requiring the weights to sum to one.
    pub fn embed_weighted(&self, word: WordId, weights: &[f64]) -> Result<Vec<f64>> {
        let mut rows = Vec::new();
        self.inference_rows(word, TopicInfo::Dist(weights), &mut rows)?;
        let mut out = vec![0.0; self.dim];
        self.combine(&rows, &mut out);
        Ok(out)
    }

    /// All input-space entries in id order.
    pub fn entries(&self) -> Vec<Entry> {
        if self.variant.has_topic_table() {
            self.pairs.iter().map(|&(w, k)| Entry::Pair(w, k)).collect()
        } else {
            (0..self.vocab_size as WordId).map(Entry::Word).collect()
        }
    }

    /// Vector of one input-space entry.
    pub fn entry_vector(&self, entry: Entry) -> Result<Vec<f64>> {
        match entry {
            Entry::Word(w) => self.embed_target(w, TopicInfo::None),
            Entry::Pair(w, k) => {
                if !self.has_pair(w, k) {
                    return Err(Error::Oov(format!("pair ({w}, {k}) has no row")));
                }
                self.embed_target(w, TopicInfo::Hard(k))
            }
        }
    }

    /// Top-`k` input-space entries by cosine similarity to the target
    /// representation of `word`, excluding the entries that make up the query.
    /// Ties are broken by entry id.
    pub fn nearest_neighbors(&self, word: WordId, info: TopicInfo<'_>, k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let query = self.embed_target(word, info)?;
        let mut rows = Vec::new();
        self.inference_rows(word, info, &mut rows)?;
        let excluded: Vec<Entry> = if self.variant.has_topic_table() {
            rows.iter()
                .filter(|r| r.table == Table::Topic)
                .map(|r| {
                    let (w, t) = self.pairs[r.row];
                    Entry::Pair(w, t)
                })
                .collect()
        } else {
            vec![Entry::Word(word)]
        };
        self.nearest_to_vector(&query, k, |e| excluded.contains(&e))
    }

    /// Top-`k` entries by cosine similarity to an arbitrary vector.
    pub fn nearest_to_vector<F>(&self, query: &[f64], k: usize, exclude: F) -> Result<Vec<Neighbor>>
    where
        F: Fn(Entry) -> bool,
    {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch(query.len(), self.dim));
        }
        let mut scored = Vec::new();
        for (id, entry) in self.entries().into_iter().enumerate() {
            if exclude(entry) {
                continue;
            }
            let v = self.entry_vector(entry)?;
            scored.push((id, Neighbor {
                entry,
                cosine: cosine_unchecked(query, &v),
            }));
        }
        scored.sort_by(|a, b| b.1.cosine.total_cmp(&a.1.cosine).then(a.0.cmp(&b.0)));
        Ok(scored.into_iter().take(k).map(|(_, n)| n).collect())
    }
}

#[cfg(test)]
mod tests;
