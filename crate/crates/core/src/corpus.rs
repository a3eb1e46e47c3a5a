//! Corpus ingestion, vocabulary construction and the sampling tables used by
//! skip-gram training.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::WordId;

pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_SUBSAMPLE: f64 = 1e-4;
pub const DEFAULT_NEGATIVE_POWER: f64 = 0.75;

/// Split a line into normalized tokens.
///
/// Tokens are separated by Unicode whitespace, lowercased, and stripped of
/// leading and trailing non-alphanumeric characters. Tokens that are empty
/// after stripping are dropped.
pub fn tokenize(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split_whitespace().filter_map(normalize_token)
}

/// Normalize a single whitespace-delimited token, `None` if nothing remains.
pub fn normalize_token(raw: &str) -> Option<String> {
    let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if t.is_empty() {
        None
    } else {
        Some(t.to_lowercase())
    }
}

/// Token to id map with occurrence counts.
///
/// Ids are assigned by descending count, ties broken lexicographically, so
/// the mapping depends only on the multiset of counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, WordId>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Build a vocabulary from (token, count) pairs. Duplicate tokens are merged.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut merged: HashMap<String, u64> = HashMap::new();
        for (tok, c) in counts {
            *merged.entry(tok.into()).or_insert(0) += c;
        }
        let mut entries: Vec<(String, u64)> = merged.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (tok, c)) in entries.into_iter().enumerate() {
            index.insert(tok.clone(), i as WordId);
            tokens.push(tok);
            counts.push(c);
        }
        let total_tokens = counts.iter().sum();
        Vocabulary {
            tokens,
            counts,
            index,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<WordId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: WordId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: WordId) -> Option<u64> {
        self.counts.get(id as usize).copied()
    }

    /// Sum of all retained counts.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Write as `token<TAB>count` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (tok, c) in self.tokens.iter().zip(&self.counts) {
            writeln!(w, "{tok}\t{c}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_tsv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut entries = Vec::new();
        for (lineno, line) in read_lines(path)? {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (tok, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno, "expected token<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad count {count:?}")))?;
            entries.push((tok.to_string(), count));
        }
        Ok(Vocabulary::from_counts(entries))
    }
}

/// Count tokens over raw lines and keep those occurring at least `min_count` times.
pub fn build_vocab<I, S>(lines: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_count < 1 {
        return Err(Error::InvalidArgument("min_count must be >= 1".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut seen = 0u64;
    for line in lines {
        for tok in tokenize(line.as_ref()) {
            *counts.entry(tok).or_insert(0) += 1;
            seen += 1;
        }
    }
    if seen == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(Vocabulary::from_counts(
        counts.into_iter().filter(|&(_, c)| c >= min_count),
    ))
}

/// [`build_vocab`] over a corpus file, one document per line.
pub fn build_vocab_from_file(path: impl AsRef<Path>, min_count: u64) -> Result<Vocabulary> {
    let path = path.as_ref();
    let mut lines = Vec::new();
    for (_, line) in read_lines(path)? {
        lines.push(line?);
    }
    build_vocab(lines, min_count)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub tokens: Vec<WordId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocab: Vocabulary,
}

impl Corpus {
    /// One document per line; tokens missing from `vocab` are dropped.
    pub fn from_lines<I, S>(lines: I, vocab: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let documents = lines
            .into_iter()
            .enumerate()
            .map(|(id, line)| Document {
                id,
                tokens: tokenize(line.as_ref())
                    .filter_map(|t| vocab.id(&t))
                    .collect(),
            })
            .collect();
        Corpus {
            documents,
            vocab: vocab.clone(),
        }
    }

    /// Build a corpus directly from id sequences.
    pub fn from_ids(docs: Vec<Vec<WordId>>, vocab: Vocabulary) -> Result<Self> {
        for (d, doc) in docs.iter().enumerate() {
            if let Some(&bad) = doc.iter().find(|&&w| w as usize >= vocab.len()) {
                return Err(Error::ShapeMismatch(format!(
                    "document {d} contains id {bad} outside vocabulary of size {}",
                    vocab.len()
                )));
            }
        }
        Ok(Corpus {
            documents: docs
                .into_iter()
                .enumerate()
                .map(|(id, tokens)| Document { id, tokens })
                .collect(),
            vocab,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// A corpus restricted to the first `n` documents.
    pub fn head(&self, n: usize) -> Corpus {
        Corpus {
            documents: self.documents.iter().take(n).cloned().collect(),
            vocab: self.vocab.clone(),
        }
    }

    /// Write documents back out as space-separated tokens, one per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for doc in &self.documents {
            let mut first = true;
            for &t in &doc.tokens {
                if !first {
                    w.write_all(b" ")?;
                }
                first = false;
                w.write_all(self.vocab.token(t).unwrap_or_default().as_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Load a UTF-8 corpus with one document per line.
pub fn load_corpus(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Corpus> {
    let path = path.as_ref();
    let mut lines = Vec::new();
    for (_, line) in read_lines(path)? {
        lines.push(line?);
    }
    Ok(Corpus::from_lines(lines, vocab))
}

/// Iterate over lines, reporting invalid UTF-8 with a 1-based line number.
pub(crate) fn read_lines(
    path: &Path,
) -> Result<impl Iterator<Item = (usize, Result<String>)>> {
    let owned = path.to_path_buf();
    let reader = BufReader::new(File::open(path)?);
    Ok(reader.split(b'\n').enumerate().map(move |(i, bytes)| {
        let lineno = i + 1;
        let line = match bytes {
            Ok(b) => String::from_utf8(b).map_err(|_| Error::Utf8 {
                path: owned.clone(),
                line: lineno,
            }),
            Err(e) => Err(Error::Io(e)),
        };
        (
            lineno,
            line.map(|mut s| {
                if s.ends_with('\r') {
                    s.pop();
                }
                s
            }),
        )
    }))
}

/// Frequency subsampling keep probability `min(1, sqrt(t/f) + t/f)`.
pub fn keep_probability(vocab: &Vocabulary, word: WordId, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument("subsampling threshold must be > 0".into()));
    }
    let count = vocab.count(word).ok_or(Error::UnknownWord(word))?;
    Ok(keep_probability_for_frequency(
        count as f64 / vocab.total_tokens() as f64,
        threshold,
    ))
}

pub(crate) fn keep_probability_for_frequency(freq: f64, threshold: f64) -> f64 {
    if freq <= threshold {
        return 1.0;
    }
    let r = threshold / freq;
    (r.sqrt() + r).min(1.0)
}

/// Noise distribution for negative sampling, `P(w) ∝ count(w)^power`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
    probs: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary, power: f64) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if !(power > 0.0 && power <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "negative sampling power must be in (0, 1], got {power}"
            )));
        }
        let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(power)).collect();
        let z: f64 = weights.iter().sum();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(NegativeSampler {
            dist,
            probs: weights.iter().map(|w| w / z).collect(),
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WordId {
        self.dist.sample(rng) as WordId
    }

    pub fn probability(&self, word: WordId) -> f64 {
        self.probs.get(word as usize).copied().unwrap_or(0.0)
    }
}

/// Convenience alias matching the table-building operation name.
pub fn negative_table(vocab: &Vocabulary, power: f64) -> Result<NegativeSampler> {
    NegativeSampler::new(vocab, power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_and_ids() {
        let v = build_vocab(["a a b"], 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.count(0), Some(2));
        assert_eq!(v.count(1), Some(1));
        assert_eq!(v.total_tokens(), 3);
    }

    #[test]
    fn min_count_filters() {
        let v = build_vocab(["a a b"], 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.id("b"), None);
        assert_eq!(v.total_tokens(), 2);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(build_vocab(["", "  ", "..."], 1), Err(Error::EmptyCorpus)));
        assert!(matches!(build_vocab(["a"], 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ties_broken_lexicographically() {
        let v = build_vocab(["b a c b a c"], 1).unwrap();
        assert_eq!(v.tokens(), &["a", "b", "c"]);
    }

    #[test]
    fn tokenizer_strips_and_lowercases() {
        let toks: Vec<String> = tokenize("  Hello, WORLD!  (x) -- don't ").collect();
        assert_eq!(toks, ["hello", "world", "x", "don't"]);
    }

    #[test]
    fn total_matches_independent_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let words: Vec<String> = (0..50).map(|i| format!("w{i}")).collect();
        let docs: Vec<String> = (0..1000)
            .map(|_| {
                let n = rng.random_range(0..30);
                (0..n)
                    .map(|_| words[rng.random_range(0..words.len())].as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let min_count = 300;
        let v = build_vocab(&docs, min_count).unwrap();

        // Single-pass recount with a sorted map, independent of the vocab builder.
        let mut recount = std::collections::BTreeMap::new();
        for d in &docs {
            for t in d.split(' ').filter(|t| !t.is_empty()) {
                *recount.entry(t.to_string()).or_insert(0u64) += 1;
            }
        }
        let retained: u64 = recount.values().filter(|&&c| c >= min_count).sum();
        assert_eq!(v.total_tokens(), retained);
        assert_eq!(v.counts().iter().sum::<u64>(), retained);
        for (tok, &c) in &recount {
            assert_eq!(v.id(tok).is_some(), c >= min_count);
        }
    }

    #[test]
    fn loads_documents_and_keeps_empty_lines() {
        let v = build_vocab(["a b c x"], 1).unwrap();
        let v = Vocabulary::from_counts(
            v.tokens().iter().filter(|t| *t != "x").map(|t| (t.clone(), 1)),
        );
        let c = Corpus::from_lines(["A b", "c", "X y"], &v);
        assert_eq!(c.len(), 3);
        assert_eq!(c.documents[0].tokens, vec![v.id("a").unwrap(), v.id("b").unwrap()]);
        assert_eq!(c.documents[1].tokens, vec![v.id("c").unwrap()]);
        assert!(c.documents[2].tokens.is_empty());
    }

    #[test]
    fn text_round_trip_preserves_ids() {
        let dir = tempfile::tempdir().unwrap();
        let src = ["the cat sat", "on the mat", "", "cat cat"];
        let v = build_vocab(src, 1).unwrap();
        let c = Corpus::from_lines(src, &v);
        let path = dir.path().join("c.txt");
        c.write_text(File::create(&path).unwrap()).unwrap();
        let back = load_corpus(&path, &v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_utf8_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, b"ok line\nalso ok\nbad \xff\xfe here\n").unwrap();
        let v = build_vocab(["ok"], 1).unwrap();
        match load_corpus(&path, &v) {
            Err(Error::Utf8 { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected utf8 error, got {other:?}"),
        }
    }

    #[test]
    fn vocab_tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = build_vocab(["x y y z z z"], 1).unwrap();
        let path = dir.path().join("v.tsv");
        v.save(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "z\t3\ny\t2\nx\t1\n");
        assert_eq!(Vocabulary::load(&path).unwrap(), v);
    }

    #[test]
    fn keep_probability_closed_forms() {
        let v = Vocabulary::from_counts([("a", 1u64), ("b", 3)]);
        // f(a) = 0.25 = threshold
        assert_eq!(keep_probability(&v, v.id("a").unwrap(), 0.25).unwrap(), 1.0);
        // f(b) = 0.75, threshold = 0.75 / 4
        let p = keep_probability(&v, v.id("b").unwrap(), 0.75 / 4.0).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
        assert!(keep_probability(&v, 7, 1e-3).is_err());
        assert!(keep_probability(&v, 0, 0.0).is_err());
    }

    #[test]
    fn keep_probability_is_monotone_in_frequency() {
        let t = 1e-3;
        let mut last = f64::INFINITY;
        for i in 1..=2000 {
            let f = i as f64 / 2000.0;
            let p = keep_probability_for_frequency(f, t);
            assert!(p > 0.0 && p <= 1.0);
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn negative_sampler_weights() {
        let v = Vocabulary::from_counts([("a", 1u64), ("b", 1)]);
        let s = NegativeSampler::new(&v, 0.75).unwrap();
        assert!((s.probability(0) - 0.5).abs() < 1e-15);

        let v = Vocabulary::from_counts([("a", 16u64), ("b", 1)]);
        let s = NegativeSampler::new(&v, 0.75).unwrap();
        assert!((s.probability(v.id("a").unwrap()) - 8.0 / 9.0).abs() < 1e-12);
        assert!((s.probability(v.id("b").unwrap()) - 1.0 / 9.0).abs() < 1e-12);

        assert!(NegativeSampler::new(&Vocabulary::from_counts(Vec::<(String, u64)>::new()), 0.75).is_err());
        assert!(NegativeSampler::new(&v, 0.0).is_err());
        assert!(NegativeSampler::new(&v, 1.5).is_err());
    }

    #[test]
    fn negative_sampler_empirical_frequencies() {
        let v = Vocabulary::from_counts([("a", 100u64), ("b", 30), ("c", 7), ("d", 1)]);
        let s = NegativeSampler::new(&v, 0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000usize;
        let mut hist = vec![0usize; v.len()];
        for _ in 0..n {
            hist[s.sample(&mut rng) as usize] += 1;
        }
        for (w, &h) in hist.iter().enumerate() {
            let p = s.probability(w as WordId);
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((h as f64 - n as f64 * p).abs() < 3.0 * sigma, "word {w}");
        }
    }

    #[test]
    fn negative_sampler_reproducible() {
        let v = Vocabulary::from_counts([("a", 10u64), ("b", 3), ("c", 2)]);
        let s = NegativeSampler::new(&v, 0.75).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
    }

    proptest! {
        #[test]
        fn vocab_is_a_bijection_and_order_independent(
            docs in prop::collection::vec(prop::collection::vec(0u8..12, 0..15), 1..20),
            min_count in 1u64..4,
        ) {
            let lines: Vec<String> = docs
                .iter()
                .map(|d| d.iter().map(|i| format!("t{i}")).collect::<Vec<_>>().join(" "))
                .collect();
            prop_assume!(lines.iter().any(|l| !l.is_empty()));
            let v = build_vocab(&lines, min_count).unwrap();
            for tok in v.tokens() {
                prop_assert_eq!(v.token(v.id(tok).unwrap()), Some(tok.as_str()));
                prop_assert!(v.count(v.id(tok).unwrap()).unwrap() >= min_count);
            }
            let mut rev = lines.clone();
            rev.reverse();
            prop_assert_eq!(build_vocab(&rev, min_count).unwrap(), v);
        }
    }
}
