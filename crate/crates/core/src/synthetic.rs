//! Synthetic corpora with known ground truth.
//!
//! * [`lda_corpus`] draws documents from a fixed set of topics with disjoint
//!   vocabularies, for checking topic recovery.
//! * [`pseudo_sense`] builds two topically disjoint domains and fuses one word
//!   of each into an artificial ambiguous pseudoword. It also produces
//!   lexical-substitution and context-similarity benchmarks over the
//!   pseudowords, whose gold answers are same-domain synonyms.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::corpus::{build_vocab, Corpus};
use crate::eval::data::{LexsubInstance, Pos, ScwsInstance};

#[derive(Clone, Debug)]
pub struct LdaSpec {
    pub num_topics: usize,
    pub words_per_topic: usize,
    pub docs: usize,
    pub doc_len: usize,
    /// Dirichlet concentration of the per-document topic mixtures.
    pub doc_alpha: f64,
    pub seed: u64,
}

impl Default for LdaSpec {
    fn default() -> Self {
        LdaSpec {
            num_topics: 3,
            words_per_topic: 10,
            docs: 200,
            doc_len: 100,
            doc_alpha: 0.5,
            seed: 7,
        }
    }
}

pub struct SyntheticLda {
    pub lines: Vec<String>,
    pub corpus: Corpus,
    /// Generator word distributions, indexed by the corpus vocabulary ids.
    pub topics: Vec<Vec<f64>>,
    /// Topic that owns each vocabulary id.
    pub word_topic: Vec<usize>,
}

fn lda_word(topic: usize, j: usize) -> String {
    format!("t{topic}w{j:02}")
}

/// Documents drawn from topics with disjoint vocabularies and Zipf-shaped
/// word weights.
pub fn lda_corpus(spec: &LdaSpec) -> SyntheticLda {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let zipf: Vec<f64> = (0..spec.words_per_topic).map(|j| 1.0 / (j as f64 + 1.0)).collect();
    let word_dist = WeightedIndex::new(&zipf).expect("positive weights");
    let mix = Gamma::new(spec.doc_alpha, 1.0).expect("valid alpha");

    let lines: Vec<String> = (0..spec.docs)
        .map(|_| {
            // Normalized gamma draws are a symmetric Dirichlet sample.
            let mut theta: Vec<f64> = (0..spec.num_topics).map(|_| mix.sample(&mut rng)).collect();
            if theta.iter().sum::<f64>() <= 0.0 {
                theta.fill(1.0);
            }
            let topic_dist = WeightedIndex::new(&theta).expect("proper mixture");
            (0..spec.doc_len)
                .map(|_| lda_word(topic_dist.sample(&mut rng), word_dist.sample(&mut rng)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();

    let vocab = build_vocab(&lines, 1).expect("non-empty corpus");
    let z: f64 = zipf.iter().sum();
    let mut topics = vec![vec![0.0; vocab.len()]; spec.num_topics];
    let mut word_topic = vec![0; vocab.len()];
    for t in 0..spec.num_topics {
        for (j, w) in zipf.iter().enumerate() {
            if let Some(id) = vocab.id(&lda_word(t, j)) {
                topics[t][id as usize] = w / z;
                word_topic[id as usize] = t;
            }
        }
    }
    // Renormalize over the words that were actually drawn.
    for row in &mut topics {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
    }
    let corpus = Corpus::from_lines(&lines, &vocab);
    SyntheticLda {
        lines,
        corpus,
        topics,
        word_topic,
    }
}

/// Total-variation distance between two distributions over the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Greedily pair learned topics with generator topics by smallest
/// total-variation distance. Returns `(learned, truth, distance)` triples.
pub fn greedy_align(learned: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = learned
        .iter()
        .enumerate()
        .flat_map(|(i, l)| truth.iter().enumerate().map(move |(j, t)| (i, j, total_variation(l, t))))
        .collect();
    pairs.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut used_l = vec![false; learned.len()];
    let mut used_t = vec![false; truth.len()];
    let mut out = Vec::new();
    for (i, j, d) in pairs {
        if !used_l[i] && !used_t[j] {
            used_l[i] = true;
            used_t[j] = true;
            out.push((i, j, d));
        }
    }
    out.sort_by_key(|&(_, j, _)| j);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    A,
    B,
}

impl Domain {
    fn prefix(self) -> char {
        match self {
            Domain::A => 'a',
            Domain::B => 'b',
        }
    }

    pub fn other(self) -> Domain {
        match self {
            Domain::A => Domain::B,
            Domain::B => Domain::A,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PseudoSenseSpec {
    pub clusters: usize,
    pub cluster_size: usize,
    pub docs_per_domain: usize,
    pub sentences_per_doc: usize,
    pub sentence_len: usize,
    /// Probability that a sentence token comes from a random cluster of the domain.
    pub noise: f64,
    /// Number of pseudowords; pseudoword `i` fuses the head word of cluster `i`
    /// of both domains. At most four.
    pub pseudowords: usize,
    pub lexsub_per_sense: usize,
    pub scws_per_kind: usize,
    pub seed: u64,
}

impl Default for PseudoSenseSpec {
    fn default() -> Self {
        PseudoSenseSpec {
            clusters: 20,
            cluster_size: 10,
            docs_per_domain: 500,
            sentences_per_doc: 40,
            sentence_len: 12,
            noise: 0.2,
            pseudowords: 4,
            lexsub_per_sense: 25,
            scws_per_kind: 10,
            seed: 2017,
        }
    }
}

const PSEUDOWORDS: [(&str, Pos); 4] = [
    ("appleano", Pos::Noun),
    ("batano", Pos::Verb),
    ("jaguarano", Pos::Adj),
    ("appealano", Pos::Adv),
];

#[derive(Clone, Debug)]
pub struct Pseudoword {
    pub name: String,
    pub pos: Pos,
    /// Cluster index in both domains whose head word was replaced.
    pub cluster: usize,
    /// The replaced words, domain A first.
    pub fused: [String; 2],
}

pub struct PseudoSense {
    pub spec: PseudoSenseSpec,
    /// One document per line.
    pub lines: Vec<String>,
    pub doc_domain: Vec<Domain>,
    pub pseudowords: Vec<Pseudoword>,
    pub lexsub: Vec<LexsubInstance>,
    pub scws: Vec<ScwsInstance>,
}

impl PseudoSense {
    pub fn word(&self, domain: Domain, cluster: usize, member: usize) -> String {
        let pw = self
            .pseudowords
            .iter()
            .find(|p| member == 0 && p.cluster == cluster);
        match pw {
            Some(p) => p.name.clone(),
            None => domain_word(domain, cluster, member),
        }
    }

    /// All words that occur only in `domain`.
    pub fn domain_vocabulary(&self, domain: Domain) -> Vec<String> {
        let mut out = Vec::new();
        for c in 0..self.spec.clusters {
            for j in 0..self.spec.cluster_size {
                if j == 0 && c < self.pseudowords.len() {
                    continue;
                }
                out.push(domain_word(domain, c, j));
            }
        }
        out
    }

    pub fn is_domain_word(&self, domain: Domain, word: &str) -> bool {
        let Some(rest) = word.strip_prefix(domain.prefix()) else {
            return false;
        };
        let Some((c, j)) = rest.split_once('m') else {
            return false;
        };
        matches!((c.parse::<usize>(), j.parse::<usize>()),
            (Ok(c), Ok(j)) if c < self.spec.clusters && j < self.spec.cluster_size
                && !(j == 0 && c < self.pseudowords.len()))
    }
}

fn domain_word(domain: Domain, cluster: usize, member: usize) -> String {
    format!("{}{cluster:02}m{member:02}", domain.prefix())
}

struct Generator<'a> {
    spec: &'a PseudoSenseSpec,
    member_dist: WeightedIndex<f64>,
    pseudowords: &'a [Pseudoword],
}

impl Generator<'_> {
    fn word(&self, domain: Domain, cluster: usize, member: usize) -> String {
        if member == 0 && cluster < self.pseudowords.len() {
            self.pseudowords[cluster].name.clone()
        } else {
            domain_word(domain, cluster, member)
        }
    }

    fn sentence<R: Rng>(&self, domain: Domain, cluster: usize, rng: &mut R) -> Vec<String> {
        (0..self.spec.sentence_len)
            .map(|_| {
                let c = if rng.random::<f64>() < self.spec.noise {
                    rng.random_range(0..self.spec.clusters)
                } else {
                    cluster
                };
                self.word(domain, c, self.member_dist.sample(rng))
            })
            .collect()
    }
}

/// Generate the two-domain corpus and its evaluation sets.
pub fn pseudo_sense(spec: &PseudoSenseSpec) -> PseudoSense {
    assert!(spec.pseudowords <= PSEUDOWORDS.len() && spec.pseudowords <= spec.clusters);
    assert!(spec.cluster_size >= 7, "lexsub gold needs six synonyms per cluster");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pseudowords: Vec<Pseudoword> = PSEUDOWORDS[..spec.pseudowords]
        .iter()
        .enumerate()
        .map(|(c, &(name, pos))| Pseudoword {
            name: name.to_string(),
            pos,
            cluster: c,
            fused: [domain_word(Domain::A, c, 0), domain_word(Domain::B, c, 0)],
        })
        .collect();
    let zipf: Vec<f64> = (0..spec.cluster_size).map(|j| 1.0 / (j as f64 + 1.0)).collect();
    let gen = Generator {
        spec,
        member_dist: WeightedIndex::new(&zipf).expect("positive weights"),
        pseudowords: &pseudowords,
    };

    let mut doc_domain: Vec<Domain> = (0..spec.docs_per_domain)
        .flat_map(|_| [Domain::A, Domain::B])
        .collect();
    for i in (1..doc_domain.len()).rev() {
        let j = rng.random_range(0..=i);
        doc_domain.swap(i, j);
    }
    let lines = doc_domain
        .iter()
        .map(|&domain| {
            (0..spec.sentences_per_doc)
                .flat_map(|_| {
                    let c = rng.random_range(0..spec.clusters);
                    gen.sentence(domain, c, &mut rng)
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();

    // A context sentence from the pseudoword's own cluster with the
    // pseudoword placed at a random position.
    let context = |pw: &Pseudoword, domain: Domain, rng: &mut ChaCha8Rng| {
        let mut toks = gen.sentence(domain, pw.cluster, rng);
        let idx = rng.random_range(0..toks.len());
        toks[idx] = pw.name.clone();
        (toks, idx)
    };

    let mut lexsub = Vec::new();
    for pw in &pseudowords {
        for domain in [Domain::A, Domain::B] {
            for n in 0..spec.lexsub_per_sense {
                let (toks, idx) = context(pw, domain, &mut rng);
                let gold = (1..=5)
                    .map(|j| (domain_word(domain, pw.cluster, j), 6 - j as u32))
                    .collect();
                lexsub.push(LexsubInstance {
                    id: format!("{}.{}.{n}", pw.name, domain.prefix()),
                    target: pw.name.clone(),
                    pos: pw.pos,
                    context: toks,
                    target_index: idx,
                    gold,
                });
            }
        }
    }

    let mut scws = Vec::new();
    let mut push = |id: String, w1: &str, c1: (Vec<String>, usize), w2: &str, c2: (Vec<String>, usize), score: f64, pos: Pos| {
        scws.push(ScwsInstance {
            id,
            word1: w1.to_string(),
            pos1: pos.short().to_string(),
            context1: c1.0,
            index1: c1.1,
            word2: w2.to_string(),
            pos2: pos.short().to_string(),
            context2: c2.0,
            index2: c2.1,
            human_score: score,
        });
    };
    let mut n = 0;
    for pw in &pseudowords {
        for domain in [Domain::A, Domain::B] {
            for _ in 0..spec.scws_per_kind {
                let a = context(pw, domain, &mut rng);
                let same = context(pw, domain, &mut rng);
                let cross = context(pw, domain.other(), &mut rng);
                let syn_word = domain_word(domain, pw.cluster, 1);
                let mut syn = gen.sentence(domain, pw.cluster, &mut rng);
                let syn_idx = rng.random_range(0..syn.len());
                syn[syn_idx] = syn_word.clone();
                let score_jitter = rng.random_range(-0.5..0.5);
                push(format!("{n}"), &pw.name, a.clone(), &pw.name, same, 9.0 + score_jitter, pw.pos);
                push(format!("{}", n + 1), &pw.name, a.clone(), &pw.name, cross, 1.0 - score_jitter, pw.pos);
                push(format!("{}", n + 2), &pw.name, a, &syn_word, (syn, syn_idx), 7.5 + score_jitter, pw.pos);
                n += 3;
            }
        }
    }

    PseudoSense {
        spec: spec.clone(),
        lines,
        doc_domain,
        pseudowords,
        lexsub,
        scws,
    }
}
