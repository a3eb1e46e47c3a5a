use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::Serialize;

use tse_core::corpus::{build_vocab_from_file, load_corpus, Corpus, Vocabulary, DEFAULT_MIN_COUNT};
use tse_core::embeddings::{self, export_text, load_model, save_model, EmbeddingModel, TopicInfo, Variant};
use tse_core::eval::data::{save_scws, load_scws};
use tse_core::eval::{self, LexsubDataset, LexsubScorer};
use tse_core::hdp::{self, DocTopicDist, FoldIn, HdpConfig, HdpHyper, TopicLabeling, TopicModel};
use tse_core::inference::ScoringOptions;
use tse_core::synthetic::{self, Domain, LdaSpec, PseudoSenseSpec};

pub use crate::manifest::Outcome;
use crate::report;
use crate::{usage, Global};

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_vocab(path: &Path) -> anyhow::Result<Vocabulary> {
    Vocabulary::load(path).with_context(|| format!("reading vocabulary {}", path.display()))
}

fn load_hdp(path: &Path) -> anyhow::Result<TopicModel> {
    TopicModel::load(path).with_context(|| format!("reading topic model {}", path.display()))
}

#[derive(Args, Debug, Serialize)]
pub struct BuildVocabArgs {
    /// Corpus file, one document per line.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn build_vocab(a: &BuildVocabArgs) -> anyhow::Result<Outcome> {
    let vocab = build_vocab_from_file(&a.corpus, a.min_count)?;
    vocab.save(&a.out)?;
    log::info!("{} word types, {} tokens", vocab.len(), vocab.total_tokens());
    Ok(Outcome {
        inputs: vec![a.corpus.clone()],
        outputs: vec![a.out.clone()],
    })
}

#[derive(Args, Debug, Serialize)]
pub struct TrainHdpArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Train on the first N documents only.
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, default_value_t = 500)]
    pub max_topics: usize,
    /// Drop topics holding less than this share of the tokens.
    #[arg(long, default_value_t = 1e-4)]
    pub prune_threshold: f64,
    /// Resample the concentration parameters after every sweep.
    #[arg(long)]
    pub resample_hyper: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train_hdp(a: &TrainHdpArgs, g: &Global) -> anyhow::Result<Outcome> {
    let vocab = load_vocab(&a.vocab)?;
    let mut corpus = load_corpus(&a.corpus, &vocab)?;
    if let Some(n) = a.docs {
        if n == 0 {
            return usage("--docs must be >= 1");
        }
        corpus = corpus.head(n);
    }
    let cfg = HdpConfig {
        hyper: HdpHyper {
            gamma: a.gamma,
            alpha0: a.alpha0,
            eta: a.eta,
            max_topics: a.max_topics,
        },
        iterations: a.iters,
        seed: g.seed,
        prune_threshold: a.prune_threshold,
        resample_hyper: a.resample_hyper,
    };
    if let Err(e) = cfg.hyper.validate() {
        return usage(e.to_string());
    }
    if a.iters == 0 {
        return usage("--iters must be >= 1");
    }
    let model = hdp::train_hdp(&corpus, &cfg)?;
    model.save(&a.out)?;
    eprintln!("trained {} topics on {} documents", model.num_topics(), corpus.len());
    Ok(Outcome {
        inputs: vec![a.corpus.clone(), a.vocab.clone()],
        outputs: vec![a.out.clone()],
    })
}

#[derive(Args, Debug, Serialize)]
pub struct LabelArgs {
    /// Topic model from train-hdp.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 5)]
    pub burn_in: usize,
    /// Output with one `word|topic` token per corpus token.
    #[arg(long)]
    pub labels_out: PathBuf,
    /// Output with one `doc k:p ...` line per document.
    #[arg(long)]
    pub doc_topics_out: PathBuf,
}

fn foldin(sweeps: usize, burn_in: usize) -> anyhow::Result<FoldIn> {
    if sweeps == 0 || burn_in >= sweeps {
        return usage(format!("need --sweeps >= 1 and --burn-in < --sweeps, got {sweeps} and {burn_in}"));
    }
    Ok(FoldIn { sweeps, burn_in })
}

pub fn label(a: &LabelArgs, g: &Global) -> anyhow::Result<Outcome> {
    let cfg = foldin(a.sweeps, a.burn_in)?;
    let model = load_hdp(&a.model)?;
    let vocab = load_vocab(&a.vocab)?;
    let corpus = load_corpus(&a.corpus, &vocab)?;
    let (labels, dists) = hdp::fold_in_corpus(&model, &corpus, g.seed, cfg)?;
    labels.save(&corpus, &a.labels_out)?;
    DocTopicDist::save_all(&dists, &a.doc_topics_out)?;
    Ok(Outcome {
        inputs: vec![a.model.clone(), a.corpus.clone(), a.vocab.clone()],
        outputs: vec![a.labels_out.clone(), a.doc_topics_out.clone()],
    })
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Sge,
    Htle,
    Htleadd,
    Stle,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Sge => Variant::Sge,
            VariantArg::Htle => Variant::Htle,
            VariantArg::Htleadd => Variant::HtleAdd,
            VariantArg::Stle => Variant::Stle,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TrainEmbArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    /// Token labels from `label` (htle, htleadd).
    #[arg(long)]
    pub labeling: Option<PathBuf>,
    /// Document-topic distributions from `label` (stle).
    #[arg(long)]
    pub doc_topics: Option<PathBuf>,
    /// Topic model the labels came from; fixes the number of topics.
    #[arg(long)]
    pub hdp: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// Context window c on each side.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Frequent-word subsampling threshold.
    #[arg(long, default_value_t = 1e-4)]
    pub subsample: f64,
    #[arg(long)]
    pub no_subsample: bool,
    #[arg(long, default_value_t = 0.75)]
    pub negative_power: f64,
    /// Keep only the m most probable topics of each document (stle).
    #[arg(long, default_value_t = 10)]
    pub stle_top_m: usize,
    /// Use every topic of each document (stle).
    #[arg(long)]
    pub stle_all_topics: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a word2vec-style text export.
    #[arg(long)]
    pub text_out: Option<PathBuf>,
}

pub fn train_emb(a: &TrainEmbArgs, g: &Global) -> anyhow::Result<Outcome> {
    let variant = Variant::from(a.variant);
    if variant.needs_labeling() && a.labeling.is_none() {
        return usage(format!("--variant {variant} requires --labeling"));
    }
    if variant.needs_doc_topics() && a.doc_topics.is_none() {
        return usage(format!("--variant {variant} requires --doc-topics"));
    }
    let cfg = embeddings::TrainConfig {
        variant,
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.lr,
        seed: g.seed,
        stle_top_m: (!a.stle_all_topics).then_some(a.stle_top_m),
        subsample: (!a.no_subsample).then_some(a.subsample),
        negative_power: a.negative_power,
        threads: g.threads,
    };
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }

    let mut inputs = vec![a.corpus.clone(), a.vocab.clone()];
    let vocab = load_vocab(&a.vocab)?;
    let corpus = load_corpus(&a.corpus, &vocab)?;
    let num_topics = match &a.hdp {
        Some(p) => {
            inputs.push(p.clone());
            Some(load_hdp(p)?.num_topics())
        }
        None => None,
    };
    let labeling = match (&a.labeling, variant.needs_labeling()) {
        (Some(p), true) => {
            inputs.push(p.clone());
            Some(load_labeling(p, &corpus, num_topics)?)
        }
        _ => None,
    };
    let dists = match (&a.doc_topics, variant.needs_doc_topics()) {
        (Some(p), true) => {
            inputs.push(p.clone());
            Some(DocTopicDist::load_all(p, num_topics)?)
        }
        _ => None,
    };

    let (model, rep) = embeddings::train_with_report(&corpus, labeling.as_ref(), dists.as_deref(), &cfg)?;
    for (e, l) in rep.epoch_loss.iter().enumerate() {
        log::info!("epoch {}: mean loss {l:.5}", e + 1);
    }
    save_model(&model, &a.out)?;
    let mut outputs = vec![a.out.clone()];
    if let Some(p) = &a.text_out {
        let mut w = create(p)?;
        export_text(&model, &vocab, &mut w)?;
        w.flush()?;
        outputs.push(p.clone());
    }
    Ok(Outcome { inputs, outputs })
}

fn load_labeling(path: &Path, corpus: &Corpus, num_topics: Option<usize>) -> anyhow::Result<TopicLabeling> {
    let (lab_corpus, labeling) = TopicLabeling::load(path, &corpus.vocab, num_topics)?;
    let same = lab_corpus.len() == corpus.len()
        && lab_corpus
            .documents
            .iter()
            .zip(&corpus.documents)
            .all(|(a, b)| a.tokens == b.tokens);
    if !same {
        bail!("{} does not label the tokens of the training corpus", path.display());
    }
    Ok(labeling)
}

#[derive(Args, Debug, Serialize)]
pub struct NnArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub word: String,
    /// Query the word under this topic; default is its dominant topic.
    #[arg(long)]
    pub topic: Option<u32>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

pub fn nn(a: &NnArgs) -> anyhow::Result<Outcome> {
    if a.k == 0 {
        return usage("--k must be >= 1");
    }
    let model = load_model(&a.model)?;
    let vocab = load_vocab(&a.vocab)?;
    let Some(id) = vocab.id(&a.word) else {
        bail!("{:?} is not in the vocabulary", a.word);
    };
    let info = a.topic.map_or(TopicInfo::None, TopicInfo::Hard);
    let neighbors = model.nearest_neighbors(id, info, a.k)?;
    let mut out = std::io::stdout().lock();
    for (i, n) in neighbors.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}", i + 1, n.entry.name(&vocab), n.cosine)?;
    }
    Ok(Outcome {
        inputs: vec![a.model.clone(), a.vocab.clone()],
        outputs: vec![],
    })
}

#[derive(Args, Debug, Serialize)]
pub struct ScoringArgs {
    /// Topic model used to infer context topics.
    #[arg(long)]
    pub hdp: Option<PathBuf>,
    /// Context words on each side of the target.
    #[arg(long, default_value_t = 10)]
    pub eval_window: usize,
    #[arg(long, default_value_t = 20)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 5)]
    pub burn_in: usize,
    /// Give the substitute the target's sampled topic instead of folding in
    /// the sentence again.
    #[arg(long)]
    pub reuse_target_topic: bool,
}

impl ScoringArgs {
    fn options(&self, seed: u64) -> anyhow::Result<ScoringOptions> {
        Ok(ScoringOptions {
            window: self.eval_window,
            reuse_target_topic: self.reuse_target_topic,
            foldin: foldin(self.sweeps, self.burn_in)?,
            seed,
        })
    }

    fn load(&self, inputs: &mut Vec<PathBuf>) -> anyhow::Result<Option<TopicModel>> {
        match &self.hdp {
            Some(p) => {
                inputs.push(p.clone());
                Ok(Some(load_hdp(p)?))
            }
            None => Ok(None),
        }
    }
}

fn check_topic_model(name: &str, model: &EmbeddingModel, hdp: Option<&TopicModel>) -> anyhow::Result<()> {
    if model.variant().has_topic_table() && hdp.is_none() {
        return usage(format!("run {name:?} has a topic model variant; pass --hdp"));
    }
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EvalScwsArgs {
    /// TSV: id, word1, pos1, word2, pos2, context1, context2, score.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// NAME=MODEL, repeatable.
    #[arg(long = "run", required = true)]
    pub runs: Vec<String>,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Per-pair scores and summaries as JSON lines.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
}

fn parse_named(spec: &str) -> anyhow::Result<(String, String)> {
    match spec.split_once('=') {
        Some((n, rest)) if !n.is_empty() && !rest.is_empty() => Ok((n.to_string(), rest.to_string())),
        _ => usage(format!("--run expects NAME=..., got {spec:?}")),
    }
}

pub fn eval_scws(a: &EvalScwsArgs, g: &Global) -> anyhow::Result<Outcome> {
    let opts = a.scoring.options(g.seed)?;
    let runs: Vec<(String, PathBuf)> = a
        .runs
        .iter()
        .map(|r| parse_named(r).map(|(n, p)| (n, PathBuf::from(p))))
        .collect::<anyhow::Result<_>>()?;
    let mut inputs = vec![a.data.clone(), a.vocab.clone()];
    let hdp = a.scoring.load(&mut inputs)?;
    let vocab = load_vocab(&a.vocab)?;
    let data = load_scws(&a.data)?;

    let mut results = Vec::new();
    for (name, path) in &runs {
        inputs.push(path.clone());
        let model = load_model(path)?;
        check_topic_model(name, &model, hdp.as_ref())?;
        let rep = eval::eval_scws(&model, hdp.as_ref(), &vocab, &data, &opts)?;
        results.push((name.clone(), rep));
    }
    print!("{}", report::scws_table(&results));
    let mut outputs = vec![];
    if let Some(p) = &a.jsonl {
        let mut w = create(p)?;
        report::scws_jsonl(&mut w, &data, &results)?;
        w.flush()?;
        outputs.push(p.clone());
    }
    Ok(Outcome { inputs, outputs })
}

#[derive(Args, Debug, Serialize)]
pub struct EvalLexsubArgs {
    /// TSV: id, target, pos, target_index, context, gold.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// NAME=MODEL:SCORER with SCORER one of smp, exp, sge+c. Repeatable.
    #[arg(long = "run", required = true)]
    pub runs: Vec<String>,
    /// Run that significance markers compare against; default the first.
    #[arg(long)]
    pub baseline: Option<String>,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Per-instance GAPs and summaries as JSON lines.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
}

pub fn eval_lexsub(a: &EvalLexsubArgs, g: &Global) -> anyhow::Result<Outcome> {
    let opts = a.scoring.options(g.seed)?;
    let mut runs = Vec::new();
    for r in &a.runs {
        let (name, rest) = parse_named(r)?;
        let Some((path, scorer)) = rest.rsplit_once(':') else {
            return usage(format!("--run expects NAME=MODEL:SCORER, got {r:?}"));
        };
        let scorer: LexsubScorer = match scorer.parse() {
            Ok(s) => s,
            Err(e) => return usage(e.to_string()),
        };
        if runs.iter().any(|(n, _, _)| n == &name) {
            return usage(format!("duplicate run name {name:?}"));
        }
        runs.push((name, PathBuf::from(path), scorer));
    }
    let baseline = match &a.baseline {
        Some(b) => match runs.iter().position(|(n, _, _)| n == b) {
            Some(i) => i,
            None => return usage(format!("--baseline {b:?} is not a run name")),
        },
        None => 0,
    };

    let mut inputs = vec![a.data.clone(), a.vocab.clone()];
    let hdp = a.scoring.load(&mut inputs)?;
    let vocab = load_vocab(&a.vocab)?;
    let data = LexsubDataset::load(&a.data)?;
    if data.dropped_multiword > 0 {
        eprintln!(
            "dropped {} multiword substitutes and {} instances left without gold",
            data.dropped_multiword, data.dropped_instances
        );
    }

    let mut results = Vec::new();
    for (name, path, scorer) in &runs {
        inputs.push(path.clone());
        let model = load_model(path)?;
        if *scorer != LexsubScorer::SgeC {
            check_topic_model(name, &model, hdp.as_ref())?;
        }
        let rep = eval::eval_lexsub(&model, hdp.as_ref(), &vocab, &data, *scorer, &opts)?;
        results.push((name.clone(), rep));
    }
    let sig = report::significance(&results, baseline)?;
    print!("{}", report::lexsub_table(&results, baseline, &sig));
    let mut outputs = vec![];
    if let Some(p) = &a.jsonl {
        let mut w = create(p)?;
        report::lexsub_jsonl(&mut w, &results, &sig)?;
        w.flush()?;
        outputs.push(p.clone());
    }
    Ok(Outcome { inputs, outputs })
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Two disjoint domains with fused pseudowords, plus lexsub and
    /// similarity benchmarks.
    PseudoSense,
    /// Documents from a few topics with disjoint vocabularies.
    Lda,
}

#[derive(Args, Debug, Serialize)]
pub struct MakeSyntheticArgs {
    #[arg(long, value_enum, default_value = "pseudo-sense")]
    pub kind: SyntheticKind,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub clusters: usize,
    #[arg(long, default_value_t = 10)]
    pub cluster_size: usize,
    #[arg(long, default_value_t = 500)]
    pub docs_per_domain: usize,
    #[arg(long, default_value_t = 40)]
    pub sentences_per_doc: usize,
    #[arg(long, default_value_t = 12)]
    pub sentence_len: usize,
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 4)]
    pub pseudowords: usize,
    #[arg(long, default_value_t = 25)]
    pub lexsub_per_sense: usize,
    #[arg(long, default_value_t = 10)]
    pub scws_per_kind: usize,
    #[arg(long, default_value_t = 3)]
    pub topics: usize,
    #[arg(long, default_value_t = 10)]
    pub words_per_topic: usize,
    #[arg(long, default_value_t = 200)]
    pub docs: usize,
    #[arg(long, default_value_t = 100)]
    pub doc_len: usize,
    #[arg(long, default_value_t = 0.5)]
    pub doc_alpha: f64,
}

fn write_lines(path: &Path, lines: &[String]) -> anyhow::Result<()> {
    let mut w = create(path)?;
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn make_synthetic(a: &MakeSyntheticArgs, g: &Global) -> anyhow::Result<Outcome> {
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let path = |name: &str| a.out_dir.join(name);
    let mut outputs = Vec::new();
    match a.kind {
        SyntheticKind::PseudoSense => {
            if a.pseudowords > 4 || a.pseudowords > a.clusters || a.cluster_size < 7 {
                return usage("need --pseudowords <= 4 and <= --clusters, and --cluster-size >= 7");
            }
            if !(0.0..=1.0).contains(&a.noise) || a.docs_per_domain == 0 || a.sentence_len == 0 {
                return usage("need --noise in [0, 1] and positive sizes");
            }
            let ps = synthetic::pseudo_sense(&PseudoSenseSpec {
                clusters: a.clusters,
                cluster_size: a.cluster_size,
                docs_per_domain: a.docs_per_domain,
                sentences_per_doc: a.sentences_per_doc,
                sentence_len: a.sentence_len,
                noise: a.noise,
                pseudowords: a.pseudowords,
                lexsub_per_sense: a.lexsub_per_sense,
                scws_per_kind: a.scws_per_kind,
                seed: g.seed,
            });
            write_lines(&path("corpus.txt"), &ps.lines)?;
            let domains: Vec<String> = ps.doc_domain.iter().map(|d| format!("{d:?}")).collect();
            write_lines(&path("doc-domains.txt"), &domains)?;
            let mut vocab_lines = Vec::new();
            for d in [Domain::A, Domain::B] {
                vocab_lines.extend(ps.domain_vocabulary(d).into_iter().map(|w| format!("{w}\t{d:?}")));
            }
            write_lines(&path("domains.tsv"), &vocab_lines)?;
            let pw: Vec<String> = ps
                .pseudowords
                .iter()
                .map(|p| format!("{}\t{}\t{}\t{}", p.name, p.pos.short(), p.fused[0], p.fused[1]))
                .collect();
            write_lines(&path("pseudowords.tsv"), &pw)?;
            LexsubDataset::save(&ps.lexsub, path("lexsub.tsv"))?;
            save_scws(&ps.scws, path("scws.tsv"))?;
            for f in ["corpus.txt", "doc-domains.txt", "domains.tsv", "pseudowords.tsv", "lexsub.tsv", "scws.tsv"] {
                outputs.push(path(f));
            }
        }
        SyntheticKind::Lda => {
            if a.topics == 0 || a.words_per_topic == 0 || a.docs == 0 || a.doc_len == 0 || !(a.doc_alpha > 0.0) {
                return usage("LDA sizes and --doc-alpha must be positive");
            }
            let lda = synthetic::lda_corpus(&LdaSpec {
                num_topics: a.topics,
                words_per_topic: a.words_per_topic,
                docs: a.docs,
                doc_len: a.doc_len,
                doc_alpha: a.doc_alpha,
                seed: g.seed,
            });
            write_lines(&path("corpus.txt"), &lda.lines)?;
            let vocab = &lda.corpus.vocab;
            let mut rows = Vec::new();
            for (t, dist) in lda.topics.iter().enumerate() {
                for (w, &p) in dist.iter().enumerate() {
                    if p > 0.0 {
                        rows.push(format!("{t}\t{}\t{p:.12}", vocab.token(w as u32).unwrap_or_default()));
                    }
                }
            }
            write_lines(&path("topics.tsv"), &rows)?;
            outputs.push(path("corpus.txt"));
            outputs.push(path("topics.tsv"));
        }
    }
    Ok(Outcome {
        inputs: vec![],
        outputs,
    })
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LexsubFormat {
    /// lexsub_test.xml plus a gold file with `lemma.pos id :: sub n;...` lines.
    Semeval07,
    /// CoInCo XML with inline substitutions.
    Coinco,
}

#[derive(Args, Debug, Serialize)]
pub struct ConvertLexsubArgs {
    #[arg(long, value_enum)]
    pub format: LexsubFormat,
    #[arg(long)]
    pub xml: PathBuf,
    /// Gold file (semeval07 only).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}
