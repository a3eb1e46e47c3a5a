use super::*;
use crate::corpus::{build_vocab, Corpus};
use crate::hdp::{DocTopicDist, TopicLabeling};
use crate::synthetic::{lda_corpus, LdaSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALL: [Variant; 4] = [Variant::Sge, Variant::Htle, Variant::HtleAdd, Variant::Stle];

/// Every (word, topic) pair present, all rows uniform in [-1, 1].
fn toy(variant: Variant, dim: usize, k: usize, v: usize, seed: u64) -> EmbeddingModel {
    let pairs: Vec<((WordId, TopicId), f64)> = (0..v as WordId)
        .flat_map(|w| (0..k as TopicId).map(move |t| ((w, t), 1.0 + t as f64)))
        .collect();
    let mut m = EmbeddingModel::new(variant, dim, k, v, &pairs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in m
        .topic_rows
        .iter_mut()
        .chain(m.generic_rows.iter_mut())
        .chain(m.output_rows.iter_mut())
    {
        *x = rng.random::<f64>() * 2.0 - 1.0;
    }
    m
}

fn target_for(variant: Variant, w: WordId, k: usize, rng: &mut ChaCha8Rng) -> Target {
    match variant {
        Variant::Sge => Target::Word(w),
        Variant::Htle | Variant::HtleAdd => Target::Pair(w, rng.random_range(0..k as TopicId)),
        Variant::Stle => {
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
            let z: f64 = raw.iter().sum();
            Target::Mixture(w, raw.iter().enumerate().map(|(t, p)| (t as TopicId, p / z)).collect())
        }
    }
}

#[test]
fn table_layout_per_variant() {
    let pairs = [((0, 0), 1.0), ((1, 1), 2.0), ((1, 0), 3.0)];
    for v in ALL {
        let m = EmbeddingModel::new(v, 4, 2, 3, &pairs).unwrap();
        assert_eq!(m.output_rows().len(), 3 * 4);
        assert_eq!(m.generic_rows().is_empty(), !v.has_generic_table());
        assert_eq!(m.topic_rows().is_empty(), !v.has_topic_table());
    }
    let m = EmbeddingModel::new(Variant::Htle, 4, 2, 3, &pairs).unwrap();
    assert_eq!(m.pairs(), &[(0, 0), (1, 0), (1, 1)]);
    assert_eq!(m.dominant_topic(1), Some(0));
    assert!(!m.contains(2));
    assert!(EmbeddingModel::new(Variant::Htle, 4, 2, 3, &[((0, 2), 1.0)]).is_err());
    assert!(EmbeddingModel::new(Variant::Sge, 0, 0, 3, &[]).is_err());
}

#[test]
fn htleadd_with_zero_pair_row_is_generic_row() {
    let mut m = toy(Variant::HtleAdd, 5, 2, 3, 1);
    m.pair_row_mut(1, 1).unwrap().fill(0.0);
    let h = m.embed_target(1, TopicInfo::Hard(1)).unwrap();
    assert_eq!(h, m.generic_row(1).unwrap());
}

#[test]
fn embed_target_per_variant() {
    let m = toy(Variant::Htle, 3, 2, 2, 2);
    assert_eq!(m.embed_target(0, TopicInfo::Hard(1)).unwrap(), m.pair_row(0, 1).unwrap());
    assert!(m.embed_target(0, TopicInfo::Hard(2)).is_err());
    assert!(matches!(m.embed_target(9, TopicInfo::Hard(0)), Err(Error::Oov(_))));

    let s = toy(Variant::Sge, 3, 0, 2, 3);
    assert_eq!(s.embed_target(1, TopicInfo::Hard(7)).unwrap(), s.generic_row(1).unwrap());

    let a = toy(Variant::HtleAdd, 3, 2, 2, 4);
    let h = a.embed_target(1, TopicInfo::Hard(0)).unwrap();
    for i in 0..3 {
        assert_eq!(h[i], a.pair_row(1, 0).unwrap()[i] + a.generic_row(1).unwrap()[i]);
    }
}

#[test]
fn stle_point_mass_and_uniform_mixture() {
    let mut m = toy(Variant::Stle, 3, 2, 1, 5);
    m.pair_row_mut(0, 0).unwrap().copy_from_slice(&[1.0, 2.0, 3.0]);
    m.pair_row_mut(0, 1).unwrap().copy_from_slice(&[3.0, -2.0, 0.5]);
    assert_eq!(m.embed_target(0, TopicInfo::Dist(&[0.0, 1.0])).unwrap(), vec![3.0, -2.0, 0.5]);
    assert_eq!(m.embed_target(0, TopicInfo::Dist(&[0.5, 0.5])).unwrap(), vec![2.0, 0.0, 1.75]);
    assert!(matches!(
        m.embed_target(0, TopicInfo::Dist(&[0.5, 0.6])),
        Err(Error::MalformedDistribution(_))
    ));
    assert!(m.embed_target(0, TopicInfo::Dist(&[1.0])).is_err());
}

proptest! {
    #[test]
    fn stle_is_linear_in_weights(
        p in prop::collection::vec(0.0f64..3.0, 4),
        q in prop::collection::vec(0.0f64..3.0, 4),
        scale in 0.1f64..5.0,
    ) {
        let m = toy(Variant::Stle, 6, 4, 2, 6);
        let sum: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + b).collect();
        let ep = m.embed_weighted(1, &p).unwrap();
        let eq = m.embed_weighted(1, &q).unwrap();
        let es = m.embed_weighted(1, &sum).unwrap();
        let scaled: Vec<f64> = p.iter().map(|x| x * scale).collect();
        let ek = m.embed_weighted(1, &scaled).unwrap();
        for i in 0..6 {
            prop_assert!((ep[i] + eq[i] - es[i]).abs() < 1e-12);
            prop_assert!((ep[i] * scale - ek[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_dot_positive_coefficient_is_half() {
    let mut m = toy(Variant::Sge, 4, 0, 2, 7);
    m.output_row_mut(1).unwrap().fill(0.0);
    let h = m.generic_row(0).unwrap().to_vec();
    let lr = 0.1;
    let loss = sgns_step(&mut m, &Target::Word(0), 1, &[], lr).unwrap();
    assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    for (o, hv) in m.output_row(1).unwrap().iter().zip(&h) {
        assert!((o - lr * 0.5 * hv).abs() < 1e-15);
    }
    // Input gradient was taken against the zero output row.
    assert_eq!(m.generic_row(0).unwrap(), &h[..]);
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for v in ALL {
        let mut m = toy(v, 6, 3, 5, 9);
        let before = m.clone();
        let t = target_for(v, 2, 3, &mut rng);
        sgns_step(&mut m, &t, 3, &[0, 4, 1], 0.0).unwrap();
        assert_eq!(m, before);
    }
}

#[test]
fn step_rejects_bad_input() {
    let mut m = toy(Variant::Htle, 4, 2, 3, 1);
    assert!(sgns_step(&mut m, &Target::Word(0), 1, &[], 0.1).is_err());
    assert!(sgns_step(&mut m, &Target::Pair(0, 0), 7, &[], 0.1).is_err());
    assert!(sgns_step(&mut m, &Target::Pair(0, 0), 1, &[], -1.0).is_err());
}

/// Parameters touched by one step, as (table, flat index) pairs.
fn touched(m: &EmbeddingModel, target: &Target, outputs: &[WordId]) -> Vec<(u8, usize)> {
    let mut rows = Vec::new();
    m.training_rows(target, &mut rows).unwrap();
    let d = m.dim();
    let mut out = Vec::new();
    for r in rows {
        let t = if r.table == Table::Topic { 0 } else { 1 };
        out.extend((0..d).map(|i| (t, r.row * d + i)));
    }
    for &w in outputs {
        out.extend((0..d).map(|i| (2, w as usize * d + i)));
    }
    out
}

fn param(m: &mut EmbeddingModel, (t, i): (u8, usize)) -> &mut f64 {
    match t {
        0 => &mut m.topic_rows[i],
        1 => &mut m.generic_rows[i],
        _ => &mut m.output_rows[i],
    }
}

#[test]
fn gradients_match_finite_differences() {
    let eps = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for v in ALL {
        for case in 0..3 {
            let m0 = toy(v, 8, 3, 6, 100 + case);
            let target = target_for(v, 0, 3, &mut rng);
            let (ctx, negs) = (1, [2, 3, 4]);
            let mut stepped = m0.clone();
            sgns_step(&mut stepped, &target, ctx, &negs, 1.0).unwrap();
            for p in touched(&m0, &target, &[1, 2, 3, 4]) {
                let analytic = *param(&mut m0.clone(), p) - *param(&mut stepped, p);
                let mut plus = m0.clone();
                *param(&mut plus, p) += eps;
                let mut minus = m0.clone();
                *param(&mut minus, p) -= eps;
                let numeric = (sgns_loss(&plus, &target, ctx, &negs).unwrap()
                    - sgns_loss(&minus, &target, ctx, &negs).unwrap())
                    / (2.0 * eps);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                assert!(rel < 1e-4, "{v} {p:?}: analytic {analytic} numeric {numeric}");
            }
        }
    }
}

#[test]
fn repeated_outputs_use_original_rows() {
    let eps = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for v in ALL {
        let m0 = toy(v, 8, 3, 6, 7);
        let target = target_for(v, 0, 3, &mut rng);
        let (ctx, negs) = (1, [1, 2, 2]);
        let mut stepped = m0.clone();
        sgns_step(&mut stepped, &target, ctx, &negs, 1.0).unwrap();
        for p in touched(&m0, &target, &[1, 2]) {
            let analytic = *param(&mut m0.clone(), p) - *param(&mut stepped, p);
            let mut plus = m0.clone();
            *param(&mut plus, p) += eps;
            let mut minus = m0.clone();
            *param(&mut minus, p) -= eps;
            let numeric = (sgns_loss(&plus, &target, ctx, &negs).unwrap()
                - sgns_loss(&minus, &target, ctx, &negs).unwrap())
                / (2.0 * eps);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(rel < 1e-4, "{v} {p:?}: analytic {analytic} numeric {numeric}");
        }
    }
}

fn repeated_corpus(text: &str, n: usize) -> Corpus {
    let lines: Vec<String> = (0..n).map(|_| text.to_string()).collect();
    let vocab = build_vocab(&lines, 1).unwrap();
    Corpus::from_lines(&lines, &vocab)
}

fn small_config(variant: Variant) -> TrainConfig {
    TrainConfig {
        variant,
        dim: 10,
        window: 3,
        epochs: 2,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn single_topic_collapses_to_skipgram() {
    let corpus = repeated_corpus("a b a b b a", 50);
    let labeling = TopicLabeling {
        num_topics: 1,
        labels: corpus.documents.iter().map(|d| vec![0; d.tokens.len()]).collect(),
    };
    let dists = vec![DocTopicDist(vec![1.0]); corpus.len()];
    for subsample in [None, Some(1e-4)] {
        let cfg = |v| TrainConfig {
            subsample,
            ..small_config(v)
        };
        let sge = train(&corpus, None, None, &cfg(Variant::Sge)).unwrap();
        let htle = train(&corpus, Some(&labeling), None, &cfg(Variant::Htle)).unwrap();
        let stle = train(&corpus, None, Some(&dists), &cfg(Variant::Stle)).unwrap();
        for w in 0..2 {
            let base = sge.generic_row(w).unwrap();
            assert_eq!(htle.pair_row(w, 0).unwrap(), base);
            assert_eq!(stle.pair_row(w, 0).unwrap(), base);
            let c = crate::inference::cosine(htle.pair_row(w, 0).unwrap(), base).unwrap();
            assert!((c - 1.0).abs() < 1e-12);
        }
        assert_eq!(htle.output_rows(), sge.output_rows());
    }
}

fn planted() -> (Corpus, TopicLabeling, Vec<DocTopicDist>) {
    let lda = lda_corpus(&LdaSpec {
        docs: 1000,
        doc_len: 100,
        ..Default::default()
    });
    let labels = TopicLabeling {
        num_topics: 3,
        labels: lda
            .corpus
            .documents
            .iter()
            .map(|d| d.tokens.iter().map(|&w| lda.word_topic[w as usize] as TopicId).collect())
            .collect(),
    };
    let dists = labels
        .labels
        .iter()
        .map(|l| {
            let mut p = vec![0.0; 3];
            for &k in l {
                p[k as usize] += 1.0 / l.len() as f64;
            }
            DocTopicDist(p)
        })
        .collect();
    (lda.corpus, labels, dists)
}

#[test]
fn mean_loss_decreases_for_every_variant() {
    let (corpus, labels, dists) = planted();
    assert!(corpus.token_count() >= 100_000);
    for v in ALL {
        let cfg = TrainConfig {
            variant: v,
            dim: 20,
            window: 5,
            epochs: 3,
            seed: 3,
            ..Default::default()
        };
        let (model, report) = train_with_report(&corpus, Some(&labels), Some(&dists), &cfg).unwrap();
        let first = report.epoch_loss[0];
        let last = *report.epoch_loss.last().unwrap();
        assert!(last < first, "{v}: first {first} last {last}");
        if v.has_topic_table() {
            assert!(model.pairs().len() <= corpus.vocab.len() * 3);
        }
        if v == Variant::Htle {
            let mut distinct: Vec<(WordId, TopicId)> = corpus
                .documents
                .iter()
                .zip(&labels.labels)
                .flat_map(|(d, l)| d.tokens.iter().copied().zip(l.iter().copied()))
                .collect();
            distinct.sort_unstable();
            distinct.dedup();
            assert_eq!(model.pairs(), &distinct[..]);
        }
    }
}

#[test]
fn training_is_deterministic() {
    let (corpus, labels, dists) = planted();
    let corpus = corpus.head(100);
    let labels = TopicLabeling {
        num_topics: 3,
        labels: labels.labels[..100].to_vec(),
    };
    let dists = &dists[..100];
    for v in ALL {
        let cfg = small_config(v);
        let a = train(&corpus, Some(&labels), Some(dists), &cfg).unwrap();
        let b = train(&corpus, Some(&labels), Some(dists), &cfg).unwrap();
        assert_eq!(a, b, "{v}");
        let c = train(&corpus, Some(&labels), Some(dists), &TrainConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn parallel_training_runs() {
    let (corpus, labels, _) = planted();
    let corpus = corpus.head(200);
    let labels = TopicLabeling {
        num_topics: 3,
        labels: labels.labels[..200].to_vec(),
    };
    let cfg = TrainConfig {
        threads: 4,
        ..small_config(Variant::HtleAdd)
    };
    let (m, report) = train_with_report(&corpus, Some(&labels), None, &cfg).unwrap();
    assert!(report.updates > 0);
    assert!(m.topic_rows().iter().chain(m.output_rows()).all(|x| x.is_finite()));
}

#[test]
fn missing_topic_inputs_are_config_errors() {
    let corpus = repeated_corpus("a b", 3);
    for v in [Variant::Htle, Variant::HtleAdd, Variant::Stle] {
        assert!(matches!(
            train(&corpus, None, None, &small_config(v)),
            Err(Error::Config(_))
        ));
    }
    let bad = TrainConfig {
        window: 0,
        ..small_config(Variant::Sge)
    };
    assert!(train(&corpus, None, None, &bad).is_err());
    let wrong = vec![DocTopicDist(vec![0.5, 0.6]); 3];
    assert!(train(&corpus, None, Some(&wrong), &small_config(Variant::Stle)).is_err());
}

#[test]
fn stle_truncation_keeps_top_topics() {
    let d = DocTopicDist(vec![0.1, 0.4, 0.2, 0.3]);
    let ws = super::train::stle_mixture(&d, Some(2));
    assert_eq!(ws.len(), 2);
    assert_eq!(ws[0].0, 1);
    assert_eq!(ws[1].0, 3);
    assert!((ws[0].1 - 4.0 / 7.0).abs() < 1e-15);
    let all = super::train::stle_mixture(&d, None);
    assert_eq!(all.len(), 4);
    assert_eq!(all[2].1, 0.2);
}

#[test]
fn nearest_neighbor_cases() {
    let mut m = toy(Variant::Htle, 4, 2, 4, 11);
    let q = m.pair_row(0, 0).unwrap().to_vec();
    m.pair_row_mut(2, 1).unwrap().copy_from_slice(&q);
    let nn = m.nearest_neighbors(0, TopicInfo::Hard(0), 3).unwrap();
    assert_eq!(nn[0].entry, Entry::Pair(2, 1));
    assert!((nn[0].cosine - 1.0).abs() < 1e-12);
    assert!(nn.iter().all(|n| n.entry != Entry::Pair(0, 0)));
    assert!(nn.windows(2).all(|w| w[0].cosine >= w[1].cosine));

    let all = m.nearest_neighbors(0, TopicInfo::Hard(0), 1000).unwrap();
    assert_eq!(all.len(), m.pairs().len() - 1);
    assert!(m.nearest_neighbors(0, TopicInfo::Hard(0), 0).is_err());
    assert!(m.nearest_neighbors(99, TopicInfo::None, 3).is_err());

    let s = toy(Variant::Sge, 4, 0, 5, 12);
    let nn = s.nearest_neighbors(3, TopicInfo::None, 10).unwrap();
    assert_eq!(nn.len(), 4);
    assert!(nn.iter().all(|n| n.entry != Entry::Word(3)));
}

#[test]
fn neighbor_ties_break_by_entry_id() {
    let mut m = toy(Variant::Sge, 2, 0, 4, 13);
    for w in 0..4 {
        m.generic_row_mut(w).unwrap().copy_from_slice(&[1.0, 0.0]);
    }
    let nn = m.nearest_neighbors(2, TopicInfo::None, 3).unwrap();
    let ids: Vec<Entry> = nn.iter().map(|n| n.entry).collect();
    assert_eq!(ids, vec![Entry::Word(0), Entry::Word(1), Entry::Word(3)]);
}

#[test]
fn missing_pair_falls_back() {
    let pairs = [((0, 0), 5.0), ((0, 1), 1.0), ((1, 1), 1.0)];
    let mut m = EmbeddingModel::new(Variant::Htle, 2, 3, 2, &pairs).unwrap();
    m.init_uniform(&mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(m.embed_target(0, TopicInfo::Hard(2)).unwrap(), m.pair_row(0, 0).unwrap());
    assert_eq!(m.embed_target(0, TopicInfo::None).unwrap(), m.pair_row(0, 0).unwrap());

    let mut a = EmbeddingModel::new(Variant::HtleAdd, 2, 3, 2, &pairs).unwrap();
    a.init_uniform(&mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(a.embed_target(1, TopicInfo::Hard(0)).unwrap(), a.generic_row(1).unwrap());
}

#[test]
fn binary_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    for v in ALL {
        let m = toy(v, 5, 3, 4, 14);
        let path = dir.path().join(format!("{v}.tse"));
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        let bits = |x: &[f64]| x.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.topic_rows()), bits(m.topic_rows()));
        assert_eq!(bits(back.output_rows()), bits(m.output_rows()));
    }
    let path = dir.path().join("bad.tse");
    std::fs::write(&path, b"XXXX\x01\x00\x00\x00").unwrap();
    assert!(matches!(load_model(&path), Err(Error::Format(_))));

    let mut bytes = Vec::new();
    toy(Variant::Sge, 2, 0, 2, 1).write_to(&mut bytes).unwrap();
    bytes[4] = 9;
    std::fs::write(&path, &bytes).unwrap();
    let err = load_model(&path).unwrap_err();
    assert!(matches!(err, Error::Version { found: 9, expected: FORMAT_VERSION }));
    let msg = err.to_string();
    assert!(msg.contains('9') && msg.contains(&FORMAT_VERSION.to_string()));

    let mut truncated = Vec::new();
    toy(Variant::Htle, 2, 2, 2, 1).write_to(&mut truncated).unwrap();
    truncated.truncate(truncated.len() - 3);
    std::fs::write(&path, &truncated).unwrap();
    assert!(load_model(&path).is_err());
}

#[test]
fn text_export_layout() {
    let vocab = crate::corpus::Vocabulary::from_counts([("x", 3u64), ("y", 2), ("z", 1)]);
    let pairs = [((0, 0), 1.0), ((0, 1), 1.0), ((2, 1), 1.0)];
    let mut m = EmbeddingModel::new(Variant::Htle, 3, 2, 3, &pairs).unwrap();
    m.init_uniform(&mut ChaCha8Rng::seed_from_u64(2));
    let mut out = Vec::new();
    export_text(&m, &vocab, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 3);
    assert_eq!(lines[0], "6 3");
    assert!(lines[1].starts_with("x#0 "));
    assert!(lines[3].starts_with("z#1 "));
    assert!(lines[4].starts_with("ctx:x "));
    let fields: Vec<&str> = lines[2].split(' ').collect();
    assert_eq!(fields.len(), 4);
    assert!(fields[1..].iter().all(|f| f.split('.').nth(1).map(str::len) == Some(6)));
}
