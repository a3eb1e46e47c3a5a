use proptest::prelude::*;
use tse_core::embeddings::{EmbeddingModel, TopicInfo, Variant};
use tse_core::hdp::{HdpHyper, TopicModel};
use tse_core::inference::*;
use tse_core::{TopicId, WordId};

fn cos(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nu * nv)
}

/// dim 2, K 2, V 4: words 0 (target) and 1 (substitute) have both topic rows,
/// words 2 and 3 are context words.
fn toy(variant: Variant) -> EmbeddingModel {
    let pairs: Vec<((WordId, TopicId), f64)> = (0..4).flat_map(|w| (0..2).map(move |k| ((w, k), 1.0))).collect();
    let mut m = EmbeddingModel::new(variant, 2, 2, 4, &pairs).unwrap();
    if variant.has_topic_table() {
        m.pair_row_mut(0, 0).unwrap().copy_from_slice(&[1.0, 0.0]);
        m.pair_row_mut(0, 1).unwrap().copy_from_slice(&[0.0, 1.0]);
        m.pair_row_mut(1, 0).unwrap().copy_from_slice(&[1.0, 1.0]);
        m.pair_row_mut(1, 1).unwrap().copy_from_slice(&[-1.0, 2.0]);
    }
    if variant.has_generic_table() {
        m.generic_row_mut(0).unwrap().copy_from_slice(&[2.0, 1.0]);
        m.generic_row_mut(1).unwrap().copy_from_slice(&[1.0, -1.0]);
    }
    m.output_row_mut(2).unwrap().copy_from_slice(&[3.0, 1.0]);
    m.output_row_mut(3).unwrap().copy_from_slice(&[-1.0, 4.0]);
    m
}

fn context() -> ScoredContext {
    ScoredContext::new(vec![Some(2), Some(0), Some(3)], 1).unwrap()
}

#[test]
fn sampled_matches_manual_evaluation() {
    let m = toy(Variant::Htle);
    let s = sampled_score(&m, 1, TopicInfo::Hard(1), 0, TopicInfo::Hard(0), &[2, 3]).unwrap().unwrap();
    // h(s) = (-1, 2), h(t) = (1, 0), o = (3, 1) and (-1, 4)
    let first = -1.0 / 5f64.sqrt();
    let c2 = (-3.0 + 2.0) / (5f64.sqrt() * 10f64.sqrt());
    let c3 = (1.0 + 8.0) / (5f64.sqrt() * 17f64.sqrt());
    assert!((s - (first + (c2 + c3) / 2.0)).abs() < 1e-12);
}

#[test]
fn expected_matches_manual_enumeration() {
    let m = toy(Variant::Htle);
    let p = [0.5, 0.5];
    let e = expected_score(&m, 1, 0, &p, &p, &[2, 3]).unwrap().unwrap();
    let hs = [[1.0, 1.0], [-1.0, 2.0]];
    let ht = [[1.0, 0.0], [0.0, 1.0]];
    let o = [[3.0, 1.0], [-1.0, 4.0]];
    let mut manual = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            manual += 0.25 * cos(&hs[a], &ht[b]);
        }
        manual += 0.5 * (cos(&hs[a], &o[0]) + cos(&hs[a], &o[1])) / 2.0;
    }
    assert!((e - manual).abs() < 1e-12);
}

#[test]
fn expected_with_point_masses_equals_sampled() {
    for v in [Variant::Htle, Variant::HtleAdd, Variant::Stle] {
        let m = toy(v);
        for (ks, kt) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let mut ps = [0.0; 2];
            ps[ks] = 1.0;
            let mut pt = [0.0; 2];
            pt[kt] = 1.0;
            let e = expected_score(&m, 1, 0, &ps, &pt, &[2, 3]).unwrap();
            let s = sampled_score(
                &m,
                1,
                TopicInfo::Hard(ks as TopicId),
                0,
                TopicInfo::Hard(kt as TopicId),
                &[2, 3],
            )
            .unwrap();
            assert_eq!(e, s);
        }
    }
}

#[test]
fn htleadd_scores_use_summed_rows() {
    let m = toy(Variant::HtleAdd);
    let s = sampled_score(&m, 1, TopicInfo::Hard(0), 0, TopicInfo::Hard(1), &[]).unwrap().unwrap();
    // (1,1)+(1,-1) vs (0,1)+(2,1)
    assert!((s - cos(&[2.0, 0.0], &[2.0, 2.0])).abs() < 1e-12);
}

#[test]
fn empty_window_drops_context_term() {
    let m = toy(Variant::Sge);
    let lone = ScoredContext::new(vec![None, Some(0), None], 1).unwrap();
    let opts = ScoringOptions::default();
    let s = sim_sge_c(&m, 1, &lone, &opts).unwrap().unwrap();
    assert!((s - cos(&[1.0, -1.0], &[2.0, 1.0])).abs() < 1e-12);
    let narrow = ScoringOptions { window: 0, ..opts };
    let s0 = sim_sge_c(&m, 1, &context(), &narrow).unwrap().unwrap();
    assert_eq!(s, s0);
}

#[test]
fn sge_c_manual_and_self_substitution() {
    let m = toy(Variant::Sge);
    let opts = ScoringOptions::default();
    let s = sim_sge_c(&m, 1, &context(), &opts).unwrap().unwrap();
    let h = [1.0, -1.0];
    let manual = cos(&h, &[2.0, 1.0]) + (cos(&h, &[3.0, 1.0]) + cos(&h, &[-1.0, 4.0])) / 2.0;
    assert!((s - manual).abs() < 1e-12);

    let same = sim_sge_c(&m, 0, &context(), &opts).unwrap().unwrap();
    let ht = [2.0, 1.0];
    let ctx_term = (cos(&ht, &[3.0, 1.0]) + cos(&ht, &[-1.0, 4.0])) / 2.0;
    assert!((same - (1.0 + ctx_term)).abs() < 1e-12);
}

#[test]
fn unscorable_candidates() {
    let pairs = [((0, 0), 1.0), ((2, 0), 1.0), ((3, 0), 1.0)];
    let m = EmbeddingModel::new(Variant::Htle, 2, 1, 4, &pairs).unwrap();
    // word 1 has no row under this model
    let r = sampled_score(&m, 1, TopicInfo::Hard(0), 0, TopicInfo::Hard(0), &[2]).unwrap();
    assert_eq!(r, None);
    let no_target = ScoredContext::new(vec![Some(2), None], 1).unwrap();
    let sge = toy(Variant::Sge);
    assert_eq!(sim_sge_c(&sge, 1, &no_target, &ScoringOptions::default()).unwrap(), None);
}

fn single_topic_hdp(v: usize) -> TopicModel {
    TopicModel::from_counts(HdpHyper::default(), v, vec![5; v], vec![1.0]).unwrap()
}

/// A one-topic model whose pair rows copy the generic rows of `sge`.
fn collapsed(sge: &EmbeddingModel, variant: Variant) -> EmbeddingModel {
    let v = sge.vocab_size();
    let pairs: Vec<((WordId, TopicId), f64)> = (0..v as WordId).map(|w| ((w, 0), 1.0)).collect();
    let mut m = EmbeddingModel::new(variant, sge.dim(), 1, v, &pairs).unwrap();
    for w in 0..v as WordId {
        let g = sge.generic_row(w).unwrap().to_vec();
        if variant == Variant::HtleAdd {
            m.generic_row_mut(w).unwrap().copy_from_slice(&g);
        } else {
            m.pair_row_mut(w, 0).unwrap().copy_from_slice(&g);
        }
    }
    m.output_rows_mut().copy_from_slice(sge.output_rows());
    m
}

#[test]
fn single_topic_scorers_equal_skipgram() {
    let sge = toy(Variant::Sge);
    let hdp = single_topic_hdp(4);
    let opts = ScoringOptions::default();
    for v in [Variant::Htle, Variant::HtleAdd, Variant::Stle] {
        let m = collapsed(&sge, v);
        for sub in [0, 1, 3] {
            let base = sim_sge_c(&sge, sub, &context(), &opts).unwrap();
            assert_eq!(sim_tse_sampled(&m, Some(&hdp), sub, &context(), &opts).unwrap(), base);
            assert_eq!(sim_tse_expected(&m, Some(&hdp), sub, &context(), &opts).unwrap(), base);
        }
        let other = ScoredContext::new(vec![Some(1), Some(3)], 0).unwrap();
        let pair = sim_pair(&m, Some(&hdp), &context(), &other, &opts).unwrap().unwrap();
        assert!((pair - cos(&[2.0, 1.0], &[1.0, -1.0])).abs() < 1e-12);
    }
}

#[test]
fn identical_contexts_are_maximally_similar() {
    let m = toy(Variant::Htle);
    let counts = vec![5, 1, 3, 1, 1, 5, 1, 3];
    let hdp = TopicModel::from_counts(HdpHyper::default(), 4, counts, vec![0.5, 0.5]).unwrap();
    let opts = ScoringOptions::default();
    let s = sim_pair(&m, Some(&hdp), &context(), &context(), &opts).unwrap().unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    assert!(sim_pair(&m, None, &context(), &context(), &opts).is_err());
}

#[test]
fn scorers_are_deterministic() {
    let m = toy(Variant::Htle);
    let counts = vec![5, 1, 3, 1, 1, 5, 1, 3];
    let hdp = TopicModel::from_counts(HdpHyper::default(), 4, counts, vec![0.5, 0.5]).unwrap();
    let opts = ScoringOptions::default();
    let a = sim_tse_sampled(&m, Some(&hdp), 1, &context(), &opts).unwrap();
    let b = sim_tse_sampled(&m, Some(&hdp), 1, &context(), &opts).unwrap();
    assert_eq!(a, b);
    let reuse = ScoringOptions {
        reuse_target_topic: true,
        ..opts
    };
    assert!(sim_tse_sampled(&m, Some(&hdp), 1, &context(), &reuse).unwrap().is_some());
}

proptest! {
    #[test]
    fn expected_invariant_to_topic_permutation(
        rows in prop::collection::vec(-2.0f64..2.0, 8),
        p0 in 0.0f64..1.0,
    ) {
        let p = [p0, 1.0 - p0];
        let pairs: Vec<((WordId, TopicId), f64)> = (0..2).flat_map(|w| (0..2).map(move |k| ((w, k), 1.0))).collect();
        let build = |swap: bool| {
            let mut m = EmbeddingModel::new(Variant::Htle, 2, 2, 4, &pairs).unwrap();
            for w in 0..2u32 {
                for k in 0..2u32 {
                    let src = (w * 2 + k) as usize * 2;
                    let kk = if swap { 1 - k } else { k };
                    m.pair_row_mut(w, kk).unwrap().copy_from_slice(&rows[src..src + 2]);
                }
            }
            m.output_row_mut(2).unwrap().copy_from_slice(&[1.0, 0.5]);
            m.output_row_mut(3).unwrap().copy_from_slice(&[-0.3, 2.0]);
            m
        };
        let a = expected_score(&build(false), 1, 0, &p, &p, &[2, 3]).unwrap();
        let q = [p[1], p[0]];
        let b = expected_score(&build(true), 1, 0, &q, &q, &[2, 3]).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((-2.0..=2.0).contains(&a));
            }
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}
