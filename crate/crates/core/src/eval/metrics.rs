use std::collections::HashMap;

use crate::error::{Error, Result};

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two observations".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("zero variance".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in input".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
        .map_err(|e| match e {
            Error::InvalidArgument(m) if m == "zero variance" => {
                Error::InvalidArgument("zero rank variance".into())
            }
            other => other,
        })
}

/// Generalized average precision of a ranking against weighted gold items.
///
/// `GAP = Σ_i [x_i > 0] · mean(x_1..x_i) / Σ_{j ≤ R} mean(y_1..y_j)` where
/// `x_i` is the gold weight of the item at rank `i` (0 for non-gold), `y` the
/// gold weights sorted in descending order and `R` the number of gold items.
/// Repeated items only count at their first occurrence.
pub fn gap<S: AsRef<str>>(ranking: &[S], gold: &[(String, u32)]) -> Result<f64> {
    if gold.is_empty() {
        return Err(Error::InvalidArgument("empty gold set".into()));
    }
    let mut weights: HashMap<&str, u32> = HashMap::with_capacity(gold.len());
    for (s, w) in gold {
        *weights.entry(s.as_str()).or_insert(0) += w;
    }

    let mut numerator = 0.0;
    let mut cumulative = 0.0;
    for (i, item) in ranking.iter().enumerate() {
        let x = weights.remove(item.as_ref()).unwrap_or(0);
        cumulative += x as f64;
        if x > 0 {
            numerator += cumulative / (i + 1) as f64;
        }
    }

    let mut ys: Vec<u32> = gold.iter().map(|&(_, w)| w).collect();
    ys.sort_unstable_by(|a, b| b.cmp(a));
    let mut denominator = 0.0;
    let mut cumulative = 0.0;
    for (j, &y) in ys.iter().enumerate() {
        cumulative += y as f64;
        denominator += cumulative / (j + 1) as f64;
    }
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(items: &[(&str, u32)]) -> Vec<(String, u32)> {
        items.iter().map(|&(s, w)| (s.to_string(), w)).collect()
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn spearman_extremes() {
        let xs: Vec<f64> = (0..20).map(|i| (i * i) as f64).collect();
        assert!((spearman(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let rev: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((spearman(&xs, &rev).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_errors() {
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gap_hand_case() {
        let v = gap(&["a", "c", "b"], &g(&[("a", 3), ("b", 1)])).unwrap();
        assert!((v - 13.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn gap_ideal_is_one() {
        let gold = g(&[("x", 5), ("y", 3), ("z", 3), ("w", 1)]);
        assert!((gap(&["x", "z", "y", "w"], &gold).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_ignores_trailing_intruders() {
        let gold = g(&[("x", 2), ("y", 4)]);
        let base = gap(&["q", "x", "y"], &gold).unwrap();
        let more = gap(&["q", "x", "y", "r", "s", "t"], &gold).unwrap();
        assert_eq!(base, more);
    }

    #[test]
    fn gap_empty_gold() {
        assert!(gap(&["a"], &[]).is_err());
    }

    proptest! {
        #[test]
        fn gap_in_unit_interval(
            weights in prop::collection::vec(1u32..6, 1..8),
            intruders in 0usize..5,
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let gold: Vec<(String, u32)> =
                weights.iter().enumerate().map(|(i, &w)| (format!("g{i}"), w)).collect();
            let mut ranking: Vec<String> = gold.iter().map(|(s, _)| s.clone()).collect();
            ranking.extend((0..intruders).map(|i| format!("n{i}")));
            ranking.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let v = gap(&ranking, &gold).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }

        #[test]
        fn spearman_symmetric_and_monotone_invariant(
            pairs in prop::collection::vec((-50i32..50, -50i32..50), 3..40),
        ) {
            let xs: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            if let Ok(r) = spearman(&xs, &ys) {
                prop_assert!((r - spearman(&ys, &xs).unwrap()).abs() < 1e-12);
                let tx: Vec<f64> = xs.iter().map(|x| (x / 10.0).exp() + 3.0).collect();
                prop_assert!((r - spearman(&tx, &ys).unwrap()).abs() < 1e-12);
            }
        }
    }
}
