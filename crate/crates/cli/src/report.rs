//! Report tables and JSON-lines output for the eval commands.

use std::fmt::Write as _;
use std::io::Write;

use serde_json::json;

use tse_core::eval::significance::{mann_whitney, MannWhitney};
use tse_core::eval::{LexsubReport, Pos, ScwsInstance, ScwsReport};

fn pad(s: &str, width: usize) -> String {
    let n = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(n)))
}

pub fn scws_table(results: &[(String, ScwsReport)]) -> String {
    let w = results.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max(5) + 2;
    let mut s = String::new();
    let _ = writeln!(s, "{}{}{}unscored", pad("Model", w), pad("rho", 9), pad("pairs", 8));
    for (name, r) in results {
        let _ = writeln!(
            s,
            "{}{}{}{}",
            pad(name, w),
            pad(&format!("{:.4}", r.rho), 9),
            pad(&r.n.to_string(), 8),
            r.oov_pairs
        );
    }
    s
}

pub fn scws_jsonl<W: Write>(w: &mut W, data: &[ScwsInstance], results: &[(String, ScwsReport)]) -> std::io::Result<()> {
    for (name, r) in results {
        for (inst, score) in data.iter().zip(&r.scores) {
            let row = json!({"type": "pair", "run": name, "id": inst.id, "score": score, "human": inst.human_score});
            writeln!(w, "{row}")?;
        }
        let row = json!({"type": "summary", "run": name, "rho": r.rho, "n": r.n, "unscored": r.oov_pairs});
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Column order of the lexsub table: all instances, then one per word class.
fn columns() -> Vec<Option<Pos>> {
    std::iter::once(None).chain(Pos::ALL.iter().copied().map(Some)).collect()
}

fn column_gaps(r: &LexsubReport, col: Option<Pos>) -> Vec<f64> {
    match col {
        None => r.gaps(),
        Some(p) => r.gaps_for(p),
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Mann-Whitney of every run against the baseline, per table column.
/// `None` for the baseline itself and for empty columns.
pub type SigTable = Vec<Vec<Option<MannWhitney>>>;

pub fn significance(results: &[(String, LexsubReport)], baseline: usize) -> anyhow::Result<SigTable> {
    let base = &results[baseline].1;
    results
        .iter()
        .enumerate()
        .map(|(i, (_, r))| {
            columns()
                .into_iter()
                .map(|col| {
                    let (a, b) = (column_gaps(r, col), column_gaps(base, col));
                    if i == baseline || a.is_empty() || b.is_empty() {
                        Ok(None)
                    } else {
                        Ok(Some(mann_whitney(&a, &b)?))
                    }
                })
                .collect()
        })
        .collect()
}

fn col_name(col: Option<Pos>) -> &'static str {
    col.map_or("all", |p| p.label())
}

/// Rows are runs, columns are all instances and the four word classes. GAP
/// is shown ×100; ▲ / △ mark improvements over the baseline at p < .01 / .05.
pub fn lexsub_table(results: &[(String, LexsubReport)], baseline: usize, sig: &SigTable) -> String {
    let w = results.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max(9) + 2;
    let cw = 9;
    let mut s = String::new();
    let mut header = format!("{}{}", pad("Model", w), pad("Scorer", 8));
    for col in columns() {
        header += &pad(col_name(col), cw);
    }
    let _ = writeln!(s, "{}", header.trim_end());

    let base_means: Vec<Option<f64>> = columns()
        .into_iter()
        .map(|c| mean(&column_gaps(&results[baseline].1, c)))
        .collect();
    for (i, (name, r)) in results.iter().enumerate() {
        let mut line = format!("{}{}", pad(name, w), pad(&r.scorer.to_string(), 8));
        for (j, col) in columns().into_iter().enumerate() {
            let cell = match mean(&column_gaps(r, col)) {
                None => "-".to_string(),
                Some(m) => {
                    let better = base_means[j].is_some_and(|b| m > b);
                    let marker = match &sig[i][j] {
                        Some(t) if better => t.significance().marker(),
                        _ => "",
                    };
                    format!("{:.2}{marker}", 100.0 * m)
                }
            };
            line += &pad(&cell, cw);
        }
        let _ = writeln!(s, "{}", line.trim_end());
    }
    let mut counts = format!("{}{}", pad("instances", w), pad("", 8));
    for col in columns() {
        counts += &pad(&column_gaps(&results[0].1, col).len().to_string(), cw);
    }
    let _ = writeln!(s, "{}", counts.trim_end());

    if results.len() > 1 {
        let _ = writeln!(s, "\nMann-Whitney vs {} on per-instance GAP (two-sided):", results[baseline].0);
        for (i, (name, _)) in results.iter().enumerate() {
            if let Some(t) = &sig[i][0] {
                let _ = writeln!(s, "  {name}: U = {:.1}, p = {:.4}", t.u, t.p);
            }
        }
    }
    s
}

pub fn lexsub_jsonl<W: Write>(w: &mut W, results: &[(String, LexsubReport)], sig: &SigTable) -> std::io::Result<()> {
    for (i, (name, r)) in results.iter().enumerate() {
        for inst in &r.instances {
            let row = json!({
                "type": "instance",
                "run": name,
                "id": inst.id,
                "target": inst.target,
                "pos": inst.pos.short(),
                "gap": inst.gap,
                "scored": inst.scored,
                "candidates": inst.candidates,
            });
            writeln!(w, "{row}")?;
        }
        let per_pos: serde_json::Map<String, serde_json::Value> = r
            .per_pos
            .iter()
            .map(|p| (p.pos.short().to_string(), json!({"n": p.n, "gap": p.gap})))
            .collect();
        let row = json!({
            "type": "summary",
            "run": name,
            "scorer": r.scorer.to_string(),
            "overall": r.overall,
            "n": r.instances.len(),
            "per_pos": per_pos,
            "fallback_instances": r.fallback_instances,
            "dropped_multiword": r.dropped_multiword,
            "dropped_instances": r.dropped_instances,
        });
        writeln!(w, "{row}")?;
        for (col, t) in columns().into_iter().zip(&sig[i]) {
            if let Some(t) = t {
                let row = json!({
                    "type": "significance",
                    "run": name,
                    "column": col.map_or("all", |p| p.short()),
                    "u": t.u,
                    "p": t.p,
                    "exact": t.exact,
                });
                writeln!(w, "{row}")?;
            }
        }
    }
    Ok(())
}
