//! One stochastic gradient step of skip-gram with negative sampling.

use crate::embeddings::{EmbeddingModel, InputRow, Table, Variant};
use crate::error::{Error, Result};
use crate::{TopicId, WordId};

/// Training target of one step.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// Plain word (`Sge`).
    Word(WordId),
    /// Word-topic pair (`Htle`, `HtleAdd`, or a point mass for `Stle`).
    Pair(WordId, TopicId),
    /// Weighted pairs of one word (`Stle`). Weights are used as given.
    Mixture(WordId, Vec<(TopicId, f64)>),
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `-log σ(x)`, stable for large `|x|`.
#[inline]
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

impl EmbeddingModel {
    pub(crate) fn training_rows(&self, target: &Target, out: &mut Vec<InputRow>) -> Result<()> {
        out.clear();
        let pair = |w: WordId, k: TopicId| {
            self.pair_index(w, k)
                .ok_or_else(|| Error::Oov(format!("pair ({w}, {k}) has no row")))
        };
        let generic = |w: WordId| {
            if (w as usize) < self.vocab_size() {
                Ok(InputRow {
                    table: Table::Generic,
                    row: w as usize,
                    weight: 1.0,
                })
            } else {
                Err(Error::UnknownWord(w))
            }
        };
        match (self.variant(), target) {
            (Variant::Sge, Target::Word(w)) => out.push(generic(*w)?),
            (Variant::Htle | Variant::Stle, Target::Pair(w, k)) => out.push(InputRow {
                table: Table::Topic,
                row: pair(*w, *k)?,
                weight: 1.0,
            }),
            (Variant::HtleAdd, Target::Pair(w, k)) => {
                out.push(InputRow {
                    table: Table::Topic,
                    row: pair(*w, *k)?,
                    weight: 1.0,
                });
                out.push(generic(*w)?);
            }
            (Variant::Stle, Target::Mixture(w, ws)) => {
                for &(k, p) in ws {
                    out.push(InputRow {
                        table: Table::Topic,
                        row: pair(*w, k)?,
                        weight: p,
                    });
                }
            }
            (v, t) => {
                return Err(Error::Config(format!("target {t:?} does not apply to variant {v}")));
            }
        }
        Ok(())
    }
}

/// Raw views of the parameter tables, shared between training workers.
///
/// Workers write rows without synchronization; concurrent updates of the same
/// row may interleave. Single-threaded use through `&mut EmbeddingModel` is
/// race free.
#[derive(Clone, Copy)]
pub(crate) struct RawTables {
    topic: *mut f64,
    generic: *mut f64,
    output: *mut f64,
    dim: usize,
}

unsafe impl Send for RawTables {}
unsafe impl Sync for RawTables {}

impl RawTables {
    pub(crate) fn new(model: &mut EmbeddingModel) -> Self {
        RawTables {
            topic: model.topic_rows.as_mut_ptr(),
            generic: model.generic_rows.as_mut_ptr(),
            output: model.output_rows.as_mut_ptr(),
            dim: model.dim,
        }
    }

    #[inline]
    #[allow(clippy::mut_from_ref)]
    unsafe fn input(&self, r: &InputRow) -> &mut [f64] {
        let base = match r.table {
            Table::Topic => self.topic,
            Table::Generic => self.generic,
        };
        std::slice::from_raw_parts_mut(base.add(r.row * self.dim), self.dim)
    }

    #[inline]
    #[allow(clippy::mut_from_ref)]
    unsafe fn output(&self, w: WordId) -> &mut [f64] {
        std::slice::from_raw_parts_mut(self.output.add(w as usize * self.dim), self.dim)
    }
}

/// Scratch buffers for [`step_raw`].
pub(crate) struct Scratch {
    pub h: Vec<f64>,
    pub grad: Vec<f64>,
    /// `label − σ(h·o)` per output word of the current step.
    pub coef: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(dim: usize) -> Self {
        Scratch {
            h: vec![0.0; dim],
            grad: vec![0.0; dim],
            coef: Vec::new(),
        }
    }
}

/// Gradient ascent on `log σ(h·o_ctx) + Σ_neg log σ(−h·o_neg)`.
///
/// All gradients are taken at the parameters before the step: output rows are
/// updated with the original `h`, and the accumulated `∂/∂h` is routed to the
/// input rows scaled by each row's weight. Returns the loss before the step.
///
/// # Safety
/// Every row index in `inputs`, `context` and `negatives` must be in bounds
/// for the tables `t` was created from, and those tables must outlive the call.
pub(crate) unsafe fn step_raw(
    t: &RawTables,
    inputs: &[InputRow],
    context: WordId,
    negatives: &[WordId],
    lr: f64,
    s: &mut Scratch,
) -> f64 {
    let h = &mut s.h;
    h.iter_mut().for_each(|x| *x = 0.0);
    for r in inputs {
        let row = t.input(r);
        for (x, v) in h.iter_mut().zip(row.iter()) {
            *x += r.weight * v;
        }
    }
    s.grad.iter_mut().for_each(|x| *x = 0.0);
    s.coef.clear();

    // Read every output row before writing any, so a word that occurs twice
    // among the outputs still sees its original row.
    let mut loss = 0.0;
    for (i, &w) in std::iter::once(&context).chain(negatives).enumerate() {
        let label = if i == 0 { 1.0 } else { 0.0 };
        let o = t.output(w);
        let dot: f64 = h.iter().zip(o.iter()).map(|(a, b)| a * b).sum();
        loss += if i == 0 {
            neg_log_sigmoid(dot)
        } else {
            neg_log_sigmoid(-dot)
        };
        let g = label - logistic(dot);
        for (gr, ov) in s.grad.iter_mut().zip(o.iter()) {
            *gr += g * *ov;
        }
        s.coef.push(g);
    }
    for (&w, &g) in std::iter::once(&context).chain(negatives).zip(&s.coef) {
        for (ov, hv) in t.output(w).iter_mut().zip(h.iter()) {
            *ov += lr * g * hv;
        }
    }
    for r in inputs {
        let row = t.input(r);
        let scale = lr * r.weight;
        for (v, g) in row.iter_mut().zip(&s.grad) {
            *v += scale * g;
        }
    }
    loss
}

fn check_outputs(model: &EmbeddingModel, context: WordId, negatives: &[WordId]) -> Result<()> {
    for &w in std::iter::once(&context).chain(negatives) {
        if w as usize >= model.vocab_size() {
            return Err(Error::UnknownWord(w));
        }
    }
    Ok(())
}

/// Apply one negative-sampling update and return the loss
/// `−log σ(h·o_ctx) − Σ log σ(−h·o_neg)` evaluated before the update.
pub fn sgns_step(
    model: &mut EmbeddingModel,
    target: &Target,
    context: WordId,
    negatives: &[WordId],
    lr: f64,
) -> Result<f64> {
    if !(lr >= 0.0) {
        return Err(Error::InvalidArgument(format!("learning rate must be >= 0, got {lr}")));
    }
    check_outputs(model, context, negatives)?;
    let mut rows = Vec::new();
    model.training_rows(target, &mut rows)?;
    let mut scratch = Scratch::new(model.dim());
    let tables = RawTables::new(model);
    // SAFETY: rows and outputs were validated against this model, which is
    // exclusively borrowed for the duration of the call.
    Ok(unsafe { step_raw(&tables, &rows, context, negatives, lr, &mut scratch) })
}

/// The loss [`sgns_step`] would report, without updating anything.
pub fn sgns_loss(model: &EmbeddingModel, target: &Target, context: WordId, negatives: &[WordId]) -> Result<f64> {
    check_outputs(model, context, negatives)?;
    let mut rows = Vec::new();
    model.training_rows(target, &mut rows)?;
    let mut h = vec![0.0; model.dim()];
    for r in &rows {
        for (x, v) in h.iter_mut().zip(model.row(r.table, r.row)) {
            *x += r.weight * v;
        }
    }
    let mut loss = 0.0;
    for (i, &w) in std::iter::once(&context).chain(negatives).enumerate() {
        let o = model.output_row(w).expect("checked");
        let dot: f64 = h.iter().zip(o).map(|(a, b)| a * b).sum();
        loss += if i == 0 {
            neg_log_sigmoid(dot)
        } else {
            neg_log_sigmoid(-dot)
        };
    }
    Ok(loss)
}
