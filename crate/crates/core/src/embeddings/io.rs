//! Binary model files and word2vec-style text export.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::binio;
use crate::corpus::Vocabulary;
use crate::embeddings::{EmbeddingModel, Entry, Variant, NO_ROW};
use crate::error::{Error, Result};
use crate::{TopicId, WordId};

const MAGIC: &[u8; 4] = b"TSE1";
pub const FORMAT_VERSION: u32 = 1;

impl EmbeddingModel {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        binio::write_u32(&mut w, FORMAT_VERSION)?;
        w.write_all(&[self.variant.to_byte()])?;
        binio::write_u64(&mut w, self.dim as u64)?;
        binio::write_u64(&mut w, self.num_topics as u64)?;
        binio::write_u64(&mut w, self.vocab_size as u64)?;
        binio::write_u64(&mut w, self.pairs.len() as u64)?;
        for &(word, topic) in &self.pairs {
            binio::write_u32(&mut w, word)?;
            binio::write_u32(&mut w, topic)?;
        }
        for &f in &self.fallback {
            binio::write_u32(&mut w, f)?;
        }
        binio::write_u64(&mut w, self.generic_rows.len() as u64)?;
        binio::write_f64s(&mut w, &self.topic_rows)?;
        binio::write_f64s(&mut w, &self.generic_rows)?;
        binio::write_f64s(&mut w, &self.output_rows)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let magic = binio::read_magic(&mut r)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "not an embedding model file (magic {:?})",
                String::from_utf8_lossy(&magic)
            )));
        }
        let version = binio::read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Version {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let tag = binio::read_u8(&mut r)?;
        let variant = Variant::from_byte(tag).ok_or_else(|| Error::Format(format!("unknown variant tag {tag}")))?;
        let dim = binio::read_u64(&mut r)? as usize;
        let num_topics = binio::read_u64(&mut r)? as usize;
        let vocab_size = binio::read_u64(&mut r)? as usize;
        let num_pairs = binio::read_u64(&mut r)? as usize;
        if dim == 0 {
            return Err(Error::Format("dim is zero".into()));
        }
        let mut pairs: Vec<(WordId, TopicId)> = Vec::with_capacity(num_pairs.min(1 << 24));
        for _ in 0..num_pairs {
            let word = binio::read_u32(&mut r)?;
            let topic = binio::read_u32(&mut r)?;
            if word as usize >= vocab_size || topic as usize >= num_topics {
                return Err(Error::Format(format!("pair ({word}, {topic}) out of range")));
            }
            pairs.push((word, topic));
        }
        if pairs.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Format("pairs are not sorted".into()));
        }
        let mut fallback = Vec::with_capacity(vocab_size.min(1 << 24));
        for _ in 0..vocab_size {
            let f = binio::read_u32(&mut r)?;
            if f != NO_ROW && f as usize >= num_pairs {
                return Err(Error::Format(format!("fallback row {f} out of range")));
            }
            fallback.push(f);
        }
        let generic_len = binio::read_u64(&mut r)? as usize;
        let expected_generic = if variant.has_generic_table() { vocab_size * dim } else { 0 };
        if generic_len != expected_generic {
            return Err(Error::Format(format!(
                "generic table has {generic_len} values, expected {expected_generic}"
            )));
        }
        if !variant.has_topic_table() && num_pairs != 0 {
            return Err(Error::Format("plain model with topic rows".into()));
        }
        let topic_rows = binio::read_f64s(&mut r, num_pairs * dim)?;
        let generic_rows = binio::read_f64s(&mut r, generic_len)?;
        let output_rows = binio::read_f64s(&mut r, vocab_size * dim)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after model".into()));
        }
        Ok(EmbeddingModel::from_tables(
            variant,
            dim,
            num_topics,
            vocab_size,
            pairs,
            fallback,
            topic_rows,
            generic_rows,
            output_rows,
        ))
    }
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    model.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    EmbeddingModel::read_from(BufReader::new(File::open(path)?))
}

fn write_row<W: Write>(w: &mut W, name: &str, row: &[f64]) -> Result<()> {
    w.write_all(name.as_bytes())?;
    for v in row {
        write!(w, " {v:.6}")?;
    }
    writeln!(w)?;
    Ok(())
}

/// Text export: a header `N D`, the input entries (topic entries named
/// `word#k`), then the output rows named `ctx:word`.
pub fn export_text<W: Write>(model: &EmbeddingModel, vocab: &Vocabulary, mut w: W) -> Result<()> {
    if vocab.len() != model.vocab_size() {
        return Err(Error::ShapeMismatch(format!(
            "vocabulary has {} words, model {}",
            vocab.len(),
            model.vocab_size()
        )));
    }
    let entries = model.entries();
    writeln!(w, "{} {}", entries.len() + model.vocab_size(), model.dim())?;
    for entry in entries {
        let v = match entry {
            Entry::Word(word) => model.embed_target(word, super::TopicInfo::None)?,
            Entry::Pair(..) => model.entry_vector(entry)?,
        };
        write_row(&mut w, &entry.name(vocab), &v)?;
    }
    for word in 0..model.vocab_size() as WordId {
        let name = format!("ctx:{}", vocab.token(word).unwrap_or("<unk>"));
        write_row(&mut w, &name, model.output_row(word).expect("in range"))?;
    }
    w.flush()?;
    Ok(())
}
