//! Pretrained word vectors in the `.vec` text format, plus cosine similarity.
//!
//! The format is the one fastText publishes: an optional `<count> <dim>`
//! header, then one `word v1 v2 ... vdim` line per word.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::corpus::WordEntry;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read vector file {path}: {source}")]
    FileUnreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("none of the requested words is in the embedding model")]
    EmptyIntersection,
    #[error("cosine of a zero vector is undefined")]
    ZeroVector,
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// A skipped line, kept so callers can report it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadWarning {
    pub line: usize,
    pub word: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
    pub warnings: Vec<LoadWarning>,
}

impl EmbeddingTable {
    /// Builds a table directly; all-zero vectors are dropped.
    pub fn from_entries(
        dimension: usize,
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut table = EmbeddingTable {
            dimension,
            ..Default::default()
        };
        for (word, v) in entries {
            if v.len() != dimension {
                return Err(EmbeddingError::LengthMismatch(dimension, v.len()));
            }
            if v.iter().all(|x| *x == 0.0) {
                continue;
            }
            table.entries.insert(word, v);
        }
        Ok(table)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Loads only the words in `vocabulary`.
pub fn load_vectors(
    path: &Path,
    vocabulary: &HashSet<String>,
) -> Result<EmbeddingTable, EmbeddingError> {
    let table = read_vec_file(path, Some(vocabulary))?;
    if table.is_empty() {
        return Err(EmbeddingError::EmptyIntersection);
    }
    Ok(table)
}

/// Loads every word in the file.
pub fn load_all_vectors(path: &Path) -> Result<EmbeddingTable, EmbeddingError> {
    let table = read_vec_file(path, None)?;
    if table.is_empty() {
        return Err(EmbeddingError::EmptyIntersection);
    }
    Ok(table)
}

fn read_vec_file(
    path: &Path,
    vocabulary: Option<&HashSet<String>>,
) -> Result<EmbeddingTable, EmbeddingError> {
    let unreadable = |source| EmbeddingError::FileUnreadable {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(unreadable)?;
    let reader = BufReader::new(file);
    let mut table = EmbeddingTable::default();
    let mut dim: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(unreadable)?;
        let lineno = idx + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };

        if idx == 0 {
            let rest: Vec<&str> = line.split_whitespace().collect();
            if rest.len() == 2 && rest.iter().all(|f| f.parse::<u64>().is_ok()) {
                dim = Some(rest[1].parse().unwrap_or(0));
                continue;
            }
        }
        if vocabulary.is_some_and(|v| !v.contains(word)) {
            continue;
        }

        let comps: Vec<&str> = fields.collect();
        let expected = *dim.get_or_insert(comps.len());
        if comps.len() != expected {
            return Err(EmbeddingError::DimensionMismatch {
                line: lineno,
                expected,
                found: comps.len(),
            });
        }
        let parsed: Result<Vec<f64>, _> = comps.iter().map(|c| c.parse::<f64>()).collect();
        let warn = |reason: &str| LoadWarning {
            line: lineno,
            word: word.to_string(),
            reason: reason.to_string(),
        };
        match parsed {
            Ok(v) if v.iter().any(|x| !x.is_finite()) => {
                table.warnings.push(warn("non-finite component"))
            }
            Ok(v) if v.iter().all(|x| *x == 0.0) => table.warnings.push(warn("all-zero vector")),
            Ok(v) => {
                if table.entries.contains_key(word) {
                    table.warnings.push(warn("duplicate word; first occurrence kept"));
                } else {
                    table.entries.insert(word.to_string(), v);
                }
            }
            Err(_) => table.warnings.push(warn("unparsable component")),
        }
    }
    for w in &table.warnings {
        log::warn!("vectors line {}: skipped {:?}: {}", w.line, w.word, w.reason);
    }
    table.dimension = dim.unwrap_or(0);
    Ok(table)
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::LengthMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Keeps entries present in `table` and attaches their vectors.
pub fn drop_oov(entries: Vec<WordEntry>, table: &EmbeddingTable) -> Vec<WordEntry> {
    entries
        .into_iter()
        .filter_map(|mut e| {
            let v = table.get(&e.surface)?;
            e.vector = Some(v.to_vec());
            Some(e)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn vec_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn vocab(words: &[&str]) -> HashSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn loads_requested_words() {
        let f = vec_file("2 3\ncat 1 0 0\ndog 0 1 0\n");
        let t = load_vectors(f.path(), &vocab(&["cat"])).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.get("cat"), Some(&[1.0, 0.0, 0.0][..]));
        assert!(!t.contains("dog"));
    }

    #[test]
    fn missing_vocabulary_is_an_error() {
        let f = vec_file("2 3\ncat 1 0 0\ndog 0 1 0\n");
        assert!(matches!(
            load_vectors(f.path(), &vocab(&["zebra"])),
            Err(EmbeddingError::EmptyIntersection)
        ));
    }

    #[test]
    fn headerless_file() {
        let f = vec_file("cat 1 0 0 \ndog 0 1 0 \n");
        let t = load_all_vectors(f.path()).unwrap();
        assert_eq!((t.len(), t.dimension()), (2, 3));
    }

    #[test]
    fn dimension_mismatch() {
        let f = vec_file("2 3\ncat 1 0 0\ndog 0 1\n");
        assert!(matches!(
            load_all_vectors(f.path()),
            Err(EmbeddingError::DimensionMismatch {
                line: 3,
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn skips_zero_and_malformed() {
        let f = vec_file("3 2\ncat 0 0\ndog 1 x\nowl 1 1\n");
        let t = load_all_vectors(f.path()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.warnings.len(), 2);
        assert_eq!(t.warnings[0].word, "cat");
    }

    #[test]
    fn unreadable_file() {
        assert!(matches!(
            load_all_vectors(Path::new("/nonexistent/vectors.vec")),
            Err(EmbeddingError::FileUnreadable { .. })
        ));
    }

    #[test]
    fn cosine_values() {
        let v = [0.3f64, -1.2, 2.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // 32 / (sqrt(14) * sqrt(77))
        assert!((cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap() - 0.974631846).abs() < 1e-9);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroVector)
        ));
    }

    #[test]
    fn drop_oov_keeps_order() {
        let t = EmbeddingTable::from_entries(2, [("cat".to_string(), vec![1.0, 0.5])]).unwrap();
        let kept = drop_oov(vec![WordEntry::new("cat", 3), WordEntry::new("zzzz", 2)], &t);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].vector.as_deref(), Some(&[1.0f64, 0.5][..]));
        assert!(drop_oov(vec![], &t).is_empty());
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            a in prop::collection::vec(-10.0f64..10.0, 5),
            b in prop::collection::vec(-10.0f64..10.0, 5),
            c in 0.01f64..100.0,
        ) {
            prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3));
            let ab = cosine(&a, &b).unwrap();
            prop_assert!((ab - cosine(&b, &a).unwrap()).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
            let ca: Vec<f64> = a.iter().map(|x| x * c).collect();
            prop_assert!((cosine(&ca, &b).unwrap() - ab).abs() <= 1e-9);
        }

        #[test]
        fn never_loads_outside_vocabulary(mask in prop::collection::vec(any::<bool>(), 4)) {
            let f = vec_file("4 2\na 1 0\nb 0 1\nc 1 1\nd 2 1\n");
            let words = ["a", "b", "c", "d"];
            let v: HashSet<String> = words.iter().zip(&mask).filter(|(_, m)| **m).map(|(w, _)| w.to_string()).collect();
            match load_vectors(f.path(), &v) {
                Ok(t) => {
                    prop_assert_eq!(t.len(), v.len());
                    prop_assert!(t.words().all(|w| v.contains(w)));
                }
                Err(EmbeddingError::EmptyIntersection) => prop_assert!(v.is_empty()),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
