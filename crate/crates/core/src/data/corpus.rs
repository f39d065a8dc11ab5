use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DataError, Result};
use crate::linalg::SparseMatrix;

/// How documents are laid out on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusLayout {
    /// `path` is a file with one document per line.
    LinePerDocument,
    /// `path` is a directory; each regular file (sorted by name) is a document.
    FilePerDocument,
}

/// Document×term count matrix and its column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TermFrequency {
    pub matrix: SparseMatrix,
    pub vocabulary: Vec<String>,
}

pub fn load_corpus(path: impl AsRef<Path>, layout: CorpusLayout) -> Result<Vec<String>> {
    let path = path.as_ref();
    match layout {
        CorpusLayout::LinePerDocument => {
            let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
            Ok(text.lines().map(str::to_owned).collect())
        }
        CorpusLayout::FilePerDocument => {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| DataError::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(DataError::EmptyDirectory(path.to_path_buf()));
            }
            files
                .iter()
                .map(|f| {
                    let bytes = fs::read(f).map_err(|e| DataError::io(f, e))?;
                    Ok(String::from_utf8_lossy(&bytes).into_owned())
                })
                .collect()
        }
    }
}

/// Raw term counts over the first `max_docs` documents, restricted to the
/// `vocab_size` most frequent lowercased whitespace tokens.
///
/// Frequency ties go to the lexicographically smaller token. Documents with
/// no vocabulary words keep an all-zero row.
pub fn build_term_frequency<D: AsRef<str>>(
    documents: &[D],
    vocab_size: usize,
    max_docs: usize,
) -> Result<TermFrequency> {
    let docs: Vec<Vec<String>> = documents
        .iter()
        .take(max_docs)
        .map(|d| d.as_ref().split_whitespace().map(str::to_lowercase).collect())
        .collect();
    let mut totals: HashMap<&str, usize> = HashMap::new();
    for tok in docs.iter().flatten() {
        *totals.entry(tok.as_str()).or_default() += 1;
    }
    if docs.is_empty() || totals.is_empty() || vocab_size == 0 {
        return Err(DataError::NoDocuments);
    }
    let mut ranked: Vec<(&str, usize)> = totals.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(vocab_size);
    let vocabulary: Vec<String> = ranked.iter().map(|(t, _)| t.to_string()).collect();
    let column: HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(j, t)| (t.as_str(), j))
        .collect();

    let mut triplets = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for tok in doc {
            if let Some(&j) = column.get(tok.as_str()) {
                *counts.entry(j).or_default() += 1.0;
            }
        }
        triplets.extend(counts.into_iter().map(|(j, c)| (i, j, c)));
    }
    let matrix = SparseMatrix::from_triplets(docs.len(), vocabulary.len(), triplets)?;
    Ok(TermFrequency { matrix, vocabulary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MatrixOperand;

    #[test]
    fn most_frequent_words_win() {
        let docs = ["a b a c", "A a b", "b a"];
        let tf = build_term_frequency(&docs, 2, 10).unwrap();
        assert_eq!(tf.vocabulary, ["a", "b"]);
        let x = tf.matrix.to_dense();
        assert_eq!(x.row(0), &[2.0, 1.0]);
        assert_eq!(x.row(1), &[2.0, 1.0]);
        assert_eq!(x.row(2), &[1.0, 1.0]);
    }

    #[test]
    fn ties_are_lexicographic_and_vocab_truncates() {
        let tf = build_term_frequency(&["z y x", "x y z"], 10, 10).unwrap();
        assert_eq!(tf.vocabulary, ["x", "y", "z"]);
        let tf = build_term_frequency(&["z y x"], 2, 10).unwrap();
        assert_eq!(tf.vocabulary, ["x", "y"]);
    }

    #[test]
    fn empty_rows_kept_and_max_docs_respected() {
        let docs = ["cat dog", "", "fish", "cat cat cat"];
        let tf = build_term_frequency(&docs, 1, 3).unwrap();
        assert_eq!(tf.vocabulary, ["cat"]);
        assert_eq!(tf.matrix.rows(), 3);
        assert_eq!(tf.matrix.to_dense().as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn no_documents_is_an_error() {
        let none: [&str; 0] = [];
        assert!(matches!(build_term_frequency(&none, 5, 5), Err(DataError::NoDocuments)));
        assert!(matches!(build_term_frequency(&["  ", ""], 5, 5), Err(DataError::NoDocuments)));
        assert!(build_term_frequency(&["a"], 5, 0).is_err());
    }

    #[test]
    fn layouts() {
        let dir = tempfile::tempdir().unwrap();
        let lines = dir.path().join("docs.txt");
        fs::write(&lines, "one two\nthree\n").unwrap();
        assert_eq!(load_corpus(&lines, CorpusLayout::LinePerDocument).unwrap().len(), 2);
        let sub = dir.path().join("files");
        fs::create_dir(&sub).unwrap();
        fs::write(sub.join("b.txt"), "second").unwrap();
        fs::write(sub.join("a.txt"), "first\nline").unwrap();
        assert_eq!(
            load_corpus(&sub, CorpusLayout::FilePerDocument).unwrap(),
            ["first\nline", "second"]
        );
    }
}
