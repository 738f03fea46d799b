//! Tab-separated persistence of a fitted embedding.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::one::OutlierScores;

use super::io::{read_text, write_all};

pub const EMBEDDING_FILE: &str = "embedding.tsv";
pub const SCORES_FILE: &str = "scores.tsv";
pub const LOSS_FILE: &str = "loss.tsv";

/// Everything a fit hands to downstream consumers.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingResult {
    pub node_names: Vec<String>,
    /// `N×K` final node embedding.
    pub embedding: DenseMatrix,
    pub scores: OutlierScores,
    /// Weighted combination of the three component scores.
    pub combined: Vec<f64>,
    /// Joint loss after each outer iteration.
    pub loss_trace: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ResultPaths {
    pub embedding: PathBuf,
    pub scores: PathBuf,
    pub loss: PathBuf,
}

pub fn save_result(result: &EmbeddingResult, out_dir: impl AsRef<Path>) -> Result<ResultPaths> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths =
        ResultPaths { embedding: dir.join(EMBEDDING_FILE), scores: dir.join(SCORES_FILE), loss: dir.join(LOSS_FILE) };
    let k = result.embedding.cols();

    write_all(&paths.embedding, |w| {
        write!(w, "node")?;
        for d in 0..k {
            write!(w, "\tdim{d}")?;
        }
        writeln!(w)?;
        for (i, name) in result.node_names.iter().enumerate() {
            write!(w, "{name}")?;
            for v in result.embedding.row(i) {
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;

    write_all(&paths.scores, |w| {
        writeln!(w, "node\to1\to2\to3\tcombined")?;
        let s = &result.scores;
        for (i, name) in result.node_names.iter().enumerate() {
            writeln!(w, "{name}\t{}\t{}\t{}\t{}", s.o1[i], s.o2[i], s.o3[i], result.combined[i])?;
        }
        Ok(())
    })?;

    write_all(&paths.loss, |w| {
        writeln!(w, "iteration\tloss")?;
        for (it, l) in result.loss_trace.iter().enumerate() {
            writeln!(w, "{}\t{l}", it + 1)?;
        }
        Ok(())
    })?;
    Ok(paths)
}

/// Rows of `(first column, numeric columns)`.
type Rows = Vec<(String, Vec<f64>)>;

/// Table width plus its rows, after checking the header.
fn read_table(path: &Path, expect_header: &[&str], exact_width: bool) -> Result<(usize, Rows)> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "missing header row"))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let prefix_ok = cols.len() >= expect_header.len()
        && cols.iter().zip(expect_header).all(|(a, b)| a == b)
        && (!exact_width || cols.len() == expect_header.len());
    if !prefix_ok {
        return Err(Error::parse(path, 1, format!("unexpected header `{header}`")));
    }
    let width = cols.len();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let toks: Vec<&str> = line.split('\t').collect();
        if toks.len() != width {
            return Err(Error::parse(path, i + 1, format!("expected {width} columns, got {}", toks.len())));
        }
        let vals = toks[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, i + 1, format!("invalid number `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((toks[0].to_string(), vals));
    }
    Ok((width, rows))
}

/// Reads `embedding.tsv`: node names and the `N×K` matrix.
pub fn read_embedding(path: impl AsRef<Path>) -> Result<(Vec<String>, DenseMatrix)> {
    let path = path.as_ref();
    let (width, rows) = read_table(path, &["node"], false)?;
    let k = width - 1;
    let names = rows.iter().map(|(n, _)| n.clone()).collect();
    let data: Vec<f64> = rows.into_iter().flat_map(|(_, v)| v).collect();
    let m = DenseMatrix::from_vec(data.len() / k.max(1), k, data)?;
    Ok((names, m))
}

/// Reads `scores.tsv`: node names, component scores and combined score.
pub fn read_scores(path: impl AsRef<Path>) -> Result<(Vec<String>, OutlierScores, Vec<f64>)> {
    let path = path.as_ref();
    let (_, rows) = read_table(path, &["node", "o1", "o2", "o3", "combined"], true)?;
    let mut names = Vec::with_capacity(rows.len());
    let mut s = OutlierScores {
        o1: Vec::with_capacity(rows.len()),
        o2: Vec::with_capacity(rows.len()),
        o3: Vec::with_capacity(rows.len()),
    };
    let mut combined = Vec::with_capacity(rows.len());
    for (name, v) in rows {
        names.push(name);
        s.o1.push(v[0]);
        s.o2.push(v[1]);
        s.o3.push(v[2]);
        combined.push(v[3]);
    }
    Ok((names, s, combined))
}

fn read_loss(path: &Path) -> Result<Vec<f64>> {
    let (_, rows) = read_table(path, &["iteration", "loss"], true)?;
    Ok(rows.into_iter().map(|(_, v)| v[0]).collect())
}

/// Inverse of [`save_result`].
pub fn load_result(dir: impl AsRef<Path>) -> Result<EmbeddingResult> {
    let dir = dir.as_ref();
    let (node_names, embedding) = read_embedding(dir.join(EMBEDDING_FILE))?;
    let (score_names, scores, combined) = read_scores(dir.join(SCORES_FILE))?;
    if score_names != node_names {
        return Err(Error::Consistency(format!("{} and {} list different nodes", EMBEDDING_FILE, SCORES_FILE)));
    }
    let loss_trace = read_loss(&dir.join(LOSS_FILE))?;
    Ok(EmbeddingResult { node_names, embedding, scores, combined, loss_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize, k: usize, vals: &[f64]) -> EmbeddingResult {
        let pick = |i: usize| vals[i % vals.len()];
        EmbeddingResult {
            node_names: (0..n).map(|i| format!("n{i}")).collect(),
            embedding: DenseMatrix::from_fn(n, k, |i, j| pick(i * k + j)),
            scores: OutlierScores {
                o1: (0..n).map(|i| pick(i + 1).abs() + 1e-9).collect(),
                o2: (0..n).map(|i| pick(i + 2).abs() + 1e-9).collect(),
                o3: (0..n).map(|i| pick(i + 3).abs() + 1e-9).collect(),
            },
            combined: (0..n).map(|i| pick(i + 4)).collect(),
            loss_trace: vec![3.5, 2.25, 1.0 / 3.0],
        }
    }

    #[test]
    fn single_node() {
        let dir = tempfile::tempdir().unwrap();
        let r = EmbeddingResult {
            node_names: vec!["only".into()],
            embedding: DenseMatrix::from_rows(&[vec![0.5, -0.25]]).unwrap(),
            scores: OutlierScores::uniform(1, 1.0),
            combined: vec![1.0],
            loss_trace: vec![0.0],
        };
        save_result(&r, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(SCORES_FILE)).unwrap();
        assert_eq!(text, "node\to1\to2\to3\tcombined\nonly\t1\t1\t1\t1\n");
        assert_eq!(load_result(dir.path()).unwrap(), r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(
            n in 1usize..6,
            k in 1usize..4,
            vals in prop::collection::vec(-1e6f64..1e6, 1..20),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let r = sample(n, k, &vals);
            save_result(&r, dir.path()).unwrap();
            prop_assert_eq!(load_result(dir.path()).unwrap(), r);
        }
    }
}
