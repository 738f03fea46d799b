//! Plain-text network formats.
//!
//! Edge file: `<src> <dst> [weight]` per line, `#` comments, optional
//! `%directed` / `%undirected` header. Attribute file: `<node> v1 v2 ...`
//! (dense) or `<node> idx:val ...` (sparse), optional `%dim D` header.
//! Label file: `<node> <class>`.
//!
//! The attribute file defines the node set. When every node id is a
//! canonical non-negative integer the id is the node index; otherwise nodes
//! are indexed in attribute-file order.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, SparseMatrix};

use super::{AttributedNetwork, Labels, LoadNotes};

pub const EDGES_FILE: &str = "edges.txt";
pub const ATTRIBUTES_FILE: &str = "attributes.txt";
pub const LABELS_FILE: &str = "labels.txt";

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

enum AttrRow {
    Dense(Vec<f64>),
    Sparse(Vec<(usize, f64)>),
}

fn parse_value(path: &Path, line: usize, tok: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(path, line, format!("invalid value `{tok}`"))),
    }
}

fn parse_attributes(path: &Path) -> Result<(Vec<String>, Vec<AttrRow>, Option<usize>)> {
    let text = read_text(path)?;
    let mut declared_dim = None;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (ln, line) in content_lines(&text) {
        if let Some(rest) = line.strip_prefix('%') {
            let mut toks = rest.split_whitespace();
            match (toks.next(), toks.next(), toks.next()) {
                (Some("dim"), Some(d), None) => {
                    let d =
                        d.parse::<usize>().map_err(|_| Error::parse(path, ln, format!("invalid dimension `{d}`")))?;
                    declared_dim = Some(d);
                }
                _ => return Err(Error::parse(path, ln, format!("unknown header `{line}`"))),
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        let id = toks.next().expect("non-empty line").to_string();
        let rest: Vec<&str> = toks.collect();
        let sparse = rest.is_empty() || rest.iter().any(|t| t.contains(':'));
        let row = if sparse {
            let mut entries = Vec::with_capacity(rest.len());
            let mut seen = HashSet::new();
            for tok in rest {
                let (idx, val) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::parse(path, ln, format!("expected idx:val, got `{tok}`")))?;
                let idx = idx.parse::<usize>().map_err(|_| Error::parse(path, ln, format!("invalid index `{idx}`")))?;
                if !seen.insert(idx) {
                    return Err(Error::parse(path, ln, format!("index {idx} repeated")));
                }
                entries.push((idx, parse_value(path, ln, val)?));
            }
            AttrRow::Sparse(entries)
        } else {
            AttrRow::Dense(rest.iter().map(|t| parse_value(path, ln, t)).collect::<Result<_>>()?)
        };
        ids.push(id);
        rows.push(row);
    }
    Ok((ids, rows, declared_dim))
}

/// Maps ids to dense indices; returns `(index of each id, names by index)`.
fn index_nodes(path: &Path, ids: &[String]) -> Result<(Vec<usize>, Vec<String>)> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Consistency(format!("{}: node `{id}` has more than one attribute row", path.display())));
        }
    }
    let numeric: Option<Vec<usize>> =
        ids.iter().map(|id| id.parse::<usize>().ok().filter(|n| n.to_string() == *id)).collect();
    match numeric {
        Some(idx) => {
            let n = idx.iter().max().map_or(0, |m| m + 1);
            if n != ids.len() {
                return Err(Error::Consistency(format!(
                    "{}: {} attribute rows but node ids span 0..{n}",
                    path.display(),
                    ids.len()
                )));
            }
            Ok((idx, (0..n).map(|i| i.to_string()).collect()))
        }
        None => Ok(((0..ids.len()).collect(), ids.to_vec())),
    }
}

fn build_attributes(path: &Path, index: &[usize], rows: Vec<AttrRow>, declared: Option<usize>) -> Result<DenseMatrix> {
    let inferred = rows
        .iter()
        .map(|r| match r {
            AttrRow::Dense(v) => v.len(),
            AttrRow::Sparse(e) => e.iter().map(|(i, _)| i + 1).max().unwrap_or(0),
        })
        .max()
        .unwrap_or(0);
    let dim = match declared {
        Some(d) if d < inferred => {
            return Err(Error::Consistency(format!(
                "{}: declared %dim {d} but attributes reach dimension {inferred}",
                path.display()
            )))
        }
        Some(d) => d,
        None => inferred,
    };
    let mut m = DenseMatrix::zeros(index.len(), dim);
    for (row, &node) in rows.into_iter().zip(index) {
        match row {
            AttrRow::Dense(v) => {
                if v.len() != dim {
                    return Err(Error::Consistency(format!(
                        "{}: dense row for node index {node} has {} values, expected {dim}",
                        path.display(),
                        v.len()
                    )));
                }
                m.row_mut(node).copy_from_slice(&v);
            }
            AttrRow::Sparse(entries) => {
                for (j, v) in entries {
                    m[(node, j)] = v;
                }
            }
        }
    }
    Ok(m)
}

fn lookup(map: &HashMap<&str, usize>, path: &Path, ln: usize, id: &str) -> Result<usize> {
    map.get(id)
        .copied()
        .ok_or_else(|| Error::Consistency(format!("{}:{ln}: node `{id}` has no attribute row", path.display())))
}

fn parse_edges(path: &Path, names: &HashMap<&str, usize>, n: usize) -> Result<(SparseMatrix, bool, LoadNotes)> {
    let text = read_text(path)?;
    let mut directed = false;
    let mut header_allowed = true;
    let mut notes = LoadNotes::default();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (ln, line) in content_lines(&text) {
        if let Some(flag) = line.strip_prefix('%') {
            match flag.trim() {
                "directed" if header_allowed => directed = true,
                "undirected" if header_allowed => directed = false,
                _ => return Err(Error::parse(path, ln, format!("unexpected header `{line}`"))),
            }
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&toks.len()) {
            return Err(Error::parse(path, ln, "expected `<src> <dst> [weight]`"));
        }
        let u = lookup(names, path, ln, toks[0])?;
        let v = lookup(names, path, ln, toks[1])?;
        let w = match toks.get(2) {
            Some(t) => {
                let w = parse_value(path, ln, t)?;
                if w <= 0.0 {
                    return Err(Error::parse(path, ln, format!("edge weight {w} must be positive")));
                }
                w
            }
            None => 1.0,
        };
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if !seen.insert(key) {
            notes.duplicate_edges += 1;
            continue;
        }
        if u == v {
            notes.self_loops += 1;
            log::warn!("{}:{ln}: self-loop on node `{}`", path.display(), toks[0]);
        }
        entries.push((u, v, w));
        if !directed && u != v {
            entries.push((v, u, w));
        }
    }
    Ok((SparseMatrix::from_triplets(n, n, entries)?, directed, notes))
}

fn parse_labels(path: &Path, names: &HashMap<&str, usize>, n: usize) -> Result<Labels> {
    let text = read_text(path)?;
    let mut raw: Vec<Option<String>> = vec![None; n];
    for (ln, line) in content_lines(&text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(path, ln, "expected `<node> <class>`"));
        }
        let node = lookup(names, path, ln, toks[0])?;
        if raw[node].replace(toks[1].to_string()).is_some() {
            return Err(Error::parse(path, ln, format!("node `{}` labeled twice", toks[0])));
        }
    }
    if let Some(missing) = raw.iter().position(Option::is_none) {
        return Err(Error::Consistency(format!("{}: node index {missing} has no label", path.display())));
    }
    let class_names: Vec<String> = raw.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let class_of: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let ids = raw.iter().map(|c| class_of[c.as_deref().expect("checked above")]).collect();
    Ok(Labels { ids, class_names })
}

/// Loads an attributed network from edge, attribute and optional label
/// files.
pub fn load_network(
    edge_path: impl AsRef<Path>,
    attr_path: impl AsRef<Path>,
    label_path: Option<&Path>,
) -> Result<AttributedNetwork> {
    let (edge_path, attr_path) = (edge_path.as_ref(), attr_path.as_ref());
    let (ids, rows, declared) = parse_attributes(attr_path)?;
    let (index, node_names) = index_nodes(attr_path, &ids)?;
    let attributes = build_attributes(attr_path, &index, rows, declared)?;
    let n = node_names.len();
    let by_name: HashMap<&str, usize> = node_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let (adjacency, directed, notes) = parse_edges(edge_path, &by_name, n)?;
    let labels = label_path.map(|p| parse_labels(p, &by_name, n)).transpose()?;
    Ok(AttributedNetwork::new(adjacency, attributes, labels, node_names.clone(), directed)?.with_notes(notes))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

pub(crate) fn write_all(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Writes `edges.txt`, `attributes.txt` (sparse form) and, when labeled,
/// `labels.txt` under `dir`.
pub fn save_network(net: &AttributedNetwork, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let names = net.node_names();
    let mut paths = Vec::new();

    let edges = dir.join(EDGES_FILE);
    write_all(&edges, |w| {
        if net.is_directed() {
            writeln!(w, "%directed")?;
        }
        for (i, j, wt) in net.adjacency().triplets() {
            if !net.is_directed() && j < i {
                continue;
            }
            if wt == 1.0 {
                writeln!(w, "{}\t{}", names[i], names[j])?;
            } else {
                writeln!(w, "{}\t{}\t{}", names[i], names[j], wt)?;
            }
        }
        Ok(())
    })?;
    paths.push(edges);

    let attrs = dir.join(ATTRIBUTES_FILE);
    write_all(&attrs, |w| {
        writeln!(w, "%dim {}", net.n_attributes())?;
        for (i, name) in names.iter().enumerate() {
            write!(w, "{name}")?;
            for (j, &v) in net.attributes().row(i).iter().enumerate() {
                if v != 0.0 {
                    write!(w, "\t{j}:{v}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    paths.push(attrs);

    if let Some(labels) = net.labels() {
        let path = dir.join(LABELS_FILE);
        write_all(&path, |w| {
            for (name, &c) in names.iter().zip(&labels.ids) {
                writeln!(w, "{name}\t{}", labels.class_names[c])?;
            }
            Ok(())
        })?;
        paths.push(path);
    }
    Ok(paths)
}
