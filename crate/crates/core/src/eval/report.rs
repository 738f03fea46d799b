use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::network::{write_all, AttributedNetwork, EmbeddingResult};
use crate::numerics::{DenseMatrix, Rng};
use crate::seeder::OutlierTruth;

use super::{
    clustering_accuracy, f1_scores, kmeans_pp, recall_at, train_classifier, ClassifierConfig, F1Scores, RankedList,
};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TSV: &str = "report.tsv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Ranking prefixes, in percent of all nodes.
    pub l_percents: Vec<f64>,
    /// Training-set sizes, as fractions of the evaluated nodes.
    pub train_fractions: Vec<f64>,
    /// Random splits per training fraction.
    pub reps: usize,
    pub seed: u64,
    /// Leave planted outliers out of classification and clustering.
    pub exclude_outliers: bool,
    pub kmeans_max_iters: usize,
    pub classifier: ClassifierConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            l_percents: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            train_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            reps: 10,
            seed: 0,
            exclude_outliers: false,
            kmeans_max_iters: 300,
            classifier: ClassifierConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.l_percents.iter().find(|l| !(**l > 0.0 && **l <= 100.0)) {
            return Err(Error::Domain(format!("L = {l}% outside (0, 100]")));
        }
        if let Some(f) = self.train_fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::Domain(format!("training fraction {f} outside (0, 1)")));
        }
        if self.reps == 0 && !self.train_fractions.is_empty() {
            return Err(Error::Domain("at least one repetition per split is needed".into()));
        }
        Ok(())
    }
}

/// Serializes `[(key, value)]` as a JSON object keyed by the formatted
/// number, keeping numeric order both ways.
mod keyed {
    use serde::de::{Deserialize, Deserializer, Error as _};
    use serde::ser::{SerializeMap, Serializer};
    use serde::Serialize;
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer, T: Serialize>(entries: &[(f64, T)], s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(entries.len()))?;
        for (k, v) in entries {
            map.serialize_entry(&k.to_string(), v)?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Deserialize<'de>>(d: D) -> Result<Vec<(f64, T)>, D::Error> {
        let raw = BTreeMap::<String, T>::deserialize(d)?;
        let mut out = raw
            .into_iter()
            .map(|(k, v)| k.parse::<f64>().map(|k| (k, v)).map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `(L%, recall)`; empty when there are no true outliers.
    #[serde(with = "keyed")]
    pub recall_at: Vec<(f64, f64)>,
    /// `(training %, mean F1 over repetitions)`.
    #[serde(with = "keyed")]
    pub f1: Vec<(f64, F1Scores)>,
    pub clustering_accuracy: f64,
    pub config: EvalConfig,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# recall_at\nl_percent\trecall\n");
        for (l, r) in &self.recall_at {
            let _ = writeln!(out, "{l}\t{r}");
        }
        out.push_str("\n# f1\ntrain_percent\tmacro\tmicro\n");
        for (f, s) in &self.f1 {
            let _ = writeln!(out, "{f}\t{}\t{}", s.macro_f1, s.micro_f1);
        }
        let _ = write!(out, "\n# clustering\naccuracy\n{}\n", self.clustering_accuracy);
        out
    }

    /// Writes `report.json` and `report.tsv` under `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = self.to_json()? + "\n";
        write_all(&dir.join(REPORT_JSON), |w| w.write_all(json.as_bytes()))?;
        let tsv = self.to_tsv();
        write_all(&dir.join(REPORT_TSV), |w| w.write_all(tsv.as_bytes()))
    }
}

fn select_rows(m: &DenseMatrix, rows: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), m.cols(), |i, j| m[(rows[i], j)])
}

/// Mean F1 over `cfg.reps` random splits with the given training fraction.
fn classification(x: &DenseMatrix, y: &[usize], n_classes: usize, fraction: f64, cfg: &EvalConfig) -> Result<F1Scores> {
    let n = y.len();
    let n_train = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let stream = format!("splits-{}", fraction * 100.0);
    let runs = exec::map_range(cfg.reps, |rep| -> Result<F1Scores> {
        let mut order: Vec<usize> = (0..n).collect();
        Rng::substream_indexed(cfg.seed, &stream, rep as u64).shuffle(&mut order);
        let (train, test) = order.split_at(n_train);
        let y_train: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let y_test: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        let model = train_classifier(&select_rows(x, train), &y_train, n_classes, &cfg.classifier)?;
        f1_scores(&y_test, &model.predict(&select_rows(x, test))?)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let k = runs.len() as f64;
    Ok(F1Scores {
        macro_f1: runs.iter().map(|s| s.macro_f1).sum::<f64>() / k,
        micro_f1: runs.iter().map(|s| s.micro_f1).sum::<f64>() / k,
    })
}

/// Outlier recall of the combined-score ranking, node classification F1
/// and clustering accuracy of the embedding.
pub fn evaluate_all(
    net: &AttributedNetwork,
    truth: &OutlierTruth,
    result: &EmbeddingResult,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    if result.node_names != net.node_names() {
        return Err(Error::Consistency("embedding rows do not match the network's nodes".into()));
    }
    let labels = net.require_labels()?;
    let n = net.n_nodes();

    let ranked = RankedList::from_scores(&result.combined)?;
    let all_outliers = truth.all();
    if all_outliers.last().is_some_and(|&i| i >= n) {
        return Err(Error::Consistency("outlier id outside the network".into()));
    }
    let recall = if all_outliers.is_empty() {
        log::warn!("no ground-truth outliers; recall is not reported");
        Vec::new()
    } else {
        cfg.l_percents.iter().map(|&l| recall_at(&ranked, &all_outliers, l).map(|r| (l, r))).collect::<Result<_>>()?
    };

    let nodes: Vec<usize> = if cfg.exclude_outliers {
        (0..n).filter(|i| all_outliers.binary_search(i).is_err()).collect()
    } else {
        (0..n).collect()
    };
    if nodes.len() < 2 {
        return Err(Error::Domain(format!("{} nodes left to evaluate", nodes.len())));
    }
    let x = select_rows(&result.embedding, &nodes);
    let y: Vec<usize> = nodes.iter().map(|&i| labels.ids[i]).collect();
    let n_classes = labels.n_classes();

    let f1 = cfg
        .train_fractions
        .iter()
        .map(|&f| classification(&x, &y, n_classes, f, cfg).map(|s| (f * 100.0, s)))
        .collect::<Result<_>>()?;

    let k = n_classes.min(nodes.len());
    let clusters = kmeans_pp(&x, k, &mut Rng::substream(cfg.seed, "kmeans"), cfg.kmeans_max_iters)?;
    let clustering_accuracy = clustering_accuracy(&clusters.assignment, &y)?;

    Ok(EvalReport { recall_at: recall, f1, clustering_accuracy, config: cfg.clone() })
}
