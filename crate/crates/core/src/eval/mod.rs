//! Downstream evaluation: outlier recall of a score ranking, node
//! classification F1 and clustering accuracy of an embedding.

mod classify;
mod cluster;
mod f1;
mod ranking;
mod report;

pub use classify::{train_classifier, train_classifier_traced, ClassifierConfig, LogisticRegression};
pub use cluster::{clustering_accuracy, kmeans_pp, wcss, KMeansResult};
pub use f1::{f1_scores, F1Scores};
pub use ranking::{recall_at, RankedList};
pub use report::{evaluate_all, EvalConfig, EvalReport, REPORT_JSON, REPORT_TSV};
