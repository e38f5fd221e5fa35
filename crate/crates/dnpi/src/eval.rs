//! Cross-validation harness: k-fold splitting, repeated CV runs over a
//! dataset/algorithm pair, confusion matrices, and report rendering.
//!
//! Everything here is deterministic given the configured seed; reports
//! and raw logs carry no timestamps so identical runs are byte-identical.

use crate::data::Dataset;
use crate::tree::{build, categorical_instances, Algorithm, BuildParams, TreeError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 folds, got {0}")]
    BadFoldCount(usize),
    #[error("{n} rows cannot fill {folds} folds")]
    TooFewRows { n: usize, folds: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("dataset has no class labels")]
    Unlabeled,
    #[error("no reports to render")]
    NoReports,
    #[error("algorithms do not cover the same datasets: {0}")]
    InconsistentReports(String),
}

/// Square count table, rows = actual class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; num_classes]; num_classes],
        }
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }
}

/// Fraction of correctly classified instances: the diagonal over the
/// total, which for two classes is the usual `(TP + TN) / N`.
pub fn accuracy(matrix: &ConfusionMatrix) -> f64 {
    let total = matrix.total();
    assert!(total > 0, "accuracy requires at least one instance");
    matrix.correct() as f64 / total as f64
}

/// Disjoint index folds covering `0..n`, sizes differing by at most one,
/// from a seeded shuffle. Folds and their contents are in deterministic
/// order (each fold sorted ascending).
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    if n < k {
        return Err(EvalError::TooFewRows { n, folds: k });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold: Vec<usize> = indices[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

/// Stratified variant: shuffles within each class and deals instances
/// round-robin, so per-fold class proportions track the dataset's.
pub fn stratified_kfold_split(
    classes: &[usize],
    num_classes: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    let n = classes.len();
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    if n < k {
        return Err(EvalError::TooFewRows { n, folds: k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| classes[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[cursor % k].push(i);
            cursor += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            repeats: 10,
            seed: 42,
            stratified: false,
        }
    }
}

/// One (repeat, fold) measurement; `seed` is the shuffle seed of the
/// repeat the fold belongs to. Accuracies are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub repeat: usize,
    pub fold: usize,
    pub seed: u64,
    pub test_accuracy_pct: f64,
    pub train_accuracy_pct: f64,
    pub tree_size: usize,
}

/// Averaged results of repeated k-fold cross-validation for one dataset
/// and algorithm. `confusion` aggregates the held-out predictions of all
/// folds and repeats. The per-fold records back the averages but are kept
/// out of serialized reports; they go to the raw log instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub stratified: bool,
    pub min_split: usize,
    pub mean_test_accuracy_pct: f64,
    pub mean_train_accuracy_pct: f64,
    pub mean_tree_size: f64,
    pub confusion: ConfusionMatrix,
    #[serde(skip)]
    pub records: Vec<FoldRecord>,
}

/// Repeated k-fold cross-validation of one algorithm on one dataset.
/// Each fold's model is trained on the complement, scored on the held-out
/// fold (test accuracy) and on its own training fold (in-sample
/// accuracy).
pub fn cross_validate(
    data: &Dataset,
    dataset_name: &str,
    params: &BuildParams,
    config: &CvConfig,
) -> Result<EvalReport, EvalError> {
    let num_classes = data.class_schema().ok_or(EvalError::Unlabeled)?.labels.len();
    let instances = categorical_instances(data)?;
    let actual: Vec<usize> = (0..data.len())
        .map(|r| data.class_of(r).ok_or(EvalError::Unlabeled))
        .collect::<Result<_, _>>()?;

    let mut seed_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let repeat_seeds: Vec<u64> = (0..config.repeats).map(|_| seed_rng.random()).collect();

    let mut records = Vec::with_capacity(config.repeats * config.folds);
    let mut confusion = ConfusionMatrix::new(num_classes);
    for (repeat, &repeat_seed) in repeat_seeds.iter().enumerate() {
        let folds = if config.stratified {
            stratified_kfold_split(&actual, num_classes, config.folds, repeat_seed)?
        } else {
            kfold_split(data.len(), config.folds, repeat_seed)?
        };
        for (fold_no, fold) in folds.iter().enumerate() {
            let train_rows: Vec<usize> =
                (0..data.len()).filter(|r| !fold.contains(r)).collect();
            let model = build(&data.subset(&train_rows), params)?;

            let mut test_matrix = ConfusionMatrix::new(num_classes);
            for &r in fold {
                let predicted = model.classify(&instances[r])?;
                test_matrix.record(actual[r], predicted);
                confusion.record(actual[r], predicted);
            }
            let mut train_matrix = ConfusionMatrix::new(num_classes);
            for &r in &train_rows {
                train_matrix.record(actual[r], model.classify(&instances[r])?);
            }

            records.push(FoldRecord {
                dataset: dataset_name.to_string(),
                algorithm: params.algorithm,
                repeat,
                fold: fold_no,
                seed: repeat_seed,
                test_accuracy_pct: 100.0 * accuracy(&test_matrix),
                train_accuracy_pct: 100.0 * accuracy(&train_matrix),
                tree_size: model.size(),
            });
        }
    }

    let count = records.len() as f64;
    let mean = |f: &dyn Fn(&FoldRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / count;
    Ok(EvalReport {
        dataset: dataset_name.to_string(),
        algorithm: params.algorithm,
        folds: config.folds,
        repeats: config.repeats,
        seed: config.seed,
        stratified: config.stratified,
        min_split: params.min_split,
        mean_test_accuracy_pct: mean(&|r| r.test_accuracy_pct),
        mean_train_accuracy_pct: mean(&|r| r.train_accuracy_pct),
        mean_tree_size: mean(&|r| r.tree_size as f64),
        confusion,
        records,
    })
}

/// Raw per-fold log: one JSON record per line, in report order.
pub fn raw_log(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    for report in reports {
        for record in &report.records {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

struct Grid {
    datasets: Vec<String>,
    algorithms: Vec<Algorithm>,
}

fn grid(reports: &[EvalReport]) -> Result<Grid, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::NoReports);
    }
    let mut datasets: Vec<String> = Vec::new();
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for r in reports {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
    }
    let mut missing = Vec::new();
    for d in &datasets {
        for a in &algorithms {
            if !reports.iter().any(|r| &r.dataset == d && r.algorithm == *a) {
                missing.push(format!("{d}/{a}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(EvalError::InconsistentReports(missing.join(", ")));
    }
    Ok(Grid {
        datasets,
        algorithms,
    })
}

/// Renders the benchmark grid: one row per dataset, one column per
/// algorithm, sections for test accuracy, in-sample accuracy and tree
/// size, with the best value per row marked and a column-average footer.
pub fn report_table(reports: &[EvalReport], format: ReportFormat) -> Result<String, EvalError> {
    let grid = grid(reports)?;
    match format {
        ReportFormat::Json => {
            let doc = serde_json::json!({ "reports": reports });
            Ok(format!("{:#}\n", doc))
        }
        ReportFormat::Text => Ok(render_text(reports, &grid)),
    }
}

fn render_text(reports: &[EvalReport], grid: &Grid) -> String {
    let cell = |d: &str, a: Algorithm| {
        reports
            .iter()
            .find(|r| r.dataset == d && r.algorithm == a)
            .expect("grid is complete")
    };
    let first = &reports[0];
    let mut out = String::new();
    let _ = writeln!(out, "benchmark report");
    let _ = writeln!(
        out,
        "config: folds={} repeats={} seed={} stratified={} min_split={}",
        first.folds, first.repeats, first.seed, first.stratified, first.min_split
    );
    let _ = writeln!(
        out,
        "note: preprocessing is applied to the full dataset before cross-validation"
    );
    let _ = writeln!(
        out,
        "note: gain_ratio is an unpruned gain-ratio tree (no confidence pruning)"
    );
    let _ = writeln!(
        out,
        "note: algorithms covered are dnpi and gain_ratio only; credal-set baselines are out of scope"
    );

    let sections: [(&str, &dyn Fn(&EvalReport) -> f64, bool); 3] = [
        ("test accuracy (%)", &|r| r.mean_test_accuracy_pct, true),
        ("in-sample accuracy (%)", &|r| r.mean_train_accuracy_pct, true),
        ("tree size (leaves)", &|r| r.mean_tree_size, false),
    ];
    let name_width = grid
        .datasets
        .iter()
        .map(|d| d.len())
        .chain(["average".len()])
        .max()
        .unwrap()
        .max("dataset".len());

    for (title, measure, higher_better) in sections {
        let _ = writeln!(out, "\n{title}  (best per row marked *)");
        let _ = write!(out, "{:<name_width$}", "dataset");
        for a in &grid.algorithms {
            let _ = write!(out, "  {:>12}", a.to_string());
        }
        out.push('\n');
        for d in &grid.datasets {
            let values: Vec<f64> = grid.algorithms.iter().map(|&a| measure(cell(d, a))).collect();
            let best = values
                .iter()
                .copied()
                .reduce(|x, y| if higher_better { x.max(y) } else { x.min(y) })
                .unwrap();
            let _ = write!(out, "{d:<name_width$}");
            for v in &values {
                let mark = if *v == best { "*" } else { " " };
                let _ = write!(out, "  {:>11.2}{mark}", v);
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<name_width$}", "average");
        for &a in &grid.algorithms {
            let mean: f64 = grid
                .datasets
                .iter()
                .map(|d| measure(cell(d, a)))
                .sum::<f64>()
                / grid.datasets.len() as f64;
            let _ = write!(out, "  {:>11.2} ", mean);
        }
        out.push('\n');
    }
    out
}
