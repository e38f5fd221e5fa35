//! Decision tree induction: the D-NPI algorithm with its two-condition
//! stop rule, an unpruned gain-ratio baseline with the same recursion
//! shape, classification, and a replay checker that re-verifies every
//! split of a built D-NPI tree.

use crate::ci::{ci_score, CiScore};
use crate::contingency::{majority_index, ContingencyView};
use crate::data::{Dataset, Value};
use crate::entropy::{gain_ratio, information_gain, GAIN_EPS};
use crate::interval::ProbabilityInterval;
use crate::npi::{bernoulli_next_interval, singleton_interval_from_counts, BernoulliRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("training data is empty")]
    EmptyTraining,
    #[error("dataset has no class labels")]
    Unlabeled,
    #[error("attribute {0:?} is not categorical; discretize or binarize first")]
    NonCategorical(String),
    #[error("row {0} has a missing value; impute first")]
    MissingValue(usize),
    #[error("min_split must be at least 2")]
    BadMinSplit,
    #[error("instance supplies no value for attribute {0}")]
    IncompleteInstance(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dnpi,
    GainRatio,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Dnpi => "dnpi",
            Algorithm::GainRatio => "gain_ratio",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dnpi" => Ok(Algorithm::Dnpi),
            "gain_ratio" => Ok(Algorithm::GainRatio),
            other => Err(format!("unknown algorithm {other:?} (expected dnpi or gain_ratio)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildParams {
    pub min_split: usize,
    pub algorithm: Algorithm,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            min_split: 2,
            algorithm: Algorithm::Dnpi,
        }
    }
}

/// One node of a built tree. Internal nodes carry one child per declared
/// category of the split attribute (an empty training subset becomes a
/// zero-count leaf of the parent majority) plus a fallback class for
/// values outside the schema at prediction time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
        n: u64,
    },
    Internal {
        attribute: usize,
        children: Vec<Node>,
        fallback: usize,
        n: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    root: Node,
}

impl DecisionTree {
    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Number of leaves.
    pub fn size(&self) -> usize {
        fn leaves(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Internal { children, .. } => children.iter().map(leaves).sum(),
            }
        }
        leaves(&self.root)
    }

    /// Class for one instance, given as one optional category index per
    /// attribute (in schema order). `None` or an out-of-schema index
    /// falls back to the current node's majority class.
    pub fn classify(&self, instance: &[Option<usize>]) -> Result<usize, TreeError> {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class, .. } => return Ok(*class),
                Node::Internal {
                    attribute,
                    children,
                    fallback,
                    ..
                } => {
                    let value = instance
                        .get(*attribute)
                        .ok_or(TreeError::IncompleteInstance(*attribute))?;
                    match value {
                        Some(c) if *c < children.len() => node = &children[*c],
                        _ => return Ok(*fallback),
                    }
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Number of leaves of a tree.
pub fn tree_size(tree: &DecisionTree) -> usize {
    tree.size()
}

/// NPI interval for predicting the most common class without using any
/// attribute: the Bernoulli next-trial interval of the majority count for
/// a binary class variable, or the NPI-M singleton interval of the
/// largest class when three or more classes are declared.
pub fn no_attribute_interval(class_counts: &[u64], declared_classes: usize) -> ProbabilityInterval {
    let n: u64 = class_counts.iter().sum();
    assert!(n > 0, "no-attribute interval requires a nonempty node");
    let s = class_counts[majority_index(class_counts)];
    if declared_classes <= 2 {
        bernoulli_next_interval(&BernoulliRecord::new(n, s).expect("majority count <= n"))
    } else {
        singleton_interval_from_counts(s, n)
    }
}

/// Categorical value matrix extracted from a dataset, attribute-major.
struct Matrix {
    values: Vec<Vec<usize>>,
    classes: Vec<usize>,
    arities: Vec<usize>,
    num_classes: usize,
}

fn matrix(data: &Dataset) -> Result<Matrix, TreeError> {
    if data.is_empty() {
        return Err(TreeError::EmptyTraining);
    }
    let num_classes = data
        .class_schema()
        .ok_or(TreeError::Unlabeled)?
        .labels
        .len();
    let mut arities = Vec::with_capacity(data.attributes().len());
    for attr in data.attributes() {
        arities.push(
            attr.arity()
                .ok_or_else(|| TreeError::NonCategorical(attr.name.clone()))?,
        );
    }
    let mut values = vec![Vec::with_capacity(data.len()); arities.len()];
    let mut classes = Vec::with_capacity(data.len());
    for r in 0..data.len() {
        for (a, column) in values.iter_mut().enumerate() {
            match data.value(r, a) {
                Value::Cat(c) => column.push(*c),
                Value::Missing => return Err(TreeError::MissingValue(r + 1)),
                Value::Num(_) => {
                    return Err(TreeError::NonCategorical(data.attributes()[a].name.clone()))
                }
            }
        }
        classes.push(data.class_of(r).ok_or(TreeError::Unlabeled)?);
    }
    Ok(Matrix {
        values,
        classes,
        arities,
        num_classes,
    })
}

fn class_counts(m: &Matrix, rows: &[usize]) -> Vec<u64> {
    let mut counts = vec![0u64; m.num_classes];
    for &r in rows {
        counts[m.classes[r]] += 1;
    }
    counts
}

fn node_view(m: &Matrix, rows: &[usize], attribute: usize) -> ContingencyView {
    let mut counts = vec![vec![0u64; m.num_classes]; m.arities[attribute]];
    for &r in rows {
        counts[m.values[attribute][r]][m.classes[r]] += 1;
    }
    ContingencyView::new(attribute, (0..m.arities[attribute]).collect(), counts)
        .expect("declared arity is at least 1")
}

/// CI score of one attribute at a node, computed on the observed
/// categories only.
fn attribute_ci(m: &Matrix, rows: &[usize], attribute: usize) -> CiScore {
    let view = node_view(m, rows, attribute)
        .observed_only()
        .expect("node has rows");
    ci_score(&view, m.arities[attribute]).expect("observed categories only")
}

fn select_dnpi(
    m: &Matrix,
    rows: &[usize],
    available: &[usize],
    counts: &[u64],
) -> Option<usize> {
    let no_attribute = no_attribute_interval(counts, m.num_classes);
    let mut best: Option<(usize, CiScore)> = None;
    for &a in available {
        let score = attribute_ci(m, rows, a);
        if !(score.lower() > no_attribute.lower() && score.upper() > no_attribute.upper()) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, b)) => {
                score.lower() > b.lower()
                    || (score.lower() == b.lower() && score.upper() > b.upper())
            }
        };
        if better {
            best = Some((a, score));
        }
    }
    best.map(|(a, _)| a)
}

fn select_gain_ratio(m: &Matrix, rows: &[usize], available: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &a in available {
        let view = node_view(m, rows, a);
        if information_gain(&view) <= GAIN_EPS {
            continue;
        }
        let ratio = gain_ratio(&view);
        if best.is_none_or(|(_, b)| ratio > b) {
            best = Some((a, ratio));
        }
    }
    best.map(|(a, _)| a)
}

fn grow(m: &Matrix, rows: &[usize], available: &[usize], params: &BuildParams) -> Node {
    let counts = class_counts(m, rows);
    let n = rows.len() as u64;
    let majority = majority_index(&counts);
    if counts.iter().filter(|&&c| c > 0).count() == 1 {
        return Node::Leaf { class: majority, n };
    }
    if available.is_empty() || rows.len() < params.min_split {
        return Node::Leaf { class: majority, n };
    }
    let chosen = match params.algorithm {
        Algorithm::Dnpi => select_dnpi(m, rows, available, &counts),
        Algorithm::GainRatio => select_gain_ratio(m, rows, available),
    };
    let Some(attribute) = chosen else {
        return Node::Leaf { class: majority, n };
    };
    let remaining: Vec<usize> = available.iter().copied().filter(|&a| a != attribute).collect();
    let children = (0..m.arities[attribute])
        .map(|c| {
            let child_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| m.values[attribute][r] == c)
                .collect();
            if child_rows.is_empty() {
                Node::Leaf {
                    class: majority,
                    n: 0,
                }
            } else {
                grow(m, &child_rows, &remaining, params)
            }
        })
        .collect();
    Node::Internal {
        attribute,
        children,
        fallback: majority,
        n,
    }
}

pub fn build(data: &Dataset, params: &BuildParams) -> Result<DecisionTree, TreeError> {
    if params.min_split < 2 {
        return Err(TreeError::BadMinSplit);
    }
    let m = matrix(data)?;
    let rows: Vec<usize> = (0..data.len()).collect();
    let available: Vec<usize> = (0..m.arities.len()).collect();
    Ok(DecisionTree {
        root: grow(&m, &rows, &available, params),
    })
}

pub fn build_dnpi(data: &Dataset, params: &BuildParams) -> Result<DecisionTree, TreeError> {
    build(
        data,
        &BuildParams {
            algorithm: Algorithm::Dnpi,
            ..*params
        },
    )
}

pub fn build_gain_ratio_tree(data: &Dataset, params: &BuildParams) -> Result<DecisionTree, TreeError> {
    build(
        data,
        &BuildParams {
            algorithm: Algorithm::GainRatio,
            ..*params
        },
    )
}

/// Instances for classification taken straight from a categorical
/// dataset; missing cells become `None` (routed to fallback classes).
pub fn categorical_instances(data: &Dataset) -> Result<Vec<Vec<Option<usize>>>, TreeError> {
    (0..data.len())
        .map(|r| {
            (0..data.attributes().len())
                .map(|a| match data.value(r, a) {
                    Value::Cat(c) => Ok(Some(*c)),
                    Value::Missing => Ok(None),
                    Value::Num(_) => {
                        Err(TreeError::NonCategorical(data.attributes()[a].name.clone()))
                    }
                })
                .collect()
        })
        .collect()
}

/// CI bounds of one attribute at the root, with the outcome of both stop
/// rule conditions.
#[derive(Debug, Clone)]
pub struct SplitDiagnostic {
    pub attribute: usize,
    pub ci: CiScore,
    pub passes_lower: bool,
    pub passes_upper: bool,
}

/// The D-NPI split decision surface at the root node: every attribute's
/// CI interval against the no-attribute interval, plus the attribute the
/// builder would select.
#[derive(Debug, Clone)]
pub struct RootInspection {
    pub no_attribute: ProbabilityInterval,
    pub diagnostics: Vec<SplitDiagnostic>,
    pub selected: Option<usize>,
}

pub fn inspect_root(data: &Dataset) -> Result<RootInspection, TreeError> {
    let m = matrix(data)?;
    let rows: Vec<usize> = (0..data.len()).collect();
    let available: Vec<usize> = (0..m.arities.len()).collect();
    let counts = class_counts(&m, &rows);
    let no_attribute = no_attribute_interval(&counts, m.num_classes);
    let diagnostics = available
        .iter()
        .map(|&a| {
            let ci = attribute_ci(&m, &rows, a);
            SplitDiagnostic {
                attribute: a,
                passes_lower: ci.lower() > no_attribute.lower(),
                passes_upper: ci.upper() > no_attribute.upper(),
                ci,
            }
        })
        .collect();
    Ok(RootInspection {
        no_attribute,
        diagnostics,
        selected: select_dnpi(&m, &rows, &available, &counts),
    })
}

/// Re-derives the split decision at every internal node of a D-NPI tree
/// built from `data` and reports the first violation of the stop rule:
/// a selected attribute that is constant at its node, or a CI interval
/// that does not strictly beat the no-attribute interval on both ends.
pub fn verify_dnpi_splits(data: &Dataset, tree: &DecisionTree) -> Result<(), String> {
    let m = matrix(data).map_err(|e| e.to_string())?;

    fn walk(m: &Matrix, rows: &[usize], node: &Node) -> Result<(), String> {
        let Node::Internal {
            attribute,
            children,
            ..
        } = node
        else {
            return Ok(());
        };
        let counts = class_counts(m, rows);
        let no_attribute = no_attribute_interval(&counts, m.num_classes);
        let observed = node_view(m, rows, *attribute)
            .observed_only()
            .map_err(|e| e.to_string())?;
        if observed.categories().len() < 2 {
            return Err(format!(
                "attribute {attribute} is constant at a node with {} rows",
                rows.len()
            ));
        }
        let score =
            ci_score(&observed, m.arities[*attribute]).map_err(|e| e.to_string())?;
        if !(score.lower() > no_attribute.lower() && score.upper() > no_attribute.upper()) {
            return Err(format!(
                "split on attribute {attribute} violates the stop rule: CI {} vs no-attribute {}",
                score.interval(),
                no_attribute
            ));
        }
        for (c, child) in children.iter().enumerate() {
            let child_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| m.values[*attribute][r] == c)
                .collect();
            if child_rows.is_empty() {
                continue;
            }
            walk(m, &child_rows, child)?;
        }
        Ok(())
    }

    walk(&m, &(0..data.len()).collect::<Vec<_>>(), tree.root())
}
