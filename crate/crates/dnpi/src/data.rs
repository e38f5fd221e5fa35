//! Dataset ingestion and preprocessing: CSV loading with schema
//! detection, modal imputation of missing values, equal-frequency
//! discretization, and gain-ratio binarization of numeric attributes.

use crate::contingency::ContingencyView;
use crate::entropy::{gain_ratio, information_gain};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("class column {0:?} not found")]
    UnknownClassColumn(String),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("row {row}, column {column:?}: value {value:?} not in declared labels")]
    UnknownLabel {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: class value is missing")]
    MissingClass { row: usize },
    #[error("no attribute named {0:?}")]
    UnknownAttribute(String),
    #[error("attribute {0:?} is not numeric")]
    NotNumeric(String),
    #[error("attribute {0:?} is not categorical")]
    NotCategorical(String),
    #[error("attribute {0:?} has missing values; impute first")]
    HasMissing(String),
    #[error("column {0:?} has no observed values")]
    AllMissing(String),
    #[error("attribute {name:?} has {distinct} distinct values, need at least {need}")]
    TooFewDistinct {
        name: String,
        distinct: usize,
        need: usize,
    },
    #[error("dataset has no class column")]
    Unlabeled,
    #[error("bins must be at least 2")]
    BadBinCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttrKind {
    Categorical { labels: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttrKind,
}

impl AttributeSchema {
    /// Number of declared categories; `None` for numeric attributes.
    pub fn arity(&self) -> Option<usize> {
        match &self.kind {
            AttrKind::Categorical { labels } => Some(labels.len()),
            AttrKind::Numeric => None,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match &self.kind {
            AttrKind::Categorical { labels } => Some(labels),
            AttrKind::Numeric => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSchema {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Cat(usize),
    Num(f64),
    Missing,
}

/// Rows of attribute values with an optional class column. Categorical
/// cells are stored as indices into the attribute's declared label list,
/// so label order is the tie-breaking order everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    attributes: Vec<AttributeSchema>,
    class: Option<ClassSchema>,
    rows: Vec<Vec<Value>>,
    class_values: Vec<Option<usize>>,
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Default)]
pub enum ClassColumn {
    /// Rightmost column (the usual UCI layout).
    #[default]
    Last,
    Named(String),
    /// No class column at all (unlabeled data for prediction).
    Absent,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub class: ClassColumn,
    pub missing_marker: Option<String>,
    pub schema: Option<SchemaSidecar>,
}

impl LoadOptions {
    fn marker(&self) -> &str {
        self.missing_marker.as_deref().unwrap_or("?")
    }
}

/// Optional schema declaration loaded from a JSON sidecar. Attributes are
/// matched by name; unlisted columns fall back to auto-detection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemaSidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSchema>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<SidecarAttribute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarAttribute {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub numeric: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl SchemaSidecar {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn attribute(&self, name: &str) -> Option<&SidecarAttribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

pub fn load_csv_path(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset, DataError> {
    load_csv(std::fs::File::open(path)?, options)
}

pub fn load_csv<R: Read>(reader: R, options: &LoadOptions) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(DataError::DuplicateColumn(h.clone()));
        }
    }
    let mut cells: Vec<Vec<String>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(DataError::RaggedRow {
                row: i + 1,
                expected: headers.len(),
                found: record.len(),
            });
        }
        cells.push(record.iter().map(str::to_string).collect());
    }
    if cells.is_empty() {
        return Err(DataError::EmptyDataset);
    }

    let sidecar_class_name = options
        .schema
        .as_ref()
        .and_then(|s| s.class.as_ref())
        .map(|c| c.name.clone());
    let class_col: Option<usize> = match &options.class {
        ClassColumn::Named(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::UnknownClassColumn(name.clone()))?,
        ),
        ClassColumn::Last => match &sidecar_class_name {
            Some(name) => Some(
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| DataError::UnknownClassColumn(name.clone()))?,
            ),
            None => Some(headers.len() - 1),
        },
        ClassColumn::Absent => None,
    };

    let marker = options.marker();
    let attr_cols: Vec<usize> = (0..headers.len()).filter(|c| Some(*c) != class_col).collect();

    let mut attributes = Vec::with_capacity(attr_cols.len());
    for &c in &attr_cols {
        let name = headers[c].clone();
        let declared = options.schema.as_ref().and_then(|s| s.attribute(&name));
        let kind = match declared {
            Some(d) if d.numeric => AttrKind::Numeric,
            Some(d) => AttrKind::Categorical {
                labels: d.labels.clone(),
            },
            None => {
                let column: Vec<&str> = cells.iter().map(|r| r[c].as_str()).collect();
                detect_kind(&column, marker)
            }
        };
        attributes.push(AttributeSchema { name, kind });
    }

    let declared_labels = |labels: &mut Vec<String>, value: &str, grow: bool| -> Option<usize> {
        match labels.iter().position(|l| l == value) {
            Some(i) => Some(i),
            None if grow => {
                labels.push(value.to_string());
                Some(labels.len() - 1)
            }
            None => None,
        }
    };

    let mut label_sets: Vec<(Vec<String>, bool)> = attributes
        .iter()
        .enumerate()
        .map(|(a, schema)| match &schema.kind {
            AttrKind::Categorical { labels } => {
                let grow = options
                    .schema
                    .as_ref()
                    .and_then(|s| s.attribute(&attributes[a].name))
                    .is_none();
                (labels.clone(), grow)
            }
            AttrKind::Numeric => (Vec::new(), false),
        })
        .collect();

    let class_declared = options.schema.as_ref().and_then(|s| s.class.clone());
    let mut class_labels: Vec<String> = class_declared
        .as_ref()
        .map(|c| c.labels.clone())
        .unwrap_or_default();
    let class_grow = class_declared.is_none();

    let mut rows = Vec::with_capacity(cells.len());
    let mut class_values = Vec::with_capacity(cells.len());
    for (i, record) in cells.iter().enumerate() {
        let row_no = i + 1;
        let mut row = Vec::with_capacity(attr_cols.len());
        for (a, &c) in attr_cols.iter().enumerate() {
            let raw = record[c].as_str();
            let value = if raw == marker {
                Value::Missing
            } else {
                match &attributes[a].kind {
                    AttrKind::Numeric => {
                        Value::Num(raw.parse().map_err(|_| DataError::BadNumber {
                            row: row_no,
                            column: attributes[a].name.clone(),
                            value: raw.to_string(),
                        })?)
                    }
                    AttrKind::Categorical { .. } => {
                        let (labels, grow) = &mut label_sets[a];
                        let idx = declared_labels(labels, raw, *grow).ok_or_else(|| {
                            DataError::UnknownLabel {
                                row: row_no,
                                column: attributes[a].name.clone(),
                                value: raw.to_string(),
                            }
                        })?;
                        Value::Cat(idx)
                    }
                }
            };
            row.push(value);
        }
        rows.push(row);

        class_values.push(match class_col {
            None => None,
            Some(c) => {
                let raw = record[c].as_str();
                if raw == marker {
                    return Err(DataError::MissingClass { row: row_no });
                }
                let idx = declared_labels(&mut class_labels, raw, class_grow).ok_or_else(
                    || DataError::UnknownLabel {
                        row: row_no,
                        column: headers[c].clone(),
                        value: raw.to_string(),
                    },
                )?;
                Some(idx)
            }
        });
    }

    for (a, (labels, _)) in label_sets.into_iter().enumerate() {
        if let AttrKind::Categorical { labels: dst } = &mut attributes[a].kind {
            *dst = labels;
        }
    }
    let class = class_col.map(|c| ClassSchema {
        name: headers[c].clone(),
        labels: class_labels,
    });

    Ok(Dataset {
        attributes,
        class,
        rows,
        class_values,
    })
}

/// A column is numeric when every non-missing cell parses as a number;
/// otherwise it is categorical with labels in order of first appearance.
fn detect_kind(column: &[&str], marker: &str) -> AttrKind {
    let observed: Vec<&str> = column.iter().copied().filter(|v| *v != marker).collect();
    if !observed.is_empty() && observed.iter().all(|v| v.parse::<f64>().is_ok()) {
        return AttrKind::Numeric;
    }
    let mut labels: Vec<String> = Vec::new();
    for v in observed {
        if !labels.iter().any(|l| l == v) {
            labels.push(v.to_string());
        }
    }
    AttrKind::Categorical { labels }
}

impl Dataset {
    /// Build a fully categorical labeled dataset directly from index rows.
    pub fn from_categorical(
        attributes: Vec<AttributeSchema>,
        class: ClassSchema,
        rows: Vec<(Vec<usize>, usize)>,
    ) -> Self {
        for (values, label) in &rows {
            assert_eq!(values.len(), attributes.len(), "row arity mismatch");
            for (a, &v) in values.iter().enumerate() {
                let arity = attributes[a].arity().expect("categorical attribute");
                assert!(v < arity, "category out of range");
            }
            assert!(*label < class.labels.len(), "class out of range");
        }
        let class_values = rows.iter().map(|&(_, label)| Some(label)).collect();
        let rows = rows
            .into_iter()
            .map(|(values, _)| values.into_iter().map(Value::Cat).collect())
            .collect();
        Dataset {
            attributes,
            class: Some(class),
            rows,
            class_values,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn attributes(&self) -> &[AttributeSchema] {
        &self.attributes
    }

    pub fn class_schema(&self) -> Option<&ClassSchema> {
        self.class.as_ref()
    }

    pub fn value(&self, row: usize, attribute: usize) -> &Value {
        &self.rows[row][attribute]
    }

    pub fn class_of(&self, row: usize) -> Option<usize> {
        self.class_values[row]
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize, DataError> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| DataError::UnknownAttribute(name.to_string()))
    }

    /// Copy of the rows at `indices`, keeping the full schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            attributes: self.attributes.clone(),
            class: self.class.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            class_values: indices.iter().map(|&i| self.class_values[i]).collect(),
        }
    }

    /// Per-class instance counts; requires a class column.
    pub fn class_counts(&self) -> Result<Vec<u64>, DataError> {
        let schema = self.class.as_ref().ok_or(DataError::Unlabeled)?;
        let mut counts = vec![0u64; schema.labels.len()];
        for v in self.class_values.iter().flatten() {
            counts[*v] += 1;
        }
        Ok(counts)
    }

    /// Schema sidecar describing this dataset, suitable for writing next
    /// to an exported CSV.
    pub fn schema_sidecar(&self) -> SchemaSidecar {
        SchemaSidecar {
            class: self.class.clone(),
            attributes: self
                .attributes
                .iter()
                .map(|a| match &a.kind {
                    AttrKind::Categorical { labels } => SidecarAttribute {
                        name: a.name.clone(),
                        numeric: false,
                        labels: labels.clone(),
                    },
                    AttrKind::Numeric => SidecarAttribute {
                        name: a.name.clone(),
                        numeric: true,
                        labels: Vec::new(),
                    },
                })
                .collect(),
        }
    }

    /// Write the dataset back out as CSV (attributes in schema order,
    /// class column last when present).
    pub fn write_csv<W: std::io::Write>(&self, writer: W, marker: &str) -> Result<(), DataError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        if let Some(class) = &self.class {
            header.push(&class.name);
        }
        wtr.write_record(&header)?;
        for (row, class_value) in self.rows.iter().zip(&self.class_values) {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            for (a, v) in row.iter().enumerate() {
                record.push(match v {
                    Value::Missing => marker.to_string(),
                    Value::Num(x) => x.to_string(),
                    Value::Cat(i) => self.attributes[a].labels().expect("categorical")[*i].clone(),
                });
            }
            if let Some(class) = &self.class {
                let idx = class_value.ok_or(DataError::Unlabeled)?;
                record.push(class.labels[idx].clone());
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Cross-tabulation of one categorical attribute against the class
    /// over the given rows, with one row per declared category in schema
    /// order. Rows with a missing value for the attribute are skipped.
    pub fn contingency(
        &self,
        attribute: usize,
        rows: &[usize],
    ) -> Result<ContingencyView, DataError> {
        let arity = self.attributes[attribute]
            .arity()
            .ok_or_else(|| DataError::NotCategorical(self.attributes[attribute].name.clone()))?;
        let classes = self
            .class
            .as_ref()
            .ok_or(DataError::Unlabeled)?
            .labels
            .len();
        let mut counts = vec![vec![0u64; classes]; arity];
        for &r in rows {
            let class = self.class_values[r].ok_or(DataError::Unlabeled)?;
            if let Value::Cat(c) = self.rows[r][attribute] {
                counts[c][class] += 1;
            }
        }
        Ok(ContingencyView::new(attribute, (0..arity).collect(), counts)
            .expect("arity >= 1 and consistent rows"))
    }
}

/// Replace every missing categorical cell with the column's most common
/// observed label, ties to the earlier label in schema order.
pub fn impute_modal(dataset: &Dataset) -> Result<Dataset, DataError> {
    let mut out = dataset.clone();
    for a in 0..out.attributes.len() {
        let has_missing = out.rows.iter().any(|r| r[a] == Value::Missing);
        if !has_missing {
            continue;
        }
        let arity = match out.attributes[a].arity() {
            Some(arity) => arity,
            None => return Err(DataError::HasMissing(out.attributes[a].name.clone())),
        };
        let mut counts = vec![0u64; arity];
        for row in &out.rows {
            if let Value::Cat(c) = row[a] {
                counts[c] += 1;
            }
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(DataError::AllMissing(out.attributes[a].name.clone()));
        }
        let modal = crate::contingency::majority_index(&counts);
        for row in &mut out.rows {
            if row[a] == Value::Missing {
                row[a] = Value::Cat(modal);
            }
        }
    }
    Ok(out)
}

/// Replace a numeric attribute by `bins` equal-frequency categories.
///
/// Cut points are the empirical quantiles at ranks `j*N/bins` (integer
/// division over the sorted values); a value falls in bin `#cuts <= value`,
/// so bins are closed on the left. Heavy ties can make bin sizes unequal
/// or leave a bin empty, but every value is assigned.
pub fn discretize_equal_frequency(
    dataset: &Dataset,
    attribute: &str,
    bins: usize,
    labels: Option<Vec<String>>,
) -> Result<Dataset, DataError> {
    if bins < 2 {
        return Err(DataError::BadBinCount);
    }
    let a = dataset.attribute_index(attribute)?;
    let values = numeric_column(dataset, a)?;
    let mut sorted = values.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("no NaN in numeric column"));
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < bins {
        return Err(DataError::TooFewDistinct {
            name: attribute.to_string(),
            distinct: distinct.len(),
            need: bins,
        });
    }
    let n = sorted.len();
    let cuts: Vec<f64> = (1..bins).map(|j| sorted[j * n / bins]).collect();

    let labels = match labels {
        Some(l) => {
            assert_eq!(l.len(), bins, "need one label per bin");
            l
        }
        None if bins == 3 => vec!["L".into(), "M".into(), "H".into()],
        None => (1..=bins).map(|i| format!("Q{i}")).collect(),
    };

    let mut out = dataset.clone();
    out.attributes[a].kind = AttrKind::Categorical {
        labels: labels.clone(),
    };
    for (row, &v) in out.rows.iter_mut().zip(&values) {
        let bin = cuts.iter().filter(|&&c| c <= v).count();
        row[a] = Value::Cat(bin);
    }
    Ok(out)
}

/// Result of binarizing one numeric attribute: the chosen threshold and
/// the scores it achieved, for logging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinarizeInfo {
    pub threshold: f64,
    pub gain_ratio: f64,
    pub information_gain: f64,
}

/// Replace a numeric attribute by the two categories `<=t` and `>t`,
/// choosing the threshold `t` among midpoints of consecutive distinct
/// values that maximizes gain ratio against the class over the full
/// dataset. Ties go to the smallest threshold.
pub fn binarize_by_gain_ratio(
    dataset: &Dataset,
    attribute: &str,
) -> Result<(Dataset, BinarizeInfo), DataError> {
    let a = dataset.attribute_index(attribute)?;
    let values = numeric_column(dataset, a)?;
    let classes = dataset
        .class
        .as_ref()
        .ok_or(DataError::Unlabeled)?
        .labels
        .len();
    let mut distinct = values.clone();
    distinct.sort_by(|x, y| x.partial_cmp(y).expect("no NaN in numeric column"));
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(DataError::TooFewDistinct {
            name: attribute.to_string(),
            distinct: distinct.len(),
            need: 2,
        });
    }

    let mut best: Option<BinarizeInfo> = None;
    for pair in distinct.windows(2) {
        let threshold = (pair[0] + pair[1]) / 2.0;
        let mut counts = vec![vec![0u64; classes]; 2];
        for (r, &v) in values.iter().enumerate() {
            let side = usize::from(v > threshold);
            let class = dataset.class_values[r].ok_or(DataError::Unlabeled)?;
            counts[side][class] += 1;
        }
        let view = ContingencyView::new(a, vec![0, 1], counts).expect("two fixed categories");
        let candidate = BinarizeInfo {
            threshold,
            gain_ratio: gain_ratio(&view),
            information_gain: information_gain(&view),
        };
        if best.as_ref().is_none_or(|b| candidate.gain_ratio > b.gain_ratio) {
            best = Some(candidate);
        }
    }
    let info = best.expect("at least one candidate threshold");

    let mut out = dataset.clone();
    out.attributes[a].kind = AttrKind::Categorical {
        labels: vec![format!("<={}", info.threshold), format!(">{}", info.threshold)],
    };
    for (row, &v) in out.rows.iter_mut().zip(&values) {
        row[a] = Value::Cat(usize::from(v > info.threshold));
    }
    Ok((out, info))
}

fn numeric_column(dataset: &Dataset, attribute: usize) -> Result<Vec<f64>, DataError> {
    let name = &dataset.attributes[attribute].name;
    dataset
        .rows
        .iter()
        .map(|row| match row[attribute] {
            Value::Num(x) => Ok(x),
            Value::Missing => Err(DataError::HasMissing(name.clone())),
            Value::Cat(_) => Err(DataError::NotNumeric(name.clone())),
        })
        .collect()
}
