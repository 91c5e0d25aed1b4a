//! Tabular input handling: CSV loading, imputation, MDL discretization and
//! stratified fold plans.
//!
//! The pipeline is `RawTable` (mixed numeric/categorical cells, possibly
//! missing) -> `Imputer` -> `Discretizer` -> `Dataset` (dense category
//! indices). Imputation and discretization are split into `fit` and `apply`
//! steps so that cross-validation can learn their statistics from the
//! training rows only.

mod discretize;
mod folds;
mod impute;
mod table;

pub use discretize::{discretize_mdl, mdl_cut_points, Discretizer};
pub use folds::{make_folds, stratified_folds, FoldPlan, Split};
pub use impute::{impute, Fill, Imputer};
pub use table::{is_missing_marker, load_csv, read_csv, Column, ColumnKind, RawTable, Schema};

use crate::error::{Error, Result};

/// Fully categorical instance table.
///
/// Every feature and the class are coded as dense indices below their
/// declared cardinality. Instances are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    feature_labels: Vec<Vec<String>>,
    class_labels: Vec<String>,
    classes: Vec<usize>,
    values: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from coded rows, checking every index against the
    /// label dictionaries.
    pub fn new(
        feature_names: Vec<String>,
        feature_labels: Vec<Vec<String>>,
        class_labels: Vec<String>,
        classes: Vec<usize>,
        rows: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let k = feature_names.len();
        if k == 0 {
            return Err(Error::Config("dataset needs at least one feature".into()));
        }
        if feature_labels.len() != k {
            return Err(Error::Config(format!(
                "{} feature names but {} label dictionaries",
                k,
                feature_labels.len()
            )));
        }
        if classes.is_empty() {
            return Err(Error::Config("dataset needs at least one instance".into()));
        }
        if class_labels.is_empty() || feature_labels.iter().any(|l| l.is_empty()) {
            return Err(Error::Config(
                "every variable needs at least one state".into(),
            ));
        }
        if rows.len() != classes.len() {
            return Err(Error::Config(format!(
                "{} class values but {} feature rows",
                classes.len(),
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * k);
        for (i, (row, &c)) in rows.iter().zip(&classes).enumerate() {
            if c >= class_labels.len() {
                return Err(Error::Parse {
                    row: i,
                    message: format!("class index {c} out of range"),
                });
            }
            if row.len() != k {
                return Err(Error::Parse {
                    row: i,
                    message: format!("expected {k} features, found {}", row.len()),
                });
            }
            for (f, &v) in row.iter().enumerate() {
                if v >= feature_labels[f].len() {
                    return Err(Error::Parse {
                        row: i,
                        message: format!("feature `{}` index {v} out of range", feature_names[f]),
                    });
                }
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            feature_names,
            feature_labels,
            class_labels,
            classes,
            values,
        })
    }

    /// Number of instances.
    pub fn n(&self) -> usize {
        self.classes.len()
    }

    /// Number of features.
    pub fn k(&self) -> usize {
        self.feature_names.len()
    }

    /// Number of class states.
    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn cardinality(&self, feature: usize) -> usize {
        self.feature_labels[feature].len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.feature_labels.iter().map(Vec::len).collect()
    }

    pub fn class(&self, i: usize) -> usize {
        self.classes[i]
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn features(&self, i: usize) -> &[usize] {
        let k = self.k();
        &self.values[i * k..(i + 1) * k]
    }

    /// Iterates over `(class, features)` pairs.
    pub fn instances(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.classes
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.k()))
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_labels(&self, feature: usize) -> &[String] {
        &self.feature_labels[feature]
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.classes {
            counts[c] += 1;
        }
        counts
    }

    /// Restriction to the given instances, keeping all dictionaries.
    ///
    /// Panics if `indices` is empty.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        assert!(!indices.is_empty(), "a dataset subset must be nonempty");
        let k = self.k();
        let mut values = Vec::with_capacity(indices.len() * k);
        for &i in indices {
            values.extend_from_slice(self.features(i));
        }
        Dataset {
            feature_names: self.feature_names.clone(),
            feature_labels: self.feature_labels.clone(),
            class_labels: self.class_labels.clone(),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
            values,
        }
    }

    /// Appends the instances of `other`, which must share all dictionaries.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.feature_labels != other.feature_labels || self.class_labels != other.class_labels {
            return Err(Error::Config(
                "datasets with different dictionaries cannot be concatenated".into(),
            ));
        }
        let mut out = self.clone();
        out.classes.extend_from_slice(&other.classes);
        out.values.extend_from_slice(&other.values);
        Ok(out)
    }
}
