use std::collections::HashMap;

use crate::dataset::table::{Column, RawTable};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Coding {
    /// Sorted cut points; a value maps to the number of cuts strictly below it.
    Intervals(Vec<f64>),
    Labels(Vec<String>),
}

/// Maps an imputed `RawTable` onto category indices.
///
/// Numeric cut points are learned from the rows passed to [`Discretizer::fit`];
/// categorical dictionaries (and the class dictionary) cover every value in
/// the table, so rows outside the fitting subset are always encodable.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretizer {
    feature_columns: Vec<usize>,
    codings: Vec<Coding>,
    class_labels: Vec<String>,
}

impl Discretizer {
    pub fn fit(table: &RawTable, rows: &[usize]) -> Result<Self> {
        let class_labels = table.class_labels();
        let class_codes = table.class_codes();
        let feature_columns = table.feature_columns();
        let mut codings = Vec::with_capacity(feature_columns.len());
        for &c in &feature_columns {
            codings.push(match table.column(c) {
                Column::Numeric(values) => {
                    let mut xs = Vec::with_capacity(rows.len());
                    let mut ys = Vec::with_capacity(rows.len());
                    for &r in rows {
                        let v = values[r].ok_or_else(|| missing_error(table, r, c))?;
                        xs.push(v);
                        ys.push(class_codes[r]);
                    }
                    Coding::Intervals(mdl_cut_points(&xs, &ys, class_labels.len()))
                }
                Column::Categorical(values) => {
                    let mut labels: Vec<String> = Vec::new();
                    for v in values.iter().flatten() {
                        if !labels.contains(v) {
                            labels.push(v.clone());
                        }
                    }
                    Coding::Labels(labels)
                }
            });
        }
        Ok(Self {
            feature_columns,
            codings,
            class_labels,
        })
    }

    /// Cut points of every feature (empty for categorical features).
    pub fn cut_points(&self) -> Vec<&[f64]> {
        self.codings
            .iter()
            .map(|c| match c {
                Coding::Intervals(cuts) => cuts.as_slice(),
                Coding::Labels(_) => &[],
            })
            .collect()
    }

    /// Encodes all rows of `table`.
    pub fn transform(&self, table: &RawTable) -> Result<Dataset> {
        let rows: Vec<usize> = (0..table.n_rows()).collect();
        self.transform_rows(table, &rows)
    }

    /// Encodes the given rows of `table`, which must have the layout the
    /// discretizer was fitted on.
    pub fn transform_rows(&self, table: &RawTable, rows: &[usize]) -> Result<Dataset> {
        let names: Vec<String> = self
            .feature_columns
            .iter()
            .map(|&c| table.names()[c].clone())
            .collect();
        let labels: Vec<Vec<String>> = self.codings.iter().map(coding_labels).collect();
        let lookups: Vec<Option<HashMap<&str, usize>>> = self
            .codings
            .iter()
            .map(|c| match c {
                Coding::Labels(l) => {
                    Some(l.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect())
                }
                Coding::Intervals(_) => None,
            })
            .collect();
        let class_index: HashMap<&str, usize> = self
            .class_labels
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let class_values: Vec<&str> = table.class_values().collect();

        let mut classes = Vec::with_capacity(rows.len());
        let mut coded = Vec::with_capacity(rows.len());
        for &r in rows {
            let class = *class_index
                .get(class_values[r])
                .ok_or_else(|| Error::Parse {
                    row: r,
                    message: format!("unknown class value `{}`", class_values[r]),
                })?;
            classes.push(class);
            let mut row = Vec::with_capacity(self.codings.len());
            for (f, &c) in self.feature_columns.iter().enumerate() {
                let index = match (&self.codings[f], table.column(c), &lookups[f]) {
                    (Coding::Intervals(cuts), Column::Numeric(values), _) => {
                        let v = values[r].ok_or_else(|| missing_error(table, r, c))?;
                        interval_index(cuts, v)
                    }
                    (Coding::Labels(_), Column::Categorical(values), Some(lookup)) => {
                        let v = values[r]
                            .as_deref()
                            .ok_or_else(|| missing_error(table, r, c))?;
                        *lookup.get(v).ok_or_else(|| Error::Parse {
                            row: r,
                            message: format!(
                                "unknown value `{v}` in column `{}`",
                                table.names()[c]
                            ),
                        })?
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "column `{}` changed kind since fitting",
                            table.names()[c]
                        )))
                    }
                };
                row.push(index);
            }
            coded.push(row);
        }
        Dataset::new(names, labels, self.class_labels.clone(), classes, coded)
    }
}

/// Discretizes every numeric column with cut points learned on all rows.
pub fn discretize_mdl(table: &RawTable) -> Result<Dataset> {
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    Discretizer::fit(table, &rows)?.transform(table)
}

fn missing_error(table: &RawTable, row: usize, column: usize) -> Error {
    Error::Parse {
        row,
        message: format!(
            "missing value in column `{}`; impute before discretizing",
            table.names()[column]
        ),
    }
}

fn interval_index(cuts: &[f64], v: f64) -> usize {
    cuts.partition_point(|&c| c < v)
}

fn coding_labels(coding: &Coding) -> Vec<String> {
    match coding {
        Coding::Labels(l) => l.clone(),
        Coding::Intervals(cuts) if cuts.is_empty() => vec!["(-inf, inf)".to_string()],
        Coding::Intervals(cuts) => {
            let mut out = Vec::with_capacity(cuts.len() + 1);
            out.push(format!("(-inf, {}]", cuts[0]));
            for w in cuts.windows(2) {
                out.push(format!("({}, {}]", w[0], w[1]));
            }
            out.push(format!("({}, inf)", cuts[cuts.len() - 1]));
            out
        }
    }
}

fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn present(counts: &[usize]) -> i32 {
    counts.iter().filter(|&&c| c > 0).count() as i32
}

/// Recursive minimum-description-length cut points for one numeric column.
///
/// Candidate cuts are midpoints between adjacent distinct values that form a
/// class boundary. The best cut (minimum weighted class entropy) is kept when
/// its information gain exceeds `(log2(N-1) + log2(3^c - 2) - c*E + c1*E1 + c2*E2) / N`,
/// and both halves are split again.
pub fn mdl_cut_points(values: &[f64], classes: &[usize], n_classes: usize) -> Vec<f64> {
    assert_eq!(values.len(), classes.len());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    // Collapse equal values into groups with class histograms.
    let mut group_values: Vec<f64> = Vec::new();
    let mut group_counts: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        if group_values.last() != Some(&values[i]) {
            group_values.push(values[i]);
            group_counts.push(vec![0; n_classes]);
        }
        group_counts.last_mut().unwrap()[classes[i]] += 1;
    }

    let mut cuts = Vec::new();
    split_range(
        &group_values,
        &group_counts,
        0,
        group_values.len(),
        &mut cuts,
    );
    cuts.sort_by(f64::total_cmp);
    cuts
}

fn is_boundary(left: &[usize], right: &[usize]) -> bool {
    let pure = |c: &[usize]| {
        let mut it = c.iter().enumerate().filter(|(_, &n)| n > 0);
        match (it.next(), it.next()) {
            (Some((class, _)), None) => Some(class),
            _ => None,
        }
    };
    match (pure(left), pure(right)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    }
}

fn split_range(
    values: &[f64],
    counts: &[Vec<usize>],
    start: usize,
    end: usize,
    cuts: &mut Vec<f64>,
) {
    if end - start < 2 {
        return;
    }
    let n_classes = counts[start].len();
    let mut total = vec![0usize; n_classes];
    for g in &counts[start..end] {
        for (t, &c) in total.iter_mut().zip(g) {
            *t += c;
        }
    }
    let n: usize = total.iter().sum();
    let nf = n as f64;
    let ent = entropy(&total);

    let mut left = vec![0usize; n_classes];
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for g in start..end - 1 {
        for (l, &c) in left.iter_mut().zip(&counts[g]) {
            *l += c;
        }
        if !is_boundary(&counts[g], &counts[g + 1]) {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let nl: usize = left.iter().sum();
        let weighted = (nl as f64 * entropy(&left) + (n - nl) as f64 * entropy(&right)) / nf;
        if best.as_ref().is_none_or(|(w, _, _)| weighted < *w) {
            best = Some((weighted, g, left.clone()));
        }
    }
    let Some((weighted, g, left)) = best else {
        return;
    };
    let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
    let gain = ent - weighted;
    let (c, c1, c2) = (present(&total), present(&left), present(&right));
    let delta = (3f64.powi(c) - 2.0).log2()
        - (c as f64 * ent - c1 as f64 * entropy(&left) - c2 as f64 * entropy(&right));
    let threshold = ((nf - 1.0).log2() + delta) / nf;
    if gain > threshold {
        cuts.push((values[g] + values[g + 1]) / 2.0);
        split_range(values, counts, start, g + 1, cuts);
        split_range(values, counts, g + 1, end, cuts);
    }
}
