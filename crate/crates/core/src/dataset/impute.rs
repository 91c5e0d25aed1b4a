use crate::dataset::table::{Column, RawTable};
use crate::error::{Error, Result};

/// Value used to fill the missing cells of one column.
#[derive(Debug, Clone, PartialEq)]
pub enum Fill {
    Number(f64),
    Label(String),
}

/// Median/mode statistics learned from a subset of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputer {
    fills: Vec<Option<Fill>>,
}

impl Imputer {
    /// Learns one fill value per feature column from `rows`.
    pub fn fit(table: &RawTable, rows: &[usize]) -> Result<Self> {
        let mut fills = Vec::with_capacity(table.columns().len());
        for (c, column) in table.columns().iter().enumerate() {
            if c == table.class_column() {
                fills.push(None);
                continue;
            }
            let fill = match column {
                Column::Numeric(values) => {
                    let mut seen: Vec<f64> = rows.iter().filter_map(|&r| values[r]).collect();
                    median(&mut seen).map(Fill::Number)
                }
                Column::Categorical(values) => {
                    mode(rows.iter().filter_map(|&r| values[r].as_deref())).map(Fill::Label)
                }
            };
            match fill {
                Some(f) => fills.push(Some(f)),
                None => return Err(Error::EmptyColumn(table.names()[c].clone())),
            }
        }
        Ok(Self { fills })
    }

    pub fn fill(&self, column: usize) -> Option<&Fill> {
        self.fills[column].as_ref()
    }

    /// Fills every missing cell of `table`.
    pub fn apply(&self, table: &RawTable) -> RawTable {
        let columns = table
            .columns()
            .iter()
            .zip(&self.fills)
            .map(|(column, fill)| match (column, fill) {
                (Column::Numeric(values), Some(Fill::Number(x))) => {
                    Column::Numeric(values.iter().map(|v| Some(v.unwrap_or(*x))).collect())
                }
                (Column::Categorical(values), Some(Fill::Label(l))) => Column::Categorical(
                    values
                        .iter()
                        .map(|v| Some(v.clone().unwrap_or_else(|| l.clone())))
                        .collect(),
                ),
                (column, _) => column.clone(),
            })
            .collect();
        table.with_columns(columns)
    }
}

/// Replaces missing cells by the column median (numeric) or mode
/// (categorical), computed over all rows.
pub fn impute(table: &RawTable) -> Result<RawTable> {
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    Ok(Imputer::fit(table, &rows)?.apply(table))
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Most frequent value; ties go to the value seen first.
fn mode<'a>(values: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for v in values {
        match counts.iter_mut().find(|(l, _)| *l == v) {
            Some((_, n)) => *n += 1,
            None => counts.push((v, 1)),
        }
    }
    let mut best: Option<(&str, usize)> = None;
    for (label, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.map(|(l, _)| l.to_string())
}
