use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// Per-column kind overrides applied on top of inference.
pub type Schema = HashMap<String, ColumnKind>;

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl Column {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Numeric(_) => ColumnKind::Numeric,
            Column::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Numeric(v) => v[row].is_none(),
            Column::Categorical(v) => v[row].is_none(),
        }
    }

    pub fn missing_count(&self) -> usize {
        (0..self.len()).filter(|&r| self.is_missing(r)).count()
    }
}

/// Column-oriented table as read from disk.
///
/// The class column is always categorical and never missing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    names: Vec<String>,
    columns: Vec<Column>,
    class_column: usize,
}

/// `""`, `"?"` and `"NA"` (any case) mark a missing cell.
pub fn is_missing_marker(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na")
}

impl RawTable {
    pub fn new(names: Vec<String>, columns: Vec<Column>, class_column: usize) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Config(format!(
                "{} column names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if class_column >= columns.len() {
            return Err(Error::Config("class column index out of range".into()));
        }
        if columns.len() < 2 {
            return Err(Error::Config(
                "need a class column and at least one feature".into(),
            ));
        }
        let n = columns[0].len();
        if let Some(i) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::Config(format!(
                "column `{}` has a different length",
                names[i]
            )));
        }
        match &columns[class_column] {
            Column::Categorical(values) => {
                if let Some(row) = values.iter().position(Option::is_none) {
                    return Err(Error::MissingClass { row });
                }
            }
            Column::Numeric(_) => {
                return Err(Error::Config("the class column must be categorical".into()))
            }
        }
        Ok(Self {
            names,
            columns,
            class_column,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn kinds(&self) -> Vec<ColumnKind> {
        self.columns.iter().map(Column::kind).collect()
    }

    pub fn class_column(&self) -> usize {
        self.class_column
    }

    pub fn class_name(&self) -> &str {
        &self.names[self.class_column]
    }

    /// Indices of the feature columns, in file order.
    pub fn feature_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&c| c != self.class_column)
            .collect()
    }

    pub fn class_values(&self) -> impl Iterator<Item = &str> + '_ {
        match &self.columns[self.class_column] {
            Column::Categorical(values) => values.iter().map(|v| v.as_deref().unwrap_or("")),
            Column::Numeric(_) => unreachable!("class column is categorical"),
        }
    }

    /// Class labels in order of first appearance.
    pub fn class_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for v in self.class_values() {
            if !labels.iter().any(|l| l == v) {
                labels.push(v.to_string());
            }
        }
        labels
    }

    /// Class of every row, coded against `class_labels()`.
    pub fn class_codes(&self) -> Vec<usize> {
        let labels = self.class_labels();
        let index: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        self.class_values().map(|v| index[v]).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(Column::missing_count).sum()
    }

    pub(crate) fn with_columns(&self, columns: Vec<Column>) -> RawTable {
        RawTable {
            names: self.names.clone(),
            columns,
            class_column: self.class_column,
        }
    }
}

/// Loads a comma-separated file with a header row.
pub fn load_csv(path: impl AsRef<Path>, class_column: &str, schema: &Schema) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, class_column, schema)
}

/// Parses CSV text. Row numbers in errors count the header as row 1.
pub fn read_csv<R: Read>(reader: R, class_column: &str, schema: &Schema) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let class_idx = names
        .iter()
        .position(|n| n == class_column)
        .ok_or_else(|| {
            Error::Config(format!(
                "class column `{class_column}` not found; columns are: {}",
                names.join(", ")
            ))
        })?;
    for key in schema.keys() {
        if !names.contains(key) {
            return Err(Error::Config(format!(
                "schema names unknown column `{key}`"
            )));
        }
    }

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); names.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != names.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let value = (!is_missing_marker(cell)).then(|| cell.trim().to_string());
            if c == class_idx && value.is_none() {
                return Err(Error::MissingClass { row });
            }
            cells[c].push(value);
        }
    }
    if cells[0].is_empty() {
        return Err(Error::Parse {
            row: 2,
            message: "no data rows".into(),
        });
    }

    let mut columns = Vec::with_capacity(names.len());
    for (c, values) in cells.into_iter().enumerate() {
        let kind = if c == class_idx {
            ColumnKind::Categorical
        } else if let Some(&kind) = schema.get(&names[c]) {
            kind
        } else if values.iter().flatten().all(|v| v.parse::<f64>().is_ok()) {
            ColumnKind::Numeric
        } else {
            ColumnKind::Categorical
        };
        columns.push(match kind {
            ColumnKind::Categorical => Column::Categorical(values),
            ColumnKind::Numeric => {
                let mut parsed = Vec::with_capacity(values.len());
                for (r, v) in values.into_iter().enumerate() {
                    parsed.push(match v {
                        None => None,
                        Some(s) => Some(s.parse::<f64>().map_err(|_| Error::Parse {
                            row: r + 2,
                            message: format!("`{s}` in numeric column `{}`", names[c]),
                        })?),
                    });
                }
                Column::Numeric(parsed)
            }
        });
    }
    RawTable::new(names, columns, class_idx)
}
