use std::io;

use serde_json::{Map, Value};

use super::path::{PathError, PropertyPath, StyleValue};
use crate::value::{FieldType, ScalarValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub field_type: FieldType,
}

impl Column {
    pub fn new(name: impl Into<String>, field_type: FieldType) -> Self {
        Column {
            name: name.into(),
            field_type,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Left,
    Right,
    Merged,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<ScalarValue>>,
    pub provenance: Option<Provenance>,
}

impl DataTable {
    pub fn new(columns: Vec<Column>) -> Self {
        DataTable {
            columns,
            rows: Vec::new(),
            provenance: None,
        }
    }

    pub fn with_rows(columns: Vec<Column>, rows: Vec<Vec<ScalarValue>>) -> Self {
        let mut t = DataTable::new(columns);
        for row in rows {
            t.push_row(row).expect("row arity matches columns");
        }
        t
    }

    pub fn push_row(&mut self, row: Vec<ScalarValue>) -> Result<(), String> {
        if row.len() != self.columns.len() {
            return Err(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty() && self.rows.is_empty()
    }

    pub fn cells<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a ScalarValue> + 'a {
        let idx = self.column_index(name);
        self.rows.iter().filter_map(move |r| idx.map(|i| &r[i]))
    }

    /// Keeps the columns selected by `keep`, in their current order.
    pub fn project(&self, keep: impl Fn(&Column) -> bool) -> DataTable {
        let idx: Vec<usize> = (0..self.columns.len())
            .filter(|&i| keep(&self.columns[i]))
            .collect();
        DataTable {
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
                .collect(),
            provenance: self.provenance,
        }
    }

    /// Rows as JSON records in column order.
    pub fn records(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.name.clone(), v.to_json());
                }
                Value::Object(m)
            })
            .collect()
    }

    /// Writes the table as CSV with a header row; nulls become empty cells.
    pub fn write_csv<W: io::Write>(
        &self,
        out: W,
        extra: Option<(&str, &[&str])>,
    ) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.column_names();
        if let Some((name, _)) = extra {
            header.push(name);
        }
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut cells: Vec<String> = row.iter().map(csv_cell).collect();
            if let Some((_, values)) = extra {
                cells.push(values[i].to_string());
            }
            w.write_record(&cells)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_cell(v: &ScalarValue) -> String {
    match v {
        ScalarValue::Null => String::new(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StyleRow {
    pub path: PropertyPath,
    pub value: StyleValue,
}

impl StyleRow {
    pub fn new(path: impl Into<PropertyPath>, value: StyleValue) -> Self {
        StyleRow {
            path: path.into(),
            value,
        }
    }
}

/// Property-path keyed rows; paths are unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StyleTable {
    rows: Vec<StyleRow>,
}

impl StyleTable {
    pub fn from_rows(rows: Vec<StyleRow>) -> Result<Self, PathError> {
        let mut t = StyleTable::default();
        for row in rows {
            if t.get(&row.path).is_some() {
                return Err(PathError::Inconsistent {
                    path: row.path.to_string(),
                    reason: "duplicate property".into(),
                });
            }
            t.rows.push(row);
        }
        Ok(t)
    }

    pub fn rows(&self) -> &[StyleRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, path: &PropertyPath) -> Option<&StyleValue> {
        self.rows.iter().find(|r| &r.path == path).map(|r| &r.value)
    }

    /// Inserts or replaces the value at `path`.
    pub fn set(&mut self, path: PropertyPath, value: StyleValue) {
        match self.rows.iter_mut().find(|r| r.path == path) {
            Some(row) => row.value = value,
            None => self.rows.push(StyleRow { path, value }),
        }
    }

    pub fn remove(&mut self, path: &PropertyPath) -> Option<StyleValue> {
        let pos = self.rows.iter().position(|r| &r.path == path)?;
        Some(self.rows.remove(pos).value)
    }

    pub fn write_csv<W: io::Write>(
        rows: &[StyleRow],
        out: W,
        extra: Option<(&str, &[&str])>,
    ) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["property", "value"];
        if let Some((name, _)) = extra {
            header.push(name);
        }
        w.write_record(&header)?;
        for (i, row) in rows.iter().enumerate() {
            let mut cells = vec![row.path.to_string(), row.value.to_json().to_string()];
            if let Some((_, values)) = extra {
                cells.push(values[i].to_string());
            }
            w.write_record(&cells)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Link {
    pub path: PropertyPath,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MappingTable {
    pub links: Vec<Link>,
}

impl MappingTable {
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["property", "column"])?;
        for link in &self.links {
            w.write_record([link.path.to_string(), link.column.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}
