//! Relational image of a specification: a data table, a style table of
//! flattened property paths, and a mapping table linking style properties
//! to data columns.

mod key;
mod links;
mod path;
mod table;

pub use key::{infer_primary_key, MAX_KEY_WIDTH};
pub use links::{derived_fields, field_references, is_field_reference, is_output_declaration};
pub use path::{flatten, unflatten, PathError, PropertyPath, Segment, StyleValue, SEPARATOR};
pub use table::{Column, DataTable, Link, MappingTable, Provenance, StyleRow, StyleTable};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::spec::{data_field_types, DataSource, SpecError, VizSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("inconsistent relational representation: {0}")]
    Inconsistent(String),
}

/// The data/style/mapping triple.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelViz {
    pub data: DataTable,
    pub style: StyleTable,
    pub mapping: MappingTable,
    pub warnings: Vec<String>,
}

impl RelViz {
    pub fn new(data: DataTable, style: StyleTable) -> Self {
        let mut rel = RelViz {
            data,
            style,
            mapping: MappingTable::default(),
            warnings: Vec::new(),
        };
        rel.relink();
        rel
    }

    /// Rebuilds the mapping table from the style and data tables.
    pub fn relink(&mut self) {
        self.mapping = MappingTable {
            links: field_references(&self.style)
                .into_iter()
                .filter(|(_, name)| self.data.column_index(name).is_some())
                .map(|(path, column)| Link { path, column })
                .collect(),
        };
    }

    /// Links whose column is absent from the data table.
    pub fn dangling_links(&self) -> Vec<&Link> {
        self.mapping
            .links
            .iter()
            .filter(|l| {
                self.data.column_index(&l.column).is_none() || self.style.get(&l.path).is_none()
            })
            .collect()
    }

    /// Drops the data table and its links, keeping only style.
    pub fn style_only(&self) -> RelViz {
        RelViz {
            data: DataTable::default(),
            style: self.style.clone(),
            mapping: MappingTable::default(),
            warnings: Vec::new(),
        }
    }

    /// Encoding channels present in the style table, in first-seen order.
    pub fn channels(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for row in self.style.rows() {
            let segs = row.path.segments();
            if let (Some(Segment::Key(root)), Some(Segment::Key(ch))) = (segs.first(), segs.get(1))
            {
                if root == "encoding" && !seen.contains(ch) {
                    seen.push(ch.clone());
                }
            }
        }
        seen
    }

    /// Compares the reconstructed documents, ignoring row order in the style
    /// table and provenance tags.
    pub fn same_content(&self, other: &RelViz) -> bool {
        match (to_spec(self), to_spec(other)) {
            (Ok(a), Ok(b)) => a.to_json() == b.to_json(),
            _ => false,
        }
    }
}

/// Converts a spec to its relational image.
///
/// Unless `keep_unencoded` is set, data columns that no style property
/// references are dropped. A spec with no field references at all keeps
/// every column, since dropping them would discard its data entirely.
pub fn from_spec(spec: &VizSpec, keep_unencoded: bool) -> Result<RelViz, RelError> {
    let mut doc = spec.to_json();
    let mut warnings = Vec::new();
    let mut data = DataTable::default();
    if let DataSource::Inline(inline) = &spec.data {
        let types = data_field_types(spec)?;
        let names = inline.field_names();
        data = DataTable::new(
            names
                .iter()
                .map(|n| Column::new(n.clone(), types[n.as_str()]))
                .collect(),
        );
        for record in &inline.records {
            let row = names
                .iter()
                .map(|n| {
                    record
                        .get(n)
                        .cloned()
                        .unwrap_or(crate::value::ScalarValue::Null)
                })
                .collect();
            data.push_row(row).expect("row built from column list");
        }
        if !inline.records.is_empty() {
            let root = doc.as_object_mut().expect("spec serializes to an object");
            let data_obj = root
                .get_mut("data")
                .and_then(Value::as_object_mut)
                .expect("inline data is an object");
            data_obj.remove("values");
            if data_obj.is_empty() {
                root.remove("data");
            }
        }
    } else if matches!(spec.data, DataSource::External(_)) {
        warnings.push("data is not inline; data table is empty".to_string());
    }
    let style = StyleTable::from_rows(
        flatten(&doc)?
            .into_iter()
            .map(|(path, value)| StyleRow { path, value })
            .collect(),
    )?;
    let mut rel = RelViz::new(data, style);
    rel.warnings = warnings;
    if !keep_unencoded && !rel.mapping.links.is_empty() {
        let used: Vec<String> = rel.mapping.links.iter().map(|l| l.column.clone()).collect();
        rel.data = rel.data.project(|c| used.contains(&c.name));
    }
    Ok(rel)
}

/// Rebuilds the nested document.
pub fn to_spec(rel: &RelViz) -> Result<VizSpec, RelError> {
    if let Some(link) = rel.dangling_links().first() {
        return Err(RelError::Inconsistent(format!(
            "mapping link `{}` -> `{}` is dangling",
            link.path, link.column
        )));
    }
    let mut tree = unflatten(rel.style.rows().iter().map(|r| (&r.path, &r.value)))?;
    if !rel.data.columns.is_empty() || !rel.data.rows.is_empty() {
        let root = tree.as_object_mut().expect("unflatten yields an object");
        let data = root
            .entry("data")
            .or_insert_with(|| Value::Object(Map::new()));
        let Value::Object(data) = data else {
            return Err(RelError::Inconsistent(
                "`data` style property is not an object".into(),
            ));
        };
        data.insert("values".into(), Value::Array(rel.data.records()));
    }
    Ok(VizSpec::from_json(&tree)?)
}
