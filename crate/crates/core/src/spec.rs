//! Typed model of single-view Vega-Lite specifications.
//!
//! Only `data`, `transform`, `mark` and `encoding` are modelled; everything
//! else is carried verbatim in [`VizSpec::other`] so that a parsed document
//! serializes back to an equal one.

use indexmap::IndexMap;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::value::{FieldType, ScalarValue};

/// Top-level properties that introduce multi-view composition.
pub const COMPOSITION_KEYS: [&str; 6] =
    ["hconcat", "vconcat", "concat", "layer", "facet", "repeat"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported specification: top-level `{0}` composition")]
    Unsupported(String),
    #[error("specification has no inline data")]
    NoInlineData,
}

pub type Record = IndexMap<String, ScalarValue>;

/// Inline tabular data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InlineData {
    pub records: Vec<Record>,
    /// Remaining properties of the `data` object (`name`, `format`, ...).
    pub extras: Map<String, Value>,
    /// Per-field types; empty until [`infer_field_types`] runs.
    pub field_types: IndexMap<String, FieldType>,
}

impl InlineData {
    /// Field names in order of first appearance.
    pub fn field_names(&self) -> Vec<String> {
        let mut names: IndexMap<&str, ()> = IndexMap::new();
        for record in &self.records {
            for key in record.keys() {
                names.entry(key.as_str()).or_insert(());
            }
        }
        names.into_keys().map(str::to_string).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum DataSource {
    #[default]
    Absent,
    Inline(InlineData),
    /// URL, named, generated or non-tabular inline data, kept verbatim.
    External(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mark {
    Type(String),
    Def {
        mark_type: Option<String>,
        props: Map<String, Value>,
    },
}

impl Mark {
    pub fn mark_type(&self) -> Option<&str> {
        match self {
            Mark::Type(t) => Some(t),
            Mark::Def { mark_type, .. } => mark_type.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingDef {
    pub channel: String,
    pub field: Option<String>,
    pub field_type: Option<FieldType>,
    /// Residual channel properties (`aggregate`, `scale`, `axis`, ...).
    pub extras: Map<String, Value>,
    /// Set when the channel holds a list of definitions (e.g. `tooltip`).
    pub list: Option<Vec<Value>>,
}

impl EncodingDef {
    pub fn new(channel: impl Into<String>) -> Self {
        EncodingDef {
            channel: channel.into(),
            field: None,
            field_type: None,
            extras: Map::new(),
            list: None,
        }
    }

    pub fn with_field(mut self, field: impl Into<String>, ty: FieldType) -> Self {
        self.field = Some(field.into());
        self.field_type = Some(ty);
        self
    }

    fn from_json(channel: &str, value: &Value) -> Result<Self, SpecError> {
        if channel.is_empty() {
            return Err(SpecError::Syntax("empty encoding channel".into()));
        }
        let mut def = EncodingDef::new(channel);
        match value {
            Value::Object(map) => {
                for (k, v) in map {
                    match (k.as_str(), v) {
                        ("field", Value::String(s)) => def.field = Some(s.clone()),
                        ("type", Value::String(s)) if FieldType::parse(s).is_some() => {
                            def.field_type = FieldType::parse(s)
                        }
                        _ => {
                            def.extras.insert(k.clone(), v.clone());
                        }
                    }
                }
            }
            Value::Array(items) => def.list = Some(items.clone()),
            other => {
                return Err(SpecError::Syntax(format!(
                    "encoding channel `{channel}` must be an object or array, found {other}"
                )))
            }
        }
        Ok(def)
    }

    fn to_json(&self) -> Value {
        if let Some(items) = &self.list {
            return Value::Array(items.clone());
        }
        let mut map = self.extras.clone();
        if let Some(field) = &self.field {
            map.insert("field".into(), Value::String(field.clone()));
        }
        if let Some(ty) = self.field_type {
            map.insert("type".into(), Value::String(ty.as_str().into()));
        }
        Value::Object(map)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VizSpec {
    pub data: DataSource,
    pub transform: Vec<Value>,
    /// Whether the document carried a `transform` key (possibly empty).
    pub has_transform: bool,
    pub mark: Option<Mark>,
    pub encoding: IndexMap<String, EncodingDef>,
    pub has_encoding: bool,
    pub other: Map<String, Value>,
}

impl VizSpec {
    pub fn inline_data(&self) -> Result<&InlineData, SpecError> {
        match &self.data {
            DataSource::Inline(d) => Ok(d),
            _ => Err(SpecError::NoInlineData),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        match &self.data {
            DataSource::Absent => {}
            DataSource::External(v) => {
                root.insert("data".into(), v.clone());
            }
            DataSource::Inline(d) => {
                let mut obj = d.extras.clone();
                let values = d
                    .records
                    .iter()
                    .map(|r| {
                        Value::Object(r.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
                    })
                    .collect();
                obj.insert("values".into(), Value::Array(values));
                root.insert("data".into(), Value::Object(obj));
            }
        }
        if self.has_transform || !self.transform.is_empty() {
            root.insert("transform".into(), Value::Array(self.transform.clone()));
        }
        match &self.mark {
            None => {}
            Some(Mark::Type(t)) => {
                root.insert("mark".into(), Value::String(t.clone()));
            }
            Some(Mark::Def { mark_type, props }) => {
                let mut obj = props.clone();
                if let Some(t) = mark_type {
                    obj.insert("type".into(), Value::String(t.clone()));
                }
                root.insert("mark".into(), Value::Object(obj));
            }
        }
        if self.has_encoding || !self.encoding.is_empty() {
            let enc = self
                .encoding
                .iter()
                .map(|(ch, def)| (ch.clone(), def.to_json()))
                .collect();
            root.insert("encoding".into(), Value::Object(enc));
        }
        for (k, v) in &self.other {
            root.insert(k.clone(), v.clone());
        }
        Value::Object(root)
    }

    /// Builds a spec from an already-decoded JSON document.
    pub fn from_json(doc: &Value) -> Result<Self, SpecError> {
        let Value::Object(root) = doc else {
            return Err(SpecError::Syntax("top level must be an object".into()));
        };
        if let Some(key) = COMPOSITION_KEYS.iter().find(|k| root.contains_key(**k)) {
            return Err(SpecError::Unsupported((*key).to_string()));
        }
        let mut spec = VizSpec::default();
        for (key, value) in root {
            match key.as_str() {
                "data" => spec.data = parse_data(value),
                "transform" => match value {
                    Value::Array(items) => {
                        spec.transform = items.clone();
                        spec.has_transform = true;
                    }
                    _ => return Err(SpecError::Syntax("`transform` must be an array".into())),
                },
                "mark" => spec.mark = Some(parse_mark(value)?),
                "encoding" => {
                    let Value::Object(map) = value else {
                        return Err(SpecError::Syntax("`encoding` must be an object".into()));
                    };
                    spec.has_encoding = true;
                    for (channel, def) in map {
                        spec.encoding
                            .insert(channel.clone(), EncodingDef::from_json(channel, def)?);
                    }
                }
                _ => {
                    spec.other.insert(key.clone(), value.clone());
                }
            }
        }
        Ok(spec)
    }
}

fn parse_data(value: &Value) -> DataSource {
    let Value::Object(obj) = value else {
        return DataSource::External(value.clone());
    };
    let Some(Value::Array(values)) = obj.get("values") else {
        return DataSource::External(value.clone());
    };
    let mut records = Vec::with_capacity(values.len());
    for item in values {
        let Value::Object(fields) = item else {
            return DataSource::External(value.clone());
        };
        let mut record = Record::new();
        for (k, v) in fields {
            match ScalarValue::from_json_cell(v) {
                Some(cell) => {
                    record.insert(k.clone(), cell);
                }
                None => return DataSource::External(value.clone()),
            }
        }
        records.push(record);
    }
    let mut extras = obj.clone();
    extras.remove("values");
    DataSource::Inline(InlineData {
        records,
        extras,
        field_types: IndexMap::new(),
    })
}

fn parse_mark(value: &Value) -> Result<Mark, SpecError> {
    match value {
        Value::String(s) => Ok(Mark::Type(s.clone())),
        Value::Object(map) => {
            let mut props = map.clone();
            let mark_type = match props.get("type") {
                Some(Value::String(s)) => {
                    let s = s.clone();
                    props.remove("type");
                    Some(s)
                }
                _ => None,
            };
            Ok(Mark::Def { mark_type, props })
        }
        other => Err(SpecError::Syntax(format!("invalid mark {other}"))),
    }
}

pub fn parse_spec(document: &str) -> Result<VizSpec, SpecError> {
    let doc: Value =
        serde_json::from_str(document).map_err(|e| SpecError::Syntax(e.to_string()))?;
    VizSpec::from_json(&doc)
}

/// Normalized output: object keys sorted, two-space indentation, LF endings,
/// trailing newline.
pub fn serialize_spec(spec: &VizSpec) -> String {
    to_normalized_json(&spec.to_json())
}

pub fn to_normalized_json(value: &Value) -> String {
    let mut out =
        serde_json::to_string_pretty(&sort_keys(value)).expect("JSON values always serialize");
    out.push('\n');
    out
}

pub fn sort_keys(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            Value::Object(
                keys.into_iter()
                    .map(|k| (k.clone(), sort_keys(&map[k])))
                    .collect(),
            )
        }
        Value::Array(items) => Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}

/// Share of non-null cells a category must reach before the column takes
/// that type.
pub const TYPE_THRESHOLD: f64 = 0.95;

/// Infers a type from a column of cells.
pub fn infer_column_type<'a>(cells: impl IntoIterator<Item = &'a ScalarValue>) -> FieldType {
    let mut total = 0usize;
    let mut numeric = 0usize;
    let mut temporal = 0usize;
    for cell in cells {
        if cell.is_null() {
            continue;
        }
        total += 1;
        if cell.as_f64().is_some() {
            numeric += 1;
        } else if cell.is_temporal() {
            temporal += 1;
        }
    }
    if total == 0 {
        return FieldType::Nominal;
    }
    let share = |n: usize| n as f64 / total as f64;
    if share(numeric) >= TYPE_THRESHOLD {
        FieldType::Quantitative
    } else if share(temporal) >= TYPE_THRESHOLD {
        FieldType::Temporal
    } else {
        FieldType::Nominal
    }
}

/// Explicit `type` declarations from encodings, first declaration wins.
pub fn declared_field_types(spec: &VizSpec) -> IndexMap<String, FieldType> {
    let mut declared = IndexMap::new();
    for def in spec.encoding.values() {
        if let (Some(field), Some(ty)) = (&def.field, def.field_type) {
            declared.entry(field.clone()).or_insert(ty);
        }
        for item in def.list.iter().flatten() {
            if let (Some(Value::String(f)), Some(Value::String(t))) =
                (item.get("field"), item.get("type"))
            {
                if let Some(ty) = FieldType::parse(t) {
                    declared.entry(f.clone()).or_insert(ty);
                }
            }
        }
    }
    declared
}

/// Types for every inline data field, with encoding declarations taking
/// precedence over inference.
pub fn data_field_types(spec: &VizSpec) -> Result<IndexMap<String, FieldType>, SpecError> {
    let data = spec.inline_data()?;
    let declared = declared_field_types(spec);
    let null = ScalarValue::Null;
    Ok(data
        .field_names()
        .into_iter()
        .map(|name| {
            let ty = declared.get(&name).copied().unwrap_or_else(|| {
                infer_column_type(data.records.iter().map(|r| r.get(&name).unwrap_or(&null)))
            });
            (name, ty)
        })
        .collect())
}

/// Assigns a type to every data field and fills in missing `type`s on
/// encodings that reference a data field.
pub fn infer_field_types(spec: &VizSpec) -> Result<VizSpec, SpecError> {
    let types = data_field_types(spec)?;
    let mut out = spec.clone();
    if let DataSource::Inline(d) = &mut out.data {
        d.field_types = types.clone();
    }
    for def in out.encoding.values_mut() {
        if def.field_type.is_none() {
            if let Some(ty) = def.field.as_ref().and_then(|f| types.get(f)) {
                def.field_type = Some(*ty);
            }
        }
    }
    Ok(out)
}
