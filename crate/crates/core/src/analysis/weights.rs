use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::AnalysisError;
use crate::relational::{PropertyPath, Segment};

/// What a differing row is about; each category carries its own weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    MarkType,
    FieldType,
    Field,
    Aggregate,
    ScaleScheme,
    DataCell,
    Default,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::MarkType,
        Category::FieldType,
        Category::Field,
        Category::Aggregate,
        Category::ScaleScheme,
        Category::DataCell,
        Category::Default,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::MarkType => "mark_type",
            Category::FieldType => "field_type",
            Category::Field => "field",
            Category::Aggregate => "aggregate",
            Category::ScaleScheme => "scale_scheme",
            Category::DataCell => "data_cell",
            Category::Default => "default",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = AnalysisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| AnalysisError::Config(format!("unknown category `{s}`")))
    }
}

/// Category of a style row, decided by its last key.
///
/// `mark` and `mark-type` are the mark type; any other `type` is a field
/// type; `scale-scheme` anywhere is a scale scheme.
pub fn category(path: &PropertyPath) -> Category {
    let keys: Vec<&str> = path.segments().iter().filter_map(Segment::key).collect();
    match (path.first_key(), keys.as_slice()) {
        (Some("mark"), ["mark"] | ["mark", "type"]) => Category::MarkType,
        (_, [.., "type"]) if path.last_key().is_some() => Category::FieldType,
        (_, [.., "field"]) if path.last_key().is_some() => Category::Field,
        (_, [.., "aggregate"]) if path.last_key().is_some() => Category::Aggregate,
        (_, [.., "scale", "scheme"]) if path.last_key().is_some() => Category::ScaleScheme,
        _ => Category::Default,
    }
}

/// Per-category weights. Categories not listed use the default weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    weights: BTreeMap<Category, f64>,
    default_weight: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig::uniform(1.0)
    }
}

impl WeightConfig {
    pub fn uniform(weight: f64) -> Self {
        WeightConfig {
            weights: BTreeMap::new(),
            default_weight: weight,
        }
    }

    pub fn with(mut self, category: Category, weight: f64) -> Result<Self, AnalysisError> {
        check(category.as_str(), weight)?;
        if category == Category::Default {
            self.default_weight = weight;
        } else {
            self.weights.insert(category, weight);
        }
        Ok(self)
    }

    pub fn weight(&self, category: Category) -> f64 {
        self.weights
            .get(&category)
            .copied()
            .unwrap_or(self.default_weight)
    }

    pub fn default_weight(&self) -> f64 {
        self.default_weight
    }

    /// Parses a flat `category = weight` TOML table.
    pub fn from_toml(text: &str) -> Result<Self, AnalysisError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| AnalysisError::Config(e.to_string()))?;
        let mut config = WeightConfig::default();
        for (key, value) in &table {
            let weight = match value {
                toml::Value::Float(x) => *x,
                toml::Value::Integer(n) => *n as f64,
                other => {
                    return Err(AnalysisError::Config(format!(
                        "`{key}` must be a number, got {}",
                        other.type_str()
                    )))
                }
            };
            config = config.with(key.parse()?, weight)?;
        }
        Ok(config)
    }
}

fn check(name: &str, weight: f64) -> Result<(), AnalysisError> {
    if weight.is_finite() && weight >= 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::Config(format!(
            "`{name}` must be a finite non-negative number, got {weight}"
        )))
    }
}
