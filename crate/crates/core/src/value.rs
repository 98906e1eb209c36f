//! Scalar cell values and data-field types.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde_json::{Number, Value};

/// Data type of a field, following the Vega-Lite measurement levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldType {
    Quantitative,
    Nominal,
    Ordinal,
    Temporal,
}

impl FieldType {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldType::Quantitative => "quantitative",
            FieldType::Nominal => "nominal",
            FieldType::Ordinal => "ordinal",
            FieldType::Temporal => "temporal",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "quantitative" => Some(FieldType::Quantitative),
            "nominal" => Some(FieldType::Nominal),
            "ordinal" => Some(FieldType::Ordinal),
            "temporal" => Some(FieldType::Temporal),
            _ => None,
        }
    }

    /// Types eligible for primary keys.
    pub fn is_discrete(self) -> bool {
        !matches!(self, FieldType::Quantitative)
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A timestamp that remembers the text it was parsed from, so that it
/// serializes back unchanged.
#[derive(Debug, Clone)]
pub struct DateTimeValue {
    text: String,
    instant: NaiveDateTime,
}

impl DateTimeValue {
    pub fn parse(text: &str) -> Option<Self> {
        parse_iso8601(text).map(|instant| DateTimeValue {
            text: text.to_string(),
            instant,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn instant(&self) -> NaiveDateTime {
        self.instant
    }
}

impl PartialEq for DateTimeValue {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for DateTimeValue {}

/// A single data cell or style leaf.
#[derive(Debug, Clone)]
pub enum ScalarValue {
    Null,
    Bool(bool),
    Number(Number),
    Text(String),
    DateTime(DateTimeValue),
}

impl ScalarValue {
    /// Converts a JSON leaf. Strings that parse as ISO-8601 become
    /// [`ScalarValue::DateTime`]. Returns `None` for objects and arrays.
    pub fn from_json_cell(value: &Value) -> Option<Self> {
        match value {
            Value::String(s) => Some(match DateTimeValue::parse(s) {
                Some(dt) => ScalarValue::DateTime(dt),
                None => ScalarValue::Text(s.clone()),
            }),
            other => Self::from_json_plain(other),
        }
    }

    /// Converts a JSON leaf without date detection.
    pub fn from_json_plain(value: &Value) -> Option<Self> {
        match value {
            Value::Null => Some(ScalarValue::Null),
            Value::Bool(b) => Some(ScalarValue::Bool(*b)),
            Value::Number(n) => Some(ScalarValue::Number(n.clone())),
            Value::String(s) => Some(ScalarValue::Text(s.clone())),
            Value::Array(_) | Value::Object(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ScalarValue::Null => Value::Null,
            ScalarValue::Bool(b) => Value::Bool(*b),
            ScalarValue::Number(n) => Value::Number(n.clone()),
            ScalarValue::Text(s) => Value::String(s.clone()),
            ScalarValue::DateTime(dt) => Value::String(dt.text.clone()),
        }
    }

    pub fn number(x: f64) -> Self {
        Number::from_f64(x).map_or(ScalarValue::Null, ScalarValue::Number)
    }

    pub fn text(s: impl Into<String>) -> Self {
        ScalarValue::Text(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, ScalarValue::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ScalarValue::Number(n) => n.as_f64(),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            ScalarValue::Text(s) => Some(s),
            ScalarValue::DateTime(dt) => Some(&dt.text),
            _ => None,
        }
    }

    /// Whether the cell looks like a date: either a parsed ISO-8601 value or
    /// text in one of the accepted loose date patterns.
    pub fn is_temporal(&self) -> bool {
        match self {
            ScalarValue::DateTime(_) => true,
            ScalarValue::Text(s) => parse_loose_date(s).is_some(),
            _ => false,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ScalarValue::Null => 0,
            ScalarValue::Bool(_) => 1,
            ScalarValue::Number(_) => 2,
            ScalarValue::Text(_) => 3,
            ScalarValue::DateTime(_) => 4,
        }
    }
}

fn normalized_bits(n: &Number) -> u64 {
    let x = n.as_f64().unwrap_or(0.0);
    if x == 0.0 {
        0.0f64.to_bits()
    } else {
        x.to_bits()
    }
}

// Numbers compare by value so that `1` and `1.0` join with each other.
impl PartialEq for ScalarValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ScalarValue::Null, ScalarValue::Null) => true,
            (ScalarValue::Bool(a), ScalarValue::Bool(b)) => a == b,
            (ScalarValue::Number(a), ScalarValue::Number(b)) => a.as_f64() == b.as_f64(),
            (ScalarValue::Text(a), ScalarValue::Text(b)) => a == b,
            (ScalarValue::DateTime(a), ScalarValue::DateTime(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for ScalarValue {}

impl Hash for ScalarValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            ScalarValue::Null => {}
            ScalarValue::Bool(b) => b.hash(state),
            ScalarValue::Number(n) => normalized_bits(n).hash(state),
            ScalarValue::Text(s) => s.hash(state),
            ScalarValue::DateTime(dt) => dt.text.hash(state),
        }
    }
}

impl Ord for ScalarValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ScalarValue::Bool(a), ScalarValue::Bool(b)) => a.cmp(b),
            (ScalarValue::Number(a), ScalarValue::Number(b)) => a
                .as_f64()
                .unwrap_or(0.0)
                .total_cmp(&b.as_f64().unwrap_or(0.0)),
            (ScalarValue::Text(a), ScalarValue::Text(b)) => a.cmp(b),
            (ScalarValue::DateTime(a), ScalarValue::DateTime(b)) => {
                a.instant.cmp(&b.instant).then_with(|| a.text.cmp(&b.text))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ScalarValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarValue::Null => f.write_str("null"),
            ScalarValue::Bool(b) => write!(f, "{b}"),
            ScalarValue::Number(n) => write!(f, "{n}"),
            ScalarValue::Text(s) => f.write_str(s),
            ScalarValue::DateTime(dt) => f.write_str(&dt.text),
        }
    }
}

/// Parses the ISO-8601 forms accepted for datetime cells: a calendar date,
/// or a date and time with optional fraction and optional offset.
pub fn parse_iso8601(text: &str) -> Option<NaiveDateTime> {
    let text = text.trim();
    // cheap reject: must start with YYYY-MM
    let bytes = text.as_bytes();
    if bytes.len() < 10 || !bytes[..4].iter().all(u8::is_ascii_digit) || bytes[4] != b'-' {
        return None;
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.naive_utc());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(dt);
        }
    }
    None
}

/// ISO-8601 plus a handful of common human-written date layouts.
pub fn parse_loose_date(text: &str) -> Option<NaiveDateTime> {
    if let Some(dt) = parse_iso8601(text) {
        return Some(dt);
    }
    let text = text.trim();
    for fmt in [
        "%Y/%m/%d",
        "%m/%d/%Y",
        "%b %d %Y",
        "%d %b %Y",
        "%B %d, %Y",
        "%b %d, %Y",
    ] {
        if let Ok(d) = NaiveDate::parse_from_str(text, fmt) {
            return d.and_hms_opt(0, 0, 0);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn iso_dates_become_datetime_cells() {
        let v = ScalarValue::from_json_cell(&json!("2020-01-31")).unwrap();
        assert!(matches!(v, ScalarValue::DateTime(_)));
        assert_eq!(v.to_json(), json!("2020-01-31"));
        let v = ScalarValue::from_json_cell(&json!("2020-01-31T10:00:00Z")).unwrap();
        assert!(matches!(v, ScalarValue::DateTime(_)));
    }

    #[test]
    fn unparseable_date_like_text_stays_text() {
        for s in ["2020-13-45", "2020-02-30", "Jan 2020", "2020"] {
            let v = ScalarValue::from_json_cell(&json!(s)).unwrap();
            assert!(matches!(v, ScalarValue::Text(_)), "{s}");
        }
    }

    #[test]
    fn loose_patterns_count_as_temporal() {
        assert!(ScalarValue::text("2001/02/03").is_temporal());
        assert!(ScalarValue::text("Jan 5 2001").is_temporal());
        assert!(!ScalarValue::text("cat_1").is_temporal());
    }

    #[test]
    fn integer_and_float_numbers_are_equal() {
        let a = ScalarValue::from_json_cell(&json!(1)).unwrap();
        let b = ScalarValue::from_json_cell(&json!(1.0)).unwrap();
        assert_eq!(a, b);
        let hash = |v: &ScalarValue| {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            v.hash(&mut h);
            h.finish()
        };
        assert_eq!(hash(&a), hash(&b));
    }
}
