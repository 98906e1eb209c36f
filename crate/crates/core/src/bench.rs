//! Style-transfer benchmark: for each style spec, synthesize a data spec
//! with the same number and types of fields, transfer the style by union,
//! and check the result.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operators::{union, How, Notice, OpParams};
use crate::relational::{
    derived_fields, field_references, from_spec, to_spec, Column, DataTable, PropertyPath, RelViz,
    Segment, StyleTable, StyleValue,
};
use crate::spec::{declared_field_types, parse_spec, serialize_spec, VizSpec};
use crate::value::{FieldType, ScalarValue};

pub const SYNTHETIC_ROWS: usize = 20;
pub const NOMINAL_LEVELS: usize = 5;

/// Why a transfer did not produce a working chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureClass {
    /// Field names inside expression strings cannot be rewritten.
    StringExpression,
    /// Literal data values in the style (domains, filters) miss the new data.
    DataValue,
    /// Geographic marks or projections need data a table cannot supply.
    Map,
    /// Custom date formats that do not parse the new data.
    TimeParse,
    Other,
}

impl FailureClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureClass::StringExpression => "string-expression",
            FailureClass::DataValue => "data-value",
            FailureClass::Map => "map",
            FailureClass::TimeParse => "time-parse",
            FailureClass::Other => "other",
        }
    }
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchFailure {
    pub case: String,
    pub class: FailureClass,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub total: usize,
    pub successes: usize,
    pub failures: Vec<BenchFailure>,
}

impl BenchReport {
    pub fn success_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.successes as f64 / self.total as f64
        }
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} of {} cases successful ({:.1}%)",
            self.successes,
            self.total,
            100.0 * self.success_rate()
        )?;
        for failure in &self.failures {
            writeln!(f, "{}: {}: {}", failure.case, failure.class, failure.detail)?;
        }
        Ok(())
    }
}

/// Fields the style spec reads from its data, with their types, in first
/// reference order. Transform outputs are excluded.
pub fn encoded_fields(style: &RelViz, spec: &VizSpec) -> Vec<(String, FieldType)> {
    let derived = derived_fields(&style.style);
    let declared = declared_field_types(spec);
    let mut out: Vec<(String, FieldType)> = Vec::new();
    for (path, name) in field_references(&style.style) {
        if derived.contains(&name)
            || crate::relational::is_output_declaration(&path)
            || out.iter().any(|f| f.0 == name)
        {
            continue;
        }
        let sibling = path.parent().and_then(|p| {
            style
                .style
                .get(&p.child(Segment::Key("type".into())))
                .and_then(StyleValue::as_text)
                .and_then(FieldType::parse)
        });
        let ty = sibling
            .or_else(|| declared.get(&name).copied())
            .unwrap_or(FieldType::Nominal);
        out.push((name, ty));
    }
    out
}

/// Data-only spec with columns `f0, f1, ...` of the given types.
pub fn synthesize_data(types: &[FieldType], seed: u64) -> RelViz {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
    let columns: Vec<Column> = types
        .iter()
        .enumerate()
        .map(|(i, t)| Column::new(format!("f{i}"), *t))
        .collect();
    let rows = (0..SYNTHETIC_ROWS)
        .map(|r| {
            types
                .iter()
                .map(|t| match t {
                    FieldType::Quantitative => ScalarValue::number(
                        (rng.random_range(0.0..100.0f64) * 100.0).round() / 100.0,
                    ),
                    FieldType::Nominal | FieldType::Ordinal => {
                        ScalarValue::text(format!("cat_{}", r % NOMINAL_LEVELS))
                    }
                    FieldType::Temporal => {
                        let day = start + Duration::days(r as i64);
                        ScalarValue::from_json_cell(&day.format("%Y-%m-%d").to_string().into())
                            .expect("date strings are scalar")
                    }
                })
                .collect()
        })
        .collect();
    RelViz::new(DataTable::with_rows(columns, rows), StyleTable::default())
}

/// Style rows of `spec` minus its data source; format directives stay.
fn transferable_style(rel: &RelViz) -> RelViz {
    let mut out = rel.style_only();
    let source = ["url", "values", "name", "sequence", "graticule", "sphere"];
    let drop: Vec<PropertyPath> = out
        .style
        .rows()
        .iter()
        .filter(|r| matches!(r.path.segments(), [Segment::Key(d), Segment::Key(k), ..] if d == "data" && source.contains(&k.as_str())))
        .map(|r| r.path.clone())
        .collect();
    for p in drop {
        out.style.remove(&p);
    }
    out
}

/// Runs one transfer; `Err` carries the failure class and a description.
pub fn run_case(spec: &VizSpec, seed: u64) -> Result<RelViz, (FailureClass, String)> {
    let style = from_spec(spec, true).map_err(|e| (FailureClass::Other, e.to_string()))?;
    let style = transferable_style(&style);
    let fields = encoded_fields(&style, spec);
    let types: Vec<FieldType> = fields.iter().map(|f| f.1).collect();
    let data = synthesize_data(&types, seed);
    let result = union(&data, &style, OpParams::default().how(How::Right))
        .map_err(|e| (FailureClass::Other, e.to_string()))?;
    let merged = result.merged;
    let renamed: Vec<(String, String)> = result
        .report
        .iter()
        .filter_map(|n| match n {
            Notice::LinkRepaired { from, to, .. } => Some((from.clone(), to.clone())),
            _ => None,
        })
        .collect();

    if let Some(why) = map_problem(&merged) {
        return Err((FailureClass::Map, why));
    }
    if let Some(why) = time_parse_problem(&merged, &renamed) {
        return Err((FailureClass::TimeParse, why));
    }
    if let Some(why) = expression_problem(&merged) {
        return Err((FailureClass::StringExpression, why));
    }
    if let Some(why) = data_value_problem(&merged) {
        return Err((FailureClass::DataValue, why));
    }
    check_round_trip(&merged).map_err(|why| (FailureClass::Other, why))?;
    Ok(merged)
}

/// Runs every case; case seeds are `seed + position`.
pub fn bench_style_transfer(cases: &[(String, VizSpec)], seed: u64) -> BenchReport {
    let mut report = BenchReport {
        total: cases.len(),
        ..BenchReport::default()
    };
    for (i, (id, spec)) in cases.iter().enumerate() {
        match run_case(spec, seed.wrapping_add(i as u64)) {
            Ok(_) => report.successes += 1,
            Err((class, detail)) => report.failures.push(BenchFailure {
                case: id.clone(),
                class,
                detail,
            }),
        }
    }
    report
}

fn check_round_trip(rel: &RelViz) -> Result<(), String> {
    if let Some(link) = rel.dangling_links().first() {
        return Err(format!("dangling link {} -> {}", link.path, link.column));
    }
    let spec = to_spec(rel).map_err(|e| e.to_string())?;
    let text = serialize_spec(&spec);
    let reparsed = parse_spec(&text).map_err(|e| format!("output does not parse: {e}"))?;
    let again = from_spec(&reparsed, true)
        .and_then(|r| to_spec(&r))
        .map_err(|e| e.to_string())?;
    if again.to_json() != spec.to_json() {
        return Err("output does not round-trip".into());
    }
    Ok(())
}

fn text_at<'a>(rel: &'a RelViz, path: &str) -> Option<&'a str> {
    rel.style
        .get(&PropertyPath::parse(path))
        .and_then(StyleValue::as_text)
}

fn map_problem(rel: &RelViz) -> Option<String> {
    let mark = text_at(rel, "mark").or_else(|| text_at(rel, "mark-type"));
    if mark == Some("geoshape") {
        return Some("geoshape mark needs geographic features".into());
    }
    rel.style
        .rows()
        .iter()
        .find(|r| {
            r.path.first_key() == Some("projection") || r.path.last_key() == Some("projection")
        })
        .map(|r| format!("projection at {}", r.path))
}

fn time_parse_problem(rel: &RelViz, renamed: &[(String, String)]) -> Option<String> {
    for row in rel.style.rows() {
        let [Segment::Key(d), Segment::Key(f), Segment::Key(p), Segment::Key(field)] =
            row.path.segments()
        else {
            continue;
        };
        if d != "data" || f != "format" || p != "parse" {
            continue;
        }
        let Some(directive) = row.value.as_text() else {
            continue;
        };
        let Some(format) = directive
            .strip_prefix("date:")
            .or_else(|| directive.strip_prefix("utc:"))
            .map(|f| f.trim_matches(|c| c == '\'' || c == '"'))
        else {
            continue;
        };
        let column = renamed
            .iter()
            .find(|(from, _)| from == field)
            .map(|(_, to)| to.as_str())
            .unwrap_or(field.as_str());
        let Some(idx) = rel.data.column_index(column) else {
            return Some(format!("date format for `{field}` has no column to parse"));
        };
        let unparsed = rel.data.rows.iter().map(|r| &r[idx]).find(|v| {
            let text = match v {
                ScalarValue::DateTime(d) => d.as_str().to_string(),
                other => other.to_string(),
            };
            NaiveDate::parse_from_str(&text, format).is_err()
        });
        if let Some(v) = unparsed {
            return Some(format!("`{v}` does not match date format `{format}`"));
        }
    }
    None
}

const EXPRESSION_KEYS: [&str; 4] = ["calculate", "filter", "expr", "test"];

/// Field names read through `datum.name`, `datum['name']` or `datum["name"]`.
pub fn expression_fields(expr: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = expr;
    while let Some(pos) = rest.find("datum") {
        let after = &rest[pos + 5..];
        let boundary_ok = rest[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !(c.is_alphanumeric() || c == '_' || c == '.'));
        rest = after;
        if !boundary_ok {
            continue;
        }
        if let Some(tail) = after.strip_prefix('.') {
            let name: String = tail
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_' || *c == '$')
                .collect();
            if !name.is_empty() {
                out.push(name);
            }
        } else if let Some(tail) = after.strip_prefix('[') {
            let tail = tail.trim_start();
            if let Some(q) = tail.chars().next().filter(|c| *c == '\'' || *c == '"') {
                if let Some(end) = tail[1..].find(q) {
                    out.push(tail[1..1 + end].to_string());
                }
            }
        }
    }
    out
}

fn expression_problem(rel: &RelViz) -> Option<String> {
    let mut known: BTreeSet<String> = rel
        .data
        .column_names()
        .into_iter()
        .map(str::to_string)
        .collect();
    known.extend(derived_fields(&rel.style));
    for row in rel.style.rows() {
        let is_expr = row
            .path
            .segments()
            .iter()
            .rev()
            .find_map(Segment::key)
            .is_some_and(|k| EXPRESSION_KEYS.contains(&k));
        let Some(text) = row.value.as_text().filter(|_| is_expr) else {
            continue;
        };
        if let Some(missing) = expression_fields(text)
            .into_iter()
            .find(|f| !known.contains(f))
        {
            return Some(format!(
                "expression at {} reads missing field `{missing}`",
                row.path
            ));
        }
    }
    None
}

fn column_values<'a>(rel: &'a RelViz, field: &str) -> Option<Vec<&'a ScalarValue>> {
    let i = rel.data.column_index(field)?;
    Some(
        rel.data
            .rows
            .iter()
            .map(|r| &r[i])
            .filter(|v| !v.is_null())
            .collect(),
    )
}

fn literal(v: &StyleValue) -> Option<&ScalarValue> {
    match v {
        StyleValue::Scalar(s) => Some(s),
        _ => None,
    }
}

fn matches_literal(cell: &ScalarValue, lit: &ScalarValue) -> bool {
    match (cell.as_f64(), lit.as_f64()) {
        (Some(a), Some(b)) => a == b,
        _ => cell.to_string() == lit.to_string(),
    }
}

/// Explicit scale domains and filter predicates that no synthesized value
/// satisfies.
fn data_value_problem(rel: &RelViz) -> Option<String> {
    let rows = rel.style.rows();
    let children = |prefix: &PropertyPath| -> Vec<&StyleValue> {
        rows.iter()
            .filter(|r| r.path.len() == prefix.len() + 1 && r.path.starts_with(prefix))
            .map(|r| &r.value)
            .collect()
    };
    for row in rows {
        let segs = row.path.segments();
        // encoding-<ch>-scale-domain-<i>
        if let [Segment::Key(e), Segment::Key(_), Segment::Key(s), Segment::Key(d), Segment::Index(0)] =
            segs
        {
            if e != "encoding" || s != "scale" || d != "domain" {
                continue;
            }
            let channel = row.path.parent()?.parent()?.parent()?;
            let field = rel
                .style
                .get(&channel.child(Segment::Key("field".into())))
                .and_then(StyleValue::as_text)?;
            let Some(values) = column_values(rel, field) else {
                continue;
            };
            let domain: Vec<&ScalarValue> = children(&row.path.parent()?)
                .into_iter()
                .filter_map(literal)
                .collect();
            let nums: Vec<f64> = domain.iter().filter_map(|v| v.as_f64()).collect();
            let hit = if nums.len() == 2 && domain.len() == 2 {
                let (lo, hi) = (nums[0].min(nums[1]), nums[0].max(nums[1]));
                values
                    .iter()
                    .filter_map(|v| v.as_f64())
                    .any(|x| lo <= x && x <= hi)
            } else {
                values
                    .iter()
                    .any(|v| domain.iter().any(|d| matches_literal(v, d)))
            };
            if !hit {
                return Some(format!(
                    "scale domain at {} excludes every data value",
                    row.path.parent()?
                ));
            }
        }
        // transform-<i>-filter-field with equal / oneOf / range
        if let [Segment::Key(t), Segment::Index(_), Segment::Key(f), Segment::Key(k)] = segs {
            if t != "transform" || f != "filter" || k != "field" {
                continue;
            }
            let Some(values) = row.value.as_text().and_then(|n| column_values(rel, n)) else {
                continue;
            };
            let filter = row.path.parent()?;
            let get = |k: &str| rel.style.get(&filter.child(Segment::Key(k.into())));
            let ok = if let Some(lit) = get("equal").and_then(literal) {
                values.iter().any(|v| matches_literal(v, lit))
            } else if get("oneOf").is_some()
                || rows.iter().any(|r| {
                    r.path
                        .starts_with(&filter.child(Segment::Key("oneOf".into())))
                })
            {
                let options: Vec<&ScalarValue> =
                    children(&filter.child(Segment::Key("oneOf".into())))
                        .into_iter()
                        .filter_map(literal)
                        .collect();
                values
                    .iter()
                    .any(|v| options.iter().any(|o| matches_literal(v, o)))
            } else {
                true
            };
            if !ok {
                return Some(format!("filter at {filter} matches no data value"));
            }
        }
    }
    None
}
