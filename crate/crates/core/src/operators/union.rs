use serde_json::{Map, Value};

use super::join::{match_rows, plan, shared_columns, Layout};
use super::repair::{assign_indicator_named, repair_links_reported};
use super::{How, Indicator, Notice, OpError, OpParams, Side, UnionResult};
use crate::relational::{
    derived_fields, field_references, flatten, is_output_declaration, unflatten, Column, DataTable,
    Link, MappingTable, Provenance, RelError, RelViz, StyleRow, StyleTable,
};
use crate::value::{FieldType, ScalarValue};

/// Name of the provenance column added by `how = merge`.
pub const INDICATOR_COLUMN: &str = "_source";

/// Full outer join of the data tables and property-keyed union of the style
/// tables, followed by link repair and, optionally, encoding of the
/// indicator column.
///
/// When one side carries no data table, the other side's data is taken as
/// is; this is how style transfer works (`union(data_only, style_only)`).
pub fn union(left: &RelViz, right: &RelViz, params: OpParams) -> Result<UnionResult, OpError> {
    let mut report = Vec::new();
    let (data, indicator) = union_data(&left.data, &right.data, params, &mut report)?;
    let style = union_style(&left.style, &right.style, params.how, &mut report)?;

    // Carry every structural field reference; the ones naming absent
    // columns are the broken links to repair. When both sides bring data the
    // merged table holds every input column, so a reference that still
    // dangles already dangled in its input and is left alone.
    let both_bound = !left.data.columns.is_empty() && !right.data.columns.is_empty();
    let derived = derived_fields(&style);
    let links = if data.columns.is_empty() {
        Vec::new()
    } else {
        field_references(&style)
            .into_iter()
            .filter(|(path, name)| {
                data.column_index(name).is_some()
                    || (!both_bound && !is_output_declaration(path) && !derived.contains(name))
            })
            .map(|(path, column)| Link { path, column })
            .collect()
    };
    let merged = RelViz {
        data,
        style,
        mapping: MappingTable { links },
        warnings: Vec::new(),
    };

    let mut donor = left.data.clone();
    for c in &right.data.columns {
        if donor.column_index(&c.name).is_none() {
            donor.columns.push(c.clone());
        }
    }
    donor.rows.clear();
    let mut merged = repair_links_reported(&merged, &donor, indicator.as_deref(), &mut report)?;

    if let (true, Some(name)) = (params.auto_encoding, indicator.as_deref()) {
        merged = assign_indicator_named(&merged, name, &mut report);
    }
    merged.relink();
    Ok(UnionResult { merged, report })
}

/// Left fold of [`union`] in input order.
pub fn union_many(specs: &[RelViz], params: OpParams) -> Result<UnionResult, OpError> {
    let Some((first, rest)) = specs.split_first() else {
        return Ok(UnionResult {
            merged: RelViz::default(),
            report: Vec::new(),
        });
    };
    let mut acc = UnionResult {
        merged: first.clone(),
        report: Vec::new(),
    };
    for next in rest {
        let step = union(&acc.merged, next, params)?;
        acc.merged = step.merged;
        acc.report.extend(step.report);
    }
    Ok(acc)
}

fn indicator_name(columns: &[Column]) -> String {
    let mut name = INDICATOR_COLUMN.to_string();
    let mut n = 2;
    while columns.iter().any(|c| c.name == name) {
        name = format!("{INDICATOR_COLUMN}_{n}");
        n += 1;
    }
    name
}

fn union_data(
    left: &DataTable,
    right: &DataTable,
    params: OpParams,
    report: &mut Vec<Notice>,
) -> Result<(DataTable, Option<String>), OpError> {
    if right.columns.is_empty() && right.rows.is_empty() {
        return Ok((tagged(left.clone()), None));
    }
    if left.columns.is_empty() && left.rows.is_empty() {
        return Ok((tagged(right.clone()), None));
    }
    if shared_columns(left, right).is_empty() {
        return Err(OpError::DisjointColumns);
    }
    let plan = plan(left, right, params.on)?;
    let layout = Layout::new(left, right);
    let matches = match_rows(left, right, &plan);

    let mut rows: Vec<Vec<ScalarValue>> = Vec::new();
    let mut tags: Vec<Indicator> = Vec::new();
    let mut right_used = vec![false; right.rows.len()];
    for (i, m) in matches.iter().enumerate() {
        let l = &left.rows[i];
        let Some(j) = *m else {
            rows.push(layout.widen_left(l));
            tags.push(Indicator::Left);
            continue;
        };
        right_used[j] = true;
        let r = &right.rows[j];
        let conflicts = if plan.keyed {
            layout.conflicts(l, r)
        } else {
            Vec::new()
        };
        if conflicts.is_empty() {
            rows.push(layout.combine(l, r, Side::Left));
            tags.push(Indicator::Both);
            continue;
        }
        report.push(Notice::DataConflict {
            key: plan
                .left_cols
                .iter()
                .map(|&c| (left.columns[c].name.clone(), l[c].clone()))
                .collect(),
            columns: conflicts
                .iter()
                .map(|&c| layout.columns[c].name.clone())
                .collect(),
            resolution: params.how,
        });
        match params.how {
            How::Left => {
                rows.push(layout.combine(l, r, Side::Left));
                tags.push(Indicator::Left);
            }
            How::Right => {
                rows.push(layout.combine(l, r, Side::Right));
                tags.push(Indicator::Right);
            }
            How::Merge => {
                rows.push(layout.combine(l, r, Side::Left));
                tags.push(Indicator::Left);
                rows.push(layout.combine(l, r, Side::Right));
                tags.push(Indicator::Right);
            }
        }
    }
    for (j, used) in right_used.iter().enumerate() {
        if !used {
            rows.push(layout.widen_right(&right.rows[j]));
            tags.push(Indicator::Right);
        }
    }

    let mut columns = layout.columns;
    // A constant `both` indicator carries no information.
    let indicator = if params.how == How::Merge && tags.iter().any(|t| *t != Indicator::Both) {
        let name = indicator_name(&columns);
        columns.push(Column::new(name.clone(), FieldType::Nominal));
        for (row, tag) in rows.iter_mut().zip(&tags) {
            row.push(ScalarValue::text(tag.as_str()));
        }
        Some(name)
    } else {
        None
    };
    let mut table = DataTable::with_rows(columns, rows);
    table.provenance = Some(Provenance::Merged);
    Ok((table, indicator))
}

fn tagged(mut t: DataTable) -> DataTable {
    t.provenance = Some(Provenance::Merged);
    t
}

fn union_style(
    left: &StyleTable,
    right: &StyleTable,
    how: How,
    report: &mut Vec<Notice>,
) -> Result<StyleTable, OpError> {
    let lt = unflatten(left.rows().iter().map(|r| (&r.path, &r.value))).map_err(RelError::from)?;
    let rt = unflatten(right.rows().iter().map(|r| (&r.path, &r.value))).map_err(RelError::from)?;
    let merged = merge_trees(&lt, &rt, how, "", report);
    let rows = flatten(&merged)
        .map_err(RelError::from)?
        .into_iter()
        .map(|(path, value)| StyleRow { path, value })
        .collect();
    Ok(StyleTable::from_rows(rows).map_err(RelError::from)?)
}

fn join_path(prefix: &str, seg: &str) -> String {
    let seg = seg.replace('-', "--");
    if prefix.is_empty() {
        seg
    } else {
        format!("{prefix}-{seg}")
    }
}

fn merge_trees(l: &Value, r: &Value, how: How, path: &str, report: &mut Vec<Notice>) -> Value {
    if l == r {
        return l.clone();
    }
    match (l, r) {
        (Value::Object(lm), Value::Object(rm)) => {
            let mut out = Map::new();
            for (k, lv) in lm {
                let v = match rm.get(k) {
                    Some(rv) => merge_trees(lv, rv, how, &join_path(path, k), report),
                    None => lv.clone(),
                };
                out.insert(k.clone(), v);
            }
            for (k, rv) in rm {
                if !lm.contains_key(k) {
                    out.insert(k.clone(), rv.clone());
                }
            }
            Value::Object(out)
        }
        // Lists of definitions (transforms, tooltips): left entries, then
        // right entries not already present.
        (Value::Array(la), Value::Array(ra)) if la.iter().chain(ra).all(Value::is_object) => {
            let mut out = la.clone();
            out.extend(ra.iter().filter(|v| !la.contains(v)).cloned());
            Value::Array(out)
        }
        // Mark shorthand against a full mark definition.
        (Value::String(t), Value::Object(_)) if path == "mark" => {
            merge_trees(&mark_object(t), r, how, path, report)
        }
        (Value::Object(_), Value::String(t)) if path == "mark" => {
            merge_trees(l, &mark_object(t), how, path, report)
        }
        _ => {
            let kept = match how {
                How::Right => Side::Right,
                How::Left | How::Merge => Side::Left,
            };
            report.push(Notice::StyleConflict {
                path: path.to_string(),
                left: l.clone(),
                right: r.clone(),
                kept,
            });
            match kept {
                Side::Left => l.clone(),
                Side::Right => r.clone(),
            }
        }
    }
}

fn mark_object(t: &str) -> Value {
    let mut m = Map::new();
    m.insert("type".into(), Value::String(t.to_string()));
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::On;
    use crate::relational::{from_spec, to_spec, PropertyPath, StyleValue};
    use crate::spec::parse_spec;

    fn rel(doc: &str) -> RelViz {
        from_spec(&parse_spec(doc).unwrap(), true).unwrap()
    }

    fn style_of(rel: &RelViz, path: &str) -> Option<StyleValue> {
        rel.style.get(&PropertyPath::parse(path)).cloned()
    }

    #[test]
    fn style_transfer_takes_data_left_and_encodings_right() {
        let data = rel(
            r#"{"data": {"values": [{"Year": "2020-01-01", "Value": 3}, {"Year": "2020-01-02", "Value": 4}]}}"#,
        );
        let style = rel(r#"{"mark": "line", "encoding": {
            "x": {"field": "date", "type": "temporal"},
            "y": {"field": "price", "type": "quantitative"}}}"#)
        .style_only();
        let out = union(&data, &style, OpParams::default().how(How::Right)).unwrap();
        assert_eq!(out.merged.data, data.data.clone().tap_provenance());
        assert_eq!(
            style_of(&out.merged, "encoding-x-field"),
            Some(StyleValue::text("Year"))
        );
        assert_eq!(
            style_of(&out.merged, "encoding-y-field"),
            Some(StyleValue::text("Value"))
        );
        assert!(out.merged.dangling_links().is_empty());
        assert_eq!(
            out.report
                .iter()
                .filter(|n| matches!(n, Notice::LinkRepaired { .. }))
                .count(),
            2
        );
        to_spec(&out.merged).unwrap();
    }

    trait Tap {
        fn tap_provenance(self) -> Self;
    }
    impl Tap for DataTable {
        fn tap_provenance(mut self) -> Self {
            self.provenance = Some(Provenance::Merged);
            self
        }
    }

    #[test]
    fn union_with_itself_on_all_is_identity() {
        let a = rel(
            r#"{"data": {"values": [{"c": "x", "v": 1}, {"c": "x", "v": 1}, {"c": "y", "v": null}]},
            "mark": {"type": "bar", "tooltip": true},
            "transform": [{"filter": "datum.v > 0"}],
            "encoding": {"x": {"field": "c", "type": "nominal"}}}"#,
        );
        let out = union(&a, &a, OpParams::default().on(On::All)).unwrap();
        assert!(out.report.is_empty(), "{:?}", out.report);
        assert!(out.merged.same_content(&a));
    }

    /// Nested-loop full outer join, independent of the hash matcher.
    fn outer_join_len(l: &[(&str, f64)], r: &[(&str, f64)]) -> usize {
        let mut n = 0;
        for (k, _) in l {
            n += r.iter().filter(|(k2, _)| k2 == k).count().max(1);
        }
        n + r
            .iter()
            .filter(|(k, _)| !l.iter().any(|(k2, _)| k2 == k))
            .count()
    }

    #[test]
    fn three_by_three_with_one_shared_key() {
        let l = [("a", 1.0), ("b", 2.0), ("c", 3.0)];
        let r = [("c", 3.0), ("d", 4.0), ("e", 5.0)];
        let table = |rows: &[(&str, f64)]| {
            DataTable::with_rows(
                vec![
                    Column::new("k", FieldType::Nominal),
                    Column::new("v", FieldType::Quantitative),
                ],
                rows.iter()
                    .map(|(k, v)| vec![ScalarValue::text(*k), ScalarValue::number(*v)])
                    .collect(),
            )
        };
        let a = RelViz::new(table(&l), StyleTable::default());
        let b = RelViz::new(table(&r), StyleTable::default());
        let out = union(&a, &b, OpParams::default()).unwrap();
        assert_eq!(out.merged.data.rows.len(), outer_join_len(&l, &r));
        assert_eq!(out.merged.data.rows.len(), 5);
        // a non-"both" row exists, so the indicator is added
        assert_eq!(
            out.merged.data.columns.last().unwrap().name,
            INDICATOR_COLUMN
        );
    }

    const CITY_A: &str = r#"{"data": {"values": [
        {"City": "Paris", "Date": "2020-01-01", "Temp": 5},
        {"City": "Oslo", "Date": "2020-01-01", "Temp": -3}]},
        "mark": "bar",
        "encoding": {"x": {"field": "City", "type": "nominal"}, "y": {"field": "Temp", "type": "quantitative"}}}"#;
    const CITY_B: &str = r#"{"data": {"values": [
        {"City": "Paris", "Date": "2020-01-01", "Temp": 7},
        {"City": "Oslo", "Date": "2020-01-01", "Temp": -3}]},
        "mark": "bar",
        "encoding": {"x": {"field": "City", "type": "nominal"}, "y": {"field": "Temp", "type": "quantitative"}}}"#;

    #[test]
    fn conflicting_city_date_rows_are_both_kept_under_merge() {
        let a = rel(CITY_A);
        let b = rel(CITY_B);
        let out = union(&a, &b, OpParams::default()).unwrap();
        let d = &out.merged.data;
        assert_eq!(d.rows.len(), 3);
        let src = d.column_index(INDICATOR_COLUMN).unwrap();
        let tags: Vec<String> = d.rows.iter().map(|r| r[src].to_string()).collect();
        assert_eq!(tags, vec!["left", "right", "both"]);
        assert!(out.report.iter().any(|n| matches!(n,
            Notice::DataConflict { columns, .. } if columns == &vec!["Temp".to_string()])));
        assert_eq!(
            style_of(&out.merged, "encoding-color-field"),
            Some(StyleValue::text(INDICATOR_COLUMN))
        );
        to_spec(&out.merged).unwrap();
    }

    #[test]
    fn conflicts_resolved_to_one_side() {
        let a = rel(CITY_A);
        let b = rel(CITY_B);
        for (how, temp) in [(How::Left, 5.0), (How::Right, 7.0)] {
            let out = union(&a, &b, OpParams::default().how(how)).unwrap();
            let d = &out.merged.data;
            assert_eq!(d.rows.len(), 2);
            assert!(d.column_index(INDICATOR_COLUMN).is_none());
            assert_eq!(d.rows[0][2], ScalarValue::number(temp));
        }
    }

    #[test]
    fn disjoint_columns_are_rejected() {
        let a = rel(r#"{"data": {"values": [{"a": 1}]}}"#);
        let b = rel(r#"{"data": {"values": [{"b": 1}]}}"#);
        assert_eq!(
            union(&a, &b, OpParams::default()),
            Err(OpError::DisjointColumns)
        );
    }

    #[test]
    fn no_key_is_reported_by_side() {
        let a = rel(r#"{"data": {"values": [{"v": 1}, {"v": 2}]}}"#);
        let b = rel(r#"{"data": {"values": [{"v": 1}]}}"#);
        assert_eq!(
            union(&a, &b, OpParams::default()),
            Err(OpError::NoKey(Side::Left))
        );
        assert!(union(&a, &b, OpParams::default().on(On::All)).is_ok());
    }

    #[test]
    fn indicator_name_avoids_existing_columns() {
        let a = rel(r#"{"data": {"values": [{"k": "a", "_source": "x"}]}}"#);
        let b = rel(r#"{"data": {"values": [{"k": "b", "_source": "y"}]}}"#);
        let out = union(&a, &b, OpParams::default().auto_encoding(false)).unwrap();
        let names = out.merged.data.column_names();
        assert_eq!(names, vec!["k", "_source", "_source_2"]);
    }

    #[test]
    fn style_collisions_follow_how() {
        let a = rel(r#"{"mark": "bar", "width": 100}"#);
        let b = rel(r#"{"mark": {"type": "line", "point": true}, "height": 50}"#);
        let merged = union(&a, &b, OpParams::default()).unwrap();
        assert_eq!(
            style_of(&merged.merged, "mark-type"),
            Some(StyleValue::text("bar"))
        );
        assert!(style_of(&merged.merged, "mark-point").is_some());
        assert!(style_of(&merged.merged, "height").is_some());
        assert_eq!(merged.report.len(), 1);
        let right = union(&a, &b, OpParams::default().how(How::Right)).unwrap();
        assert_eq!(
            style_of(&right.merged, "mark-type"),
            Some(StyleValue::text("line"))
        );
    }

    #[test]
    fn transforms_append_right_only_entries() {
        let a = rel(r#"{"transform": [{"filter": "a"}, {"filter": "b"}]}"#);
        let b = rel(r#"{"transform": [{"filter": "b"}, {"filter": "c"}]}"#);
        let out = union(&a, &b, OpParams::default()).unwrap();
        let filters: Vec<_> = (0..3)
            .map(|i| {
                style_of(&out.merged, &format!("transform-{i}-filter"))
                    .unwrap()
                    .to_string()
            })
            .collect();
        assert_eq!(filters, vec!["a", "b", "c"]);
    }

    #[test]
    fn union_many_singleton_and_fold() {
        let a = rel(CITY_A);
        let one = union_many(std::slice::from_ref(&a), OpParams::default()).unwrap();
        assert_eq!(one.merged, a);
        let parts: Vec<RelViz> = ["Paris", "Oslo", "Rome"]
            .iter()
            .map(|c| {
                rel(&format!(
                    r#"{{"data": {{"values": [{{"City": "{c}", "v": 1}}]}}, "mark": "arc"}}"#
                ))
            })
            .collect();
        let out = union_many(&parts, OpParams::default().auto_encoding(false)).unwrap();
        assert_eq!(out.merged.data.rows.len(), 3);
    }

    #[test]
    fn references_dangling_in_both_inputs_are_kept() {
        let a = rel(r#"{"data": {"values": [{"a": 0}]}, "mark": "bar",
            "encoding": {"y": {"field": "b", "type": "nominal"}}}"#);
        let out = union(&a, &a, OpParams::default().on(On::All)).unwrap();
        assert_eq!(
            style_of(&out.merged, "encoding-y-field"),
            Some(StyleValue::text("b"))
        );
        assert!(out.report.is_empty());
    }
}
