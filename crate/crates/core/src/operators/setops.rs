use std::collections::HashMap;

use super::join::{match_rows, plan_or_all, Layout};
use super::{Indicator, MarkedData, MarkedStyle, MarkedTable, On, OpParams, Side};
use crate::relational::{DataTable, PropertyPath, RelViz, StyleRow, StyleValue};

/// Rows present on both sides, tagged `both`.
///
/// Data rows pair on the join columns chosen by `params.on` (falling back to
/// all shared columns when no key can be inferred). Style rows pair on the
/// property path, and also on the value when `on = all`.
pub fn intersect(left: &RelViz, right: &RelViz, params: OpParams) -> (MarkedData, MarkedStyle) {
    (
        intersect_data(&left.data, &right.data, params.on),
        intersect_style(left, right, params.on),
    )
}

/// Rows only on the left (tagged `left`) followed by rows only on the right
/// (tagged `right`).
pub fn difference(left: &RelViz, right: &RelViz, params: OpParams) -> (MarkedData, MarkedStyle) {
    (
        difference_data(&left.data, &right.data, params.on),
        difference_style(left, right, params.on),
    )
}

fn intersect_data(left: &DataTable, right: &DataTable, on: On) -> MarkedData {
    let layout = Layout::new(left, right);
    let mut out = DataTable::new(layout.columns.clone());
    if !left.columns.is_empty() && !right.columns.is_empty() {
        let plan = plan_or_all(left, right, on);
        for (i, m) in match_rows(left, right, &plan).into_iter().enumerate() {
            if let Some(j) = m {
                out.rows
                    .push(layout.combine(&left.rows[i], &right.rows[j], Side::Left));
            }
        }
    }
    let n = out.rows.len();
    MarkedTable {
        base: out,
        indicator: vec![Indicator::Both; n],
    }
}

fn difference_data(left: &DataTable, right: &DataTable, on: On) -> MarkedData {
    let layout = Layout::new(left, right);
    let mut out = DataTable::new(layout.columns.clone());
    let mut indicator = Vec::new();
    let matches = if left.columns.is_empty() || right.columns.is_empty() {
        vec![None; left.rows.len()]
    } else {
        match_rows(left, right, &plan_or_all(left, right, on))
    };
    let mut right_used = vec![false; right.rows.len()];
    for (i, m) in matches.iter().enumerate() {
        match m {
            Some(j) => right_used[*j] = true,
            None => {
                out.rows.push(layout.widen_left(&left.rows[i]));
                indicator.push(Indicator::Left);
            }
        }
    }
    for (j, used) in right_used.iter().enumerate() {
        if !used {
            out.rows.push(layout.widen_right(&right.rows[j]));
            indicator.push(Indicator::Right);
        }
    }
    MarkedTable {
        base: out,
        indicator,
    }
}

type StyleKey<'a> = (&'a PropertyPath, Option<&'a StyleValue>);

fn style_key(row: &StyleRow, on: On) -> StyleKey<'_> {
    match on {
        On::Key => (&row.path, None),
        On::All => (&row.path, Some(&row.value)),
    }
}

fn style_counts(rel: &RelViz, on: On) -> HashMap<StyleKey<'_>, usize> {
    let mut counts = HashMap::new();
    for row in rel.style.rows() {
        *counts.entry(style_key(row, on)).or_insert(0) += 1;
    }
    counts
}

fn intersect_style(left: &RelViz, right: &RelViz, on: On) -> MarkedStyle {
    let mut available = style_counts(right, on);
    let rows: Vec<StyleRow> = left
        .style
        .rows()
        .iter()
        .filter(|row| match available.get_mut(&style_key(row, on)) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .cloned()
        .collect();
    let n = rows.len();
    MarkedTable {
        base: rows,
        indicator: vec![Indicator::Both; n],
    }
}

fn one_sided<'a>(from: &'a RelViz, other: &'a RelViz, on: On) -> Vec<StyleRow> {
    let mut available = style_counts(other, on);
    from.style
        .rows()
        .iter()
        .filter(|row| match available.get_mut(&style_key(row, on)) {
            Some(n) if *n > 0 => {
                *n -= 1;
                false
            }
            _ => true,
        })
        .cloned()
        .collect()
}

fn difference_style(left: &RelViz, right: &RelViz, on: On) -> MarkedStyle {
    let only_left = one_sided(left, right, on);
    let only_right = one_sided(right, left, on);
    let mut indicator = vec![Indicator::Left; only_left.len()];
    indicator.extend(vec![Indicator::Right; only_right.len()]);
    let mut base = only_left;
    base.extend(only_right);
    MarkedTable { base, indicator }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{from_spec, Column};
    use crate::spec::parse_spec;
    use crate::value::{FieldType, ScalarValue};

    fn rel(doc: &str) -> RelViz {
        from_spec(&parse_spec(doc).unwrap(), true).unwrap()
    }

    const A: &str = r#"{"data": {"values": [{"c": "x", "v": 1}, {"c": "y", "v": 2}]},
        "mark": "bar", "encoding": {"y": {"field": "v", "type": "quantitative"}}}"#;

    #[test]
    fn self_intersection_and_difference() {
        let a = rel(A);
        let (d, s) = intersect(&a, &a, OpParams::default());
        assert_eq!(d.len(), 2);
        assert_eq!(s.len(), a.style.len());
        assert!(d
            .indicator
            .iter()
            .chain(&s.indicator)
            .all(|i| *i == Indicator::Both));
        let (d, s) = difference(&a, &a, OpParams::default());
        assert!(d.is_empty() && s.is_empty());
    }

    #[test]
    fn added_encoding_shows_up_on_the_right() {
        let a = rel(A);
        let b = rel(
            r#"{"data": {"values": [{"c": "x", "v": 1}, {"c": "y", "v": 2}]},
            "mark": "bar", "encoding": {"y": {"field": "v", "type": "quantitative"},
            "x": {"field": "c", "type": "nominal"}}}"#,
        );
        let (_, s) = difference(&a, &b, OpParams::default().on(On::All));
        let paths: Vec<String> = s.base.iter().map(|r| r.path.to_string()).collect();
        assert_eq!(paths, vec!["encoding-x-field", "encoding-x-type"]);
        assert!(s.indicator.iter().all(|i| *i == Indicator::Right));
    }

    #[test]
    fn value_conflicts_are_duplicate_properties() {
        let a = rel(r#"{"mark": "bar", "encoding": {"x": {"field": "a"}}}"#);
        let b = rel(r#"{"mark": "line", "encoding": {"x": {"field": "a"}}}"#);
        let (_, s) = difference(&a, &b, OpParams::default().on(On::All));
        assert_eq!(s.len(), 2);
        let conflicts = s.value_conflicts();
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].path.to_string(), "mark");
        // on=key compares paths only
        let (_, s) = difference(&a, &b, OpParams::default().on(On::Key));
        assert!(s.is_empty());
    }

    #[test]
    fn data_difference_by_key() {
        let cols = || {
            vec![
                Column::new("k", FieldType::Nominal),
                Column::new("v", FieldType::Quantitative),
            ]
        };
        let row = |k: &str, v: f64| vec![ScalarValue::text(k), ScalarValue::number(v)];
        let l = RelViz::new(
            DataTable::with_rows(cols(), vec![row("a", 1.0), row("b", 2.0)]),
            Default::default(),
        );
        let r = RelViz::new(
            DataTable::with_rows(cols(), vec![row("b", 5.0), row("c", 3.0)]),
            Default::default(),
        );
        let (d, _) = difference(&l, &r, OpParams::default());
        assert_eq!(d.indicator, vec![Indicator::Left, Indicator::Right]);
        assert_eq!(d.base.rows, vec![row("a", 1.0), row("c", 3.0)]);
        let (i, _) = intersect(&l, &r, OpParams::default());
        assert_eq!(i.base.rows, vec![row("b", 2.0)]);
        // on=all: the b rows differ
        let (d, _) = difference(&l, &r, OpParams::default().on(On::All));
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn empty_side_contributes_everything_to_difference() {
        let a = rel(A);
        let empty = RelViz::default();
        let (d, _) = difference(&a, &empty, OpParams::default());
        assert_eq!(d.count(Indicator::Left), 2);
        let (i, _) = intersect(&a, &empty, OpParams::default());
        assert!(i.is_empty());
    }
}
