//! Union post-processing: retargeting broken links and encoding the
//! indicator column.

use std::collections::BTreeSet;

use super::union::INDICATOR_COLUMN;
use super::{Notice, OpError};
use crate::relational::{DataTable, PropertyPath, RelViz, Segment, StyleValue};
use crate::value::{FieldType, ScalarValue};

/// Channels tried, in order, for the indicator column.
pub const INDICATOR_CHANNELS: [&str; 4] = ["color", "opacity", "column", "row"];

/// Reassigns every mapping link that names an absent column.
///
/// The replacement prefers, in order: an unused column of the origin
/// field's type, any column of that type, any unused column, any column.
/// The origin type comes from `donor` when it has the column, else from the
/// sibling `type` property. Every style value that named the missing field
/// is rewritten, so the same missing field always maps to the same column.
pub fn repair_links(merged: &RelViz, donor: &DataTable) -> Result<RelViz, OpError> {
    repair_links_reported(merged, donor, None, &mut Vec::new())
}

pub(crate) fn repair_links_reported(
    merged: &RelViz,
    donor: &DataTable,
    exclude: Option<&str>,
    report: &mut Vec<Notice>,
) -> Result<RelViz, OpError> {
    let broken: Vec<_> = merged
        .mapping
        .links
        .iter()
        .filter(|l| merged.data.column_index(&l.column).is_none())
        .collect();
    if broken.is_empty() {
        return Ok(merged.clone());
    }
    let mut used: BTreeSet<String> = merged
        .mapping
        .links
        .iter()
        .filter(|l| merged.data.column_index(&l.column).is_some())
        .map(|l| l.column.clone())
        .collect();
    let mut missing: Vec<&str> = Vec::new();
    for link in &broken {
        if !missing.contains(&link.column.as_str()) {
            missing.push(&link.column);
        }
    }

    let candidates: Vec<_> = merged
        .data
        .columns
        .iter()
        .filter(|c| Some(c.name.as_str()) != exclude)
        .collect();
    let mut out = merged.clone();
    for name in missing {
        let paths: Vec<&PropertyPath> = broken
            .iter()
            .filter(|l| l.column == name)
            .map(|l| &l.path)
            .collect();
        let origin = donor
            .column(name)
            .map(|c| c.field_type)
            .or_else(|| paths.iter().find_map(|p| sibling_type(merged, p)));
        let same_type = |c: &&&crate::relational::Column| origin.is_none_or(|t| c.field_type == t);
        let unused = |c: &&&crate::relational::Column| !used.contains(&c.name);
        let pick = candidates
            .iter()
            .find(|c| same_type(c) && unused(c))
            .or_else(|| candidates.iter().find(|c| same_type(c)))
            .or_else(|| candidates.iter().find(|c| unused(c)))
            .or_else(|| candidates.first());
        let Some(target) = pick else {
            return Err(OpError::UnrepairableLink {
                path: paths[0].to_string(),
                column: name.to_string(),
            });
        };
        used.insert(target.name.clone());
        for path in paths {
            out.style
                .set(path.clone(), StyleValue::text(target.name.clone()));
            report.push(Notice::LinkRepaired {
                path: path.to_string(),
                from: name.to_string(),
                to: target.name.clone(),
            });
        }
    }
    out.relink();
    Ok(out)
}

fn sibling_type(rel: &RelViz, path: &PropertyPath) -> Option<FieldType> {
    let parent = path.parent()?;
    rel.style
        .get(&parent.child(Segment::Key("type".into())))
        .and_then(StyleValue::as_text)
        .and_then(FieldType::parse)
}

/// Encodes the indicator column on the first idle channel among color,
/// opacity, column and row. Returns the input unchanged when the data has
/// no indicator column or no channel is idle.
pub fn assign_indicator_channel(rel: &RelViz) -> RelViz {
    let Some(name) = rel
        .data
        .columns
        .iter()
        .rev()
        .map(|c| c.name.as_str())
        .find(|n| is_indicator_name(n))
    else {
        return rel.clone();
    };
    assign_indicator_named(rel, name, &mut Vec::new())
}

fn is_indicator_name(name: &str) -> bool {
    name == INDICATOR_COLUMN
        || name
            .strip_prefix(INDICATOR_COLUMN)
            .and_then(|rest| rest.strip_prefix('_'))
            .is_some_and(|n| n.parse::<u32>().is_ok())
}

pub(crate) fn assign_indicator_named(
    rel: &RelViz,
    column: &str,
    report: &mut Vec<Notice>,
) -> RelViz {
    let busy = rel.channels();
    let Some(channel) = INDICATOR_CHANNELS
        .iter()
        .find(|c| !busy.iter().any(|b| b == *c))
    else {
        report.push(Notice::NoIdleChannel {
            column: column.to_string(),
        });
        return rel.clone();
    };
    let mut out = rel.clone();
    let encoding = PropertyPath::keys(["encoding"]);
    if out.style.get(&encoding) == Some(&StyleValue::EmptyObject) {
        out.style.remove(&encoding);
    }
    let base = encoding.child(Segment::Key(channel.to_string()));
    out.style.set(
        base.child(Segment::Key("field".into())),
        StyleValue::text(column),
    );
    out.style.set(
        base.child(Segment::Key("type".into())),
        StyleValue::Scalar(ScalarValue::text(FieldType::Nominal.as_str())),
    );
    out.relink();
    report.push(Notice::ChannelAssigned {
        channel: channel.to_string(),
        column: column.to_string(),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{from_spec, Column, Link, MappingTable};
    use crate::spec::parse_spec;

    fn with_broken(style_doc: &str, columns: Vec<Column>) -> RelViz {
        let mut rel = from_spec(&parse_spec(style_doc).unwrap(), true).unwrap();
        rel.data = DataTable::new(columns);
        rel.mapping = MappingTable {
            links: crate::relational::field_references(&rel.style)
                .into_iter()
                .map(|(path, column)| Link { path, column })
                .collect(),
        };
        rel
    }

    #[test]
    fn prefers_same_type() {
        let rel = with_broken(
            r#"{"mark": "line", "encoding": {"x": {"field": "date", "type": "temporal"}}}"#,
            vec![
                Column::new("Value", FieldType::Quantitative),
                Column::new("Year", FieldType::Temporal),
            ],
        );
        let fixed = repair_links(&rel, &DataTable::default()).unwrap();
        assert_eq!(
            fixed.style.get(&PropertyPath::parse("encoding-x-field")),
            Some(&StyleValue::text("Year"))
        );
        assert!(fixed.dangling_links().is_empty());
    }

    #[test]
    fn no_broken_links_is_identity() {
        let rel = from_spec(
            &parse_spec(r#"{"data": {"values": [{"a": 1}]}, "encoding": {"x": {"field": "a"}}}"#)
                .unwrap(),
            true,
        )
        .unwrap();
        assert_eq!(repair_links(&rel, &DataTable::default()).unwrap(), rel);
    }

    #[test]
    fn first_matching_column_wins_and_nothing_dangles() {
        let rel = with_broken(
            r#"{"encoding": {"x": {"field": "a", "type": "quantitative"}, "y": {"field": "b", "type": "quantitative"}}}"#,
            vec![
                Column::new("n", FieldType::Nominal),
                Column::new("q1", FieldType::Quantitative),
                Column::new("q2", FieldType::Quantitative),
            ],
        );
        let fixed = repair_links(&rel, &DataTable::default()).unwrap();
        let get = |p: &str| fixed.style.get(&PropertyPath::parse(p)).cloned();
        assert_eq!(get("encoding-x-field"), Some(StyleValue::text("q1")));
        assert_eq!(get("encoding-y-field"), Some(StyleValue::text("q2")));
        // post-condition scan
        for link in &fixed.mapping.links {
            assert!(fixed.data.column_index(&link.column).is_some());
        }
        assert_eq!(fixed.mapping.links.len(), 2);
    }

    #[test]
    fn donor_type_overrides_sibling() {
        let rel = with_broken(
            r#"{"encoding": {"x": {"field": "a"}}}"#,
            vec![
                Column::new("n", FieldType::Nominal),
                Column::new("t", FieldType::Temporal),
            ],
        );
        let donor = DataTable::new(vec![Column::new("a", FieldType::Temporal)]);
        let fixed = repair_links(&rel, &donor).unwrap();
        assert_eq!(
            fixed.style.get(&PropertyPath::parse("encoding-x-field")),
            Some(&StyleValue::text("t"))
        );
    }

    #[test]
    fn unrepairable_without_columns() {
        let mut rel = with_broken(r#"{"encoding": {"x": {"field": "a"}}}"#, vec![]);
        rel.mapping.links.push(Link {
            path: PropertyPath::parse("encoding-x-field"),
            column: "a".into(),
        });
        assert!(matches!(
            repair_links(&rel, &DataTable::default()),
            Err(OpError::UnrepairableLink { .. })
        ));
    }

    fn indicator_rel(channels: &[&str]) -> RelViz {
        let enc: Vec<String> = channels
            .iter()
            .map(|c| format!(r#""{c}": {{"field": "v", "type": "quantitative"}}"#))
            .collect();
        let doc = format!(
            r#"{{"data": {{"values": [{{"v": 1, "_source": "left"}}]}}, "mark": "bar", "encoding": {{{}}}}}"#,
            enc.join(",")
        );
        from_spec(&parse_spec(&doc).unwrap(), true).unwrap()
    }

    fn channel_of_indicator(rel: &RelViz) -> Option<String> {
        INDICATOR_CHANNELS
            .iter()
            .find(|c| {
                rel.style.get(&PropertyPath::keys(["encoding", c, "field"]))
                    == Some(&StyleValue::text("_source"))
            })
            .map(|c| c.to_string())
    }

    #[test]
    fn indicator_goes_to_first_idle_channel() {
        let out = assign_indicator_channel(&indicator_rel(&["x", "y"]));
        assert_eq!(channel_of_indicator(&out).as_deref(), Some("color"));
        assert!(out.mapping.links.iter().any(|l| l.column == "_source"));
        let out = assign_indicator_channel(&indicator_rel(&["x", "color"]));
        assert_eq!(channel_of_indicator(&out).as_deref(), Some("opacity"));
        let busy = indicator_rel(&["color", "opacity", "column", "row"]);
        let out = assign_indicator_channel(&busy);
        assert_eq!(out, busy);
    }

    #[test]
    fn indicator_on_empty_encoding() {
        let doc = r#"{"data": {"values": [{"_source": "left"}]}, "encoding": {}}"#;
        let rel = from_spec(&parse_spec(doc).unwrap(), true).unwrap();
        let out = assign_indicator_channel(&rel);
        assert_eq!(channel_of_indicator(&out).as_deref(), Some("color"));
        crate::relational::to_spec(&out).unwrap();
    }
}
