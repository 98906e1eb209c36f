//! Natural-language rendering of style differences.

use std::collections::BTreeMap;

use super::{Indicator, MarkedStyle};
use crate::relational::{Segment, StyleRow};

/// One sentence per change. Channels that appear on one side only are
/// described as whole encodings; everything else property by property.
pub fn render_style_difference(diff: &MarkedStyle) -> Vec<String> {
    let rows: Vec<(&StyleRow, Indicator)> = diff
        .base
        .iter()
        .zip(diff.indicator.iter().copied())
        .collect();
    let channel_of = |row: &StyleRow| match row.path.segments() {
        [Segment::Key(root), Segment::Key(ch), ..] if root == "encoding" => Some(ch.clone()),
        _ => None,
    };
    // channels whose rows all sit on one side
    let mut sides: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    for (row, ind) in &rows {
        if let Some(ch) = channel_of(row) {
            let e = sides.entry(ch).or_default();
            match ind {
                Indicator::Left => e.0 = true,
                Indicator::Right => e.1 = true,
                Indicator::Both => {}
            }
        }
    }
    let mut whole: BTreeMap<String, Indicator> = BTreeMap::new();
    for (ch, (l, r)) in &sides {
        if l != r {
            whole.insert(
                ch.clone(),
                if *l {
                    Indicator::Left
                } else {
                    Indicator::Right
                },
            );
        }
    }

    let mut out = Vec::new();
    let mut described: Vec<String> = Vec::new();
    for (row, ind) in &rows {
        if let Some(ch) = channel_of(row) {
            if let Some(side) = whole.get(&ch) {
                if described.contains(&ch) {
                    continue;
                }
                described.push(ch.clone());
                let field = rows
                    .iter()
                    .filter(|(r, i)| i == side && channel_of(r).as_deref() == Some(ch.as_str()))
                    .find(|(r, _)| {
                        r.path.segments().len() == 3 && r.path.last_key() == Some("field")
                    })
                    .and_then(|(r, _)| r.value.as_text().map(str::to_string));
                let verb = if *side == Indicator::Right {
                    "adding"
                } else {
                    "removing"
                };
                out.push(match (field, side) {
                    (Some(f), Indicator::Right) => {
                        format!("adding a new encoding by assigning the data field {f} to the encoding channel {ch}")
                    }
                    (Some(f), _) => {
                        format!("removing the encoding of the data field {f} from the encoding channel {ch}")
                    }
                    (None, _) => format!("{verb} the encoding channel {ch}"),
                });
                continue;
            }
        }
        let counterpart = rows
            .iter()
            .find(|(r, i)| r.path == row.path && *i == ind.swapped() && *i != Indicator::Both);
        match (ind, counterpart) {
            (Indicator::Left, Some((r, _))) => out.push(format!(
                "changing {} from {} to {}",
                row.path,
                row.value.to_json(),
                r.value.to_json()
            )),
            (Indicator::Right, Some(_)) => {}
            (Indicator::Left, None) => out.push(format!(
                "removing {} (was {})",
                row.path,
                row.value.to_json()
            )),
            (Indicator::Right, None) => {
                out.push(format!("setting {} to {}", row.path, row.value.to_json()))
            }
            (Indicator::Both, _) => {
                out.push(format!("keeping {} as {}", row.path, row.value.to_json()))
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{difference, On, OpParams};
    use crate::relational::from_spec;
    use crate::spec::parse_spec;

    fn rel(doc: &str) -> crate::RelViz {
        from_spec(&parse_spec(doc).unwrap(), true).unwrap()
    }

    #[test]
    fn new_encoding_sentence() {
        let a = rel(
            r#"{"mark": "line", "encoding": {"y": {"field": "Price", "type": "quantitative"}}}"#,
        );
        let b = rel(
            r#"{"mark": "line", "encoding": {"y": {"field": "Price", "type": "quantitative"},
            "x": {"field": "Year", "type": "temporal"}}}"#,
        );
        let (_, s) = difference(&a, &b, OpParams::default().on(On::All));
        assert_eq!(
            render_style_difference(&s),
            vec![
                "adding a new encoding by assigning the data field Year to the encoding channel x"
            ]
        );
    }

    #[test]
    fn changed_and_removed_properties() {
        let a = rel(r#"{"mark": "bar", "title": "t", "encoding": {"x": {"field": "a"}}}"#);
        let b = rel(r#"{"mark": "line", "encoding": {"x": {"field": "a"}}}"#);
        let (_, s) = difference(&a, &b, OpParams::default().on(On::All));
        assert_eq!(
            render_style_difference(&s),
            vec![
                "changing mark from \"bar\" to \"line\"",
                "removing title (was \"t\")"
            ]
        );
    }
}
