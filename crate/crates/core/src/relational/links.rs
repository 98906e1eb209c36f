//! Which style properties name data fields.
//!
//! Only structural references count: `field`, `as`, `pivot`, and the
//! elements of `groupby`, `fields`, `fold` and `flatten` lists. Field names
//! inside string expressions are not recognised.

use std::collections::BTreeSet;

use super::path::{PropertyPath, Segment};
use super::table::StyleTable;

const FIELD_KEYS: [&str; 3] = ["field", "as", "pivot"];
const FIELD_LIST_KEYS: [&str; 5] = ["groupby", "fields", "fold", "flatten", "as"];

pub fn is_field_reference(path: &PropertyPath) -> bool {
    let segs = path.segments();
    match segs {
        [.., Segment::Key(k)] => FIELD_KEYS.contains(&k.as_str()),
        [.., Segment::Key(k), Segment::Index(_)] => FIELD_LIST_KEYS.contains(&k.as_str()),
        _ => false,
    }
}

/// Paths that declare a new field (`as` outputs of transforms).
pub fn is_output_declaration(path: &PropertyPath) -> bool {
    let segs = path.segments();
    path.first_key() == Some("transform")
        && matches!(
            segs,
            [.., Segment::Key(k)] | [.., Segment::Key(k), Segment::Index(_)] if k == "as"
        )
}

/// Field-referencing leaves with text values, in style-table order.
pub fn field_references(style: &StyleTable) -> Vec<(PropertyPath, String)> {
    style
        .rows()
        .iter()
        .filter(|r| is_field_reference(&r.path))
        .filter_map(|r| r.value.as_text().map(|t| (r.path.clone(), t.to_string())))
        .collect()
}

/// Names of fields produced by transforms.
pub fn derived_fields(style: &StyleTable) -> BTreeSet<String> {
    style
        .rows()
        .iter()
        .filter(|r| is_output_declaration(&r.path))
        .filter_map(|r| r.value.as_text().map(str::to_string))
        .collect()
}
