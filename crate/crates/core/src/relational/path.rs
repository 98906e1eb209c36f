//! Dash-joined property paths and the flatten/unflatten pair.
//!
//! A literal `-` inside a key is written as `--`. Array positions are
//! numeric segments. A key whose rendering would not parse back to the same
//! segments (for example an all-digit object key, an empty key, or a key
//! that begins with a dash) is rejected with [`PathError::KeyCollision`].

use std::fmt;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::value::ScalarValue;

pub const SEPARATOR: char = '-';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("key collision: `{path}` does not identify a unique property")]
    KeyCollision { path: String },
    #[error("inconsistent paths at `{path}`: {reason}")]
    Inconsistent { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Key(String),
    Index(usize),
}

impl Segment {
    pub fn key(&self) -> Option<&str> {
        match self {
            Segment::Key(k) => Some(k),
            Segment::Index(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PropertyPath(Vec<Segment>);

impl PropertyPath {
    pub fn new(segments: Vec<Segment>) -> Self {
        PropertyPath(segments)
    }

    pub fn keys<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PropertyPath(keys.into_iter().map(|k| Segment::Key(k.into())).collect())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first_key(&self) -> Option<&str> {
        self.0.first().and_then(Segment::key)
    }

    pub fn last(&self) -> Option<&Segment> {
        self.0.last()
    }

    /// Last segment that is an object key.
    pub fn last_key(&self) -> Option<&str> {
        self.0.iter().rev().find_map(Segment::key)
    }

    pub fn parent(&self) -> Option<PropertyPath> {
        (!self.0.is_empty()).then(|| PropertyPath(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn child(&self, seg: Segment) -> PropertyPath {
        let mut segs = self.0.clone();
        segs.push(seg);
        PropertyPath(segs)
    }

    pub fn starts_with(&self, prefix: &PropertyPath) -> bool {
        self.0.len() >= prefix.0.len() && self.0[..prefix.0.len()] == prefix.0[..]
    }

    /// Parses the dash-joined text form.
    pub fn parse(text: &str) -> PropertyPath {
        if text.is_empty() {
            return PropertyPath::default();
        }
        let mut segments = Vec::new();
        let mut current = String::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if c == SEPARATOR {
                if chars.peek() == Some(&SEPARATOR) {
                    chars.next();
                    current.push(SEPARATOR);
                } else {
                    segments.push(classify(std::mem::take(&mut current)));
                }
            } else {
                current.push(c);
            }
        }
        segments.push(classify(current));
        PropertyPath(segments)
    }
}

fn classify(raw: String) -> Segment {
    let canonical_number = !raw.is_empty()
        && raw.bytes().all(|b| b.is_ascii_digit())
        && (raw == "0" || !raw.starts_with('0'));
    match raw.parse::<usize>() {
        Ok(i) if canonical_number => Segment::Index(i),
        _ => Segment::Key(raw),
    }
}

impl fmt::Display for PropertyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "{SEPARATOR}")?;
            }
            match seg {
                Segment::Key(k) => f.write_str(&k.replace(SEPARATOR, "--"))?,
                Segment::Index(n) => write!(f, "{n}")?,
            }
        }
        Ok(())
    }
}

impl From<&str> for PropertyPath {
    fn from(text: &str) -> Self {
        PropertyPath::parse(text)
    }
}

/// A style leaf. Empty containers are leaves too, so that they survive the
/// round trip.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StyleValue {
    Scalar(ScalarValue),
    EmptyObject,
    EmptyArray,
}

impl StyleValue {
    pub fn text(s: impl Into<String>) -> Self {
        StyleValue::Scalar(ScalarValue::Text(s.into()))
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            StyleValue::Scalar(ScalarValue::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn from_json_leaf(value: &Value) -> Option<Self> {
        match value {
            Value::Object(m) if m.is_empty() => Some(StyleValue::EmptyObject),
            Value::Array(a) if a.is_empty() => Some(StyleValue::EmptyArray),
            other => ScalarValue::from_json_plain(other).map(StyleValue::Scalar),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            StyleValue::Scalar(s) => s.to_json(),
            StyleValue::EmptyObject => Value::Object(Map::new()),
            StyleValue::EmptyArray => Value::Array(Vec::new()),
        }
    }
}

impl fmt::Display for StyleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StyleValue::Scalar(s) => write!(f, "{s}"),
            StyleValue::EmptyObject => f.write_str("{}"),
            StyleValue::EmptyArray => f.write_str("[]"),
        }
    }
}

/// Depth-first enumeration of the leaves of `tree`.
pub fn flatten(tree: &Value) -> Result<Vec<(PropertyPath, StyleValue)>, PathError> {
    let mut out = Vec::new();
    match tree {
        // The root object itself is not a leaf, even when empty.
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(v, vec![Segment::Key(k.clone())], &mut out)?;
            }
        }
        other => flatten_into(other, Vec::new(), &mut out)?,
    }
    Ok(out)
}

fn flatten_into(
    value: &Value,
    prefix: Vec<Segment>,
    out: &mut Vec<(PropertyPath, StyleValue)>,
) -> Result<(), PathError> {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                let mut path = prefix.clone();
                path.push(Segment::Key(k.clone()));
                flatten_into(v, path, out)?;
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, v) in items.iter().enumerate() {
                let mut path = prefix.clone();
                path.push(Segment::Index(i));
                flatten_into(v, path, out)?;
            }
        }
        leaf => {
            let path = PropertyPath(prefix);
            let rendered = path.to_string();
            if PropertyPath::parse(&rendered) != path {
                return Err(PathError::KeyCollision { path: rendered });
            }
            let v = StyleValue::from_json_leaf(leaf).expect("non-empty containers handled above");
            out.push((path, v));
        }
    }
    Ok(())
}

#[derive(Debug)]
enum Node {
    Leaf(Option<Value>),
    Object(Vec<(String, Node)>),
    Array(Vec<(usize, Node)>),
}

/// Rebuilds a tree from leaf rows. Arrays must be dense (indices `0..n`).
/// An empty path list yields an empty object.
pub fn unflatten<'a, I>(rows: I) -> Result<Value, PathError>
where
    I: IntoIterator<Item = (&'a PropertyPath, &'a StyleValue)>,
{
    let mut root = Node::Object(Vec::new());
    for (path, value) in rows {
        insert(&mut root, path.segments(), value.to_json(), path)?;
    }
    finish(root, &PropertyPath::default())
}

fn insert(
    node: &mut Node,
    segs: &[Segment],
    value: Value,
    full: &PropertyPath,
) -> Result<(), PathError> {
    let inconsistent = |reason: &str| PathError::Inconsistent {
        path: full.to_string(),
        reason: reason.to_string(),
    };
    let Some((head, rest)) = segs.split_first() else {
        return Err(inconsistent("property is both a value and a container"));
    };
    let slot: &mut Node = match (node, head) {
        (Node::Object(entries), Segment::Key(k)) => {
            if let Some(pos) = entries.iter().position(|(ek, _)| ek == k) {
                &mut entries[pos].1
            } else {
                entries.push((k.clone(), placeholder(rest)));
                &mut entries.last_mut().unwrap().1
            }
        }
        (Node::Array(entries), Segment::Index(i)) => {
            if let Some(pos) = entries.iter().position(|(ei, _)| ei == i) {
                &mut entries[pos].1
            } else {
                entries.push((*i, placeholder(rest)));
                &mut entries.last_mut().unwrap().1
            }
        }
        (Node::Leaf(_), _) => return Err(inconsistent("property is both a value and a container")),
        _ => {
            return Err(inconsistent(
                "object key and array index mixed at one level",
            ))
        }
    };
    if rest.is_empty() {
        match slot {
            Node::Leaf(v @ None) => {
                *v = Some(value);
                Ok(())
            }
            _ => Err(inconsistent("duplicate property")),
        }
    } else {
        if matches!(slot, Node::Leaf(_)) {
            return Err(inconsistent("property is both a value and a container"));
        }
        insert(slot, rest, value, full)
    }
}

fn placeholder(rest: &[Segment]) -> Node {
    match rest.first() {
        None => Node::Leaf(None),
        Some(Segment::Key(_)) => Node::Object(Vec::new()),
        Some(Segment::Index(_)) => Node::Array(Vec::new()),
    }
}

fn finish(node: Node, path: &PropertyPath) -> Result<Value, PathError> {
    match node {
        Node::Leaf(v) => Ok(v.unwrap_or(Value::Null)),
        Node::Object(entries) => {
            let mut map = Map::new();
            for (k, child) in entries {
                let child_path = path.child(Segment::Key(k.clone()));
                map.insert(k, finish(child, &child_path)?);
            }
            Ok(Value::Object(map))
        }
        Node::Array(mut entries) => {
            entries.sort_by_key(|(i, _)| *i);
            let mut items = Vec::with_capacity(entries.len());
            for (expected, (i, child)) in entries.into_iter().enumerate() {
                if i != expected {
                    return Err(PathError::Inconsistent {
                        path: path.to_string(),
                        reason: format!("array index {expected} missing"),
                    });
                }
                items.push(finish(child, &path.child(Segment::Index(i)))?);
            }
            Ok(Value::Array(items))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    fn texts(rows: &[(PropertyPath, StyleValue)]) -> Vec<(String, Value)> {
        rows.iter()
            .map(|(p, v)| (p.to_string(), v.to_json()))
            .collect()
    }

    fn rebuild(rows: &[(PropertyPath, StyleValue)]) -> Value {
        unflatten(rows.iter().map(|(p, v)| (p, v))).unwrap()
    }

    #[test]
    fn flattens_encoding_field() {
        let rows = flatten(&json!({"encoding": {"x": {"field": "F"}}})).unwrap();
        assert_eq!(
            texts(&rows),
            vec![("encoding-x-field".to_string(), json!("F"))]
        );
    }

    #[test]
    fn empty_tree_has_no_rows() {
        assert!(flatten(&json!({})).unwrap().is_empty());
        assert_eq!(rebuild(&[]), json!({}));
    }

    #[test]
    fn arrays_use_numeric_segments() {
        let tree = json!({"k": ["a", "b"]});
        let rows = flatten(&tree).unwrap();
        assert_eq!(
            texts(&rows),
            vec![("k-0".into(), json!("a")), ("k-1".into(), json!("b"))]
        );
        assert_eq!(rebuild(&rows), tree);
    }

    #[test]
    fn empty_containers_are_leaves() {
        let tree = json!({"config": {}, "transform": [], "a": {"b": [[], {}]}});
        let rows = flatten(&tree).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rebuild(&rows), tree);
    }

    #[test]
    fn dashes_in_keys_are_escaped() {
        let tree = json!({"axis-x": {"label-angle": 45}, "a-": {"b": 1}});
        let rows = flatten(&tree).unwrap();
        assert_eq!(rows[0].0.to_string(), "axis--x-label--angle");
        assert_eq!(PropertyPath::parse("axis--x-label--angle"), rows[0].0);
        assert_eq!(rows[1].0.to_string(), "a---b");
        assert_eq!(rebuild(&rows), tree);
    }

    #[test]
    fn colliding_keys_are_rejected() {
        for tree in [
            json!({"a": {"-b": 1}}),
            json!({"a": {"0": 1}}),
            json!({"": 1}),
        ] {
            assert!(
                matches!(flatten(&tree), Err(PathError::KeyCollision { .. })),
                "{tree}"
            );
        }
    }

    #[test]
    fn unflatten_rejects_inconsistent_rows() {
        let leaf = StyleValue::text("bar");
        let a = PropertyPath::parse("mark");
        let b = PropertyPath::parse("mark-type");
        assert!(unflatten([(&a, &leaf), (&b, &leaf)]).is_err());
        let gap = PropertyPath::parse("t-1");
        assert!(unflatten([(&gap, &leaf)]).is_err());
        assert!(unflatten([(&a, &leaf), (&a, &leaf)]).is_err());
    }

    #[test]
    fn three_level_nesting_matches_independent_flattener() {
        // Independent recursive flattener producing dash-joined strings.
        fn oracle(v: &Value, prefix: &str, out: &mut Vec<(String, Value)>) {
            let join = |k: &str| {
                let k = k.replace('-', "--");
                if prefix.is_empty() {
                    k
                } else {
                    format!("{prefix}-{k}")
                }
            };
            match v {
                Value::Object(m) if !m.is_empty() => {
                    m.iter().for_each(|(k, c)| oracle(c, &join(k), out))
                }
                Value::Array(a) if !a.is_empty() => a
                    .iter()
                    .enumerate()
                    .for_each(|(i, c)| oracle(c, &join(&i.to_string()), out)),
                leaf => out.push((prefix.to_string(), leaf.clone())),
            }
        }
        use proptest::strategy::ValueTree;
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        for _ in 0..100 {
            let tree = arb_tree(3).new_tree(&mut runner).unwrap().current();
            let tree = json!({ "encoding": tree });
            let mut expected = Vec::new();
            oracle(&tree, "", &mut expected);
            let rows = flatten(&tree).unwrap();
            assert_eq!(texts(&rows), expected);
            assert_eq!(rebuild(&rows), tree);
        }
    }

    fn arb_leaf() -> impl Strategy<Value = Value> {
        prop_oneof![
            Just(Value::Null),
            any::<bool>().prop_map(Value::Bool),
            (-1000i64..1000).prop_map(|n| json!(n)),
            (-1e6f64..1e6).prop_map(|x| json!(x)),
            "[a-z ]{0,6}".prop_map(Value::String),
        ]
    }

    fn arb_tree(depth: u32) -> impl Strategy<Value = Value> {
        arb_leaf().prop_recursive(depth, 64, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..4).prop_map(Value::Array),
                prop::collection::btree_map("[a-z]{1,5}(-[a-z]{1,3})?", inner, 0..4)
                    .prop_map(|m| Value::Object(m.into_iter().collect())),
            ]
        })
    }

    proptest! {
        #[test]
        fn flatten_unflatten_are_inverses(tree in prop::collection::btree_map("[a-z]{1,4}", arb_tree(6), 0..5)) {
            let tree = Value::Object(tree.into_iter().collect());
            let rows = flatten(&tree).unwrap();
            prop_assert_eq!(rebuild(&rows), tree);
            for (path, _) in &rows {
                prop_assert_eq!(&PropertyPath::parse(&path.to_string()), path);
            }
        }
    }
}
