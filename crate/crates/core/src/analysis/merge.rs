use std::fmt;

use serde_json::Value;

use super::AnalysisError;
use crate::operators::{difference, On, OpParams};
use crate::relational::{
    infer_primary_key, DataTable, PropertyPath, RelViz, StyleRow, StyleTable, StyleValue,
};
use crate::value::ScalarValue;

/// A property or data row edited differently on both branches.
#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub path: String,
    pub base: Option<Value>,
    pub ours: Option<Value>,
    pub theirs: Option<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
}

impl fmt::Display for ConflictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &Option<Value>| v.as_ref().map_or("(absent)".to_string(), Value::to_string);
        for c in &self.conflicts {
            writeln!(
                f,
                "conflict at {}: base {}, ours {}, theirs {}",
                c.path,
                show(&c.base),
                show(&c.ours),
                show(&c.theirs)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MergeOutcome {
    Merged(RelViz),
    Conflict(ConflictReport),
}

/// Edits from `base` to one branch: each changed path with its new value,
/// `None` for a removal.
fn style_edits(base: &RelViz, branch: &RelViz) -> Vec<(PropertyPath, Option<StyleValue>)> {
    let (_, diff) = difference(base, branch, OpParams::default().on(On::All));
    let mut edits: Vec<(PropertyPath, Option<StyleValue>)> = Vec::new();
    for row in &diff.base {
        if edits.iter().any(|(p, _)| *p == row.path) {
            continue;
        }
        edits.push((row.path.clone(), branch.style.get(&row.path).cloned()));
    }
    edits
}

fn related(a: &PropertyPath, b: &PropertyPath) -> bool {
    a.starts_with(b) || b.starts_with(a)
}

/// Three-way merge of two branches of `base`.
///
/// Style edits conflict when both branches touch the same path, or paths
/// where one is a prefix of the other, unless both made the identical
/// edit. Data is merged row by row on the base table's primary key. A clean
/// merge applies both branches' edits to `base`.
pub fn merge_versions(base: &RelViz, ours: &RelViz, theirs: &RelViz) -> MergeOutcome {
    let o = style_edits(base, ours);
    let t = style_edits(base, theirs);
    let json = |s: &StyleTable, p: &PropertyPath| s.get(p).map(StyleValue::to_json);
    let mut conflicts = Vec::new();
    for (po, vo) in &o {
        for (pt, vt) in &t {
            if related(po, pt) && !(po == pt && vo == vt) {
                let path = if po.len() <= pt.len() { po } else { pt };
                if conflicts
                    .iter()
                    .any(|c: &Conflict| c.path == path.to_string())
                {
                    continue;
                }
                conflicts.push(Conflict {
                    path: path.to_string(),
                    base: json(&base.style, path),
                    ours: json(&ours.style, path),
                    theirs: json(&theirs.style, path),
                });
            }
        }
    }

    let data = match merge_data(&base.data, &ours.data, &theirs.data) {
        Ok(d) => Some(d),
        Err(mut c) => {
            conflicts.append(&mut c);
            None
        }
    };
    if !conflicts.is_empty() {
        return MergeOutcome::Conflict(ConflictReport { conflicts });
    }

    let mut rows: Vec<StyleRow> = Vec::new();
    let edited = |p: &PropertyPath| {
        o.iter()
            .chain(&t)
            .find(|(q, _)| q == p)
            .map(|(_, v)| v.clone())
    };
    for row in base.style.rows() {
        match edited(&row.path) {
            None => rows.push(row.clone()),
            Some(Some(v)) => rows.push(StyleRow::new(row.path.clone(), v)),
            Some(None) => {}
        }
    }
    for (p, v) in o.iter().chain(&t) {
        if let Some(v) = v {
            if base.style.get(p).is_none() && !rows.iter().any(|r| r.path == *p) {
                rows.push(StyleRow::new(p.clone(), v.clone()));
            }
        }
    }
    let style = StyleTable::from_rows(rows).expect("edit paths are unique");
    let merged = RelViz::new(data.expect("no conflicts"), style);
    if let Err(e) = crate::relational::to_spec(&merged) {
        // edits that are compatible path by path but not as a document,
        // e.g. one branch removes an array element another extends
        return MergeOutcome::Conflict(ConflictReport {
            conflicts: vec![Conflict {
                path: e.to_string(),
                base: None,
                ours: None,
                theirs: None,
            }],
        });
    }
    MergeOutcome::Merged(merged)
}

fn key_text(table: &DataTable, key: &[usize], row: &[ScalarValue]) -> String {
    let parts: Vec<String> = key
        .iter()
        .map(|&c| format!("{}={}", table.columns[c].name, row[c]))
        .collect();
    format!("data<{}>", parts.join(", "))
}

fn merge_data(
    base: &DataTable,
    ours: &DataTable,
    theirs: &DataTable,
) -> Result<DataTable, Vec<Conflict>> {
    if ours == base {
        return Ok(theirs.clone());
    }
    if theirs == base || ours == theirs {
        return Ok(ours.clone());
    }
    let whole = || {
        vec![Conflict {
            path: "data".into(),
            base: None,
            ours: None,
            theirs: None,
        }]
    };
    let names = base.column_names();
    if ours.column_names() != names || theirs.column_names() != names {
        return Err(whole());
    }
    let Some(key) = infer_primary_key(base) else {
        return Err(whole());
    };
    let key: Vec<usize> = key.iter().filter_map(|k| base.column_index(k)).collect();
    let key_of = |row: &[ScalarValue]| key.iter().map(|&c| row[c].clone()).collect::<Vec<_>>();
    let find = |t: &DataTable, k: &[ScalarValue]| -> Result<Option<Vec<ScalarValue>>, ()> {
        let mut hits = t.rows.iter().filter(|r| key_of(r) == k);
        let first = hits.next().cloned();
        if hits.next().is_some() {
            Err(())
        } else {
            Ok(first)
        }
    };
    let mut keys: Vec<Vec<ScalarValue>> = Vec::new();
    for row in base.rows.iter().chain(&ours.rows).chain(&theirs.rows) {
        let k = key_of(row);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out = DataTable::new(base.columns.clone());
    let mut conflicts = Vec::new();
    let records = |r: &Option<Vec<ScalarValue>>| {
        r.as_ref().map(|row| {
            Value::Object(
                names
                    .iter()
                    .zip(row)
                    .map(|(n, v)| (n.to_string(), v.to_json()))
                    .collect(),
            )
        })
    };
    for k in keys {
        let (Ok(b), Ok(o), Ok(t)) = (find(base, &k), find(ours, &k), find(theirs, &k)) else {
            return Err(whole());
        };
        let pick = if o == b {
            t
        } else if t == b || o == t {
            o
        } else {
            let row = o.as_ref().or(t.as_ref()).expect("one side has the row");
            conflicts.push(Conflict {
                path: key_text(base, &key, row),
                base: records(&b),
                ours: records(&o),
                theirs: records(&t),
            });
            continue;
        };
        if let Some(row) = pick {
            out.rows.push(row);
        }
    }
    if conflicts.is_empty() {
        out.provenance = base.provenance;
        Ok(out)
    } else {
        Err(conflicts)
    }
}

/// A version in the history.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionNode {
    /// Every id committed with this content.
    pub ids: Vec<String>,
    pub spec: RelViz,
    pub branches: Vec<String>,
}

/// History of edits. Commits whose content equals an existing node (an
/// empty difference) are folded into it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VersionGraph {
    pub nodes: Vec<VersionNode>,
    /// `(parent, child)` node indices.
    pub edges: Vec<(usize, usize)>,
}

fn identical(a: &RelViz, b: &RelViz) -> bool {
    let (d, s) = difference(a, b, OpParams::default().on(On::All));
    d.is_empty() && s.is_empty() && a.data.column_names() == b.data.column_names()
}

impl VersionGraph {
    pub fn node_of(&self, id: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.ids.iter().any(|i| i == id))
    }

    fn lookup(&self, id: &str) -> Result<usize, AnalysisError> {
        self.node_of(id)
            .ok_or_else(|| AnalysisError::UnknownVersion(id.to_string()))
    }

    /// Records `spec` under `id` as a child of `parents`; returns its node.
    pub fn commit(
        &mut self,
        id: &str,
        spec: RelViz,
        parents: &[&str],
        branch: Option<&str>,
    ) -> Result<usize, AnalysisError> {
        let parents: Vec<usize> = parents
            .iter()
            .map(|p| self.lookup(p))
            .collect::<Result<_, _>>()?;
        let node = match self.nodes.iter().position(|n| identical(&n.spec, &spec)) {
            Some(i) => {
                self.nodes[i].ids.push(id.to_string());
                i
            }
            None => {
                self.nodes.push(VersionNode {
                    ids: vec![id.to_string()],
                    spec,
                    branches: Vec::new(),
                });
                self.nodes.len() - 1
            }
        };
        if let Some(b) = branch {
            if !self.nodes[node].branches.iter().any(|x| x == b) {
                self.nodes[node].branches.push(b.to_string());
            }
        }
        for p in parents {
            if p != node && !self.edges.contains(&(p, node)) {
                self.edges.push((p, node));
            }
        }
        Ok(node)
    }

    /// Merges `ours` and `theirs` against `base`, committing the result as
    /// `id` on success.
    pub fn merge(
        &mut self,
        id: &str,
        base: &str,
        ours: &str,
        theirs: &str,
    ) -> Result<MergeOutcome, AnalysisError> {
        let (b, o, t) = (self.lookup(base)?, self.lookup(ours)?, self.lookup(theirs)?);
        let outcome = merge_versions(
            &self.nodes[b].spec,
            &self.nodes[o].spec,
            &self.nodes[t].spec,
        );
        if let MergeOutcome::Merged(rel) = &outcome {
            self.commit(id, rel.clone(), &[ours, theirs], None)?;
        }
        Ok(outcome)
    }
}
