//! Row matching shared by the three operators.

use std::collections::{HashMap, VecDeque};

use super::{On, OpError, Side};
use crate::relational::{infer_primary_key, Column, DataTable};
use crate::value::ScalarValue;

/// Which columns to compare, by position on each side.
#[derive(Debug, Clone)]
pub(crate) struct JoinPlan {
    pub left_cols: Vec<usize>,
    pub right_cols: Vec<usize>,
    /// Null join cells only match under `on = all`.
    pub nulls_match: bool,
    pub keyed: bool,
}

pub(crate) fn shared_columns(left: &DataTable, right: &DataTable) -> Vec<(usize, usize)> {
    left.columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| right.column_index(&c.name).map(|j| (i, j)))
        .collect()
}

fn all_plan(left: &DataTable, right: &DataTable) -> JoinPlan {
    let shared = shared_columns(left, right);
    JoinPlan {
        left_cols: shared.iter().map(|p| p.0).collect(),
        right_cols: shared.iter().map(|p| p.1).collect(),
        nulls_match: true,
        keyed: false,
    }
}

/// Builds the join plan. With `on = key` the join columns are the shared
/// members of both sides' inferred keys.
pub(crate) fn plan(left: &DataTable, right: &DataTable, on: On) -> Result<JoinPlan, OpError> {
    match on {
        On::All => Ok(all_plan(left, right)),
        On::Key => {
            let lk = infer_primary_key(left).ok_or(OpError::NoKey(Side::Left))?;
            let rk = infer_primary_key(right).ok_or(OpError::NoKey(Side::Right))?;
            let shared = shared_columns(left, right);
            let pairs: Vec<(usize, usize)> = shared
                .into_iter()
                .filter(|(i, _)| {
                    let name = &left.columns[*i].name;
                    lk.contains(name) || rk.contains(name)
                })
                .collect();
            if pairs.is_empty() {
                return Err(OpError::NoKey(Side::Left));
            }
            Ok(JoinPlan {
                left_cols: pairs.iter().map(|p| p.0).collect(),
                right_cols: pairs.iter().map(|p| p.1).collect(),
                nulls_match: false,
                keyed: true,
            })
        }
    }
}

/// Like [`plan`], but falls back to all shared columns when no key exists.
pub(crate) fn plan_or_all(left: &DataTable, right: &DataTable, on: On) -> JoinPlan {
    plan(left, right, on).unwrap_or_else(|_| all_plan(left, right))
}

/// For each left row, the right row it pairs with. Each right row pairs
/// with at most one left row, the earliest unpaired one.
pub(crate) fn match_rows(
    left: &DataTable,
    right: &DataTable,
    plan: &JoinPlan,
) -> Vec<Option<usize>> {
    if plan.left_cols.is_empty() {
        return vec![None; left.rows.len()];
    }
    let joinable = |row: &[ScalarValue], cols: &[usize]| {
        plan.nulls_match || cols.iter().all(|&c| !row[c].is_null())
    };
    let mut index: HashMap<Vec<&ScalarValue>, VecDeque<usize>> = HashMap::new();
    for (j, row) in right.rows.iter().enumerate() {
        if joinable(row, &plan.right_cols) {
            index
                .entry(plan.right_cols.iter().map(|&c| &row[c]).collect())
                .or_default()
                .push_back(j);
        }
    }
    left.rows
        .iter()
        .map(|row| {
            if !joinable(row, &plan.left_cols) {
                return None;
            }
            let key: Vec<&ScalarValue> = plan.left_cols.iter().map(|&c| &row[c]).collect();
            index.get_mut(&key).and_then(VecDeque::pop_front)
        })
        .collect()
}

/// Output layout: left columns, then right-only columns.
pub(crate) struct Layout {
    pub columns: Vec<Column>,
    /// For each right column, its position in the output.
    pub right_pos: Vec<usize>,
    pub left_len: usize,
}

impl Layout {
    pub fn new(left: &DataTable, right: &DataTable) -> Self {
        let mut columns = left.columns.clone();
        let right_pos = right
            .columns
            .iter()
            .map(|c| match left.column_index(&c.name) {
                Some(i) => i,
                None => {
                    columns.push(c.clone());
                    columns.len() - 1
                }
            })
            .collect();
        Layout {
            columns,
            right_pos,
            left_len: left.columns.len(),
        }
    }

    pub fn widen_left(&self, row: &[ScalarValue]) -> Vec<ScalarValue> {
        let mut out = row.to_vec();
        out.resize(self.columns.len(), ScalarValue::Null);
        out
    }

    pub fn widen_right(&self, row: &[ScalarValue]) -> Vec<ScalarValue> {
        let mut out = vec![ScalarValue::Null; self.columns.len()];
        for (j, v) in row.iter().enumerate() {
            out[self.right_pos[j]] = v.clone();
        }
        out
    }

    /// Combines a matched pair; `prefer` wins where both cells are non-null.
    pub fn combine(&self, l: &[ScalarValue], r: &[ScalarValue], prefer: Side) -> Vec<ScalarValue> {
        let mut out = self.widen_left(l);
        for (j, v) in r.iter().enumerate() {
            let slot = &mut out[self.right_pos[j]];
            if slot.is_null() || (prefer == Side::Right && !v.is_null()) {
                *slot = v.clone();
            }
        }
        out
    }

    /// Shared columns whose non-null values disagree.
    pub fn conflicts(&self, l: &[ScalarValue], r: &[ScalarValue]) -> Vec<usize> {
        let mut out = Vec::new();
        for (j, v) in r.iter().enumerate() {
            let pos = self.right_pos[j];
            if pos < self.left_len && !v.is_null() && !l[pos].is_null() && l[pos] != *v {
                out.push(pos);
            }
        }
        out
    }
}
