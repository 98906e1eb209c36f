//! Heuristic primary-key inference: the smallest combination of
//! non-quantitative columns whose values are unique across rows.

use std::collections::HashSet;

use super::table::DataTable;
use crate::value::ScalarValue;

/// Widest column combination searched exhaustively.
pub const MAX_KEY_WIDTH: usize = 4;

/// Returns key column names in table order, or `None` when no combination
/// of eligible columns is unique. Columns containing nulls are not eligible.
pub fn infer_primary_key(table: &DataTable) -> Option<Vec<String>> {
    if table.rows.is_empty() {
        return None;
    }
    let eligible: Vec<usize> = (0..table.columns.len())
        .filter(|&i| table.columns[i].field_type.is_discrete())
        .filter(|&i| table.rows.iter().all(|r| !r[i].is_null()))
        .collect();
    let names = |idx: &[usize]| idx.iter().map(|&i| table.columns[i].name.clone()).collect();
    for width in 1..=eligible.len().min(MAX_KEY_WIDTH) {
        let mut found = None;
        for_each_combination(eligible.len(), width, &mut |combo| {
            if found.is_none() {
                let cols: Vec<usize> = combo.iter().map(|&j| eligible[j]).collect();
                if is_unique(table, &cols) {
                    found = Some(cols);
                }
            }
        });
        if let Some(cols) = found {
            return Some(names(&cols));
        }
    }
    if eligible.len() > MAX_KEY_WIDTH && is_unique(table, &eligible) {
        return Some(names(&eligible));
    }
    None
}

pub(crate) fn is_unique(table: &DataTable, cols: &[usize]) -> bool {
    let mut seen: HashSet<Vec<&ScalarValue>> = HashSet::with_capacity(table.rows.len());
    table
        .rows
        .iter()
        .all(|r| seen.insert(cols.iter().map(|&i| &r[i]).collect()))
}

// Lexicographic k-combinations of 0..n.
fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
