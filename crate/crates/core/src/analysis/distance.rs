use std::collections::HashMap;
use std::io;

use super::weights::{category, Category, WeightConfig};
use crate::operators::{difference, On, OpParams};
use crate::relational::{DataTable, RelViz};
use crate::value::ScalarValue;

/// Weighted size of the symmetric difference of two specs.
///
/// Every style row present on one side only, compared as (path, value),
/// contributes the weight of its category. Data rows are compared as whole
/// records over the union of both tables' columns; every non-null cell of
/// an unmatched row contributes the `data_cell` weight.
pub fn distance(a: &RelViz, b: &RelViz, weights: &WeightConfig) -> f64 {
    let (_, style) = difference(a, b, OpParams::default().on(On::All));
    let style_part: f64 = style
        .base
        .iter()
        .map(|row| weights.weight(category(&row.path)))
        .sum();
    let cells = unmatched_cells(&a.data, &b.data);
    style_part + cells as f64 * weights.weight(Category::DataCell)
}

fn unmatched_cells(a: &DataTable, b: &DataTable) -> usize {
    if a.rows.is_empty() && b.rows.is_empty() {
        return 0;
    }
    let mut names: Vec<&str> = a.column_names();
    for name in b.column_names() {
        if !names.contains(&name) {
            names.push(name);
        }
    }
    let record = |t: &DataTable, row: &[ScalarValue]| -> Vec<ScalarValue> {
        names
            .iter()
            .map(|n| {
                t.column_index(n)
                    .map_or(ScalarValue::Null, |i| row[i].clone())
            })
            .collect()
    };
    let mut counts: HashMap<Vec<ScalarValue>, isize> = HashMap::new();
    for row in &a.rows {
        *counts.entry(record(a, row)).or_default() += 1;
    }
    for row in &b.rows {
        *counts.entry(record(b, row)).or_default() -= 1;
    }
    counts
        .iter()
        .map(|(rec, n)| n.unsigned_abs() * rec.iter().filter(|v| !v.is_null()).count())
        .sum()
}

/// Pairwise distances with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub d: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, d: Vec<Vec<f64>>) -> Self {
        DistanceMatrix { labels, d }
    }

    /// Unlabelled matrix; labels are the row indices.
    pub fn from_rows(d: Vec<Vec<f64>>) -> Self {
        DistanceMatrix {
            labels: (0..d.len()).map(|i| i.to_string()).collect(),
            d,
        }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    /// Header row of labels; each row starts with its label.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        write_labelled(out, "", &self.labels, &self.labels, &self.d)
    }
}

pub(crate) fn write_labelled<W: io::Write>(
    out: W,
    corner: &str,
    header: &[String],
    labels: &[String],
    rows: &[Vec<f64>],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once(corner.to_string()).chain(header.iter().cloned()))?;
    for (label, row) in labels.iter().zip(rows) {
        w.write_record(std::iter::once(label.clone()).chain(row.iter().map(|x| format!("{x}"))))?;
    }
    w.flush()?;
    Ok(())
}

/// Distance between every pair of specs. Each pair is computed once and
/// mirrored, so the matrix is exactly symmetric with a zero diagonal.
pub fn distance_matrix(
    corpus: &[RelViz],
    labels: Vec<String>,
    weights: &WeightConfig,
) -> DistanceMatrix {
    let n = corpus.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = distance(&corpus[i], &corpus[j], weights);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    DistanceMatrix { labels, d }
}

/// Corpus indices ranked by distance to `query`, ties in corpus order,
/// truncated to `top_k`.
pub fn nearest(
    corpus: &[RelViz],
    query: &RelViz,
    weights: &WeightConfig,
    top_k: usize,
) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = corpus
        .iter()
        .enumerate()
        .map(|(i, r)| (i, distance(query, r, weights)))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    ranked
}
