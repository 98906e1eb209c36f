use std::cmp::Ordering;

use super::distance::DistanceMatrix;
use super::AnalysisError;

fn check_index(m: &DistanceMatrix, index: usize) -> Result<(), AnalysisError> {
    if index < m.n() {
        Ok(())
    } else {
        Err(AnalysisError::IndexOutOfRange { index, len: m.n() })
    }
}

/// Greedy nearest-neighbour tour from `start`: repeatedly step to the
/// closest unvisited item, the lowest index winning ties.
pub fn sequence(m: &DistanceMatrix, start: usize) -> Result<Vec<usize>, AnalysisError> {
    check_index(m, start)?;
    let n = m.n();
    let mut visited = vec![false; n];
    let mut order = vec![start];
    visited[start] = true;
    let mut current = start;
    while order.len() < n {
        let next = (0..n)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| {
                m.get(current, a)
                    .total_cmp(&m.get(current, b))
                    .then(a.cmp(&b))
            })
            .expect("an unvisited item remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    Ok(order)
}

/// Minimum-weight path over the complete graph whose edge weights are the
/// matrix entries. Among equally short paths the lexicographically smallest
/// node sequence wins.
pub fn shortest_path(
    m: &DistanceMatrix,
    src: usize,
    dst: usize,
) -> Result<(Vec<usize>, f64), AnalysisError> {
    check_index(m, src)?;
    check_index(m, dst)?;
    let n = m.n();
    let better = |a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1 < b.1,
        o => o == Ordering::Less,
    };
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; n];
    let mut done = vec![false; n];
    best[src] = Some((0.0, vec![src]));
    while let Some(u) = (0..n)
        .filter(|&i| !done[i] && best[i].is_some())
        .reduce(|a, b| {
            if better(best[b].as_ref().unwrap(), best[a].as_ref().unwrap()) {
                b
            } else {
                a
            }
        })
    {
        done[u] = true;
        if u == dst {
            break;
        }
        let (du, pu) = best[u].clone().expect("settled node has a label");
        for v in 0..n {
            if done[v] || v == u {
                continue;
            }
            let mut path = pu.clone();
            path.push(v);
            let cand = (du + m.get(u, v), path);
            if best[v].as_ref().is_none_or(|cur| better(&cand, cur)) {
                best[v] = Some(cand);
            }
        }
    }
    let (total, path) = best[dst]
        .clone()
        .expect("complete graph reaches every node");
    Ok((path, total))
}
