use std::io;

use super::distance::{write_labelled, DistanceMatrix};
use super::AnalysisError;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the whole matrix norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Low-dimensional coordinates, one row per spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub labels: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    /// Kruskal stress-1 of the embedded distances against the input.
    pub stress: f64,
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn k(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let header: Vec<String> = (1..=self.k()).map(|i| format!("dim{i}")).collect();
        write_labelled(out, "label", &header, &self.labels, &self.coords)
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order (ties by original position) and
/// the matching unit eigenvectors as `vectors[i]`.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= JACOBI_TOLERANCE * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v.iter().map(|row| row[i]).collect())
        .collect();
    (values, vectors)
}

fn validate(m: &DistanceMatrix) -> Result<(), AnalysisError> {
    let n = m.n();
    if m.d.iter().any(|row| row.len() != n) {
        return Err(AnalysisError::DegenerateMatrix(
            "matrix is not square".into(),
        ));
    }
    let scale = m.d.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..n {
        for j in 0..n {
            let x = m.d[i][j];
            if !x.is_finite() {
                return Err(AnalysisError::DegenerateMatrix(format!(
                    "entry ({i}, {j}) is not finite"
                )));
            }
            if x < 0.0 {
                return Err(AnalysisError::DegenerateMatrix(format!(
                    "entry ({i}, {j}) is negative"
                )));
            }
            if (x - m.d[j][i]).abs() > 1e-9 * scale.max(1.0) {
                return Err(AnalysisError::DegenerateMatrix(format!(
                    "entry ({i}, {j}) is not symmetric"
                )));
            }
        }
    }
    Ok(())
}

/// Classical (Torgerson) MDS.
///
/// The squared distances are double-centred, the top `k` eigenpairs with
/// non-negative eigenvalues give the axes, and each axis is flipped so its
/// largest-magnitude coordinate is positive. `k` is clamped to `n - 1`;
/// axes without a positive eigenvalue are all zero.
pub fn mds_embed(m: &DistanceMatrix, k: usize) -> Result<Embedding, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::InvalidDimension);
    }
    validate(m)?;
    let n = m.n();
    let k = k.min(n.saturating_sub(1));
    let sq: Vec<Vec<f64>> =
        m.d.iter()
            .map(|row| row.iter().map(|x| x * x).collect())
            .collect();
    let row_mean: Vec<f64> = sq
        .iter()
        .map(|r| r.iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / n.max(1) as f64;
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand))
                .collect()
        })
        .collect();
    let (values, vectors) = jacobi_eigen(b);

    let mut coords = vec![vec![0.0; k]; n];
    let mut eigenvalues = Vec::with_capacity(k);
    for axis in 0..k {
        let lambda = values[axis].max(0.0);
        eigenvalues.push(lambda);
        if lambda == 0.0 {
            continue;
        }
        let vec = &vectors[axis];
        let pivot = (0..n).fold(0, |best, i| {
            if vec[i].abs() > vec[best].abs() {
                i
            } else {
                best
            }
        });
        let sign = if vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * vec[i] * lambda.sqrt();
        }
    }
    let stress = stress(&m.d, &coords);
    Ok(Embedding {
        labels: m.labels.clone(),
        coords,
        stress,
        eigenvalues,
    })
}

fn stress(d: &[Vec<f64>], coords: &[Vec<f64>]) -> f64 {
    let n = d.len();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let e = euclid(&coords[i], &coords[j]);
            num += (d[i][j] - e).powi(2);
            den += d[i][j].powi(2);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_points(points: &[Vec<f64>]) -> DistanceMatrix {
        DistanceMatrix::from_rows(
            points
                .iter()
                .map(|p| points.iter().map(|q| euclid(p, q)).collect())
                .collect(),
        )
    }

    fn assert_reproduces(m: &DistanceMatrix, e: &Embedding, tol: f64) {
        for i in 0..m.n() {
            for j in 0..m.n() {
                let got = euclid(&e.coords[i], &e.coords[j]);
                let want = m.get(i, j);
                assert!(
                    (got - want).abs() <= tol * want.max(1.0),
                    "({i},{j}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn collinear_triple() {
        let m = DistanceMatrix::from_rows(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let e = mds_embed(&m, 2).unwrap();
        assert_reproduces(&m, &e, 1e-9);
        assert!(e.stress < 1e-9);
    }

    #[test]
    fn two_points() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 5.0], vec![5.0, 0.0]]);
        let e = mds_embed(&m, 2).unwrap();
        assert_eq!(e.k(), 1);
        assert!((e.coords[0][0] - e.coords[1][0]).abs() - 5.0 < 1e-12);
        // sign rule: the larger magnitude coordinate is positive
        let big = if e.coords[0][0].abs() >= e.coords[1][0].abs() {
            e.coords[0][0]
        } else {
            e.coords[1][0]
        };
        assert!(big > 0.0);
    }

    #[test]
    fn unit_square() {
        let m = from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let e = mds_embed(&m, 2).unwrap();
        assert!(e.stress <= 1e-9);
        assert_reproduces(&m, &e, 1e-9);
    }

    #[test]
    fn zero_matrix_is_not_an_error() {
        let e = mds_embed(&DistanceMatrix::from_rows(vec![vec![0.0; 3]; 3]), 2).unwrap();
        assert!(e.coords.iter().flatten().all(|x| *x == 0.0));
        assert_eq!(e.stress, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let bad = |d: Vec<Vec<f64>>| mds_embed(&DistanceMatrix::from_rows(d), 2);
        assert!(matches!(
            bad(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]),
            Err(AnalysisError::DegenerateMatrix(_))
        ));
        assert!(matches!(
            bad(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]),
            Err(AnalysisError::DegenerateMatrix(_))
        ));
        assert!(matches!(
            bad(vec![vec![0.0, 1.0]]),
            Err(AnalysisError::DegenerateMatrix(_))
        ));
        assert_eq!(
            mds_embed(&DistanceMatrix::from_rows(vec![vec![0.0]]), 0),
            Err(AnalysisError::InvalidDimension)
        );
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![
            vec![4.0, 1.0, 2.0],
            vec![1.0, 3.0, 0.5],
            vec![2.0, 0.5, 1.0],
        ];
        let (values, vectors) = jacobi_eigen(a.clone());
        for (lambda, v) in values.iter().zip(&vectors) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
                assert!((av - lambda * v[i]).abs() < 1e-10);
            }
        }
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let trace: f64 = values.iter().sum();
        assert!((trace - 8.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn euclidean_planar_sets_are_reproduced(points in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..12)) {
            let points: Vec<Vec<f64>> = points.into_iter().map(|(x, y)| vec![x, y]).collect();
            let m = from_points(&points);
            let e = mds_embed(&m, 2).unwrap();
            assert_reproduces(&m, &e, 1e-6);
        }
    }
}
