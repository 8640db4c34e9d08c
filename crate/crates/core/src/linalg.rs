//! Dense pointwise linear algebra: numerical rank, subspace comparison and
//! Gaussian elimination over jets.

use nalgebra::DMatrix;

use crate::jet::Jet;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_RELATIVE_TOL: f64 = 1e-9;

pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RELATIVE_TOL * top).count()
}

/// Orthonormal basis of the column span.
pub fn orthonormal_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let r = rank(m);
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    // nalgebra does not sort singular values; pick the r largest explicitly
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let cols: Vec<_> = order[..r].iter().map(|&k| u.column(k).into_owned()).collect();
    if cols.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    DMatrix::from_columns(&cols)
}

/// Sine of the largest principal angle between the column spans of `a` and
/// `b`, or 1 when their dimensions differ. Sines stay accurate near zero
/// where arccos of the cosines would not.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let residual = &qb - &qa * (qa.transpose() * &qb);
    residual.svd(false, false).singular_values.max()
}

/// Euclidean distance from `v` to the column span of `basis`.
pub fn distance_to_span(basis: &DMatrix<f64>, v: &[f64]) -> f64 {
    let q = orthonormal_basis(basis);
    let v = nalgebra::DVector::from_column_slice(v);
    let proj = &q * (q.transpose() * &v);
    (v - proj).norm()
}

/// Solves `a x = b` for square jet matrices (row-major `a[i][j]`, `b[i][k]`)
/// by elimination with partial pivoting on values. Returns `None` when a
/// pivot falls below `1e-12` times the largest entry of `a`.
pub fn solve_jets(mut a: Vec<Vec<Jet>>, mut b: Vec<Vec<Jet>>) -> Option<Vec<Vec<Jet>>> {
    let n = a.len();
    let scale = a
        .iter()
        .flatten()
        .map(|j| j.value().abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))?;
        if a[piv][col].value().abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            let f = &a[row][col] * &inv;
            for k in col..n {
                let t = &f * &a[col][k];
                a[row][k] -= &t;
            }
            for k in 0..b[row].len() {
                let t = &f * &b[col][k];
                b[row][k] -= &t;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = a[col][col].recip();
        for k in 0..b[col].len() {
            let mut acc = b[col][k].clone();
            for j in col + 1..n {
                acc -= &(&a[col][j] * &b[j][k]);
            }
            b[col][k] = &acc * &inv;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_degenerate_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert_eq!(rank(&m), 2);
        assert_eq!(rank(&DMatrix::zeros(2, 2)), 0);
    }

    #[test]
    fn small_angles_are_resolved() {
        let e = 1e-11;
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 1, &[1.0, e, 0.0]);
        let d = subspace_distance(&a, &b);
        assert!((d - e).abs() < 1e-15, "{d}");
        let c = DMatrix::from_row_slice(3, 1, &[3.0, 0.0, 0.0]);
        assert!(subspace_distance(&a, &c) < 1e-16);
    }

    #[test]
    fn jet_solve_differentiates_the_inverse() {
        // a(t) = [[1 + t, 1], [0, 2]], solve a x = e_0 near t = 0.5
        let t = Jet::variable(1, 2, 0, 0.5);
        let c = |v| Jet::constant(1, 2, v);
        let a = vec![vec![&c(1.0) + &t, c(1.0)], vec![c(0.0), c(2.0)]];
        let b = vec![vec![c(1.0)], vec![c(0.0)]];
        let x = solve_jets(a, b).unwrap();
        // x0 = 1 / (1 + t)
        assert!((x[0][0].value() - 1.0 / 1.5).abs() < 1e-15);
        assert!((x[0][0].partial(0).unwrap() + 1.0 / 2.25).abs() < 1e-15);
        assert!((x[0][0].second_partial(0, 0).unwrap() - 2.0 / 3.375).abs() < 1e-14);
        assert!(x[1][0].value().abs() < 1e-16);
    }
}
