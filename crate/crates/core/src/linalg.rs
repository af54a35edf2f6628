//! Dense complex linear algebra helpers on top of nalgebra.
//!
//! Vectorization is column-stacking throughout, so that
//! `vec(L·H·R) = (Rᵀ ⊗ L)·vec(H)`.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Eigenvalues from the complex Schur form (diagonal of the triangular factor).
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_of(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`] for an `rows × cols` matrix.
pub fn unvec(v: &[Complex64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v)
}

/// Block-diagonal `a ⊕ b`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = (a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(p + q, a.ncols() + b.ncols());
    out.view_mut((0, 0), (p, a.ncols())).copy_from(a);
    out.view_mut((p, a.ncols()), (q, b.ncols())).copy_from(b);
    out
}

/// `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn block2x2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Extracts the `(bi, bj)` block of size `n` from a block matrix.
pub fn block(m: &CMatrix, bi: usize, bj: usize, n: usize) -> CMatrix {
    m.view((bi * n, bj * n), (n, n)).into_owned()
}

/// Solves `m·x = rhs` by LU; `None` when the factorization is singular.
pub fn lu_solve(m: &CMatrix, rhs: &CVector) -> Option<CVector> {
    m.clone().lu().solve(rhs)
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, vals: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, cols, &vals.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn vec_identity_for_triple_products() {
        let l = CMatrix::from_fn(2, 2, |i, j| c64(i as f64 + 1.0, j as f64 - 0.5));
        let h = CMatrix::from_fn(2, 2, |i, j| c64((i * 2 + j) as f64, 1.0));
        let r = CMatrix::from_fn(2, 2, |i, j| c64(j as f64 * 3.0 - i as f64, -0.25));
        let lhs = vec_of(&(&l * &h * &r));
        let rhs = kron(&r.transpose(), &l) * vec_of(&h);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn unvec_inverts_vec() {
        let a = CMatrix::from_fn(3, 2, |i, j| c64(i as f64, j as f64));
        let v = vec_of(&a);
        assert_eq!(unvec(v.as_slice(), 3, 2), a);
        assert_eq!(v[1], a[(1, 0)]);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let a = m(3, 3, &[1.0, 5.0, 2.0, 0.0, -2.0, 7.0, 0.0, 0.0, 4.0]);
        let mut ev: Vec<f64> = eigenvalues(&a).iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-2.0, 1.0, 4.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvalues_of_rotation_are_complex() {
        let a = m(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let mut ev = eigenvalues(&a);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant() {
        let a = CMatrix::from_fn(4, 4, |i, j| {
            c64(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.5)
        });
        let ev = eigenvalues(&a);
        let tr: Complex64 = ev.iter().sum();
        let det: Complex64 = ev.iter().product();
        assert!((tr - a.trace()).norm() < 1e-9);
        assert!((det - a.determinant()).norm() < 1e-8 * a.determinant().norm().max(1.0));
    }

    #[test]
    fn op_norm_of_block_diag_is_max() {
        let a = m(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let b = m(1, 1, &[-5.0]);
        assert!((op_norm(&block_diag(&a, &b)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn block_extraction() {
        let a = identity(2);
        let z = CMatrix::zeros(2, 2);
        let b = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let big = block2x2(&a, &b, &z, &a);
        assert_eq!(block(&big, 0, 1, 2), b);
        assert_eq!(block(&big, 1, 0, 2), z);
    }

    #[test]
    fn condition_of_singular_is_infinite() {
        assert!(
            condition_number(&m(2, 2, &[1.0, 2.0, 2.0, 4.0])).is_infinite()
                || condition_number(&m(2, 2, &[1.0, 2.0, 2.0, 4.0])) > 1e15
        );
        assert!((condition_number(&identity(3)) - 1.0).abs() < 1e-12);
    }
}
