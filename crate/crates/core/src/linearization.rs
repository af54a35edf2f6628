//! The derivative `H ↦ DP(X)[H]` as an explicit matrix, singularity
//! certificates for it, and Sylvester equations `A·H + H·B = C`.
//!
//! Directions are vectorized by column-stacking each component and
//! concatenating, so a Leibniz term `L·H_j·R` contributes `Rᵀ ⊗ L` to block
//! column `j` of its output's block row.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigenvalues, frobenius, identity, kron, lu_solve, op_norm, vec_of, CMatrix, CVector};
use crate::matrixeval::{EvalError, MatrixTuple};
use crate::ncpoly::FreePolyMap;
use crate::parser::map_digest;

/// Relative threshold on `σ_min / max(1, σ_max)` below which a matrix is declared singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-8;

/// Relative threshold on the Sylvester eigenvalue-sum margin.
pub const SYLVESTER_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearizationError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(
        "Sylvester equation is near-singular: λ = {lambda} and μ = {mu} give |λ + μ| = {margin:e} (tolerance {tolerance:e})"
    )]
    NearSingular {
        lambda: Complex64,
        mu: Complex64,
        margin: f64,
        tolerance: f64,
    },
    #[error("Sylvester residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
}

/// Dense matrix of `H ↦ DP(X)[H]`, shape `(N̂·n²) × (N·n²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMatrix {
    pub matrix: CMatrix,
    pub num_outputs: usize,
    pub num_vars: usize,
    pub n: usize,
    pub map_digest: String,
    pub point_digest: String,
}

impl DerivativeMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Applies the matrix to a direction tuple.
    pub fn apply(&self, h: &MatrixTuple) -> Result<MatrixTuple, EvalError> {
        if h.len() != self.num_vars || h.size() != self.n {
            return Err(EvalError::SizeMismatch {
                left: self.num_vars * self.n,
                right: h.len() * h.size(),
            });
        }
        let v = CVector::from_vec(h.to_vec());
        let out = &self.matrix * v;
        MatrixTuple::from_vec(out.as_slice(), self.num_outputs, self.n)
    }
}

pub fn derivative_matrix(p: &FreePolyMap, x: &MatrixTuple) -> Result<DerivativeMatrix, EvalError> {
    if x.len() != p.num_vars() {
        return Err(EvalError::VarCountMismatch {
            expected: p.num_vars(),
            found: x.len(),
        });
    }
    let n = x.size();
    let nn = n * n;
    let mats = x.matrices();
    let mut out = CMatrix::zeros(p.num_outputs() * nn, p.num_vars() * nn);
    for (row_block, comp) in p.components().iter().enumerate() {
        for (w, c) in comp.terms() {
            let letters = w.letters();
            let d = letters.len();
            if d == 0 {
                continue;
            }
            // prefix[k] = X_{w0}…X_{w(k-1)}, suffix[k] = X_{wk}…X_{w(d-1)}
            let mut prefix = Vec::with_capacity(d + 1);
            prefix.push(identity(n));
            for &l in letters {
                let next = prefix.last().unwrap() * &mats[l as usize];
                prefix.push(next);
            }
            let mut suffix = vec![identity(n); d + 1];
            for k in (0..d).rev() {
                suffix[k] = &mats[letters[k] as usize] * &suffix[k + 1];
            }
            for k in 0..d {
                let j = letters[k] as usize;
                let term = kron(&suffix[k + 1].transpose(), &prefix[k]) * *c;
                let mut view = out.view_mut((row_block * nn, j * nn), (nn, nn));
                view += term;
            }
        }
    }
    Ok(DerivativeMatrix {
        matrix: out,
        num_outputs: p.num_outputs(),
        num_vars: p.num_vars(),
        n,
        map_digest: map_digest(p),
        point_digest: x.digest(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonsingular,
    Singular,
}

/// SVD-based verdict on a square-or-wide linear map.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCertificate {
    pub verdict: Verdict,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Unit right singular vector of `σ_min`, present iff singular.
    pub kernel: Option<CVector>,
}

impl MatrixCertificate {
    /// `σ_min / max(1, σ_max)`, compared against [`SINGULARITY_TOLERANCE`].
    pub fn margin(&self) -> f64 {
        self.sigma_min / self.sigma_max.max(1.0)
    }
}

/// Full SVD of `m`. A wide matrix is padded with zero rows, so it always
/// reports `σ_min = 0` and a genuine kernel vector.
pub fn certify_matrix(m: &CMatrix) -> MatrixCertificate {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let s = &svd.singular_values;
    let (imin, sigma_min) = s
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    let sigma_max = s.iter().copied().fold(0.0, f64::max);
    let singular = sigma_min <= SINGULARITY_TOLERANCE * sigma_max.max(1.0);
    let kernel = singular.then(|| {
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let v: CVector = v_t.row(imin).transpose().map(|z| z.conj());
        let norm = v.norm();
        v / Complex64::new(norm, 0.0)
    });
    MatrixCertificate {
        verdict: if singular {
            Verdict::Singular
        } else {
            Verdict::Nonsingular
        },
        sigma_min,
        sigma_max,
        kernel,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityCertificate {
    pub verdict: Verdict,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub margin: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kernel: Option<MatrixTuple>,
}

impl SingularityCertificate {
    pub fn is_singular(&self) -> bool {
        self.verdict == Verdict::Singular
    }
}

pub fn singularity_certificate(m: &DerivativeMatrix) -> SingularityCertificate {
    let cert = certify_matrix(&m.matrix);
    let kernel = cert
        .kernel
        .as_ref()
        .map(|v| MatrixTuple::from_vec(v.as_slice(), m.num_vars, m.n).expect("kernel has the direction shape"));
    SingularityCertificate {
        verdict: cert.verdict,
        sigma_min: cert.sigma_min,
        sigma_max: cert.sigma_max,
        margin: cert.margin(),
        tolerance: SINGULARITY_TOLERANCE,
        kernel,
    }
}

/// Spectral separation of `A` and `-B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SylvesterMargin {
    pub unique: bool,
    /// `min |λ_i(A) + μ_j(B)|`.
    pub margin: f64,
    pub tolerance: f64,
    pub lambda: Complex64,
    pub mu: Complex64,
}

fn check_square(m: &CMatrix, name: &str) -> Result<(), LinearizationError> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(LinearizationError::Shape(format!(
            "{name} must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Decides unique solvability of `A·H + H·B = C` from the two spectra.
pub fn sylvester_unique(a: &CMatrix, b: &CMatrix) -> Result<SylvesterMargin, LinearizationError> {
    check_square(a, "A")?;
    check_square(b, "B")?;
    let la = eigenvalues(a);
    let lb = eigenvalues(b);
    let mut best = (f64::INFINITY, la[0], lb[0]);
    for &l in &la {
        for &m in &lb {
            let d = (l + m).norm();
            if d < best.0 {
                best = (d, l, m);
            }
        }
    }
    let tolerance = SYLVESTER_TOLERANCE * (op_norm(a) + op_norm(b));
    Ok(SylvesterMargin {
        unique: best.0 > tolerance,
        margin: best.0,
        tolerance,
        lambda: best.1,
        mu: best.2,
    })
}

/// The `pq × pq` operator `vec(H) ↦ vec(A·H + H·B)`.
pub fn sylvester_operator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = (a.nrows(), b.nrows());
    kron(&identity(q), a) + kron(&b.transpose(), &identity(p))
}

/// Solves `A·H + H·B = C` through the Kronecker system.
pub fn sylvester_solve(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<CMatrix, LinearizationError> {
    check_square(a, "A")?;
    check_square(b, "B")?;
    let (p, q) = (a.nrows(), b.nrows());
    if c.shape() != (p, q) {
        return Err(LinearizationError::Shape(format!(
            "C must be {p}x{q}, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    let sep = sylvester_unique(a, b)?;
    if !sep.unique {
        return Err(LinearizationError::NearSingular {
            lambda: sep.lambda,
            mu: sep.mu,
            margin: sep.margin,
            tolerance: sep.tolerance,
        });
    }
    let near_singular = || LinearizationError::NearSingular {
        lambda: sep.lambda,
        mu: sep.mu,
        margin: sep.margin,
        tolerance: sep.tolerance,
    };
    let v = lu_solve(&sylvester_operator(a, b), &vec_of(c)).ok_or_else(near_singular)?;
    let h = CMatrix::from_column_slice(p, q, v.as_slice());
    let residual = frobenius(&(a * &h + &h * b - c));
    let bound = 1e-9 * (frobenius(a) + frobenius(b)) * frobenius(&h) + 1e-12;
    if residual.is_nan() || residual > bound {
        return Err(LinearizationError::ResidualTooLarge { residual, bound });
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::matrixeval::jet_eval;
    use crate::parser::parse_map;

    fn real(rows: usize, vals: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(
            rows,
            vals.len() / rows,
            &vals.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>(),
        )
    }

    fn tuple(ms: Vec<CMatrix>) -> MatrixTuple {
        MatrixTuple::new(ms).unwrap()
    }

    #[test]
    fn square_map_is_kronecker_sum() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let x = real(2, &[1.0, 2.0, -0.5, 3.0]);
        let d = derivative_matrix(&p, &tuple(vec![x.clone()])).unwrap();
        let want = kron(&identity(2), &x) + kron(&x.transpose(), &identity(2));
        assert!(frobenius(&(&d.matrix - want)) < 1e-14);
        assert_eq!((d.rows(), d.cols()), (4, 4));
    }

    #[test]
    fn identity_map_gives_identity_matrix() {
        let p = parse_map("vars X; (X)").unwrap();
        let d = derivative_matrix(&p, &tuple(vec![real(3, &[1.0; 9])])).unwrap();
        assert_eq!(d.matrix, identity(9));
    }

    #[test]
    fn square_map_spectrum_is_pairwise_sums() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let d = derivative_matrix(&p, &tuple(vec![real(2, &[1.0, 0.0, 0.0, 2.0])])).unwrap();
        let mut ev: Vec<f64> = eigenvalues(&d.matrix).iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([2.0, 3.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_matches_jet() {
        let p = parse_map("vars X,Y; (X*Y*X - 2*Y, i*[X,Y] + Y^3)").unwrap();
        let x = tuple(vec![real(2, &[1.0, 2.0, 0.5, -1.0]), real(2, &[0.0, 1.0, 3.0, 2.0])]);
        let h = tuple(vec![real(2, &[0.3, -1.0, 2.0, 0.1]), real(2, &[1.0, 1.0, -2.0, 0.0])]);
        let d = derivative_matrix(&p, &x).unwrap();
        let jet = jet_eval(&p, &x, &h).unwrap();
        assert!(d.apply(&h).unwrap().try_sub(&jet.derivative).unwrap().norm() < 1e-12);
    }

    #[test]
    fn identity_is_nonsingular() {
        let cert = certify_matrix(&identity(4));
        assert_eq!(cert.verdict, Verdict::Nonsingular);
        assert!((cert.sigma_min - 1.0).abs() < 1e-15);
        assert!(cert.kernel.is_none());
    }

    #[test]
    fn square_map_singular_at_plus_minus_one() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let x = tuple(vec![real(2, &[1.0, 0.0, 0.0, -1.0])]);
        let cert = singularity_certificate(&derivative_matrix(&p, &x).unwrap());
        assert!(cert.is_singular());
        let h = &cert.kernel.as_ref().unwrap().matrices()[0];
        // kernel is spanned by E_12 and E_21 (XH + HX = 0 for both off-diagonal entries)
        assert!(h[(0, 0)].norm() < 1e-12 && h[(1, 1)].norm() < 1e-12);
        let xm = &x.matrices()[0];
        assert!(frobenius(&(xm * h + h * xm)) < 1e-12);
        assert!((frobenius(h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_map_nonsingular_at_one_two() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let x = tuple(vec![real(2, &[1.0, 0.0, 0.0, 2.0])]);
        let cert = singularity_certificate(&derivative_matrix(&p, &x).unwrap());
        assert_eq!(cert.verdict, Verdict::Nonsingular);
        assert!(cert.sigma_min >= 2.0 - 1e-12);
    }

    #[test]
    fn wide_derivative_is_singular() {
        // (X + Y) alone cannot be injective in two variables
        let p = parse_map("vars X,Y; (X + Y)").unwrap();
        let x = tuple(vec![real(2, &[1.0, 0.0, 0.0, 2.0]), identity(2)]);
        let d = derivative_matrix(&p, &x).unwrap();
        let cert = singularity_certificate(&d);
        assert!(cert.is_singular());
        let k = cert.kernel.unwrap();
        assert!(d.apply(&k).unwrap().norm() < 1e-12);
    }

    #[test]
    fn certificate_json_has_expected_fields() {
        let cert = certify_matrix(&identity(1));
        let sc = SingularityCertificate {
            verdict: cert.verdict,
            sigma_min: cert.sigma_min,
            sigma_max: cert.sigma_max,
            margin: cert.margin(),
            tolerance: SINGULARITY_TOLERANCE,
            kernel: None,
        };
        assert_eq!(
            serde_json::to_string(&sc).unwrap(),
            r#"{"verdict":"nonsingular","sigma_min":1.0,"sigma_max":1.0,"margin":1.0,"tolerance":1e-8}"#
        );
    }

    #[test]
    fn scalar_sylvester() {
        let h = sylvester_solve(&real(1, &[1.0]), &real(1, &[1.0]), &real(1, &[2.0])).unwrap();
        assert!((h[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_sylvester_entrywise() {
        let a = real(2, &[1.0, 0.0, 0.0, 2.0]);
        let b = real(2, &[3.0, 0.0, 0.0, 4.0]);
        let h = sylvester_solve(&a, &b, &real(2, &[1.0; 4])).unwrap();
        let want = real(2, &[0.25, 0.2, 0.2, 1.0 / 6.0]);
        assert!(frobenius(&(h - want)) < 1e-14);
    }

    #[test]
    fn homogeneous_sylvester_has_zero_solution() {
        let x = real(2, &[1.0, 0.0, 0.0, 2.0]);
        let h = sylvester_solve(&x, &x, &CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(frobenius(&h), 0.0);
    }

    #[test]
    fn rectangular_sylvester() {
        let a = real(2, &[2.0, 1.0, 0.0, 3.0]);
        let b = real(3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let c = real(2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let h = sylvester_solve(&a, &b, &c).unwrap();
        assert!(frobenius(&(&a * &h + &h * &b - &c)) < 1e-12);
    }

    #[test]
    fn sylvester_rejects_shared_negated_eigenvalue() {
        let x = real(2, &[1.0, 0.0, 0.0, -1.0]);
        match sylvester_solve(&x, &x, &identity(2)) {
            Err(LinearizationError::NearSingular { lambda, mu, margin, .. }) => {
                assert!(margin < 1e-12);
                assert!((lambda + mu).norm() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            sylvester_solve(&x, &x, &real(1, &[1.0])),
            Err(LinearizationError::Shape(_))
        ));
    }

    #[test]
    fn uniqueness_margins() {
        let m = sylvester_unique(&real(2, &[1.0, 0.0, 0.0, 2.0]), &real(2, &[3.0, 0.0, 0.0, 4.0])).unwrap();
        assert!(m.unique);
        assert!((m.margin - 4.0).abs() < 1e-12);
        let d = real(2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(!sylvester_unique(&d, &d).unwrap().unique);
        let a = real(2, &[1.0, 5.0, 0.0, 0.5]);
        assert!(sylvester_unique(&a, &a).unwrap().unique);
    }
}
