use serde::{Deserialize, Serialize};

use super::{require_square_map, InvertError};
use crate::linalg::{lu_solve, CVector};
use crate::linearization::{derivative_matrix, singularity_certificate};
use crate::matrixeval::{eval_map, EvalError, MatrixTuple};
use crate::ncpoly::FreePolyMap;

const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Success when `‖P(Z) − W‖ ≤ tol · max(1, ‖W‖)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Halve the step while the residual grows.
    pub damping: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 50,
            damping: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub z: MatrixTuple,
    pub iterations: usize,
    /// `‖P(Z) − W‖`.
    pub residual: f64,
}

/// Solves `P(Z) = W` by Newton's method on the derivative matrix.
pub fn newton_invert(
    p: &FreePolyMap,
    w: &MatrixTuple,
    z0: &MatrixTuple,
    opts: &NewtonOptions,
) -> Result<NewtonReport, InvertError> {
    require_square_map(p)?;
    if w.len() != p.num_outputs() {
        return Err(EvalError::VarCountMismatch {
            expected: p.num_outputs(),
            found: w.len(),
        }
        .into());
    }
    if w.size() != z0.size() {
        return Err(EvalError::SizeMismatch {
            left: w.size(),
            right: z0.size(),
        }
        .into());
    }
    let target = opts.tol * w.norm().max(1.0);
    let mut z = z0.clone();
    let mut f = w.try_sub(&eval_map(p, &z)?)?;
    let mut residual = f.norm();
    let mut best = (residual, z.clone());

    for iteration in 0..=opts.max_iter {
        if residual <= target {
            return Ok(NewtonReport {
                z,
                iterations: iteration,
                residual,
            });
        }
        if iteration == opts.max_iter {
            break;
        }
        let d = derivative_matrix(p, &z)?;
        let cert = singularity_certificate(&d);
        let singular = |certificate| InvertError::SingularDerivative {
            iteration,
            certificate: Box::new(certificate),
        };
        if cert.is_singular() {
            return Err(singular(cert));
        }
        let step = lu_solve(&d.matrix, &CVector::from_vec(f.to_vec())).ok_or_else(|| singular(cert.clone()))?;
        let mut h = MatrixTuple::from_vec(step.as_slice(), p.num_vars(), z.size())?;

        let mut next = z.try_add(&h)?;
        let mut next_f = w.try_sub(&eval_map(p, &next)?)?;
        if opts.damping {
            let mut halvings = 0;
            while next_f.norm().partial_cmp(&residual) != Some(std::cmp::Ordering::Less) && halvings < MAX_HALVINGS {
                h = h.scale(0.5.into());
                next = z.try_add(&h)?;
                next_f = w.try_sub(&eval_map(p, &next)?)?;
                halvings += 1;
            }
        }
        z = next;
        f = next_f;
        residual = f.norm();
        if !residual.is_finite() {
            let index = f
                .matrices()
                .iter()
                .position(|m| m.iter().any(|c| !c.is_finite()))
                .unwrap_or(0);
            return Err(EvalError::NonFinite { index }.into());
        }
        if residual < best.0 {
            best = (residual, z.clone());
        }
    }
    Err(InvertError::MaxIterations {
        iterations: opts.max_iter,
        best_residual: best.0,
        best: Box::new(best.1),
    })
}
