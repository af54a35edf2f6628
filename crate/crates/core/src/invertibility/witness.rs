use serde::{Deserialize, Serialize};

use super::{witness_scale, InvertError, COLLISION_TOLERANCE, WITNESS_TOLERANCE};
use crate::linalg::{block2x2, CMatrix};
use crate::matrixeval::{direct_sum, eval_map, jet_eval, jet_tuple, EvalError, MatrixTuple};
use crate::ncpoly::FreePolyMap;

/// Two distinct tuples with (numerically) equal images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionWitness {
    pub x_a: MatrixTuple,
    pub x_b: MatrixTuple,
    /// `‖P(x_a) − P(x_b)‖`.
    pub image_gap: f64,
}

/// A point and a nonzero direction killed by the derivative there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelWitness {
    pub x: MatrixTuple,
    pub h: MatrixTuple,
    /// `‖DP(x)[h]‖ / ‖h‖`.
    pub residual: f64,
}

impl KernelWitness {
    /// Builds a witness, computing the residual through the block jet.
    pub fn new(p: &FreePolyMap, x: MatrixTuple, h: MatrixTuple) -> Result<Self, InvertError> {
        let hn = h.norm();
        if hn == 0.0 {
            return Err(InvertError::ZeroDirection);
        }
        let jet = jet_eval(p, &x, &h)?;
        let residual = jet.derivative.norm() / hn;
        Ok(KernelWitness { x, h, residual })
    }

    /// Recomputes the residual and checks it against `factor · scale`.
    pub fn verify(&self, p: &FreePolyMap, factor: f64) -> Result<f64, InvertError> {
        let fresh = KernelWitness::new(p, self.x.clone(), self.h.clone())?;
        let bound = factor * witness_scale(p, &self.x)?;
        if fresh.residual.is_nan() || fresh.residual > bound {
            return Err(InvertError::WitnessResidual {
                residual: fresh.residual,
                bound,
            });
        }
        Ok(fresh.residual)
    }
}

impl CollisionWitness {
    /// Recomputes the image gap and checks distinctness and the gap bound.
    pub fn verify(&self, p: &FreePolyMap) -> Result<f64, InvertError> {
        let scale = witness_scale(p, &self.x_a)?;
        let distance = self.x_a.try_sub(&self.x_b)?.norm();
        if distance <= 1e-10 * scale {
            return Err(InvertError::IdenticalPoints { distance });
        }
        let gap = eval_map(p, &self.x_a)?.try_sub(&eval_map(p, &self.x_b)?)?.norm();
        let bound = WITNESS_TOLERANCE * scale;
        if gap.is_nan() || gap > bound {
            return Err(InvertError::CollisionNotCertified { gap, bound });
        }
        Ok(gap)
    }
}

/// Turns a derivative kernel into a collision: `P([[X, H], [0, X]]) = P(X ⊕ X)`.
pub fn collision_from_kernel(p: &FreePolyMap, w: &KernelWitness) -> Result<CollisionWitness, InvertError> {
    w.verify(p, WITNESS_TOLERANCE)?;
    let x_a = jet_tuple(&w.x, &w.h)?;
    let x_b = direct_sum(&w.x, &w.x)?;
    let image_gap = eval_map(p, &x_a)?.try_sub(&eval_map(p, &x_b)?)?.norm();
    let c = CollisionWitness { x_a, x_b, image_gap };
    c.verify(p)?;
    Ok(c)
}

/// Turns a collision into a kernel direction at `X1 ⊕ X2`.
///
/// The direction has the single nonzero block `X1 − X2` in the upper-right
/// corner; the upper-right block of `DP(X1 ⊕ X2)` applied to it equals
/// `P(X1) − P(X2)`.
pub fn kernel_from_collision(
    p: &FreePolyMap,
    x1: &MatrixTuple,
    x2: &MatrixTuple,
) -> Result<KernelWitness, InvertError> {
    if x1.len() != x2.len() {
        return Err(EvalError::VarCountMismatch {
            expected: x1.len(),
            found: x2.len(),
        }
        .into());
    }
    if x1.size() != x2.size() {
        return Err(EvalError::SizeMismatch {
            left: x1.size(),
            right: x2.size(),
        }
        .into());
    }
    let p1 = eval_map(p, x1)?;
    let p2 = eval_map(p, x2)?;
    let scale = [x1.norm(), x2.norm(), p1.norm(), p2.norm()]
        .into_iter()
        .fold(1.0, f64::max);
    let diff = x1.try_sub(x2)?;
    let distance = diff.norm();
    if distance <= 1e-10 * scale {
        return Err(InvertError::IdenticalPoints { distance });
    }
    let gap = p1.try_sub(&p2)?.norm();
    let bound = COLLISION_TOLERANCE * scale;
    if gap.is_nan() || gap > bound {
        return Err(InvertError::ImagesDiffer { gap, bound });
    }

    let n = x1.size();
    let zero = CMatrix::zeros(n, n);
    let x = direct_sum(x1, x2)?;
    let h = MatrixTuple::new(
        diff.matrices()
            .iter()
            .map(|d| block2x2(&zero, d, &zero, &zero))
            .collect(),
    )?;
    let w = KernelWitness::new(p, x, h)?;
    w.verify(p, WITNESS_TOLERANCE)?;
    Ok(w)
}
