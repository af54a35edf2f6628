//! Injectivity and invertibility of free polynomial maps.
//!
//! A nonzero direction annihilated by the derivative at `X` yields two
//! distinct points with the same image (the jet tuple and `X ⊕ X`), and
//! conversely a collision `P(X1) = P(X2)` yields the kernel direction
//! `[[0, X1 - X2], [0, 0]]` at `X1 ⊕ X2`. Both constructions live in
//! [`witness`]. The remaining submodules invert maps, either as truncated
//! free power series or numerically per matrix size, and scan sampled
//! domains for singular derivatives.

pub mod newton;
pub mod scan;
pub mod series;
pub mod witness;

pub use newton::{newton_invert, NewtonOptions, NewtonReport};
pub use scan::{jacobian_scan, ScanHit, ScanReport, SizeRecord};
pub use series::{series_inverse, SeriesMap};
pub use witness::{collision_from_kernel, kernel_from_collision, CollisionWitness, KernelWitness};

use thiserror::Error;

use crate::linearization::{LinearizationError, SingularityCertificate};
use crate::matrixeval::{eval_map, EvalError, MatrixTuple};
use crate::ncpoly::{FreePolyMap, PolyError};

/// Relative tolerance for kernel and collision witnesses.
pub const WITNESS_TOLERANCE: f64 = 1e-8;

/// Relative tolerance on the image gap of an input collision.
pub const COLLISION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvertError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linearization(#[from] LinearizationError),
    #[error("kernel witness direction is zero")]
    ZeroDirection,
    #[error("witness residual {residual:e} exceeds bound {bound:e}")]
    WitnessResidual { residual: f64, bound: f64 },
    #[error("collision image gap {gap:e} exceeds bound {bound:e}")]
    CollisionNotCertified { gap: f64, bound: f64 },
    #[error("images differ: ‖P(X1) − P(X2)‖ = {gap:e} exceeds {bound:e}")]
    ImagesDiffer { gap: f64, bound: f64 },
    #[error("the two points coincide (distance {distance:e})")]
    IdenticalPoints { distance: f64 },
    #[error("map has {num_vars} variables but {num_outputs} components")]
    NotSquareMap { num_vars: usize, num_outputs: usize },
    #[error("component {component} has a constant term")]
    ConstantTerm { component: usize },
    #[error("linear part is singular (condition estimate {condition:e})")]
    SingularLinearPart { condition: f64 },
    #[error("derivative is singular at Newton iterate {iteration} (σ_min = {:e})", certificate.sigma_min)]
    SingularDerivative {
        iteration: usize,
        certificate: Box<SingularityCertificate>,
    },
    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    MaxIterations {
        iterations: usize,
        best_residual: f64,
        best: Box<MatrixTuple>,
    },
}

/// `max(1, ‖X‖, ‖P(X)‖)` with Frobenius tuple norms.
pub fn witness_scale(p: &FreePolyMap, x: &MatrixTuple) -> Result<f64, EvalError> {
    let px = eval_map(p, x)?;
    Ok(1f64.max(x.norm()).max(px.norm()))
}

pub(crate) fn require_square_map(p: &FreePolyMap) -> Result<(), InvertError> {
    if p.num_outputs() != p.num_vars() {
        return Err(InvertError::NotSquareMap {
            num_vars: p.num_vars(),
            num_outputs: p.num_outputs(),
        });
    }
    Ok(())
}
