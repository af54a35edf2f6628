//! Compositional inverses as truncated free power series.

use num_complex::Complex64;

use super::{require_square_map, InvertError};
use crate::linalg::{condition_number, inverse, CMatrix};
use crate::ncpoly::{FreePoly, FreePolyMap, Word, COEFF_TOLERANCE};

/// Linear parts with a larger condition number are treated as singular.
pub const MAX_LINEAR_CONDITION: f64 = 1e10;

/// A truncated compositional inverse `Q` of a map `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMap {
    pub map: FreePolyMap,
    pub degree: usize,
    /// `P ∘ Q` agrees with the identity through `degree`.
    pub valid: bool,
}

impl SeriesMap {
    /// Largest coefficient deviation of `P ∘ Q` from the identity through the working degree.
    pub fn right_defect(&self, p: &FreePolyMap) -> Result<f64, InvertError> {
        let pq = p.compose_truncated(&self.map, self.degree)?;
        Ok(pq.max_coeff_diff(&FreePolyMap::identity(p.num_vars())))
    }

    /// Largest coefficient deviation of `Q ∘ P` from the identity through the working degree.
    pub fn left_defect(&self, p: &FreePolyMap) -> Result<f64, InvertError> {
        let qp = self.map.compose_truncated(p, self.degree)?;
        Ok(qp.max_coeff_diff(&FreePolyMap::identity(p.num_vars())))
    }

    /// `P ∘ Q − id` without truncation; zero when `Q` is an exact inverse.
    pub fn remainder(&self, p: &FreePolyMap) -> Result<FreePolyMap, InvertError> {
        Ok(p.compose(&self.map)?.try_sub(&FreePolyMap::identity(p.num_vars()))?)
    }
}

fn linear_combination(coeffs: &CMatrix, polys: &[FreePoly], num_vars: usize) -> Result<Vec<FreePoly>, InvertError> {
    let mut out = Vec::with_capacity(coeffs.nrows());
    for i in 0..coeffs.nrows() {
        let mut acc = FreePoly::zero(num_vars);
        for (j, p) in polys.iter().enumerate() {
            let c = coeffs[(i, j)];
            if c != Complex64::new(0.0, 0.0) {
                acc = acc.try_add(&p.scale(c))?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Inverts `P = Λ·X + higher(X)` through degree `d` by the fixed point
/// `Q ← Λ⁻¹·(Y − higher(Q))`; each pass fixes one more degree.
pub fn series_inverse(p: &FreePolyMap, d: usize) -> Result<SeriesMap, InvertError> {
    require_square_map(p)?;
    let n = p.num_vars();
    if let Some(component) = p
        .components()
        .iter()
        .position(|c| c.constant_term() != Complex64::new(0.0, 0.0))
    {
        return Err(InvertError::ConstantTerm { component });
    }
    let lin = p.linear_part();
    let lambda = CMatrix::from_fn(n, n, |i, j| lin[i][j]);
    let condition = condition_number(&lambda);
    if condition.is_nan() || condition >= MAX_LINEAR_CONDITION {
        return Err(InvertError::SingularLinearPart { condition });
    }
    let lambda_inv = inverse(&lambda).ok_or(InvertError::SingularLinearPart { condition })?;

    let higher_components: Vec<FreePoly> = p
        .components()
        .iter()
        .map(|c| FreePoly::from_terms(n, c.terms().filter(|(w, _)| w.len() >= 2).map(|(w, c)| (w.clone(), *c))))
        .collect::<Result<_, _>>()?;
    let higher = FreePolyMap::new(n, higher_components)?;
    let ys: Vec<FreePoly> = (0..n)
        .map(|i| FreePoly::monomial(n, Word::letter(i), Complex64::new(1.0, 0.0)))
        .collect::<Result<_, _>>()?;

    let mut q = FreePolyMap::new(n, linear_combination(&lambda_inv, &ys, n)?)?.truncate(d);
    for _ in 0..d {
        let h = higher.compose_truncated(&q, d)?;
        let rhs: Vec<FreePoly> = ys
            .iter()
            .zip(h.components())
            .map(|(y, hc)| y.try_sub(hc))
            .collect::<Result<_, _>>()?;
        q = FreePolyMap::new(n, linear_combination(&lambda_inv, &rhs, n)?)?.truncate(d);
    }

    let identity = FreePolyMap::identity(n);
    let valid = p.compose_truncated(&q, d)?.approx_eq(&identity, COEFF_TOLERANCE);
    Ok(SeriesMap {
        map: q,
        degree: d,
        valid,
    })
}
