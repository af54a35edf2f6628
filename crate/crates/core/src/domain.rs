//! Constraint sets on matrix tuples used as sampling domains.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigenvalues, op_norm};
use crate::matrixeval::MatrixTuple;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("constraint {index}: {message}")]
    Invalid { index: usize, message: String },
    #[error("constraint {index} refers to variable {var}, but the tuple has {num_vars}")]
    VarOutOfRange { index: usize, var: usize, num_vars: usize },
}

/// One constraint. Norms are operator (spectral) norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `‖X_var‖ < bound`.
    NormBound { var: usize, bound: f64 },
    /// `Σ weights[v]·‖X_v‖ < bound`.
    WeightedNormSum { weights: Vec<f64>, bound: f64 },
    /// Every eigenvalue `λ` of `X_var` has `Re(e^{-i·angle}·λ) > 0`.
    SpectralHalfplane {
        var: usize,
        #[serde(default)]
        angle: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl DomainSpec {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn new(constraints: Vec<Constraint>) -> Self {
        DomainSpec { constraints }
    }

    /// Checks bounds and weights, and that every variable index is below `num_vars`.
    pub fn validate(&self, num_vars: usize) -> Result<(), DomainError> {
        for (index, c) in self.constraints.iter().enumerate() {
            let invalid = |message: &str| DomainError::Invalid {
                index,
                message: message.to_string(),
            };
            let check_var = |var: usize| {
                if var >= num_vars {
                    Err(DomainError::VarOutOfRange { index, var, num_vars })
                } else {
                    Ok(())
                }
            };
            match c {
                Constraint::NormBound { var, bound } => {
                    check_var(*var)?;
                    if !(bound.is_finite() && *bound > 0.0) {
                        return Err(invalid("bound must be positive"));
                    }
                }
                Constraint::WeightedNormSum { weights, bound } => {
                    if !(bound.is_finite() && *bound > 0.0) {
                        return Err(invalid("bound must be positive"));
                    }
                    if weights.len() > num_vars {
                        return Err(DomainError::VarOutOfRange {
                            index,
                            var: weights.len() - 1,
                            num_vars,
                        });
                    }
                    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                        return Err(invalid("weights must be nonnegative"));
                    }
                    if !weights.iter().any(|w| *w > 0.0) {
                        return Err(invalid("at least one weight must be positive"));
                    }
                }
                Constraint::SpectralHalfplane { var, angle } => {
                    check_var(*var)?;
                    if !angle.is_finite() {
                        return Err(invalid("angle must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether the set is closed under direct sums (and joint similarity).
    ///
    /// Per-variable norm balls and spectral half-planes are; a weighted norm
    /// sum with two or more positive weights is not, since `‖A ⊕ B‖` is a
    /// maximum and the maxima of different variables can come from different
    /// summands.
    pub fn is_free(&self) -> bool {
        self.constraints.iter().all(|c| match c {
            Constraint::WeightedNormSum { weights, .. } => weights.iter().filter(|w| **w > 0.0).count() <= 1,
            _ => true,
        })
    }

    pub fn contains(&self, x: &MatrixTuple) -> bool {
        self.constraints.iter().all(|c| satisfies(c, x))
    }
}

pub(crate) fn satisfies(c: &Constraint, x: &MatrixTuple) -> bool {
    match c {
        Constraint::NormBound { var, bound } => op_norm(&x.matrices()[*var]) < *bound,
        Constraint::WeightedNormSum { weights, bound } => weighted_sum(weights, x) < *bound,
        Constraint::SpectralHalfplane { var, angle } => rotated_min_real(&x.matrices()[*var], *angle) > 0.0,
    }
}

pub(crate) fn weighted_sum(weights: &[f64], x: &MatrixTuple) -> f64 {
    weights
        .iter()
        .zip(x.matrices())
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, m)| w * op_norm(m))
        .sum()
}

/// `min Re(e^{-iθ}λ)` over the spectrum.
pub(crate) fn rotated_min_real(m: &crate::linalg::CMatrix, angle: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, -angle);
    eigenvalues(m)
        .iter()
        .map(|l| (rot * l).re)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let d = DomainSpec::new(vec![
            Constraint::NormBound { var: 0, bound: 0.125 },
            Constraint::WeightedNormSum {
                weights: vec![4.0, 2.0],
                bound: 1.0,
            },
            Constraint::SpectralHalfplane { var: 1, angle: 0.0 },
        ]);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(
            s,
            r#"{"constraints":[{"norm_bound":{"var":0,"bound":0.125}},{"weighted_norm_sum":{"weights":[4.0,2.0],"bound":1.0}},{"spectral_halfplane":{"var":1,"angle":0.0}}]}"#
        );
        let back: DomainSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let no_angle: DomainSpec =
            serde_json::from_str(r#"{"constraints":[{"spectral_halfplane":{"var":0}}]}"#).unwrap();
        assert_eq!(
            no_angle.constraints[0],
            Constraint::SpectralHalfplane { var: 0, angle: 0.0 }
        );
    }

    #[test]
    fn validation() {
        assert!(DomainSpec::new(vec![Constraint::NormBound { var: 0, bound: -1.0 }])
            .validate(1)
            .is_err());
        assert!(DomainSpec::new(vec![Constraint::NormBound { var: 2, bound: 1.0 }])
            .validate(2)
            .is_err());
        assert!(DomainSpec::new(vec![Constraint::WeightedNormSum {
            weights: vec![0.0, 0.0],
            bound: 1.0
        }])
        .validate(2)
        .is_err());
        assert!(DomainSpec::new(vec![Constraint::WeightedNormSum {
            weights: vec![4.0, 2.0],
            bound: 1.0
        }])
        .validate(2)
        .is_ok());
    }

    #[test]
    fn freeness_flags() {
        assert!(DomainSpec::unconstrained().is_free());
        assert!(DomainSpec::new(vec![
            Constraint::NormBound { var: 0, bound: 0.125 },
            Constraint::NormBound { var: 1, bound: 0.25 },
            Constraint::SpectralHalfplane { var: 0, angle: 1.0 },
        ])
        .is_free());
        assert!(!DomainSpec::new(vec![Constraint::WeightedNormSum {
            weights: vec![4.0, 2.0],
            bound: 1.0
        }])
        .is_free());
        assert!(DomainSpec::new(vec![Constraint::WeightedNormSum {
            weights: vec![0.0, 2.0],
            bound: 1.0
        }])
        .is_free());
    }
}
