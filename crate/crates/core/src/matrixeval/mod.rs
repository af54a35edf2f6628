//! Evaluation of free polynomial maps on matrix tuples.
//!
//! Besides plain evaluation this provides the two operations that define a
//! free map (direct sums and joint similarity) and the block-jet evaluation
//! on `[[X, H], [0, X]]`, whose upper-right block is the directional
//! derivative.

mod sample;
mod tuple;

pub use sample::{
    ginibre, sample_commuting_tuple, sample_tuple, stream_rng, Distribution, SampleConfig, MAX_SAMPLE_ATTEMPTS,
};
pub(crate) use tuple::short_digest;
pub use tuple::{MatrixTuple, TupleJson};

use std::collections::HashMap;

use thiserror::Error;

use crate::domain::DomainError;
use crate::linalg::{block, block2x2, block_diag, condition_number, identity, inverse, CMatrix};
use crate::ncpoly::{BiPoly, FreePoly, FreePolyMap};

/// Similarity transforms with a larger condition number are refused.
pub const MAX_SIMILARITY_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("expected {expected} matrices, got {found}")]
    VarCountMismatch { expected: usize, found: usize },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("matrix {index} is {rows}x{cols}, expected {n}x{n}")]
    NotSquare {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("a tuple needs at least one matrix of size at least 1")]
    Empty,
    #[error("non-finite entry in matrix {index}")]
    NonFinite { index: usize },
    #[error("similarity matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("invalid sample configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("domain unsatisfiable: no admissible sample after {attempts} attempts")]
    DomainUnsatisfiable { attempts: usize },
}

/// Evaluates one polynomial at a tuple, reusing products of shared word prefixes.
pub fn eval_poly(p: &FreePoly, x: &MatrixTuple) -> Result<CMatrix, EvalError> {
    if p.num_vars() != x.len() {
        return Err(EvalError::VarCountMismatch {
            expected: p.num_vars(),
            found: x.len(),
        });
    }
    let n = x.size();
    let mats = x.matrices();
    let mut prefixes: HashMap<&[u32], CMatrix> = HashMap::new();
    let mut out = CMatrix::zeros(n, n);
    for (w, c) in p.terms() {
        let letters = w.letters();
        if letters.is_empty() {
            for i in 0..n {
                out[(i, i)] += c;
            }
            continue;
        }
        for k in 1..=letters.len() {
            if prefixes.contains_key(&letters[..k]) {
                continue;
            }
            let last = &mats[letters[k - 1] as usize];
            let next = if k == 1 {
                last.clone()
            } else {
                &prefixes[&letters[..k - 1]] * last
            };
            prefixes.insert(&letters[..k], next);
        }
        out += &prefixes[letters] * *c;
    }
    Ok(out)
}

pub fn eval_map(p: &FreePolyMap, x: &MatrixTuple) -> Result<MatrixTuple, EvalError> {
    let outs = p
        .components()
        .iter()
        .map(|c| eval_poly(c, x))
        .collect::<Result<Vec<_>, _>>()?;
    MatrixTuple::new(outs)
}

/// Evaluates a derivative polynomial at the point `x` in the direction `h`.
pub fn eval_bipoly(d: &BiPoly, x: &MatrixTuple, h: &MatrixTuple) -> Result<CMatrix, EvalError> {
    if x.len() != d.base_vars() || h.len() != d.base_vars() {
        return Err(EvalError::VarCountMismatch {
            expected: d.base_vars(),
            found: x.len().min(h.len()),
        });
    }
    if x.size() != h.size() {
        return Err(EvalError::SizeMismatch {
            left: x.size(),
            right: h.size(),
        });
    }
    let joined = MatrixTuple::new(x.matrices().iter().chain(h.matrices()).cloned().collect())?;
    eval_poly(d.poly(), &joined)
}

/// Componentwise block-diagonal `A ⊕ B`.
pub fn direct_sum(a: &MatrixTuple, b: &MatrixTuple) -> Result<MatrixTuple, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::VarCountMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    MatrixTuple::new(
        a.matrices()
            .iter()
            .zip(b.matrices())
            .map(|(x, y)| block_diag(x, y))
            .collect(),
    )
}

/// Joint similarity `S⁻¹·A_i·S`.
pub fn similarity(a: &MatrixTuple, s: &CMatrix) -> Result<MatrixTuple, EvalError> {
    if s.nrows() != a.size() || s.ncols() != a.size() {
        return Err(EvalError::SizeMismatch {
            left: a.size(),
            right: s.nrows(),
        });
    }
    let condition = condition_number(s);
    if condition.is_nan() || condition >= MAX_SIMILARITY_CONDITION {
        return Err(EvalError::IllConditioned { condition });
    }
    let s_inv = inverse(s).ok_or(EvalError::IllConditioned { condition })?;
    MatrixTuple::new(a.matrices().iter().map(|m| &s_inv * m * s).collect())
}

/// The jet tuple `[[X_i, H_i], [0, X_i]]`.
pub fn jet_tuple(x: &MatrixTuple, h: &MatrixTuple) -> Result<MatrixTuple, EvalError> {
    if x.len() != h.len() {
        return Err(EvalError::VarCountMismatch {
            expected: x.len(),
            found: h.len(),
        });
    }
    if x.size() != h.size() {
        return Err(EvalError::SizeMismatch {
            left: x.size(),
            right: h.size(),
        });
    }
    let zero = CMatrix::zeros(x.size(), x.size());
    MatrixTuple::new(
        x.matrices()
            .iter()
            .zip(h.matrices())
            .map(|(xm, hm)| block2x2(xm, hm, &zero, xm))
            .collect(),
    )
}

/// Full result of a block-jet evaluation, all four blocks of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: MatrixTuple,
    pub derivative: MatrixTuple,
    pub lower_left: MatrixTuple,
    pub lower_right: MatrixTuple,
}

/// Evaluates `P` on `[[X, H], [0, X]]`; the upper-right blocks are `DP(X)[H]`.
pub fn jet_eval(p: &FreePolyMap, x: &MatrixTuple, h: &MatrixTuple) -> Result<Jet, EvalError> {
    if x.len() != p.num_vars() {
        return Err(EvalError::VarCountMismatch {
            expected: p.num_vars(),
            found: x.len(),
        });
    }
    let n = x.size();
    let big = eval_map(p, &jet_tuple(x, h)?)?;
    let pick = |bi, bj| MatrixTuple::new(big.matrices().iter().map(|m| block(m, bi, bj, n)).collect());
    Ok(Jet {
        value: pick(0, 0)?,
        derivative: pick(0, 1)?,
        lower_left: pick(1, 0)?,
        lower_right: pick(1, 1)?,
    })
}

/// `num` copies of the `n × n` identity.
pub fn identity_tuple(num: usize, n: usize) -> MatrixTuple {
    MatrixTuple::new(vec![identity(n); num]).expect("valid sizes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, frobenius};
    use crate::parser::parse_map;

    fn real(rows: usize, vals: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, rows, &vals.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn square_of_nilpotent_is_zero() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let x = MatrixTuple::new(vec![real(2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        let y = eval_map(&p, &x).unwrap();
        assert_eq!(y.matrices()[0], CMatrix::zeros(2, 2));
    }

    #[test]
    fn commutator_vanishes_on_commuting_pair() {
        let p = parse_map("vars X,Y; ([X,Y])").unwrap();
        let a = real(2, &[1.0, 2.0, 3.0, 4.0]);
        let x = MatrixTuple::new(vec![a.clone(), &a * &a]).unwrap();
        assert!(frobenius(&eval_map(&p, &x).unwrap().matrices()[0]) < 1e-12);
    }

    #[test]
    fn empty_word_is_identity() {
        let p = parse_map("vars X; (3 + X)").unwrap();
        let x = MatrixTuple::new(vec![real(2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        assert_eq!(eval_map(&p, &x).unwrap().matrices()[0], real(2, &[3.0, 1.0, 0.0, 3.0]));
    }

    #[test]
    fn eval_rejects_wrong_count() {
        let p = parse_map("vars X,Y; (X*Y)").unwrap();
        let x = MatrixTuple::new(vec![real(1, &[1.0])]).unwrap();
        assert_eq!(
            eval_map(&p, &x),
            Err(EvalError::VarCountMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn direct_sum_of_scalars() {
        let a = MatrixTuple::new(vec![real(1, &[1.0])]).unwrap();
        let b = MatrixTuple::new(vec![real(1, &[2.0])]).unwrap();
        let s = direct_sum(&a, &b).unwrap();
        assert_eq!(s.matrices()[0], real(2, &[1.0, 0.0, 0.0, 2.0]));
        assert_eq!(block(&s.matrices()[0], 0, 0, 1), a.matrices()[0]);
        let two = MatrixTuple::new(vec![real(1, &[1.0]); 2]).unwrap();
        assert!(direct_sum(&a, &two).is_err());
    }

    #[test]
    fn identity_similarity_is_noop() {
        let a = MatrixTuple::new(vec![real(2, &[1.0, 2.0, 3.0, 4.0])]).unwrap();
        assert_eq!(similarity(&a, &identity(2)).unwrap(), a);
    }

    #[test]
    fn singular_similarity_is_refused() {
        let a = MatrixTuple::new(vec![real(2, &[1.0, 2.0, 3.0, 4.0])]).unwrap();
        assert!(matches!(
            similarity(&a, &real(2, &[1.0, 2.0, 2.0, 4.0])),
            Err(EvalError::IllConditioned { .. })
        ));
    }

    #[test]
    fn four_block_similarity_moves_difference_into_corner() {
        // S = I + E_{14} with identity blocks; S⁻¹ (X1⊕X2⊕X1⊕X2) S has X1 − X2 in block (0, 3).
        let x1 = real(2, &[1.0, 2.0, 0.0, -1.0]);
        let x2 = real(2, &[0.5, 0.0, 3.0, 2.0]);
        let a = MatrixTuple::new(vec![x1.clone()]).unwrap();
        let b = MatrixTuple::new(vec![x2.clone()]).unwrap();
        let ab = direct_sum(&a, &b).unwrap();
        let big = direct_sum(&ab, &ab).unwrap();
        let mut s = identity(8);
        for i in 0..2 {
            s[(i, 6 + i)] = c64(1.0, 0.0);
        }
        let conj = similarity(&big, &s).unwrap();
        let m = &conj.matrices()[0];
        assert!(frobenius(&(block(m, 0, 3, 2) - (&x1 - &x2))) < 1e-12);
        for (bi, bj, want) in [(0, 0, &x1), (1, 1, &x2), (2, 2, &x1), (3, 3, &x2)] {
            assert!(frobenius(&(block(m, bi, bj, 2) - want)) < 1e-12);
        }
        for bi in 0..4 {
            for bj in 0..4 {
                if bi != bj && (bi, bj) != (0, 3) {
                    assert!(frobenius(&block(m, bi, bj, 2)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn jet_of_square_at_diagonal() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let x = MatrixTuple::new(vec![real(2, &[1.0, 0.0, 0.0, 2.0])]).unwrap();
        let h = MatrixTuple::new(vec![real(2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        let jet = jet_eval(&p, &x, &h).unwrap();
        assert_eq!(jet.derivative.matrices()[0], real(2, &[0.0, 3.0, 0.0, 0.0]));
        assert_eq!(jet.lower_left.matrices()[0], CMatrix::zeros(2, 2));
        assert_eq!(jet.value, jet.lower_right);
    }

    #[test]
    fn jet_in_zero_direction_is_zero() {
        let p = parse_map("vars X,Y; (X*Y*X + 2*Y^3 - i*X, [X,Y])").unwrap();
        let x = MatrixTuple::new(vec![real(2, &[1.0, 2.0, 3.0, 4.0]), real(2, &[0.0, 1.0, -1.0, 0.5])]).unwrap();
        let h = MatrixTuple::new(vec![CMatrix::zeros(2, 2); 2]).unwrap();
        let jet = jet_eval(&p, &x, &h).unwrap();
        for m in jet.derivative.matrices() {
            assert_eq!(*m, CMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn jet_of_linear_map_is_direction() {
        let p = parse_map("vars X,Y; (2*X - 3i*Y)").unwrap();
        let x = MatrixTuple::new(vec![real(2, &[1.0, 2.0, 3.0, 4.0]), real(2, &[5.0, 1.0, -1.0, 0.5])]).unwrap();
        let h = MatrixTuple::new(vec![real(2, &[0.0, 1.0, 2.0, 3.0]), real(2, &[1.0, 0.0, 0.0, 1.0])]).unwrap();
        let jet = jet_eval(&p, &x, &h).unwrap();
        let want = h.matrices()[0].map(|z| z * 2.0) - h.matrices()[1].map(|z| z * c64(0.0, 3.0));
        assert!(frobenius(&(&jet.derivative.matrices()[0] - want)) < 1e-12);
    }

    #[test]
    fn jet_rejects_shape_mismatch() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let x = MatrixTuple::new(vec![real(1, &[1.0])]).unwrap();
        let h = MatrixTuple::new(vec![real(2, &[1.0, 0.0, 0.0, 1.0])]).unwrap();
        assert!(matches!(jet_eval(&p, &x, &h), Err(EvalError::SizeMismatch { .. })));
    }
}
