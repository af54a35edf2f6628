use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::EvalError;
use crate::linalg::{frobenius, op_norm, CMatrix};
use num_complex::Complex64;

/// `N` square complex matrices of a common size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TupleJson", into = "TupleJson")]
pub struct MatrixTuple {
    n: usize,
    mats: Vec<CMatrix>,
}

/// Wire form: `{"n": int, "matrices": [[[re, im], ...], ...]}`, each matrix row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    pub n: usize,
    pub matrices: Vec<Vec<[f64; 2]>>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self, EvalError> {
        let n = match mats.first() {
            Some(m) if m.nrows() > 0 => m.nrows(),
            _ => return Err(EvalError::Empty),
        };
        for (index, m) in mats.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(EvalError::NotSquare {
                    index,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    n,
                });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(EvalError::NonFinite { index });
            }
        }
        Ok(MatrixTuple { n, mats })
    }

    pub fn zeros(num: usize, n: usize) -> Self {
        MatrixTuple {
            n,
            mats: vec![CMatrix::zeros(n, n); num],
        }
    }

    /// Matrix size `n`.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of matrices `N`.
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn into_matrices(self) -> Vec<CMatrix> {
        self.mats
    }

    /// Frobenius norm of the whole tuple, `sqrt(Σ ‖A_i‖_F²)`.
    pub fn norm(&self) -> f64 {
        self.mats.iter().map(|m| frobenius(m).powi(2)).sum::<f64>().sqrt()
    }

    /// Largest operator norm over the components.
    pub fn max_op_norm(&self) -> f64 {
        self.mats.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn try_sub(&self, other: &MatrixTuple) -> Result<MatrixTuple, EvalError> {
        self.check_shape(other)?;
        Ok(MatrixTuple {
            n: self.n,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_add(&self, other: &MatrixTuple) -> Result<MatrixTuple, EvalError> {
        self.check_shape(other)?;
        Ok(MatrixTuple {
            n: self.n,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> MatrixTuple {
        MatrixTuple {
            n: self.n,
            mats: self.mats.iter().map(|m| m * s).collect(),
        }
    }

    fn check_shape(&self, other: &MatrixTuple) -> Result<(), EvalError> {
        if self.len() != other.len() {
            return Err(EvalError::VarCountMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        if self.n != other.n {
            return Err(EvalError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Stacks the column-stacked vectorizations of all components.
    pub fn to_vec(&self) -> Vec<Complex64> {
        self.mats.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
    }

    /// Inverse of [`MatrixTuple::to_vec`].
    pub fn from_vec(v: &[Complex64], num: usize, n: usize) -> Result<Self, EvalError> {
        if v.len() != num * n * n {
            return Err(EvalError::SizeMismatch {
                left: num * n * n,
                right: v.len(),
            });
        }
        MatrixTuple::new(v.chunks(n * n).map(|c| CMatrix::from_column_slice(n, n, c)).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tuple serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Short stable fingerprint of the serialized tuple.
    pub fn digest(&self) -> String {
        short_digest(self.to_json().as_bytes())
    }
}

pub(crate) fn short_digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    hex::encode(&d[..8])
}

impl From<MatrixTuple> for TupleJson {
    fn from(t: MatrixTuple) -> Self {
        let n = t.n;
        TupleJson {
            n,
            matrices: t
                .mats
                .iter()
                .map(|m| {
                    (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<TupleJson> for MatrixTuple {
    type Error = String;

    fn try_from(j: TupleJson) -> Result<Self, Self::Error> {
        let n = j.n;
        let mut mats = Vec::with_capacity(j.matrices.len());
        for (k, entries) in j.matrices.iter().enumerate() {
            if entries.len() != n * n {
                return Err(format!("matrix {k} has {} entries, expected {}", entries.len(), n * n));
            }
            mats.push(CMatrix::from_row_iterator(
                n,
                n,
                entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
            ));
        }
        MatrixTuple::new(mats).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn json_is_row_major_pairs() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, -1.0), c64(3.0, 0.5), c64(4.0, 0.0)]);
        let t = MatrixTuple::new(vec![m]).unwrap();
        assert_eq!(
            t.to_json(),
            r#"{"n":2,"matrices":[[[1.0,0.0],[2.0,-1.0],[3.0,0.5],[4.0,0.0]]]}"#
        );
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = CMatrix::from_fn(3, 3, |i, j| c64(0.1 * i as f64 + 1.0 / 3.0, (j as f64).sqrt() * 1e-17));
        let t = MatrixTuple::new(vec![m.clone(), m.transpose()]).unwrap();
        assert_eq!(MatrixTuple::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(MatrixTuple::from_json(r#"{"n":2,"matrices":[[[1,0],[2,0],[3,0]]]}"#).is_err());
        assert!(MatrixTuple::from_json(r#"{"n":2,"matrices":[]}"#).is_err());
        assert!(MatrixTuple::from_json(r#"{"n":0,"matrices":[[]]}"#).is_err());
    }

    #[test]
    fn vec_round_trip() {
        let m = CMatrix::from_fn(2, 2, |i, j| c64(i as f64, j as f64));
        let t = MatrixTuple::new(vec![m.clone(), m * c64(2.0, 0.0)]).unwrap();
        assert_eq!(MatrixTuple::from_vec(&t.to_vec(), 2, 2).unwrap(), t);
    }

    #[test]
    fn validation() {
        assert_eq!(MatrixTuple::new(vec![]), Err(EvalError::Empty));
        assert!(matches!(
            MatrixTuple::new(vec![CMatrix::zeros(2, 2), CMatrix::zeros(3, 3)]),
            Err(EvalError::NotSquare { index: 1, .. })
        ));
        let mut bad = CMatrix::zeros(1, 1);
        bad[(0, 0)] = c64(f64::NAN, 0.0);
        assert_eq!(MatrixTuple::new(vec![bad]), Err(EvalError::NonFinite { index: 0 }));
    }
}
