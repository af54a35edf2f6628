//! Sampled searches for singular derivatives.
//!
//! A scan is evidence only: it inspects finitely many sizes and samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{InvertError, KernelWitness};
use crate::domain::DomainSpec;
use crate::linearization::{derivative_matrix, singularity_certificate};
use crate::matrixeval::{sample_tuple, Distribution, EvalError, MatrixTuple, SampleConfig};
use crate::ncpoly::FreePolyMap;
use crate::parser::map_digest;

/// Hits must re-verify with residual at most this factor times the witness scale.
pub const HIT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanHit {
    /// Index among the drawn samples, or among the planted tuples.
    pub index: usize,
    pub planted: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub witness: KernelWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub size: usize,
    pub samples_tested: usize,
    pub planted_tested: usize,
    pub min_sigma_min: f64,
    pub argmin_index: usize,
    pub argmin_planted: bool,
    pub argmin_digest: String,
    pub hits: Vec<ScanHit>,
    /// Singular verdicts whose kernel failed to re-verify; not reported as hits.
    pub unverified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub map_digest: String,
    pub seed: u64,
    pub samples_per_size: usize,
    pub distribution: Distribution,
    pub domain: DomainSpec,
    pub domain_is_free: bool,
    pub records: Vec<SizeRecord>,
    pub total_hits: usize,
}

impl ScanReport {
    pub fn has_hits(&self) -> bool {
        self.total_hits > 0
    }
}

struct Outcome {
    sigma_min: f64,
    sigma_max: f64,
    witness: Option<Result<KernelWitness, InvertError>>,
}

fn inspect(p: &FreePolyMap, x: &MatrixTuple) -> Result<Outcome, InvertError> {
    let d = derivative_matrix(p, x)?;
    let cert = singularity_certificate(&d);
    let witness = cert.kernel.clone().filter(|_| cert.is_singular()).map(|h| {
        let w = KernelWitness::new(p, x.clone(), h)?;
        w.verify(p, HIT_TOLERANCE)?;
        Ok(w)
    });
    Ok(Outcome {
        sigma_min: cert.sigma_min,
        sigma_max: cert.sigma_max,
        witness,
    })
}

fn build_record(
    p: &FreePolyMap,
    size: usize,
    samples: &[MatrixTuple],
    planted: &[(usize, &MatrixTuple)],
) -> Result<SizeRecord, InvertError> {
    let items: Vec<(usize, bool, &MatrixTuple)> = samples
        .iter()
        .enumerate()
        .map(|(i, x)| (i, false, x))
        .chain(planted.iter().map(|&(i, x)| (i, true, x)))
        .collect();
    let outcomes: Vec<Result<Outcome, InvertError>> = items.par_iter().map(|(_, _, x)| inspect(p, x)).collect();

    let mut record = SizeRecord {
        size,
        samples_tested: samples.len(),
        planted_tested: planted.len(),
        min_sigma_min: f64::INFINITY,
        argmin_index: 0,
        argmin_planted: false,
        argmin_digest: String::new(),
        hits: Vec::new(),
        unverified: 0,
    };
    for ((index, is_planted, x), outcome) in items.into_iter().zip(outcomes) {
        let o = outcome?;
        if o.sigma_min < record.min_sigma_min {
            record.min_sigma_min = o.sigma_min;
            record.argmin_index = index;
            record.argmin_planted = is_planted;
            record.argmin_digest = x.digest();
        }
        match o.witness {
            Some(Ok(witness)) => record.hits.push(ScanHit {
                index,
                planted: is_planted,
                sigma_min: o.sigma_min,
                sigma_max: o.sigma_max,
                witness,
            }),
            Some(Err(_)) => record.unverified += 1,
            None => {}
        }
    }
    Ok(record)
}

/// Samples `cfg.count` tuples per size from `domain`, certifies each
/// derivative matrix, and collects singular hits with kernel witnesses.
///
/// `planted` tuples are tested as given, in the record of their own size.
/// `cfg.size` and `cfg.domain` are replaced per size by `sizes` and `domain`.
pub fn jacobian_scan(
    p: &FreePolyMap,
    domain: &DomainSpec,
    sizes: &[usize],
    cfg: &SampleConfig,
    planted: &[MatrixTuple],
) -> Result<ScanReport, InvertError> {
    if sizes.is_empty() {
        return Err(EvalError::InvalidConfig("at least one size is required".into()).into());
    }
    for x in planted {
        if x.len() != p.num_vars() {
            return Err(EvalError::VarCountMismatch {
                expected: p.num_vars(),
                found: x.len(),
            }
            .into());
        }
    }
    let mut all_sizes: Vec<usize> = sizes.to_vec();
    for x in planted {
        if !all_sizes.contains(&x.size()) {
            all_sizes.push(x.size());
        }
    }

    let mut records = Vec::with_capacity(all_sizes.len());
    for (k, &size) in all_sizes.iter().enumerate() {
        let samples = if k < sizes.len() {
            let c = SampleConfig {
                size,
                domain: Some(domain.clone()),
                ..cfg.clone()
            };
            sample_tuple(&c, p.num_vars())?
        } else {
            Vec::new()
        };
        let plants: Vec<(usize, &MatrixTuple)> = planted.iter().enumerate().filter(|(_, x)| x.size() == size).collect();
        records.push(build_record(p, size, &samples, &plants)?);
    }
    let total_hits = records.iter().map(|r| r.hits.len()).sum();
    Ok(ScanReport {
        map_digest: map_digest(p),
        seed: cfg.seed,
        samples_per_size: cfg.count,
        distribution: cfg.distribution,
        domain: domain.clone(),
        domain_is_free: domain.is_free(),
        records,
        total_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Constraint;
    use crate::linalg::{c64, CMatrix};
    use crate::parser::parse_map;

    #[test]
    fn square_on_right_halfplane_has_no_hits() {
        let p = parse_map("vars X; (X^2)").unwrap();
        let domain = DomainSpec::new(vec![Constraint::SpectralHalfplane { var: 0, angle: 0.0 }]);
        let r = jacobian_scan(&p, &domain, &[2, 3, 4], &SampleConfig::new(0, 100, 7), &[]).unwrap();
        assert_eq!(r.total_hits, 0);
        assert_eq!(r.records.len(), 3);
        assert!(r
            .records
            .iter()
            .all(|rec| rec.samples_tested == 100 && rec.min_sigma_min > 0.0));
        assert!(r.domain_is_free);
    }

    #[test]
    fn planted_swap_is_hit() {
        let p = parse_map("vars X,Y; (X + Y, X^2 + Y^2)").unwrap();
        let y = CMatrix::from_fn(2, 2, |i, j| c64(0.3 * i as f64, 0.1 * j as f64));
        let mut x = y.clone();
        x[(0, 0)] += c64(1.0, 0.0);
        x[(1, 1)] -= c64(1.0, 0.0);
        let plant = MatrixTuple::new(vec![x, y]).unwrap();
        let r = jacobian_scan(
            &p,
            &DomainSpec::unconstrained(),
            &[2],
            &SampleConfig::new(0, 20, 1),
            &[plant],
        )
        .unwrap();
        assert_eq!(r.records[0].planted_tested, 1);
        assert!(r.records[0].hits.iter().any(|h| h.planted));
        for h in &r.records[0].hits {
            h.witness.verify(&p, HIT_TOLERANCE).unwrap();
        }
    }

    #[test]
    fn deterministic() {
        let p = parse_map("vars X,Y; (X + X^2 + [X,Y], Y + [X,Y])").unwrap();
        let cfg = SampleConfig::new(0, 30, 42);
        let a = jacobian_scan(&p, &DomainSpec::unconstrained(), &[2, 3], &cfg, &[]).unwrap();
        let b = jacobian_scan(&p, &DomainSpec::unconstrained(), &[2, 3], &cfg, &[]).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
