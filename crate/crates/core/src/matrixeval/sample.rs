//! Seeded samplers for matrix tuples.
//!
//! Every sample index draws from its own ChaCha stream, so a batch is
//! reproducible from `(seed, config)` independent of evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, MatrixTuple};
use crate::domain::{rotated_min_real, satisfies, weighted_sum, Constraint, DomainSpec};
use crate::linalg::{identity, op_norm, CMatrix};
use crate::ncpoly::standard_complex_normal;

pub const MAX_SAMPLE_ATTEMPTS: usize = 1000;

/// Shift past the imaginary axis applied when a half-plane constraint is violated.
const HALFPLANE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    #[default]
    Ginibre,
    HermitianGinibre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub size: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
}

impl SampleConfig {
    pub fn new(size: usize, count: usize, seed: u64) -> Self {
        SampleConfig {
            size,
            count,
            seed,
            distribution: Distribution::Ginibre,
            domain: None,
        }
    }

    pub fn with_domain(mut self, domain: DomainSpec) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_distribution(mut self, distribution: Distribution) -> Self {
        self.distribution = distribution;
        self
    }
}

/// Deterministic RNG for sample `index` of a batch seeded by `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Ginibre matrix: iid standard complex normal entries scaled by `1/√n`.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |_, _| standard_complex_normal(rng) * scale)
}

fn draw_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, dist: Distribution) -> CMatrix {
    let g = ginibre(rng, n);
    match dist {
        Distribution::Ginibre => g,
        Distribution::HermitianGinibre => (&g + g.adjoint()) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    }
}

/// Draws `cfg.count` tuples of `num_vars` matrices, each satisfying `cfg.domain`.
///
/// Violations are repaired where possible: half-plane constraints by a
/// scalar shift, norm constraints by rescaling to a uniformly drawn fraction
/// of the bound. Tuples still outside the domain are redrawn.
pub fn sample_tuple(cfg: &SampleConfig, num_vars: usize) -> Result<Vec<MatrixTuple>, EvalError> {
    if cfg.size == 0 || cfg.count == 0 || num_vars == 0 {
        return Err(EvalError::InvalidConfig(
            "size, count and variable count must all be at least 1".into(),
        ));
    }
    if let Some(d) = &cfg.domain {
        d.validate(num_vars)?;
    }
    (0..cfg.count)
        .map(|k| sample_one(cfg, num_vars, &mut stream_rng(cfg.seed, k as u64)))
        .collect()
}

fn sample_one<R: Rng + ?Sized>(cfg: &SampleConfig, num_vars: usize, rng: &mut R) -> Result<MatrixTuple, EvalError> {
    let n = cfg.size;
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let mut mats: Vec<CMatrix> = (0..num_vars).map(|_| draw_matrix(rng, n, cfg.distribution)).collect();
        if let Some(domain) = &cfg.domain {
            repair(&mut mats, domain, rng);
            let t = MatrixTuple::new(mats)?;
            if domain.constraints.iter().all(|c| satisfies(c, &t)) {
                return Ok(t);
            }
        } else {
            return MatrixTuple::new(mats);
        }
    }
    Err(EvalError::DomainUnsatisfiable {
        attempts: MAX_SAMPLE_ATTEMPTS,
    })
}

// Shifts first: positive rescaling keeps eigenvalues inside a half-plane.
fn repair<R: Rng + ?Sized>(mats: &mut [CMatrix], domain: &DomainSpec, rng: &mut R) {
    let n = mats[0].nrows();
    for c in &domain.constraints {
        if let Constraint::SpectralHalfplane { var, angle } = c {
            let a = rotated_min_real(&mats[*var], *angle);
            if a <= 0.0 {
                let shift = Complex64::from_polar(a.abs() + HALFPLANE_MARGIN, *angle);
                mats[*var] += identity(n) * shift;
            }
        }
    }
    for c in &domain.constraints {
        if let Constraint::NormBound { var, bound } = c {
            let norm = op_norm(&mats[*var]);
            if norm >= *bound {
                let target = bound * rng.random::<f64>();
                mats[*var] *= Complex64::new(target / norm, 0.0);
            }
        }
    }
    for c in &domain.constraints {
        if let Constraint::WeightedNormSum { weights, bound } = c {
            let t = MatrixTuple::new(mats.to_vec()).expect("repair keeps shapes");
            let s = weighted_sum(weights, &t);
            if s >= *bound {
                let factor = Complex64::new(bound * rng.random::<f64>() / s, 0.0);
                for (w, m) in weights.iter().zip(mats.iter_mut()) {
                    if *w > 0.0 {
                        *m *= factor;
                    }
                }
            }
        }
    }
}

/// A commuting tuple `(p_1(T), …, p_N(T))` for one Ginibre matrix `T` and
/// random polynomials `p_i` of degree at most two.
pub fn sample_commuting_tuple(n: usize, num_vars: usize, seed: u64) -> Result<MatrixTuple, EvalError> {
    if n == 0 || num_vars == 0 {
        return Err(EvalError::InvalidConfig(
            "size and variable count must be at least 1".into(),
        ));
    }
    let mut rng = stream_rng(seed, 0);
    let t = ginibre(&mut rng, n);
    let t2 = &t * &t;
    let id = identity(n);
    let mats = (0..num_vars)
        .map(|_| {
            let [a, b, c] = [(); 3].map(|_| standard_complex_normal(&mut rng));
            &id * a + &t * b + &t2 * c
        })
        .collect();
    MatrixTuple::new(mats)
}
