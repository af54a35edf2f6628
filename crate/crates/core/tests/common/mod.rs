#![allow(dead_code)]

use freejac_core::linalg::{condition_number, CMatrix};
use freejac_core::matrixeval::ginibre;
use freejac_core::ncpoly::standard_complex_normal;
use freejac_core::{FreePoly, FreePolyMap, MatrixTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_map(rng: &mut ChaCha8Rng, num_vars: usize, num_outputs: usize, max_degree: usize) -> FreePolyMap {
    let comps = (0..num_outputs)
        .map(|_| {
            let terms = rng.random_range(1..=6);
            FreePoly::random(rng, num_vars, max_degree, terms)
        })
        .collect();
    FreePolyMap::new(num_vars, comps).unwrap()
}

pub fn random_tuple(rng: &mut ChaCha8Rng, num: usize, n: usize) -> MatrixTuple {
    MatrixTuple::new((0..num).map(|_| ginibre(rng, n)).collect()).unwrap()
}

/// Identity plus a small perturbation, redrawn until the condition number is below `max_cond`.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize, max_cond: f64) -> CMatrix {
    loop {
        let s = CMatrix::identity(n, n) + CMatrix::from_fn(n, n, |_, _| standard_complex_normal(rng) * 0.4);
        if condition_number(&s) < max_cond {
            return s;
        }
    }
}

/// `‖a − b‖ / max(1, ‖b‖)`.
pub fn rel_err(a: &MatrixTuple, b: &MatrixTuple) -> f64 {
    a.try_sub(b).unwrap().norm() / b.norm().max(1.0)
}
