//! Sparse free (noncommutative) polynomials over the complex numbers.
//!
//! A monomial is a [`Word`]: a finite sequence of variable indices. Words are
//! ordered by length first and lexicographically second, which fixes the
//! iteration order of every polynomial and therefore its printed form.
//!
//! Directional derivatives are represented by doubling the alphabet: for a
//! polynomial in `N` variables, indices `0..N` stand for the point `X` and
//! `N..2N` for the direction `H`. See [`BiPoly`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Coefficients with magnitude below this are dropped after every ring operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Default relative tolerance for coefficientwise comparison.
pub const COEFF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("arity mismatch: expected {expected} substitutions, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("a polynomial map needs at least one component")]
    EmptyMap,
}

/// A monomial in noncommuting variables. The empty word is the unit monomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: usize) -> Self {
        Word(vec![i as u32])
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    fn max_letter(&self) -> Option<usize> {
        self.0.iter().max().map(|&l| l as usize)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|l| format!("x{l}")).collect();
        write!(f, "{}", parts.join("·"))
    }
}

impl From<&[u32]> for Word {
    fn from(letters: &[u32]) -> Self {
        Word(letters.to_vec())
    }
}

/// A free polynomial in `num_vars` noncommuting variables.
#[derive(Clone, Debug, PartialEq)]
pub struct FreePoly {
    num_vars: usize,
    terms: BTreeMap<Word, Complex64>,
}

fn prune(terms: &mut BTreeMap<Word, Complex64>) {
    terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
}

impl FreePoly {
    pub fn zero(num_vars: usize) -> Self {
        FreePoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Complex64::new(1.0, 0.0))
    }

    pub fn constant(num_vars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(num_vars);
        if c.norm() >= PRUNE_THRESHOLD {
            p.terms.insert(Word::empty(), c);
        }
        p
    }

    /// The polynomial consisting of the single variable `index`.
    pub fn var(num_vars: usize, index: usize) -> Result<Self, PolyError> {
        Self::monomial(num_vars, Word::letter(index), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(num_vars: usize, word: Word, c: Complex64) -> Result<Self, PolyError> {
        Self::from_terms(num_vars, [(word, c)])
    }

    /// Builds a polynomial from (word, coefficient) pairs, summing repeated words.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Word, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (w, c) in terms {
            if let Some(m) = w.max_letter() {
                if m >= num_vars {
                    return Err(PolyError::IndexOutOfRange { index: m, num_vars });
                }
            }
            *map.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        prune(&mut map);
        Ok(FreePoly { num_vars, terms: map })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Terms in canonical word order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, word: &Word) -> Complex64 {
        self.terms.get(word).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&Word::empty())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Length of the longest word, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).max()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_vars(&self, other: &FreePoly) -> Result<(), PolyError> {
        if self.num_vars != other.num_vars {
            return Err(PolyError::VarCountMismatch {
                left: self.num_vars,
                right: other.num_vars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &FreePoly) -> Result<FreePoly, PolyError> {
        self.check_vars(other)?;
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            *terms.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        prune(&mut terms);
        Ok(FreePoly {
            num_vars: self.num_vars,
            terms,
        })
    }

    pub fn try_sub(&self, other: &FreePoly) -> Result<FreePoly, PolyError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> FreePoly {
        FreePoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> FreePoly {
        let mut terms: BTreeMap<_, _> = self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect();
        prune(&mut terms);
        FreePoly {
            num_vars: self.num_vars,
            terms,
        }
    }

    /// Noncommutative product: the coefficient of `w` sums `p(u)·q(v)` over `w = uv`.
    pub fn try_mul(&self, other: &FreePoly) -> Result<FreePoly, PolyError> {
        self.mul_bounded(other, usize::MAX)
    }

    /// Product with every word longer than `max_degree` discarded.
    pub fn mul_truncated(&self, other: &FreePoly, max_degree: usize) -> Result<FreePoly, PolyError> {
        self.mul_bounded(other, max_degree)
    }

    fn mul_bounded(&self, other: &FreePoly, max_degree: usize) -> Result<FreePoly, PolyError> {
        self.check_vars(other)?;
        let mut terms = BTreeMap::new();
        for (u, a) in &self.terms {
            if u.len() > max_degree {
                // words are sorted by length
                break;
            }
            for (v, b) in &other.terms {
                if u.len() + v.len() > max_degree {
                    break;
                }
                *terms.entry(u.concat(v)).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        prune(&mut terms);
        Ok(FreePoly {
            num_vars: self.num_vars,
            terms,
        })
    }

    /// Drops all words of length greater than `d`.
    pub fn truncate(&self, d: usize) -> FreePoly {
        FreePoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() <= d)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// The terms of exactly degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> FreePoly {
        FreePoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == d)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// Reinterprets the polynomial in a larger alphabet; the existing indices keep their meaning.
    pub fn embed(&self, num_vars: usize) -> Result<FreePoly, PolyError> {
        if num_vars < self.num_vars {
            return Err(PolyError::VarCountMismatch {
                left: self.num_vars,
                right: num_vars,
            });
        }
        Ok(FreePoly {
            num_vars,
            terms: self.terms.clone(),
        })
    }

    /// Word-by-word substitution `x_{i1}…x_{id} ↦ subs[i1]·…·subs[id]`.
    pub fn compose(&self, subs: &[FreePoly]) -> Result<FreePoly, PolyError> {
        self.compose_bounded(subs, usize::MAX)
    }

    /// Substitution keeping only words of length at most `max_degree` in the result.
    pub fn compose_truncated(&self, subs: &[FreePoly], max_degree: usize) -> Result<FreePoly, PolyError> {
        self.compose_bounded(subs, max_degree)
    }

    fn compose_bounded(&self, subs: &[FreePoly], max_degree: usize) -> Result<FreePoly, PolyError> {
        if subs.len() != self.num_vars {
            return Err(PolyError::ArityMismatch {
                expected: self.num_vars,
                found: subs.len(),
            });
        }
        let target_vars = match subs.first() {
            Some(s) => s.num_vars,
            // a polynomial in zero variables is a constant
            None => 0,
        };
        for s in subs {
            if s.num_vars != target_vars {
                return Err(PolyError::VarCountMismatch {
                    left: target_vars,
                    right: s.num_vars,
                });
            }
        }

        // Words iterate shortest first, so every proper prefix is cached before use.
        let mut prefix_products: HashMap<Vec<u32>, FreePoly> = HashMap::new();
        let mut result = FreePoly::zero(target_vars);
        for (w, c) in &self.terms {
            let letters = w.letters();
            let product = if letters.is_empty() {
                FreePoly::one(target_vars)
            } else {
                for k in 1..=letters.len() {
                    if prefix_products.contains_key(&letters[..k]) {
                        continue;
                    }
                    let last = &subs[letters[k - 1] as usize];
                    let next = if k == 1 {
                        last.truncate(max_degree)
                    } else {
                        prefix_products[&letters[..k - 1]].mul_bounded(last, max_degree)?
                    };
                    prefix_products.insert(letters[..k].to_vec(), next);
                }
                prefix_products[letters].clone()
            };
            result = result.try_add(&product.scale(*c))?;
        }
        Ok(result)
    }

    /// Formal directional derivative via the Leibniz rule.
    ///
    /// Each occurrence of `x_i` in a word is replaced, one position at a time,
    /// by the direction variable `h_i` (index `N + i`).
    pub fn formal_derivative(&self) -> BiPoly {
        let n = self.num_vars;
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            for k in 0..w.len() {
                let mut letters = w.letters().to_vec();
                letters[k] += n as u32;
                *terms.entry(Word(letters)).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        prune(&mut terms);
        BiPoly {
            poly: FreePoly { num_vars: 2 * n, terms },
            base_vars: n,
            h_linear: true,
        }
    }

    /// Coefficientwise comparison with tolerance `tol` times the largest coefficient magnitude.
    pub fn approx_eq(&self, other: &FreePoly, tol: f64) -> bool {
        if self.num_vars != other.num_vars {
            return false;
        }
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        self.max_coeff_diff(other) <= tol * scale
    }

    /// Largest coefficientwise difference `max_w |p_w − q_w|`.
    pub fn max_coeff_diff(&self, other: &FreePoly) -> f64 {
        let mut diff: f64 = 0.0;
        for (w, c) in &self.terms {
            diff = diff.max((c - other.coeff(w)).norm());
        }
        for (w, c) in &other.terms {
            if !self.terms.contains_key(w) {
                diff = diff.max(c.norm());
            }
        }
        diff
    }

    /// Random polynomial with standard complex normal coefficients, for sampling and tests.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, num_vars: usize, max_degree: usize, num_terms: usize) -> FreePoly {
        let mut terms = Vec::with_capacity(num_terms);
        for _ in 0..num_terms {
            let len = rng.random_range(0..=max_degree);
            let letters = (0..len).map(|_| rng.random_range(0..num_vars.max(1)) as u32).collect();
            terms.push((Word(letters), standard_complex_normal(rng)));
        }
        FreePoly::from_terms(num_vars, terms).expect("indices drawn in range")
    }

    /// The standard polynomial `S_k = Σ_σ sgn(σ) X_σ(1) ⋯ X_σ(k)` in `k` variables.
    pub fn standard_polynomial(k: usize) -> FreePoly {
        let mut terms = Vec::new();
        let mut perm: Vec<u32> = (0..k as u32).collect();
        // Heap's algorithm flips the sign on every swap.
        let mut c = vec![0usize; k];
        let mut sign = 1.0;
        terms.push((Word(perm.clone()), Complex64::new(sign, 0.0)));
        let mut i = 0;
        while i < k {
            if c[i] < i {
                let j = if i % 2 == 0 { 0 } else { c[i] };
                perm.swap(j, i);
                sign = -sign;
                terms.push((Word(perm.clone()), Complex64::new(sign, 0.0)));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        FreePoly::from_terms(k, terms).expect("indices below k")
    }
}

/// A complex normal variate with `E|z|² = 1`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A polynomial in `2N` variables, `X` indices `0..N` and direction indices `N..2N`.
///
/// Produced by [`FreePoly::formal_derivative`]; `h_linear` records whether
/// every word carries exactly one direction letter.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly {
    poly: FreePoly,
    base_vars: usize,
    h_linear: bool,
}

impl BiPoly {
    pub fn new(poly: FreePoly, base_vars: usize) -> Result<Self, PolyError> {
        if poly.num_vars != 2 * base_vars {
            return Err(PolyError::VarCountMismatch {
                left: poly.num_vars,
                right: 2 * base_vars,
            });
        }
        let h_linear = Self::scan_h_linear(&poly, base_vars);
        Ok(BiPoly {
            poly,
            base_vars,
            h_linear,
        })
    }

    fn scan_h_linear(poly: &FreePoly, base_vars: usize) -> bool {
        poly.terms()
            .all(|(w, _)| w.letters().iter().filter(|&&l| l as usize >= base_vars).count() == 1)
    }

    pub fn poly(&self) -> &FreePoly {
        &self.poly
    }

    pub fn into_poly(self) -> FreePoly {
        self.poly
    }

    pub fn base_vars(&self) -> usize {
        self.base_vars
    }

    pub fn is_h_linear(&self) -> bool {
        self.h_linear
    }

    pub fn try_add(&self, other: &BiPoly) -> Result<BiPoly, PolyError> {
        BiPoly::new(self.poly.try_add(&other.poly)?, self.base_vars)
    }

    /// `self · q` with `q` embedded into the doubled alphabet.
    pub fn mul_right(&self, q: &FreePoly) -> Result<BiPoly, PolyError> {
        let q = self.lift(q)?;
        BiPoly::new(self.poly.try_mul(&q)?, self.base_vars)
    }

    /// `q · self` with `q` embedded into the doubled alphabet.
    pub fn mul_left(&self, q: &FreePoly) -> Result<BiPoly, PolyError> {
        let q = self.lift(q)?;
        BiPoly::new(q.try_mul(&self.poly)?, self.base_vars)
    }

    fn lift(&self, q: &FreePoly) -> Result<FreePoly, PolyError> {
        if q.num_vars != self.base_vars {
            return Err(PolyError::VarCountMismatch {
                left: self.base_vars,
                right: q.num_vars,
            });
        }
        q.embed(2 * self.base_vars)
    }
}

/// An ordered tuple of free polynomials sharing one alphabet: a map `M^N → M^N̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreePolyMap {
    num_vars: usize,
    components: Vec<FreePoly>,
}

impl FreePolyMap {
    pub fn new(num_vars: usize, components: Vec<FreePoly>) -> Result<Self, PolyError> {
        if components.is_empty() {
            return Err(PolyError::EmptyMap);
        }
        for c in &components {
            if c.num_vars != num_vars {
                return Err(PolyError::VarCountMismatch {
                    left: num_vars,
                    right: c.num_vars,
                });
            }
        }
        Ok(FreePolyMap { num_vars, components })
    }

    pub fn identity(num_vars: usize) -> Self {
        let components = (0..num_vars)
            .map(|i| FreePoly::var(num_vars, i).expect("index in range"))
            .collect();
        FreePolyMap { num_vars, components }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_outputs(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FreePoly] {
        &self.components
    }

    pub fn degree(&self) -> Option<usize> {
        self.components.iter().filter_map(FreePoly::degree).max()
    }

    /// `self ∘ inner`: substitutes the components of `inner` into every component.
    pub fn compose(&self, inner: &FreePolyMap) -> Result<FreePolyMap, PolyError> {
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components))
            .collect::<Result<Vec<_>, _>>()?;
        FreePolyMap::new(inner.num_vars, components)
    }

    pub fn compose_truncated(&self, inner: &FreePolyMap, max_degree: usize) -> Result<FreePolyMap, PolyError> {
        let components = self
            .components
            .iter()
            .map(|c| c.compose_truncated(&inner.components, max_degree))
            .collect::<Result<Vec<_>, _>>()?;
        FreePolyMap::new(inner.num_vars, components)
    }

    pub fn truncate(&self, d: usize) -> FreePolyMap {
        FreePolyMap {
            num_vars: self.num_vars,
            components: self.components.iter().map(|c| c.truncate(d)).collect(),
        }
    }

    pub fn try_sub(&self, other: &FreePolyMap) -> Result<FreePolyMap, PolyError> {
        if self.components.len() != other.components.len() {
            return Err(PolyError::ArityMismatch {
                expected: self.components.len(),
                found: other.components.len(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<Vec<_>, _>>()?;
        FreePolyMap::new(self.num_vars, components)
    }

    /// Coefficient matrix of the degree-one part: entry `(i, j)` is the coefficient of `x_j` in component `i`.
    pub fn linear_part(&self) -> Vec<Vec<Complex64>> {
        self.components
            .iter()
            .map(|c| (0..self.num_vars).map(|j| c.coeff(&Word::letter(j))).collect())
            .collect()
    }

    pub fn has_constant_terms(&self) -> bool {
        self.components.iter().any(|c| c.terms.contains_key(&Word::empty()))
    }

    pub fn formal_derivative(&self) -> Vec<BiPoly> {
        self.components.iter().map(FreePoly::formal_derivative).collect()
    }

    pub fn approx_eq(&self, other: &FreePolyMap, tol: f64) -> bool {
        self.num_vars == other.num_vars
            && self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn max_coeff_diff(&self, other: &FreePolyMap) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_coeff_diff(b))
            .fold(0.0, f64::max)
    }
}
