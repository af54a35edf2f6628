mod common;

use common::{random_map, random_tuple, rel_err, rng};
use freejac_core::matrixeval::{eval_map, eval_poly, jet_eval};
use freejac_core::{Complex64, FreePoly, FreePolyMap};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;

fn pair(seed: u64) -> (FreePoly, FreePoly, usize) {
    let mut r = rng(seed);
    let n = r.random_range(1..=3);
    let (tp, tq) = (r.random_range(1..=5), r.random_range(1..=5));
    let p = FreePoly::random(&mut r, n, 4, tp);
    let q = FreePoly::random(&mut r, n, 4, tq);
    (p, q, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leibniz_rule(seed in any::<u64>()) {
        let (p, q, _) = pair(seed);
        let lhs = p.try_mul(&q).unwrap().formal_derivative();
        let rhs = p.formal_derivative().mul_right(&q).unwrap()
            .try_add(&q.formal_derivative().mul_left(&p).unwrap()).unwrap();
        prop_assert!(lhs.poly().approx_eq(rhs.poly(), TOL));
    }

    #[test]
    fn derivative_is_additive(seed in any::<u64>()) {
        let (p, q, _) = pair(seed);
        let lhs = p.try_add(&q).unwrap().formal_derivative();
        let rhs = p.formal_derivative().try_add(&q.formal_derivative()).unwrap();
        prop_assert!(lhs.poly().approx_eq(rhs.poly(), TOL));
    }

    #[test]
    fn derivative_is_h_linear(seed in any::<u64>()) {
        let (p, _, n) = pair(seed);
        let d = p.formal_derivative();
        prop_assert!(d.is_h_linear());
        for (w, _) in d.poly().terms() {
            prop_assert_eq!(w.letters().iter().filter(|&&l| l as usize >= n).count(), 1);
        }
    }

    #[test]
    fn multiplication_is_associative(seed in any::<u64>()) {
        let (p, q, n) = pair(seed);
        let r = FreePoly::random(&mut rng(seed ^ 0xa5a5), n, 3, 3);
        let left = p.try_mul(&q).unwrap().try_mul(&r).unwrap();
        let right = p.try_mul(&q.try_mul(&r).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, TOL));
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=2);
        let p = random_map(&mut r, n, 1, 3);
        let a = random_map(&mut r, n, n, 2);
        let b = random_map(&mut r, n, n, 2);
        let left = p.compose(&a).unwrap().compose(&b).unwrap();
        let right = p.compose(&a.compose(&b).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, TOL));
    }

    #[test]
    fn composition_matches_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=3);
        let p = random_map(&mut r, n, 2, 3);
        let q = random_map(&mut r, n, n, 2);
        let size = r.random_range(1..=3);
        let x = random_tuple(&mut r, n, size);
        let direct = eval_map(&p.compose(&q).unwrap(), &x).unwrap();
        let nested = eval_map(&p, &eval_map(&q, &x).unwrap()).unwrap();
        prop_assert!(rel_err(&direct, &nested) <= TOL, "{}", rel_err(&direct, &nested));
    }

    #[test]
    fn chain_rule_through_jets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=2);
        let p = random_map(&mut r, n, n, 3);
        let q = random_map(&mut r, n, n, 2);
        let size = r.random_range(1..=3);
        let x = random_tuple(&mut r, n, size);
        let h = random_tuple(&mut r, n, size);
        let composite = jet_eval(&p.compose(&q).unwrap(), &x, &h).unwrap().derivative;
        let inner = jet_eval(&q, &x, &h).unwrap();
        let outer = jet_eval(&p, &inner.value, &inner.derivative).unwrap().derivative;
        prop_assert!(rel_err(&composite, &outer) <= TOL);
    }
}

#[test]
fn standard_polynomial_identity() {
    let s2 = FreePoly::standard_polynomial(2);
    let mut r = rng(9);
    let x = random_tuple(&mut r, 2, 1);
    assert!(eval_poly(&s2, &x).unwrap().norm() < 1e-15);
    let s4 = FreePoly::standard_polynomial(4);
    assert_eq!(s4.degree(), Some(4));
    assert!(s4
        .terms()
        .all(|(_, c)| *c == Complex64::new(1.0, 0.0) || *c == Complex64::new(-1.0, 0.0)));
}

#[test]
fn identity_map_is_neutral_for_composition() {
    let mut r = rng(3);
    let p = random_map(&mut r, 2, 2, 4);
    let id = FreePolyMap::identity(2);
    assert_eq!(p.compose(&id).unwrap(), p);
    assert_eq!(id.compose(&p).unwrap(), p);
}
