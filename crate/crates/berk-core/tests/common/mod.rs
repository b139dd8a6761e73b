#![allow(dead_code)]

use berk_core::berkovich::BerkPoint;
use berk_core::rational_map::RationalMap;
use berk_core::valued_field::arith::{q, qi};
use berk_core::{Backend, FieldElement, Poly, Q};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

pub fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

/// n/d · p^e for small n, d.
pub fn small_q() -> impl Strategy<Value = Q> {
    (-30i64..=30, 1i64..=6, -2i32..=3).prop_map(|(n, d, e)| Q::new(n.into(), d.into()) * Q::from_integer(3.into()).pow(e))
}

pub fn exponent() -> impl Strategy<Value = Q> {
    (-8i64..=16, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

/// A sum of up to three monomials c·π^e; rational coefficients are taken
/// with denominators prime to every residue characteristic used here.
pub fn element(b: Backend) -> impl Strategy<Value = FieldElement> {
    prop::collection::vec((-20i64..=20, prop::sample::select(vec![1i64, 7, 11, 13]), exponent()), 1..=3).prop_map(
        move |ts| {
            ts.iter().fold(b.zero(), |acc, (n, d, e)| {
                acc.add(&b.from_q(&q(*n, *d)).unwrap().mul(&b.uniformizer_pow(e)))
            })
        },
    )
}

pub fn type2(b: Backend) -> impl Strategy<Value = BerkPoint> {
    (small_q(), exponent()).prop_map(move |(c, r)| BerkPoint::type2(&b.from_q(&c).unwrap(), r).unwrap())
}

/// Degree 1..=4 maps over PADIC(3) with nonzero resultant.
pub fn padic_map() -> impl Strategy<Value = RationalMap> {
    let b = Backend::padic(3);
    (prop::collection::vec(small_q(), 1..=5), prop::collection::vec(small_q(), 1..=5))
        .prop_map(move |(mut n, mut d)| {
            if n.last().unwrap().is_zero() {
                *n.last_mut().unwrap() = qi(1);
            }
            if d.last().unwrap().is_zero() {
                *d.last_mut().unwrap() = qi(2);
            }
            RationalMap::new(Poly::from_qs(b, &n).unwrap(), Poly::from_qs(b, &d).unwrap()).unwrap()
        })
        .prop_filter("degree ≥ 1, coprime", |r| {
            r.degree() >= 1 && matches!(r.resultant().map(|x| x.is_exact_zero()), Ok(false))
        })
}
