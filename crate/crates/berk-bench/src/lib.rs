//! Shared fixtures for the benchmarks.

use berk_core::berkovich::BerkPoint;
use berk_core::rational_map::RationalMap;
use berk_core::skeleton::{catalog, Example};
use berk_core::valued_field::arith::qi;
use berk_core::{Backend, Poly};

pub fn padic3() -> Backend {
    Backend::padic(3)
}

/// The degree 5 companion of the Cantor-set example over Q_3.
pub fn r0_companion() -> RationalMap {
    catalog(&Example::r0(5, qi(1)), Some(&padic3())).unwrap().companion.unwrap()
}

/// z^2 + z/3: bad reduction, tame over Q_3.
pub fn quadratic() -> RationalMap {
    let b = padic3();
    let num = Poly::from_ints(b, &[0, 1, 3]);
    let den = Poly::from_ints(b, &[3]);
    RationalMap::new(num, den).unwrap()
}

pub fn deep_ball(depth: i64) -> BerkPoint {
    let b = padic3();
    BerkPoint::type2(&b.from_int(1), qi(depth)).unwrap()
}
