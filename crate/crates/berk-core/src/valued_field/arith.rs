//! Small helpers on exact integers and rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Exponent of `p` in a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (quo, rem) = n.div_rem(&p);
        if !rem.is_zero() {
            return v;
        }
        n = quo;
        v += 1;
    }
}

/// p-adic valuation of a rational; `None` for zero.
pub fn vp(r: &Q, p: u64) -> Option<i64> {
    if r.is_zero() {
        None
    } else {
        Some(vp_int(r.numer(), p) - vp_int(r.denom(), p))
    }
}

pub fn pow_q(p: u64, e: i64) -> Q {
    let base = BigInt::from(p);
    if e >= 0 {
        Q::from_integer(num_traits::pow(base, e as usize))
    } else {
        Q::new(BigInt::one(), num_traits::pow(base, (-e) as usize))
    }
}

pub fn floor_q(r: &Q) -> i64 {
    r.floor().to_integer().to_i64().expect("exponent out of range")
}

pub fn ceil_q(r: &Q) -> i64 {
    r.ceil().to_integer().to_i64().expect("exponent out of range")
}

/// Fractional part in [0, 1).
pub fn frac_q(r: &Q) -> Q {
    r - r.floor()
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// The p-adic digits of `r` strictly below exponent `bound`, returned as a
/// rational. Two rationals truncate equally iff they agree modulo p^bound.
pub fn truncate_padic(r: &Q, p: u64, bound: i64) -> Q {
    let w = match vp(r, p) {
        None => return Q::zero(),
        Some(w) => w,
    };
    if w >= bound {
        return Q::zero();
    }
    let pw = pow_q(p, w);
    let u = r / &pw;
    let m = num_traits::pow(BigInt::from(p), (bound - w) as usize);
    let inv = mod_inverse(u.denom(), &m).expect("unit denominator");
    let digits = (u.numer() * inv).mod_floor(&m);
    Q::from_integer(digits) * pw
}

/// Smallest-height fraction a/b with a ≡ b·u (mod m) and |a|, |b| ≤ sqrt(m/2).
pub fn rational_reconstruct(u: &BigInt, m: &BigInt) -> Option<Q> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let qt = &r0 / &r1;
        let r2 = &r0 - &qt * &r1;
        let t2 = &t0 - &qt * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    Some(Q::new(r1, t1))
}

pub fn q_to_f64(r: &Q) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() && d != 0.0 {
        n / d
    } else {
        // fall back to a scaled division for huge operands
        let shift = r.denom().bits().max(r.numer().bits()) as i64 - 60;
        let scale = BigInt::one() << shift.max(0) as usize;
        let n2 = (r.numer() / &scale).to_f64().unwrap_or(0.0);
        let d2 = (r.denom() / &scale).to_f64().unwrap_or(1.0);
        n2 / d2
    }
}

/// Parse "a", "-a/b" or a decimal-free rational literal.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(Q::new(a, b))
    } else {
        let a: BigInt = s.parse().ok()?;
        Some(Q::from_integer(a))
    }
}

pub fn fmt_q(r: &Q) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn abs_q(r: &Q) -> Q {
    r.abs()
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations_of_rationals() {
        assert_eq!(vp(&qi(9), 3), Some(2));
        assert_eq!(vp(&q(3, 4), 2), Some(-2));
        assert_eq!(vp(&qi(0), 5), None);
    }

    #[test]
    fn truncation_is_canonical() {
        // -1 = 1 + 2 + 4 + ... in Z_2
        assert_eq!(truncate_padic(&qi(-1), 2, 3), qi(7));
        assert_eq!(truncate_padic(&q(1, 3), 2, 4), qi(11));
        assert_eq!(truncate_padic(&q(1, 2), 2, 0), q(1, 2));
        assert_eq!(truncate_padic(&qi(8), 2, 3), qi(0));
    }
}
