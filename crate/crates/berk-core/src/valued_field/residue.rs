//! Residue fields: the rationals, or F_{p^k} as F_p[y]/(m(y)) with m the
//! first monic irreducible of degree k in lexicographic order.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::arith::{fmt_q, Q};
use crate::error::{BerkError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResidueField {
    Rationals,
    Finite { p: u64, k: u32 },
}

impl ResidueField {
    pub fn characteristic(&self) -> u64 {
        match self {
            ResidueField::Rationals => 0,
            ResidueField::Finite { p, .. } => *p,
        }
    }

    pub fn zero(&self) -> ResidueElement {
        match *self {
            ResidueField::Rationals => ResidueElement::Rat(Q::zero()),
            ResidueField::Finite { p, k } => ResidueElement::Fin { p, k, c: vec![0; k as usize] },
        }
    }

    pub fn one(&self) -> ResidueElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> ResidueElement {
        match *self {
            ResidueField::Rationals => ResidueElement::Rat(Q::from_integer(BigInt::from(n))),
            ResidueField::Finite { p, k } => {
                let mut c = vec![0; k as usize];
                c[0] = n.rem_euclid(p as i64) as u64;
                ResidueElement::Fin { p, k, c }
            }
        }
    }

    /// Image of a rational; fails when the denominator is divisible by p.
    pub fn from_q(&self, r: &Q) -> Result<ResidueElement> {
        match *self {
            ResidueField::Rationals => Ok(ResidueElement::Rat(r.clone())),
            ResidueField::Finite { p, k } => {
                let pb = BigInt::from(p);
                let d = r.denom().mod_floor(&pb);
                if d.is_zero() {
                    return Err(BerkError::DivisionByZero);
                }
                let n = r.numer().mod_floor(&pb).to_u64().unwrap();
                let d = d.to_u64().unwrap();
                let mut c = vec![0; k as usize];
                c[0] = mulmod(n, inv_mod_p(d, p), p);
                Ok(ResidueElement::Fin { p, k, c })
            }
        }
    }

    /// Number of elements, when finite.
    pub fn order(&self) -> Option<u128> {
        match *self {
            ResidueField::Rationals => None,
            ResidueField::Finite { p, k } => (p as u128).checked_pow(k),
        }
    }

    /// The i-th element in a fixed enumeration of F_{p^k}.
    pub fn element(&self, mut i: u128) -> ResidueElement {
        match *self {
            ResidueField::Rationals => panic!("the rationals are not enumerated"),
            ResidueField::Finite { p, k } => {
                let mut c = vec![0; k as usize];
                for slot in c.iter_mut() {
                    *slot = (i % p as u128) as u64;
                    i /= p as u128;
                }
                ResidueElement::Fin { p, k, c }
            }
        }
    }
}

impl fmt::Display for ResidueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueField::Rationals => write!(f, "Q"),
            ResidueField::Finite { p, k } if *k == 1 => write!(f, "F_{p}"),
            ResidueField::Finite { p, k } => write!(f, "F_{p}^{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResidueElement {
    Rat(Q),
    /// Coefficients of 1, y, ..., y^(k-1) modulo the fixed irreducible.
    Fin { p: u64, k: u32, c: Vec<u64> },
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    // Fermat
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

fn poly_rem_fp(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    // m monic
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            for (i, mi) in m.iter().enumerate() {
                let t = mulmod(lead, *mi, p);
                a[shift + i] = (a[shift + i] + p - t) % p;
            }
        }
        a.pop();
    }
    a
}

fn is_irreducible_fp(m: &[u64], p: u64) -> bool {
    let k = m.len() - 1;
    if k <= 1 {
        return true;
    }
    // trial division by every monic polynomial of degree 1..=k/2
    for d in 1..=k / 2 {
        let count = (p as u128).pow(d as u32);
        for idx in 0..count {
            let mut g = vec![0u64; d + 1];
            let mut i = idx;
            for slot in g.iter_mut().take(d) {
                *slot = (i % p as u128) as u64;
                i /= p as u128;
            }
            g[d] = 1;
            if poly_rem_fp(m.to_vec(), &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The defining polynomial of F_{p^k} (monic, low-degree coefficient first).
pub fn modulus(p: u64, k: u32) -> Vec<u64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Vec<u64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&(p, k)) {
        return m.clone();
    }
    let k_us = k as usize;
    let count = (p as u128).pow(k);
    let mut found = None;
    for idx in 0..count {
        let mut m = vec![0u64; k_us + 1];
        let mut i = idx;
        for slot in m.iter_mut().take(k_us) {
            *slot = (i % p as u128) as u64;
            i /= p as u128;
        }
        m[k_us] = 1;
        if k_us > 1 && m[0] == 0 {
            continue;
        }
        if is_irreducible_fp(&m, p) {
            found = Some(m);
            break;
        }
    }
    let m = found.expect("an irreducible polynomial exists in every degree");
    cache.lock().unwrap().insert((p, k), m.clone());
    m
}

impl ResidueElement {
    pub fn field(&self) -> ResidueField {
        match self {
            ResidueElement::Rat(_) => ResidueField::Rationals,
            ResidueElement::Fin { p, k, .. } => ResidueField::Finite { p: *p, k: *k },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ResidueElement::Rat(r) => r.is_zero(),
            ResidueElement::Fin { c, .. } => c.iter().all(|&x| x == 0),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            ResidueElement::Rat(r) => r.is_one(),
            ResidueElement::Fin { c, .. } => c[0] == 1 && c[1..].iter().all(|&x| x == 0),
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.field(), other.field(), "residue fields differ");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        match (self, other) {
            (ResidueElement::Rat(a), ResidueElement::Rat(b)) => ResidueElement::Rat(a + b),
            (ResidueElement::Fin { p, k, c }, ResidueElement::Fin { c: d, .. }) => ResidueElement::Fin {
                p: *p,
                k: *k,
                c: c.iter().zip(d).map(|(x, y)| (x + y) % p).collect(),
            },
            _ => unreachable!(),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            ResidueElement::Rat(a) => ResidueElement::Rat(-a),
            ResidueElement::Fin { p, k, c } => ResidueElement::Fin {
                p: *p,
                k: *k,
                c: c.iter().map(|x| (p - x) % p).collect(),
            },
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        match (self, other) {
            (ResidueElement::Rat(a), ResidueElement::Rat(b)) => ResidueElement::Rat(a * b),
            (ResidueElement::Fin { p, k, c }, ResidueElement::Fin { c: d, .. }) => {
                let (p, k) = (*p, *k);
                if k == 1 {
                    return ResidueElement::Fin { p, k, c: vec![mulmod(c[0], d[0], p)] };
                }
                let mut prod = vec![0u64; 2 * k as usize - 1];
                for (i, x) in c.iter().enumerate() {
                    if *x == 0 {
                        continue;
                    }
                    for (j, y) in d.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + mulmod(*x, *y, p)) % p;
                    }
                }
                let mut r = poly_rem_fp(prod, &modulus(p, k), p);
                r.resize(k as usize, 0);
                ResidueElement::Fin { p, k, c: r }
            }
            _ => unreachable!(),
        }
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut r = self.field().one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(BerkError::DivisionByZero);
        }
        match self {
            ResidueElement::Rat(a) => Ok(ResidueElement::Rat(a.recip())),
            ResidueElement::Fin { p, k, c } => {
                if *k == 1 {
                    return Ok(ResidueElement::Fin { p: *p, k: 1, c: vec![inv_mod_p(c[0], *p)] });
                }
                let order = (*p as u128).pow(*k);
                Ok(self.pow(order - 2))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Image under F_p ⊂ F_{p^k} -> F_{p^k'}, defined when the element lies
    /// in the prime field or the degrees agree.
    pub fn coerce(&self, target: ResidueField) -> Result<Self> {
        if self.field() == target {
            return Ok(self.clone());
        }
        match (self, target) {
            (ResidueElement::Fin { p, c, .. }, ResidueField::Finite { p: p2, k: k2 }) if *p == p2 => {
                if c[1..].iter().all(|&x| x == 0) {
                    let mut d = vec![0; k2 as usize];
                    d[0] = c[0];
                    Ok(ResidueElement::Fin { p: p2, k: k2, c: d })
                } else {
                    Err(BerkError::ExtensionBound(format!(
                        "no embedding of {} into {}",
                        self.field(),
                        target
                    )))
                }
            }
            _ => Err(BerkError::IncompatibleBackends),
        }
    }

    pub fn to_literal(&self) -> String {
        match self {
            ResidueElement::Rat(r) => fmt_q(r),
            ResidueElement::Fin { c, k, .. } if *k == 1 => c[0].to_string(),
            ResidueElement::Fin { c, .. } => c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":"),
        }
    }

    pub fn parse(field: ResidueField, s: &str) -> Result<Self> {
        let bad = || BerkError::Parse(format!("residue literal `{s}`"));
        match field {
            ResidueField::Rationals => super::arith::parse_q(s).map(ResidueElement::Rat).ok_or_else(bad),
            ResidueField::Finite { p, k } => {
                if s.contains(':') {
                    let parts: Vec<&str> = s.split(':').collect();
                    if parts.len() != k as usize {
                        return Err(bad());
                    }
                    let mut c = Vec::new();
                    for part in parts {
                        let v: i64 = part.trim().parse().map_err(|_| bad())?;
                        c.push(v.rem_euclid(p as i64) as u64);
                    }
                    Ok(ResidueElement::Fin { p, k, c })
                } else {
                    let r = super::arith::parse_q(s).ok_or_else(bad)?;
                    field.from_q(&r)
                }
            }
        }
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

/// Dense polynomial over a residue field, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RPoly {
    pub field: ResidueField,
    pub coeffs: Vec<ResidueElement>,
}

impl RPoly {
    pub fn new(field: ResidueField, mut coeffs: Vec<ResidueElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RPoly { field, coeffs }
    }

    pub fn from_ints(field: ResidueField, cs: &[i64]) -> Self {
        RPoly::new(field, cs.iter().map(|&c| field.from_int(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&ResidueElement> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &ResidueElement) -> ResidueElement {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn scale(&self, s: &ResidueElement) -> Self {
        RPoly::new(self.field, self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.field.zero();
        RPoly::new(
            self.field,
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z).sub(other.coeffs.get(i).unwrap_or(&z)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RPoly::new(self.field, vec![]);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        RPoly::new(self.field, out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let inv = d.lead().unwrap().inv().unwrap();
        let mut r = self.coeffs.clone();
        let mut qc = vec![self.field.zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let lead = r.last().unwrap().clone();
            let shift = r.len() - 1 - dd;
            if !lead.is_zero() {
                let f = lead.mul(&inv);
                for (i, c) in d.coeffs.iter().enumerate() {
                    r[shift + i] = r[shift + i].sub(&f.mul(c));
                }
                qc[shift] = f;
            }
            r.pop();
        }
        (RPoly::new(self.field, qc), RPoly::new(self.field, r))
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().unwrap()),
        }
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Whether `self = c * other` for a constant c; returns c.
    pub fn proportional(&self, other: &Self) -> Option<ResidueElement> {
        if self.coeffs.len() != other.coeffs.len() || other.is_zero() {
            return None;
        }
        let i = other.coeffs.iter().position(|c| !c.is_zero())?;
        let c = self.coeffs[i].div(&other.coeffs[i]).ok()?;
        if other.scale(&c) == *self {
            Some(c)
        } else {
            None
        }
    }
}

/// Multiplicity of `root` in `f` (f nonzero).
fn multiplicity(f: &RPoly, root: &ResidueElement) -> usize {
    let lin = RPoly::new(f.field, vec![root.neg(), f.field.one()]);
    let mut g = f.clone();
    let mut m = 0;
    loop {
        let (quo, rem) = g.divrem(&lin);
        if !rem.is_zero() || g.degree() == Some(0) {
            return m;
        }
        g = quo;
        m += 1;
    }
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    if n.is_zero() {
        return None;
    }
    // trial division is fine at desk scale; refuse absurd sizes
    if n.bits() > 64 {
        return None;
    }
    let n = n.to_u64().unwrap();
    let mut small = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            small.push(d);
        }
        d += 1;
        if d > 5_000_000 {
            return None;
        }
    }
    let mut all: Vec<BigInt> = small.iter().map(|&d| BigInt::from(d)).collect();
    for &d in small.iter().rev() {
        if d * d != n {
            all.push(BigInt::from(n / d));
        }
    }
    Some(all)
}

fn rational_roots(f: &RPoly) -> Vec<(ResidueElement, usize)> {
    // clear denominators, strip the factor y^m
    let lcm = f.coeffs.iter().fold(BigInt::one(), |acc, c| match c {
        ResidueElement::Rat(r) => acc.lcm(r.denom()),
        _ => unreachable!(),
    });
    let ints: Vec<BigInt> = f
        .coeffs
        .iter()
        .map(|c| match c {
            ResidueElement::Rat(r) => (r * Q::from_integer(lcm.clone())).to_integer(),
            _ => unreachable!(),
        })
        .collect();
    let mut out = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero()).unwrap();
    if low > 0 {
        out.push((ResidueElement::Rat(Q::zero()), low));
    }
    let (Some(nums), Some(dens)) = (divisors(&ints[low]), divisors(ints.last().unwrap())) else {
        return out;
    };
    let mut cands: Vec<Q> = Vec::new();
    for a in &nums {
        for b in &dens {
            for s in [1i64, -1] {
                let c = Q::new(a * s, b.clone());
                if !cands.contains(&c) {
                    cands.push(c);
                }
            }
        }
    }
    cands.sort();
    for c in cands {
        let e = ResidueElement::Rat(c);
        if f.eval(&e).is_zero() {
            let m = multiplicity(f, &e);
            out.push((e, m));
        }
    }
    out
}

const ENUMERATION_LIMIT: u128 = 1 << 20;

/// Roots of `f` lying in its own coefficient field, with multiplicities.
/// Over the rationals only rational roots are found.
pub fn roots_in_field(f: &RPoly) -> Result<Vec<(ResidueElement, usize)>> {
    if f.degree().unwrap_or(0) == 0 {
        return Ok(vec![]);
    }
    match f.field {
        ResidueField::Rationals => Ok(rational_roots(f)),
        ResidueField::Finite { .. } => {
            let n = f.field.order().filter(|&n| n <= ENUMERATION_LIMIT).ok_or_else(|| {
                BerkError::ExtensionBound(format!("{} is too large to enumerate", f.field))
            })?;
            let mut out = Vec::new();
            for i in 0..n {
                let x = f.field.element(i);
                if f.eval(&x).is_zero() {
                    let m = multiplicity(f, &x);
                    out.push((x, m));
                }
            }
            Ok(out)
        }
    }
}

/// Roots of `f` in the smallest extension F_{p^k}, k ≤ k_max, over which it
/// splits (coefficients must lie in the prime field for k > 1). Over ℚ,
/// rational roots only; `ExtensionBound` when they do not account for deg f.
pub fn residue_roots(f: &RPoly, k_max: u32) -> Result<Vec<(ResidueElement, usize)>> {
    let deg = f.degree().ok_or_else(|| BerkError::ParamDomain("zero polynomial".into()))?;
    if deg == 0 {
        return Err(BerkError::ParamDomain("constant polynomial".into()));
    }
    match f.field {
        ResidueField::Rationals => {
            let roots = rational_roots(f);
            let total: usize = roots.iter().map(|r| r.1).sum();
            if total < deg {
                return Err(BerkError::ExtensionBound(
                    "irrational roots over the rationals".into(),
                ));
            }
            Ok(roots)
        }
        ResidueField::Finite { p, k } => {
            let mut ext = k;
            while ext <= k_max.max(k) {
                if ext % k == 0 {
                    let target = ResidueField::Finite { p, k: ext };
                    let lifted = RPoly::new(
                        target,
                        f.coeffs.iter().map(|c| c.coerce(target)).collect::<Result<Vec<_>>>()?,
                    );
                    let roots = roots_in_field(&lifted)?;
                    if roots.iter().map(|r| r.1).sum::<usize>() == deg {
                        return Ok(roots);
                    }
                }
                ext += 1;
            }
            Err(BerkError::ExtensionBound(format!("no splitting field F_{p}^k with k <= {k_max}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f3_square_minus_one() {
        let f3 = ResidueField::Finite { p: 3, k: 1 };
        let roots = residue_roots(&RPoly::from_ints(f3, &[-1, 0, 1]), 4).unwrap();
        assert_eq!(roots, vec![(f3.from_int(1), 1), (f3.from_int(2), 1)]);
    }

    #[test]
    fn f2_trinomial_splits_in_f4() {
        let f2 = ResidueField::Finite { p: 2, k: 1 };
        let f = RPoly::from_ints(f2, &[1, 1, 1]);
        let roots = residue_roots(&f, 4).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, m) in &roots {
            assert_eq!(*m, 1);
            assert_eq!(r.field(), ResidueField::Finite { p: 2, k: 2 });
            let g = RPoly::new(r.field(), f.coeffs.iter().map(|c| c.coerce(r.field()).unwrap()).collect());
            assert!(g.eval(r).is_zero());
        }
        assert!(matches!(residue_roots(&f, 1), Err(BerkError::ExtensionBound(_))));
    }

    #[test]
    fn rationals_reject_irrational_roots() {
        let f = RPoly::from_ints(ResidueField::Rationals, &[-2, 0, 1]);
        assert!(matches!(residue_roots(&f, 4), Err(BerkError::ExtensionBound(_))));
        let g = RPoly::from_ints(ResidueField::Rationals, &[6, -5, 1]);
        let roots = residue_roots(&g, 4).unwrap();
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn field_inverse_roundtrip() {
        let f9 = ResidueField::Finite { p: 3, k: 2 };
        for i in 1..9 {
            let x = f9.element(i);
            assert!(x.mul(&x.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn multiplicities_are_counted() {
        let f2 = ResidueField::Finite { p: 2, k: 1 };
        // (y+1)^2 = y^2 + 1 over F_2
        let roots = residue_roots(&RPoly::from_ints(f2, &[1, 0, 1]), 4).unwrap();
        assert_eq!(roots, vec![(f2.from_int(1), 2)]);
    }
}
