//! Backends and their elements.
//!
//! A p-adic element is a finite sum of components `r * p^f` with `r`
//! rational and the offset `f` in [0, 1); this models the union of the
//! totally ramified extensions Q_p(p^(1/e)). Series elements are finite
//! Puiseux sums `Σ c_e t^e` with coefficients in the residue field. Either
//! kind may carry an absolute precision `N`, meaning it is known modulo
//! elements of valuation ≥ N.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::arith::{ceil_q, floor_q, fmt_q, frac_q, is_prime, parse_q, pow_q, qi, truncate_padic, vp, Q};
use super::residue::{ResidueElement, ResidueField};
use crate::error::{BerkError, Result};

pub const DEFAULT_PRECISION: u32 = 40;
pub const DEFAULT_K_MAX: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    Padic { p: u64 },
    EquiChar0,
    EquiCharP { p: u64, k: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Backend {
    pub kind: BackendKind,
    /// Relative precision, in valuation units, kept on inexact elements.
    pub precision: u32,
    /// Largest residue extension degree searched for roots.
    pub k_max: u32,
}

impl Backend {
    pub fn padic(p: u64) -> Self {
        assert!(is_prime(p), "{p} is not prime");
        Backend { kind: BackendKind::Padic { p }, precision: DEFAULT_PRECISION, k_max: DEFAULT_K_MAX }
    }

    pub fn equichar0() -> Self {
        Backend { kind: BackendKind::EquiChar0, precision: DEFAULT_PRECISION, k_max: DEFAULT_K_MAX }
    }

    pub fn equicharp(p: u64, k: u32) -> Self {
        assert!(is_prime(p) && k >= 1);
        Backend { kind: BackendKind::EquiCharP { p, k }, precision: DEFAULT_PRECISION, k_max: DEFAULT_K_MAX }
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        assert!(precision >= 1);
        self.precision = precision;
        self
    }

    pub fn with_k_max(mut self, k_max: u32) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn residue_field(&self) -> ResidueField {
        match self.kind {
            BackendKind::Padic { p } => ResidueField::Finite { p, k: 1 },
            BackendKind::EquiChar0 => ResidueField::Rationals,
            BackendKind::EquiCharP { p, k } => ResidueField::Finite { p, k },
        }
    }

    /// Characteristic of the field itself (not of the residue field).
    pub fn characteristic(&self) -> u64 {
        match self.kind {
            BackendKind::EquiCharP { p, .. } => p,
            _ => 0,
        }
    }

    /// Real base b with |x| = b^(-valuation(x)).
    pub fn norm_base(&self) -> f64 {
        match self.kind {
            BackendKind::Padic { p } => p as f64,
            _ => std::f64::consts::E,
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { backend: *self, terms: self.empty_terms(), prec: None }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_q(&qi(n)).expect("integers embed in every backend")
    }

    /// Image of a rational; in characteristic p a denominator divisible by p
    /// has no image.
    pub fn from_q(&self, r: &Q) -> Result<FieldElement> {
        match self.kind {
            BackendKind::Padic { .. } => Ok(FieldElement::make(*self, Terms::Padic(vec![(Q::zero(), r.clone())]), None)),
            _ => {
                let c = self.residue_field().from_q(r)?;
                Ok(FieldElement::make(*self, Terms::Series(vec![(Q::zero(), c)]), None))
            }
        }
    }

    /// Constant element with the given residue coefficient (series backends),
    /// or the Teichmüller-free digit lift (p-adic).
    pub fn lift(&self, r: &ResidueElement) -> Result<FieldElement> {
        match self.kind {
            BackendKind::Padic { p } => match r {
                ResidueElement::Fin { p: rp, c, .. } if *rp == p && c[1..].iter().all(|&x| x == 0) => {
                    Ok(self.from_int(c[0] as i64))
                }
                _ => Err(BerkError::ExtensionBound(format!("residue {r} is not in F_{p}"))),
            },
            BackendKind::EquiChar0 => match r {
                ResidueElement::Rat(x) => self.from_q(x),
                _ => Err(BerkError::IncompatibleBackends),
            },
            BackendKind::EquiCharP { .. } => {
                let c = r.coerce(self.residue_field()).map_err(|_| {
                    BerkError::ExtensionBound(format!("residue {r} lies outside {}", self.residue_field()))
                })?;
                Ok(FieldElement::make(*self, Terms::Series(vec![(Q::zero(), c)]), None))
            }
        }
    }

    /// An element of valuation exactly `q`; multiplicative in `q`.
    pub fn uniformizer_pow(&self, q: &Q) -> FieldElement {
        match self.kind {
            BackendKind::Padic { p } => {
                let f = frac_q(q);
                let r = pow_q(p, floor_q(q));
                FieldElement::make(*self, Terms::Padic(vec![(f, r)]), None)
            }
            _ => FieldElement::make(*self, Terms::Series(vec![(q.clone(), self.residue_field().one())]), None),
        }
    }

    fn empty_terms(&self) -> Terms {
        match self.kind {
            BackendKind::Padic { .. } => Terms::Padic(vec![]),
            _ => Terms::Series(vec![]),
        }
    }

    pub fn same_field(&self, other: &Backend) -> bool {
        self.kind == other.kind
    }

    /// Parse "padic:p=3,prec=40", "laurentq:prec=40", "laurentfp:p=2,k=1,prec=40".
    /// An optional "kmax=" key sets the residue extension bound.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| BerkError::Parse(format!("backend `{s}`: {m}"));
        let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut p = None;
        let mut k = 1u32;
        let mut prec = DEFAULT_PRECISION;
        let mut k_max = DEFAULT_K_MAX;
        for kv in rest.split(',').filter(|x| !x.trim().is_empty()) {
            let (key, val) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let n: u64 = val.trim().parse().map_err(|_| bad("not an integer"))?;
            match key.trim() {
                "p" => p = Some(n),
                "k" => k = n as u32,
                "prec" => prec = n as u32,
                "kmax" => k_max = n as u32,
                other => return Err(bad(&format!("unknown key {other}"))),
            }
        }
        if prec == 0 {
            return Err(BerkError::ParamDomain("precision must be at least 1".into()));
        }
        let check_p = |p: Option<u64>| -> Result<u64> {
            let p = p.ok_or_else(|| bad("missing p"))?;
            if !is_prime(p) {
                return Err(BerkError::ParamDomain(format!("{p} is not prime")));
            }
            Ok(p)
        };
        let kind = match name {
            "padic" => BackendKind::Padic { p: check_p(p)? },
            "laurentq" => BackendKind::EquiChar0,
            "laurentfp" => {
                if k == 0 {
                    return Err(BerkError::ParamDomain("k must be at least 1".into()));
                }
                BackendKind::EquiCharP { p: check_p(p)?, k }
            }
            _ => return Err(bad("unknown backend")),
        };
        Ok(Backend { kind, precision: prec, k_max })
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BackendKind::Padic { p } => write!(f, "padic:p={p},prec={}", self.precision),
            BackendKind::EquiChar0 => write!(f, "laurentq:prec={}", self.precision),
            BackendKind::EquiCharP { p, k } => write!(f, "laurentfp:p={p},k={k},prec={}", self.precision),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Terms {
    /// (offset in [0,1), rational coefficient), offsets strictly increasing.
    Padic(Vec<(Q, Q)>),
    /// (exponent, coefficient), exponents strictly increasing.
    Series(Vec<(Q, ResidueElement)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    backend: Backend,
    terms: Terms,
    /// Absolute precision; `None` for exact elements.
    prec: Option<Q>,
}

fn min_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(if a <= b { a } else { b }),
    }
}

impl FieldElement {
    fn make(backend: Backend, terms: Terms, prec: Option<Q>) -> Self {
        let mut x = FieldElement { backend, terms, prec };
        x.normalize();
        x
    }

    fn p(&self) -> u64 {
        match self.backend.kind {
            BackendKind::Padic { p } => p,
            _ => unreachable!(),
        }
    }

    fn normalize(&mut self) {
        match &mut self.terms {
            Terms::Padic(c) => {
                c.retain(|(_, r)| !r.is_zero());
                c.sort_by(|a, b| a.0.cmp(&b.0));
            }
            Terms::Series(t) => {
                t.retain(|(_, c)| !c.is_zero());
                t.sort_by(|a, b| a.0.cmp(&b.0));
            }
        }
        if let Some(v) = self.raw_valuation() {
            let cap = &v + qi(self.backend.precision as i64);
            let over = match &self.terms {
                Terms::Padic(_) => self.prec.is_some(),
                Terms::Series(t) => self.prec.is_some() || t.last().is_some_and(|(e, _)| *e >= cap),
            };
            if over {
                self.prec = min_opt(self.prec.take(), Some(cap));
            }
        }
        if let Some(n) = self.prec.clone() {
            self.cut(&n);
        }
    }

    /// Drop everything of valuation ≥ n.
    fn cut(&mut self, n: &Q) {
        match &mut self.terms {
            Terms::Padic(c) => {
                let p = match self.backend.kind {
                    BackendKind::Padic { p } => p,
                    _ => unreachable!(),
                };
                for (f, r) in c.iter_mut() {
                    *r = truncate_padic(r, p, ceil_q(&(n - &*f)));
                }
                c.retain(|(_, r)| !r.is_zero());
            }
            Terms::Series(t) => t.retain(|(e, _)| e < n),
        }
    }

    fn raw_valuation(&self) -> Option<Q> {
        match &self.terms {
            Terms::Padic(c) => {
                let p = self.p();
                c.iter().map(|(f, r)| qi(vp(r, p).unwrap()) + f).min()
            }
            Terms::Series(t) => t.first().map(|(e, _)| e.clone()),
        }
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Absolute precision of an inexact element.
    pub fn abs_prec(&self) -> Option<&Q> {
        self.prec.as_ref()
    }

    /// Valuation; `None` when no nonzero term is known (exact zero, or zero
    /// to the tracked precision).
    pub fn valuation(&self) -> Option<Q> {
        self.raw_valuation()
    }

    /// Valuation, or the precision bound for an inexact zero; `None` only
    /// for the exact zero.
    pub fn val_floor(&self) -> Option<Q> {
        self.raw_valuation().or_else(|| self.prec.clone())
    }

    pub fn is_zero(&self) -> bool {
        match &self.terms {
            Terms::Padic(c) => c.is_empty(),
            Terms::Series(t) => t.is_empty(),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.is_zero() && self.is_exact()
    }

    /// The same element known only modulo valuation ≥ n.
    pub fn with_abs_prec(&self, n: &Q) -> Self {
        let prec = min_opt(self.prec.clone(), Some(n.clone()));
        FieldElement::make(self.backend, self.terms.clone(), prec)
    }

    /// Canonical representative of the ball of logr `v` around `self`: the
    /// exact element made of all terms of valuation < v.
    pub fn truncate_below(&self, v: &Q) -> Result<Self> {
        if let Some(n) = &self.prec {
            if n < v {
                return Err(BerkError::PrecisionExhausted(format!(
                    "element known to {} but ball radius needs {}",
                    fmt_q(n),
                    fmt_q(v)
                )));
            }
        }
        let mut x = FieldElement { backend: self.backend, terms: self.terms.clone(), prec: None };
        x.cut(v);
        Ok(x)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.backend.same_field(&other.backend) {
            Ok(())
        } else {
            Err(BerkError::IncompatibleBackends)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = min_opt(self.prec.clone(), other.prec.clone());
        let terms = match (&self.terms, &other.terms) {
            (Terms::Padic(a), Terms::Padic(b)) => {
                let mut m: BTreeMap<Q, Q> = BTreeMap::new();
                for (f, r) in a.iter().chain(b.iter()) {
                    *m.entry(f.clone()).or_insert_with(Q::zero) += r;
                }
                Terms::Padic(m.into_iter().collect())
            }
            (Terms::Series(a), Terms::Series(b)) => {
                let mut m: BTreeMap<Q, ResidueElement> = BTreeMap::new();
                for (e, c) in a.iter().chain(b.iter()) {
                    match m.get_mut(e) {
                        Some(acc) => *acc = acc.add(c),
                        None => {
                            m.insert(e.clone(), c.clone());
                        }
                    }
                }
                Terms::Series(m.into_iter().collect())
            }
            _ => unreachable!(),
        };
        Ok(FieldElement::make(self.backend, terms, prec))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(self.backend.zero());
        }
        let mut prec = None;
        if let Some(n) = &self.prec {
            prec = min_opt(prec, Some(n + other.val_floor().unwrap()));
        }
        if let Some(n) = &other.prec {
            prec = min_opt(prec, Some(n + self.val_floor().unwrap()));
        }
        let terms = match (&self.terms, &other.terms) {
            (Terms::Padic(a), Terms::Padic(b)) => {
                let p = Q::from_integer(self.p().into());
                let mut m: BTreeMap<Q, Q> = BTreeMap::new();
                for (f, r) in a {
                    for (g, s) in b {
                        let mut h = f + g;
                        let mut c = r * s;
                        if h >= Q::one() {
                            h -= Q::one();
                            c *= &p;
                        }
                        *m.entry(h).or_insert_with(Q::zero) += c;
                    }
                }
                Terms::Padic(m.into_iter().collect())
            }
            (Terms::Series(a), Terms::Series(b)) => {
                let mut m: BTreeMap<Q, ResidueElement> = BTreeMap::new();
                for (e, c) in a {
                    for (f, d) in b {
                        let x = e + f;
                        if prec.as_ref().is_some_and(|n| x >= *n) {
                            continue;
                        }
                        let cd = c.mul(d);
                        match m.get_mut(&x) {
                            Some(acc) => *acc = acc.add(&cd),
                            None => {
                                m.insert(x, cd);
                            }
                        }
                    }
                }
                Terms::Series(m.into_iter().collect())
            }
            _ => unreachable!(),
        };
        Ok(FieldElement::make(self.backend, terms, prec))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("operands on different backends")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.checked_sub(other).expect("operands on different backends")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("operands on different backends")
    }

    pub fn neg(&self) -> Self {
        let terms = match &self.terms {
            Terms::Padic(c) => Terms::Padic(c.iter().map(|(f, r)| (f.clone(), -r)).collect()),
            Terms::Series(t) => Terms::Series(t.iter().map(|(e, c)| (e.clone(), c.neg())).collect()),
        };
        FieldElement { backend: self.backend, terms, prec: self.prec.clone() }
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut acc = self.backend.one();
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    /// Multiply by an element of valuation `q`.
    pub fn shift(&self, q: &Q) -> Self {
        self.mul(&self.backend.uniformizer_pow(q))
    }

    fn leading_term(&self) -> Self {
        let terms = match &self.terms {
            Terms::Padic(c) => {
                let p = self.p();
                let lead = c.iter().min_by_key(|(f, r)| qi(vp(r, p).unwrap()) + f).unwrap();
                Terms::Padic(vec![lead.clone()])
            }
            Terms::Series(t) => Terms::Series(vec![t[0].clone()]),
        };
        FieldElement { backend: self.backend, terms, prec: None }
    }

    fn single_term_inverse(&self) -> Self {
        let terms = match &self.terms {
            Terms::Padic(c) => {
                let (f, r) = &c[0];
                if f.is_zero() {
                    Terms::Padic(vec![(Q::zero(), r.recip())])
                } else {
                    let p = Q::from_integer(self.p().into());
                    Terms::Padic(vec![(Q::one() - f, (r * p).recip())])
                }
            }
            Terms::Series(t) => {
                let (e, c) = &t[0];
                Terms::Series(vec![(-e, c.inv().unwrap())])
            }
        };
        FieldElement { backend: self.backend, terms, prec: None }
    }

    fn term_count(&self) -> usize {
        match &self.terms {
            Terms::Padic(c) => c.len(),
            Terms::Series(t) => t.len(),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(BerkError::DivisionByZero);
        }
        let v = self.valuation().ok_or_else(|| {
            BerkError::PrecisionExhausted("inverting an element that is zero to working precision".into())
        })?;
        let lead_inv = self.leading_term().single_term_inverse();
        if self.is_exact() && self.term_count() == 1 {
            return Ok(lead_inv);
        }
        let mut rel = qi(self.backend.precision as i64);
        if let Some(n) = &self.prec {
            if &(n - &v) < &rel {
                rel = n - &v;
            }
        }
        let target = -&v + &rel;
        let one = self.backend.one();
        let mut z = lead_inv.with_abs_prec(&target);
        for _ in 0..128 {
            let e = one.sub(&self.mul(&z));
            if e.is_zero() {
                return Ok(z);
            }
            z = z.add(&z.mul(&e));
        }
        Err(BerkError::PrecisionExhausted("inverse iteration did not converge".into()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if other.is_exact_zero() {
            return Err(BerkError::DivisionByZero);
        }
        if self.is_exact_zero() {
            return Ok(self.clone());
        }
        Ok(self.mul(&other.inv()?))
    }

    /// Reduction modulo the maximal ideal.
    pub fn reduce(&self) -> Result<ResidueElement> {
        let rf = self.backend.residue_field();
        match self.valuation() {
            None => match &self.prec {
                Some(n) if *n <= Q::zero() => {
                    Err(BerkError::PrecisionExhausted("residue of an element known below valuation 0".into()))
                }
                _ => Ok(rf.zero()),
            },
            Some(v) if v < Q::zero() => Err(BerkError::NegativeValuation),
            Some(_) => {
                if let Some(n) = &self.prec {
                    if *n <= Q::zero() {
                        return Err(BerkError::PrecisionExhausted("residue not determined".into()));
                    }
                }
                match &self.terms {
                    Terms::Padic(c) => match c.first() {
                        Some((f, r)) if f.is_zero() => rf.from_q(r),
                        _ => Ok(rf.zero()),
                    },
                    Terms::Series(t) => match t.first() {
                        Some((e, c)) if e.is_zero() => Ok(c.clone()),
                        _ => Ok(rf.zero()),
                    },
                }
            }
        }
    }

    /// The rational value of an exact p-adic element with integral offsets,
    /// or the constant coefficient of an exact series constant.
    pub fn as_rational(&self) -> Option<Q> {
        if !self.is_exact() {
            return None;
        }
        match &self.terms {
            Terms::Padic(c) => match c.as_slice() {
                [] => Some(Q::zero()),
                [(f, r)] if f.is_zero() => Some(r.clone()),
                _ => None,
            },
            Terms::Series(t) => match t.as_slice() {
                [] => Some(Q::zero()),
                [(e, ResidueElement::Rat(r))] if e.is_zero() => Some(r.clone()),
                _ => None,
            },
        }
    }

    /// For an inexact p-adic element, the element whose components are the
    /// smallest-height rationals agreeing with it to its precision.
    pub fn rational_guess(&self) -> Option<FieldElement> {
        let (Terms::Padic(c), Some(n)) = (&self.terms, &self.prec) else {
            return None;
        };
        let p = self.p();
        let mut comps = Vec::new();
        for (f, r) in c {
            let v = vp(r, p)?;
            let width = ceil_q(&(n - f)) - v;
            if width < 2 {
                return None;
            }
            let u = r / pow_q(p, v);
            let m = num_traits::pow(num_bigint::BigInt::from(p), width as usize);
            let inv = super::arith::mod_inverse(u.denom(), &m)?;
            let guess = super::arith::rational_reconstruct(&(u.numer() * inv), &m)?;
            comps.push((f.clone(), guess * pow_q(p, v)));
        }
        Some(FieldElement::make(self.backend, Terms::Padic(comps), None))
    }

    /// The unique q-th root of a series element in characteristic p, for q a
    /// power of p (inverse of Frobenius, applied termwise).
    pub fn frobenius_root(&self, q: u64) -> Option<FieldElement> {
        let BackendKind::EquiCharP { p, k } = self.backend.kind else {
            return None;
        };
        let Terms::Series(t) = &self.terms else {
            return None;
        };
        let mut j = 0u32;
        let mut r = q;
        while r > 1 {
            if r % p != 0 {
                return None;
            }
            r /= p;
            j += 1;
        }
        // x -> x^(p^(k-1)) inverts x -> x^p on F_{p^k}
        let e = (p as u128).pow(k - 1);
        let terms = t
            .iter()
            .map(|(x, c)| {
                let mut c = c.clone();
                for _ in 0..j {
                    c = c.pow(e);
                }
                (x / qi(q as i64), c)
            })
            .collect();
        let prec = self.prec.as_ref().map(|n| n / qi(q as i64));
        Some(FieldElement::make(self.backend, Terms::Series(terms), prec))
    }

    pub fn to_literal(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let body = match &self.terms {
            Terms::Padic(c) => {
                let p = self.p();
                for (f, r) in c {
                    if f.is_zero() {
                        parts.push(fmt_q(r));
                    } else {
                        parts.push(format!("{}*{}^({})", fmt_q(r), p, fmt_q(f)));
                    }
                }
                if parts.is_empty() && self.prec.is_none() {
                    parts.push("0".into());
                }
                if let Some(n) = &self.prec {
                    parts.push(format!("O({}^({}))", p, fmt_q(n)));
                }
                return parts.join("+");
            }
            Terms::Series(t) => t
                .iter()
                .map(|(e, c)| format!("({},{})", fmt_q(e), c.to_literal()))
                .collect::<Vec<_>>()
                .join(","),
        };
        match &self.prec {
            None => format!("[{body}]"),
            Some(n) => format!("[{body}]+O(t^({}))", fmt_q(n)),
        }
    }

    pub fn parse(backend: &Backend, s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || BerkError::Parse(format!("field literal `{s}`"));
        match backend.kind {
            BackendKind::Padic { p } => {
                let mut comps = Vec::new();
                let mut prec = None;
                for piece in s.split('+') {
                    if let Some(inner) = piece.strip_prefix("O(").and_then(|x| x.strip_suffix(')')) {
                        let (_, e) = split_power(inner, p).ok_or_else(bad)?;
                        prec = Some(e);
                    } else if let Some((r, rest)) = piece.split_once('*') {
                        let r = parse_q(r).ok_or_else(bad)?;
                        let (_, e) = split_power(rest, p).ok_or_else(bad)?;
                        comps.push((e, r));
                    } else if piece.contains('^') {
                        let (_, e) = split_power(piece, p).ok_or_else(bad)?;
                        comps.push((e, Q::one()));
                    } else {
                        comps.push((Q::zero(), parse_q(piece).ok_or_else(bad)?));
                    }
                }
                let mut x = backend.zero();
                for (e, r) in comps {
                    x = x.add(&backend.uniformizer_pow(&e).mul(&backend.from_q(&r)?));
                }
                Ok(match prec {
                    Some(n) => x.with_abs_prec(&n),
                    None => x,
                })
            }
            _ => {
                if !s.starts_with('[') {
                    let r = parse_q(&s).ok_or_else(bad)?;
                    return backend.from_q(&r);
                }
                let close = s.find(']').ok_or_else(bad)?;
                let body = &s[1..close];
                let tail = &s[close + 1..];
                let rf = backend.residue_field();
                let mut terms = Vec::new();
                let mut rest = body;
                while !rest.is_empty() {
                    let rest2 = rest.strip_prefix(',').unwrap_or(rest);
                    let inner_end = rest2.find(')').ok_or_else(bad)?;
                    let inner = rest2.strip_prefix('(').ok_or_else(bad)?;
                    let inner = &inner[..inner_end - 1];
                    let (e, c) = inner.split_once(',').ok_or_else(bad)?;
                    terms.push((parse_q(e).ok_or_else(bad)?, ResidueElement::parse(rf, c)?));
                    rest = &rest2[inner_end + 1..];
                }
                let mut x = backend.zero();
                for (e, c) in terms {
                    x = x.add(&FieldElement::make(*backend, Terms::Series(vec![(e, c)]), None));
                }
                if tail.is_empty() {
                    return Ok(x);
                }
                let inner = tail
                    .strip_prefix("+O(t^")
                    .and_then(|x| x.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let inner = inner.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(inner);
                let n = parse_q(inner).ok_or_else(bad)?;
                Ok(x.with_abs_prec(&n))
            }
        }
    }
}

/// Parse "p^(e)" or "p^e", checking the base.
fn split_power(s: &str, p: u64) -> Option<(u64, Q)> {
    let (b, e) = s.split_once('^')?;
    let b: u64 = b.parse().ok()?;
    if b != p {
        return None;
    }
    let e = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(e);
    Some((b, parse_q(e)?))
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

/// Order on valuations with `None` read as +∞.
pub fn cmp_val(a: &Option<Q>, b: &Option<Q>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> FieldElement {
        FieldElement::add(self, rhs)
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> FieldElement {
        FieldElement::sub(self, rhs)
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> FieldElement {
        FieldElement::mul(self, rhs)
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::arith::q;
    use super::*;

    fn pa(p: u64, s: &str) -> FieldElement {
        FieldElement::parse(&Backend::padic(p), s).unwrap()
    }

    #[test]
    fn padic_valuations() {
        assert_eq!(pa(3, "9").valuation(), Some(qi(2)));
        assert_eq!(pa(2, "3/4").valuation(), Some(qi(-2)));
        assert_eq!(pa(2, "0").valuation(), None);
    }

    #[test]
    fn small_arithmetic() {
        let b = Backend::padic(5);
        assert_eq!(pa(5, "1/5").mul(&b.from_int(5)), b.one());
        let e = Backend::equichar0();
        let x = FieldElement::parse(&e, "[(0,1),(1,1)]").unwrap().add(&e.from_int(-1));
        assert_eq!(x.valuation(), Some(qi(1)));
        assert_eq!(x.to_literal(), "[(1,1)]");
        assert_eq!(pa(2, "2").add(&pa(2, "4")).valuation(), Some(qi(1)));
    }

    #[test]
    fn fractional_uniformizer() {
        let b = Backend::padic(3);
        let s = b.uniformizer_pow(&q(1, 2));
        assert_eq!(s.valuation(), Some(q(1, 2)));
        assert_eq!(s.mul(&s), b.from_int(3));
        let e = Backend::equichar0();
        assert_eq!(e.uniformizer_pow(&q(3, 2)).valuation(), Some(q(3, 2)));
        // √3 + 1 has valuation 0 and mixes two offsets
        let x = s.add(&b.one());
        assert_eq!(x.valuation(), Some(qi(0)));
        assert_eq!(x.mul(&s.sub(&b.one())), b.from_int(2));
    }

    #[test]
    fn reductions() {
        let f3 = ResidueField::Finite { p: 3, k: 1 };
        assert_eq!(pa(3, "7").reduce().unwrap(), f3.from_int(1));
        assert_eq!(pa(3, "3").reduce().unwrap(), f3.zero());
        assert_eq!(pa(3, "1/3").reduce(), Err(BerkError::NegativeValuation));
        let e = Backend::equichar0();
        let x = FieldElement::parse(&e, "[(0,2),(1,5)]").unwrap();
        assert_eq!(x.reduce().unwrap(), ResidueElement::Rat(qi(2)));
    }

    #[test]
    fn series_inverse_is_geometric() {
        let e = Backend::equichar0().with_precision(6);
        let x = FieldElement::parse(&e, "[(0,1),(1,-1)]").unwrap();
        let y = x.inv().unwrap();
        assert_eq!(y.to_literal(), "[(0,1),(1,1),(2,1),(3,1),(4,1),(5,1)]+O(t^(6))");
        let one = x.mul(&y);
        assert!(one.sub(&e.one()).is_zero());
    }

    #[test]
    fn padic_inverse_of_mixed_offsets() {
        let b = Backend::padic(2).with_precision(20);
        let s = b.uniformizer_pow(&q(1, 2));
        let x = b.one().add(&s);
        let y = x.inv().unwrap();
        assert!(!y.is_exact());
        assert!(x.mul(&y).sub(&b.one()).is_zero());
    }

    #[test]
    fn truncation_is_canonical() {
        let b = Backend::padic(2);
        let x = pa(2, "-1").truncate_below(&qi(3)).unwrap();
        assert_eq!(x, b.from_int(7));
        let y = pa(2, "7").truncate_below(&qi(3)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn literals_roundtrip() {
        let b = Backend::padic(3);
        let x = b.uniformizer_pow(&q(1, 2)).add(&pa(3, "-2/5")).with_abs_prec(&qi(7));
        let back = FieldElement::parse(&b, &x.to_literal()).unwrap();
        assert_eq!(back, x);
        let f = Backend::equicharp(2, 2);
        let y = FieldElement::parse(&f, "[(0,1:1),(3/2,1:0)]+O(t^(9))").unwrap();
        assert_eq!(FieldElement::parse(&f, &y.to_literal()).unwrap(), y);
    }

    #[test]
    fn backend_strings() {
        for s in ["padic:p=3,prec=40", "laurentq:prec=40", "laurentfp:p=2,k=1,prec=40"] {
            assert_eq!(Backend::parse(s).unwrap().to_string(), s);
        }
        assert!(Backend::parse("padic:p=4").is_err());
    }
}
