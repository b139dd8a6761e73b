//! Piecewise-affine maps on the axis segment S(t), t ∈ [lo, hi], and the
//! Bernoulli calculus on them: cylinders, invariant sets, equilibrium
//! weights and entropies. The example catalog carries companion rational
//! maps so the model can be checked against the full engine.
//!
//! S(t) is the ball of radius exp(t) about 0, so t = −logr.

use num_traits::{One, Signed, Zero};

use crate::berkovich::BerkPoint;
use crate::equilibrium::jacobian;
use crate::error::{BerkError, Result};
use crate::measures_potentials::{AtomicMeasure, PointMap};
use crate::rational_map::RationalMap;
use crate::valued_field::arith::{fmt_q, q_to_f64, qi};
use crate::valued_field::{Backend, BackendKind, Poly, Q};

mod lattes;
mod shift;

pub use lattes::lattes_map;
pub use shift::{shift_model, shift_polynomial, ShiftBall, ShiftModel};

/// One branch: its domain maps affinely onto the whole segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub lo: Q,
    pub hi: Q,
    pub rising: bool,
    /// Slope, which is also the local degree along the branch.
    pub slope: u32,
}

impl Branch {
    fn contains(&self, t: &Q) -> bool {
        &self.lo <= t && t <= &self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonMap {
    lo: Q,
    hi: Q,
    branches: Vec<Branch>,
    degree: u32,
}

/// A cylinder of the symbolic coding: points whose first |word| iterates
/// visit the listed branches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub word: Vec<usize>,
    pub lo: Q,
    pub hi: Q,
    pub mass: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicCode {
    pub alphabet: usize,
    pub depth: usize,
    pub cylinders: Vec<Cylinder>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantSet {
    FullSegment,
    /// Branch count and Σ 1/d_j < 1, the total length scale of one level.
    Cantor { branches: usize, scale: Q },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entropies {
    pub h_top: f64,
    pub h_eq: f64,
    pub weights: Vec<Q>,
}

/// The affine map s ↦ a·s + b.
#[derive(Clone, Debug)]
struct Affine {
    a: Q,
    b: Q,
}

impl Affine {
    fn apply(&self, s: &Q) -> Q {
        &self.a * s + &self.b
    }

    fn then(&self, outer: &Affine) -> Affine {
        Affine { a: &outer.a * &self.a, b: &outer.a * &self.b + &outer.b }
    }
}

impl SkeletonMap {
    pub fn new(lo: Q, hi: Q, mut branches: Vec<Branch>, degree: u32) -> Result<Self> {
        if lo >= hi {
            return Err(BerkError::ParamDomain("empty segment".into()));
        }
        if branches.is_empty() {
            return Err(BerkError::ParamDomain("no branches".into()));
        }
        branches.sort_by(|a, b| a.lo.cmp(&b.lo));
        let len = &hi - &lo;
        for (i, br) in branches.iter().enumerate() {
            if br.lo < lo || br.hi > hi || br.lo >= br.hi || br.slope == 0 {
                return Err(BerkError::ParamDomain(format!("branch {i} is not a subsegment")));
            }
            if (&br.hi - &br.lo) * qi(br.slope as i64) != len {
                return Err(BerkError::ParamDomain(format!("branch {i} does not cover the segment")));
            }
            if i > 0 && branches[i - 1].hi > br.lo {
                return Err(BerkError::ParamDomain("branch domains overlap".into()));
            }
        }
        let sum: u32 = branches.iter().map(|b| b.slope).sum();
        if sum > degree {
            return Err(BerkError::ParamDomain(format!("slopes sum to {sum} > degree {degree}")));
        }
        Ok(SkeletonMap { lo, hi, branches, degree })
    }

    pub fn segment(&self) -> (&Q, &Q) {
        (&self.lo, &self.hi)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// At least two branches and Σ d_j = deg.
    pub fn is_bernoulli(&self) -> bool {
        self.branches.len() >= 2 && self.branches.iter().map(|b| b.slope).sum::<u32>() == self.degree
    }

    pub fn branch_of(&self, t: &Q) -> Option<usize> {
        self.branches.iter().position(|b| b.contains(t))
    }

    fn forward(&self, j: usize) -> Affine {
        let b = &self.branches[j];
        let d = qi(b.slope as i64);
        if b.rising {
            Affine { a: d.clone(), b: &self.lo - &d * &b.lo }
        } else {
            Affine { a: -d.clone(), b: &self.lo + &d * &b.hi }
        }
    }

    /// The inverse of branch j, from the segment onto its domain.
    fn inverse(&self, j: usize) -> Affine {
        let b = &self.branches[j];
        let d = qi(b.slope as i64);
        if b.rising {
            Affine { a: qi(1) / &d, b: &b.lo - &self.lo / &d }
        } else {
            Affine { a: -(qi(1) / &d), b: &b.hi + &self.lo / &d }
        }
    }

    /// T(t) on the branch domains.
    pub fn apply(&self, t: &Q) -> Result<Q> {
        let j = self
            .branch_of(t)
            .ok_or_else(|| BerkError::ParamDomain(format!("t = {} lies outside the branch domains", fmt_q(t))))?;
        Ok(self.forward(j).apply(t))
    }

    /// The depth-m cylinders, breadth first, words in lexicographic order.
    pub fn cylinders(&self, depth: usize) -> SymbolicCode {
        let deg = qi(self.degree as i64);
        let mut level = vec![Cylinder { word: vec![], lo: self.lo.clone(), hi: self.hi.clone(), mass: Q::one() }];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * self.branches.len());
            for j in 0..self.branches.len() {
                let g = self.inverse(j);
                let w = qi(self.branches[j].slope as i64) / &deg;
                for c in &level {
                    let (x, y) = (g.apply(&c.lo), g.apply(&c.hi));
                    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                    let mut word = vec![j];
                    word.extend_from_slice(&c.word);
                    next.push(Cylinder { word, lo, hi, mass: &c.mass * &w });
                }
            }
            next.sort_by(|a, b| a.word.cmp(&b.word));
            level = next;
        }
        SymbolicCode { alphabet: self.branches.len(), depth, cylinders: level }
    }

    /// The periodic point with itinerary `word` repeated.
    pub fn periodic_point(&self, word: &[usize]) -> Result<Q> {
        let mut g = Affine { a: Q::one(), b: Q::zero() };
        for &j in word.iter().rev() {
            g = g.then(&self.inverse(j));
        }
        if g.a.is_one() {
            return Err(BerkError::ParamDomain("itinerary is not contracting".into()));
        }
        Ok(&g.b / (Q::one() - &g.a))
    }

    /// Σ over words of length `depth` of Π d_j/D at the periodic point of the
    /// word. The shift permutes these points and preserves the weights, so
    /// the measure is exactly invariant.
    pub fn bernoulli_measure(&self, backend: &Backend, depth: usize) -> Result<AtomicMeasure> {
        if !self.is_bernoulli() {
            return Err(BerkError::NotBernoulli);
        }
        if depth == 0 {
            return Err(BerkError::ParamDomain("depth must be positive".into()));
        }
        let mut m = AtomicMeasure::zero();
        for c in self.cylinders(depth).cylinders {
            let t = self.periodic_point(&c.word)?;
            m.add_mass(BerkPoint::on_axis(backend, &t), c.mass);
        }
        Ok(m)
    }

    /// The axis parameter of an on-axis point.
    pub fn parameter(s: &BerkPoint) -> Result<Q> {
        match s {
            BerkPoint::TypeII { center, logr } if center.is_exact_zero() => Ok(-logr.clone()),
            _ => Err(BerkError::ParamDomain(format!("{} is not on the axis", s.to_display()))),
        }
    }
}

impl PointMap for SkeletonMap {
    fn image(&self, s: &BerkPoint) -> Result<BerkPoint> {
        let t = SkeletonMap::parameter(s)?;
        let b = s.backend().expect("type II points carry a backend");
        Ok(BerkPoint::on_axis(b, &self.apply(&t)?))
    }
}

/// FULL_SEGMENT when the branch domains tile the segment, i.e. Σ 1/d_j = 1.
pub fn invariant_set(m: &SkeletonMap) -> InvariantSet {
    let scale: Q = m.branches.iter().map(|b| Q::new(1.into(), (b.slope as i64).into())).sum();
    if scale.is_one() {
        InvariantSet::FullSegment
    } else {
        InvariantSet::Cantor { branches: m.branches.len(), scale }
    }
}

/// h_top = log k and the equilibrium entropy Σ (d_j/D) log(D/d_j).
pub fn entropies(m: &SkeletonMap) -> Result<Entropies> {
    if !m.is_bernoulli() {
        return Err(BerkError::NotBernoulli);
    }
    let deg = qi(m.degree as i64);
    let weights: Vec<Q> = m.branches.iter().map(|b| qi(b.slope as i64) / &deg).collect();
    let h_eq = weights.iter().map(|w| q_to_f64(w) * (1.0 / q_to_f64(w)).ln()).sum();
    Ok(Entropies { h_top: (m.branches.len() as f64).ln(), h_eq, weights })
}

/// The rational companions and the parameters of the catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Example {
    /// z^(d−2) / (1 + (a z)^d), val(a) = alog.
    R0 { d: u32, alog: Q },
    /// z² (1 + (a₃z)^8) / (1 + (a₂z)^6) with val(a₂) = (2/3) val(a₃).
    R1 { alog2: Q, alog3: Q },
    /// z^{d₁} Π_{j≥2} (1 + (a_j z)^{d_j + d_{j−1}})^{±1}, signs alternating
    /// from −1 at j = 2, with 0 < val(a₂) < … < val(a_k).
    General { degrees: Vec<u32>, alogs: Vec<Q> },
    /// Lattès map of multiplication by m on the Tate curve with val(q) = alog_q.
    Lattes { m: u32, alog_q: Q },
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub skeleton: SkeletonMap,
    pub companion: Option<RationalMap>,
}

impl Example {
    pub fn r0(d: u32, alog: Q) -> Self {
        Example::R0 { d, alog }
    }

    pub fn r1() -> Self {
        Example::R1 { alog2: qi(2), alog3: qi(3) }
    }

    pub fn lattes(m: u32) -> Self {
        Example::Lattes { m, alog_q: qi(2) }
    }
}

/// The skeleton of an example and, for a backend that supports it, its
/// companion rational map.
pub fn catalog(ex: &Example, backend: Option<&Backend>) -> Result<CatalogEntry> {
    match ex {
        Example::R0 { d, alog } => {
            if *d < 5 {
                return Err(BerkError::ParamDomain("R0 needs d ≥ 5".into()));
            }
            general(&[d - 2, 2], std::slice::from_ref(alog), backend)
        }
        Example::R1 { alog2, alog3 } => {
            if alog2 * qi(3) != alog3 * qi(2) {
                return Err(BerkError::ParamDomain("R1 needs |a₂| = |a₃|^(2/3)".into()));
            }
            general(&[2, 4, 4], &[alog2.clone(), alog3.clone()], backend)
        }
        Example::General { degrees, alogs } => general(degrees, alogs, backend),
        Example::Lattes { m, alog_q } => {
            if *m < 2 {
                return Err(BerkError::ParamDomain("Lattès maps need m ≥ 2".into()));
            }
            if !alog_q.is_positive() {
                return Err(BerkError::ParamDomain("Lattès maps need 0 < |q| < 1".into()));
            }
            let hi = alog_q / qi(2);
            let w = &hi / qi(*m as i64);
            let branches = (0..*m)
                .map(|i| Branch {
                    lo: &w * qi(i as i64),
                    hi: &w * qi(i as i64 + 1),
                    rising: i % 2 == 0,
                    slope: *m,
                })
                .collect();
            let skeleton = SkeletonMap::new(Q::zero(), hi, branches, m * m)?;
            let companion = match backend {
                Some(b) => Some(lattes_map(*m, alog_q, b)?),
                None => None,
            };
            Ok(CatalogEntry { skeleton, companion })
        }
    }
}

/// The family z^{d₁} Π (1 + (a_j z)^{δ_j})^{±1}: the line action T has slope
/// d₁ up to t₂ = val(a₂) and alternates ∓d_j after each t_j. The segment is
/// [0, L] with L the fixed point (last piece rising) or zero (falling) of
/// the last piece; every turning value must avoid (0, L).
fn general(degrees: &[u32], alogs: &[Q], backend: Option<&Backend>) -> Result<CatalogEntry> {
    let k = degrees.len();
    if k < 2 || alogs.len() != k - 1 {
        return Err(BerkError::ParamDomain("need k ≥ 2 degrees and k − 1 radii".into()));
    }
    if degrees.iter().any(|&d| d < 2) {
        return Err(BerkError::ParamDomain("degrees must exceed 1".into()));
    }
    if !alogs[0].is_positive() || alogs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BerkError::ParamDomain("radii must satisfy 0 < val(a₂) < … < val(a_k)".into()));
    }
    // pieces (start, value at start, signed slope)
    let mut pieces: Vec<(Q, Q, i64)> = vec![(Q::zero(), Q::zero(), degrees[0] as i64)];
    for j in 1..k {
        let (s, v, sl) = pieces.last().unwrap().clone();
        let t = alogs[j - 1].clone();
        let val = v + qi(sl) * (&t - &s);
        let sign = if j % 2 == 1 { -1 } else { 1 };
        pieces.push((t, val, sign * degrees[j] as i64));
    }
    let (s, v, sl) = pieces.last().unwrap().clone();
    // v + sl (L − s) = L when rising, = 0 when falling
    let big_l = if sl > 0 { (&v - qi(sl) * &s) / qi(1 - sl) } else { &s - &v / qi(sl) };
    if big_l <= s {
        return Err(BerkError::ParamDomain("the last piece does not reach the segment end".into()));
    }
    for (_, val, _) in &pieces[1..] {
        if val.is_positive() && *val < big_l {
            return Err(BerkError::ParamDomain("a turning value falls inside the segment".into()));
        }
    }
    let mut branches = Vec::new();
    for (i, (s, v, sl)) in pieces.iter().enumerate() {
        let d = qi(sl.abs());
        // T(t) = v + sl (t − s) hits 0 and L at these parameters
        let at = |y: &Q| s + (y - v) / qi(*sl);
        let (mut a, mut b) = (at(&Q::zero()), at(&big_l));
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let end = pieces.get(i + 1).map(|p| p.0.clone()).unwrap_or_else(|| big_l.clone());
        if a < *s || b > end {
            return Err(BerkError::ParamDomain(format!("piece {} is not a full branch", i + 1)));
        }
        debug_assert_eq!((&b - &a) * d, big_l.clone());
        branches.push(Branch { lo: a, hi: b, rising: *sl > 0, slope: sl.unsigned_abs() as u32 });
    }
    let deg: u32 = degrees.iter().sum();
    let skeleton = SkeletonMap::new(Q::zero(), big_l, branches, deg)?;
    let companion = match backend {
        Some(b) => Some(general_map(degrees, alogs, b)?),
        None => None,
    };
    Ok(CatalogEntry { skeleton, companion })
}

fn general_map(degrees: &[u32], alogs: &[Q], b: &Backend) -> Result<RationalMap> {
    let mut num = Poly::monomial(b.one(), degrees[0] as usize);
    let mut den = Poly::constant(b.one());
    for j in 1..degrees.len() {
        let delta = (degrees[j] + degrees[j - 1]) as usize;
        // (a z)^δ = a^δ z^δ
        let coeff = b.uniformizer_pow(&(&alogs[j - 1] * qi(delta as i64)));
        let factor = Poly::constant(b.one()).add(&Poly::monomial(coeff, delta));
        if j % 2 == 1 {
            den = den.mul(&factor);
        } else {
            num = num.mul(&factor);
        }
    }
    RationalMap::new(num, den)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossReport {
    /// Grid points inside the branch domains, all matched.
    pub checked: usize,
    /// Grid points in the gaps between branches.
    pub skipped: usize,
    /// Branch midpoints where deg_R = d_j was confirmed.
    pub degrees_checked: usize,
}

/// R(S(t)) = S(T(t)) on `samples` evenly spaced grid points, and local
/// degree d_j at each branch midpoint. The first disagreement is an error.
pub fn cross_validate(m: &SkeletonMap, r: &RationalMap, samples: usize) -> Result<CrossReport> {
    if samples < 2 {
        return Err(BerkError::ParamDomain("need at least two samples".into()));
    }
    let b = *r.backend();
    let mut report = CrossReport { checked: 0, skipped: 0, degrees_checked: 0 };
    let step = (&m.hi - &m.lo) / qi(samples as i64 - 1);
    for i in 0..samples {
        let t = &m.lo + &step * qi(i as i64);
        if m.branch_of(&t).is_none() {
            report.skipped += 1;
            continue;
        }
        let want = BerkPoint::on_axis(&b, &m.apply(&t)?);
        let got = r.image_point(&BerkPoint::on_axis(&b, &t))?;
        if got != want {
            return Err(BerkError::Mismatch(fmt_q(&t)));
        }
        report.checked += 1;
    }
    for br in &m.branches {
        let mid = (&br.lo + &br.hi) / qi(2);
        if r.local_degree(&BerkPoint::on_axis(&b, &mid))? != br.slope as usize {
            return Err(BerkError::Mismatch(format!("{} (local degree)", fmt_q(&mid))));
        }
        report.degrees_checked += 1;
    }
    Ok(report)
}

/// Σ_j (d_j/D)·log Jac at the branch midpoints, with the Jacobian of the
/// companion map; it agrees with h_eq when the Jacobian is D/d_j there.
pub fn rokhlin_entropy(m: &SkeletonMap, r: &RationalMap) -> Result<f64> {
    let b = *r.backend();
    let deg = qi(m.degree as i64);
    let mut h = 0.0;
    for br in &m.branches {
        let mid = (&br.lo + &br.hi) / qi(2);
        let jac = jacobian(r, &BerkPoint::on_axis(&b, &mid))?;
        h += q_to_f64(&(qi(br.slope as i64) / &deg)) * q_to_f64(&jac).ln();
    }
    Ok(h)
}

/// Whether the backend suits the Lattès construction (characteristic 0 or
/// at least 5, for the 1/12 in the Tate coefficients).
pub(crate) fn lattes_backend_ok(b: &Backend) -> bool {
    match b.kind {
        BackendKind::EquiChar0 => true,
        BackendKind::EquiCharP { p, .. } => p >= 5,
        BackendKind::Padic { .. } => false,
    }
}

#[cfg(test)]
mod tests;
