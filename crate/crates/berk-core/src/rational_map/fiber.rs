//! Fibers of a rational map and the exceptional set.
//!
//! Type II fibers: every preimage S' of T = B(b, v) has, for each residue
//! direction at T, a direction mapping onto it; at most one of those is the
//! upward direction at S'. So for two targets b_k in distinct residue
//! classes of T, every S' lies on a path [z, ∞) with R(z) = b_k for one of
//! them. Along such a path t ↦ ζ(z, t), the function
//! g(t) = gauss_val(P − b_kQ at z, t) − gauss_val(Q at z, t) is piecewise
//! affine, and S' sits where g reaches v. Candidates are verified with the
//! image map.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::berkovich::BerkPoint;
use crate::error::{BerkError, Result};
use crate::valued_field::arith::qi;
use crate::valued_field::roots::{roots, roots_to, Roots};
use crate::valued_field::{FieldElement, Poly, Q};

use super::RationalMap;

/// Preimages with their local degrees, in canonical order.
pub type Fiber = Vec<(BerkPoint, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExceptionalSet {
    FrobeniusInfinite,
    Points(Vec<BerkPoint>),
}

/// Affine pieces of t ↦ gauss_val(f, t) as breakpoints (ascending).
fn breakpoints(f: &Poly) -> Vec<Q> {
    let hull = f.newton_polygon();
    hull.windows(2).map(|w| (&w[0].1 - &w[1].1) / qi((w[1].0 - w[0].0) as i64)).collect()
}

/// Index attaining gauss_val(f, t), for t not a breakpoint.
fn active(f: &Poly, t: &Q) -> (usize, Q) {
    f.coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.valuation().map(|w| (i, w)))
        .min_by(|x, y| (&x.1 + qi(x.0 as i64) * t).cmp(&(&y.1 + qi(y.0 as i64) * t)))
        .expect("nonzero polynomial")
}

/// Log-radii t at which g(t) = gauss(f, t) − gauss(q, t) can first reach or
/// leave the value v.
fn level_crossings(f: &Poly, q: &Poly, v: &Q) -> Vec<Q> {
    let mut bps: Vec<Q> = breakpoints(f).into_iter().chain(breakpoints(q)).collect();
    bps.sort();
    bps.dedup();
    let mut samples = Vec::new();
    match (bps.first(), bps.last()) {
        (Some(lo), Some(hi)) => {
            samples.push((None, Some(lo.clone()), lo - qi(1)));
            for w in bps.windows(2) {
                samples.push((Some(w[0].clone()), Some(w[1].clone()), (&w[0] + &w[1]) / qi(2)));
            }
            samples.push((Some(hi.clone()), None, hi + qi(1)));
        }
        _ => samples.push((None, None, Q::zero())),
    }
    let mut out = Vec::new();
    for (lo, hi, mid) in samples {
        let (i, a) = active(f, &mid);
        let (j, b) = active(q, &mid);
        let slope = qi(i as i64 - j as i64);
        let intercept = a - b;
        if slope.is_zero() {
            if &intercept == v {
                out.extend(lo.clone());
                out.extend(hi.clone());
            }
            continue;
        }
        let t = (v - &intercept) / slope;
        let inside = lo.as_ref().is_none_or(|l| &t >= l) && hi.as_ref().is_none_or(|h| &t <= h);
        if inside {
            out.push(t);
        }
    }
    out.sort();
    out.dedup();
    out
}

impl RationalMap {
    fn type1_fiber(&self, w: &BerkPoint) -> Result<(Roots, usize)> {
        let d = self.degree();
        let f = match w {
            BerkPoint::TypeI(w) => self.num().sub(&self.den().scale(w)),
            BerkPoint::Infinity => self.den().clone(),
            BerkPoint::TypeII { .. } => unreachable!(),
        };
        let f = f.trimmed();
        let deg = f.degree().ok_or_else(|| BerkError::PrecisionExhausted("map is constant".into()))?;
        Ok((roots(&f)?, d - deg))
    }

    /// R⁻¹(S) with local degrees; the multiplicities sum to deg R.
    pub fn preimages(&self, s: &BerkPoint) -> Result<Fiber> {
        let d = self.degree();
        if d == 0 {
            return Err(BerkError::ParamDomain("constant map".into()));
        }
        let mut fiber: Fiber = match s {
            BerkPoint::TypeII { .. } => self.type2_fiber(s)?,
            _ => {
                let (r, at_inf) = self.type1_fiber(s)?;
                if !r.is_resolved() {
                    return Err(BerkError::ExtensionBound(format!(
                        "{} roots of the fiber equation need a residue extension",
                        r.clusters.iter().map(|c| c.count).sum::<usize>()
                    )));
                }
                let mut out: Fiber = r.roots.into_iter().map(|(z, m)| (BerkPoint::TypeI(z), m)).collect();
                if at_inf > 0 {
                    out.push((BerkPoint::Infinity, at_inf));
                }
                out
            }
        };
        fiber.sort();
        Ok(fiber)
    }

    /// Root centers are first found to a modest absolute precision above the
    /// target radius; the full working precision is used only if the fiber
    /// does not close.
    fn type2_fiber(&self, s: &BerkPoint) -> Result<Fiber> {
        let BerkPoint::TypeII { logr: v, .. } = s else { unreachable!() };
        let base = if v.is_positive() { v.clone() } else { Q::zero() };
        for margin in [2i64, 8, 24] {
            match self.type2_fiber_to(s, Some(&(&base + qi(margin)))) {
                Ok(f) => return Ok(f),
                Err(BerkError::ExtensionBound(_)) | Err(BerkError::PrecisionExhausted(_)) => {}
                Err(e) => return Err(e),
            }
        }
        self.type2_fiber_to(s, None)
    }

    fn type2_fiber_to(&self, s: &BerkPoint, abs: Option<&Q>) -> Result<Fiber> {
        let BerkPoint::TypeII { center: b, logr: v } = s else { unreachable!() };
        let d = self.degree();
        let back = *self.backend();
        let rf = back.residue_field();
        let mut found: Fiber = Vec::new();
        let mut total = 0usize;
        let mut seen: BTreeSet<BerkPoint> = BTreeSet::new();
        let pi_v = back.uniformizer_pow(v);
        let residues: Vec<FieldElement> = match rf.order() {
            Some(n) => (0..n.min(6)).map(|i| back.lift(&rf.element(i))).collect::<Result<_>>()?,
            None => (0..4).map(|i| back.from_int(i)).collect(),
        };
        let mut targets_used = 0;
        for gamma in &residues {
            let target = b.add(&gamma.mul(&pi_v));
            let f = self.num().sub(&self.den().scale(&target));
            let rts = match abs {
                Some(a) => roots_to(&f.trimmed(), a)?,
                None => roots(&f.trimmed())?,
            };
            let mut starts: Vec<(FieldElement, Option<Q>)> =
                rts.roots.iter().map(|(z, _)| (z.clone(), None)).collect();
            starts.extend(rts.clusters.iter().map(|c| (c.center.clone(), Some(c.logr.clone()))));
            starts.push((back.zero(), None));
            for (z0, tmax) in starts {
                let fz = f.compose_affine(&z0, &back.one());
                let qz = self.den().compose_affine(&z0, &back.one());
                for t in level_crossings(&fz, &qz, v) {
                    if tmax.as_ref().is_some_and(|m| &t > m) {
                        continue;
                    }
                    if z0.abs_prec().is_some_and(|n| n < &t) {
                        continue;
                    }
                    let cand = BerkPoint::type2(&z0, t)?;
                    if seen.contains(&cand) {
                        continue;
                    }
                    seen.insert(cand.clone());
                    let img = self.ball_image(&cand)?;
                    if img.point == *s {
                        let m = img.local_degree();
                        total += m;
                        found.push((cand, m));
                    }
                }
            }
            targets_used += 1;
            if total == d && targets_used >= 2 {
                break;
            }
            if total > d {
                return Err(BerkError::ProbeFailure(format!(
                    "fiber multiplicities sum to {total} > deg {d}"
                )));
            }
        }
        if total != d {
            return Err(BerkError::ExtensionBound(format!(
                "resolved {total} of {d} preimages of {s}"
            )));
        }
        Ok(found)
    }

    /// Totally invariant type I points, or the Frobenius case.
    pub fn exceptional_set(&self) -> Result<ExceptionalSet> {
        let d = self.degree();
        if d < 2 {
            return Err(BerkError::ParamDomain("exceptional set needs degree at least 2".into()));
        }
        if self.topological_degree() == 1 {
            return Ok(ExceptionalSet::FrobeniusInfinite);
        }
        // points of full local degree
        let mut cands: Vec<BerkPoint> = vec![BerkPoint::Infinity];
        let (q, sep) = self.deflate();
        let w = sep.wronskian();
        let need = sep.degree().saturating_sub(1).max(1);
        let lift = |z: &FieldElement| -> Result<FieldElement> {
            if q == 1 {
                Ok(z.clone())
            } else {
                z.frobenius_root(q).ok_or_else(|| BerkError::ExtensionBound("Frobenius root".into()))
            }
        };
        if !w.trimmed().is_zero() && w.trimmed().degree() != Some(0) {
            let r = roots(&w)?;
            if !r.is_resolved() && r.clusters.iter().any(|c| c.count >= need) {
                return Err(BerkError::ExtensionBound("critical points need a residue extension".into()));
            }
            for (z, m) in r.roots {
                if m >= need {
                    cands.push(BerkPoint::TypeI(lift(&z)?));
                }
            }
        }
        if sep.den().degree().unwrap_or(0) > 0 {
            let r = roots(sep.den())?;
            for (z, m) in r.roots {
                if m == sep.degree() {
                    cands.push(BerkPoint::TypeI(lift(&z)?));
                }
            }
        }
        // images with a single preimage, and that preimage
        let mut single: Vec<(BerkPoint, BerkPoint)> = Vec::new();
        for x in cands {
            if self.local_degree(&x)? != d {
                continue;
            }
            let y = self.image_point(&x)?;
            let fib = self.preimages(&y)?;
            if fib.len() == 1 && fib[0].0 == x && !single.iter().any(|(yy, _)| *yy == y) {
                single.push((y, x));
            }
        }
        // largest subset closed under taking the (unique) preimage
        loop {
            let keep: Vec<(BerkPoint, BerkPoint)> = single
                .iter()
                .filter(|(_, x)| single.iter().any(|(y, _)| y == x))
                .cloned()
                .collect();
            if keep.len() == single.len() {
                break;
            }
            single = keep;
        }
        let mut pts: Vec<BerkPoint> = single.into_iter().map(|(y, _)| y).collect();
        pts.sort();
        Ok(ExceptionalSet::Points(pts))
    }
}
