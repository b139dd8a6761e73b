//! Roots of polynomials over a backend by Newton polygons: each polygon
//! segment fixes a root valuation, its residue polynomial fixes the first
//! digit, simple digits are lifted by Newton iteration and repeated ones by
//! recentering and recursing.

use num_traits::Zero;

use super::arith::{qi, Q};
use super::element::FieldElement;
use super::poly::Poly;
use super::residue::{roots_in_field, RPoly};
use crate::error::{BerkError, Result};

/// `count` roots z with valuation(z − center) = logr whose leading digits
/// lie outside the residue field (or could not be determined).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootCluster {
    pub center: FieldElement,
    pub logr: Q,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Roots {
    pub roots: Vec<(FieldElement, usize)>,
    pub clusters: Vec<RootCluster>,
}

impl Roots {
    /// Number of roots accounted for, resolved or not.
    pub fn total(&self) -> usize {
        self.roots.iter().map(|r| r.1).sum::<usize>() + self.clusters.iter().map(|c| c.count).sum::<usize>()
    }

    pub fn is_resolved(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Root valuations with larger denominators come from wild ramification,
/// where recentering converges without ever separating the roots.
const MAX_DENOM: i64 = 64;

/// All roots of a nonzero polynomial, with multiplicities.
pub fn roots(f: &Poly) -> Result<Roots> {
    roots_impl(f, None)
}

/// Roots known only up to absolute precision `abs` (or better).
pub fn roots_to(f: &Poly, abs: &Q) -> Result<Roots> {
    roots_impl(f, Some(abs))
}

fn roots_impl(f: &Poly, abs: Option<&Q>) -> Result<Roots> {
    let f = f.trimmed();
    let b = *f.backend();
    let Some(d) = f.degree() else {
        return Err(BerkError::ParamDomain("the zero polynomial vanishes everywhere".into()));
    };
    let mut out = Roots::default();
    if d == 0 {
        return Ok(out);
    }
    let hull = f.newton_polygon();
    let top = hull
        .windows(2)
        .map(|w| (&w[0].1 - &w[1].1) / qi((w[1].0 - w[0].0) as i64))
        .max()
        .unwrap_or_else(Q::zero);
    let mut limit = top + qi(b.precision as i64);
    if let Some(a) = abs {
        if *a < limit {
            limit = a.clone();
        }
    }
    solve(&f, &b.zero(), None, &limit, &mut out)?;
    out.roots.sort();
    let mut merged: Vec<(FieldElement, usize)> = Vec::new();
    for (z, m) in out.roots {
        match merged.last_mut() {
            Some((w, n)) if *w == z => *n += m,
            _ => merged.push((z, m)),
        }
    }
    out.roots = merged;
    Ok(out)
}

fn solve(f: &Poly, c: &FieldElement, floor: Option<&Q>, limit: &Q, out: &mut Roots) -> Result<()> {
    let b = *f.backend();
    let f = f.trimmed();
    if f.degree().is_none() {
        return Err(BerkError::PrecisionExhausted("polynomial vanishes to working precision".into()));
    }
    let m0 = f.coeffs().iter().position(|x| !x.is_zero()).unwrap();
    if m0 > 0 {
        let lead = f.coeff(m0).valuation().unwrap();
        let mut bound: Option<Q> = None;
        for i in 0..m0 {
            if let Some(n) = f.coeff(i).abs_prec() {
                let s = (n - &lead) / qi((m0 - i) as i64);
                bound = Some(match bound {
                    Some(x) if x <= s => x,
                    _ => s,
                });
            }
        }
        let root = match bound {
            None => c.clone(),
            Some(s) => c.with_abs_prec(&s),
        };
        out.roots.push((root, m0));
    }
    let hull = f.newton_polygon();
    let rf = b.residue_field();
    for w in hull.windows(2) {
        let (ia, va) = (&w[0].0, &w[0].1);
        let (ib, vb) = (&w[1].0, &w[1].1);
        let len = ib - ia;
        let s = (va - vb) / qi(len as i64);
        if floor.is_some_and(|fl| s <= *fl) {
            continue;
        }
        if s > *limit {
            out.roots.push((c.with_abs_prec(&s), len));
            continue;
        }
        if s.denom() > &num_bigint::BigInt::from(MAX_DENOM) {
            out.clusters.push(RootCluster { center: c.clone(), logr: s, count: len });
            continue;
        }
        let m = va + qi(*ia as i64) * &s;
        let mut cs = Vec::with_capacity(len + 1);
        let mut determined = true;
        for i in *ia..=*ib {
            let t = f.coeff(i).mul(&b.uniformizer_pow(&(qi(i as i64) * &s - &m)));
            match t.reduce() {
                Ok(r) => cs.push(r),
                Err(BerkError::PrecisionExhausted(_)) => {
                    determined = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !determined {
            out.clusters.push(RootCluster { center: c.clone(), logr: s, count: len });
            continue;
        }
        let psi = RPoly::new(rf, cs);
        let digits = match roots_in_field(&psi) {
            Ok(r) => r,
            Err(BerkError::ExtensionBound(_)) => vec![],
            Err(e) => return Err(e),
        };
        let mut resolved = 0;
        for (gamma, nu) in digits {
            resolved += nu;
            let x0 = b.lift(&gamma)?.mul(&b.uniformizer_pow(&s));
            if nu == 1 {
                let x = newton(&f, &x0, &s, limit)?;
                out.roots.push((polish_root(&f, c, &x), 1));
            } else {
                let g = f.compose_affine(&x0, &b.one());
                solve(&g, &c.add(&x0), Some(&s), limit, out)?;
            }
        }
        if resolved < len {
            out.clusters.push(RootCluster { center: c.clone(), logr: s, count: len - resolved });
        }
    }
    Ok(())
}

/// Newton iteration from a simple residue root at valuation s.
fn newton(f: &Poly, x0: &FieldElement, s: &Q, limit: &Q) -> Result<FieldElement> {
    if f.eval(x0).is_exact_zero() {
        return Ok(x0.clone());
    }
    let b = f.backend();
    let mut target = s + qi(b.precision as i64);
    if *limit > *s && *limit < target {
        target = limit.clone();
    }
    let df = f.derivative();
    let mut x = x0.with_abs_prec(&target);
    for _ in 0..256 {
        let fx = f.eval(&x);
        if fx.is_zero() {
            return Ok(x);
        }
        let delta = fx.div(&df.eval(&x))?;
        if delta.is_zero() {
            return Ok(x);
        }
        x = x.sub(&delta);
    }
    Err(BerkError::PrecisionExhausted("Newton lifting did not converge".into()))
}

/// Replace an approximate root by an exact one when a short candidate
/// (the truncated expansion, or a small rational) is a genuine root.
fn polish_root(f: &Poly, c: &FieldElement, x: &FieldElement) -> FieldElement {
    let z = c.add(x);
    if z.is_exact() {
        return z;
    }
    let mut candidates = Vec::new();
    if let Some(n) = x.abs_prec() {
        if let Ok(t) = x.truncate_below(n) {
            candidates.push(t);
        }
    }
    if let Some(g) = x.rational_guess() {
        candidates.push(g);
    }
    for cand in candidates {
        if f.eval(&cand).is_exact_zero() {
            return c.add(&cand);
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::super::arith::q;
    use super::super::element::Backend;
    use super::*;

    #[test]
    fn square_roots_of_four() {
        let b = Backend::padic(3);
        let r = roots(&Poly::from_ints(b, &[-4, 0, 1])).unwrap();
        assert_eq!(r.roots, vec![(b.from_int(-2), 1), (b.from_int(2), 1)]);
    }

    #[test]
    fn ramified_roots_are_exact() {
        let b = Backend::padic(3);
        let r = roots(&Poly::from_ints(b, &[-3, 0, 1])).unwrap();
        assert!(r.is_resolved());
        assert_eq!(r.roots.len(), 2);
        for (z, m) in &r.roots {
            assert_eq!(*m, 1);
            assert!(z.is_exact());
            assert_eq!(z.valuation(), Some(q(1, 2)));
        }
    }

    #[test]
    fn repeated_roots_recurse() {
        let b = Backend::padic(3);
        // (z-1)^2 (z+1)
        let r = roots(&Poly::from_ints(b, &[1, -1, -1, 1])).unwrap();
        assert_eq!(r.roots, vec![(b.from_int(-1), 1), (b.from_int(1), 2)]);
    }

    #[test]
    fn irrational_roots_over_rationals_form_a_cluster() {
        let e = Backend::equichar0();
        let r = roots(&Poly::from_ints(e, &[-2, 0, 1])).unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].count, 2);
        assert_eq!(r.total(), 2);
    }

    #[test]
    fn newton_lifts_non_rational_roots() {
        // z^2 - 2 over Q_7 has a root ≡ 3 mod 7
        let b = Backend::padic(7).with_precision(30);
        let f = Poly::from_ints(b, &[-2, 0, 1]);
        let r = roots(&f).unwrap();
        assert_eq!(r.roots.len(), 2);
        for (z, _) in &r.roots {
            assert!(!z.is_exact());
            assert!(f.eval(z).is_zero());
        }
    }
}
