//! Points of the Berkovich projective line of type I and II, the tree order,
//! joins, and the metrics.
//!
//! A type II point is the closed ball {z : val(z − c) ≥ logr}; its center is
//! always stored truncated below logr, so equal balls compare equal.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;

use crate::error::{BerkError, Result};
use crate::valued_field::arith::{q_to_f64, qi};
use crate::valued_field::{Backend, FieldElement, Poly, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BerkPoint {
    TypeI(FieldElement),
    Infinity,
    TypeII { center: FieldElement, logr: Q },
}

/// Valuation of a − b, `None` when they agree to working precision.
pub fn dist_val(a: &FieldElement, b: &FieldElement) -> Option<Q> {
    a.sub(b).valuation()
}

fn min_inf(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if x <= y { x } else { y }),
    }
}

impl BerkPoint {
    pub fn type1(z: FieldElement) -> Self {
        BerkPoint::TypeI(z)
    }

    /// The ball of logr `logr` about `center`, with canonical center.
    pub fn type2(center: &FieldElement, logr: Q) -> Result<Self> {
        let center = center.truncate_below(&logr)?;
        Ok(BerkPoint::TypeII { center, logr })
    }

    /// The Gauss point of the closed unit ball.
    pub fn can(backend: &Backend) -> Self {
        BerkPoint::TypeII { center: backend.zero(), logr: Q::zero() }
    }

    /// S(t) = TYPE_II(0, −t): t is the log of the radius.
    pub fn on_axis(backend: &Backend, t: &Q) -> Self {
        BerkPoint::TypeII { center: backend.zero(), logr: -t }
    }

    pub fn is_type2(&self) -> bool {
        matches!(self, BerkPoint::TypeII { .. })
    }

    pub fn center(&self) -> Option<&FieldElement> {
        match self {
            BerkPoint::TypeI(z) => Some(z),
            BerkPoint::TypeII { center, .. } => Some(center),
            BerkPoint::Infinity => None,
        }
    }

    /// Log-radius; `None` for type I points (radius 0).
    pub fn logr(&self) -> Option<&Q> {
        match self {
            BerkPoint::TypeII { logr, .. } => Some(logr),
            _ => None,
        }
    }

    /// Center and log-radius (`None` = +∞); `None` for ∞.
    fn ball(&self) -> Option<(&FieldElement, Option<&Q>)> {
        match self {
            BerkPoint::TypeI(z) => Some((z, None)),
            BerkPoint::TypeII { center, logr } => Some((center, Some(logr))),
            BerkPoint::Infinity => None,
        }
    }

    pub fn backend(&self) -> Option<&Backend> {
        self.center().map(|c| c.backend())
    }

    pub fn to_display(&self) -> String {
        match self {
            BerkPoint::TypeI(z) => format!("TYPE_I({z})"),
            BerkPoint::Infinity => "INFINITY".to_string(),
            BerkPoint::TypeII { center, logr } => {
                format!("TYPE_II({center}, {})", crate::valued_field::arith::fmt_q(logr))
            }
        }
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_display())
    }
}

/// Valuation of the seminorm S(P): Gauss valuation of P recentered at the
/// ball's center, or val P(z) at a type I point. `None` means S(P) = 0.
pub fn seminorm_eval(s: &BerkPoint, p: &Poly) -> Result<Option<Q>> {
    match s {
        BerkPoint::TypeI(z) => Ok(p.eval(z).valuation()),
        BerkPoint::TypeII { center, logr } => {
            let b = *center.backend();
            Ok(p.compose_affine(center, &b.one()).gauss_val(logr))
        }
        BerkPoint::Infinity => match p.degree() {
            None => Ok(None),
            Some(0) => Ok(p.coeff(0).valuation()),
            Some(_) => Err(BerkError::InfinityOperand),
        },
    }
}

/// S ≤ S' in the tree order (ball containment, ∞ on top).
pub fn order_leq(s: &BerkPoint, t: &BerkPoint) -> bool {
    let Some((c2, v2)) = t.ball() else {
        return true;
    };
    let Some((c1, v1)) = s.ball() else {
        return false;
    };
    match (v1, v2) {
        (_, None) => v1.is_none() && dist_val(c1, c2).is_none(),
        (None, Some(w)) => dist_val(c1, c2).is_none_or(|d| d >= *w),
        (Some(v), Some(w)) => v >= w && dist_val(c1, c2).is_none_or(|d| d >= *w),
    }
}

/// Least upper bound S ∨ S'.
pub fn join(s: &BerkPoint, t: &BerkPoint) -> BerkPoint {
    let (Some((c1, v1)), Some((c2, v2))) = (s.ball(), t.ball()) else {
        return BerkPoint::Infinity;
    };
    let r = min_inf(min_inf(v1.cloned(), v2.cloned()), dist_val(c1, c2));
    match r {
        None => s.clone(),
        Some(r) => BerkPoint::type2(c1, r).expect("centers are known below the join radius"),
    }
}

/// Valuation of diam(S ∨ S'); `None` when S = S' is type I.
pub fn sup_pair(s: &BerkPoint, t: &BerkPoint) -> Result<Option<Q>> {
    if matches!(s, BerkPoint::Infinity) || matches!(t, BerkPoint::Infinity) {
        return Err(BerkError::InfinityOperand);
    }
    Ok(join(s, t).logr().cloned())
}

/// Valuation of |S| = sup of |z| over the ball.
fn abs_val(s: &BerkPoint) -> Option<Q> {
    match s {
        BerkPoint::TypeI(z) => z.valuation(),
        BerkPoint::TypeII { center, logr } => min_inf(center.valuation(), Some(logr.clone())),
        BerkPoint::Infinity => unreachable!(),
    }
}

/// The spherical metric d_P, with norms base^(−valuation).
pub fn sphere_distance(s: &BerkPoint, t: &BerkPoint) -> f64 {
    let base = s.backend().or(t.backend()).map_or(std::f64::consts::E, |b| b.norm_base());
    let norm = |v: &Option<Q>| match v {
        None => 0.0,
        Some(v) => base.powf(-q_to_f64(v)),
    };
    let max1 = |v: &Option<Q>| norm(v).max(1.0);
    match (s, t) {
        (BerkPoint::Infinity, BerkPoint::Infinity) => 0.0,
        (BerkPoint::Infinity, x) | (x, BerkPoint::Infinity) => 2.0 / max1(&abs_val(x)),
        _ => {
            let sup = norm(&join(s, t).logr().cloned());
            let (a, b) = (abs_val(s), abs_val(t));
            let da = norm(&s.logr().cloned());
            let db = norm(&t.logr().cloned());
            let d = 2.0 * sup / (max1(&a) * max1(&b)) - da / max1(&a).powi(2) - db / max1(&b).powi(2);
            d.max(0.0)
        }
    }
}

/// The hyperbolic metric d_H in valuation units, exact.
pub fn hyperbolic_distance(s: &BerkPoint, t: &BerkPoint) -> Result<Q> {
    let (Some(v), Some(w)) = (s.logr(), t.logr()) else {
        return Err(BerkError::TypeIOperand);
    };
    let j = join(s, t);
    let r = j.logr().expect("join of type II points is type II");
    Ok(v + w - qi(2) * r)
}

/// The unique point on all three pairwise segments.
pub fn median(a: &BerkPoint, b: &BerkPoint, c: &BerkPoint) -> BerkPoint {
    let joins = [join(a, b), join(b, c), join(a, c)];
    for j in &joins {
        if joins.iter().all(|k| order_leq(j, k)) {
            return j.clone();
        }
    }
    unreachable!("pairwise joins in a tree are totally ordered")
}

/// ⟨S, S'⟩ based at S0; `None` for +∞.
pub fn gromov_product(s: &BerkPoint, t: &BerkPoint, base: &BerkPoint) -> Result<Option<Q>> {
    if !base.is_type2() {
        return Err(BerkError::TypeIOperand);
    }
    let m = median(s, t, base);
    if !m.is_type2() {
        return Ok(None);
    }
    hyperbolic_distance(&m, base).map(Some)
}

/// The point of [a, b] at d_H-fraction u from a.
pub fn segment_point(a: &BerkPoint, b: &BerkPoint, u: &Q) -> Result<BerkPoint> {
    let len = hyperbolic_distance(a, b)?;
    let j = join(a, b);
    let s = u * &len;
    let (va, vj) = (a.logr().unwrap(), j.logr().unwrap());
    let up = va - vj;
    if s <= up {
        BerkPoint::type2(a.center().unwrap(), va - &s)
    } else {
        let vb = b.logr().unwrap();
        BerkPoint::type2(b.center().unwrap(), vb - &(len - s))
    }
}

/// A total order for canonical output: by log-radius, then structure.
pub fn canonical_cmp(a: &BerkPoint, b: &BerkPoint) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued_field::arith::q;

    fn t2(b: &Backend, c: i64, v: i64) -> BerkPoint {
        BerkPoint::type2(&b.from_int(c), qi(v)).unwrap()
    }

    #[test]
    fn order_and_join_examples() {
        let b2 = Backend::padic(2);
        assert!(order_leq(&t2(&b2, 2, 2), &t2(&b2, 0, 1)));
        assert!(order_leq(&t2(&b2, 2, 2), &BerkPoint::Infinity));
        let j = join(&BerkPoint::TypeI(b2.zero()), &BerkPoint::TypeI(b2.from_int(4)));
        assert_eq!(j, t2(&b2, 0, 2));
        let b3 = Backend::padic(3);
        assert_eq!(join(&t2(&b3, 0, 1), &t2(&b3, 1, 1)), BerkPoint::can(&b3));
        // representatives of the same ball
        assert_eq!(t2(&b3, 5, 1), t2(&b3, 2, 1));
    }

    #[test]
    fn seminorm_examples() {
        let b2 = Backend::padic(2);
        let p = Poly::from_ints(b2, &[0, 2, 1]);
        assert_eq!(seminorm_eval(&BerkPoint::can(&b2), &p).unwrap(), Some(qi(0)));
        let b3 = Backend::padic(3);
        let sq = Poly::from_ints(b3, &[0, 0, 1]);
        assert_eq!(seminorm_eval(&t2(&b3, 0, 1), &sq).unwrap(), Some(qi(2)));
        let lin = Poly::from_ints(b3, &[-1, 1]);
        assert_eq!(seminorm_eval(&BerkPoint::TypeI(b3.one()), &lin).unwrap(), None);
    }

    #[test]
    fn metric_examples() {
        let b3 = Backend::padic(3);
        let can = BerkPoint::can(&b3);
        assert_eq!(hyperbolic_distance(&t2(&b3, 0, 1), &can).unwrap(), qi(1));
        assert_eq!(hyperbolic_distance(&t2(&b3, 0, 1), &t2(&b3, 1, 1)).unwrap(), qi(2));
        assert!((sphere_distance(&BerkPoint::TypeI(b3.zero()), &can) - 1.0).abs() < 1e-12);
        assert!((sphere_distance(&can, &BerkPoint::Infinity) - 2.0).abs() < 1e-12);
        assert_eq!(sphere_distance(&can, &can), 0.0);
        let z = BerkPoint::TypeI(b3.from_int(3));
        let w = BerkPoint::TypeI(b3.from_int(1));
        assert!((sphere_distance(&z, &w) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gromov_and_median_examples() {
        let b2 = Backend::padic(2);
        let can = BerkPoint::can(&b2);
        assert_eq!(gromov_product(&t2(&b2, 0, 2), &t2(&b2, 0, 3), &can).unwrap(), Some(qi(2)));
        assert_eq!(gromov_product(&t2(&b2, 0, 2), &can, &can).unwrap(), Some(qi(0)));
        let z = BerkPoint::TypeI(b2.one());
        assert_eq!(gromov_product(&z, &z, &can).unwrap(), None);
        let b3 = Backend::padic(3);
        let m = median(&BerkPoint::TypeI(b3.zero()), &BerkPoint::TypeI(b3.one()), &BerkPoint::Infinity);
        assert_eq!(m, BerkPoint::can(&b3));
    }

    #[test]
    fn sup_pair_examples() {
        let b = Backend::padic(5);
        assert_eq!(sup_pair(&t2(&b, 0, 1), &t2(&b, 5, 2)).unwrap(), Some(qi(1)));
        let s = BerkPoint::type2(&b.zero(), q(3, 2)).unwrap();
        assert_eq!(sup_pair(&s, &s).unwrap(), Some(q(3, 2)));
    }
}
