//! Dense univariate polynomials over a backend.

use std::fmt;

use num_traits::Zero;

use super::arith::{qi, Q};
use super::element::{Backend, FieldElement};
use super::residue::RPoly;
use crate::error::Result;

/// Coefficients constant term first; trailing exact zeros are stripped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    backend: Backend,
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn new(backend: Backend, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        Poly { backend, coeffs }
    }

    pub fn zero(backend: Backend) -> Self {
        Poly { backend, coeffs: vec![] }
    }

    pub fn constant(c: FieldElement) -> Self {
        Poly::new(*c.backend(), vec![c])
    }

    pub fn x(backend: Backend) -> Self {
        Poly::new(backend, vec![backend.zero(), backend.one()])
    }

    pub fn monomial(c: FieldElement, n: usize) -> Self {
        let b = *c.backend();
        let mut v = vec![b.zero(); n];
        v.push(c);
        Poly::new(b, v)
    }

    pub fn from_ints(backend: Backend, cs: &[i64]) -> Self {
        Poly::new(backend, cs.iter().map(|&c| backend.from_int(c)).collect())
    }

    pub fn from_qs(backend: Backend, cs: &[Q]) -> Result<Self> {
        Ok(Poly::new(backend, cs.iter().map(|c| backend.from_q(c)).collect::<Result<_>>()?))
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of x^i (zero past the end).
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.backend.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, ignoring top coefficients that are zero only to precision.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Drop top coefficients that vanish to working precision.
    pub fn trimmed(&self) -> Self {
        let n = self.degree().map_or(0, |d| d + 1);
        Poly { backend: self.backend, coeffs: self.coeffs[..n].to_vec() }
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.backend.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(self.backend, (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(self.backend, (0..n).map(|i| self.coeff(i).sub(&other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Poly::new(self.backend, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn scale(&self, s: &FieldElement) -> Self {
        Poly::new(self.backend, self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.backend);
        }
        let mut out = vec![self.backend.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(self.backend, out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::constant(self.backend.one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.backend,
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul(&self.backend.from_int(i as i64))).collect(),
        )
    }

    /// self(other(x)).
    pub fn compose(&self, other: &Self) -> Self {
        let mut acc = Poly::zero(self.backend);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(other).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// self(a + s·x).
    pub fn compose_affine(&self, a: &FieldElement, s: &FieldElement) -> Self {
        self.compose(&Poly::new(self.backend, vec![a.clone(), s.clone()]))
    }

    /// x^n · self(1/x).
    pub fn reversed(&self, n: usize) -> Self {
        assert!(self.coeffs.len() <= n + 1, "reversal degree too small");
        Poly::new(self.backend, (0..=n).map(|i| self.coeff(n - i)).collect())
    }

    /// min_i (val(c_i) + i·v), the valuation of the Gauss seminorm on the
    /// ball of logr v about 0; `None` for the zero polynomial.
    pub fn gauss_val(&self, v: &Q) -> Option<Q> {
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.val_floor().map(|w| w + qi(i as i64) * v))
            .min()
    }

    pub fn min_val(&self) -> Option<Q> {
        self.gauss_val(&Q::zero())
    }

    /// Vertices (i, val c_i) of the lower convex hull, over nonzero c_i.
    pub fn newton_polygon(&self) -> Vec<(usize, Q)> {
        let pts: Vec<(usize, Q)> =
            self.coeffs.iter().enumerate().filter_map(|(i, c)| c.valuation().map(|v| (i, v))).collect();
        lower_hull(&pts)
    }

    /// Scale to minimum valuation 0 and reduce.
    pub fn reduction(&self) -> Result<RPoly> {
        let rf = self.backend.residue_field();
        let Some(m) = self.min_val() else {
            return Ok(RPoly::new(rf, vec![]));
        };
        let s = self.backend.uniformizer_pow(&-m);
        let cs = self.coeffs.iter().map(|c| c.mul(&s).reduce()).collect::<Result<Vec<_>>>()?;
        Ok(RPoly::new(rf, cs))
    }

    /// Exponents carrying a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).collect()
    }
}

/// Lower convex hull of points sorted by abscissa.
pub fn lower_hull(pts: &[(usize, Q)]) -> Vec<(usize, Q)> {
    let mut hull: Vec<(usize, Q)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (i1, v1) = &hull[hull.len() - 2];
            let (i2, v2) = &hull[hull.len() - 1];
            // drop the middle point when it is on or above the chord
            let lhs = (v2 - v1) * qi((p.0 - i1) as i64);
            let rhs = (&p.1 - v1) * qi((i2 - i1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    hull
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_exact_zero())
            .map(|(i, c)| match i {
                0 => format!("({c})"),
                1 => format!("({c})*z"),
                _ => format!("({c})*z^{i}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::arith::q;
    use super::*;

    #[test]
    fn gauss_norm_of_small_examples() {
        let b = Backend::padic(2);
        let p = Poly::from_ints(b, &[0, 2, 1]);
        assert_eq!(p.gauss_val(&qi(0)), Some(qi(0)));
        let b3 = Backend::padic(3);
        assert_eq!(Poly::from_ints(b3, &[0, 0, 1]).gauss_val(&qi(1)), Some(qi(2)));
    }

    #[test]
    fn newton_polygon_vertices() {
        let b = Backend::padic(2);
        // 4 + 2z + z^2 + 8z^3: points (0,2),(1,1),(2,0),(3,3)
        let p = Poly::from_ints(b, &[4, 2, 1, 8]);
        assert_eq!(p.newton_polygon(), vec![(0, qi(2)), (2, qi(0)), (3, qi(3))]);
        let b3 = Backend::padic(3);
        let r = Poly::from_ints(b3, &[-3, 0, 1]);
        let h = r.newton_polygon();
        assert_eq!(h, vec![(0, qi(1)), (2, qi(0))]);
        assert_eq!((&h[1].1 - &h[0].1) / qi(2), q(-1, 2));
    }

    #[test]
    fn affine_recentering() {
        let b = Backend::padic(5);
        let p = Poly::from_ints(b, &[0, 0, 1]);
        let r = p.compose_affine(&b.one(), &b.one());
        assert_eq!(r, Poly::from_ints(b, &[1, 2, 1]));
    }
}
