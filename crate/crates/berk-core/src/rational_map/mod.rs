//! Rational maps R = P/Q acting on the Berkovich line.
//!
//! P and Q are assumed coprime; nothing here cancels common factors.

mod fiber;
mod image;

use crate::berkovich::BerkPoint;
use crate::error::{BerkError, Result};
use crate::valued_field::{Backend, BackendKind, FieldElement, Poly};

pub use fiber::{ExceptionalSet, Fiber};
pub use image::BallImage;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
}

impl RationalMap {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if !num.backend().same_field(den.backend()) {
            return Err(BerkError::IncompatibleBackends);
        }
        if den.is_zero() {
            return Err(BerkError::DivisionByZero);
        }
        Ok(RationalMap { num, den })
    }

    pub fn polynomial(p: Poly) -> Self {
        let one = Poly::constant(p.backend().one());
        RationalMap { num: p, den: one }
    }

    pub fn identity(backend: Backend) -> Self {
        RationalMap::polynomial(Poly::x(backend))
    }

    pub fn backend(&self) -> &Backend {
        self.num.backend()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    /// self ∘ inner, through the homogeneous form of self.
    pub fn compose(&self, inner: &RationalMap) -> RationalMap {
        let d = self.degree();
        let b = *self.backend();
        let mut apow = vec![Poly::constant(b.one())];
        let mut bpow = vec![Poly::constant(b.one())];
        for i in 1..=d {
            apow.push(apow[i - 1].mul(&inner.num));
            bpow.push(bpow[i - 1].mul(&inner.den));
        }
        let mut num = Poly::zero(b);
        let mut den = Poly::zero(b);
        for i in 0..=d {
            let m = apow[i].mul(&bpow[d - i]);
            let (pi, qi) = (self.num.coeff(i), self.den.coeff(i));
            if !pi.is_exact_zero() {
                num = num.add(&m.scale(&pi));
            }
            if !qi.is_exact_zero() {
                den = den.add(&m.scale(&qi));
            }
        }
        RationalMap { num, den }
    }

    pub fn iterate(&self, n: u32) -> RationalMap {
        let mut r = RationalMap::identity(*self.backend());
        for _ in 0..n {
            r = self.compose(&r);
        }
        r
    }

    /// Numerator and denominator of R(1/x), reversed at degree deg R.
    fn chart_at_infinity(&self) -> (Poly, Poly) {
        let d = self.degree();
        (self.num.reversed(d), self.den.reversed(d))
    }

    /// Evaluation at a type I point, poles going to ∞.
    pub fn eval_type1(&self, z: &BerkPoint) -> Result<BerkPoint> {
        let (a, b) = match z {
            BerkPoint::TypeI(z) => (self.num.eval(z), self.den.eval(z)),
            BerkPoint::Infinity => {
                let (a, b) = self.chart_at_infinity();
                (a.coeff(0), b.coeff(0))
            }
            BerkPoint::TypeII { .. } => return Err(BerkError::TypeIOperand),
        };
        if b.is_zero() {
            if a.is_zero() {
                return Err(BerkError::PrecisionExhausted("numerator and denominator both vanish".into()));
            }
            return Ok(BerkPoint::Infinity);
        }
        Ok(BerkPoint::TypeI(a.div(&b)?))
    }

    /// Coefficients b_0..b_order of R(a + h).
    pub fn taylor_at(&self, a: &FieldElement, order: usize) -> Result<Vec<FieldElement>> {
        let b = *self.backend();
        let pa = self.num.compose_affine(a, &b.one());
        let qa = self.den.compose_affine(a, &b.one());
        let q0 = qa.coeff(0);
        if q0.is_zero() {
            return Err(BerkError::PoleAtCenter);
        }
        let mut out: Vec<FieldElement> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = pa.coeff(k);
            for j in 1..=k {
                acc = acc.sub(&qa.coeff(j).mul(&out[k - j]));
            }
            out.push(acc.div(&q0)?);
        }
        Ok(out)
    }

    /// Largest q (a power of the characteristic) with R(z) = S(z^q), and S.
    pub fn deflate(&self) -> (u64, RationalMap) {
        let p = self.backend().characteristic();
        if p == 0 {
            return (1, self.clone());
        }
        let exps: Vec<usize> = self.num.support().into_iter().chain(self.den.support()).collect();
        let mut q = 1u64;
        while exps.iter().all(|&e| e as u64 % (q * p) == 0) && exps.iter().any(|&e| e > 0) {
            q *= p;
        }
        let squeeze = |f: &Poly| {
            let n = f.degree().map_or(0, |d| d / q as usize);
            Poly::new(*f.backend(), (0..=n).map(|i| f.coeff(i * q as usize)).collect())
        };
        (q, RationalMap { num: squeeze(&self.num), den: squeeze(&self.den) })
    }

    /// deg(S) where R(z) = S(z^q) with S separable.
    pub fn topological_degree(&self) -> usize {
        let (q, _) = self.deflate();
        self.degree() / q as usize
    }

    /// Whether the reduction in this coordinate keeps full degree.
    pub fn good_reduction_check(&self) -> bool {
        let b = *self.backend();
        let m = match (self.num.min_val(), self.den.min_val()) {
            (Some(x), Some(y)) => if x < y { x } else { y },
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => return false,
        };
        let s = b.uniformizer_pow(&-m);
        let (Ok(pt), Ok(qt)) = (self.num.scale(&s).reduction_raw(), self.den.scale(&s).reduction_raw()) else {
            return false;
        };
        if pt.is_zero() || qt.is_zero() {
            return false;
        }
        let g = pt.gcd(&qt);
        if g.degree() != Some(0) {
            return false;
        }
        pt.degree().unwrap().max(qt.degree().unwrap()) == self.degree()
    }

    /// Order of vanishing at h = 0, counting coefficients zero to precision.
    fn order_at_zero(f: &Poly) -> Result<usize> {
        f.coeffs()
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| BerkError::PrecisionExhausted("map is locally constant to working precision".into()))
    }

    /// Local degree at a type I point.
    fn local_degree_type1(&self, z: &BerkPoint) -> Result<usize> {
        let b = *self.backend();
        let (a, d) = match z {
            BerkPoint::TypeI(z) => (self.num.compose_affine(z, &b.one()), self.den.compose_affine(z, &b.one())),
            BerkPoint::Infinity => self.chart_at_infinity(),
            BerkPoint::TypeII { .. } => unreachable!(),
        };
        let (a0, d0) = (a.coeff(0), d.coeff(0));
        if d0.is_zero() {
            return RationalMap::order_at_zero(&d);
        }
        let n = a.scale(&d0).sub(&d.scale(&a0));
        RationalMap::order_at_zero(&n)
    }

    /// Image of any point of the Berkovich line.
    pub fn image_point(&self, s: &BerkPoint) -> Result<BerkPoint> {
        match s {
            BerkPoint::TypeII { .. } => Ok(self.ball_image(s)?.point),
            _ => self.eval_type1(s),
        }
    }

    /// deg_R(S).
    pub fn local_degree(&self, s: &BerkPoint) -> Result<usize> {
        match s {
            BerkPoint::TypeII { .. } => Ok(self.ball_image(s)?.local_degree()),
            _ => self.local_degree_type1(s),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn is_char_p(&self) -> bool {
        matches!(self.backend().kind, BackendKind::EquiCharP { .. })
    }

    /// Resultant of the homogeneous forms of P and Q in degree deg R, by
    /// elimination on the Sylvester matrix.
    pub fn resultant(&self) -> Result<FieldElement> {
        let d = self.degree();
        let b = *self.backend();
        let n = 2 * d;
        if n == 0 {
            return Ok(b.one());
        }
        let mut m: Vec<Vec<FieldElement>> = vec![vec![b.zero(); n]; n];
        for r in 0..d {
            for i in 0..=d {
                m[r][r + i] = self.num.coeff(d - i);
                m[r + d][r + i] = self.den.coeff(d - i);
            }
        }
        let mut det = b.one();
        for col in 0..n {
            let piv = (col..n)
                .filter(|&r| !m[r][col].is_zero())
                .min_by(|&x, &y| m[x][col].valuation().cmp(&m[y][col].valuation()));
            let Some(piv) = piv else {
                return Ok(b.zero());
            };
            if piv != col {
                m.swap(piv, col);
                det = det.neg();
            }
            let inv = m[col][col].inv()?;
            det = det.mul(&m[col][col]);
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let f = m[r][col].mul(&inv);
                for c in col..n {
                    let t = f.mul(&m[col][c]);
                    m[r][c] = m[r][c].sub(&t);
                }
            }
        }
        Ok(det)
    }

    /// Smallest coefficient valuation of P and Q together.
    pub fn coefficient_valuation(&self) -> Option<crate::valued_field::Q> {
        match (self.num.min_val(), self.den.min_val()) {
            (Some(x), Some(y)) => Some(if x < y { x } else { y }),
            (x, None) | (None, x) => x,
        }
    }

    /// Exact zero test on the coefficients of P·Q' − P'·Q.
    pub(crate) fn wronskian(&self) -> Poly {
        self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()))
    }
}

impl Poly {
    /// Reduction after scaling by the caller; coefficients must be integral.
    pub(crate) fn reduction_raw(&self) -> Result<crate::valued_field::RPoly> {
        let rf = self.backend().residue_field();
        let cs = self.coeffs().iter().map(|c| c.reduce()).collect::<Result<Vec<_>>>()?;
        Ok(crate::valued_field::RPoly::new(rf, cs))
    }
}

impl std::fmt::Display for RationalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}
