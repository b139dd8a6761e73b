//! Images of type II points.
//!
//! For the ball B(a, v) write f(x) = R(a + π^v x) = N(x)/D(x). Given a
//! guess c for a point of the image, let σ = minval(N − cD) − minval(D).
//! If the normalized reductions of N − cD and D are not proportional, the
//! image is the ball B(c, σ) and their quotient is the reduced map;
//! otherwise f − c is π^σ times a unit γ on the whole ball and c moves to
//! c + γπ^σ. Poles inside the ball need no special treatment.

use crate::berkovich::BerkPoint;
use crate::error::{BerkError, Result};
use crate::valued_field::{FieldElement, Poly, RPoly, Q};

use super::RationalMap;

/// The image of a type II point together with the reduced map there.
#[derive(Clone, Debug)]
pub struct BallImage {
    pub point: BerkPoint,
    pub reduced_num: RPoly,
    pub reduced_den: RPoly,
}

impl BallImage {
    /// Degree of the reduced map after cancelling common factors.
    pub fn local_degree(&self) -> usize {
        let g = self.reduced_num.gcd(&self.reduced_den);
        let n = self.reduced_num.divrem(&g).0;
        let d = self.reduced_den.divrem(&g).0;
        n.degree().unwrap_or(0).max(d.degree().unwrap_or(0))
    }
}

const DESCENT_STEPS: usize = 4096;

impl RationalMap {
    /// Numerator and denominator of x ↦ R(a + π^v x).
    pub(crate) fn rescaled(&self, a: &FieldElement, v: &Q) -> (Poly, Poly) {
        let s = self.backend().uniformizer_pow(v);
        (self.num().compose_affine(a, &s), self.den().compose_affine(a, &s))
    }

    pub fn ball_image(&self, s: &BerkPoint) -> Result<BallImage> {
        let BerkPoint::TypeII { center: a, logr: v } = s else {
            return Err(BerkError::TypeIOperand);
        };
        let b = *self.backend();
        let (pa, qa) = self.rescaled(a, v);
        let mq = qa.min_val().ok_or(BerkError::DivisionByZero)?;
        let dq = qa.scale(&b.uniformizer_pow(&-&mq)).reduction_raw()?;
        let q0 = qa.coeff(0);
        let mut c = if q0.is_zero() { b.zero() } else { pa.coeff(0).div(&q0).unwrap_or_else(|_| b.zero()) };
        for _ in 0..DESCENT_STEPS {
            let n = pa.sub(&qa.scale(&c));
            let mn = n
                .min_val()
                .ok_or_else(|| BerkError::PrecisionExhausted("map is constant on the ball".into()))?;
            let nt = n.scale(&b.uniformizer_pow(&-&mn)).reduction_raw()?;
            let sigma = &mn - &mq;
            if nt.is_zero() {
                return Err(BerkError::PrecisionExhausted("image ball below working precision".into()));
            }
            match nt.proportional(&dq) {
                None => {
                    let point = BerkPoint::type2(&c, sigma)?;
                    return Ok(BallImage { point, reduced_num: nt, reduced_den: dq });
                }
                Some(gamma) => {
                    c = c.add(&b.lift(&gamma)?.mul(&b.uniformizer_pow(&sigma)));
                }
            }
        }
        Err(BerkError::PrecisionExhausted("image descent did not terminate".into()))
    }

    /// Image of a ball with no pole inside, from R(a) and the Taylor
    /// numerator P_a·q0 − p0·Q_a: logr = gauss_val − 2·val(q0). `None` when
    /// the ball contains a pole.
    pub fn ball_image_without_poles(&self, s: &BerkPoint) -> Result<Option<BerkPoint>> {
        let BerkPoint::TypeII { center: a, logr: v } = s else {
            return Err(BerkError::TypeIOperand);
        };
        let (pa, qa) = self.rescaled(a, v);
        // a pole in the closed unit ball shows up as a minimal coefficient past index 0
        let mq = qa.min_val().ok_or(BerkError::DivisionByZero)?;
        let q0 = qa.coeff(0);
        if q0.valuation() != Some(mq.clone()) {
            return Ok(None);
        }
        let weierstrass = qa
            .coeffs()
            .iter()
            .rposition(|c| c.valuation().as_ref() == Some(&mq))
            .unwrap_or(0);
        if weierstrass > 0 {
            return Ok(None);
        }
        let p0 = pa.coeff(0);
        let n = pa.scale(&q0).sub(&qa.scale(&p0));
        let g = n.min_val().ok_or_else(|| BerkError::PrecisionExhausted("constant map".into()))?;
        let vq0 = q0.valuation().unwrap();
        let sigma = g - &vq0 - &vq0;
        let c = p0.div(&q0)?;
        Ok(Some(BerkPoint::type2(&c, sigma)?))
    }
}
