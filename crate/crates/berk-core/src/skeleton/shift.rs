//! The shift polynomial P(z) = p⁻¹(z^p − z^{p²}) over Q_p and the nested
//! components B'_{i₁…i_k} of P⁻ᵏ{|z| ≤ 1}.
//!
//! For 0 < val(x) < 1/(p−1) and val(w) ≥ 0, P(w + x) − P(w) = x^p/p plus
//! terms of larger valuation. So inside the branch B(i, 1/p) a point over
//! the target center c is reached digit by digit: with e = c − P(z) of
//! valuation v and leading digit γ, adding γ·p^{(1+v)/p} cancels that digit
//! (γ^p ≡ γ in F_p).

use num_traits::Zero;

use crate::berkovich::BerkPoint;
use crate::error::{BerkError, Result};
use crate::rational_map::RationalMap;
use crate::valued_field::arith::{fmt_q, pow_q, qi};
use crate::valued_field::{Backend, FieldElement, Poly, Q};

const DIGIT_STEPS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftBall {
    /// Letters in 1..=p, read as the branches visited by P⁰, P¹, …
    pub word: Vec<usize>,
    pub point: BerkPoint,
}

#[derive(Clone, Debug)]
pub struct ShiftModel {
    pub p: u64,
    pub map: RationalMap,
    /// radii[k] = (1 − p^(−k))/(p − 1), the logr of level k.
    pub radii: Vec<Q>,
    /// levels[k] holds the p^k balls of level k in lexicographic word order.
    pub levels: Vec<Vec<ShiftBall>>,
}

pub fn shift_polynomial(b: &Backend) -> Result<RationalMap> {
    let p = match b.kind {
        crate::valued_field::BackendKind::Padic { p } => p,
        _ => return Err(BerkError::ParamDomain("the shift polynomial lives over Q_p".into())),
    };
    let pp = p as usize;
    let mut cs = vec![Q::zero(); pp * pp + 1];
    let inv = Q::new(1.into(), (p as i64).into());
    cs[pp] = inv.clone();
    cs[pp * pp] = -inv;
    Ok(RationalMap::polynomial(Poly::from_qs(*b, &cs)?))
}

fn radius(p: u64, k: usize) -> Q {
    (qi(1) - pow_q(p, -(k as i64))) / qi(p as i64 - 1)
}

/// A point z of B(i, 1/p) with val(P(z) − c) ≥ r.
fn lift_into_branch(map: &RationalMap, i: u64, c: &FieldElement, r: &Q, b: &Backend) -> Result<FieldElement> {
    let p = match b.kind {
        crate::valued_field::BackendKind::Padic { p } => p,
        _ => unreachable!(),
    };
    let mut z = b.from_int(i as i64);
    for _ in 0..DIGIT_STEPS {
        let e = c.sub(&map.num().eval(&z));
        let v = match e.valuation() {
            None => return Ok(z),
            Some(v) if &v >= r => return Ok(z),
            Some(v) => v,
        };
        let gamma = e.mul(&b.uniformizer_pow(&-&v)).reduce()?;
        let step = b.lift(&gamma)?.mul(&b.uniformizer_pow(&((qi(1) + &v) / qi(p as i64))));
        z = z.add(&step);
    }
    Err(BerkError::PrecisionExhausted(format!("digit lifting toward logr {} did not settle", fmt_q(r))))
}

/// The ball tree of P down to `depth` over PADIC(p).
pub fn shift_model(p: u64, depth: usize) -> Result<ShiftModel> {
    if depth < 1 {
        return Err(BerkError::ParamDomain("depth must be at least 1".into()));
    }
    if !crate::valued_field::arith::is_prime(p) {
        return Err(BerkError::ParamDomain(format!("{p} is not prime")));
    }
    let b = Backend::padic(p);
    let map = shift_polynomial(&b)?;
    let radii: Vec<Q> = (0..=depth).map(|k| radius(p, k)).collect();
    let mut levels = vec![vec![ShiftBall { word: vec![], point: BerkPoint::can(&b) }]];
    for k in 1..=depth {
        let mut next = Vec::new();
        for i in 1..=p {
            for parent in &levels[k - 1] {
                let BerkPoint::TypeII { center, .. } = &parent.point else { unreachable!() };
                let z = lift_into_branch(&map, i - 1, center, &radii[k - 1], &b)?;
                let mut word = vec![i as usize];
                word.extend_from_slice(&parent.word);
                next.push(ShiftBall { word, point: BerkPoint::type2(&z, radii[k].clone())? });
            }
        }
        levels.push(next);
    }
    Ok(ShiftModel { p, map, radii, levels })
}

impl ShiftModel {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// The children of a level-(k−1) ball: the balls i·word.
    fn children(&self, k: usize, word: &[usize]) -> Vec<&ShiftBall> {
        self.levels[k].iter().filter(|c| &c.word[1..] == word).collect()
    }

    /// Compares levels 1..=max_depth with the general preimage solver: the
    /// fiber of every level-(k−1) ball must be its p children, each with
    /// local degree p. Returns the number of fibers compared.
    pub fn cross_check(&self, max_depth: usize) -> Result<usize> {
        let mut n = 0;
        let p = self.p as usize;
        for k in 1..=max_depth.min(self.depth()) {
            for parent in &self.levels[k - 1] {
                let fib = self.map.preimages(&parent.point)?;
                let mut want: Vec<(BerkPoint, usize)> =
                    self.children(k, &parent.word).into_iter().map(|c| (c.point.clone(), p)).collect();
                want.sort();
                if fib != want {
                    return Err(BerkError::Mismatch(format!(
                        "fiber over {} at level {}",
                        parent.point.to_display(),
                        k - 1
                    )));
                }
                n += 1;
            }
        }
        Ok(n)
    }

    /// Image check on the tree itself: P maps B'_{i·w} onto B'_w.
    pub fn check_images(&self) -> Result<usize> {
        let mut n = 0;
        for k in 1..=self.depth() {
            for ball in &self.levels[k] {
                let img = self.map.ball_image(&ball.point)?;
                let parent = self.levels[k - 1].iter().find(|c| c.word == ball.word[1..]).expect("parent exists");
                if img.point != parent.point || img.local_degree() != self.p as usize {
                    return Err(BerkError::Mismatch(format!("image of {}", ball.point.to_display())));
                }
                n += 1;
            }
        }
        Ok(n)
    }
}
