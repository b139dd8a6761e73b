//! Lattès maps from the Tate curve y² + xy = x³ + a₄x + a₆ with
//! a₄ = −5 s₃(q), a₆ = −(5 s₃(q) + 7 s₅(q))/12, s_k = Σ σ_k(n) qⁿ.
//! The q-series are cut after a few terms: a perturbation that small does
//! not move the action on the Julia segment.
//!
//! x([m]P) = x − ψ_{m−1}ψ_{m+1}/ψ_m², with ψ_n = f_n (n odd) or ψ₂f_n
//! (n even) and ψ₂² = F = 4x³ + b₂x² + 2b₄x + b₆. The map is then
//! conjugated by w = 1/x, which puts the Julia segment on the axis above
//! the Gauss point.

use crate::error::{BerkError, Result};
use crate::rational_map::RationalMap;
use crate::valued_field::arith::qi;
use crate::valued_field::{Backend, FieldElement, Poly, Q};

use super::lattes_backend_ok;

const Q_TERMS: i64 = 4;

fn sigma(k: u32, n: i64) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d.pow(k)).sum()
}

/// Σ_{n ≤ Q_TERMS} σ_k(n) qⁿ with q = π^alog_q.
fn s_series(b: &Backend, k: u32, alog_q: &Q) -> FieldElement {
    (1..=Q_TERMS).fold(b.zero(), |acc, n| {
        acc.add(&b.from_int(sigma(k, n)).mul(&b.uniformizer_pow(&(alog_q * qi(n)))))
    })
}

fn xpoly(b: &Backend, cs: &[FieldElement]) -> Poly {
    Poly::new(*b, cs.to_vec())
}

pub fn lattes_map(m: u32, alog_q: &Q, b: &Backend) -> Result<RationalMap> {
    if !lattes_backend_ok(b) {
        return Err(BerkError::ParamDomain(
            "Lattès companions are built over a series backend of characteristic 0 or ≥ 5".into(),
        ));
    }
    if m < 2 {
        return Err(BerkError::ParamDomain("Lattès maps need m ≥ 2".into()));
    }
    let s3 = s_series(b, 3, alog_q);
    let s5 = s_series(b, 5, alog_q);
    let a4 = s3.mul(&b.from_int(-5));
    let a6 = s3.mul(&b.from_int(5)).add(&s5.mul(&b.from_int(7))).mul(&b.from_q(&Q::new((-1).into(), 12.into()))?);
    let b2 = b.one();
    let b4 = a4.mul(&b.from_int(2));
    let b6 = a6.mul(&b.from_int(4));
    let b8 = a6.sub(&a4.mul(&a4));
    let int = |n: i64| b.from_int(n);
    let f = xpoly(b, &[b6.clone(), b4.mul(&int(2)), b2.clone(), int(4)]);
    let f3 = xpoly(b, &[b8.clone(), b6.mul(&int(3)), b4.mul(&int(3)), b2.clone(), int(3)]);
    let f4 = xpoly(
        b,
        &[
            b4.mul(&b8).sub(&b6.mul(&b6)),
            b2.mul(&b8).sub(&b4.mul(&b6)),
            b8.mul(&int(10)),
            b6.mul(&int(10)),
            b4.mul(&int(5)),
            b2.clone(),
            int(2),
        ],
    );
    let f2 = f.pow(2);
    let m = m as usize;
    let mut fs: Vec<Poly> = vec![Poly::zero(*b), Poly::constant(b.one()), Poly::constant(b.one()), f3, f4];
    while fs.len() <= m + 1 {
        let n = fs.len();
        let k = n / 2;
        let next = if n % 2 == 1 {
            let (x, y) = (fs[k + 2].mul(&fs[k].pow(3)), fs[k - 1].mul(&fs[k + 1].pow(3)));
            if k % 2 == 0 {
                f2.mul(&x).sub(&y)
            } else {
                x.sub(&f2.mul(&y))
            }
        } else {
            let inner = fs[k + 2].mul(&fs[k - 1].pow(2)).sub(&fs[k - 2].mul(&fs[k + 1].pow(2)));
            fs[k].mul(&inner)
        };
        fs.push(next);
    }
    let x = Poly::x(*b);
    let fm2 = fs[m].pow(2);
    let side = fs[m - 1].mul(&fs[m + 1]);
    let (num, den) = if m % 2 == 0 {
        let den = f.mul(&fm2);
        (x.mul(&den).sub(&side), den)
    } else {
        (x.mul(&fm2).sub(&f.mul(&side)), fm2)
    };
    let d = m * m;
    let (num, den) = (num.trimmed(), den.trimmed());
    if num.degree() != Some(d) || den.degree() != Some(d - 1) {
        return Err(BerkError::ParamDomain("division polynomials lost degree".into()));
    }
    // w ↦ 1/x([m](1/w))
    RationalMap::new(den.reversed(d), num.reversed(d))
}
