//! `berk examples run-all`: the worked examples with frozen expected values.

use std::time::Instant;

use berk_core::berkovich::BerkPoint;
use berk_core::equilibrium::{
    entropy_lower_bound, equilibrium_approx, equilibrium_chain, periodic_solution_measure, theorem_e_detect,
};
use berk_core::measures_potentials::AtomicMeasure;
use berk_core::rational_map::RationalMap;
use berk_core::skeleton::{catalog, cross_validate, entropies, invariant_set, shift_model, Example, InvariantSet};
use berk_core::valued_field::arith::qi;
use berk_core::{Backend, Poly, Q};
use serde_json::{json, Value};

pub struct Row {
    pub name: &'static str,
    pub criterion: u32,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Row {
    pub fn to_json(&self) -> Value {
        json!({
            "example": self.name,
            "criterion": self.criterion,
            "status": if self.pass { "PASS" } else { "FAIL" },
            "detail": self.detail,
            "seconds": {"value": (self.seconds * 1000.0).round() / 1000.0, "tag": "approx(1e-3)"},
        })
    }
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(x: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((x - want).abs() <= tol, || format!("{what} = {x}, expected {want} ± {tol:e}"))
}

fn e<T>(r: berk_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("{}: {e}", e.code()))
}

fn r0() -> Check {
    let c = e(catalog(&Example::r0(5, qi(1)), Some(&Backend::padic(3))))?;
    ensure(matches!(invariant_set(&c.skeleton), InvariantSet::Cantor { .. }), || "expected a Cantor set".into())?;
    let h = e(entropies(&c.skeleton))?;
    close(h.h_eq, 0.6 * (5f64 / 3.0).ln() + 0.4 * 2.5f64.ln(), 1e-9, "h_eq")?;
    close(h.h_eq, 0.673012, 5e-7, "h_eq")?;
    close(h.h_top, 2f64.ln(), 1e-12, "h_top")?;
    ensure(h.h_eq < h.h_top && h.h_top < 5f64.ln(), || "entropy chain broken".into())?;
    Ok(format!("h_eq={:.6} h_top={:.6}", h.h_eq, h.h_top))
}

fn r1() -> Check {
    let c = e(catalog(&Example::r1(), Some(&Backend::padic(3))))?;
    ensure(invariant_set(&c.skeleton) == InvariantSet::FullSegment, || "not the full segment".into())?;
    let h = e(entropies(&c.skeleton))?;
    close(h.h_eq, 1.054920, 5e-7, "h_eq")?;
    close(h.h_top, 3f64.ln(), 1e-12, "h_top")?;
    let rep = e(cross_validate(&c.skeleton, c.companion.as_ref().unwrap(), 100))?;
    ensure(rep.checked == 100, || format!("{} of 100 checked", rep.checked))?;
    Ok(format!("h_eq={:.6} h_top={:.6} checked=100", h.h_eq, h.h_top))
}

fn lattes() -> Check {
    let mut out = Vec::new();
    for m in [2u32, 3] {
        let c = e(catalog(&Example::lattes(m), Some(&Backend::equichar0())))?;
        ensure(c.skeleton.segment() == (&qi(0), &qi(1)), || format!("m={m}: wrong segment"))?;
        close(e(entropies(&c.skeleton))?.h_top, (m as f64).ln(), 1e-12, "h_top")?;
        let rep = e(cross_validate(&c.skeleton, c.companion.as_ref().unwrap(), 100))?;
        ensure(rep.checked == 100, || format!("m={m}: {} of 100 checked", rep.checked))?;
        out.push(format!("m={m} checked=100"));
    }
    Ok(out.join(" "))
}

fn shift() -> Check {
    let m = e(shift_model(2, 4))?;
    for k in 0..=4usize {
        ensure(m.levels[k].len() == 1 << k, || format!("level {k}: {} balls", m.levels[k].len()))?;
        let want = qi(1) - Q::new(1.into(), (1i64 << k).into());
        ensure(m.levels[k].iter().all(|b| b.point.logr() == Some(&want)), || format!("level {k}: radius"))?;
    }
    let fibers = e(m.cross_check(3))?;
    ensure(fibers == 7, || format!("{fibers} fibers compared"))?;
    Ok(format!("counts 2^k, radii 1-2^-k, solver fibers={fibers}"))
}

fn char_p() -> Check {
    let f2 = Backend::equicharp(2, 1);
    let p0 = e(RationalMap::new(Poly::from_ints(f2, &[0, 1, 1]), Poly::from_ints(f2, &[1])))?;
    let id = RationalMap::identity(f2);
    for n in [2u32, 4] {
        let m = e(periodic_solution_measure(&p0, &id, n))?;
        let want = AtomicMeasure::from_atoms([(BerkPoint::TypeI(f2.zero()), qi(1i64 << n)), (BerkPoint::Infinity, qi(1))]);
        ensure(m == want, || format!("n={n}: {m:?}"))?;
    }
    Ok("[P0^2=id]=4[0]+[inf], [P0^4=id]=16[0]+[inf]".into())
}

fn detection() -> Check {
    let b = Backend::padic(3);
    let can = BerkPoint::can(&b);
    let mk = |n: &[i64], d: &[i64]| e(RationalMap::new(Poly::from_ints(b, n), Poly::from_ints(b, d)));
    let good = [mk(&[1, 0, 1], &[1])?, mk(&[2, 1, 0, 1], &[1])?, mk(&[0, 0, 1], &[1, 0, 0, 1])?, mk(&[1, 3, 1], &[1, 1])?];
    for (i, r) in good.iter().enumerate() {
        ensure(r.good_reduction_check(), || format!("map {i}: bad reduction"))?;
        let chain = e(equilibrium_chain(r, &can, 8))?;
        ensure(chain.iter().all(|m| *m == AtomicMeasure::dirac(can.clone())), || format!("map {i}: chain moves"))?;
        ensure(e(theorem_e_detect(r, 8))?.good, || format!("map {i}: not detected"))?;
    }
    let c = e(catalog(&Example::r0(5, qi(1)), Some(&b)))?;
    let r = c.companion.unwrap();
    ensure(!e(theorem_e_detect(&r, 8))?.good, || "R0 detected as good".into())?;
    let a = e(equilibrium_approx(&r, &can, 6))?;
    let h = e(entropy_lower_bound(&r, &a.measure))?;
    close(h, e(entropies(&c.skeleton))?.h_eq, 0.02, "R0 entropy bound")?;
    Ok(format!("4 good maps stationary; R0 not good, bound {h:.4}"))
}

pub fn run_all() -> Vec<Row> {
    let checks: [(&'static str, u32, fn() -> Check); 6] = [
        ("R0", 1, r0),
        ("R1", 2, r1),
        ("LATTES", 3, lattes),
        ("SHIFT", 4, shift),
        ("CHAR-P", 5, char_p),
        ("DETECTION", 9, detection),
    ];
    checks
        .into_iter()
        .map(|(name, criterion, f)| {
            let t = Instant::now();
            let r = f();
            let seconds = t.elapsed().as_secs_f64();
            let (pass, detail) = match r {
                Ok(s) => (true, s),
                Err(s) => (false, s),
            };
            Row { name, criterion, pass, detail, seconds }
        })
        .collect()
}

pub fn table(rows: &[Row]) -> String {
    let mut out = format!("{:<10} {:>4}  {:<6} {:>8}  {}\n", "example", "crit", "status", "secs", "detail");
    for r in rows {
        out += &format!(
            "{:<10} {:>4}  {:<6} {:>8.3}  {}\n",
            r.name,
            r.criterion,
            if r.pass { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
    }
    out
}
