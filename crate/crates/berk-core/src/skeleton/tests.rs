use super::*;
use crate::measures_potentials::pushforward;
use crate::valued_field::arith::q;

fn br(lo: Q, hi: Q, rising: bool, slope: u32) -> Branch {
    Branch { lo, hi, rising, slope }
}

fn r0() -> CatalogEntry {
    catalog(&Example::r0(5, qi(1)), Some(&Backend::padic(3))).unwrap()
}

fn r1() -> CatalogEntry {
    catalog(&Example::r1(), Some(&Backend::padic(3))).unwrap()
}

#[test]
fn catalog_branches() {
    let s = r0().skeleton;
    assert_eq!(s.segment(), (&qi(0), &q(5, 2)));
    assert_eq!(s.branches(), &[br(qi(0), q(5, 6), true, 3), br(q(5, 4), q(5, 2), false, 2)]);
    assert_eq!(s.degree(), 5);
    let s = r1().skeleton;
    assert_eq!(s.segment(), (&qi(0), &qi(4)));
    assert_eq!(
        s.branches(),
        &[br(qi(0), qi(2), true, 2), br(qi(2), qi(3), false, 4), br(qi(3), qi(4), true, 4)]
    );
    assert_eq!(s.degree(), 10);
    let s = catalog(&Example::lattes(2), None).unwrap().skeleton;
    assert_eq!(s.segment(), (&qi(0), &qi(1)));
    assert_eq!(s.branches(), &[br(qi(0), q(1, 2), true, 2), br(q(1, 2), qi(1), false, 2)]);
    assert_eq!(s.degree(), 4);
}

#[test]
fn catalog_rejects_bad_parameters() {
    assert!(matches!(catalog(&Example::r0(4, qi(1)), None), Err(BerkError::ParamDomain(_))));
    let bad = Example::R1 { alog2: qi(1), alog3: qi(3) };
    assert!(matches!(catalog(&bad, None), Err(BerkError::ParamDomain(_))));
    // T(1) = 2, T(3/2) = 1, segment [0, 2]: the valley at 1 is inside
    let bad = Example::General { degrees: vec![2, 2, 2], alogs: vec![qi(1), q(3, 2)] };
    assert!(matches!(catalog(&bad, None), Err(BerkError::ParamDomain(_))));
    let tent = Example::General { degrees: vec![2, 2], alogs: vec![qi(1)] };
    let s = catalog(&tent, None).unwrap().skeleton;
    assert_eq!(s.segment(), (&qi(0), &qi(2)));
    assert_eq!(invariant_set(&s), InvariantSet::FullSegment);
}

#[test]
fn axis_action() {
    let s = r0().skeleton;
    assert_eq!(s.apply(&q(1, 2)).unwrap(), q(3, 2));
    assert_eq!(s.apply(&q(3, 2)).unwrap(), qi(2));
    assert!(s.apply(&qi(1)).is_err());
    let s = r1().skeleton;
    assert_eq!(s.apply(&qi(3)).unwrap(), qi(0));
    assert_eq!(s.apply(&q(5, 2)).unwrap(), qi(2));
}

#[test]
fn invariant_sets() {
    assert_eq!(invariant_set(&r1().skeleton), InvariantSet::FullSegment);
    assert_eq!(invariant_set(&r0().skeleton), InvariantSet::Cantor { branches: 2, scale: q(5, 6) });
    let one = SkeletonMap::new(qi(0), qi(1), vec![br(qi(0), q(1, 3), true, 3)], 3).unwrap();
    assert_eq!(invariant_set(&one), InvariantSet::Cantor { branches: 1, scale: q(1, 3) });
    assert_eq!(one.periodic_point(&[0]).unwrap(), qi(0));
    assert_eq!(entropies(&one), Err(BerkError::NotBernoulli));
}

#[test]
fn entropy_values() {
    let e = entropies(&r0().skeleton).unwrap();
    assert!((e.h_eq - 0.6730116670092565).abs() < 1e-12);
    assert!((e.h_top - 0.6931471805599453).abs() < 1e-12);
    assert_eq!(e.weights, vec![q(3, 5), q(2, 5)]);
    assert!(0.0 < e.h_eq && e.h_eq < e.h_top && e.h_top < 5f64.ln());
    let e = entropies(&r1().skeleton).unwrap();
    assert!((e.h_eq - 1.0549201679861442).abs() < 1e-12);
    assert!((e.h_top - 1.0986122886681098).abs() < 1e-12);
    for m in [2u32, 3] {
        let e = entropies(&catalog(&Example::lattes(m), None).unwrap().skeleton).unwrap();
        assert!((e.h_eq - e.h_top).abs() < 1e-12);
        assert!((e.h_top - (m as f64).ln()).abs() < 1e-12);
    }
}

#[test]
fn cylinders_multiply_masses() {
    let s = r0().skeleton;
    let code = s.cylinders(3);
    assert_eq!(code.cylinders.len(), 8);
    let total: Q = code.cylinders.iter().map(|c| c.mass.clone()).sum();
    assert_eq!(total, qi(1));
    let c = code.cylinders.iter().find(|c| c.word == vec![0, 1, 0]).unwrap();
    assert_eq!(c.mass, q(18, 125));
    // length shrinks by 3·2·3
    assert_eq!(&c.hi - &c.lo, q(5, 2) / qi(18));
    for c in &code.cylinders {
        let mut t = (&c.lo + &c.hi) / qi(2);
        for &j in &c.word {
            assert_eq!(s.branch_of(&t), Some(j));
            t = s.apply(&t).unwrap();
        }
    }
}

#[test]
fn periodic_points() {
    let s = r1().skeleton;
    assert_eq!(s.periodic_point(&[1]).unwrap(), q(12, 5));
    assert_eq!(s.periodic_point(&[2]).unwrap(), qi(4));
    let x = s.periodic_point(&[0, 1]).unwrap();
    assert_eq!(s.apply(&s.apply(&x).unwrap()).unwrap(), x);
}

#[test]
fn bernoulli_measure_is_invariant() {
    let b = Backend::padic(3);
    for s in [r0().skeleton, r1().skeleton] {
        let mu = s.bernoulli_measure(&b, 5).unwrap();
        assert_eq!(mu.total_mass(), qi(1));
        assert_eq!(pushforward(&s, &mu).unwrap(), mu);
    }
}

#[test]
fn r0_cross_validation() {
    let e = r0();
    let rep = cross_validate(&e.skeleton, e.companion.as_ref().unwrap(), 31).unwrap();
    assert_eq!(rep.checked + rep.skipped, 31);
    assert!(rep.skipped > 0);
    assert_eq!(rep.degrees_checked, 2);
    let r = e.companion.unwrap();
    let b = *r.backend();
    assert_eq!(r.image_point(&BerkPoint::on_axis(&b, &q(1, 2))).unwrap(), BerkPoint::on_axis(&b, &q(3, 2)));
    let h = rokhlin_entropy(&e.skeleton, &r).unwrap();
    assert!((h - 0.6730116670092565).abs() < 1e-12);
}

#[test]
fn wrong_skeleton_is_reported() {
    let e = r0();
    let fake = SkeletonMap::new(
        qi(0),
        q(5, 2),
        vec![br(qi(0), q(5, 6), true, 3), br(q(5, 4), q(5, 2), true, 2)],
        5,
    )
    .unwrap();
    assert!(matches!(cross_validate(&fake, e.companion.as_ref().unwrap(), 11), Err(BerkError::Mismatch(_))));
}

#[test]
fn lattes_companions() {
    for m in [2u32, 3] {
        let e = catalog(&Example::lattes(m), Some(&Backend::equichar0())).unwrap();
        let r = e.companion.as_ref().unwrap();
        assert_eq!(r.degree(), (m * m) as usize);
        let rep = cross_validate(&e.skeleton, r, 21).unwrap();
        assert_eq!(rep.checked, 21);
    }
    assert!(catalog(&Example::lattes(2), Some(&Backend::padic(3))).is_err());
}

#[test]
fn shift_radii_and_counts() {
    let m = shift_model(2, 3).unwrap();
    assert_eq!(m.radii, vec![qi(0), q(1, 2), q(3, 4), q(7, 8)]);
    for k in 0..=3 {
        assert_eq!(m.levels[k].len(), 1 << k);
    }
    let m3 = shift_model(3, 2).unwrap();
    assert_eq!(m3.radii[2], q(4, 9));
    assert_eq!(m3.levels[2].len(), 9);
    assert_eq!(m.check_images().unwrap(), 14);
}

#[test]
fn shift_against_solver() {
    let m = shift_model(2, 2).unwrap();
    assert_eq!(m.cross_check(2).unwrap(), 3);
}
