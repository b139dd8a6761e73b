mod common;

use berk_core::berkovich::BerkPoint;
use berk_core::equilibrium::{equilibrium_chain, invariance_defect, equilibrium_approx};
use berk_core::measures_potentials::pushforward;
use berk_core::rational_map::RationalMap;
use berk_core::skeleton::{catalog, shift_polynomial, Example};
use berk_core::valued_field::arith::{q, qi};
use berk_core::{Backend, BerkError};
use common::{config, padic_map, type2};
use num_traits::Zero;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn image_and_fiber_agree(r in padic_map(), s in type2(Backend::padic(3))) {
        let t = r.image_point(&s).unwrap();
        let k = r.local_degree(&s).unwrap();
        prop_assert!(k >= 1 && k <= r.degree());
        match r.preimages(&t) {
            Ok(f) => {
                prop_assert_eq!(f.iter().map(|x| x.1).sum::<usize>(), r.degree());
                prop_assert!(f.len() <= r.topological_degree());
                prop_assert!(f.contains(&(s.clone(), k)));
                for (u, m) in &f {
                    prop_assert_eq!(&r.image_point(u).unwrap(), &t);
                    prop_assert_eq!(r.local_degree(u).unwrap(), *m);
                }
            }
            Err(BerkError::ExtensionBound(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn composition_is_functorial(f in padic_map(), g in padic_map(), s in type2(Backend::padic(3))) {
        let fg = f.compose(&g);
        let gs = g.image_point(&s).unwrap();
        prop_assume!(gs.is_type2());
        prop_assert_eq!(fg.image_point(&s).unwrap(), f.image_point(&gs).unwrap());
        prop_assert_eq!(fg.local_degree(&s).unwrap(), f.local_degree(&gs).unwrap() * g.local_degree(&s).unwrap());
    }

    #[test]
    fn ball_image_matches_pole_free_oracle(r in padic_map(), s in type2(Backend::padic(3))) {
        if let Some(img) = r.ball_image_without_poles(&s).unwrap() {
            prop_assert_eq!(r.ball_image(&s).unwrap().point, img);
        }
    }
}

proptest! {
    #![proptest_config(config(200))]

    /// v(P(z+w) − P(w)) = p·v(z) − 1 for 0 < v(z) < 1/(p−1), v(w) ≥ 0.
    #[test]
    fn shift_polynomial_scaling(p in prop::sample::select(vec![2u64, 3]), num in 1i64..=11, u in 1i64..=40, w in -60i64..=60, wd in prop::sample::select(vec![1i64, 5, 7])) {
        let b = Backend::padic(p);
        let vz = q(num, 12) / qi(p as i64 - 1);
        prop_assume!(u % p as i64 != 0 && vz > qi(0) && vz < q(1, p as i64 - 1));
        let z = b.from_int(u).mul(&b.uniformizer_pow(&vz));
        let w = b.from_q(&q(w, wd)).unwrap();
        let poly = shift_polynomial(&b).unwrap().num().clone();
        let diff = poly.eval(&z.add(&w)).sub(&poly.eval(&w));
        prop_assert_eq!(diff.valuation(), Some(vz * qi(p as i64) - qi(1)));
    }
}

fn catalog_maps() -> Vec<(&'static str, RationalMap)> {
    let p3 = Backend::padic(3);
    vec![
        ("R0", catalog(&Example::r0(5, qi(1)), Some(&p3)).unwrap().companion.unwrap()),
        ("R1", catalog(&Example::r1(), Some(&p3)).unwrap().companion.unwrap()),
        ("LATTES2", catalog(&Example::lattes(2), Some(&Backend::equichar0())).unwrap().companion.unwrap()),
        ("SHIFT2", shift_polynomial(&Backend::padic(2)).unwrap()),
    ]
}

#[test]
fn pullback_chain_is_pushforward_compatible() {
    for (name, r) in catalog_maps() {
        let can = BerkPoint::can(r.backend());
        let chain = equilibrium_chain(&r, &can, 4).unwrap();
        for n in 0..4 {
            assert_eq!(chain[n + 1].total_mass(), qi(1), "{name}");
            assert_eq!(pushforward(&r, &chain[n + 1]).unwrap(), chain[n], "{name} level {n}");
        }
        let a = equilibrium_approx(&r, &can, 3).unwrap();
        assert!(invariance_defect(&a).unwrap().is_zero(), "{name}");
    }
}

#[test]
fn pullback_atoms_carry_local_degrees() {
    // each atom of ρ_{n+1} sits over an atom of ρ_n with mass deg_R(S)/deg(R) of it
    for (name, r) in catalog_maps() {
        let can = BerkPoint::can(r.backend());
        let chain = equilibrium_chain(&r, &can, 3).unwrap();
        let d = qi(r.degree() as i64);
        for (s, w) in chain[3].atoms() {
            let t = r.image_point(s).unwrap();
            let k = qi(r.local_degree(s).unwrap() as i64);
            assert_eq!(w.clone(), chain[2].mass_at(&t) * k / &d, "{name} at {}", s.to_display());
        }
    }
}
