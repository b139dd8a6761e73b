mod common;

use berk_core::berkovich::{gromov_product, hyperbolic_distance, join, median, order_leq, BerkPoint};
use berk_core::measures_potentials::{energy_pairing, potential_on_hull, AtomicMeasure};
use berk_core::valued_field::arith::{max_q, min_q, q};
use berk_core::Backend;
use common::{config, type2};
use num_traits::Signed;
use proptest::prelude::*;

fn logr(s: &BerkPoint) -> berk_core::Q {
    s.logr().unwrap().clone()
}

fn atoms(b: Backend) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((type2(b), -6i64..=6, 1i64..=4), 1..=5).prop_map(|xs| {
        AtomicMeasure::from_atoms(xs.into_iter().map(|(s, n, d)| (s, q(n, d))))
    })
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn join_is_the_least_upper_bound(a in type2(Backend::padic(3)), b in type2(Backend::padic(3)), c in type2(Backend::padic(3))) {
        let j = join(&a, &b);
        prop_assert_eq!(&j, &join(&b, &a));
        prop_assert!(order_leq(&a, &j) && order_leq(&b, &j));
        prop_assert_eq!(join(&a, &a), a.clone());
        prop_assert_eq!(join(&j, &c), join(&a, &join(&b, &c)));
        // anything above both is above the join
        let k = join(&j, &c);
        prop_assert!(order_leq(&j, &k));
        prop_assert!(logr(&j) <= min_q(&logr(&a), &logr(&b)));
    }

    #[test]
    fn distance_adds_along_the_join(a in type2(Backend::padic(2)), b in type2(Backend::padic(2))) {
        let j = join(&a, &b);
        let d = hyperbolic_distance(&a, &b).unwrap();
        prop_assert_eq!(&d, &(hyperbolic_distance(&a, &j).unwrap() + hyperbolic_distance(&j, &b).unwrap()));
        prop_assert_eq!(&d, &(logr(&a) + logr(&b) - logr(&j) * q(2, 1)));
        prop_assert_eq!(d.is_positive(), a != b);
    }

    #[test]
    fn triangle_and_median(a in type2(Backend::padic(3)), b in type2(Backend::padic(3)), c in type2(Backend::padic(3))) {
        let ab = hyperbolic_distance(&a, &b).unwrap();
        let bc = hyperbolic_distance(&b, &c).unwrap();
        let ac = hyperbolic_distance(&a, &c).unwrap();
        prop_assert!(ac <= &ab + &bc);
        let m = median(&a, &b, &c);
        prop_assert_eq!(&m, &median(&c, &a, &b));
        prop_assert_eq!(hyperbolic_distance(&a, &m).unwrap() + hyperbolic_distance(&m, &b).unwrap(), ab.clone());
        let g = gromov_product(&a, &b, &c).unwrap().unwrap();
        prop_assert_eq!(g.clone(), hyperbolic_distance(&c, &m).unwrap());
        prop_assert_eq!(&g * q(2, 1), &ac + &bc - &ab);
        prop_assert!(g <= max_q(&ac, &bc));
    }

    #[test]
    fn potential_laplacian_duality(rho in atoms(Backend::padic(3)), base in type2(Backend::padic(3))) {
        let g = potential_on_hull(&rho, &base).unwrap();
        let want = rho.sub(&AtomicMeasure::dirac(base.clone()).scale(&rho.total_mass()));
        prop_assert_eq!(g.laplacian(), want);
    }

    #[test]
    fn energy_is_positive_and_base_free(rho in atoms(Backend::padic(2)), b1 in type2(Backend::padic(2)), b2 in type2(Backend::padic(2))) {
        // make the mass zero with an atom at b1
        let mu = rho.sub(&AtomicMeasure::dirac(b1.clone()).scale(&rho.total_mass()));
        let e1 = energy_pairing(&mu, &mu, &b1).unwrap();
        prop_assert!(!e1.is_negative());
        prop_assert_eq!(e1.clone(), energy_pairing(&mu, &mu, &b2).unwrap());
        // the potential of mu on its hull has Dirichlet norm equal to the energy
        let g = potential_on_hull(&mu, &b1).unwrap();
        prop_assert_eq!(g.dirichlet_norm(), e1);
    }
}
