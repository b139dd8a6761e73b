use super::*;
use crate::berkovich::hyperbolic_distance;
use crate::valued_field::arith::q;
use crate::valued_field::Poly;

fn t2(b: &Backend, c: i64, v: Q) -> BerkPoint {
    BerkPoint::type2(&b.from_int(c), v).unwrap()
}

fn map(b: Backend, p: &[i64], d: &[i64]) -> RationalMap {
    RationalMap::new(Poly::from_ints(b, p), Poly::from_ints(b, d)).unwrap()
}

fn r0() -> RationalMap {
    let b = Backend::padic(3);
    map(b, &[0, 0, 0, 1], &[1, 0, 0, 0, 0, 243])
}

#[test]
fn pushforward_examples() {
    let b = Backend::padic(3);
    let can = BerkPoint::can(&b);
    let good = map(b, &[1, 0, 1], &[1]);
    assert_eq!(pushforward(&good, &AtomicMeasure::dirac(can.clone())).unwrap(), AtomicMeasure::dirac(can.clone()));
    let sq = map(b, &[0, 0, 1], &[1]);
    let rho = AtomicMeasure::from_atoms([
        (BerkPoint::TypeI(b.from_int(2)), q(1, 2)),
        (BerkPoint::TypeI(b.from_int(-2)), q(1, 2)),
    ]);
    assert_eq!(pushforward(&sq, &rho).unwrap(), AtomicMeasure::dirac(BerkPoint::TypeI(b.from_int(4))));
    let rho = AtomicMeasure::dirac(t2(&b, 0, q(1, 2)));
    assert_eq!(pushforward(&r0(), &rho).unwrap(), AtomicMeasure::dirac(t2(&b, 0, q(3, 2))));
}

#[test]
fn pullback_examples() {
    let b = Backend::padic(3);
    let can = BerkPoint::can(&b);
    let good = map(b, &[1, 0, 1], &[1]);
    let pb = pullback(&good, &AtomicMeasure::dirac(can.clone())).unwrap();
    assert_eq!(pb, AtomicMeasure::from_atoms([(can.clone(), qi(2))]));
    let sq = map(b, &[0, 0, 1], &[1]);
    let pb = pullback(&sq, &AtomicMeasure::dirac(BerkPoint::TypeI(b.from_int(4)))).unwrap();
    assert_eq!(
        pb,
        AtomicMeasure::from_atoms([
            (BerkPoint::TypeI(b.from_int(2)), qi(1)),
            (BerkPoint::TypeI(b.from_int(-2)), qi(1)),
        ])
    );
    let rho = AtomicMeasure::from_atoms([(can.clone(), q(1, 3)), (t2(&b, 0, qi(2)), q(2, 3)), (t2(&b, 0, q(-1, 2)), qi(1))]);
    let pb = pullback(&r0(), &rho).unwrap();
    assert_eq!(pb.total_mass(), qi(10));
    assert_eq!(pushforward(&r0(), &pb).unwrap(), rho.scale(&qi(5)));
}

#[test]
fn hull_examples() {
    let b = Backend::padic(3);
    let can = BerkPoint::can(&b);
    assert_eq!(convex_hull_tree(&[can.clone()], &qi(10)).unwrap().vertices().len(), 1);
    let t = convex_hull_tree(&[t2(&b, 0, qi(1)), t2(&b, 1, qi(1))], &qi(10)).unwrap();
    assert_eq!(t.vertices().len(), 3);
    assert!(t.index_of(&can).is_some());
    assert_eq!(t.total_length(), qi(2));
    let path = convex_hull_tree(&[t2(&b, 0, qi(1)), t2(&b, 0, qi(2)), t2(&b, 0, qi(3))], &qi(10)).unwrap();
    assert_eq!(path.vertices().len(), 3);
    assert_eq!(path.edges().len(), 2);
}

#[test]
fn retraction_onto_a_path() {
    let b = Backend::padic(3);
    let tree = convex_hull_tree(&[t2(&b, 0, qi(0)), t2(&b, 0, qi(4))], &qi(10)).unwrap();
    let f = TreeFunction::from_fn(tree, |s| Ok(s.logr().unwrap().clone())).unwrap();
    assert_eq!(f.eval(&t2(&b, 0, q(5, 2))), q(5, 2));
    // a ball off the path retracts to where its branch leaves
    assert_eq!(f.eval(&t2(&b, 9, qi(3))), qi(2));
    assert_eq!(f.eval(&BerkPoint::TypeI(b.zero())), qi(4));
    assert_eq!(f.eval(&BerkPoint::Infinity), qi(0));
}

#[test]
fn potential_examples() {
    let b = Backend::padic(3);
    let can = BerkPoint::can(&b);
    let qs = [t2(&b, 0, qi(1)), t2(&b, 4, qi(3)), can.clone()];
    for v in potential_of_measure(&AtomicMeasure::dirac(can.clone()), &can, &qs).unwrap() {
        assert_eq!(v, qi(-1));
    }
    let s1 = t2(&b, 0, qi(2));
    let g = potential_of_measure(&AtomicMeasure::dirac(s1.clone()), &can, &qs).unwrap();
    assert_eq!(g, vec![qi(-2), qi(-1), qi(-1)]);
    let rho = AtomicMeasure::from_atoms([(can.clone(), q(1, 2)), (t2(&b, 0, qi(2)), q(1, 2))]);
    assert_eq!(potential_of_measure(&rho, &can, &[t2(&b, 0, qi(1))]).unwrap(), vec![q(-3, 2)]);
}

#[test]
fn laplacian_of_gromov_product() {
    let b = Backend::padic(2);
    let s0 = BerkPoint::can(&b);
    let s1 = t2(&b, 1, qi(3));
    let tree = convex_hull_tree(&[s0.clone(), s1.clone(), t2(&b, 0, qi(2))], &qi(10)).unwrap();
    let g = TreeFunction::from_fn(tree.clone(), |s| Ok(gromov_product(s, &s1, &s0)?.unwrap())).unwrap();
    let expected = AtomicMeasure::from_atoms([(s0.clone(), qi(1)), (s1.clone(), qi(-1))]);
    assert_eq!(g.laplacian(), expected);
    let neg = TreeFunction::from_fn(tree.clone(), |s| Ok(-gromov_product(s, &s1, &s0)?.unwrap())).unwrap();
    assert_eq!(neg.laplacian(), expected.scale(&qi(-1)));
    let c = TreeFunction::from_fn(tree, |_| Ok(q(7, 3))).unwrap();
    assert!(c.laplacian().is_empty());
}

#[test]
fn laplacian_of_log_sup() {
    let b = Backend::padic(3);
    let s = t2(&b, 0, qi(1));
    let ends = [t2(&b, 0, qi(5)), t2(&b, 0, qi(-5)), s.clone(), t2(&b, 1, qi(4))];
    let tree = convex_hull_tree(&ends, &qi(10)).unwrap();
    // log sup{S', S} = −logr(S' ∨ S) in valuation units
    let f = TreeFunction::from_fn(tree, |x| Ok(-join(x, &s).logr().unwrap().clone())).unwrap();
    let top = t2(&b, 0, qi(-5));
    assert_eq!(f.laplacian(), AtomicMeasure::from_atoms([(s, qi(1)), (top, qi(-1))]));
}

#[test]
fn energy_examples() {
    let b = Backend::padic(2);
    let can = BerkPoint::can(&b);
    let rho = AtomicMeasure::from_atoms([(t2(&b, 0, qi(1)), qi(1)), (can.clone(), qi(-1))]);
    assert_eq!(energy_pairing(&rho, &rho, &can).unwrap(), qi(1));
    assert_eq!(energy_pairing(&AtomicMeasure::zero(), &rho, &can).unwrap(), qi(0));
    assert_eq!(energy_pairing(&AtomicMeasure::dirac(can.clone()), &rho, &can), Err(BerkError::NonzeroMass));
    let pt = AtomicMeasure::from_atoms([(BerkPoint::TypeI(b.one()), qi(1)), (can.clone(), qi(-1))]);
    assert_eq!(energy_pairing(&pt, &pt, &can), Err(BerkError::TypeIAtom));
    // the pairing does not depend on the base point for mass-zero measures
    assert_eq!(energy_pairing(&rho, &rho, &t2(&b, 1, qi(4))).unwrap(), qi(1));
}

#[test]
fn dirichlet_examples() {
    let b = Backend::padic(3);
    let tree = convex_hull_tree(&[t2(&b, 0, qi(0)), t2(&b, 0, qi(2))], &qi(10)).unwrap();
    let lo = tree.index_of(&t2(&b, 0, qi(2))).unwrap();
    let mut vals = vec![qi(1); 2];
    vals[lo] = qi(0);
    assert_eq!(TreeFunction::new(tree.clone(), vals).unwrap().dirichlet_norm(), q(1, 2));
    assert_eq!(TreeFunction::from_fn(tree, |_| Ok(qi(3))).unwrap().dirichlet_norm(), qi(0));
    let s0 = BerkPoint::can(&b);
    let s1 = t2(&b, 2, qi(3));
    let tree = convex_hull_tree(&[s0.clone(), s1.clone(), t2(&b, 1, qi(2))], &qi(10)).unwrap();
    let psi = TreeFunction::from_fn(tree, |s| Ok(-gromov_product(s, &s1, &s0)?.unwrap())).unwrap();
    assert_eq!(psi.dirichlet_norm(), hyperbolic_distance(&s0, &s1).unwrap());
    let lap = psi.laplacian();
    assert_eq!(energy_pairing(&lap, &lap, &s0).unwrap(), psi.dirichlet_norm());
}

#[test]
fn correlation_with_constant_vanishes() {
    let b = Backend::padic(3);
    // an invariant measure of z ↦ z² + 1 (good reduction)
    let rho = AtomicMeasure::dirac(BerkPoint::can(&b));
    let sq = map(b, &[1, 0, 1], &[1]);
    let phi = |s: &BerkPoint| Ok(s.logr().cloned().unwrap_or_default());
    let one = |_: &BerkPoint| Ok(qi(1));
    for n in 0..3 {
        assert_eq!(correlation(&sq, &rho, &phi, &one, n).unwrap(), qi(0));
    }
    let spread = AtomicMeasure::from_atoms([(BerkPoint::can(&b), q(1, 2)), (t2(&b, 0, qi(1)), q(1, 2))]);
    assert_eq!(correlation(&sq, &spread, &phi, &phi, 0).unwrap(), q(1, 4));
}
