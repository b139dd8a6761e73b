mod common;

use berk_core::valued_field::arith::{min_q, q};
use berk_core::Backend;
use common::{config, element};
use proptest::prelude::*;

fn check_pair(x: berk_core::FieldElement, y: berk_core::FieldElement) -> Result<(), TestCaseError> {
    if let (Some(vx), Some(vy)) = (x.valuation(), y.valuation()) {
        prop_assert_eq!(x.mul(&y).valuation(), Some(&vx + &vy));
        let s = x.add(&y);
        if let Some(vs) = s.valuation() {
            prop_assert!(vs >= min_q(&vx, &vy));
        }
        if vx != vy {
            prop_assert_eq!(s.valuation(), Some(min_q(&vx, &vy)));
        }
        if let Ok(ix) = x.inv() {
            prop_assert_eq!(ix.valuation(), Some(-vx.clone()));
        }
    }
    // reduction is a ring map on the valuation ring
    let unit_ball = |z: &berk_core::FieldElement| z.valuation().is_none_or(|v| v >= q(0, 1));
    if unit_ball(&x) && unit_ball(&y) {
        let (rx, ry) = (x.reduce().unwrap(), y.reduce().unwrap());
        prop_assert_eq!(x.add(&y).reduce().unwrap(), rx.add(&ry));
        prop_assert_eq!(x.mul(&y).reduce().unwrap(), rx.mul(&ry));
    }
    Ok(())
}

macro_rules! per_backend {
    ($name:ident, $b:expr) => {
        proptest! {
            #![proptest_config(config(200))]
            #[test]
            fn $name(x in element($b), y in element($b)) {
                check_pair(x, y)?;
            }
        }
    };
}

per_backend!(padic3_valuation_and_reduction, Backend::padic(3));
per_backend!(padic2_valuation_and_reduction, Backend::padic(2));
per_backend!(laurent_q_valuation_and_reduction, Backend::equichar0());
per_backend!(laurent_f3_valuation_and_reduction, Backend::equicharp(3, 1));

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn literals_round_trip(x in element(Backend::padic(5)), y in element(Backend::equicharp(2, 2))) {
        prop_assert_eq!(berk_core::FieldElement::parse(&Backend::padic(5), &x.to_literal()).unwrap(), x);
        prop_assert_eq!(berk_core::FieldElement::parse(&Backend::equicharp(2, 2), &y.to_literal()).unwrap(), y);
    }
}
