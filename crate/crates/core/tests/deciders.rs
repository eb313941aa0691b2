use std::sync::Arc;

use bwc_core::bwc::{decide_sure_as, decide_sure_threshold, sure_parity_region};
use bwc_core::components::{check_cond2, extremal_states, ugec_states, vgec_states, Parity};
use bwc_core::graph::{is_end_component, mec_decomposition};
use bwc_core::model::sub_mdp;
use bwc_core::oracle::{brute_ugec_vgec, random_mdp};
use bwc_core::reach::Cmp;
use bwc_core::verify::{exact_parity_probability, verify_spec, Objective};
use bwc_core::{Mdp, PriorityView, Rational, StateSet};
use num::{One, Zero};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn v_union(m: &Mdp) -> StateSet {
    let w = sure_parity_region(m);
    match sub_mdp(m, &w) {
        Ok(sub) => sub.lift_set(&vgec_states(&sub.mdp).union),
        Err(_) => StateSet::new(m.len()),
    }
}

fn thresholds() -> Vec<Rational> {
    vec![r(0, 1), r(1, 3), r(1, 2), r(3, 4), r(99, 100)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn component_unions_match_enumeration(seed in any::<u64>(), n in 1usize..=6) {
        let m = random_mdp(seed, n, 4);
        let (u, v) = brute_ugec_vgec(&m).unwrap();
        let fast_u = ugec_states(&m).union;
        let fast_v = v_union(&m);
        prop_assert_eq!(&fast_u, &u);
        prop_assert_eq!(&fast_v, &v);
        prop_assert!(fast_u.is_subset(&fast_v));
    }

    #[test]
    fn settled_sub_components_satisfy_both_objectives(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_mdp(seed, n, 4);
        for c in mec_decomposition(&m) {
            let res = check_cond2(&m, &c);
            prop_assert!(res.iterations <= c.len());
            if !res.pass {
                continue;
            }
            let d = res.sub_component.clone().unwrap();
            prop_assert!(d.is_subset(&c) && is_end_component(&m, &d));
            prop_assert!(!extremal_states(&m, &d, PriorityView::P1, Parity::Even).is_empty());
            prop_assert!(!extremal_states(&m, &d, PriorityView::P2, Parity::Even).is_empty());
            let lambda2 = res.lambda2.unwrap();
            for s in c.iter() {
                prop_assert!(exact_parity_probability(&m, &lambda2, s, &Objective::Both).unwrap().is_one());
            }
        }
    }

    #[test]
    fn verdicts_are_monotone(seed in any::<u64>(), n in 1usize..=7) {
        let m = random_mdp(seed, n, 4);
        let win = sure_parity_region(&m);
        for s0 in 0..n {
            let ge0 = decide_sure_threshold(&m, s0, Cmp::Ge, &Rational::zero()).unwrap().is_yes();
            prop_assert_eq!(ge0, win.contains(s0));
            let as_yes = decide_sure_as(&m, s0).unwrap().is_yes();
            let cs = thresholds();
            for (i, c) in cs.iter().enumerate() {
                let ge = decide_sure_threshold(&m, s0, Cmp::Ge, c).unwrap().is_yes();
                let gt = decide_sure_threshold(&m, s0, Cmp::Gt, c).unwrap().is_yes();
                prop_assert!(!as_yes || ge, "AS holds but >= {} fails at {}", c, s0);
                prop_assert!(!gt || ge);
                for lower in &cs[..i] {
                    prop_assert!(!ge || decide_sure_threshold(&m, s0, Cmp::Gt, lower).unwrap().is_yes());
                }
            }
        }
    }

    #[test]
    fn yes_witnesses_verify(seed in any::<u64>(), n in 1usize..=7) {
        let m = Arc::new(random_mdp(seed, n, 4));
        let obj = Objective::Parity(PriorityView::P2);
        for s0 in 0..n {
            let d = decide_sure_as(&m, s0).unwrap();
            if let Some(w) = &d.witness {
                let rep = verify_spec(&m, w, s0, PriorityView::P1, &obj).unwrap();
                prop_assert!(rep.sure.holds());
                prop_assert!(rep.probability.is_one());
            }
            for c in thresholds() {
                for cmp in [Cmp::Gt, Cmp::Ge] {
                    let d = decide_sure_threshold(&m, s0, cmp, &c).unwrap();
                    if let Some(w) = &d.witness {
                        let rep = verify_spec(&m, w, s0, PriorityView::P1, &obj).unwrap();
                        prop_assert!(rep.sure.holds(), "{} {} from {}: {:?}", cmp, c, s0, rep);
                        prop_assert!(cmp.holds(&rep.probability, &c), "{} {} from {}: {}", cmp, c, s0, rep);
                    }
                }
            }
        }
    }
}
