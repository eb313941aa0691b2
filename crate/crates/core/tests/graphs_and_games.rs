use bwc_core::games::{build_buchi_parity_game, solve_buchi_parity_arena, solve_parity, Game};
use bwc_core::graph::{attractor, is_end_component, is_trap, mec_decomposition, Graph};
use bwc_core::model::restrict;
use bwc_core::oracle::{brute_buchi_parity, brute_parity_game, enumerate_ecs, random_game, random_mdp};
use bwc_core::{Owner, PriorityView, StateSet};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn parity_games_are_determined_and_match_enumeration(seed in any::<u64>(), n in 1usize..=8) {
        let (g, _) = random_game(seed, n, 4);
        let r = solve_parity(&g);
        prop_assert!(r.w1.is_disjoint(&r.w2));
        prop_assert_eq!(r.w1.union(&r.w2).len(), n);
        prop_assert_eq!(&r.w1, &brute_parity_game(&g).unwrap());
    }

    #[test]
    fn parity_strategies_win(seed in any::<u64>(), n in 1usize..=8) {
        // fixing P1's choices on W1 must leave no P2 win from W1
        let (g, _) = random_game(seed, n, 4);
        let r = solve_parity(&g);
        let strat = r.strat1(&g);
        let mut fixed = g.clone();
        for s in r.w1.iter() {
            if g.owners[s] == Owner::P1 {
                fixed.succ[s] = vec![strat[s].expect("strategy defined on W1")];
                prop_assert!(r.w1.contains(fixed.succ[s][0]));
            }
        }
        let p1_only = brute_parity_game(&fixed).unwrap();
        prop_assert!(r.w1.is_subset(&p1_only));
    }

    #[test]
    fn buchi_parity_matches_enumeration(seed in any::<u64>(), n in 1usize..=6) {
        let (g, b) = random_game(seed, n, 4);
        let fast = solve_buchi_parity_arena(&g, &g.priority, &b);
        prop_assert_eq!(fast.w1, brute_buchi_parity(&g, &b).unwrap());
    }

    #[test]
    fn gadget_size_law(seed in any::<u64>(), n in 1usize..=8, mask in any::<u16>()) {
        let m = random_mdp(seed, n, 4);
        let r = StateSet::from_iter(n, (0..n).filter(|s| mask >> s & 1 == 1));
        let g = build_buchi_parity_game(&m, &r, PriorityView::P1);
        let p2_outside = (0..n).filter(|&s| m.owner(s) == Owner::P2 && !r.contains(s)).count();
        prop_assert_eq!(g.game.len(), n + 2 * p2_outside);
    }

    #[test]
    fn end_components_sit_in_one_mec(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_mdp(seed, n, 4);
        let mecs = mec_decomposition(&m);
        for mec in &mecs {
            prop_assert!(is_trap(&m, Owner::P2, mec));
            prop_assert!(is_end_component(&m, mec));
        }
        let ecs = enumerate_ecs(&m).unwrap();
        for ec in &ecs {
            prop_assert_eq!(mecs.iter().filter(|mec| ec.is_subset(mec)).count(), 1);
        }
        for a in &ecs {
            for b in &ecs {
                if !a.is_disjoint(b) {
                    prop_assert!(ecs.contains(&a.union(b)));
                }
            }
        }
    }

    #[test]
    fn attractor_is_monotone(seed in any::<u64>(), n in 1usize..=8, small in any::<u16>(), extra in any::<u16>()) {
        let m = random_mdp(seed, n, 4);
        let t1 = StateSet::from_iter(n, (0..n).filter(|s| small >> s & 1 == 1));
        let t2 = t1.union(&StateSet::from_iter(n, (0..n).filter(|s| extra >> s & 1 == 1)));
        for who in [Owner::P1, Owner::P2] {
            let a1 = attractor(&m, who, &t1);
            prop_assert!(t1.is_subset(&a1));
            prop_assert!(a1.is_subset(&attractor(&m, who, &t2)));
        }
    }

    #[test]
    fn restrict_is_idempotent(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_mdp(seed, n, 4);
        for mec in mec_decomposition(&m) {
            let once = restrict(&m, &mec).unwrap();
            let twice = restrict(&once, &once.all_states()).unwrap();
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_mdp(seed, n, 4);
        let text = bwc_core::serialize_mdp(&m);
        let back = bwc_core::parse_mdp(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(bwc_core::serialize_mdp(&back), text);
        for s in 0..n {
            if let Some(d) = m.dist(s) {
                prop_assert_eq!(d.iter().sum::<bwc_core::Rational>(), num::one());
            }
        }
    }
}

#[test]
fn game_documents_round_trip() {
    let (g, b) = random_game(11, 6, 4);
    let doc = g.to_document(Some(&b));
    let (back, bb) = Game::from_document(&doc).unwrap();
    assert_eq!(back.succ, g.succ);
    assert_eq!(back.priority, g.priority);
    assert_eq!(bb, Some(b));
    let _ = Graph { owners: g.owners.clone(), succ: g.succ.clone() };
}
