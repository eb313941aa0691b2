//! Brute-force reference implementations for small instances, and seeded
//! random model generators for cross-checking the fast paths.

use num::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::games::{build_buchi_parity_game, Game};
use crate::graph::{backward_reachable_in, is_nontrivial, sccs_in, Arena, Graph, StateSet};
use crate::model::{restrict, Mdp, Owner, PriorityView, Rational, State};
use crate::strategies::{Distribution, MooreTable};

/// Largest state count accepted by the subset enumeration.
pub const EC_BOUND: usize = 16;
/// Largest number of memoryless strategies enumerated by the game oracles.
pub const STRATEGY_BOUND: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: {what} is {size}, bound {bound}")]
    TooLarge { what: &'static str, size: u64, bound: u64 },
}

/// Random valid MDP with `n` states, out-degree 1..=3, priorities in
/// `0..=max_priority` and random rational distributions.
pub fn random_mdp(seed: u64, n: usize, max_priority: u32) -> Mdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_priority = max_priority.min(n as u32 + 1);
    let states: Vec<State> = (0..n)
        .map(|i| State {
            id: format!("s{i}"),
            owner: if rng.gen_bool(0.5) { Owner::P1 } else { Owner::P2 },
            p1: rng.gen_range(0..=max_priority),
            p2: rng.gen_range(0..=max_priority),
        })
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let mut succ = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for st in &states {
        let k = rng.gen_range(1..=3.min(n));
        let mut out: Vec<usize> = all.choose_multiple(&mut rng, k).copied().collect();
        out.sort_unstable();
        dist.push(match st.owner {
            Owner::P1 => None,
            Owner::P2 => {
                let w: Vec<i64> = out.iter().map(|_| rng.gen_range(1..=4)).collect();
                let total: i64 = w.iter().sum();
                Some(w.iter().map(|&x| Rational::new(BigInt::from(x), BigInt::from(total))).collect())
            }
        });
        succ.push(out);
    }
    Mdp::from_parts(states, succ, dist, Some(0)).expect("generated models are valid")
}

/// Random game arena with a random Büchi set.
pub fn random_game(seed: u64, n: usize, max_priority: u32) -> (Game, StateSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..n).collect();
    let owners: Vec<Owner> = (0..n).map(|_| if rng.gen_bool(0.5) { Owner::P1 } else { Owner::P2 }).collect();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3.min(n));
            let mut out: Vec<usize> = all.choose_multiple(&mut rng, k).copied().collect();
            out.sort_unstable();
            out
        })
        .collect();
    let priority = (0..n).map(|_| rng.gen_range(0..=max_priority)).collect();
    let buchi = StateSet::from_iter(n, (0..n).filter(|_| rng.gen_bool(0.4)));
    let game = Game { ids: (0..n).map(|i| format!("s{i}")).collect(), owners, succ, priority };
    (game, buchi)
}

/// Every end-component of `m`, by subset enumeration.
pub fn enumerate_ecs(m: &Mdp) -> Result<Vec<StateSet>, OracleError> {
    let n = m.len();
    if n > EC_BOUND {
        return Err(OracleError::TooLarge { what: "state count", size: n as u64, bound: EC_BOUND as u64 });
    }
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let set = StateSet::from_iter(n, (0..n).filter(|&s| mask >> s & 1 == 1));
        let trap = set.iter().all(|s| match m.owner(s) {
            Owner::P2 => m.succ(s).iter().all(|&t| set.contains(t)),
            Owner::P1 => m.succ(s).iter().any(|&t| set.contains(t)),
        });
        if trap && strongly_connected(m, &set) {
            out.push(set);
        }
    }
    Ok(out)
}

fn strongly_connected(m: &Mdp, set: &StateSet) -> bool {
    let root = set.first().expect("nonempty");
    set.iter().all(|s| reaches(m, set, root, s) && reaches(m, set, s, root))
}

fn reaches(m: &Mdp, set: &StateSet, from: usize, to: usize) -> bool {
    // a single state needs a self-loop to be strongly connected
    let mut seen = StateSet::new(m.len());
    let mut stack = vec![from];
    while let Some(s) = stack.pop() {
        for &t in m.succ(s) {
            if !set.contains(t) {
                continue;
            }
            if t == to {
                return true;
            }
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    false
}

/// Mixed-radix enumeration of one successor choice per state of `who`.
fn choice_space(a: &Game, who: Owner) -> Result<(Vec<usize>, u64), OracleError> {
    let states: Vec<usize> = (0..a.len()).filter(|&s| a.owners[s] == who).collect();
    let mut total: u64 = 1;
    for &s in &states {
        total = total.saturating_mul(a.succ[s].len() as u64);
        if total > STRATEGY_BOUND {
            return Err(OracleError::TooLarge { what: "memoryless strategy count", size: total, bound: STRATEGY_BOUND });
        }
    }
    Ok((states, total))
}

/// Arena where the states in `fixed` keep only the successor picked by the
/// digits of `code`.
fn fix_choices(a: &Game, fixed: &[usize], mut code: u64) -> Graph {
    let mut succ = a.succ.clone();
    for &s in fixed {
        let k = a.succ[s].len() as u64;
        succ[s] = vec![a.succ[s][(code % k) as usize]];
        code /= k;
    }
    Graph { owners: a.owners.clone(), succ }
}

/// States that can reach a cycle whose maximal priority has parity `odd`
/// and, if `buchi` is given, that also passes through a Büchi state.
fn reach_cycle(g: &Graph, priority: &[u32], odd: bool, buchi: Option<&StateSet>) -> StateSet {
    let n = g.num_states();
    let mut good = StateSet::new(n);
    let mut levels: Vec<u32> = priority.iter().copied().filter(|q| (q % 2 == 1) == odd).collect();
    levels.sort_unstable();
    levels.dedup();
    for q in levels {
        let domain = StateSet::from_iter(n, (0..n).filter(|&s| priority[s] <= q));
        for comp in sccs_in(g, &domain) {
            if is_nontrivial(g, &comp)
                && comp.iter().any(|s| priority[s] == q)
                && buchi.is_none_or(|b| !comp.is_disjoint(b))
            {
                good.union_with(&comp);
            }
        }
    }
    backward_reachable_in(g, &StateSet::full(n), &good)
}

/// P1's winning region of a parity game, by enumerating P1's memoryless
/// strategies and looking for reachable odd cycles in each restriction.
pub fn brute_parity_game(g: &Game) -> Result<StateSet, OracleError> {
    let (fixed, total) = choice_space(g, Owner::P1)?;
    let n = g.len();
    let mut w1 = StateSet::new(n);
    for code in 0..total {
        let h = fix_choices(g, &fixed, code);
        let lose = reach_cycle(&h, &g.priority, true, None);
        w1.union_with(&lose.complement());
        if w1.len() == n {
            break;
        }
    }
    Ok(w1)
}

/// P1's winning region for Büchi(`buchi`) ∧ parity, by enumerating P2's
/// memoryless strategies (P2's objective is a disjunction of co-Büchi and
/// odd parity, for which memoryless strategies suffice).
pub fn brute_buchi_parity(g: &Game, buchi: &StateSet) -> Result<StateSet, OracleError> {
    let (fixed, total) = choice_space(g, Owner::P2)?;
    let mut w1 = StateSet::full(g.len());
    for code in 0..total {
        let h = fix_choices(g, &fixed, code);
        w1 = w1.intersection(&reach_cycle(&h, &g.priority, false, Some(buchi)));
        if w1.is_empty() {
            break;
        }
    }
    Ok(w1)
}

fn max_is_even(m: &Mdp, set: &StateSet, view: PriorityView) -> bool {
    set.iter().map(|s| m.priority(view, s)).max().unwrap_or(1) % 2 == 0
}

/// Unions of the ultra-good and very-good end-components, checking the
/// defining conditions on every enumerated end-component.
pub fn brute_ugec_vgec(m: &Mdp) -> Result<(StateSet, StateSet), OracleError> {
    let mut ecs = enumerate_ecs(m)?;
    ecs.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let cond2 = |c: &StateSet| {
        ecs.iter().any(|d| d.is_subset(c) && max_is_even(m, d, PriorityView::P1) && max_is_even(m, d, PriorityView::P2))
    };
    let sure1 = brute_parity_game(&Game::from_mdp(m, PriorityView::P1))?;
    let mut u = StateSet::new(m.len());
    let mut v = StateSet::new(m.len());
    for c in &ecs {
        if !cond2(c) {
            continue;
        }
        if c.is_subset(&sure1) {
            v.union_with(c);
        }
        if c.is_subset(&u) {
            continue;
        }
        let odd_max = c.iter().map(|s| m.priority(PriorityView::P1, s)).filter(|q| q % 2 == 1).max();
        let top: Vec<usize> = c
            .iter()
            .filter(|&s| {
                let q = m.priority(PriorityView::P1, s);
                q % 2 == 0 && odd_max.is_none_or(|o| q >= o)
            })
            .collect();
        if top.is_empty() {
            continue;
        }
        let sub = restrict(m, c).expect("enumerated sets are end-components");
        let win = brute_parity_game(&Game::from_mdp(&sub, PriorityView::P1))?;
        if win.len() != sub.len() {
            continue;
        }
        let ids: Vec<&str> = top.iter().map(|&s| m.id(s)).collect();
        let r = sub.set_of(&ids).expect("ids of the component");
        let gadget = build_buchi_parity_game(&sub, &r, PriorityView::P1);
        let w = brute_buchi_parity(&gadget.game, &gadget.buchi)?;
        if (0..sub.len()).all(|s| w.contains(s)) {
            u.union_with(c);
        }
    }
    Ok((u, v))
}

/// All pure Moore machines with exactly `memory` states and initial memory
/// 0, in a fixed order.
pub fn pure_moore_tables(m: &Mdp, memory: usize) -> impl Iterator<Item = MooreTable> + '_ {
    let n = m.len();
    let p1: Vec<usize> = (0..n).filter(|&s| m.owner(s) == Owner::P1).collect();
    let mut radices: Vec<u64> = Vec::new();
    for _ in 0..memory {
        radices.extend(p1.iter().map(|&s| m.succ(s).len() as u64));
        radices.extend((0..n).map(|_| memory as u64));
    }
    let total: u64 = radices.iter().product();
    (0..total).map(move |mut code| {
        let mut next = vec![vec![None; n]; memory];
        let mut update = vec![vec![None; n]; memory];
        for mem in 0..memory {
            for &s in &p1 {
                let k = m.succ(s).len() as u64;
                next[mem][s] = Some(Distribution::dirac(m.succ(s)[(code % k) as usize]));
                code /= k;
            }
            for s in 0..n {
                update[mem][s] = Some((code % memory as u64) as usize);
                code /= memory as u64;
            }
        }
        MooreTable { states: n, memory, m0: 0, update, next }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn ec_examples() {
        let fig3 = fixtures::fig3();
        let ecs = enumerate_ecs(&fig3).unwrap();
        assert_eq!(ecs.len(), 2);
        assert!(ecs.contains(&fig3.set_of(&["d"]).unwrap()));
        assert!(ecs.contains(&fig3.set_of(&["a", "b", "c"]).unwrap()));
        let fig1 = fixtures::fig1();
        let ecs = enumerate_ecs(&fig1).unwrap();
        let expect = [vec!["a", "d"], vec!["a", "b", "c"], vec!["a", "b", "c", "d"]];
        assert_eq!(ecs.len(), 3);
        for e in expect {
            assert!(ecs.contains(&fig1.set_of(&e).unwrap()));
        }
    }

    #[test]
    fn unions_on_golden_models() {
        let fig2 = fixtures::fig2();
        assert_eq!(brute_ugec_vgec(&fig2).unwrap(), (fig2.all_states(), fig2.all_states()));
        let fig3 = fixtures::fig3();
        assert_eq!(brute_ugec_vgec(&fig3).unwrap(), (StateSet::new(4), fig3.set_of(&["a", "b", "c"]).unwrap()));
        let fig1 = fixtures::fig1();
        assert_eq!(brute_ugec_vgec(&fig1).unwrap(), (fig1.all_states(), fig1.all_states()));
    }

    #[test]
    fn game_oracles_on_golden_models() {
        let fig3 = fixtures::fig3();
        let g = Game::from_mdp(&fig3, PriorityView::P1);
        assert_eq!(brute_parity_game(&g).unwrap(), fig3.all_states());
        let abc = restrict(&fig3, &fig3.set_of(&["a", "b", "c"]).unwrap()).unwrap();
        assert!(brute_parity_game(&Game::from_mdp(&abc, PriorityView::P1)).unwrap().is_empty());

        let fig1 = fixtures::fig1();
        let gadget = build_buchi_parity_game(&fig1, &fig1.set_of(&["c"]).unwrap(), PriorityView::P1);
        assert!(brute_buchi_parity(&gadget.game, &gadget.buchi).unwrap().contains(fig1.index_of("a").unwrap()));
        let gadget = build_buchi_parity_game(&abc, &abc.set_of(&["c"]).unwrap(), PriorityView::P1);
        assert!(!brute_buchi_parity(&gadget.game, &gadget.buchi).unwrap().contains(abc.index_of("a").unwrap()));
    }

    #[test]
    fn moore_enumeration_size() {
        let fig2 = fixtures::fig2();
        assert_eq!(pure_moore_tables(&fig2, 1).count(), 2);
        assert_eq!(pure_moore_tables(&fig2, 2).count(), 4 * 1024);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_mdp(7, 6, 4).to_document(), random_mdp(7, 6, 4).to_document());
        let (g, b) = random_game(3, 5, 4);
        assert_eq!(g.len(), 5);
        assert!(b.universe() == 5);
    }
}
