//! End-component classification: the conditions behind ultra-good and
//! very-good end-components, and the unions U and V of their states.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::graph::{attractor_in, distances_to, is_end_component, mec_decomposition, mecs_in, StateSet};
use crate::model::{restrict_sub, Mdp, Owner, PriorityView};
use crate::reach::solve_as_reach;
use crate::strategies::{Distribution, MooreTable, PreparedStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// `C^max_even(p)` (resp. `C^max_odd(p)`): states of `c` whose priority has
/// the given parity and is at least every priority of the other parity in `c`.
pub fn extremal_states(m: &Mdp, c: &StateSet, p: PriorityView, parity: Parity) -> StateSet {
    let want = |q: u32| (q % 2 == 0) == (parity == Parity::Even);
    let other_max = c.iter().map(|s| m.priority(p, s)).filter(|&q| !want(q)).max();
    StateSet::from_iter(
        m.len(),
        c.iter().filter(|&s| {
            let q = m.priority(p, s);
            want(q) && other_max.is_none_or(|o| q >= o)
        }),
    )
}

/// Outcome of the search for a sub-component where both objectives hold
/// almost surely under a randomized memoryless strategy.
#[derive(Debug, Clone, Serialize)]
pub struct CondTwoResult {
    pub pass: bool,
    /// The sub-component `D` the randomized strategy settles in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_component: Option<StateSet>,
    /// Memoryless strategy on the component (model indices): uniform over
    /// `D`-internal moves inside `D`, uniform over moves getting closer to
    /// `D` elsewhere.
    #[serde(skip)]
    pub lambda2: Option<MooreTable>,
    pub d_max_even1: StateSet,
    pub d_max_even2: StateSet,
    pub iterations: usize,
}

/// Randomized memoryless strategy on `c` that reaches the end-component
/// `d ⊆ c` almost surely and then stays in it, visiting all of it.
pub fn settling_strategy(m: &Mdp, c: &StateSet, d: &StateSet) -> MooreTable {
    let dist = distances_to(m, c, d);
    let moves = (0..m.len())
        .map(|s| {
            if !c.contains(s) || m.owner(s) != Owner::P1 {
                return None;
            }
            let succ: Vec<usize> = if d.contains(s) {
                m.succ(s).iter().copied().filter(|&t| d.contains(t)).collect()
            } else {
                let here = dist[s].expect("components are strongly connected");
                m.succ(s).iter().copied().filter(|&t| c.contains(t) && dist[t].is_some_and(|x| x < here)).collect()
            };
            Some(Distribution::uniform(&succ))
        })
        .collect();
    MooreTable::memoryless(moves)
}

/// Searches `c` (an end-component) for a sub-component `D` whose maximal
/// priorities are even for both views, peeling off the opponent's attractor
/// to the dominating odd states and recursing into the remaining MECs.
pub fn check_cond2(m: &Mdp, c: &StateSet) -> CondTwoResult {
    debug_assert!(is_end_component(m, c));
    let mut work = vec![c.clone()];
    let mut iterations = 0;
    while let Some(x) = work.pop() {
        iterations += 1;
        assert!(iterations <= c.len(), "sub-component search exceeded |C| iterations");
        let e1 = extremal_states(m, &x, PriorityView::P1, Parity::Even);
        let e2 = extremal_states(m, &x, PriorityView::P2, Parity::Even);
        if !e1.is_empty() && !e2.is_empty() {
            return CondTwoResult {
                pass: true,
                lambda2: Some(settling_strategy(m, c, &x)),
                sub_component: Some(x),
                d_max_even1: e1,
                d_max_even2: e2,
                iterations,
            };
        }
        let bad = extremal_states(m, &x, PriorityView::P1, Parity::Odd)
            .union(&extremal_states(m, &x, PriorityView::P2, Parity::Odd));
        let rest = x.difference(&attractor_in(m, &x, Owner::P2, &bad).set);
        work.extend(mecs_in(m, &rest));
    }
    let n = m.len();
    CondTwoResult {
        pass: false,
        sub_component: None,
        lambda2: None,
        d_max_even1: StateSet::new(n),
        d_max_even2: StateSet::new(n),
        iterations,
    }
}

/// Outcome of checking that, inside the component, P1 can ensure p1 surely
/// while reaching `C^max_even(p1)` almost surely from every state.
#[derive(Debug, Clone, Serialize)]
pub struct CondOneResult {
    pub pass: bool,
    pub c_max_even: StateSet,
    /// Witness in model indices, defined from every state of the component
    /// and never leaving it.
    #[serde(skip)]
    pub lambda1: Option<MooreTable>,
}

pub fn check_cond1u(m: &Mdp, c: &StateSet) -> CondOneResult {
    let c_max_even = extremal_states(m, c, PriorityView::P1, Parity::Even);
    let fail = |c_max_even| CondOneResult { pass: false, c_max_even, lambda1: None };
    if c_max_even.is_empty() {
        return fail(c_max_even);
    }
    let sub = restrict_sub(m, c).expect("candidates are end-components");
    let target = sub.project_set(&c_max_even);
    let sol = solve_as_reach(&sub.mdp, PriorityView::P1, &target).expect("as-reach on a component");
    if sol.win.len() != sub.mdp.len() {
        return fail(c_max_even);
    }
    let spec = sol.witness.expect("winning states come with a witness");
    let table = PreparedStrategy::new(Arc::new(sub.mdp.clone()), &spec)
        .and_then(|p| p.to_moore(&sub.mdp.all_states()))
        .expect("as-reach witnesses flatten")
        .expect("as-reach witnesses are finite-memory");
    CondOneResult { pass: true, c_max_even, lambda1: Some(table.lift(&sub)) }
}

/// A candidate end-component visited by the enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub states: StateSet,
    pub cond2: bool,
    /// `None` when not checked because the subtree was pruned first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cond1u: Option<bool>,
}

/// An ultra-good end-component with the ingredients of its strategy.
#[derive(Debug, Clone, Serialize)]
pub struct UgecRecord {
    pub component: StateSet,
    pub cond1: CondOneResult,
    pub cond2: CondTwoResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct UgecReport {
    pub union: StateSet,
    pub ugecs: Vec<UgecRecord>,
    pub candidates: Vec<Candidate>,
}

impl UgecReport {
    /// The recorded component containing `s`, preferring the largest one.
    pub fn component_of(&self, s: usize) -> Option<&UgecRecord> {
        self.ugecs.iter().filter(|u| u.component.contains(s)).max_by_key(|u| u.component.len())
    }
}

/// Union of all ultra-good end-components, by a memoized worklist over
/// candidate end-components starting from the MECs. A candidate failing the
/// sub-component search is pruned with everything below it; one passing both
/// conditions is recorded and not refined further; otherwise every candidate
/// obtained by excluding one state (and the opponent's attractor to it) is
/// explored.
pub fn ugec_states(m: &Mdp) -> UgecReport {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut work: Vec<StateSet> = mec_decomposition(m);
    let mut union = StateSet::new(m.len());
    let mut ugecs = Vec::new();
    let mut candidates = Vec::new();
    while let Some(c) = work.pop() {
        if !seen.insert(c.to_vec()) || ugecs.iter().any(|u: &UgecRecord| c.is_subset(&u.component)) {
            continue;
        }
        let cond2 = check_cond2(m, &c);
        if !cond2.pass {
            candidates.push(Candidate { states: c, cond2: false, cond1u: None });
            continue;
        }
        let cond1 = check_cond1u(m, &c);
        candidates.push(Candidate { states: c.clone(), cond2: true, cond1u: Some(cond1.pass) });
        if cond1.pass {
            union.union_with(&c);
            ugecs.push(UgecRecord { component: c, cond1, cond2 });
            continue;
        }
        for s in c.iter() {
            let rest = c.difference(&attractor_in(m, &c, Owner::P2, &StateSet::singleton(m.len(), s)).set);
            work.extend(mecs_in(m, &rest));
        }
    }
    ugecs.sort_by_key(|u| u.component.to_vec());
    UgecReport { union, ugecs, candidates }
}

#[derive(Debug, Clone, Serialize)]
pub struct VgecReport {
    pub union: StateSet,
    pub components: Vec<(StateSet, CondTwoResult)>,
}

impl VgecReport {
    pub fn component_of(&self, s: usize) -> Option<&(StateSet, CondTwoResult)> {
        self.components.iter().find(|(c, _)| c.contains(s))
    }
}

/// Union of all very-good end-components of a model in which every state
/// already satisfies S(p1): the MECs passing the sub-component search.
pub fn vgec_states(mw: &Mdp) -> VgecReport {
    let mut union = StateSet::new(mw.len());
    let mut components = Vec::new();
    for c in mec_decomposition(mw) {
        let r = check_cond2(mw, &c);
        if r.pass {
            union.union_with(&c);
            components.push((c, r));
        }
    }
    VgecReport { union, components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::restrict;

    #[test]
    fn extremal_examples() {
        let fig2 = fixtures::fig2();
        let all = fig2.all_states();
        assert_eq!(extremal_states(&fig2, &all, PriorityView::P1, Parity::Even), fig2.set_of(&["d"]).unwrap());
        let fig3 = fixtures::fig3();
        let abc = restrict(&fig3, &fig3.set_of(&["a", "b", "c"]).unwrap()).unwrap();
        assert_eq!(
            extremal_states(&abc, &abc.all_states(), PriorityView::P1, Parity::Even),
            abc.set_of(&["c"]).unwrap()
        );
        let odd = fig3.set_of(&["a", "b"]).unwrap();
        assert!(extremal_states(&fig3, &odd, PriorityView::P1, Parity::Even).is_empty());
    }

    #[test]
    fn cond2_examples() {
        let fig2 = fixtures::fig2();
        let r = check_cond2(&fig2, &fig2.all_states());
        assert!(r.pass);
        assert_eq!(r.sub_component.unwrap(), fig2.set_of(&["a", "b", "c"]).unwrap());
        let fig3 = fixtures::fig3();
        let abc = fig3.set_of(&["a", "b", "c"]).unwrap();
        let r = check_cond2(&fig3, &abc);
        assert!(r.pass);
        assert_eq!(r.sub_component.unwrap(), abc);
        let d = fig3.set_of(&["d"]).unwrap();
        assert!(!check_cond2(&fig3, &d).pass);
    }

    #[test]
    fn cond1_examples() {
        let fig2 = fixtures::fig2();
        assert!(check_cond1u(&fig2, &fig2.all_states()).pass);
        let fig3 = fixtures::fig3();
        assert!(!check_cond1u(&fig3, &fig3.set_of(&["a", "b", "c"]).unwrap()).pass);
        let fig1 = fixtures::fig1();
        let r = check_cond1u(&fig1, &fig1.all_states());
        assert!(r.pass);
        r.lambda1.unwrap().check(&fig1).unwrap();
    }

    #[test]
    fn unions() {
        let fig1 = fixtures::fig1();
        let fig2 = fixtures::fig2();
        let fig3 = fixtures::fig3();
        assert_eq!(ugec_states(&fig2).union, fig2.all_states());
        assert!(ugec_states(&fig3).union.is_empty());
        assert_eq!(ugec_states(&fig1).union, fig1.all_states());
        assert_eq!(vgec_states(&fig1).union, fig1.all_states());
        assert_eq!(vgec_states(&fig3).union, fig3.set_of(&["a", "b", "c"]).unwrap());
    }
}
