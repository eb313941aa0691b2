//! Qualitative graph algorithms on arenas: attractors, traps, SCCs and
//! maximal end-components.

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::model::Owner;

/// A set of state indices of a fixed-size state space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn new(n: usize) -> StateSet {
        StateSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> StateSet {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        StateSet(b)
    }

    pub fn from_iter(n: usize, it: impl IntoIterator<Item = usize>) -> StateSet {
        let mut s = StateSet::new(n);
        for x in it {
            s.insert(x);
        }
        s
    }

    pub fn singleton(n: usize, s: usize) -> StateSet {
        StateSet::from_iter(n, [s])
    }

    /// Size of the underlying state space.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, s: usize) -> bool {
        !self.0.put(s)
    }

    pub fn remove(&mut self, s: usize) {
        self.0.set(s, false);
    }

    pub fn contains(&self, s: usize) -> bool {
        self.0.contains(s)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.ones().next()
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        StateSet(b)
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        StateSet(b)
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut b = self.0.clone();
        b.difference_with(&other.0);
        StateSet(b)
    }

    pub fn complement(&self) -> StateSet {
        let mut b = self.0.clone();
        b.toggle_range(..);
        StateSet(b)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.0.union_with(&other.0);
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl serde::Serialize for StateSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A turn-based arena: states partitioned between two players, with
/// sorted successor lists.
pub trait Arena {
    fn num_states(&self) -> usize;
    fn owner(&self, s: usize) -> Owner;
    fn successors(&self, s: usize) -> &[usize];
}

/// Plain adjacency-list arena, used for products and derived graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub owners: Vec<Owner>,
    pub succ: Vec<Vec<usize>>,
}

impl Arena for Graph {
    fn num_states(&self) -> usize {
        self.owners.len()
    }
    fn owner(&self, s: usize) -> Owner {
        self.owners[s]
    }
    fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }
}

pub fn predecessors<A: Arena + ?Sized>(a: &A) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); a.num_states()];
    for s in 0..a.num_states() {
        for &t in a.successors(s) {
            pred[t].push(s);
        }
    }
    pred
}

/// An attractor together with an attracting choice for every state of the
/// attracting player that was added (not already in the target).
#[derive(Debug, Clone)]
pub struct Attractor {
    pub set: StateSet,
    pub strategy: Vec<Option<usize>>,
}

/// `Attr_player(target)` in the subarena induced by `domain`: edges leaving
/// the domain are ignored. States of `target` outside the domain are ignored.
pub fn attractor_in<A: Arena + ?Sized>(a: &A, domain: &StateSet, player: Owner, target: &StateSet) -> Attractor {
    let n = a.num_states();
    let pred = predecessors(a);
    let mut set = target.intersection(domain);
    let mut strategy = vec![None; n];
    let mut remaining: Vec<usize> = (0..n)
        .map(|s| if domain.contains(s) { a.successors(s).iter().filter(|&&t| domain.contains(t)).count() } else { 0 })
        .collect();
    let mut queue: VecDeque<usize> = set.iter().collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !domain.contains(s) || set.contains(s) {
                continue;
            }
            if a.owner(s) == player {
                strategy[s] = Some(t);
                set.insert(s);
                queue.push_back(s);
            } else {
                remaining[s] -= 1;
                if remaining[s] == 0 {
                    set.insert(s);
                    queue.push_back(s);
                }
            }
        }
    }
    Attractor { set, strategy }
}

/// `Attr_player(target)` in the whole arena.
pub fn attractor<A: Arena + ?Sized>(a: &A, player: Owner, target: &StateSet) -> StateSet {
    attractor_in(a, &StateSet::full(a.num_states()), player, target).set
}

/// True iff `player` cannot leave `set`: all successors of its states stay
/// inside and every opponent state has at least one successor inside.
pub fn is_trap<A: Arena + ?Sized>(a: &A, player: Owner, set: &StateSet) -> bool {
    set.iter().all(|s| {
        let succ = a.successors(s);
        if a.owner(s) == player {
            succ.iter().all(|&t| set.contains(t))
        } else {
            succ.iter().any(|&t| set.contains(t))
        }
    })
}

/// Strongly connected components of the subgraph induced by `domain`, in
/// reverse topological order (sink components first).
pub fn sccs_in<A: Arena + ?Sized>(a: &A, domain: &StateSet) -> Vec<StateSet> {
    let n = a.num_states();
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in domain.iter() {
        if index[root] != UNVISITED {
            continue;
        }
        // explicit DFS stack of (state, next successor position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&(v, pos)) = call.last() {
            let succ = a.successors(v);
            if pos < succ.len() {
                let w = succ[pos];
                call.last_mut().unwrap().1 += 1;
                if !domain.contains(w) {
                    continue;
                }
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = StateSet::new(n);
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.insert(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
    }
    out
}

pub fn sccs<A: Arena + ?Sized>(a: &A) -> Vec<StateSet> {
    sccs_in(a, &StateSet::full(a.num_states()))
}

/// True iff the component has at least one internal edge (so a play can
/// stay in it forever).
pub fn is_nontrivial<A: Arena + ?Sized>(a: &A, comp: &StateSet) -> bool {
    comp.len() > 1 || comp.iter().any(|s| a.successors(s).contains(&s))
}

/// Returns a pair `(from, to)` of states of `set` such that `to` is not
/// reachable from `from` inside `set`, or `None` if `set` is strongly
/// connected.
pub fn connectivity_gap<A: Arena + ?Sized>(a: &A, set: &StateSet) -> Option<(usize, usize)> {
    let root = set.first()?;
    let fwd = reachable_in(a, set, &StateSet::singleton(a.num_states(), root));
    if let Some(t) = set.difference(&fwd).first() {
        return Some((root, t));
    }
    let bwd = backward_reachable_in(a, set, &StateSet::singleton(a.num_states(), root));
    set.difference(&bwd).first().map(|s| (s, root))
}

/// States of `domain` reachable from `from` using only edges inside `domain`.
pub fn reachable_in<A: Arena + ?Sized>(a: &A, domain: &StateSet, from: &StateSet) -> StateSet {
    let mut seen = from.intersection(domain);
    let mut queue: Vec<usize> = seen.to_vec();
    while let Some(s) = queue.pop() {
        for &t in a.successors(s) {
            if domain.contains(t) && seen.insert(t) {
                queue.push(t);
            }
        }
    }
    seen
}

/// States of `domain` from which `target` is reachable inside `domain`.
pub fn backward_reachable_in<A: Arena + ?Sized>(a: &A, domain: &StateSet, target: &StateSet) -> StateSet {
    let pred = predecessors(a);
    let mut seen = target.intersection(domain);
    let mut queue: Vec<usize> = seen.to_vec();
    while let Some(t) = queue.pop() {
        for &s in &pred[t] {
            if domain.contains(s) && seen.insert(s) {
                queue.push(s);
            }
        }
    }
    seen
}

/// Shortest-path distance (in edges, inside `domain`) from each state to
/// `target`; `None` where the target is unreachable.
pub fn distances_to<A: Arena + ?Sized>(a: &A, domain: &StateSet, target: &StateSet) -> Vec<Option<usize>> {
    let pred = predecessors(a);
    let mut dist = vec![None; a.num_states()];
    let mut queue = VecDeque::new();
    for t in target.intersection(domain).iter() {
        dist[t] = Some(0);
        queue.push_back(t);
    }
    while let Some(t) = queue.pop_front() {
        let d = dist[t].unwrap();
        for &s in &pred[t] {
            if domain.contains(s) && dist[s].is_none() {
                dist[s] = Some(d + 1);
                queue.push_back(s);
            }
        }
    }
    dist
}

/// Maximal end-components contained in `domain`, by iterative SCC
/// refinement: states from which P2 can force leaving their SCC are removed
/// until every remaining SCC is closed.
pub fn mecs_in<A: Arena + ?Sized>(a: &A, domain: &StateSet) -> Vec<StateSet> {
    let mut result = Vec::new();
    let mut work = vec![domain.clone()];
    while let Some(cand) = work.pop() {
        for comp in sccs_in(a, &cand) {
            let leave = attractor(a, Owner::P2, &comp.complement());
            let kept = comp.difference(&leave);
            if kept == comp {
                result.push(comp);
            } else if !kept.is_empty() {
                work.push(kept);
            }
        }
    }
    result.sort_by_key(|c| c.first());
    result
}

/// All maximal end-components, sorted by smallest member.
pub fn mec_decomposition<A: Arena + ?Sized>(a: &A) -> Vec<StateSet> {
    mecs_in(a, &StateSet::full(a.num_states()))
}

/// True iff `set` is an end-component: a nonempty P2-trap that is strongly
/// connected.
pub fn is_end_component<A: Arena + ?Sized>(a: &A, set: &StateSet) -> bool {
    !set.is_empty() && is_trap(a, Owner::P2, set) && connectivity_gap(a, set).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Mdp;

    fn set(m: &Mdp, ids: &[&str]) -> StateSet {
        m.set_of(ids).unwrap()
    }

    #[test]
    fn attractor_examples() {
        let fig1 = fixtures::fig1();
        assert_eq!(attractor(&fig1, Owner::P1, &set(&fig1, &["d"])), fig1.all_states());
        let fig3 = fixtures::fig3();
        assert_eq!(attractor(&fig3, Owner::P2, &set(&fig3, &["d"])), set(&fig3, &["d"]));
        assert_eq!(attractor(&fig3, Owner::P1, &fig3.all_states()), fig3.all_states());
    }

    #[test]
    fn attractor_strategy_moves_closer() {
        let fig1 = fixtures::fig1();
        let attr = attractor_in(&fig1, &fig1.all_states(), Owner::P1, &set(&fig1, &["d"]));
        let a = fig1.index_of("a").unwrap();
        assert_eq!(attr.strategy[a], fig1.index_of("d"));
    }

    #[test]
    fn scc_examples() {
        let fig3 = fixtures::fig3();
        let mut comps = sccs(&fig3);
        comps.sort_by_key(|c| c.len());
        assert_eq!(comps, vec![set(&fig3, &["d"]), set(&fig3, &["a", "b", "c"])]);
        let fig1 = fixtures::fig1();
        assert_eq!(sccs(&fig1), vec![fig1.all_states()]);
    }

    #[test]
    fn scc_order_is_reverse_topological() {
        let fig3 = fixtures::fig3();
        // d is a sink component reachable from {a,b,c}
        assert_eq!(sccs(&fig3)[0], set(&fig3, &["d"]));
    }

    #[test]
    fn mec_examples() {
        let fig1 = fixtures::fig1();
        assert_eq!(mec_decomposition(&fig1), vec![fig1.all_states()]);
        let fig3 = fixtures::fig3();
        assert_eq!(mec_decomposition(&fig3), vec![set(&fig3, &["a", "b", "c"]), set(&fig3, &["d"])]);
        let fig2 = fixtures::fig2();
        assert_eq!(mec_decomposition(&fig2), vec![fig2.all_states()]);
    }

    #[test]
    fn trap_examples() {
        let fig3 = fixtures::fig3();
        assert!(is_trap(&fig3, Owner::P2, &set(&fig3, &["a", "b", "c"])));
        let fig1 = fixtures::fig1();
        assert!(!is_trap(&fig1, Owner::P2, &set(&fig1, &["a", "b"])));
        assert!(is_trap(&fig1, Owner::P1, &fig1.all_states()));
        assert!(is_trap(&fig1, Owner::P2, &fig1.all_states()));
    }

    #[test]
    fn distances() {
        let fig1 = fixtures::fig1();
        let d = distances_to(&fig1, &fig1.all_states(), &set(&fig1, &["c"]));
        let ix = |s: &str| fig1.index_of(s).unwrap();
        assert_eq!(d[ix("c")], Some(0));
        assert_eq!(d[ix("b")], Some(1));
        assert_eq!(d[ix("a")], Some(2));
        assert_eq!(d[ix("d")], Some(3));
    }
}
