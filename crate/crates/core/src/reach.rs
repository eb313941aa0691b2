//! Reachability: exact maximal probabilities, and the problems
//! S(p) ∧ AS(◇T) and S(p) ∧ P~c(◇T).

use std::collections::HashMap;
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{build_buchi_parity_game, solve_buchi_parity_game, solve_parity, Game, Provenance};
use crate::graph::{backward_reachable_in, distances_to, StateSet};
use crate::linalg::SparseSystem;
use crate::model::{format_rational, sub_mdp, Mdp, Owner, PriorityView, Rational, State, SubMdp};
use crate::strategies::{materialize, Distribution, MooreTable, PreparedStrategy, StrategySpec, Switch, Trigger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Yes => write!(f, "YES"),
            Verdict::No => write!(f, "NO"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    pub fn holds(self, value: &Rational, c: &Rational) -> bool {
        match self {
            Cmp::Gt => value > c,
            Cmp::Ge => value >= c,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cmp::Gt => write!(f, ">"),
            Cmp::Ge => write!(f, ">="),
        }
    }
}

/// One pipeline stage of a decision, kept for display and testing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub detail: serde_json::Value,
}

/// A verdict, with a witness strategy exactly when the verdict is YES.
#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<StrategySpec>,
    pub trace: Vec<Stage>,
}

impl Decision {
    pub fn yes(witness: StrategySpec, trace: Vec<Stage>) -> Decision {
        Decision { verdict: Verdict::Yes, reason: None, witness: Some(witness), trace }
    }

    pub fn no(reason: impl Into<String>, trace: Vec<Stage>) -> Decision {
        Decision { verdict: Verdict::No, reason: Some(reason.into()), witness: None, trace }
    }

    pub fn is_yes(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    pub fn stage(&self, name: &str) -> Option<&serde_json::Value> {
        self.trace.iter().find(|s| s.name == name).map(|s| &s.detail)
    }
}

pub(crate) fn stage(name: &str, detail: serde_json::Value) -> Stage {
    Stage { name: name.to_string(), detail }
}

pub(crate) fn ids_json(m: &Mdp, set: &StateSet) -> serde_json::Value {
    serde_json::Value::from(m.ids_of(set))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("threshold {0} is outside [0,1)")]
    ThresholdRange(String),
    #[error("threshold unreachable: {threshold} is not below the maximal probability {value}")]
    ThresholdUnreachable { threshold: String, value: String },
    #[error(transparent)]
    Strategy(#[from] crate::strategies::StrategyError),
}

/// Maximal reachability probabilities with an optimal pure memoryless
/// strategy (`strategy[s]` is set for every P1 state).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector {
    pub values: Vec<Rational>,
    pub strategy: Vec<Option<usize>>,
}

impl ValueVector {
    pub fn table(&self) -> MooreTable {
        MooreTable::from_choices(&self.strategy)
    }
}

/// Exact probabilities of reaching `target` in the Markov chain obtained by
/// fixing the memoryless choice `policy` at P1 states.
fn evaluate_policy(m: &Mdp, target: &StateSet, policy: &[Option<usize>]) -> Vec<Rational> {
    let n = m.len();
    let chain = crate::graph::Graph {
        owners: vec![Owner::P2; n],
        succ: (0..n)
            .map(|s| match m.owner(s) {
                Owner::P1 => vec![policy[s].expect("policy covers P1 states")],
                Owner::P2 => m.succ(s).to_vec(),
            })
            .collect(),
    };
    let live = backward_reachable_in(&chain, &StateSet::full(n), target);
    let unknown: Vec<usize> = live.iter().filter(|&s| !target.contains(s)).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        pos[s] = i;
    }
    let mut sys = SparseSystem::new(unknown.len());
    for (i, &s) in unknown.iter().enumerate() {
        sys.add(i, i, &Rational::one());
        let mut rhs = Rational::zero();
        let row: Vec<(usize, Rational)> = match m.owner(s) {
            Owner::P1 => vec![(policy[s].unwrap(), Rational::one())],
            Owner::P2 => m.succ(s).iter().copied().zip(m.dist(s).unwrap().iter().cloned()).collect(),
        };
        for (t, p) in row {
            if target.contains(t) {
                rhs += p;
            } else if live.contains(t) {
                sys.add(i, pos[t], &-p);
            }
        }
        sys.set_rhs(i, rhs);
    }
    let x = sys.solve().expect("states that reach the target give a regular system");
    (0..n)
        .map(|s| {
            if target.contains(s) {
                Rational::one()
            } else if live.contains(s) {
                x[pos[s]].clone()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Exact maximal probabilities of reaching `target`, by policy iteration
/// from a shortest-path policy with exact linear solves.
pub fn max_reach_values(m: &Mdp, target: &StateSet) -> ValueVector {
    let n = m.len();
    let dist = distances_to(m, &StateSet::full(n), target);
    let mut policy: Vec<Option<usize>> = (0..n)
        .map(|s| {
            (m.owner(s) == Owner::P1).then(|| {
                *m.succ(s).iter().min_by_key(|&&t| dist[t].unwrap_or(usize::MAX)).expect("non-blocking")
            })
        })
        .collect();
    loop {
        let values = evaluate_policy(m, target, &policy);
        let mut improved = false;
        for s in 0..n {
            if m.owner(s) != Owner::P1 || target.contains(s) {
                continue;
            }
            let current = policy[s].unwrap();
            let best = m.succ(s).iter().copied().max_by(|&a, &b| values[a].cmp(&values[b])).unwrap();
            if values[best] > values[current] {
                policy[s] = Some(best);
                improved = true;
            }
        }
        if !improved {
            return ValueVector { values, strategy: policy };
        }
    }
}

/// Largest absolute Bellman residual of `v` for reaching `target`.
pub fn bellman_residual(m: &Mdp, target: &StateSet, v: &[Rational]) -> Rational {
    (0..m.len())
        .map(|s| {
            let rhs = if target.contains(s) {
                Rational::one()
            } else {
                match m.owner(s) {
                    Owner::P1 => m.succ(s).iter().map(|&t| v[t].clone()).max().unwrap(),
                    Owner::P2 => m.succ(s).iter().zip(m.dist(s).unwrap()).map(|(&t, p)| p * &v[t]).sum(),
                }
            };
            num::abs(rhs - &v[s])
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Partition of P1 edges into value-preserving and value-decreasing ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClassification {
    pub optimal: Vec<(usize, usize)>,
    pub not_optimal: Vec<(usize, usize)>,
}

impl EdgeClassification {
    pub fn is_optimal(&self, s: usize, t: usize) -> bool {
        self.optimal.binary_search(&(s, t)).is_ok()
    }
}

pub fn classify_edges(m: &Mdp, v: &ValueVector) -> EdgeClassification {
    let mut optimal = Vec::new();
    let mut not_optimal = Vec::new();
    for s in 0..m.len() {
        if m.owner(s) != Owner::P1 {
            continue;
        }
        for &t in m.succ(s) {
            if v.values[s] > v.values[t] {
                not_optimal.push((s, t));
            } else {
                optimal.push((s, t));
            }
        }
    }
    EdgeClassification { optimal, not_optimal }
}

/// Smallest `k` such that playing the optimal strategy of `v` for `k` steps
/// from `from` reaches `target` with probability greater than `c`.
pub fn horizon_for_threshold(m: &Mdp, v: &ValueVector, target: &StateSet, from: usize, c: &Rational) -> Result<usize, ReachError> {
    if *c >= v.values[from] {
        return Err(ReachError::ThresholdUnreachable {
            threshold: format_rational(c),
            value: format_rational(&v.values[from]),
        });
    }
    let n = m.len();
    let mut h: Vec<Rational> = (0..n).map(|s| if target.contains(s) { Rational::one() } else { Rational::zero() }).collect();
    let mut k = 0;
    while h[from] <= *c {
        h = (0..n)
            .map(|s| {
                if target.contains(s) {
                    Rational::one()
                } else {
                    match m.owner(s) {
                        Owner::P1 => h[v.strategy[s].unwrap()].clone(),
                        Owner::P2 => m.succ(s).iter().zip(m.dist(s).unwrap()).map(|(&t, p)| p * &h[t]).sum(),
                    }
                }
            })
            .collect();
        k += 1;
    }
    Ok(k)
}

/// Parity winning region of P1 and the sub-MDP it induces.
pub(crate) struct SureRegion {
    pub win: StateSet,
    pub sub: Option<SubMdp>,
    /// Memoryless winning strategy on the sub-MDP.
    pub lambda: Vec<Option<usize>>,
}

pub(crate) fn sure_region(m: &Mdp, p: PriorityView) -> SureRegion {
    let regions = solve_parity(&Game::from_mdp(m, p));
    let strat1 = regions.strat1(m);
    if regions.w1.is_empty() {
        return SureRegion { win: regions.w1, sub: None, lambda: Vec::new() };
    }
    let sub = sub_mdp(m, &regions.w1).expect("the P1 winning region is a P2 trap");
    let lambda = sub.to_parent.iter().map(|&s| strat1[s].and_then(|t| sub.from_parent(t))).collect();
    SureRegion { win: regions.w1, sub: Some(sub), lambda }
}

/// Result of solving S(p) ∧ AS(◇T) on a whole model.
pub(crate) struct AsReachSolution {
    /// States satisfying the objective.
    pub win: StateSet,
    /// Witness usable from any winning state, in the model's indices.
    pub witness: Option<StrategySpec>,
    /// The part of the witness played until the target is reached.
    pub reach: Option<MooreTable>,
    pub parity_win: StateSet,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum GadgetMem {
    Plain(usize),
    /// Left the P2 state with gadget memory; the copy taken is resolved from
    /// the next state.
    Pending(usize, usize),
    Done,
}

/// Solves S(p) ∧ AS(◇T) from every state: strip the parity-losing states,
/// then solve the Büchi∧parity gadget game on the rest.
pub(crate) fn solve_as_reach(m: &Mdp, p: PriorityView, target: &StateSet) -> Result<AsReachSolution, ReachError> {
    let region = sure_region(m, p);
    let Some(sub) = region.sub.as_ref() else {
        return Ok(AsReachSolution { win: StateSet::new(m.len()), witness: None, reach: None, parity_win: region.win });
    };
    let mw = &sub.mdp;
    let r = sub.project_set(target);
    let gadget = build_buchi_parity_game(mw, &r, p);
    let sol = solve_buchi_parity_game(&gadget);
    let win_sub = StateSet::from_iter(mw.len(), (0..mw.len()).filter(|&s| sol.wins(s)));
    if win_sub.is_empty() {
        return Ok(AsReachSolution { win: StateSet::new(m.len()), witness: None, reach: None, parity_win: region.win });
    }
    let strat = &sol.strategy;
    let lambda_p = &region.lambda;
    let resolve = |mem: &GadgetMem, t: usize| -> Option<usize> {
        match mem {
            GadgetMem::Plain(g) => Some(*g),
            GadgetMem::Pending(g1, s) => {
                let ci = gadget.circle_of(*s)?;
                let sq = gadget.square_of(*s)?;
                if strat.next(*g1, ci) == Some(t) {
                    Some(strat.update(*g1, ci))
                } else {
                    Some(strat.update(*g1, sq))
                }
            }
            GadgetMem::Done => None,
        }
    };
    let next = |mem: &GadgetMem, t: usize| -> Option<Distribution> {
        if r.contains(t) || *mem == GadgetMem::Done {
            return lambda_p[t].map(Distribution::dirac);
        }
        let g = resolve(mem, t)?;
        let choice = strat.next(g, t)?;
        debug_assert!(matches!(gadget.provenance[choice], Provenance::Original(_) | Provenance::Target(_)));
        Some(Distribution::dirac(choice))
    };
    let update = |mem: &GadgetMem, t: usize| -> Option<GadgetMem> {
        if r.contains(t) || *mem == GadgetMem::Done {
            return Some(GadgetMem::Done);
        }
        let g = strat.update(resolve(mem, t)?, t);
        Some(if mw.owner(t) == Owner::P2 { GadgetMem::Pending(g, t) } else { GadgetMem::Plain(g) })
    };
    let outer = materialize(mw, &win_sub, GadgetMem::Plain(0), next, update)?;
    let reach = outer.lift(sub);
    let spec = StrategySpec::Composite {
        construction: "sure-parity-as-reach".into(),
        outer: Box::new(StrategySpec::moore("buchi-parity-game", outer)),
        switches: vec![Switch {
            trigger: Trigger::Enter { states: r.to_vec() },
            inner: StrategySpec::moore("sure-parity", MooreTable::from_choices(lambda_p)),
        }],
    };
    Ok(AsReachSolution {
        win: sub.lift_set(&win_sub),
        witness: Some(spec.lift(sub)),
        reach: Some(reach),
        parity_win: region.win,
    })
}

/// Decides `s0 ⊨ S(p) ∧ AS(◇T)`.
pub fn decide_sure_parity_as_reach(m: &Mdp, s0: usize, p: PriorityView, target: &StateSet) -> Result<Decision, ReachError> {
    let sol = solve_as_reach(m, p, target)?;
    let mut trace = vec![stage("sure-parity-region", ids_json(m, &sol.parity_win))];
    if !sol.parity_win.contains(s0) {
        return Ok(Decision::no(format!("S({p}) fails at {}", m.id(s0)), trace));
    }
    trace.push(stage("as-reach-region", ids_json(m, &sol.win)));
    if !sol.win.contains(s0) {
        return Ok(Decision::no(format!("target not reachable almost surely under S({p}) from {}", m.id(s0)), trace));
    }
    Ok(Decision::yes(sol.witness.expect("winning states come with a witness"), trace))
}

/// The bit-tagged MDP used when the maximal probability equals the
/// threshold: layer 0 (target not yet seen) keeps only value-preserving P1
/// edges and the states that can still reach the target; layer 1 is a copy
/// of the model.
#[derive(Debug, Clone)]
pub struct ThresholdMdp {
    pub mdp: Mdp,
    /// Source state and bit of every state.
    pub origin: Vec<(usize, bool)>,
    pub layer0: Vec<Option<usize>>,
    pub layer1: Vec<usize>,
    pub init: usize,
    /// States of layer 0 removed because the target became unreachable.
    pub deleted: StateSet,
}

impl ThresholdMdp {
    pub fn index(&self, s: usize, bit: bool) -> Option<usize> {
        if bit {
            Some(self.layer1[s])
        } else {
            self.layer0[s]
        }
    }

    pub fn target(&self) -> StateSet {
        StateSet::from_iter(self.mdp.len(), self.layer1.iter().copied())
    }
}

pub fn build_reach_threshold_mdp(mw: &Mdp, target: &StateSet, v: &ValueVector, s0: usize) -> ThresholdMdp {
    let n = mw.len();
    let edges = classify_edges(mw, v);
    // layer-0 graph over source states (T states stand for their layer-1 copy)
    let pruned = crate::graph::Graph {
        owners: (0..n).map(|s| mw.owner(s)).collect(),
        succ: (0..n)
            .map(|s| {
                if target.contains(s) {
                    Vec::new()
                } else {
                    mw.succ(s)
                        .iter()
                        .copied()
                        .filter(|&t| mw.owner(s) == Owner::P2 || edges.is_optimal(s, t))
                        .collect()
                }
            })
            .collect(),
    };
    let can_reach = backward_reachable_in(&pruned, &StateSet::full(n), target);
    let deleted = StateSet::from_iter(n, (0..n).filter(|&s| !target.contains(s) && !can_reach.contains(s)));
    let mut states: Vec<State> = Vec::new();
    let mut origin = Vec::new();
    let mut layer0 = vec![None; n];
    for s in 0..n {
        if !target.contains(s) && !deleted.contains(s) {
            layer0[s] = Some(states.len());
            let st = mw.state(s);
            states.push(State { id: format!("({},0)", st.id), ..st.clone() });
            origin.push((s, false));
        }
    }
    let mut layer1 = vec![0; n];
    for s in 0..n {
        layer1[s] = states.len();
        let st = mw.state(s);
        states.push(State { id: format!("({},1)", st.id), ..st.clone() });
        origin.push((s, true));
    }
    let mut succ = vec![Vec::new(); states.len()];
    let mut dist: Vec<Option<Vec<Rational>>> = vec![None; states.len()];
    for s in 0..n {
        if let Some(x) = layer0[s] {
            let mut list = Vec::new();
            let mut probs = Vec::new();
            for (k, &t) in mw.succ(s).iter().enumerate() {
                let dest = if target.contains(t) { Some(layer1[t]) } else { layer0[t] };
                let Some(dest) = dest else { continue };
                match mw.owner(s) {
                    Owner::P1 => {
                        if edges.is_optimal(s, t) {
                            list.push(dest);
                        }
                    }
                    Owner::P2 => {
                        list.push(dest);
                        probs.push(mw.dist(s).unwrap()[k].clone());
                    }
                }
            }
            assert!(!list.is_empty(), "surviving layer-0 states keep a successor");
            if mw.owner(s) == Owner::P2 {
                let total: Rational = probs.iter().sum();
                dist[x] = Some(probs.into_iter().map(|p| p / &total).collect());
            }
            succ[x] = list;
        }
        let y = layer1[s];
        succ[y] = mw.succ(s).iter().map(|&t| layer1[t]).collect();
        dist[y] = mw.dist(s).map(|d| d.to_vec());
    }
    let init = if target.contains(s0) { layer1[s0] } else { layer0[s0].expect("initial state keeps a path to the target") };
    let mdp = Mdp::from_parts(states, succ, dist, Some(init)).expect("the bit-tagged construction yields a valid MDP");
    ThresholdMdp { mdp, origin, layer0, layer1, init, deleted }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum TrackMem {
    /// Memory of the bit-tagged witness and whether the target was seen
    /// before the current state.
    Track(usize, bool),
    Escaped,
}

/// Decides `s0 ⊨ S(p) ∧ P~c(◇T)` for `c ∈ [0,1)`.
pub fn decide_sure_parity_threshold_reach(
    m: &Mdp,
    s0: usize,
    p: PriorityView,
    target: &StateSet,
    cmp: Cmp,
    c: &Rational,
) -> Result<Decision, ReachError> {
    if *c < Rational::zero() || *c >= Rational::one() {
        return Err(ReachError::ThresholdRange(format_rational(c)));
    }
    let region = sure_region(m, p);
    let mut trace = vec![stage("sure-parity-region", ids_json(m, &region.win))];
    let Some(sub) = region.sub.as_ref().filter(|_| region.win.contains(s0)) else {
        return Ok(Decision::no(format!("S({p}) fails at {}", m.id(s0)), trace));
    };
    let mw = &sub.mdp;
    let s0w = sub.from_parent(s0).unwrap();
    let tw = sub.project_set(target);
    let v = max_reach_values(mw, &tw);
    let value = v.values[s0w].clone();
    trace.push(stage("max-reach-value", serde_json::Value::from(format_rational(&value))));
    let lambda_p = MooreTable::from_choices(&region.lambda);
    if value > *c {
        let k = horizon_for_threshold(mw, &v, &tw, s0w, c)?;
        trace.push(stage("horizon", serde_json::Value::from(k)));
        let spec = StrategySpec::Composite {
            construction: "sure-parity-threshold-reach".into(),
            outer: Box::new(StrategySpec::moore("optimal-reach", v.table())),
            switches: vec![Switch {
                trigger: Trigger::AfterSteps { steps: k as u64 },
                inner: StrategySpec::moore("sure-parity", lambda_p),
            }],
        };
        return Ok(Decision::yes(spec.lift(sub), trace));
    }
    if cmp == Cmp::Gt || value < *c {
        return Ok(Decision::no(
            format!("maximal probability {} under S({p}) does not satisfy {cmp} {}", format_rational(&value), format_rational(c)),
            trace,
        ));
    }
    if c.is_zero() {
        // P≥0 holds trivially; only the sure part matters
        return Ok(Decision::yes(StrategySpec::moore("sure-parity", lambda_p).lift(sub), trace));
    }
    let tm = build_reach_threshold_mdp(mw, &tw, &v, s0w);
    trace.push(stage("threshold-mdp", serde_json::json!({
        "states": tm.mdp.len(),
        "deleted": mw.ids_of(&tm.deleted),
    })));
    let inner = decide_sure_parity_as_reach(&tm.mdp, tm.init, p, &tm.target())?;
    trace.extend(inner.trace.iter().map(|st| Stage { name: format!("threshold-mdp/{}", st.name), detail: st.detail.clone() }));
    let Some(spec) = inner.witness else {
        return Ok(Decision::no(inner.reason.unwrap_or_default(), trace));
    };
    let model = std::sync::Arc::new(tm.mdp.clone());
    let flat = PreparedStrategy::new(model, &spec)?
        .to_moore(&StateSet::singleton(tm.mdp.len(), tm.init))?
        .expect("as-reach witnesses are finite-memory");
    let lam = &region.lambda;
    let here = |mem: &TrackMem, s: usize| -> Option<(usize, usize, bool)> {
        match mem {
            TrackMem::Track(mu, seen) => {
                let bit = *seen || tw.contains(s);
                tm.index(s, bit).map(|x| (*mu, x, bit))
            }
            TrackMem::Escaped => None,
        }
    };
    let next = |mem: &TrackMem, s: usize| -> Option<Distribution> {
        match here(mem, s) {
            Some((mu, x, _)) => flat.next_at(mu, x).map(|d| d.map_states(|y| tm.origin[y].0)),
            None => lam[s].map(Distribution::dirac),
        }
    };
    let update = |mem: &TrackMem, s: usize| -> Option<TrackMem> {
        match here(mem, s) {
            Some((mu, x, bit)) => flat.update_at(mu, x).map(|m2| TrackMem::Track(m2, bit)),
            None => Some(TrackMem::Escaped),
        }
    };
    let table = materialize(mw, &StateSet::singleton(mw.len(), s0w), TrackMem::Track(flat.m0, false), next, update)?;
    Ok(Decision::yes(StrategySpec::moore("threshold-reach-boundary", table).lift(sub), trace))
}

/// Values of `v` keyed by state id, for reports.
pub fn values_by_id(m: &Mdp, v: &ValueVector) -> HashMap<String, String> {
    (0..m.len()).map(|s| (m.id(s).to_string(), format_rational(&v.values[s]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::restrict;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn fig1_values() {
        let m = fixtures::fig1();
        let v = max_reach_values(&m, &m.set_of(&["c"]).unwrap());
        assert!(v.values.iter().all(|x| x.is_one()));
        let e = classify_edges(&m, &v);
        assert!(e.not_optimal.is_empty());
    }

    #[test]
    fn diamond_values() {
        let m = fixtures::diamond_even();
        let t = m.set_of(&["t"]).unwrap();
        let v = max_reach_values(&m, &t);
        let ix = |s| m.index_of(s).unwrap();
        assert_eq!(v.values[ix("s0")], r(1, 2));
        assert_eq!(v.values[ix("w")], r(0, 1));
        assert_eq!(v.values[ix("t")], r(1, 1));
        assert!(bellman_residual(&m, &t, &v.values).is_zero());
        let e = classify_edges(&m, &v);
        assert_eq!(e.not_optimal, vec![(ix("s0"), ix("w"))]);
    }

    #[test]
    fn horizons() {
        let m = fixtures::fig1();
        let t = m.set_of(&["c"]).unwrap();
        let a = m.index_of("a").unwrap();
        let mut v = max_reach_values(&m, &t);
        v.strategy[a] = m.index_of("b");
        assert_eq!(horizon_for_threshold(&m, &v, &t, a, &r(2, 3)).unwrap(), 4);
        assert_eq!(horizon_for_threshold(&m, &v, &t, m.index_of("c").unwrap(), &r(0, 1)).unwrap(), 0);
        assert!(horizon_for_threshold(&m, &v, &t, a, &r(1, 1)).is_err());

        let fig3 = fixtures::fig3();
        let abc = restrict(&fig3, &fig3.set_of(&["a", "b", "c"]).unwrap()).unwrap();
        let tc = abc.set_of(&["c"]).unwrap();
        let v = max_reach_values(&abc, &tc);
        assert_eq!(horizon_for_threshold(&abc, &v, &tc, abc.index_of("b").unwrap(), &r(1, 4)).unwrap(), 1);
    }

    #[test]
    fn as_reach_examples() {
        let fig1 = fixtures::fig1();
        let a = fig1.index_of("a").unwrap();
        let d = decide_sure_parity_as_reach(&fig1, a, PriorityView::P1, &fig1.set_of(&["c"]).unwrap()).unwrap();
        assert!(d.is_yes());

        let fig3 = fixtures::fig3();
        let abc = restrict(&fig3, &fig3.set_of(&["a", "b", "c"]).unwrap()).unwrap();
        let d = decide_sure_parity_as_reach(&abc, abc.index_of("a").unwrap(), PriorityView::P1, &abc.set_of(&["c"]).unwrap())
            .unwrap();
        assert!(!d.is_yes());

        let d = decide_sure_parity_as_reach(&fig3, fig3.index_of("a").unwrap(), PriorityView::P1, &fig3.all_states()).unwrap();
        assert!(d.is_yes());
    }

    #[test]
    fn threshold_examples() {
        let fig1 = fixtures::fig1();
        let a = fig1.index_of("a").unwrap();
        let c = fig1.set_of(&["c"]).unwrap();
        let d = decide_sure_parity_threshold_reach(&fig1, a, PriorityView::P1, &c, Cmp::Gt, &r(9, 10)).unwrap();
        assert!(d.is_yes());

        for (m, expect) in [(fixtures::diamond_odd(), false), (fixtures::diamond_even(), true)] {
            let t = m.set_of(&["t"]).unwrap();
            let d = decide_sure_parity_threshold_reach(&m, m.index_of("s0").unwrap(), PriorityView::P1, &t, Cmp::Ge, &r(1, 2))
                .unwrap();
            assert_eq!(d.is_yes(), expect);
        }
        for (m, expect) in [(fixtures::loop_odd(), false), (fixtures::loop_even(), true)] {
            let t = m.set_of(&["t"]).unwrap();
            let d = decide_sure_parity_threshold_reach(&m, m.index_of("s0").unwrap(), PriorityView::P1, &t, Cmp::Ge, &r(1, 2))
                .unwrap();
            assert_eq!(d.is_yes(), expect, "{:?}", d.reason);
            assert!(d.stage("threshold-mdp").is_some());
        }
    }

    #[test]
    fn threshold_mdp_on_diamond() {
        let m = fixtures::diamond_even();
        let t = m.set_of(&["t"]).unwrap();
        let v = max_reach_values(&m, &t);
        let s0 = m.index_of("s0").unwrap();
        let tm = build_reach_threshold_mdp(&m, &t, &v, s0);
        let x0 = tm.index(m.index_of("x").unwrap(), false).unwrap();
        let t1 = tm.index(m.index_of("t").unwrap(), true).unwrap();
        assert_eq!(tm.mdp.prob(x0, t1), r(1, 1));
        assert!(tm.index(m.index_of("w").unwrap(), false).is_none());
        assert_eq!(tm.mdp.succ(tm.init).len(), 1);
        // a target start goes straight to layer 1
        let tm = build_reach_threshold_mdp(&m, &t, &v, m.index_of("t").unwrap());
        assert_eq!(tm.origin[tm.init], (m.index_of("t").unwrap(), true));
    }
}
