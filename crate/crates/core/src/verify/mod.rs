//! Independent checking of strategies: sure parity by lasso search on the
//! strategy product, exact objective probabilities by BSCC analysis, and
//! seeded simulation for strategies with unbounded memory.

mod sim;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::components::{extremal_states, Parity};
use crate::graph::{is_end_component, is_nontrivial, sccs_in, Graph, StateSet};
use crate::linalg::SparseSystem;
use crate::model::{format_rational, Mdp, Owner, PriorityView, Rational};
use crate::strategies::spec::{LimitSureSpec, UgecSpec};
use crate::strategies::{MooreTable, PreparedStrategy, StrategyError, StrategySpec, Trigger};

pub use sim::{simulate, RoundStat, RunSummary, SimReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// The probabilistic objective whose probability is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Parity(PriorityView),
    /// Both parity objectives at once.
    Both,
    Reach(StateSet),
}

/// A play `stem · cycle^ω` given by state indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
    pub max_priority: u32,
}

impl Lasso {
    /// `stem | cycle` as state ids.
    pub fn display(&self, m: &Mdp) -> String {
        let ids = |v: &[usize]| v.iter().map(|&s| m.id(s)).collect::<Vec<_>>().join(" ");
        if self.stem.is_empty() {
            format!("| {}", ids(&self.cycle))
        } else {
            format!("{} | {}", ids(&self.stem), ids(&self.cycle))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SureVerdict {
    Holds,
    Violated { lasso: Lasso },
}

impl SureVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SureVerdict::Holds)
    }
}

/// What a product node does.
enum Step<K> {
    Moves(Vec<(usize, Rational)>, K),
    /// A switch fires here; the rest of the play is analysed separately.
    Sink(usize),
}

/// A finite product of the model with some strategy state; node 0 is the
/// start.
struct Product {
    state: Vec<usize>,
    succ: Vec<Vec<(usize, Rational)>>,
    sink: Vec<Option<usize>>,
}

impl Product {
    fn len(&self) -> usize {
        self.state.len()
    }

    fn graph(&self) -> Graph {
        Graph {
            owners: vec![Owner::P2; self.len()],
            succ: self.succ.iter().map(|row| row.iter().map(|(t, _)| *t).collect()).collect(),
        }
    }
}

fn explore<K, F>(s0: usize, k0: K, step: F) -> Result<Product, StrategyError>
where
    K: Clone + Eq + Hash,
    F: Fn(&K, usize) -> Result<Step<K>, StrategyError>,
{
    let mut index: HashMap<(usize, K), usize> = HashMap::new();
    let mut keys: Vec<K> = Vec::new();
    let mut p = Product { state: Vec::new(), succ: Vec::new(), sink: Vec::new() };
    let mut queue = VecDeque::new();
    index.insert((s0, k0.clone()), 0);
    p.state.push(s0);
    keys.push(k0);
    queue.push_back(0);
    while let Some(v) = queue.pop_front() {
        let s = p.state[v];
        let row = match step(&keys[v], s)? {
            Step::Sink(j) => {
                p.succ.push(Vec::new());
                p.sink.push(Some(j));
                debug_assert_eq!(p.succ.len(), v + 1);
                continue;
            }
            Step::Moves(dist, k2) => dist
                .into_iter()
                .map(|(t, pr)| {
                    let id = *index.entry((t, k2.clone())).or_insert_with(|| {
                        p.state.push(t);
                        keys.push(k2.clone());
                        queue.push_back(p.state.len() - 1);
                        p.state.len() - 1
                    });
                    (id, pr)
                })
                .collect(),
        };
        p.succ.push(row);
        p.sink.push(None);
    }
    Ok(p)
}

fn model_moves(m: &Mdp, table: &MooreTable, mem: usize, s: usize) -> Result<Vec<(usize, Rational)>, StrategyError> {
    match m.owner(s) {
        Owner::P1 => table
            .next_at(mem, s)
            .map(|d| d.entries().to_vec())
            .ok_or(StrategyError::Undefined { state: s, memory: Some(mem) }),
        Owner::P2 => Ok(m.succ(s).iter().copied().zip(m.dist(s).unwrap().iter().cloned()).collect()),
    }
}

fn moore_product(m: &Mdp, table: &MooreTable, s0: usize) -> Result<Product, StrategyError> {
    table.check(m)?;
    explore(s0, table.m0, |&mem, s| {
        let moves = model_moves(m, table, mem, s)?;
        let m2 = table.update_at(mem, s).ok_or(StrategyError::Undefined { state: s, memory: Some(mem) })?;
        Ok(Step::Moves(moves, m2))
    })
}

/// Looks for a reachable cycle of the product whose maximal priority is odd.
fn find_odd_cycle(p: &Product, prio: &[u32]) -> Option<Lasso> {
    let g = p.graph();
    let mut odd: Vec<u32> = p.state.iter().map(|&s| prio[s]).filter(|q| q % 2 == 1).collect();
    odd.sort_unstable();
    odd.dedup();
    for &q in odd.iter().rev() {
        let domain = StateSet::from_iter(p.len(), (0..p.len()).filter(|&v| prio[p.state[v]] <= q));
        for comp in sccs_in(&g, &domain) {
            if !is_nontrivial(&g, &comp) {
                continue;
            }
            let Some(top) = comp.iter().find(|&v| prio[p.state[v]] == q) else { continue };
            let stem = bfs_path(&g, &StateSet::full(p.len()), 0, top);
            let mut cycle = vec![top];
            let first = *g.succ[top].iter().find(|&&w| comp.contains(w)).expect("nontrivial component");
            if first != top {
                let path = bfs_path(&g, &comp, first, top);
                cycle.extend(&path[..path.len() - 1]);
            }
            return Some(Lasso {
                stem: stem[..stem.len() - 1].iter().map(|&v| p.state[v]).collect(),
                cycle: cycle.iter().map(|&v| p.state[v]).collect(),
                max_priority: q,
            });
        }
    }
    None
}

/// Shortest path `from → to` inside `domain` (both ends included).
fn bfs_path(g: &Graph, domain: &StateSet, from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; g.succ.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &g.succ[v] {
            if domain.contains(w) && parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// Checks that every play from `s0` consistent with `table` satisfies the
/// parity objective of `p`, whatever P2 does.
pub fn check_sure_parity(m: &Mdp, table: &MooreTable, p: PriorityView, s0: usize) -> Result<SureVerdict, StrategyError> {
    let prod = moore_product(m, table, s0)?;
    Ok(match find_odd_cycle(&prod, &m.priorities(p)) {
        None => SureVerdict::Holds,
        Some(lasso) => SureVerdict::Violated { lasso },
    })
}

/// Value of each product node: absorbing classes get `terminal` (sinks and
/// BSCCs), everything else solves the usual linear system.
fn absorption(p: &Product, terminal: impl Fn(&[usize]) -> Vec<Rational>) -> Vec<Rational> {
    let g = p.graph();
    let n = p.len();
    let mut value: Vec<Option<Rational>> = vec![None; n];
    for comp in sccs_in(&g, &StateSet::full(n)) {
        let closed = comp.iter().all(|v| g.succ[v].iter().all(|&w| comp.contains(w)));
        if closed {
            let members = comp.to_vec();
            for (v, x) in members.iter().zip(terminal(&members)) {
                value[*v] = Some(x);
            }
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&v| value[v].is_none()).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in transient.iter().enumerate() {
        pos[v] = i;
    }
    let mut sys = SparseSystem::new(transient.len());
    for (i, &v) in transient.iter().enumerate() {
        sys.add(i, i, &Rational::one());
        let mut rhs = Rational::zero();
        for (w, pr) in &p.succ[v] {
            match &value[*w] {
                Some(x) => rhs += pr * x,
                None => sys.add(i, pos[*w], &-pr),
            }
        }
        sys.set_rhs(i, rhs);
    }
    let x = sys.solve().expect("transient part of a finite chain");
    (0..n).map(|v| value[v].clone().unwrap_or_else(|| x[pos[v]].clone())).collect()
}

fn class_is_good(m: &Mdp, states: impl Iterator<Item = usize> + Clone, objective: &Objective) -> bool {
    let even = |view| states.clone().map(|s| m.priority(view, s)).max().unwrap_or(0) % 2 == 0;
    match objective {
        Objective::Parity(view) => even(*view),
        Objective::Both => even(PriorityView::P1) && even(PriorityView::P2),
        Objective::Reach(t) => states.clone().any(|s| t.contains(s)),
    }
}

/// Exact probability of `objective` from `s0` under a finite-memory strategy.
pub fn exact_parity_probability(m: &Mdp, table: &MooreTable, s0: usize, objective: &Objective) -> Result<Rational, StrategyError> {
    let prod = match objective {
        Objective::Reach(t) => {
            table.check(m)?;
            // stop at the target
            explore(s0, table.m0, |&mem, s| {
                if t.contains(s) {
                    return Ok(Step::Sink(0));
                }
                let moves = model_moves(m, table, mem, s)?;
                let m2 = table.update_at(mem, s).ok_or(StrategyError::Undefined { state: s, memory: Some(mem) })?;
                Ok(Step::Moves(moves, m2))
            })?
        }
        _ => moore_product(m, table, s0)?,
    };
    let values = absorption(&prod, |members| {
        let good = if prod.sink[members[0]].is_some() {
            true
        } else {
            class_is_good(m, members.iter().map(|&v| prod.state[v]), objective)
        };
        vec![if good { Rational::one() } else { Rational::zero() }; members.len()]
    });
    Ok(values[0].clone())
}

/// Result of verifying a strategy spec from one start state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub sure: SureVerdict,
    /// Probability of the objective, or a lower bound on it when `exact` is
    /// false.
    #[serde(serialize_with = "ser_rational")]
    pub probability: Rational,
    pub exact: bool,
    pub method: String,
    pub notes: Vec<String>,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sure = match &self.sure {
            SureVerdict::Holds => "holds".to_string(),
            SureVerdict::Violated { lasso } => format!("violated (max priority {})", lasso.max_priority),
        };
        let rel = if self.exact { "=" } else { ">=" };
        write!(f, "sure: {sure}; probability {rel} {} [{}]", format_rational(&self.probability), self.method)
    }
}

/// Verifies `spec` from `s0`: the sure objective for `sure_view` and the
/// probability of `objective`.
///
/// Finite-memory specs are flattened and checked exactly. A composite whose
/// outer part is finite-memory is checked exactly up to its switches; each
/// switch target is verified from every state where it can fire, and the
/// probability combines both parts. Counter strategies are checked through
/// the structural facts their correctness rests on and contribute their
/// guaranteed lower bound.
pub fn verify_spec(
    m: &Arc<Mdp>,
    spec: &StrategySpec,
    s0: usize,
    sure_view: PriorityView,
    objective: &Objective,
) -> Result<VerifyReport, VerifyError> {
    if spec.is_finite_memory() {
        let table = PreparedStrategy::new(m.clone(), spec)?
            .to_moore(&StateSet::singleton(m.len(), s0))?
            .expect("finite-memory spec");
        let sure = check_sure_parity(m, &table, sure_view, s0)?;
        let probability = exact_parity_probability(m, &table, s0, objective)?;
        return Ok(VerifyReport { sure, probability, exact: true, method: "exact".into(), notes: Vec::new() });
    }
    match spec {
        StrategySpec::Composite { outer, switches, .. } => {
            if !outer.is_finite_memory() {
                return Err(VerifyError::Unsupported("composite with an unbounded-memory outer part".into()));
            }
            let outer_table = PreparedStrategy::new(m.clone(), outer)?
                .to_moore(&StateSet::singleton(m.len(), s0))?
                .expect("finite-memory outer part");
            outer_table.check(m)?;
            let triggers: Vec<(StateSet, Option<u64>)> = switches
                .iter()
                .map(|sw| match &sw.trigger {
                    Trigger::Enter { states } => (StateSet::from_iter(m.len(), states.iter().copied()), None),
                    Trigger::AfterSteps { steps } => (StateSet::new(m.len()), Some(*steps)),
                })
                .collect();
            let cap = triggers.iter().filter_map(|t| t.1).max().unwrap_or(0);
            let reach_target = match objective {
                Objective::Reach(t) => Some(t.clone()),
                _ => None,
            };
            let prod = explore(s0, (outer_table.m0, 0u64), |&(mem, t), s| {
                if reach_target.as_ref().is_some_and(|r| r.contains(s)) {
                    return Ok(Step::Sink(usize::MAX));
                }
                if let Some(j) = triggers.iter().position(|(set, k)| set.contains(s) || k.is_some_and(|k| t >= k)) {
                    return Ok(Step::Sink(j));
                }
                let moves = model_moves(m, &outer_table, mem, s)?;
                let m2 = outer_table.update_at(mem, s).ok_or(StrategyError::Undefined { state: s, memory: Some(mem) })?;
                Ok(Step::Moves(moves, (m2, (t + 1).min(cap))))
            })?;
            let mut notes = Vec::new();
            let mut sure = match find_odd_cycle(&prod, &m.priorities(sure_view)) {
                None => SureVerdict::Holds,
                Some(lasso) => SureVerdict::Violated { lasso },
            };
            let mut exact = true;
            let mut inner: HashMap<(usize, usize), Rational> = HashMap::new();
            for v in 0..prod.len() {
                let Some(j) = prod.sink[v] else { continue };
                let s = prod.state[v];
                if j == usize::MAX || inner.contains_key(&(j, s)) {
                    continue;
                }
                let r = verify_spec(m, &switches[j].inner, s, sure_view, objective)?;
                if !r.sure.holds() && sure.holds() {
                    sure = r.sure.clone();
                    notes.push(format!("switch {j} fails from {}", m.id(s)));
                }
                exact &= r.exact;
                if !r.notes.is_empty() {
                    notes.extend(r.notes.iter().map(|n| format!("switch {j} from {}: {n}", m.id(s))));
                }
                inner.insert((j, s), r.probability);
            }
            let values = absorption(&prod, |members| {
                let v0 = members[0];
                let x = match prod.sink[v0] {
                    Some(usize::MAX) => Rational::one(),
                    Some(j) => inner[&(j, prod.state[v0])].clone(),
                    None => {
                        if class_is_good(m, members.iter().map(|&v| prod.state[v]), objective) {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    }
                };
                vec![x; members.len()]
            });
            notes.dedup();
            Ok(VerifyReport { sure, probability: values[0].clone(), exact, method: "composite".into(), notes })
        }
        StrategySpec::Ugec { params, .. } => verify_ugec(m, params, s0, sure_view, objective),
        StrategySpec::LimitSure { params, .. } => verify_limit_sure(m, params, s0, sure_view, objective),
        StrategySpec::Moore { .. } => unreachable!("Moore specs are finite-memory"),
    }
}

fn counter_objective_ok(sure_view: PriorityView, objective: &Objective) -> Result<(), VerifyError> {
    if sure_view != PriorityView::P1 || matches!(objective, Objective::Reach(_) | Objective::Parity(PriorityView::P1)) {
        return Err(VerifyError::Unsupported("counter strategies are checked for S(p1) with a p2 objective".into()));
    }
    Ok(())
}

/// Checks shared by both counter strategies: `C` and `D ⊆ C` are
/// end-components, `d_max_even` is `D^max_even(p1)`, and the randomized
/// strategy stays in `C`, stays in `D` once there, and ensures p1 ∧ p2 with
/// probability one from every state of `C`.
fn check_rounds_part(m: &Mdp, component: &[usize], sub: &[usize], d_max_even: &[usize], lambda2: &MooreTable) -> Vec<String> {
    let mut problems = Vec::new();
    let c = StateSet::from_iter(m.len(), component.iter().copied());
    let d = StateSet::from_iter(m.len(), sub.iter().copied());
    if !is_end_component(m, &c) {
        problems.push("component is not an end-component".into());
    }
    if !d.is_subset(&c) || !is_end_component(m, &d) {
        problems.push("sub-component is not an end-component inside the component".into());
    }
    let dmax = extremal_states(m, &d, PriorityView::P1, Parity::Even);
    if dmax.is_empty() || dmax != StateSet::from_iter(m.len(), d_max_even.iter().copied()) {
        problems.push("round target differs from the dominating even states of the sub-component".into());
    }
    if lambda2.memory != 1 {
        problems.push("randomized strategy is not memoryless".into());
        return problems;
    }
    for s in c.iter().filter(|&s| m.owner(s) == Owner::P1) {
        let Some(dist) = lambda2.next_at(0, s) else {
            problems.push(format!("randomized strategy undefined at {}", m.id(s)));
            continue;
        };
        let home = if d.contains(s) { &d } else { &c };
        if dist.support().any(|t| !home.contains(t)) {
            problems.push(format!("randomized strategy leaves its region at {}", m.id(s)));
        }
    }
    if problems.is_empty() {
        for s in c.iter() {
            match exact_parity_probability(m, lambda2, s, &Objective::Both) {
                Ok(p) if p.is_one() => {}
                Ok(p) => problems.push(format!("randomized strategy wins both objectives from {} with probability {}", m.id(s), format_rational(&p))),
                Err(e) => problems.push(e.to_string()),
            }
        }
    }
    problems
}

fn violation_note(problems: Vec<String>) -> Result<(), VerifyError> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(VerifyError::Strategy(StrategyError::Malformed(problems.join("; "))))
    }
}

fn verify_ugec(m: &Arc<Mdp>, params: &UgecSpec, s0: usize, sure_view: PriorityView, objective: &Objective) -> Result<VerifyReport, VerifyError> {
    counter_objective_ok(sure_view, objective)?;
    let c = StateSet::from_iter(m.len(), params.component.iter().copied());
    if !c.contains(s0) {
        return Err(VerifyError::Strategy(StrategyError::Undefined { state: s0, memory: None }));
    }
    let mut problems = check_rounds_part(m, &params.component, &params.sub_component, &params.d_max_even, &params.lambda2);
    let cmax = extremal_states(m, &c, PriorityView::P1, Parity::Even);
    if cmax.is_empty() || cmax != StateSet::from_iter(m.len(), params.c_max_even.iter().copied()) {
        problems.push("recovery target differs from the dominating even states of the component".into());
    }
    let mut sure = SureVerdict::Holds;
    if let Err(e) = params.lambda1.check(m) {
        problems.push(e.to_string());
    } else {
        for s in c.iter() {
            let prod = moore_product(m, &params.lambda1, s)?;
            if prod.state.iter().any(|&t| !c.contains(t)) {
                problems.push(format!("recovery strategy leaves the component from {}", m.id(s)));
            }
            if let Some(lasso) = find_odd_cycle(&prod, &m.priorities(PriorityView::P1)) {
                sure = SureVerdict::Violated { lasso };
            }
            let hit = exact_parity_probability(m, &params.lambda1, s, &Objective::Reach(cmax.clone()))?;
            if !hit.is_one() {
                problems.push(format!("recovery reaches its target from {} with probability {}", m.id(s), format_rational(&hit)));
            }
        }
    }
    violation_note(problems)?;
    Ok(VerifyReport {
        sure,
        probability: Rational::one(),
        exact: false,
        method: "counter-structure".into(),
        notes: vec!["almost-sure by the round schedule; see simulation for the round invariant".into()],
    })
}

fn verify_limit_sure(
    m: &Arc<Mdp>,
    params: &LimitSureSpec,
    s0: usize,
    sure_view: PriorityView,
    objective: &Objective,
) -> Result<VerifyReport, VerifyError> {
    counter_objective_ok(sure_view, objective)?;
    let c = StateSet::from_iter(m.len(), params.component.iter().copied());
    if !c.contains(s0) {
        return Err(VerifyError::Strategy(StrategyError::Undefined { state: s0, memory: None }));
    }
    let mut problems = check_rounds_part(m, &params.component, &params.sub_component, &params.d_max_even, &params.lambda2);
    if params.epsilon <= Rational::zero() || params.epsilon > Rational::one() {
        problems.push("epsilon outside (0,1]".into());
    }
    let mut sure = SureVerdict::Holds;
    if let Err(e) = params.lambda1.check(m) {
        problems.push(e.to_string());
    } else {
        for s in c.iter() {
            if let SureVerdict::Violated { lasso } = check_sure_parity(m, &params.lambda1, PriorityView::P1, s)? {
                sure = SureVerdict::Violated { lasso };
            }
        }
    }
    violation_note(problems)?;
    let half = Rational::new(1.into(), 2.into());
    Ok(VerifyReport {
        sure,
        probability: Rational::one() - &params.epsilon * half,
        exact: false,
        method: "counter-structure".into(),
        notes: vec![format!("never switching has probability at least 1 - ε/2 with ε = {}", format_rational(&params.epsilon))],
    })
}
