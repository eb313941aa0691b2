//! Serializable strategy recipes and their runtime instantiation.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::counter::{HitSchedule, LimitSureShared, LimitSureStrategy, Schedule, ScheduleKind, UgecShared, UgecStrategy};
use super::moore::{materialize, MooreRunner, MooreTable};
use super::{Distribution, Event, Initialized, Strategy, StrategyError};
use crate::graph::StateSet;
use crate::model::{rational_string, Mdp, Rational, SubMdp};

/// Parameters of the end-component strategy `λ_C`. All state lists are
/// indices of the model the spec belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UgecSpec {
    pub component: Vec<usize>,
    /// Sub-component `D` on which the randomized strategy settles.
    pub sub_component: Vec<usize>,
    pub d_max_even: Vec<usize>,
    pub c_max_even: Vec<usize>,
    /// Memoryless randomized strategy ensuring p1 ∧ p2 almost surely.
    pub lambda2: MooreTable,
    /// Finite-memory strategy for S(p1) ∧ AS(◇ c_max_even) inside the component.
    pub lambda1: MooreTable,
}

/// Parameters of the limit-sure strategy `λ_{ε,C}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSureSpec {
    pub component: Vec<usize>,
    pub sub_component: Vec<usize>,
    pub d_max_even: Vec<usize>,
    #[serde(with = "rational_string")]
    pub epsilon: Rational,
    pub lambda2: MooreTable,
    /// Memoryless strategy winning S(p1) from every state it may be switched on.
    pub lambda1: MooreTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "on", rename_all = "snake_case")]
pub enum Trigger {
    /// Fires when the current state belongs to the set.
    Enter { states: Vec<usize> },
    /// Fires at the state reached after this many moves.
    AfterSteps { steps: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub trigger: Trigger,
    pub inner: StrategySpec,
}

/// A replayable strategy recipe. `construction` names the result the
/// strategy is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    Moore { construction: String, table: MooreTable },
    Ugec { construction: String, params: UgecSpec },
    LimitSure { construction: String, params: LimitSureSpec },
    /// Plays `outer` until the first trigger fires (checked in order at every
    /// visited state), then a fresh instance of that switch's inner strategy
    /// forever.
    Composite { construction: String, outer: Box<StrategySpec>, switches: Vec<Switch> },
}

impl StrategySpec {
    pub fn construction(&self) -> &str {
        match self {
            StrategySpec::Moore { construction, .. }
            | StrategySpec::Ugec { construction, .. }
            | StrategySpec::LimitSure { construction, .. }
            | StrategySpec::Composite { construction, .. } => construction,
        }
    }

    pub fn is_finite_memory(&self) -> bool {
        match self {
            StrategySpec::Moore { .. } => true,
            StrategySpec::Ugec { .. } | StrategySpec::LimitSure { .. } => false,
            StrategySpec::Composite { outer, switches, .. } => {
                outer.is_finite_memory() && switches.iter().all(|s| s.inner.is_finite_memory())
            }
        }
    }

    pub fn moore(construction: impl Into<String>, table: MooreTable) -> StrategySpec {
        StrategySpec::Moore { construction: construction.into(), table }
    }

    /// Re-indexes a spec built on a sub-MDP into the parent's state space.
    pub fn lift(&self, sub: &SubMdp) -> StrategySpec {
        let ids = |v: &[usize]| v.iter().map(|&s| sub.to_parent[s]).collect::<Vec<_>>();
        match self {
            StrategySpec::Moore { construction, table } => {
                StrategySpec::Moore { construction: construction.clone(), table: table.lift(sub) }
            }
            StrategySpec::Ugec { construction, params } => StrategySpec::Ugec {
                construction: construction.clone(),
                params: UgecSpec {
                    component: ids(&params.component),
                    sub_component: ids(&params.sub_component),
                    d_max_even: ids(&params.d_max_even),
                    c_max_even: ids(&params.c_max_even),
                    lambda2: params.lambda2.lift(sub),
                    lambda1: params.lambda1.lift(sub),
                },
            },
            StrategySpec::LimitSure { construction, params } => StrategySpec::LimitSure {
                construction: construction.clone(),
                params: LimitSureSpec {
                    component: ids(&params.component),
                    sub_component: ids(&params.sub_component),
                    d_max_even: ids(&params.d_max_even),
                    epsilon: params.epsilon.clone(),
                    lambda2: params.lambda2.lift(sub),
                    lambda1: params.lambda1.lift(sub),
                },
            },
            StrategySpec::Composite { construction, outer, switches } => StrategySpec::Composite {
                construction: construction.clone(),
                outer: Box::new(outer.lift(sub)),
                switches: switches
                    .iter()
                    .map(|sw| Switch {
                        trigger: match &sw.trigger {
                            Trigger::Enter { states } => Trigger::Enter { states: ids(states) },
                            t @ Trigger::AfterSteps { .. } => t.clone(),
                        },
                        inner: sw.inner.lift(sub),
                    })
                    .collect(),
            },
        }
    }
}

/// A spec together with the ids of the model it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDocument {
    pub states: Vec<String>,
    pub strategy: StrategySpec,
}

impl StrategyDocument {
    pub fn new(m: &Mdp, strategy: StrategySpec) -> StrategyDocument {
        StrategyDocument { states: m.states().iter().map(|s| s.id.clone()).collect(), strategy }
    }

    /// Checks that the document was produced for `m` (same state ids in the
    /// same order).
    pub fn bind(&self, m: &Mdp) -> Result<&StrategySpec, StrategyError> {
        let ids: Vec<&str> = m.states().iter().map(|s| s.id.as_str()).collect();
        if ids.len() != self.states.len() || ids.iter().zip(&self.states).any(|(a, b)| *a != b) {
            return Err(StrategyError::Malformed("strategy was built for a different model".into()));
        }
        Ok(&self.strategy)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum PreparedTrigger {
    Enter(StateSet),
    AfterSteps(u64),
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Moore(Arc<MooreTable>),
    Ugec(Arc<UgecShared>),
    LimitSure(Arc<LimitSureShared>),
    Composite { outer: Box<Node>, switches: Arc<Vec<(PreparedTrigger, Node)>> },
}

/// A spec validated against a model, with shared schedule caches; cheap to
/// instantiate any number of times.
#[derive(Debug, Clone)]
pub struct PreparedStrategy {
    model: Arc<Mdp>,
    spec: StrategySpec,
    node: Node,
}

fn set_of(m: &Mdp, ids: &[usize]) -> Result<StateSet, StrategyError> {
    if let Some(&s) = ids.iter().find(|&&s| s >= m.len()) {
        return Err(StrategyError::Malformed(format!("state index {s} out of range")));
    }
    Ok(StateSet::from_iter(m.len(), ids.iter().copied()))
}

fn prepare(model: &Arc<Mdp>, spec: &StrategySpec) -> Result<Node, StrategyError> {
    Ok(match spec {
        StrategySpec::Moore { table, .. } => {
            table.check(model)?;
            Node::Moore(Arc::new(table.clone()))
        }
        StrategySpec::Ugec { params, .. } => {
            params.lambda1.check(model)?;
            params.lambda2.check(model)?;
            if params.lambda2.memory != 1 {
                return Err(StrategyError::Malformed("lambda2 must be memoryless".into()));
            }
            let component = set_of(model, &params.component)?;
            let d_max_even = set_of(model, &params.d_max_even)?;
            let hits = HitSchedule::new(model, &params.lambda2, &component, &d_max_even)?;
            Node::Ugec(Arc::new(UgecShared {
                model: model.clone(),
                component,
                d_max_even,
                c_max_even: set_of(model, &params.c_max_even)?,
                lambda2: Arc::new(params.lambda2.clone()),
                lambda1: Arc::new(params.lambda1.clone()),
                schedule: Arc::new(Mutex::new(Schedule::new(ScheduleKind::Ugec, hits))),
            }))
        }
        StrategySpec::LimitSure { params, .. } => {
            params.lambda1.check(model)?;
            params.lambda2.check(model)?;
            if params.lambda2.memory != 1 || params.lambda1.memory != 1 {
                return Err(StrategyError::Malformed("limit-sure components must be memoryless".into()));
            }
            if params.epsilon <= Rational::from_integer(0.into()) || params.epsilon > Rational::from_integer(1.into()) {
                return Err(StrategyError::Malformed("epsilon must lie in (0,1]".into()));
            }
            let component = set_of(model, &params.component)?;
            let d_max_even = set_of(model, &params.d_max_even)?;
            let hits = HitSchedule::new(model, &params.lambda2, &component, &d_max_even)?;
            Node::LimitSure(Arc::new(LimitSureShared {
                model: model.clone(),
                component,
                d_max_even,
                epsilon: params.epsilon.clone(),
                lambda2: Arc::new(params.lambda2.clone()),
                lambda1: Arc::new(params.lambda1.clone()),
                schedule: Arc::new(Mutex::new(Schedule::new(
                    ScheduleKind::LimitSure(params.epsilon.clone()),
                    hits,
                ))),
            }))
        }
        StrategySpec::Composite { outer, switches, .. } => {
            let outer = Box::new(prepare(model, outer)?);
            let switches = switches
                .iter()
                .map(|sw| {
                    let trigger = match &sw.trigger {
                        Trigger::Enter { states } => PreparedTrigger::Enter(set_of(model, states)?),
                        Trigger::AfterSteps { steps } => PreparedTrigger::AfterSteps(*steps),
                    };
                    Ok((trigger, prepare(model, &sw.inner)?))
                })
                .collect::<Result<Vec<_>, StrategyError>>()?;
            Node::Composite { outer, switches: Arc::new(switches) }
        }
    })
}

fn instantiate(model: &Arc<Mdp>, node: &Node) -> Box<dyn Strategy> {
    match node {
        Node::Moore(t) => Box::new(MooreRunner::new(model.clone(), t.clone())),
        Node::Ugec(sh) => Box::new(UgecStrategy::new(sh.clone())),
        Node::LimitSure(sh) => Box::new(LimitSureStrategy::new(sh.clone())),
        Node::Composite { outer, switches } => Box::new(CompositeRunner {
            model: model.clone(),
            outer: instantiate(model, outer),
            switches: switches.clone(),
            steps: 0,
            inner: None,
            record: false,
            events: Vec::new(),
        }),
    }
}

impl PreparedStrategy {
    pub fn new(model: Arc<Mdp>, spec: &StrategySpec) -> Result<PreparedStrategy, StrategyError> {
        let node = prepare(&model, spec)?;
        Ok(PreparedStrategy { model, spec: spec.clone(), node })
    }

    pub fn model(&self) -> &Arc<Mdp> {
        &self.model
    }

    pub fn spec(&self) -> &StrategySpec {
        &self.spec
    }

    pub fn instance(&self) -> Box<dyn Strategy> {
        instantiate(&self.model, &self.node)
    }

    /// The initialized strategy `λ[ρ]`.
    pub fn initialized(&self, prefix: &[usize]) -> Result<Box<dyn Strategy>, StrategyError> {
        if prefix.is_empty() {
            return Ok(self.instance());
        }
        Ok(Box::new(Initialized::new(self.instance(), self.instance(), prefix)?))
    }

    /// Flattens a finite-memory spec into one explicit Moore table covering
    /// plays that start in `starts`. `None` for specs with counter parts.
    pub fn to_moore(&self, starts: &StateSet) -> Result<Option<MooreTable>, StrategyError> {
        if !self.spec.is_finite_memory() {
            return Ok(None);
        }
        flatten(&self.model, &self.node, starts).map(Some)
    }

    /// Horizon of round `i` for a bare counter strategy.
    pub fn round_horizon(&self, i: u64) -> Result<Option<usize>, StrategyError> {
        match &self.node {
            Node::Ugec(sh) => sh.schedule.lock().expect("schedule lock poisoned").horizon(i).map(Some),
            Node::LimitSure(sh) => sh.schedule.lock().expect("schedule lock poisoned").horizon(i).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum FlatMem {
    Outer(usize, u64),
    Inner(usize, usize),
}

fn flatten(model: &Arc<Mdp>, node: &Node, starts: &StateSet) -> Result<MooreTable, StrategyError> {
    match node {
        Node::Moore(t) => Ok((**t).clone()),
        Node::Composite { outer, switches } => {
            let n = model.len();
            let outer_t = flatten(model, outer, starts)?;
            let all = StateSet::full(n);
            let inners = switches
                .iter()
                .map(|(_, node)| flatten(model, node, &all))
                .collect::<Result<Vec<_>, _>>()?;
            let cap = switches
                .iter()
                .filter_map(|(t, _)| match t {
                    PreparedTrigger::AfterSteps(k) => Some(*k),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            let effective = |mem: &FlatMem, s: usize| -> FlatMem {
                if let FlatMem::Outer(_, t) = mem {
                    for (j, (trig, _)) in switches.iter().enumerate() {
                        let fires = match trig {
                            PreparedTrigger::Enter(set) => set.contains(s),
                            PreparedTrigger::AfterSteps(k) => t >= k,
                        };
                        if fires {
                            return FlatMem::Inner(j, inners[j].m0);
                        }
                    }
                }
                mem.clone()
            };
            materialize(
                model,
                starts,
                FlatMem::Outer(outer_t.m0, 0),
                |mem, s| match effective(mem, s) {
                    FlatMem::Outer(m, _) => outer_t.next_at(m, s).cloned(),
                    FlatMem::Inner(j, m) => inners[j].next_at(m, s).cloned(),
                },
                |mem, s| match effective(mem, s) {
                    FlatMem::Outer(m, t) => outer_t.update_at(m, s).map(|m2| FlatMem::Outer(m2, (t + 1).min(cap))),
                    FlatMem::Inner(j, m) => inners[j].update_at(m, s).map(|m2| FlatMem::Inner(j, m2)),
                },
            )
        }
        _ => Err(StrategyError::Malformed("counter strategies have no finite Moore form".into())),
    }
}

struct CompositeRunner {
    model: Arc<Mdp>,
    outer: Box<dyn Strategy>,
    switches: Arc<Vec<(PreparedTrigger, Node)>>,
    steps: u64,
    inner: Option<Box<dyn Strategy>>,
    record: bool,
    events: Vec<Event>,
}

impl Strategy for CompositeRunner {
    fn model(&self) -> &Mdp {
        &self.model
    }

    fn visit(&mut self, s: usize) -> Result<Option<&Distribution>, StrategyError> {
        if self.inner.is_none() {
            let fired = self.switches.iter().position(|(trig, _)| match trig {
                PreparedTrigger::Enter(set) => set.contains(s),
                PreparedTrigger::AfterSteps(k) => self.steps >= *k,
            });
            if let Some(j) = fired {
                let mut inner = instantiate(&self.model, &self.switches[j].1);
                inner.set_recording(self.record);
                self.inner = Some(inner);
                if self.record {
                    self.events.push(Event::Triggered { switch: j });
                }
            }
        }
        self.steps = self.steps.saturating_add(1);
        match &mut self.inner {
            Some(inner) => inner.visit(s),
            None => self.outer.visit(s),
        }
    }

    fn set_recording(&mut self, on: bool) {
        self.record = on;
        self.outer.set_recording(on);
        if let Some(inner) = &mut self.inner {
            inner.set_recording(on);
        }
    }

    fn drain_events(&mut self, out: &mut Vec<Event>) {
        out.append(&mut self.events);
        self.outer.drain_events(out);
        if let Some(inner) = &mut self.inner {
            inner.drain_events(out);
        }
    }
}
