//! MDPs with two priority functions and exact rational transition
//! distributions, together with the JSON model document format.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, Arena, StateSet};

/// Exact rational number. All probabilities and values in the crate use it.
pub type Rational = num::BigRational;

/// Parses `"num/den"` or an integer. Decimal notation is rejected.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let text = text.trim();
    let bad = || RationalError(text.to_string());
    let parse_int = |s: &str| -> Result<BigInt, RationalError> {
        let s = s.trim();
        if s.is_empty() || !s.bytes().enumerate().all(|(i, b)| b.is_ascii_digit() || (i == 0 && b == b'-')) {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() || d.is_negative() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(parse_int(text)?)),
    }
}

/// Formats a rational as `num/den`, or just `num` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a rational of the form num/den")]
pub struct RationalError(pub String);

/// Serde adapter storing a [`Rational`] as a `"num/den"` string.
pub mod rational_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Owner {
    P1,
    P2,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::P1 => Owner::P2,
            Owner::P2 => Owner::P1,
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::P1 => write!(f, "P1"),
            Owner::P2 => write!(f, "P2"),
        }
    }
}

/// Selects one of the two priority functions of an [`Mdp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PriorityView {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
}

impl fmt::Display for PriorityView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorityView::P1 => write!(f, "p1"),
            PriorityView::P2 => write!(f, "p2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: String,
    pub owner: Owner,
    pub p1: u32,
    pub p2: u32,
}

/// A finite MDP. Immutable once built; every instance satisfies the
/// model invariants (non-blocking, exact distributions with full support
/// on the successor set, bounded priorities).
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    states: Vec<State>,
    /// Successor lists, sorted by index and free of duplicates.
    succ: Vec<Vec<usize>>,
    /// For P2 states, probabilities aligned with `succ`.
    dist: Vec<Option<Vec<Rational>>>,
    index: HashMap<String, usize>,
    init: Option<usize>,
}

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    DuplicateState { id: String },
    UnknownState { id: String, context: String },
    BlockingState { id: String },
    DistributionOnP1 { id: String },
    BadProbability { id: String, text: String },
    SupportMismatch { id: String, missing: Vec<String>, extra: Vec<String> },
    DistributionSum { id: String, sum: Rational },
    PriorityBound { id: String, priority: u32, bound: u32 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateState { id } => write!(f, "duplicate state id `{id}`"),
            Diagnostic::UnknownState { id, context } => write!(f, "unknown state `{id}` in {context}"),
            Diagnostic::BlockingState { id } => write!(f, "blocking state `{id}` has no successor"),
            Diagnostic::DistributionOnP1 { id } => {
                write!(f, "state `{id}` is owned by P1 but has a distribution")
            }
            Diagnostic::BadProbability { id, text } => {
                write!(f, "state `{id}`: probability `{text}` is not a rational in (0,1]")
            }
            Diagnostic::SupportMismatch { id, missing, extra } => write!(
                f,
                "support mismatch at `{id}`: missing successors [{}], non-successors [{}]",
                missing.join(", "),
                extra.join(", ")
            ),
            Diagnostic::DistributionSum { id, sum } => {
                write!(f, "distribution of `{id}` sums to {}", format_rational(sum))
            }
            Diagnostic::PriorityBound { id, priority, bound } => {
                write!(f, "priority {priority} of `{id}` exceeds bound {bound}")
            }
        }
    }
}

/// A non-empty list of diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid model:\n{0}")]
    Invalid(Diagnostics),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictError {
    #[error("the state set is empty")]
    Empty,
    #[error("`{state}` is a P2 state and its successor `{leaves_to}` leaves the set")]
    LeavesSet { state: String, leaves_to: String },
    #[error("P1 state `{state}` has no successor inside the set")]
    NoInternalSuccessor { state: String },
    #[error("the set is not strongly connected: no internal path from `{from}` to `{to}`")]
    NotStronglyConnected { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: String,
    pub owner: Owner,
    pub p1: u32,
    #[serde(default)]
    pub p2: u32,
}

/// The JSON model document. Also used, with `buchi` set and without `dist`,
/// as the dump format of two-player games.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub states: Vec<StateDoc>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dist: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buchi: Option<Vec<String>>,
}

impl ModelDocument {
    /// Checks the document against every model invariant, collecting all
    /// violations instead of stopping at the first one.
    pub fn validate(&self) -> Result<(), Diagnostics> {
        self.resolve().map(|_| ())
    }

    fn resolve(&self) -> Result<Mdp, Diagnostics> {
        let mut diags = Vec::new();
        let mut index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                diags.push(Diagnostic::DuplicateState { id: s.id.clone() });
            }
        }
        let n = self.states.len();
        let mut succ = vec![Vec::new(); n];
        for (from, to) in &self.edges {
            match (index.get(from), index.get(to)) {
                (Some(&f), Some(&t)) => succ[f].push(t),
                (f, t) => {
                    if f.is_none() {
                        diags.push(Diagnostic::UnknownState { id: from.clone(), context: "edges".into() });
                    }
                    if t.is_none() {
                        diags.push(Diagnostic::UnknownState { id: to.clone(), context: "edges".into() });
                    }
                }
            }
        }
        for list in &mut succ {
            list.sort_unstable();
            list.dedup();
        }
        for id in self.dist.keys() {
            match index.get(id) {
                None => diags.push(Diagnostic::UnknownState { id: id.clone(), context: "dist".into() }),
                Some(&i) if self.states[i].owner == Owner::P1 => {
                    diags.push(Diagnostic::DistributionOnP1 { id: id.clone() })
                }
                _ => {}
            }
        }
        let mut dist = vec![None; n];
        for (i, s) in self.states.iter().enumerate() {
            if s.owner != Owner::P2 || succ[i].is_empty() {
                continue;
            }
            let probs = match self.dist.get(&s.id) {
                None => {
                    let u = Rational::new(BigInt::one(), BigInt::from(succ[i].len()));
                    vec![u; succ[i].len()]
                }
                Some(entries) => {
                    let mut probs = vec![None; succ[i].len()];
                    let mut extra = Vec::new();
                    for (t, text) in entries {
                        let q = match parse_rational(text) {
                            Ok(q) if q.is_positive() && q <= Rational::one() => q,
                            Ok(q) if q.is_zero() => {
                                // a zero entry removes the state from the support
                                continue;
                            }
                            _ => {
                                diags.push(Diagnostic::BadProbability { id: s.id.clone(), text: text.clone() });
                                continue;
                            }
                        };
                        match index.get(t).and_then(|&ti| succ[i].binary_search(&ti).ok()) {
                            Some(pos) => probs[pos] = Some(q),
                            None => extra.push(t.clone()),
                        }
                    }
                    let missing: Vec<String> = succ[i]
                        .iter()
                        .zip(&probs)
                        .filter(|(_, p)| p.is_none())
                        .map(|(&t, _)| self.states[t].id.clone())
                        .collect();
                    if !missing.is_empty() || !extra.is_empty() {
                        diags.push(Diagnostic::SupportMismatch { id: s.id.clone(), missing, extra });
                        continue;
                    }
                    probs.into_iter().map(|p| p.unwrap()).collect()
                }
            };
            let sum: Rational = probs.iter().sum();
            if !sum.is_one() {
                diags.push(Diagnostic::DistributionSum { id: s.id.clone(), sum });
                continue;
            }
            dist[i] = Some(probs);
        }
        let init = match &self.init {
            None => None,
            Some(id) => match index.get(id) {
                Some(&i) => Some(i),
                None => {
                    diags.push(Diagnostic::UnknownState { id: id.clone(), context: "init".into() });
                    None
                }
            },
        };
        let states: Vec<State> = self
            .states
            .iter()
            .map(|s| State { id: s.id.clone(), owner: s.owner, p1: s.p1, p2: s.p2 })
            .collect();
        diags.extend(structural_diagnostics(&states, &succ));
        if !diags.is_empty() {
            return Err(Diagnostics(diags));
        }
        Ok(Mdp { states, succ, dist, index, init })
    }
}

fn structural_diagnostics(states: &[State], succ: &[Vec<usize>]) -> Vec<Diagnostic> {
    let bound = states.len() as u32 + 1;
    let mut diags = Vec::new();
    for (s, list) in states.iter().zip(succ) {
        if list.is_empty() {
            diags.push(Diagnostic::BlockingState { id: s.id.clone() });
        }
        for priority in [s.p1, s.p2] {
            if priority > bound {
                diags.push(Diagnostic::PriorityBound { id: s.id.clone(), priority, bound });
            }
        }
    }
    diags
}

/// Parses and validates a model document.
pub fn parse_mdp(text: &str) -> Result<Mdp, ModelError> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    Mdp::from_document(&doc)
}

/// Canonical JSON serialization (states sorted by id, explicit distributions).
pub fn serialize_mdp(m: &Mdp) -> String {
    serde_json::to_string_pretty(&m.to_document()).expect("model documents always serialize")
}

impl Mdp {
    pub fn from_document(doc: &ModelDocument) -> Result<Mdp, ModelError> {
        doc.resolve().map_err(ModelError::Invalid)
    }

    /// Builds an MDP from index-based parts. `dist[s]` must be `Some` exactly
    /// for P2 states and aligned with `succ[s]` after sorting.
    pub fn from_parts(
        states: Vec<State>,
        succ: Vec<Vec<usize>>,
        dist: Vec<Option<Vec<Rational>>>,
        init: Option<usize>,
    ) -> Result<Mdp, Diagnostics> {
        let n = states.len();
        let mut diags = Vec::new();
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                diags.push(Diagnostic::DuplicateState { id: s.id.clone() });
            }
        }
        let mut norm_succ = Vec::with_capacity(n);
        let mut norm_dist = Vec::with_capacity(n);
        for (i, (list, probs)) in succ.into_iter().zip(dist).enumerate() {
            let mut pairs: Vec<(usize, Option<Rational>)> = match probs {
                Some(p) => list.into_iter().zip(p.into_iter().map(Some)).collect(),
                None => list.into_iter().map(|t| (t, None)).collect(),
            };
            pairs.sort_by_key(|(t, _)| *t);
            pairs.dedup_by_key(|(t, _)| *t);
            if pairs.iter().any(|(t, _)| *t >= n) {
                diags.push(Diagnostic::UnknownState { id: states[i].id.clone(), context: "successor index".into() });
            }
            let targets: Vec<usize> = pairs.iter().map(|(t, _)| *t).collect();
            let probs: Option<Vec<Rational>> = pairs.into_iter().map(|(_, p)| p).collect();
            match (states[i].owner, probs) {
                (Owner::P2, Some(p)) if !targets.is_empty() => {
                    if p.iter().any(|q| !q.is_positive()) {
                        diags.push(Diagnostic::SupportMismatch {
                            id: states[i].id.clone(),
                            missing: vec![],
                            extra: vec![],
                        });
                    }
                    let sum: Rational = p.iter().sum();
                    if !sum.is_one() {
                        diags.push(Diagnostic::DistributionSum { id: states[i].id.clone(), sum });
                    }
                    norm_dist.push(Some(p));
                }
                (Owner::P2, _) if !targets.is_empty() => {
                    let u = Rational::new(BigInt::one(), BigInt::from(targets.len()));
                    norm_dist.push(Some(vec![u; targets.len()]));
                }
                (Owner::P1, Some(_)) if !targets.is_empty() => {
                    diags.push(Diagnostic::DistributionOnP1 { id: states[i].id.clone() });
                    norm_dist.push(None);
                }
                _ => norm_dist.push(None),
            }
            norm_succ.push(targets);
        }
        diags.extend(structural_diagnostics(&states, &norm_succ));
        if !diags.is_empty() {
            return Err(Diagnostics(diags));
        }
        Ok(Mdp { states, succ: norm_succ, dist: norm_dist, index, init })
    }

    /// Re-checks every model invariant. Always succeeds for values built
    /// through the public constructors.
    pub fn validate(&self) -> Result<(), Diagnostics> {
        self.validate_with(true)
    }

    /// Sub-models keep their parent's priorities, which may exceed the
    /// bound for the smaller state count; they skip that check.
    fn validate_with(&self, priority_bound: bool) -> Result<(), Diagnostics> {
        let mut diags = structural_diagnostics(&self.states, &self.succ);
        if !priority_bound {
            diags.retain(|d| !matches!(d, Diagnostic::PriorityBound { .. }));
        }
        for s in 0..self.len() {
            if self.owner(s) == Owner::P2 && !self.succ[s].is_empty() {
                match &self.dist[s] {
                    Some(p) if p.len() == self.succ[s].len() => {
                        if p.iter().any(|q| !q.is_positive()) {
                            diags.push(Diagnostic::SupportMismatch {
                                id: self.id(s).to_string(),
                                missing: vec![],
                                extra: vec![],
                            });
                        }
                        let sum: Rational = p.iter().sum();
                        if !sum.is_one() {
                            diags.push(Diagnostic::DistributionSum { id: self.id(s).to_string(), sum });
                        }
                    }
                    _ => diags.push(Diagnostic::SupportMismatch {
                        id: self.id(s).to_string(),
                        missing: vec![],
                        extra: vec![],
                    }),
                }
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Diagnostics(diags))
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.id(a).cmp(self.id(b)));
        let states = order
            .iter()
            .map(|&s| {
                let st = &self.states[s];
                StateDoc { id: st.id.clone(), owner: st.owner, p1: st.p1, p2: st.p2 }
            })
            .collect();
        let mut edges: Vec<(String, String)> = (0..self.len())
            .flat_map(|s| self.succ[s].iter().map(move |&t| (self.id(s).to_string(), self.id(t).to_string())))
            .collect();
        edges.sort();
        let mut dist = BTreeMap::new();
        for s in 0..self.len() {
            if let Some(p) = &self.dist[s] {
                let entries = self.succ[s]
                    .iter()
                    .zip(p)
                    .map(|(&t, q)| (self.id(t).to_string(), format_rational(q)))
                    .collect();
                dist.insert(self.id(s).to_string(), entries);
            }
        }
        ModelDocument {
            states,
            edges,
            dist,
            init: self.init.map(|s| self.id(s).to_string()),
            buchi: None,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn id(&self, s: usize) -> &str {
        &self.states[s].id
    }

    pub fn owner(&self, s: usize) -> Owner {
        self.states[s].owner
    }

    pub fn priority(&self, view: PriorityView, s: usize) -> u32 {
        match view {
            PriorityView::P1 => self.states[s].p1,
            PriorityView::P2 => self.states[s].p2,
        }
    }

    pub fn priorities(&self, view: PriorityView) -> Vec<u32> {
        (0..self.len()).map(|s| self.priority(view, s)).collect()
    }

    pub fn succ(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    /// Transition probabilities of a P2 state, aligned with [`Mdp::succ`].
    pub fn dist(&self, s: usize) -> Option<&[Rational]> {
        self.dist[s].as_deref()
    }

    /// Probability of the edge `s -> t` at a P2 state (zero if absent).
    pub fn prob(&self, s: usize, t: usize) -> Rational {
        match (&self.dist[s], self.succ[s].binary_search(&t)) {
            (Some(p), Ok(pos)) => p[pos].clone(),
            _ => Rational::zero(),
        }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn init(&self) -> Option<usize> {
        self.init
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.succ[s].binary_search(&t).is_ok()
    }

    pub fn all_states(&self) -> StateSet {
        StateSet::full(self.len())
    }

    /// Resolves a list of state ids into a set.
    pub fn set_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<StateSet, String> {
        let mut set = StateSet::new(self.len());
        for id in ids {
            let s = self.index_of(id.as_ref()).ok_or_else(|| format!("unknown state `{}`", id.as_ref()))?;
            set.insert(s);
        }
        Ok(set)
    }

    /// State ids of a set, in index order.
    pub fn ids_of(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|s| self.id(s).to_string()).collect()
    }

    pub fn with_init(mut self, init: Option<usize>) -> Mdp {
        self.init = init;
        self
    }
}

impl Arena for Mdp {
    fn num_states(&self) -> usize {
        self.len()
    }
    fn owner(&self, s: usize) -> Owner {
        self.states[s].owner
    }
    fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }
}

/// A sub-MDP together with the index map back into its parent.
#[derive(Debug, Clone)]
pub struct SubMdp {
    pub mdp: Mdp,
    pub to_parent: Vec<usize>,
    from_parent: Vec<Option<usize>>,
}

impl SubMdp {
    pub fn from_parent(&self, s: usize) -> Option<usize> {
        self.from_parent.get(s).copied().flatten()
    }

    pub fn lift_set(&self, set: &StateSet) -> StateSet {
        StateSet::from_iter(self.from_parent.len(), set.iter().map(|s| self.to_parent[s]))
    }

    pub fn project_set(&self, set: &StateSet) -> StateSet {
        StateSet::from_iter(self.mdp.len(), set.iter().filter_map(|s| self.from_parent(s)))
    }

    pub fn parent_len(&self) -> usize {
        self.from_parent.len()
    }
}

/// Sub-MDP induced by a P2-closed set in which every P1 state keeps an
/// internal successor. Unlike [`restrict`], strong connectivity is not
/// required.
pub fn sub_mdp(m: &Mdp, set: &StateSet) -> Result<SubMdp, RestrictError> {
    if set.is_empty() {
        return Err(RestrictError::Empty);
    }
    check_closed(m, set)?;
    let to_parent: Vec<usize> = set.iter().collect();
    let mut from_parent = vec![None; m.len()];
    for (i, &s) in to_parent.iter().enumerate() {
        from_parent[s] = Some(i);
    }
    let states = to_parent.iter().map(|&s| m.states[s].clone()).collect();
    let mut succ = Vec::with_capacity(to_parent.len());
    let mut dist = Vec::with_capacity(to_parent.len());
    for &s in &to_parent {
        let mut list = Vec::new();
        let mut probs = Vec::new();
        for (k, &t) in m.succ[s].iter().enumerate() {
            if let Some(ti) = from_parent[t] {
                list.push(ti);
                if let Some(p) = &m.dist[s] {
                    probs.push(p[k].clone());
                }
            }
        }
        succ.push(list);
        dist.push(m.dist[s].as_ref().map(|_| probs));
    }
    let init = m.init.and_then(|s| from_parent[s]);
    let index = to_parent.iter().enumerate().map(|(i, &s)| (m.id(s).to_string(), i)).collect();
    let mdp = Mdp { states, succ, dist, index, init };
    debug_assert!(mdp.validate_with(false).is_ok());
    Ok(SubMdp { mdp, to_parent, from_parent })
}

fn check_closed(m: &Mdp, set: &StateSet) -> Result<(), RestrictError> {
    for s in set.iter() {
        match m.owner(s) {
            Owner::P2 => {
                if let Some(&t) = m.succ(s).iter().find(|&&t| !set.contains(t)) {
                    return Err(RestrictError::LeavesSet { state: m.id(s).into(), leaves_to: m.id(t).into() });
                }
            }
            Owner::P1 => {
                if !m.succ(s).iter().any(|&t| set.contains(t)) {
                    return Err(RestrictError::NoInternalSuccessor { state: m.id(s).into() });
                }
            }
        }
    }
    Ok(())
}

/// The sub-MDP `m` restricted to the end-component `c`, with index map.
pub fn restrict_sub(m: &Mdp, c: &StateSet) -> Result<SubMdp, RestrictError> {
    if c.is_empty() {
        return Err(RestrictError::Empty);
    }
    check_closed(m, c)?;
    if let Some((from, to)) = graph::connectivity_gap(m, c) {
        return Err(RestrictError::NotStronglyConnected { from: m.id(from).into(), to: m.id(to).into() });
    }
    sub_mdp(m, c)
}

/// Restricts `m` to the end-component `c`. Fails, naming the violated
/// condition, when `c` is not an end-component.
pub fn restrict(m: &Mdp, c: &StateSet) -> Result<Mdp, RestrictError> {
    restrict_sub(m, c).map(|sub| sub.mdp)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), r(1, 2));
        assert_eq!(parse_rational("2/4").unwrap(), r(1, 2));
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("a/b").is_err());
        assert_eq!(format_rational(&r(6, 8)), "3/4");
        assert_eq!(format_rational(&r(2, 1)), "2");
    }

    #[test]
    fn fig1_uniform_default() {
        let m = crate::fixtures::fig1();
        let b = m.index_of("b").unwrap();
        let a = m.index_of("a").unwrap();
        let c = m.index_of("c").unwrap();
        assert_eq!(m.prob(b, a), r(1, 2));
        assert_eq!(m.prob(b, c), r(1, 2));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn sum_error_is_reported() {
        let text = r#"{"states":[{"id":"a","owner":"P1","p1":0,"p2":0},
            {"id":"b","owner":"P2","p1":0,"p2":0},{"id":"c","owner":"P1","p1":0,"p2":0}],
            "edges":[["a","b"],["b","a"],["b","c"],["c","c"]],
            "dist":{"b":{"a":"1/2","c":"1/3"}}}"#;
        match parse_mdp(text) {
            Err(ModelError::Invalid(d)) => {
                assert_eq!(d.0, vec![Diagnostic::DistributionSum { id: "b".into(), sum: r(5, 6) }]);
                assert!(d.to_string().contains("sums to 5/6"));
            }
            other => panic!("expected a sum diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn document_diagnostics() {
        let base = |edges: &str, dist: &str| {
            format!(
                r#"{{"states":[{{"id":"a","owner":"P1","p1":0,"p2":0}},{{"id":"b","owner":"P2","p1":0,"p2":0}},
                {{"id":"c","owner":"P1","p1":0,"p2":0}}],"edges":{edges},"dist":{dist}}}"#
            )
        };
        // c has no successor
        let e = parse_mdp(&base(r#"[["a","b"],["b","a"],["b","c"]]"#, "{}")).unwrap_err();
        assert!(matches!(e, ModelError::Invalid(Diagnostics(ref d)) if d.contains(&Diagnostic::BlockingState { id: "c".into() })));
        // b's distribution omits c
        let e = parse_mdp(&base(r#"[["a","b"],["b","a"],["b","c"],["c","c"]]"#, r#"{"b":{"a":"1"}}"#)).unwrap_err();
        match e {
            ModelError::Invalid(Diagnostics(d)) => assert!(matches!(&d[0],
                Diagnostic::SupportMismatch { id, missing, .. } if id == "b" && missing == &vec!["c".to_string()])),
            other => panic!("{other:?}"),
        }
        let dup = r#"{"states":[{"id":"a","owner":"P1","p1":0,"p2":0},{"id":"a","owner":"P1","p1":0,"p2":0}],
            "edges":[["a","a"]]}"#;
        assert!(matches!(parse_mdp(dup), Err(ModelError::Invalid(_))));
        assert!(matches!(parse_mdp("{not json"), Err(ModelError::Syntax(_))));
        let big = r#"{"states":[{"id":"a","owner":"P1","p1":7,"p2":0}],"edges":[["a","a"]]}"#;
        assert!(matches!(parse_mdp(big), Err(ModelError::Invalid(Diagnostics(ref d)))
            if matches!(d[0], Diagnostic::PriorityBound { priority: 7, bound: 2, .. })));
    }

    #[test]
    fn canonical_round_trip_on_golden_models() {
        for m in [crate::fixtures::fig1(), crate::fixtures::fig2(), crate::fixtures::fig3()] {
            let text = serialize_mdp(&m);
            let again = parse_mdp(&text).unwrap();
            assert_eq!(serialize_mdp(&again), text);
        }
    }

    #[test]
    fn restrict_examples() {
        let fig3 = crate::fixtures::fig3();
        let abc = fig3.set_of(&["a", "b", "c"]).unwrap();
        let sub = restrict(&fig3, &abc).unwrap();
        assert_eq!(sub.len(), 3);
        let a = sub.index_of("a").unwrap();
        assert_eq!(sub.succ(a).len(), 1);
        let b = sub.index_of("b").unwrap();
        assert_eq!(sub.dist(b).unwrap(), fig3.dist(fig3.index_of("b").unwrap()).unwrap());

        let fig1 = crate::fixtures::fig1();
        assert_eq!(restrict(&fig1, &fig1.all_states()).unwrap(), fig1);
        let ab = fig1.set_of(&["a", "b"]).unwrap();
        assert_eq!(
            restrict(&fig1, &ab),
            Err(RestrictError::LeavesSet { state: "b".into(), leaves_to: "c".into() })
        );
        let ad_c = fig1.set_of(&["a", "c"]).unwrap();
        assert!(matches!(restrict(&fig1, &ad_c), Err(RestrictError::NoInternalSuccessor { .. })));
    }

    #[test]
    fn restrict_is_idempotent() {
        let fig3 = crate::fixtures::fig3();
        let abc = fig3.set_of(&["a", "b", "c"]).unwrap();
        let once = restrict(&fig3, &abc).unwrap();
        let all = once.all_states();
        assert_eq!(restrict(&once, &all).unwrap(), once);
    }
}
