use std::collections::{HashMap, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Distribution, Strategy, StrategyError};
use crate::graph::StateSet;
use crate::model::{Mdp, Owner, SubMdp};

/// An explicit finite Moore machine. At state `s` with memory `m` the move is
/// `next[m][s]`; when the play leaves `s` the memory becomes `update[m][s]`.
/// Entries are `None` where the machine is never consulted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MooreTable {
    pub states: usize,
    pub memory: usize,
    pub m0: usize,
    pub update: Vec<Vec<Option<usize>>>,
    pub next: Vec<Vec<Option<Distribution>>>,
}

impl MooreTable {
    /// A memoryless strategy; `moves[s]` is used at P1 state `s`.
    pub fn memoryless(moves: Vec<Option<Distribution>>) -> MooreTable {
        let n = moves.len();
        MooreTable { states: n, memory: 1, m0: 0, update: vec![vec![Some(0); n]], next: vec![moves] }
    }

    /// A pure memoryless strategy from a successor choice per state.
    pub fn from_choices(choices: &[Option<usize>]) -> MooreTable {
        MooreTable::memoryless(choices.iter().map(|c| c.map(Distribution::dirac)).collect())
    }

    pub fn is_pure(&self) -> bool {
        self.next.iter().flatten().flatten().all(|d| d.as_dirac().is_some())
    }

    pub fn next_at(&self, mem: usize, s: usize) -> Option<&Distribution> {
        self.next[mem][s].as_ref()
    }

    pub fn update_at(&self, mem: usize, s: usize) -> Option<usize> {
        self.update[mem][s]
    }

    /// Checks table shape and that every move is a distribution over
    /// successors of a P1 state.
    pub fn check(&self, m: &Mdp) -> Result<(), StrategyError> {
        let bad = |msg: String| Err(StrategyError::Malformed(msg));
        if self.states != m.len() {
            return bad(format!("table covers {} states, model has {}", self.states, m.len()));
        }
        if self.memory == 0 || self.m0 >= self.memory || self.update.len() != self.memory || self.next.len() != self.memory {
            return bad("inconsistent memory size".into());
        }
        for mem in 0..self.memory {
            if self.update[mem].len() != self.states || self.next[mem].len() != self.states {
                return bad(format!("memory row {mem} has the wrong length"));
            }
            for s in 0..self.states {
                if let Some(u) = self.update[mem][s] {
                    if u >= self.memory {
                        return bad(format!("update to unknown memory {u}"));
                    }
                }
                if let Some(d) = &self.next[mem][s] {
                    if m.owner(s) != Owner::P1 {
                        return bad(format!("move defined at P2 state `{}`", m.id(s)));
                    }
                    if let Some(t) = d.support().find(|&t| !m.has_edge(s, t)) {
                        return bad(format!("move {} -> {} is not an edge", m.id(s), t));
                    }
                }
            }
        }
        Ok(())
    }

    /// Re-indexes a table built on a sub-MDP into the parent's state space.
    pub fn lift(&self, sub: &SubMdp) -> MooreTable {
        let n = sub.parent_len();
        let mut update = vec![vec![None; n]; self.memory];
        let mut next = vec![vec![None; n]; self.memory];
        for mem in 0..self.memory {
            for (i, &s) in sub.to_parent.iter().enumerate() {
                update[mem][s] = self.update[mem][i];
                next[mem][s] = self.next[mem][i].as_ref().map(|d| d.map_states(|t| sub.to_parent[t]));
            }
        }
        MooreTable { states: n, memory: self.memory, m0: self.m0, update, next }
    }

    /// Pairs `(memory, state)` reachable from `m0` at any of `starts`.
    pub fn reachable_pairs(&self, m: &Mdp, starts: &StateSet) -> Result<Vec<(usize, usize)>, StrategyError> {
        let mut seen = vec![false; self.memory * self.states];
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        for s in starts.iter() {
            if !seen[self.m0 * self.states + s] {
                seen[self.m0 * self.states + s] = true;
                queue.push_back((self.m0, s));
            }
        }
        let mut out = Vec::new();
        while let Some((mem, s)) = queue.pop_front() {
            out.push((mem, s));
            let m2 = self.update[mem][s].ok_or(StrategyError::Undefined { state: s, memory: Some(mem) })?;
            let succs: Vec<usize> = match m.owner(s) {
                Owner::P2 => m.succ(s).to_vec(),
                Owner::P1 => self.next[mem][s]
                    .as_ref()
                    .ok_or(StrategyError::Undefined { state: s, memory: Some(mem) })?
                    .support()
                    .collect(),
            };
            for t in succs {
                if !seen[m2 * self.states + t] {
                    seen[m2 * self.states + t] = true;
                    queue.push_back((m2, t));
                }
            }
        }
        Ok(out)
    }

    /// Graphviz rendering of the memory structure.
    pub fn to_dot(&self, m: &Mdp) -> String {
        let mut out = String::from("digraph moore {\n");
        for mem in 0..self.memory {
            for s in 0..self.states {
                if let Some(d) = &self.next[mem][s] {
                    for (t, p) in d.entries() {
                        out.push_str(&format!(
                            "  \"{mem}:{}\" -> \"{}\" [label=\"{}\"];\n",
                            m.id(s),
                            m.id(*t),
                            crate::model::format_rational(p)
                        ));
                    }
                }
                if let Some(u) = self.update[mem][s] {
                    if u != mem {
                        out.push_str(&format!("  \"m{mem}\" -> \"m{u}\" [label=\"{}\", style=dashed];\n", m.id(s)));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds an explicit table from a memory type with closures for the next
/// move and the update, exploring the memory values reachable from `m0` at
/// any state of `starts`.
pub fn materialize<M, N, U>(m: &Mdp, starts: &StateSet, m0: M, next: N, update: U) -> Result<MooreTable, StrategyError>
where
    M: Clone + Eq + Hash,
    N: Fn(&M, usize) -> Option<Distribution>,
    U: Fn(&M, usize) -> Option<M>,
{
    let n = m.len();
    let mut index: HashMap<M, usize> = HashMap::new();
    let mut values: Vec<M> = Vec::new();
    let mut intern = |v: M, values: &mut Vec<M>| -> usize {
        *index.entry(v.clone()).or_insert_with(|| {
            values.push(v);
            values.len() - 1
        })
    };
    let root = intern(m0, &mut values);
    let mut update_rows: Vec<Vec<Option<usize>>> = Vec::new();
    let mut next_rows: Vec<Vec<Option<Distribution>>> = Vec::new();
    let mut seen: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut queue: VecDeque<(usize, usize)> = starts.iter().map(|s| (root, s)).collect();
    for &p in &queue {
        seen.insert(p);
    }
    while let Some((mi, s)) = queue.pop_front() {
        while update_rows.len() < values.len() {
            update_rows.push(vec![None; n]);
            next_rows.push(vec![None; n]);
        }
        let mem = values[mi].clone();
        let succs: Vec<usize> = match m.owner(s) {
            Owner::P1 => {
                let d = next(&mem, s).ok_or(StrategyError::Undefined { state: s, memory: Some(mi) })?;
                let succs = d.support().collect();
                next_rows[mi][s] = Some(d);
                succs
            }
            Owner::P2 => m.succ(s).to_vec(),
        };
        let m2 = update(&mem, s).ok_or(StrategyError::Undefined { state: s, memory: Some(mi) })?;
        let m2 = intern(m2, &mut values);
        update_rows[mi][s] = Some(m2);
        for t in succs {
            if seen.insert((m2, t)) {
                queue.push_back((m2, t));
            }
        }
    }
    while update_rows.len() < values.len() {
        update_rows.push(vec![None; n]);
        next_rows.push(vec![None; n]);
    }
    Ok(MooreTable { states: n, memory: values.len(), m0: root, update: update_rows, next: next_rows })
}

/// Runtime instance of a [`MooreTable`].
#[derive(Debug, Clone)]
pub struct MooreRunner {
    model: Arc<Mdp>,
    table: Arc<MooreTable>,
    mem: usize,
}

impl MooreRunner {
    pub fn new(model: Arc<Mdp>, table: Arc<MooreTable>) -> MooreRunner {
        let mem = table.m0;
        MooreRunner { model, table, mem }
    }

    pub fn memory(&self) -> usize {
        self.mem
    }
}

impl Strategy for MooreRunner {
    fn model(&self) -> &Mdp {
        &self.model
    }

    fn visit(&mut self, s: usize) -> Result<Option<&Distribution>, StrategyError> {
        let mem = self.mem;
        self.mem = self.table.update[mem][s].ok_or(StrategyError::Undefined { state: s, memory: Some(mem) })?;
        match self.model.owner(s) {
            Owner::P2 => Ok(None),
            Owner::P1 => self.table.next[mem][s]
                .as_ref()
                .map(Some)
                .ok_or(StrategyError::Undefined { state: s, memory: Some(mem) }),
        }
    }
}
