//! Strategy representations: explicit Moore machines, round-scheduled
//! counter strategies, switch compositions, and a uniform step interface.

pub mod counter;
mod dist;
pub mod moore;
pub mod spec;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Mdp, Owner};

pub use dist::{Distribution, DistributionError};
pub use moore::{materialize, MooreRunner, MooreTable};
pub use spec::{PreparedStrategy, StrategyDocument, StrategySpec, Switch, Trigger};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("strategy consulted at state {state} owned by {owner}, expected {expected}")]
    Contract { state: usize, owner: Owner, expected: Owner },
    #[error("strategy undefined at state {state}{}", memory.map(|m| format!(" with memory {m}")).unwrap_or_default())]
    Undefined { state: usize, memory: Option<usize> },
    #[error("malformed strategy: {0}")]
    Malformed(String),
    #[error("schedule error: {0}")]
    Schedule(String),
}

/// Bookkeeping notifications emitted by counter strategies and switches,
/// collected only while recording is on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    RoundStart { round: u64, horizon: usize },
    RoundEnd { round: u64, visited: bool },
    /// The round just ended missed its target; the sure strategy takes over
    /// until the recovery target is reached.
    RecoveryStart { round: u64 },
    RecoveryEnd,
    SwitchedForever { round: u64 },
    Triggered { switch: usize },
}

/// A running strategy. Every visited state must be passed in order, P1 states
/// through [`Strategy::next_move`] and P2 states through
/// [`Strategy::observe`].
pub trait Strategy: Send {
    fn model(&self) -> &Mdp;

    /// Advances the bookkeeping on `s`; returns the move for P1 states.
    fn visit(&mut self, s: usize) -> Result<Option<&Distribution>, StrategyError>;

    fn next_move(&mut self, s: usize) -> Result<&Distribution, StrategyError> {
        let owner = self.model().owner(s);
        if owner != Owner::P1 {
            return Err(StrategyError::Contract { state: s, owner, expected: Owner::P1 });
        }
        match self.visit(s)? {
            Some(d) => Ok(d),
            None => Err(StrategyError::Undefined { state: s, memory: None }),
        }
    }

    fn observe(&mut self, s: usize) -> Result<(), StrategyError> {
        let owner = self.model().owner(s);
        if owner != Owner::P2 {
            return Err(StrategyError::Contract { state: s, owner, expected: Owner::P2 });
        }
        self.visit(s).map(|_| ())
    }

    fn set_recording(&mut self, _on: bool) {}

    fn drain_events(&mut self, _out: &mut Vec<Event>) {}
}

/// `λ[ρ]`: behaves as `primed` (which has already seen `prefix`) when the
/// first visited state continues the prefix, and as `fresh` otherwise.
pub struct Initialized {
    primed: Box<dyn Strategy>,
    fresh: Box<dyn Strategy>,
    last: Option<usize>,
    chosen: Option<bool>,
}

impl Initialized {
    pub fn new(mut primed: Box<dyn Strategy>, fresh: Box<dyn Strategy>, prefix: &[usize]) -> Result<Initialized, StrategyError> {
        for &s in prefix {
            primed.visit(s)?;
        }
        Ok(Initialized { primed, fresh, last: prefix.last().copied(), chosen: None })
    }

    fn active(&mut self) -> &mut Box<dyn Strategy> {
        if self.chosen == Some(true) {
            &mut self.primed
        } else {
            &mut self.fresh
        }
    }
}

impl Strategy for Initialized {
    fn model(&self) -> &Mdp {
        self.fresh.model()
    }

    fn visit(&mut self, s: usize) -> Result<Option<&Distribution>, StrategyError> {
        if self.chosen.is_none() {
            let continues = self.last.is_some_and(|l| self.fresh.model().has_edge(l, s));
            self.chosen = Some(continues);
        }
        self.active().visit(s)
    }

    fn set_recording(&mut self, on: bool) {
        self.primed.set_recording(on);
        self.fresh.set_recording(on);
    }

    fn drain_events(&mut self, out: &mut Vec<Event>) {
        self.active().drain_events(out);
    }
}
