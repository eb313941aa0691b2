//! Round-scheduled infinite-memory strategies inside end-components.

use std::sync::{Arc, Mutex};

use num::{BigInt, One, Zero};

use super::moore::{MooreRunner, MooreTable};
use super::{Distribution, Event, Strategy, StrategyError};
use crate::graph::StateSet;
use crate::model::{Mdp, Owner, Rational};

/// Iterations of the hitting-probability recurrence before a schedule is
/// declared divergent.
const HORIZON_CAP: usize = 1 << 20;

/// Exact finite-horizon hitting probabilities of a target set under a fixed
/// memoryless strategy, extended lazily one step at a time.
#[derive(Debug)]
pub struct HitSchedule {
    domain: Vec<usize>,
    rows: Vec<Vec<(usize, Rational)>>,
    target: StateSet,
    h: Vec<Rational>,
    /// `mins[n]`: least probability over the domain of hitting the target
    /// within `n` steps.
    mins: Vec<Rational>,
}

impl HitSchedule {
    /// `lambda2` must be memoryless and keep plays inside `domain`.
    pub fn new(m: &Mdp, lambda2: &MooreTable, domain: &StateSet, target: &StateSet) -> Result<HitSchedule, StrategyError> {
        let n = m.len();
        let mut rows = vec![Vec::new(); n];
        for s in domain.iter() {
            let row: Vec<(usize, Rational)> = match m.owner(s) {
                Owner::P2 => m.succ(s).iter().zip(m.dist(s).unwrap()).map(|(&t, p)| (t, p.clone())).collect(),
                Owner::P1 => lambda2
                    .next_at(lambda2.m0, s)
                    .ok_or(StrategyError::Undefined { state: s, memory: None })?
                    .entries()
                    .to_vec(),
            };
            if let Some(&(t, _)) = row.iter().find(|(t, _)| !domain.contains(*t)) {
                return Err(StrategyError::Malformed(format!(
                    "randomized strategy leaves its component at {} -> {}",
                    m.id(s),
                    m.id(t)
                )));
            }
            rows[s] = row;
        }
        let h: Vec<Rational> = (0..n)
            .map(|s| if target.contains(s) { Rational::one() } else { Rational::zero() })
            .collect();
        let mut sched = HitSchedule { domain: domain.to_vec(), rows, target: target.clone(), h, mins: Vec::new() };
        let m0 = sched.current_min();
        sched.mins.push(m0);
        Ok(sched)
    }

    fn current_min(&self) -> Rational {
        self.domain.iter().map(|&s| self.h[s].clone()).min().unwrap_or_else(Rational::one)
    }

    fn extend(&mut self) {
        let next: Vec<Rational> = (0..self.h.len())
            .map(|s| {
                if self.target.contains(s) {
                    Rational::one()
                } else {
                    self.rows[s].iter().map(|(t, p)| p * &self.h[*t]).sum()
                }
            })
            .collect();
        self.h = next;
        let m = self.current_min();
        self.mins.push(m);
    }

    /// Least hitting probability over the domain within `n` steps.
    pub fn min_hit(&mut self, n: usize) -> Rational {
        while self.mins.len() <= n {
            self.extend();
        }
        self.mins[n].clone()
    }

    /// Smallest `n ≥ from` whose least hitting probability satisfies `ok`.
    pub fn first_horizon(&mut self, from: usize, ok: impl Fn(&Rational) -> bool) -> Result<usize, StrategyError> {
        let mut n = from;
        loop {
            if ok(&self.min_hit(n)) {
                return Ok(n);
            }
            n += 1;
            if n > HORIZON_CAP {
                return Err(StrategyError::Schedule(format!("no horizon found below {HORIZON_CAP} steps")));
            }
        }
    }
}

/// `1 - 2^{-i}`.
pub fn ugec_bound(i: u64) -> Rational {
    Rational::one() - Rational::new(BigInt::one(), BigInt::from(2u8).pow(i as u32))
}

/// `f(i) = 1 - ε·2^{-(i+2)}`.
pub fn limit_sure_bound(epsilon: &Rational, i: u64) -> Rational {
    Rational::one() - epsilon / Rational::from_integer(BigInt::from(2u8).pow(i as u32 + 2))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `n_i` minimal with least hit probability `≥ 1 - 2^{-i}`.
    Ugec,
    /// `g(i)` minimal with least hit probability `> f(i)`.
    LimitSure(Rational),
}

/// Round horizons computed on demand and shared between all instances of
/// a strategy.
#[derive(Debug)]
pub struct Schedule {
    kind: ScheduleKind,
    hits: HitSchedule,
    horizons: Vec<usize>,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, hits: HitSchedule) -> Schedule {
        Schedule { kind, hits, horizons: Vec::new() }
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// The horizon of round `i` (computed horizons are non-decreasing).
    pub fn horizon(&mut self, i: u64) -> Result<usize, StrategyError> {
        while self.horizons.len() as u64 <= i {
            let k = self.horizons.len() as u64;
            let from = self.horizons.last().copied().unwrap_or(0);
            let n = match &self.kind {
                ScheduleKind::Ugec => {
                    let bound = ugec_bound(k);
                    self.hits.first_horizon(from, |p| *p >= bound)?
                }
                ScheduleKind::LimitSure(eps) => {
                    let bound = limit_sure_bound(eps, k);
                    self.hits.first_horizon(from, |p| *p > bound)?
                }
            };
            self.horizons.push(n);
        }
        Ok(self.horizons[i as usize])
    }

    pub fn min_hit(&mut self, n: usize) -> Rational {
        self.hits.min_hit(n)
    }
}

pub type SharedSchedule = Arc<Mutex<Schedule>>;

fn horizon_of(schedule: &SharedSchedule, round: u64) -> Result<usize, StrategyError> {
    schedule.lock().expect("schedule lock poisoned").horizon(round)
}

/// Immutable parts of the end-component strategy `λ_C`.
#[derive(Debug)]
pub struct UgecShared {
    pub model: Arc<Mdp>,
    pub component: StateSet,
    pub d_max_even: StateSet,
    pub c_max_even: StateSet,
    pub lambda2: Arc<MooreTable>,
    pub lambda1: Arc<MooreTable>,
    pub schedule: SharedSchedule,
}

#[derive(Debug)]
enum UgecPhase {
    /// Playing the randomized strategy; `pos` moves made in this round.
    Rounds { pos: usize, len: usize, visited: bool },
    /// Recovering with a fresh instance of the sure strategy.
    Recovery(MooreRunner),
}

/// `λ_C`: rounds of `n_i` randomized moves; a round that misses
/// `D^max_even(p1)` is followed by the sure strategy until `C^max_even(p1)`.
#[derive(Debug)]
pub struct UgecStrategy {
    shared: Arc<UgecShared>,
    round: u64,
    phase: UgecPhase,
    started: bool,
    record: bool,
    events: Vec<Event>,
}

impl UgecStrategy {
    pub fn new(shared: Arc<UgecShared>) -> UgecStrategy {
        UgecStrategy {
            shared,
            round: 0,
            phase: UgecPhase::Rounds { pos: 0, len: 0, visited: false },
            started: false,
            record: false,
            events: Vec::new(),
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    fn emit(&mut self, e: Event) {
        if self.record {
            self.events.push(e);
        }
    }

    fn start_round(&mut self) -> Result<(), StrategyError> {
        let n = horizon_of(&self.shared.schedule, self.round)?;
        // a zero-length round would make no progress
        self.phase = UgecPhase::Rounds { pos: 0, len: n.max(1), visited: false };
        self.emit(Event::RoundStart { round: self.round, horizon: n });
        Ok(())
    }
}

impl Strategy for UgecStrategy {
    fn model(&self) -> &Mdp {
        &self.shared.model
    }

    fn visit(&mut self, s: usize) -> Result<Option<&Distribution>, StrategyError> {
        if !self.shared.component.contains(s) {
            return Err(StrategyError::Undefined { state: s, memory: None });
        }
        if !self.started {
            self.started = true;
            self.start_round()?;
        }
        loop {
            match &mut self.phase {
                UgecPhase::Rounds { pos, len, visited } => {
                    *visited |= self.shared.d_max_even.contains(s);
                    if *pos < *len {
                        *pos += 1;
                        break;
                    }
                    let hit = *visited;
                    self.emit(Event::RoundEnd { round: self.round, visited: hit });
                    self.round += 1;
                    if hit {
                        self.start_round()?;
                    } else {
                        self.phase = UgecPhase::Recovery(MooreRunner::new(
                            self.shared.model.clone(),
                            self.shared.lambda1.clone(),
                        ));
                        self.emit(Event::RecoveryStart { round: self.round - 1 });
                    }
                }
                UgecPhase::Recovery(_) => {
                    if self.shared.c_max_even.contains(s) {
                        self.emit(Event::RecoveryEnd);
                        self.start_round()?;
                    } else {
                        break;
                    }
                }
            }
        }
        match &mut self.phase {
            UgecPhase::Recovery(runner) => runner.visit(s),
            UgecPhase::Rounds { .. } => match self.shared.model.owner(s) {
                Owner::P2 => Ok(None),
                Owner::P1 => self
                    .shared
                    .lambda2
                    .next_at(self.shared.lambda2.m0, s)
                    .map(Some)
                    .ok_or(StrategyError::Undefined { state: s, memory: None }),
            },
        }
    }

    fn set_recording(&mut self, on: bool) {
        self.record = on;
    }

    fn drain_events(&mut self, out: &mut Vec<Event>) {
        out.append(&mut self.events);
    }
}

/// Immutable parts of the limit-sure strategy `λ_{ε,C}`.
#[derive(Debug)]
pub struct LimitSureShared {
    pub model: Arc<Mdp>,
    pub component: StateSet,
    pub d_max_even: StateSet,
    pub epsilon: Rational,
    pub lambda2: Arc<MooreTable>,
    pub lambda1: Arc<MooreTable>,
    pub schedule: SharedSchedule,
}

#[derive(Debug)]
enum LimitPhase {
    Rounds { pos: usize, len: usize, visited: bool },
    Switched(MooreRunner),
}

/// `λ_{ε,C}`: rounds of `g(i)` randomized moves; the first round missing
/// `D^max_even(p1)` switches to the sure strategy forever.
#[derive(Debug)]
pub struct LimitSureStrategy {
    shared: Arc<LimitSureShared>,
    round: u64,
    phase: LimitPhase,
    started: bool,
    record: bool,
    events: Vec<Event>,
}

impl LimitSureStrategy {
    pub fn new(shared: Arc<LimitSureShared>) -> LimitSureStrategy {
        LimitSureStrategy {
            shared,
            round: 0,
            phase: LimitPhase::Rounds { pos: 0, len: 0, visited: false },
            started: false,
            record: false,
            events: Vec::new(),
        }
    }

    fn emit(&mut self, e: Event) {
        if self.record {
            self.events.push(e);
        }
    }

    fn start_round(&mut self) -> Result<(), StrategyError> {
        let n = horizon_of(&self.shared.schedule, self.round)?;
        self.phase = LimitPhase::Rounds { pos: 0, len: n.max(1), visited: false };
        self.emit(Event::RoundStart { round: self.round, horizon: n });
        Ok(())
    }
}

impl Strategy for LimitSureStrategy {
    fn model(&self) -> &Mdp {
        &self.shared.model
    }

    fn visit(&mut self, s: usize) -> Result<Option<&Distribution>, StrategyError> {
        if !self.started {
            if !self.shared.component.contains(s) {
                return Err(StrategyError::Undefined { state: s, memory: None });
            }
            self.started = true;
            self.start_round()?;
        }
        while let LimitPhase::Rounds { pos, len, visited } = &mut self.phase {
            *visited |= self.shared.d_max_even.contains(s);
            if *pos < *len {
                *pos += 1;
                break;
            }
            let hit = *visited;
            self.emit(Event::RoundEnd { round: self.round, visited: hit });
            self.round += 1;
            if hit {
                self.start_round()?;
            } else {
                self.phase = LimitPhase::Switched(MooreRunner::new(self.shared.model.clone(), self.shared.lambda1.clone()));
                self.emit(Event::SwitchedForever { round: self.round - 1 });
            }
        }
        match &mut self.phase {
            LimitPhase::Switched(runner) => runner.visit(s),
            LimitPhase::Rounds { .. } => match self.shared.model.owner(s) {
                Owner::P2 => Ok(None),
                Owner::P1 => self
                    .shared
                    .lambda2
                    .next_at(self.shared.lambda2.m0, s)
                    .map(Some)
                    .ok_or(StrategyError::Undefined { state: s, memory: None }),
            },
        }
    }

    fn set_recording(&mut self, on: bool) {
        self.record = on;
    }

    fn drain_events(&mut self, out: &mut Vec<Event>) {
        out.append(&mut self.events);
    }
}
