use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::StateSet;
use crate::model::{Mdp, Owner, PriorityView};
use crate::strategies::{Distribution, Event, PreparedStrategy, StrategyError, StrategySpec};

/// Sets the simulator tracks for a counter strategy, independently of the
/// strategy's own bookkeeping.
#[derive(Debug, Clone)]
struct RoundSets {
    d_max_even: StateSet,
    /// Recovery target; `None` for strategies that switch away for good.
    c_max_even: Option<StateSet>,
}

fn round_sets(m: &Mdp, spec: &StrategySpec) -> Option<RoundSets> {
    let set = |v: &[usize]| StateSet::from_iter(m.len(), v.iter().copied());
    match spec {
        StrategySpec::Ugec { params, .. } => Some(RoundSets {
            d_max_even: set(&params.d_max_even),
            c_max_even: Some(set(&params.c_max_even)),
        }),
        StrategySpec::LimitSure { params, .. } => Some(RoundSets { d_max_even: set(&params.d_max_even), c_max_even: None }),
        _ => None,
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub run: u64,
    /// Rounds whose bookkeeping contradicted the trajectory, or whose miss
    /// was not followed by the prescribed recovery.
    pub violations: u64,
    pub rounds_completed: u64,
    /// Indices of rounds that missed their target.
    pub missed_rounds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switched_round: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triggered: Option<usize>,
    /// Maximal priorities (p1, p2) over the last window of the run.
    pub window_max: (u32, u32),
    pub final_state: usize,
    pub fingerprint: u64,
}

/// Per-round aggregate over all runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundStat {
    pub round: u64,
    pub completed: u64,
    pub missed: u64,
}

impl RoundStat {
    pub fn miss_frequency(&self) -> f64 {
        if self.completed == 0 {
            0.0
        } else {
            self.missed as f64 / self.completed as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub runs: u64,
    pub steps: u64,
    pub seed: u64,
    pub window: u64,
    pub violations: u64,
    pub runs_switched: u64,
    pub rounds: Vec<RoundStat>,
    /// Fraction of runs whose last window has even maximal priority, per view.
    pub window_even: (f64, f64),
    /// Hash of all trajectories, for reproducibility checks.
    pub fingerprint: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<RunSummary>,
}

struct Tracker<'a> {
    per_switch: Vec<Option<RoundSets>>,
    active: Option<RoundSets>,
    spec_switches: bool,
    open_round: Option<(u64, bool)>,
    expect_after_miss: Option<u64>,
    recovering: bool,
    summary: &'a mut RunSummary,
}

impl Tracker<'_> {
    fn visit(&mut self, s: usize, events: &[Event]) {
        if let (Some((_, seen)), Some(a)) = (&mut self.open_round, &self.active) {
            *seen |= a.d_max_even.contains(s);
        }
        for e in events {
            if let Some(round) = self.expect_after_miss.take() {
                let ok = matches!(e, Event::RecoveryStart { round: r } | Event::SwitchedForever { round: r } if *r == round);
                if !ok {
                    self.summary.violations += 1;
                }
            }
            match e {
                Event::Triggered { switch } => {
                    self.summary.triggered = Some(*switch);
                    if self.spec_switches {
                        self.active = self.per_switch[*switch].clone();
                    }
                }
                Event::RoundStart { round, .. } => {
                    if self.recovering || self.open_round.is_some() {
                        self.summary.violations += 1;
                    }
                    let seen = self.active.as_ref().is_some_and(|a| a.d_max_even.contains(s));
                    self.open_round = Some((*round, seen));
                }
                Event::RoundEnd { round, visited } => {
                    match self.open_round.take() {
                        Some((r, seen)) if r == *round && seen == *visited => {}
                        _ => self.summary.violations += 1,
                    }
                    self.summary.rounds_completed += 1;
                    if !visited {
                        self.summary.missed_rounds.push(*round);
                        self.expect_after_miss = Some(*round);
                    }
                }
                Event::RecoveryStart { .. } => self.recovering = true,
                Event::RecoveryEnd => {
                    let at_target = self.active.as_ref().and_then(|a| a.c_max_even.as_ref()).is_some_and(|c| c.contains(s));
                    if !self.recovering || !at_target {
                        self.summary.violations += 1;
                    }
                    self.recovering = false;
                }
                Event::SwitchedForever { round } => {
                    self.summary.switched_round = Some(*round);
                    self.active = None;
                }
            }
        }
        if self.expect_after_miss.take().is_some() {
            // the miss event must come in the same visit
            self.summary.violations += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_once(
    m: &Mdp,
    prepared: &PreparedStrategy,
    p2_moves: &[Option<Distribution>],
    s0: usize,
    steps: u64,
    seed: u64,
    run: u64,
    window: u64,
) -> Result<RunSummary, StrategyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    let spec = prepared.spec();
    let (top, per_switch) = match spec {
        StrategySpec::Composite { switches, .. } => (None, switches.iter().map(|sw| round_sets(m, &sw.inner)).collect()),
        other => (round_sets(m, other), Vec::new()),
    };
    let mut summary = RunSummary {
        run,
        violations: 0,
        rounds_completed: 0,
        missed_rounds: Vec::new(),
        switched_round: None,
        triggered: None,
        window_max: (0, 0),
        final_state: s0,
        fingerprint: 0,
    };
    let spec_switches = !per_switch.is_empty();
    let mut tracker = Tracker {
        active: top,
        per_switch,
        spec_switches,
        open_round: None,
        expect_after_miss: None,
        recovering: false,
        summary: &mut summary,
    };
    let mut strat = prepared.instance();
    strat.set_recording(true);
    let mut hasher = DefaultHasher::new();
    let mut events = Vec::new();
    let mut window_max = (0u32, 0u32);
    let mut s = s0;
    for pos in 0..=steps {
        s.hash(&mut hasher);
        if pos + window > steps {
            window_max.0 = window_max.0.max(m.priority(PriorityView::P1, s));
            window_max.1 = window_max.1.max(m.priority(PriorityView::P2, s));
        }
        let next = match m.owner(s) {
            Owner::P1 => {
                let d = strat.next_move(s)?;
                if pos < steps {
                    Some(d.sample(&mut rng))
                } else {
                    None
                }
            }
            Owner::P2 => {
                strat.observe(s)?;
                (pos < steps).then(|| p2_moves[s].as_ref().expect("P2 states have distributions").sample(&mut rng))
            }
        };
        strat.drain_events(&mut events);
        tracker.visit(s, &events);
        events.clear();
        match next {
            Some(t) => s = t,
            None => break,
        }
    }
    drop(tracker);
    summary.window_max = window_max;
    summary.final_state = s;
    summary.fingerprint = hasher.finish();
    Ok(summary)
}

/// Simulates `runs` plays of `steps` moves each from `s0`. Run `i` draws from
/// the ChaCha8 stream `i` of `seed`, so results do not depend on scheduling.
/// Counter strategies are watched round by round: the simulator recomputes
/// whether each round hit its target and checks that every miss is followed
/// by the prescribed recovery or switch.
pub fn simulate(
    m: &Arc<Mdp>,
    spec: &StrategySpec,
    s0: usize,
    runs: u64,
    steps: u64,
    seed: u64,
    keep_details: bool,
) -> Result<SimReport, StrategyError> {
    let prepared = PreparedStrategy::new(m.clone(), spec)?;
    let p2_moves: Vec<Option<Distribution>> = (0..m.len())
        .map(|s| {
            m.dist(s).map(|d| {
                Distribution::new(m.succ(s).iter().copied().zip(d.iter().cloned()).collect()).expect("validated model")
            })
        })
        .collect();
    let window = (steps / 10).max(1);
    let results: Vec<RunSummary> = (0..runs)
        .into_par_iter()
        .map(|run| run_once(m, &prepared, &p2_moves, s0, steps, seed, run, window))
        .collect::<Result<_, _>>()?;
    let mut rounds: Vec<RoundStat> = Vec::new();
    let mut fingerprint = DefaultHasher::new();
    let mut even = (0u64, 0u64);
    for r in &results {
        r.fingerprint.hash(&mut fingerprint);
        while (rounds.len() as u64) < r.rounds_completed {
            let round = rounds.len() as u64;
            rounds.push(RoundStat { round, completed: 0, missed: 0 });
        }
        for stat in rounds.iter_mut().take(r.rounds_completed as usize) {
            stat.completed += 1;
        }
        for &i in &r.missed_rounds {
            rounds[i as usize].missed += 1;
        }
        even.0 += (r.window_max.0 % 2 == 0) as u64;
        even.1 += (r.window_max.1 % 2 == 0) as u64;
    }
    Ok(SimReport {
        runs,
        steps,
        seed,
        window,
        violations: results.iter().map(|r| r.violations).sum(),
        runs_switched: results.iter().filter(|r| r.switched_round.is_some()).count() as u64,
        rounds,
        window_even: (even.0 as f64 / runs.max(1) as f64, even.1 as f64 / runs.max(1) as f64),
        fingerprint: fingerprint.finish(),
        details: if keep_details { results } else { Vec::new() },
    })
}
