//! Two-player games on MDP arenas: parity games solved with Zielonka's
//! algorithm, and the Büchi∧parity gadget game used for almost-sure
//! reachability under a sure parity constraint.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{attractor_in, Arena, StateSet};
use crate::model::{Mdp, ModelDocument, Owner, PriorityView, StateDoc};

/// A turn-based game arena with one priority function. Probabilities are
/// forgotten: P2 is an antagonistic player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub ids: Vec<String>,
    pub owners: Vec<Owner>,
    pub succ: Vec<Vec<usize>>,
    pub priority: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` has no successor")]
    Blocking(String),
    #[error("duplicate state id `{0}`")]
    Duplicate(String),
}

impl Arena for Game {
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

impl Game {
    pub fn from_mdp(m: &Mdp, view: PriorityView) -> Game {
        Game {
            ids: m.states().iter().map(|s| s.id.clone()).collect(),
            owners: m.states().iter().map(|s| s.owner).collect(),
            succ: (0..m.len()).map(|s| m.succ(s).to_vec()).collect(),
            priority: m.priorities(view),
        }
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    /// Dump in the model document schema: priorities go to `p1`, no `dist`.
    pub fn to_document(&self, buchi: Option<&StateSet>) -> ModelDocument {
        ModelDocument {
            states: (0..self.len())
                .map(|s| StateDoc { id: self.ids[s].clone(), owner: self.owners[s], p1: self.priority[s], p2: 0 })
                .collect(),
            edges: (0..self.len())
                .flat_map(|s| self.succ[s].iter().map(move |&t| (self.ids[s].clone(), self.ids[t].clone())))
                .collect(),
            dist: BTreeMap::new(),
            init: None,
            buchi: buchi.map(|b| b.iter().map(|s| self.ids[s].clone()).collect()),
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<(Game, Option<StateSet>), GameError> {
        let mut index = std::collections::HashMap::new();
        for (i, s) in doc.states.iter().enumerate() {
            if index.insert(s.id.as_str(), i).is_some() {
                return Err(GameError::Duplicate(s.id.clone()));
            }
        }
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| GameError::UnknownState(id.to_string()));
        let mut succ = vec![Vec::new(); doc.states.len()];
        for (f, t) in &doc.edges {
            succ[lookup(f)?].push(lookup(t)?);
        }
        for (s, list) in succ.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.is_empty() {
                return Err(GameError::Blocking(doc.states[s].id.clone()));
            }
        }
        let buchi = match &doc.buchi {
            None => None,
            Some(ids) => {
                let mut b = StateSet::new(doc.states.len());
                for id in ids {
                    b.insert(lookup(id)?);
                }
                Some(b)
            }
        };
        let game = Game {
            ids: doc.states.iter().map(|s| s.id.clone()).collect(),
            owners: doc.states.iter().map(|s| s.owner).collect(),
            succ,
            priority: doc.states.iter().map(|s| s.p1).collect(),
        };
        Ok((game, buchi))
    }
}

/// Winning regions of both players with memoryless winning strategies:
/// `strategy[s]` is the move of the owner of `s` when `s` lies in its own
/// winning region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regions {
    pub w1: StateSet,
    pub w2: StateSet,
    pub strategy: Vec<Option<usize>>,
}

impl Regions {
    pub fn winner(&self, s: usize) -> Owner {
        if self.w1.contains(s) {
            Owner::P1
        } else {
            Owner::P2
        }
    }

    /// The P1 winning strategy restricted to W1.
    pub fn strat1<A: Arena + ?Sized>(&self, a: &A) -> Vec<Option<usize>> {
        (0..self.strategy.len())
            .map(|s| if self.w1.contains(s) && a.owner(s) == Owner::P1 { self.strategy[s] } else { None })
            .collect()
    }
}

fn player_of(priority: u32) -> Owner {
    if priority % 2 == 0 {
        Owner::P1
    } else {
        Owner::P2
    }
}

/// Solves a max-even parity game over any arena.
pub fn solve_parity_arena<A: Arena + ?Sized>(a: &A, priority: &[u32]) -> Regions {
    let n = a.num_states();
    let mut strategy = vec![None; n];
    let domain = StateSet::full(n);
    let w1 = zielonka(a, priority, &domain, &mut strategy);
    let w2 = domain.difference(&w1);
    // keep only moves that belong to the owner's own region
    for s in 0..n {
        let own = match a.owner(s) {
            Owner::P1 => w1.contains(s),
            Owner::P2 => w2.contains(s),
        };
        if !own {
            strategy[s] = None;
        }
    }
    Regions { w1, w2, strategy }
}

pub fn solve_parity(g: &Game) -> Regions {
    solve_parity_arena(g, &g.priority)
}

fn first_succ_in<A: Arena + ?Sized>(a: &A, s: usize, domain: &StateSet) -> Option<usize> {
    a.successors(s).iter().copied().find(|&t| domain.contains(t))
}

/// Zielonka's recursion on the subgame `domain`. Returns P1's winning region
/// and writes winning moves for both players into `strategy`.
fn zielonka<A: Arena + ?Sized>(a: &A, priority: &[u32], domain: &StateSet, strategy: &mut [Option<usize>]) -> StateSet {
    let n = a.num_states();
    if domain.is_empty() {
        return StateSet::new(n);
    }
    let d = domain.iter().map(|s| priority[s]).max().unwrap();
    let alpha = player_of(d);
    let top = StateSet::from_iter(n, domain.iter().filter(|&s| priority[s] == d));
    let attr = attractor_in(a, domain, alpha, &top);
    let rest = domain.difference(&attr.set);
    let w1_rest = zielonka(a, priority, &rest, strategy);
    let w_opp_rest = match alpha {
        Owner::P1 => rest.difference(&w1_rest),
        Owner::P2 => w1_rest.clone(),
    };
    if w_opp_rest.is_empty() {
        for s in attr.set.iter() {
            if a.owner(s) == alpha {
                strategy[s] = attr.strategy[s].or_else(|| first_succ_in(a, s, domain));
            }
        }
        return match alpha {
            Owner::P1 => domain.clone(),
            Owner::P2 => StateSet::new(n),
        };
    }
    let opp = alpha.opponent();
    let b = attractor_in(a, domain, opp, &w_opp_rest);
    for s in b.set.difference(&w_opp_rest).iter() {
        if a.owner(s) == opp {
            strategy[s] = b.strategy[s];
        }
    }
    // moves chosen inside w_opp_rest by the first call stay valid; the second
    // call only touches states outside b
    let remaining = domain.difference(&b.set);
    let w1_remaining = zielonka(a, priority, &remaining, strategy);
    match alpha {
        Owner::P1 => w1_remaining,
        Owner::P2 => w1_remaining.union(&b.set),
    }
}

/// Where a gadget state comes from in the source MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Original(usize),
    Target(usize),
    Square(usize),
    Circle(usize),
}

impl Provenance {
    pub fn source(self) -> usize {
        match self {
            Provenance::Original(s) | Provenance::Target(s) | Provenance::Square(s) | Provenance::Circle(s) => s,
        }
    }
}

/// The gadget game whose P1 winners are exactly the states satisfying
/// S(¬◇R → p) ∧ AS(◇R) in the source MDP. The first `|S|` states are the
/// source states with unchanged indices.
#[derive(Debug, Clone)]
pub struct BuchiParityGame {
    pub game: Game,
    pub buchi: StateSet,
    pub provenance: Vec<Provenance>,
    pub source_len: usize,
    square: Vec<Option<usize>>,
    circle: Vec<Option<usize>>,
}

impl BuchiParityGame {
    pub fn square_of(&self, s: usize) -> Option<usize> {
        self.square[s]
    }

    pub fn circle_of(&self, s: usize) -> Option<usize> {
        self.circle[s]
    }
}

pub fn build_buchi_parity_game(m: &Mdp, r: &StateSet, view: PriorityView) -> BuchiParityGame {
    let n = m.len();
    let mut ids: Vec<String> = m.states().iter().map(|s| s.id.clone()).collect();
    let mut owners: Vec<Owner> = m.states().iter().map(|s| s.owner).collect();
    let mut priority = m.priorities(view);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut provenance: Vec<Provenance> = (0..n).map(Provenance::Original).collect();
    let mut square = vec![None; n];
    let mut circle = vec![None; n];
    for s in 0..n {
        if r.contains(s) {
            continue;
        }
        if m.owner(s) == Owner::P2 {
            let sq = ids.len();
            let ci = sq + 1;
            square[s] = Some(sq);
            circle[s] = Some(ci);
            ids.push(format!("({},square)", m.id(s)));
            ids.push(format!("({},circle)", m.id(s)));
            owners.extend([Owner::P2, Owner::P1]);
            priority.extend([0, 0]);
            provenance.extend([Provenance::Square(s), Provenance::Circle(s)]);
            succ.push(m.succ(s).to_vec());
            succ.push(m.succ(s).to_vec());
        }
    }
    let total = ids.len();
    let mut buchi = StateSet::new(total);
    for s in 0..n {
        if r.contains(s) {
            succ[s] = vec![s];
            priority[s] = 0;
            provenance[s] = Provenance::Target(s);
            buchi.insert(s);
        } else if let (Some(sq), Some(ci)) = (square[s], circle[s]) {
            succ[s] = vec![sq, ci];
            buchi.insert(sq);
        } else {
            succ[s] = m.succ(s).to_vec();
        }
    }
    BuchiParityGame {
        game: Game { ids, owners, succ, priority },
        buchi,
        provenance,
        source_len: n,
        square,
        circle,
    }
}

/// A finite-memory P1 strategy for a Büchi∧parity game. The memory is the
/// largest priority seen since the last Büchi visit.
#[derive(Debug, Clone)]
pub struct BuchiParityStrategy {
    pub memory: usize,
    n: usize,
    buchi: StateSet,
    priority: Vec<u32>,
    choice: Vec<Option<usize>>,
}

impl BuchiParityStrategy {
    pub const INITIAL: usize = 0;

    pub fn update(&self, mem: usize, s: usize) -> usize {
        if self.buchi.contains(s) {
            0
        } else {
            mem.max(self.priority[s] as usize)
        }
    }

    /// The successor chosen at P1 state `s` with memory `mem`, if `(s, mem)`
    /// is winning.
    pub fn next(&self, mem: usize, s: usize) -> Option<usize> {
        self.choice[mem * self.n + s]
    }
}

/// Winning region (with initial memory) and strategy of P1 for Büchi(B) ∧
/// Parity(p) in an arbitrary arena.
#[derive(Debug, Clone)]
pub struct BuchiParitySolution {
    pub w1: StateSet,
    pub strategy: BuchiParityStrategy,
}

impl BuchiParitySolution {
    pub fn wins(&self, s: usize) -> bool {
        self.w1.contains(s)
    }
}

/// Solves Büchi(B) ∧ Parity(p) by a product with the memory "largest
/// priority since the last Büchi visit". A Büchi state carrying memory `m`
/// gets priority `2 + max(m, p(s))`, every other state priority 1; the
/// product play is won iff B recurs and the recurring maximum is even.
pub fn solve_buchi_parity_arena<A: Arena + ?Sized>(a: &A, priority: &[u32], buchi: &StateSet) -> BuchiParitySolution {
    let n = a.num_states();
    let d = priority.iter().copied().max().unwrap_or(0) as usize;
    let memory = d + 1;
    let strategy_shell = BuchiParityStrategy {
        memory,
        n,
        buchi: buchi.clone(),
        priority: priority.to_vec(),
        choice: Vec::new(),
    };
    let idx = |m: usize, s: usize| m * n + s;
    let mut owners = Vec::with_capacity(n * memory);
    let mut succ = Vec::with_capacity(n * memory);
    let mut prod_priority = Vec::with_capacity(n * memory);
    for m in 0..memory {
        for s in 0..n {
            owners.push(a.owner(s));
            let m2 = strategy_shell.update(m, s);
            succ.push(a.successors(s).iter().map(|&t| idx(m2, t)).collect::<Vec<_>>());
            prod_priority.push(if buchi.contains(s) { 2 + m.max(priority[s] as usize) as u32 } else { 1 });
        }
    }
    let product = crate::graph::Graph { owners, succ };
    let regions = solve_parity_arena(&product, &prod_priority);
    let choice = (0..n * memory)
        .map(|ps| {
            if regions.w1.contains(ps) && product.owners[ps] == Owner::P1 {
                regions.strategy[ps].map(|t| t % n)
            } else {
                None
            }
        })
        .collect();
    let w1 = StateSet::from_iter(n, (0..n).filter(|&s| regions.w1.contains(idx(0, s))));
    BuchiParitySolution { w1, strategy: BuchiParityStrategy { choice, ..strategy_shell } }
}

pub fn solve_buchi_parity_game(g: &BuchiParityGame) -> BuchiParitySolution {
    solve_buchi_parity_arena(&g.game, &g.game.priority, &g.buchi)
}

/// Decides whether P1 wins the gadget game from `from`; on a win the
/// returned strategy is winning from every state of the winning region.
pub fn solve_buchi_parity(g: &BuchiParityGame, from: usize) -> (bool, BuchiParitySolution) {
    let sol = solve_buchi_parity_game(g);
    (sol.wins(from), sol)
}
