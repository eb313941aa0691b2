//! Routes a property to the matching decider and verifier.

use std::sync::Arc;

use bwc_core::bwc::{self, Mode};
use bwc_core::games::{solve_parity, Game};
use bwc_core::reach::{decide_sure_parity_as_reach, decide_sure_parity_threshold_reach, Decision, ReachError, Stage};
use bwc_core::strategies::{MooreTable, StrategySpec};
use bwc_core::verify::{verify_spec, Objective, VerifyError, VerifyReport};
use bwc_core::{Mdp, PriorityView, StateSet};
use num::One;
use thiserror::Error;

use crate::prop::{Bound, PropertyExpr, Target};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("unknown state `{0}` in reach target")]
    UnknownState(String),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// The model with its two priority functions exchanged. Strategies do not
/// depend on priorities, so witnesses carry over unchanged.
pub fn swap_views(m: &Mdp) -> Mdp {
    let mut doc = m.to_document();
    for st in &mut doc.states {
        std::mem::swap(&mut st.p1, &mut st.p2);
    }
    Mdp::from_document(&doc).expect("swapping priorities keeps a model valid")
}

/// The property restated with the sure atom on p1 whenever the probabilistic
/// atom is about the other parity objective.
struct Normal {
    model: Arc<Mdp>,
    sure: PriorityView,
    objective: Objective,
}

fn normalize(m: &Arc<Mdp>, prop: &PropertyExpr) -> Result<Normal, QueryError> {
    Ok(match &prop.target {
        Target::Parity(v) if *v != prop.sure && prop.sure == PriorityView::P2 => {
            Normal { model: Arc::new(swap_views(m)), sure: PriorityView::P1, objective: Objective::Parity(PriorityView::P2) }
        }
        Target::Parity(v) => Normal { model: m.clone(), sure: prop.sure, objective: Objective::Parity(*v) },
        Target::Reach(ids) => Normal { model: m.clone(), sure: prop.sure, objective: Objective::Reach(target_set(m, ids)?) },
    })
}

fn target_set(m: &Mdp, ids: &[String]) -> Result<StateSet, QueryError> {
    m.set_of(ids).map_err(QueryError::UnknownState)
}

/// Decides `s0 ⊨ prop`.
pub fn decide_property(m: &Arc<Mdp>, s0: usize, prop: &PropertyExpr) -> Result<Decision, QueryError> {
    let n = normalize(m, prop)?;
    let model = n.model.as_ref();
    let decision = match (&n.objective, &prop.bound) {
        (Objective::Parity(v), _) if *v == n.sure => {
            // the sure atom implies the probabilistic one
            let regions = solve_parity(&Game::from_mdp(model, n.sure));
            let win = regions.w1.clone();
            let trace = vec![Stage { name: "sure-parity-region".into(), detail: model.ids_of(&win).into() }];
            if win.contains(s0) {
                let table = MooreTable::from_choices(&regions.strat1(model));
                Decision::yes(StrategySpec::moore("sure-parity", table), trace)
            } else {
                Decision::no(format!("S({}) fails at {}", n.sure, model.id(s0)), trace)
            }
        }
        (Objective::Parity(_), Bound::AlmostSure) => bwc::decide(model, s0, &Mode::AlmostSure)?,
        (Objective::Parity(_), Bound::Threshold(cmp, c)) => {
            bwc::decide(model, s0, &Mode::Threshold { cmp: *cmp, c: c.clone() })?
        }
        (Objective::Reach(t), Bound::AlmostSure) => decide_sure_parity_as_reach(model, s0, n.sure, t)?,
        (Objective::Reach(t), Bound::Threshold(cmp, c)) => {
            decide_sure_parity_threshold_reach(model, s0, n.sure, t, *cmp, c)?
        }
        (Objective::Both, _) => unreachable!("properties name a single objective"),
    };
    Ok(decision)
}

/// Verifies `spec` against `prop` from `s0`. The verdict holds when the sure
/// objective holds and the computed probability, exact or a lower bound,
/// meets the bound.
pub fn verify_property(
    m: &Arc<Mdp>,
    spec: &StrategySpec,
    s0: usize,
    prop: &PropertyExpr,
) -> Result<(bool, VerifyReport), QueryError> {
    let n = normalize(m, prop)?;
    let report = verify_spec(&n.model, spec, s0, n.sure, &n.objective)?;
    let meets = match &prop.bound {
        Bound::AlmostSure => report.probability.is_one(),
        Bound::Threshold(cmp, c) => cmp.holds(&report.probability, c),
    };
    Ok((report.sure.holds() && meets, report))
}
