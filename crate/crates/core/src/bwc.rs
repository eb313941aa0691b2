//! Deciders for S(p1) ∧ AS(p2) and S(p1) ∧ P~c(p2).

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::components::{ugec_states, vgec_states, UgecReport, VgecReport};
use crate::graph::StateSet;
use crate::model::{format_rational, Mdp, PriorityView, Rational, SubMdp};
use crate::reach::{
    decide_sure_parity_threshold_reach, horizon_for_threshold, ids_json, max_reach_values, solve_as_reach, stage,
    sure_region, Cmp, Decision, ReachError,
};
use crate::strategies::counter::limit_sure_bound;
use crate::strategies::spec::{LimitSureSpec, UgecSpec};
use crate::strategies::{MooreTable, StrategySpec, Switch, Trigger};

/// The probabilistic side of a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    AlmostSure,
    Threshold {
        cmp: Cmp,
        #[serde(with = "crate::model::rational_string")]
        c: Rational,
    },
}

/// Strategy `λ_C` for a recorded ultra-good component, in `m`'s indices.
fn ugec_spec(report: &UgecReport, j: usize) -> StrategySpec {
    let u = &report.ugecs[j];
    StrategySpec::Ugec {
        construction: "ugec-rounds".into(),
        params: UgecSpec {
            component: u.component.to_vec(),
            sub_component: u.cond2.sub_component.as_ref().expect("recorded components pass").to_vec(),
            d_max_even: u.cond2.d_max_even1.to_vec(),
            c_max_even: u.cond1.c_max_even.to_vec(),
            lambda2: u.cond2.lambda2.clone().expect("recorded components pass"),
            lambda1: u.cond1.lambda1.clone().expect("recorded components pass"),
        },
    }
}

/// One `Enter(C) → λ_C` switch per ultra-good component, largest first.
fn ugec_switches(report: &UgecReport) -> Vec<Switch> {
    let mut order: Vec<usize> = (0..report.ugecs.len()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(report.ugecs[j].component.len()));
    order
        .into_iter()
        .map(|j| Switch {
            trigger: Trigger::Enter { states: report.ugecs[j].component.to_vec() },
            inner: ugec_spec(report, j),
        })
        .collect()
}

/// Decides `s0 ⊨ S(p1) ∧ AS(p2)`: reach the union of ultra-good components
/// almost surely while keeping p1 surely, then play the component strategy.
pub fn decide_sure_as(m: &Mdp, s0: usize) -> Result<Decision, ReachError> {
    let report = ugec_states(m);
    let mut trace = vec![stage("ugec-union", ids_json(m, &report.union))];
    let sol = solve_as_reach(m, PriorityView::P1, &report.union)?;
    trace.push(stage("sure-parity-region", ids_json(m, &sol.parity_win)));
    if !sol.parity_win.contains(s0) {
        return Ok(Decision::no(format!("S(p1) fails at {}", m.id(s0)), trace));
    }
    trace.push(stage("as-reach-region", ids_json(m, &sol.win)));
    if !sol.win.contains(s0) {
        return Ok(Decision::no(
            format!("ultra-good components not reachable almost surely under S(p1) from {}", m.id(s0)),
            trace,
        ));
    }
    let spec = StrategySpec::Composite {
        construction: "sure-as-parity".into(),
        outer: Box::new(StrategySpec::moore("sure-parity-as-reach", sol.reach.expect("winning states have a table"))),
        switches: ugec_switches(&report),
    };
    Ok(Decision::yes(spec, trace))
}

/// Largest `ε = 1/2^j` (`j ≥ 1`) with `q(1-ε) > c`.
pub fn choose_epsilon(q: &Rational, c: &Rational) -> Rational {
    assert!(q > c, "epsilon exists only below the reach value");
    let mut eps = Rational::new(1.into(), 2.into());
    while q * (Rational::one() - &eps) <= *c {
        eps /= Rational::from_integer(2.into());
    }
    eps
}

/// Witness for `S(p1) ∧ P>c(p2)` when the very-good components are reached
/// with probability `q > c`.
fn limit_sure_witness(
    mw: &Mdp,
    vgec: &VgecReport,
    lambda1: &MooreTable,
    s0: usize,
    c: &Rational,
    trace: &mut Vec<crate::reach::Stage>,
) -> Result<StrategySpec, ReachError> {
    let v = max_reach_values(mw, &vgec.union);
    let q = &v.values[s0];
    let eps = choose_epsilon(q, c);
    let r = horizon_for_threshold(mw, &v, &vgec.union, s0, &(c / (Rational::one() - &eps)))?;
    trace.push(stage(
        "limit-sure-parameters",
        serde_json::json!({"epsilon": format_rational(&eps), "steps": r, "inner_bound": format_rational(&limit_sure_bound(&eps, 0))}),
    ));
    let mut switches: Vec<Switch> = vgec
        .components
        .iter()
        .map(|(comp, r2)| Switch {
            trigger: Trigger::Enter { states: comp.to_vec() },
            inner: StrategySpec::LimitSure {
                construction: "limit-sure-rounds".into(),
                params: LimitSureSpec {
                    component: comp.to_vec(),
                    sub_component: r2.sub_component.as_ref().expect("recorded components pass").to_vec(),
                    d_max_even: r2.d_max_even1.to_vec(),
                    epsilon: eps.clone(),
                    lambda2: r2.lambda2.clone().expect("recorded components pass"),
                    lambda1: lambda1.clone(),
                },
            },
        })
        .collect();
    switches.push(Switch {
        trigger: Trigger::AfterSteps { steps: r as u64 },
        inner: StrategySpec::moore("sure-parity", lambda1.clone()),
    });
    Ok(StrategySpec::Composite {
        construction: "threshold-parity-vgec".into(),
        outer: Box::new(StrategySpec::moore("optimal-reach", v.table())),
        switches,
    })
}

/// Decides `s0 ⊨ S(p1) ∧ P~c(p2)` for `c ∈ [0,1)`.
pub fn decide_sure_threshold(m: &Mdp, s0: usize, cmp: Cmp, c: &Rational) -> Result<Decision, ReachError> {
    if *c < Rational::zero() || *c >= Rational::one() {
        return Err(ReachError::ThresholdRange(format_rational(c)));
    }
    let region = sure_region(m, PriorityView::P1);
    let mut trace = vec![stage("sure-parity-region", ids_json(m, &region.win))];
    let Some(sub) = region.sub.as_ref().filter(|_| region.win.contains(s0)) else {
        return Ok(Decision::no(format!("S(p1) fails at {}", m.id(s0)), trace));
    };
    let lift = |spec: StrategySpec, sub: &SubMdp| spec.lift(sub);
    let mw = &sub.mdp;
    let s0w = sub.from_parent(s0).unwrap();
    let lambda1 = MooreTable::from_choices(&region.lambda);
    let vgec = vgec_states(mw);
    trace.push(stage("vgec-union", ids_json(m, &sub.lift_set(&vgec.union))));
    let to_v = max_reach_values(mw, &vgec.union);
    let q = to_v.values[s0w].clone();
    trace.push(stage("vgec-reach-value", serde_json::Value::from(format_rational(&q))));
    if q > *c {
        let spec = limit_sure_witness(mw, &vgec, &lambda1, s0w, c, &mut trace)?;
        return Ok(Decision::yes(lift(spec, sub), trace));
    }
    if cmp == Cmp::Gt {
        return Ok(Decision::no(
            format!("very-good components reached with probability {} ≤ {}", format_rational(&q), format_rational(c)),
            trace,
        ));
    }
    let ugec = ugec_states(mw);
    trace.push(stage("ugec-union", ids_json(m, &sub.lift_set(&ugec.union))));
    let inner = decide_sure_parity_threshold_reach(mw, s0w, PriorityView::P1, &ugec.union, Cmp::Ge, c)?;
    trace.extend(inner.trace.iter().map(|st| crate::reach::Stage { name: format!("ugec-reach/{}", st.name), detail: st.detail.clone() }));
    let Some(reach) = inner.witness else {
        return Ok(Decision::no(inner.reason.unwrap_or_default(), trace));
    };
    let spec = if c.is_zero() {
        reach
    } else {
        StrategySpec::Composite {
            construction: "threshold-parity-ugec".into(),
            outer: Box::new(reach),
            switches: ugec_switches(&ugec),
        }
    };
    Ok(Decision::yes(lift(spec, sub), trace))
}

/// Dispatches on the query mode.
pub fn decide(m: &Mdp, s0: usize, mode: &Mode) -> Result<Decision, ReachError> {
    match mode {
        Mode::AlmostSure => decide_sure_as(m, s0),
        Mode::Threshold { cmp, c } => decide_sure_threshold(m, s0, *cmp, c),
    }
}

/// States of `m` from which `S(p1)` holds.
pub fn sure_parity_region(m: &Mdp) -> StateSet {
    sure_region(m, PriorityView::P1).win
}
