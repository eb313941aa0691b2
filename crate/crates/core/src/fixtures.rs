//! The golden models shipped in `models/`, embedded for tests and examples.

use crate::model::{parse_mdp, Mdp};

pub const FIG1: &str = include_str!("../../../models/fig1.json");
pub const FIG2: &str = include_str!("../../../models/fig2.json");
pub const FIG3: &str = include_str!("../../../models/fig3.json");
pub const DIAMOND_ODD: &str = include_str!("../../../models/diamond_odd.json");
pub const DIAMOND_EVEN: &str = include_str!("../../../models/diamond_even.json");
pub const COIN: &str = include_str!("../../../models/coin.json");
pub const LOOP_ODD: &str = include_str!("../../../models/loop_odd.json");
pub const LOOP_EVEN: &str = include_str!("../../../models/loop_even.json");

fn load(text: &str) -> Mdp {
    parse_mdp(text).expect("golden models are valid")
}

/// Four-state model where S(p1) and AS(p2) both hold from `a` but only with
/// infinite memory.
pub fn fig1() -> Mdp {
    load(FIG1)
}

/// Five-state model that is a single ultra-good end-component.
pub fn fig2() -> Mdp {
    load(FIG2)
}

/// Model whose component {a,b,c} is very-good but not ultra-good.
pub fn fig3() -> Mdp {
    load(FIG3)
}

/// `s0` chooses between a fair coin toward `t` and the sink `w`; `t` has an
/// odd priority.
pub fn diamond_odd() -> Mdp {
    load(DIAMOND_ODD)
}

pub fn diamond_even() -> Mdp {
    load(DIAMOND_EVEN)
}

/// A fair coin from `s0` either enters a copy of [`fig3`] or the odd sink `z`.
pub fn coin() -> Mdp {
    load(COIN)
}

/// Reaching `t` with the maximal probability 1/2 forces the loop `a b`,
/// whose priority at `a` is odd.
pub fn loop_odd() -> Mdp {
    load(LOOP_ODD)
}

pub fn loop_even() -> Mdp {
    load(LOOP_EVEN)
}

/// All golden models by name.
pub fn all() -> Vec<(&'static str, Mdp)> {
    vec![
        ("fig1", fig1()),
        ("fig2", fig2()),
        ("fig3", fig3()),
        ("diamond_odd", diamond_odd()),
        ("diamond_even", diamond_even()),
        ("coin", coin()),
        ("loop_odd", loop_odd()),
        ("loop_even", loop_even()),
    ]
}
