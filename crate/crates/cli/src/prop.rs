//! Property expressions `O1(A1) & O2(A2)`: one sure parity atom and one
//! probabilistic atom.

use std::fmt;

use bwc_core::model::{format_rational, parse_rational, RationalError};
use bwc_core::reach::Cmp;
use bwc_core::{PriorityView, Rational};
use num::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Parity(PriorityView),
    /// Reachability of the listed state ids.
    Reach(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    AlmostSure,
    Threshold(Cmp, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyExpr {
    pub sure: PriorityView,
    pub target: Target,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropError {
    #[error("expected two atoms joined by `&`, found {0}")]
    Arity(usize),
    #[error("expected exactly one sure atom and one probabilistic atom")]
    Shape,
    #[error("cannot parse atom `{0}`")]
    Atom(String),
    #[error("unknown objective `{0}`, expected p1, p2 or `reach <ids>`")]
    Objective(String),
    #[error("bad threshold: {0}")]
    Threshold(#[from] RationalError),
    #[error("threshold {0} outside [0,1), use AS(..) for probability one")]
    Range(String),
    #[error("reach target is empty")]
    EmptyTarget,
}

enum Atom {
    Sure(PriorityView),
    Prob(Target, Bound),
}

fn view(text: &str) -> Option<PriorityView> {
    match text {
        "p1" => Some(PriorityView::P1),
        "p2" => Some(PriorityView::P2),
        _ => None,
    }
}

fn objective(text: &str) -> Result<Target, PropError> {
    let text = text.trim();
    if let Some(v) = view(text) {
        return Ok(Target::Parity(v));
    }
    let Some(rest) = text.strip_prefix("reach") else {
        return Err(PropError::Objective(text.to_string()));
    };
    let rest = rest.trim().trim_start_matches('{').trim_end_matches('}');
    let ids: Vec<String> =
        rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(String::from).collect();
    if ids.is_empty() {
        return Err(PropError::EmptyTarget);
    }
    Ok(Target::Reach(ids))
}

/// `q` or `1-q` with `q` a rational.
fn threshold(text: &str) -> Result<Rational, PropError> {
    let text = text.trim();
    let c = match text.strip_prefix("1-") {
        Some(q) => Rational::one() - parse_rational(q)?,
        None => parse_rational(text)?,
    };
    if c < Rational::zero() {
        return Err(PropError::Range(format_rational(&c)));
    }
    Ok(c)
}

fn atom(text: &str) -> Result<Atom, PropError> {
    let text = text.trim();
    let bad = || PropError::Atom(text.to_string());
    let open = text.find('(').ok_or_else(bad)?;
    let inner = text[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let head = text[..open].trim();
    match head {
        "S" => view(inner.trim()).map(Atom::Sure).ok_or_else(|| PropError::Objective(inner.trim().to_string())),
        "AS" => Ok(Atom::Prob(objective(inner)?, Bound::AlmostSure)),
        _ => {
            let rest = head.strip_prefix('P').ok_or_else(bad)?;
            let (cmp, c) = match rest.strip_prefix(">=") {
                Some(c) => (Cmp::Ge, c),
                None => (Cmp::Gt, rest.strip_prefix('>').ok_or_else(bad)?),
            };
            let c = threshold(c)?;
            let bound = if cmp == Cmp::Ge && c.is_one() {
                Bound::AlmostSure
            } else if c >= Rational::one() {
                return Err(PropError::Range(format_rational(&c)));
            } else {
                Bound::Threshold(cmp, c)
            };
            Ok(Atom::Prob(objective(inner)?, bound))
        }
    }
}

impl std::str::FromStr for PropertyExpr {
    type Err = PropError;

    fn from_str(text: &str) -> Result<PropertyExpr, PropError> {
        let parts: Vec<&str> = text.split(['&', '∧']).filter(|p| !p.trim().is_empty()).collect();
        if parts.len() != 2 {
            return Err(PropError::Arity(parts.len()));
        }
        match (atom(parts[0])?, atom(parts[1])?) {
            (Atom::Sure(sure), Atom::Prob(target, bound)) | (Atom::Prob(target, bound), Atom::Sure(sure)) => {
                Ok(PropertyExpr { sure, target, bound })
            }
            _ => Err(PropError::Shape),
        }
    }
}

impl fmt::Display for PropertyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let obj = match &self.target {
            Target::Parity(v) => v.to_string(),
            Target::Reach(ids) => format!("reach {{{}}}", ids.join(",")),
        };
        match &self.bound {
            Bound::AlmostSure => write!(f, "S({}) & AS({obj})", self.sure),
            Bound::Threshold(cmp, c) => write!(f, "S({}) & P{cmp}{}({obj})", self.sure, format_rational(c)),
        }
    }
}
