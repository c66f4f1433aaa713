//! Fourier–Motzkin elimination over the rationals with strict inequalities.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::rational::{int, midpoint, Rational};

/// `coeffs · x < rhs` when `strict`, else `coeffs · x <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub strict: bool,
}

impl Constraint {
    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Constraint { coeffs, rhs, strict: false }
    }

    pub fn lt(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Constraint { coeffs, rhs, strict: true }
    }

    fn scaled(&self) -> Option<Constraint> {
        let lead = self.coeffs.iter().find(|c| !c.is_zero())?.abs();
        Some(Constraint { coeffs: self.coeffs.iter().map(|c| c / &lead).collect(), rhs: &self.rhs / &lead, strict: self.strict })
    }

    fn trivially_holds(&self) -> bool {
        if self.strict {
            self.rhs.is_positive()
        } else {
            !self.rhs.is_negative()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Feasible(Vec<Rational>),
    Infeasible,
    /// Elimination produced more constraints than the budget allows.
    TooLarge,
}

/// Keeps the tightest constraint per normalized coefficient vector.
fn tidy(cs: Vec<Constraint>) -> Option<Vec<Constraint>> {
    let mut best: BTreeMap<Vec<Rational>, (Rational, bool)> = BTreeMap::new();
    for c in cs {
        let Some(c) = c.scaled() else {
            if !c.trivially_holds() {
                return None;
            }
            continue;
        };
        let tighter = match best.get(&c.coeffs) {
            None => true,
            Some((r, s)) => c.rhs < *r || (c.rhs == *r && c.strict && !s),
        };
        if tighter {
            best.insert(c.coeffs, (c.rhs, c.strict));
        }
    }
    Some(best.into_iter().map(|(coeffs, (rhs, strict))| Constraint { coeffs, rhs, strict }).collect())
}

pub fn solve(vars: usize, constraints: Vec<Constraint>, budget: usize) -> Outcome {
    let Some(mut system) = tidy(constraints) else { return Outcome::Infeasible };
    let mut stages = Vec::with_capacity(vars);
    for k in 0..vars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in &system {
            match c.coeffs[k].partial_cmp(&Rational::zero()) {
                Some(std::cmp::Ordering::Greater) => pos.push(c.clone()),
                Some(std::cmp::Ordering::Less) => neg.push(c.clone()),
                _ => rest.push(c.clone()),
            }
        }
        if pos.len() * neg.len() + rest.len() > budget {
            return Outcome::TooLarge;
        }
        for p in &pos {
            for n in &neg {
                let (a, b) = (&p.coeffs[k], -&n.coeffs[k]);
                let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| x * &b + y * a).collect();
                rest.push(Constraint { coeffs, rhs: &p.rhs * &b + &n.rhs * a, strict: p.strict || n.strict });
            }
        }
        stages.push(std::mem::take(&mut system));
        match tidy(rest) {
            Some(next) => system = next,
            None => return Outcome::Infeasible,
        }
    }
    let mut x = vec![Rational::zero(); vars];
    for k in (0..vars).rev() {
        let mut lower: Option<(Rational, bool)> = None;
        let mut upper: Option<(Rational, bool)> = None;
        for c in &stages[k] {
            let a = &c.coeffs[k];
            if a.is_zero() {
                continue;
            }
            let others: Rational = (k + 1..vars).map(|j| &c.coeffs[j] * &x[j]).sum();
            let bound = (&c.rhs - others) / a;
            if a.is_positive() {
                if upper.as_ref().map_or(true, |(u, s)| bound < *u || (bound == *u && c.strict && !s)) {
                    upper = Some((bound, c.strict));
                }
            } else if lower.as_ref().map_or(true, |(l, s)| bound > *l || (bound == *l && c.strict && !s)) {
                lower = Some((bound, c.strict));
            }
        }
        x[k] = match (lower, upper) {
            (Some((l, _)), Some((u, _))) if l == u => l,
            (Some((l, ls)), Some((u, us))) => match (ls, us) {
                (_, false) => u,
                (false, true) => l,
                _ => midpoint(&l, &u),
            },
            (Some((l, strict)), None) => if strict { l + Rational::one() } else { l },
            (None, Some((u, strict))) => if strict { u - Rational::one() } else { u },
            (None, None) => int(0),
        };
    }
    Outcome::Feasible(x)
}
