//! Subsets of the nonnegative rationals given as finite unions of intervals,
//! optionally restricted to a lattice and with finitely many points removed.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_multiple, Rational};

/// One interval of a carrier. `hi == None` means unbounded above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub lo: Rational,
    pub lo_closed: bool,
    pub hi: Option<Rational>,
    pub hi_closed: bool,
}

impl Component {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Component { lo, lo_closed: true, hi: Some(hi), hi_closed: true }
    }

    pub fn point(x: Rational) -> Self {
        Component::closed(x.clone(), x)
    }

    pub fn right_open(lo: Rational, hi: Rational) -> Self {
        Component { lo, lo_closed: true, hi: Some(hi), hi_closed: false }
    }

    pub fn left_open(lo: Rational, hi: Rational) -> Self {
        Component { lo, lo_closed: false, hi: Some(hi), hi_closed: true }
    }

    pub fn ray(lo: Rational, lo_closed: bool) -> Self {
        Component { lo, lo_closed, hi: None, hi_closed: false }
    }

    pub fn is_point(&self) -> bool {
        self.hi.as_ref() == Some(&self.lo)
    }

    fn admits(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = match &self.hi {
            None => true,
            Some(h) if self.hi_closed => x <= h,
            Some(h) => x < h,
        };
        above && below
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        match &self.hi {
            None => write!(f, "{open}{}, inf)", self.lo),
            Some(h) => {
                let close = if self.hi_closed { ']' } else { ')' };
                write!(f, "{open}{}, {h}{close}", self.lo)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalUnionCarrier {
    pub components: Vec<Component>,
    pub lattice: Option<Rational>,
    pub excluded: BTreeSet<Rational>,
}

impl IntervalUnionCarrier {
    pub fn new(components: Vec<Component>, lattice: Option<Rational>, excluded: BTreeSet<Rational>) -> Result<Self> {
        let c = IntervalUnionCarrier { components, lattice, excluded };
        c.validate()?;
        Ok(c)
    }

    /// Finite set of rationals, one singleton component each.
    pub fn from_points(points: &[Rational]) -> Result<Self> {
        let mut sorted = points.to_vec();
        sorted.sort();
        sorted.dedup();
        IntervalUnionCarrier::new(sorted.into_iter().map(Component::point).collect(), None, BTreeSet::new())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.components.is_empty() {
            return bad("carrier has no components".into());
        }
        if let Some(h) = &self.lattice {
            if !h.is_positive() {
                return bad(format!("lattice step {h} is not positive"));
            }
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.lo.is_negative() {
                return bad(format!("component {c} has a negative endpoint"));
            }
            match &c.hi {
                None if c.hi_closed => return bad(format!("component {i} is closed at infinity")),
                Some(h) if h < &c.lo || (h == &c.lo && !(c.lo_closed && c.hi_closed)) => {
                    return bad(format!("component {c} is empty"));
                }
                _ => {}
            }
            if let Some(prev) = i.checked_sub(1).map(|j| &self.components[j]) {
                let ordered = match &prev.hi {
                    None => false,
                    Some(h) => h < &c.lo || (h == &c.lo && !(prev.hi_closed && c.lo_closed)),
                };
                if !ordered {
                    return bad(format!("components {prev} and {c} overlap or are unsorted"));
                }
            }
            if self.lattice.is_some() && self.first_in_component(c, &c.lo, c.lo_closed).is_none() {
                return bad(format!("component {c} holds no lattice point"));
            }
        }
        for e in &self.excluded {
            if !self.components.iter().any(|c| c.admits(e)) {
                return bad(format!("excluded point {e} lies outside every component"));
            }
        }
        if !self.contains(&Rational::zero()) {
            return bad("0 is not in the carrier".into());
        }
        Ok(())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        if self.excluded.contains(x) {
            return false;
        }
        if let Some(h) = &self.lattice {
            if !is_multiple(x, h) {
                return false;
            }
        }
        self.components.iter().any(|c| c.admits(x))
    }

    /// True when every bounded part of the carrier is finite.
    pub fn is_locally_finite(&self) -> bool {
        self.lattice.is_some() || self.components.iter().all(Component::is_point)
    }

    pub fn is_bounded(&self) -> bool {
        self.components.last().map_or(true, |c| c.hi.is_some())
    }

    /// Largest element, when one exists.
    pub fn max_elem(&self) -> Option<Rational> {
        let top = self.components.last()?;
        let h = top.hi.clone()?;
        match self.sup_below(&h, false) {
            Some((m, true)) => Some(m),
            _ => None,
        }
    }

    /// All elements of a finite carrier, ascending.
    pub fn elements(&self) -> Option<Vec<Rational>> {
        if !self.is_bounded() || !self.is_locally_finite() {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = self.inf_from(&Rational::zero(), false);
        while let Some((x, _)) = cur {
            cur = self.inf_from(&x, true);
            out.push(x);
        }
        Some(out)
    }

    /// Finite endpoints and excluded points, ascending.
    pub fn critical_points(&self) -> Vec<Rational> {
        let mut pts: BTreeSet<Rational> = self.excluded.clone();
        pts.insert(Rational::zero());
        for c in &self.components {
            pts.insert(c.lo.clone());
            if let Some(h) = &c.hi {
                pts.insert(h.clone());
            }
        }
        pts.into_iter().collect()
    }

    /// Infimum of `{x in S : x >= c}` (or `x > c` when `strict`), with whether it is attained.
    pub fn inf_from(&self, c: &Rational, strict: bool) -> Option<(Rational, bool)> {
        for comp in &self.components {
            if let Some(hit) = self.inf_in_component(comp, c, strict) {
                return Some(hit);
            }
        }
        None
    }

    /// Supremum of `{x in S : x <= c}` (or `x < c` when `strict`), with whether it is attained.
    pub fn sup_below(&self, c: &Rational, strict: bool) -> Option<(Rational, bool)> {
        for comp in self.components.iter().rev() {
            if let Some(hit) = self.sup_in_component(comp, c, strict) {
                return Some(hit);
            }
        }
        None
    }

    fn inf_in_component(&self, comp: &Component, c: &Rational, strict: bool) -> Option<(Rational, bool)> {
        let (start, incl) = if c > &comp.lo {
            (c.clone(), !strict)
        } else if c < &comp.lo {
            (comp.lo.clone(), comp.lo_closed)
        } else {
            (comp.lo.clone(), comp.lo_closed && !strict)
        };
        if self.lattice.is_some() {
            return self.first_in_component(comp, &start, incl).map(|x| (x, true));
        }
        match &comp.hi {
            Some(h) if &start > h => return None,
            Some(h) if &start == h => {
                let attained = incl && comp.hi_closed && !self.excluded.contains(&start);
                return attained.then(|| (start, true));
            }
            _ => {}
        }
        let attained = incl && !self.excluded.contains(&start);
        Some((start, attained))
    }

    fn sup_in_component(&self, comp: &Component, c: &Rational, strict: bool) -> Option<(Rational, bool)> {
        let (end, incl) = match &comp.hi {
            Some(h) if c > h => (h.clone(), comp.hi_closed),
            Some(h) if c == h => (h.clone(), comp.hi_closed && !strict),
            _ => (c.clone(), !strict),
        };
        if let Some(step) = &self.lattice {
            let mut x = (&end / step).floor() * step;
            if x == end && !incl {
                x -= step;
            }
            while self.excluded.contains(&x) {
                x -= step;
            }
            let ok = if comp.lo_closed { x >= comp.lo } else { x > comp.lo };
            return ok.then(|| (x, true));
        }
        if end < comp.lo {
            return None;
        }
        if end == comp.lo {
            let attained = incl && comp.lo_closed && !self.excluded.contains(&end);
            return attained.then(|| (end, true));
        }
        let attained = incl && !self.excluded.contains(&end);
        Some((end, attained))
    }

    fn first_in_component(&self, comp: &Component, start: &Rational, incl: bool) -> Option<Rational> {
        let step = self.lattice.as_ref()?;
        let mut x = (start / step).ceil() * step;
        if &x == start && !incl {
            x += step;
        }
        while self.excluded.contains(&x) {
            x += step;
        }
        let ok = match &comp.hi {
            None => true,
            Some(h) if comp.hi_closed => &x <= h,
            Some(h) => &x < h,
        };
        ok.then_some(x)
    }

    /// Members of the form `k/denominator` up to `cap`, ascending.
    pub fn grid(&self, denominator: u64, cap: &Rational) -> Vec<Rational> {
        let d = crate::rational::int(denominator as i64);
        let mut out = Vec::new();
        let mut k = 0i64;
        loop {
            let x = crate::rational::int(k) / &d;
            if &x > cap {
                break;
            }
            if self.contains(&x) {
                out.push(x);
            }
            k += 1;
        }
        out
    }
}

impl fmt::Display for IntervalUnionCarrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" u "))?;
        if let Some(h) = &self.lattice {
            write!(f, " on multiples of {h}")?;
        }
        if !self.excluded.is_empty() {
            let ex: Vec<String> = self.excluded.iter().map(ToString::to_string).collect();
            write!(f, " minus {{{}}}", ex.join(", "))?;
        }
        Ok(())
    }
}
