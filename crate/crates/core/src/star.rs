//! The cut completion: upward-closed subsets of the carrier, ordered by
//! reverse inclusion, with the induced sum and difference.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::carrier::IntervalUnionCarrier;
use crate::error::{Error, Result};
use crate::monoid::DistanceMonoidSpec;
use crate::rational::{int, midpoint, parse_nonneg, Rational};

/// A cut of the carrier.
///
/// Before normalization `Principal(c)` denotes `{x >= c}` and the other point
/// variants denote `{x > c}`. After normalization the variant is the cut's
/// classification.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtendedValue {
    /// Least element `r`, which belongs to the carrier.
    Principal(Rational),
    /// Everything strictly above the member `r`, with no least element.
    Successor(Rational),
    /// Everything strictly above `c`, where `c` is not a member.
    Gap(Rational),
    /// The empty cut, top of the completion when the carrier has no maximum.
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    At,
    Above,
}

impl ExtendedValue {
    pub fn zero() -> Self {
        ExtendedValue::Principal(Rational::zero())
    }

    /// Raw cut `{x >= point}` or `{x > point}`; normalize before comparing.
    pub fn cut(point: Rational, side: Side) -> Self {
        match side {
            Side::At => ExtendedValue::Principal(point),
            Side::Above => ExtendedValue::Gap(point),
        }
    }

    pub fn point(&self) -> Option<&Rational> {
        match self {
            ExtendedValue::Principal(r) | ExtendedValue::Successor(r) | ExtendedValue::Gap(r) => Some(r),
            ExtendedValue::Omega => None,
        }
    }

    pub fn as_element(&self) -> Option<&Rational> {
        match self {
            ExtendedValue::Principal(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedValue::Principal(r) if r.is_zero())
    }

    fn rank(&self) -> u8 {
        match self {
            ExtendedValue::Principal(_) | ExtendedValue::Omega => 0,
            _ => 1,
        }
    }
}

impl Ord for ExtendedValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let by_point = match (self.point(), other.point()) {
            (Some(a), Some(b)) => a.cmp(b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_point.then(self.rank().cmp(&other.rank()))
    }
}

impl PartialOrd for ExtendedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Principal(r) => write!(f, "{r}"),
            ExtendedValue::Successor(r) => write!(f, "{r}+"),
            ExtendedValue::Gap(r) => write!(f, "gap({r})"),
            ExtendedValue::Omega => write!(f, "omega"),
        }
    }
}

/// Text form of a value, using labels for finite monoids.
pub fn show(spec: &DistanceMonoidSpec, v: &ExtendedValue) -> String {
    match (spec, v) {
        (DistanceMonoidSpec::Finite(_), ExtendedValue::Principal(r)) => spec.show_element(r),
        _ => v.to_string(),
    }
}

/// Reads `p/q`, `p/q+`, `gap(p/q)` or `omega` (labels for finite monoids) and normalizes.
pub fn parse_value(spec: &DistanceMonoidSpec, text: &str) -> Result<ExtendedValue> {
    let t = text.trim();
    if let Ok(x) = spec.parse_element(t) {
        return Ok(ExtendedValue::Principal(x));
    }
    let point = |s: &str| -> Result<Rational> {
        match spec {
            DistanceMonoidSpec::Finite(_) => spec.parse_element(s),
            _ => parse_nonneg(s),
        }
    };
    let raw = if t == "omega" {
        ExtendedValue::Omega
    } else if let Some(inner) = t.strip_prefix("gap(").and_then(|s| s.strip_suffix(')')) {
        ExtendedValue::Gap(point(inner)?)
    } else if let Some(inner) = t.strip_suffix('+') {
        ExtendedValue::Successor(point(inner)?)
    } else {
        ExtendedValue::Principal(point(t)?)
    };
    Ok(normalize_cut(spec, &raw))
}

pub fn embed(spec: &DistanceMonoidSpec, r: &Rational) -> Result<ExtendedValue> {
    if spec.contains(r) {
        Ok(ExtendedValue::Principal(r.clone()))
    } else {
        Err(Error::NotInCarrier(r.to_string()))
    }
}

/// The top of the completion: the maximum when there is one.
pub fn omega(spec: &DistanceMonoidSpec) -> ExtendedValue {
    match spec.max_elem() {
        Some(m) => ExtendedValue::Principal(m),
        None => ExtendedValue::Omega,
    }
}

/// Canonical representative of the denoted cut.
pub fn normalize_cut(spec: &DistanceMonoidSpec, v: &ExtendedValue) -> ExtendedValue {
    match v {
        ExtendedValue::Principal(c) => normalize_raw(spec, c, false),
        ExtendedValue::Successor(c) | ExtendedValue::Gap(c) => normalize_raw(spec, c, true),
        ExtendedValue::Omega => omega(spec),
    }
}

fn normalize_raw(spec: &DistanceMonoidSpec, c: &Rational, strict: bool) -> ExtendedValue {
    let carrier = spec.carrier();
    match carrier.inf_from(c, strict) {
        None => omega(spec),
        Some((i, true)) => ExtendedValue::Principal(i),
        Some((i, false)) => {
            if &i == c && strict && carrier.contains(c) {
                return ExtendedValue::Successor(i);
            }
            match carrier.sup_below(&i, true) {
                Some((r, true)) => ExtendedValue::Successor(r),
                _ => ExtendedValue::Gap(i),
            }
        }
    }
}

pub fn compare_cuts(spec: &DistanceMonoidSpec, a: &ExtendedValue, b: &ExtendedValue) -> Ordering {
    normalize_cut(spec, a).cmp(&normalize_cut(spec, b))
}

/// `sup {x : x <= v}` as a cut.
fn truncate_at(spec: &DistanceMonoidSpec, v: &Rational) -> ExtendedValue {
    match spec.carrier().sup_below(v, false) {
        Some((m, true)) => ExtendedValue::Principal(m),
        Some((m, false)) => normalize_raw(spec, &m, false),
        None => ExtendedValue::zero(),
    }
}

/// Limit of `truncate_at(w)` as `w` decreases to `v`.
fn truncate_above(spec: &DistanceMonoidSpec, v: &Rational) -> ExtendedValue {
    match spec.carrier().inf_from(v, true) {
        Some((n, false)) if &n == v => normalize_raw(spec, v, true),
        _ => truncate_at(spec, v),
    }
}

/// The induced sum on cuts.
pub fn star_add(spec: &DistanceMonoidSpec, a: &ExtendedValue, b: &ExtendedValue) -> ExtendedValue {
    let (a, b) = (normalize_cut(spec, a), normalize_cut(spec, b));
    match spec {
        DistanceMonoidSpec::Finite(t) => {
            // Finite carriers have only principal cuts.
            let i = t.index_of(a.point().unwrap()).unwrap();
            let j = t.index_of(b.point().unwrap()).unwrap();
            ExtendedValue::Principal(t.values()[t.apply(i, j)].clone())
        }
        DistanceMonoidSpec::Max(_) => a.max(b),
        DistanceMonoidSpec::TruncatedAdd(_) => {
            let (Some(pa), Some(pb)) = (a.point(), b.point()) else {
                return ExtendedValue::Omega;
            };
            let v = pa + pb;
            let both_principal = a.as_element().is_some() && b.as_element().is_some();
            if both_principal {
                truncate_at(spec, &v)
            } else {
                truncate_above(spec, &v)
            }
        }
    }
}

/// `min {x : a <= b + x and b <= a + x}`.
pub fn star_diff(spec: &DistanceMonoidSpec, a: &ExtendedValue, b: &ExtendedValue) -> ExtendedValue {
    let (a, b) = (normalize_cut(spec, a), normalize_cut(spec, b));
    if a == b {
        return ExtendedValue::zero();
    }
    let fits = |x: &ExtendedValue| a <= star_add(spec, &b, x) && b <= star_add(spec, &a, x);
    match spec {
        DistanceMonoidSpec::Max(_) => a.max(b),
        DistanceMonoidSpec::Finite(t) => {
            t.values().iter().map(|x| ExtendedValue::Principal(x.clone())).find(|x| fits(x)).unwrap_or_else(|| omega(spec))
        }
        DistanceMonoidSpec::TruncatedAdd(c) => {
            let mut best = omega(spec);
            for x in diff_candidates(spec, c, &a, &b) {
                if x < best && fits(&x) {
                    best = x;
                }
            }
            best
        }
    }
}

fn diff_candidates(spec: &DistanceMonoidSpec, c: &IntervalUnionCarrier, a: &ExtendedValue, b: &ExtendedValue) -> BTreeSet<ExtendedValue> {
    let mut pts: BTreeSet<Rational> = c.critical_points().into_iter().collect();
    for p in [a.point(), b.point()].into_iter().flatten() {
        pts.insert(p.clone());
        for (x, _) in [c.sup_below(p, true), c.sup_below(p, false), c.inf_from(p, true)].into_iter().flatten() {
            pts.insert(x);
        }
    }
    let mut out = BTreeSet::new();
    for p in &pts {
        for r in &pts {
            if p >= r {
                let d = p - r;
                out.insert(normalize_raw(spec, &d, false));
                out.insert(normalize_raw(spec, &d, true));
            }
        }
    }
    out
}

/// `(|a - b|, a + b)`: the values completing a triangle with `a` and `b`.
pub fn triangle_interval(spec: &DistanceMonoidSpec, a: &ExtendedValue, b: &ExtendedValue) -> (ExtendedValue, ExtendedValue) {
    (star_diff(spec, a, b), star_add(spec, a, b))
}

pub fn is_triangle(spec: &DistanceMonoidSpec, a: &ExtendedValue, b: &ExtendedValue, c: &ExtendedValue) -> bool {
    let (a, b, c) = (normalize_cut(spec, a), normalize_cut(spec, b), normalize_cut(spec, c));
    a <= star_add(spec, &b, &c) && b <= star_add(spec, &a, &c) && c <= star_add(spec, &a, &b)
}

/// A member `t` with `a <= t < b`, when `a < b`.
pub fn density_witness(spec: &DistanceMonoidSpec, a: &ExtendedValue, b: &ExtendedValue) -> Option<Rational> {
    let (a, b) = (normalize_cut(spec, a), normalize_cut(spec, b));
    if a >= b {
        return None;
    }
    if let Some(r) = a.as_element() {
        return Some(r.clone());
    }
    let lo = a.point()?.clone();
    let mut hi = match b.point() {
        Some(p) => p.clone(),
        None => &lo + int(1),
    };
    let c = spec.carrier();
    // Members accumulate at `lo` from the right, so halving terminates.
    for _ in 0..256 {
        let m = midpoint(&lo, &hi);
        let t = ExtendedValue::Principal(m.clone());
        if c.contains(&m) && a <= t && t < b {
            return Some(m);
        }
        hi = m;
    }
    None
}

/// `inf {x + s : x member, x > delta}`, or `None` when no member exceeds `delta`.
pub fn inf_add_above(spec: &DistanceMonoidSpec, delta: &ExtendedValue, s: &ExtendedValue) -> Option<AddLimit> {
    let delta = normalize_cut(spec, delta);
    let s = normalize_cut(spec, s);
    let c = spec.carrier();
    let (x0, attained) = c.inf_from(delta.point()?, true)?;
    if attained {
        let value = star_add(spec, &ExtendedValue::Principal(x0), &s);
        return Some(AddLimit { value, attained: true });
    }
    let ps = s.point()?;
    match spec {
        DistanceMonoidSpec::Max(_) if ps > &x0 => Some(AddLimit { value: s.clone(), attained: true }),
        DistanceMonoidSpec::Max(_) => Some(AddLimit { value: normalize_raw(spec, &x0, true), attained: false }),
        _ => {
            let w = &x0 + ps;
            match c.inf_from(&w, true) {
                Some((n, false)) if n == w => Some(AddLimit { value: normalize_raw(spec, &w, true), attained: false }),
                _ => Some(AddLimit { value: truncate_at(spec, &w), attained: true }),
            }
        }
    }
}

/// An infimum together with whether some term reaches it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddLimit {
    pub value: ExtendedValue,
    pub attained: bool,
}

impl AddLimit {
    /// Whether every term of the infimum is strictly above `r`.
    pub fn exceeds(&self, r: &ExtendedValue) -> bool {
        if self.attained {
            r < &self.value
        } else {
            r <= &self.value
        }
    }
}

/// A failure of continuity of `x -> x + s` from below at `alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QeWitness {
    pub alpha: ExtendedValue,
    pub s: Rational,
    pub lhs: ExtendedValue,
    pub rhs: ExtendedValue,
}

impl fmt::Display for QeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={} s={} lhs={} rhs={}", self.alpha, self.s, self.lhs, self.rhs)
    }
}

/// Searches for `alpha` without an immediate predecessor and a member `s`
/// with `alpha + s` strictly above `sup {x + s : x < alpha}`.
pub fn find_qe_witness(spec: &DistanceMonoidSpec) -> Option<QeWitness> {
    let c = match spec {
        DistanceMonoidSpec::TruncatedAdd(c) if !c.is_locally_finite() => c,
        // Locally finite carriers are right-closed; max is continuous.
        _ => return None,
    };
    let crit = c.critical_points();
    let mut alphas: BTreeSet<ExtendedValue> = BTreeSet::new();
    for p in &crit {
        alphas.insert(normalize_raw(spec, p, false));
        alphas.insert(normalize_raw(spec, p, true));
    }
    alphas.insert(omega(spec));
    let mut shifts: BTreeSet<Rational> = BTreeSet::new();
    for p in &crit {
        for r in &crit {
            for v in [p.clone(), p + r, if p >= r { p - r } else { r - p }] {
                for (x, attained) in [c.inf_from(&v, false), c.sup_below(&v, false)].into_iter().flatten() {
                    if attained {
                        shifts.insert(x);
                    }
                }
            }
        }
    }
    for alpha in alphas.iter().filter(|a| !a.is_zero() && !has_predecessor(spec, a)) {
        for s in &shifts {
            let lhs = star_add(spec, alpha, &ExtendedValue::Principal(s.clone()));
            let rhs = sup_shift_below(spec, alpha, s);
            if rhs < lhs {
                return Some(QeWitness { alpha: alpha.clone(), s: s.clone(), lhs, rhs });
            }
        }
    }
    None
}

fn has_predecessor(spec: &DistanceMonoidSpec, alpha: &ExtendedValue) -> bool {
    match alpha {
        ExtendedValue::Principal(r) => matches!(spec.carrier().sup_below(r, true), Some((_, true))),
        ExtendedValue::Successor(_) => true,
        ExtendedValue::Gap(_) | ExtendedValue::Omega => false,
    }
}

/// `sup {x + s : x member, x < alpha}` for `alpha` without a predecessor.
pub fn sup_shift_below(spec: &DistanceMonoidSpec, alpha: &ExtendedValue, s: &Rational) -> ExtendedValue {
    let c = spec.carrier();
    let Some(p) = alpha.point() else {
        return omega(spec);
    };
    let u = match c.sup_below(p, true) {
        Some((u, _)) => u,
        None => return ExtendedValue::zero(),
    };
    match c.sup_below(&(u + s), true) {
        Some((m, true)) => ExtendedValue::Principal(m),
        Some((m, false)) => normalize_raw(spec, &m, false),
        None => ExtendedValue::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin;
    use crate::rational::q;
    use proptest::prelude::*;

    fn p(n: i64) -> ExtendedValue {
        ExtendedValue::Principal(int(n))
    }

    fn v(spec: &DistanceMonoidSpec, s: &str) -> ExtendedValue {
        parse_value(spec, s).unwrap()
    }

    #[test]
    fn normalization() {
        let s = builtin("twoThree").unwrap();
        assert_eq!(normalize_cut(&s, &ExtendedValue::cut(int(2), Side::Above)), p(3));
        assert_eq!(normalize_cut(&s, &ExtendedValue::cut(int(1), Side::Above)), ExtendedValue::Successor(int(1)));
        let g = builtin("gap4").unwrap();
        assert_eq!(normalize_cut(&g, &ExtendedValue::cut(int(4), Side::At)), ExtendedValue::Gap(int(4)));
        assert_eq!(normalize_cut(&g, &ExtendedValue::cut(int(3), Side::At)), ExtendedValue::Gap(int(4)));
        let n = builtin("noQE").unwrap();
        assert_eq!(normalize_cut(&n, &ExtendedValue::cut(int(3), Side::At)), ExtendedValue::Gap(int(3)));
        assert_eq!(normalize_cut(&n, &ExtendedValue::cut(int(0), Side::Above)), p(2));
        let q1 = builtin("Q1").unwrap();
        assert_eq!(normalize_cut(&q1, &ExtendedValue::Omega), p(1));
        assert_eq!(normalize_cut(&q1, &ExtendedValue::cut(int(1), Side::Above)), p(1));
    }

    #[test]
    fn order() {
        let q1 = builtin("Q1").unwrap();
        assert!(v(&q1, "1/2") < v(&q1, "1/2+"));
        assert!(v(&q1, "1/2+") < v(&q1, "3/4"));
        assert_eq!(compare_cuts(&q1, &v(&q1, "omega"), &p(1)), Ordering::Equal);
        let qp = builtin("Qplus").unwrap();
        assert!(v(&qp, "1000") < v(&qp, "omega"));
    }

    #[test]
    fn parse_and_show() {
        let g = builtin("gap4").unwrap();
        for text in ["3/2", "3/2+", "gap(4)", "omega"] {
            assert_eq!(v(&g, text).to_string(), text);
        }
        let r2 = builtin("R2").unwrap();
        assert_eq!(show(&r2, &v(&r2, "2")), "2");
        assert!(parse_value(&r2, "7").is_err());
    }

    #[test]
    fn sums_over_two_three() {
        let s = builtin("twoThree").unwrap();
        assert_eq!(star_add(&s, &p(1), &p(3)), p(4));
        assert_eq!(star_add(&s, &p(1), &p(1)), p(3));
        assert_eq!(star_add(&s, &p(0), &v(&s, "1+")), v(&s, "1+"));
    }

    #[test]
    fn sums_over_gap_carrier() {
        let s = builtin("gap4").unwrap();
        let g = v(&s, "gap(4)");
        assert_eq!(star_add(&s, &p(1), &p(1)), g);
        assert_eq!(star_add(&s, &g, &g), v(&s, "8+"));
        assert_eq!(star_add(&s, &star_add(&s, &p(1), &p(1)), &g), v(&s, "8+"));
        assert_eq!(star_add(&s, &p(1), &star_add(&s, &p(1), &g)), v(&s, "6+"));
    }

    #[test]
    fn sums_without_qe() {
        let s = builtin("noQE").unwrap();
        assert_eq!(star_add(&s, &v(&s, "gap(3)"), &p(2)), v(&s, "5+"));
        assert!(is_triangle(&s, &v(&s, "gap(3)"), &p(2), &v(&s, "5+")));
        assert!(is_triangle(&s, &v(&s, "gap(3)"), &p(2), &p(5)));
        assert!(!is_triangle(&s, &v(&s, "gap(3)"), &p(2), &p(6)));
    }

    #[test]
    fn omega_absorbs() {
        let q1 = builtin("Q1").unwrap();
        assert_eq!(star_add(&q1, &omega(&q1), &v(&q1, "1/3+")), p(1));
        let qp = builtin("Qplus").unwrap();
        assert_eq!(star_add(&qp, &ExtendedValue::Omega, &p(0)), ExtendedValue::Omega);
    }

    #[test]
    fn differences() {
        let s = builtin("twoThree").unwrap();
        assert_eq!(star_diff(&s, &p(3), &p(1)), p(1));
        assert_eq!(triangle_interval(&s, &p(3), &p(1)), (p(1), p(4)));
        let qp = builtin("Qplus").unwrap();
        assert_eq!(star_diff(&qp, &p(5), &p(3)), p(2));
        let r2 = builtin("R2").unwrap();
        assert_eq!(triangle_interval(&r2, &p(1), &p(2)), (p(1), p(2)));
        assert_eq!(triangle_interval(&r2, &p(2), &p(0)), (p(2), p(2)));
        assert!(is_triangle(&r2, &p(1), &p(1), &p(2)));
    }

    #[test]
    fn density() {
        let q1 = builtin("Q1").unwrap();
        let t = density_witness(&q1, &v(&q1, "1/2+"), &v(&q1, "3/5")).unwrap();
        assert!(t > q(1, 2) && t < q(3, 5));
        let s = builtin("twoThree").unwrap();
        assert_eq!(density_witness(&s, &p(1), &p(3)), Some(int(1)));
        assert_eq!(density_witness(&s, &p(3), &p(1)), None);
    }

    #[test]
    fn qe_witnesses() {
        let w = find_qe_witness(&builtin("noQE").unwrap()).unwrap();
        assert_eq!(w.alpha, ExtendedValue::Gap(int(3)));
        assert_eq!(w.s, int(2));
        assert_eq!(w.lhs, ExtendedValue::Successor(int(5)));
        assert_eq!(w.rhs, p(5));
        assert_eq!(w.to_string(), "alpha=gap(3) s=2 lhs=5+ rhs=5");
        for name in ["Q1", "Qplus", "R3", "S4", "ultraQ1"] {
            assert_eq!(find_qe_witness(&builtin(name).unwrap()), None, "{name}");
        }
    }

    fn q1_value() -> impl Strategy<Value = ExtendedValue> {
        (0i64..=12, 0u8..3).prop_map(|(k, side)| {
            let q1 = builtin("Q1").unwrap();
            let raw = match side {
                0 => ExtendedValue::Principal(q(k, 12)),
                1 => ExtendedValue::Successor(q(k, 12)),
                _ => ExtendedValue::Omega,
            };
            normalize_cut(&q1, &raw)
        })
    }

    proptest! {
        #[test]
        fn sum_is_commutative_monotone_with_unit(a in q1_value(), b in q1_value(), c in q1_value()) {
            let s = builtin("Q1").unwrap();
            prop_assert_eq!(star_add(&s, &a, &b), star_add(&s, &b, &a));
            prop_assert_eq!(star_add(&s, &a, &ExtendedValue::zero()), a.clone());
            if b <= c {
                prop_assert!(star_add(&s, &a, &b) <= star_add(&s, &a, &c));
            }
            prop_assert_eq!(star_add(&s, &star_add(&s, &a, &b), &c), star_add(&s, &a, &star_add(&s, &b, &c)));
        }

        #[test]
        fn normalization_is_idempotent(k in 0i64..60, side in any::<bool>()) {
            for name in ["twoThree", "gap4", "noQE", "Q1"] {
                let s = builtin(name).unwrap();
                let x = normalize_cut(&s, &ExtendedValue::cut(q(k, 6), if side { Side::Above } else { Side::At }));
                prop_assert_eq!(normalize_cut(&s, &x), x);
            }
        }

        #[test]
        fn difference_brackets(a in q1_value(), b in q1_value()) {
            let s = builtin("Q1").unwrap();
            let d = star_diff(&s, &a, &b);
            prop_assert!(d <= a.clone().max(b.clone()));
            prop_assert!(a.clone().max(b.clone()) <= star_add(&s, &a, &b));
            prop_assert_eq!(d.is_zero(), a == b);
        }
    }
}
