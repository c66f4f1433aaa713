//! Finite metric spaces over a monoid or its completion, Katětov maps,
//! the four-values condition and amalgamation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::monoid::{check_associativity, check_sum_complete, probe_points, Associativity, DistanceMonoidSpec, SumCompleteness};
use crate::rational::Rational;
use crate::star::{self, density_witness, normalize_cut, star_add, star_diff, ExtendedValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<ExtendedValue>>,
}

impl FiniteMetricSpace {
    pub fn new(points: Vec<String>, dist: Vec<Vec<ExtendedValue>>) -> Result<Self> {
        let n = points.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!("distance matrix must be {n}x{n}")));
        }
        if points.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidSpace("duplicate point labels".into()));
        }
        Ok(FiniteMetricSpace { points, dist })
    }

    pub fn single(label: &str) -> Self {
        FiniteMetricSpace { points: vec![label.to_string()], dist: vec![vec![ExtendedValue::zero()]] }
    }

    /// Builds the symmetric closure of the listed distances; the diagonal is zero.
    pub fn from_entries(spec: &DistanceMonoidSpec, points: Vec<String>, entries: &[(String, String, ExtendedValue)]) -> Result<Self> {
        let n = points.len();
        let mut dist: Vec<Vec<Option<ExtendedValue>>> = vec![vec![None; n]; n];
        let idx = |l: &str| points.iter().position(|p| p == l).ok_or_else(|| Error::InvalidSpace(format!("unknown point {l:?}")));
        for (a, b, v) in entries {
            let (i, j) = (idx(a)?, idx(b)?);
            let v = normalize_cut(spec, v);
            for (x, y) in [(i, j), (j, i)] {
                match &dist[x][y] {
                    Some(old) if old != &v => {
                        return Err(Error::InvalidSpace(format!("conflicting distances for ({a}, {b})")));
                    }
                    _ => dist[x][y] = Some(v.clone()),
                }
            }
        }
        let mut full = vec![vec![ExtendedValue::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                full[i][j] = dist[i][j].clone().ok_or_else(|| Error::InvalidSpace(format!("missing distance ({}, {})", points[i], points[j])))?;
            }
        }
        FiniteMetricSpace::new(points, full)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p == label)
    }

    pub fn d(&self, i: usize, j: usize) -> &ExtendedValue {
        &self.dist[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExtendedValue) {
        self.dist[i][j] = v.clone();
        self.dist[j][i] = v;
    }

    /// Distinct distances, ascending.
    pub fn distance_set(&self) -> Vec<ExtendedValue> {
        let set: BTreeSet<ExtendedValue> = self.dist.iter().flatten().cloned().collect();
        set.into_iter().collect()
    }

    pub fn restrict(&self, indices: &[usize]) -> FiniteMetricSpace {
        FiniteMetricSpace {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            dist: indices.iter().map(|&i| indices.iter().map(|&j| self.dist[i][j].clone()).collect()).collect(),
        }
    }

    pub fn restrict_labels(&self, labels: &[String]) -> Result<FiniteMetricSpace> {
        let idx: Vec<usize> =
            labels.iter().map(|l| self.index(l).ok_or_else(|| Error::InvalidSpace(format!("unknown point {l:?}")))).collect::<Result<_>>()?;
        Ok(self.restrict(&idx))
    }

    /// Appends a point with the given distances to the existing points.
    pub fn push_point(&mut self, label: String, row: Vec<ExtendedValue>) {
        assert_eq!(row.len(), self.len());
        for (r, v) in self.dist.iter_mut().zip(&row) {
            r.push(v.clone());
        }
        let mut last = row;
        last.push(ExtendedValue::zero());
        self.dist.push(last);
        self.points.push(label);
    }

    pub fn remove_point(&mut self, i: usize) {
        self.points.remove(i);
        self.dist.remove(i);
        for row in &mut self.dist {
            row.remove(i);
        }
    }

    pub fn render(&self, spec: &DistanceMonoidSpec) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                out.push_str(&format!("{} {} {}\n", self.points[i], self.points[j], star::show(spec, &self.dist[i][j])));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricViolation {
    NonzeroDiagonal(usize),
    ZeroOffDiagonal(usize, usize),
    Asymmetric(usize, usize),
    /// Sorted indices of a triple failing the triangle inequality.
    Triangle(usize, usize, usize),
}

/// Every violation of the metric axioms; empty means the space is a metric space.
pub fn validate_metric(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace) -> Vec<MetricViolation> {
    let n = space.len();
    let mut out = Vec::new();
    for i in 0..n {
        if !space.d(i, i).is_zero() {
            out.push(MetricViolation::NonzeroDiagonal(i));
        }
        for j in i + 1..n {
            if space.d(i, j) != space.d(j, i) {
                out.push(MetricViolation::Asymmetric(i, j));
            }
            if space.d(i, j).is_zero() {
                out.push(MetricViolation::ZeroOffDiagonal(i, j));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if !star::is_triangle(spec, space.d(i, j), space.d(j, k), space.d(i, k)) {
                    out.push(MetricViolation::Triangle(i, j, k));
                }
            }
        }
    }
    out
}

/// First pair `(i, j)` whose distance does not form a triangle with its values.
pub fn check_katetov(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, values: &[ExtendedValue]) -> Result<Option<(usize, usize)>> {
    if values.len() != space.len() {
        return Err(Error::Precondition(format!("expected {} values, got {}", space.len(), values.len())));
    }
    if let Some(i) = values.iter().position(ExtendedValue::is_zero) {
        return Err(Error::Precondition(format!("value at {} is zero", space.label(i))));
    }
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            if !star::is_triangle(spec, space.d(i, j), &values[i], &values[j]) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Two triangles `(s, u1, u2)` and `(s, v1, v2)` sharing the side `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quadruple {
    pub u1: ExtendedValue,
    pub u2: ExtendedValue,
    pub v1: ExtendedValue,
    pub v2: ExtendedValue,
    pub s: ExtendedValue,
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{};{})", self.u1, self.u2, self.v1, self.v2, self.s)
    }
}

/// Smallest positive `t` in the closed range, or a member of it when there is no smallest.
fn member_between(spec: &DistanceMonoidSpec, lo: &ExtendedValue, hi: &ExtendedValue) -> Option<Rational> {
    if lo > hi {
        return None;
    }
    if let Some(r) = lo.as_element() {
        return Some(r.clone());
    }
    if lo == hi {
        return None;
    }
    density_witness(spec, lo, hi)
}

/// A member `t` completing `(t, u1, v1)` and `(t, u2, v2)` to triangles.
///
/// A positive `t` is preferred; zero is returned only when it is the sole completion.
pub fn four_values_check(spec: &DistanceMonoidSpec, q: &Quadruple) -> Result<Option<Rational>> {
    if !star::is_triangle(spec, &q.s, &q.u1, &q.u2) {
        return Err(Error::Precondition(format!("(s, u1, u2) = ({}, {}, {}) is not a triangle", q.s, q.u1, q.u2)));
    }
    if !star::is_triangle(spec, &q.s, &q.v1, &q.v2) {
        return Err(Error::Precondition(format!("(s, v1, v2) = ({}, {}, {}) is not a triangle", q.s, q.v1, q.v2)));
    }
    let (lo1, hi1) = star::triangle_interval(spec, &q.u1, &q.v1);
    let (lo2, hi2) = star::triangle_interval(spec, &q.u2, &q.v2);
    Ok(completion(spec, &lo1.max(lo2), &hi1.min(hi2)))
}

fn completion(spec: &DistanceMonoidSpec, lo: &ExtendedValue, hi: &ExtendedValue) -> Option<Rational> {
    let positive = normalize_cut(spec, &ExtendedValue::Successor(Rational::zero()));
    member_between(spec, &lo.clone().max(positive), hi).or_else(|| lo.is_zero().then(Rational::zero))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourValuesMethod {
    Exhaustive,
    /// Sum-complete carrier: equivalent to associativity.
    ViaAssociativity,
    /// Critical points only; a pass is not a proof.
    CriticalPoints,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FourValues {
    Pass(FourValuesMethod),
    Witness(Quadruple),
}

pub fn four_values_search(spec: &DistanceMonoidSpec) -> FourValues {
    let sum_complete = match spec {
        DistanceMonoidSpec::Finite(_) | DistanceMonoidSpec::Max(_) => true,
        DistanceMonoidSpec::TruncatedAdd(c) => check_sum_complete(c) == SumCompleteness::Pass,
    };
    if spec.elements().is_none() && sum_complete {
        return match check_associativity(spec) {
            Associativity::Pass => FourValues::Pass(FourValuesMethod::ViaAssociativity),
            Associativity::Witness { r, s, t, left, right } => {
                let (r, t) = if left > right { (r, t) } else { (t, r) };
                let e = |x: &Rational| ExtendedValue::Principal(x.clone());
                let rs = star_add(spec, &e(&r), &e(&s));
                let u = star_add(spec, &rs, &e(&t));
                let quad = Quadruple { u1: e(&r), u2: e(&s), v1: u, v2: e(&t), s: rs };
                debug_assert_eq!(four_values_check(spec, &quad), Ok(None));
                FourValues::Witness(quad)
            }
        };
    }
    let (pts, method) = match spec.elements() {
        Some(all) => (all, FourValuesMethod::Exhaustive),
        None => {
            let mut p = probe_points(spec, 0);
            p.truncate(28);
            (p, FourValuesMethod::CriticalPoints)
        }
    };
    let vals: Vec<ExtendedValue> = pts.iter().map(|x| ExtendedValue::Principal(x.clone())).collect();
    let n = vals.len();
    let mut lo = vec![vec![ExtendedValue::zero(); n]; n];
    let mut hi = lo.clone();
    for i in 0..n {
        for j in 0..n {
            let (l, h) = star::triangle_interval(spec, &vals[i], &vals[j]);
            lo[i][j] = l;
            hi[i][j] = h;
        }
    }
    for u1 in 0..n {
        for u2 in 0..n {
            for v2 in 0..n {
                for v1 in 0..n {
                    let s_lo = lo[u1][u2].clone().max(lo[v1][v2].clone());
                    let s_hi = hi[u1][u2].clone().min(hi[v1][v2].clone());
                    let Some(s) = member_between(spec, &s_lo, &s_hi) else { continue };
                    let t_lo = lo[u1][v1].clone().max(lo[u2][v2].clone());
                    let t_hi = hi[u1][v1].clone().min(hi[u2][v2].clone());
                    if member_between(spec, &t_lo, &t_hi).is_none() {
                        let (u1, u2, v1, v2) = (vals[u1].clone(), vals[u2].clone(), vals[v1].clone(), vals[v2].clone());
                        return FourValues::Witness(Quadruple { u1, u2, v1, v2, s: ExtendedValue::Principal(s) });
                    }
                }
            }
        }
    }
    FourValues::Pass(method)
}

fn overlap_of(x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> Result<Vec<String>> {
    let mut shared: Vec<String> = x1.points().iter().filter(|p| x2.index(p).is_some()).cloned().collect();
    shared.sort();
    if shared.is_empty() {
        return Err(Error::Precondition("the spaces share no point".into()));
    }
    for a in &shared {
        for b in &shared {
            let (i1, j1) = (x1.index(a).unwrap(), x1.index(b).unwrap());
            let (i2, j2) = (x2.index(a).unwrap(), x2.index(b).unwrap());
            if x1.d(i1, j1) != x2.d(i2, j2) {
                return Err(Error::Precondition(format!("the spaces disagree on ({a}, {b})")));
            }
        }
    }
    Ok(shared)
}

/// Points of `a` followed by the new points of `b`; new pairs take the least
/// sum through the overlap.
pub fn free_amalgam(spec: &DistanceMonoidSpec, a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    let shared = overlap_of(a, b)?;
    let mut out = a.clone();
    let fresh: Vec<usize> = (0..b.len()).filter(|&i| a.index(b.label(i)).is_none()).collect();
    for &y in &fresh {
        let row: Vec<ExtendedValue> = (0..out.len())
            .map(|x| match b.index(out.label(x)) {
                Some(bx) => b.d(bx, y).clone(),
                None => shared
                    .iter()
                    .map(|z| star_add(spec, a.d(x, a.index(z).unwrap()), b.d(b.index(z).unwrap(), y)))
                    .min()
                    .unwrap(),
            })
            .collect();
        out.push_point(b.label(y).to_string(), row);
    }
    Ok(out)
}

/// Amalgam of two spaces that each have exactly one point outside the other.
pub fn one_point_amalgam(spec: &DistanceMonoidSpec, x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    let shared = overlap_of(x1, x2)?;
    let only = |a: &FiniteMetricSpace, b: &FiniteMetricSpace| -> Vec<usize> { (0..a.len()).filter(|&i| b.index(a.label(i)).is_none()).collect() };
    let (p1, p2) = (only(x1, x2), only(x2, x1));
    if p1.len() != 1 || p2.len() != 1 {
        return Err(Error::Precondition("each space must have exactly one point outside the other".into()));
    }
    let (p1, p2) = (p1[0], p2[0]);
    let d1 = |z: &str| x1.d(p1, x1.index(z).unwrap()).clone();
    let d2 = |z: &str| x2.d(p2, x2.index(z).unwrap()).clone();
    // Ties go to the first label; `shared` is sorted.
    let y = shared.iter().min_by_key(|z| star_add(spec, &d1(z), &d2(z))).unwrap();
    let y2 = shared.iter().rev().max_by_key(|z| star_diff(spec, &d1(z), &d2(z))).unwrap();
    let quad = Quadruple { u1: d1(y), u2: d1(y2), v1: d2(y), v2: d2(y2), s: x1.d(x1.index(y).unwrap(), x1.index(y2).unwrap()).clone() };
    let t = match four_values_check(spec, &quad)? {
        None => return Err(Error::AmalgamationFailure(Box::new(quad))),
        Some(t) if t.is_zero() => d1(y).min(d1(y2)),
        Some(t) => ExtendedValue::Principal(t),
    };
    let mut out = x1.clone();
    let row: Vec<ExtendedValue> = (0..out.len())
        .map(|i| if i == p1 { t.clone() } else { x2.d(p2, x2.index(out.label(i)).unwrap()).clone() })
        .collect();
    out.push_point(x2.label(p2).to_string(), row);
    Ok(out)
}

/// Amalgam over the shared points, adding the points of `x2` outside `x1`
/// one at a time in label order.
pub fn disjoint_amalgam(spec: &DistanceMonoidSpec, x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    let shared = overlap_of(x1, x2)?;
    let mut outside1: Vec<String> = x1.points().iter().filter(|p| x2.index(p).is_none()).cloned().collect();
    outside1.sort();
    let mut outside2: Vec<String> = x2.points().iter().filter(|p| x1.index(p).is_none()).cloned().collect();
    outside2.sort();
    let mut current = x1.clone();
    // Points whose distances to every new point are fixed.
    let mut known: Vec<String> = shared.clone();
    for p in &outside2 {
        let mut side: FiniteMetricSpace = x2.restrict_labels(&known.iter().cloned().chain([p.clone()]).collect::<Vec<_>>())?;
        for q in &outside1 {
            let left = current.restrict_labels(&known.iter().cloned().chain([q.clone()]).collect::<Vec<_>>())?;
            let glued = one_point_amalgam(spec, &left, &side)?;
            side = glued.restrict_labels(&known.iter().cloned().chain([q.clone(), p.clone()]).collect::<Vec<_>>())?;
            known.push(q.clone());
        }
        let row: Vec<ExtendedValue> = current.points().iter().map(|x| side.d(side.index(x).unwrap(), side.index(p).unwrap()).clone()).collect();
        current.push_point(p.clone(), row);
        known.retain(|k| !outside1.contains(k));
        known.push(p.clone());
    }
    Ok(current)
}

/// `{0}` or a half-open range `(lo, hi]` of the completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxInterval {
    Zero,
    Half { lo: ExtendedValue, hi: ExtendedValue },
}

impl ApproxInterval {
    pub fn half(lo: ExtendedValue, hi: ExtendedValue) -> Self {
        ApproxInterval::Half { lo, hi }
    }

    pub fn contains(&self, v: &ExtendedValue) -> bool {
        match self {
            ApproxInterval::Zero => v.is_zero(),
            ApproxInterval::Half { lo, hi } => lo < v && v <= hi,
        }
    }

    pub fn lo(&self) -> ExtendedValue {
        match self {
            ApproxInterval::Zero => ExtendedValue::zero(),
            ApproxInterval::Half { lo, .. } => lo.clone(),
        }
    }

    pub fn hi(&self) -> ExtendedValue {
        match self {
            ApproxInterval::Zero => ExtendedValue::zero(),
            ApproxInterval::Half { hi, .. } => hi.clone(),
        }
    }

    /// Containment decided on the endpoints.
    pub fn within(&self, other: &ApproxInterval) -> bool {
        match (self, other) {
            (ApproxInterval::Zero, ApproxInterval::Zero) => true,
            (ApproxInterval::Half { lo, hi }, ApproxInterval::Half { lo: l2, hi: h2 }) => lo >= l2 && hi <= h2,
            _ => false,
        }
    }
}

impl fmt::Display for ApproxInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxInterval::Zero => write!(f, "{{0}}"),
            ApproxInterval::Half { lo, hi } => write!(f, "({lo}, {hi}]"),
        }
    }
}

/// Intervals keyed by distance values or by point pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approximation<K: Ord>(pub BTreeMap<K, ApproxInterval>);

pub type ValueApproximation = Approximation<ExtendedValue>;
/// Keys are index pairs `(i, j)` with `i < j`.
pub type PairApproximation = Approximation<(usize, usize)>;

impl<K: Ord + Clone> Approximation<K> {
    pub fn new() -> Self {
        Approximation(BTreeMap::new())
    }

    pub fn get(&self, k: &K) -> Option<&ApproxInterval> {
        self.0.get(k)
    }

    pub fn insert(&mut self, k: K, v: ApproxInterval) {
        self.0.insert(k, v);
    }

    pub fn refines(&self, other: &Approximation<K>) -> bool {
        self.0.iter().all(|(k, v)| other.0.get(k).map_or(false, |w| v.within(w)))
    }
}

impl<K: Ord + Clone> Default for Approximation<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl PairApproximation {
    pub fn pair(&self, i: usize, j: usize) -> ApproxInterval {
        if i == j {
            return ApproxInterval::Zero;
        }
        self.0.get(&(i.min(j), i.max(j))).cloned().unwrap_or(ApproxInterval::Zero)
    }

    /// Per distance value, the tightest bounds over all pairs at that distance.
    pub fn hat(&self, space: &FiniteMetricSpace) -> ValueApproximation {
        let mut out: BTreeMap<ExtendedValue, ApproxInterval> = BTreeMap::new();
        out.insert(ExtendedValue::zero(), ApproxInterval::Zero);
        for (&(i, j), iv) in &self.0 {
            let v = space.d(i, j).clone();
            let merged = match out.get(&v) {
                Some(ApproxInterval::Half { lo, hi }) => ApproxInterval::half(lo.clone().max(iv.lo()), hi.clone().min(iv.hi())),
                _ => iv.clone(),
            };
            out.insert(v, merged);
        }
        Approximation(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin;
    use crate::rational::{int, q};

    fn p(n: i64) -> ExtendedValue {
        ExtendedValue::Principal(int(n))
    }

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    fn space(spec: &DistanceMonoidSpec, pts: &[&str], entries: &[(&str, &str, ExtendedValue)]) -> FiniteMetricSpace {
        let e: Vec<_> = entries.iter().map(|(a, b, v)| (a.to_string(), b.to_string(), v.clone())).collect();
        FiniteMetricSpace::from_entries(spec, labels(pts), &e).unwrap()
    }

    pub(crate) fn four_point(spec: &DistanceMonoidSpec, yz: ExtendedValue) -> FiniteMetricSpace {
        space(spec, &["w", "x", "y", "z"], &[("w", "x", p(1)), ("x", "z", p(1)), ("w", "y", p(1)), ("x", "y", p(3)), ("w", "z", p(3)), ("y", "z", yz)])
    }

    #[test]
    fn metric_validation() {
        let s = builtin("twoThree").unwrap();
        assert!(validate_metric(&s, &FiniteMetricSpace::single("a")).is_empty());
        assert!(validate_metric(&s, &four_point(&s, p(4))).is_empty());
        let v = validate_metric(&s, &four_point(&s, p(100)));
        assert_eq!(v.first(), Some(&MetricViolation::Triangle(0, 2, 3)));
    }

    #[test]
    fn katetov_maps() {
        let r2 = builtin("R2").unwrap();
        let base = space(&r2, &["a", "b"], &[("a", "b", p(2))]);
        assert_eq!(check_katetov(&r2, &base, &[p(1), p(1)]).unwrap(), None);
        assert_eq!(check_katetov(&r2, &base, &[p(2), p(2)]).unwrap(), None);
        let u = builtin("ultra2").unwrap();
        let base = space(&u, &["a", "b"], &[("a", "b", p(2))]);
        assert_eq!(check_katetov(&u, &base, &[p(1), p(1)]).unwrap(), Some((0, 1)));
        assert!(check_katetov(&u, &base, &[p(0), p(1)]).is_err());
    }

    #[test]
    fn four_values_examples() {
        let r2 = builtin("R2").unwrap();
        let quad = |a, b, c, d, s| Quadruple { u1: a, u2: b, v1: c, v2: d, s };
        assert_eq!(four_values_check(&r2, &quad(p(1), p(1), p(1), p(1), p(1))).unwrap(), Some(int(1)));
        let t = four_values_check(&r2, &quad(p(1), p(2), p(1), p(2), p(1))).unwrap().unwrap();
        assert!(t == int(1) || t == int(2));
        let f = DistanceMonoidSpec::truncated_finite(&[int(0), int(1), int(2), q(7, 2)]).unwrap();
        let seven_halves = ExtendedValue::Principal(q(7, 2));
        let w = quad(p(1), p(1), seven_halves, p(2), p(2));
        assert_eq!(four_values_check(&f, &w).unwrap(), None);
        assert_eq!(four_values_search(&f), FourValues::Witness(w));
        assert!(four_values_check(&r2, &quad(p(1), p(1), p(1), p(1), p(2))).is_ok());
        assert!(four_values_check(&f, &quad(p(1), p(1), p(1), p(1), ExtendedValue::Principal(q(7, 2)))).is_err());
    }

    #[test]
    fn four_values_on_interval_carriers() {
        assert_eq!(four_values_search(&builtin("Q1").unwrap()), FourValues::Pass(FourValuesMethod::ViaAssociativity));
        // Just below 2 on one side and just above 4 on the other, nothing fits in between.
        for name in ["gap4", "twoThree"] {
            let spec = builtin(name).unwrap();
            match four_values_search(&spec) {
                FourValues::Witness(w) => assert_eq!(four_values_check(&spec, &w).unwrap(), None, "{name}"),
                other => panic!("{name}: {other:?}"),
            }
        }
        for name in ["R1", "R2", "R3", "S3", "ultra2"] {
            assert_eq!(four_values_search(&builtin(name).unwrap()), FourValues::Pass(FourValuesMethod::Exhaustive), "{name}");
        }
    }

    #[test]
    fn free_amalgam_examples() {
        let r2 = builtin("R2").unwrap();
        let a = space(&r2, &["a", "c"], &[("a", "c", p(1))]);
        let b = space(&r2, &["c", "b"], &[("c", "b", p(1))]);
        let ab = free_amalgam(&r2, &a, &b).unwrap();
        assert_eq!(ab.d(0, 2), &p(2));
        assert_eq!(free_amalgam(&r2, &ab, &b).unwrap(), ab);
        let bad = space(&r2, &["c", "b"], &[("c", "b", p(1))]);
        let a2 = space(&r2, &["c", "b", "z"], &[("c", "b", p(2)), ("c", "z", p(1)), ("b", "z", p(1))]);
        assert!(free_amalgam(&r2, &a2, &bad).is_err());
    }

    #[test]
    fn one_point_examples() {
        let r2 = builtin("R2").unwrap();
        let x1 = space(&r2, &["x1", "a"], &[("x1", "a", p(1))]);
        let x2 = space(&r2, &["x2", "a"], &[("x2", "a", p(2))]);
        let m = one_point_amalgam(&r2, &x1, &x2).unwrap();
        assert!(validate_metric(&r2, &m).is_empty());
        let t = m.d(0, 2).clone();
        assert!(t == p(1) || t == p(2));
        let twin = space(&r2, &["x2", "a"], &[("x2", "a", p(1))]);
        assert!(validate_metric(&r2, &one_point_amalgam(&r2, &x1, &twin).unwrap()).is_empty());
    }

    #[test]
    fn one_point_failure_over_magma() {
        let f = DistanceMonoidSpec::truncated_finite(&[int(0), int(1), int(2), q(7, 2)]).unwrap();
        let h = ExtendedValue::Principal(q(7, 2));
        // x1 sits at 1 from y and y2; x2 sits at 7/2 and 2; d(y, y2) = 2.
        let x1 = space(&f, &["y", "y2", "x1"], &[("y", "y2", p(2)), ("x1", "y", p(1)), ("x1", "y2", p(1))]);
        let x2 = space(&f, &["y", "y2", "x2"], &[("y", "y2", p(2)), ("x2", "y", h), ("x2", "y2", p(2))]);
        assert!(matches!(one_point_amalgam(&f, &x1, &x2), Err(Error::AmalgamationFailure(_))));
    }

    #[test]
    fn glue_two_triangles() {
        let r2 = builtin("R2").unwrap();
        let x1 = space(&r2, &["a", "b", "c"], &[("a", "b", p(1)), ("b", "c", p(1)), ("a", "c", p(2))]);
        let x2 = space(&r2, &["a", "b", "d"], &[("a", "b", p(1)), ("b", "d", p(2)), ("a", "d", p(1))]);
        let m = disjoint_amalgam(&r2, &x1, &x2).unwrap();
        assert_eq!(m.points(), &labels(&["a", "b", "c", "d"])[..]);
        assert!(validate_metric(&r2, &m).is_empty());
        assert_eq!(disjoint_amalgam(&r2, &x1, &x1.restrict(&[0, 1])).unwrap(), x1);
    }

    #[test]
    fn hat_takes_tightest_bounds() {
        let r3 = builtin("R3").unwrap();
        let s = space(&r3, &["a", "b", "c"], &[("a", "b", p(2)), ("b", "c", p(2)), ("a", "c", p(1))]);
        let mut phi = PairApproximation::new();
        phi.insert((0, 1), ApproxInterval::half(p(0), p(3)));
        phi.insert((1, 2), ApproxInterval::half(p(1), p(2)));
        phi.insert((0, 2), ApproxInterval::half(p(0), p(1)));
        let hat = phi.hat(&s);
        assert_eq!(hat.get(&p(2)), Some(&ApproxInterval::half(p(1), p(2))));
        assert!(phi.refines(&phi));
    }
}
