//! Distance monoids: finite operation tables and interval-union carriers with
//! truncated addition or max, plus the axiom checkers.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::carrier::IntervalUnionCarrier;
use crate::error::{Error, Result};
use crate::rational::{int, parse_rational, q, Rational};
use crate::star::{self, ExtendedValue};

/// A finite magma given by labels and an index table.
///
/// Elements are encoded as rationals: the labels' own values when every label
/// is a rational and the list is strictly increasing from 0, list positions
/// otherwise. Either way the encoding is order-faithful.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTable {
    labels: Vec<String>,
    values: Vec<Rational>,
    table: Vec<Vec<usize>>,
    carrier: IntervalUnionCarrier,
}

impl FiniteTable {
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidSpec("no elements".into()));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(Error::InvalidSpec("duplicate element labels".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpec(format!("table must be {n}x{n}")));
        }
        if let Some(bad) = table.iter().flatten().find(|&&i| i >= n) {
            return Err(Error::InvalidSpec(format!("table entry {bad} is out of range")));
        }
        let numeric: Option<Vec<Rational>> = labels.iter().map(|l| parse_rational(l).ok()).collect();
        let values = match numeric {
            Some(v) if v[0].is_zero() && v.windows(2).all(|w| w[0] < w[1]) => v,
            _ => (0..n).map(|i| int(i as i64)).collect(),
        };
        let carrier = IntervalUnionCarrier::from_points(&values)?;
        Ok(FiniteTable { labels, values, table, carrier })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, x: &Rational) -> Option<usize> {
        self.values.binary_search(x).ok()
    }

    pub fn apply(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceMonoidSpec {
    Finite(FiniteTable),
    TruncatedAdd(IntervalUnionCarrier),
    Max(IntervalUnionCarrier),
}

impl DistanceMonoidSpec {
    /// The given rationals with `r + s` truncated to the largest member below it.
    pub fn truncated_finite(points: &[Rational]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.first().map_or(true, |p| !p.is_zero()) {
            return Err(Error::InvalidSpec("0 must be an element".into()));
        }
        let table = (0..pts.len())
            .map(|i| {
                (0..pts.len())
                    .map(|j| {
                        let sum = &pts[i] + &pts[j];
                        pts.iter().rposition(|x| x <= &sum).unwrap_or(0)
                    })
                    .collect()
            })
            .collect();
        let labels = pts.iter().map(ToString::to_string).collect();
        Ok(DistanceMonoidSpec::Finite(FiniteTable::new(labels, table)?))
    }

    /// Finite elements with `r + s = max(r, s)`.
    pub fn max_finite(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let table = (0..n).map(|i| (0..n).map(|j| i.max(j)).collect()).collect();
        Ok(DistanceMonoidSpec::Finite(FiniteTable::new(labels, table)?))
    }

    pub fn carrier(&self) -> &IntervalUnionCarrier {
        match self {
            DistanceMonoidSpec::Finite(t) => &t.carrier,
            DistanceMonoidSpec::TruncatedAdd(c) | DistanceMonoidSpec::Max(c) => c,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DistanceMonoidSpec::Finite(_) => "finite",
            DistanceMonoidSpec::TruncatedAdd(_) => "interval-truncated-add",
            DistanceMonoidSpec::Max(_) => "interval-max",
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteTable> {
        match self {
            DistanceMonoidSpec::Finite(t) => Some(t),
            _ => None,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.carrier().contains(x)
    }

    pub fn max_elem(&self) -> Option<Rational> {
        self.carrier().max_elem()
    }

    /// All elements, when there are finitely many.
    pub fn elements(&self) -> Option<Vec<Rational>> {
        match self {
            DistanceMonoidSpec::Finite(t) => Some(t.values.clone()),
            _ => self.carrier().elements(),
        }
    }

    /// Reads an element written as a label (finite kind) or a rational.
    pub fn parse_element(&self, text: &str) -> Result<Rational> {
        let t = text.trim();
        if let DistanceMonoidSpec::Finite(ft) = self {
            if let Some(i) = ft.labels.iter().position(|l| l == t) {
                return Ok(ft.values[i].clone());
            }
            return match parse_rational(t) {
                Ok(x) if ft.index_of(&x).is_some() => Ok(x),
                _ => Err(Error::UnknownElement(t.to_string())),
            };
        }
        let x = parse_rational(t).map_err(|_| Error::UnknownElement(t.to_string()))?;
        if !self.contains(&x) {
            return Err(Error::NotInCarrier(x.to_string()));
        }
        Ok(x)
    }

    pub fn show_element(&self, x: &Rational) -> String {
        match self.as_finite().and_then(|t| t.index_of(x).map(|i| &t.labels[i])) {
            Some(label) => label.clone(),
            None => x.to_string(),
        }
    }

    /// Members of the finite fragment used for enumeration: every element of
    /// a finite carrier, or the multiples of `1/denominator` up to `cap`.
    pub fn fragment_elements(&self, denominator: Option<u64>, cap: Option<&Rational>) -> Result<Vec<Rational>> {
        if let Some(all) = self.elements() {
            return Ok(match (denominator, cap) {
                (None, None) => all,
                _ => {
                    let d = denominator.map(|d| q(1, d as i64));
                    all.into_iter()
                        .filter(|x| d.as_ref().map_or(true, |d| (x / d).is_integer()))
                        .filter(|x| cap.map_or(true, |c| x <= c))
                        .collect()
                }
            });
        }
        let d = denominator.ok_or_else(|| Error::Precondition("dense carrier needs a denominator bound".into()))?;
        let cap = match (cap, self.max_elem()) {
            (Some(c), _) => c.clone(),
            (None, Some(m)) => m,
            (None, None) => return Err(Error::Precondition("unbounded carrier needs a value bound".into())),
        };
        Ok(self.carrier().grid(d, &cap))
    }

    /// The fragment as a finite monoid with the operation truncated into it.
    ///
    /// Triangles among fragment values are the same in both monoids.
    pub fn fragment(&self, denominator: Option<u64>, cap: Option<&Rational>) -> Result<DistanceMonoidSpec> {
        if self.as_finite().is_some() && denominator.is_none() && cap.is_none() {
            return Ok(self.clone());
        }
        let pts = self.fragment_elements(denominator, cap)?;
        let table = (0..pts.len())
            .map(|i| {
                (0..pts.len())
                    .map(|j| {
                        let sum = star::star_add(self, &ExtendedValue::Principal(pts[i].clone()), &ExtendedValue::Principal(pts[j].clone()));
                        pts.iter().rposition(|x| ExtendedValue::Principal(x.clone()) <= sum).unwrap_or(0)
                    })
                    .collect()
            })
            .collect();
        let labels = pts.iter().map(ToString::to_string).collect();
        Ok(DistanceMonoidSpec::Finite(FiniteTable::new(labels, table)?))
    }
}

impl fmt::Display for DistanceMonoidSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceMonoidSpec::Finite(t) => write!(f, "finite {{{}}}", t.labels.join(", ")),
            DistanceMonoidSpec::TruncatedAdd(c) => write!(f, "truncated addition on {c}"),
            DistanceMonoidSpec::Max(c) => write!(f, "max on {c}"),
        }
    }
}

fn require_member(spec: &DistanceMonoidSpec, x: &Rational) -> Result<()> {
    if spec.contains(x) {
        Ok(())
    } else {
        Err(Error::NotInCarrier(spec.show_element(x)))
    }
}

/// The monoid sum of two carrier elements.
///
/// For truncated addition the result is the largest element not above `r + s`;
/// when that supremum is not attained the sum is unsupported.
pub fn op_add(spec: &DistanceMonoidSpec, r: &Rational, s: &Rational) -> Result<Rational> {
    require_member(spec, r)?;
    require_member(spec, s)?;
    match spec {
        DistanceMonoidSpec::Finite(t) => {
            let (i, j) = (t.index_of(r).unwrap(), t.index_of(s).unwrap());
            Ok(t.values[t.table[i][j]].clone())
        }
        DistanceMonoidSpec::Max(_) => Ok(r.max(s).clone()),
        DistanceMonoidSpec::TruncatedAdd(_) => {
            let sum = star::star_add(spec, &ExtendedValue::Principal(r.clone()), &ExtendedValue::Principal(s.clone()));
            match sum {
                ExtendedValue::Principal(x) => Ok(x),
                other => Err(Error::Unsupported {
                    r: r.to_string(),
                    s: s.to_string(),
                    reason: format!("no largest element below {}; the completed sum is {}", r + s, star::show(spec, &other)),
                }),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    Totality(usize, usize),
    Positivity(usize, usize),
    OrderCompatibility(usize, usize, usize),
    Commutativity(usize, usize),
    Unity(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
    pub note: String,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies totality, positivity, order compatibility, commutativity and unity.
pub fn check_magma_axioms(spec: &DistanceMonoidSpec) -> AxiomReport {
    let t = match spec {
        DistanceMonoidSpec::Finite(t) => t,
        _ => return sampled_axioms(spec),
    };
    let n = t.len();
    let mut violations = Vec::new();
    // Indices are in carrier order, so index comparison is the monoid order.
    for i in 0..n {
        if t.table[0][i] != i || t.table[i][0] != i {
            violations.push(AxiomViolation::Unity(i));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if t.table[i][j] != t.table[j][i] && i < j {
                violations.push(AxiomViolation::Commutativity(i, j));
            }
            if t.table[i][j] < i {
                violations.push(AxiomViolation::Positivity(i, j));
            }
            for k in j + 1..n {
                if t.table[i][j] > t.table[i][k] {
                    violations.push(AxiomViolation::OrderCompatibility(i, j, k));
                }
            }
        }
    }
    AxiomReport { violations, note: format!("exhaustive over {} triples", n * n * n) }
}

fn sampled_axioms(spec: &DistanceMonoidSpec) -> AxiomReport {
    let pts = probe_points(spec, 0);
    let mut violations = Vec::new();
    let add = |a: &Rational, b: &Rational| star::star_add(spec, &ExtendedValue::Principal(a.clone()), &ExtendedValue::Principal(b.clone()));
    for (i, a) in pts.iter().enumerate() {
        if add(a, &Rational::zero()) != ExtendedValue::Principal(a.clone()) {
            violations.push(AxiomViolation::Unity(i));
        }
        for (j, b) in pts.iter().enumerate() {
            let ab = add(a, b);
            if ab != add(b, a) && i < j {
                violations.push(AxiomViolation::Commutativity(i, j));
            }
            if ab < ExtendedValue::Principal(a.clone()) {
                violations.push(AxiomViolation::Positivity(i, j));
            }
        }
    }
    let note = match spec {
        DistanceMonoidSpec::Max(_) => "max is a distance-monoid operation on any carrier; sampled check agrees",
        _ => "truncated addition satisfies the axioms by construction; sampled check agrees",
    };
    AxiomReport { violations, note: note.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Associativity {
    Pass,
    /// `(r + s) + t != r + (s + t)`, with both sides.
    Witness { r: Rational, s: Rational, t: Rational, left: ExtendedValue, right: ExtendedValue },
}

/// Exhaustive on finite tables; critical and sampled triples on interval carriers.
pub fn check_associativity(spec: &DistanceMonoidSpec) -> Associativity {
    let pts = match spec {
        DistanceMonoidSpec::Max(_) => return Associativity::Pass,
        DistanceMonoidSpec::Finite(t) => t.values.clone(),
        DistanceMonoidSpec::TruncatedAdd(_) => probe_points(spec, 0),
    };
    let e = |x: &Rational| ExtendedValue::Principal(x.clone());
    for r in &pts {
        for s in &pts {
            let rs = star::star_add(spec, &e(r), &e(s));
            for t in &pts {
                let left = star::star_add(spec, &rs, &e(t));
                let right = star::star_add(spec, &e(r), &star::star_add(spec, &e(s), &e(t)));
                if left != right {
                    return Associativity::Witness { r: r.clone(), s: s.clone(), t: t.clone(), left, right };
                }
            }
        }
    }
    if let DistanceMonoidSpec::TruncatedAdd(_) = spec {
        let sample = random_members(spec, 0x5eed, 60);
        for r in &sample {
            for s in sample.iter().step_by(3) {
                for t in sample.iter().step_by(7) {
                    let left = star::star_add(spec, &star::star_add(spec, &e(r), &e(s)), &e(t));
                    let right = star::star_add(spec, &e(r), &star::star_add(spec, &e(s), &e(t)));
                    if left != right {
                        return Associativity::Witness { r: r.clone(), s: s.clone(), t: t.clone(), left, right };
                    }
                }
            }
        }
    }
    Associativity::Pass
}

/// Critical members of a carrier: endpoints and excluded points with their
/// neighbours, pairwise sums clamped into the carrier, and members just inside
/// open boundaries. Finite carriers return every element.
pub fn probe_points(spec: &DistanceMonoidSpec, extra_sums: usize) -> Vec<Rational> {
    if let Some(all) = spec.elements() {
        return all;
    }
    let c = spec.carrier();
    let base = c.critical_points();
    let mut seeds: BTreeSet<Rational> = base.iter().cloned().collect();
    for _ in 0..=extra_sums {
        let snapshot: Vec<Rational> = seeds.iter().cloned().collect();
        for a in &snapshot {
            for b in &snapshot {
                seeds.insert(a + b);
                if a > b {
                    seeds.insert(a - b);
                }
            }
        }
    }
    let eps = [q(1, 3), q(1, 10), q(1, 97)];
    let mut out = BTreeSet::new();
    for p in &seeds {
        for (x, attained) in [c.inf_from(p, false), c.inf_from(p, true), c.sup_below(p, false), c.sup_below(p, true)].into_iter().flatten() {
            if attained {
                out.insert(x);
            }
        }
        for e in &eps {
            for x in [p + e, p - e] {
                if c.contains(&x) {
                    out.insert(x);
                }
            }
        }
    }
    let cap = seeds.iter().max().cloned().unwrap_or_else(Rational::zero);
    out.retain(|x| x <= &(&cap + int(1)));
    out.into_iter().collect()
}

/// Seeded random members with small denominators.
pub fn random_members(spec: &DistanceMonoidSpec, seed: u64, count: usize) -> Vec<Rational> {
    if let Some(all) = spec.elements() {
        return all;
    }
    let c = spec.carrier();
    let top = c.critical_points().last().cloned().unwrap_or_else(Rational::zero) + int(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < count * 50 {
        tries += 1;
        let d: i64 = rng.gen_range(1..=24);
        let x = Rational::from_integer(num_bigint::BigInt::from(rng.gen_range(0..=d * 64))) / int(d);
        if x <= top && c.contains(&x) {
            out.push(x);
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SumCompleteness {
    Pass,
    /// `{x : x <= r + s}` has no largest element.
    Witness(Rational, Rational),
}

/// Decides whether every truncated sum of two members is attained.
pub fn check_sum_complete(carrier: &IntervalUnionCarrier) -> SumCompleteness {
    if carrier.is_locally_finite() {
        return SumCompleteness::Pass;
    }
    let bad = |v: &Rational| !matches!(carrier.sup_below(v, false), Some((_, true)));
    let top = carrier.critical_points().last().cloned().unwrap_or_else(Rational::zero);
    let cap = &top * int(2) + int(2);
    // Small denominators first so witnesses come out readable.
    for d in 1..=4u64 {
        let grid = carrier.grid(d, &cap);
        let mut pairs: Vec<(&Rational, &Rational)> =
            grid.iter().flat_map(|s| grid.iter().filter(move |r| r <= &s).map(move |r| (r, s))).collect();
        pairs.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        if let Some((r, s)) = pairs.into_iter().find(|(r, s)| bad(&(*r + *s))) {
            return SumCompleteness::Witness(r.clone(), s.clone());
        }
    }
    for region in bad_regions(carrier) {
        if let Some((r, s)) = sum_into(carrier, &region) {
            return SumCompleteness::Witness(r, s);
        }
    }
    SumCompleteness::Pass
}

/// A point or an open interval of targets whose truncation is unattained.
#[derive(Debug, Clone)]
enum Region {
    Point(Rational),
    Open(Rational, Option<Rational>),
}

fn bad_regions(c: &IntervalUnionCarrier) -> Vec<Region> {
    let bad = |v: &Rational| !matches!(c.sup_below(v, false), Some((_, true)));
    let pts = c.critical_points();
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if bad(p) {
            out.push(Region::Point(p.clone()));
        }
        let next = pts.get(i + 1);
        let probe = match next {
            Some(n) => crate::rational::midpoint(p, n),
            None => p + int(1),
        };
        if bad(&probe) {
            out.push(Region::Open(p.clone(), next.cloned()));
        }
    }
    out
}

fn sum_into(c: &IntervalUnionCarrier, region: &Region) -> Option<(Rational, Rational)> {
    let targets: Vec<Rational> = match region {
        Region::Point(p) => vec![p.clone()],
        Region::Open(lo, Some(hi)) => (1..8).map(|k| lo + (hi - lo) * q(k, 8)).collect(),
        Region::Open(lo, None) => (1..8).map(|k| lo + q(k, 2)).collect(),
    };
    let members: Vec<Rational> = {
        let mut m: BTreeSet<Rational> = BTreeSet::new();
        for t in &targets {
            for k in 0..=16 {
                let x = t * q(k, 16);
                if c.contains(&x) {
                    m.insert(x);
                }
            }
        }
        for p in c.critical_points() {
            if c.contains(&p) {
                m.insert(p);
            }
        }
        m.into_iter().collect()
    };
    for t in &targets {
        for r in &members {
            let s = t - r;
            if r <= &s && c.contains(&s) {
                return Some((r.clone(), s));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub right_closed: bool,
    pub ultrametric: bool,
    pub group_like: bool,
}

/// Right-closed, ultrametric and group-like flags of an associative monoid.
pub fn classify_monoid(spec: &DistanceMonoidSpec) -> Result<Classification> {
    if let Associativity::Witness { r, s, t, .. } = check_associativity(spec) {
        return Err(Error::Precondition(format!(
            "not associative at ({}, {}, {})",
            spec.show_element(&r),
            spec.show_element(&s),
            spec.show_element(&t)
        )));
    }
    Ok(Classification { right_closed: is_right_closed(spec), ultrametric: is_ultrametric(spec), group_like: is_group_like(spec) })
}

/// Every bounded subset has a maximum: no dense stretch of the carrier.
pub fn is_right_closed(spec: &DistanceMonoidSpec) -> bool {
    spec.carrier().is_locally_finite()
}

pub fn is_ultrametric(spec: &DistanceMonoidSpec) -> bool {
    match spec {
        DistanceMonoidSpec::Max(_) => true,
        DistanceMonoidSpec::Finite(t) => (0..t.len()).all(|i| (0..t.len()).all(|j| t.table[i][j] == i.max(j))),
        DistanceMonoidSpec::TruncatedAdd(c) => {
            // r + r = r for every r means the next element after r exceeds 2r.
            let Some(all) = c.elements() else { return false };
            all.iter().all(|r| r.is_zero() || c.sup_below(&(r * int(2)), false).map(|(m, _)| &m == r).unwrap_or(false))
        }
    }
}

pub fn is_group_like(spec: &DistanceMonoidSpec) -> bool {
    let pts = match spec {
        DistanceMonoidSpec::Finite(_) => spec.elements().unwrap(),
        _ => {
            let mut p = probe_points(spec, 0);
            p.extend(random_members(spec, 0x9e37, 24));
            p.sort();
            p.dedup();
            p
        }
    };
    let e = |x: &Rational| ExtendedValue::Principal(x.clone());
    let carrier = spec.carrier();
    let least_positive = star::normalize_cut(spec, &ExtendedValue::Successor(Rational::zero()));
    let sup = match carrier.components.last().and_then(|c| c.hi.clone()) {
        Some(h) => star::normalize_cut(spec, &ExtendedValue::Principal(h)),
        None => ExtendedValue::Omega,
    };
    for r in &pts {
        for s in &pts {
            let delta = star::star_diff(spec, &e(r), &e(s));
            if s < r && delta > least_positive && star::star_add(spec, &delta, &e(s)) != e(r) {
                return false;
            }
            if e(r) < sup {
                if let Some(limit) = star::inf_add_above(spec, &delta, &e(s)) {
                    if !limit.exceeds(&e(r)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
