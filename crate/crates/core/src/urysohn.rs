//! Finite pieces of the generic space: one-point extensions, growth by
//! realizing extension obligations, extension-axiom checking, witness
//! construction for approximate extensions, and the quantifier-elimination
//! decision.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{instantiate_ms_axioms, token_for, Bound, Formula};
use crate::metric::{four_values_search, ApproxInterval, FiniteMetricSpace, FourValues, PairApproximation};
use crate::monoid::{classify_monoid, op_add, DistanceMonoidSpec};
use crate::rational::Rational;
use crate::refine::canonical_approximation;
use crate::star::{find_qe_witness, inf_add_above, is_triangle, star_add, sup_shift_below, ExtendedValue, QeWitness};

/// Every Katětov map on `space` with nonzero values in the fragment, in
/// lexicographic order of the value lists.
pub fn enumerate_katetov(
    spec: &DistanceMonoidSpec,
    space: &FiniteMetricSpace,
    denominator: Option<u64>,
    cap: Option<&Rational>,
) -> Result<Vec<Vec<ExtendedValue>>> {
    let values: Vec<ExtendedValue> =
        spec.fragment_elements(denominator, cap)?.into_iter().filter(|x| x > &Rational::from_integer(0.into())).map(ExtendedValue::Principal).collect();
    let n = space.len();
    let mut out = Vec::new();
    let mut current: Vec<ExtendedValue> = Vec::with_capacity(n);
    fn go(
        spec: &DistanceMonoidSpec,
        space: &FiniteMetricSpace,
        values: &[ExtendedValue],
        current: &mut Vec<ExtendedValue>,
        out: &mut Vec<Vec<ExtendedValue>>,
    ) {
        let i = current.len();
        if i == space.len() {
            out.push(current.clone());
            return;
        }
        for v in values {
            if (0..i).all(|j| is_triangle(spec, space.d(j, i), &current[j], v)) {
                current.push(v.clone());
                go(spec, space, values, current, out);
                current.pop();
            }
        }
    }
    if n > 0 {
        go(spec, space, &values, &mut current, &mut out);
    }
    Ok(out)
}

/// A finite space, a one-point extension profile, and intervals around every
/// distance of the extended space. The new point has index `base.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionScheme {
    pub base: FiniteMetricSpace,
    pub katetov: Vec<ExtendedValue>,
    pub approx: PairApproximation,
}

impl ExtensionScheme {
    pub fn new(base: FiniteMetricSpace, katetov: Vec<ExtendedValue>, approx: PairApproximation) -> Result<Self> {
        let n = base.len();
        if katetov.len() != n {
            return Err(Error::Precondition(format!("expected {n} extension values, got {}", katetov.len())));
        }
        let scheme = ExtensionScheme { base, katetov, approx };
        for i in 0..=n {
            for j in i + 1..=n {
                let iv = scheme.approx.get(&(i, j)).ok_or_else(|| Error::Precondition(format!("no interval for pair ({i}, {j})")))?;
                if !iv.contains(&scheme.distance(i, j)) {
                    return Err(Error::Precondition(format!("pair ({i}, {j}) lies outside {iv}")));
                }
            }
        }
        Ok(scheme)
    }

    /// Intervals `(previous element, d]` from the finite monoid `spec`.
    pub fn canonical(spec: &DistanceMonoidSpec, base: FiniteMetricSpace, katetov: Vec<ExtendedValue>) -> Result<Self> {
        let mut ext = base.clone();
        ext.push_point(fresh_label(&base), katetov.clone());
        let approx = canonical_approximation(spec, &ext)?;
        ExtensionScheme::new(base, katetov, approx)
    }

    pub fn size(&self) -> usize {
        self.base.len()
    }

    fn distance(&self, i: usize, j: usize) -> ExtendedValue {
        let n = self.base.len();
        match (i == n, j == n) {
            (true, true) => ExtendedValue::zero(),
            (true, false) => self.katetov[j].clone(),
            (false, true) => self.katetov[i].clone(),
            _ => self.base.d(i, j).clone(),
        }
    }

    /// Interval of the base pair `(i, j)`.
    pub fn pair(&self, i: usize, j: usize) -> ApproxInterval {
        self.approx.pair(i, j)
    }

    /// Interval between base point `i` and the new point.
    pub fn target(&self, i: usize) -> ApproxInterval {
        self.approx.pair(i, self.base.len())
    }

    /// All upper ends are members of the carrier.
    pub fn is_standard(&self) -> bool {
        self.approx.0.values().all(|iv| iv.hi().as_element().is_some())
    }

    /// The sentence saying every tuple inside the base intervals has a point
    /// inside the target intervals.
    pub fn to_formula(&self, spec: &DistanceMonoidSpec) -> Result<Formula> {
        let n = self.size();
        let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let atom = |x: &str, y: &str, iv: &ApproxInterval| -> Result<Formula> {
            let token = |v: &ExtendedValue| v.as_element().map(|r| token_for(spec, r));
            let lo = token(&iv.lo()).ok_or_else(|| Error::Precondition(format!("lower end {} is not a member", iv.lo())))?;
            let hi = match iv.hi() {
                ExtendedValue::Omega => Bound::Omega,
                h => Bound::Elem(token(&h).ok_or_else(|| Error::Precondition(format!("upper end {h} is not a member")))?),
            };
            Ok(Formula::within(x, y, &lo, hi))
        };
        let mut premise = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                premise.push(atom(&vars[i], &vars[j], &self.pair(i, j))?);
            }
        }
        let found = (0..n).map(|i| atom(&vars[i], "y", &self.target(i))).collect::<Result<Vec<_>>>()?;
        let witness = Formula::exists("y", Formula::conjunction(found).expect("the base is nonempty"));
        let body = match Formula::conjunction(premise) {
            Some(p) => Formula::implies(p, witness),
            None => witness,
        };
        Ok(Formula::forall_all(&vars, body))
    }
}

fn fresh_label(space: &FiniteMetricSpace) -> String {
    let mut label = "z".to_string();
    while space.index(&label).is_some() {
        label.push('\'');
    }
    label
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionCheck {
    Holds,
    /// Indices of a tuple inside the base intervals with no witness point.
    Counterexample(Vec<usize>),
}

/// Model-checks the extension sentence of `scheme` on `space`, reporting the
/// first tuple in lexicographic order that has no witness.
pub fn check_extension_axiom(space: &FiniteMetricSpace, scheme: &ExtensionScheme) -> ExtensionCheck {
    let n = scheme.size();
    let mut tuple = Vec::with_capacity(n);
    match search_tuples(space, scheme, &mut tuple) {
        Some(t) => ExtensionCheck::Counterexample(t),
        None => ExtensionCheck::Holds,
    }
}

fn search_tuples(space: &FiniteMetricSpace, scheme: &ExtensionScheme, tuple: &mut Vec<usize>) -> Option<Vec<usize>> {
    let k = tuple.len();
    if k == scheme.size() {
        let witnessed = (0..space.len()).any(|y| tuple.iter().enumerate().all(|(i, &x)| scheme.target(i).contains(space.d(x, y))));
        return (!witnessed).then(|| tuple.clone());
    }
    for x in 0..space.len() {
        if tuple.iter().enumerate().all(|(i, &b)| scheme.pair(i, k).contains(space.d(b, x))) {
            tuple.push(x);
            let found = search_tuples(space, scheme, tuple);
            tuple.pop();
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthConfig {
    pub target_size: usize,
    pub seed: u64,
    /// Largest base of an extension obligation.
    pub max_base: usize,
    /// Grid step `1/denominator` for dense carriers.
    pub denominator: Option<u64>,
    /// Largest distance used, for unbounded carriers.
    pub cap: Option<Rational>,
    /// Keep adding points past the target until no obligation is pending,
    /// stopping at this many points.
    pub close_limit: Option<usize>,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig { target_size: 10, seed: 0, max_base: 3, denominator: None, cap: None, close_limit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthReport {
    pub space: FiniteMetricSpace,
    /// The finite monoid the distances were drawn from.
    pub fragment: DistanceMonoidSpec,
    /// Obligations that ended with a witness.
    pub realized: usize,
    /// Obligations still without a witness in the final space.
    pub pending: usize,
    /// Canonical schemes all of whose instances were witnessed.
    pub scheduled: Vec<ExtensionScheme>,
    /// No obligation is pending.
    pub closed: bool,
}

/// Obligations scanned per added point.
const PACK_WINDOW: usize = 4096;

#[derive(Debug, Clone)]
struct Obligation {
    base: Vec<usize>,
    values: Vec<usize>,
}

/// Distances as indices into the sorted fragment.
struct Grid {
    add: Vec<Vec<usize>>,
    dist: Vec<Vec<usize>>,
}

impl Grid {
    fn triangle(&self, a: usize, b: usize, c: usize) -> bool {
        a <= self.add[b][c] && b <= self.add[a][c] && c <= self.add[a][b]
    }

    fn witnessed(&self, ob: &Obligation) -> bool {
        (0..self.dist.len()).any(|y| ob.base.iter().zip(&ob.values).all(|(&b, &v)| self.dist[b][y] == v))
    }

    fn push(&mut self, row: &[usize]) {
        for (r, &v) in self.dist.iter_mut().zip(row) {
            r.push(v);
        }
        let mut last = row.to_vec();
        last.push(0);
        self.dist.push(last);
    }
}

/// Least key of `(size, base distances, values)` over reorderings of the base.
fn type_key(d: impl Fn(usize, usize) -> usize, values: &[usize]) -> Vec<usize> {
    let n = values.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<usize>> = None;
    loop {
        let mut key = vec![n];
        for i in 0..n {
            for j in i + 1..n {
                key.push(d(perm[i], perm[j]));
            }
        }
        key.extend(perm.iter().map(|&i| values[i]));
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_else(|| vec![0])
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn scheme_from_key(frag: &DistanceMonoidSpec, values: &[Rational], key: &[usize]) -> Result<ExtensionScheme> {
    let n = key[0];
    let labels: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let e = |k: usize| ExtendedValue::Principal(values[k].clone());
    let mut entries = Vec::new();
    let mut at = 1;
    for i in 0..n {
        for j in i + 1..n {
            entries.push((labels[i].clone(), labels[j].clone(), e(key[at])));
            at += 1;
        }
    }
    let base = FiniteMetricSpace::from_entries(frag, labels, &entries)?;
    ExtensionScheme::canonical(frag, base, key[at..].iter().map(|&k| e(k)).collect())
}

fn finite_fragment(spec: &DistanceMonoidSpec, denominator: Option<u64>, cap: Option<&Rational>) -> Result<(DistanceMonoidSpec, Vec<Rational>, Vec<Vec<usize>>)> {
    let frag = spec.fragment(denominator, cap)?;
    let table = frag.as_finite().expect("fragments are finite");
    Ok((frag.clone(), table.values().to_vec(), table.table().to_vec()))
}

fn new_obligations(grid: &Grid, p: usize, max_base: usize, nonzero: &[usize], rng: &mut ChaCha8Rng) -> Vec<Obligation> {
    let mut out = Vec::new();
    let mut others: Vec<usize> = Vec::new();
    fn subsets(grid: &Grid, p: usize, start: usize, left: usize, others: &mut Vec<usize>, nonzero: &[usize], out: &mut Vec<Obligation>) {
        let mut base = others.clone();
        base.push(p);
        let mut values = Vec::with_capacity(base.len());
        katetov_indices(grid, &base, nonzero, &mut values, out);
        if left == 0 {
            return;
        }
        for q in start..p {
            others.push(q);
            subsets(grid, p, q + 1, left - 1, others, nonzero, out);
            others.pop();
        }
    }
    subsets(grid, p, 0, max_base.saturating_sub(1), &mut others, nonzero, &mut out);
    out.sort_by_key(|o| o.base.len());
    let mut start = 0;
    while start < out.len() {
        let len = out[start].base.len();
        let end = out[start..].iter().position(|o| o.base.len() != len).map_or(out.len(), |k| start + k);
        out[start..end].shuffle(rng);
        start = end;
    }
    out
}

fn katetov_indices(grid: &Grid, base: &[usize], nonzero: &[usize], values: &mut Vec<usize>, out: &mut Vec<Obligation>) {
    let i = values.len();
    if i == base.len() {
        out.push(Obligation { base: base.to_vec(), values: values.clone() });
        return;
    }
    for &v in nonzero {
        if (0..i).all(|j| grid.triangle(grid.dist[base[j]][base[i]], values[j], v)) {
            values.push(v);
            katetov_indices(grid, base, nonzero, values, out);
            values.pop();
        }
    }
}

/// Grows a finite metric space by repeatedly adding a point that realizes
/// the oldest unwitnessed obligations compatible with each other; other
/// distances of the new point are drawn at random among admissible values.
pub fn grow_generic(spec: &DistanceMonoidSpec, config: &GrowthConfig) -> Result<GrowthReport> {
    if config.target_size == 0 {
        return Err(Error::Precondition("target size must be positive".into()));
    }
    if config.max_base == 0 {
        return Err(Error::Precondition("obligation bases need at least one point".into()));
    }
    let (frag, values, add) = finite_fragment(spec, config.denominator, config.cap.as_ref())?;
    if let FourValues::Witness(q) = four_values_search(&frag) {
        return Err(Error::AmalgamationFailure(Box::new(q)));
    }
    let nonzero: Vec<usize> = (1..values.len()).collect();
    if nonzero.is_empty() {
        return Err(Error::Precondition("the fragment has no positive distance".into()));
    }
    let limit = config.close_limit.unwrap_or(config.target_size).max(config.target_size);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut grid = Grid { add, dist: vec![vec![0]] };
    let mut queue: VecDeque<Obligation> = new_obligations(&grid, 0, config.max_base, &nonzero, &mut rng).into();
    let mut realized_types: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut realized = 0usize;
    let key_of = |grid: &Grid, ob: &Obligation| type_key(|i, j| grid.dist[ob.base[i]][ob.base[j]], &ob.values);
    let closed;
    loop {
        let n = grid.dist.len();
        let mut profile: Vec<Option<usize>> = vec![None; n];
        let mut kept: VecDeque<Obligation> = VecDeque::with_capacity(queue.len());
        let mut scanned = 0;
        let growing = n < limit;
        while let Some(ob) = queue.pop_front() {
            if scanned >= PACK_WINDOW {
                kept.push_back(ob);
                kept.extend(queue.drain(..));
                break;
            }
            scanned += 1;
            if grid.witnessed(&ob) {
                realized += 1;
                realized_types.insert(key_of(&grid, &ob));
                continue;
            }
            if growing && fits(&grid, &profile, &ob) {
                for (&b, &v) in ob.base.iter().zip(&ob.values) {
                    profile[b] = Some(v);
                }
            }
            kept.push_back(ob);
        }
        queue = kept;
        if n >= config.target_size && (config.close_limit.is_none() || queue.is_empty() || n >= limit) {
            closed = queue.is_empty();
            break;
        }
        let mut row = profile;
        for u in 0..n {
            if row[u].is_some() {
                continue;
            }
            let admissible: Vec<usize> = nonzero
                .iter()
                .copied()
                .filter(|&v| row.iter().enumerate().all(|(w, rw)| rw.map_or(true, |rw| grid.triangle(grid.dist[u][w], v, rw))))
                .collect();
            row[u] = Some(*admissible.choose(&mut rng).ok_or_else(|| Error::Precondition("a partial extension could not be completed".into()))?);
        }
        let row: Vec<usize> = row.into_iter().map(Option::unwrap).collect();
        grid.push(&row);
        queue.extend(new_obligations(&grid, n, config.max_base, &nonzero, &mut rng));
    }
    let mut pending_types: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut pending = 0usize;
    for ob in &queue {
        if grid.witnessed(ob) {
            realized += 1;
            realized_types.insert(key_of(&grid, ob));
        } else {
            pending += 1;
            pending_types.insert(key_of(&grid, ob));
        }
    }
    let scheduled = realized_types.difference(&pending_types).map(|k| scheme_from_key(&frag, &values, k)).collect::<Result<Vec<_>>>()?;
    let n = grid.dist.len();
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let dist = grid.dist.iter().map(|row| row.iter().map(|&k| ExtendedValue::Principal(values[k].clone())).collect()).collect();
    let space = FiniteMetricSpace::new(labels, dist)?;
    Ok(GrowthReport { space, fragment: frag, realized, pending, scheduled, closed: closed || pending == 0 })
}

/// Whether `ob` agrees with `profile` and keeps every assigned pair a triangle.
fn fits(grid: &Grid, profile: &[Option<usize>], ob: &Obligation) -> bool {
    for (&b, &v) in ob.base.iter().zip(&ob.values) {
        if profile[b].is_some_and(|p| p != v) {
            return false;
        }
        for (u, pu) in profile.iter().enumerate() {
            if let Some(pu) = pu {
                if u != b && !grid.triangle(grid.dist[u][b], *pu, v) {
                    return false;
                }
            }
        }
    }
    for (i, (&b, &v)) in ob.base.iter().zip(&ob.values).enumerate() {
        for (&c, &w) in ob.base.iter().zip(&ob.values).take(i) {
            if !grid.triangle(grid.dist[b][c], v, w) {
                return false;
            }
        }
    }
    true
}

/// Canonical schemes of every base size up to `max_size` over a finite
/// fragment, one per isometry type of the extended space.
pub fn canonical_schemes(spec: &DistanceMonoidSpec, max_size: usize, denominator: Option<u64>, cap: Option<&Rational>) -> Result<Vec<ExtensionScheme>> {
    let (frag, values, add) = finite_fragment(spec, denominator, cap)?;
    let nonzero: Vec<usize> = (1..values.len()).collect();
    let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
    for n in 1..=max_size {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut choice = vec![0usize; pairs.len()];
        loop {
            let mut grid = Grid { add: add.clone(), dist: vec![vec![0; n]; n] };
            for (k, &(i, j)) in pairs.iter().enumerate() {
                grid.dist[i][j] = nonzero[choice[k]];
                grid.dist[j][i] = nonzero[choice[k]];
            }
            let metric = (0..n).all(|i| (i + 1..n).all(|j| (j + 1..n).all(|k| grid.triangle(grid.dist[i][j], grid.dist[j][k], grid.dist[i][k]))));
            if metric {
                let base: Vec<usize> = (0..n).collect();
                let mut obs = Vec::new();
                katetov_indices(&grid, &base, &nonzero, &mut Vec::new(), &mut obs);
                for ob in obs {
                    keys.insert(type_key(|i, j| grid.dist[i][j], &ob.values));
                }
            }
            let Some(k) = (0..choice.len()).find(|&k| choice[k] + 1 < nonzero.len()) else { break };
            choice[k] += 1;
            choice[..k].iter_mut().for_each(|c| *c = 0);
        }
    }
    keys.iter().map(|k| scheme_from_key(&frag, &values, k)).collect()
}

/// Why a witness profile could not be built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessFailure {
    /// The interval of this pair has an upper end outside the carrier.
    NotStandard(usize, usize),
    /// The tuple distance for this base pair lies outside its interval.
    TupleOutside(usize, usize),
    /// The upper end of the pair exceeds the sum of the two target upper ends.
    UpperEnds(usize, usize),
    /// Some member above the lower end of the pair, added to the target upper
    /// end of the second point, fails to exceed the target lower end of the first.
    LowerEnds(usize, usize),
    Undefined(String),
}

impl fmt::Display for WitnessFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessFailure::NotStandard(i, j) => write!(f, "upper end of ({i}, {j}) is not a member"),
            WitnessFailure::TupleOutside(i, j) => write!(f, "tuple distance ({i}, {j}) lies outside its interval"),
            WitnessFailure::UpperEnds(i, j) => write!(f, "upper ends are not subadditive at ({i}, {j})"),
            WitnessFailure::LowerEnds(i, j) => write!(f, "lower end of {i} is reachable from above the lower end of ({i}, {j})"),
            WitnessFailure::Undefined(msg) => write!(f, "{msg}"),
        }
    }
}

fn check_witness_hypotheses(spec: &DistanceMonoidSpec, scheme: &ExtensionScheme, tuple: &FiniteMetricSpace) -> std::result::Result<(), WitnessFailure> {
    let n = scheme.size();
    if tuple.len() != n {
        return Err(WitnessFailure::Undefined(format!("tuple has {} points, scheme base has {n}", tuple.len())));
    }
    for (&(i, j), iv) in &scheme.approx.0 {
        if iv.hi().as_element().is_none() {
            return Err(WitnessFailure::NotStandard(i, j));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if !scheme.pair(i, j).contains(tuple.d(i, j)) {
                return Err(WitnessFailure::TupleOutside(i.min(j), i.max(j)));
            }
            if scheme.pair(i, j).hi() > star_add(spec, &scheme.target(i).hi(), &scheme.target(j).hi()) {
                return Err(WitnessFailure::UpperEnds(i.min(j), i.max(j)));
            }
            if let Some(limit) = inf_add_above(spec, &scheme.pair(i, j).lo(), &scheme.target(j).hi()) {
                if !limit.exceeds(&scheme.target(i).lo()) {
                    return Err(WitnessFailure::LowerEnds(i, j));
                }
            }
        }
    }
    Ok(())
}

/// Processing order: base points by ascending target upper end, ties by index.
fn witness_order(scheme: &ExtensionScheme) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scheme.size()).collect();
    order.sort_by_key(|&i| scheme.target(i).hi());
    order
}

/// Distances from a new point to `tuple` inside the target intervals, built
/// greedily: each value is the least of its upper end and the sums through
/// earlier points.
pub fn realize_witness(
    spec: &DistanceMonoidSpec,
    scheme: &ExtensionScheme,
    tuple: &FiniteMetricSpace,
) -> std::result::Result<Vec<Rational>, WitnessFailure> {
    check_witness_hypotheses(spec, scheme, tuple)?;
    let order = witness_order(scheme);
    let mut s: Vec<Option<Rational>> = vec![None; scheme.size()];
    for (pos, &k) in order.iter().enumerate() {
        let mut sk = scheme.target(k).hi().as_element().cloned().expect("standard");
        for &i in &order[..pos] {
            let d = tuple.d(i, k).as_element().ok_or_else(|| WitnessFailure::Undefined(format!("tuple distance ({i}, {k}) is not a member")))?;
            let sum = op_add(spec, s[i].as_ref().unwrap(), d).map_err(|e| WitnessFailure::Undefined(e.to_string()))?;
            if sum < sk {
                sk = sum;
            }
        }
        s[k] = Some(sk);
    }
    Ok(s.into_iter().map(Option::unwrap).collect())
}

/// Checks a witness profile: every value inside its target interval, every
/// value below its upper end equal to a sum through an earlier point, and
/// every pair of values a triangle with the tuple distance.
pub fn check_witness(spec: &DistanceMonoidSpec, scheme: &ExtensionScheme, tuple: &FiniteMetricSpace, s: &[Rational]) -> std::result::Result<(), String> {
    let e = |r: &Rational| ExtendedValue::Principal(r.clone());
    let order = witness_order(scheme);
    for (pos, &k) in order.iter().enumerate() {
        let iv = scheme.target(k);
        if !iv.contains(&e(&s[k])) {
            return Err(format!("value {} for point {k} lies outside {iv}", s[k]));
        }
        if e(&s[k]) < iv.hi() {
            let reached = order[..pos].iter().any(|&i| star_add(spec, &e(&s[i]), tuple.d(i, k)) == e(&s[k]));
            if !reached {
                return Err(format!("value {} for point {k} is below its upper end without a reason", s[k]));
            }
        }
        for &i in &order[..pos] {
            if !is_triangle(spec, tuple.d(i, k), &e(&s[i]), &e(&s[k])) {
                return Err(format!("({}, {}, {}) is not a triangle", tuple.d(i, k), s[i], s[k]));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QeReason {
    RightClosed,
    Ultrametric,
    GroupLike,
    /// Adding any member is continuous from below at every cut.
    ContinuousShifts,
}

impl fmt::Display for QeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QeReason::RightClosed => "right_closed",
            QeReason::Ultrametric => "ultrametric",
            QeReason::GroupLike => "group_like",
            QeReason::ContinuousShifts => "continuous_shifts",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QeDecision {
    Yes(QeReason),
    No(QeWitness),
    Unknown(String),
}

/// Whether the theory of the generic space eliminates quantifiers.
pub fn qe_decision(spec: &DistanceMonoidSpec) -> Result<QeDecision> {
    let class = classify_monoid(spec)?;
    for (flag, reason) in [(class.right_closed, QeReason::RightClosed), (class.ultrametric, QeReason::Ultrametric), (class.group_like, QeReason::GroupLike)] {
        if flag {
            return Ok(QeDecision::Yes(reason));
        }
    }
    match find_qe_witness(spec) {
        None => Ok(QeDecision::Yes(QeReason::ContinuousShifts)),
        Some(w) => {
            let lhs = star_add(spec, &w.alpha, &ExtendedValue::Principal(w.s.clone()));
            let rhs = sup_shift_below(spec, &w.alpha, &w.s);
            if lhs == w.lhs && rhs == w.rhs && rhs < lhs {
                Ok(QeDecision::No(w))
            } else {
                Ok(QeDecision::Unknown(format!("candidate {w} did not re-verify")))
            }
        }
    }
}

/// Metric-space axioms over the fragment followed by the canonical extension
/// sentences with bases of at most `size_bound` points.
pub fn generate_axioms(spec: &DistanceMonoidSpec, size_bound: usize, denominator: Option<u64>, cap: Option<&Rational>) -> Result<Vec<Formula>> {
    let fragment = spec.fragment_elements(denominator, cap)?;
    let mut out: Vec<Formula> = instantiate_ms_axioms(spec, &fragment).instances.into_iter().map(|(_, f)| f).collect();
    for scheme in canonical_schemes(spec, size_bound, denominator, cap)? {
        out.push(scheme.to_formula(spec)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin;
    use crate::formula::holds;
    use crate::metric::validate_metric;
    use crate::rational::{int, q};
    use crate::star::parse_value;
    use proptest::prelude::*;

    fn p(n: i64) -> ExtendedValue {
        ExtendedValue::Principal(int(n))
    }

    fn space(spec: &DistanceMonoidSpec, pts: &[&str], entries: &[(&str, &str, ExtendedValue)]) -> FiniteMetricSpace {
        let e: Vec<_> = entries.iter().map(|(a, b, v)| (a.to_string(), b.to_string(), v.clone())).collect();
        FiniteMetricSpace::from_entries(spec, pts.iter().map(|s| s.to_string()).collect(), &e).unwrap()
    }

    fn grow(name: &str, size: usize, seed: u64, k: usize) -> GrowthReport {
        let cfg = GrowthConfig { target_size: size, seed, max_base: k, ..GrowthConfig::default() };
        grow_generic(&builtin(name).unwrap(), &cfg).unwrap()
    }

    #[test]
    fn katetov_maps_small_cases() {
        let r1 = builtin("R1").unwrap();
        let pair = space(&r1, &["a", "b"], &[("a", "b", p(1))]);
        assert_eq!(enumerate_katetov(&r1, &pair, None, None).unwrap(), vec![vec![p(1), p(1)]]);
        let r2 = builtin("R2").unwrap();
        assert_eq!(enumerate_katetov(&r2, &FiniteMetricSpace::single("a"), None, None).unwrap(), vec![vec![p(1)], vec![p(2)]]);
        let far = space(&r2, &["a", "b"], &[("a", "b", p(2))]);
        assert_eq!(enumerate_katetov(&r2, &far, None, None).unwrap().len(), 4);
        assert!(enumerate_katetov(&builtin("Qplus").unwrap(), &FiniteMetricSpace::single("a"), None, None).is_err());
    }

    /// Every value list over the fragment, filtered by the triangle check alone.
    fn brute_katetov(spec: &DistanceMonoidSpec, sp: &FiniteMetricSpace, vals: &[ExtendedValue]) -> Vec<Vec<ExtendedValue>> {
        let mut all: Vec<Vec<ExtendedValue>> = vec![vec![]];
        for _ in 0..sp.len() {
            all = all.into_iter().flat_map(|v| vals.iter().map(move |x| [v.clone(), vec![x.clone()]].concat())).collect();
        }
        all.into_iter().filter(|f| crate::metric::check_katetov(spec, sp, f).unwrap().is_none()).collect()
    }

    #[test]
    fn katetov_enumeration_matches_brute_force() {
        let r3 = builtin("R3").unwrap();
        let tri = space(&r3, &["a", "b", "c"], &[("a", "b", p(1)), ("b", "c", p(2)), ("a", "c", p(3))]);
        let vals = [p(1), p(2), p(3)];
        assert_eq!(enumerate_katetov(&r3, &tri, None, None).unwrap(), brute_katetov(&r3, &tri, &vals));
        let q1 = builtin("Q1").unwrap();
        let half = ExtendedValue::Principal(q(1, 2));
        let two = space(&q1, &["a", "b"], &[("a", "b", half.clone())]);
        let grid = [ExtendedValue::Principal(q(1, 4)), half, ExtendedValue::Principal(q(3, 4)), p(1)];
        assert_eq!(enumerate_katetov(&q1, &two, Some(4), None).unwrap(), brute_katetov(&q1, &two, &grid));
    }

    #[test]
    fn complete_graph_over_r1() {
        let g = grow("R1", 10, 7, 3);
        assert_eq!(g.space.len(), 10);
        assert!((0..10).all(|i| (0..10).all(|j| i == j || g.space.d(i, j) == &p(1))));
    }

    #[test]
    fn growth_is_deterministic_and_metric() {
        let a = grow("R2", 20, 3, 3);
        let b = grow("R2", 20, 3, 3);
        assert_eq!(a, b);
        let r2 = builtin("R2").unwrap();
        assert!(validate_metric(&r2, &a.space).is_empty());
        assert_ne!(a.space, grow("R2", 20, 4, 3).space);
    }

    #[test]
    fn growth_extends_smaller_runs() {
        let small = grow("R3", 8, 11, 2);
        let big = grow("R3", 16, 11, 2);
        assert_eq!(big.space.restrict(&(0..8).collect::<Vec<_>>()), small.space);
    }

    #[test]
    fn scheduled_schemes_hold_in_the_grown_space() {
        let g = grow("R2", 30, 5, 2);
        assert!(!g.scheduled.is_empty());
        for scheme in &g.scheduled {
            assert_eq!(check_extension_axiom(&g.space, scheme), ExtensionCheck::Holds, "{:?}", scheme.katetov);
        }
    }

    #[test]
    fn ultrametric_growth_nests_balls() {
        let g = grow("ultra2", 25, 2, 3);
        let one = p(1);
        let n = g.space.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if g.space.d(i, j) <= &one && g.space.d(j, k) <= &one {
                        assert!(g.space.d(i, k) <= &one);
                    }
                }
            }
        }
    }

    #[test]
    fn closing_a_small_growth() {
        let cfg = GrowthConfig { target_size: 4, seed: 1, max_base: 1, close_limit: Some(40), ..GrowthConfig::default() };
        let g = grow_generic(&builtin("R3").unwrap(), &cfg).unwrap();
        assert!(g.closed);
        assert_eq!(g.pending, 0);
        assert_eq!(g.scheduled.len(), 3);
    }

    #[test]
    fn growth_refuses_magmas_without_amalgamation() {
        let bad = DistanceMonoidSpec::truncated_finite(&[int(0), int(1), int(2), q(7, 2)]).unwrap();
        assert!(matches!(grow_generic(&bad, &GrowthConfig::default()), Err(Error::AmalgamationFailure(_))));
    }

    #[test]
    fn removing_the_only_witness_breaks_the_axiom() {
        let r1 = builtin("R1").unwrap();
        let scheme = ExtensionScheme::canonical(&r1, FiniteMetricSpace::single("a"), vec![p(1)]).unwrap();
        let mut sp = space(&r1, &["a", "b"], &[("a", "b", p(1))]);
        assert_eq!(check_extension_axiom(&sp, &scheme), ExtensionCheck::Holds);
        sp.remove_point(1);
        assert_eq!(check_extension_axiom(&sp, &scheme), ExtensionCheck::Counterexample(vec![0]));
    }

    #[test]
    fn unsatisfiable_premise_holds_vacuously() {
        let r3 = builtin("R3").unwrap();
        let base = space(&r3, &["a", "b"], &[("a", "b", p(2))]);
        let mut approx = PairApproximation::new();
        approx.insert((0, 1), ApproxInterval::half(p(1), p(2)));
        approx.insert((0, 2), ApproxInterval::half(p(0), p(1)));
        approx.insert((1, 2), ApproxInterval::half(p(2), p(3)));
        let scheme = ExtensionScheme::new(base, vec![p(1), p(3)], approx).unwrap();
        let all_ones = space(&r3, &["u", "v", "w"], &[("u", "v", p(1)), ("v", "w", p(1)), ("u", "w", p(1))]);
        assert_eq!(check_extension_axiom(&all_ones, &scheme), ExtensionCheck::Holds);
    }

    #[test]
    fn witness_examples() {
        let r3 = builtin("R3").unwrap();
        let b = space(&r3, &["b1", "b2"], &[("b1", "b2", p(2))]);
        let mut approx = PairApproximation::new();
        approx.insert((0, 1), ApproxInterval::half(p(1), p(2)));
        approx.insert((0, 2), ApproxInterval::half(p(0), p(1)));
        approx.insert((1, 2), ApproxInterval::half(p(2), p(3)));
        let scheme = ExtensionScheme::new(b.clone(), vec![p(1), p(3)], approx.clone()).unwrap();
        let s = realize_witness(&r3, &scheme, &b).unwrap();
        assert_eq!(s, vec![int(1), int(3)]);
        check_witness(&r3, &scheme, &b, &s).unwrap();

        let single = ExtensionScheme::canonical(&r3, FiniteMetricSpace::single("a"), vec![p(2)]).unwrap();
        assert_eq!(realize_witness(&r3, &single, &FiniteMetricSpace::single("a")).unwrap(), vec![int(2)]);

        let outside = ExtensionScheme::new(b.clone(), vec![p(1), p(1)], approx).unwrap_err();
        assert!(matches!(outside, Error::Precondition(_)));
        let wide = space(&r3, &["b1", "b2"], &[("b1", "b2", p(3))]);
        let mut approx = PairApproximation::new();
        approx.insert((0, 1), ApproxInterval::half(p(2), p(3)));
        approx.insert((0, 2), ApproxInterval::half(p(0), p(1)));
        approx.insert((1, 2), ApproxInterval::half(p(0), p(2)));
        let scheme = ExtensionScheme::new(wide.clone(), vec![p(1), p(2)], approx).unwrap();
        assert_eq!(realize_witness(&r3, &scheme, &wide), Ok(vec![int(1), int(2)]));
        let mut approx = PairApproximation::new();
        approx.insert((0, 1), ApproxInterval::half(p(0), p(3)));
        approx.insert((0, 2), ApproxInterval::half(p(0), p(1)));
        approx.insert((1, 2), ApproxInterval::half(p(0), p(1)));
        let near = space(&r3, &["b1", "b2"], &[("b1", "b2", p(1))]);
        let scheme = ExtensionScheme::new(near.clone(), vec![p(1), p(1)], approx).unwrap();
        assert_eq!(realize_witness(&r3, &scheme, &near), Err(WitnessFailure::UpperEnds(0, 1)));
    }

    #[test]
    fn qe_examples() {
        assert_eq!(qe_decision(&builtin("R3").unwrap()).unwrap(), QeDecision::Yes(QeReason::RightClosed));
        assert_eq!(qe_decision(&builtin("Q1").unwrap()).unwrap(), QeDecision::Yes(QeReason::GroupLike));
        assert_eq!(qe_decision(&builtin("ultraQ1").unwrap()).unwrap(), QeDecision::Yes(QeReason::Ultrametric));
        match qe_decision(&builtin("noQE").unwrap()).unwrap() {
            QeDecision::No(w) => {
                assert_eq!(w.alpha, parse_value(&builtin("noQE").unwrap(), "gap(3)").unwrap());
                assert_eq!(w.s, int(2));
            }
            other => panic!("{other:?}"),
        }
        let bad = DistanceMonoidSpec::truncated_finite(&[int(0), int(1), int(2), q(7, 2)]).unwrap();
        assert!(qe_decision(&bad).is_err());
    }

    #[test]
    fn axiom_counts() {
        let r1 = builtin("R1").unwrap();
        let ax = generate_axioms(&r1, 1, None, None).unwrap();
        assert_eq!(ax.len(), 4 + 1);
        assert_eq!(ax[4].to_string(), "forall x1. exists y. d(x1,y) in (0, 1]");
        let r2 = builtin("R2").unwrap();
        let schemes = canonical_schemes(&r2, 2, None, None).unwrap();
        // One base point: 2 profiles. Two points at 1: {1,1},{1,2},{2,2}; at 2: {1,1},{1,2},{2,2}.
        assert_eq!(schemes.len(), 2 + 6);
        let g = grow("R2", 12, 9, 2);
        for f in generate_axioms(&r2, 0, None, None).unwrap() {
            assert!(holds(&r2, &g.space, &f).unwrap(), "{f}");
        }
    }

    #[test]
    fn scheme_sentence_agrees_with_model_check() {
        let r2 = builtin("R2").unwrap();
        let g = grow("R2", 9, 1, 2);
        for scheme in canonical_schemes(&r2, 2, None, None).unwrap() {
            let by_formula = holds(&r2, &g.space, &scheme.to_formula(&r2).unwrap()).unwrap();
            assert_eq!(by_formula, check_extension_axiom(&g.space, &scheme) == ExtensionCheck::Holds);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn grown_spaces_satisfy_the_metric_axioms(seed in 0u64..1000, size in 2usize..14, name in prop::sample::select(vec!["R2", "R3", "S3", "ultra3"])) {
            let spec = builtin(name).unwrap();
            let g = grow(name, size, seed, 2);
            prop_assert_eq!(g.space.len(), size);
            prop_assert!(validate_metric(&spec, &g.space).is_empty());
            for (_, f) in instantiate_ms_axioms(&spec, &spec.elements().unwrap()).instances {
                prop_assert!(holds(&spec, &g.space, &f).unwrap(), "{}", f);
            }
        }

        #[test]
        fn canonical_witnesses_meet_their_conditions(seed in 0u64..1000, size in 2usize..6) {
            let r3 = builtin("R3").unwrap();
            let g = grow("R3", size + 1, seed, 1);
            let base = g.space.restrict(&(0..size).collect::<Vec<_>>());
            let profile: Vec<ExtendedValue> = (0..size).map(|i| g.space.d(i, size).clone()).collect();
            let scheme = ExtensionScheme::canonical(&r3, base.clone(), profile.clone()).unwrap();
            let s = realize_witness(&r3, &scheme, &base).unwrap();
            prop_assert!(check_witness(&r3, &scheme, &base, &s).is_ok());
            let want: Vec<Rational> = profile.iter().map(|v| v.as_element().unwrap().clone()).collect();
            prop_assert_eq!(s, want);
        }
    }
}
