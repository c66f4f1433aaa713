//! Turning spaces over the completion into spaces over the carrier.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::carrier::IntervalUnionCarrier;
use crate::error::{Error, Result};
use crate::fm::{self, Constraint};
use crate::metric::{validate_metric, ApproxInterval, FiniteMetricSpace, PairApproximation, ValueApproximation};
use crate::monoid::{check_sum_complete, op_add, DistanceMonoidSpec, SumCompleteness};
use crate::rational::{int, Rational};
use crate::star::{density_witness, normalize_cut, omega, star_add, ExtendedValue};

fn sum_complete(spec: &DistanceMonoidSpec) -> bool {
    match spec {
        DistanceMonoidSpec::TruncatedAdd(c) => check_sum_complete(c) == SumCompleteness::Pass,
        _ => true,
    }
}

/// A metric approximation of `xs` refining `psi`, with upper ends in the carrier.
pub fn metric_refinement(spec: &DistanceMonoidSpec, xs: &[ExtendedValue], psi: &ValueApproximation) -> Result<ValueApproximation> {
    if !sum_complete(spec) {
        return Err(Error::Precondition("the carrier is not sum-complete".into()));
    }
    let xs: Vec<ExtendedValue> = xs.iter().map(|x| normalize_cut(spec, x)).collect::<BTreeSet<_>>().into_iter().collect();
    if spec.max_elem().is_none() && xs.contains(&ExtendedValue::Omega) {
        return Err(Error::Precondition("omega is not a member, so the values must stay bounded".into()));
    }
    let mut out = ValueApproximation::new();
    let alphas: Vec<&ExtendedValue> = xs.iter().filter(|x| !x.is_zero()).collect();
    if xs.iter().any(ExtendedValue::is_zero) {
        out.insert(ExtendedValue::zero(), ApproxInterval::Zero);
    }
    let mut uppers: Vec<Rational> = Vec::with_capacity(alphas.len());
    for (k, alpha) in alphas.iter().enumerate() {
        let iv = psi.get(alpha).ok_or_else(|| Error::Precondition(format!("no interval for {alpha}")))?;
        if !iv.contains(alpha) {
            return Err(Error::Precondition(format!("{alpha} lies outside its interval {iv}")));
        }
        let next = alphas.get(k + 1).map(|a| (*a).clone()).unwrap_or(ExtendedValue::Omega);
        let hi = iv.hi();
        if !matches!(hi, ExtendedValue::Principal(_) | ExtendedValue::Omega) {
            return Err(Error::Precondition(format!("upper end {hi} is neither a member nor omega")));
        }
        let hi = match hi.as_element() {
            Some(h) if alphas.get(k + 1).map_or(true, |n| &hi < *n) => h.clone(),
            _ => density_witness(spec, alpha, &next).ok_or_else(|| Error::Precondition(format!("no member between {alpha} and {next}")))?,
        };
        uppers.push(hi);
    }
    let mut s: Vec<Rational> = Vec::with_capacity(alphas.len());
    for (k, alpha) in alphas.iter().enumerate() {
        let mut sk = uppers[k].clone();
        for i in 0..k {
            for j in 0..k {
                if **alpha <= star_add(spec, alphas[i], alphas[j]) {
                    let sum = op_add(spec, &s[i], &s[j])?;
                    if sum < sk {
                        sk = sum;
                    }
                }
            }
        }
        let lo = psi.get(alpha).unwrap().lo();
        out.insert((*alpha).clone(), ApproxInterval::half(lo, ExtendedValue::Principal(sk.clone())));
        s.push(sk);
    }
    Ok(out)
}

/// Whether `alpha <= beta + gamma` forces `phi+(alpha) <= phi+(beta) + phi+(gamma)` on `xs`.
pub fn is_metric_approximation(spec: &DistanceMonoidSpec, xs: &[ExtendedValue], phi: &ValueApproximation) -> bool {
    let up = |x: &ExtendedValue| phi.get(x).map(|iv| iv.hi());
    xs.iter().all(|a| {
        xs.iter().all(|b| {
            xs.iter().all(|c| {
                if *a > star_add(spec, b, c) {
                    return true;
                }
                match (up(a), up(b), up(c)) {
                    (Some(pa), Some(pb), Some(pc)) => pa <= star_add(spec, &pb, &pc),
                    _ => false,
                }
            })
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxOutcome {
    Realized(FiniteMetricSpace),
    Infeasible(String),
}

const SOLVER_POINTS: usize = 8;
const FM_BUDGET: usize = 200_000;

/// Finds a metric over the carrier with each distance inside the interval of
/// the original distance, or shows there is none.
pub fn approximately_metric_check(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, phi: &ValueApproximation) -> Result<ApproxOutcome> {
    let n = space.len();
    for i in 0..n {
        for j in i + 1..n {
            let d = space.d(i, j);
            let iv = phi.get(d).ok_or_else(|| Error::Precondition(format!("no interval for distance {d}")))?;
            if !iv.contains(d) {
                return Err(Error::Precondition(format!("{d} lies outside its interval {iv}")));
            }
        }
    }
    if sum_complete(spec) {
        let violations = validate_metric(spec, space);
        if !violations.is_empty() {
            return Ok(ApproxOutcome::Infeasible(format!("not a metric space: {violations:?}")));
        }
        return realize_by_refinement(spec, space, phi).map(ApproxOutcome::Realized);
    }
    if n > SOLVER_POINTS {
        return Err(Error::Precondition(format!("the constraint solver handles at most {SOLVER_POINTS} points")));
    }
    solve_pieces(spec, space, phi)
}

fn realize_by_refinement(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, phi: &ValueApproximation) -> Result<FiniteMetricSpace> {
    let mut work = space.clone();
    let mut psi = phi.clone();
    if spec.max_elem().is_none() {
        // Only pairs at omega can form triangles with omega, so a large member stands in for it.
        if let Some(iv) = phi.get(&ExtendedValue::Omega) {
            let finite_top = space.distance_set().iter().filter_map(|v| v.point().cloned()).max().unwrap_or_else(Rational::zero);
            let floor = (finite_top * int(2) + int(1)).max(iv.lo().point().cloned().unwrap_or_else(Rational::zero) + int(1));
            let t = spec.carrier().inf_from(&floor, false).and_then(|(x, _)| density_witness(spec, &normalize_cut(spec, &ExtendedValue::Principal(x)), &ExtendedValue::Omega));
            let t = t.ok_or_else(|| Error::Precondition("no member stands in for omega".into()))?;
            let tv = ExtendedValue::Principal(t);
            for i in 0..work.len() {
                for j in i + 1..work.len() {
                    if work.d(i, j) == &ExtendedValue::Omega {
                        work.set(i, j, tv.clone());
                    }
                }
            }
            psi.insert(tv.clone(), ApproxInterval::half(iv.lo(), omega(spec)));
        }
    }
    let xs = work.distance_set();
    let refined = metric_refinement(spec, &xs, &psi)?;
    for i in 0..work.len() {
        for j in i + 1..work.len() {
            let v = refined.get(work.d(i, j)).expect("refined every distance").hi();
            work.set(i, j, v);
        }
    }
    debug_assert!(validate_metric(spec, &work).is_empty());
    Ok(work)
}

/// A convex piece of the carrier: `lo < x < hi` with optional closed ends.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Piece {
    lo: Rational,
    lo_closed: bool,
    hi: Option<Rational>,
    hi_closed: bool,
}

/// The members of `(lo, hi]` split into convex pieces.
///
/// A member lies above the cut `lo` iff it exceeds its point, and below the
/// cut `hi` iff it does not exceed its point.
fn pieces(c: &IntervalUnionCarrier, iv: &ApproxInterval) -> Vec<Piece> {
    let Some(lo) = iv.lo().point().cloned() else { return Vec::new() };
    let hi = iv.hi().point().cloned();
    let mut out = Vec::new();
    for comp in &c.components {
        let mut p = Piece { lo: comp.lo.clone(), lo_closed: comp.lo_closed, hi: comp.hi.clone(), hi_closed: comp.hi_closed };
        if p.lo <= lo {
            p.lo = lo.clone();
            p.lo_closed = false;
        }
        if let Some(h) = &hi {
            let tighter = p.hi.as_ref().map_or(true, |ch| h < ch);
            if tighter {
                p.hi = Some(h.clone());
                p.hi_closed = true;
            }
        }
        let mut cuts: Vec<&Rational> = c.excluded.iter().filter(|e| p.admits(e)).collect();
        cuts.sort();
        let mut cur = p;
        for e in cuts {
            out.push(Piece { lo: cur.lo.clone(), lo_closed: cur.lo_closed, hi: Some(e.clone()), hi_closed: false });
            cur.lo = e.clone();
            cur.lo_closed = false;
        }
        out.push(cur);
    }
    out.retain(Piece::is_nonempty);
    out
}

impl Piece {
    fn is_nonempty(&self) -> bool {
        match &self.hi {
            None => true,
            Some(h) => &self.lo < h || (&self.lo == h && self.lo_closed && self.hi_closed),
        }
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

fn solve_pieces(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, phi: &ValueApproximation) -> Result<ApproxOutcome> {
    let c = spec.carrier();
    if c.lattice.is_some() {
        return Err(Error::Precondition("lattice carriers are sum-complete".into()));
    }
    let n = space.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let options: Vec<Vec<Piece>> = pairs.iter().map(|&(i, j)| pieces(c, phi.get(space.d(i, j)).unwrap())).collect();
    if options.iter().any(Vec::is_empty) {
        return Ok(ApproxOutcome::Infeasible("some interval holds no member".into()));
    }
    let m = pairs.len();
    let var = |i: usize, j: usize| pairs.iter().position(|&p| p == (i.min(j), i.max(j))).unwrap();
    let mut triangle = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k && i < k {
                    let mut co = vec![Rational::zero(); m];
                    co[var(i, k)] += Rational::one();
                    co[var(i, j)] -= Rational::one();
                    co[var(j, k)] -= Rational::one();
                    triangle.push(Constraint::le(co, Rational::zero()));
                }
            }
        }
    }
    let mut choice = vec![0usize; m];
    loop {
        let mut cs = triangle.clone();
        for (v, &k) in choice.iter().enumerate() {
            let p = &options[v][k];
            let mut up = vec![Rational::zero(); m];
            up[v] = Rational::one();
            let down: Vec<Rational> = up.iter().map(|x| -x).collect();
            cs.push(Constraint { coeffs: down, rhs: -p.lo.clone(), strict: !p.lo_closed });
            if let Some(h) = &p.hi {
                cs.push(Constraint { coeffs: up, rhs: h.clone(), strict: !p.hi_closed });
            }
        }
        match fm::solve(m, cs, FM_BUDGET) {
            fm::Outcome::Feasible(x) => {
                let mut out = space.clone();
                for (v, &(i, j)) in pairs.iter().enumerate() {
                    out.set(i, j, ExtendedValue::Principal(x[v].clone()));
                }
                debug_assert!(validate_metric(spec, &out).is_empty());
                return Ok(ApproxOutcome::Realized(out));
            }
            fm::Outcome::TooLarge => return Err(Error::Precondition("constraint system exceeds the elimination budget".into())),
            fm::Outcome::Infeasible => {}
        }
        // Next assignment of pieces, odometer style.
        let mut v = 0;
        loop {
            if v == m {
                return Ok(ApproxOutcome::Infeasible("no assignment of carrier pieces admits a metric".into()));
            }
            choice[v] += 1;
            if choice[v] < options[v].len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

/// `(d-, d]` for each pair, where `d-` is the element just below `d`.
pub fn canonical_approximation(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace) -> Result<PairApproximation> {
    let elements = spec.elements().ok_or_else(|| Error::Precondition("canonical intervals need a finite carrier".into()))?;
    let mut out = PairApproximation::new();
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            let d = space.d(i, j);
            let r = d.as_element().ok_or_else(|| Error::Precondition(format!("{d} is not a member")))?;
            let k = elements.binary_search(r).map_err(|_| Error::NotInCarrier(r.to_string()))?;
            if k == 0 {
                return Err(Error::InvalidSpace(format!("distinct points {} and {} at distance 0", space.label(i), space.label(j))));
            }
            out.insert((i, j), ApproxInterval::half(ExtendedValue::Principal(elements[k - 1].clone()), d.clone()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin;
    use crate::rational::q;

    fn p(n: i64) -> ExtendedValue {
        ExtendedValue::Principal(int(n))
    }

    fn four_point(spec: &DistanceMonoidSpec) -> FiniteMetricSpace {
        let e = |a: &str, b: &str, v: i64| (a.to_string(), b.to_string(), p(v));
        let entries = vec![e("w", "x", 1), e("x", "z", 1), e("w", "y", 1), e("x", "y", 3), e("w", "z", 3), e("y", "z", 4)];
        FiniteMetricSpace::from_entries(spec, ["w", "x", "y", "z"].iter().map(|s| s.to_string()).collect(), &entries).unwrap()
    }

    fn example_phi() -> ValueApproximation {
        let mut phi = ValueApproximation::new();
        phi.insert(ExtendedValue::zero(), ApproxInterval::Zero);
        phi.insert(p(1), ApproxInterval::half(p(0), p(1)));
        phi.insert(p(3), ApproxInterval::half(p(0), p(3)));
        phi.insert(p(4), ApproxInterval::half(p(3), p(4)));
        phi
    }

    #[test]
    fn four_point_space_is_not_approximable() {
        let s = builtin("twoThree").unwrap();
        let outcome = approximately_metric_check(&s, &four_point(&s), &example_phi()).unwrap();
        assert!(matches!(outcome, ApproxOutcome::Infeasible(_)));
    }

    #[test]
    fn three_point_subspaces_are_approximable() {
        let s = builtin("twoThree").unwrap();
        let a = four_point(&s);
        for drop in 0..4 {
            let keep: Vec<usize> = (0..4).filter(|&i| i != drop).collect();
            match approximately_metric_check(&s, &a.restrict(&keep), &example_phi()).unwrap() {
                ApproxOutcome::Realized(m) => assert!(validate_metric(&s, &m).is_empty()),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn exact_intervals_return_the_space() {
        let r3 = builtin("R3").unwrap();
        let e = |a: &str, b: &str, v: i64| (a.to_string(), b.to_string(), p(v));
        let sp = FiniteMetricSpace::from_entries(&r3, vec!["a".into(), "b".into(), "c".into()], &[e("a", "b", 1), e("b", "c", 2), e("a", "c", 3)]).unwrap();
        let mut phi = ValueApproximation::new();
        for v in 1..=3 {
            phi.insert(p(v), ApproxInterval::half(p(v - 1), p(v)));
        }
        assert_eq!(approximately_metric_check(&r3, &sp, &phi).unwrap(), ApproxOutcome::Realized(sp));
    }

    #[test]
    fn refinement_example() {
        let q1 = builtin("Q1").unwrap();
        let half = ExtendedValue::Principal(q(1, 2));
        let half_plus = ExtendedValue::Successor(q(1, 2));
        let mut psi = ValueApproximation::new();
        psi.insert(half.clone(), ApproxInterval::half(p(0), half.clone()));
        psi.insert(half_plus.clone(), ApproxInterval::half(half.clone(), ExtendedValue::Principal(q(3, 5))));
        let xs = vec![half.clone(), half_plus.clone()];
        let phi = metric_refinement(&q1, &xs, &psi).unwrap();
        assert_eq!(phi.get(&half).unwrap().hi(), half);
        assert_eq!(phi.get(&half_plus).unwrap().hi(), ExtendedValue::Principal(q(3, 5)));
        assert!(phi.refines(&psi));
        assert!(is_metric_approximation(&q1, &xs, &phi));
        assert_eq!(metric_refinement(&q1, &[ExtendedValue::zero()], &psi).unwrap().get(&ExtendedValue::zero()), Some(&ApproxInterval::Zero));
    }

    #[test]
    fn refinement_preconditions() {
        let psi = ValueApproximation::new();
        assert!(metric_refinement(&builtin("gap4").unwrap(), &[p(1)], &psi).is_err());
        assert!(metric_refinement(&builtin("Qplus").unwrap(), &[ExtendedValue::Omega], &psi).is_err());
    }

    #[test]
    fn finite_refinement_keeps_values() {
        let r3 = builtin("R3").unwrap();
        let mut psi = ValueApproximation::new();
        for v in 1..=3 {
            psi.insert(p(v), ApproxInterval::half(p(0), p(3)));
        }
        let xs: Vec<ExtendedValue> = (1..=3).map(p).collect();
        let phi = metric_refinement(&r3, &xs, &psi).unwrap();
        for v in 1..=3 {
            assert_eq!(phi.get(&p(v)).unwrap().hi(), p(v));
        }
    }

    #[test]
    fn canonical_intervals() {
        let r3 = builtin("R3").unwrap();
        let e = |a: &str, b: &str, v: i64| (a.to_string(), b.to_string(), p(v));
        let sp = FiniteMetricSpace::from_entries(&r3, vec!["a".into(), "b".into(), "c".into()], &[e("a", "b", 1), e("b", "c", 3), e("a", "c", 3)]).unwrap();
        let phi = canonical_approximation(&r3, &sp).unwrap();
        assert_eq!(phi.pair(0, 1), ApproxInterval::half(p(0), p(1)));
        assert_eq!(phi.pair(1, 2), ApproxInterval::half(p(2), p(3)));
        assert_eq!(phi.pair(2, 2), ApproxInterval::Zero);
        assert!(canonical_approximation(&builtin("Q1").unwrap(), &sp).is_err());
    }
}
