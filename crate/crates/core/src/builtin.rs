//! Catalog of named monoids.

use std::collections::BTreeSet;

use crate::carrier::{Component, IntervalUnionCarrier};
use crate::error::{Error, Result};
use crate::monoid::DistanceMonoidSpec;
use crate::rational::{int, q};

/// Names accepted by [`builtin`]; `R<n>`, `S<n>` and `ultra<n>` take any `n` in 1..=64.
pub const CATALOG: &[(&str, &str)] = &[
    ("R<n>", "{0, 1, ..., n} with addition truncated at n"),
    ("S<n>", "{0, 1/n, ..., 1} with addition truncated at 1"),
    ("ultra<n>", "{0, 1, ..., n} with max"),
    ("Q1", "rationals in [0, 1] with addition truncated at 1"),
    ("Qplus", "nonnegative rationals with addition"),
    ("ultraQ1", "rationals in [0, 1] with max"),
    ("twoThree", "rationals in [0, 2) u [3, inf) with truncated addition"),
    ("gap4", "rationals in [0, 2) u (4, inf) with truncated addition"),
    ("noQE", "{0} u rationals in [2, inf) minus {3} with truncated addition"),
];

/// Concrete names listed by the CLI and exercised by the test suites.
pub fn shipped_names() -> Vec<String> {
    let mut v: Vec<String> = ["R1", "R2", "R3", "R4", "S2", "S3", "S4", "ultra2", "ultra3"].iter().map(|s| s.to_string()).collect();
    v.extend(CATALOG.iter().map(|(n, _)| n.to_string()).filter(|n| !n.contains('<')));
    v
}

fn indexed(name: &str, prefix: &str) -> Option<i64> {
    let n: i64 = name.strip_prefix(prefix)?.parse().ok()?;
    (1..=64).contains(&n).then_some(n)
}

pub fn builtin(name: &str) -> Result<DistanceMonoidSpec> {
    let interval = |comps: Vec<Component>, lattice, excluded: BTreeSet<_>| IntervalUnionCarrier::new(comps, lattice, excluded);
    if let Some(n) = indexed(name, "R") {
        return DistanceMonoidSpec::truncated_finite(&(0..=n).map(int).collect::<Vec<_>>());
    }
    if let Some(n) = indexed(name, "S") {
        return DistanceMonoidSpec::truncated_finite(&(0..=n).map(|k| q(k, n)).collect::<Vec<_>>());
    }
    if let Some(n) = indexed(name, "ultra") {
        return DistanceMonoidSpec::max_finite((0..=n).map(|k| k.to_string()).collect());
    }
    let spec = match name {
        "Q1" => DistanceMonoidSpec::TruncatedAdd(interval(vec![Component::closed(int(0), int(1))], None, BTreeSet::new())?),
        "Qplus" => DistanceMonoidSpec::TruncatedAdd(interval(vec![Component::ray(int(0), true)], None, BTreeSet::new())?),
        "ultraQ1" => DistanceMonoidSpec::Max(interval(vec![Component::closed(int(0), int(1))], None, BTreeSet::new())?),
        "twoThree" => DistanceMonoidSpec::TruncatedAdd(interval(
            vec![Component::right_open(int(0), int(2)), Component::ray(int(3), true)],
            None,
            BTreeSet::new(),
        )?),
        "gap4" => DistanceMonoidSpec::TruncatedAdd(interval(
            vec![Component::right_open(int(0), int(2)), Component::ray(int(4), false)],
            None,
            BTreeSet::new(),
        )?),
        "noQE" => DistanceMonoidSpec::TruncatedAdd(interval(
            vec![Component::point(int(0)), Component::ray(int(2), true)],
            None,
            [int(3)].into(),
        )?),
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_name_resolves() {
        for name in shipped_names() {
            builtin(&name).unwrap();
        }
        assert!(builtin("R0").is_err());
        assert!(builtin("bogus").is_err());
    }

    #[test]
    fn shapes() {
        assert_eq!(builtin("R2").unwrap().elements().unwrap(), vec![int(0), int(1), int(2)]);
        assert_eq!(builtin("S2").unwrap().elements().unwrap(), vec![int(0), q(1, 2), int(1)]);
        let noqe = builtin("noQE").unwrap();
        assert!(noqe.contains(&int(2)) && !noqe.contains(&int(3)) && !noqe.contains(&int(1)));
    }
}
