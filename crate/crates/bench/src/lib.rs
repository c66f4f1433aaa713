//! Fixtures shared by the benchmarks.

use distmon::star::{parse_value, ExtendedValue};
use distmon::{builtin, DistanceMonoidSpec, FiniteMetricSpace};

pub fn monoid(name: &str) -> DistanceMonoidSpec {
    builtin(name).expect("shipped builtin")
}

/// Parsed pairs of extended values, for the completion arithmetic.
pub fn value_pairs(spec: &DistanceMonoidSpec, pairs: &[(&str, &str)]) -> Vec<(ExtendedValue, ExtendedValue)> {
    pairs.iter().map(|(a, b)| (parse_value(spec, a).unwrap(), parse_value(spec, b).unwrap())).collect()
}

/// `n` points on a line at unit spacing, distances truncated by the monoid.
pub fn path_space(spec: &DistanceMonoidSpec, n: usize) -> FiniteMetricSpace {
    let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = parse_value(spec, &(j - i).to_string()).unwrap_or_else(|_| distmon::star::omega(spec));
            entries.push((points[i].clone(), points[j].clone(), v));
        }
    }
    FiniteMetricSpace::from_entries(spec, points, &entries).expect("path space")
}
