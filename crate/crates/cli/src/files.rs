//! JSON formats for monoids and spaces.
//!
//! Rationals are strings (`"7/2"`), interval upper ends may be `"inf"`, and
//! distances use the extended-value syntax (`"2"`, `"2+"`, `"gap(3)"`, `"omega"`).

use std::collections::BTreeSet;
use std::path::Path;

use distmon::rational::{parse_nonneg, parse_rational};
use distmon::star::parse_value;
use distmon::{builtin, Component, DistanceMonoidSpec, FiniteMetricSpace, IntervalUnionCarrier, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalFile {
    pub lo: String,
    pub lo_closed: bool,
    pub hi: String,
    pub hi_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoidFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<String>>,
    /// Entry `[i][j]` is the label of `elements[i] + elements[j]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<IntervalFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    /// A builtin name or an inline monoid.
    pub monoid: Value,
    pub points: Vec<String>,
    pub distances: Vec<(String, String, String)>,
}

fn at(path: &str, msg: impl std::fmt::Display) -> String {
    format!("{path}: {msg}")
}

fn rational_at(path: &str, text: &str) -> Result<Rational, String> {
    parse_nonneg(text).map_err(|e| at(path, e))
}

impl MonoidFile {
    pub fn to_spec(&self) -> Result<DistanceMonoidSpec, String> {
        match self.kind.as_str() {
            "finite" => {
                if self.intervals.is_some() || self.lattice.is_some() || !self.excluded.is_empty() {
                    return Err(at("kind", "finite monoids take only elements and table"));
                }
                let elements = self.elements.clone().ok_or_else(|| at("elements", "missing"))?;
                let table = self.table.as_ref().ok_or_else(|| at("table", "missing"))?;
                if table.len() != elements.len() {
                    return Err(at("table", format!("expected {} rows, found {}", elements.len(), table.len())));
                }
                let mut rows = Vec::with_capacity(table.len());
                for (i, row) in table.iter().enumerate() {
                    if row.len() != elements.len() {
                        return Err(at(&format!("table[{i}]"), format!("expected {} entries, found {}", elements.len(), row.len())));
                    }
                    let mut out = Vec::with_capacity(row.len());
                    for (j, entry) in row.iter().enumerate() {
                        let k = elements.iter().position(|e| e == entry).ok_or_else(|| at(&format!("table[{i}][{j}]"), format!("{entry:?} is not an element")))?;
                        out.push(k);
                    }
                    rows.push(out);
                }
                let t = distmon::FiniteTable::new(elements, rows).map_err(|e| at("elements", e))?;
                Ok(DistanceMonoidSpec::Finite(t))
            }
            "interval-truncated-add" | "interval-max" => {
                if self.elements.is_some() || self.table.is_some() {
                    return Err(at("kind", "interval monoids take intervals, lattice and excluded"));
                }
                let intervals = self.intervals.as_ref().ok_or_else(|| at("intervals", "missing"))?;
                let mut comps = Vec::with_capacity(intervals.len());
                for (i, iv) in intervals.iter().enumerate() {
                    let lo = rational_at(&format!("intervals[{i}].lo"), &iv.lo)?;
                    let hi = match iv.hi.trim() {
                        "inf" => None,
                        text => Some(rational_at(&format!("intervals[{i}].hi"), text)?),
                    };
                    if hi.is_none() && iv.hi_closed {
                        return Err(at(&format!("intervals[{i}].hi_closed"), "an infinite end cannot be closed"));
                    }
                    comps.push(Component { lo, lo_closed: iv.lo_closed, hi, hi_closed: iv.hi_closed });
                }
                let lattice = match &self.lattice {
                    None => None,
                    Some(text) => Some(rational_at("lattice", text)?),
                };
                let mut excluded = BTreeSet::new();
                for (i, text) in self.excluded.iter().enumerate() {
                    excluded.insert(rational_at(&format!("excluded[{i}]"), text)?);
                }
                let carrier = IntervalUnionCarrier::new(comps, lattice, excluded).map_err(|e| at("intervals", e))?;
                Ok(if self.kind == "interval-max" { DistanceMonoidSpec::Max(carrier) } else { DistanceMonoidSpec::TruncatedAdd(carrier) })
            }
            other => Err(at("kind", format!("unknown kind {other:?}; expected finite, interval-truncated-add or interval-max"))),
        }
    }

    pub fn from_spec(spec: &DistanceMonoidSpec) -> MonoidFile {
        match spec {
            DistanceMonoidSpec::Finite(t) => {
                let labels = t.labels().to_vec();
                let table = t.table().iter().map(|row| row.iter().map(|&k| labels[k].clone()).collect()).collect();
                MonoidFile { kind: spec.kind_name().into(), elements: Some(labels), table: Some(table), intervals: None, lattice: None, excluded: Vec::new() }
            }
            DistanceMonoidSpec::TruncatedAdd(c) | DistanceMonoidSpec::Max(c) => MonoidFile {
                kind: spec.kind_name().into(),
                elements: None,
                table: None,
                intervals: Some(
                    c.components
                        .iter()
                        .map(|k| IntervalFile {
                            lo: k.lo.to_string(),
                            lo_closed: k.lo_closed,
                            hi: k.hi.as_ref().map_or("inf".into(), ToString::to_string),
                            hi_closed: k.hi_closed,
                        })
                        .collect(),
                ),
                lattice: c.lattice.as_ref().map(ToString::to_string),
                excluded: c.excluded.iter().map(ToString::to_string).collect(),
            },
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_monoid(path: &Path) -> Result<DistanceMonoidSpec, String> {
    let text = read(path)?;
    let file: MonoidFile = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    file.to_spec().map_err(|e| format!("{}: {e}", path.display()))
}

pub fn monoid_from_value(v: &Value) -> Result<DistanceMonoidSpec, String> {
    match v {
        Value::String(name) => builtin(name).map_err(|e| e.to_string()),
        Value::Object(_) => {
            let file: MonoidFile = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
            file.to_spec()
        }
        _ => Err("expected a builtin name or a monoid object".into()),
    }
}

pub struct LoadedSpace {
    pub monoid: DistanceMonoidSpec,
    pub space: FiniteMetricSpace,
}

/// Reads a space file. Distances are parsed over `monoid` when given, else
/// over the monoid named in the file.
pub fn load_space(path: &Path, monoid: Option<&DistanceMonoidSpec>) -> Result<LoadedSpace, String> {
    let text = read(path)?;
    let ctx = |e: String| format!("{}: {e}", path.display());
    let file: SpaceFile = serde_json::from_str(&text).map_err(|e| ctx(e.to_string()))?;
    let monoid = match monoid {
        Some(m) => m.clone(),
        None => monoid_from_value(&file.monoid).map_err(|e| ctx(at("monoid", e)))?,
    };
    let mut entries = Vec::with_capacity(file.distances.len());
    for (i, (a, b, v)) in file.distances.iter().enumerate() {
        let value = parse_value(&monoid, v).map_err(|e| ctx(at(&format!("distances[{i}]"), e)))?;
        entries.push((a.clone(), b.clone(), value));
    }
    let space = FiniteMetricSpace::from_entries(&monoid, file.points, &entries).map_err(|e| ctx(e.to_string()))?;
    Ok(LoadedSpace { monoid, space })
}

/// Rejects a rational flag that is not a nonnegative rational.
pub fn parse_cap(text: &str) -> Result<Rational, String> {
    let r = parse_rational(text).map_err(|e| format!("--cap: {e}"))?;
    if r <= Rational::from_integer(0.into()) {
        return Err("--cap: must be positive".into());
    }
    Ok(r)
}
