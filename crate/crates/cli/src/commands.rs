use std::collections::BTreeMap;

use distmon::formula::{holds, parse_formula_for};
use distmon::metric::{
    disjoint_amalgam, four_values_check, four_values_search, validate_metric, FourValues, FourValuesMethod, MetricViolation,
    ValueApproximation,
};
use distmon::monoid::{
    check_associativity, check_magma_axioms, check_sum_complete, classify_monoid, probe_points, Associativity, AxiomViolation,
    SumCompleteness,
};
use distmon::refine::{approximately_metric_check, canonical_approximation, ApproxOutcome};
use distmon::star::{is_triangle, parse_value, show, star_add, star_diff, triangle_interval};
use distmon::urysohn::{canonical_schemes, check_extension_axiom, generate_axioms, grow_generic, qe_decision, ExtensionCheck, GrowthConfig, QeDecision};
use distmon::{builtin, ApproxInterval, DistanceMonoidSpec, Error, ExtendedValue, FiniteMetricSpace, Quadruple, Rational};
use serde_json::{json, Value};

use crate::files::{load_monoid, load_space, parse_cap, LoadedSpace, MonoidFile};
use crate::report::Report;
use crate::{Cli, Command};

type Outcome = Result<Report, String>;

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::CheckMonoid => check_monoid(&monoid(cli)?),
        Command::StarAdd { a, b } => star_binary(&monoid(cli)?, a, b, "star-add"),
        Command::StarDiff { a, b } => star_binary(&monoid(cli)?, a, b, "star-diff"),
        Command::Triangle { a, b, c } => triangle(&monoid(cli)?, a, b, c),
        Command::FourValues { values } => four_values(&monoid(cli)?, values),
        Command::Amalgamate => amalgamate(cli),
        Command::ApproxCheck { intervals } => approx_check(&one_space(cli)?, intervals),
        Command::Grow => grow(cli),
        Command::CheckExtension => check_extension(cli),
        Command::CheckQe => check_qe(&monoid(cli)?),
        Command::GenAxioms => gen_axioms(cli),
        Command::EvalFormula { formula } => eval_formula(&one_space(cli)?, formula),
    }
}

fn flag_monoid(cli: &Cli) -> Result<Option<DistanceMonoidSpec>, String> {
    match (&cli.monoid, &cli.builtin) {
        (Some(path), _) => load_monoid(path).map(Some),
        (None, Some(name)) => builtin(name).map(Some).map_err(|e| e.to_string()),
        (None, None) => Ok(None),
    }
}

fn monoid(cli: &Cli) -> Result<DistanceMonoidSpec, String> {
    if let Some(m) = flag_monoid(cli)? {
        return Ok(m);
    }
    match cli.space.first() {
        Some(path) => load_space(path, None).map(|l| l.monoid),
        None => Err("a monoid is required: pass --monoid FILE, --builtin NAME or --space FILE".into()),
    }
}

fn spaces(cli: &Cli, count: usize) -> Result<Vec<LoadedSpace>, String> {
    if cli.space.len() != count {
        return Err(format!("expected {count} --space file(s), got {}", cli.space.len()));
    }
    let given = flag_monoid(cli)?;
    let mut out: Vec<LoadedSpace> = Vec::with_capacity(count);
    for path in &cli.space {
        let monoid = given.as_ref().or(out.first().map(|l| &l.monoid));
        let loaded = load_space(path, monoid)?;
        let bad = validate_metric(&loaded.monoid, &loaded.space);
        if let Some(v) = bad.first() {
            return Err(format!("{}: not a metric space: {}", path.display(), describe_violation(&loaded.space, v)));
        }
        out.push(loaded);
    }
    Ok(out)
}

fn one_space(cli: &Cli) -> Result<LoadedSpace, String> {
    Ok(spaces(cli, 1)?.remove(0))
}

fn value(spec: &DistanceMonoidSpec, text: &str) -> Result<ExtendedValue, String> {
    parse_value(spec, text).map_err(|e| e.to_string())
}

fn elem(spec: &DistanceMonoidSpec, r: &Rational) -> String {
    spec.show_element(r)
}

fn quad_text(spec: &DistanceMonoidSpec, q: &Quadruple) -> String {
    let s = |v: &ExtendedValue| show(spec, v);
    format!("({},{},{},{};{})", s(&q.u1), s(&q.u2), s(&q.v1), s(&q.v2), s(&q.s))
}

fn describe_violation(space: &FiniteMetricSpace, v: &MetricViolation) -> String {
    let l = |i: &usize| space.label(*i);
    match v {
        MetricViolation::NonzeroDiagonal(i) => format!("d({0}, {0}) is not zero", l(i)),
        MetricViolation::ZeroOffDiagonal(i, j) => format!("d({}, {}) is zero", l(i), l(j)),
        MetricViolation::Asymmetric(i, j) => format!("d({}, {}) is not symmetric", l(i), l(j)),
        MetricViolation::Triangle(i, j, k) => format!("triangle inequality fails on {}, {}, {}", l(i), l(j), l(k)),
    }
}

fn space_json(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace) -> Value {
    let mut distances = Vec::new();
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            distances.push(json!([space.label(i), space.label(j), show(spec, space.d(i, j))]));
        }
    }
    json!({ "points": space.points(), "distances": distances })
}

fn space_lines(report: &mut Report, spec: &DistanceMonoidSpec, space: &FiniteMetricSpace) {
    for line in space.render(spec).lines() {
        report.line(format!("  {line}"));
    }
}

fn check_monoid(spec: &DistanceMonoidSpec) -> Outcome {
    let mut r = Report::new("check-monoid");
    r.kv("monoid", spec).data("definition", serde_json::to_value(MonoidFile::from_spec(spec)).unwrap());
    let pts = spec.elements().unwrap_or_else(|| probe_points(spec, 0));
    let name = |i: &usize| elem(spec, &pts[*i]);
    let axioms = check_magma_axioms(spec);
    match axioms.violations.first() {
        None => r.kv("axioms", format!("pass ({})", axioms.note)),
        Some(v) => {
            let text = match v {
                AxiomViolation::Totality(i, j) => format!("sum of {} and {} is undefined", name(i), name(j)),
                AxiomViolation::Positivity(i, j) => format!("{} + {} is below {}", name(i), name(j), name(i)),
                AxiomViolation::OrderCompatibility(i, j, k) => {
                    format!("{} + {} exceeds {} + {}", name(i), name(j), name(i), name(k))
                }
                AxiomViolation::Commutativity(i, j) => format!("{} + {} differs from {} + {}", name(i), name(j), name(j), name(i)),
                AxiomViolation::Unity(i) => format!("0 + {} is not {}", name(i), name(i)),
            };
            r.fail().kv("axioms", format!("fail: {text}"))
        }
    };
    match check_associativity(spec) {
        Associativity::Pass => {
            r.kv("associativity", "pass");
        }
        Associativity::Witness { r: a, s, t, left, right } => {
            r.fail().kv(
                "associativity",
                format!(
                    "fail: ({} + {}) + {} = {} but {} + ({} + {}) = {}",
                    elem(spec, &a),
                    elem(spec, &s),
                    elem(spec, &t),
                    show(spec, &left),
                    elem(spec, &a),
                    elem(spec, &s),
                    elem(spec, &t),
                    show(spec, &right)
                ),
            );
        }
    }
    let complete = match spec {
        DistanceMonoidSpec::TruncatedAdd(c) => check_sum_complete(c),
        _ => SumCompleteness::Pass,
    };
    match complete {
        SumCompleteness::Pass => r.kv("sum_complete", "yes"),
        SumCompleteness::Witness(a, b) => r.kv("sum_complete", format!("no: nothing is largest below {} + {}", elem(spec, &a), elem(spec, &b))),
    };
    if let Ok(class) = classify_monoid(spec) {
        r.kv("right_closed", class.right_closed).kv("ultrametric", class.ultrametric).kv("group_like", class.group_like);
    }
    Ok(r)
}

fn star_binary(spec: &DistanceMonoidSpec, a: &str, b: &str, command: &'static str) -> Outcome {
    let (x, y) = (value(spec, a)?, value(spec, b)?);
    let out = if command == "star-add" { star_add(spec, &x, &y) } else { star_diff(spec, &x, &y) };
    let text = show(spec, &out);
    let mut r = Report::new(command);
    r.line(text.clone()).data("value", Value::String(text));
    Ok(r)
}

fn triangle(spec: &DistanceMonoidSpec, a: &str, b: &str, c: &str) -> Outcome {
    let (x, y, z) = (value(spec, a)?, value(spec, b)?, value(spec, c)?);
    let (lo, hi) = triangle_interval(spec, &x, &y);
    let mut r = Report::new("triangle");
    if is_triangle(spec, &x, &y, &z) {
        r.kv("triangle", "yes");
    } else {
        r.fail().kv("triangle", "no");
    }
    r.kv("range", format!("[{}, {}]", show(spec, &lo), show(spec, &hi)));
    Ok(r)
}

fn four_values(spec: &DistanceMonoidSpec, values: &[String]) -> Outcome {
    let mut r = Report::new("four-values");
    match values.len() {
        0 => match four_values_search(spec) {
            FourValues::Pass(method) => {
                let how = match method {
                    FourValuesMethod::Exhaustive => "exhaustive",
                    FourValuesMethod::ViaAssociativity => "via_associativity",
                    FourValuesMethod::CriticalPoints => "critical_points (semi-decision)",
                };
                r.kv("four_values", "pass").kv("method", how);
            }
            FourValues::Witness(q) => {
                r.fail().kv("four_values", "fail").kv("quadruple", quad_text(spec, &q));
            }
        },
        5 => {
            let v: Vec<ExtendedValue> = values.iter().map(|t| value(spec, t)).collect::<Result<_, _>>()?;
            let q = Quadruple { u1: v[0].clone(), u2: v[1].clone(), v1: v[2].clone(), v2: v[3].clone(), s: v[4].clone() };
            match four_values_check(spec, &q).map_err(|e| e.to_string())? {
                Some(t) => {
                    r.kv("four_values", "pass").kv("t", elem(spec, &t));
                }
                None => {
                    r.fail().kv("four_values", "fail").kv("quadruple", quad_text(spec, &q));
                }
            }
        }
        n => return Err(format!("four-values takes no values or exactly five (U1 U2 V1 V2 S), got {n}")),
    }
    Ok(r)
}

fn amalgamate(cli: &Cli) -> Outcome {
    let loaded = spaces(cli, 2)?;
    let spec = &loaded[0].monoid;
    let mut r = Report::new("amalgamate");
    match disjoint_amalgam(spec, &loaded[0].space, &loaded[1].space) {
        Ok(out) => {
            r.kv("amalgam", format!("{} points", out.len()));
            space_lines(&mut r, spec, &out);
            r.data("space", space_json(spec, &out));
        }
        Err(Error::AmalgamationFailure(q)) => {
            r.fail().kv("amalgam", "fail").kv("quadruple", quad_text(spec, &q));
        }
        Err(e) => return Err(e.to_string()),
    }
    Ok(r)
}

fn parse_interval(spec: &DistanceMonoidSpec, text: &str) -> Result<(ExtendedValue, ApproxInterval), String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [v, lo, hi] = parts[..] else {
        return Err(format!("interval {text:?} is not VALUE:LO:HI"));
    };
    Ok((value(spec, v)?, ApproxInterval::half(value(spec, lo)?, value(spec, hi)?)))
}

fn approx_check(loaded: &LoadedSpace, intervals: &[String]) -> Outcome {
    let (spec, space) = (&loaded.monoid, &loaded.space);
    // On finite carriers, values without an interval get their canonical one.
    let mut phi = match canonical_approximation(spec, space) {
        Ok(pairs) => pairs.hat(space),
        Err(_) if !intervals.is_empty() => {
            let mut empty = ValueApproximation::new();
            empty.insert(ExtendedValue::zero(), ApproxInterval::Zero);
            empty
        }
        Err(e) => return Err(e.to_string()),
    };
    for text in intervals {
        let (v, iv) = parse_interval(spec, text)?;
        phi.insert(v, iv);
    }
    let mut r = Report::new("approx-check");
    let used: BTreeMap<String, String> = space.distance_set().iter().filter(|v| !v.is_zero()).map(|v| (show(spec, v), phi.get(v).map(ToString::to_string).unwrap_or_default())).collect();
    for (v, iv) in &used {
        r.line(format!("  {v} in {iv}"));
    }
    r.data("intervals", json!(used));
    match approximately_metric_check(spec, space, &phi).map_err(|e| e.to_string())? {
        ApproxOutcome::Realized(out) => {
            r.kv("approx", "realized");
            space_lines(&mut r, spec, &out);
            r.data("space", space_json(spec, &out));
        }
        ApproxOutcome::Infeasible(why) => {
            r.fail().kv("approx", "infeasible").kv("reason", why);
        }
    }
    Ok(r)
}

fn cap(cli: &Cli) -> Result<Option<Rational>, String> {
    cli.cap.as_deref().map(parse_cap).transpose()
}

fn grow(cli: &Cli) -> Outcome {
    let spec = monoid(cli)?;
    let defaults = GrowthConfig::default();
    let config = GrowthConfig {
        target_size: cli.size.unwrap_or(defaults.target_size),
        seed: cli.seed,
        max_base: cli.max_base.unwrap_or(defaults.max_base),
        denominator: cli.denominator,
        cap: cap(cli)?,
        close_limit: cli.close,
    };
    let out = grow_generic(&spec, &config).map_err(|e| e.to_string())?;
    let mut r = Report::new("grow");
    r.kv("points", out.space.len())
        .kv("realized", out.realized)
        .kv("pending", out.pending)
        .kv("closed", out.closed)
        .kv("scheduled_schemes", out.scheduled.len());
    space_lines(&mut r, &spec, &out.space);
    r.data("space", space_json(&spec, &out.space));
    Ok(r)
}

fn check_extension(cli: &Cli) -> Outcome {
    let loaded = one_space(cli)?;
    let (spec, space) = (&loaded.monoid, &loaded.space);
    let max_base = cli.max_base.unwrap_or(2);
    let schemes = canonical_schemes(spec, max_base, cli.denominator, cap(cli)?.as_ref()).map_err(|e| e.to_string())?;
    let mut r = Report::new("check-extension");
    r.kv("schemes", schemes.len());
    for scheme in &schemes {
        if let ExtensionCheck::Counterexample(tuple) = check_extension_axiom(space, scheme) {
            let sentence = scheme.to_formula(spec).map_err(|e| e.to_string())?;
            let labels: Vec<&str> = tuple.iter().map(|&i| space.label(i)).collect();
            r.fail().kv("extension", "fail").kv("sentence", sentence).kv("tuple", format!("({})", labels.join(", ")));
            return Ok(r);
        }
    }
    r.kv("extension", "pass");
    Ok(r)
}

fn check_qe(spec: &DistanceMonoidSpec) -> Outcome {
    let mut r = Report::new("check-qe");
    match qe_decision(spec).map_err(|e| e.to_string())? {
        QeDecision::Yes(reason) => {
            r.kv("qe", "yes").kv("reason", reason);
        }
        QeDecision::No(w) => {
            r.fail().kv("qe", "no").kv("witness", w);
        }
        QeDecision::Unknown(why) => return Err(format!("undecided: {why}")),
    }
    Ok(r)
}

fn gen_axioms(cli: &Cli) -> Outcome {
    let spec = monoid(cli)?;
    let axioms = generate_axioms(&spec, cli.size.unwrap_or(1), cli.denominator, cap(cli)?.as_ref()).map_err(|e| e.to_string())?;
    let mut r = Report::new("gen-axioms");
    let texts: Vec<String> = axioms.iter().map(ToString::to_string).collect();
    for t in &texts {
        r.line(t.clone());
    }
    r.data("axioms", json!(texts));
    Ok(r)
}

fn eval_formula(loaded: &LoadedSpace, text: &str) -> Outcome {
    let f = parse_formula_for(&loaded.monoid, text).map_err(|e| e.to_string())?;
    let value = holds(&loaded.monoid, &loaded.space, &f).map_err(|e| e.to_string())?;
    let mut r = Report::new("eval-formula");
    if !value {
        r.fail();
    }
    r.kv("formula", f).kv("value", value);
    Ok(r)
}
