//! First-order sentences over the distance relations, evaluated on finite spaces.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! formula := disj ("->" formula)?
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "!" unary | ("forall" | "exists") VAR "." formula | "(" formula ")" | atom
//! atom    := "d(" VAR "," VAR ")" ("<=" VALUE | ">" VALUE | "in" "(" VALUE "," (VALUE | "omega") "]")
//!          | VAR "=" VAR
//! ```
//!
//! A quantifier body extends as far right as possible. `VALUE` is a rational
//! `p/q` or an element label made of letters, digits and `_`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::monoid::DistanceMonoidSpec;
use crate::rational::{parse_rational, Rational};
use crate::star::{omega, star_add, ExtendedValue};

/// Upper end of an interval atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bound {
    Elem(String),
    Omega,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `d(x,y) <= s`
    AtMost { x: String, y: String, s: String },
    /// `d(x,y) > s`
    Above { x: String, y: String, s: String },
    /// `d(x,y) in (lo, hi]`
    Within { x: String, y: String, lo: String, hi: Bound },
    Equal(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

/// Canonical spelling of an element token: rationals in lowest terms.
pub fn element_token(text: &str) -> String {
    match parse_rational(text) {
        Ok(r) => r.to_string(),
        Err(_) => text.to_string(),
    }
}

/// Token naming `r` in the syntax of `spec`.
pub fn token_for(spec: &DistanceMonoidSpec, r: &Rational) -> String {
    element_token(&spec.show_element(r))
}

impl Formula {
    pub fn at_most(x: &str, y: &str, s: &str) -> Formula {
        Formula::AtMost { x: x.into(), y: y.into(), s: element_token(s) }
    }

    pub fn above(x: &str, y: &str, s: &str) -> Formula {
        Formula::Above { x: x.into(), y: y.into(), s: element_token(s) }
    }

    pub fn within(x: &str, y: &str, lo: &str, hi: Bound) -> Formula {
        let hi = match hi {
            Bound::Elem(h) => Bound::Elem(element_token(&h)),
            Bound::Omega => Bound::Omega,
        };
        Formula::Within { x: x.into(), y: y.into(), lo: element_token(lo), hi }
    }

    pub fn equal(x: &str, y: &str) -> Formula {
        Formula::Equal(x.into(), y.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Universal closure over `vars`, outermost first.
    pub fn forall_all(vars: &[String], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::forall(v, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut note = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::AtMost { x, y, .. } | Formula::Above { x, y, .. } | Formula::Within { x, y, .. } | Formula::Equal(x, y) => {
                note(x, bound);
                note(y, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Element tokens mentioned in atoms, in order of appearance.
    pub fn elements(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk_atoms(&mut |f| match f {
            Formula::AtMost { s, .. } | Formula::Above { s, .. } => out.push(s.clone()),
            Formula::Within { lo, hi, .. } => {
                out.push(lo.clone());
                if let Bound::Elem(h) = hi {
                    out.push(h.clone());
                }
            }
            _ => {}
        });
        out
    }

    fn walk_atoms(&self, visit: &mut impl FnMut(&Formula)) {
        match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.walk_atoms(visit),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.walk_atoms(visit);
                b.walk_atoms(visit);
            }
            atom => visit(atom),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }
}

fn wrapped(f: &Formula, paren: bool) -> String {
    if paren {
        format!("({f})")
    } else {
        f.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Formula::AtMost { x, y, s } => write!(f, "d({x},{y}) <= {s}"),
            Formula::Above { x, y, s } => write!(f, "d({x},{y}) > {s}"),
            Formula::Within { x, y, lo, hi } => match hi {
                Bound::Elem(h) => write!(f, "d({x},{y}) in ({lo}, {h}]"),
                Bound::Omega => write!(f, "d({x},{y}) in ({lo}, omega]"),
            },
            Formula::Equal(x, y) => write!(f, "{x} = {y}"),
            Formula::Not(g) => write!(f, "!{}", wrapped(g, g.precedence() < 4)),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let op = if matches!(self, Formula::And(..)) { "&" } else { "|" };
                write!(f, "{} {op} {}", wrapped(a, a.precedence() < p), wrapped(b, b.precedence() <= p))
            }
            Formula::Implies(a, b) => write!(f, "{} -> {}", wrapped(a, a.precedence() <= p), wrapped(b, b.precedence() < p)),
            Formula::Exists(v, g) => write!(f, "exists {v}. {g}"),
            Formula::Forall(v, g) => write!(f, "forall {v}. {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Number(String),
    LParen,
    RParen,
    RBracket,
    Comma,
    Dot,
    Le,
    Gt,
    Eq,
    Bang,
    Amp,
    Bar,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Word(w) | Tok::Number(w) => return write!(f, "{w:?}"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Eq => "=",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
        };
        write!(f, "{s:?}")
    }
}

/// Tokens with their byte spans.
fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'>' => Tok::Gt,
            b'=' => Tok::Eq,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'<' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Le
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                if bytes.get(i + 1) == Some(&b'/') && bytes.get(i + 2).is_some_and(u8::is_ascii_digit) {
                    i += 2;
                    while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                        i += 1;
                    }
                }
                if bytes.get(i + 1).is_some_and(|&b| word(b)) {
                    while i + 1 < bytes.len() && word(bytes[i + 1]) {
                        i += 1;
                    }
                    Tok::Word(text[start..=i].to_string())
                } else {
                    Tok::Number(text[start..=i].to_string())
                }
            }
            b if word(b) => {
                while i + 1 < bytes.len() && word(bytes[i + 1]) {
                    i += 1;
                }
                Tok::Word(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character {ch:?}") });
            }
        };
        i += 1;
        out.push((tok, start, i));
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &["forall", "exists", "in", "omega", "d"];

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    at: usize,
    spec: Option<&'a DistanceMonoidSpec>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    /// Where the last consumed token ends.
    fn pos(&self) -> usize {
        if self.at == 0 {
            0
        } else {
            self.toks[self.at - 1].2
        }
    }

    fn fail<T>(&self, msg: String) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.0.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.at += 1;
                Ok(())
            }
            Some(t) => self.fail(format!("expected {want}, found {t}")),
            None => self.fail(format!("expected {want}, found end of input")),
        }
    }

    fn var(&mut self) -> Result<String> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()) && !w.as_bytes()[0].is_ascii_digit() => {
                self.at += 1;
                Ok(w)
            }
            Some(t) => self.fail(format!("expected a variable, found {t}")),
            None => self.fail("expected a variable, found end of input".into()),
        }
    }

    fn value(&mut self) -> Result<String> {
        let text = match self.peek().cloned() {
            Some(Tok::Number(n)) => n,
            Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()) => w,
            Some(t) => return self.fail(format!("expected an element, found {t}")),
            None => return self.fail("expected an element, found end of input".into()),
        };
        self.at += 1;
        if let Some(spec) = self.spec {
            spec.parse_element(&text).map_err(|_| Error::UnknownElement(text.clone()))?;
        }
        Ok(element_token(&text))
    }

    fn formula(&mut self) -> Result<Formula> {
        let left = self.disj()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            let right = self.formula()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while self.peek() == Some(&Tok::Bar) {
            self.at += 1;
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.at += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::Bang) => {
                self.at += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Word(w)) if w == "forall" || w == "exists" => {
                self.at += 1;
                let v = self.var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if w == "forall" { Formula::forall(&v, body) } else { Formula::exists(&v, body) })
            }
            Some(Tok::Word(w)) if w == "d" => self.distance_atom(),
            Some(Tok::Word(_)) => {
                let x = self.var()?;
                self.expect(Tok::Eq)?;
                let y = self.var()?;
                Ok(Formula::Equal(x, y))
            }
            Some(t) => self.fail(format!("expected a formula, found {t}")),
            None => self.fail("expected a formula, found end of input".into()),
        }
    }

    fn distance_atom(&mut self) -> Result<Formula> {
        self.at += 1;
        self.expect(Tok::LParen)?;
        let x = self.var()?;
        self.expect(Tok::Comma)?;
        let y = self.var()?;
        self.expect(Tok::RParen)?;
        match self.next() {
            Some(Tok::Le) => Ok(Formula::AtMost { x, y, s: self.value()? }),
            Some(Tok::Gt) => Ok(Formula::Above { x, y, s: self.value()? }),
            Some(Tok::Word(w)) if w == "in" => {
                self.expect(Tok::LParen)?;
                let lo = self.value()?;
                self.expect(Tok::Comma)?;
                let hi = if matches!(self.peek(), Some(Tok::Word(w)) if w == "omega") {
                    self.at += 1;
                    Bound::Omega
                } else {
                    Bound::Elem(self.value()?)
                };
                self.expect(Tok::RBracket)?;
                Ok(Formula::Within { x, y, lo, hi })
            }
            _ => {
                self.at -= 1;
                self.fail("expected <=, > or in after d(x,y)".into())
            }
        }
    }
}

fn parse_with(text: &str, spec: Option<&DistanceMonoidSpec>) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, at: 0, spec };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        let t = t.clone();
        return p.fail(format!("unexpected {t} after the formula"));
    }
    Ok(f)
}

/// Parses without checking element tokens.
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_with(text, None)
}

/// Parses and checks every element token against `spec`.
pub fn parse_formula_for(spec: &DistanceMonoidSpec, text: &str) -> Result<Formula> {
    parse_with(text, Some(spec))
}

fn resolve(spec: &DistanceMonoidSpec, token: &str) -> Result<ExtendedValue> {
    spec.parse_element(token).map(ExtendedValue::Principal).map_err(|_| Error::UnknownElement(token.to_string()))
}

/// Satisfaction on a finite space; quantifiers range over its points.
pub fn eval(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, f: &Formula, assignment: &BTreeMap<String, usize>) -> Result<bool> {
    let mut env: Vec<(String, usize)> = assignment.iter().map(|(k, &v)| (k.clone(), v)).collect();
    eval_in(spec, space, f, &mut env)
}

fn lookup(env: &[(String, usize)], v: &str) -> Result<usize> {
    env.iter().rev().find(|(k, _)| k == v).map(|&(_, i)| i).ok_or_else(|| Error::UnboundVariable(v.to_string()))
}

fn eval_in(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, f: &Formula, env: &mut Vec<(String, usize)>) -> Result<bool> {
    let dist = |x: &str, y: &str, env: &[(String, usize)]| -> Result<ExtendedValue> { Ok(space.d(lookup(env, x)?, lookup(env, y)?).clone()) };
    Ok(match f {
        Formula::AtMost { x, y, s } => dist(x, y, env)? <= resolve(spec, s)?,
        Formula::Above { x, y, s } => dist(x, y, env)? > resolve(spec, s)?,
        Formula::Within { x, y, lo, hi } => {
            let d = dist(x, y, env)?;
            let hi = match hi {
                Bound::Elem(h) => resolve(spec, h)?,
                Bound::Omega => omega(spec),
            };
            resolve(spec, lo)? < d && d <= hi
        }
        Formula::Equal(x, y) => lookup(env, x)? == lookup(env, y)?,
        Formula::Not(g) => !eval_in(spec, space, g, env)?,
        Formula::And(a, b) => eval_in(spec, space, a, env)? && eval_in(spec, space, b, env)?,
        Formula::Or(a, b) => eval_in(spec, space, a, env)? || eval_in(spec, space, b, env)?,
        Formula::Implies(a, b) => !eval_in(spec, space, a, env)? || eval_in(spec, space, b, env)?,
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(f, Formula::Exists(..));
            let mut found = !want;
            for i in 0..space.len() {
                env.push((v.clone(), i));
                let r = eval_in(spec, space, g, env);
                env.pop();
                if r? == want {
                    found = want;
                    break;
                }
            }
            found
        }
    })
}

/// Truth of a sentence.
pub fn holds(spec: &DistanceMonoidSpec, space: &FiniteMetricSpace, f: &Formula) -> Result<bool> {
    eval(spec, space, f, &BTreeMap::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MsScheme {
    /// Distance zero exactly on the diagonal.
    Identity,
    Symmetry,
    Triangle,
    /// Every distance is at most the maximum.
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsAxioms {
    pub instances: Vec<(MsScheme, Formula)>,
    /// False when the carrier has no maximum in the fragment, so no bound is asserted.
    pub has_bound: bool,
}

/// Instances of the metric-space schemes for the elements of `fragment`.
pub fn instantiate_ms_axioms(spec: &DistanceMonoidSpec, fragment: &[Rational]) -> MsAxioms {
    let mut frag: Vec<Rational> = fragment.iter().filter(|x| spec.contains(x)).cloned().collect();
    frag.sort();
    frag.dedup();
    let tok = |r: &Rational| token_for(spec, r);
    let xy = ["x".to_string(), "y".to_string()];
    let mut instances = Vec::new();
    let zero = tok(&Rational::from_integer(0.into()));
    instances.push((
        MsScheme::Identity,
        Formula::forall_all(
            &xy,
            Formula::and(
                Formula::implies(Formula::at_most("x", "y", &zero), Formula::equal("x", "y")),
                Formula::implies(Formula::equal("x", "y"), Formula::at_most("x", "y", &zero)),
            ),
        ),
    ));
    let positive: Vec<&Rational> = frag.iter().filter(|r| **r > Rational::from_integer(0.into())).collect();
    for s in &positive {
        let s = tok(s);
        instances.push((
            MsScheme::Symmetry,
            Formula::forall_all(
                &xy,
                Formula::and(
                    Formula::implies(Formula::at_most("x", "y", &s), Formula::at_most("y", "x", &s)),
                    Formula::implies(Formula::at_most("y", "x", &s), Formula::at_most("x", "y", &s)),
                ),
            ),
        ));
    }
    let xyz = ["x".to_string(), "y".to_string(), "z".to_string()];
    for r in &positive {
        for s in &positive {
            let sum = star_add(spec, &ExtendedValue::Principal((*r).clone()), &ExtendedValue::Principal((*s).clone()));
            let t = frag.iter().rev().find(|x| ExtendedValue::Principal((*x).clone()) <= sum).expect("the fragment contains both summands");
            let premise = Formula::and(Formula::at_most("x", "y", &tok(r)), Formula::at_most("y", "z", &tok(s)));
            instances.push((MsScheme::Triangle, Formula::forall_all(&xyz, Formula::implies(premise, Formula::at_most("x", "z", &tok(t))))));
        }
    }
    let top = spec.max_elem().filter(|m| frag.contains(m));
    if let Some(m) = &top {
        instances.push((MsScheme::Bounded, Formula::forall_all(&xy, Formula::at_most("x", "y", &tok(m)))));
    }
    MsAxioms { instances, has_bound: top.is_some() }
}

/// The atoms of the two-type of `alpha` over `fragment`: `d <= s` for
/// `s >= alpha` and `d > s` for `s < alpha`.
pub fn type_formulas(spec: &DistanceMonoidSpec, alpha: &ExtendedValue, fragment: &[Rational]) -> Vec<Formula> {
    let mut frag: Vec<&Rational> = fragment.iter().collect();
    frag.sort();
    frag.dedup();
    frag.into_iter()
        .map(|s| {
            let t = token_for(spec, s);
            if *alpha <= ExtendedValue::Principal(s.clone()) {
                Formula::at_most("x", "y", &t)
            } else {
                Formula::above("x", "y", &t)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin;
    use crate::rational::{int, q};
    use crate::star::parse_value;
    use proptest::prelude::*;

    fn space(spec: &DistanceMonoidSpec, pts: &[&str], entries: &[(&str, &str, i64)]) -> FiniteMetricSpace {
        let e: Vec<_> = entries.iter().map(|(a, b, v)| (a.to_string(), b.to_string(), ExtendedValue::Principal(int(*v)))).collect();
        FiniteMetricSpace::from_entries(spec, pts.iter().map(|s| s.to_string()).collect(), &e).unwrap()
    }

    #[test]
    fn parses_the_bound_axiom() {
        let f = parse_formula("forall x. forall y. d(x,y) <= 1").unwrap();
        assert_eq!(f, Formula::forall("x", Formula::forall("y", Formula::at_most("x", "y", "1"))));
        assert!(f.is_sentence());
        assert_eq!(f.to_string(), "forall x. forall y. d(x,y) <= 1");
    }

    #[test]
    fn zero_distance_and_equality_differ() {
        assert_ne!(parse_formula("d(x,y) <= 0").unwrap(), parse_formula("x = y").unwrap());
    }

    #[test]
    fn syntax_errors_point_at_the_gap() {
        assert_eq!(parse_formula("d(x y) <= 1"), Err(Error::Syntax { pos: 3, msg: "expected \",\", found \"y\"".into() }));
        assert!(matches!(parse_formula("d(x,y) <="), Err(Error::Syntax { pos: 9, .. })));
        assert!(matches!(parse_formula("x = y)"), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(parse_formula("x @ y"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn unknown_elements_are_rejected() {
        let r2 = builtin("R2").unwrap();
        assert_eq!(parse_formula_for(&r2, "d(x,y) <= 3"), Err(Error::UnknownElement("3".into())));
        assert!(parse_formula_for(&r2, "d(x,y) in (0, omega]").is_ok());
        assert!(parse_formula_for(&builtin("Q1").unwrap(), "d(x,y) > 2/4").is_ok());
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("a = b | b = c & !c = a -> a = a -> b = b").unwrap();
        let e = |x: &str, y: &str| Formula::equal(x, y);
        let want = Formula::implies(
            Formula::or(e("a", "b"), Formula::and(e("b", "c"), Formula::not(e("c", "a")))),
            Formula::implies(e("a", "a"), e("b", "b")),
        );
        assert_eq!(f, want);
        let g = parse_formula("x = y & forall z. z = z | x = x").unwrap();
        assert_eq!(g, Formula::and(e("x", "y"), Formula::forall("z", Formula::or(e("z", "z"), e("x", "x")))));
    }

    #[test]
    fn reflexive_distances_are_below_everything() {
        let r3 = builtin("R3").unwrap();
        let sp = space(&r3, &["a", "b"], &[("a", "b", 2)]);
        for s in ["0", "1", "2", "3"] {
            assert!(holds(&r3, &sp, &parse_formula(&format!("forall x. d(x,x) <= {s}")).unwrap()).unwrap());
        }
    }

    #[test]
    fn unbound_variables_are_errors() {
        let r1 = builtin("R1").unwrap();
        let sp = FiniteMetricSpace::single("a");
        assert_eq!(holds(&r1, &sp, &parse_formula("x = y").unwrap()), Err(Error::UnboundVariable("x".into())));
    }

    #[test]
    fn interval_atoms_use_cut_order() {
        let s = builtin("noQE").unwrap();
        let g3 = parse_value(&s, "gap(3)").unwrap();
        let sp = FiniteMetricSpace::from_entries(&s, vec!["a".into(), "b".into()], &[("a".into(), "b".into(), g3)]).unwrap();
        let t = |text: &str| holds(&s, &sp, &parse_formula_for(&s, text).unwrap()).unwrap();
        assert!(t("exists x. exists y. d(x,y) in (5/2, 4]"));
        assert!(t("exists x. exists y. d(x,y) in (2, omega]"));
        assert!(!t("exists x. exists y. d(x,y) in (4, omega]"));
    }

    #[test]
    fn ms_instances_for_r1() {
        let r1 = builtin("R1").unwrap();
        let ax = instantiate_ms_axioms(&r1, &r1.elements().unwrap());
        let kinds: Vec<MsScheme> = ax.instances.iter().map(|(k, _)| *k).collect();
        assert_eq!(kinds, vec![MsScheme::Identity, MsScheme::Symmetry, MsScheme::Triangle, MsScheme::Bounded]);
        assert_eq!(ax.instances[2].1.to_string(), "forall x. forall y. forall z. d(x,y) <= 1 & d(y,z) <= 1 -> d(x,z) <= 1");
        assert_eq!(ax.instances[3].1.to_string(), "forall x. forall y. d(x,y) <= 1");
        assert!(ax.has_bound);
        let qp = builtin("Qplus").unwrap();
        assert!(!instantiate_ms_axioms(&qp, &[int(0), int(1), int(2)]).has_bound);
    }

    #[test]
    fn ms_triangle_takes_largest_fragment_element_below_the_sum() {
        let q1 = builtin("Q1").unwrap();
        let ax = instantiate_ms_axioms(&q1, &[int(0), q(1, 3), int(1)]);
        let tri: Vec<String> = ax.instances.iter().filter(|(k, _)| *k == MsScheme::Triangle).map(|(_, f)| f.to_string()).collect();
        assert!(tri[0].ends_with("d(x,z) <= 1/3"), "{}", tri[0]);
    }

    #[test]
    fn planted_triangle_violation_fails_an_instance() {
        let r3 = builtin("R3").unwrap();
        let bad = space(&r3, &["a", "b", "c"], &[("a", "b", 1), ("b", "c", 1), ("a", "c", 3)]);
        let ax = instantiate_ms_axioms(&r3, &r3.elements().unwrap());
        let failing: Vec<_> = ax.instances.iter().filter(|(_, f)| !holds(&r3, &bad, f).unwrap()).collect();
        assert!(!failing.is_empty() && failing.iter().all(|(k, _)| *k == MsScheme::Triangle));
    }

    #[test]
    fn type_atoms_over_no_qe_fragment() {
        let s = builtin("noQE").unwrap();
        let frag = [int(0), int(2), q(5, 2), int(4), int(5)];
        let got: Vec<String> = type_formulas(&s, &parse_value(&s, "gap(3)").unwrap(), &frag).iter().map(ToString::to_string).collect();
        assert_eq!(got, ["d(x,y) > 0", "d(x,y) > 2", "d(x,y) > 5/2", "d(x,y) <= 4", "d(x,y) <= 5"]);
        let zero: Vec<Formula> = type_formulas(&s, &ExtendedValue::zero(), &frag);
        assert!(zero.contains(&Formula::at_most("x", "y", "0")) && zero.iter().all(|f| matches!(f, Formula::AtMost { .. })));
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let var = prop::sample::select(vec!["x", "y", "z"]);
        let val = prop::sample::select(vec!["0", "1", "3/2", "a1"]);
        let leaf = prop_oneof![
            (var.clone(), var.clone(), val.clone()).prop_map(|(x, y, s)| Formula::at_most(x, y, s)),
            (var.clone(), var.clone(), val.clone()).prop_map(|(x, y, s)| Formula::above(x, y, s)),
            (var.clone(), var.clone(), val.clone(), prop::option::of(val)).prop_map(|(x, y, lo, hi)| Formula::within(
                x,
                y,
                lo,
                hi.map_or(Bound::Omega, |h| Bound::Elem(h.to_string()))
            )),
            (var.clone(), var.clone()).prop_map(|(x, y)| Formula::equal(x, y)),
        ];
        leaf.prop_recursive(5, 40, 2, move |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (var.clone(), inner.clone()).prop_map(|(v, f)| Formula::exists(v, f)),
                (var.clone(), inner).prop_map(|(v, f)| Formula::forall(v, f)),
            ]
        })
    }

    /// Truth by enumerating every assignment of the free variables up front.
    fn brute(sp: &FiniteMetricSpace, f: &Formula, env: &BTreeMap<String, usize>) -> bool {
        let r3 = builtin("R3").unwrap();
        let num = |s: &str| ExtendedValue::Principal(r3.parse_element(s).unwrap());
        let d = |x: &str, y: &str| sp.d(env[x], env[y]).clone();
        match f {
            Formula::AtMost { x, y, s } => d(x, y) <= num(s),
            Formula::Above { x, y, s } => d(x, y) > num(s),
            Formula::Within { x, y, lo, hi } => {
                let hi = match hi {
                    Bound::Elem(h) => num(h),
                    Bound::Omega => num("3"),
                };
                num(lo) < d(x, y) && d(x, y) <= hi
            }
            Formula::Equal(x, y) => env[x] == env[y],
            Formula::Not(g) => !brute(sp, g, env),
            Formula::And(a, b) => brute(sp, a, env) && brute(sp, b, env),
            Formula::Or(a, b) => brute(sp, a, env) || brute(sp, b, env),
            Formula::Implies(a, b) => !brute(sp, a, env) || brute(sp, b, env),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let results = (0..sp.len()).map(|i| {
                    let mut e = env.clone();
                    e.insert(v.clone(), i);
                    brute(sp, g, &e)
                });
                if matches!(f, Formula::Exists(..)) {
                    results.into_iter().any(|b| b)
                } else {
                    results.into_iter().all(|b| b)
                }
            }
        }
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in arb_formula()) {
            let text = f.to_string();
            prop_assert_eq!(parse_formula(&text).unwrap(), f, "{}", text);
        }

        #[test]
        fn eval_agrees_with_brute_force(
            f in arb_formula().prop_filter("numeric only", |f| !f.elements().iter().any(|e| e == "a1" || e == "3/2")),
            d in prop::collection::vec(1i64..=3, 6),
            n in 1usize..=4,
            seed in prop::collection::vec(0usize..4, 3),
        ) {
            let r3 = builtin("R3").unwrap();
            let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
            let mut k = 0;
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    entries.push((labels[i].clone(), labels[j].clone(), ExtendedValue::Principal(int(d[k]))));
                    k += 1;
                }
            }
            let sp = FiniteMetricSpace::from_entries(&r3, labels, &entries).unwrap();
            let env: BTreeMap<String, usize> = ["x", "y", "z"].iter().zip(&seed).map(|(v, &i)| (v.to_string(), i % n)).collect();
            prop_assert_eq!(eval(&r3, &sp, &f, &env).unwrap(), brute(&sp, &f, &env));
        }
    }
}
