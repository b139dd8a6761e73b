//! Text formats: map literals such as "(z^3)/(1+(a*z)^5)" with named
//! constants, and JSON encodings of points, measures, fibers and maps.
//!
//! Points: {"t":"I","v":lit} | {"t":"inf"} | {"t":"II","c":lit,"logr":"3/2"},
//! with field literals as in `FieldElement::parse`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::berkovich::BerkPoint;
use crate::error::{BerkError, Result};
use crate::measures_potentials::{AtomicMeasure, FiniteTree};
use crate::rational_map::{Fiber, RationalMap};
use crate::valued_field::arith::{fmt_q, parse_q};
use crate::valued_field::{Backend, BackendKind, FieldElement, Poly, Q};

/// Named constants bound to field elements.
pub type Constants = BTreeMap<String, FieldElement>;

/// Parses "name=literal" bindings.
pub fn parse_constant(backend: &Backend, s: &str) -> Result<(String, FieldElement)> {
    let (name, lit) = s.split_once('=').ok_or_else(|| BerkError::Parse(format!("constant `{s}`")))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || name == "z" {
        return Err(BerkError::Parse(format!("constant name `{name}`")));
    }
    Ok((name.to_string(), FieldElement::parse(backend, lit.trim())?))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let j = (i..cs.len()).find(|&j| !cs[j].is_ascii_digit()).unwrap_or(cs.len());
            out.push(Tok::Num(cs[i..j].iter().collect()));
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let j = (i..cs.len()).find(|&j| !(cs[j].is_ascii_alphanumeric() || cs[j] == '_')).unwrap_or(cs.len());
            out.push(Tok::Ident(cs[i..j].iter().collect()));
            i = j;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(BerkError::Parse(format!("unexpected `{c}` in map literal")));
        }
    }
    Ok(out)
}

/// A rational function as an unreduced pair.
#[derive(Clone, Debug)]
struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    fn constant(c: FieldElement) -> Self {
        let b = *c.backend();
        Frac { num: Poly::constant(c), den: Poly::constant(b.one()) }
    }

    /// Cancels a common power of z and absorbs a constant denominator.
    fn tidy(mut self) -> Result<Self> {
        self.num = self.num.trimmed();
        self.den = self.den.trimmed();
        if self.den.is_zero() {
            return Err(BerkError::DivisionByZero);
        }
        let low = |p: &Poly| p.coeffs().iter().position(|c| !c.is_exact_zero());
        if let (Some(a), Some(b)) = (low(&self.num), low(&self.den)) {
            let k = a.min(b);
            if k > 0 {
                let cut = |p: &Poly| Poly::new(*p.backend(), p.coeffs()[k..].to_vec());
                self.num = cut(&self.num);
                self.den = cut(&self.den);
            }
        }
        if self.den.degree() == Some(0) {
            let c = self.den.coeff(0).inv()?;
            self.num = self.num.scale(&c);
            self.den = Poly::constant(c.backend().one());
        }
        Ok(self)
    }

    fn add(&self, o: &Frac) -> Result<Frac> {
        if self.den == o.den {
            return Frac { num: self.num.add(&o.num), den: self.den.clone() }.tidy();
        }
        Frac { num: self.num.mul(&o.den).add(&o.num.mul(&self.den)), den: self.den.mul(&o.den) }.tidy()
    }

    fn neg(&self) -> Frac {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }

    fn mul(&self, o: &Frac) -> Result<Frac> {
        Frac { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }.tidy()
    }

    fn recip(&self) -> Result<Frac> {
        if self.num.trimmed().is_zero() {
            return Err(BerkError::DivisionByZero);
        }
        Frac { num: self.den.clone(), den: self.num.clone() }.tidy()
    }

    fn pow(&self, n: i64) -> Result<Frac> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let e = n.unsigned_abs() as u32;
        Frac { num: base.num.pow(e), den: base.den.pow(e) }.tidy()
    }
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    backend: Backend,
    consts: &'a Constants,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, what: &str) -> BerkError {
        BerkError::Parse(format!("map literal: {what} at token {}", self.pos))
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = if self.eat('-') { self.term()?.neg() } else { self.term()? };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.add(&self.term()?.neg())?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.power()?)?;
            } else if self.eat('/') {
                acc = acc.mul(&self.power()?.recip()?)?;
            } else if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Op('('))) {
                // implicit product, as in 3z or 2(z+1)
                acc = acc.mul(&self.power()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n: i64 = match self.toks.get(self.pos) {
            Some(Tok::Num(s)) => s.parse().map_err(|_| self.err("exponent"))?,
            _ => return Err(self.err("integer exponent expected")),
        };
        self.pos += 1;
        if paren && !self.eat(')') {
            return Err(self.err("`)` expected"));
        }
        base.pow(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Frac> {
        let b = self.backend;
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                let r = parse_q(&s).ok_or_else(|| self.err("number"))?;
                Ok(Frac::constant(b.from_q(&r)?))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "z" {
                    return Ok(Frac { num: Poly::x(b), den: Poly::constant(b.one()) });
                }
                if let Some(c) = self.consts.get(&name) {
                    return Ok(Frac::constant(c.clone()));
                }
                if name == "t" && !matches!(b.kind, BackendKind::Padic { .. }) {
                    return Ok(Frac::constant(b.uniformizer_pow(&Q::from_integer(1.into()))));
                }
                Err(BerkError::Parse(format!("unbound name `{name}` in map literal")))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("`)` expected"));
                }
                Ok(e)
            }
            _ => Err(self.err("operand expected")),
        }
    }
}

/// Parses a rational map in z. Sums over equal denominators are added
/// directly and common powers of z cancel; other common factors are kept,
/// so write the map in lowest terms.
pub fn parse_map(backend: &Backend, s: &str, consts: &Constants) -> Result<RationalMap> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(BerkError::Parse("empty map literal".into()));
    }
    let mut p = Parser { toks, pos: 0, backend: *backend, consts };
    let f = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    RationalMap::new(f.num, f.den)
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.get(key).and_then(Value::as_str).ok_or_else(|| BerkError::Parse(format!("missing string field `{key}`")))
}

pub fn point_to_json(s: &BerkPoint) -> Value {
    match s {
        BerkPoint::TypeI(z) => json!({"t": "I", "v": z.to_literal()}),
        BerkPoint::Infinity => json!({"t": "inf"}),
        BerkPoint::TypeII { center, logr } => json!({"t": "II", "c": center.to_literal(), "logr": fmt_q(logr)}),
    }
}

pub fn point_from_json(v: &Value, backend: &Backend) -> Result<BerkPoint> {
    match str_field(v, "t")? {
        "I" => Ok(BerkPoint::TypeI(FieldElement::parse(backend, str_field(v, "v")?)?)),
        "inf" => Ok(BerkPoint::Infinity),
        "II" => {
            let c = FieldElement::parse(backend, str_field(v, "c")?)?;
            let logr = parse_q(str_field(v, "logr")?).ok_or_else(|| BerkError::Parse("logr".into()))?;
            BerkPoint::type2(&c, logr)
        }
        other => Err(BerkError::Parse(format!("point type `{other}`"))),
    }
}

pub fn parse_point(backend: &Backend, s: &str) -> Result<BerkPoint> {
    match s.trim() {
        "can" | "gauss" => return Ok(BerkPoint::can(backend)),
        "inf" | "infinity" => return Ok(BerkPoint::Infinity),
        _ => {}
    }
    let v: Value = serde_json::from_str(s).map_err(|e| BerkError::Parse(format!("point JSON: {e}")))?;
    point_from_json(&v, backend)
}

/// A list of {"point": …, "mass": "p/q"} in canonical atom order.
pub fn measure_to_json(m: &AtomicMeasure) -> Value {
    Value::Array(m.atoms().map(|(s, w)| json!({"point": point_to_json(s), "mass": fmt_q(w)})).collect())
}

pub fn measure_from_json(v: &Value, backend: &Backend) -> Result<AtomicMeasure> {
    let arr = v.as_array().ok_or_else(|| BerkError::Parse("measure must be a list of atoms".into()))?;
    let mut m = AtomicMeasure::zero();
    for a in arr {
        let s = point_from_json(a.get("point").ok_or_else(|| BerkError::Parse("atom without point".into()))?, backend)?;
        let w = parse_q(str_field(a, "mass")?).ok_or_else(|| BerkError::Parse("mass".into()))?;
        m.add_mass(s, w);
    }
    Ok(m)
}

pub fn fiber_to_json(f: &Fiber) -> Value {
    Value::Array(f.iter().map(|(s, m)| json!({"point": point_to_json(s), "mult": m})).collect())
}

pub fn fiber_from_json(v: &Value, backend: &Backend) -> Result<Fiber> {
    let arr = v.as_array().ok_or_else(|| BerkError::Parse("fiber must be a list".into()))?;
    arr.iter()
        .map(|a| {
            let s = point_from_json(a.get("point").ok_or_else(|| BerkError::Parse("entry without point".into()))?, backend)?;
            let m = a.get("mult").and_then(Value::as_u64).ok_or_else(|| BerkError::Parse("mult".into()))?;
            Ok((s, m as usize))
        })
        .collect()
}

/// {"num": [c0, c1, …], "den": […]} with field literals.
pub fn map_to_json(r: &RationalMap) -> Value {
    let lits = |p: &Poly| Value::Array(p.coeffs().iter().map(|c| Value::String(c.to_literal())).collect());
    json!({"num": lits(r.num()), "den": lits(r.den())})
}

pub fn map_from_json(v: &Value, backend: &Backend) -> Result<RationalMap> {
    let poly = |key: &str| -> Result<Poly> {
        let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| BerkError::Parse(format!("map field `{key}`")))?;
        let cs = arr
            .iter()
            .map(|c| FieldElement::parse(backend, c.as_str().ok_or_else(|| BerkError::Parse("coefficient".into()))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::new(*backend, cs))
    };
    RationalMap::new(poly("num")?, poly("den")?)
}

/// Graphviz with point encodings on the vertices and d_H on the edges.
pub fn tree_to_dot(t: &FiniteTree) -> String {
    let mut s = String::from("graph tree {\n");
    for (i, v) in t.vertices().iter().enumerate() {
        let label = point_to_json(v).to_string().replace('\\', "\\\\").replace('"', "\\\"");
        s.push_str(&format!("  v{i} [label=\"{label}\"];\n"));
    }
    for (c, p, l) in t.edges() {
        s.push_str(&format!("  v{c} -- v{p} [label=\"{}\"];\n", fmt_q(&l)));
    }
    s.push_str("}\n");
    s
}

/// Parses "3/2" or a JSON string holding it.
pub fn parse_rational(s: &str) -> Result<Q> {
    parse_q(s.trim().trim_matches('"')).ok_or_else(|| BerkError::Parse(format!("rational `{s}`")))
}

/// Exact or approximate tagging for report fields.
pub fn exact(v: Value) -> Value {
    json!({"value": v, "tag": "exact"})
}

pub fn approx(x: f64, tol: f64) -> Value {
    json!({"value": x, "tag": format!("approx({tol:e})")})
}
