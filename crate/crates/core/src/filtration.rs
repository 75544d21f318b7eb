//! Formal meromorphic forms on a polydisc `(Δ*)^k × Δ^l`, logarithmic
//! membership, the Hodge filtration `F` on the log complex and the coarser
//! `Q` filtration on the meromorphic complex.
//!
//! Levels are decided termwise on the canonical monomial expansion. In one
//! boundary variable `v`, `Q^1` consists of 1-forms with at worst a log pole,
//! so a term gets one unit of `Q`-level from `v` exactly when `dv` occurs and
//! the exponent of `v` is at least `-1`. Interior variables follow `F` and
//! contribute one unit per differential.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rat, qc_int, Rational, QC};

/// Coordinates of a polydisc chart: `boundary` vanish on the divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordSystem {
  pub boundary: Vec<String>,
  pub interior: Vec<String>,
}

impl CoordSystem {
  pub fn new(boundary: &[&str], interior: &[&str]) -> Result<Self> {
    let s = Self { boundary: boundary.iter().map(|s| s.to_string()).collect(), interior: interior.iter().map(|s| s.to_string()).collect() };
    s.validate()?;
    Ok(s)
  }

  fn validate(&self) -> Result<()> {
    let names = self.names();
    for (i, a) in names.iter().enumerate() {
      if !is_ident(a) || a == "i" {
        return Err(Error::InvalidArgument(format!("`{a}` is not a usable variable name")));
      }
      if names[..i].contains(a) {
        return Err(Error::InvalidArgument(format!("variable `{a}` declared twice")));
      }
    }
    if names.len() > 31 {
      return Err(Error::InvalidArgument("at most 31 variables".into()));
    }
    Ok(())
  }

  pub fn names(&self) -> Vec<String> { self.boundary.iter().chain(&self.interior).cloned().collect() }

  pub fn len(&self) -> usize { self.boundary.len() + self.interior.len() }

  pub fn is_empty(&self) -> bool { self.len() == 0 }

  pub fn index(&self, name: &str) -> Option<usize> { self.names().iter().position(|n| n == name) }

  pub fn is_boundary(&self, i: usize) -> bool { i < self.boundary.len() }
}

fn is_ident(s: &str) -> bool {
  let mut c = s.chars();
  matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic()) && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// Key of `z^e dz_I`: wedge bitmask and one exponent per variable.
type Key = (u32, Vec<i32>);

/// Finite sum of monomial forms `c · z^e · dz_{i_1}∧…∧dz_{i_r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogMeroForm {
  coords: Arc<CoordSystem>,
  terms:  BTreeMap<Key, QC>,
}

fn sign_of(a: u32, b: u32) -> Option<bool> {
  if a & b != 0 {
    return None;
  }
  let mut odd = false;
  let mut bb = b;
  while bb != 0 {
    let bit = bb.trailing_zeros();
    if ((a >> bit) >> 1).count_ones() % 2 == 1 {
      odd = !odd;
    }
    bb &= bb - 1;
  }
  Some(odd)
}

impl LogMeroForm {
  pub fn zero(coords: Arc<CoordSystem>) -> Self { Self { coords, terms: BTreeMap::new() } }

  /// Single term; `wedge` lists variable indices in the order written.
  pub fn monomial(coords: Arc<CoordSystem>, c: QC, exps: Vec<i32>, wedge: &[usize]) -> Result<Self> {
    if exps.len() != coords.len() {
      return Err(Error::InvalidArgument("one exponent per variable required".into()));
    }
    if let Some(i) = (coords.boundary.len()..coords.len()).find(|&i| exps[i] < 0) {
      return Err(Error::Domain(format!("interior variable `{}` cannot have a pole", coords.names()[i])));
    }
    let mut mask = 0u32;
    let mut odd = false;
    for &w in wedge {
      if w >= coords.len() {
        return Err(Error::InvalidArgument("wedge index out of range".into()));
      }
      match sign_of(mask, 1 << w) {
        None => return Ok(Self::zero(coords)),
        Some(s) => odd ^= s,
      }
      mask |= 1 << w;
    }
    let mut f = Self::zero(coords);
    f.add_term(mask, exps, if odd { -c } else { c });
    Ok(f)
  }

  fn add_term(&mut self, mask: u32, exps: Vec<i32>, c: QC) {
    if c.is_zero() {
      return;
    }
    match self.terms.entry((mask, exps)) {
      Entry::Vacant(e) => {
        e.insert(c);
      },
      Entry::Occupied(mut e) => {
        let v = e.get().clone() + c;
        if v.is_zero() {
          e.remove();
        } else {
          *e.get_mut() = v;
        }
      },
    }
  }

  pub fn coords(&self) -> &Arc<CoordSystem> { &self.coords }

  pub fn terms(&self) -> impl Iterator<Item = (&Key, &QC)> { self.terms.iter() }

  pub fn is_zero(&self) -> bool { self.terms.is_empty() }

  fn check_same(&self, other: &Self) -> Result<()> {
    if self.coords != other.coords {
      return Err(Error::Incompatible("forms use different coordinate systems".into()));
    }
    Ok(())
  }

  pub fn add(&self, other: &Self) -> Result<Self> {
    self.check_same(other)?;
    let mut out = self.clone();
    for ((m, e), c) in &other.terms {
      out.add_term(*m, e.clone(), c.clone());
    }
    Ok(out)
  }

  pub fn scale(&self, s: &QC) -> Self {
    let mut out = Self::zero(self.coords.clone());
    for ((m, e), c) in &self.terms {
      out.add_term(*m, e.clone(), c * s);
    }
    out
  }

  /// `d(z^a dz_I) = Σ_i a_i z^{a - e_i} dz_i ∧ dz_I`.
  pub fn d(&self) -> Self {
    let mut out = Self::zero(self.coords.clone());
    for ((m, e), c) in &self.terms {
      for (i, &a) in e.iter().enumerate() {
        if a == 0 || m & (1 << i) != 0 {
          continue;
        }
        let mut ne = e.clone();
        ne[i] -= 1;
        let below = (m & ((1u32 << i) - 1)).count_ones();
        let coeff = c * qc_int(a as i64, 0);
        out.add_term(m | (1 << i), ne, if below % 2 == 1 { -coeff } else { coeff });
      }
    }
    out
  }

  pub fn wedge(&self, other: &Self) -> Result<Self> {
    self.check_same(other)?;
    let mut out = Self::zero(self.coords.clone());
    for ((ma, ea), ca) in &self.terms {
      for ((mb, eb), cb) in &other.terms {
        let Some(odd) = sign_of(*ma, *mb) else { continue };
        let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
        let c = ca * cb;
        out.add_term(ma | mb, e, if odd { -c } else { c });
      }
    }
    Ok(out)
  }

  fn term_q_level(&self, mask: u32, exps: &[i32]) -> u32 {
    (0..self.coords.len())
      .filter(|&i| mask & (1 << i) != 0 && (!self.coords.is_boundary(i) || exps[i] >= -1))
      .count() as u32
  }

  fn term_is_log(&self, mask: u32, exps: &[i32]) -> bool {
    (0..self.coords.boundary.len()).all(|i| exps[i] >= 0 || (exps[i] == -1 && mask & (1 << i) != 0))
  }

  /// Largest `p` with the form in `Q^p`; `None` for the zero form.
  pub fn q_level(&self) -> Option<u32> { self.terms.keys().map(|(m, e)| self.term_q_level(*m, e)).min() }

  /// Whether every term lies in the logarithmic complex.
  pub fn is_log(&self) -> bool { self.terms.keys().all(|(m, e)| self.term_is_log(*m, e)) }

  /// Largest `p` with the form in `F^p` of the log complex, `-1` when not
  /// log, `None` for the zero form.
  pub fn f_level(&self) -> Option<i64> {
    if self.is_zero() {
      return None;
    }
    if !self.is_log() {
      return Some(-1);
    }
    self.terms.keys().map(|(m, _)| m.count_ones() as i64).min()
  }

  /// Substitutes `v1 = v2 = new_var` (both boundary variables). The merged
  /// variable takes the place of `v1`.
  pub fn restrict_diagonal(&self, v1: &str, v2: &str, new_var: &str) -> Result<Self> {
    let c = &self.coords;
    let i1 = c.index(v1).ok_or_else(|| Error::UnknownVariable(v1.into()))?;
    let i2 = c.index(v2).ok_or_else(|| Error::UnknownVariable(v2.into()))?;
    if i1 == i2 || !c.is_boundary(i1) || !c.is_boundary(i2) {
      return Err(Error::InvalidArgument("diagonal restriction needs two distinct boundary variables".into()));
    }
    if let Some(j) = c.index(new_var) {
      if j != i1 && j != i2 {
        return Err(Error::InvalidArgument(format!("`{new_var}` already names another variable")));
      }
    }
    let mut boundary: Vec<String> = Vec::new();
    let mut remap = vec![usize::MAX; c.len()];
    for (i, name) in c.boundary.iter().enumerate() {
      if i == i2 {
        continue;
      }
      remap[i] = boundary.len();
      boundary.push(if i == i1 { new_var.to_string() } else { name.clone() });
    }
    remap[i2] = remap[i1];
    let interior = c.interior.clone();
    for i in c.boundary.len()..c.len() {
      remap[i] = boundary.len() + (i - c.boundary.len());
    }
    let coords = Arc::new(CoordSystem { boundary, interior });
    let mut out = Self::zero(coords.clone());
    for ((m, e), coeff) in &self.terms {
      let mut exps = vec![0; coords.len()];
      for (i, &a) in e.iter().enumerate() {
        exps[remap[i]] += a;
      }
      let wedge: Vec<usize> = (0..c.len()).filter(|i| m & (1 << i) != 0).map(|i| remap[i]).collect();
      let t = Self::monomial(coords.clone(), coeff.clone(), exps, &wedge)?;
      out = out.add(&t)?;
    }
    Ok(out)
  }

  /// `form ∈ Q^p \ Q^{p+1}, F-level q, log: yes/no`.
  pub fn classify(&self) -> String {
    let log = if self.is_log() { "yes" } else { "no" };
    match (self.q_level(), self.f_level()) {
      (Some(p), Some(f)) => format!("{self} ∈ Q^{p} \\ Q^{}, F-level {f}, log: {log}", p + 1),
      _ => format!("{self} ∈ Q^p for every p, F-level ∞, log: {log}"),
    }
  }
}

fn fmt_rat(r: &Rational) -> String {
  if r.is_integer() { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) }
}

/// Coefficient text and whether it is a bare `±1`.
fn fmt_coeff(c: &QC) -> (String, Option<bool>) {
  if c.im.is_zero() {
    if c.re.is_one() {
      return (String::new(), Some(true));
    }
    if (-c.re.clone()).is_one() {
      return ("-".into(), Some(false));
    }
    return (fmt_rat(&c.re), None);
  }
  let im = |r: &Rational| if r.is_one() { "i".to_string() } else { format!("{}i", fmt_rat(r)) };
  if c.re.is_zero() {
    return (if c.im.is_negative() { format!("-{}", im(&-c.im.clone())) } else { im(&c.im) }, None);
  }
  let sign = if c.im.is_negative() { "-" } else { "+" };
  (format!("({}{}{})", fmt_rat(&c.re), sign, im(&c.im.abs())), None)
}

impl fmt::Display for LogMeroForm {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.terms.is_empty() {
      return write!(f, "0");
    }
    let names = self.coords.names();
    for (k, ((m, e), c)) in self.terms.iter().enumerate() {
      let (mut coeff, unit) = fmt_coeff(c);
      let negative = coeff.starts_with('-');
      if k > 0 {
        if negative {
          coeff.remove(0);
          write!(f, " - ")?;
        } else {
          write!(f, " + ")?;
        }
      }
      let mut parts: Vec<String> = Vec::new();
      let mut num: Vec<String> = Vec::new();
      let mut den: Vec<String> = Vec::new();
      for (i, &a) in e.iter().enumerate() {
        match a {
          0 => {},
          1 => num.push(names[i].clone()),
          -1 => den.push(names[i].clone()),
          a if a > 0 => num.push(format!("{}^{a}", names[i])),
          a => den.push(format!("{}^{}", names[i], -a)),
        }
      }
      let wedge: Vec<String> = (0..names.len()).filter(|i| m & (1 << i) != 0).map(|i| format!("d{}", names[i])).collect();
      if !coeff.is_empty() && coeff != "-" {
        parts.push(coeff.clone());
      }
      parts.extend(num);
      if !wedge.is_empty() {
        parts.push(wedge.join("^"));
      }
      let mut body = parts.join(" ");
      if body.is_empty() {
        body.push('1');
      }
      if unit == Some(false) && k == 0 {
        body = format!("-{body}");
      }
      for d in den {
        body.push('/');
        body.push_str(&d);
      }
      write!(f, "{body}")?;
    }
    Ok(())
  }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
  Num(String),
  Ident(String),
  Caret,
  Slash,
  Star,
  Plus,
  Minus,
  LParen,
  RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
  let chars: Vec<(usize, char)> = text.char_indices().collect();
  let mut out = Vec::new();
  let mut k = 0;
  while k < chars.len() {
    let (pos, ch) = chars[k];
    let tok = match ch {
      c if c.is_whitespace() => {
        k += 1;
        continue;
      },
      '^' | '∧' => Tok::Caret,
      '/' => Tok::Slash,
      '*' | '·' => Tok::Star,
      '+' => Tok::Plus,
      '-' | '−' => Tok::Minus,
      '(' => Tok::LParen,
      ')' => Tok::RParen,
      c if c.is_ascii_digit() => {
        let mut s = String::new();
        while k < chars.len() && chars[k].1.is_ascii_digit() {
          s.push(chars[k].1);
          k += 1;
        }
        out.push((pos, Tok::Num(s)));
        continue;
      },
      c if c.is_ascii_alphabetic() => {
        let mut s = String::new();
        while k < chars.len() && (chars[k].1.is_ascii_alphanumeric() || chars[k].1 == '_') {
          s.push(chars[k].1);
          k += 1;
        }
        out.push((pos, Tok::Ident(s)));
        continue;
      },
      c => return Err(Error::Syntax { pos, msg: format!("unexpected character `{c}`") }),
    };
    out.push((pos, tok));
    k += 1;
  }
  Ok(out)
}

struct Parser<'a> {
  toks:   Vec<(usize, Tok)>,
  k:      usize,
  end:    usize,
  coords: &'a Arc<CoordSystem>,
}

enum Ident {
  Var(usize),
  Diff(usize),
  Imag,
}

impl Parser<'_> {
  fn peek(&self) -> Option<&Tok> { self.toks.get(self.k).map(|(_, t)| t) }

  fn pos(&self) -> usize { self.toks.get(self.k).map(|(p, _)| *p).unwrap_or(self.end) }

  fn err<T>(&self, msg: impl Into<String>) -> Result<T> { Err(Error::Syntax { pos: self.pos(), msg: msg.into() }) }

  fn next(&mut self) -> Option<Tok> {
    let t = self.toks.get(self.k).map(|(_, t)| t.clone());
    self.k += 1;
    t
  }

  fn classify(&self, name: &str) -> Result<Ident> {
    if let Some(i) = self.coords.index(name) {
      return Ok(Ident::Var(i));
    }
    if let Some(i) = name.strip_prefix('d').and_then(|r| self.coords.index(r)) {
      return Ok(Ident::Diff(i));
    }
    if name == "i" {
      return Ok(Ident::Imag);
    }
    Err(Error::UnknownVariable(name.to_string()))
  }

  fn int(&mut self) -> Result<i32> {
    let neg = if self.peek() == Some(&Tok::Minus) {
      self.k += 1;
      true
    } else {
      false
    };
    match self.next() {
      Some(Tok::Num(s)) => {
        let v: i32 = s.parse().map_err(|_| Error::Syntax { pos: self.pos(), msg: "exponent too large".into() })?;
        Ok(if neg { -v } else { v })
      },
      _ => {
        self.k -= 1;
        self.err("expected an integer exponent")
      },
    }
  }

  fn rational(&mut self, first: String) -> Result<Rational> {
    let mut r = parse_rat(&first).expect("digits");
    if self.peek() == Some(&Tok::Slash) && matches!(self.toks.get(self.k + 1), Some((_, Tok::Num(_)))) {
      self.k += 1;
      let Some(Tok::Num(d)) = self.next() else { unreachable!() };
      let den = parse_rat(&d).expect("digits");
      if den.is_zero() {
        self.k -= 1;
        return self.err("division by zero");
      }
      r /= den;
    }
    Ok(r)
  }

  /// `( a ± b i )` style complex literal.
  fn complex(&mut self) -> Result<QC> {
    let mut acc = QC::zero();
    let mut first = true;
    loop {
      let mut sign = Rational::one();
      match self.peek() {
        Some(Tok::RParen) if !first => {
          self.k += 1;
          return Ok(acc);
        },
        Some(Tok::Plus) => {
          self.k += 1;
        },
        Some(Tok::Minus) => {
          self.k += 1;
          sign = -sign;
        },
        _ if first => {},
        _ => return self.err("expected `+`, `-` or `)` in a coefficient"),
      }
      first = false;
      let mag = match self.next() {
        Some(Tok::Num(s)) => self.rational(s)?,
        Some(Tok::Ident(s)) if s == "i" => {
          acc = acc + QC::new(Rational::zero(), sign);
          continue;
        },
        _ => {
          self.k -= 1;
          return self.err("expected a number");
        },
      };
      if self.peek() == Some(&Tok::Ident("i".into())) {
        self.k += 1;
        acc = acc + QC::new(Rational::zero(), sign * mag);
      } else {
        acc = acc + QC::new(sign * mag, Rational::zero());
      }
    }
  }

  fn term(&mut self, sign: QC) -> Result<LogMeroForm> {
    let n = self.coords.len();
    let mut coeff = sign;
    let mut exps = vec![0i32; n];
    let mut wedge: Vec<usize> = Vec::new();
    let mut factors = 0;
    let mut last_diff = false;
    loop {
      match self.peek() {
        None | Some(Tok::Plus) | Some(Tok::Minus) => break,
        Some(Tok::Star) => {
          self.k += 1;
          continue;
        },
        Some(Tok::Caret) if last_diff => {
          self.k += 1;
          if !matches!(self.peek(), Some(Tok::Ident(s)) if matches!(self.classify(s), Ok(Ident::Diff(_)))) {
            return self.err("expected a differential after the wedge sign");
          }
          continue;
        },
        _ => {},
      }
      let start = self.pos();
      last_diff = false;
      match self.next().unwrap() {
        Tok::Num(s) => coeff = coeff * QC::new(self.rational(s)?, Rational::zero()),
        Tok::LParen => coeff = coeff * self.complex()?,
        Tok::Ident(s) => match self.classify(&s)? {
          Ident::Var(i) => exps[i] += self.power()?,
          Ident::Diff(i) => {
            wedge.push(i);
            last_diff = true;
          },
          Ident::Imag => coeff = coeff * QC::i(),
        },
        Tok::Slash => match self.next() {
          Some(Tok::Ident(s)) => match self.classify(&s)? {
            Ident::Var(i) => exps[i] -= self.power()?,
            _ => {
              self.k -= 1;
              return self.err("only a variable power may follow `/`");
            },
          },
          Some(Tok::Num(s)) => {
            let r = self.rational(s)?;
            if r.is_zero() {
              return Err(Error::Syntax { pos: start, msg: "division by zero".into() });
            }
            coeff = coeff / QC::new(r, Rational::zero());
          },
          _ => {
            self.k -= 1;
            return self.err("expected a variable or number after `/`");
          },
        },
        _ => return Err(Error::Syntax { pos: start, msg: "unexpected token".into() }),
      }
      factors += 1;
    }
    if factors == 0 {
      return self.err("empty term");
    }
    LogMeroForm::monomial(self.coords.clone(), coeff, exps, &wedge)
  }

  fn power(&mut self) -> Result<i32> {
    if self.peek() == Some(&Tok::Caret) && !matches!(self.toks.get(self.k + 1), Some((_, Tok::Ident(_)))) {
      self.k += 1;
      return self.int();
    }
    Ok(1)
  }
}

/// Parses the expression grammar: terms joined by `+`/`-`, each a product of
/// an optional coefficient (rational, `i`, or a parenthesized complex
/// literal), variable powers `z^k`, differentials `dz` joined by `^`, and
/// divisors `/w^k`.
pub fn parse_form(text: &str, coords: &Arc<CoordSystem>) -> Result<LogMeroForm> {
  let toks = lex(text)?;
  let mut p = Parser { toks, k: 0, end: text.len(), coords };
  let mut out = LogMeroForm::zero(coords.clone());
  let mut first = true;
  loop {
    let sign = match p.peek() {
      None if !first => break,
      None => return p.err("empty expression"),
      Some(Tok::Plus) => {
        p.k += 1;
        QC::one()
      },
      Some(Tok::Minus) => {
        p.k += 1;
        -QC::one()
      },
      _ if first => QC::one(),
      _ => return p.err("expected `+` or `-`"),
    };
    first = false;
    out = out.add(&p.term(sign)?)?;
  }
  Ok(out)
}
