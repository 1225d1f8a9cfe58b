//! Problem files: line-oriented headers followed by one payload block.
//!
//! ```text
//! ring fp 7
//! monoid zp 2
//! lambda 2
//! prec 16
//! rank 1
//! phi:
//! [[t*u^(-1)]]
//! ```
//!
//! Lines starting with `#` are comments. Positions in errors are 1-based.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Payload, Problem};
use crate::coeff::{Coeff, Ring};
use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, Monoid, Rational};
use crate::series::{Prec, Series};
use crate::seriesalg::SeriesMatrix;

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

/// Character cursor tracking line and column over a slice of the file.
struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn new(text: &str, line: usize, col: usize) -> Cursor {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
            col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while !matches!(self.peek(), None | Some('\n')) {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        syntax(self.line, self.col, msg)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected '{want}', found {}", self.found())))
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let mut digits = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            digits.push(c);
            self.bump();
        }
        if digits.is_empty() {
            return Err(self.err(format!("expected a number, found {}", self.found())));
        }
        Ok(digits.parse().expect("ascii digits"))
    }

    /// `['-'] int ['/' int]`
    fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let neg = self.eat('-');
        let n = self.integer()?;
        let (line, col) = (self.line, self.col);
        let d = if self.eat('/') { self.integer()? } else { BigInt::one() };
        if d.is_zero() {
            return Err(syntax(line, col, "zero denominator"));
        }
        let r = Rational::new(n, d);
        Ok(if neg { -r } else { r })
    }

    fn small_integer(&mut self) -> Result<usize> {
        let (line, col) = (self.line, self.col);
        let n = self.integer()?;
        usize::try_from(n).map_err(|_| syntax(line, col, "number too large"))
    }

    /// `^ (rational)` or `^ int`.
    fn exponent(&mut self) -> Result<Rational> {
        if self.eat('(') {
            let r = self.rational()?;
            self.expect(')')?;
            Ok(r)
        } else {
            Ok(Rational::from_integer(self.integer()?))
        }
    }
}

const VARS: [char; 3] = ['t', 'u', 'v'];

/// Parses one series in `nvars` variables, stopping before `,`, `]` or the
/// end of input.
fn series(cur: &mut Cursor, ring: &Ring, nvars: usize) -> Result<Series> {
    let mut terms: Vec<(Vec<Rational>, Coeff)> = Vec::new();
    cur.skip_ws();
    let mut neg = cur.eat('-');
    if !neg {
        cur.eat('+');
    }
    loop {
        let (exps, c) = term(cur, ring, nvars)?;
        terms.push((exps, if neg { ring.neg(&c) } else { c }));
        cur.skip_ws();
        match cur.peek() {
            Some('+') => {
                cur.bump();
                neg = false;
            }
            Some('-') => {
                cur.bump();
                neg = true;
            }
            None | Some(',') | Some(']') => break,
            Some(_) => return Err(cur.err(format!("expected '+', '-', ',' or ']', found {}", cur.found()))),
        }
    }
    Series::new(nvars, ring.clone(), terms, Prec::Infinite)
}

/// A product of rationals, `eps` powers and variable powers.
fn term(cur: &mut Cursor, ring: &Ring, nvars: usize) -> Result<(Vec<Rational>, Coeff)> {
    let mut exps = vec![Rational::zero(); nvars];
    let mut scalar = Rational::one();
    let mut eps = 0usize;
    loop {
        cur.skip_ws();
        let (line, col) = (cur.line, cur.col);
        match cur.peek() {
            Some(c) if c.is_ascii_digit() => {
                scalar *= cur.rational()?;
            }
            Some('e') => {
                for want in ['e', 'p', 's'] {
                    if cur.peek() != Some(want) {
                        return Err(syntax(line, col, "expected 'eps'"));
                    }
                    cur.bump();
                }
                eps += if cur.eat('^') {
                    if cur.eat('(') {
                        let k = cur.small_integer()?;
                        cur.expect(')')?;
                        k
                    } else {
                        cur.small_integer()?
                    }
                } else {
                    1
                };
                if ring.is_field() {
                    return Err(Error::Semantic(format!(
                        "eps at line {line}, column {col} needs a dual ring"
                    )));
                }
            }
            Some(c) if VARS.contains(&c) => {
                cur.bump();
                let i = VARS.iter().position(|&v| v == c).unwrap();
                if i >= nvars {
                    return Err(Error::Semantic(format!(
                        "variable {c} at line {line}, column {col} in a {nvars}-variable payload"
                    )));
                }
                let e = if cur.eat('^') { cur.exponent()? } else { Rational::one() };
                exps[i] += e;
            }
            _ => return Err(cur.err(format!("expected a term, found {}", cur.found()))),
        }
        if !cur.eat('*') {
            break;
        }
    }
    let base = ring.from_rational(&scalar)?;
    let k = ring.residue_field().one();
    let c = match ring.eps_power(k, eps) {
        Some(e) => ring.mul(&base, &e),
        None => ring.zero(),
    };
    Ok((exps, c))
}

fn matrix(cur: &mut Cursor, ring: &Ring, nvars: usize) -> Result<SeriesMatrix> {
    cur.expect('[')?;
    let mut rows = Vec::new();
    loop {
        let (line, col) = (cur.line, cur.col);
        cur.expect('[')?;
        let mut row = Vec::new();
        loop {
            row.push(series(cur, ring, nvars)?);
            if !cur.eat(',') {
                break;
            }
        }
        cur.expect(']')?;
        if let Some(first) = rows.first() {
            let first: &Vec<Series> = first;
            if first.len() != row.len() {
                return Err(syntax(line, col, "rows of unequal length"));
            }
        }
        rows.push(row);
        if !cur.eat(',') {
            break;
        }
    }
    cur.expect(']')?;
    SeriesMatrix::from_rows(rows)
}

/// Parses a series in the text grammar, e.g. `3*t^(1/2) - eps*u`.
pub fn parse_series(text: &str, ring: &Ring, nvars: usize) -> Result<Series> {
    let mut cur = Cursor::new(text, 1, 1);
    let s = series(&mut cur, ring, nvars)?;
    if !cur.at_end() {
        return Err(cur.err(format!("unexpected {}", cur.found())));
    }
    Ok(s)
}

/// Parses a matrix `[[s, ...], ...]` in the text grammar.
pub fn parse_matrix(text: &str, ring: &Ring, nvars: usize) -> Result<SeriesMatrix> {
    let mut cur = Cursor::new(text, 1, 1);
    let m = matrix(&mut cur, ring, nvars)?;
    if !cur.at_end() {
        return Err(cur.err(format!("unexpected {}", cur.found())));
    }
    Ok(m)
}

fn whole<T>(text: &str, f: impl FnOnce(&mut Cursor) -> Result<T>) -> Result<T> {
    let mut cur = Cursor::new(text.trim(), 1, 1);
    let v = f(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err(format!("unexpected {}", cur.found())));
    }
    Ok(v)
}

/// A ring descriptor as in the `ring` header, e.g. `dual fp 5 order 2`.
pub fn parse_ring_descriptor(text: &str) -> Result<Ring> {
    whole(text, parse_ring)
}

/// A monoid descriptor as in the `monoid` header, e.g. `zp 2`.
pub fn parse_monoid_descriptor(text: &str) -> Result<Monoid> {
    whole(text, parse_monoid)
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    whole(text, |cur| cur.rational())
}

fn parse_ring(cur: &mut Cursor) -> Result<Ring> {
    let word = cur_word(cur)?;
    match word.as_str() {
        "q" => Ok(Ring::Rationals),
        "fp" => {
            let p = cur.integer()?;
            Ring::prime_field(u64::try_from(p).map_err(|_| Error::InvalidRing("prime too large".into()))?)
        }
        "dual" => {
            let base = parse_ring(cur)?;
            if !base.is_field() {
                return Err(Error::InvalidRing("dual chain base must be a field".into()));
            }
            let kw = cur_word(cur)?;
            if kw != "order" {
                return Err(cur.err(format!("expected 'order', found '{kw}'")));
            }
            let m = cur.small_integer()?;
            Ring::dual_chain(base, m)
        }
        w => Err(cur.err(format!("unknown ring '{w}'"))),
    }
}

fn parse_monoid(cur: &mut Cursor) -> Result<Monoid> {
    let word = cur_word(cur)?;
    match word.as_str() {
        "z" => Ok(Monoid::Z),
        "q" => Ok(Monoid::Q),
        "zp" => {
            let p = cur.integer()?;
            Monoid::zinv(u64::try_from(p).map_err(|_| Error::Semantic("monoid prime too large".into()))?)
        }
        w => Err(cur.err(format!("unknown monoid '{w}'"))),
    }
}

fn cur_word(cur: &mut Cursor) -> Result<String> {
    cur.skip_ws();
    let mut w = String::new();
    while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '-' || *c == '_') {
        w.push(c);
        cur.bump();
    }
    if w.is_empty() {
        return Err(cur.err(format!("expected a word, found {}", cur.found())));
    }
    Ok(w)
}

#[derive(Default)]
struct Headers {
    ring: Option<Ring>,
    monoid: Option<Monoid>,
    lambda: Option<Rational>,
    prec: Option<Rational>,
    rank: Option<usize>,
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let mut h = Headers::default();
    let mut payload: Option<(String, usize, String)> = None;
    let lines: Vec<&str> = text.split('\n').collect();
    let mut idx = 0;
    while idx < lines.len() {
        let lineno = idx + 1;
        let raw = lines[idx].trim_end_matches('\r');
        idx += 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let mut cur = Cursor::new(trimmed, lineno, indent + 1);
        let key = cur_word(&mut cur)?;
        if cur.peek() == Some(':') {
            cur.bump();
            let kind = key;
            if !cur.at_end() {
                return Err(cur.err("payload must start on the next line"));
            }
            let body = lines[idx..].join("\n");
            payload = Some((kind.to_string(), lineno + 1, body));
            break;
        }
        let dup = || syntax(lineno, indent + 1, format!("duplicate header '{key}'"));
        match key.as_str() {
            "ring" => {
                let r = parse_ring(&mut cur)?;
                if h.ring.replace(r).is_some() {
                    return Err(dup());
                }
            }
            "monoid" => {
                let m = parse_monoid(&mut cur)?;
                if h.monoid.replace(m).is_some() {
                    return Err(dup());
                }
            }
            "lambda" => {
                let l = cur.rational()?;
                if l <= Rational::one() {
                    return Err(Error::Semantic(format!(
                        "lambda must exceed 1, got {}",
                        fmt_rational(&l)
                    )));
                }
                if h.lambda.replace(l).is_some() {
                    return Err(dup());
                }
            }
            "prec" => {
                let p = cur.rational()?;
                if !p.is_positive() {
                    return Err(Error::Semantic("prec must be positive".into()));
                }
                if h.prec.replace(p).is_some() {
                    return Err(dup());
                }
            }
            "rank" => {
                let n = cur.small_integer()?;
                if n == 0 {
                    return Err(Error::Semantic("rank must be at least 1".into()));
                }
                if h.rank.replace(n).is_some() {
                    return Err(dup());
                }
            }
            _ => return Err(syntax(lineno, indent + 1, format!("unknown header '{key}'"))),
        }
        if !cur.at_end() {
            return Err(cur.err(format!("unexpected {} after header", cur.found())));
        }
    }

    let missing = |name: &str| Error::Semantic(format!("missing header '{name}'"));
    let ring = h.ring.ok_or_else(|| missing("ring"))?;
    let monoid = h.monoid.ok_or_else(|| missing("monoid"))?;
    let lambda = h.lambda.ok_or_else(|| missing("lambda"))?;
    let prec = h.prec.ok_or_else(|| missing("prec"))?;
    monoid.check_admissible(&lambda)?;
    let (kind, line, body) = payload.ok_or_else(|| Error::Semantic("missing payload block".into()))?;
    let mut cur = Cursor::new(&body, line, 1);
    let payload = match kind.as_str() {
        "twist" => Payload::Twist(series(&mut cur, &ring, 1)?),
        "phi" | "b" | "xi" => {
            let nvars = if kind == "phi" { 2 } else { 1 };
            let m = matrix(&mut cur, &ring, nvars)?;
            match kind.as_str() {
                "phi" => Payload::Phi(m),
                "b" => Payload::B(m),
                _ => Payload::Xi(m),
            }
        }
        k => return Err(syntax(line - 1, 1, format!("unknown payload '{k}'"))),
    };
    if !cur.at_end() {
        return Err(cur.err(format!("unexpected {} after payload", cur.found())));
    }
    let rank = match (&payload, h.rank) {
        (Payload::Twist(_), None) => 1,
        (_, Some(n)) => n,
        (_, None) => return Err(missing("rank")),
    };
    if let Some(m) = payload.matrix() {
        if m.rows() != rank || m.cols() != rank {
            return Err(Error::Semantic(format!(
                "payload is {}x{} but rank is {rank}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.support_in_monoid(&monoid) {
            return Err(Error::Semantic(format!("payload has exponents outside {monoid}")));
        }
    }
    if let Payload::Twist(s) = &payload {
        if rank != 1 {
            return Err(Error::Semantic("twist payload needs rank 1".into()));
        }
        if !s.support_in_monoid(&monoid) {
            return Err(Error::Semantic(format!("payload has exponents outside {monoid}")));
        }
    }
    Ok(Problem {
        ring,
        monoid,
        lambda,
        prec,
        rank,
        payload,
    })
}
