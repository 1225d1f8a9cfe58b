//! Sparse truncated Novikov series in one, two or three variables.
//!
//! A [`Series`] stores finitely many terms together with a precision `D`:
//! the element is known modulo everything supported in total weight `>= D`.
//! Total weight is the sum of the exponents of a monomial.

mod inverse;
mod maps;
mod twist;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::coeff::{Coeff, Ring};
use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, Monoid, Rational};

pub(crate) use maps::check_stable;
pub use maps::{Direction, VarMap};
pub use twist::{Obstruction, TwistSolution};

/// Precision cutoff. `Finite(d)` < `Infinite`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prec {
    Finite(Rational),
    Infinite,
}

impl Prec {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Prec::Finite(d) => Some(d),
            Prec::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Prec::Infinite)
    }

    pub fn shift(&self, by: &Rational) -> Prec {
        match self {
            Prec::Finite(d) => Prec::Finite(d + by),
            Prec::Infinite => Prec::Infinite,
        }
    }

    pub fn plus(&self, other: &Prec) -> Prec {
        match (self, other) {
            (Prec::Finite(a), Prec::Finite(b)) => Prec::Finite(a + b),
            _ => Prec::Infinite,
        }
    }

    /// Multiplies by a positive factor.
    pub fn scale(&self, factor: &Rational) -> Prec {
        debug_assert!(factor.is_positive());
        match self {
            Prec::Finite(d) => Prec::Finite(d * factor),
            Prec::Infinite => Prec::Infinite,
        }
    }

    /// True when a monomial of weight `w` lies strictly below the cutoff.
    pub fn admits(&self, w: &Rational) -> bool {
        match self {
            Prec::Finite(d) => w < d,
            Prec::Infinite => true,
        }
    }
}

impl From<Rational> for Prec {
    fn from(d: Rational) -> Prec {
        Prec::Finite(d)
    }
}

impl fmt::Display for Prec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prec::Finite(d) => write!(f, "{}", fmt_rational(d)),
            Prec::Infinite => write!(f, "inf"),
        }
    }
}

/// An exponent vector, ordered by total weight and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    weight: Rational,
    exps: Vec<Rational>,
}

impl Monomial {
    pub fn new(exps: Vec<Rational>) -> Monomial {
        let weight = exps.iter().fold(Rational::zero(), |a, e| a + e);
        Monomial { weight, exps }
    }

    pub fn unit(nvars: usize) -> Monomial {
        Monomial::new(vec![Rational::zero(); nvars])
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn exps(&self) -> &[Rational] {
        &self.exps
    }

    pub fn into_exps(self) -> Vec<Rational> {
        self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            weight: &self.weight + &other.weight,
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.exps.iter().all(|e| e.is_zero())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    nvars: usize,
    ring: Ring,
    terms: BTreeMap<Monomial, Coeff>,
    prec: Prec,
}

impl Series {
    /// Builds a series from a list of terms, merging duplicates, dropping
    /// zeros and everything at weight `>= prec`.
    pub fn new<I>(nvars: usize, ring: Ring, terms: I, prec: Prec) -> Result<Series>
    where
        I: IntoIterator<Item = (Vec<Rational>, Coeff)>,
    {
        let mut out = Series::zero(nvars, ring, prec);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::ArityMismatch {
                    expected: nvars,
                    found: exps.len(),
                });
            }
            out.add_term(Monomial::new(exps), c);
        }
        Ok(out)
    }

    pub fn zero(nvars: usize, ring: Ring, prec: Prec) -> Series {
        Series {
            nvars,
            ring,
            terms: BTreeMap::new(),
            prec,
        }
    }

    pub fn constant(nvars: usize, ring: Ring, c: Coeff) -> Series {
        let mut s = Series::zero(nvars, ring, Prec::Infinite);
        s.add_term(Monomial::unit(nvars), c);
        s
    }

    pub fn one(nvars: usize, ring: Ring) -> Series {
        let c = ring.one();
        Series::constant(nvars, ring, c)
    }

    /// `c * t_1^{e_1} ... t_n^{e_n}`, exact.
    pub fn monomial(ring: Ring, c: Coeff, exps: Vec<Rational>) -> Series {
        let mut s = Series::zero(exps.len(), ring, Prec::Infinite);
        s.add_term(Monomial::new(exps), c);
        s
    }

    /// Adds `c * m` in place, respecting the cutoff.
    pub(crate) fn add_term(&mut self, m: Monomial, c: Coeff) {
        if !self.prec.admits(m.weight()) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !self.ring.is_zero(&c) {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = self.ring.add(o.get(), &c);
                if self.ring.is_zero(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn prec(&self) -> &Prec {
        &self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// No stored terms: zero up to the precision.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[Rational]) -> Coeff {
        self.terms
            .get(&Monomial::new(exps.to_vec()))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    /// Coefficient of the unit monomial.
    pub fn constant_term(&self) -> Coeff {
        self.coefficient(&vec![Rational::zero(); self.nvars])
    }

    /// Least total weight of the support, or the precision when empty.
    pub fn w_min(&self) -> Prec {
        match self.terms.keys().next() {
            Some(m) => Prec::Finite(m.weight().clone()),
            None => self.prec.clone(),
        }
    }

    pub fn support(&self) -> Vec<Vec<Rational>> {
        self.terms.keys().map(|m| m.exps().to_vec()).collect()
    }

    /// The support together with `w_min`.
    pub fn valuation_and_support(&self) -> (Vec<Vec<Rational>>, Prec) {
        (self.support(), self.w_min())
    }

    /// Lowers the precision to `min(self.prec, prec)`, dropping terms.
    pub fn truncate(&self, prec: &Prec) -> Series {
        if prec >= &self.prec {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| prec.admits(m.weight()))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Series {
            nvars: self.nvars,
            ring: self.ring.clone(),
            terms,
            prec: prec.clone(),
        }
    }

    /// Equality of stored terms below the smaller of the two precisions.
    pub fn eq_up_to_prec(&self, other: &Series) -> bool {
        let p = self.prec.clone().min(other.prec.clone());
        self.truncate(&p).terms == other.truncate(&p).terms
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_unit())
    }

    pub fn support_in_monoid(&self, monoid: &Monoid) -> bool {
        self.terms
            .keys()
            .all(|m| m.exps().iter().all(|e| monoid.contains(e)))
    }

    /// Applies a function to every coefficient, landing in `ring`.
    pub fn map_coeffs<F>(&self, ring: &Ring, f: F) -> Series
    where
        F: Fn(&Coeff) -> Coeff,
    {
        let mut out = Series::zero(self.nvars, ring.clone(), self.prec.clone());
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Series {
        let mut out = Series::zero(self.nvars, self.ring.clone(), self.prec.clone());
        if self.ring.is_zero(c) {
            // 0 * x is exact zero
            out.prec = Prec::Infinite;
            return out;
        }
        for (m, a) in &self.terms {
            out.add_term(m.clone(), self.ring.mul(a, c));
        }
        out
    }

    /// Multiplication by the monomial `t^exps`, exact; shifts the precision.
    pub fn shift(&self, exps: &[Rational]) -> Series {
        let mono = Monomial::new(exps.to_vec());
        let prec = self.prec.shift(mono.weight());
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.mul(&mono), c.clone()))
            .collect();
        Series {
            nvars: self.nvars,
            ring: self.ring.clone(),
            terms,
            prec,
        }
    }

    fn check_compatible(&self, other: &Series) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other)?;
        let prec = self.prec.clone().min(other.prec.clone());
        let mut out = self.truncate(&prec);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Series) -> Result<Series> {
        self.try_add(&other.negate())
    }

    pub fn negate(&self) -> Series {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.ring.neg(c);
        }
        out
    }

    /// Product precision: `min(Dx + w(y), Dy + w(x), Dx + Dy)`.
    pub fn product_prec(&self, other: &Series) -> Prec {
        let a = self.prec.plus(&other.w_min());
        let b = other.prec.plus(&self.w_min());
        let c = self.prec.plus(&other.prec);
        a.min(b).min(c)
    }

    pub fn try_mul(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other)?;
        let prec = self.product_prec(other);
        let mut out = Series::zero(self.nvars, self.ring.clone(), prec.clone());
        let ring = &self.ring;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let w = ma.weight() + mb.weight();
                if !prec.admits(&w) {
                    // terms of `other` come in increasing weight
                    break;
                }
                out.add_term(ma.mul(mb), ring.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::one(self.nvars, self.ring.clone());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.try_add(rhs).expect("series addition")
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.try_sub(rhs).expect("series subtraction")
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.try_mul(rhs).expect("series multiplication")
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.negate()
    }
}

pub(crate) const VAR_NAMES: [&str; 3] = ["t", "u", "v"];

fn fmt_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, e) in m.exps().iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        if e.is_one() {
            parts.push(VAR_NAMES[i].to_string());
        } else {
            parts.push(format!("{}^({})", VAR_NAMES[i], fmt_rational(e)));
        }
    }
    parts.join("*")
}

/// Series grammar text for a single field coefficient times an optional eps
/// power, returning `(negative, magnitude text)`.
fn fmt_scalar(c: &Coeff, eps: usize) -> (bool, String) {
    let (neg, base) = match c {
        Coeff::Q(x) if x.is_negative() => (true, fmt_rational(&-x)),
        c => (false, Ring::fmt_field_elem(c)),
    };
    let eps_txt = match eps {
        0 => None,
        1 => Some("eps".to_string()),
        k => Some(format!("eps^{k}")),
    };
    let txt = match eps_txt {
        None => base,
        Some(e) if base == "1" => e,
        Some(e) => format!("{base}*{e}"),
    };
    (neg, txt)
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in &self.terms {
            let mono = fmt_monomial(m);
            for (fc, k) in self.ring.eps_parts(c) {
                let (neg, scalar) = fmt_scalar(&fc, k);
                let body = if mono.is_empty() {
                    scalar
                } else if scalar == "1" {
                    mono.clone()
                } else {
                    format!("{scalar}*{mono}")
                };
                match (first, neg) {
                    (true, false) => write!(f, "{body}")?,
                    (true, true) => write!(f, "-{body}")?,
                    (false, false) => write!(f, " + {body}")?,
                    (false, true) => write!(f, " - {body}")?,
                }
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
