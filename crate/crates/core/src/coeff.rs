//! Exact commutative coefficient rings: prime fields, the rationals, and the
//! truncated polynomial rings `k[eps]/(eps^m)` used for nilpotent thickenings.
//!
//! Elements (`Coeff`) carry no descriptor of their own; every operation goes
//! through the `Ring` that owns them.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    PrimeField(u64),
    Rationals,
    /// `base[eps]/(eps^order)`
    DualChain { base: Box<Ring>, order: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coeff {
    Fp(u64),
    Q(Rational),
    /// Coordinates `a_0, ..., a_{m-1}` of `a_0 + a_1 eps + ...`.
    Dual(Vec<Coeff>),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

impl Ring {
    pub fn prime_field(p: u64) -> Result<Ring> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if p > (1u64 << 62) {
            return Err(Error::InvalidRing(format!("prime {p} too large")));
        }
        Ok(Ring::PrimeField(p))
    }

    pub fn dual_chain(base: Ring, order: usize) -> Result<Ring> {
        if !base.is_field() {
            return Err(Error::InvalidRing("dual chain base must be a field".into()));
        }
        if order < 2 {
            return Err(Error::InvalidRing(format!("dual chain order {order} < 2")));
        }
        Ok(Ring::DualChain {
            base: Box::new(base),
            order,
        })
    }

    pub fn is_field(&self) -> bool {
        !matches!(self, Ring::DualChain { .. })
    }

    /// The residue field (the ring itself for fields).
    pub fn residue_field(&self) -> &Ring {
        match self {
            Ring::DualChain { base, .. } => base,
            r => r,
        }
    }

    /// Nilpotency order `m` of `eps`; 1 for fields.
    pub fn nil_order(&self) -> usize {
        match self {
            Ring::DualChain { order, .. } => *order,
            _ => 1,
        }
    }

    /// The ring `k[eps]/(eps^order)` over the same residue field, collapsing
    /// to the field itself for `order == 1`.
    pub fn with_nil_order(&self, order: usize) -> Ring {
        let k = self.residue_field().clone();
        if order <= 1 {
            k
        } else {
            Ring::DualChain {
                base: Box::new(k),
                order,
            }
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Ring::PrimeField(p) => *p,
            Ring::Rationals => 0,
            Ring::DualChain { base, .. } => base.characteristic(),
        }
    }

    pub fn zero(&self) -> Coeff {
        self.from_int(0)
    }

    pub fn one(&self) -> Coeff {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Coeff {
        match self {
            Ring::PrimeField(p) => Coeff::Fp(n.rem_euclid(*p as i64) as u64),
            Ring::Rationals => Coeff::Q(Rational::from_integer(BigInt::from(n))),
            Ring::DualChain { base, order } => {
                let mut v = vec![base.zero(); *order];
                v[0] = base.from_int(n);
                Coeff::Dual(v)
            }
        }
    }

    /// Image of a rational number; fails when the denominator is not
    /// invertible (division by `p` in characteristic `p`).
    pub fn from_rational(&self, r: &Rational) -> Result<Coeff> {
        match self {
            Ring::PrimeField(p) => {
                let pb = BigInt::from(*p);
                let n = r.numer().mod_floor(&pb).to_u64().unwrap();
                let d = r.denom().mod_floor(&pb).to_u64().unwrap();
                if d == 0 {
                    return Err(Error::Semantic(format!(
                        "{} is not defined mod {p}",
                        fmt_rational(r)
                    )));
                }
                Ok(Coeff::Fp(
                    ((n as u128 * mod_pow(d, p - 2, *p) as u128) % *p as u128) as u64,
                ))
            }
            Ring::Rationals => Ok(Coeff::Q(r.clone())),
            Ring::DualChain { base, order } => {
                let mut v = vec![base.zero(); *order];
                v[0] = base.from_rational(r)?;
                Ok(Coeff::Dual(v))
            }
        }
    }

    /// `c * eps^k`; `None` past the nilpotency order or in a field with `k > 0`.
    pub fn eps_power(&self, c: Coeff, k: usize) -> Option<Coeff> {
        match self {
            Ring::DualChain { base, order } if k < *order => {
                let mut v = vec![base.zero(); *order];
                v[k] = c;
                Some(Coeff::Dual(v))
            }
            _ if k == 0 => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self, a: &Coeff) -> bool {
        match a {
            Coeff::Fp(x) => *x == 0,
            Coeff::Q(x) => x.is_zero(),
            Coeff::Dual(v) => {
                let b = self.residue_field();
                v.iter().all(|x| b.is_zero(x))
            }
        }
    }

    pub fn is_one(&self, a: &Coeff) -> bool {
        *a == self.one()
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (Ring::PrimeField(p), Coeff::Fp(x), Coeff::Fp(y)) => {
                let s = x + y;
                Coeff::Fp(if s >= *p { s - p } else { s })
            }
            (Ring::Rationals, Coeff::Q(x), Coeff::Q(y)) => Coeff::Q(x + y),
            (Ring::DualChain { base, .. }, Coeff::Dual(x), Coeff::Dual(y)) => {
                Coeff::Dual(x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect())
            }
            _ => panic!("coefficient does not belong to ring {self}"),
        }
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        match (self, a) {
            (Ring::PrimeField(p), Coeff::Fp(x)) => Coeff::Fp(if *x == 0 { 0 } else { p - x }),
            (Ring::Rationals, Coeff::Q(x)) => Coeff::Q(-x),
            (Ring::DualChain { base, .. }, Coeff::Dual(x)) => {
                Coeff::Dual(x.iter().map(|u| base.neg(u)).collect())
            }
            _ => panic!("coefficient does not belong to ring {self}"),
        }
    }

    pub fn sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (Ring::PrimeField(p), Coeff::Fp(x), Coeff::Fp(y)) => {
                Coeff::Fp(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            (Ring::Rationals, Coeff::Q(x), Coeff::Q(y)) => Coeff::Q(x * y),
            (Ring::DualChain { base, order }, Coeff::Dual(x), Coeff::Dual(y)) => {
                let mut out = vec![base.zero(); *order];
                for (i, u) in x.iter().enumerate() {
                    if base.is_zero(u) {
                        continue;
                    }
                    for (j, v) in y.iter().enumerate().take(order - i) {
                        out[i + j] = base.add(&out[i + j], &base.mul(u, v));
                    }
                }
                Coeff::Dual(out)
            }
            _ => panic!("coefficient does not belong to ring {self}"),
        }
    }

    pub fn pow(&self, a: &Coeff, mut e: u64) -> Coeff {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: &Coeff) -> bool {
        match (self, a) {
            (Ring::DualChain { base, .. }, Coeff::Dual(x)) => !base.is_zero(&x[0]),
            _ => !self.is_zero(a),
        }
    }

    pub fn inv(&self, a: &Coeff) -> Option<Coeff> {
        match (self, a) {
            (Ring::PrimeField(p), Coeff::Fp(x)) => {
                (*x != 0).then(|| Coeff::Fp(mod_pow(*x, p - 2, *p)))
            }
            (Ring::Rationals, Coeff::Q(x)) => (!x.is_zero()).then(|| Coeff::Q(x.recip())),
            (Ring::DualChain { base, order }, Coeff::Dual(x)) => {
                // (a0 (1 + n))^{-1} = a0^{-1} (1 - n + n^2 - ...), n nilpotent
                let a0inv = base.inv(&x[0])?;
                let scaled = self.mul(a, &self.from_base(a0inv.clone()));
                let n = self.sub(&scaled, &self.one());
                let neg_n = self.neg(&n);
                let mut term = self.one();
                let mut acc = self.one();
                for _ in 1..*order {
                    term = self.mul(&term, &neg_n);
                    acc = self.add(&acc, &term);
                }
                Some(self.mul(&acc, &self.from_base(a0inv)))
            }
            _ => panic!("coefficient does not belong to ring {self}"),
        }
    }

    fn from_base(&self, c: Coeff) -> Coeff {
        self.eps_power(c, 0).unwrap()
    }

    /// Index of the first nonzero `eps` coordinate; `nil_order()` for zero.
    /// Fields report 0 for nonzero elements.
    pub fn eps_valuation(&self, a: &Coeff) -> usize {
        match (self, a) {
            (Ring::DualChain { base, order }, Coeff::Dual(x)) => {
                x.iter().position(|u| !base.is_zero(u)).unwrap_or(*order)
            }
            _ => {
                if self.is_zero(a) {
                    1
                } else {
                    0
                }
            }
        }
    }

    /// The quotient map `A -> A/I` onto the residue field.
    pub fn reduce_mod_nilradical(&self, a: &Coeff) -> Result<Coeff> {
        match (self, a) {
            (Ring::DualChain { .. }, Coeff::Dual(x)) => Ok(x[0].clone()),
            _ => Err(Error::NotNilpotentRing),
        }
    }

    /// The zero-padding section of the quotient map.
    pub fn canonical_lift(&self, a: &Coeff) -> Result<Coeff> {
        match self {
            Ring::DualChain { .. } => Ok(self.from_base(a.clone())),
            _ => Err(Error::NotNilpotentRing),
        }
    }

    /// Re-expresses an element of `self` in `target`, which must share the
    /// residue field: coordinates past the target order are dropped and
    /// missing ones are zero.
    pub fn change_nil_order(&self, a: &Coeff, target: &Ring) -> Coeff {
        let k = self.residue_field();
        let coords: Vec<Coeff> = match a {
            Coeff::Dual(x) => x.clone(),
            c => vec![c.clone()],
        };
        match target {
            Ring::DualChain { order, .. } => {
                let mut v: Vec<Coeff> = coords.into_iter().take(*order).collect();
                v.resize(*order, k.zero());
                Coeff::Dual(v)
            }
            _ => coords[0].clone(),
        }
    }

    /// Canonical total order on elements; used to make root choices
    /// deterministic.
    pub fn cmp_canonical(&self, a: &Coeff, b: &Coeff) -> Ordering {
        match (a, b) {
            (Coeff::Fp(x), Coeff::Fp(y)) => x.cmp(y),
            (Coeff::Q(x), Coeff::Q(y)) => x.cmp(y),
            (Coeff::Dual(x), Coeff::Dual(y)) => {
                let k = self.residue_field();
                for (u, v) in x.iter().zip(y) {
                    let o = k.cmp_canonical(u, v);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            }
            _ => panic!("mixed coefficient kinds"),
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeff {
        match self {
            Ring::PrimeField(p) => Coeff::Fp(rng.gen_range(0..*p)),
            Ring::Rationals => {
                let n: i64 = rng.gen_range(-9..=9);
                let d: i64 = rng.gen_range(1..=4);
                Coeff::Q(Rational::new(BigInt::from(n), BigInt::from(d)))
            }
            Ring::DualChain { base, .. } => {
                Coeff::Dual((0..self.nil_order()).map(|_| base.random(rng)).collect())
            }
        }
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeff {
        loop {
            let c = self.random(rng);
            if self.is_unit(&c) {
                return c;
            }
        }
    }

    /// Decomposes an element into `(coordinate, eps power)` pairs with nonzero
    /// field coordinates, lowest power first.
    pub fn eps_parts(&self, a: &Coeff) -> Vec<(Coeff, usize)> {
        match a {
            Coeff::Dual(x) => {
                let k = self.residue_field();
                x.iter()
                    .enumerate()
                    .filter(|(_, u)| !k.is_zero(u))
                    .map(|(i, u)| (u.clone(), i))
                    .collect()
            }
            c if self.is_zero(c) => vec![],
            c => vec![(c.clone(), 0)],
        }
    }

    /// Text form of a field element: residues in `0..p`, fractions in
    /// lowest terms.
    pub fn fmt_field_elem(a: &Coeff) -> String {
        match a {
            Coeff::Fp(x) => x.to_string(),
            Coeff::Q(x) => fmt_rational(x),
            Coeff::Dual(_) => panic!("not a field element"),
        }
    }

    /// Roots in the field of the polynomial `sum_i poly[i] c^i`, sorted by
    /// the canonical order. For `F_p` this is an exhaustive scan; for `Q`
    /// it is a rational-root search.
    pub fn roots_in_field(&self, poly: &[Coeff], expect_nonzero: bool) -> Result<Vec<Coeff>> {
        let mut roots = match self {
            Ring::DualChain { .. } => return Err(Error::NotAField),
            Ring::PrimeField(p) => (0..*p)
                .map(Coeff::Fp)
                .filter(|c| self.is_zero(&self.eval_poly(poly, c)))
                .collect::<Vec<_>>(),
            Ring::Rationals => rational_roots(poly),
        };
        if expect_nonzero {
            roots.retain(|c| !self.is_zero(c));
        }
        roots.sort_by(|a, b| self.cmp_canonical(a, b));
        roots.dedup();
        Ok(roots)
    }

    pub fn eval_poly(&self, poly: &[Coeff], x: &Coeff) -> Coeff {
        poly.iter()
            .rev()
            .fold(self.zero(), |acc, a| self.add(&self.mul(&acc, x), a))
    }
}

fn rational_roots(poly: &[Coeff]) -> Vec<Coeff> {
    let q: Vec<Rational> = poly
        .iter()
        .map(|c| match c {
            Coeff::Q(x) => x.clone(),
            _ => panic!("expected rational coefficients"),
        })
        .collect();
    let Some(deg) = q.iter().rposition(|x| !x.is_zero()) else {
        // zero polynomial: every element is a root; report none rather than
        // an infinite set
        return vec![];
    };
    let mut roots = Vec::new();
    let low = q.iter().position(|x| !x.is_zero()).unwrap();
    if low > 0 {
        roots.push(Coeff::Q(Rational::zero()));
    }
    let q = &q[low..=deg];
    if q.len() == 1 {
        return roots;
    }
    // clear denominators
    let l = q
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = q.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let lead = ints.last().unwrap().abs();
    let constant = ints[0].abs();
    let ps = divisors(&constant);
    let qs = divisors(&lead);
    let mut cands: Vec<Rational> = Vec::new();
    for n in &ps {
        for d in &qs {
            let r = Rational::new(n.clone(), d.clone());
            cands.push(r.clone());
            cands.push(-r);
        }
    }
    for r in cands {
        let v = q
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, a| acc * &r + a);
        if v.is_zero() {
            roots.push(Coeff::Q(r));
        }
    }
    roots
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            out.push(d.clone());
            let e = n / &d;
            if e != d {
                out.push(e);
            }
        }
        d += 1;
    }
    out
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::PrimeField(p) => write!(f, "fp {p}"),
            Ring::Rationals => write!(f, "q"),
            Ring::DualChain { base, order } => write!(f, "dual {base} order {order}"),
        }
    }
}
