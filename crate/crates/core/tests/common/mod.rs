#![allow(dead_code)]

use novikov_core::exponent::{int, rat};
use novikov_core::{Coeff, Prec, Rational, Ring, Series, SeriesMatrix};
use proptest::prelude::*;

pub fn f5() -> Ring {
    Ring::prime_field(5).unwrap()
}

pub fn fields() -> impl Strategy<Value = Ring> {
    prop_oneof![
        Just(f5()),
        Just(Ring::prime_field(7).unwrap()),
        Just(Ring::Rationals)
    ]
}

pub fn rings() -> impl Strategy<Value = Ring> {
    prop_oneof![
        3 => fields(),
        1 => Just(Ring::dual_chain(f5(), 2).unwrap()),
        1 => Just(Ring::dual_chain(Ring::Rationals, 3).unwrap()),
    ]
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// A coefficient of `ring`; denominators are at most 4, so they are units
/// in `F_5` and `F_7`.
pub fn coeff(ring: Ring) -> BoxedStrategy<Coeff> {
    match &ring {
        Ring::DualChain { base, order } => {
            let base = (**base).clone();
            prop::collection::vec(small_rational(), *order)
                .prop_map(move |v| Coeff::Dual(v.iter().map(|r| base.from_rational(r).unwrap()).collect()))
                .boxed()
        }
        _ => small_rational()
            .prop_map(move |r| ring.from_rational(&r).unwrap())
            .boxed(),
    }
}

/// Exponent in `[-2, 2]` with denominator 1, 2 or 4.
pub fn exponent() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(1i64), Just(2), Just(4)].prop_flat_map(|d| (-2 * d..=2 * d).prop_map(move |n| rat(n, d)))
}

pub fn nonzero_exponent() -> impl Strategy<Value = Rational> {
    exponent().prop_filter("nonzero", |e| *e != int(0))
}

pub fn prec() -> impl Strategy<Value = Prec> {
    prop_oneof![Just(Prec::Infinite), (1i64..=6).prop_map(|d| Prec::Finite(int(d)))]
}

pub fn series_with(ring: Ring, nvars: usize, prec: impl Strategy<Value = Prec>) -> impl Strategy<Value = Series> {
    let term = (prop::collection::vec(exponent(), nvars), coeff(ring.clone()));
    (prop::collection::vec(term, 0..=4), prec)
        .prop_map(move |(terms, p)| Series::new(nvars, ring.clone(), terms, p).unwrap())
}

pub fn series(ring: Ring, nvars: usize) -> impl Strategy<Value = Series> {
    series_with(ring, nvars, prec())
}

pub fn exact_series(ring: Ring, nvars: usize) -> impl Strategy<Value = Series> {
    series_with(ring, nvars, Just(Prec::Infinite))
}

/// One elementary factor `I + c t^e E_ij` (`i != j`) with its inverse.
#[derive(Clone, Debug)]
pub struct Transvection {
    pub i: usize,
    pub j: usize,
    pub c: Coeff,
    pub e: Rational,
}

pub fn transvections(ring: Ring, n: usize, max: usize) -> impl Strategy<Value = Vec<Transvection>> {
    let one = (0..n, 1..n.max(2), coeff(ring), exponent()).prop_map(move |(i, k, c, e)| Transvection {
        i,
        j: (i + k) % n,
        c,
        e,
    });
    prop::collection::vec(one, 0..=max)
}

fn elementary(ring: &Ring, n: usize, f: &Transvection, negate: bool) -> SeriesMatrix {
    let mut m = SeriesMatrix::identity(n, 1, ring);
    let c = if negate { ring.neg(&f.c) } else { f.c.clone() };
    m.set(f.i, f.j, Series::monomial(ring.clone(), c, vec![f.e.clone()]));
    m
}

/// The product of the factors and its exact inverse; `n >= 2`.
pub fn unipotent_product(ring: &Ring, n: usize, factors: &[Transvection]) -> (SeriesMatrix, SeriesMatrix) {
    let id = SeriesMatrix::identity(n, 1, ring);
    let x = factors.iter().fold(id.clone(), |acc, f| &acc * &elementary(ring, n, f, false));
    let y = factors.iter().rev().fold(id, |acc, f| &acc * &elementary(ring, n, f, true));
    (x, y)
}

pub fn support_in_origin(s: &Series) -> bool {
    s.terms().all(|(m, _)| m.exps().iter().all(|e| *e == int(0)))
}

pub fn zero_below(m: &SeriesMatrix, prec: &Prec) -> bool {
    m.truncate(prec).is_zero()
}
