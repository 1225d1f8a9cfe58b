//! Seeded random descent data with known trivializations.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`, so an
//! instance is a pure function of its parameters. The hidden trivialization
//! is a product of at most `3 * rank` elementary factors with monomial
//! entries; its inverse is the reversed product of the factor inverses and
//! is therefore exact.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Payload, Problem};
use crate::coeff::{Coeff, Ring};
use crate::descent::coboundary_datum_with_inverse;
use crate::error::{Error, Result};
use crate::exponent::{Monoid, Rational};
use crate::series::{Prec, Series};
use crate::seriesalg::SeriesMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    /// `xi(u)^{-1} xi(t)` for a random invertible `xi`.
    Coboundary,
    /// Over `k[eps]/(eps^m)`: a coboundary of some `xi = I mod eps`, so the
    /// datum is trivial modulo `eps`.
    Nilpotent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub rank: usize,
    pub ring: Ring,
    pub monoid: Monoid,
    pub lambda: Rational,
    pub prec: Rational,
    pub kind: InstanceKind,
}

/// A generated problem with the trivialization it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub problem: Problem,
    pub xi0: SeriesMatrix,
    pub xi0_inv: SeriesMatrix,
}

pub fn generate_instance(params: &GenParams) -> Result<Instance> {
    if params.rank == 0 {
        return Err(Error::Semantic("rank must be at least 1".into()));
    }
    params.monoid.check_admissible(&params.lambda)?;
    if params.kind == InstanceKind::Nilpotent && params.ring.is_field() {
        return Err(Error::NotNilpotentRing);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.rank;
    let ring = &params.ring;
    let count = rng.gen_range(1..=3 * n);
    let mut xi0 = SeriesMatrix::identity(n, 1, ring);
    let mut inverses = Vec::with_capacity(count);
    for _ in 0..count {
        let (f, f_inv) = match params.kind {
            InstanceKind::Coboundary => elementary(&mut rng, params),
            InstanceKind::Nilpotent => nilpotent_elementary(&mut rng, params),
        };
        xi0 = &xi0 * &f;
        inverses.push(f_inv);
    }
    let xi0_inv = inverses
        .iter()
        .rev()
        .fold(SeriesMatrix::identity(n, 1, ring), |acc, f| &acc * f);
    let d = coboundary_datum_with_inverse(&xi0, &xi0_inv, params.monoid.clone(), params.prec.clone())?;
    let problem = Problem {
        ring: ring.clone(),
        monoid: params.monoid.clone(),
        lambda: params.lambda.clone(),
        prec: params.prec.clone(),
        rank: n,
        payload: Payload::Phi(d.phi().clone()),
    };
    Ok(Instance {
        problem,
        xi0,
        xi0_inv,
    })
}

/// Allowed exponent denominators: 1, p, p^2 for `Z[1/p]`.
fn denominators(monoid: &Monoid) -> Vec<i64> {
    match monoid {
        Monoid::Z => vec![1],
        Monoid::Zinv(p) => {
            let p = *p as i64;
            vec![1, p, p * p]
        }
        Monoid::Q => vec![1, 2, 3, 4],
    }
}

/// Uniform over the exponents in `[-2, 2]` with an allowed denominator.
fn exponent<R: Rng>(rng: &mut R, monoid: &Monoid) -> Rational {
    let dens = denominators(monoid);
    let d = dens[rng.gen_range(0..dens.len())];
    let n = rng.gen_range(-2 * d..=2 * d);
    Rational::new(n.into(), d.into())
}

fn monomial(ring: &Ring, c: Coeff, e: Rational) -> Series {
    Series::monomial(ring.clone(), c, vec![e])
}

fn with_entry(n: usize, ring: &Ring, i: usize, j: usize, s: Series) -> SeriesMatrix {
    let mut m = SeriesMatrix::identity(n, 1, ring);
    m.set(i, j, s);
    m
}

fn distinct_pair<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    (i, j)
}

/// A transvection, a unit monomial on the diagonal, or a swap.
fn elementary<R: Rng>(rng: &mut R, params: &GenParams) -> (SeriesMatrix, SeriesMatrix) {
    let n = params.rank;
    let ring = &params.ring;
    let choice = if n == 1 { 3 } else { rng.gen_range(0..5) };
    match choice {
        0..=2 => {
            let (i, j) = distinct_pair(rng, n);
            let c = ring.random_unit(rng);
            let e = exponent(rng, &params.monoid);
            let f = with_entry(n, ring, i, j, monomial(ring, c.clone(), e.clone()));
            let f_inv = with_entry(n, ring, i, j, monomial(ring, ring.neg(&c), e));
            (f, f_inv)
        }
        3 => {
            let i = rng.gen_range(0..n);
            let c = ring.random_unit(rng);
            let e = exponent(rng, &params.monoid);
            let c_inv = ring.inv(&c).expect("unit");
            let f = with_entry(n, ring, i, i, monomial(ring, c, e.clone()));
            let f_inv = with_entry(n, ring, i, i, monomial(ring, c_inv, -e));
            (f, f_inv)
        }
        _ => {
            let (i, j) = distinct_pair(rng, n);
            let zero = Series::zero(1, ring.clone(), Prec::Infinite);
            let one = Series::one(1, ring.clone());
            let mut f = SeriesMatrix::identity(n, 1, ring);
            f.set(i, i, zero.clone());
            f.set(j, j, zero);
            f.set(i, j, one.clone());
            f.set(j, i, one);
            (f.clone(), f)
        }
    }
}

/// `I + c eps^k t^e E_ij` with `k >= 1`; its inverse is the finite
/// geometric series in the nilpotent part.
fn nilpotent_elementary<R: Rng>(rng: &mut R, params: &GenParams) -> (SeriesMatrix, SeriesMatrix) {
    let n = params.rank;
    let ring = &params.ring;
    let m = ring.nil_order();
    let i = rng.gen_range(0..n);
    let j = rng.gen_range(0..n);
    let k = rng.gen_range(1..m);
    let c = ring.residue_field().random_unit(rng);
    let c = ring.eps_power(c, k).expect("k below the nilpotency order");
    let e = exponent(rng, &params.monoid);
    let id = SeriesMatrix::identity(n, 1, ring);
    let mut nil = SeriesMatrix::zeros(n, n, 1, ring);
    nil.set(i, j, monomial(ring, c, e));
    let f = &id + &nil;
    let neg = nil.negate();
    let mut f_inv = id.clone();
    let mut power = id;
    for _ in 1..m {
        power = &power * &neg;
        f_inv = &f_inv + &power;
    }
    (f, f_inv)
}
