//! The scalar equation `z - F(z) = c` in one variable.
//!
//! Coefficientwise it reads `z_e - z_{e/lambda} = c_e`, so it splits along the
//! orbits `{ r lambda^k }` of multiplication by `lambda`. Finiteness of the
//! support below every bound forces `z` to vanish near 0 on every orbit, and
//! also towards `-inf` on negative orbits: a negative orbit is solvable iff
//! the coefficients of `c` along it sum to zero. The exponent 0 needs
//! `c_0 = 0`. Positive orbits are always solvable, with an eventually
//! constant tail equal to the orbit sum.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{Monomial, Prec, Series};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, orbit_representative, rational_pow, Monoid, Rational};

/// A λ-orbit meeting the support of `c` whose coefficient sum is nonzero,
/// or the exponent 0 with `c_0 != 0` (representative 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    /// Element of the orbit with absolute value in `[1, lambda)`, or 0.
    pub representative: Rational,
    /// Support points of `c` on the orbit, ascending.
    pub exponents: Vec<Rational>,
    pub orbit_sum: Coeff,
}

impl Obstruction {
    /// Recomputes the orbit sum directly from `c`, independently of the
    /// solver's bookkeeping.
    pub fn verify(&self, c: &Series, lambda: &Rational) -> bool {
        let ring = c.ring();
        let mut sum = ring.zero();
        for (m, a) in c.terms() {
            let e = &m.exps()[0];
            let on_orbit = if self.representative.is_zero() {
                e.is_zero()
            } else {
                !e.is_zero() && same_orbit(e, &self.representative, lambda)
            };
            if on_orbit {
                sum = ring.add(&sum, a);
            }
        }
        !ring.is_zero(&sum) && sum == self.orbit_sum
    }
}

fn same_orbit(a: &Rational, b: &Rational, lambda: &Rational) -> bool {
    a.is_negative() == b.is_negative()
        && orbit_representative(a, lambda).0 == orbit_representative(b, lambda).0
}

impl std::fmt::Display for Obstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "orbit of {}", fmt_rational(&self.representative))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwistSolution {
    Solved(Series),
    Unsolvable(Obstruction),
}

impl Series {
    /// Solves `z - F(z) = self` over a field of coefficients.
    ///
    /// The solution is normalized to have no constant term. Output precision
    /// equals the precision of `self`; a positive orbit with nonzero sum
    /// needs that precision to be finite.
    pub fn solve_additive_twist(&self, lambda: &Rational, monoid: &Monoid) -> Result<TwistSolution> {
        if self.nvars != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                found: self.nvars,
            });
        }
        if !self.ring.is_field() {
            return Err(Error::NotAField);
        }
        monoid.check_admissible(lambda)?;
        if let Prec::Finite(d) = &self.prec {
            if !d.is_positive() {
                return Err(Error::PrecisionExhausted(
                    "negative orbits are not determined at precision <= 0".into(),
                ));
            }
        }
        let ring = &self.ring;

        // representative -> (k -> coefficient), with e = rep * lambda^k
        let mut orbits: BTreeMap<Rational, BTreeMap<i64, Coeff>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = &m.exps()[0];
            if e.is_zero() {
                return Ok(TwistSolution::Unsolvable(Obstruction {
                    representative: Rational::zero(),
                    exponents: vec![Rational::zero()],
                    orbit_sum: c.clone(),
                }));
            }
            let (rep, k) = orbit_representative(e, lambda);
            orbits.entry(rep).or_default().insert(k, c.clone());
        }

        for (rep, coeffs) in &orbits {
            if rep.is_negative() {
                let sum = coeffs.values().fold(ring.zero(), |a, c| ring.add(&a, c));
                if !ring.is_zero(&sum) {
                    let mut exponents: Vec<Rational> = coeffs
                        .keys()
                        .map(|k| rep * rational_pow(lambda, *k))
                        .collect();
                    exponents.sort();
                    return Ok(TwistSolution::Unsolvable(Obstruction {
                        representative: rep.clone(),
                        exponents,
                        orbit_sum: sum,
                    }));
                }
            }
        }

        let mut z = Series::zero(1, ring.clone(), self.prec.clone());
        for (rep, coeffs) in &orbits {
            let kmin = *coeffs.keys().next().unwrap();
            let kmax = *coeffs.keys().next_back().unwrap();
            let mut partial = ring.zero();
            let mut k = kmin;
            loop {
                if let Some(c) = coeffs.get(&k) {
                    partial = ring.add(&partial, c);
                }
                let e = rep * rational_pow(lambda, k);
                if rep.is_negative() {
                    if k >= kmax {
                        // orbit sum is zero from here on
                        break;
                    }
                } else if k >= kmax {
                    if ring.is_zero(&partial) {
                        break;
                    }
                    if self.prec.is_infinite() {
                        return Err(Error::PrecisionExhausted(format!(
                            "solution has an infinite tail on the orbit of {}",
                            fmt_rational(rep)
                        )));
                    }
                    if !self.prec.admits(&e) {
                        break;
                    }
                }
                z.add_term(Monomial::new(vec![e]), partial.clone());
                k += 1;
            }
        }
        Ok(TwistSolution::Solved(z))
    }
}
