//! Exact rational exponents and the exponent monoids they live in.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The additive group of allowed exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Monoid {
    Z,
    /// `Z[1/p]`
    Zinv(u64),
    Q,
}

impl Monoid {
    pub fn zinv(p: u64) -> Result<Monoid> {
        if p < 2 {
            return Err(Error::Semantic(format!("Z[1/{p}] needs p >= 2")));
        }
        Ok(Monoid::Zinv(p))
    }

    pub fn contains(&self, r: &Rational) -> bool {
        match self {
            Monoid::Z => r.is_integer(),
            Monoid::Q => true,
            Monoid::Zinv(p) => divides_power_of(r.denom(), *p),
        }
    }

    /// Whether `lambda * self` is contained in `self`.
    pub fn stable_under(&self, lambda: &Rational) -> bool {
        match self {
            Monoid::Q => true,
            Monoid::Z => lambda.is_integer(),
            // 1 lies in the monoid, so stability forces lambda into it.
            Monoid::Zinv(p) => divides_power_of(lambda.denom(), *p),
        }
    }

    /// Checks that both `lambda` and `1/lambda` preserve the monoid.
    pub fn check_admissible(&self, lambda: &Rational) -> Result<()> {
        if lambda <= &Rational::one() {
            return Err(Error::Semantic(format!(
                "lambda must exceed 1, got {}",
                fmt_rational(lambda)
            )));
        }
        if !self.stable_under(lambda) || !self.stable_under(&lambda.recip()) {
            return Err(Error::MonoidNotStable {
                lambda: fmt_rational(lambda),
                monoid: self.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monoid::Z => write!(f, "z"),
            Monoid::Zinv(p) => write!(f, "zp {p}"),
            Monoid::Q => write!(f, "q"),
        }
    }
}

/// True when every prime factor of `n` divides `p`.
fn divides_power_of(n: &BigInt, p: u64) -> bool {
    let p = BigInt::from(p);
    let mut n = n.abs();
    if n.is_zero() {
        return false;
    }
    loop {
        if n.is_one() {
            return true;
        }
        let g = n.gcd(&p);
        if g.is_one() {
            return false;
        }
        while (&n % &g).is_zero() {
            n /= &g;
        }
    }
}

/// Canonical representative of the orbit `{ e * lambda^k : k in Z }` for
/// `e != 0`: the unique element with absolute value in `[1, lambda)`.
pub fn orbit_representative(e: &Rational, lambda: &Rational) -> (Rational, i64) {
    debug_assert!(!e.is_zero());
    let mut r = e.clone();
    let mut k = 0i64;
    let one = Rational::one();
    while r.abs() < one {
        r *= lambda;
        k -= 1;
    }
    while &r.abs() >= lambda {
        r /= lambda;
        k += 1;
    }
    // e = r * lambda^k
    (r, k)
}

/// `base^k` for any integer `k`; `base` must be nonzero when `k < 0`.
pub fn rational_pow(base: &Rational, k: i64) -> Rational {
    let b = if k < 0 { base.recip() } else { base.clone() };
    num_traits::pow(b, k.unsigned_abs() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let g = Monoid::Zinv(2);
        assert!(g.contains(&rat(1, 2)));
        assert!(g.contains(&rat(-3, 8)));
        assert!(!g.contains(&rat(1, 3)));
        assert!(Monoid::Zinv(6).contains(&rat(1, 12)));
        assert!(Monoid::Z.contains(&int(-4)));
        assert!(!Monoid::Z.contains(&rat(1, 2)));
        assert!(Monoid::Q.contains(&rat(5, 7)));
    }

    #[test]
    fn admissibility() {
        assert!(Monoid::Zinv(2).check_admissible(&int(2)).is_ok());
        assert!(Monoid::Zinv(3).check_admissible(&int(2)).is_err());
        assert!(Monoid::Z.check_admissible(&int(2)).is_err());
        assert!(Monoid::Q.check_admissible(&rat(3, 2)).is_ok());
        assert!(Monoid::Q.check_admissible(&int(1)).is_err());
    }

    #[test]
    fn orbit_reps() {
        let two = int(2);
        assert_eq!(orbit_representative(&int(-1), &two), (int(-1), 0));
        assert_eq!(orbit_representative(&int(-4), &two), (int(-1), 2));
        assert_eq!(orbit_representative(&rat(3, 4), &two), (rat(3, 2), -1));
        assert_eq!(orbit_representative(&int(12), &two), (rat(3, 2), 3));
    }
}
