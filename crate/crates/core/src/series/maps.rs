use num_traits::Zero;

use super::{Monomial, Series};
use crate::error::{Error, Result};
use crate::exponent::{Monoid, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A substitution of variables `x_i -> y_{images[i]}` from a ring in
/// `source` variables to one in `target` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarMap {
    source: usize,
    target: usize,
    images: Vec<usize>,
}

impl VarMap {
    pub fn new(source: usize, target: usize, images: Vec<usize>) -> Result<VarMap> {
        if images.len() != source {
            return Err(Error::ArityMismatch {
                expected: source,
                found: images.len(),
            });
        }
        let mut seen = vec![false; target];
        for &i in &images {
            if i >= target || seen[i] {
                return Err(Error::Semantic(format!(
                    "variable map {images:?} is not injective into {target} variables"
                )));
            }
            seen[i] = true;
        }
        Ok(VarMap {
            source,
            target,
            images,
        })
    }

    fn fixed(source: usize, target: usize, images: &[usize]) -> VarMap {
        VarMap::new(source, target, images.to_vec()).expect("built-in variable map")
    }

    /// `t -> t`
    pub fn pi1() -> VarMap {
        VarMap::fixed(1, 2, &[0])
    }

    /// `t -> u`
    pub fn pi2() -> VarMap {
        VarMap::fixed(1, 2, &[1])
    }

    /// `t -> t, u -> u`
    pub fn pi12() -> VarMap {
        VarMap::fixed(2, 3, &[0, 1])
    }

    /// `t -> t, u -> v`
    pub fn pi13() -> VarMap {
        VarMap::fixed(2, 3, &[0, 2])
    }

    /// `t -> u, u -> v`
    pub fn pi23() -> VarMap {
        VarMap::fixed(2, 3, &[1, 2])
    }

    /// `t -> t` into three variables.
    pub fn rho1() -> VarMap {
        VarMap::pi1().then(&VarMap::pi12())
    }

    /// `t -> u` into three variables.
    pub fn rho2() -> VarMap {
        VarMap::pi2().then(&VarMap::pi12())
    }

    /// `t -> v` into three variables.
    pub fn rho3() -> VarMap {
        VarMap::pi2().then(&VarMap::pi13())
    }

    /// Swaps `t` and `u` in two variables.
    pub fn swap() -> VarMap {
        VarMap::fixed(2, 2, &[1, 0])
    }

    /// The composite "first `self`, then `next`" (as ring maps,
    /// `next ∘ self`).
    pub fn then(&self, next: &VarMap) -> VarMap {
        assert_eq!(self.target, next.source, "variable maps do not compose");
        VarMap {
            source: self.source,
            target: next.target,
            images: self.images.iter().map(|&i| next.images[i]).collect(),
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

impl Series {
    /// Scales the exponents of the listed variables by `factor`. The
    /// precision scales with the factor when every variable is scaled and is
    /// kept otherwise.
    pub fn scale_exponents(&self, factor: &Rational, vars: &[usize]) -> Series {
        let all = (0..self.nvars).all(|i| vars.contains(&i));
        let prec = if all {
            self.prec.scale(factor)
        } else {
            self.prec.clone()
        };
        let mut out = Series::zero(self.nvars, self.ring.clone(), prec);
        for (m, c) in &self.terms {
            let exps = m
                .exps()
                .iter()
                .enumerate()
                .map(|(i, e)| if vars.contains(&i) { e * factor } else { e.clone() })
                .collect();
            out.add_term(Monomial::new(exps), c.clone());
        }
        out
    }

    /// The twist `F`: every exponent multiplied by `lambda` (or by
    /// `1/lambda` for [`Direction::Inverse`]).
    pub fn frobenius(&self, lambda: &Rational, dir: Direction) -> Series {
        let vars: Vec<usize> = (0..self.nvars).collect();
        self.scale_exponents(&factor(lambda, dir), &vars)
    }

    /// The two- and three-variable twists `F_2`, `F_3`: only the last
    /// variable is scaled.
    pub fn frobenius_last(&self, lambda: &Rational, dir: Direction) -> Series {
        self.scale_exponents(&factor(lambda, dir), &[self.nvars - 1])
    }

    /// [`Series::frobenius`] after checking that the monoid is preserved.
    pub fn frobenius_in(&self, monoid: &Monoid, lambda: &Rational, dir: Direction) -> Result<Series> {
        check_stable(monoid, lambda, dir)?;
        Ok(self.frobenius(lambda, dir))
    }

    pub fn rename_vars(&self, map: &VarMap) -> Result<Series> {
        if map.source != self.nvars {
            return Err(Error::ArityMismatch {
                expected: map.source,
                found: self.nvars,
            });
        }
        let mut out = Series::zero(map.target, self.ring.clone(), self.prec.clone());
        for (m, c) in &self.terms {
            let mut exps = vec![Rational::zero(); map.target];
            for (i, e) in m.exps().iter().enumerate() {
                exps[map.images[i]] = e.clone();
            }
            out.add_term(Monomial::new(exps), c.clone());
        }
        Ok(out)
    }

    /// Collects the terms whose `var` exponent equals `value` and deletes
    /// that coordinate. Precision drops by `value`.
    pub fn slice_coefficient(&self, var: usize, value: &Rational) -> Result<Series> {
        if self.nvars < 2 || var >= self.nvars {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: self.nvars,
            });
        }
        let prec = self.prec.shift(&-value);
        let mut out = Series::zero(self.nvars - 1, self.ring.clone(), prec);
        for (m, c) in &self.terms {
            if &m.exps()[var] == value {
                let mut exps = m.exps().to_vec();
                exps.remove(var);
                out.add_term(Monomial::new(exps), c.clone());
            }
        }
        Ok(out)
    }

    /// Whether every support point has exponent 0 in `var`.
    pub fn independent_of(&self, var: usize) -> bool {
        self.terms.keys().all(|m| m.exps()[var].is_zero())
    }
}

fn factor(lambda: &Rational, dir: Direction) -> Rational {
    match dir {
        Direction::Forward => lambda.clone(),
        Direction::Inverse => lambda.recip(),
    }
}

pub(crate) fn check_stable(monoid: &Monoid, lambda: &Rational, dir: Direction) -> Result<()> {
    if monoid.stable_under(&factor(lambda, dir)) {
        Ok(())
    } else {
        Err(Error::MonoidNotStable {
            lambda: crate::exponent::fmt_rational(&factor(lambda, dir)),
            monoid: monoid.to_string(),
        })
    }
}
