use super::{Prec, Series};
use crate::coeff::Ring;
use crate::error::{Error, Result};

impl Series {
    /// The dominant monomial: the unique support point of least total weight,
    /// provided its coefficient is a unit.
    pub fn dominant_term(&self) -> Option<(&super::Monomial, &crate::coeff::Coeff)> {
        let mut it = self.terms.iter();
        let (m0, c0) = it.next()?;
        if let Some((m1, _)) = it.next() {
            if m1.weight() == m0.weight() {
                return None;
            }
        }
        self.ring.is_unit(c0).then_some((m0, c0))
    }

    /// Multiplicative inverse.
    ///
    /// Around a dominant monomial `c t^e` the inverse is
    /// `c^{-1} t^{-e} (1 + h)^{-1}` with `h` of positive weight, expanded as a
    /// geometric series; output precision is `D - 2 w_min`. Over `k[eps]/(eps^m)`
    /// a leading coefficient may be nilpotent; then the residue series is
    /// inverted and the result corrected by the finite sum
    /// `y0 (1 + n + ... + n^{m-1})` with `n = 1 - x y0` nilpotent.
    pub fn invert(&self) -> Result<Series> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero series".into()));
        }
        if let Some((m0, c0)) = self.dominant_term() {
            return self.invert_dominant(m0.exps().to_vec(), c0.clone());
        }
        if let Ring::DualChain { .. } = &self.ring {
            return self.invert_via_residue();
        }
        Err(Error::NotInvertible(format!(
            "no dominant monomial in {self}"
        )))
    }

    fn invert_dominant(&self, e0: Vec<super::Rational>, c0: crate::coeff::Coeff) -> Result<Series> {
        let ring = &self.ring;
        let cinv = ring.inv(&c0).expect("dominant coefficient is a unit");
        let neg_e0: Vec<_> = e0.iter().map(|e| -e).collect();
        let normalized = self.shift(&neg_e0).scale(&cinv);
        let one = Series::one(self.nvars, ring.clone());
        let h = &normalized - &one;
        let p = normalized.prec.clone();
        if p.is_infinite() && h.terms.values().any(|c| ring.eps_valuation(c) == 0) {
            return Err(Error::PrecisionExhausted(format!(
                "inverse of exact {self} is an infinite series"
            )));
        }
        let neg_h = h.negate();
        let mut acc = one.truncate(&p);
        let mut term = one;
        loop {
            term = &term * &neg_h;
            term = term.truncate(&p);
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        let y = acc.scale(&cinv).shift(&neg_e0);
        if let (Some(d), Prec::Finite(w)) = (y.prec.finite(), y.w_min()) {
            if d <= &w {
                return Err(Error::PrecisionExhausted(format!("inverse of {self}")));
            }
        }
        Ok(y)
    }

    fn invert_via_residue(&self) -> Result<Series> {
        let ring = self.ring.clone();
        let k = ring.residue_field().clone();
        let reduced = self.map_coeffs(&k, |c| ring.reduce_mod_nilradical(c).unwrap());
        let ybar = reduced.invert()?;
        let y0 = ybar.map_coeffs(&ring, |c| ring.canonical_lift(c).unwrap());
        let one = Series::one(self.nvars, ring.clone());
        let n = &one - &(self * &y0);
        let mut acc = one.clone();
        let mut term = one;
        for _ in 1..ring.nil_order() {
            term = &term * &n;
            acc = &acc + &term;
        }
        let y = &y0 * &acc;
        if y.is_zero() {
            return Err(Error::PrecisionExhausted(format!("inverse of {self}")));
        }
        Ok(y)
    }

    /// Whether the series is a unit at its precision, judged by its residue:
    /// some coefficient off the nilradical, with a dominant residue term.
    pub fn is_invertible(&self) -> bool {
        if self.dominant_term().is_some() {
            return true;
        }
        match &self.ring {
            Ring::DualChain { .. } => {
                let k = self.ring.residue_field().clone();
                let r = self.map_coeffs(&k, |c| self.ring.reduce_mod_nilradical(c).unwrap());
                r.dominant_term().is_some()
            }
            _ => false,
        }
    }
}
