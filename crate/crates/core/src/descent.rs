//! Descent data `(M, phi)` on free modules and the passage to isocrystals.
//!
//! Conventions: `phi` is a matrix over the two-variable ring in `(t, u)`,
//! `pi1: t -> t`, `pi2: t -> u`. A trivialization `xi` satisfies
//! `phi(t, u) = xi(u)^{-1} xi(t)`, and the associated isocrystal has
//! `B = xi^{-1} F(xi)`.

use num_traits::Zero;

use crate::coeff::Ring;
use crate::error::{Error, Result};
use crate::exponent::{Monoid, Rational};
use crate::isocrystal::Isocrystal;
use crate::series::{Direction, Prec, VarMap};
use crate::seriesalg::SeriesMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentDatum {
    rank: usize,
    ring: Ring,
    monoid: Monoid,
    phi: SeriesMatrix,
    phi_inv: SeriesMatrix,
    prec: Rational,
}

/// Outcome of an identity check up to precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    Pass,
    /// The difference of the two sides.
    Fail(SeriesMatrix),
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }

    /// Pass iff `residual` has no stored term below `prec`.
    pub(crate) fn from_residual(residual: SeriesMatrix, prec: &Prec) -> Check {
        if residual.truncate(prec).is_zero() {
            Check::Pass
        } else {
            Check::Fail(residual.truncate(prec))
        }
    }
}

/// A trivializing matrix of a descent datum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trivialization {
    pub xi: SeriesMatrix,
    pub prec: Rational,
}

impl DescentDatum {
    /// Wraps `phi`, computing its inverse.
    ///
    /// For a cocycle `phi(u, t) phi(t, u) = phi(t, t) = I`, so the swapped
    /// matrix is tried first; it is accepted only after the product is
    /// checked. Otherwise the inverse is computed by elimination at `prec`.
    pub fn new(phi: SeriesMatrix, monoid: Monoid, prec: Rational) -> Result<DescentDatum> {
        if phi.nvars() != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: phi.nvars(),
            });
        }
        if !phi.is_square() {
            return Err(Error::ShapeMismatch("descent datum must be square".into()));
        }
        let target = Prec::Finite(prec.clone());
        let swapped = phi.rename_vars(&VarMap::swap())?;
        let phi_inv = if phi.mul_to(&swapped, &target)?.is_identity_up_to_prec()
            && swapped.mul_to(&phi, &target)?.is_identity_up_to_prec()
        {
            swapped
        } else {
            match phi.invert() {
                Ok(inv) => inv,
                Err(Error::PrecisionExhausted(_)) if phi.is_exact() => {
                    phi.truncate(&target).invert()?
                }
                Err(e) => return Err(e),
            }
        };
        Ok(DescentDatum::with_inverse(phi, phi_inv, monoid, prec))
    }

    /// Wraps `phi` together with a known inverse.
    pub fn with_inverse(
        phi: SeriesMatrix,
        phi_inv: SeriesMatrix,
        monoid: Monoid,
        prec: Rational,
    ) -> DescentDatum {
        DescentDatum {
            rank: phi.rows(),
            ring: phi.ring().clone(),
            monoid,
            phi,
            phi_inv,
            prec,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    pub fn phi(&self) -> &SeriesMatrix {
        &self.phi
    }

    pub fn phi_inv(&self) -> &SeriesMatrix {
        &self.phi_inv
    }

    pub fn prec(&self) -> &Rational {
        &self.prec
    }

    pub(crate) fn target(&self) -> Prec {
        Prec::Finite(self.prec.clone())
    }

    /// Same datum with a different comparison precision.
    pub fn with_prec(&self, prec: Rational) -> DescentDatum {
        DescentDatum {
            prec,
            ..self.clone()
        }
    }

    /// Applies a coefficient map (for instance reduction modulo a nilpotent
    /// ideal) to `phi` and its inverse.
    pub fn map_coeffs<F>(&self, ring: &Ring, f: F) -> DescentDatum
    where
        F: Fn(&crate::coeff::Coeff) -> crate::coeff::Coeff,
    {
        DescentDatum::with_inverse(
            self.phi.map_coeffs(ring, &f),
            self.phi_inv.map_coeffs(ring, &f),
            self.monoid.clone(),
            self.prec.clone(),
        )
    }
}

/// The datum `(A^n, id)`.
pub fn trivial_datum(n: usize, ring: &Ring, monoid: Monoid, prec: Rational) -> DescentDatum {
    let id = SeriesMatrix::identity(n, 2, ring);
    DescentDatum::with_inverse(id.clone(), id, monoid, prec)
}

/// `phi(t, u) = xi(u)^{-1} xi(t)`.
pub fn coboundary_datum(xi: &SeriesMatrix, monoid: Monoid, prec: Rational) -> Result<DescentDatum> {
    let xi_inv = match xi.invert() {
        Err(Error::PrecisionExhausted(_)) if xi.is_exact() => {
            xi.truncate(&Prec::Finite(prec.clone())).invert()?
        }
        r => r?,
    };
    coboundary_datum_with_inverse(xi, &xi_inv, monoid, prec)
}

/// [`coboundary_datum`] when the inverse of `xi` is already known.
pub fn coboundary_datum_with_inverse(
    xi: &SeriesMatrix,
    xi_inv: &SeriesMatrix,
    monoid: Monoid,
    prec: Rational,
) -> Result<DescentDatum> {
    check_one_variable_square(xi)?;
    let xi_t = xi.rename_vars(&VarMap::pi1())?;
    let xi_u = xi.rename_vars(&VarMap::pi2())?;
    let inv_t = xi_inv.rename_vars(&VarMap::pi1())?;
    let inv_u = xi_inv.rename_vars(&VarMap::pi2())?;
    let phi = inv_u.try_mul(&xi_t)?;
    let phi_inv = inv_t.try_mul(&xi_u)?;
    Ok(DescentDatum::with_inverse(phi, phi_inv, monoid, prec))
}

fn check_one_variable_square(m: &SeriesMatrix) -> Result<()> {
    if m.nvars() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: m.nvars(),
        });
    }
    if !m.is_square() {
        return Err(Error::ShapeMismatch("expected a square matrix".into()));
    }
    Ok(())
}

/// Checks `pi23(phi) * pi12(phi) = pi13(phi)` below the datum precision.
pub fn check_cocycle(d: &DescentDatum) -> Result<Check> {
    let target = d.target();
    let a = d.phi.rename_vars(&VarMap::pi23())?;
    let b = d.phi.rename_vars(&VarMap::pi12())?;
    let c = d.phi.rename_vars(&VarMap::pi13())?;
    let residual = a.mul_to(&b, &target)?.try_sub(&c)?;
    let prec = residual.prec().min(target);
    Ok(Check::from_residual(residual, &prec))
}

/// The isocrystal `(M, F_M)` of a descent datum.
///
/// Its matrix is `B(u) = phi(t, u) phi(t, u^lambda)^{-1}`, which is
/// independent of `t` for a genuine cocycle; `B^{-1}` comes from
/// `phi(t, u^lambda) phi(t, u)^{-1}` the same way.
pub fn isocrystal_from_descent(d: &DescentDatum, lambda: &Rational) -> Result<Isocrystal> {
    d.monoid.check_admissible(lambda)?;
    let b2 = d
        .phi
        .try_mul(&d.phi_inv.frobenius_last(lambda, Direction::Forward))?;
    let b2_inv = d
        .phi
        .frobenius_last(lambda, Direction::Forward)
        .try_mul(&d.phi_inv)?;
    let b = collapse_t_independent(&b2, &d.target())?;
    let b_inv = collapse_t_independent(&b2_inv, &d.target())?;
    Ok(Isocrystal::with_inverse(
        b,
        b_inv,
        lambda.clone(),
        d.monoid.clone(),
        d.prec.clone(),
    ))
}

/// Checks that no term below the precision involves `t`, then keeps the
/// `t^0` slice as a one-variable matrix.
fn collapse_t_independent(m: &SeriesMatrix, target: &Prec) -> Result<SeriesMatrix> {
    let cut = m.prec().min(target.clone());
    for s in m.entries() {
        for (mono, _) in s.terms() {
            if !mono.exps()[0].is_zero() && cut.admits(mono.weight()) {
                return Err(Error::NotDescentDatum(format!(
                    "twisted matrix depends on t (term of weight {})",
                    crate::exponent::fmt_rational(mono.weight())
                )));
            }
        }
    }
    m.slice_coefficient(0, &Rational::zero())
}

/// Whether `f: M_src -> M_tgt` is compatible with the descent data:
/// `pi2(f) phi_src = phi_tgt pi1(f)` below the smaller precision.
pub fn check_hom_descent(f: &SeriesMatrix, src: &DescentDatum, tgt: &DescentDatum) -> Result<bool> {
    if f.nvars() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: f.nvars(),
        });
    }
    if f.rows() != tgt.rank || f.cols() != src.rank {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} map between ranks {} and {}",
            f.rows(),
            f.cols(),
            src.rank,
            tgt.rank
        )));
    }
    let target = Prec::Finite(src.prec.clone().min(tgt.prec.clone()));
    let f1 = f.rename_vars(&VarMap::pi1())?;
    let f2 = f.rename_vars(&VarMap::pi2())?;
    let lhs = f2.mul_to(&src.phi, &target)?;
    let rhs = tgt.phi.mul_to(&f1, &target)?;
    Ok(lhs.eq_up_to_prec(&rhs))
}
