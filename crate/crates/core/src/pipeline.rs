//! Effective descent: from a descent datum to a trivializing matrix, or a
//! certified reason why none exists.
//!
//! Over a field the datum is turned into its isocrystal and trivialized
//! there. Over `k[eps]/(eps^m)` the datum is first descended modulo `eps`
//! and the result is lifted one power of `eps` at a time.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::coeff::{Coeff, Ring};
use crate::descent::{check_cocycle, isocrystal_from_descent, Check, DescentDatum, Trivialization};
use crate::error::{Error, Result};
use crate::exponent::{Monoid, Rational};
use crate::isocrystal::{
    trivialize_isocrystal_field, trivialize_with_filtration, Effectivity, Filtration,
};
use crate::series::{Monomial, Prec, Series, VarMap};
use crate::seriesalg::SeriesMatrix;

/// Descends `d` along `t -> t^lambda`.
pub fn descend(d: &DescentDatum, lambda: &Rational) -> Result<Effectivity<Trivialization>> {
    d.monoid().check_admissible(lambda)?;
    if !check_cocycle(d)?.passed() {
        return Err(Error::CocycleViolated);
    }
    let verdict = if d.ring().is_field() {
        descend_field(d, lambda)?
    } else {
        descend_dual_chain(d, lambda)?
    };
    Ok(match verdict {
        Effectivity::Effective(xi) => Effectivity::Effective(Trivialization {
            xi,
            prec: d.prec().clone(),
        }),
        Effectivity::NotEffective(reason) => Effectivity::NotEffective(reason),
    })
}

fn descend_field(d: &DescentDatum, lambda: &Rational) -> Result<Effectivity<SeriesMatrix>> {
    let iso = isocrystal_from_descent(d, lambda)?;
    let verdict = match fixed_vector_filtration(d)? {
        Some(filt) => match trivialize_with_filtration(&iso, &filt) {
            Err(Error::PrecisionExhausted(_)) => trivialize_isocrystal_field(&iso)?,
            r => r?,
        },
        None => trivialize_isocrystal_field(&iso)?,
    };
    let Effectivity::Effective(xi) = verdict else {
        return Ok(verdict);
    };
    let xi = normalize(&xi);
    certify(d, &xi)?;
    Ok(Effectivity::Effective(xi))
}

fn descend_dual_chain(d: &DescentDatum, lambda: &Rational) -> Result<Effectivity<SeriesMatrix>> {
    let ring = d.ring().clone();
    let k = ring.residue_field().clone();
    let reduced = d.map_coeffs(&k, |c| ring.reduce_mod_nilradical(c).expect("dual chain element"));
    let mut xi = match descend_field(&reduced, lambda)? {
        Effectivity::Effective(xi) => xi,
        not => return Ok(not),
    };
    for order in 2..=ring.nil_order() {
        let step = ring.with_nil_order(order);
        let d_step = d.map_coeffs(&step, |c| ring.change_nil_order(c, &step));
        xi = lift_trivialization_square_zero(&d_step, &xi)?;
    }
    let xi = normalize(&xi);
    certify(d, &xi)?;
    Ok(Effectivity::Effective(xi))
}

/// The final checks on a trivialization; a failure means the working
/// precision did not suffice.
fn certify(d: &DescentDatum, xi: &SeriesMatrix) -> Result<()> {
    let target = d.phi().prec().min(Prec::Finite(d.prec().clone()));
    let residual = effectivity_residual(d, xi)?;
    if residual.prec() < target || !residual.truncate(&target).is_zero() {
        return Err(Error::PrecisionExhausted(
            "trivialization does not reproduce the datum at the target precision".into(),
        ));
    }
    if !check_exponent_restriction(xi, d.monoid()) {
        return Err(Error::HypothesisViolated(format!(
            "trivialization has exponents outside {}",
            d.monoid()
        )));
    }
    Ok(())
}

/// Constant-coefficient fixed vectors read off the `t`-slices of `phi`.
///
/// Writing `phi = xi(u)^{-1} xi(t)`, the coefficient of `t^d` is
/// `xi(u)^{-1} xi_d` with `xi_d` constant, so its columns are fixed by the
/// semilinear map of the isocrystal. Any `n` of them independent over the
/// coefficient field form a basis of fixed vectors, i.e. a filtration with
/// all slopes 1. Slices are visited by `|d|`, then `d`. `None` when the
/// stored terms do not yield `n` independent columns.
pub fn fixed_vector_filtration(d: &DescentDatum) -> Result<Option<Filtration>> {
    let ring = d.ring().clone();
    if !ring.is_field() {
        return Err(Error::NotAField);
    }
    let n = d.rank();
    let phi = d.phi();
    let mut degrees: Vec<Rational> = phi
        .entries()
        .iter()
        .flat_map(|s| s.terms().map(|(m, _)| m.exps()[0].clone()).collect::<Vec<_>>())
        .collect();
    degrees.sort_by(|a, b| a.abs().cmp(&b.abs()).then(a.cmp(b)));
    degrees.dedup();

    let mut echelon = Echelon::new(ring.clone());
    let mut cols = Vec::with_capacity(n);
    'outer: for deg in &degrees {
        let slice = phi.slice_coefficient(0, deg)?;
        for col in slice.columns() {
            if echelon.insert(&col) {
                cols.push(col);
                if cols.len() == n {
                    break 'outer;
                }
            }
        }
    }
    if cols.len() < n {
        return Ok(None);
    }
    Ok(Some(Filtration {
        p: SeriesMatrix::from_columns(&cols)?,
        slopes: vec![ring.one(); n],
    }))
}

type Key = (usize, Monomial);

/// Row echelon form over the coefficient field of column vectors, viewed
/// as finitely supported functions of (row, monomial). Each stored vector
/// has coefficient 1 at its pivot and 0 at the pivots stored before it.
struct Echelon {
    ring: Ring,
    rows: Vec<(Key, BTreeMap<Key, Coeff>)>,
}

impl Echelon {
    fn new(ring: Ring) -> Echelon {
        Echelon { ring, rows: Vec::new() }
    }

    /// Adds `col` if it is independent of the stored vectors.
    fn insert(&mut self, col: &SeriesMatrix) -> bool {
        let ring = &self.ring;
        let mut v: BTreeMap<Key, Coeff> = BTreeMap::new();
        for i in 0..col.rows() {
            for (m, c) in col.get(i, 0).terms() {
                v.insert((i, m.clone()), c.clone());
            }
        }
        for (pivot, row) in &self.rows {
            let Some(f) = v.get(pivot).cloned() else {
                continue;
            };
            for (k, c) in row {
                let entry = v.entry(k.clone()).or_insert_with(|| ring.zero());
                *entry = ring.sub(entry, &ring.mul(&f, c));
                if ring.is_zero(entry) {
                    v.remove(k);
                }
            }
        }
        let Some((pivot, lead)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let inv = ring.inv(&lead).expect("nonzero field element");
        for c in v.values_mut() {
            *c = ring.mul(c, &inv);
        }
        self.rows.push((pivot, v));
        true
    }
}

/// Lifts a trivialization across `A -> A/eps^j`, where `A = k[eps]/(eps^m)`
/// with `j < m <= 2j` and `xi_bar` lives over `A/eps^j`.
///
/// With `xi0` the zero-padded lift, `psi = xi0(u) phi xi0(t)^{-1}` is
/// `I + psi_plus` with `psi_plus` divisible by `eps^j`, hence of square
/// zero, and the cocycle condition for `psi` becomes additive. Its solution
/// `psi_plus = xi_plus(t) - xi_plus(u)` is read off the coefficients on the
/// two axes, and `xi = (I + xi_plus) xi0`.
pub fn lift_trivialization_square_zero(d: &DescentDatum, xi_bar: &SeriesMatrix) -> Result<SeriesMatrix> {
    let ring = d.ring().clone();
    if ring.is_field() {
        return Err(Error::NotNilpotentRing);
    }
    let j = xi_bar.ring().nil_order();
    let m = ring.nil_order();
    if xi_bar.ring().residue_field() != ring.residue_field() || !(j < m && m <= 2 * j) {
        return Err(Error::NotSquareZeroStep(format!(
            "cannot lift from nilpotency order {j} to {m}"
        )));
    }
    if xi_bar.rows() != d.rank() || !xi_bar.is_square() || xi_bar.nvars() != 1 {
        return Err(Error::ShapeMismatch("trivialization does not match the datum".into()));
    }
    let n = d.rank();
    let target = Prec::Finite(d.prec().clone());
    let from = xi_bar.ring().clone();
    let xi0 = xi_bar.map_coeffs(&ring, |c| from.change_nil_order(c, &ring));
    let slack = negative_part(&xi0.w_min());
    let xi0_inv = xi0.invert_to(&target.shift(&(&slack + &slack)))?;

    let xi0_u = xi0.rename_vars(&VarMap::pi2())?;
    let inv_t = xi0_inv.rename_vars(&VarMap::pi1())?;
    let psi = if d.phi().is_exact() && xi0_inv.is_exact() {
        xi0_u.try_mul(d.phi())?.try_mul(&inv_t)?
    } else {
        let inner = target.shift(&negative_part(&inv_t.w_min()));
        xi0_u.mul_to(d.phi(), &inner)?.mul_to(&inv_t, &target)?
    };
    let psi_plus = psi.try_sub(&SeriesMatrix::identity(n, 2, &ring))?;
    for s in psi_plus.entries() {
        if s.terms().any(|(_, c)| ring.eps_valuation(c) < j) {
            return Err(Error::NotSquareZeroStep(format!(
                "psi - I is not divisible by eps^{j}"
            )));
        }
    }

    let a = psi_plus.rename_vars(&VarMap::pi23())?;
    let b = psi_plus.rename_vars(&VarMap::pi12())?;
    let c = psi_plus.rename_vars(&VarMap::pi13())?;
    let residual = a.try_add(&b)?.try_sub(&c)?;
    let cut = residual.prec().min(target.clone());
    let residual = residual.truncate(&cut);
    if !residual.is_zero() {
        return Err(Error::AdditiveCocycleViolated {
            residual: residual.to_string(),
        });
    }

    let xi_plus = split_axes(&psi_plus)?;
    let xi = SeriesMatrix::identity(n, 1, &ring).try_add(&xi_plus)?.try_mul(&xi0)?;
    let check = effectivity_residual(d, &xi)?;
    if check.prec() < target || !check.truncate(&target).is_zero() {
        return Err(Error::PrecisionExhausted("lifted trivialization fails the check".into()));
    }
    Ok(xi)
}

fn negative_part(w: &Prec) -> Rational {
    match w {
        Prec::Finite(w) if w.is_negative() => -w,
        _ => Rational::zero(),
    }
}

/// `xi_plus` with `psi_plus(t, u) = xi_plus(t) - xi_plus(u)`.
fn split_axes(psi_plus: &SeriesMatrix) -> Result<SeriesMatrix> {
    let ring = psi_plus.ring().clone();
    psi_plus.try_map(|s| {
        let mut t_axis: BTreeMap<Rational, Coeff> = BTreeMap::new();
        let mut u_axis: BTreeMap<Rational, Coeff> = BTreeMap::new();
        for (m, c) in s.terms() {
            let (a, b) = (&m.exps()[0], &m.exps()[1]);
            match (a.is_zero(), b.is_zero()) {
                (false, true) => {
                    t_axis.insert(a.clone(), c.clone());
                }
                (true, false) => {
                    u_axis.insert(b.clone(), c.clone());
                }
                _ => {
                    return Err(Error::SupportSplitFailed(format!(
                        "term {} off the axes",
                        Series::new(2, ring.clone(), [(m.exps().to_vec(), c.clone())], Prec::Infinite)?
                    )))
                }
            }
        }
        let partners = t_axis.len() == u_axis.len()
            && t_axis
                .iter()
                .all(|(e, c)| u_axis.get(e).is_some_and(|c2| ring.is_zero(&ring.add(c, c2))));
        if !partners {
            return Err(Error::SupportSplitFailed(
                "t-slice and u-slice do not match".into(),
            ));
        }
        let prec = match s.prec() {
            Prec::Finite(p) => Prec::Finite(p.clone()),
            Prec::Infinite => Prec::Infinite,
        };
        Series::new(1, ring.clone(), t_axis.into_iter().map(|(e, c)| (vec![e], c)), prec)
    })
}

/// `xi(u)^{-1} xi(t) - phi(t, u)`, accurate below the datum precision.
fn effectivity_residual(d: &DescentDatum, xi: &SeriesMatrix) -> Result<SeriesMatrix> {
    if xi.rows() != d.rank() || !xi.is_square() {
        return Err(Error::ShapeMismatch("trivialization does not match the datum".into()));
    }
    if xi.nvars() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: xi.nvars(),
        });
    }
    let target = Prec::Finite(d.prec().clone());
    let slack = negative_part(&xi.w_min());
    let inv = xi.invert_to(&target.shift(&(&slack + &slack)))?;
    let inv_u = inv.rename_vars(&VarMap::pi2())?;
    let xi_t = xi.rename_vars(&VarMap::pi1())?;
    inv_u.mul_to(&xi_t, &target)?.try_sub(d.phi())
}

/// Checks `phi = xi(u)^{-1} xi(t)` below the datum precision.
pub fn verify_effectivity(d: &DescentDatum, xi: &SeriesMatrix) -> Result<Check> {
    let residual = effectivity_residual(d, xi)?;
    let cut = residual.prec().min(Prec::Finite(d.prec().clone()));
    Ok(Check::from_residual(residual, &cut))
}

/// Every entry of `xi` is supported in `monoid`.
pub fn check_exponent_restriction(xi: &SeriesMatrix, monoid: &Monoid) -> bool {
    xi.support_in_monoid(monoid)
}

/// `C^{-1} xi` where `C` is the matrix of constant terms, when `C` is
/// invertible; `xi` itself otherwise.
pub fn normalize(xi: &SeriesMatrix) -> SeriesMatrix {
    let c = SeriesMatrix::from_constants(xi.nvars(), xi.ring(), &xi.constant_coefficients());
    match c.invert() {
        Ok(c_inv) if c_inv.is_exact() => &c_inv * xi,
        _ => xi.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::{coboundary_datum, trivial_datum};
    use crate::exponent::{int, rat};
    use crate::isocrystal::{Isocrystal, NotEffective};

    fn f5() -> Ring {
        Ring::prime_field(5).unwrap()
    }

    fn dual(order: usize) -> Ring {
        Ring::dual_chain(f5(), order).unwrap()
    }

    fn mono(ring: &Ring, c: Coeff, exps: &[Rational]) -> Series {
        Series::monomial(ring.clone(), c, exps.to_vec())
    }

    fn zero(ring: &Ring, nvars: usize) -> Series {
        Series::zero(nvars, ring.clone(), Prec::Infinite)
    }

    fn mat(rows: Vec<Vec<Series>>) -> SeriesMatrix {
        SeriesMatrix::from_rows(rows).unwrap()
    }

    fn eps(ring: &Ring) -> Coeff {
        ring.eps_power(ring.residue_field().one(), 1).unwrap()
    }

    fn unipotent_phi() -> SeriesMatrix {
        let q = Ring::Rationals;
        let corner = &mono(&q, q.one(), &[int(-1), int(0)]) - &mono(&q, q.one(), &[int(0), int(-1)]);
        mat(vec![
            vec![mono(&q, q.one(), &[int(0), int(0)]), corner],
            vec![zero(&q, 2), mono(&q, q.one(), &[int(0), int(0)])],
        ])
    }

    fn effective(v: Effectivity<Trivialization>) -> SeriesMatrix {
        match v {
            Effectivity::Effective(t) => t.xi,
            Effectivity::NotEffective(r) => panic!("not effective: {r}"),
        }
    }

    #[test]
    fn trivial_descends_to_identity() {
        let d = trivial_datum(3, &f5(), Monoid::Zinv(5), int(16));
        let xi = effective(descend(&d, &int(5)).unwrap());
        assert_eq!(xi, SeriesMatrix::identity(3, 1, &f5()));
    }

    #[test]
    fn rank_one_monomial() {
        let r = f5();
        let phi = mat(vec![vec![mono(&r, r.one(), &[int(1), int(-1)])]]);
        let d = DescentDatum::new(phi, Monoid::Zinv(2), int(16)).unwrap();
        let xi = effective(descend(&d, &int(2)).unwrap());
        assert_eq!(xi, mat(vec![vec![mono(&r, r.one(), &[int(1)])]]));
    }

    #[test]
    fn unipotent_rank_two() {
        let q = Ring::Rationals;
        let d = DescentDatum::new(unipotent_phi(), Monoid::Zinv(2), int(16)).unwrap();
        let xi = effective(descend(&d, &int(2)).unwrap());
        let expected = mat(vec![
            vec![mono(&q, q.one(), &[int(0)]), mono(&q, q.one(), &[int(-1)])],
            vec![zero(&q, 1), mono(&q, q.one(), &[int(0)])],
        ]);
        assert_eq!(xi, expected);
        assert!(verify_effectivity(&d, &xi).unwrap().passed());
    }

    #[test]
    fn descends_a_coboundary_up_to_constants() {
        let r = Ring::prime_field(7).unwrap();
        let one = mono(&r, r.one(), &[int(0)]);
        let upper = mat(vec![
            vec![one.clone(), mono(&r, r.from_int(2), &[rat(-1, 7)])],
            vec![zero(&r, 1), one.clone()],
        ]);
        let diag = mat(vec![
            vec![mono(&r, r.from_int(3), &[int(1)]), zero(&r, 1)],
            vec![zero(&r, 1), mono(&r, r.from_int(5), &[rat(1, 49)])],
        ]);
        let lower = mat(vec![
            vec![one.clone(), zero(&r, 1)],
            vec![mono(&r, r.one(), &[rat(-2, 1)]), one.clone()],
        ]);
        let xi0 = &(&upper * &diag) * &lower;
        let d = coboundary_datum(&xi0, Monoid::Zinv(7), int(16)).unwrap();
        let xi = effective(descend(&d, &int(7)).unwrap());
        assert!(verify_effectivity(&d, &xi).unwrap().passed());
        assert!(check_exponent_restriction(&xi, &Monoid::Zinv(7)));
        let ratio = &xi * &xi0.invert().unwrap();
        assert!(ratio.is_constant());
    }

    #[test]
    fn cocycle_violation_is_an_error() {
        let q = Ring::Rationals;
        let phi = mat(vec![vec![&mono(&q, q.one(), &[int(0), int(0)]) + &mono(&q, q.one(), &[int(1), int(1)])]]);
        let d = DescentDatum::new(phi, Monoid::Zinv(2), int(8)).unwrap();
        assert_eq!(descend(&d, &int(2)), Err(Error::CocycleViolated));
    }

    #[test]
    fn verify_examples() {
        let r = f5();
        let d = trivial_datum(2, &r, Monoid::Z, int(8));
        assert!(verify_effectivity(&d, &SeriesMatrix::identity(2, 1, &r)).unwrap().passed());

        let d = trivial_datum(1, &r, Monoid::Z, int(8));
        let xi = mat(vec![vec![mono(&r, r.one(), &[int(1)])]]);
        let Check::Fail(residual) = verify_effectivity(&d, &xi).unwrap() else {
            panic!("expected failure");
        };
        let expected = &mono(&r, r.one(), &[int(1), int(-1)]) - &mono(&r, r.one(), &[int(0), int(0)]);
        assert!(residual.get(0, 0).eq_up_to_prec(&expected));
    }

    #[test]
    fn exponent_restriction_examples() {
        let q = Ring::Rationals;
        let xi = mat(vec![
            vec![mono(&q, q.one(), &[int(0)]), mono(&q, q.one(), &[int(-1)])],
            vec![zero(&q, 1), mono(&q, q.one(), &[int(0)])],
        ]);
        assert!(check_exponent_restriction(&xi, &Monoid::Zinv(2)));
        let cube_root = mat(vec![vec![mono(&q, q.one(), &[rat(1, 3)])]]);
        assert!(!check_exponent_restriction(&cube_root, &Monoid::Zinv(2)));
        let constant = SeriesMatrix::from_constants(1, &q, &[vec![q.from_int(4)]]);
        assert!(check_exponent_restriction(&constant, &Monoid::Z));
    }

    #[test]
    fn lift_identity() {
        let a = dual(2);
        let d = trivial_datum(2, &a, Monoid::Zinv(2), int(8));
        let xi = lift_trivialization_square_zero(&d, &SeriesMatrix::identity(2, 1, &f5())).unwrap();
        assert_eq!(xi, SeriesMatrix::identity(2, 1, &a));
    }

    #[test]
    fn lift_rank_one() {
        let a = dual(2);
        let e = eps(&a);
        let phi = mat(vec![vec![
            &(&mono(&a, a.one(), &[int(0), int(0)]) + &mono(&a, e.clone(), &[rat(1, 2), int(0)]))
                - &mono(&a, e.clone(), &[int(0), rat(1, 2)]),
        ]]);
        let d = DescentDatum::new(phi, Monoid::Zinv(2), int(8)).unwrap();
        let xi = lift_trivialization_square_zero(&d, &SeriesMatrix::identity(1, 1, &f5())).unwrap();
        let expected = &mono(&a, a.one(), &[int(0)]) + &mono(&a, e, &[rat(1, 2)]);
        assert_eq!(xi.get(0, 0), &expected);
    }

    #[test]
    fn lift_rejects_additive_cocycle_violation() {
        let a = dual(2);
        let e = eps(&a);
        let phi = mat(vec![vec![&mono(&a, a.one(), &[int(0), int(0)]) + &mono(&a, e.clone(), &[int(1), int(1)])]]);
        let d = DescentDatum::new(phi, Monoid::Z, int(8)).unwrap();
        let err = lift_trivialization_square_zero(&d, &SeriesMatrix::identity(1, 1, &f5())).unwrap_err();
        // eps u v + eps t u - eps t v
        let m = |ex: [i64; 3]| mono(&a, e.clone(), &ex.map(int));
        let expected = mat(vec![vec![&(&m([0, 1, 1]) + &m([1, 1, 0])) - &m([1, 0, 1])]]);
        assert_eq!(
            err,
            Error::AdditiveCocycleViolated {
                residual: expected.to_string()
            }
        );
    }

    #[test]
    fn lift_needs_square_zero_step() {
        let d = trivial_datum(1, &dual(3), Monoid::Z, int(8));
        assert!(matches!(
            lift_trivialization_square_zero(&d, &SeriesMatrix::identity(1, 1, &f5())),
            Err(Error::NotSquareZeroStep(_))
        ));
    }

    #[test]
    fn dual_chain_round_trip() {
        let a = dual(3);
        let e = eps(&a);
        let e2 = a.mul(&e, &e);
        let one = mono(&a, a.one(), &[int(0)]);
        let xi0 = mat(vec![
            vec![&one + &mono(&a, e.clone(), &[rat(-1, 2)]), mono(&a, e2, &[int(1)])],
            vec![mono(&a, e, &[rat(3, 4)]), one.clone()],
        ]);
        let d = coboundary_datum(&xi0, Monoid::Zinv(2), int(16)).unwrap();
        let xi = effective(descend(&d, &int(2)).unwrap());
        assert!(verify_effectivity(&d, &xi).unwrap().passed());
        let ratio = &xi * &xi0.invert().unwrap();
        assert!(ratio.truncate(&Prec::Finite(int(16))).is_constant());
    }

    #[test]
    fn obstructed_isocrystal_is_not_effective() {
        let q = Ring::Rationals;
        let b = mat(vec![
            vec![mono(&q, q.one(), &[int(0)]), mono(&q, q.one(), &[int(-1)])],
            vec![zero(&q, 1), mono(&q, q.one(), &[int(0)])],
        ]);
        for prec in [8, 16] {
            let iso = Isocrystal::new(b.clone(), int(2), Monoid::Zinv(2), int(prec)).unwrap();
            assert!(matches!(
                trivialize_isocrystal_field(&iso).unwrap(),
                Effectivity::NotEffective(NotEffective::ObstructedOrbit { .. })
            ));
        }
    }
}
