//! Novikov isocrystals `(M, F_M)` on free modules and their structure
//! theory over a field: eigenvectors, the slope filtration, and
//! trivializations.
//!
//! `F_M` acts on columns by `v -> B F(v)`. A trivialization is an invertible
//! `xi` with `B = xi^{-1} F(xi)`; its inverse `G` is the matrix of fixed
//! vectors, `B F(G) = G`, and that is the form in which results are checked.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::coeff::{Coeff, Ring};
use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, rational_pow, Monoid, Rational};
use crate::series::{check_stable, Direction, Obstruction, Prec, Series, TwistSolution};
use crate::seriesalg::{minimal_dependence, Dependence, SeriesMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isocrystal {
    rank: usize,
    lambda: Rational,
    b: SeriesMatrix,
    b_inv: SeriesMatrix,
    monoid: Monoid,
    prec: Rational,
}

/// Basis change `p` with `p^{-1} B F(p)` upper triangular, constant
/// diagonal `slopes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub p: SeriesMatrix,
    pub slopes: Vec<Coeff>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotEffective {
    /// A graded piece `(k((t)), c F)` with `c != 1`.
    SlopeNotOne { index: usize, slope: Coeff },
    /// The equation for entry `(row, column)` of the unipotent correction
    /// has no Novikov solution.
    ObstructedOrbit {
        row: usize,
        column: usize,
        obstruction: Obstruction,
    },
}

impl fmt::Display for NotEffective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotEffective::SlopeNotOne { index, slope } => {
                write!(f, "slope {} at position {index} is not 1", Ring::fmt_field_elem(slope))
            }
            NotEffective::ObstructedOrbit {
                row,
                column,
                obstruction,
            } => write!(
                f,
                "entry ({row}, {column}): {obstruction} has coefficient sum {}",
                Ring::fmt_field_elem(&obstruction.orbit_sum)
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effectivity<T> {
    Effective(T),
    NotEffective(NotEffective),
}

impl<T> Effectivity<T> {
    pub fn effective(self) -> Option<T> {
        match self {
            Effectivity::Effective(x) => Some(x),
            Effectivity::NotEffective(_) => None,
        }
    }
}

/// Working precisions tried in turn, as multiples of the target.
const WORK_LADDER: [i64; 5] = [1, 2, 4, 8, 16];

fn ladder(target: &Rational) -> Vec<Prec> {
    let base = if target.is_positive() {
        target.clone()
    } else {
        Rational::from_integer(1.into())
    };
    WORK_LADDER
        .iter()
        .map(|&k| Prec::Finite(&base * Rational::from_integer(k.into())))
        .collect()
}

/// Runs `f` at increasing working precision while it reports
/// `PrecisionExhausted`.
fn with_ladder<T, F>(target: &Rational, mut f: F) -> Result<T>
where
    F: FnMut(&Prec) -> Result<T>,
{
    let mut last = None;
    for work in ladder(target) {
        match f(&work) {
            Err(Error::PrecisionExhausted(msg)) => last = Some(msg),
            r => return r,
        }
    }
    Err(Error::PrecisionExhausted(last.unwrap_or_default()))
}

impl Isocrystal {
    /// Wraps `b`, computing its inverse at the target precision when it is
    /// not exactly invertible.
    pub fn new(b: SeriesMatrix, lambda: Rational, monoid: Monoid, prec: Rational) -> Result<Isocrystal> {
        check_square_one_variable(&b)?;
        check_stable(&monoid, &lambda, Direction::Forward)?;
        if lambda <= Rational::from_integer(1.into()) {
            return Err(Error::Semantic("lambda must exceed 1".into()));
        }
        let b_inv = match b.invert() {
            Err(Error::PrecisionExhausted(_)) if b.is_exact() => {
                b.truncate(&Prec::Finite(prec.clone())).invert()?
            }
            r => r?,
        };
        Ok(Isocrystal::with_inverse(b, b_inv, lambda, monoid, prec))
    }

    pub fn with_inverse(
        b: SeriesMatrix,
        b_inv: SeriesMatrix,
        lambda: Rational,
        monoid: Monoid,
        prec: Rational,
    ) -> Isocrystal {
        Isocrystal {
            rank: b.rows(),
            lambda,
            b,
            b_inv,
            monoid,
            prec,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn b(&self) -> &SeriesMatrix {
        &self.b
    }

    pub fn b_inv(&self) -> &SeriesMatrix {
        &self.b_inv
    }

    pub fn ring(&self) -> &Ring {
        self.b.ring()
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    pub fn prec(&self) -> &Rational {
        &self.prec
    }

    fn target(&self) -> Prec {
        Prec::Finite(self.prec.clone())
    }

    /// Same isocrystal with a different target precision.
    pub fn with_prec(&self, prec: Rational) -> Isocrystal {
        Isocrystal {
            prec,
            ..self.clone()
        }
    }

    fn frob(&self, m: &SeriesMatrix) -> SeriesMatrix {
        m.frobenius(&self.lambda, Direction::Forward)
    }

    /// `v -> B F(v)`.
    fn apply_once(&self, v: &SeriesMatrix) -> SeriesMatrix {
        &self.b * &self.frob(v)
    }

    /// `F_M^k(v)`; negative `k` applies `v -> F^{-1}(B^{-1} v)`.
    pub fn apply_semilinear(&self, v: &SeriesMatrix, k: i64) -> Result<SeriesMatrix> {
        if v.cols() != 1 || v.rows() != self.rank || v.nvars() != 1 {
            return Err(Error::ShapeMismatch("expected a column of matching height".into()));
        }
        if k < 0 {
            check_stable(&self.monoid, &self.lambda, Direction::Inverse)?;
        }
        let mut out = v.clone();
        for _ in 0..k.unsigned_abs() {
            out = if k > 0 {
                self.apply_once(&out)
            } else {
                (&self.b_inv * &out).frobenius(&self.lambda, Direction::Inverse)
            };
        }
        if let (Some(d), Prec::Finite(w)) = (out.prec().finite(), out.w_min()) {
            if d <= &w && !v.is_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "F_M^{k} leaves precision {}",
                    fmt_rational(d)
                )));
            }
        }
        Ok(out)
    }

    /// `B F(g) - g`, the defect of `g` as a matrix of fixed vectors.
    fn fixed_defect(&self, g: &SeriesMatrix) -> SeriesMatrix {
        &self.apply_once(g) - g
    }
}

fn check_square_one_variable(b: &SeriesMatrix) -> Result<()> {
    if b.nvars() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: b.nvars(),
        });
    }
    if !b.is_square() {
        return Err(Error::ShapeMismatch("isocrystal matrix must be square".into()));
    }
    Ok(())
}

fn check_field(iso: &Isocrystal) -> Result<()> {
    if iso.ring().is_field() {
        Ok(())
    } else {
        Err(Error::NotAField)
    }
}

/// Vanishing below `min(target, own precision)`, with the own precision
/// required to reach the target.
fn certified_zero(m: &SeriesMatrix, target: &Prec) -> Result<bool> {
    if m.prec() < *target {
        return Err(Error::PrecisionExhausted(format!(
            "check only reaches precision {}",
            m.prec()
        )));
    }
    Ok(m.truncate(target).is_zero())
}

/// An eigenvector of `F_M`: `(c, m)` with `F_M(m) = c m`, `c` a nonzero
/// constant.
pub fn find_eigenvector(iso: &Isocrystal, seed: &SeriesMatrix) -> Result<(Coeff, SeriesMatrix)> {
    check_field(iso)?;
    with_ladder(&iso.prec, |work| {
        let (c, m) = find_eigenvector_at(iso, seed, work)?;
        let defect = &iso.apply_once(&m) - &m.scale(&Series::constant(1, iso.ring().clone(), c.clone()));
        if !certified_zero(&defect, &iso.target())? {
            return Err(Error::PrecisionExhausted("eigenvector check failed".into()));
        }
        Ok((c, m))
    })
}

fn find_eigenvector_at(iso: &Isocrystal, seed: &SeriesMatrix, work: &Prec) -> Result<(Coeff, SeriesMatrix)> {
    if seed.cols() != 1 || seed.rows() != iso.rank {
        return Err(Error::ShapeMismatch("seed must be a column of matching height".into()));
    }
    if seed.is_zero() {
        return Err(Error::ZeroSeed);
    }
    let ring = iso.ring().clone();
    let lambda = &iso.lambda;

    let mut vs = vec![seed.clone()];
    for k in 1..=iso.rank {
        let next = iso.apply_once(&vs[k - 1]);
        vs.push(next);
    }
    let truncated: Vec<SeriesMatrix> = vs.iter().map(|v| v.truncate(work)).collect();
    let (n, a) = match minimal_dependence(&truncated)? {
        Dependence::Dependent { n, coeffs } => (n, coeffs),
        Dependence::Independent => {
            return Err(Error::PrecisionExhausted("no dependence among the iterates".into()))
        }
    };

    // rescale m_j = t^{r lambda^j} v_j so that every a_i has w_min >= 0
    let lpow = |k: usize| rational_pow(lambda, k as i64);
    let r = a
        .iter()
        .enumerate()
        .filter(|(_, ai)| !ai.is_zero())
        .map(|(i, ai)| -ai.w_min().finite().unwrap().clone() / (lpow(n) - lpow(i)))
        .max()
        .unwrap_or_else(Rational::zero);
    let a: Vec<Series> = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai.shift(&[&r * (lpow(n) - lpow(i))]))
        .collect();

    // c^n = sum abar_i c^i
    let mut poly: Vec<Coeff> = a.iter().map(|ai| ring.neg(&ai.constant_term())).collect();
    poly.push(ring.one());
    let roots = ring.roots_in_field(&poly, true)?;
    let Some(c) = roots.into_iter().next() else {
        return Err(rootless(iso, &vs, &a, &r, n));
    };
    let cinv = ring.inv(&c).expect("nonzero root");
    let cinv_s = |k: usize| Series::constant(1, ring.clone(), ring.pow(&cinv, k as u64));

    // b = g(b) = sum_i c^{-(n-i)} F^{n-i}(b) F^{n-1-i}(a_i), contracting
    let fa: Vec<Series> = (0..n)
        .map(|i| iterate_frobenius(&a[i], lambda, n - 1 - i).truncate(work))
        .collect();
    let mut b = Series::one(1, ring.clone());
    let mut converged = false;
    for _ in 0..256 {
        let mut g = Series::zero(1, ring.clone(), Prec::Infinite);
        for i in 0..n {
            let term = &(&iterate_frobenius(&b, lambda, n - i) * &fa[i]) * &cinv_s(n - i);
            g = &g + &term;
        }
        let g = g.truncate(work);
        let step = &g - &b;
        b = g;
        if step.is_zero() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::PrecisionExhausted("eigenvector iteration did not settle".into()));
    }

    // b_{n-1} = b, b_0 = F(b) a_0 / c, b_j = (F(b_{j-1}) + F(b) a_j) / c
    let fb = b.frobenius(lambda, Direction::Forward);
    let mut bs: Vec<Series> = Vec::with_capacity(n);
    for j in 0..n {
        if j == n - 1 {
            bs.push(b.clone());
            break;
        }
        let mut x = &fb * &a[j];
        if j > 0 {
            x = &x + &bs[j - 1].frobenius(lambda, Direction::Forward);
        }
        bs.push(&x * &cinv_s(1));
    }
    let mut m = SeriesMatrix::zeros(iso.rank, 1, 1, &ring);
    for j in 0..n {
        let coef = bs[j].shift(&[&r * lpow(j)]);
        m = &m + &vs[j].scale(&coef);
    }
    if m.is_zero() {
        return Err(Error::PrecisionExhausted("eigenvector vanished".into()));
    }
    Ok((c, m))
}

/// `EigenvalueNotInField` once the dependence behind the rootless
/// polynomial is certified at the target, otherwise `PrecisionExhausted`.
fn rootless(iso: &Isocrystal, vs: &[SeriesMatrix], a: &[Series], r: &Rational, n: usize) -> Error {
    let lpow = |k: usize| rational_pow(&iso.lambda, k as i64);
    // a was rescaled by t^{r (lambda^n - lambda^i)}; undo it on the unrounded iterates
    let mut residual = vs[n].clone();
    for (i, ai) in a.iter().enumerate() {
        let coef = ai.shift(&[-(r * (lpow(n) - lpow(i)))]);
        residual = &residual - &vs[i].scale(&coef);
    }
    match certified_zero(&residual, &iso.target()) {
        Ok(true) => Error::EigenvalueNotInField,
        Ok(false) => Error::PrecisionExhausted("spurious dependence among the iterates".into()),
        Err(e) => e,
    }
}

fn iterate_frobenius(s: &Series, lambda: &Rational, k: usize) -> Series {
    if k == 0 {
        return s.clone();
    }
    s.scale_exponents(&rational_pow(lambda, k as i64), &[0])
}

/// Iterated eigenvector extraction on successive quotients.
pub fn dm_filtration(iso: &Isocrystal) -> Result<Filtration> {
    check_field(iso)?;
    with_ladder(&iso.prec, |work| {
        let filt = dm_filtration_at(iso, work)?;
        let t = transformed(iso, &filt.p, work)?;
        check_triangular(&t, &filt.slopes, &iso.target())?;
        Ok(filt)
    })
}

fn dm_filtration_at(iso: &Isocrystal, work: &Prec) -> Result<Filtration> {
    let n = iso.rank;
    let ring = iso.ring().clone();
    let seed = SeriesMatrix::unit_vector(n, 0, 1, &ring);
    let (c, m) = find_eigenvector_at(iso, &seed, work)?;
    let pivot = (0..n)
        .filter(|&i| m.get(i, 0).is_invertible())
        .min_by(|&i, &j| m.get(i, 0).w_min().cmp(&m.get(j, 0).w_min()).then(i.cmp(&j)))
        .ok_or_else(|| Error::PrecisionExhausted("eigenvector has no invertible entry".into()))?;
    let mut cols = vec![m.clone()];
    cols.extend((0..n).filter(|&j| j != pivot).map(|j| SeriesMatrix::unit_vector(n, j, 1, &ring)));
    let p = SeriesMatrix::from_columns(&cols)?;
    if n == 1 {
        return Ok(Filtration { p, slopes: vec![c] });
    }
    let p_inv = p.invert()?;
    let t = p_inv
        .mul_to(&iso.b, work)?
        .mul_to(&iso.frob(&p), work)?;
    let t_inv = iso
        .frob(&p_inv)
        .mul_to(&iso.b_inv, work)?
        .mul_to(&p, work)?;
    let quotient = Isocrystal::with_inverse(
        t.block(1, 1, n - 1, n - 1),
        t_inv.block(1, 1, n - 1, n - 1),
        iso.lambda.clone(),
        iso.monoid.clone(),
        iso.prec.clone(),
    );
    let sub = dm_filtration_at(&quotient, work)?;
    let one = SeriesMatrix::identity(1, 1, &ring);
    let p = &p * &SeriesMatrix::block_diag(&one, &sub.p);
    let mut slopes = vec![c];
    slopes.extend(sub.slopes);
    Ok(Filtration { p, slopes })
}

/// `p^{-1} B F(p)` at the working precision.
fn transformed(iso: &Isocrystal, p: &SeriesMatrix, work: &Prec) -> Result<SeriesMatrix> {
    let p_inv = p.invert_to(work)?;
    let bp = mul_keeping_exact(&iso.b, &iso.frob(p), work)?;
    mul_keeping_exact(&p_inv, &bp, work)
}

/// Exact product of exact factors, otherwise the product below `work`.
fn mul_keeping_exact(a: &SeriesMatrix, b: &SeriesMatrix, work: &Prec) -> Result<SeriesMatrix> {
    if a.is_exact() && b.is_exact() {
        a.try_mul(b)
    } else {
        a.mul_to(b, work)
    }
}

fn negative_part(w: &Prec) -> Rational {
    match w {
        Prec::Finite(w) if w.is_negative() => -w,
        _ => Rational::zero(),
    }
}

fn check_triangular(t: &SeriesMatrix, slopes: &[Coeff], target: &Prec) -> Result<()> {
    let n = t.rows();
    let ring = t.ring().clone();
    let mut expected = t.clone();
    for i in 0..n {
        for j in 0..=i {
            let want = if i == j {
                Series::constant(1, ring.clone(), slopes[i].clone())
            } else {
                Series::zero(1, ring.clone(), Prec::Infinite)
            };
            expected.set(i, j, want);
        }
    }
    if certified_zero(&(t - &expected), target)? {
        Ok(())
    } else {
        Err(Error::PrecisionExhausted("filtration is not triangular at the target precision".into()))
    }
}

/// Trivializes an isocrystal whose matrix is `I` modulo positive weight by
/// the limits `lim F_M^k(e_i)`.
pub fn trivialize_unipotent_lattice(iso: &Isocrystal) -> Result<SeriesMatrix> {
    let n = iso.rank;
    let ring = iso.ring().clone();
    let target = iso.target();
    let id = SeriesMatrix::identity(n, 1, &ring);
    let diff = iso.b() - &id;
    for (k, s) in diff.entries().iter().enumerate() {
        if !s.is_zero() && !s.w_min().finite().map_or(true, |w| w.is_positive()) {
            return Err(Error::HypothesisViolated(format!(
                "entry ({}, {}) of B - I has weight {}",
                k / n,
                k % n,
                s.w_min()
            )));
        }
    }
    let b = iso.b().truncate(&target);
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = SeriesMatrix::unit_vector(n, i, 1, &ring);
        let mut settled = false;
        for _ in 0..1024 {
            let next = &b * &m.frobenius(&iso.lambda, Direction::Forward);
            if next == m {
                settled = true;
                break;
            }
            m = next;
        }
        if !settled {
            return Err(Error::PrecisionExhausted("lattice iteration did not settle".into()));
        }
        cols.push(m);
    }
    let g = SeriesMatrix::from_columns(&cols)?;
    if !certified_zero(&iso.fixed_defect(&g), &target)? {
        return Err(Error::PrecisionExhausted("fixed columns fail the check".into()));
    }
    g.invert()
}

/// Full trivialization over a field, or the reason none exists.
pub fn trivialize_isocrystal_field(iso: &Isocrystal) -> Result<Effectivity<SeriesMatrix>> {
    check_field(iso)?;
    iso.monoid.check_admissible(&iso.lambda)?;
    with_ladder(&iso.prec, |work| {
        let filt = dm_filtration_at(iso, work)?;
        trivialize_with_filtration_at(iso, &filt, work)
    })
}

/// [`trivialize_isocrystal_field`] from a known filtration.
pub fn trivialize_with_filtration(iso: &Isocrystal, filt: &Filtration) -> Result<Effectivity<SeriesMatrix>> {
    check_field(iso)?;
    iso.monoid.check_admissible(&iso.lambda)?;
    with_ladder(&iso.prec, |work| trivialize_with_filtration_at(iso, filt, work))
}

fn trivialize_with_filtration_at(
    iso: &Isocrystal,
    filt: &Filtration,
    work: &Prec,
) -> Result<Effectivity<SeriesMatrix>> {
    let ring = iso.ring().clone();
    for (index, slope) in filt.slopes.iter().enumerate() {
        if !ring.is_one(slope) {
            return Ok(Effectivity::NotEffective(NotEffective::SlopeNotOne {
                index,
                slope: slope.clone(),
            }));
        }
    }
    let n = iso.rank;
    let t = transformed(iso, &filt.p, work)?;
    // unipotent w with T F(w) = w, column by column:
    // z_j - F(z_j) = T_ji + sum_{j<k<i} T_jk F(z_k)
    let mut w = SeriesMatrix::identity(n, 1, &ring);
    for i in 1..n {
        for j in (0..i).rev() {
            let mut rhs = t.get(j, i).clone();
            for k in j + 1..i {
                let fz = w.get(k, i).frobenius(&iso.lambda, Direction::Forward);
                rhs = &rhs + &(t.get(j, k) * &fz);
            }
            // exact data keeps an exact solution unless a tail is infinite
            let solution = match rhs.solve_additive_twist(&iso.lambda, &Monoid::Q) {
                Err(Error::PrecisionExhausted(_)) if rhs.prec().is_infinite() => {
                    rhs.truncate(work).solve_additive_twist(&iso.lambda, &Monoid::Q)?
                }
                r => r?,
            };
            match solution {
                TwistSolution::Solved(z) => w.set(j, i, z),
                TwistSolution::Unsolvable(obstruction) => {
                    return Ok(Effectivity::NotEffective(NotEffective::ObstructedOrbit {
                        row: j,
                        column: i,
                        obstruction,
                    }))
                }
            }
        }
    }
    let g = mul_keeping_exact(&filt.p, &w, work)?;
    if !certified_zero(&iso.fixed_defect(&g), &iso.target())? {
        return Err(Error::PrecisionExhausted("fixed columns fail the check".into()));
    }
    let slack = negative_part(&g.w_min());
    Ok(Effectivity::Effective(g.invert_to(&iso.target().shift(&(&slack + &slack)))?))
}
