//! Matrices over Novikov series and elimination with valuation-aware
//! pivoting.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::coeff::{Coeff, Ring};
use crate::error::{Error, Result};
use crate::exponent::{Monoid, Rational};
use crate::series::{Direction, Prec, Series, VarMap};

/// Rectangular matrix of series sharing arity and coefficient ring.
/// Entries are stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    ring: Ring,
    entries: Vec<Series>,
}

/// Laplace expansion beyond this size is slower than elimination.
const MAX_EXACT_ADJUGATE: usize = 6;

impl SeriesMatrix {
    pub fn from_rows(rows: Vec<Vec<Series>>) -> Result<SeriesMatrix> {
        let nrows = rows.len();
        if nrows == 0 || rows[0].is_empty() {
            return Err(Error::ShapeMismatch("empty matrix".into()));
        }
        let ncols = rows[0].len();
        let nvars = rows[0][0].nvars();
        let ring = rows[0][0].ring().clone();
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::ShapeMismatch(format!(
                    "row of length {} in a matrix with {ncols} columns",
                    row.len()
                )));
            }
            for s in row {
                if s.nvars() != nvars {
                    return Err(Error::ArityMismatch {
                        expected: nvars,
                        found: s.nvars(),
                    });
                }
                if s.ring() != &ring {
                    return Err(Error::RingMismatch);
                }
                entries.push(s);
            }
        }
        Ok(SeriesMatrix {
            rows: nrows,
            cols: ncols,
            nvars,
            ring,
            entries,
        })
    }

    pub fn from_fn<F>(rows: usize, cols: usize, nvars: usize, ring: &Ring, mut f: F) -> SeriesMatrix
    where
        F: FnMut(usize, usize) -> Series,
    {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let s = f(i, j);
                assert!(s.nvars() == nvars && s.ring() == ring, "entry does not match matrix");
                entries.push(s);
            }
        }
        SeriesMatrix {
            rows,
            cols,
            nvars,
            ring: ring.clone(),
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize, nvars: usize, ring: &Ring) -> SeriesMatrix {
        SeriesMatrix::from_fn(rows, cols, nvars, ring, |_, _| {
            Series::zero(nvars, ring.clone(), Prec::Infinite)
        })
    }

    pub fn identity(n: usize, nvars: usize, ring: &Ring) -> SeriesMatrix {
        SeriesMatrix::from_fn(n, n, nvars, ring, |i, j| {
            if i == j {
                Series::one(nvars, ring.clone())
            } else {
                Series::zero(nvars, ring.clone(), Prec::Infinite)
            }
        })
    }

    /// Exact matrix of constants.
    pub fn from_constants(nvars: usize, ring: &Ring, rows: &[Vec<Coeff>]) -> SeriesMatrix {
        SeriesMatrix::from_fn(rows.len(), rows[0].len(), nvars, ring, |i, j| {
            Series::constant(nvars, ring.clone(), rows[i][j].clone())
        })
    }

    pub fn column_vector(entries: Vec<Series>) -> Result<SeriesMatrix> {
        SeriesMatrix::from_rows(entries.into_iter().map(|s| vec![s]).collect())
    }

    /// The `i`-th standard basis column of height `n`.
    pub fn unit_vector(n: usize, i: usize, nvars: usize, ring: &Ring) -> SeriesMatrix {
        SeriesMatrix::identity(n, nvars, ring).column(i)
    }

    pub fn from_columns(columns: &[SeriesMatrix]) -> Result<SeriesMatrix> {
        let first = columns
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no columns".into()))?;
        if columns.iter().any(|c| c.cols != 1 || c.rows != first.rows) {
            return Err(Error::ShapeMismatch("columns of unequal height".into()));
        }
        let rows = (0..first.rows)
            .map(|i| columns.iter().map(|c| c.get(i, 0).clone()).collect())
            .collect();
        SeriesMatrix::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn get(&self, i: usize, j: usize) -> &Series {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series) {
        assert!(s.nvars() == self.nvars && s.ring() == &self.ring, "entry does not match matrix");
        self.entries[i * self.cols + j] = s;
    }

    pub fn entries(&self) -> &[Series] {
        &self.entries
    }

    pub fn row_vec(&self, i: usize) -> Vec<Series> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> SeriesMatrix {
        self.block(0, j, self.rows, 1)
    }

    pub fn columns(&self) -> Vec<SeriesMatrix> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// The `rows x cols` block with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> SeriesMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        SeriesMatrix::from_fn(rows, cols, self.nvars, &self.ring, |i, j| {
            self.get(r0 + i, c0 + j).clone()
        })
    }

    /// `diag(a, b)`.
    pub fn block_diag(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
        let rows = a.rows + b.rows;
        let cols = a.cols + b.cols;
        SeriesMatrix::from_fn(rows, cols, a.nvars, &a.ring, |i, j| {
            match (i < a.rows, j < a.cols) {
                (true, true) => a.get(i, j).clone(),
                (false, false) => b.get(i - a.rows, j - a.cols).clone(),
                _ => Series::zero(a.nvars, a.ring.clone(), Prec::Infinite),
            }
        })
    }

    pub fn transpose(&self) -> SeriesMatrix {
        SeriesMatrix::from_fn(self.cols, self.rows, self.nvars, &self.ring, |i, j| {
            self.get(j, i).clone()
        })
    }

    /// Working precision: the least entry precision.
    pub fn prec(&self) -> Prec {
        self.entries
            .iter()
            .map(|s| s.prec().clone())
            .min()
            .unwrap_or(Prec::Infinite)
    }

    /// Least `w_min` over the entries.
    pub fn w_min(&self) -> Prec {
        self.entries.iter().map(|s| s.w_min()).min().unwrap_or(Prec::Infinite)
    }

    pub fn is_exact(&self) -> bool {
        self.prec().is_infinite()
    }

    /// Applies `f` entrywise; the results fix the new arity and ring.
    pub fn map<F>(&self, f: F) -> SeriesMatrix
    where
        F: Fn(&Series) -> Series,
    {
        let entries: Vec<Series> = self.entries.iter().map(f).collect();
        let nvars = entries[0].nvars();
        let ring = entries[0].ring().clone();
        SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars,
            ring,
            entries,
        }
    }

    pub fn try_map<F>(&self, f: F) -> Result<SeriesMatrix>
    where
        F: Fn(&Series) -> Result<Series>,
    {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        let nvars = entries[0].nvars();
        let ring = entries[0].ring().clone();
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars,
            ring,
            entries,
        })
    }

    pub fn truncate(&self, prec: &Prec) -> SeriesMatrix {
        self.map(|s| s.truncate(prec))
    }

    pub fn frobenius(&self, lambda: &Rational, dir: Direction) -> SeriesMatrix {
        self.map(|s| s.frobenius(lambda, dir))
    }

    pub fn frobenius_last(&self, lambda: &Rational, dir: Direction) -> SeriesMatrix {
        self.map(|s| s.frobenius_last(lambda, dir))
    }

    pub fn rename_vars(&self, map: &VarMap) -> Result<SeriesMatrix> {
        self.try_map(|s| s.rename_vars(map))
    }

    pub fn map_coeffs<F>(&self, ring: &Ring, f: F) -> SeriesMatrix
    where
        F: Fn(&Coeff) -> Coeff,
    {
        self.map(|s| s.map_coeffs(ring, &f))
    }

    pub fn slice_coefficient(&self, var: usize, value: &Rational) -> Result<SeriesMatrix> {
        self.try_map(|s| s.slice_coefficient(var, value))
    }

    pub fn scale(&self, s: &Series) -> SeriesMatrix {
        self.map(|e| s * e)
    }

    /// Every entry has empty stored support.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Series::is_zero)
    }

    pub fn eq_up_to_prec(&self, other: &SeriesMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.eq_up_to_prec(b))
    }

    /// Every entry is supported in `{0}`.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(Series::is_constant)
    }

    /// The matrix of constant terms.
    pub fn constant_coefficients(&self) -> Vec<Vec<Coeff>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).constant_term()).collect())
            .collect()
    }

    pub fn support_in_monoid(&self, monoid: &Monoid) -> bool {
        self.entries.iter().all(|s| s.support_in_monoid(monoid))
    }

    fn check_same_shape(&self, other: &SeriesMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} against {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.check_compatible(other)
    }

    fn check_compatible(&self, other: &SeriesMatrix) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SeriesMatrix {
            entries,
            ..self.clone_shape()
        })
    }

    pub fn try_sub(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.try_add(&other.negate())
    }

    pub fn negate(&self) -> SeriesMatrix {
        self.map(Series::negate)
    }

    pub fn try_mul(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.check_compatible(other)?;
        Ok(SeriesMatrix::from_fn(
            self.rows,
            other.cols,
            self.nvars,
            &self.ring,
            |i, j| {
                let mut acc = Series::zero(self.nvars, self.ring.clone(), Prec::Infinite);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    // exact zeros contribute nothing, not even a precision bound
                    if a.is_zero() && a.prec().is_infinite() || b.is_zero() && b.prec().is_infinite() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                acc
            },
        ))
    }

    /// Product known at least up to `target`: each factor is first cut to
    /// the precision that the other factor's least weight allows.
    pub fn mul_to(&self, other: &SeriesMatrix, target: &Prec) -> Result<SeriesMatrix> {
        let a = match other.w_min() {
            Prec::Finite(w) => self.truncate(&target.shift(&-w)),
            Prec::Infinite => self.clone(),
        };
        let b = match self.w_min() {
            Prec::Finite(w) => other.truncate(&target.shift(&-w)),
            Prec::Infinite => other.clone(),
        };
        Ok(a.try_mul(&b)?.truncate(target))
    }

    fn clone_shape(&self) -> SeriesMatrix {
        SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            ring: self.ring.clone(),
            entries: Vec::new(),
        }
    }

    fn check_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{}x{} matrix is not square",
                self.rows, self.cols
            )))
        }
    }

    /// Determinant by cofactor expansion; exact on exact input.
    pub fn det(&self) -> Result<Series> {
        self.check_square()?;
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.minor_det(&idx, &idx))
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> Series {
        if rows.len() == 1 {
            return self.get(rows[0], cols[0]).clone();
        }
        let ring = &self.ring;
        let mut acc = Series::zero(self.nvars, ring.clone(), Prec::Infinite);
        let r = rows[0];
        let sub_rows = &rows[1..];
        for (pos, &c) in cols.iter().enumerate() {
            let a = self.get(r, c);
            if a.is_zero() && a.prec().is_infinite() {
                continue;
            }
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a * &self.minor_det(sub_rows, &sub_cols);
            acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    /// Inverse of a square matrix.
    ///
    /// Exact input whose determinant has an exact inverse is inverted by the
    /// adjugate formula, so no precision is lost. Otherwise Gauss-Jordan
    /// elimination runs with the pivot of least `w_min` among the invertible
    /// candidates of the current column, ties going to the lowest row.
    pub fn invert(&self) -> Result<SeriesMatrix> {
        self.check_square()?;
        if self.is_exact() && self.rows <= MAX_EXACT_ADJUGATE {
            let d = self.det()?;
            if let Ok(dinv) = d.invert() {
                if dinv.prec().is_infinite() {
                    return Ok(self.adjugate().scale(&dinv));
                }
            }
        }
        self.gauss_jordan()
    }

    /// Inverse known at least below `target`: exact when [`invert`] manages,
    /// otherwise computed from truncations of exact input with growing slack.
    ///
    /// [`invert`]: SeriesMatrix::invert
    pub fn invert_to(&self, target: &Prec) -> Result<SeriesMatrix> {
        match self.invert() {
            Err(Error::PrecisionExhausted(msg)) if self.is_exact() => {
                let Prec::Finite(t) = target else {
                    return Err(Error::PrecisionExhausted(msg));
                };
                let slack = match self.w_min() {
                    Prec::Finite(w) if w.is_negative() => -w,
                    _ => Rational::zero(),
                };
                for k in 1..=6i64 {
                    let k = Rational::from_integer(k.into());
                    let level = t + &slack * Rational::from_integer(2.into()) * &k + &k;
                    let inv = self.truncate(&Prec::Finite(level)).invert()?;
                    if inv.prec() >= *target {
                        return Ok(inv);
                    }
                }
                Err(Error::PrecisionExhausted(msg))
            }
            r => r,
        }
    }

    fn adjugate(&self) -> SeriesMatrix {
        let n = self.rows;
        if n == 1 {
            return SeriesMatrix::identity(1, self.nvars, &self.ring);
        }
        SeriesMatrix::from_fn(n, n, self.nvars, &self.ring, |i, j| {
            // adj[i][j] = (-1)^{i+j} det(minor without row j, column i)
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let m = self.minor_det(&rows, &cols);
            if (i + j) % 2 == 0 {
                m
            } else {
                m.negate()
            }
        })
    }

    fn gauss_jordan(&self) -> Result<SeriesMatrix> {
        let n = self.rows;
        let mut a: Vec<Vec<Series>> = (0..n).map(|i| self.row_vec(i)).collect();
        let mut inv: Vec<Vec<Series>> = (0..n)
            .map(|i| SeriesMatrix::identity(n, self.nvars, &self.ring).row_vec(i))
            .collect();
        for k in 0..n {
            let pivot = (k..n)
                .filter(|&i| a[i][k].is_invertible())
                .min_by(|&i, &j| a[i][k].w_min().cmp(&a[j][k].w_min()).then(i.cmp(&j)))
                .ok_or_else(|| {
                    // Only exact candidates certify that no pivot exists.
                    if (k..n).all(|i| a[i][k].prec().is_infinite()) {
                        Error::NotInvertible(format!("no usable pivot in column {k}"))
                    } else {
                        Error::PrecisionExhausted(format!("no pivot certified in column {k}"))
                    }
                })?;
            a.swap(k, pivot);
            inv.swap(k, pivot);
            let pinv = a[k][k].invert()?;
            for j in 0..n {
                a[k][j] = &a[k][j] * &pinv;
                inv[k][j] = &inv[k][j] * &pinv;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() && a[i][k].prec().is_infinite() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in 0..n {
                    a[i][j] = &a[i][j] - &(&f * &a[k][j]);
                    inv[i][j] = &inv[i][j] - &(&f * &inv[k][j]);
                }
            }
        }
        let out = SeriesMatrix::from_rows(inv)?;
        if let (Some(d), Prec::Finite(w)) = (out.prec().finite(), out.w_min()) {
            if d <= &w {
                return Err(Error::PrecisionExhausted("matrix inverse is vacuous".into()));
            }
        }
        Ok(out)
    }

    /// Solves `self * x = b` for a column `b`.
    pub fn solve_linear(&self, b: &SeriesMatrix) -> Result<SeriesMatrix> {
        if b.cols != 1 || b.rows != self.rows {
            return Err(Error::ShapeMismatch("right-hand side is not a matching column".into()));
        }
        self.invert()?.try_mul(b)
    }

    /// Equals the identity up to precision.
    pub fn is_identity_up_to_prec(&self) -> bool {
        self.is_square()
            && self.eq_up_to_prec(&SeriesMatrix::identity(self.rows, self.nvars, &self.ring))
    }
}

/// Result of [`minimal_dependence`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dependence {
    /// `v_n = sum_{i<n} a_i v_i` with `coeffs = [a_0, ..., a_{n-1}]`.
    Dependent { n: usize, coeffs: Vec<Series> },
    Independent,
}

/// Finds the least `n` with `v_n` in the span of `v_0, ..., v_{n-1}`.
///
/// Vectors are columns of equal height over a field. A nonzero stored term
/// in the elimination residual certifies independence; a residual with no
/// stored terms is read as dependence at the working precision.
pub fn minimal_dependence(vectors: &[SeriesMatrix]) -> Result<Dependence> {
    let Some(first) = vectors.first() else {
        return Ok(Dependence::Independent);
    };
    if !first.ring().is_field() {
        return Err(Error::NotAField);
    }
    if vectors.iter().any(|v| v.cols != 1 || v.rows != first.rows) {
        return Err(Error::ShapeMismatch("vectors of unequal height".into()));
    }
    if vectors[0].is_zero() {
        return Err(Error::ZeroSeed);
    }
    for n in 1..vectors.len() {
        if let Some(coeffs) = express_in_span(&vectors[..n], &vectors[n])? {
            return Ok(Dependence::Dependent { n, coeffs });
        }
    }
    Ok(Dependence::Independent)
}

/// Coefficients of `target` in the span of the independent `basis`, or
/// `None` when the residual is certifiably nonzero.
fn express_in_span(basis: &[SeriesMatrix], target: &SeriesMatrix) -> Result<Option<Vec<Series>>> {
    let h = target.rows;
    let n = basis.len();
    // rows of the augmented system [basis | target]
    let mut m: Vec<Vec<Series>> = (0..h)
        .map(|i| {
            let mut row: Vec<Series> = basis.iter().map(|v| v.get(i, 0).clone()).collect();
            row.push(target.get(i, 0).clone());
            row
        })
        .collect();
    let mut pivot_rows = Vec::with_capacity(n);
    for k in 0..n {
        let r = pivot_rows.len();
        let pivot = (r..h)
            .filter(|&i| m[i][k].is_invertible())
            .min_by(|&i, &j| m[i][k].w_min().cmp(&m[j][k].w_min()).then(i.cmp(&j)))
            .ok_or_else(|| {
                Error::PrecisionExhausted("independence lost during elimination".into())
            })?;
        m.swap(r, pivot);
        let pinv = m[r][k].invert()?;
        for j in k..=n {
            m[r][j] = &m[r][j] * &pinv;
        }
        for i in 0..h {
            if i == r || m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone();
            for j in k..=n {
                m[i][j] = &m[i][j] - &(&f * &m[r][j]);
            }
        }
        pivot_rows.push(k);
    }
    if m[n..].iter().any(|row| !row[n].is_zero()) {
        return Ok(None);
    }
    let floor = basis
        .iter()
        .chain(std::iter::once(target))
        .map(SeriesMatrix::w_min)
        .min()
        .unwrap();
    for row in &m[n..] {
        if row[n].prec() <= &floor {
            return Err(Error::PrecisionExhausted(
                "residual precision below the weights of the input".into(),
            ));
        }
    }
    Ok(Some((0..n).map(|k| m[k][n].clone()).collect()))
}

impl Add for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn add(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        self.try_add(rhs).expect("matrix addition")
    }
}

impl Sub for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn sub(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        self.try_sub(rhs).expect("matrix subtraction")
    }
}

impl Mul for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn mul(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        self.try_mul(rhs).expect("matrix multiplication")
    }
}

impl Neg for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn neg(self) -> SeriesMatrix {
        self.negate()
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
