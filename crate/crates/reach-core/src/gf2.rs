//! Truncated polynomial arithmetic over ℤ₂ and matrix algebra on top of it.
//!
//! Polynomials live in ℤ₂[x]/(x^{b+1}) with bit-packed coefficients; the
//! bound b is explicit everywhere, never implicit. Matrices over that ring
//! support local-ring inversion (Gaussian elimination with unit-constant
//! pivots) and the Sherman-Morrison-Woodbury low-rank inverse update. Units
//! of the ring are exactly the elements with constant coefficient 1.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("degree bound mismatch: {left} vs {right}")]
    BoundMismatch { left: usize, right: usize },
    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch { left_rows: usize, left_cols: usize, right_rows: usize, right_cols: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("constant coefficient is 0: not a unit in the truncated ring")]
    NonUnit,
    #[error("constant-term matrix is singular over Z2")]
    ConstantSingular,
}

/// An element of ℤ₂[x]/(x^{b+1}): coefficient bits for degrees 0..=b.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedPoly {
    bound: usize,
    words: Vec<u64>,
}

impl TruncatedPoly {
    pub fn zero(bound: usize) -> Self {
        TruncatedPoly { bound, words: vec![0; (bound + 1).div_ceil(64)] }
    }

    pub fn one(bound: usize) -> Self {
        let mut p = Self::zero(bound);
        p.set_coeff(0, true);
        p
    }

    /// x^degree, or zero when the degree exceeds the bound.
    pub fn monomial(degree: usize, bound: usize) -> Self {
        let mut p = Self::zero(bound);
        if degree <= bound {
            p.set_coeff(degree, true);
        }
        p
    }

    pub fn from_degrees(degrees: &[usize], bound: usize) -> Self {
        let mut p = Self::zero(bound);
        for &d in degrees {
            if d <= bound {
                p.set_coeff(d, !p.coeff(d));
            }
        }
        p
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn coeff(&self, degree: usize) -> bool {
        degree <= self.bound && self.words[degree / 64] & (1 << (degree % 64)) != 0
    }

    pub fn set_coeff(&mut self, degree: usize, value: bool) {
        assert!(degree <= self.bound, "degree {degree} exceeds bound {}", self.bound);
        let mask = 1 << (degree % 64);
        if value {
            self.words[degree / 64] |= mask;
        } else {
            self.words[degree / 64] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn constant_term(&self) -> bool {
        self.words[0] & 1 != 0
    }

    /// Exponents with coefficient 1, ascending.
    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.bound).filter(|&d| self.coeff(d))
    }

    /// The same polynomial under a smaller bound.
    pub fn truncated(&self, bound: usize) -> Self {
        assert!(bound <= self.bound);
        let mut p = Self::zero(bound);
        for w in 0..p.words.len() {
            p.words[w] = self.words[w];
        }
        p.clear_tail();
        p
    }

    /// Zeroes bits above the bound inside the last word.
    fn clear_tail(&mut self) {
        let used = (self.bound + 1) % 64;
        if used != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << used) - 1;
        }
    }

    /// XORs `other << shift` into `self`, dropping degrees above the bound.
    fn xor_shifted(&mut self, other: &TruncatedPoly, shift: usize) {
        if shift > self.bound {
            return;
        }
        let word_shift = shift / 64;
        let bit_shift = shift % 64;
        for i in (0..self.words.len().saturating_sub(word_shift)).rev() {
            let mut chunk = other.words[i] << bit_shift;
            if bit_shift != 0 && i > 0 {
                chunk |= other.words[i - 1] >> (64 - bit_shift);
            }
            self.words[i + word_shift] ^= chunk;
        }
        self.clear_tail();
    }
}

fn check_bounds(p: &TruncatedPoly, q: &TruncatedPoly) -> Result<(), Gf2Error> {
    if p.bound != q.bound {
        return Err(Gf2Error::BoundMismatch { left: p.bound, right: q.bound });
    }
    Ok(())
}

/// Coefficientwise XOR.
pub fn poly_add(p: &TruncatedPoly, q: &TruncatedPoly) -> Result<TruncatedPoly, Gf2Error> {
    check_bounds(p, q)?;
    let mut out = p.clone();
    for (a, b) in out.words.iter_mut().zip(&q.words) {
        *a ^= b;
    }
    Ok(out)
}

/// Convolution mod 2, truncated at the bound.
pub fn poly_mul(p: &TruncatedPoly, q: &TruncatedPoly) -> Result<TruncatedPoly, Gf2Error> {
    check_bounds(p, q)?;
    let mut out = TruncatedPoly::zero(p.bound);
    for d in p.degrees() {
        out.xor_shifted(q, d);
    }
    Ok(out)
}

/// Multiplicative inverse in ℤ₂[x]/(x^{b+1}) by Newton iteration: with
/// e = 1 + p·q the refinement q ← q·(1 + e) squares the error, so
/// ⌈log₂(b+1)⌉ rounds reach full precision from q = 1.
pub fn poly_series_inverse(p: &TruncatedPoly) -> Result<TruncatedPoly, Gf2Error> {
    if !p.constant_term() {
        return Err(Gf2Error::NonUnit);
    }
    let b = p.bound;
    let mut q = TruncatedPoly::one(b);
    let mut precision = 1usize;
    while precision <= b {
        let mut err = poly_mul(p, &q)?;
        err.set_coeff(0, !err.coeff(0));
        let correction = poly_mul(&q, &err)?;
        q = poly_add(&q, &correction)?;
        precision *= 2;
    }
    Ok(q)
}

/// A rows×cols matrix over ℤ₂[x]/(x^{b+1}), row-major, uniform bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    bound: usize,
    entries: Vec<TruncatedPoly>,
}

impl PolyMatrix {
    pub fn zero(rows: usize, cols: usize, bound: usize) -> Self {
        PolyMatrix { rows, cols, bound, entries: vec![TruncatedPoly::zero(bound); rows * cols] }
    }

    pub fn identity(n: usize, bound: usize) -> Self {
        let mut m = Self::zero(n, n, bound);
        for i in 0..n {
            m.set(i, i, TruncatedPoly::one(bound));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn get(&self, r: usize, c: usize) -> &TruncatedPoly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: TruncatedPoly) {
        assert_eq!(p.bound, self.bound, "entry bound must match the matrix bound");
        self.entries[r * self.cols + c] = p;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// One line per nonzero entry: `r c : d1,d2,...` listing the exponents
    /// with coefficient 1.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let entry = self.get(r, c);
                if entry.is_zero() {
                    continue;
                }
                let degrees: Vec<String> = entry.degrees().map(|d| d.to_string()).collect();
                let _ = writeln!(out, "{r} {c} : {}", degrees.join(","));
            }
        }
        out
    }
}

/// Entrywise XOR.
pub fn mat_add(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix, Gf2Error> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Gf2Error::ShapeMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    if a.bound != b.bound {
        return Err(Gf2Error::BoundMismatch { left: a.bound, right: b.bound });
    }
    let mut out = a.clone();
    for (x, y) in out.entries.iter_mut().zip(&b.entries) {
        for (wx, wy) in x.words.iter_mut().zip(&y.words) {
            *wx ^= wy;
        }
    }
    Ok(out)
}

/// Ring matrix product with truncation.
pub fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix, Gf2Error> {
    if a.cols != b.rows {
        return Err(Gf2Error::ShapeMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    if a.bound != b.bound {
        return Err(Gf2Error::BoundMismatch { left: a.bound, right: b.bound });
    }
    let mut out = PolyMatrix::zero(a.rows, b.cols, a.bound);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let left = a.get(i, k);
            if left.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let right = b.get(k, j);
                if right.is_zero() {
                    continue;
                }
                for d in left.degrees() {
                    out.entries[i * b.cols + j].xor_shifted(right, d);
                }
            }
        }
    }
    Ok(out)
}

/// Inverse over the local ring by Gaussian elimination: pivots must be
/// units (constant term 1), pivot rows are scaled by the series inverse,
/// and all other rows are cleared by XOR. Succeeds iff the constant-term
/// matrix is nonsingular over ℤ₂; on success both one-sided products
/// truncate to the identity.
pub fn mat_inverse_local(m: &PolyMatrix) -> Result<PolyMatrix, Gf2Error> {
    if !m.is_square() {
        return Err(Gf2Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    let n = m.rows;
    let mut work = m.clone();
    let mut inv = PolyMatrix::identity(n, m.bound);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| work.get(r, col).constant_term())
            .ok_or(Gf2Error::ConstantSingular)?;
        if pivot != col {
            for j in 0..n {
                work.entries.swap(pivot * n + j, col * n + j);
                inv.entries.swap(pivot * n + j, col * n + j);
            }
        }
        let scale = poly_series_inverse(work.get(col, col))?;
        for j in 0..n {
            let w = poly_mul(work.get(col, j), &scale)?;
            work.set(col, j, w);
            let v = poly_mul(inv.get(col, j), &scale)?;
            inv.set(col, j, v);
        }
        for r in 0..n {
            if r == col || work.get(r, col).is_zero() {
                continue;
            }
            let factor = work.get(r, col).clone();
            for j in 0..n {
                let w = poly_add(work.get(r, j), &poly_mul(&factor, work.get(col, j))?)?;
                work.set(r, j, w);
                let v = poly_add(inv.get(r, j), &poly_mul(&factor, inv.get(col, j))?)?;
                inv.set(r, j, v);
            }
        }
    }
    Ok(inv)
}

fn determinant(m: &PolyMatrix) -> Result<TruncatedPoly, Gf2Error> {
    let n = m.rows;
    if n == 0 {
        return Ok(TruncatedPoly::one(m.bound));
    }
    if n == 1 {
        return Ok(m.get(0, 0).clone());
    }
    let mut det = TruncatedPoly::zero(m.bound);
    for r in 0..n {
        if m.get(r, 0).is_zero() {
            continue;
        }
        let minor = submatrix(m, r, 0);
        let term = poly_mul(m.get(r, 0), &determinant(&minor)?)?;
        det = poly_add(&det, &term)?;
    }
    Ok(det)
}

fn submatrix(m: &PolyMatrix, skip_row: usize, skip_col: usize) -> PolyMatrix {
    let mut out = PolyMatrix::zero(m.rows - 1, m.cols - 1, m.bound);
    let mut oi = 0;
    for i in 0..m.rows {
        if i == skip_row {
            continue;
        }
        let mut oj = 0;
        for j in 0..m.cols {
            if j == skip_col {
                continue;
            }
            out.set(oi, oj, m.get(i, j).clone());
            oj += 1;
        }
        oi += 1;
    }
    out
}

/// Debug cross-check for `mat_inverse_local` via the adjugate; the cofactor
/// expansion limits it to small matrices.
pub fn mat_inverse_adjugate(m: &PolyMatrix) -> Result<PolyMatrix, Gf2Error> {
    if !m.is_square() {
        return Err(Gf2Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    assert!(m.rows <= 6, "adjugate inversion is a debug path for tiny matrices");
    let det = determinant(m)?;
    if !det.constant_term() {
        return Err(Gf2Error::ConstantSingular);
    }
    let det_inv = poly_series_inverse(&det)?;
    let n = m.rows;
    let mut inv = PolyMatrix::zero(n, n, m.bound);
    for i in 0..n {
        for j in 0..n {
            // Signs vanish in characteristic 2; adj(M)_{ij} = det(minor_{ji}).
            let cof = determinant(&submatrix(m, j, i))?;
            inv.set(i, j, poly_mul(&cof, &det_inv)?);
        }
    }
    Ok(inv)
}

/// ∆A factored through row and column selectors: ∆A = U·B·V with U an
/// n×a 0/1 row selector, B the dense a×c block, V a c×n column selector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UBVDecomposition {
    pub u: PolyMatrix,
    pub b: PolyMatrix,
    pub v: PolyMatrix,
    /// Distinct affected rows plus distinct affected columns.
    pub rank: usize,
}

/// Factors a sparse delta, given as (row, col, poly) entries, through the
/// selectors of its affected rows and columns. Duplicate positions XOR.
pub fn decompose_delta(
    entries: &[(usize, usize, TruncatedPoly)],
    n: usize,
    bound: usize,
) -> UBVDecomposition {
    let mut rows: Vec<usize> = entries.iter().map(|e| e.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<usize> = entries.iter().map(|e| e.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut u = PolyMatrix::zero(n, rows.len(), bound);
    for (i, &r) in rows.iter().enumerate() {
        u.set(r, i, TruncatedPoly::one(bound));
    }
    let mut v = PolyMatrix::zero(cols.len(), n, bound);
    for (j, &c) in cols.iter().enumerate() {
        v.set(j, c, TruncatedPoly::one(bound));
    }
    let mut b = PolyMatrix::zero(rows.len(), cols.len(), bound);
    for (r, c, p) in entries {
        let i = rows.binary_search(r).unwrap();
        let j = cols.binary_search(c).unwrap();
        let sum = poly_add(b.get(i, j), p).expect("decomposition uses one shared bound");
        b.set(i, j, sum);
    }
    UBVDecomposition { u, b, v, rank: rows.len() + cols.len() }
}

/// Low-rank inverse update: given C ≈ A⁻¹ and ∆A = U·B·V, returns
/// C − C·U·(I + B·V·C·U)⁻¹·B·V·C, a b-approximation of (A+∆A)⁻¹.
/// Fails when the inner matrix is not invertible, which signals A+∆A
/// singular or a precision breach.
pub fn smw_update(c: &PolyMatrix, d: &UBVDecomposition) -> Result<PolyMatrix, Gf2Error> {
    let cu = mat_mul(c, &d.u)?;
    let vc = mat_mul(&d.v, c)?;
    let vcu = mat_mul(&vc, &d.u)?;
    let inner = mat_add(&PolyMatrix::identity(d.b.rows(), c.bound()), &mat_mul(&d.b, &vcu)?)?;
    let inner_inv = mat_inverse_local(&inner)?;
    let correction = mat_mul(&mat_mul(&mat_mul(&cu, &inner_inv)?, &d.b)?, &vc)?;
    mat_add(c, &correction)
}
