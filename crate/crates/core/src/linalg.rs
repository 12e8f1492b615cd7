//! Self-contained dense complex linear algebra for small matrices (n <= ~64).
//!
//! Everything here is written for reproducibility rather than speed: Hermitian
//! eigenvalues via cyclic Jacobi rotations, positive-semidefinite factorization
//! through a full eigendecomposition with clamping, the generalized Hermitian
//! problem reduced by Cholesky, and a Hessenberg + shifted-QR eigensolver for
//! small general matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance used wherever a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_nested(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows in matrix literal".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    /// Real matrix literal, mostly for tests and fixtures.
    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let as_complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_nested(&as_complex)
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec: matrix has {} columns, vector has length {}",
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension("matrix shape mismatch".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a = f(*a, *b);
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for z in out.data.iter_mut() {
            *z *= s;
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian part (M + M*)/2.
    pub fn hermitize(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension("hermitize requires a square matrix".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        }))
    }

    pub fn herm_deviation(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() * 0.5
    }

    /// Largest singular value, via the Hermitian eigenvalues of A*A.
    pub fn op_norm(&self) -> Result<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(0.0);
        }
        let gram = self.adjoint().mul(self)?;
        let eigs = hermitian_eigenvalues(&gram)?;
        let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(max.max(0.0).sqrt())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product sum_k z_k * conj(w_k).
pub fn vdot(z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    if z.len() != w.len() {
        return Err(Error::Dimension(format!(
            "inner product of vectors with lengths {} and {}",
            z.len(),
            w.len()
        )));
    }
    Ok(z.iter().zip(w.iter()).map(|(a, b)| a * b.conj()).sum())
}

pub fn vnorm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|a| a.norm_sqr()).sum()
}

pub fn vnorm(z: &[Complex64]) -> f64 {
    vnorm_sq(z).sqrt()
}

// ---------------------------------------------------------------------------
// Hermitian eigenvalues: cyclic Jacobi with unitary 2x2 rotations
// ---------------------------------------------------------------------------

fn off_diag_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += a[(p, q)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Full Hermitian eigendecomposition M = V diag(l) V*.
///
/// Input is Hermitized as (M + M*)/2 before the sweep; eigenvalues come back
/// sorted ascending with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    jacobi(m, true)
}

/// Eigenvalues only (ascending).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(m, false)?.0)
}

fn jacobi(m: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "Hermitian eigensolver requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.hermitize()?;
    let mut v = CMatrix::identity(n);
    if n == 0 {
        return Ok((Vec::new(), v));
    }

    let scale = a.fro_norm().max(1.0);
    let tol = 1e-14 * scale;
    const MAX_SWEEPS: usize = 60;

    for _ in 0..MAX_SWEEPS {
        if off_diag_norm(&a) <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta <= 1e-300 {
                    continue;
                }
                // Unitary rotation zeroing the (p,q) entry: diagonal entries of a
                // Hermitian matrix are real, the off-diagonal carries the phase.
                let phase = apq / beta;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * beta);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let rpq = phase * s; // R[p][q]
                let rqp = -phase.conj() * s; // R[q][p]

                // B = A R (columns p and q change)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * rqp;
                    a[(i, q)] = aip * rpq + aiq * c;
                }
                // A' = R* B (rows p and q change)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * rqp.conj();
                    a[(q, j)] = apj * rpq.conj() + aqj * c;
                }
                // kill rounding drift off the real diagonal
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;

                if want_vectors {
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * c + viq * rqp;
                        v[(i, q)] = vip * rpq + viq * c;
                    }
                }
            }
        }
    }

    if off_diag_norm(&a) > tol * 100.0 {
        return Err(Error::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
///
/// The input must be Hermitian up to 1e-12 * ||m||_F; it is symmetrized before
/// the eigenvalue computation.
pub fn hermitian_min_eig(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "hermitian_min_eig requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.herm_deviation() > 1e-12 * m.fro_norm().max(1.0) {
        return Err(Error::Domain("matrix is not Hermitian within tolerance".into()));
    }
    let eigs = hermitian_eigenvalues(m)?;
    eigs.first().copied().ok_or_else(|| Error::Dimension("empty matrix".into()))
}

/// Factor a Hermitian PSD matrix as M = X*X.
///
/// Eigenvalues in [-tol, 0] are clamped to zero, so exactly singular inputs
/// (J-unitary defect matrices are the motivating case) factor cleanly where a
/// pivoted Cholesky would fail. Anything below -tol is an error carrying the
/// offending eigenvalue.
pub fn psd_factor(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (mut values, vectors) = hermitian_eigen(m)?;
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(Error::NotPsd { min_eig: min, tol });
        }
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    // X = diag(sqrt(l)) V*  =>  X*X = V diag(l) V* = M.
    let n = m.rows();
    let ustar = vectors.adjoint();
    Ok(CMatrix::from_fn(n, n, |i, j| ustar[(i, j)] * values[i].sqrt()))
}

/// Cholesky factor L with M = L L*, L lower triangular.
pub fn cholesky(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("cholesky requires a square matrix".into()));
    }
    let n = m.rows();
    let mut l = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)].conj();
            }
            if i == j {
                let diag = sum.re;
                if diag <= 0.0 {
                    return Err(Error::NotPd(diag));
                }
                l[(i, i)] = Complex64::new(diag.sqrt(), 0.0);
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

fn forward_solve(l: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            x[i] = x[i] - lik * x[k];
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// max over nonzero v of <A v, v> / <B v, v> for Hermitian A and positive
/// definite B, by Cholesky reduction to a standard Hermitian problem.
pub fn generalized_max_eig(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension("generalized eigenproblem needs square matrices of equal size".into()));
    }
    if a.herm_deviation() > 1e-10 * a.fro_norm().max(1.0)
        || b.herm_deviation() > 1e-10 * b.fro_norm().max(1.0)
    {
        return Err(Error::Domain("generalized eigenproblem inputs must be Hermitian".into()));
    }
    let min_b = hermitian_min_eig(b)?;
    if min_b <= 1e-12 {
        return Err(Error::NotPd(min_b));
    }
    let n = a.rows();
    let l = cholesky(&b.hermitize()?)?;
    // C = L^{-1} A L^{-*}: forward-solve columns twice (second time on the adjoint).
    let mut m1 = CMatrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| a[(i, j)]).collect();
        let x = forward_solve(&l, &col);
        for i in 0..n {
            m1[(i, j)] = x[i];
        }
    }
    let m1h = m1.adjoint();
    let mut c = CMatrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| m1h[(i, j)]).collect();
        let x = forward_solve(&l, &col);
        for i in 0..n {
            c[(i, j)] = x[i];
        }
    }
    let c = c.adjoint();
    let eigs = hermitian_eigenvalues(&c.hermitize()?)?;
    eigs.last().copied().ok_or_else(|| Error::Dimension("empty matrix".into()))
}

/// Evaluate sum_k coeffs[k] A^k by Horner's scheme.
pub fn mat_poly_eval(coeffs: &[Complex64], a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "polynomial evaluation requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut p = CMatrix::zeros(n, n);
    for &c in coeffs.iter().rev() {
        p = p.mul(a)?;
        for i in 0..n {
            p[(i, i)] += c;
        }
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

pub fn lu_factor(m: &CMatrix) -> Result<Lu> {
    if !m.is_square() {
        return Err(Error::Dimension("LU requires a square matrix".into()));
    }
    let n = m.rows();
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = m.fro_norm().max(1.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[(col, col)].norm_sqr();
        for r in col + 1..n {
            let cand = lu[(r, col)].norm_sqr();
            if cand > best {
                best = cand;
                pivot = r;
            }
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            perm.swap(col, pivot);
        }
        let mut diag = lu[(col, col)];
        if diag.norm() < 1e-300 {
            // keep the factorization usable for inverse iteration on singular shifts
            diag = Complex64::new(1e-300 * scale, 0.0);
            lu[(col, col)] = diag;
        }
        for r in col + 1..n {
            let factor = lu[(r, col)] / diag;
            lu[(r, col)] = factor;
            for j in col + 1..n {
                let sub = factor * lu[(col, j)];
                lu[(r, j)] = lu[(r, j)] - sub;
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl Lu {
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::Dimension("LU solve: right-hand side length mismatch".into()));
        }
        let mut y = vec![ZERO; n];
        for i in 0..n {
            let mut acc = b[self.perm[i]];
            for k in 0..i {
                acc -= self.lu[(i, k)] * y[k];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= self.lu[(i, k)] * y[k];
            }
            y[i] = acc / self.lu[(i, i)];
        }
        Ok(y)
    }
}

/// Solve (I - A) x = b.
pub fn solve_i_minus(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { ONE } else { ZERO };
        id - a[(i, j)]
    });
    lu_factor(&m)?.solve(b)
}

// ---------------------------------------------------------------------------
// General (non-Hermitian) eigensolver for small matrices
// ---------------------------------------------------------------------------

pub struct GeneralEigen {
    pub values: Vec<Complex64>,
    /// Unit eigenvectors matching `values`; may contain fewer entries than
    /// `values` for defective matrices.
    pub vectors: Vec<Vec<Complex64>>,
    /// Set when eigenvalues cluster within 1e-8 of each other (relative to the
    /// matrix scale); Jordan structure is not resolved.
    pub degenerate: bool,
}

fn hessenberg(a: &mut CMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        // Householder vector for column k below the subdiagonal
        let mut col: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = vnorm(&col);
        if norm < 1e-300 {
            continue;
        }
        let alpha = if col[0].norm() > 0.0 {
            -(col[0] / col[0].norm()) * norm
        } else {
            Complex64::new(-norm, 0.0)
        };
        col[0] -= alpha;
        let vnrm = vnorm(&col);
        if vnrm < 1e-300 {
            continue;
        }
        for c in col.iter_mut() {
            *c /= vnrm;
        }
        // A <- H A H with H = I - 2 v v*
        for j in 0..n {
            let mut dot = ZERO;
            for (idx, i) in (k + 1..n).enumerate() {
                dot += col[idx].conj() * a[(i, j)];
            }
            let dot2 = dot * 2.0;
            for (idx, i) in (k + 1..n).enumerate() {
                let delta = col[idx] * dot2;
                a[(i, j)] -= delta;
            }
        }
        for i in 0..n {
            let mut dot = ZERO;
            for (idx, j) in (k + 1..n).enumerate() {
                dot += a[(i, j)] * col[idx];
            }
            let dot2 = dot * 2.0;
            for (idx, j) in (k + 1..n).enumerate() {
                let delta = dot2 * col[idx].conj();
                a[(i, j)] -= delta;
            }
        }
    }
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    (tr + disc, tr - disc)
}

/// Eigenvalues of a general complex matrix via Hessenberg reduction and
/// Wilkinson-shifted QR with deflation.
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues require a square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let mut values = Vec::with_capacity(n);
    let mut hi = n; // active block is 0..hi
    let scale = m.fro_norm().max(1.0);
    let eps = f64::EPSILON;
    let mut iters = 0usize;
    let max_iters = 200 * n.max(1);

    while hi > 0 {
        // deflate tiny subdiagonals
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { scale } else { s };
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            values.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            continue;
        }
        if lo == hi - 2 {
            let (l1, l2) = eig2(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            );
            values.push(l1);
            values.push(l2);
            hi -= 2;
            continue;
        }

        iters += 1;
        if iters > max_iters {
            return Err(Error::NoConvergence);
        }

        // Wilkinson shift: trailing 2x2 eigenvalue closest to the corner entry
        let (l1, l2) = eig2(
            h[(hi - 2, hi - 2)],
            h[(hi - 2, hi - 1)],
            h[(hi - 1, hi - 2)],
            h[(hi - 1, hi - 1)],
        );
        let corner = h[(hi - 1, hi - 1)];
        let mut mu = if (l1 - corner).norm() < (l2 - corner).norm() { l1 } else { l2 };
        if iters % 17 == 0 {
            // occasional exceptional shift to break symmetry stalls
            mu += Complex64::new(h[(hi - 1, hi - 2)].norm(), 0.0);
        }

        // explicit shifted QR on the active block via Givens rotations
        let k = hi - lo;
        let mut givens: Vec<(f64, Complex64)> = Vec::with_capacity(k - 1);
        for i in lo..hi {
            h[(i, i)] -= mu;
        }
        for i in lo..hi - 1 {
            let f = h[(i, i)];
            let g = h[(i + 1, i)];
            let hyp = (f.norm_sqr() + g.norm_sqr()).sqrt();
            let (c, s) = if hyp < 1e-300 {
                (1.0, ZERO)
            } else if f.norm() < 1e-300 {
                (0.0, g.conj() / g.norm())
            } else {
                let sign = f / f.norm();
                (f.norm() / hyp, sign * g.conj() / hyp)
            };
            // rows i, i+1 <- G [rows]
            for j in i..hi {
                let a1 = h[(i, j)];
                let a2 = h[(i + 1, j)];
                h[(i, j)] = a1 * c + a2 * s;
                h[(i + 1, j)] = -a1 * s.conj() + a2 * c;
            }
            givens.push((c, s));
        }
        for (idx, &(c, s)) in givens.iter().enumerate() {
            let i = lo + idx;
            // columns i, i+1 <- [cols] G*
            let top = (i + 2).min(hi);
            for r in lo..top {
                let a1 = h[(r, i)];
                let a2 = h[(r, i + 1)];
                h[(r, i)] = a1 * c + a2 * s.conj();
                h[(r, i + 1)] = -a1 * s + a2 * c;
            }
        }
        for i in lo..hi {
            h[(i, i)] += mu;
        }
    }
    Ok(values)
}

/// Eigenvalues plus eigenvectors (inverse iteration on the original matrix).
pub fn general_eigen(m: &CMatrix) -> Result<GeneralEigen> {
    let n = m.rows();
    let mut values = general_eigenvalues(m)?;
    values.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let scale = m.fro_norm().max(1.0);
    let cluster_gap = 1e-8 * scale;

    let mut degenerate = false;
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut kept_values: Vec<Complex64> = Vec::with_capacity(n);

    let mut idx = 0;
    while idx < values.len() {
        // cluster of (numerically) equal eigenvalues
        let mut end = idx + 1;
        while end < values.len() && (values[end] - values[idx]).norm() <= cluster_gap {
            end += 1;
        }
        let csize = end - idx;
        if csize > 1 {
            degenerate = true;
        }
        let lambda = values[idx];
        let mut found: Vec<Vec<Complex64>> = Vec::new();
        for member in 0..csize {
            let shift = lambda
                + Complex64::new(
                    1e-12 * scale * (1.0 + member as f64),
                    0.7e-12 * scale * member as f64,
                );
            let shifted = CMatrix::from_fn(n, n, |i, j| {
                let id = if i == j { ONE } else { ZERO };
                m[(i, j)] - shift * id
            });
            let lu = match lu_factor(&shifted) {
                Ok(lu) => lu,
                Err(_) => continue,
            };
            // deterministic quasi-random start
            let mut v: Vec<Complex64> = (0..n)
                .map(|i| {
                    let t = (i as f64 + 1.5) * 0.7368 + member as f64 * 0.311;
                    Complex64::new(t.sin(), t.cos())
                })
                .collect();
            let mut ok = false;
            for _ in 0..4 {
                let mut w = match lu.solve(&v) {
                    Ok(w) => w,
                    Err(_) => break,
                };
                // project out previously found vectors in this cluster
                for f in &found {
                    let coef = vdot(&w, f).unwrap();
                    for (wi, fi) in w.iter_mut().zip(f.iter()) {
                        *wi -= coef * fi;
                    }
                }
                let nrm = vnorm(&w);
                if nrm < 1e-290 {
                    break;
                }
                for wi in w.iter_mut() {
                    *wi /= nrm;
                }
                v = w;
                // residual against the unshifted eigenvalue
                let av = m.matvec(&v).unwrap();
                let res: f64 = av
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| (a - lambda * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if res <= 1e-6 * scale {
                    ok = true;
                    break;
                }
            }
            if ok {
                found.push(v.clone());
                vectors.push(v);
                kept_values.push(lambda);
            } else if member == 0 {
                // even the first vector failed: genuinely defective data
                degenerate = true;
            }
        }
        if found.len() < csize {
            degenerate = true;
        }
        idx = end;
    }

    Ok(GeneralEigen { values: kept_values, vectors, degenerate })
}

// ---------------------------------------------------------------------------
