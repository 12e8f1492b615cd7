//! Linear fractional self-maps of the unit ball, encoded projectively.
//!
//! A map phi(z) = (Az + B) / (<z, C> + D) is stored as the (m+1)x(m+1) block
//! matrix T = [A B; C* D] acting on homogeneous coordinates (z; 1). The matrix
//! is only determined up to a scalar; phi is a self-map of the ball exactly
//! when some positive scaling t makes J - t T*JT positive semidefinite, where
//! J = diag(I_m, -1). That scaling is searched for at validation time and then
//! drives the explicit factorization of the de Branges-Rovnyak kernel
//!
//! ```text
//! k_phi(z, w) = (1 - <phi(z), phi(w)>) / (1 - <z, w>)
//! ```
//!
//! whose positivity places every validated map in the Schur-Agler class.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{sample_ball, BallPoint};
use crate::linalg::{
    general_eigen, hermitian_min_eig, psd_factor, vdot, vnorm, CMatrix, DEFAULT_TOL,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Seed for the validation spot-check sampler when none is supplied.
pub const VALIDATION_SEED: u64 = 42;

/// The signature matrix J = diag(I_m, -1) of the indefinite form on C^{m+1}.
pub fn j_matrix(m: usize) -> CMatrix {
    let mut j = CMatrix::identity(m + 1);
    j[(m, m)] = Complex64::new(-1.0, 0.0);
    j
}

#[derive(Debug, Clone)]
pub struct LinearFractionalMap {
    m: usize,
    t: CMatrix,
    /// Contractive representative scaling found at validation; None until then.
    scale: Option<f64>,
}

/// Where a fixed point sits relative to the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub point: Vec<Complex64>,
    pub location: Location,
    /// Eigenvalue of T on the homogeneous representative.
    pub eigenvalue: Complex64,
}

#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
    /// Eigenvalue clusters were too close to resolve reliably (identity and
    /// parabolic maps land here); results are still returned.
    pub degenerate: bool,
}

/// Data realizing the explicit kernel factorization
///
/// ```text
/// k_phi(z,w) = (1 + L(z) L(w)* / (1 - <z,w>)) / ((<z,C> + D) conj(<w,C> + D))
/// ```
///
/// with L(z) = X (z; 1) and X*X = J - T*JT for the contractive representative.
#[derive(Debug, Clone)]
pub struct KernelFactorization {
    pub x: CMatrix,
    pub c: Vec<Complex64>,
    pub d: Complex64,
}

impl KernelFactorization {
    pub fn l_vec(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut hom = z.to_vec();
        hom.push(ONE);
        self.x.matvec(&hom)
    }

    pub fn denominator(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(vdot(z, &self.c)? + self.d)
    }

    /// Evaluate the factored form of the kernel at interior points.
    pub fn eval(&self, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
        let lz = self.l_vec(z.coords())?;
        let lw = self.l_vec(w.coords())?;
        let cross = vdot(&lz, &lw)?;
        let ip = vdot(z.coords(), w.coords())?;
        let dz = self.denominator(z.coords())?;
        let dw = self.denominator(w.coords())?;
        Ok((ONE + cross / (ONE - ip)) / (dz * dw.conj()))
    }
}

impl LinearFractionalMap {
    pub fn new(m: usize, t: CMatrix) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("map dimension must be >= 1".into()));
        }
        if t.rows() != m + 1 || t.cols() != m + 1 {
            return Err(Error::Dimension(format!(
                "map on B^{m} needs a {}x{} matrix, got {}x{}",
                m + 1,
                m + 1,
                t.rows(),
                t.cols()
            )));
        }
        if !t.is_finite() {
            return Err(Error::Domain("map matrix has non-finite entries".into()));
        }
        Ok(Self { m, t, scale: None })
    }

    pub fn identity(m: usize) -> Self {
        Self { m, t: CMatrix::identity(m + 1), scale: Some(1.0) }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    pub fn contractive_scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn is_validated(&self) -> bool {
        self.scale.is_some()
    }

    /// sqrt(t) T for the stored contractive scaling.
    pub fn scaled_matrix(&self) -> Result<CMatrix> {
        let s = self.scale.ok_or_else(|| {
            Error::InvalidMap("no contractive scaling stored; validate the map first".into())
        })?;
        Ok(self.t.scale(Complex64::new(s.sqrt(), 0.0)))
    }

    pub(crate) fn eval_raw(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.m {
            return Err(Error::Dimension(format!(
                "map on B^{} applied to a point of dimension {}",
                self.m,
                z.len()
            )));
        }
        let mut hom = z.to_vec();
        hom.push(ONE);
        let image = self.t.matvec(&hom)?;
        let den = image[self.m];
        let num_scale = vnorm(&image[..self.m]);
        if den.norm() < 1e-14 * num_scale.max(1.0) {
            return Err(Error::Pole(
                "denominator vanished inside the ball; map data is not a self-map".into(),
            ));
        }
        Ok(image[..self.m].iter().map(|&c| c / den).collect())
    }

    /// Apply the map to an interior point. The image of a validated self-map
    /// is interior again; anything else is an error.
    pub fn eval(&self, z: &BallPoint) -> Result<BallPoint> {
        BallPoint::interior(self.eval_raw(z.coords())?)
    }

    /// Projective composition: matrix product of the representatives.
    /// eval(compose(phi, psi), z) = phi(psi(z)).
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.m != inner.m {
            return Err(Error::Dimension("composition of maps with different dimensions".into()));
        }
        Self::new(self.m, self.t.mul(&inner.t)?)
    }

    /// J - t T*JT, the defect of J-contractivity at scaling t.
    pub fn j_defect(&self, t: f64) -> Result<CMatrix> {
        if t <= 0.0 {
            return Err(Error::Domain("scaling must be positive".into()));
        }
        let j = j_matrix(self.m);
        let tjt = self.t.adjoint().mul(&j)?.mul(&self.t)?;
        j.sub(&tjt.scale(Complex64::new(t, 0.0)))
    }

    fn defect_min_eig(&self, t: f64) -> f64 {
        let d = self.j_defect(t).expect("defect construction cannot fail for t > 0");
        // the defect is Hermitian by construction up to rounding
        hermitian_min_eig(&d.hermitize().expect("square")).unwrap_or(f64::NEG_INFINITY)
    }

    /// Search for t > 0 making J - t T*JT positive semidefinite (within
    /// 1e-9). The minimum eigenvalue is concave in t, so a log-spaced grid
    /// scan bracketing the maximum followed by a ternary refinement is
    /// complete at this scale. Returns the maximizing t; None means no
    /// feasible scaling exists in [1e-8, 1e8] and phi is not a self-map.
    pub fn find_contractive_scaling(&self) -> Option<f64> {
        const LO: f64 = 1e-8;
        const HI: f64 = 1e8;
        const GRID: usize = 200;

        let mut best_t = LO;
        let mut best_f = f64::NEG_INFINITY;
        let mut best_idx = 0usize;
        let ratio = (HI / LO).powf(1.0 / (GRID as f64 - 1.0));
        let grid: Vec<f64> = (0..GRID).map(|i| LO * ratio.powi(i as i32)).collect();
        for (i, &t) in grid.iter().enumerate() {
            let f = self.defect_min_eig(t);
            if f > best_f {
                best_f = f;
                best_t = t;
                best_idx = i;
            }
        }

        // ternary refinement inside the bracketing grid cells
        let mut lo = grid[best_idx.saturating_sub(1)];
        let mut hi = grid[(best_idx + 1).min(GRID - 1)];
        for _ in 0..200 {
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.defect_min_eig(m1) < self.defect_min_eig(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let t = 0.5 * (lo + hi);
        let f = self.defect_min_eig(t);
        let (t, f) = if f >= best_f { (t, f) } else { (best_t, best_f) };
        if f >= -DEFAULT_TOL {
            Some(t)
        } else {
            None
        }
    }

    /// Validate as a self-map: find the contractive scaling and spot-check
    /// that 500 seeded interior points stay interior. Stores the scaling.
    pub fn validate_seeded(mut self, seed: u64) -> Result<Self> {
        let t = self.find_contractive_scaling().ok_or_else(|| {
            Error::NotSelfMap("no contractive scaling exists in [1e-8, 1e8]".into())
        })?;
        for p in sample_ball(self.m, 500, 0.999, seed) {
            let image = self.eval_raw(p.coords())?;
            let n = vnorm(&image);
            if n >= 1.0 {
                return Err(Error::NotSelfMap(format!(
                    "image of a sampled interior point has norm {n:.17}"
                )));
            }
        }
        self.scale = Some(t);
        Ok(self)
    }

    pub fn validate(self) -> Result<Self> {
        self.validate_seeded(VALIDATION_SEED)
    }

    /// Fixed points from the eigenvectors of T: each eigenvector (v; s) with
    /// s away from zero yields the fixed point v/s, tagged by |v/s| against 1.
    /// Eigenvectors with s ~ 0 are points at infinity and omitted.
    pub fn fixed_points(&self) -> Result<FixedPointReport> {
        let eig = general_eigen(&self.t)?;
        let mut points = Vec::new();
        for (lambda, vec) in eig.values.iter().zip(eig.vectors.iter()) {
            let s = vec[self.m];
            if s.norm() <= 1e-10 {
                continue;
            }
            let p: Vec<Complex64> = vec[..self.m].iter().map(|&v| v / s).collect();
            let norm = vnorm(&p);
            let location = if norm < 1.0 - 1e-9 {
                Location::Interior
            } else if (norm - 1.0).abs() <= 1e-9 {
                Location::Boundary
            } else {
                Location::Exterior
            };
            points.push(FixedPoint { point: p, location, eigenvalue: *lambda });
        }
        Ok(FixedPointReport { points, degenerate: eig.degenerate })
    }

    /// de Branges-Rovnyak kernel (1 - <phi(z), phi(w)>) / (1 - <z, w>).
    pub fn dbr_kernel(&self, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
        let fz = self.eval_raw(z.coords())?;
        let fw = self.eval_raw(w.coords())?;
        let num = ONE - vdot(&fz, &fw)?;
        let den = ONE - vdot(z.coords(), w.coords())?;
        Ok(num / den)
    }

    /// Explicit factorization of the de Branges-Rovnyak kernel from a PSD
    /// factorization of J - T*JT at the contractive scaling.
    pub fn kernel_factorization(&self) -> Result<KernelFactorization> {
        let that = self.scaled_matrix()?;
        let j = j_matrix(self.m);
        let defect = j.sub(&that.adjoint().mul(&j)?.mul(&that)?)?.hermitize()?;
        // scale-aware tolerance: the defect inherits rounding of order ||T||^2
        let tol = DEFAULT_TOL * that.fro_norm().powi(2).max(1.0);
        let x = psd_factor(&defect, tol)?;
        let c: Vec<Complex64> = (0..self.m).map(|jj| that[(self.m, jj)].conj()).collect();
        let d = that[(self.m, self.m)];
        Ok(KernelFactorization { x, c, d })
    }

}

/// The involutive automorphism of the ball swapping 0 and `a`:
/// phi_a(z) = (a - P_a z - s Q_a z) / (1 - <z, a>) with s = sqrt(1 - |a|^2),
/// P_a the projection onto the span of a and Q_a = I - P_a.
pub fn ball_automorphism(a: &BallPoint) -> Result<LinearFractionalMap> {
    let m = a.dim();
    let s = (1.0 - a.norm_sq()).sqrt();
    let norm_sq = a.norm_sq();
    let mut t = CMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            let p = if norm_sq > 0.0 {
                a.coords()[i] * a.coords()[j].conj() / norm_sq
            } else {
                ZERO
            };
            let q = if i == j { ONE - p } else { ZERO - p };
            t[(i, j)] = -(p + q * s);
        }
        t[(i, m)] = a.coords()[i];
        t[(m, i)] = -a.coords()[i].conj();
    }
    t[(m, m)] = ONE;
    LinearFractionalMap::new(m, t)
}
