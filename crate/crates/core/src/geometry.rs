//! Points of the unit ball B^m and the Siegel right half-space H^m, the
//! generalized Cayley transform between them, and the Julia quotient.
//!
//! The Cayley transform used throughout is
//!
//! ```text
//! psi(z1, z') = ((1 + z1)/(1 - z1), z'/(1 - z1))
//! ```
//!
//! which identifies B^m with H^m = { (w1, w') : Re w1 > ||w'||^2 } and sends
//! the boundary point e1 to infinity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{vdot, vnorm, vnorm_sq};

/// Margin below the unit sphere required of user-constructed interior points.
/// Kernel formulas all carry (1 - <z,w>) denominators, so points essentially
/// on the sphere are rejected at construction.
pub const SPHERE_MARGIN: f64 = 1e-12;

/// Interior point of the open unit ball B^m.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    z: Vec<Complex64>,
}

impl BallPoint {
    /// Build an interior point; rejects points within 1e-12 of the sphere.
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Dimension("ball point needs dimension >= 1".into()));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("ball point has non-finite coordinates".into()));
        }
        let norm = vnorm(&z);
        if norm >= 1.0 - SPHERE_MARGIN {
            return Err(Error::Domain(format!(
                "point with |z| = {norm:.17} is not safely inside the unit ball"
            )));
        }
        Ok(Self { z })
    }

    /// Interior point with the strict |z| < 1 check only. Orbit iteration
    /// legitimately produces points far closer to the sphere than the public
    /// constructor allows.
    pub(crate) fn interior(z: Vec<Complex64>) -> Result<Self> {
        let norm = vnorm(&z);
        if !(norm < 1.0) {
            return Err(Error::NotSelfMap(format!("image has |z| = {norm:.17} >= 1")));
        }
        Ok(Self { z })
    }

    pub fn origin(m: usize) -> Self {
        Self { z: vec![Complex64::new(0.0, 0.0); m] }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.z
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn norm(&self) -> f64 {
        vnorm(&self.z)
    }

    pub fn norm_sq(&self) -> f64 {
        vnorm_sq(&self.z)
    }

    /// 1 - |z|^2, the defect against the sphere.
    pub fn defect(&self) -> f64 {
        1.0 - self.norm_sq()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.z
            .iter()
            .zip(other.z.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Point of the unit sphere, kept as a separate type so kernel code paths can
/// never silently evaluate at a boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    zeta: Vec<Complex64>,
}

impl BoundaryPoint {
    pub fn new(zeta: Vec<Complex64>) -> Result<Self> {
        if zeta.is_empty() {
            return Err(Error::Dimension("boundary point needs dimension >= 1".into()));
        }
        let norm = vnorm(&zeta);
        if (norm - 1.0).abs() > SPHERE_MARGIN {
            return Err(Error::Domain(format!(
                "boundary point must have |zeta| = 1, got {norm:.17}"
            )));
        }
        Ok(Self { zeta })
    }

    /// First standard basis vector e1, the normalized Denjoy-Wolff point used
    /// by the half-space machinery.
    pub fn e1(m: usize) -> Self {
        let mut zeta = vec![Complex64::new(0.0, 0.0); m];
        zeta[0] = Complex64::new(1.0, 0.0);
        Self { zeta }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn dim(&self) -> usize {
        self.zeta.len()
    }
}

/// Point of the closed Siegel half-space: Re w1 - ||w'||^2 >= 0, with interior
/// points strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    w1: Complex64,
    wprime: Vec<Complex64>,
}

impl SiegelPoint {
    /// Interior constructor: Re w1 - ||w'||^2 must be strictly positive.
    pub fn new(w1: Complex64, wprime: Vec<Complex64>) -> Result<Self> {
        let p = Self { w1, wprime };
        if p.defect() <= 0.0 {
            return Err(Error::Domain(format!(
                "siegel point has defect {} <= 0",
                p.defect()
            )));
        }
        Ok(p)
    }

    /// Closure constructor: permits boundary points (defect >= -tol for a tiny
    /// rounding allowance).
    pub fn closure(w1: Complex64, wprime: Vec<Complex64>) -> Result<Self> {
        let p = Self { w1, wprime };
        if p.defect() < -1e-9 * (1.0 + p.w1.norm() + vnorm_sq(&p.wprime)) {
            return Err(Error::Domain(format!(
                "point with defect {} is outside the closed half-space",
                p.defect()
            )));
        }
        Ok(p)
    }

    pub fn w1(&self) -> Complex64 {
        self.w1
    }

    pub fn wprime(&self) -> &[Complex64] {
        &self.wprime
    }

    pub fn dim(&self) -> usize {
        self.wprime.len() + 1
    }

    /// Re w1 - ||w'||^2.
    pub fn defect(&self) -> f64 {
        self.w1.re - vnorm_sq(&self.wprime)
    }
}

/// Standard Hermitian inner product sum_k z_k conj(w_k).
pub fn ball_inner(z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    vdot(z, w)
}

/// Generalized Cayley transform of an interior point.
pub fn cayley(z: &BallPoint) -> Result<SiegelPoint> {
    cayley_coords(z.coords())
}

/// Cayley transform of a boundary point other than e1 (whose image is the
/// point at infinity). Lands on the closure of the half-space.
pub fn cayley_boundary(zeta: &BoundaryPoint) -> Result<SiegelPoint> {
    cayley_coords(zeta.coords())
}

fn cayley_coords(z: &[Complex64]) -> Result<SiegelPoint> {
    let one = Complex64::new(1.0, 0.0);
    let denom = one - z[0];
    if denom.norm() < 1e-14 {
        return Err(Error::Pole("cayley transform has a pole at z1 = 1".into()));
    }
    let w1 = (one + z[0]) / denom;
    let wprime: Vec<Complex64> = z[1..].iter().map(|&c| c / denom).collect();
    SiegelPoint::closure(w1, wprime)
}

/// Inverse Cayley transform, back to the ball.
///
/// Satisfies 1 - |psi^{-1}(w)|^2 = (4 / |w1 + 1|^2) (Re w1 - ||w'||^2).
pub fn inverse_cayley(w: &SiegelPoint) -> Result<BallPoint> {
    let one = Complex64::new(1.0, 0.0);
    let denom = w.w1 + one;
    if denom.norm() < 1e-14 {
        return Err(Error::Pole("inverse cayley transform has a pole at w1 = -1".into()));
    }
    let z1 = (w.w1 - one) / denom;
    let mut z = Vec::with_capacity(w.dim());
    z.push(z1);
    for &c in &w.wprime {
        z.push(c * 2.0 / denom);
    }
    BallPoint::interior(z)
}

/// Julia quotient |1 - <z, zeta>|^2 / (1 - |z|^2), always positive on the
/// open ball.
pub fn julia_quotient(z: &BallPoint, zeta: &BoundaryPoint) -> Result<f64> {
    if z.dim() != zeta.dim() {
        return Err(Error::Dimension("julia quotient: dimension mismatch".into()));
    }
    let defect = z.defect();
    if defect <= 0.0 {
        return Err(Error::Domain("julia quotient needs an interior point".into()));
    }
    let ip = vdot(z.coords(), zeta.coords())?;
    let num = (Complex64::new(1.0, 0.0) - ip).norm_sqr();
    Ok(num / defect)
}

/// Deterministic sample of `count` points, uniform in the ball of the given
/// radius: Gaussian direction times radius * u^(1/2m).
pub fn sample_ball(m: usize, count: usize, radius: f64, seed: u64) -> Vec<BallPoint> {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<Complex64> = (0..m)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let nrm = vnorm(&g);
        if nrm < 1e-12 {
            continue;
        }
        let u: f64 = rng.gen_range(0.0..1.0);
        let r = radius * u.powf(1.0 / (2.0 * m as f64));
        let z: Vec<Complex64> = g.iter().map(|c| c * (r / nrm)).collect();
        if let Ok(p) = BallPoint::new(z) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_examples() {
        let zero = [c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(ball_inner(&zero, &zero).unwrap(), c(0.0, 0.0));
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(ball_inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        let z = [c(0.0, 1.0), c(0.0, 0.0)];
        assert_eq!(ball_inner(&z, &e1).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn inner_product_rejects_mismatch() {
        let a = [c(0.0, 0.0)];
        let b = [c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(ball_inner(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn cayley_of_origin() {
        let w = cayley(&BallPoint::origin(2)).unwrap();
        assert!((w.w1() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(vnorm(w.wprime()) < 1e-15);
    }

    #[test]
    fn cayley_of_boundary_minus_e1() {
        let zeta = BoundaryPoint::new(vec![c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w = cayley_boundary(&zeta).unwrap();
        assert!(w.w1().norm() < 1e-15);
        assert!(vnorm(w.wprime()) < 1e-15);
        assert!(w.defect().abs() < 1e-15);
    }

    #[test]
    fn cayley_pole_at_e1() {
        let zeta = BoundaryPoint::e1(2);
        assert!(matches!(cayley_boundary(&zeta), Err(Error::Pole(_))));
    }

    #[test]
    fn inverse_cayley_examples() {
        // (1, 0) -> origin
        let w = SiegelPoint::new(c(1.0, 0.0), vec![]).unwrap();
        let z = inverse_cayley(&w).unwrap();
        assert!(z.norm() < 1e-15);
        // (3, -) in m = 1 -> 1/2
        let w = SiegelPoint::new(c(3.0, 0.0), vec![]).unwrap();
        let z = inverse_cayley(&w).unwrap();
        assert!((z.coords()[0] - c(0.5, 0.0)).norm() < 1e-15);
        // defect identity at the base point: 4/|2|^2 * (1 - 0) = 1 = 1 - |0|^2
        let w = SiegelPoint::new(c(1.0, 0.0), vec![c(0.0, 0.0)]).unwrap();
        let z = inverse_cayley(&w).unwrap();
        let lhs = z.defect();
        let rhs = 4.0 / (w.w1() + c(1.0, 0.0)).norm_sqr() * w.defect();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn julia_quotient_examples() {
        let zeta = BoundaryPoint::e1(2);
        let z = BallPoint::origin(2);
        assert!((julia_quotient(&z, &zeta).unwrap() - 1.0).abs() < 1e-15);
        // z = 0.5 zeta -> |1 - 0.5|^2 / (1 - 0.25) = 1/3
        let z = BallPoint::new(vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((julia_quotient(&z, &zeta).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // z = -0.5 zeta -> |1.5|^2 / 0.75 = 3
        let z = BallPoint::new(vec![c(-0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((julia_quotient(&z, &zeta).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ball_point_rejects_sphere_neighbourhood() {
        assert!(BallPoint::new(vec![c(1.0 - 1e-13, 0.0)]).is_err());
        assert!(BallPoint::new(vec![c(1.1, 0.0)]).is_err());
        assert!(BallPoint::new(vec![c(0.9, 0.0)]).is_ok());
    }

    #[test]
    fn sampler_is_deterministic_and_inside_radius() {
        let a = sample_ball(3, 50, 0.9, 42);
        let b = sample_ball(3, 50, 0.9, 42);
        assert_eq!(a.len(), 50);
        for (p, q) in a.iter().zip(b.iter()) {
            assert_eq!(p.coords(), q.coords());
            assert!(p.norm() <= 0.9 + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cayley_round_trip(seed in 0u64..5000) {
            for p in sample_ball(3, 4, 0.999, seed) {
                let w = cayley(&p).unwrap();
                let back = inverse_cayley(&w).unwrap();
                prop_assert!(p.dist(&back) < 1e-12);
            }
        }

        #[test]
        fn cayley_defect_identity(seed in 0u64..5000) {
            for p in sample_ball(2, 4, 0.99, seed) {
                let w = cayley(&p).unwrap();
                let lhs = p.defect();
                let rhs = 4.0 / (w.w1() + Complex64::new(1.0, 0.0)).norm_sqr() * w.defect();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-30));
            }
        }
    }
}
