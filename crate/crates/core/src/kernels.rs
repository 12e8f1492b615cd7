//! The H^2_{m,beta} kernel scale, Gram positivity testing on finite samples,
//! and composition-operator norm machinery.
//!
//! The space H^2_{m,beta} is the Hilbert function space on the ball with
//! reproducing kernel k_beta(z,w) = (1 - <z,w>)^(-beta). beta = 1 is the
//! Drury-Arveson space, beta = m the Hardy space, beta = m + 1 the Bergman
//! space; any real beta >= 1 is accepted.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::BallPoint;
use crate::lfm::LinearFractionalMap;
use crate::linalg::{generalized_max_eig, hermitian_min_eig, vdot, CMatrix};

/// Parameters of a space in the H^2_{m,beta} scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    pub m: usize,
    pub beta: f64,
}

impl SpaceParams {
    pub fn new(m: usize, beta: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("space dimension must be >= 1".into()));
        }
        if !(beta >= 1.0) {
            return Err(Error::Domain(format!("beta must be >= 1, got {beta}")));
        }
        Ok(Self { m, beta })
    }

    pub fn drury_arveson(m: usize) -> Self {
        Self { m, beta: 1.0 }
    }

    pub fn hardy(m: usize) -> Self {
        Self { m, beta: m as f64 }
    }

    pub fn bergman(m: usize) -> Self {
        Self { m, beta: m as f64 + 1.0 }
    }
}

/// k_beta(z, w) = (1 - <z,w>)^(-beta), principal branch.
///
/// For interior points 1 - <z,w> has positive real part, so the branch is
/// unambiguous and k_beta(z, z) is real and >= 1.
pub fn kbeta(params: SpaceParams, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    if z.dim() != params.m || w.dim() != params.m {
        return Err(Error::Dimension("kernel arguments do not match the space dimension".into()));
    }
    let base = Complex64::new(1.0, 0.0) - vdot(z.coords(), w.coords())?;
    if base.norm() < 1e-15 {
        return Err(Error::Pole("kernel pole: <z,w> = 1".into()));
    }
    Ok(base.powf(-params.beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Violated,
}

/// Gram matrix of a kernel over a finite point set with its minimum
/// eigenvalue; positivity on every finite sample is necessary for the kernel
/// to be positive semidefinite.
#[derive(Debug, Clone)]
pub struct KernelGramReport {
    pub points: Vec<BallPoint>,
    pub gram: CMatrix,
    pub min_eig: f64,
    pub verdict: Verdict,
    pub tol: f64,
}

/// Assemble the Gram matrix G_ij = kernel(z_i, z_j), symmetrize, and report
/// the minimum eigenvalue. Points closer than 1e-6 make the Gram matrix
/// numerically singular and are rejected.
pub fn gram_positivity<K>(kernel: K, points: &[BallPoint], tol: f64) -> Result<KernelGramReport>
where
    K: Fn(&BallPoint, &BallPoint) -> Result<Complex64>,
{
    let n = points.len();
    if n == 0 {
        return Err(Error::Dimension("gram test needs at least one point".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].dist(&points[j]) < 1e-6 {
                return Err(Error::IllConditioned(format!(
                    "points {i} and {j} are closer than 1e-6"
                )));
            }
        }
    }
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = kernel(&points[i], &points[j])?;
        }
    }
    let gram = gram.hermitize()?;
    let min_eig = hermitian_min_eig(&gram)?;
    let verdict = if min_eig >= -tol { Verdict::Positive } else { Verdict::Violated };
    Ok(KernelGramReport { points: points.to_vec(), gram, min_eig, verdict, tol })
}

/// Closed-form norm bounds for C_phi on H^2_{m,beta}, depending only on
/// phi(0):
///
/// ```text
/// (1/(1 - |phi(0)|^2))^(beta/2) <= ||C_phi|| <= ((1 + |phi(0)|)/(1 - |phi(0)|))^(beta/2)
/// ```
#[derive(Debug, Clone, Copy)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    pub beta: f64,
    pub phi0_norm: f64,
}

pub fn norm_bounds(phi0: &BallPoint, params: SpaceParams) -> Result<NormBounds> {
    let r = phi0.norm();
    if r >= 1.0 {
        return Err(Error::Domain("norm bounds need |phi(0)| < 1".into()));
    }
    let half_beta = params.beta / 2.0;
    let lower = (1.0 / (1.0 - r * r)).powf(half_beta);
    let upper = ((1.0 + r) / (1.0 - r)).powf(half_beta);
    Ok(NormBounds { lower, upper, beta: params.beta, phi0_norm: r })
}

/// Certified lower bound for ||C_phi|| from the action of the adjoint on the
/// kernel functions at a finite point set:
/// sqrt of the largest generalized eigenvalue of (G_phi, G) with
/// G_ij = k_beta(z_i, z_j) and (G_phi)_ij = k_beta(phi(z_i), phi(z_j)).
///
/// A ridge of 1e-12 * trace(G) regularizes the denominator; enlarging the
/// denominator only shrinks the ratio, so the value stays a valid lower bound.
pub fn gram_norm_lower_bound(
    phi: &LinearFractionalMap,
    params: SpaceParams,
    points: &[BallPoint],
) -> Result<f64> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Dimension("lower bound needs at least one point".into()));
    }
    let images: Vec<BallPoint> = points
        .iter()
        .map(|z| phi.eval(z))
        .collect::<Result<_>>()?;
    let mut g = CMatrix::zeros(n, n);
    let mut gphi = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = kbeta(params, &points[i], &points[j])?;
            gphi[(i, j)] = kbeta(params, &images[i], &images[j])?;
        }
    }
    let g = g.hermitize()?;
    let gphi = gphi.hermitize()?;
    let trace: f64 = (0..n).map(|i| g[(i, i)].re).sum();
    let mut g_ridged = g;
    for i in 0..n {
        g_ridged[(i, i)] += Complex64::new(1e-12 * trace, 0.0);
    }
    let lambda = generalized_max_eig(&gphi, &g_ridged)?;
    Ok(lambda.max(0.0).sqrt())
}

/// Direct spectral-radius estimates s_n = (1 - |phi_n(0)|)^(-beta/2n) along
/// the orbit of the origin, computed by repeated evaluation.
///
/// Orbits of hyperbolic maps reach the floating-point resolution of the
/// sphere quickly; when 1 - |phi_n(0)| drops below 1e-15 the sequence stops
/// with a precision error carrying everything computed so far. The half-space
/// machinery in the `bcd` module continues past that horizon for non-elliptic
/// maps.
pub fn spectral_radius_sequence(
    phi: &LinearFractionalMap,
    params: SpaceParams,
    n_max: usize,
) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::Domain("need at least one iterate".into()));
    }
    let mut values = Vec::with_capacity(n_max);
    let mut z = vec![Complex64::new(0.0, 0.0); phi.dim()];
    for n in 1..=n_max {
        z = phi.eval_raw(&z)?;
        let norm = crate::linalg::vnorm(&z);
        let gap = 1.0 - norm;
        if gap < 1e-15 {
            return Err(Error::PrecisionExhausted { last_n: n - 1, values });
        }
        values.push(gap.powf(-params.beta / (2.0 * n as f64)));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_ball;
    use crate::linalg::CMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kbeta_examples() {
        let da = SpaceParams::drury_arveson(2);
        let z0 = BallPoint::origin(2);
        for w in sample_ball(2, 5, 0.9, 3) {
            let k = kbeta(da, &z0, &w).unwrap();
            assert!((k - c(1.0, 0.0)).norm() < 1e-15, "k_beta(0, w) must be 1");
        }
        // <z,w> = 1/2 with beta = 2 -> 4
        let z = BallPoint::new(vec![c(0.75, 0.0), c(0.0, 0.0)]).unwrap();
        let w = BallPoint::new(vec![c(2.0 / 3.0, 0.0), c(0.0, 0.0)]).unwrap();
        let k = kbeta(SpaceParams::new(2, 2.0).unwrap(), &z, &w).unwrap();
        assert!((k - c(4.0, 0.0)).norm() < 1e-13);
        // <z,w> = i/2 with beta = 1 -> 0.8 + 0.4i
        let z = BallPoint::new(vec![c(0.0, 0.75)]).unwrap();
        let w = BallPoint::new(vec![c(2.0 / 3.0, 0.0)]).unwrap();
        let k = kbeta(SpaceParams::drury_arveson(1), &z, &w).unwrap();
        assert!((k - c(0.8, 0.4)).norm() < 1e-14);
    }

    #[test]
    fn beta_below_one_rejected() {
        assert!(SpaceParams::new(2, 0.5).is_err());
    }

    #[test]
    fn gram_of_constant_kernel_is_rank_one() {
        let pts = sample_ball(2, 10, 0.9, 5);
        let report = gram_positivity(|_, _| Ok(c(1.0, 0.0)), &pts, 1e-10).unwrap();
        assert_eq!(report.verdict, Verdict::Positive);
        assert!(report.min_eig.abs() < 1e-12, "rank-one all-ones Gram has min eig 0");
    }

    #[test]
    fn gram_of_kbeta_is_positive() {
        for beta in [1.0, 2.0, 3.0, 2.5] {
            let params = SpaceParams::new(2, beta).unwrap();
            let pts = sample_ball(2, 20, 0.9, 21);
            let report =
                gram_positivity(|z, w| kbeta(params, z, w), &pts, 1e-10 * 20.0).unwrap();
            assert_eq!(report.verdict, Verdict::Positive, "beta = {beta}: {}", report.min_eig);
        }
    }

    #[test]
    fn gram_rejects_duplicates() {
        let p = BallPoint::origin(2);
        let err = gram_positivity(|_, _| Ok(c(1.0, 0.0)), &[p.clone(), p], 1e-10);
        assert!(matches!(err, Err(Error::IllConditioned(_))));
    }

    #[test]
    fn norm_bounds_examples() {
        let params = SpaceParams::drury_arveson(1);
        let b = norm_bounds(&BallPoint::origin(1), params).unwrap();
        assert_eq!(b.lower, 1.0);
        assert_eq!(b.upper, 1.0);

        let half = BallPoint::new(vec![c(0.5, 0.0)]).unwrap();
        let b = norm_bounds(&half, params).unwrap();
        assert!((b.lower - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((b.upper - 3.0f64.sqrt()).abs() < 1e-14);

        let b2 = norm_bounds(&half, SpaceParams::new(1, 2.0).unwrap()).unwrap();
        assert!((b2.lower - 4.0 / 3.0).abs() < 1e-14);
        assert!((b2.upper - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gram_lower_bound_identity_map() {
        let id = LinearFractionalMap::identity(2).validate().unwrap();
        let pts = sample_ball(2, 10, 0.9, 9);
        let lb = gram_norm_lower_bound(&id, SpaceParams::hardy(2), &pts).unwrap();
        assert!((lb - 1.0).abs() < 1e-6, "identity lower bound {lb}");
    }

    #[test]
    fn gram_lower_bound_at_origin_reproduces_closed_form() {
        let phi = crate::samples::random_validated_lfm(2, 3).unwrap();
        let params = SpaceParams::new(2, 2.0).unwrap();
        let pts = vec![BallPoint::origin(2)];
        let lb = gram_norm_lower_bound(&phi, params, &pts).unwrap();
        let phi0 = phi.eval(&BallPoint::origin(2)).unwrap();
        let closed = norm_bounds(&phi0, params).unwrap().lower;
        assert!((lb - closed).abs() < 1e-12 * closed, "{lb} vs {closed}");
    }

    #[test]
    fn sandwich_holds_with_origin_in_sample() {
        let phi = crate::samples::random_validated_lfm(2, 8).unwrap();
        let params = SpaceParams::drury_arveson(2);
        let mut pts = vec![BallPoint::origin(2)];
        pts.extend(sample_ball(2, 15, 0.9, 31));
        let lb = gram_norm_lower_bound(&phi, params, &pts).unwrap();
        let phi0 = phi.eval(&BallPoint::origin(2)).unwrap();
        let bounds = norm_bounds(&phi0, params).unwrap();
        assert!(bounds.lower <= lb + 1e-9, "{} vs {}", bounds.lower, lb);
        assert!(lb <= bounds.upper + 1e-9, "{} vs {}", lb, bounds.upper);
    }

    #[test]
    fn adding_points_never_decreases_lower_bound() {
        let phi = crate::samples::random_validated_lfm(2, 12).unwrap();
        let params = SpaceParams::hardy(2);
        let pts = sample_ball(2, 20, 0.9, 55);
        let small = gram_norm_lower_bound(&phi, params, &pts[..8]).unwrap();
        let large = gram_norm_lower_bound(&phi, params, &pts).unwrap();
        assert!(large >= small - 1e-10, "monotone sampling violated: {small} -> {large}");
    }

    #[test]
    fn spectral_radius_sequence_rotation_is_one() {
        let mut t = CMatrix::identity(2);
        t[(0, 0)] = c(0.0, 1.0);
        let rot = LinearFractionalMap::new(1, t).unwrap().validate().unwrap();
        let s = spectral_radius_sequence(&rot, SpaceParams::new(1, 2.0).unwrap(), 50).unwrap();
        for v in s {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn spectral_radius_sequence_exhausts_for_hyperbolic() {
        let t = CMatrix::from_real(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let phi = LinearFractionalMap::new(1, t).unwrap().validate().unwrap();
        let params = SpaceParams::drury_arveson(1);
        match spectral_radius_sequence(&phi, params, 500) {
            Err(Error::PrecisionExhausted { last_n, values }) => {
                assert!(last_n >= 20, "should manage at least ~30 iterates, got {last_n}");
                assert_eq!(values.len(), last_n);
                // alpha = 1/3: the direct estimates drift toward sqrt(3)
                let last = values[last_n - 1];
                assert!((last - 3.0f64.sqrt()).abs() / 3.0f64.sqrt() < 0.2, "s_n = {last}");
            }
            other => panic!("expected precision exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn spectral_radius_sequence_parabolic_decreases_to_one() {
        let t = CMatrix::from_real(&[vec![1.0, 1.0], vec![-1.0, 3.0]]).unwrap();
        let phi = LinearFractionalMap::new(1, t).unwrap().validate().unwrap();
        let s = spectral_radius_sequence(&phi, SpaceParams::drury_arveson(1), 500).unwrap();
        assert!(s[499] < 1.02, "s_500 = {}", s[499]);
        assert!(s[499] > 1.0);
        for w in s.windows(2).skip(5) {
            assert!(w[1] <= w[0] + 1e-12, "not decreasing: {} -> {}", w[0], w[1]);
        }
    }
}
