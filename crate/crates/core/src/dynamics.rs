//! Iteration dynamics of validated self-maps: orbits, the
//! elliptic/parabolic/hyperbolic trichotomy, Denjoy-Wolff points, dilatation
//! coefficients, Julia-inequality checks, and restricted-approach diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{julia_quotient, BallPoint, BoundaryPoint};
use crate::lfm::{j_matrix, LinearFractionalMap, Location};
use crate::linalg::{vdot, vnorm, vnorm_sq};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Defect threshold below which 1 - |z|^2 is rounding noise and iteration
/// stops.
pub const DEFECT_FLOOR: f64 = 1e-15;

/// Orbit of a point under repeated evaluation, with the boundary defects
/// 1 - |phi_n|^2 recorded alongside.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub start: BallPoint,
    /// phi_n(start) for n = 0..=N (possibly truncated).
    pub points: Vec<BallPoint>,
    /// 1 - |phi_n(start)|^2 for the same range.
    pub defects: Vec<f64>,
    /// Iteration stopped early because the defect fell below 1e-15.
    pub truncated: bool,
}

pub fn orbit(phi: &LinearFractionalMap, start: &BallPoint, n: usize) -> Result<Orbit> {
    if !phi.is_validated() {
        return Err(Error::InvalidMap("orbit requires a validated self-map".into()));
    }
    let mut points = Vec::with_capacity(n + 1);
    let mut defects = Vec::with_capacity(n + 1);
    let mut truncated = false;
    points.push(start.clone());
    defects.push(start.defect());
    let mut current = start.coords().to_vec();
    for _ in 0..n {
        current = phi.eval_raw(&current)?;
        let defect = 1.0 - vnorm_sq(&current);
        if defect < DEFECT_FLOOR {
            // beyond this the defect is rounding noise; the point may even
            // round onto the sphere
            truncated = true;
            break;
        }
        points.push(BallPoint::interior(current.clone())?);
        defects.push(defect);
    }
    Ok(Orbit { start: start.clone(), points, defects, truncated })
}

/// Ratios r_n = defects[n] / defects[n-1] along an orbit.
pub fn defect_ratio_sequence(orbit: &Orbit) -> Vec<f64> {
    orbit
        .defects
        .windows(2)
        .map(|w| w[1] / w[0])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl std::fmt::Display for MapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MapKind::Elliptic => write!(f, "elliptic"),
            MapKind::Parabolic => write!(f, "parabolic"),
            MapKind::Hyperbolic => write!(f, "hyperbolic"),
        }
    }
}

/// Attracting point of the iteration: an interior fixed point for elliptic
/// maps, the Denjoy-Wolff boundary point otherwise.
#[derive(Debug, Clone)]
pub enum DwPoint {
    Interior(BallPoint),
    Boundary(BoundaryPoint),
}

#[derive(Debug, Clone)]
pub struct ClassificationResult {
    pub kind: MapKind,
    pub dw_point: DwPoint,
    /// Dilatation coefficient at the Denjoy-Wolff point; None for elliptic
    /// maps, where the spectral radius data it feeds is 1 anyway.
    pub alpha: Option<f64>,
    /// Eigenvalue clusters were degenerate while locating fixed points.
    pub degenerate_spectrum: bool,
}

/// Parabolic/hyperbolic threshold on the dilatation coefficient.
pub const PARABOLIC_TOL: f64 = 1e-6;

/// Classify a validated map: elliptic iff some fixed point is interior;
/// otherwise iterate the origin toward the sphere, polish the limit direction
/// against the boundary fixed points, and measure the dilatation coefficient
/// radially at the resulting Denjoy-Wolff point.
pub fn classify(phi: &LinearFractionalMap) -> Result<ClassificationResult> {
    if !phi.is_validated() {
        return Err(Error::InvalidMap("classification requires a validated self-map".into()));
    }
    let m = phi.dim();
    let fixed = phi.fixed_points()?;

    let mut interior: Vec<&crate::lfm::FixedPoint> = fixed
        .points
        .iter()
        .filter(|p| p.location == Location::Interior)
        .collect();
    if !interior.is_empty() {
        interior.sort_by(|a, b| {
            vnorm(&a.point).partial_cmp(&vnorm(&b.point)).unwrap()
        });
        // interior tagging guarantees |p| < 1 - 1e-9, within the constructor margin
        let point = BallPoint::new(interior[0].point.clone())?;
        return Ok(ClassificationResult {
            kind: MapKind::Elliptic,
            dw_point: DwPoint::Interior(point),
            alpha: None,
            degenerate_spectrum: fixed.degenerate,
        });
    }

    // iterate the origin toward the sphere
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    let max_iter = 100_000usize;
    let mut reached = false;
    for _ in 0..max_iter {
        z = phi.eval_raw(&z)?;
        if 1.0 - vnorm(&z) < 1e-10 {
            reached = true;
            break;
        }
    }
    let znorm = vnorm(&z);
    if znorm < 0.5 {
        return Err(Error::Inconclusive(
            "orbit of the origin did not approach the sphere".into(),
        ));
    }
    let est: Vec<Complex64> = z.iter().map(|c| c / znorm).collect();

    // polish against boundary fixed points
    let mut zeta_coords = est.clone();
    let mut best = f64::INFINITY;
    for p in fixed.points.iter().filter(|p| p.location == Location::Boundary) {
        let dist: f64 = p
            .point
            .iter()
            .zip(est.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if dist < best {
            best = dist;
            zeta_coords = p.point.clone();
        }
    }
    if best > 0.2 && !reached {
        return Err(Error::Inconclusive(format!(
            "no boundary fixed point near the orbit limit (closest at distance {best:.3})"
        )));
    }
    let zn = vnorm(&zeta_coords);
    let zeta = BoundaryPoint::new(zeta_coords.iter().map(|c| c / zn).collect())?;

    let alpha = dilatation_coefficient(phi, &zeta)?;
    let kind = if alpha >= 1.0 - PARABOLIC_TOL { MapKind::Parabolic } else { MapKind::Hyperbolic };
    Ok(ClassificationResult {
        kind,
        dw_point: DwPoint::Boundary(zeta),
        alpha: Some(alpha),
        degenerate_spectrum: fixed.degenerate,
    })
}

/// Radial limit of (1 - |phi(t zeta)|^2) / (1 - t^2) as t -> 1, sampled at
/// t = 1 - 2^-k for k = 10..40 and Richardson-extrapolated.
///
/// The quotient is evaluated through the J-defect identity
///
/// ```text
/// 1 - |phi(z)|^2 = ((1 - |z|^2) + <M zhat, zhat>) / |<z,C> + D|^2,
/// ```
///
/// M = J - T*JT at the contractive scaling. A boundary fixed point
/// annihilates M (it is J-neutral), so on the ray z = t zeta the quadratic
/// term is exactly (1-t)^2 <M zeta0, zeta0> with zeta0 = (zeta; 0); evaluating
/// it that way avoids the cancellation that otherwise floors the quotient at
/// rounding noise for t near 1. The annihilation is verified before use.
pub fn dilatation_coefficient(phi: &LinearFractionalMap, zeta: &BoundaryPoint) -> Result<f64> {
    let m = phi.dim();
    if zeta.dim() != m {
        return Err(Error::Dimension("dilatation: dimension mismatch".into()));
    }
    let that = phi.scaled_matrix()?;
    let j = j_matrix(m);
    let defect = j.sub(&that.adjoint().mul(&j)?.mul(&that)?)?.hermitize()?;

    let mut zeta_hat: Vec<Complex64> = zeta.coords().to_vec();
    zeta_hat.push(ONE);
    let mzeta = defect.matvec(&zeta_hat)?;
    let mscale = defect.fro_norm() + 1.0;
    if vnorm(&mzeta) > 1e-6 * mscale {
        return Err(Error::Inconclusive(format!(
            "zeta is not a boundary fixed point of the map (defect action {:.3e})",
            vnorm(&mzeta)
        )));
    }

    let mut zeta0: Vec<Complex64> = zeta.coords().to_vec();
    zeta0.push(Complex64::new(0.0, 0.0));
    let g = vdot(&defect.matvec(&zeta0)?, &zeta0)?.re.max(0.0);

    let c_row: Vec<Complex64> = (0..m).map(|jj| that[(m, jj)].conj()).collect();
    let dd = that[(m, m)];
    let ip_zeta = vdot(zeta.coords(), &c_row)?;

    let quotient = |k: i32| -> f64 {
        let h = 2f64.powi(-k); // 1 - t
        let t = 1.0 - h;
        let den = ip_zeta * t + dd;
        (1.0 + h * g / (1.0 + t)) / den.norm_sqr()
    };

    let ks: Vec<i32> = (10..=40).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(ks.len());
    for (i, &k) in ks.iter().enumerate() {
        let mut row = vec![quotient(k)];
        for j in 1..=4.min(i) {
            let prev = rows[i - 1][j - 1];
            let cur = row[j - 1];
            let factor = 2f64.powi(j as i32);
            row.push((factor * cur - prev) / (factor - 1.0));
        }
        rows.push(row);
    }
    let extrapolated: Vec<f64> = rows.iter().map(|r| *r.last().unwrap()).collect();
    let tail = &extrapolated[extrapolated.len() - 5..];
    let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if !spread.is_finite() || spread > 1e-6 {
        return Err(Error::Inconclusive(format!(
            "radial dilatation estimates did not settle (spread {spread:.3e})"
        )));
    }
    let alpha = *extrapolated.last().unwrap();
    if alpha <= 0.0 {
        return Err(Error::Inconclusive(format!("nonpositive dilatation estimate {alpha}")));
    }
    Ok(alpha.min(1.0))
}

/// Pointwise Julia-inequality check: for every sample z,
/// jq(phi(z), zeta) <= alpha jq(z, zeta) (1 + 1e-9). Violations falsify the
/// supplied zeta/alpha rather than abort, so they are report content.
#[derive(Debug, Clone)]
pub struct JuliaReport {
    pub checked: usize,
    pub violations: usize,
    /// max over samples of jq(phi(z), zeta) / (alpha jq(z, zeta)).
    pub max_ratio: f64,
}

pub const JULIA_SLACK: f64 = 1e-9;

pub fn julia_check(
    phi: &LinearFractionalMap,
    zeta: &BoundaryPoint,
    alpha: f64,
    points: &[BallPoint],
) -> Result<JuliaReport> {
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0usize;
    for z in points {
        let before = julia_quotient(z, zeta)?;
        let image = phi.eval(z)?;
        let after = julia_quotient(&image, zeta)?;
        let ratio = after / (alpha * before);
        if ratio > 1.0 + JULIA_SLACK {
            violations += 1;
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(JuliaReport { checked: points.len(), violations, max_ratio })
}

/// Iterated Julia bound along the orbit of the origin:
/// jq(phi_n(0), zeta) <= alpha^n (1 + slack). The quotient loses relative
/// precision once the defect sinks below ~1e-10 (its numerator and
/// denominator are both differences against 1), so checking stops there.
#[derive(Debug, Clone)]
pub struct JuliaOrbitReport {
    pub checked: usize,
    /// max over n of jq(phi_n(0), zeta) / alpha^n.
    pub max_ratio: f64,
}

pub fn julia_orbit_check(
    phi: &LinearFractionalMap,
    zeta: &BoundaryPoint,
    alpha: f64,
    n_max: usize,
) -> Result<JuliaOrbitReport> {
    let m = phi.dim();
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    let mut pow = 1.0f64;
    let mut max_ratio: f64 = 0.0;
    let mut checked = 0usize;
    for _ in 1..=n_max {
        z = phi.eval_raw(&z)?;
        pow *= alpha;
        let defect = 1.0 - vnorm_sq(&z);
        if defect < 1e-10 {
            break;
        }
        let ip = vdot(&z, zeta.coords())?;
        let jq = (ONE - ip).norm_sqr() / defect;
        max_ratio = max_ratio.max(jq / pow);
        checked += 1;
    }
    Ok(JuliaOrbitReport { checked, max_ratio })
}

/// Restricted-approach diagnostics along an orbit converging to zeta.
///
/// With gamma = <Gamma, zeta> zeta the projection onto the complex line
/// through zeta, the curve is special when |Gamma - gamma|^2 / (1 - |gamma|^2)
/// tends to zero, and restricted when additionally |zeta - gamma| / (1 - |gamma|^2)
/// stays bounded.
#[derive(Debug, Clone)]
pub struct RestrictednessReport {
    pub special_seq: Vec<f64>,
    pub restricted_seq: Vec<f64>,
    pub special_limit_zero: bool,
    pub restricted_bounded: bool,
}

pub fn restrictedness_report(orbit: &Orbit, zeta: &BoundaryPoint) -> Result<RestrictednessReport> {
    let mut special_seq = Vec::with_capacity(orbit.points.len());
    let mut restricted_seq = Vec::with_capacity(orbit.points.len());
    for p in &orbit.points {
        let ip = vdot(p.coords(), zeta.coords())?;
        let gamma_defect = 1.0 - ip.norm_sqr();
        let diff: f64 = p
            .coords()
            .iter()
            .zip(zeta.coords().iter())
            .map(|(a, zb)| (a - ip * zb).norm_sqr())
            .sum();
        special_seq.push(diff / gamma_defect);
        restricted_seq.push((ONE - ip).norm() / gamma_defect);
    }

    let n = special_seq.len();
    let special_limit_zero = if n >= 10 {
        let tail = &special_seq[n - 10..];
        let small = tail.iter().all(|&v| v < 1e-4);
        let first_half: f64 = tail[..5].iter().sum::<f64>() / 5.0;
        let second_half: f64 = tail[5..].iter().sum::<f64>() / 5.0;
        small && second_half <= first_half + 1e-12
    } else {
        special_seq.iter().all(|&v| v < 1e-4)
    };

    let half = &restricted_seq[n / 2..];
    let mut sorted: Vec<f64> = half.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
    let max = half.iter().cloned().fold(0.0f64, f64::max);
    let restricted_bounded = max <= 10.0 * median.max(1e-300);

    Ok(RestrictednessReport { special_seq, restricted_seq, special_limit_zero, restricted_bounded })
}
