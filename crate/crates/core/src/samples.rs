//! Deterministic generators for experiment and test material: random
//! unitaries, random validated self-maps, random valid half-space maps, and
//! the disk automorphism embedded in higher dimensions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bcd::BcdMap;
use crate::error::Result;
use crate::geometry::BallPoint;
use crate::lfm::{ball_automorphism, LinearFractionalMap};
use crate::linalg::{vdot, vnorm, vnorm_sq, CMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn random_complex(rng: &mut ChaCha20Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random unitary via Gram-Schmidt on a Gaussian-ish matrix (twice, for
/// orthogonality at working precision).
pub fn random_unitary(m: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..m)
        .map(|_| (0..m).map(|_| random_complex(rng, 1.0)).collect())
        .collect();
    for _pass in 0..2 {
        for j in 0..m {
            for i in 0..j {
                let prev = cols[i].clone();
                let coef = vdot(&cols[j], &prev).unwrap();
                for (x, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *x -= coef * p;
                }
            }
            let n = vnorm(&cols[j]);
            if n < 1e-8 {
                // astronomically unlikely with a continuous draw; restart the column
                cols[j] = (0..m).map(|_| random_complex(rng, 1.0)).collect();
                let n2 = vnorm(&cols[j]);
                for x in cols[j].iter_mut() {
                    *x /= n2;
                }
            } else {
                for x in cols[j].iter_mut() {
                    *x /= n;
                }
            }
        }
    }
    CMatrix::from_fn(m, m, |i, j| cols[j][i])
}

/// Random valid half-space map with the given dilatation coefficient: the
/// transverse matrix is drawn with ||A|| strictly below sqrt(alpha), and the
/// translation part c is pushed up until the self-map inequality holds with a
/// small margin.
pub fn random_valid_bcd(m: usize, alpha: f64, seed: u64) -> Result<BcdMap> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
    let k = m - 1;
    let raw = CMatrix::from_fn(k, k, |_, _| random_complex(&mut rng, 1.0));
    let target = alpha.sqrt() * rng.gen_range(0.2..0.95);
    let nrm = raw.op_norm()?;
    let a = if nrm > 1e-12 {
        raw.scale(Complex64::new(target / nrm, 0.0))
    } else {
        raw
    };
    let d: Vec<Complex64> = (0..k).map(|_| random_complex(&mut rng, 0.8)).collect();
    let b: Vec<Complex64> = (0..k).map(|_| random_complex(&mut rng, 0.8)).collect();

    // maximize g0(w) = ||Aw + d||^2 - alpha ||w||^2 - alpha Re<w, b> at its
    // stationary point, then choose Re c so the full inequality holds
    let g0 = |w: &[Complex64]| -> f64 {
        let mut aw = a.matvec(w).unwrap();
        for (x, di) in aw.iter_mut().zip(d.iter()) {
            *x += di;
        }
        vnorm_sq(&aw) - alpha * vnorm_sq(w) - alpha * vdot(w, &b).unwrap().re
    };
    let max_g0 = if k == 0 {
        0.0
    } else {
        let asa = a.adjoint().mul(&a)?;
        let kmat = CMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { Complex64::new(alpha, 0.0) } else { ZERO };
            id - asa[(i, j)]
        });
        let ad = a.adjoint().matvec(&d)?;
        let rhs: Vec<Complex64> = ad
            .iter()
            .zip(b.iter())
            .map(|(x, bi)| x - bi * (alpha / 2.0))
            .collect();
        let y = crate::linalg::lu_factor(&kmat)?.solve(&rhs)?;
        g0(&y)
    };
    let margin = rng.gen_range(0.0..0.5);
    let c = Complex64::new(max_g0.max(0.0) / alpha + margin, rng.gen_range(-0.5..0.5));
    BcdMap::new(alpha, c, b, d, a)
}

/// Random validated linear fractional self-map of B^m. Cycles through three
/// families: strict contractions of the form phi_a o (rho U), automorphisms
/// phi_a o U, and non-elliptic maps conjugated from the half-space chart.
pub fn random_validated_lfm(m: usize, seed: u64) -> Result<LinearFractionalMap> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(7));
    match seed % 3 {
        2 => {
            let alpha = rng.gen_range(0.15..0.95);
            random_valid_bcd(m, alpha, seed ^ 0xbcd)?.to_ball_map()
        }
        variant => {
            let rho = if variant == 1 { 1.0 } else { rng.gen_range(0.4..0.98) };
            let center: Vec<Complex64> = (0..m).map(|_| random_complex(&mut rng, 0.4)).collect();
            let a = BallPoint::new(center).expect("|a| <= 0.4 sqrt(2m) < 1 for m <= 4 draws");
            let auto = ball_automorphism(&a)?;
            let u = random_unitary(m, &mut rng);
            let mut inner = CMatrix::zeros(m + 1, m + 1);
            for i in 0..m {
                for j in 0..m {
                    inner[(i, j)] = u[(i, j)] * rho;
                }
            }
            inner[(m, m)] = ONE;
            auto.compose(&LinearFractionalMap::new(m, inner)?)?.validate_seeded(seed)
        }
    }
}

/// The disk automorphism z -> (z + r)/(r z + 1) extended to an automorphism
/// of B^m: (z1, z') -> ((z1 + r)/(r z1 + 1), sqrt(1 - r^2) z' / (r z1 + 1)).
/// Hyperbolic with Denjoy-Wolff point e1 and dilatation (1 - r)/(1 + r).
pub fn embedded_disk_automorphism(r: f64, m: usize) -> Result<LinearFractionalMap> {
    if !(0.0 < r && r < 1.0) {
        return Err(crate::error::Error::Domain(format!(
            "automorphism parameter must lie in (0,1), got {r}"
        )));
    }
    let s = (1.0 - r * r).sqrt();
    let mut t = CMatrix::zeros(m + 1, m + 1);
    t[(0, 0)] = ONE;
    t[(0, m)] = Complex64::new(r, 0.0);
    for i in 1..m {
        t[(i, i)] = Complex64::new(s, 0.0);
    }
    t[(m, 0)] = Complex64::new(r, 0.0);
    t[(m, m)] = ONE;
    LinearFractionalMap::new(m, t)?.validate()
}
