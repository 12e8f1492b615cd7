//! Numerical toolkit for linear fractional self-maps of the complex unit
//! ball B^m and the composition operators they induce on the H^2_{m,beta}
//! scale of Hilbert function spaces.
//!
//! What lives where:
//!
//! - [`linalg`]: self-contained dense complex linear algebra (Jacobi
//!   Hermitian eigenvalues, PSD factorization, LU, a small shifted-QR
//!   eigensolver) for matrices up to ~64x64.
//! - [`geometry`]: ball and Siegel half-space points, the generalized Cayley
//!   transform, the Julia quotient, seeded sampling.
//! - [`lfm`]: linear fractional maps as projective matrices, J-contractivity
//!   with scaling search, fixed points, the de Branges-Rovnyak kernel and its
//!   explicit positive factorization.
//! - [`kernels`]: the k_beta reproducing kernels, Gram positivity reports,
//!   composition-operator norm bounds and Gram-certified lower bounds,
//!   direct spectral-radius estimates.
//! - [`dynamics`]: orbits, the elliptic/parabolic/hyperbolic classification,
//!   Denjoy-Wolff points, dilatation coefficients, Julia checks,
//!   restricted-approach diagnostics.
//! - [`bcd`]: the half-space normal form of non-elliptic maps, closed-form
//!   iterates, the restricted-convergence counterexample, and scaled
//!   recurrences that track orbit defects far past f64 subtraction range.
//! - [`samples`]: deterministic generators for random validated maps.

pub mod bcd;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod lfm;
pub mod linalg;
pub mod samples;

pub use num_complex::Complex64;

pub use bcd::{BcdMap, BcdValidation, DefectSequence, IterateData};
pub use dynamics::{ClassificationResult, DwPoint, MapKind, Orbit, RestrictednessReport};
pub use error::{Error, Result};
pub use geometry::{BallPoint, BoundaryPoint, SiegelPoint};
pub use kernels::{KernelGramReport, NormBounds, SpaceParams, Verdict};
pub use lfm::{KernelFactorization, LinearFractionalMap};
pub use linalg::CMatrix;
