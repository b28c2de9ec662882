//! Datasets, second moments, whitening, and synthetic targets.
//!
//! Training operates on the whitened objective
//! `0.5 * ||W - Phi||_F^2`, while a regression dataset defines the
//! empirical risk `1/(2m) * ||W X - Y||_F^2`. The two are linked through
//! the second moments: once the inputs are whitened
//! (`Lambda_xx = 1/m X X^T = I`), the risk decomposes exactly as
//!
//! ```text
//! 1/(2m) ||W X - Y||_F^2 = 0.5 ||W - Lambda_yx||_F^2 + opt_const
//! opt_const = 0.5 * (tr(Lambda_yy) - ||Lambda_yx||_F^2)
//! ```
//!
//! so the cross-moment matrix `Lambda_yx` is the training target and
//! `opt_const` is the (irreducible) risk of the optimum. [`whiten`]
//! produces the symmetric whitening transform `Lambda_xx^(-1/2)` (the
//! variant that stays closest to the original coordinates),
//! [`empirical_moments`] and [`problem_from_moments`] turn data into a
//! training problem, and [`synth_target`] provides the deterministic
//! synthetic targets used by experiments and tests.

use alloc::format;

use crate::decomp;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Problem;
use crate::rng::Rng;

/// A paired sample matrix: inputs `x` (`d_x` rows) and labels `y`
/// (`d_y` rows), one column per sample.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Inputs, `d_x x m`.
    pub x: Matrix,
    /// Labels, `d_y x m`.
    pub y: Matrix,
}

impl Dataset {
    /// Pairs inputs with labels; both must have one column per sample.
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.cols() != y.cols() {
            return Err(Error::contract(format!(
                "dataset: {} input columns vs {} label columns",
                x.cols(),
                y.cols()
            )));
        }
        Ok(Dataset { x, y })
    }

    /// Number of samples `m`.
    pub fn samples(&self) -> usize {
        self.x.cols()
    }
}

/// Empirical second moments of a dataset, with the constant that links
/// the whitened objective to the empirical risk.
#[derive(Debug, Clone)]
pub struct Moments {
    /// `1/m * X X^T`.
    pub lxx: Matrix,
    /// `1/m * Y X^T`.
    pub lyx: Matrix,
    /// `1/m * Y Y^T`.
    pub lyy: Matrix,
    /// `0.5 * (tr(Lambda_yy) - ||Lambda_yx||_F^2)`.
    pub opt_const: f64,
}

/// Computes the empirical second moments of a dataset.
pub fn empirical_moments(ds: &Dataset) -> Moments {
    let inv_m = 1.0 / ds.samples() as f64;
    let lxx = ds.x.matmul(&ds.x.transpose()).scale(inv_m);
    let lyx = ds.y.matmul(&ds.x.transpose()).scale(inv_m);
    let lyy = ds.y.matmul(&ds.y.transpose()).scale(inv_m);
    let opt_const = 0.5 * (lyy.trace() - lyx.frob_norm() * lyx.frob_norm());
    Moments { lxx, lyx, lyy, opt_const }
}

/// Empirical risk `1/(2m) * ||W X - Y||_F^2` of an end-to-end matrix.
pub fn empirical_risk(w: &Matrix, ds: &Dataset) -> f64 {
    assert_eq!(
        (w.rows(), w.cols()),
        (ds.y.rows(), ds.x.rows()),
        "risk: matrix shape does not match the dataset"
    );
    let r = w.matmul(&ds.x).sub(&ds.y);
    0.5 / ds.samples() as f64 * r.frob_norm() * r.frob_norm()
}

/// Smallest admissible eigenvalue ratio for whitening: below this the
/// input covariance is treated as rank deficient.
const WHITEN_EIG_RATIO: f64 = 1e-10;

/// Whitens the inputs with the symmetric transform
/// `T = Lambda_xx^(-1/2)`, returning `T` and the transformed dataset.
///
/// Fails (contract violation) when the input covariance is numerically
/// rank deficient — whitening would blow up the collapsed directions —
/// reporting the offending eigenvalue.
pub fn whiten(ds: &Dataset) -> Result<(Matrix, Dataset)> {
    let moments = empirical_moments(ds);
    let (_, eigs) = decomp::sym_eig(&moments.lxx)?;
    let max_eig = eigs.first().copied().unwrap_or(0.0);
    let min_eig = eigs.last().copied().unwrap_or(0.0);
    if min_eig <= WHITEN_EIG_RATIO * max_eig {
        return Err(Error::contract(format!(
            "input covariance is rank deficient: eigenvalue {min_eig:e} \
             (largest {max_eig:e}); drop or merge collinear input coordinates"
        )));
    }
    let t = decomp::psd_power(&moments.lxx, -0.5)?;
    let whitened = Dataset { x: t.matmul(&ds.x), y: ds.y.clone() };
    Ok((t, whitened))
}

/// Rescales the labels so the cross moment has unit Frobenius norm,
/// returning the factor applied to `y`. Fails when the cross moment is
/// zero (labels carry no signal aligned with the inputs).
pub fn rescale_labels(ds: &Dataset) -> Result<(f64, Dataset)> {
    let lyx = empirical_moments(ds).lyx;
    let norm = lyx.frob_norm();
    if norm == 0.0 {
        return Err(Error::contract(
            "cross moment is zero: labels are uncorrelated with inputs",
        ));
    }
    let factor = 1.0 / norm;
    Ok((factor, Dataset { x: ds.x.clone(), y: ds.y.scale(factor) }))
}

/// Builds the whitened training problem from moments: the target is the
/// cross moment, the constant maps the whitened objective back to the
/// empirical risk. The inputs must already be white
/// (`Lambda_xx = I` to within `1e-8`).
pub fn problem_from_moments(moments: &Moments) -> Result<Problem> {
    let d = moments.lxx.rows();
    let gap = moments.lxx.frob_dist(&Matrix::identity(d));
    if gap > 1e-8 * libm::sqrt(d as f64) {
        return Err(Error::contract(format!(
            "inputs are not whitened: ||Lambda_xx - I||_F = {gap:e}; whiten first"
        )));
    }
    Ok(Problem { phi: moments.lyx.clone(), opt_const: moments.opt_const })
}

/// Family of deterministic synthetic targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// I.i.d. Gaussian entries, normalized to unit Frobenius norm.
    RandomGaussian,
    /// Identity plus a Gaussian perturbation of Frobenius norm `radius`
    /// (square targets only). Every `radius < 1` leaves a positive
    /// deficiency margin at the identity initialization.
    NearIdentity {
        /// Frobenius norm of the perturbation.
        radius: f64,
    },
    /// A single unit-norm row (`d_out = 1`): scalar regression.
    ScalarRow,
}

/// Draws a synthetic target of the requested kind, deterministically in
/// `seed`.
pub fn synth_target(kind: SynthKind, d_out: usize, d_in: usize, seed: u64) -> Result<Matrix> {
    let mut rng = Rng::from_seed(seed);
    match kind {
        SynthKind::RandomGaussian => {
            let raw = nonzero_gaussian(d_out, d_in, &mut rng);
            Ok(raw.scale(1.0 / raw.frob_norm()))
        }
        SynthKind::NearIdentity { radius } => {
            if d_out != d_in {
                return Err(Error::contract(format!(
                    "near-identity target must be square, got {d_out}x{d_in}"
                )));
            }
            if !(radius.is_finite() && radius >= 0.0) {
                return Err(Error::contract(format!(
                    "perturbation radius must be finite and nonnegative, got {radius}"
                )));
            }
            if radius == 0.0 {
                return Ok(Matrix::identity(d_out));
            }
            let raw = nonzero_gaussian(d_out, d_in, &mut rng);
            Ok(Matrix::identity(d_out).add(&raw.scale(radius / raw.frob_norm())))
        }
        SynthKind::ScalarRow => {
            if d_out != 1 {
                return Err(Error::contract(format!(
                    "scalar-regression target has one row, got {d_out}"
                )));
            }
            let raw = nonzero_gaussian(1, d_in, &mut rng);
            Ok(raw.scale(1.0 / raw.frob_norm()))
        }
    }
}

/// A Gaussian draw, redrawn in the (probability-zero, but cheap to rule
/// out) event that it is exactly zero and cannot be normalized.
fn nonzero_gaussian(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    loop {
        let m = Matrix::from_fn(rows, cols, |_, _| rng.next_normal());
        if m.frob_norm() > 0.0 {
            return m;
        }
    }
}
