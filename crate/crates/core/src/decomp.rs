//! Matrix factorizations built on Jacobi rotations.
//!
//! Three routines live here, all variants of the same idea (apply plane
//! rotations until the relevant off-diagonal mass is negligible):
//!
//! * [`svd_thin`] — thin singular value decomposition via one-sided
//!   (Hestenes) Jacobi: rotate column pairs of `A` until they are
//!   mutually orthogonal, then read off singular values as column norms.
//! * [`sym_eig`] — eigendecomposition of a symmetric matrix via cyclic
//!   two-sided Jacobi.
//! * [`psd_power`] — real powers of a positive semidefinite matrix
//!   through its eigendecomposition, with `0^0 := 1` so that a zeroth
//!   power is the identity even on singular inputs.
//!
//! Jacobi methods are slower than blocked Householder algorithms but are
//! simple, unconditionally stable, and compute small singular values to
//! high relative accuracy — the right trade for the small, repeatedly
//! factored matrices this crate works with.
//!
//! Both iterations treat an off-diagonal entry as negligible below
//! `1e-14` times its natural scale — the product of the two column norms
//! for the one-sided sweep, the Frobenius norm of the input for the
//! two-sided one — and give up after 60 sweeps (returning a
//! numerical-failure error rather than a silently inaccurate result; in
//! practice a handful of sweeps suffice at these sizes).
//!
//! Columns of every orthogonal factor are sign-normalized so that the
//! largest-magnitude entry of each column is nonnegative, which makes the
//! factorizations deterministic functions of their input — important for
//! reproducible experiment artifacts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative threshold below which an off-diagonal entry counts as zero.
const OFF_DIAG_TOL: f64 = 1e-14;

/// Maximum number of cyclic sweeps before reporting non-convergence.
const MAX_SWEEPS: usize = 60;

/// Thin singular value decomposition `A = U * diag(s) * V^T`.
///
/// For an `m x n` input with `k = min(m, n)`: `U` is `m x k`, `V` is
/// `n x k`, both with orthonormal columns, and `s` holds the `k` singular
/// values in descending order. Columns belonging to (numerically) zero
/// singular values are completed to an orthonormal basis, so the
/// orthonormality guarantee holds even for rank-deficient input.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, one column per singular value.
    pub u: Matrix,
    /// Singular values, descending, all nonnegative.
    pub s: Vec<f64>,
    /// Right singular vectors, one column per singular value.
    pub v: Matrix,
}

impl Svd {
    /// Reassembles `U * diag(s) * V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let k = self.s.len();
        let mut scaled = self.u.clone();
        for j in 0..k {
            for i in 0..scaled.rows() {
                scaled.set(i, j, scaled.get(i, j) * self.s[j]);
            }
        }
        scaled.matmul(&self.v.transpose())
    }
}

/// Computes the thin SVD of `A` by one-sided Jacobi rotations.
///
/// Fails with a numerical error if column pairs are still far from
/// orthogonal after the sweep cap — callers must treat that as "no
/// trustworthy factorization", not as an approximate answer.
pub fn svd_thin(a: &Matrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        // Wide input: factor the transpose and swap the roles of U and V.
        let t = svd_tall(&a.transpose())?;
        let mut out = Svd { u: t.v, s: t.s, v: t.u };
        fix_svd_signs(&mut out);
        Ok(out)
    }
}

/// All singular values of `A`, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(svd_thin(a)?.s)
}

/// Smallest of the `min(m, n)` singular values of `A`.
pub fn sigma_min(a: &Matrix) -> Result<f64> {
    let s = singular_values(a)?;
    Ok(*s.last().expect("svd returns at least one singular value"))
}

/// Largest singular value (spectral norm) of `A`.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let s = singular_values(a)?;
    Ok(s[0])
}

/// One-sided Jacobi on a matrix with at least as many rows as columns.
fn svd_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let scale = a.frob_norm();
    let mut g = a.clone();
    let mut v = Matrix::identity(n);

    if scale > 0.0 {
        // Relative pair criterion: |g_p . g_q| compared against its own
        // natural scale ||g_p|| * ||g_q||. An absolute threshold would
        // leave pairs of small columns badly orthogonalized and U far
        // from orthonormal on ill-conditioned input.
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut clean = true;
            for p in 0..n.saturating_sub(1) {
                for q in (p + 1)..n {
                    let mut dot = 0.0;
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    for i in 0..m {
                        let gp = g.get(i, p);
                        let gq = g.get(i, q);
                        dot += gp * gq;
                        app += gp * gp;
                        aqq += gq * gq;
                    }
                    if dot * dot <= OFF_DIAG_TOL * OFF_DIAG_TOL * app * aqq {
                        continue;
                    }
                    clean = false;
                    let (cs, sn) = jacobi_rotation(app, aqq, dot);
                    rotate_columns(&mut g, p, q, cs, sn);
                    rotate_columns(&mut v, p, q, cs, sn);
                }
            }
            if clean {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numerical(format!(
                "one-sided Jacobi SVD did not converge within {MAX_SWEEPS} sweeps \
                 on a {m}x{n} matrix"
            )));
        }
    }

    // Singular values are the column norms of the rotated matrix.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| {
            let mut sq = 0.0;
            for i in 0..m {
                let gij = g.get(i, j);
                sq += gij * gij;
            }
            libm::sqrt(sq)
        })
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).expect("norms are finite"));

    let mut s = Vec::with_capacity(n);
    let mut u = Matrix::zeros(m, n);
    let mut vs = Matrix::zeros(n, n);
    // A singular value this small cannot yield a reliable direction from
    // its column; synthesize one instead so U stays orthonormal.
    let negligible = f64::EPSILON * scale;
    let mut pending: Vec<usize> = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        for i in 0..n {
            vs.set(i, slot, v.get(i, j));
        }
        if norms[j] > negligible {
            for i in 0..m {
                u.set(i, slot, g.get(i, j) / norms[j]);
            }
        } else {
            pending.push(slot);
        }
    }
    for slot in pending {
        complete_column(&mut u, slot);
    }

    let mut out = Svd { u, s, v: vs };
    fix_svd_signs(&mut out);
    Ok(out)
}

/// Eigendecomposition `S = Q * diag(l) * Q^T` of a symmetric matrix.
///
/// Returns the orthogonal factor and the eigenvalues in descending
/// (algebraic) order. Fails on non-square or visibly asymmetric input and
/// when the Jacobi iteration does not converge within the sweep cap.
pub fn sym_eig(s: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let (m, n) = s.shape();
    if m != n {
        return Err(Error::contract(format!(
            "eigendecomposition requires a square matrix, got {m}x{n}"
        )));
    }
    let scale = s.frob_norm();
    let asym = s.asymmetry();
    if asym > 1e-8 * if scale > 1.0 { scale } else { 1.0 } {
        return Err(Error::contract(format!(
            "matrix is not symmetric: max |S_ij - S_ji| = {asym:e}"
        )));
    }

    // Work on the symmetrized copy so tiny representation noise cannot
    // bias the rotations.
    let mut b = Matrix::from_fn(n, n, |i, j| 0.5 * (s.get(i, j) + s.get(j, i)));
    let mut q = Matrix::identity(n);

    if scale > 0.0 {
        let thresh = OFF_DIAG_TOL * scale;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut clean = true;
            for p in 0..n.saturating_sub(1) {
                for r in (p + 1)..n {
                    let bpr = b.get(p, r);
                    if bpr.abs() <= thresh {
                        continue;
                    }
                    clean = false;
                    let (cs, sn) = jacobi_rotation(b.get(p, p), b.get(r, r), bpr);
                    apply_two_sided(&mut b, p, r, cs, sn);
                    rotate_columns(&mut q, p, r, cs, sn);
                }
            }
            if clean {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numerical(format!(
                "Jacobi eigendecomposition did not converge within {MAX_SWEEPS} sweeps \
                 on a {n}x{n} matrix"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| b.get(y, y).partial_cmp(&b.get(x, x)).expect("finite eigenvalues"));
    let l: Vec<f64> = order.iter().map(|&j| b.get(j, j)).collect();
    let mut qs = Matrix::zeros(n, n);
    for (slot, &j) in order.iter().enumerate() {
        for i in 0..n {
            qs.set(i, slot, q.get(i, j));
        }
    }
    fix_column_signs(&mut qs, None);
    Ok((qs, l))
}

/// Real matrix power `S^p` of a positive semidefinite symmetric matrix.
///
/// Eigenvalues in `[-1e-10, 0)`, and nonnegative ones below the rounding
/// resolution `100 * eps * lambda_max`, are treated as exactly zero
/// (rounding images of zero on a PSD input); anything more negative is a
/// contract violation. Powers use the conventions `0^0 = 1` and `0^p = 0`
/// for `p > 0`; a negative power of a singular matrix is a contract
/// violation.
pub fn psd_power(s: &Matrix, p: f64) -> Result<Matrix> {
    Ok(psd_powers(s, &[p])?.pop().expect("one exponent in, one power out"))
}

/// Like [`psd_power`] for several exponents at once, sharing a single
/// eigendecomposition. Returns the powers in the order of `exponents`.
pub fn psd_powers(s: &Matrix, exponents: &[f64]) -> Result<Vec<Matrix>> {
    const NEGATIVE_EIG_TOL: f64 = 1e-10;
    let (q, l) = sym_eig(s)?;
    let n = l.len();
    for &lam in &l {
        if lam < -NEGATIVE_EIG_TOL {
            return Err(Error::contract(format!(
                "matrix is not positive semidefinite: eigenvalue {lam:e}"
            )));
        }
    }
    // Eigenvalues below the algorithm's resolution are rounding images of
    // an exact zero. They must be snapped to zero before powering:
    // lam^p for a fractional p inflates noise-level lam (1e-16 say) to
    // answer-level magnitudes, which would put garbage on the null space
    // of every power of a singular input.
    let lam_max = l.iter().fold(0.0f64, |acc, &x| if x > acc { x } else { acc });
    let snap = 100.0 * f64::EPSILON * lam_max;
    let qt = q.transpose();
    let mut out = Vec::with_capacity(exponents.len());
    for &p in exponents {
        let mut powed = Vec::with_capacity(n);
        for &lam in &l {
            let lam = if lam <= snap { 0.0 } else { lam };
            let value = if lam == 0.0 {
                if p == 0.0 {
                    1.0
                } else if p > 0.0 {
                    0.0
                } else {
                    return Err(Error::contract(
                        "negative power of a singular positive semidefinite matrix",
                    ));
                }
            } else {
                libm::pow(lam, p)
            };
            powed.push(value);
        }
        // Q diag(powed) Q^T, assembled column-scaled to save a multiply.
        let mut scaled = q.clone();
        for j in 0..n {
            for i in 0..n {
                scaled.set(i, j, scaled.get(i, j) * powed[j]);
            }
        }
        out.push(scaled.matmul(&qt));
    }
    Ok(out)
}

/// Stable rotation `(cos, sin)` that orthogonalizes/zeroes the `(p, q)`
/// plane given the two diagonal entries and the off-diagonal coupling.
fn jacobi_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    // Smaller-magnitude root of t^2 + 2*tau*t - 1 = 0: the rotation angle
    // closest to zero, which keeps the iteration contractive.
    let t = if tau >= 0.0 {
        1.0 / (tau + libm::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
    };
    let cs = 1.0 / libm::sqrt(1.0 + t * t);
    (cs, t * cs)
}

/// Applies the rotation to columns `p, q`: `(col_p, col_q) <-
/// (cs*col_p - sn*col_q, sn*col_p + cs*col_q)`.
fn rotate_columns(m: &mut Matrix, p: usize, q: usize, cs: f64, sn: f64) {
    for i in 0..m.rows() {
        let xp = m.get(i, p);
        let xq = m.get(i, q);
        m.set(i, p, cs * xp - sn * xq);
        m.set(i, q, sn * xp + cs * xq);
    }
}

/// Two-sided update `B <- J^T B J` restricted to the `(p, q)` plane,
/// keeping `B` exactly symmetric and zeroing `B_pq`.
fn apply_two_sided(b: &mut Matrix, p: usize, q: usize, cs: f64, sn: f64) {
    let n = b.rows();
    let bpp = b.get(p, p);
    let bqq = b.get(q, q);
    let bpq = b.get(p, q);
    let t = sn / cs;
    b.set(p, p, bpp - t * bpq);
    b.set(q, q, bqq + t * bpq);
    b.set(p, q, 0.0);
    b.set(q, p, 0.0);
    for i in 0..n {
        if i == p || i == q {
            continue;
        }
        let bip = b.get(i, p);
        let biq = b.get(i, q);
        let new_p = cs * bip - sn * biq;
        let new_q = sn * bip + cs * biq;
        b.set(i, p, new_p);
        b.set(p, i, new_p);
        b.set(i, q, new_q);
        b.set(q, i, new_q);
    }
}

/// Replaces column `slot` of `u` with a unit vector orthogonal to all
/// other (already orthonormal) columns, chosen deterministically by
/// Gram-Schmidt over the standard basis.
fn complete_column(u: &mut Matrix, slot: usize) {
    let (m, k) = u.shape();
    for basis in 0..m {
        let mut cand = vec![0.0; m];
        cand[basis] = 1.0;
        for j in 0..k {
            if j == slot {
                continue;
            }
            let dot: f64 = (0..m).map(|i| cand[i] * u.get(i, j)).sum();
            for (i, c) in cand.iter_mut().enumerate() {
                *c -= dot * u.get(i, j);
            }
        }
        let norm = libm::sqrt(cand.iter().map(|c| c * c).sum());
        if norm > 0.5 {
            // Comfortably independent of the span; normalize and accept.
            for (i, c) in cand.iter().enumerate() {
                u.set(i, slot, c / norm);
            }
            return;
        }
    }
    unreachable!("m standard basis vectors cannot all lie near a (m-1)-dim span");
}

/// Makes the largest-magnitude entry of each column of `m` nonnegative.
/// When `follow` is given, its matching column is flipped in tandem so a
/// two-factor decomposition stays valid.
fn fix_column_signs(m: &mut Matrix, mut follow: Option<&mut Matrix>) {
    for j in 0..m.cols() {
        let mut best = 0;
        let mut best_abs = -1.0f64;
        for i in 0..m.rows() {
            let a = m.get(i, j).abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m.get(best, j) < 0.0 {
            for i in 0..m.rows() {
                m.set(i, j, -m.get(i, j));
            }
            if let Some(other) = follow.as_deref_mut() {
                for i in 0..other.rows() {
                    other.set(i, j, -other.get(i, j));
                }
            }
        }
    }
}

/// Sign convention for an SVD: normalize `U` columns, dragging the
/// matching `V` columns along; then normalize any `V` column whose
/// singular value is zero (where `U` and `V` are decoupled).
fn fix_svd_signs(svd: &mut Svd) {
    fix_column_signs(&mut svd.u, Some(&mut svd.v));
    for j in 0..svd.s.len() {
        if svd.s[j] != 0.0 {
            continue;
        }
        let col = Matrix::from_fn(svd.v.rows(), 1, |i, _| svd.v.get(i, j));
        let mut col = col;
        fix_column_signs(&mut col, None);
        for i in 0..svd.v.rows() {
            svd.v.set(i, j, col.get(i, 0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use alloc::vec;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
    }

    fn orthonormality_defect(m: &Matrix) -> f64 {
        let k = m.cols();
        m.gram().frob_dist(&Matrix::identity(k))
    }

    fn random_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| scale * rng.next_normal())
    }

    // ----- svd_thin -------------------------------------------------------

    #[test]
    fn svd_of_signed_diagonal_matches_hand_values() {
        // A = diag(3, -2): singular values (3, 2); the sign of the second
        // diagonal entry moves into V under the column-sign convention.
        let a = Matrix::new(2, 2, vec![3.0, 0.0, 0.0, -2.0]).unwrap();
        let svd = svd_thin(&a).unwrap();
        assert_close(svd.s[0], 3.0, 1e-14, "sigma_1");
        assert_close(svd.s[1], 2.0, 1e-14, "sigma_2");
        assert_eq!(svd.u.entries(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(svd.v.entries(), &[1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn svd_handles_rank_deficiency_with_orthonormal_completion() {
        let a = Matrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let svd = svd_thin(&a).unwrap();
        assert_close(svd.s[0], 2.0, 1e-14, "sigma_1");
        assert_close(svd.s[1], 0.0, 1e-14, "sigma_2");
        assert!(orthonormality_defect(&svd.u) < 1e-12, "U orthonormal");
        assert!(orthonormality_defect(&svd.v) < 1e-12, "V orthonormal");
        assert!(svd.reconstruct().frob_dist(&a) < 1e-12, "reconstruction");
    }

    #[test]
    fn svd_of_zero_matrix_returns_orthonormal_factors() {
        let a = Matrix::zeros(3, 2);
        let svd = svd_thin(&a).unwrap();
        assert_eq!(svd.s, vec![0.0, 0.0]);
        assert!(orthonormality_defect(&svd.u) < 1e-14);
        assert!(orthonormality_defect(&svd.v) < 1e-14);
    }

    #[test]
    fn svd_of_wide_matrix_transposes_correctly() {
        let a = Matrix::new(1, 3, vec![2.0, 0.0, 0.0]).unwrap();
        let svd = svd_thin(&a).unwrap();
        assert_eq!(svd.s.len(), 1);
        assert_close(svd.s[0], 2.0, 1e-14, "sigma");
        assert_eq!(svd.u.shape(), (1, 1));
        assert_eq!(svd.v.shape(), (3, 1));
        assert!(svd.reconstruct().frob_dist(&a) < 1e-13);
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = Rng::from_seed(01234);
        for trial in 0..60 {
            let rows = 1 + (rng.next_u64() % 8) as usize;
            let cols = 1 + (rng.next_u64() % 8) as usize;
            let a = random_matrix(&mut rng, rows, cols, 1.5);
            let svd = svd_thin(&a).unwrap();
            let scale = if a.frob_norm() > 1.0 { a.frob_norm() } else { 1.0 };
            assert!(
                svd.reconstruct().frob_dist(&a) <= 1e-10 * scale,
                "trial {trial}: reconstruction defect too large"
            );
            assert!(orthonormality_defect(&svd.u) <= 1e-10, "trial {trial}: U");
            assert!(orthonormality_defect(&svd.v) <= 1e-10, "trial {trial}: V");
            for w in svd.s.windows(2) {
                assert!(w[0] >= w[1], "trial {trial}: singular values not sorted");
            }
            assert!(svd.s.iter().all(|&x| x >= 0.0), "trial {trial}: negative sigma");
        }
    }

    #[test]
    fn singular_values_square_to_gram_eigenvalues() {
        // Cross-check the two independent Jacobi routes: one-sided on A
        // versus two-sided on A^T A.
        let mut rng = Rng::from_seed(7);
        for _ in 0..40 {
            let rows = 1 + (rng.next_u64() % 7) as usize;
            let cols = 1 + (rng.next_u64() % 7) as usize;
            let a = random_matrix(&mut rng, rows, cols, 1.0);
            let s = singular_values(&a).unwrap();
            let (_, mut gram_eigs) = sym_eig(&a.gram()).unwrap();
            gram_eigs.truncate(s.len());
            let scale = if a.frob_norm() > 1.0 { a.frob_norm() } else { 1.0 };
            for (sv, ge) in s.iter().zip(&gram_eigs) {
                let ge = if *ge < 0.0 { 0.0 } else { *ge };
                assert_close(sv * sv, ge, 1e-10 * scale * scale, "sigma^2 vs eig");
            }
        }
    }

    #[test]
    fn svd_scales_linearly() {
        let mut rng = Rng::from_seed(99);
        let a = random_matrix(&mut rng, 5, 3, 1.0);
        let s1 = singular_values(&a).unwrap();
        let s2 = singular_values(&a.scale(2.5)).unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            assert_close(2.5 * x, *y, 1e-12, "scaling");
        }
    }

    #[test]
    fn svd_is_deterministic() {
        let mut rng = Rng::from_seed(4242);
        let a = random_matrix(&mut rng, 6, 4, 1.0);
        let s1 = svd_thin(&a).unwrap();
        let s2 = svd_thin(&a).unwrap();
        assert_eq!(s1.u.entries(), s2.u.entries());
        assert_eq!(s1.v.entries(), s2.v.entries());
        assert_eq!(s1.s, s2.s);
    }

    // ----- sym_eig --------------------------------------------------------

    #[test]
    fn eig_of_diagonal_is_sorted_identity() {
        let s = Matrix::from_diag(&[2.0, 5.0]);
        let (q, l) = sym_eig(&s).unwrap();
        assert_eq!(l, vec![5.0, 2.0]);
        // Eigenvector of 5 is e2, of 2 is e1.
        assert_eq!(q.entries(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn eig_matches_hand_computation_for_2x2() {
        // [[2,1],[1,2]] has eigenpairs (3, [1,1]/sqrt2) and (1, [1,-1]/sqrt2).
        let s = Matrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let (q, l) = sym_eig(&s).unwrap();
        assert_close(l[0], 3.0, 1e-14, "lambda_1");
        assert_close(l[1], 1.0, 1e-14, "lambda_2");
        let r = 1.0 / libm::sqrt(2.0);
        assert_close(q.get(0, 0), r, 1e-14, "q11");
        assert_close(q.get(1, 0), r, 1e-14, "q21");
        assert_close(q.get(0, 1), r, 1e-14, "q12");
        assert_close(q.get(1, 1), -r, 1e-14, "q22");
    }

    #[test]
    fn eig_reconstructs_random_symmetric_matrices() {
        let mut rng = Rng::from_seed(31);
        for trial in 0..40 {
            let n = 1 + (rng.next_u64() % 8) as usize;
            let raw = random_matrix(&mut rng, n, n, 1.0);
            let s = raw.add(&raw.transpose()).scale(0.5);
            let (q, l) = sym_eig(&s).unwrap();
            let rebuilt = q.matmul(&Matrix::from_diag(&l)).matmul(&q.transpose());
            let scale = if s.frob_norm() > 1.0 { s.frob_norm() } else { 1.0 };
            assert!(
                rebuilt.frob_dist(&s) <= 1e-10 * scale,
                "trial {trial}: reconstruction defect"
            );
            assert!(orthonormality_defect(&q) <= 1e-10, "trial {trial}: Q");
            for w in l.windows(2) {
                assert!(w[0] >= w[1], "trial {trial}: eigenvalues not sorted");
            }
        }
    }

    #[test]
    fn eig_of_zero_matrix_is_trivial() {
        let (q, l) = sym_eig(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(l, vec![0.0, 0.0, 0.0]);
        assert_eq!(q.entries(), Matrix::identity(3).entries());
    }

    #[test]
    fn eig_rejects_asymmetric_input() {
        let s = Matrix::new(2, 2, vec![1.0, 5.0, -5.0, 1.0]).unwrap();
        let err = sym_eig(&s).unwrap_err();
        assert!(err.is_contract(), "expected contract violation, got {err}");
    }

    // ----- psd_power ------------------------------------------------------

    #[test]
    fn psd_power_takes_square_roots_of_diagonals() {
        let s = Matrix::from_diag(&[4.0, 9.0]);
        let r = psd_power(&s, 0.5).unwrap();
        assert!(r.frob_dist(&Matrix::from_diag(&[2.0, 3.0])) < 1e-13);
    }

    #[test]
    fn psd_power_zero_exponent_gives_identity_even_when_singular() {
        let s = Matrix::zeros(3, 3);
        let r = psd_power(&s, 0.0).unwrap();
        assert!(r.frob_dist(&Matrix::identity(3)) < 1e-14);
    }

    #[test]
    fn psd_power_positive_exponent_of_zero_matrix_is_zero() {
        let s = Matrix::zeros(2, 2);
        let r = psd_power(&s, 0.5).unwrap();
        assert!(r.frob_norm() < 1e-14);
    }

    #[test]
    fn psd_power_identity_exponent_reproduces_input() {
        let mut rng = Rng::from_seed(58);
        let raw = random_matrix(&mut rng, 5, 5, 1.0);
        let s = raw.matmul(&raw.transpose()); // PSD by construction
        let r = psd_power(&s, 1.0).unwrap();
        assert!(r.frob_dist(&s) <= 1e-12 * if s.frob_norm() > 1.0 { s.frob_norm() } else { 1.0 });
    }

    #[test]
    fn psd_power_half_squares_back_to_input() {
        let mut rng = Rng::from_seed(77);
        for _ in 0..20 {
            let n = 1 + (rng.next_u64() % 6) as usize;
            let raw = random_matrix(&mut rng, n, n, 1.0);
            let s = raw.matmul(&raw.transpose());
            let root = psd_power(&s, 0.5).unwrap();
            let scale = if s.frob_norm() > 1.0 { s.frob_norm() } else { 1.0 };
            assert!(root.matmul(&root).frob_dist(&s) <= 1e-10 * scale);
        }
    }

    #[test]
    fn psd_power_exponents_compose() {
        let mut rng = Rng::from_seed(123);
        let raw = random_matrix(&mut rng, 4, 4, 1.0);
        let s = raw.matmul(&raw.transpose());
        let a = psd_power(&s, 2.0 / 3.0).unwrap();
        let b = psd_power(&s, 1.0 / 3.0).unwrap();
        let whole = psd_power(&s, 1.0).unwrap();
        assert!(a.matmul(&b).frob_dist(&whole) < 1e-10 * whole.frob_norm());
    }

    #[test]
    fn psd_power_clamps_rounding_noise_but_rejects_real_negatives() {
        let noisy = Matrix::from_diag(&[1.0, -5e-11]);
        let r = psd_power(&noisy, 0.5).unwrap();
        assert!(r.frob_dist(&Matrix::from_diag(&[1.0, 0.0])) < 1e-13);

        let indefinite = Matrix::from_diag(&[1.0, -1.0]);
        let err = psd_power(&indefinite, 0.5).unwrap_err();
        assert!(err.is_contract(), "expected contract violation, got {err}");
    }

    #[test]
    fn psd_power_rejects_negative_power_of_singular_matrix() {
        let s = Matrix::from_diag(&[1.0, 0.0]);
        assert!(psd_power(&s, -0.5).unwrap_err().is_contract());
    }
}
