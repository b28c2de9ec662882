//! Convergence certificates and trajectory verification.
//!
//! Two measurable properties of an initialization govern whether plain
//! gradient descent provably reaches the global optimum of the whitened
//! objective, and how fast:
//!
//! * **Balancedness.** The stack is `delta`-balanced when consecutive
//!   Gram matrices nearly agree:
//!   `max_j ||W_(j+1)^T W_(j+1) - W_j W_j^T||_F <= delta`
//!   ([`balancedness_delta`]).
//! * **Deficiency margin.** The end-to-end matrix `W` has margin `c > 0`
//!   with respect to the target when
//!   `||W - Phi||_F <= sigma_min(Phi) - c` ([`deficiency_margin`]).
//!   The margin is a sticky property: every matrix at least as close to
//!   the target keeps its smallest singular value at or above `c`
//!   ([`margin_implies_sigma`]), which is what rules out the saddle at
//!   zero along a descending trajectory.
//!
//! [`margin_rate_certificate`] packages the quantitative guarantee: if
//! the initialization has margin `c` and is `delta`-balanced for
//! `delta <= c^2 / (256 N^3 ||Phi||_F^(2(N-1)/N))`, and the step size
//! satisfies `eta <= c^((4N-2)/N) / (6144 N^3 ||Phi||_F^((6N-4)/N))`,
//! then the loss decays at least geometrically, reaching `eps` within
//! `ceil( ln(loss(0)/eps) / (eta · c^(2(N-1)/N)) )` iterations.
//!
//! [`verify_trajectory`] replays a recorded training run against the
//! inequalities that the guarantee's proof maintains step by step:
//! per-step descent, persistence of approximate balancedness, bounded
//! per-layer spectral norms, margin preservation, and the geometric
//! envelope. Every check reports its worst observed residual, so a
//! violation is a concrete, locatable counterexample rather than a
//! boolean surprise.
//!
//! [`balanced_init_certificate`] covers the scalar-output case
//! (`d_N = 1`) under balanced random initialization, where the guarantee
//! holds with constant probability over the draw; its step-size and
//! iteration bounds trade the unknown margin for the sampling standard
//! deviation.

use alloc::format;
use alloc::vec::Vec;

use crate::decomp;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{NetSpec, Problem, TrainTrace, WeightStack};

// ===== pointwise properties ==============================================

/// Balancedness gap `max_j ||W_(j+1)^T W_(j+1) - W_j W_j^T||_F`
/// over consecutive layer pairs; zero for single-layer stacks.
pub fn balancedness_delta(w: &WeightStack) -> f64 {
    let mut worst = 0.0f64;
    for j in 1..w.depth() {
        let upper = w.layer(j + 1).gram();
        let lower = w.layer(j).outer_gram();
        let gap = upper.frob_dist(&lower);
        if gap > worst {
            worst = gap;
        }
    }
    worst
}

/// Deficiency margin `sigma_min(Phi) - ||W - Phi||_F` of an end-to-end
/// matrix `W` with respect to the target. Positive values certify that
/// `W` is closer to the target than the target is to rank deficiency.
pub fn deficiency_margin(w: &Matrix, phi: &Matrix) -> Result<f64> {
    if w.shape() != phi.shape() {
        return Err(Error::contract(format!(
            "margin: shapes differ ({}x{} vs {}x{})",
            w.rows(),
            w.cols(),
            phi.rows(),
            phi.cols()
        )));
    }
    Ok(decomp::sigma_min(phi)? - w.frob_dist(phi))
}

/// Checks one instance of the margin's key consequence: any matrix
/// `W'` with `||W' - Phi||_F <= sigma_min(Phi) - c` has
/// `sigma_min(W') >= c`. Returns `true` when the instance is consistent
/// with the property (vacuously so when the premise does not hold).
pub fn margin_implies_sigma(w_prime: &Matrix, phi: &Matrix, c: f64) -> Result<bool> {
    if w_prime.shape() != phi.shape() {
        return Err(Error::contract("margin check: shape mismatch"));
    }
    let premise = w_prime.frob_dist(phi) <= decomp::sigma_min(phi)? - c;
    if !premise {
        return Ok(true);
    }
    // Numerical slack: both sides come out of the same Jacobi machinery,
    // accurate to well under 1e-10 at unit scale.
    let slack = 1e-10 * if phi.frob_norm() > 1.0 { phi.frob_norm() } else { 1.0 };
    Ok(decomp::sigma_min(w_prime)? >= c - slack)
}

// ===== guarantee formulas =================================================

/// Balancedness level the guarantee requires at initialization:
/// `c^2 / (256 N^3 ||Phi||_F^(2(N-1)/N))`.
pub fn required_balance_formula(c: f64, n: usize, phi_frob: f64) -> f64 {
    let nf = n as f64;
    c * c / (256.0 * nf * nf * nf * libm::pow(phi_frob, 2.0 * (nf - 1.0) / nf))
}

/// Largest certified step size:
/// `c^((4N-2)/N) / (6144 N^3 ||Phi||_F^((6N-4)/N))`.
pub fn eta_max_formula(c: f64, n: usize, phi_frob: f64) -> f64 {
    let nf = n as f64;
    libm::pow(c, (4.0 * nf - 2.0) / nf)
        / (6144.0 * nf * nf * nf * libm::pow(phi_frob, (6.0 * nf - 4.0) / nf))
}

/// Iterations sufficient to bring the loss from `loss0` to `eps` at step
/// size `eta`: `ceil( ln(loss0/eps) / (eta · c^(2(N-1)/N)) )`, clamped at
/// zero when the threshold is already met.
pub fn iteration_bound_formula(eta: f64, c: f64, n: usize, loss0: f64, eps: f64) -> usize {
    if loss0 <= eps {
        return 0;
    }
    let nf = n as f64;
    let rate = eta * libm::pow(c, 2.0 * (nf - 1.0) / nf);
    let t = libm::ceil(libm::log(loss0 / eps) / rate);
    if t <= 0.0 {
        0
    } else {
        t as usize
    }
}

/// Per-layer spectral-norm cap maintained along certified trajectories:
/// `(4 ||Phi||_F)^(1/N)`.
pub fn layer_norm_cap(phi_frob: f64, n: usize) -> f64 {
    libm::pow(4.0 * phi_frob, 1.0 / n as f64)
}

// ===== margin-based rate certificate ======================================

/// Everything the margin-based guarantee says about one initialization.
///
/// Under joint rescaling `(W, Phi) -> (alpha W, alpha Phi)` with
/// `alpha > 0`, the quantities transform covariantly: `margin` and
/// `phi_frob` scale by `alpha`, `loss0` by `alpha^2`, `required_balance`
/// by `alpha^(2/N)`, and `eta_max` by `alpha^(-2(N-1)/N)`; the iteration
/// bound is invariant when `eps` is also rescaled by `alpha^2`.
#[derive(Debug, Clone)]
pub struct RateCertificate {
    /// Network depth `N`.
    pub depth: usize,
    /// `||Phi||_F`.
    pub phi_frob: f64,
    /// Deficiency margin `c` of the initial end-to-end matrix. May be
    /// nonpositive, in which case the guarantee does not apply.
    pub margin: f64,
    /// Initial loss.
    pub loss0: f64,
    /// Measured balancedness gap of the initial stack.
    pub balance0: f64,
    /// Convergence threshold the iteration bound refers to.
    pub eps: f64,
    /// Balancedness the guarantee requires (`None` when `margin <= 0`).
    pub required_balance: Option<f64>,
    /// Largest certified step size (`None` when `margin <= 0`).
    pub eta_max: Option<f64>,
    /// Iterations to reach `eps` at `eta_max` (`None` when not certified).
    pub t_bound: Option<usize>,
    /// `margin > 0`.
    pub margin_positive: bool,
    /// `balance0 <= required_balance`.
    pub balanced_enough: bool,
    /// Every hidden dimension at least `min(d_0, d_N)`.
    pub hidden_dims_ok: bool,
}

impl RateCertificate {
    /// True when every precondition of the guarantee holds, so training
    /// at any `eta <= eta_max` is certified to converge.
    pub fn satisfied(&self) -> bool {
        self.margin_positive && self.balanced_enough && self.hidden_dims_ok
    }

    /// Iteration bound at an arbitrary step size and threshold.
    pub fn iterations_for(&self, eta: f64, eps: f64) -> Option<usize> {
        if self.margin <= 0.0 || eta <= 0.0 {
            return None;
        }
        Some(iteration_bound_formula(eta, self.margin, self.depth, self.loss0, eps))
    }

    /// Per-iteration envelope factor `1 - eta * c^(2(N-1)/N)`: along a
    /// certified run, `loss(t) <= loss(0) * factor^t`.
    pub fn rate_factor(&self, eta: f64) -> Option<f64> {
        if self.margin <= 0.0 {
            return None;
        }
        let nf = self.depth as f64;
        Some(1.0 - eta * libm::pow(self.margin, 2.0 * (nf - 1.0) / nf))
    }
}

/// Builds the margin-based rate certificate for an initialization.
pub fn margin_rate_certificate(
    w0: &WeightStack,
    problem: &Problem,
    eps: f64,
) -> Result<RateCertificate> {
    problem.check_compatible(w0.spec())?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::contract(format!("eps must be finite and positive, got {eps}")));
    }
    let depth = w0.depth();
    let phi_frob = problem.phi.frob_norm();
    let e2e = w0.end_to_end();
    let margin = deficiency_margin(&e2e, &problem.phi)?;
    let dist = e2e.frob_dist(&problem.phi);
    let loss0 = 0.5 * dist * dist;
    let balance0 = balancedness_delta(w0);

    let (required_balance, eta_max, t_bound) = if margin > 0.0 {
        let rb = required_balance_formula(margin, depth, phi_frob);
        let em = eta_max_formula(margin, depth, phi_frob);
        let tb = iteration_bound_formula(em, margin, depth, loss0, eps);
        (Some(rb), Some(em), Some(tb))
    } else {
        (None, None, None)
    };

    Ok(RateCertificate {
        depth,
        phi_frob,
        margin,
        loss0,
        balance0,
        eps,
        required_balance,
        eta_max,
        t_bound,
        margin_positive: margin > 0.0,
        balanced_enough: match required_balance {
            Some(rb) => balance0 <= rb,
            None => false,
        },
        hidden_dims_ok: w0.spec().full_rank_capable(),
    })
}

// ===== scalar-output certificate under balanced random init ==============

/// Constants for the constant-probability scalar-output guarantee.
///
/// The defaults `(d0_min, a, prob) = (100, 100, 0.25)` satisfy the
/// governing inequality
/// `(1 - 2 exp(-d0_min/16)) * (3 - 4 F(2 / sqrt(a/2))) >= 2 prob`
/// (with `F` the standard normal CDF), so the certificate holds with
/// probability at least 1/4 over the initialization draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarInitConfig {
    /// Minimum input dimension the guarantee needs.
    pub d0_min: usize,
    /// Controls how small the sampling deviation must be relative to the
    /// target: `s <= ||Phi||_2 / sqrt(a * d_0^2)`.
    pub a: f64,
    /// Success probability the constants certify.
    pub prob: f64,
}

impl Default for ScalarInitConfig {
    fn default() -> Self {
        ScalarInitConfig { d0_min: 100, a: 100.0, prob: 0.25 }
    }
}

/// Certificate for scalar-output networks under balanced initialization
/// with Gaussian end-to-end perturbations of deviation `s`.
#[derive(Debug, Clone)]
pub struct BalancedInitCertificate {
    /// Network depth `N`.
    pub depth: usize,
    /// Input dimension `d_0`.
    pub d0: usize,
    /// Spectral norm of the (row-vector) target.
    pub phi_spectral: f64,
    /// Sampling standard deviation `s`.
    pub std: f64,
    /// Largest `s` the constants allow: `||Phi||_2 / sqrt(a d_0^2)`.
    pub std_max: f64,
    /// Deficiency margin the successful draws achieve:
    /// `s^2 d_0 / (2 ||Phi||_2)`.
    pub margin_floor: f64,
    /// Convergence threshold the iteration bound refers to.
    pub eps: f64,
    /// Largest certified step size.
    pub eta_max: f64,
    /// Iterations to reach `eps` at `eta_max`.
    pub t_bound: usize,
    /// Probability (over the draw) with which the guarantee holds.
    pub prob: f64,
    /// `d_0` is large enough for the constants.
    pub d0_ok: bool,
    /// `s` is within the allowed range.
    pub std_ok: bool,
}

impl BalancedInitCertificate {
    /// True when both sampling preconditions hold.
    pub fn satisfied(&self) -> bool {
        self.d0_ok && self.std_ok
    }

    /// Iteration bound at an arbitrary step size.
    pub fn iterations_for(&self, eta: f64, eps: f64) -> Option<usize> {
        if eta <= 0.0 {
            return None;
        }
        Some(scalar_iteration_bound_formula(
            eta,
            self.std,
            self.d0,
            self.depth,
            self.phi_spectral,
            eps,
        ))
    }
}

/// Largest certified step size for the scalar-output guarantee:
/// `(s^2 d_0)^(4-2/N) / (1e5 N^3 ||Phi||_2^(10-6/N))`.
pub fn scalar_eta_max_formula(s: f64, d0: usize, n: usize, phi_spectral: f64) -> f64 {
    let nf = n as f64;
    libm::pow(s * s * d0 as f64, 4.0 - 2.0 / nf)
        / (1e5 * nf * nf * nf * libm::pow(phi_spectral, 10.0 - 6.0 / nf))
}

/// Iteration bound for the scalar-output guarantee:
/// `ceil( (4/eta) * ( ln(4) (||Phi||_2/(s^2 d_0))^(2-2/N)
///                    + ||Phi||_2^(2/N-2) ln(||Phi||_2^2/(8 eps)) ) )`.
/// The second summand is clamped at zero for thresholds the first phase
/// already meets.
pub fn scalar_iteration_bound_formula(
    eta: f64,
    s: f64,
    d0: usize,
    n: usize,
    phi_spectral: f64,
    eps: f64,
) -> usize {
    let nf = n as f64;
    let exponent = 2.0 - 2.0 / nf;
    let saddle_phase = libm::log(4.0) * libm::pow(phi_spectral / (s * s * d0 as f64), exponent);
    let ln_term = libm::log(phi_spectral * phi_spectral / (8.0 * eps));
    let converge_phase =
        libm::pow(phi_spectral, -exponent) * if ln_term > 0.0 { ln_term } else { 0.0 };
    let t = libm::ceil(4.0 / eta * (saddle_phase + converge_phase));
    if t <= 0.0 {
        0
    } else {
        t as usize
    }
}

/// Builds the scalar-output certificate. The network must have output
/// dimension 1.
pub fn balanced_init_certificate(
    spec: &NetSpec,
    phi: &Matrix,
    s: f64,
    eps: f64,
    config: &ScalarInitConfig,
) -> Result<BalancedInitCertificate> {
    if spec.d_out() != 1 {
        return Err(Error::contract(format!(
            "scalar-output certificate requires d_N = 1, got {}",
            spec.d_out()
        )));
    }
    if phi.shape() != (1, spec.d_in()) {
        return Err(Error::contract("target shape does not match the network"));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::contract(format!("standard deviation must be positive, got {s}")));
    }
    let d0 = spec.d_in();
    let n = spec.depth();
    // For a single-row target the spectral norm is the Euclidean norm.
    let phi_spectral = decomp::spectral_norm(phi)?;
    let std_max = phi_spectral / libm::sqrt(config.a * (d0 * d0) as f64);
    let eta_max = scalar_eta_max_formula(s, d0, n, phi_spectral);
    let t_bound = scalar_iteration_bound_formula(eta_max, s, d0, n, phi_spectral, eps);
    Ok(BalancedInitCertificate {
        depth: n,
        d0,
        phi_spectral,
        std: s,
        std_max,
        margin_floor: s * s * d0 as f64 / (2.0 * phi_spectral),
        eps,
        eta_max,
        t_bound,
        prob: config.prob,
        d0_ok: d0 >= config.d0_min,
        std_ok: s <= std_max,
    })
}

// ===== trajectory verification ============================================

/// Outcome of one per-step inequality check over a trajectory.
#[derive(Debug, Clone)]
pub struct CheckReport {
    /// Stable name used in reports and file formats.
    pub name: &'static str,
    /// Number of iterations the check examined.
    pub checked: usize,
    /// Iterations on which the inequality failed beyond tolerance.
    pub violations: usize,
    /// Largest observed `lhs - rhs` before tolerance (negative values
    /// mean the inequality held with room to spare).
    pub worst_residual: f64,
    /// Iteration of the worst residual.
    pub worst_t: Option<usize>,
    /// `violations == 0`.
    pub pass: bool,
}

impl CheckReport {
    fn empty(name: &'static str) -> Self {
        CheckReport {
            name,
            checked: 0,
            violations: 0,
            worst_residual: f64::NEG_INFINITY,
            worst_t: None,
            pass: true,
        }
    }

    fn observe(&mut self, t: usize, residual: f64, tol: f64) {
        self.checked += 1;
        if residual > self.worst_residual {
            self.worst_residual = residual;
            self.worst_t = Some(t);
        }
        if residual > tol {
            self.violations += 1;
            self.pass = false;
        }
    }
}

/// Verdict of [`verify_trajectory`]: the five per-step checks, plus
/// whether the guarantee's preconditions applied to the run at all.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Per-step descent: `loss(t+1) <= loss(t) - eta * sigma_min(t)^(2(N-1)/N) * loss(t)`
    /// (the gradient-norm identity `||dL/dW||_F^2 = 2 loss` folded in).
    pub descent: CheckReport,
    /// Geometric envelope `loss(t) <= loss(0) * (1 - eta c^(2(N-1)/N))^t`.
    pub envelope: CheckReport,
    /// Balancedness stays within twice the required initialization level.
    pub balance: CheckReport,
    /// Per-layer spectral norms stay at or below `(4||Phi||_F)^(1/N)`.
    pub layer_norms: CheckReport,
    /// Margin never drops below its initial value `c`.
    pub margin: CheckReport,
    /// Whether the certificate's preconditions held and the run's step
    /// size was within `eta_max` — only then do failed checks refute the
    /// guarantee.
    pub applicable: bool,
    /// True when every evaluated check passed.
    pub pass: bool,
}

/// Absolute + relative tolerance used by all trajectory checks.
fn check_tol(scale: f64) -> f64 {
    1e-12 + 1e-9 * scale.abs()
}

/// Replays a recorded trajectory against the inequalities behind the
/// margin-based guarantee.
///
/// The trace must carry every monitor at stride 1 (see
/// [`crate::network::MonitorConfig::all`]); anything less is a contract
/// violation, since the checks are per-iteration statements.
pub fn verify_trajectory(
    trace: &TrainTrace,
    problem: &Problem,
    cert: &RateCertificate,
) -> Result<VerifyReport> {
    let m = &trace.config.monitors;
    if m.stride != 1 || !(m.balance && m.sigma_min && m.margin && m.layer_norms) {
        return Err(Error::contract(
            "trajectory verification needs every monitor recorded at stride 1",
        ));
    }
    // The margin/envelope bounds below are only meaningful when the
    // certificate was issued for this problem.
    if (problem.phi.frob_norm() - cert.phi_frob).abs() > 1e-12 * (1.0 + cert.phi_frob) {
        return Err(Error::contract(
            "certificate does not match the problem's target",
        ));
    }
    if trace.records.len() != trace.losses.len() {
        return Err(Error::contract(
            "trace monitors do not cover every recorded iteration",
        ));
    }

    let eta = trace.config.eta;
    let n = cert.depth as f64;
    let sigma_exp = 2.0 * (n - 1.0) / n;
    let layer_cap = layer_norm_cap(cert.phi_frob, cert.depth);

    let mut descent = CheckReport::empty("descent");
    let mut envelope = CheckReport::empty("envelope");
    let mut balance = CheckReport::empty("balance");
    let mut layer_norms = CheckReport::empty("layer-norms");
    let mut margin = CheckReport::empty("margin");

    // Iterations at which the run was still finite: the divergence guard
    // records the offending loss and stops, so only the final record can
    // be non-finite.
    for (t, record) in trace.records.iter().enumerate() {
        if !record.loss.is_finite() {
            continue;
        }
        // Descent step t -> t+1.
        if t + 1 < trace.losses.len() && trace.losses[t + 1].is_finite() {
            let sig = record
                .sigma_min
                .expect("sigma_min monitor checked above");
            let lhs = trace.losses[t + 1];
            let rhs = record.loss - eta * libm::pow(sig, sigma_exp) * record.loss;
            descent.observe(t, lhs - rhs, check_tol(record.loss));
        }
        if let Some(factor) = cert.rate_factor(eta) {
            let env = cert.loss0 * libm::pow(factor, t as f64);
            envelope.observe(t, record.loss - env, check_tol(env));
        }
        if let Some(required) = cert.required_balance {
            let b = record.balance.expect("balance monitor checked above");
            balance.observe(t, b - 2.0 * required, check_tol(2.0 * required));
        }
        let l = record
            .layer_sigma_max
            .expect("layer-norm monitor checked above");
        layer_norms.observe(t, l - layer_cap, check_tol(layer_cap));
        if cert.margin > 0.0 {
            let mg = record.margin.expect("margin monitor checked above");
            margin.observe(t, cert.margin - mg, check_tol(cert.margin));
        }
    }

    let applicable = cert.satisfied() && cert.eta_max.map_or(false, |em| eta <= em);
    let pass = descent.pass && envelope.pass && balance.pass && layer_norms.pass && margin.pass;
    Ok(VerifyReport {
        descent,
        envelope,
        balance,
        layer_norms,
        margin,
        applicable,
        pass,
    })
}

// ===== balancedness consequences (diagnostic checks) =====================

/// Observed gap and proven bound for one prefix/suffix product;
/// see [`gram_power_gaps`].
#[derive(Debug, Clone)]
pub struct GramPowerGap {
    /// Product length `j` (prefix `W_j…W_1`, suffix `W_N…W_(N-j+1)`).
    pub j: usize,
    /// `|| (W_1:j)^T W_1:j - (W_1^T W_1)^j ||_F`.
    pub prefix_gap: f64,
    /// `1.5 * nu * M^(2(j-1)) * j^2` for the prefix gap.
    pub prefix_bound: f64,
    /// `|| W_j:N (W_j:N)^T - (W_N W_N^T)^(N-j+1) ||_F` at matching length.
    pub suffix_gap: f64,
    /// `1.5 * nu * M^(2(j-1)) * j^2` for the suffix gap.
    pub suffix_bound: f64,
}

/// Quantifies how far partial products of an approximately balanced
/// stack are from powers of the edge Grams.
///
/// With `nu` the measured balancedness gap and `M` the largest layer
/// spectral norm, both deviations are provably at most
/// `1.5 * nu * M^(2(j-1)) * j^2` for products of `j` layers, provided
/// `d_0 <= d_1` and `d_N <= d_(N-1)`; that precondition is the caller's
/// to meet (it is not rechecked here because the gaps themselves are
/// well-defined either way).
pub fn gram_power_gaps(w: &WeightStack) -> Result<Vec<GramPowerGap>> {
    let n = w.depth();
    let nu = balancedness_delta(w);
    let mut m = 0.0f64;
    for j in 1..=n {
        let s = decomp::spectral_norm(w.layer(j))?;
        if s > m {
            m = s;
        }
    }

    let first_gram = w.layer(1).gram(); // W_1^T W_1
    let last_gram = w.layer(n).outer_gram(); // W_N W_N^T

    let mut gaps = Vec::with_capacity(n);
    let mut prefix = Matrix::identity(w.spec().d_in());
    let mut suffix = Matrix::identity(w.spec().d_out());
    let mut first_pow = Matrix::identity(first_gram.rows());
    let mut last_pow = Matrix::identity(last_gram.rows());
    for j in 1..=n {
        prefix = w.layer(j).matmul(&prefix); // W_j … W_1
        suffix = suffix.matmul(w.layer(n + 1 - j)); // W_N … W_(N-j+1)
        first_pow = first_pow.matmul(&first_gram);
        last_pow = last_pow.matmul(&last_gram);
        let bound = 1.5 * nu * libm::pow(m, 2.0 * (j as f64 - 1.0)) * (j * j) as f64;
        gaps.push(GramPowerGap {
            j,
            prefix_gap: prefix.gram().frob_dist(&first_pow),
            prefix_bound: bound,
            suffix_gap: suffix.outer_gram().frob_dist(&last_pow),
            suffix_bound: bound,
        });
    }
    Ok(gaps)
}

/// Result of the approximate-balancedness layer-norm check; see
/// [`layer_norm_check`].
#[derive(Debug, Clone)]
pub struct LayerNormCheck {
    /// Whether the hypothesis `0 < nu <= C^(2/N) / (30 N^2)` held, with
    /// `C` the end-to-end spectral norm.
    pub applicable: bool,
    /// Largest per-layer spectral norm.
    pub max_layer_norm: f64,
    /// Proven cap `C^(1/N) * 2^(1/(2N))` (meaningful when applicable).
    pub bound: f64,
}

/// Checks that approximate balancedness turns an end-to-end spectral
/// bound into a per-layer one: if the stack's balancedness gap `nu`
/// satisfies `nu <= C^(2/N) / (30 N^2)` for `C = ||W_N…W_1||_sigma`,
/// then every layer obeys `||W_j||_sigma <= C^(1/N) * 2^(1/(2N))`.
pub fn layer_norm_check(w: &WeightStack) -> Result<LayerNormCheck> {
    let n = w.depth();
    let nf = n as f64;
    let c = decomp::spectral_norm(&w.end_to_end())?;
    let nu = balancedness_delta(w);
    let applicable = c > 0.0 && nu <= libm::pow(c, 2.0 / nf) / (30.0 * nf * nf);
    let mut max_layer_norm = 0.0f64;
    for j in 1..=n {
        let s = decomp::spectral_norm(w.layer(j))?;
        if s > max_layer_norm {
            max_layer_norm = s;
        }
    }
    let bound = libm::pow(c, 1.0 / nf) * libm::pow(2.0, 1.0 / (2.0 * nf));
    Ok(LayerNormCheck { applicable, max_layer_norm, bound })
}
