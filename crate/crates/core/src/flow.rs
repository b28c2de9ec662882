//! Continuous-time limit of gradient descent on balanced stacks.
//!
//! When a stack is exactly balanced, the individual layers disappear
//! from the dynamics: under gradient flow the end-to-end matrix `W`
//! evolves autonomously by
//!
//! ```text
//! dW/dtau = - sum_{j=1..N} (W W^T)^((N-j)/N) * (W - Phi) * (W^T W)^((j-1)/N)
//! ```
//!
//! with fractional matrix powers in the PSD sense. Depth therefore acts
//! as a preconditioner on the product, not as extra state. The module
//! provides the right-hand side ([`flow_rhs`]), a fixed-step integrator
//! ([`integrate_flow`], Euler or classical Runge–Kutta), and a
//! discretization check ([`compare_flow_gd`]) that runs gradient descent
//! and the flow side by side from the same balanced initialization and
//! reports how far the discrete iterates drift from the continuous path
//! — the drift must shrink linearly with the step size.

use alloc::format;
use alloc::vec::Vec;

use crate::decomp;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{self, Problem, WeightStack};
use crate::theory;

/// Right-hand side of the end-to-end flow for a depth-`n` network.
///
/// For `n = 1` this is plain gradient flow `Phi - W`; deeper networks
/// add the PSD-power preconditioners on both sides of the residual.
/// The zero matrix is a fixed point for every `n >= 2`.
pub fn flow_rhs(w: &Matrix, phi: &Matrix, n: usize) -> Result<Matrix> {
    if w.shape() != phi.shape() {
        return Err(Error::contract(format!(
            "flow: state is {}x{} but target is {}x{}",
            w.rows(),
            w.cols(),
            phi.rows(),
            phi.cols()
        )));
    }
    if n == 0 {
        return Err(Error::contract("flow: depth must be at least 1"));
    }
    let e = w.sub(phi);
    if n == 1 {
        return Ok(e.scale(-1.0));
    }

    let nf = n as f64;
    let left_exps: Vec<f64> = (1..=n).map(|j| (nf - j as f64) / nf).collect();
    let right_exps: Vec<f64> = (1..=n).map(|j| (j as f64 - 1.0) / nf).collect();
    let left = decomp::psd_powers(&w.matmul(&w.transpose()), &left_exps)?;
    let right = decomp::psd_powers(&w.transpose().matmul(w), &right_exps)?;

    let mut rhs = Matrix::zeros(w.rows(), w.cols());
    for j in 0..n {
        rhs = rhs.sub(&left[j].matmul(&e).matmul(&right[j]));
    }
    Ok(rhs)
}

/// Time-stepping scheme for [`integrate_flow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    /// Forward Euler: first-order, cheapest per step.
    Euler,
    /// Classical fourth-order Runge–Kutta.
    Rk4,
}

/// Integrator configuration: scheme, step size, and sampling stride.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Time-stepping scheme.
    pub method: FlowMethod,
    /// Step size in flow time `tau`.
    pub h: f64,
    /// Record a sample every this many steps (the initial state and the
    /// final state are always recorded). Zero is treated as 1.
    pub record_stride: usize,
}

impl FlowConfig {
    /// Fourth-order integration at step `h`, sampling every step.
    pub fn rk4(h: f64) -> Self {
        FlowConfig { method: FlowMethod::Rk4, h, record_stride: 1 }
    }

    /// Forward-Euler integration at step `h`, sampling every step.
    pub fn euler(h: f64) -> Self {
        FlowConfig { method: FlowMethod::Euler, h, record_stride: 1 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::contract(format!(
                "flow: step size must be finite and positive, got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// One recorded point along an integrated flow.
#[derive(Debug, Clone, Copy)]
pub struct FlowSample {
    /// Flow time.
    pub tau: f64,
    /// `0.5 * ||W(tau) - Phi||_F^2`.
    pub loss: f64,
    /// Smallest singular value of `W(tau)`.
    pub sigma_min: f64,
}

/// Result of [`integrate_flow`]: sampled diagnostics and the final state.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    /// Samples at stride boundaries, always including `tau = 0` and the
    /// final time.
    pub samples: Vec<FlowSample>,
    /// State after the last step.
    pub final_w: Matrix,
}

fn flow_loss(w: &Matrix, phi: &Matrix) -> f64 {
    let d = w.frob_dist(phi);
    0.5 * d * d
}

fn advance(w: &Matrix, phi: &Matrix, n: usize, config: &FlowConfig) -> Result<Matrix> {
    let h = config.h;
    match config.method {
        FlowMethod::Euler => {
            let k1 = flow_rhs(w, phi, n)?;
            Ok(w.add(&k1.scale(h)))
        }
        FlowMethod::Rk4 => {
            let k1 = flow_rhs(w, phi, n)?;
            let k2 = flow_rhs(&w.add(&k1.scale(h / 2.0)), phi, n)?;
            let k3 = flow_rhs(&w.add(&k2.scale(h / 2.0)), phi, n)?;
            let k4 = flow_rhs(&w.add(&k3.scale(h)), phi, n)?;
            let increment = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4).scale(h / 6.0);
            Ok(w.add(&increment))
        }
    }
}

/// Integrates the end-to-end flow for `steps` steps of size `config.h`
/// from `w0`, for a depth-`n` network with target `phi`.
///
/// Fails with a numerical error if the state stops being finite (a
/// too-large step size on a stiff instance).
pub fn integrate_flow(
    w0: &Matrix,
    phi: &Matrix,
    n: usize,
    steps: usize,
    config: &FlowConfig,
) -> Result<FlowTrace> {
    config.validate()?;
    let stride = config.record_stride.max(1);
    let mut w = w0.clone();
    let mut samples = Vec::new();
    for step in 0..=steps {
        if step % stride == 0 || step == steps {
            samples.push(FlowSample {
                tau: step as f64 * config.h,
                loss: flow_loss(&w, phi),
                sigma_min: decomp::sigma_min(&w)?,
            });
        }
        if step == steps {
            break;
        }
        w = advance(&w, phi, n, config)?;
        if !w.all_finite() {
            return Err(Error::numerical(format!(
                "flow integration left the finite range at tau = {:e}",
                (step + 1) as f64 * config.h
            )));
        }
    }
    Ok(FlowTrace { samples, final_w: w })
}

/// One aligned comparison point: gradient descent after `t` steps vs
/// the flow at `tau = t * eta`.
#[derive(Debug, Clone, Copy)]
pub struct FlowGdRow {
    /// Gradient-descent iteration.
    pub t: usize,
    /// Matching flow time `t * eta`.
    pub tau: f64,
    /// Loss of the discrete iterate.
    pub gd_loss: f64,
    /// Loss of the continuous state.
    pub flow_loss: f64,
    /// Smallest singular value of the continuous state.
    pub flow_sigma_min: f64,
    /// `||W_gd(t) - W_flow(t*eta)||_F / max(1, ||Phi||_F)`.
    pub deviation: f64,
}

/// Result of [`compare_flow_gd`].
#[derive(Debug, Clone)]
pub struct DeviationReport {
    /// Per-iteration comparison, `steps + 1` rows starting at `t = 0`.
    pub rows: Vec<FlowGdRow>,
    /// Largest deviation over all rows.
    pub max_deviation: f64,
    /// Flow substeps taken per gradient-descent step.
    pub substeps: usize,
}

/// Runs gradient descent on the stack and the end-to-end flow side by
/// side from the same (balanced) initialization, aligning `t` gradient
/// steps with flow time `t * eta`.
///
/// The initialization must be balanced to within `1e-8` — otherwise the
/// product does not follow the autonomous end-to-end dynamics and the
/// comparison would be meaningless. The integrator substep is chosen as
/// `eta / ceil(eta / config.h)` so the alignment is exact.
pub fn compare_flow_gd(
    w0: &WeightStack,
    problem: &Problem,
    eta: f64,
    steps: usize,
    config: &FlowConfig,
) -> Result<DeviationReport> {
    config.validate()?;
    problem.check_compatible(w0.spec())?;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::contract(format!(
            "flow comparison: step size must be finite and positive, got {eta}"
        )));
    }
    let balance = theory::balancedness_delta(w0);
    if balance > 1e-8 {
        return Err(Error::contract(format!(
            "flow comparison requires a balanced start (gap {balance:e} > 1e-8)"
        )));
    }

    let n = w0.depth();
    let phi = &problem.phi;
    let substeps = libm::ceil(eta / config.h).max(1.0) as usize;
    let sub = FlowConfig { h: eta / substeps as f64, ..config.clone() };
    let scale = if phi.frob_norm() > 1.0 { phi.frob_norm() } else { 1.0 };

    let mut stack = w0.clone();
    let mut w_flow = w0.end_to_end();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut max_deviation = 0.0f64;
    for t in 0..=steps {
        let w_gd = stack.end_to_end();
        let deviation = w_gd.frob_dist(&w_flow) / scale;
        if deviation > max_deviation {
            max_deviation = deviation;
        }
        rows.push(FlowGdRow {
            t,
            tau: t as f64 * eta,
            gd_loss: network::loss(&stack, problem),
            flow_loss: flow_loss(&w_flow, phi),
            flow_sigma_min: decomp::sigma_min(&w_flow)?,
            deviation,
        });
        if t == steps {
            break;
        }
        stack = network::gd_step(&stack, problem, eta);
        for _ in 0..substeps {
            w_flow = advance(&w_flow, phi, n, &sub)?;
        }
        if !(stack.all_finite() && w_flow.all_finite()) {
            return Err(Error::numerical(format!(
                "flow comparison left the finite range after step {}",
                t + 1
            )));
        }
    }
    Ok(DeviationReport { rows, max_deviation, substeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init;
    use crate::network::NetSpec;
    use crate::rng::Rng;
    use alloc::vec;

    #[test]
    fn depth_one_flow_is_plain_gradient_flow() {
        let w = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let phi = Matrix::identity(2);
        let rhs = flow_rhs(&w, &phi, 1).unwrap();
        assert!(rhs.frob_dist(&phi.sub(&w)) < 1e-15);
    }

    #[test]
    fn zero_state_is_a_fixed_point_for_deep_networks() {
        let phi = Matrix::new(2, 3, vec![1.0, 0.0, 2.0, 0.0, -1.0, 0.5]).unwrap();
        for n in 2..=4 {
            let rhs = flow_rhs(&Matrix::zeros(2, 3), &phi, n).unwrap();
            assert!(rhs.frob_norm() < 1e-12, "depth {n}: rhs should vanish at zero");
        }
        // Depth 1 does not stall at zero.
        let rhs = flow_rhs(&Matrix::zeros(2, 3), &phi, 1).unwrap();
        assert!((rhs.frob_dist(&phi)) < 1e-15);
    }

    #[test]
    fn flow_rhs_matches_scalar_closed_form() {
        // Scalars: rhs = -N * w^(2(N-1)/N) * (w - phi) for w > 0.
        let w = Matrix::new(1, 1, vec![0.7]).unwrap();
        let phi = Matrix::new(1, 1, vec![1.3]).unwrap();
        for n in 1..=5 {
            let rhs = flow_rhs(&w, &phi, n).unwrap().get(0, 0);
            let expected =
                -(n as f64) * libm::pow(0.7, 2.0 * (n as f64 - 1.0) / n as f64) * (0.7 - 1.3);
            assert!((rhs - expected).abs() < 1e-12, "depth {n}: {rhs} vs {expected}");
        }
    }

    #[test]
    fn dissipation_dominates_the_sigma_min_rate() {
        // -<W - Phi, rhs> >= sigma_min(W)^(2(N-1)/N) * ||W - Phi||_F^2,
        // for both wide and tall orientations.
        let mut rng = Rng::from_seed(314);
        for trial in 0..60 {
            let rows = 1 + (rng.next_u64() % 4) as usize;
            let cols = 1 + (rng.next_u64() % 4) as usize;
            let n = 1 + (rng.next_u64() % 4) as usize;
            let w = Matrix::from_fn(rows, cols, |_, _| rng.next_normal());
            let phi = Matrix::from_fn(rows, cols, |_, _| rng.next_normal());
            let e = w.sub(&phi);
            let rhs = flow_rhs(&w, &phi, n).unwrap();
            let dissipation = -e.frob_inner(&rhs);
            let sig = decomp::sigma_min(&w).unwrap();
            let rate = libm::pow(sig, 2.0 * (n as f64 - 1.0) / n as f64);
            let bound = rate * e.frob_norm() * e.frob_norm();
            assert!(
                dissipation >= bound - 1e-9 * (1.0 + bound),
                "trial {trial} ({rows}x{cols}, depth {n}): {dissipation} < {bound}"
            );
        }
    }

    #[test]
    fn flow_rhs_is_orthogonally_equivariant() {
        let mut rng = Rng::from_seed(2025);
        for _ in 0..20 {
            let rows = 2 + (rng.next_u64() % 3) as usize;
            let cols = 2 + (rng.next_u64() % 3) as usize;
            let n = 2 + (rng.next_u64() % 3) as usize;
            // Fractional powers are only Hölder continuous at singular
            // states, so keep the instances safely full-rank: there the
            // symmetry must hold to near machine precision.
            let w = loop {
                let cand = Matrix::from_fn(rows, cols, |_, _| rng.next_normal());
                if decomp::sigma_min(&cand).unwrap() > 0.05 {
                    break cand;
                }
            };
            let phi = Matrix::from_fn(rows, cols, |_, _| rng.next_normal());
            // Orthogonal factors from the SVD of random square matrices.
            let q = decomp::svd_thin(&Matrix::from_fn(rows, rows, |_, _| rng.next_normal()))
                .unwrap()
                .u;
            let p = decomp::svd_thin(&Matrix::from_fn(cols, cols, |_, _| rng.next_normal()))
                .unwrap()
                .u;
            let lhs = flow_rhs(
                &q.transpose().matmul(&w).matmul(&p),
                &q.transpose().matmul(&phi).matmul(&p),
                n,
            )
            .unwrap();
            let rhs = q.transpose().matmul(&flow_rhs(&w, &phi, n).unwrap()).matmul(&p);
            assert!(lhs.frob_dist(&rhs) < 1e-9, "deviation {}", lhs.frob_dist(&rhs));
        }
    }

    #[test]
    fn rk4_reproduces_the_depth_one_exponential_decay() {
        // dW/dtau = Phi - W has solution Phi + e^(-tau) (W0 - Phi).
        let w0 = Matrix::new(2, 2, vec![2.0, -1.0, 0.5, 3.0]).unwrap();
        let phi = Matrix::identity(2);
        let steps = 1000;
        let trace = integrate_flow(&w0, &phi, 1, steps, &FlowConfig::rk4(1e-3)).unwrap();
        let decay = libm::exp(-1.0);
        let expected = phi.add(&w0.sub(&phi).scale(decay));
        assert!(
            trace.final_w.frob_dist(&expected) < 1e-10,
            "deviation {}",
            trace.final_w.frob_dist(&expected)
        );
        assert_eq!(trace.samples.len(), steps + 1);
        assert_eq!(trace.samples[0].tau, 0.0);
    }

    #[test]
    fn flow_loss_is_nonincreasing() {
        let mut rng = Rng::from_seed(55);
        let w0 = Matrix::from_fn(3, 3, |_, _| 0.3 * rng.next_normal());
        let phi = Matrix::from_fn(3, 3, |_, _| rng.next_normal());
        let trace = integrate_flow(&w0, &phi, 3, 400, &FlowConfig::rk4(5e-3)).unwrap();
        for pair in trace.samples.windows(2) {
            assert!(
                pair[1].loss <= pair[0].loss + 1e-12,
                "loss rose from {} to {} at tau {}",
                pair[0].loss,
                pair[1].loss,
                pair[1].tau
            );
        }
    }

    #[test]
    fn sampling_stride_keeps_endpoints() {
        let w0 = Matrix::identity(2);
        let phi = Matrix::identity(2).scale(2.0);
        let mut config = FlowConfig::rk4(1e-2);
        config.record_stride = 7;
        let trace = integrate_flow(&w0, &phi, 2, 20, &config).unwrap();
        let taus: Vec<f64> = trace.samples.iter().map(|s| s.tau).collect();
        assert_eq!(taus.len(), 4, "samples at 0, 7, 14, 20: {taus:?}");
        assert!((taus[3] - 0.2).abs() < 1e-12, "final time sampled: {taus:?}");
    }

    #[test]
    fn gd_tracks_the_flow_and_the_gap_shrinks_linearly_in_eta() {
        let mut rng = Rng::from_seed(77);
        let d = 3;
        let spec = NetSpec::uniform(3, d).unwrap();
        let a = Matrix::from_fn(d, d, |_, _| 0.5 * rng.next_normal());
        let w0 = init::balanced_init(&spec, &a).unwrap();
        let phi = Matrix::from_fn(d, d, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) + 0.3 * rng.next_normal()
        });
        let problem = Problem::from_target(phi);

        let eta = 2e-3;
        let config = FlowConfig::rk4(eta / 4.0);
        let coarse = compare_flow_gd(&w0, &problem, eta, 200, &config).unwrap();
        let fine = compare_flow_gd(&w0, &problem, eta / 2.0, 400, &config).unwrap();
        assert!(coarse.rows[0].deviation < 1e-14, "paths start together");
        assert!(coarse.max_deviation < 0.05, "GD strays: {}", coarse.max_deviation);
        let ratio = coarse.max_deviation / fine.max_deviation;
        assert!(
            (1.5..=2.6).contains(&ratio),
            "first-order error should halve with eta: ratio {ratio}"
        );
    }

    #[test]
    fn comparison_rejects_unbalanced_starts() {
        let spec = NetSpec::uniform(2, 2).unwrap();
        let layers = vec![Matrix::identity(2).scale(2.0), Matrix::identity(2).scale(0.5)];
        let w0 = WeightStack::new(spec, layers).unwrap();
        let problem = Problem::from_target(Matrix::identity(2));
        let err = compare_flow_gd(&w0, &problem, 1e-3, 10, &FlowConfig::rk4(1e-3)).unwrap_err();
        assert!(err.is_contract());
    }
}
