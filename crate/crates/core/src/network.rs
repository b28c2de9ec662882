//! Deep linear networks: model types, loss, gradients, and training.
//!
//! A depth-`N` linear network with dimensions `d_0, …, d_N` is the map
//! `x -> W_N · W_(N-1) · … · W_1 · x`, where layer `j` is a `d_j x d_(j-1)`
//! matrix. Training minimizes the whitened quadratic objective
//!
//! ```text
//! loss(W_1, …, W_N) = 1/2 · || W_N·…·W_1 - Phi ||_F^2
//! ```
//!
//! for a target matrix `Phi` — the form any linear least-squares problem
//! takes after input whitening (see [`crate::data`]). Gradient descent
//! updates all layers simultaneously from the same iterate:
//! `W_j <- W_j - eta * dloss/dW_j`.
//!
//! [`train`] runs plain gradient descent (no momentum, no step-size
//! schedule) and records the loss at every iteration, optional geometry
//! monitors at a configurable stride, and a terminal status: converged
//! below the loss threshold, stopped at the iteration cap, or halted by
//! the divergence guard.

use alloc::format;
use alloc::vec::Vec;

use crate::decomp;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Loss value above which a run is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Network shape: the dimension sequence `d_0, …, d_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetSpec {
    dims: Vec<usize>,
}

impl NetSpec {
    /// Builds a shape from `d_0, …, d_N`. Requires at least one layer
    /// (two entries) and strictly positive dimensions.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::contract(format!(
                "a network needs at least one layer: got {} dimension(s)",
                dims.len()
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::contract("dimensions must be strictly positive"));
        }
        Ok(NetSpec { dims })
    }

    /// Uniform shape: depth `n`, every dimension equal to `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        NetSpec::new(alloc::vec![d; n + 1])
    }

    /// The dimension sequence `d_0, …, d_N`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of layers `N`.
    pub fn depth(&self) -> usize {
        self.dims.len() - 1
    }

    /// Input dimension `d_0`.
    pub fn d_in(&self) -> usize {
        self.dims[0]
    }

    /// Output dimension `d_N`.
    pub fn d_out(&self) -> usize {
        *self.dims.last().expect("dims nonempty")
    }

    /// True when every hidden dimension is at least `min(d_0, d_N)`, so
    /// the end-to-end matrix can reach full rank. Informational only —
    /// nothing in this crate enforces it.
    pub fn full_rank_capable(&self) -> bool {
        let floor = self.d_in().min(self.d_out());
        self.dims[1..self.dims.len() - 1].iter().all(|&d| d >= floor)
    }

    /// Shape of layer `j` (1-indexed): `d_j x d_(j-1)`.
    pub fn layer_shape(&self, j: usize) -> (usize, usize) {
        assert!((1..=self.depth()).contains(&j), "layer index {j} out of range");
        (self.dims[j], self.dims[j - 1])
    }
}

/// The trainable parameters: one matrix per layer, `W_1, …, W_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStack {
    spec: NetSpec,
    layers: Vec<Matrix>,
}

impl WeightStack {
    /// Assembles a stack, checking each layer against the shape spec.
    pub fn new(spec: NetSpec, layers: Vec<Matrix>) -> Result<Self> {
        if layers.len() != spec.depth() {
            return Err(Error::contract(format!(
                "expected {} layers, got {}",
                spec.depth(),
                layers.len()
            )));
        }
        for (idx, layer) in layers.iter().enumerate() {
            let want = spec.layer_shape(idx + 1);
            if layer.shape() != want {
                return Err(Error::contract(format!(
                    "layer {} has shape {}x{}, expected {}x{}",
                    idx + 1,
                    layer.rows(),
                    layer.cols(),
                    want.0,
                    want.1
                )));
            }
        }
        Ok(WeightStack { spec, layers })
    }

    /// The shape spec this stack conforms to.
    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    /// Number of layers.
    pub fn depth(&self) -> usize {
        self.spec.depth()
    }

    /// Layer matrices `W_1, …, W_N` in application order.
    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    /// Layer `j`, 1-indexed to match the math.
    pub fn layer(&self, j: usize) -> &Matrix {
        assert!((1..=self.depth()).contains(&j), "layer index {j} out of range");
        &self.layers[j - 1]
    }

    /// End-to-end matrix `W_N · … · W_1` (`d_N x d_0`).
    pub fn end_to_end(&self) -> Matrix {
        let mut acc = self.layers[0].clone();
        for layer in &self.layers[1..] {
            acc = layer.matmul(&acc);
        }
        acc
    }

    /// True when every entry of every layer is finite.
    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(Matrix::all_finite)
    }
}

/// A training target: the matrix the end-to-end product should reach,
/// plus the additive constant that relates the whitened objective to the
/// original dataset loss (zero for purely synthetic targets).
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// Target matrix (`d_N x d_0`).
    pub phi: Matrix,
    /// `dataset loss = whitened loss + opt_const`.
    pub opt_const: f64,
}

impl Problem {
    /// Wraps a target matrix with no dataset constant.
    pub fn from_target(phi: Matrix) -> Self {
        Problem { phi, opt_const: 0.0 }
    }

    /// Checks that the target shape matches a network shape.
    pub fn check_compatible(&self, spec: &NetSpec) -> Result<()> {
        if self.phi.shape() != (spec.d_out(), spec.d_in()) {
            return Err(Error::contract(format!(
                "target is {}x{} but the network maps {} -> {}",
                self.phi.rows(),
                self.phi.cols(),
                spec.d_in(),
                spec.d_out()
            )));
        }
        Ok(())
    }
}

/// Whitened objective `1/2 · ||W_N·…·W_1 - Phi||_F^2`.
///
/// Shape compatibility is a programming contract here (checked with
/// `assert`); fallible validation for external input lives in
/// [`Problem::check_compatible`].
pub fn loss(w: &WeightStack, problem: &Problem) -> f64 {
    let e2e = w.end_to_end();
    assert_eq!(
        e2e.shape(),
        problem.phi.shape(),
        "loss: end-to-end shape does not match target"
    );
    let d = e2e.frob_dist(&problem.phi);
    0.5 * d * d
}

/// Gradient of [`loss`] with respect to every layer.
///
/// With `E = W_N·…·W_1 - Phi`, the gradient for layer `j` is
/// `(W_N·…·W_(j+1))^T · E · (W_(j-1)·…·W_1)^T`, where empty products are
/// identities. Prefix and suffix products are shared across layers, so
/// the cost is `O(N)` matrix multiplies.
pub fn gradients(w: &WeightStack, problem: &Problem) -> Vec<Matrix> {
    let n = w.depth();
    let spec = w.spec();

    // prefix[j] = W_j·…·W_1 (d_j x d_0), prefix[0] = I.
    let mut prefix: Vec<Matrix> = Vec::with_capacity(n + 1);
    prefix.push(Matrix::identity(spec.d_in()));
    for j in 1..=n {
        prefix.push(w.layer(j).matmul(&prefix[j - 1]));
    }

    // suffix[j] = W_N·…·W_j (d_N x d_(j-1)), suffix[n+1] = I; stored so
    // that suffix_vec[n + 1 - j] is the product starting at layer j.
    let mut suffix: Vec<Matrix> = Vec::with_capacity(n + 1);
    suffix.push(Matrix::identity(spec.d_out()));
    for j in (1..=n).rev() {
        let prev = suffix.last().expect("suffix nonempty");
        suffix.push(prev.matmul(w.layer(j)));
    }
    let suffix_from = |j: usize| -> &Matrix { &suffix[n + 1 - j] };

    let err = prefix[n].sub(&problem.phi);
    (1..=n)
        .map(|j| {
            let left = suffix_from(j + 1).transpose();
            let right = prefix[j - 1].transpose();
            left.matmul(&err).matmul(&right)
        })
        .collect()
}

/// One simultaneous gradient-descent update: every layer moves by
/// `-eta` times its gradient, all gradients evaluated at the same iterate.
pub fn gd_step(w: &WeightStack, problem: &Problem, eta: f64) -> WeightStack {
    let grads = gradients(w, problem);
    let layers = w
        .layers
        .iter()
        .zip(&grads)
        .map(|(layer, grad)| layer.sub(&grad.scale(eta)))
        .collect();
    WeightStack { spec: w.spec.clone(), layers }
}

/// Which geometry monitors to record during training, and how often.
///
/// The loss itself is always recorded every iteration; monitors add
/// factorization work, so sparse strides keep long runs cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    /// Record the balancedness gap `max_j ||W_(j+1)^T W_(j+1) - W_j W_j^T||_F`.
    pub balance: bool,
    /// Record the smallest singular value of the end-to-end matrix.
    pub sigma_min: bool,
    /// Record the deficiency margin `sigma_min(Phi) - ||W_1:N - Phi||_F`.
    pub margin: bool,
    /// Record the largest per-layer spectral norm `max_j ||W_j||_2`.
    pub layer_norms: bool,
    /// Record monitors at iterations divisible by this stride.
    pub stride: usize,
}

impl MonitorConfig {
    /// No monitors at all.
    pub fn none() -> Self {
        MonitorConfig {
            balance: false,
            sigma_min: false,
            margin: false,
            layer_norms: false,
            stride: 1,
        }
    }

    /// Every monitor, every iteration.
    pub fn all() -> Self {
        Self::all_with_stride(1)
    }

    /// Every monitor, at the given stride (0 is treated as 1).
    pub fn all_with_stride(stride: usize) -> Self {
        MonitorConfig {
            balance: true,
            sigma_min: true,
            margin: true,
            layer_norms: true,
            stride: stride.max(1),
        }
    }

    fn any(&self) -> bool {
        self.balance || self.sigma_min || self.margin || self.layer_norms
    }
}

/// Training-loop parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size `eta`.
    pub eta: f64,
    /// Stop as converged once the loss is at or below this value.
    pub eps: f64,
    /// Maximum number of gradient steps.
    pub max_iters: usize,
    /// Loss level at which the divergence guard fires.
    pub guard: f64,
    /// Geometry monitors.
    pub monitors: MonitorConfig,
}

impl TrainConfig {
    /// Plain config with the crate-default convergence threshold (`1e-5`),
    /// iteration cap (`10^6`), and divergence guard.
    pub fn new(eta: f64) -> Self {
        TrainConfig {
            eta,
            eps: 1e-5,
            max_iters: 1_000_000,
            guard: DIVERGENCE_GUARD,
            monitors: MonitorConfig::none(),
        }
    }

    /// Same, with monitors.
    pub fn with_monitors(eta: f64, monitors: MonitorConfig) -> Self {
        TrainConfig { monitors, ..TrainConfig::new(eta) }
    }
}

/// How a training run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStatus {
    /// Loss reached the convergence threshold.
    Converged,
    /// The iteration cap was reached first.
    IterationCap,
    /// The loss exceeded the guard or stopped being finite.
    Diverged,
}

impl TrainStatus {
    /// Stable lowercase name used in file formats.
    pub fn as_str(&self) -> &'static str {
        match self {
            TrainStatus::Converged => "converged",
            TrainStatus::IterationCap => "iteration-cap",
            TrainStatus::Diverged => "diverged",
        }
    }
}

/// Monitor snapshot at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iteration index.
    pub t: usize,
    /// Loss at `t`.
    pub loss: f64,
    /// Balancedness gap, when requested.
    pub balance: Option<f64>,
    /// Smallest end-to-end singular value, when requested.
    pub sigma_min: Option<f64>,
    /// Deficiency margin of the current end-to-end matrix, when requested.
    pub margin: Option<f64>,
    /// Largest per-layer spectral norm, when requested.
    pub layer_sigma_max: Option<f64>,
}

/// Record of a full training run.
#[derive(Debug, Clone)]
pub struct TrainTrace {
    /// Loss at every iteration, `t = 0 ..= t_final`, stride 1.
    pub losses: Vec<f64>,
    /// Monitor snapshots at the configured stride.
    pub records: Vec<TraceRecord>,
    /// Terminal status.
    pub status: TrainStatus,
    /// Weights at `t_final`.
    pub final_weights: WeightStack,
    /// The configuration the run used.
    pub config: TrainConfig,
}

impl TrainTrace {
    /// Index of the last recorded iteration.
    pub fn t_final(&self) -> usize {
        self.losses.len() - 1
    }

    /// Loss at the last recorded iteration.
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("trace has at least one loss")
    }
}

/// Runs gradient descent from `w0` until convergence, the iteration cap,
/// or the divergence guard. See [`TrainConfig`] and [`MonitorConfig`].
pub fn train(w0: &WeightStack, problem: &Problem, config: &TrainConfig) -> Result<TrainTrace> {
    problem.check_compatible(w0.spec())?;
    if !(config.eta.is_finite() && config.eta >= 0.0) {
        return Err(Error::contract(format!("step size must be finite and >= 0, got {}", config.eta)));
    }
    if !(config.eps.is_finite() && config.eps > 0.0) {
        return Err(Error::contract(format!(
            "convergence threshold must be finite and positive, got {}",
            config.eps
        )));
    }

    let sigma_min_phi = if config.monitors.margin {
        Some(decomp::sigma_min(&problem.phi)?)
    } else {
        None
    };

    let mut w = w0.clone();
    let mut losses = Vec::new();
    let mut records = Vec::new();
    let status;
    let mut t = 0usize;
    loop {
        let e2e = w.end_to_end();
        let dist = if e2e.all_finite() { e2e.frob_dist(&problem.phi) } else { f64::NAN };
        let l = 0.5 * dist * dist;
        losses.push(l);
        let finite = l.is_finite() && w.all_finite();

        if config.monitors.any() && t % config.monitors.stride == 0 {
            records.push(monitor_record(t, l, &w, &e2e, problem, sigma_min_phi, finite)?);
        }

        if !finite || l > config.guard {
            status = TrainStatus::Diverged;
            break;
        }
        if l <= config.eps {
            status = TrainStatus::Converged;
            break;
        }
        if t == config.max_iters {
            status = TrainStatus::IterationCap;
            break;
        }
        w = gd_step(&w, problem, config.eta);
        t += 1;
    }

    Ok(TrainTrace {
        losses,
        records,
        status,
        final_weights: w,
        config: config.clone(),
    })
}

fn monitor_record(
    t: usize,
    l: f64,
    w: &WeightStack,
    e2e: &Matrix,
    problem: &Problem,
    sigma_min_phi: Option<f64>,
    finite: bool,
) -> Result<TraceRecord> {
    let mut record = TraceRecord {
        t,
        loss: l,
        balance: None,
        sigma_min: None,
        margin: None,
        layer_sigma_max: None,
    };
    if !finite {
        // Geometry of a non-finite iterate is meaningless; leave the
        // monitors empty and let the caller see the divergent loss.
        return Ok(record);
    }
    let monitors = &w_monitors(w)?;
    if let Some(smp) = sigma_min_phi {
        record.margin = Some(smp - e2e.frob_dist(&problem.phi));
    }
    record.balance = monitors.0;
    record.layer_sigma_max = monitors.1;
    record.sigma_min = Some(decomp::sigma_min(e2e)?);
    Ok(record)
}

/// (balance gap, max layer spectral norm) — shared by the monitor path.
fn w_monitors(w: &WeightStack) -> Result<(Option<f64>, Option<f64>)> {
    let balance = Some(crate::theory::balancedness_delta(w));
    let mut worst = 0.0f64;
    for j in 1..=w.depth() {
        let s = decomp::spectral_norm(w.layer(j))?;
        if s > worst {
            worst = s;
        }
    }
    Ok((balance, Some(worst)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn scalar_stack(values: &[f64]) -> WeightStack {
        let spec = NetSpec::uniform(values.len(), 1).unwrap();
        let layers = values
            .iter()
            .map(|&v| Matrix::new(1, 1, vec![v]).unwrap())
            .collect();
        WeightStack::new(spec, layers).unwrap()
    }

    fn scalar_problem(phi: f64) -> Problem {
        Problem::from_target(Matrix::new(1, 1, vec![phi]).unwrap())
    }

    #[test]
    fn spec_accessors_and_rank_capability() {
        let spec = NetSpec::new(vec![4, 2, 3]).unwrap();
        assert_eq!(spec.depth(), 2);
        assert_eq!(spec.d_in(), 4);
        assert_eq!(spec.d_out(), 3);
        assert_eq!(spec.layer_shape(1), (2, 4));
        assert_eq!(spec.layer_shape(2), (3, 2));
        // Hidden width 2 is below min(4, 3) = 3: cannot reach full rank.
        assert!(!spec.full_rank_capable());
        assert!(NetSpec::new(vec![4, 3, 3]).unwrap().full_rank_capable());
        // No hidden layers: nothing constrains the rank.
        assert!(NetSpec::new(vec![4, 3]).unwrap().full_rank_capable());
        assert!(NetSpec::new(vec![3]).is_err());
        assert!(NetSpec::new(vec![3, 0]).is_err());
    }

    #[test]
    fn end_to_end_multiplies_in_application_order() {
        // W_1 maps R^3 -> R^2, W_2 maps R^2 -> R^1.
        let w1 = Matrix::new(2, 3, vec![1.0, 0.0, 2.0, 0.0, 1.0, -1.0]).unwrap();
        let w2 = Matrix::new(1, 2, vec![3.0, 4.0]).unwrap();
        let spec = NetSpec::new(vec![3, 2, 1]).unwrap();
        let stack = WeightStack::new(spec, vec![w1, w2]).unwrap();
        // W_2 * W_1 = [3, 4, 2].
        assert_eq!(stack.end_to_end().entries(), &[3.0, 4.0, 2.0]);
    }

    #[test]
    fn stack_construction_rejects_wrong_shapes() {
        let spec = NetSpec::new(vec![3, 2, 1]).unwrap();
        let bad = WeightStack::new(
            spec,
            vec![Matrix::zeros(2, 3), Matrix::zeros(2, 2)],
        );
        assert!(bad.unwrap_err().is_contract());
    }

    #[test]
    fn loss_matches_hand_value() {
        let stack = scalar_stack(&[0.9]);
        let problem = scalar_problem(1.0);
        assert!((loss(&stack, &problem) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn scalar_gradients_match_product_rule() {
        // loss = 1/2 (w2 w1 - phi)^2; d/dw1 = w2 e, d/dw2 = e w1.
        let stack = scalar_stack(&[0.5, 2.0]);
        let problem = scalar_problem(3.0);
        let e = 2.0 * 0.5 - 3.0;
        let grads = gradients(&stack, &problem);
        assert!((grads[0].get(0, 0) - 2.0 * e).abs() < 1e-15);
        assert!((grads[1].get(0, 0) - e * 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        use crate::rng::Rng;
        let mut rng = Rng::from_seed(8085);
        let h = 1e-5;
        for trial in 0..10 {
            let depth = 1 + (rng.next_u64() % 4) as usize;
            let dims: Vec<usize> = (0..=depth).map(|_| 1 + (rng.next_u64() % 6) as usize).collect();
            let spec = NetSpec::new(dims.clone()).unwrap();
            let layers: Vec<Matrix> = (1..=depth)
                .map(|j| {
                    let (r, c) = spec.layer_shape(j);
                    Matrix::from_fn(r, c, |_, _| 0.7 * rng.next_normal())
                })
                .collect();
            let stack = WeightStack::new(spec.clone(), layers).unwrap();
            let phi = Matrix::from_fn(spec.d_out(), spec.d_in(), |_, _| rng.next_normal());
            let problem = Problem::from_target(phi);

            let analytic = gradients(&stack, &problem);
            for j in 1..=depth {
                let (r, c) = spec.layer_shape(j);
                for i in 0..r {
                    for k in 0..c {
                        let numeric = {
                            let base = stack.layer(j).get(i, k);
                            let mut plus = stack.clone();
                            plus.layers[j - 1].set(i, k, base + h);
                            let mut minus = stack.clone();
                            minus.layers[j - 1].set(i, k, base - h);
                            (loss(&plus, &problem) - loss(&minus, &problem)) / (2.0 * h)
                        };
                        let a = analytic[j - 1].get(i, k);
                        let scale = if a.abs() > 1.0 { a.abs() } else { 1.0 };
                        assert!(
                            (a - numeric).abs() <= 1e-6 * scale,
                            "trial {trial} layer {j} entry ({i},{k}): analytic {a} vs numeric {numeric}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gd_step_moves_against_the_gradient() {
        let stack = scalar_stack(&[0.5, 2.0]);
        let problem = scalar_problem(3.0);
        let eta = 0.01;
        let stepped = gd_step(&stack, &problem, eta);
        let e = 2.0 * 0.5 - 3.0;
        assert!((stepped.layer(1).get(0, 0) - (0.5 - eta * 2.0 * e)).abs() < 1e-15);
        assert!((stepped.layer(2).get(0, 0) - (2.0 - eta * e * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn gd_step_with_zero_eta_is_identity() {
        let stack = scalar_stack(&[0.4, -1.2, 0.8]);
        let problem = scalar_problem(1.0);
        assert_eq!(gd_step(&stack, &problem, 0.0), stack);
    }

    #[test]
    fn train_stops_immediately_when_already_converged() {
        let stack = scalar_stack(&[1.0]);
        let problem = scalar_problem(1.0);
        let trace = train(&stack, &problem, &TrainConfig::new(0.1)).unwrap();
        assert_eq!(trace.status, TrainStatus::Converged);
        assert_eq!(trace.losses.len(), 1);
        assert_eq!(trace.t_final(), 0);
    }

    #[test]
    fn train_converges_on_a_simple_scalar_problem() {
        let stack = scalar_stack(&[0.5, 0.5]);
        let problem = scalar_problem(1.0);
        let mut config = TrainConfig::new(0.2);
        config.eps = 1e-10;
        let trace = train(&stack, &problem, &config).unwrap();
        assert_eq!(trace.status, TrainStatus::Converged);
        assert!(trace.final_loss() <= 1e-10);
        // Loss decreased monotonically at this conservative step size.
        for w in trace.losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "loss increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn train_reports_iteration_cap() {
        let stack = scalar_stack(&[0.5, 0.5]);
        let problem = scalar_problem(1.0);
        let mut config = TrainConfig::new(0.0); // never moves
        config.max_iters = 17;
        let trace = train(&stack, &problem, &config).unwrap();
        assert_eq!(trace.status, TrainStatus::IterationCap);
        assert_eq!(trace.losses.len(), 18); // t = 0..=17
    }

    #[test]
    fn train_guard_fires_on_divergence() {
        // A huge step size on a scalar problem oscillates and explodes.
        let stack = scalar_stack(&[2.0, 2.0]);
        let problem = scalar_problem(1.0);
        let trace = train(&stack, &problem, &TrainConfig::new(10.0)).unwrap();
        assert_eq!(trace.status, TrainStatus::Diverged);
        let last = trace.final_loss();
        assert!(!last.is_finite() || last > DIVERGENCE_GUARD);
    }

    #[test]
    fn train_rejects_incompatible_target() {
        let stack = scalar_stack(&[1.0]);
        let problem = Problem::from_target(Matrix::zeros(2, 2));
        assert!(train(&stack, &problem, &TrainConfig::new(0.1)).unwrap_err().is_contract());
    }

    #[test]
    fn monitors_record_at_the_requested_stride() {
        let stack = scalar_stack(&[0.5, 0.5]);
        let problem = scalar_problem(1.0);
        let mut config = TrainConfig::with_monitors(0.0, MonitorConfig::all_with_stride(5));
        config.max_iters = 12;
        let trace = train(&stack, &problem, &config).unwrap();
        let ts: Vec<usize> = trace.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 5, 10]);
        let r0 = &trace.records[0];
        assert!(r0.balance.is_some());
        assert!(r0.sigma_min.is_some());
        assert!(r0.margin.is_some());
        assert!(r0.layer_sigma_max.is_some());
        // Hand values at t = 0: product 0.25, sigma_min 0.25,
        // margin = 1 - |0.25 - 1| = 0.25, balance = |0.25 - 0.25| = 0.
        assert!((r0.sigma_min.unwrap() - 0.25).abs() < 1e-12);
        assert!((r0.margin.unwrap() - 0.25).abs() < 1e-12);
        assert!(r0.balance.unwrap().abs() < 1e-15);
        assert!((r0.layer_sigma_max.unwrap() - 0.5).abs() < 1e-12);
    }
}
