//! Reproduction harness: initialization sweeps, Monte Carlo probability
//! checks, and the two constructions showing the guarantee's hypotheses
//! are not decorative.
//!
//! * [`std_sweep`] scans initialization standard deviations against a
//!   learning-rate grid and reports, per deviation, the fastest
//!   iteration count to reach a loss threshold — the experiment that
//!   shows layer-wise random initialization only works in a narrow band
//!   of deviations (and ever more narrowly with depth), while balanced
//!   initialization converges across the board.
//! * [`balancedness_trace`] records how the balancedness gap and the
//!   smallest layer Gram norm evolve along a run.
//! * [`mc_balance_probability`] and [`mc_margin_probability`] estimate
//!   how often random initializations are approximately balanced or
//!   carry a deficiency margin, against the proven lower bounds.
//! * [`failure_unbalanced`] builds the explicit unbalanced start (large
//!   first-half layers, tiny second-half layers) whose loss provably
//!   never returns below a positive floor and grows without bound —
//!   balancedness cannot simply be dropped from the guarantee.
//! * [`failure_no_margin`] runs the identity initialization against a
//!   target with a negative eigenvalue: the trajectory stays in a shared
//!   diagonalization and stalls above `lambda^2 / 2` — a positive margin
//!   cannot be dropped either.

use alloc::format;
use alloc::vec::Vec;

use crate::decomp;
use crate::error::{Error, Result};
use crate::init;
use crate::matrix::Matrix;
use crate::network::{self, NetSpec, Problem, TrainConfig, TrainStatus, WeightStack};
use crate::rng::{derive_seed, Rng};
use crate::theory;

/// Initialization scheme for sweeps and Monte Carlo sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Independent `N(0, s^2)` entries in every layer.
    Layerwise,
    /// Balanced factorization of an end-to-end `N(0, s^2)` draw.
    Balanced,
}

/// Default learning-rate grid: 13 log-spaced values covering `1e-4 ..= 1`.
pub fn default_lr_grid() -> Vec<f64> {
    (0..13).map(|k| libm::pow(10.0, -4.0 + k as f64 / 3.0)).collect()
}

/// One sweep cell: the best learning rate found for this initialization
/// standard deviation, or `None` when no grid point converged within the
/// cap.
#[derive(Debug, Clone, Copy)]
pub struct SweepCell {
    /// Initialization standard deviation.
    pub std: f64,
    /// Fastest-converging learning rate (ties go to the larger rate).
    pub best_lr: Option<f64>,
    /// Iterations to reach the loss threshold at `best_lr` (at least 1).
    pub iterations: Option<usize>,
}

/// Result of [`std_sweep`].
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Scheme the sweep used.
    pub scheme: InitScheme,
    /// One cell per standard deviation, in input order.
    pub cells: Vec<SweepCell>,
}

/// Iterations for one `(initialization, learning rate)` pair to bring
/// the loss to `eps`, or `None` on divergence, stall, or cap.
///
/// Training proceeds in windows of 2000 iterations. A run whose loss
/// shows no measurable progress (relative change below `1e-9`, i.e.
/// rounding-noise territory) over two consecutive windows is reported as
/// capped without spending the rest of the budget: its measured rate
/// would have to grow by many orders of magnitude to still make the
/// threshold, which does not happen for the flat-gradient cells this
/// shortcut exists for.
fn iterations_to_eps(
    w0: &WeightStack,
    problem: &Problem,
    eta: f64,
    eps: f64,
    cap: usize,
) -> Result<Option<usize>> {
    const WINDOW: usize = 2000;
    const STALL_TOL: f64 = 1e-9;
    let mut weights = w0.clone();
    let mut done = 0usize;
    let mut stalled_windows = 0u32;
    loop {
        let chunk = WINDOW.min(cap - done);
        if chunk == 0 {
            return Ok(None);
        }
        let mut config = TrainConfig::new(eta);
        config.eps = eps;
        config.max_iters = chunk;
        let trace = network::train(&weights, problem, &config)?;
        match trace.status {
            TrainStatus::Converged => {
                // Reported counts are 1-based: "reached within k iterations",
                // so an already-converged start still reports 1.
                return Ok(Some((done + trace.t_final()).max(1)));
            }
            TrainStatus::Diverged => return Ok(None),
            TrainStatus::IterationCap => {
                done += trace.t_final();
                let start = trace.losses[0];
                let end = trace.final_loss();
                let progress = if end > 0.0 { libm::log(start / end) } else { f64::INFINITY };
                if progress.abs() < STALL_TOL {
                    stalled_windows += 1;
                    if stalled_windows >= 2 {
                        return Ok(None);
                    }
                } else {
                    stalled_windows = 0;
                }
                weights = trace.final_weights;
            }
        }
    }
}

/// Draws the initialization a sweep/MC trial uses.
fn draw_init(spec: &NetSpec, scheme: InitScheme, std: f64, rng: &mut Rng) -> Result<WeightStack> {
    match scheme {
        InitScheme::Layerwise => init::gaussian_layerwise(spec, std, rng),
        InitScheme::Balanced => init::balanced_init_gaussian(spec, std, rng),
    }
}

/// For each initialization standard deviation, grid-searches the
/// learning rate and reports the fastest iteration count to reach loss
/// `eps` (cap `cap`), or a cap marker when nothing converges.
///
/// Each deviation draws one initialization (deterministically from
/// `seed` and the cell index) that is shared across the whole
/// learning-rate grid, so columns of the result are directly comparable.
/// Identical arguments produce bit-identical results.
pub fn std_sweep(
    spec: &NetSpec,
    phi: &Matrix,
    scheme: InitScheme,
    std_grid: &[f64],
    lr_grid: &[f64],
    eps: f64,
    cap: usize,
    seed: u64,
) -> Result<SweepResult> {
    if std_grid.is_empty() || lr_grid.is_empty() {
        return Err(Error::contract("sweep grids must be non-empty"));
    }
    if std_grid.iter().chain(lr_grid).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::contract("sweep grids must hold finite positive values"));
    }
    if !(eps.is_finite() && eps > 0.0) || cap == 0 {
        return Err(Error::contract("sweep needs eps > 0 and a positive cap"));
    }
    let problem = Problem::from_target(phi.clone());
    problem.check_compatible(spec)?;

    // Try larger rates first: every later candidate then only gets the
    // budget it would need to strictly beat the incumbent, which prunes
    // hopeless runs exactly (ties resolve to the larger rate either way).
    let mut rates: Vec<f64> = lr_grid.to_vec();
    rates.sort_by(|a, b| b.partial_cmp(a).expect("finite rates"));

    let mut cells = Vec::with_capacity(std_grid.len());
    for (index, &std) in std_grid.iter().enumerate() {
        let mut rng = Rng::from_seed(derive_seed(seed, index as u64));
        let w0 = draw_init(spec, scheme, std, &mut rng)?;
        let mut best: Option<(f64, usize)> = None;
        for &lr in &rates {
            let budget = match best {
                Some((_, incumbent)) => incumbent - 1,
                None => cap,
            };
            if budget == 0 {
                break;
            }
            if let Some(iters) = iterations_to_eps(&w0, &problem, lr, eps, budget)? {
                if best.map_or(true, |(_, incumbent)| iters < incumbent) {
                    best = Some((lr, iters));
                }
            }
        }
        cells.push(SweepCell {
            std,
            best_lr: best.map(|(lr, _)| lr),
            iterations: best.map(|(_, iters)| iters),
        });
    }
    Ok(SweepResult { scheme, cells })
}

/// One point of a balancedness trace.
#[derive(Debug, Clone, Copy)]
pub struct BalanceSample {
    /// Iteration.
    pub t: usize,
    /// Loss at `t`.
    pub loss: f64,
    /// Balancedness gap at `t`.
    pub balance: f64,
    /// `min_j ||W_j W_j^T||_F` at `t` — how close the smallest layer
    /// Gram is to collapsing.
    pub min_gram_norm: f64,
}

/// Trains for `steps` iterations from a fresh `scheme` draw at deviation
/// `std`, recording the balancedness gap and the smallest layer Gram
/// norm at every iteration. Stops early (truncating the series) if the
/// loss leaves the finite range.
pub fn balancedness_trace(
    spec: &NetSpec,
    phi: &Matrix,
    scheme: InitScheme,
    std: f64,
    eta: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<BalanceSample>> {
    let problem = Problem::from_target(phi.clone());
    problem.check_compatible(spec)?;
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::contract(format!("step size must be finite and >= 0, got {eta}")));
    }
    let mut rng = Rng::from_seed(seed);
    let mut w = draw_init(spec, scheme, std, &mut rng)?;
    let mut samples = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        if !w.all_finite() {
            break;
        }
        let mut min_gram = f64::INFINITY;
        for j in 1..=w.depth() {
            let norm = w.layer(j).outer_gram().frob_norm();
            if norm < min_gram {
                min_gram = norm;
            }
        }
        samples.push(BalanceSample {
            t,
            loss: network::loss(&w, &problem),
            balance: theory::balancedness_delta(&w),
            min_gram_norm: min_gram,
        });
        if t < steps {
            w = network::gd_step(&w, &problem, eta);
        }
    }
    Ok(samples)
}

/// Monte Carlo estimate against a proven probability bound.
#[derive(Debug, Clone, Copy)]
pub struct MCReport {
    /// Number of independent draws.
    pub trials: usize,
    /// Draws satisfying the property.
    pub successes: usize,
    /// `successes / trials`.
    pub empirical_p: f64,
    /// Proven lower bound on the probability (0 when no bound applies).
    pub bound: f64,
    /// Three binomial standard deviations, `3 * sqrt(p(1-p)/trials)`.
    pub slack: f64,
}

impl MCReport {
    fn from_counts(trials: usize, successes: usize, bound: f64) -> Self {
        let p = successes as f64 / trials as f64;
        MCReport {
            trials,
            successes,
            empirical_p: p,
            bound,
            slack: 3.0 * libm::sqrt(p * (1.0 - p) / trials as f64),
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 100 {
        return Err(Error::contract(format!(
            "Monte Carlo needs at least 100 trials for a meaningful rate, got {trials}"
        )));
    }
    Ok(())
}

/// Estimates the probability that a layer-wise Gaussian initialization
/// at deviation `std` is `delta`-balanced, against the proven bound
/// `max(0, 1 - 10 * N * std^4 * d_max^3 / delta^2)`.
pub fn mc_balance_probability(
    spec: &NetSpec,
    std: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<MCReport> {
    check_trials(trials)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::contract(format!("delta must be finite and positive, got {delta}")));
    }
    let mut successes = 0usize;
    for trial in 0..trials {
        let mut rng = Rng::from_seed(derive_seed(seed, trial as u64));
        let w = init::gaussian_layerwise(spec, std, &mut rng)?;
        if theory::balancedness_delta(&w) <= delta {
            successes += 1;
        }
    }
    let n = spec.depth() as f64;
    let d_max = spec.dims().iter().copied().max().expect("spec has dims") as f64;
    let mass = 10.0 * n * libm::pow(std, 4.0) * d_max * d_max * d_max / (delta * delta);
    let bound = if mass >= 1.0 { 0.0 } else { 1.0 - mass };
    Ok(MCReport::from_counts(trials, successes, bound))
}

/// What [`mc_margin_probability`] counts as success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginMode {
    /// Balanced initialization from an end-to-end Gaussian draw;
    /// success means the margin reaches the certified floor
    /// `std^2 * d_0 / (2 ||Phi||_2)`. The proven bound is 1/4 when the
    /// scalar-output certificate's sampling preconditions hold.
    BalancedFloor,
    /// Layer-wise Gaussian initialization; success means any positive
    /// margin. Qualitative (no constructive bound): as `std` shrinks the
    /// rate approaches 1/2 from below.
    LayerwiseSign,
}

/// Estimates how often a random initialization carries a deficiency
/// margin, for scalar-output networks (`d_N = 1`).
pub fn mc_margin_probability(
    spec: &NetSpec,
    phi: &Matrix,
    mode: MarginMode,
    std: f64,
    trials: usize,
    seed: u64,
) -> Result<MCReport> {
    check_trials(trials)?;
    if spec.d_out() != 1 {
        return Err(Error::contract(format!(
            "margin sampling requires d_N = 1, got {}",
            spec.d_out()
        )));
    }
    if phi.shape() != (1, spec.d_in()) {
        return Err(Error::contract("target shape does not match the network"));
    }
    if !(std.is_finite() && std > 0.0) {
        return Err(Error::contract(format!("std must be finite and positive, got {std}")));
    }

    let sigma_min_phi = decomp::sigma_min(phi)?;
    let d0 = spec.d_in() as f64;
    // For a single-row target the spectral norm equals sigma_min.
    let floor = std * std * d0 / (2.0 * sigma_min_phi);

    let mut successes = 0usize;
    for trial in 0..trials {
        let mut rng = Rng::from_seed(derive_seed(seed, trial as u64));
        let (scheme, threshold) = match mode {
            MarginMode::BalancedFloor => (InitScheme::Balanced, floor),
            MarginMode::LayerwiseSign => (InitScheme::Layerwise, 0.0),
        };
        let w = draw_init(spec, scheme, std, &mut rng)?;
        let margin = sigma_min_phi - w.end_to_end().frob_dist(phi);
        if margin > threshold || (matches!(mode, MarginMode::BalancedFloor) && margin == threshold)
        {
            successes += 1;
        }
    }

    let bound = match mode {
        MarginMode::BalancedFloor => {
            let config = theory::ScalarInitConfig::default();
            let std_max = sigma_min_phi / libm::sqrt(config.a * d0 * d0);
            if spec.d_in() >= config.d0_min && std <= std_max {
                config.prob
            } else {
                0.0
            }
        }
        MarginMode::LayerwiseSign => 0.0,
    };
    Ok(MCReport::from_counts(trials, successes, bound))
}

/// Verdict and artifacts of the unbalanced-initialization failure
/// construction; see [`failure_unbalanced`].
#[derive(Debug, Clone)]
pub struct FailureReport {
    /// The margin parameter after the proof's clamp to `>= 3/4`.
    pub c_clamped: f64,
    /// Imbalance amplitude `A` of the construction.
    pub amplitude: f64,
    /// `0.5 * (2^N - 1)^2` — the level the loss provably never drops
    /// below once training starts.
    pub loss_floor: f64,
    /// Measured margin of the initialization (should equal `c_clamped`).
    pub initial_margin: f64,
    /// Loss at `t = 0, 1, ...` until the divergence guard fired.
    pub losses: Vec<f64>,
    /// Loss stayed at or above the floor for every `t >= 1`.
    pub floor_held: bool,
    /// Loss was strictly increasing for `t >= 1`.
    pub strictly_increasing: bool,
    /// Non-leading diagonal weight entries stayed exactly at 1 and
    /// off-diagonals at 0 (vacuously true for `d = 1`).
    pub background_fixed: bool,
    /// The run ended by exceeding the divergence guard.
    pub diverged: bool,
    /// All of the above held.
    pub pass: bool,
}

/// Runs the explicit failure construction for unbalanced starts.
///
/// The initialization has deficiency margin `max(c, 3/4)` with respect
/// to the identity target — everything the guarantee asks for except
/// balancedness, which is violated with amplitude `A`: first-half layers
/// carry a huge leading entry `A * c^(1/N)`, second-half layers a tiny
/// one `c^(1/N) / A`. Gradient descent then provably cannot recover:
/// from `t = 1` on, the loss stays above `0.5 * (2^N - 1)^2` and grows
/// without bound (the leading entries explode with alternating signs).
pub fn failure_unbalanced(c: f64, eta: f64, n: usize, d: usize) -> Result<FailureReport> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::contract(format!("the construction needs an even depth, got {n}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::contract(format!("margin parameter must lie in (0, 1), got {c}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::contract(format!("step size must be finite and positive, got {eta}")));
    }
    if d == 0 {
        return Err(Error::contract("dimension must be positive"));
    }

    let c_clamped = if c < 0.75 { 0.75 } else { c };
    let nf = n as f64;
    let amplitude = [
        libm::sqrt(eta * nf),
        2.0 / (eta * (1.0 - c_clamped) * libm::pow(c_clamped, (nf - 1.0) / nf)),
        2000.0,
        20.0 / eta,
        libm::pow(
            20.0 * libm::pow(10.0, 2.0 * nf - 1.0) / libm::pow(eta, 2.0 * nf),
            1.0 / (2.0 * nf - 2.0),
        ),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    let spec = NetSpec::uniform(n, d)?;
    let root_c = libm::pow(c_clamped, 1.0 / nf);
    let layers: Vec<Matrix> = (1..=n)
        .map(|j| {
            let mut layer = Matrix::identity(d);
            let leading = if j <= n / 2 { amplitude * root_c } else { root_c / amplitude };
            layer.set(0, 0, leading);
            layer
        })
        .collect();
    let w0 = WeightStack::new(spec, layers)?;
    let problem = Problem::from_target(Matrix::identity(d));
    let initial_margin = theory::deficiency_margin(&w0.end_to_end(), &problem.phi)?;

    let loss_floor = {
        let growth = libm::pow(2.0, nf) - 1.0;
        0.5 * growth * growth
    };
    const GUARD: f64 = 1e12;
    const SAFETY_CAP: usize = 1_000_000;

    let mut w = w0;
    let mut losses = Vec::new();
    let mut floor_held = true;
    let mut strictly_increasing = true;
    let mut background_fixed = true;
    let mut diverged = false;
    for t in 0..=SAFETY_CAP {
        let loss = network::loss(&w, &problem);
        let finite = loss.is_finite();
        if finite {
            losses.push(loss);
            if t >= 1 && loss < loss_floor {
                floor_held = false;
            }
            if t >= 2 && loss <= losses[t - 1] {
                strictly_increasing = false;
            }
        }
        // Away from the leading entry the dynamics are already optimal
        // and exactly decoupled; any drift there is an implementation bug.
        for j in 1..=n {
            let layer = w.layer(j);
            for r in 0..d {
                for col in 0..d {
                    let expect = if r == col && r > 0 { 1.0 } else if r != col { 0.0 } else { continue };
                    if (layer.get(r, col) - expect).abs() > 1e-12 {
                        background_fixed = false;
                    }
                }
            }
        }
        if !finite || loss > GUARD {
            diverged = true;
            break;
        }
        w = network::gd_step(&w, &problem, eta);
    }

    let margin_ok = (initial_margin - c_clamped).abs() <= 1e-9 * c_clamped;
    let pass =
        floor_held && strictly_increasing && background_fixed && diverged && margin_ok;
    Ok(FailureReport {
        c_clamped,
        amplitude,
        loss_floor,
        initial_margin,
        losses,
        floor_held,
        strictly_increasing,
        background_fixed,
        diverged,
        pass,
    })
}

/// Verdict and artifacts of the no-margin failure construction; see
/// [`failure_no_margin`].
#[derive(Debug, Clone)]
pub struct MarginFailureReport {
    /// `0.5 * lambda^2` — the level the loss can never drop below.
    pub loss_floor: f64,
    /// Loss at `t = 0 ..= steps` (truncated if the state left the
    /// finite range).
    pub losses: Vec<f64>,
    /// Loss stayed at or above the floor throughout.
    pub floor_held: bool,
    /// The initialization is not a critical point (the first gradient
    /// equals `I - Phi != 0`).
    pub gradient_nonzero_at_start: bool,
    /// Largest deviation of any layer from the shared diagonal form.
    pub shared_diagonal_residual: f64,
    /// `shared_diagonal_residual <= 1e-8`.
    pub diagonal_form_held: bool,
    /// All of the above held.
    pub pass: bool,
}

/// Runs the no-margin failure construction: identity initialization
/// (perfectly balanced!) against the target
/// `Phi = diag(1, ..., 1, -lambda)`.
///
/// The initialization is not a critical point, yet symmetry confines
/// every layer to one shared diagonal form `diag(d_1(t), ..., d_d(t))`
/// for all time, and on the negative-eigenvalue coordinate an even-depth
/// product cannot go below zero — so the loss never drops under
/// `0.5 * lambda^2`. A deficiency margin at initialization is exactly
/// what rules such targets out.
pub fn failure_no_margin(
    d: usize,
    n: usize,
    eta: f64,
    lambda: f64,
    steps: usize,
) -> Result<MarginFailureReport> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::contract(format!("the construction needs an even depth, got {n}")));
    }
    if d < 2 {
        return Err(Error::contract(format!(
            "the target needs at least two coordinates, got {d}"
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::contract(format!("lambda must be finite and positive, got {lambda}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::contract(format!("step size must be finite and positive, got {eta}")));
    }

    let spec = NetSpec::uniform(n, d)?;
    let mut diag = alloc::vec![1.0; d];
    diag[d - 1] = -lambda;
    let problem = Problem::from_target(Matrix::from_diag(&diag));
    let w0 = init::identity_residual(&spec)?;

    let gradient_nonzero_at_start = network::gradients(&w0, &problem)
        .iter()
        .any(|g| g.frob_norm() > 0.0);

    let loss_floor = 0.5 * lambda * lambda;
    let mut w = w0;
    let mut losses = Vec::with_capacity(steps + 1);
    let mut floor_held = true;
    let mut shared_diagonal_residual = 0.0f64;
    for t in 0..=steps {
        if !w.all_finite() {
            break;
        }
        let loss = network::loss(&w, &problem);
        losses.push(loss);
        if loss < loss_floor {
            floor_held = false;
        }
        let reference = w.layer(1);
        for j in 1..=n {
            let layer = w.layer(j);
            for r in 0..d {
                for col in 0..d {
                    let deviation = if r == col {
                        (layer.get(r, col) - reference.get(r, r)).abs()
                    } else {
                        layer.get(r, col).abs()
                    };
                    if deviation > shared_diagonal_residual {
                        shared_diagonal_residual = deviation;
                    }
                }
            }
        }
        if t < steps {
            w = network::gd_step(&w, &problem, eta);
        }
    }

    let diagonal_form_held = shared_diagonal_residual <= 1e-8;
    let pass = floor_held && gradient_nonzero_at_start && diagonal_form_held;
    Ok(MarginFailureReport {
        loss_floor,
        losses,
        floor_held,
        gradient_nonzero_at_start,
        shared_diagonal_residual,
        diagonal_form_held,
        pass,
    })
}
