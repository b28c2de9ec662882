//! Run configuration: every subcommand with its flags as one typed,
//! serializable value. The same struct backs both the argument parser
//! and the saved `*.config.json` artifact, so a saved configuration can
//! be replayed bit-exactly with `--config`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dln_core::experiments::{InitScheme, MarginMode};
use dln_core::rng::{derive_seed, Rng};
use dln_core::{init, Matrix, NetSpec, WeightStack};

use crate::error::{CliError, Result};
use crate::files::load_matrix_csv;

/// Seed stream for drawing the synthetic target, kept separate from the
/// initialization stream so each is independently reproducible.
const PHI_SEED_STREAM: u64 = 1;
/// Seed stream for drawing the initial weights.
const INIT_SEED_STREAM: u64 = 2;

/// Top-level argument grammar: either a subcommand or `--config` with a
/// saved run configuration (never both, never neither).
#[derive(Parser, Debug)]
#[command(
    name = "dln",
    about = "Train deep linear networks and check the convergence guarantees \
             their initializations certify.",
    version
)]
pub struct Cli {
    /// Replay a saved run configuration (JSON) instead of passing flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<RunConfig>,
}

/// One fully specified run: the subcommand plus all of its flags.
#[derive(Subcommand, Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Whiten a CSV dataset and emit the induced training problem.
    Whiten(WhitenArgs),
    /// Run gradient descent and record the training trace.
    Train(TrainArgs),
    /// Evaluate the step-size/iteration certificate of an initialization.
    Certificate(CertificateArgs),
    /// Train and check every per-step guarantee the certificate makes.
    Verify(VerifyArgs),
    /// Sweep initialization scales against a step-size grid.
    Sweep(SweepArgs),
    /// Estimate how often random layers start approximately balanced.
    McBalance(McBalanceArgs),
    /// Estimate how often random starts have a positive deficiency margin.
    McMargin(McMarginArgs),
    /// Run the unbalanced construction on which descent provably diverges.
    FailUnbalanced(FailUnbalancedArgs),
    /// Run the zero-margin construction whose loss never leaves its floor.
    FailMargin(FailMarginArgs),
    /// Compare gradient descent against the continuous-time flow.
    FlowCompare(FlowCompareArgs),
}

impl RunConfig {
    /// The subcommand name, used as the artifact filename prefix.
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Whiten(_) => "whiten",
            RunConfig::Train(_) => "train",
            RunConfig::Certificate(_) => "certificate",
            RunConfig::Verify(_) => "verify",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::McBalance(_) => "mc-balance",
            RunConfig::McMargin(_) => "mc-margin",
            RunConfig::FailUnbalanced(_) => "fail-unbalanced",
            RunConfig::FailMargin(_) => "fail-margin",
            RunConfig::FlowCompare(_) => "flow-compare",
        }
    }

    /// The flags shared by every subcommand.
    pub fn common(&self) -> &CommonArgs {
        match self {
            RunConfig::Whiten(a) => &a.common,
            RunConfig::Train(a) => &a.common,
            RunConfig::Certificate(a) => &a.common,
            RunConfig::Verify(a) => &a.common,
            RunConfig::Sweep(a) => &a.common,
            RunConfig::McBalance(a) => &a.common,
            RunConfig::McMargin(a) => &a.common,
            RunConfig::FailUnbalanced(a) => &a.common,
            RunConfig::FailMargin(a) => &a.common,
            RunConfig::FlowCompare(a) => &a.common,
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Flags every subcommand accepts.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CommonArgs {
    /// Master seed for all randomness (a fixed constant by default,
    /// never wall-clock time).
    #[arg(long, default_value_t = default_seed())]
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Directory artifacts are written into.
    #[arg(long, default_value = "out", value_name = "DIR")]
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Also render an SVG plot of the primary artifact.
    #[arg(long)]
    #[serde(default)]
    pub plot: bool,
}

/// Network shape flags.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct NetArgs {
    /// Layer dimensions d_0,d_1,...,d_N (comma separated).
    #[arg(long, value_delimiter = ',', value_name = "D0,D1,...", required = true)]
    pub dims: Vec<usize>,
    /// Network depth N; cross-checked against --dims when given.
    #[arg(long, value_name = "N")]
    #[serde(default)]
    pub depth: Option<usize>,
}

impl NetArgs {
    /// Builds the network shape, checking the optional depth flag
    /// against the dimension list.
    pub fn spec(&self) -> Result<NetSpec> {
        if let Some(n) = self.depth {
            if self.dims.len() != n + 1 {
                return Err(CliError::Usage(format!(
                    "--depth {n} needs {} dimensions, --dims gave {}",
                    n + 1,
                    self.dims.len()
                )));
            }
        }
        Ok(NetSpec::new(self.dims.clone())?)
    }
}

/// Synthetic target families.
#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    /// I.i.d. Gaussian entries, normalized to unit Frobenius norm.
    Random,
    /// Identity plus a perturbation of Frobenius norm --phi-radius.
    NearIdentity,
    /// A single unit-norm row (scalar regression).
    ScalarRow,
}

/// Target-matrix flags; exactly one source must be given.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TargetArgs {
    /// Diagonal target: this value down the main diagonal of the
    /// d_N x d_0 matrix, zero elsewhere.
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    #[serde(default)]
    pub phi_scalar: Option<f64>,
    /// Draw a synthetic target of this kind (deterministic in --seed).
    #[arg(long, value_enum, value_name = "KIND")]
    #[serde(default)]
    pub phi_kind: Option<PhiKind>,
    /// Perturbation radius for --phi-kind near-identity.
    #[arg(long, value_name = "R")]
    #[serde(default)]
    pub phi_radius: Option<f64>,
    /// Load the target from a headerless numeric CSV.
    #[arg(long, value_name = "FILE")]
    #[serde(default)]
    pub phi_file: Option<PathBuf>,
}

impl TargetArgs {
    /// Resolves the target matrix for a `d_out x d_in` problem.
    pub fn resolve(&self, d_out: usize, d_in: usize, seed: u64) -> Result<Matrix> {
        let sources = usize::from(self.phi_scalar.is_some())
            + usize::from(self.phi_kind.is_some())
            + usize::from(self.phi_file.is_some());
        if sources != 1 {
            return Err(CliError::Usage(
                "give exactly one target source: --phi-scalar, --phi-kind, or --phi-file".into(),
            ));
        }
        if self.phi_radius.is_some() && self.phi_kind != Some(PhiKind::NearIdentity) {
            return Err(CliError::Usage(
                "--phi-radius only applies to --phi-kind near-identity".into(),
            ));
        }
        if let Some(v) = self.phi_scalar {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("--phi-scalar must be finite, got {v}")));
            }
            return Ok(Matrix::from_fn(d_out, d_in, |i, j| if i == j { v } else { 0.0 }));
        }
        if let Some(kind) = self.phi_kind {
            let synth_kind = match kind {
                PhiKind::Random => dln_core::data::SynthKind::RandomGaussian,
                PhiKind::NearIdentity => {
                    let radius = self.phi_radius.ok_or_else(|| {
                        CliError::Usage("--phi-kind near-identity needs --phi-radius".into())
                    })?;
                    dln_core::data::SynthKind::NearIdentity { radius }
                }
                PhiKind::ScalarRow => dln_core::data::SynthKind::ScalarRow,
            };
            return Ok(dln_core::data::synth_target(
                synth_kind,
                d_out,
                d_in,
                derive_seed(seed, PHI_SEED_STREAM),
            )?);
        }
        let path = self.phi_file.as_ref().expect("one source remains");
        let phi = load_matrix_csv(path)?;
        if phi.shape() != (d_out, d_in) {
            return Err(CliError::Usage(format!(
                "target in {} is {}x{}, network needs {d_out}x{d_in}",
                path.display(),
                phi.rows(),
                phi.cols()
            )));
        }
        Ok(phi)
    }
}

/// Initialization schemes selectable from the command line.
#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// Independent Gaussian entries in every layer.
    Layerwise,
    /// A Gaussian end-to-end matrix factored into balanced layers.
    Balanced,
    /// Every layer the identity (square layers only); --std is ignored.
    Identity,
}

impl InitKind {
    /// Draws the initial stack, deterministically in the master seed.
    pub fn build(&self, spec: &NetSpec, std: f64, seed: u64) -> Result<WeightStack> {
        let mut rng = Rng::from_seed(derive_seed(seed, INIT_SEED_STREAM));
        Ok(match self {
            InitKind::Layerwise => init::gaussian_layerwise(spec, std, &mut rng)?,
            InitKind::Balanced => init::balanced_init_gaussian(spec, std, &mut rng)?,
            InitKind::Identity => init::identity_residual(spec)?,
        })
    }

    /// The equivalent sweep scheme; `identity` has no random scale and
    /// cannot be swept.
    pub fn scheme(&self) -> Result<InitScheme> {
        match self {
            InitKind::Layerwise => Ok(InitScheme::Layerwise),
            InitKind::Balanced => Ok(InitScheme::Balanced),
            InitKind::Identity => Err(CliError::Usage(
                "--init identity has no sampling scale; use layerwise or balanced".into(),
            )),
        }
    }

    /// The margin-sampling mode this scheme is scored under.
    pub fn margin_mode(&self) -> Result<MarginMode> {
        match self {
            InitKind::Balanced => Ok(MarginMode::BalancedFloor),
            InitKind::Layerwise => Ok(MarginMode::LayerwiseSign),
            InitKind::Identity => Err(CliError::Usage(
                "--init identity is deterministic; margin sampling needs a random scheme".into(),
            )),
        }
    }
}

/// Numerical integrators for the flow comparison.
#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Classical fourth-order Runge-Kutta.
    Rk4,
    /// Explicit Euler.
    Euler,
}

/// Flags for `whiten`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct WhitenArgs {
    /// Input CSV, one sample per row.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Number of leading feature columns.
    #[arg(long, value_name = "K")]
    pub features: usize,
    /// Number of label columns following the features.
    #[arg(long, default_value_t = 1, value_name = "L")]
    #[serde(default = "one")]
    pub labels: usize,
    /// Treat the first row as a header.
    #[arg(long)]
    #[serde(default)]
    pub header: bool,
    /// Also rescale the labels to a unit-norm cross moment.
    #[arg(long)]
    #[serde(default)]
    pub rescale_labels: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn one() -> usize {
    1
}

/// Flags for `train`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub target: TargetArgs,
    /// Initialization scheme.
    #[arg(long, value_enum, default_value_t = InitKind::Balanced)]
    #[serde(default = "default_init")]
    pub init: InitKind,
    /// Entry scale for random initializations.
    #[arg(long, default_value_t = 1e-2, value_name = "S")]
    #[serde(default = "default_std")]
    pub std: f64,
    /// Step size.
    #[arg(long, value_name = "ETA")]
    pub lr: f64,
    /// Stop once the loss reaches this threshold.
    #[arg(long, default_value_t = 1e-5)]
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 1_000_000)]
    #[serde(default = "default_cap")]
    pub max_iters: usize,
    /// Record diagnostics every this many iterations (0 = loss only).
    #[arg(long, default_value_t = 1, value_name = "K")]
    #[serde(default = "one")]
    pub monitor_stride: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn default_init() -> InitKind {
    InitKind::Balanced
}

fn default_std() -> f64 {
    1e-2
}

fn default_eps() -> f64 {
    1e-5
}

fn default_cap() -> usize {
    1_000_000
}

/// Flags for `certificate`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CertificateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub target: TargetArgs,
    /// Initialization scheme the certificate is evaluated at.
    #[arg(long, value_enum, default_value_t = InitKind::Balanced)]
    #[serde(default = "default_init")]
    pub init: InitKind,
    /// Entry scale for random initializations.
    #[arg(long, default_value_t = 1e-2, value_name = "S")]
    #[serde(default = "default_std")]
    pub std: f64,
    /// Threshold the iteration bound refers to.
    #[arg(long, default_value_t = 1e-5)]
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

/// Flags for `verify`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub target: TargetArgs,
    /// Initialization scheme.
    #[arg(long, value_enum, default_value_t = InitKind::Balanced)]
    #[serde(default = "default_init")]
    pub init: InitKind,
    /// Entry scale for random initializations.
    #[arg(long, default_value_t = 1e-2, value_name = "S")]
    #[serde(default = "default_std")]
    pub std: f64,
    /// Step size; defaults to the certificate's largest certified one.
    #[arg(long, value_name = "ETA")]
    #[serde(default)]
    pub lr: Option<f64>,
    /// Threshold the certificate refers to.
    #[arg(long, default_value_t = 1e-5)]
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Iteration cap for the checked run.
    #[arg(long, default_value_t = 1_000_000)]
    #[serde(default = "default_cap")]
    pub max_iters: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

/// Flags for `sweep`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub target: TargetArgs,
    /// Random initialization scheme to sweep (layerwise or balanced).
    #[arg(long, value_enum, default_value_t = InitKind::Balanced)]
    #[serde(default = "default_init")]
    pub init: InitKind,
    /// Initialization scales to sweep (comma separated).
    #[arg(long, value_delimiter = ',', value_name = "S1,S2,...", required = true)]
    pub std_grid: Vec<f64>,
    /// Step sizes to race per scale; defaults to the built-in log grid.
    #[arg(long, value_delimiter = ',', value_name = "E1,E2,...")]
    #[serde(default)]
    pub lr_grid: Option<Vec<f64>>,
    /// Convergence threshold.
    #[arg(long, default_value_t = 1e-5)]
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Iteration cap per cell.
    #[arg(long, default_value_t = 1_000_000)]
    #[serde(default = "default_cap")]
    pub max_iters: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

/// Flags for `mc-balance`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct McBalanceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    /// Entry scale of the layerwise Gaussian draws.
    #[arg(long, value_name = "S")]
    pub std: f64,
    /// Balancedness threshold counted as success.
    #[arg(long, value_name = "DELTA")]
    pub delta: f64,
    /// Number of Monte Carlo draws.
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn default_trials() -> usize {
    1000
}

/// Flags for `mc-margin`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct McMarginArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub target: TargetArgs,
    /// Scheme whose margin probability is estimated: balanced draws are
    /// scored against the certified floor, layerwise against zero.
    #[arg(long, value_enum, default_value_t = InitKind::Balanced)]
    #[serde(default = "default_init")]
    pub init: InitKind,
    /// Sampling standard deviation.
    #[arg(long, value_name = "S")]
    pub std: f64,
    /// Number of Monte Carlo draws.
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

/// Flags for `fail-unbalanced`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct FailUnbalancedArgs {
    /// Deficiency margin of the construction (clamped up to 3/4).
    #[arg(long, default_value_t = 0.75, value_name = "C")]
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Step size.
    #[arg(long, value_name = "ETA")]
    pub lr: f64,
    /// Depth N (must be even).
    #[arg(long, default_value_t = 2, value_name = "N")]
    #[serde(default = "two")]
    pub depth: usize,
    /// Internal width d of the hidden background block.
    #[arg(long, default_value_t = 1, value_name = "D")]
    #[serde(default = "one")]
    pub dims: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn default_margin() -> f64 {
    0.75
}

fn two() -> usize {
    2
}

/// Flags for `fail-margin`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct FailMarginArgs {
    /// Width d of every layer (at least 2).
    #[arg(long, value_name = "D")]
    pub dims: usize,
    /// Depth N (must be even).
    #[arg(long, default_value_t = 2, value_name = "N")]
    #[serde(default = "two")]
    pub depth: usize,
    /// Magnitude of the target's negative eigenvalue.
    #[arg(long, default_value_t = 1.0, value_name = "L")]
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Step size.
    #[arg(long, value_name = "ETA")]
    pub lr: f64,
    /// Number of gradient steps.
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_steps_small")]
    pub steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_steps_small() -> usize {
    1000
}

/// Flags for `flow-compare`.
#[derive(clap::Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct FlowCompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub target: TargetArgs,
    /// Initialization scheme (must start balanced for the flow to apply).
    #[arg(long, value_enum, default_value_t = InitKind::Balanced)]
    #[serde(default = "default_init")]
    pub init: InitKind,
    /// Entry scale for random initializations.
    #[arg(long, default_value_t = 1e-2, value_name = "S")]
    #[serde(default = "default_std")]
    pub std: f64,
    /// Gradient-descent step size.
    #[arg(long, value_name = "ETA")]
    pub lr: f64,
    /// Number of gradient steps to compare.
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "default_steps_large")]
    pub steps: usize,
    /// Integrator step in flow time; defaults to --lr.
    #[arg(long, value_name = "H")]
    #[serde(default)]
    pub flow_h: Option<f64>,
    /// Integration method.
    #[arg(long, value_enum, default_value_t = MethodKind::Rk4)]
    #[serde(default = "default_method")]
    pub method: MethodKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn default_steps_large() -> usize {
    10_000
}

fn default_method() -> MethodKind {
    MethodKind::Rk4
}

/// Canonical JSON for a run configuration (also what gets hashed).
pub fn config_json(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("run configuration serializes")
}

/// First 16 hex characters of the SHA-256 of the canonical config JSON;
/// artifact filenames embed it so distinct runs never collide.
pub fn config_hash(config: &RunConfig) -> String {
    let json = serde_json::to_string(config).expect("run configuration serializes");
    let digest = Sha256::digest(json.as_bytes());
    hex::encode(&digest[..8])
}

/// Loads a run configuration saved by a previous invocation.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(argv).expect("argv should parse");
        cli.command.expect("a subcommand was given")
    }

    #[test]
    fn train_flags_parse_into_typed_values() {
        let config = parse(&[
            "dln", "train", "--depth", "2", "--dims", "1,1,1", "--phi-scalar", "1", "--init",
            "identity", "--lr", "0.01", "--eps", "1e-5",
        ]);
        let RunConfig::Train(args) = &config else {
            panic!("expected the train subcommand, got {}", config.name())
        };
        assert_eq!(args.net.dims, vec![1, 1, 1]);
        assert_eq!(args.net.depth, Some(2));
        assert_eq!(args.target.phi_scalar, Some(1.0));
        assert_eq!(args.init, InitKind::Identity);
        assert_eq!(args.lr, 0.01);
        assert_eq!(args.eps, 1e-5);
        assert_eq!(args.common.seed, 42, "seed must default to a fixed constant");
        assert_eq!(args.common.out, PathBuf::from("out"));
        assert!(!args.common.plot);
    }

    #[test]
    fn negative_scalar_targets_parse() {
        let config = parse(&[
            "dln", "certificate", "--dims", "2,2,2", "--phi-scalar", "-1", "--init", "identity",
        ]);
        let RunConfig::Certificate(args) = &config else { panic!("expected certificate") };
        assert_eq!(args.target.phi_scalar, Some(-1.0));
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = parse(&[
            "dln",
            "sweep",
            "--dims",
            "4,3,1",
            "--phi-kind",
            "scalar-row",
            "--init",
            "layerwise",
            "--std-grid",
            "0.01,0.1,1",
            "--seed",
            "7",
        ]);
        let json = config_json(&config);
        let back: RunConfig = serde_json::from_str(&json).expect("saved config should load");
        assert_eq!(back, config, "replayed config must equal the original");
        assert_eq!(config_hash(&back), config_hash(&config));
        assert!(json.contains("\"subcommand\": \"sweep\""), "tagged by subcommand: {json}");
        assert!(json.contains("\"phi_kind\": \"scalar-row\""));
    }

    #[test]
    fn hash_distinguishes_configs_and_is_16_hex_chars() {
        let a = parse(&["dln", "mc-balance", "--dims", "4,4,4", "--std", "0.1", "--delta", "1.0"]);
        let b = parse(&["dln", "mc-balance", "--dims", "4,4,4", "--std", "0.2", "--delta", "1.0"]);
        let ha = config_hash(&a);
        assert_eq!(ha.len(), 16);
        assert!(ha.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(ha, config_hash(&b), "different flags must hash differently");
        assert_eq!(ha, config_hash(&a), "hashing must be deterministic");
    }

    #[test]
    fn depth_and_dims_must_agree() {
        let config = parse(&[
            "dln", "train", "--depth", "3", "--dims", "1,1,1", "--phi-scalar", "1", "--lr", "0.1",
        ]);
        let RunConfig::Train(args) = &config else { panic!("expected train") };
        let err = args.net.spec().unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "mismatch is a usage error: {err}");
    }

    #[test]
    fn target_requires_exactly_one_source() {
        let none = TargetArgs { phi_scalar: None, phi_kind: None, phi_radius: None, phi_file: None };
        assert!(none.resolve(2, 2, 42).is_err(), "no source must be rejected");
        let both = TargetArgs {
            phi_scalar: Some(1.0),
            phi_kind: Some(PhiKind::Random),
            phi_radius: None,
            phi_file: None,
        };
        assert!(both.resolve(2, 2, 42).is_err(), "two sources must be rejected");
        let radius_misuse = TargetArgs {
            phi_scalar: Some(1.0),
            phi_kind: None,
            phi_radius: Some(0.5),
            phi_file: None,
        };
        assert!(radius_misuse.resolve(2, 2, 42).is_err(), "stray --phi-radius must be rejected");
    }

    #[test]
    fn scalar_target_fills_the_rectangular_diagonal() {
        let args = TargetArgs {
            phi_scalar: Some(-2.0),
            phi_kind: None,
            phi_radius: None,
            phi_file: None,
        };
        let phi = args.resolve(2, 3, 42).unwrap();
        assert_eq!(phi.shape(), (2, 3));
        assert_eq!(phi.get(0, 0), -2.0);
        assert_eq!(phi.get(1, 1), -2.0);
        assert_eq!(phi.get(0, 1), 0.0);
        assert_eq!(phi.get(1, 2), 0.0);
    }

    #[test]
    fn synthetic_targets_are_deterministic_in_the_seed() {
        let args = TargetArgs {
            phi_scalar: None,
            phi_kind: Some(PhiKind::Random),
            phi_radius: None,
            phi_file: None,
        };
        let a = args.resolve(2, 3, 9).unwrap();
        let b = args.resolve(2, 3, 9).unwrap();
        let c = args.resolve(2, 3, 10).unwrap();
        assert_eq!(a.frob_dist(&b), 0.0, "same seed, same target");
        assert!(a.frob_dist(&c) > 0.0, "different seed, different target");
    }

    #[test]
    fn identity_init_builds_and_random_schemes_differ_by_seed() {
        let spec = NetSpec::new(vec![2, 2, 2]).unwrap();
        let w = InitKind::Identity.build(&spec, 0.5, 1).unwrap();
        assert_eq!(w.end_to_end().frob_dist(&Matrix::identity(2)), 0.0);
        let a = InitKind::Balanced.build(&spec, 0.5, 1).unwrap();
        let b = InitKind::Balanced.build(&spec, 0.5, 2).unwrap();
        assert!(a.end_to_end().frob_dist(&b.end_to_end()) > 0.0);
        assert!(InitKind::Identity.scheme().is_err(), "identity cannot be swept");
        assert!(InitKind::Identity.margin_mode().is_err());
    }
}
