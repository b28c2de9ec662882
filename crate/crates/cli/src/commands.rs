//! Subcommand implementations. Each command resolves its flags into core
//! calls, writes its numeric artifacts (CSV/JSON, optionally SVG) into
//! the output directory under names keyed by the configuration hash, and
//! signals its verdict through the exit code: plumbing problems are
//! ordinary errors, while a theory check that should have held and did
//! not is a distinct verdict failure.

use std::path::{Path, PathBuf};

use serde::Serialize;

use dln_core::experiments::{self, FailureReport, InitScheme, MarginFailureReport, MCReport};
use dln_core::flow::{self, FlowConfig, FlowMethod};
use dln_core::network::{self, MonitorConfig, TrainConfig, TrainTrace};
use dln_core::{data, theory, Matrix, Problem};

use crate::config::{
    config_json, config_hash, CertificateArgs, FailMarginArgs, FailUnbalancedArgs,
    FlowCompareArgs, McBalanceArgs, McMarginArgs, MethodKind, RunConfig, SweepArgs, TrainArgs,
    VerifyArgs, WhitenArgs,
};
use crate::error::{CliError, Result};
use crate::files::{self, f17, CsvLayout};
use crate::plot::{emit_plot, PlotSpec, Series};

/// Where a run's artifacts live: the output directory plus the filename
/// stem `{subcommand}-{confighash}` shared by every file the run writes.
pub struct Workspace {
    dir: PathBuf,
    stem: String,
}

impl Workspace {
    /// Creates the output directory and records the run configuration as
    /// `{stem}.config.json` so the run can be replayed with `--config`.
    pub fn create(config: &RunConfig) -> Result<Self> {
        let ws = Workspace {
            dir: config.common().out.clone(),
            stem: format!("{}-{}", config.name(), config_hash(config)),
        };
        let mut json = config_json(config);
        json.push('\n');
        files::write_text(&ws.path("config", "json"), &json)?;
        Ok(ws)
    }

    /// Full path of the artifact `{stem}.{kind}.{ext}`.
    pub fn path(&self, kind: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{kind}.{ext}", self.stem))
    }
}

/// Runs one fully resolved configuration, writing all of its artifacts.
/// `Err(CliError::Verdict(_))` means the artifacts were written but a
/// theory check failed.
pub fn dispatch(config: &RunConfig) -> Result<()> {
    let ws = Workspace::create(config)?;
    match config {
        RunConfig::Whiten(args) => whiten_cmd(args, &ws),
        RunConfig::Train(args) => train_cmd(args, &ws),
        RunConfig::Certificate(args) => certificate_cmd(args, &ws),
        RunConfig::Verify(args) => verify_cmd(args, &ws),
        RunConfig::Sweep(args) => sweep_cmd(args, &ws),
        RunConfig::McBalance(args) => mc_balance_cmd(args, &ws),
        RunConfig::McMargin(args) => mc_margin_cmd(args, &ws),
        RunConfig::FailUnbalanced(args) => fail_unbalanced_cmd(args, &ws),
        RunConfig::FailMargin(args) => fail_margin_cmd(args, &ws),
        RunConfig::FlowCompare(args) => flow_compare_cmd(args, &ws),
    }
}

fn write_json<T: Serialize>(ws: &Workspace, kind: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    files::write_text(&ws.path(kind, "json"), &text)
}

#[derive(Serialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    /// Row-major entries, one inner vector per row.
    data: Vec<Vec<f64>>,
}

fn matrix_json(m: &Matrix) -> MatrixJson {
    MatrixJson {
        rows: m.rows(),
        cols: m.cols(),
        data: (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect(),
    }
}

/// Downsamples a curve to at most `limit` points (first and last kept)
/// so plots of long runs stay small; the CSV keeps every sample.
fn thin(points: Vec<(f64, f64)>, limit: usize) -> Vec<(f64, f64)> {
    if points.len() <= limit || limit < 2 {
        return points;
    }
    let last = points.len() - 1;
    let stride = last.div_ceil(limit - 1);
    let mut out: Vec<(f64, f64)> = points.iter().step_by(stride).copied().collect();
    if out.last() != Some(&points[last]) {
        out.push(points[last]);
    }
    out
}

fn loss_plot(title: &str, series: Vec<Series>) -> PlotSpec {
    let log_y = series.iter().flat_map(|s| &s.points).any(|&(_, y)| y > 0.0);
    PlotSpec {
        title: title.to_string(),
        x_label: "iteration".into(),
        y_label: "loss".into(),
        log_x: false,
        log_y,
        series,
    }
}

fn curve(losses: &[f64]) -> Vec<(f64, f64)> {
    thin(
        losses.iter().enumerate().map(|(t, &l)| (t as f64, l)).collect(),
        2000,
    )
}

// ---------------------------------------------------------------------
// whiten

#[derive(Serialize)]
struct MomentsJson {
    samples: usize,
    lxx: MatrixJson,
    lyx: MatrixJson,
    lyy: MatrixJson,
    opt_const: f64,
}

#[derive(Serialize)]
struct ProblemJson {
    phi: MatrixJson,
    opt_const: f64,
    /// Factor applied to the labels (1 when --rescale-labels is off).
    label_factor: f64,
    /// `||Lambda_xx - I||_F` after whitening.
    whiteness_gap: f64,
}

fn whiten_cmd(args: &WhitenArgs, ws: &Workspace) -> Result<()> {
    let layout = CsvLayout::split(args.features, args.labels, args.header);
    let ds = files::load_csv(&args.data, &layout)?;
    let (transform, whitened) = data::whiten(&ds)?;
    let (label_factor, whitened) = if args.rescale_labels {
        data::rescale_labels(&whitened)?
    } else {
        (1.0, whitened)
    };
    let moments = data::empirical_moments(&whitened);
    let problem = data::problem_from_moments(&moments)?;
    let gap = moments.lxx.frob_dist(&Matrix::identity(moments.lxx.rows()));

    files::save_dataset_csv(&whitened, &ws.path("whitened", "csv"))?;
    files::save_matrix_csv(&transform, &ws.path("transform", "csv"))?;
    write_json(
        ws,
        "moments",
        &MomentsJson {
            samples: whitened.samples(),
            lxx: matrix_json(&moments.lxx),
            lyx: matrix_json(&moments.lyx),
            lyy: matrix_json(&moments.lyy),
            opt_const: moments.opt_const,
        },
    )?;
    write_json(
        ws,
        "problem",
        &ProblemJson {
            phi: matrix_json(&problem.phi),
            opt_const: problem.opt_const,
            label_factor,
            whiteness_gap: gap,
        },
    )?;
    println!(
        "whitened {} samples ({} features, {} labels); ||Lambda_xx - I||_F = {gap:.3e}",
        whitened.samples(),
        args.features,
        args.labels
    );
    println!(
        "target ||Phi||_F = {:.6e}, objective offset {:.6e}",
        problem.phi.frob_norm(),
        problem.opt_const
    );
    Ok(())
}

// ---------------------------------------------------------------------
// train

fn write_trace_csv(trace: &TrainTrace, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["t", "loss", "balance", "sigma_min", "margin", "layer_sigma_max"])?;
    let cell = |v: Option<f64>| v.map(f17).unwrap_or_default();
    if trace.records.is_empty() {
        for (t, &loss) in trace.losses.iter().enumerate() {
            writer.write_record([
                t.to_string(),
                f17(loss),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
    } else {
        for r in &trace.records {
            writer.write_record([
                r.t.to_string(),
                f17(r.loss),
                cell(r.balance),
                cell(r.sigma_min),
                cell(r.margin),
                cell(r.layer_sigma_max),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TrainSummaryJson {
    status: &'static str,
    iterations: usize,
    initial_loss: f64,
    final_loss: f64,
    eta: f64,
    eps: f64,
    dims: Vec<usize>,
    seed: u64,
}

fn train_cmd(args: &TrainArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let phi = args.target.resolve(spec.d_out(), spec.d_in(), args.common.seed)?;
    let problem = Problem::from_target(phi);
    let w0 = args.init.build(&spec, args.std, args.common.seed)?;
    let monitors = if args.monitor_stride == 0 {
        MonitorConfig::none()
    } else {
        MonitorConfig::all_with_stride(args.monitor_stride)
    };
    let mut config = TrainConfig::with_monitors(args.lr, monitors);
    config.eps = args.eps;
    config.max_iters = args.max_iters;
    let trace = network::train(&w0, &problem, &config)?;

    write_trace_csv(&trace, &ws.path("trace", "csv"))?;
    write_json(
        ws,
        "summary",
        &TrainSummaryJson {
            status: trace.status.as_str(),
            iterations: trace.t_final(),
            initial_loss: trace.losses[0],
            final_loss: trace.final_loss(),
            eta: args.lr,
            eps: args.eps,
            dims: spec.dims().to_vec(),
            seed: args.common.seed,
        },
    )?;
    if args.common.plot {
        let series = vec![Series {
            name: "loss".into(),
            points: curve(&trace.losses),
            capped: trace.status == network::TrainStatus::IterationCap,
        }];
        emit_plot(&loss_plot("training loss", series), &ws.path("loss", "svg"))?;
    }
    println!(
        "{} after {} iterations: loss {:.6e} -> {:.6e}",
        trace.status.as_str(),
        trace.t_final(),
        trace.losses[0],
        trace.final_loss()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// certificate

#[derive(Serialize)]
struct RateCertificateJson {
    depth: usize,
    phi_frob: f64,
    margin: f64,
    loss0: f64,
    balance0: f64,
    eps: f64,
    required_balance: Option<f64>,
    eta_max: Option<f64>,
    t_bound: Option<usize>,
    margin_positive: bool,
    balanced_enough: bool,
    hidden_dims_ok: bool,
    satisfied: bool,
}

fn rate_certificate_json(cert: &theory::RateCertificate) -> RateCertificateJson {
    RateCertificateJson {
        depth: cert.depth,
        phi_frob: cert.phi_frob,
        margin: cert.margin,
        loss0: cert.loss0,
        balance0: cert.balance0,
        eps: cert.eps,
        required_balance: cert.required_balance,
        eta_max: cert.eta_max,
        t_bound: cert.t_bound,
        margin_positive: cert.margin_positive,
        balanced_enough: cert.balanced_enough,
        hidden_dims_ok: cert.hidden_dims_ok,
        satisfied: cert.satisfied(),
    }
}

fn certificate_cmd(args: &CertificateArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let phi = args.target.resolve(spec.d_out(), spec.d_in(), args.common.seed)?;
    let problem = Problem::from_target(phi);
    let w0 = args.init.build(&spec, args.std, args.common.seed)?;
    let cert = theory::margin_rate_certificate(&w0, &problem, args.eps)?;
    write_json(ws, "certificate", &rate_certificate_json(&cert))?;
    println!(
        "deficiency margin {:.6e}, balancedness gap {:.3e}; satisfied: {}",
        cert.margin,
        cert.balance0,
        cert.satisfied()
    );
    match (cert.eta_max, cert.t_bound) {
        (Some(eta), Some(t)) => println!(
            "certified step size {:.6e} reaches loss {:.1e} within {t} iterations",
            eta, cert.eps
        ),
        _ => println!("no step size is certified (the margin is not positive)"),
    }
    Ok(())
}

// ---------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct CheckJson {
    name: &'static str,
    checked: usize,
    violations: usize,
    worst_residual: f64,
    worst_t: Option<usize>,
    pass: bool,
}

fn check_json(c: &theory::CheckReport) -> CheckJson {
    CheckJson {
        name: c.name,
        checked: c.checked,
        violations: c.violations,
        worst_residual: c.worst_residual,
        worst_t: c.worst_t,
        pass: c.pass,
    }
}

#[derive(Serialize)]
struct VerifyJson {
    eta: f64,
    status: &'static str,
    iterations: usize,
    final_loss: f64,
    applicable: bool,
    pass: bool,
    certificate: RateCertificateJson,
    descent: CheckJson,
    envelope: CheckJson,
    balance: CheckJson,
    layer_norms: CheckJson,
    margin: CheckJson,
}

fn verify_cmd(args: &VerifyArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let phi = args.target.resolve(spec.d_out(), spec.d_in(), args.common.seed)?;
    let problem = Problem::from_target(phi);
    let w0 = args.init.build(&spec, args.std, args.common.seed)?;
    let cert = theory::margin_rate_certificate(&w0, &problem, args.eps)?;
    let eta = match args.lr.or(cert.eta_max) {
        Some(eta) => eta,
        None => {
            return Err(CliError::Usage(
                "the initialization certifies no step size (margin <= 0); pass --lr".into(),
            ))
        }
    };
    let mut config = TrainConfig::with_monitors(eta, MonitorConfig::all());
    config.eps = args.eps;
    config.max_iters = args.max_iters;
    let trace = network::train(&w0, &problem, &config)?;
    let report = theory::verify_trajectory(&trace, &problem, &cert)?;

    write_trace_csv(&trace, &ws.path("trace", "csv"))?;
    write_json(
        ws,
        "verify",
        &VerifyJson {
            eta,
            status: trace.status.as_str(),
            iterations: trace.t_final(),
            final_loss: trace.final_loss(),
            applicable: report.applicable,
            pass: report.pass,
            certificate: rate_certificate_json(&cert),
            descent: check_json(&report.descent),
            envelope: check_json(&report.envelope),
            balance: check_json(&report.balance),
            layer_norms: check_json(&report.layer_norms),
            margin: check_json(&report.margin),
        },
    )?;

    println!(
        "{} after {} iterations at step size {eta:.6e}; final loss {:.6e}",
        trace.status.as_str(),
        trace.t_final(),
        trace.final_loss()
    );
    for check in [
        &report.descent,
        &report.envelope,
        &report.balance,
        &report.layer_norms,
        &report.margin,
    ] {
        println!(
            "  {:<12} {} ({} checked, {} violations, worst residual {:.3e})",
            check.name,
            if check.pass { "pass" } else { "FAIL" },
            check.checked,
            check.violations,
            check.worst_residual
        );
    }
    if !report.applicable {
        println!(
            "guarantee not applicable here (certificate unsatisfied or step size above \
             the certified maximum); the checks are vacuous"
        );
        return Ok(());
    }
    if report.pass {
        println!("verified: every guaranteed inequality held along the run");
        Ok(())
    } else {
        Err(CliError::Verdict(
            "a guaranteed inequality was violated along the run (see the verify artifact)".into(),
        ))
    }
}

// ---------------------------------------------------------------------
// sweep

fn scheme_name(scheme: InitScheme) -> &'static str {
    match scheme {
        InitScheme::Layerwise => "layerwise",
        InitScheme::Balanced => "balanced",
    }
}

#[derive(Serialize)]
struct SweepCellJson {
    std: f64,
    best_lr: Option<f64>,
    iterations: Option<usize>,
}

#[derive(Serialize)]
struct SweepJson {
    scheme: &'static str,
    eps: f64,
    cap: usize,
    converged_cells: usize,
    cells: Vec<SweepCellJson>,
}

fn sweep_cmd(args: &SweepArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let scheme = args.init.scheme()?;
    let phi = args.target.resolve(spec.d_out(), spec.d_in(), args.common.seed)?;
    let lr_grid = args.lr_grid.clone().unwrap_or_else(experiments::default_lr_grid);
    let result = experiments::std_sweep(
        &spec,
        &phi,
        scheme,
        &args.std_grid,
        &lr_grid,
        args.eps,
        args.max_iters,
        args.common.seed,
    )?;

    let mut writer = csv::Writer::from_path(ws.path("sweep", "csv"))?;
    writer.write_record(["std", "best_lr", "iterations"])?;
    for cell in &result.cells {
        writer.write_record([
            f17(cell.std),
            cell.best_lr.map(f17).unwrap_or_default(),
            cell.iterations.map(|i| i.to_string()).unwrap_or_default(),
        ])?;
    }
    writer.flush()?;

    let converged = result.cells.iter().filter(|c| c.iterations.is_some()).count();
    write_json(
        ws,
        "sweep",
        &SweepJson {
            scheme: scheme_name(result.scheme),
            eps: args.eps,
            cap: args.max_iters,
            converged_cells: converged,
            cells: result
                .cells
                .iter()
                .map(|c| SweepCellJson {
                    std: c.std,
                    best_lr: c.best_lr,
                    iterations: c.iterations,
                })
                .collect(),
        },
    )?;

    if args.common.plot {
        let mut series = Vec::new();
        let hits: Vec<(f64, f64)> = result
            .cells
            .iter()
            .filter_map(|c| c.iterations.map(|i| (c.std, i as f64)))
            .collect();
        if !hits.is_empty() {
            series.push(Series { name: "converged".into(), points: hits, capped: false });
        }
        let misses: Vec<(f64, f64)> = result
            .cells
            .iter()
            .filter(|c| c.iterations.is_none())
            .map(|c| (c.std, args.max_iters as f64))
            .collect();
        if !misses.is_empty() {
            series.push(Series { name: "hit the cap".into(), points: misses, capped: true });
        }
        let plot = PlotSpec {
            title: format!("iterations to loss {:.0e} ({})", args.eps, scheme_name(result.scheme)),
            x_label: "initialization scale".into(),
            y_label: "iterations".into(),
            log_x: true,
            log_y: true,
            series,
        };
        emit_plot(&plot, &ws.path("sweep", "svg"))?;
    }

    for cell in &result.cells {
        match (cell.best_lr, cell.iterations) {
            (Some(lr), Some(iters)) => {
                println!("std {:.4e}: converged in {iters} iterations at step size {lr:.4e}", cell.std)
            }
            _ => println!(
                "std {:.4e}: no convergence within {} iterations at any step size",
                cell.std, args.max_iters
            ),
        }
    }
    println!("{converged}/{} grid points converged", result.cells.len());
    Ok(())
}

// ---------------------------------------------------------------------
// Monte Carlo estimates

#[derive(Serialize)]
struct McJson {
    quantity: &'static str,
    trials: usize,
    successes: usize,
    empirical_p: f64,
    bound: f64,
    slack: f64,
    /// False only when the empirical frequency undershoots the certified
    /// lower bound by more than the sampling slack.
    consistent: bool,
}

fn mc_verdict(
    ws: &Workspace,
    quantity: &'static str,
    report: &MCReport,
) -> Result<()> {
    let consistent = report.empirical_p >= report.bound - report.slack;
    write_json(
        ws,
        "report",
        &McJson {
            quantity,
            trials: report.trials,
            successes: report.successes,
            empirical_p: report.empirical_p,
            bound: report.bound,
            slack: report.slack,
            consistent,
        },
    )?;
    println!(
        "{quantity}: {}/{} draws succeeded (frequency {:.4}); certified lower bound {:.4}, \
         sampling slack {:.4}",
        report.successes, report.trials, report.empirical_p, report.bound, report.slack
    );
    if consistent {
        println!("the empirical frequency is consistent with the bound");
        Ok(())
    } else {
        Err(CliError::Verdict(format!(
            "empirical frequency {:.4} falls more than the slack below the bound {:.4}",
            report.empirical_p, report.bound
        )))
    }
}

fn mc_balance_cmd(args: &McBalanceArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let report = experiments::mc_balance_probability(
        &spec,
        args.std,
        args.delta,
        args.trials,
        args.common.seed,
    )?;
    mc_verdict(ws, "approximate balancedness", &report)
}

fn mc_margin_cmd(args: &McMarginArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let mode = args.init.margin_mode()?;
    let phi = args.target.resolve(spec.d_out(), spec.d_in(), args.common.seed)?;
    let report = experiments::mc_margin_probability(
        &spec,
        &phi,
        mode,
        args.std,
        args.trials,
        args.common.seed,
    )?;
    mc_verdict(ws, "positive deficiency margin", &report)
}

// ---------------------------------------------------------------------
// failure constructions

fn write_losses_csv(losses: &[f64], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["t", "loss"])?;
    for (t, &loss) in losses.iter().enumerate() {
        writer.write_record([t.to_string(), f17(loss)])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FailureJson {
    c_clamped: f64,
    amplitude: f64,
    loss_floor: f64,
    initial_margin: f64,
    steps: usize,
    final_loss: f64,
    floor_held: bool,
    strictly_increasing: bool,
    background_fixed: bool,
    diverged: bool,
    pass: bool,
}

fn fail_unbalanced_cmd(args: &FailUnbalancedArgs, ws: &Workspace) -> Result<()> {
    let report: FailureReport =
        experiments::failure_unbalanced(args.margin, args.lr, args.depth, args.dims)?;
    write_losses_csv(&report.losses, &ws.path("losses", "csv"))?;
    write_json(
        ws,
        "report",
        &FailureJson {
            c_clamped: report.c_clamped,
            amplitude: report.amplitude,
            loss_floor: report.loss_floor,
            initial_margin: report.initial_margin,
            steps: report.losses.len() - 1,
            final_loss: *report.losses.last().expect("the trace records the start"),
            floor_held: report.floor_held,
            strictly_increasing: report.strictly_increasing,
            background_fixed: report.background_fixed,
            diverged: report.diverged,
            pass: report.pass,
        },
    )?;
    if args.common.plot {
        let series = vec![Series {
            name: "loss".into(),
            points: curve(&report.losses),
            capped: false,
        }];
        emit_plot(&loss_plot("divergence from an unbalanced start", series), &ws.path("losses", "svg"))?;
    }
    println!(
        "margin {:.4} at the start, loss floor {}, {} steps recorded",
        report.initial_margin,
        report.loss_floor,
        report.losses.len() - 1
    );
    if report.pass {
        println!(
            "verdict: loss stayed above the floor, grew strictly, and diverged as guaranteed"
        );
        Ok(())
    } else {
        Err(CliError::Verdict(format!(
            "the divergence construction misbehaved (floor held: {}, strictly increasing: {}, \
             diverged: {})",
            report.floor_held, report.strictly_increasing, report.diverged
        )))
    }
}

#[derive(Serialize)]
struct MarginFailureJson {
    loss_floor: f64,
    steps: usize,
    final_loss: f64,
    floor_held: bool,
    gradient_nonzero_at_start: bool,
    shared_diagonal_residual: f64,
    diagonal_form_held: bool,
    pass: bool,
}

fn fail_margin_cmd(args: &FailMarginArgs, ws: &Workspace) -> Result<()> {
    let report: MarginFailureReport =
        experiments::failure_no_margin(args.dims, args.depth, args.lr, args.lambda, args.steps)?;
    write_losses_csv(&report.losses, &ws.path("losses", "csv"))?;
    write_json(
        ws,
        "report",
        &MarginFailureJson {
            loss_floor: report.loss_floor,
            steps: report.losses.len() - 1,
            final_loss: *report.losses.last().expect("the trace records the start"),
            floor_held: report.floor_held,
            gradient_nonzero_at_start: report.gradient_nonzero_at_start,
            shared_diagonal_residual: report.shared_diagonal_residual,
            diagonal_form_held: report.diagonal_form_held,
            pass: report.pass,
        },
    )?;
    if args.common.plot {
        let series = vec![Series {
            name: "loss".into(),
            points: curve(&report.losses),
            capped: false,
        }];
        emit_plot(&loss_plot("loss against its floor", series), &ws.path("losses", "svg"))?;
    }
    if report.pass {
        println!(
            "verdict: loss floor {} held over {} steps (final loss {:.6e})",
            report.loss_floor,
            report.losses.len() - 1,
            report.losses.last().expect("non-empty trace")
        );
        Ok(())
    } else {
        Err(CliError::Verdict(format!(
            "loss floor {} violated or the diagonal form was lost (floor held: {}, residual \
             {:.3e})",
            report.loss_floor, report.floor_held, report.shared_diagonal_residual
        )))
    }
}

// ---------------------------------------------------------------------
// flow-compare

#[derive(Serialize)]
struct FlowCompareJson {
    eta: f64,
    flow_h: f64,
    method: &'static str,
    steps: usize,
    substeps_per_step: usize,
    max_deviation: f64,
    final_gd_loss: f64,
    final_flow_loss: f64,
}

fn flow_compare_cmd(args: &FlowCompareArgs, ws: &Workspace) -> Result<()> {
    let spec = args.net.spec()?;
    let phi = args.target.resolve(spec.d_out(), spec.d_in(), args.common.seed)?;
    let problem = Problem::from_target(phi);
    let w0 = args.init.build(&spec, args.std, args.common.seed)?;
    let h = args.flow_h.unwrap_or(args.lr);
    let (method, method_name) = match args.method {
        MethodKind::Rk4 => (FlowMethod::Rk4, "rk4"),
        MethodKind::Euler => (FlowMethod::Euler, "euler"),
    };
    let config = FlowConfig { method, h, record_stride: 1 };
    let report = flow::compare_flow_gd(&w0, &problem, args.lr, args.steps, &config)?;

    let mut writer = csv::Writer::from_path(ws.path("compare", "csv"))?;
    writer.write_record(["t", "tau", "gd_loss", "flow_loss", "flow_sigma_min", "deviation"])?;
    for row in &report.rows {
        writer.write_record([
            row.t.to_string(),
            f17(row.tau),
            f17(row.gd_loss),
            f17(row.flow_loss),
            f17(row.flow_sigma_min),
            f17(row.deviation),
        ])?;
    }
    writer.flush()?;

    let last = report.rows.last().expect("the comparison records the start");
    write_json(
        ws,
        "summary",
        &FlowCompareJson {
            eta: args.lr,
            flow_h: h,
            method: method_name,
            steps: args.steps,
            substeps_per_step: report.substeps,
            max_deviation: report.max_deviation,
            final_gd_loss: last.gd_loss,
            final_flow_loss: last.flow_loss,
        },
    )?;

    if args.common.plot {
        let gd: Vec<(f64, f64)> =
            thin(report.rows.iter().map(|r| (r.t as f64, r.gd_loss)).collect(), 2000);
        let fl: Vec<(f64, f64)> =
            thin(report.rows.iter().map(|r| (r.t as f64, r.flow_loss)).collect(), 2000);
        let series = vec![
            Series { name: "gradient descent".into(), points: gd, capped: false },
            Series { name: "gradient flow".into(), points: fl, capped: false },
        ];
        emit_plot(&loss_plot("descent vs flow", series), &ws.path("compare", "svg"))?;
    }

    println!(
        "max end-to-end deviation {:.6e} over {} steps ({} flow substeps per step, {method_name})",
        report.max_deviation, args.steps, report.substeps
    );
    println!(
        "final losses: descent {:.6e}, flow {:.6e}",
        last.gd_loss, last.flow_loss
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_endpoints_and_respects_the_limit() {
        let points: Vec<(f64, f64)> = (0..10_001).map(|t| (t as f64, 1.0 / (t + 1) as f64)).collect();
        let thinned = thin(points.clone(), 2000);
        assert!(thinned.len() <= 2000 + 1, "got {} points", thinned.len());
        assert_eq!(thinned.first(), points.first().into());
        assert_eq!(thinned.last(), points.last().into());
        let short = vec![(0.0, 1.0), (1.0, 0.5)];
        assert_eq!(thin(short.clone(), 2000), short, "short curves pass through");
    }

    #[test]
    fn loss_plot_falls_back_to_linear_axes_for_all_zero_losses() {
        let series = vec![Series { name: "flat".into(), points: vec![(0.0, 0.0)], capped: false }];
        let spec = loss_plot("flat", series);
        assert!(!spec.log_y, "an all-zero curve cannot use a log axis");
        assert!(crate::plot::render_svg(&spec).is_ok(), "the fallback must stay drawable");
    }
}
