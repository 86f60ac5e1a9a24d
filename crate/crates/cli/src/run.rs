use std::time::Instant;

use ch_parareal::theory::{self, alpha_beta, error_bound, npa_bound_params};
use ch_parareal::{l2_norm, BoundMode, BoundParams, IterationTrace, Parareal};

use crate::config::RunConfig;
use crate::error::Result;
use crate::trace::{TraceFile, TraceRow};

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Converged { iterations: usize },
    MaxIterReached,
    Failed(String),
}

impl RunStatus {
    /// `0` converged, `2` iteration cap reached, `1` solver failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunStatus::Converged { .. } => 0,
            RunStatus::MaxIterReached => 2,
            RunStatus::Failed(_) => 1,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            RunStatus::Converged { .. } => "converged",
            RunStatus::MaxIterReached => "max-iter",
            RunStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: TraceFile,
    pub status: RunStatus,
}

/// Coarse initial guess, Parareal iterations and the per-iteration bound.
/// The trace is saved to `config.output` when set, also after a solver
/// failure; only configuration and I/O problems are `Err`.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid()?;
    let u0 = config.ic.build(grid);
    let started = Instant::now();
    let run = Parareal::new(config.parareal_config()?, grid)
        .and_then(|engine| engine.run_with_bound(&u0, config.tol, Some(config.max_iter), BoundMode::Theory));

    let mut summary: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| summary.push((k.to_owned(), v));
    if config.j_downscale > 1 {
        put("J_published", config.published_fine_steps().to_string());
    }
    put("u0_norm", l2_norm(&u0).to_string());

    let (status, rows) = match run {
        Ok(trace) => {
            let status = match (&trace.failure, trace.converged_at) {
                (Some(e), _) => RunStatus::Failed(e.to_string()),
                (None, Some(k)) => RunStatus::Converged { iterations: k },
                (None, None) => RunStatus::MaxIterReached,
            };
            describe(&trace, &mut put);
            (status, rows(&trace))
        }
        Err(e) => (RunStatus::Failed(e.to_string()), Vec::new()),
    };
    put("status", status.label().to_owned());
    if let RunStatus::Converged { iterations } = status {
        put("converged_at", iterations.to_string());
    }
    if let RunStatus::Failed(message) = &status {
        put("failure", message.replace('\n', " "));
    }
    put("total_seconds", started.elapsed().as_secs_f64().to_string());

    let trace = TraceFile {
        config: config.clone(),
        summary,
        rows,
    };
    if let Some(path) = &config.output {
        trace.save(path)?;
    }
    Ok(RunOutcome { trace, status })
}

fn describe(trace: &IterationTrace, put: &mut impl FnMut(&str, String)) {
    if let Some(p) = trace.bound_params {
        put("alpha", p.alpha.to_string());
        put("beta", p.beta.to_string());
    }
    if let Some(c) = trace.lte_constant {
        put("C1", c.to_string());
    }
    put("reference_seconds", trace.reference_seconds.to_string());
    if trace.variant.is_nonlinear() {
        let newton = trace
            .records
            .iter()
            .flat_map(|r| [r.fine_stats, r.coarse_stats])
            .chain([trace.reference_stats]);
        let (iters, residual) = newton.fold((0, 0.0_f64), |(i, r), s| {
            (i.max(s.max_newton_iterations), r.max(s.max_residual))
        });
        put("newton_max_iterations", iters.to_string());
        put("newton_max_residual", residual.to_string());
    }
}

fn rows(trace: &IterationTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            k: r.k,
            error: r.error,
            bound: r.bound,
            energy: r.energy,
            mass: r.mass,
            wall_seconds: r.wall_seconds,
        })
        .collect()
}

/// Re-run the configuration in a trace's header and compare error columns
/// bit for bit.
pub fn reproduce(trace: &TraceFile, output: Option<std::path::PathBuf>) -> Result<(RunOutcome, bool)> {
    let config = RunConfig {
        output,
        ..trace.config.clone()
    };
    let outcome = run_experiment(&config)?;
    let same = outcome.trace.rows.len() == trace.rows.len()
        && outcome
            .trace
            .rows
            .iter()
            .zip(&trace.rows)
            .all(|(a, b)| a.error.to_bits() == b.error.to_bits());
    Ok((outcome, same))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub params: BoundParams,
    pub lte_constant: Option<f64>,
    /// `(k, bound / e0)` for `k = 1..=k_max`.
    pub ratios: Vec<(usize, f64)>,
}

/// Bound parameters of a configuration without running Parareal. NPA
/// variants still need the fine and coarse trajectories for their LTE
/// constant.
pub fn bounds(config: &RunConfig, k_max: usize) -> Result<BoundsReport> {
    config.validate()?;
    let grid = config.grid()?;
    let partition = config.partition()?;
    let (params, lte) = if config.algorithm.is_nonlinear() {
        let u0 = config.ic.build(grid);
        let c = theory::lte_constant(config.algorithm, partition, config.eps, &grid, &u0)?;
        (
            npa_bound_params(config.algorithm, partition, config.eps, &grid, c)?,
            Some(c),
        )
    } else {
        (alpha_beta(config.algorithm, partition, config.eps, &grid)?, None)
    };
    let ratios = (1..=k_max).map(|k| (k, error_bound(&params, k - 1, 1.0))).collect();
    Ok(BoundsReport {
        params,
        lte_constant: lte,
        ratios,
    })
}
