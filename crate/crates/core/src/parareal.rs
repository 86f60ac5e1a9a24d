//! The Parareal prediction-correction iteration
//!
//! ```text
//! U_0^{k+1}     = u⁰
//! U_{n+1}^{k+1} = G(U_n^{k+1}) + F(U_n^k) - G(U_n^k)
//! ```
//!
//! started from the coarse sweep `U_{n+1}^0 = G(U_n^0)`. The `N` fine
//! evaluations `F(U_n^k)` of an iteration only read the frozen previous
//! iterate and run concurrently on a dedicated thread pool; the coarse
//! correction is a sequential sweep. `G(U_n^k)` is kept from the previous
//! sweep, so each iteration costs `N` fine and `N` coarse propagations.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{check_positive, Error, Result};
use crate::grid::{energy, l2_norm, mass, Field, SpatialGrid};
use crate::schemes::{NnConfig, Propagator, PropagatorSpec, Scheme, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL};
use crate::theory::{self, BoundParams};

/// Two-level time mesh: `N` coarse slices of width `ΔT = T/N`, each split
/// into `J` fine steps `Δt = ΔT/J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePartition {
    t_final: f64,
    slices: usize,
    fine_steps: usize,
}

impl TimePartition {
    pub fn new(t_final: f64, slices: usize, fine_steps: usize) -> Result<Self> {
        check_positive("T", t_final)?;
        if slices == 0 || fine_steps == 0 {
            return Err(Error::InvalidParameter {
                name: if slices == 0 { "N" } else { "J" },
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            t_final,
            slices,
            fine_steps,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// `N`
    pub fn slices(&self) -> usize {
        self.slices
    }

    /// `J`
    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    /// `ΔT`
    pub fn coarse_dt(&self) -> f64 {
        self.t_final / self.slices as f64
    }

    /// `Δt`
    pub fn fine_dt(&self) -> f64 {
        self.coarse_dt() / self.fine_steps as f64
    }
}

/// The five fine/coarse pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmVariant {
    Pa1,
    Pa2,
    Pa3,
    Npa1,
    Npa2,
}

impl AlgorithmVariant {
    pub const ALL: [AlgorithmVariant; 5] = [Self::Pa1, Self::Pa2, Self::Pa3, Self::Npa1, Self::Npa2];

    pub fn fine_scheme(&self) -> Scheme {
        match self {
            Self::Pa1 => Scheme::LinearA,
            Self::Pa2 | Self::Pa3 => Scheme::LinearB,
            Self::Npa1 | Self::Npa2 => Scheme::NonlinearEyre,
        }
    }

    pub fn coarse_scheme(&self) -> Scheme {
        match self {
            Self::Pa1 | Self::Pa3 | Self::Npa1 => Scheme::LinearA,
            Self::Pa2 => Scheme::LinearB,
            Self::Npa2 => Scheme::NonlinearEyre,
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, Self::Npa1 | Self::Npa2)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pa1 => "pa1",
            Self::Pa2 => "pa2",
            Self::Pa3 => "pa3",
            Self::Npa1 => "npa1",
            Self::Npa2 => "npa2",
        }
    }
}

impl fmt::Display for AlgorithmVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_lowercase();
        let key = key.replace("iii", "3").replace("ii", "2").replace('i', "1");
        Self::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| Error::InvalidParameter {
                name: "algorithm",
                reason: format!("unknown variant `{s}` (expected pa1, pa2, pa3, npa1 or npa2)"),
            })
    }
}

/// Which solver plays the fine propagator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FineSolver {
    /// The variant's own fine scheme.
    #[default]
    Direct,
    /// Linear-A solved by Neumann-Neumann domain decomposition (1D, PA-I
    /// and PA-III only).
    NeumannNeumann(NnConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParerealConfig {
    pub variant: AlgorithmVariant,
    pub partition: TimePartition,
    pub eps: f64,
    /// Threads for the fine sweeps.
    pub workers: usize,
    pub fine_solver: FineSolver,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl ParerealConfig {
    pub fn new(variant: AlgorithmVariant, partition: TimePartition, eps: f64) -> Self {
        Self {
            variant,
            partition,
            eps,
            workers: 1,
            fine_solver: FineSolver::Direct,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_fine_solver(mut self, fine: FineSolver) -> Self {
        self.fine_solver = fine;
        self
    }
}

/// The iterates of one Parareal iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ParerealState {
    /// `U_n^k`, `n = 0..=N`.
    pub iterates: Vec<Field>,
    /// `U_n^{k-1}`; `None` at `k = 0`.
    pub previous: Option<Vec<Field>>,
    /// `G(U_n^k)`, `n = 0..N`, reused by the next correction sweep.
    pub coarse: Vec<Field>,
    /// Serial fine solution at `T_0 … T_N`.
    pub fine_ref: Vec<Field>,
    pub k: usize,
}

impl ParerealState {
    /// `max_n ‖U_n^k - U_n‖`, the discrete `L∞(0,T; L²)` error at the
    /// coarse points.
    pub fn error(&self) -> f64 {
        max_distance(&self.iterates, &self.fine_ref)
    }
}

fn max_distance(a: &[Field], b: &[Field]) -> f64 {
    a.iter().zip(b).map(|(x, y)| l2_norm(&(x - y))).fold(0.0, f64::max)
}

/// Newton statistics gathered over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepStats {
    pub steps: usize,
    pub max_newton_iterations: usize,
    pub max_residual: f64,
}

impl SweepStats {
    fn merge(self, other: SweepStats) -> SweepStats {
        SweepStats {
            steps: self.steps + other.steps,
            max_newton_iterations: self.max_newton_iterations.max(other.max_newton_iterations),
            max_residual: self.max_residual.max(other.max_residual),
        }
    }
}

/// One row of a run: the state after iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub error: f64,
    /// Theoretical bound on `error`; at `k = 0` this is the measured error.
    pub bound: Option<f64>,
    /// Discrete energy and mass of `U_N^k`.
    pub energy: f64,
    pub mass: f64,
    pub wall_seconds: f64,
    /// `‖U_n^k‖`, `n = 0..=N`.
    pub norms: Vec<f64>,
    /// Newton statistics of the fine and coarse sweeps of this iteration.
    pub fine_stats: SweepStats,
    pub coarse_stats: SweepStats,
}

/// How the `bound` column of a run is produced.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BoundMode {
    #[default]
    None,
    /// `α, β` from the spectrum for PA variants; for NPA variants the LTE
    /// constant is estimated from the run's own trajectories first.
    Theory,
    Given(BoundParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub variant: AlgorithmVariant,
    pub records: Vec<IterationRecord>,
    /// First `k` with `error ≤ tol`.
    pub converged_at: Option<usize>,
    pub bound_params: Option<BoundParams>,
    /// Estimated LTE constant (NPA variants with [`BoundMode::Theory`]).
    pub lte_constant: Option<f64>,
    /// Serial fine reference solve, seconds.
    pub reference_seconds: f64,
    /// Newton statistics of the serial fine reference.
    pub reference_stats: SweepStats,
    /// Error that stopped the run early; the records up to it are kept.
    pub failure: Option<Error>,
    pub final_iterates: Vec<Field>,
}

impl IterationTrace {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    /// Iterations until convergence, if reached.
    pub fn iterations(&self) -> Option<usize> {
        self.converged_at
    }
}

/// Fine and coarse propagators of one variant on one grid.
#[derive(Debug)]
pub struct Parareal {
    config: ParerealConfig,
    grid: SpatialGrid,
    fine: Propagator,
    coarse: Propagator,
    pool: ThreadPool,
}

impl Parareal {
    pub fn new(config: ParerealConfig, grid: SpatialGrid) -> Result<Self> {
        if config.workers == 0 {
            return Err(Error::InvalidParameter {
                name: "workers",
                reason: "must be at least 1".into(),
            });
        }
        let p = config.partition;
        let mut fine_spec = PropagatorSpec::new(config.variant.fine_scheme(), p.fine_dt(), config.eps)
            .with_newton(config.newton_tol, config.newton_max_iter);
        if let FineSolver::NeumannNeumann(nn) = config.fine_solver {
            if !matches!(config.variant, AlgorithmVariant::Pa1 | AlgorithmVariant::Pa3) {
                return Err(Error::Unsupported(format!(
                    "the Neumann-Neumann fine solver is available for pa1 and pa3, not {}",
                    config.variant
                )));
            }
            fine_spec.scheme = Scheme::NeumannNeumannLinearA;
            fine_spec.nn = Some(nn);
        }
        let coarse_spec = PropagatorSpec::new(config.variant.coarse_scheme(), p.coarse_dt(), config.eps)
            .with_newton(config.newton_tol, config.newton_max_iter);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "workers",
                reason: e.to_string(),
            })?;
        Ok(Self {
            fine: Propagator::new(fine_spec, grid)?,
            coarse: Propagator::new(coarse_spec, grid)?,
            config,
            grid,
            pool,
        })
    }

    pub fn config(&self) -> &ParerealConfig {
        &self.config
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn fine(&self) -> &Propagator {
        &self.fine
    }

    pub fn coarse(&self) -> &Propagator {
        &self.coarse
    }

    /// `F` over one coarse slice.
    pub fn apply_fine(&self, u: &Field) -> Result<(Field, SweepStats)> {
        sweep(&self.fine, u, self.config.partition.fine_steps())
    }

    /// `G` over one coarse slice.
    pub fn apply_coarse(&self, u: &Field) -> Result<(Field, SweepStats)> {
        sweep(&self.coarse, u, 1)
    }

    /// Fine propagation from `u0` through all slices, stored at every `T_n`.
    pub fn serial_fine_reference(&self, u0: &Field) -> Result<Vec<Field>> {
        self.serial_fine_reference_with_stats(u0).map(|(r, _)| r)
    }

    fn serial_fine_reference_with_stats(&self, u0: &Field) -> Result<(Vec<Field>, SweepStats)> {
        let mut out = Vec::with_capacity(self.config.partition.slices() + 1);
        let mut stats = SweepStats::default();
        out.push(u0.clone());
        for n in 0..self.config.partition.slices() {
            let (next, s) = self.apply_fine(&out[n]).map_err(|e| slice_error(n, e))?;
            stats = stats.merge(s);
            out.push(next);
        }
        Ok((out, stats))
    }

    /// `U_n^0 = Gⁿ(u0)`.
    pub fn coarse_init(&self, u0: &Field) -> Result<Vec<Field>> {
        self.coarse_init_with_stats(u0).map(|(r, _)| r)
    }

    fn coarse_init_with_stats(&self, u0: &Field) -> Result<(Vec<Field>, SweepStats)> {
        let mut out = Vec::with_capacity(self.config.partition.slices() + 1);
        let mut stats = SweepStats::default();
        out.push(u0.clone());
        for n in 0..self.config.partition.slices() {
            let (next, s) = self.apply_coarse(&out[n]).map_err(|e| slice_error(n, e))?;
            stats = stats.merge(s);
            out.push(next);
        }
        Ok((out, stats))
    }

    /// The `k = 0` state: coarse initial guess and serial fine reference.
    pub fn initial_state(&self, u0: &Field) -> Result<ParerealState> {
        let fine_ref = self.serial_fine_reference(u0)?;
        let iterates = self.coarse_init(u0)?;
        Ok(self.state_from(iterates, fine_ref))
    }

    fn state_from(&self, iterates: Vec<Field>, fine_ref: Vec<Field>) -> ParerealState {
        ParerealState {
            coarse: iterates[1..].to_vec(),
            iterates,
            previous: None,
            fine_ref,
            k: 0,
        }
    }

    /// `F(U_n)` for every `n < N`, concurrently on the worker pool.
    pub fn fine_sweep(&self, states: &[Field]) -> Result<(Vec<Field>, SweepStats)> {
        let n = self.config.partition.slices();
        let results: Vec<Result<(Field, SweepStats)>> = self
            .pool
            .install(|| states[..n].par_iter().map(|u| self.apply_fine(u)).collect());
        let mut fields = Vec::with_capacity(n);
        let mut stats = SweepStats::default();
        for (slice, r) in results.into_iter().enumerate() {
            let (f, s) = r.map_err(|e| slice_error(slice, e))?;
            fields.push(f);
            stats = stats.merge(s);
        }
        Ok((fields, stats))
    }

    /// One prediction-correction iteration `k → k + 1`.
    pub fn parareal_iteration(&self, state: ParerealState) -> Result<ParerealState> {
        self.iterate(state).map(|(s, _, _)| s)
    }

    fn iterate(&self, state: ParerealState) -> Result<(ParerealState, SweepStats, SweepStats)> {
        let n = self.config.partition.slices();
        let (fine, fine_stats) = self.fine_sweep(&state.iterates)?;
        let mut next = Vec::with_capacity(n + 1);
        let mut coarse = Vec::with_capacity(n);
        let mut coarse_stats = SweepStats::default();
        next.push(state.iterates[0].clone());
        for i in 0..n {
            let (g_new, s) = self.apply_coarse(&next[i]).map_err(|e| slice_error(i, e))?;
            coarse_stats = coarse_stats.merge(s);
            let values = g_new
                .values()
                .iter()
                .zip(fine[i].values())
                .zip(state.coarse[i].values())
                .map(|((g, f), g_old)| g + (f - g_old))
                .collect();
            next.push(Field::new(self.grid, values).map_err(|e| slice_error(i, e))?);
            coarse.push(g_new);
        }
        let state = ParerealState {
            iterates: next,
            previous: Some(state.iterates),
            coarse,
            fine_ref: state.fine_ref,
            k: state.k + 1,
        };
        Ok((state, fine_stats, coarse_stats))
    }

    /// Iterate until `error ≤ tol` or `max_iter` iterations (default `N + 2`).
    pub fn run(&self, u0: &Field, tol: f64, max_iter: Option<usize>) -> Result<IterationTrace> {
        self.run_with_bound(u0, tol, max_iter, BoundMode::None)
    }

    pub fn run_with_bound(
        &self,
        u0: &Field,
        tol: f64,
        max_iter: Option<usize>,
        bound: BoundMode,
    ) -> Result<IterationTrace> {
        check_positive("tol", tol)?;
        let max_iter = max_iter.unwrap_or(self.config.partition.slices() + 2);

        let started = Instant::now();
        let (fine_ref, reference_stats) = self.serial_fine_reference_with_stats(u0)?;
        let reference_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let (iterates, coarse_stats) = self.coarse_init_with_stats(u0)?;
        let mut state = self.state_from(iterates, fine_ref);
        let init_seconds = started.elapsed().as_secs_f64();

        let (bound_params, lte_constant) = match bound {
            BoundMode::None => (None, None),
            BoundMode::Given(p) => (Some(p), None),
            BoundMode::Theory if self.config.variant.is_nonlinear() => {
                let c = theory::lte_constant_from_trajectories(self, &state.fine_ref, &state.iterates)?;
                (
                    Some(theory::npa_bound_params(
                        self.config.variant,
                        self.config.partition,
                        self.config.eps,
                        &self.grid,
                        c,
                    )?),
                    Some(c),
                )
            }
            BoundMode::Theory => (
                Some(theory::alpha_beta(
                    self.config.variant,
                    self.config.partition,
                    self.config.eps,
                    &self.grid,
                )?),
                None,
            ),
        };

        let e0 = state.error();
        let mut records = vec![self.record(&state, e0, Some(e0), init_seconds, SweepStats::default(), coarse_stats)];
        let mut converged_at = (e0 <= tol).then_some(0);
        let mut failure = None;

        while converged_at.is_none() && state.k < max_iter {
            let started = Instant::now();
            let (next, fine_stats, coarse_stats) = match self.iterate(state.clone()) {
                Ok(r) => r,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            };
            state = next;
            let error = state.error();
            let bound = bound_params.map(|p| theory::error_bound(&p, state.k - 1, e0));
            let wall = started.elapsed().as_secs_f64();
            records.push(self.record(&state, error, bound, wall, fine_stats, coarse_stats));
            if error <= tol {
                converged_at = Some(state.k);
            }
        }

        Ok(IterationTrace {
            variant: self.config.variant,
            records,
            converged_at,
            bound_params,
            lte_constant,
            reference_seconds,
            reference_stats,
            failure,
            final_iterates: state.iterates,
        })
    }

    fn record(
        &self,
        state: &ParerealState,
        error: f64,
        bound: Option<f64>,
        wall_seconds: f64,
        fine_stats: SweepStats,
        coarse_stats: SweepStats,
    ) -> IterationRecord {
        let last = state.iterates.last().expect("at least u0");
        IterationRecord {
            k: state.k,
            error,
            bound,
            energy: energy(last, self.config.eps),
            mass: mass(last),
            wall_seconds,
            norms: state.iterates.iter().map(l2_norm).collect(),
            fine_stats,
            coarse_stats,
        }
    }
}

fn sweep(p: &Propagator, u: &Field, steps: usize) -> Result<(Field, SweepStats)> {
    let mut stats = SweepStats::default();
    let out = p.propagate_inspect(u, steps, |r| {
        stats.steps += 1;
        stats.max_newton_iterations = stats.max_newton_iterations.max(r.newton_iterations);
        stats.max_residual = stats.max_residual.max(r.residual_norm);
    })?;
    Ok((out, stats))
}

fn slice_error(slice: usize, e: Error) -> Error {
    match e {
        Error::Slice { .. } => e,
        other => Error::Slice {
            slice,
            source: Box::new(other),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialCondition;

    fn small(variant: AlgorithmVariant) -> (Parareal, Field) {
        let grid = SpatialGrid::one_d(10).unwrap();
        let partition = TimePartition::new(0.5, 4, 4).unwrap();
        let engine = Parareal::new(ParerealConfig::new(variant, partition, 0.1), grid).unwrap();
        (
            engine,
            InitialCondition::SeededRandom {
                seed: 3,
                amplitude: 0.5,
            }
            .build(grid),
        )
    }

    #[test]
    fn partition_steps() {
        let p = TimePartition::new(1.0, 20, 200).unwrap();
        assert!((p.coarse_dt() - 0.05).abs() < 1e-15);
        assert!((p.fine_dt() * 200.0 - p.coarse_dt()).abs() < 1e-14 * p.coarse_dt());
        assert!(TimePartition::new(1.0, 0, 3).is_err());
        assert!(TimePartition::new(-1.0, 2, 3).is_err());
    }

    #[test]
    fn variant_names() {
        for v in AlgorithmVariant::ALL {
            assert_eq!(v.name().parse::<AlgorithmVariant>().unwrap(), v);
        }
        assert_eq!("PA-III".parse::<AlgorithmVariant>().unwrap(), AlgorithmVariant::Pa3);
        assert_eq!("NPA-I".parse::<AlgorithmVariant>().unwrap(), AlgorithmVariant::Npa1);
        assert!("pa4".parse::<AlgorithmVariant>().is_err());
        assert_eq!(AlgorithmVariant::Pa3.fine_scheme(), Scheme::LinearB);
        assert_eq!(AlgorithmVariant::Pa3.coarse_scheme(), Scheme::LinearA);
    }

    #[test]
    fn single_slice_reference() {
        let (engine, u0) = small(AlgorithmVariant::Pa1);
        let reference = engine.serial_fine_reference(&u0).unwrap();
        assert_eq!(reference.len(), 5);
        assert_eq!(reference[0], u0);
        let direct = engine.fine().propagate(&u0, 16).unwrap();
        assert!(l2_norm(&(&reference[4] - &direct)) < 1e-14);
    }

    #[test]
    fn coarse_init_composes() {
        let (engine, u0) = small(AlgorithmVariant::Npa2);
        let init = engine.coarse_init(&u0).unwrap();
        let two = engine.coarse().propagate(&u0, 2).unwrap();
        assert_eq!(init[2], two);
        let zero = engine.coarse_init(&Field::zeros(*engine.grid())).unwrap();
        assert!(zero.iter().all(|f| f.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn one_iteration_matches_the_update_formula() {
        let grid = SpatialGrid::one_d(10).unwrap();
        let partition = TimePartition::new(0.2, 2, 5).unwrap();
        let engine = Parareal::new(ParerealConfig::new(AlgorithmVariant::Pa3, partition, 0.1), grid).unwrap();
        let u0 = InitialCondition::smooth_sine().build(grid);
        let (f, g) = (engine.fine(), engine.coarse());

        let u1_0 = g.propagate(&u0, 1).unwrap();
        let u2_0 = g.propagate(&u1_0, 1).unwrap();
        let u1_1 = &(&g.propagate(&u0, 1).unwrap() + &f.propagate(&u0, 5).unwrap()) - &u1_0;
        let u2_1 = &(&g.propagate(&u1_1, 1).unwrap() + &f.propagate(&u1_0, 5).unwrap()) - &u2_0;

        let state = engine.parareal_iteration(engine.initial_state(&u0).unwrap()).unwrap();
        assert_eq!(state.k, 1);
        assert_eq!(state.iterates[0], u0);
        assert!(l2_norm(&(&state.iterates[1] - &u1_1)) < 1e-15);
        assert!(l2_norm(&(&state.iterates[2] - &u2_1)) < 1e-15);
    }

    #[test]
    fn fine_reference_is_a_fixed_point() {
        let (engine, u0) = small(AlgorithmVariant::Pa2);
        let mut state = engine.initial_state(&u0).unwrap();
        state.iterates = state.fine_ref.clone();
        state.coarse = state.iterates[..4]
            .iter()
            .map(|u| engine.coarse().propagate(u, 1).unwrap())
            .collect();
        let next = engine.parareal_iteration(state).unwrap();
        assert!(next.error() < 1e-15);
    }

    #[test]
    fn exact_after_n_iterations() {
        for variant in AlgorithmVariant::ALL {
            let (engine, u0) = small(variant);
            let mut state = engine.initial_state(&u0).unwrap();
            for _ in 0..4 {
                state = engine.parareal_iteration(state).unwrap();
                assert_eq!(state.iterates[0], u0);
            }
            let scale = 1.0 + state.fine_ref.iter().map(l2_norm).fold(0.0, f64::max);
            assert!(state.error() <= 1e-12 * scale, "{variant}: {}", state.error());
        }
    }

    #[test]
    fn huge_tolerance_stops_at_once() {
        let (engine, u0) = small(AlgorithmVariant::Pa1);
        let trace = engine.run(&u0, 1e6, None).unwrap();
        assert_eq!(trace.converged_at, Some(0));
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn max_iter_without_convergence() {
        let (engine, u0) = small(AlgorithmVariant::Pa1);
        let trace = engine.run(&u0, 1e-300, Some(2)).unwrap();
        assert_eq!(trace.converged_at, None);
        assert_eq!(trace.records.len(), 3);
        assert!(trace.failure.is_none());
    }

    #[test]
    fn propagator_failure_names_the_slice() {
        let grid = SpatialGrid::one_d(17).unwrap();
        let mut config = ParerealConfig::new(AlgorithmVariant::Npa2, TimePartition::new(4.0, 2, 2).unwrap(), 0.05);
        config.newton_max_iter = 1;
        let engine = Parareal::new(config, grid).unwrap();
        let u0 = InitialCondition::SeededRandom {
            seed: 1,
            amplitude: 1.0,
        }
        .build(grid);
        let err = engine.coarse_init(&u0).unwrap_err();
        assert!(matches!(err, Error::Slice { slice: 0, .. }), "{err}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let grid = SpatialGrid::one_d(17).unwrap();
        let partition = TimePartition::new(1.0, 6, 10).unwrap();
        let u0 = InitialCondition::default().build(grid);
        let runs: Vec<IterationTrace> = [1, 3]
            .iter()
            .map(|&w| {
                let config = ParerealConfig::new(AlgorithmVariant::Npa1, partition, 0.1).with_workers(w);
                Parareal::new(config, grid).unwrap().run(&u0, 1e-10, None).unwrap()
            })
            .collect();
        assert_eq!(runs[0].errors(), runs[1].errors());
        assert_eq!(runs[0].final_iterates, runs[1].final_iterates);
    }

    #[test]
    fn nn_fine_solver_restricted() {
        let grid = SpatialGrid::one_d(33).unwrap();
        let nn = NnConfig {
            subdomains: 4,
            params: Default::default(),
        };
        let partition = TimePartition::new(0.1, 2, 2).unwrap();
        let config =
            ParerealConfig::new(AlgorithmVariant::Pa2, partition, 0.1).with_fine_solver(FineSolver::NeumannNeumann(nn));
        assert!(Parareal::new(config, grid).is_err());
        let config = ParerealConfig {
            variant: AlgorithmVariant::Pa1,
            ..config
        };
        assert!(Parareal::new(config, grid).is_ok());
    }
}
