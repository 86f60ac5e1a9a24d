//! Convex-splitting time steppers for the discrete Cahn-Hilliard equation
//! `u_t = D_h (f(u) - ε² D_h u)`, `f(u) = u³ - u`.
//!
//! * [`Scheme::LinearA`]: `(I - Δt D_h diag(uⁿ²) + ε²Δt D_h²) uⁿ⁺¹ = (I - Δt D_h) uⁿ`
//! * [`Scheme::LinearB`]: `(I - 2Δt D_h + ε²Δt D_h²) uⁿ⁺¹ = uⁿ + Δt D_h (uⁿ)³ - 3Δt D_h uⁿ`
//! * [`Scheme::NonlinearEyre`]: `uⁿ⁺¹ + ε²Δt D_h² uⁿ⁺¹ - Δt D_h (uⁿ⁺¹)³ = (I - Δt D_h) uⁿ`,
//!   solved with undamped Newton iterations started from `uⁿ`.
//! * [`Scheme::NeumannNeumannLinearA`]: the Linear-A step solved by the
//!   Neumann-Neumann domain decomposition of [`crate::ddm`].
//!
//! All four are unconditionally gradient stable for the states of interest:
//! the discrete energy [`crate::grid::energy`] does not increase, whatever
//! the step size.

use std::fmt;
use std::str::FromStr;

use crate::ddm::{Decomposition, NeumannNeumann, NnParams};
use crate::error::{check_positive, Error, Result};
use crate::grid::{build_laplacian, energy, l2_norm_slice, DiscreteOperator, Field, SpatialGrid};
use crate::linalg::{BandLu, BandMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    LinearA,
    LinearB,
    NonlinearEyre,
    NeumannNeumannLinearA,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::LinearA => "linear-a",
            Scheme::LinearB => "linear-b",
            Scheme::NonlinearEyre => "nonlinear-eyre",
            Scheme::NeumannNeumannLinearA => "nn-linear-a",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-a" => Ok(Scheme::LinearA),
            "linear-b" => Ok(Scheme::LinearB),
            "nonlinear-eyre" => Ok(Scheme::NonlinearEyre),
            "nn-linear-a" => Ok(Scheme::NeumannNeumannLinearA),
            other => Err(Error::InvalidParameter {
                name: "scheme",
                reason: format!("unknown scheme `{other}`"),
            }),
        }
    }
}

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;

/// Domain-decomposition settings for [`Scheme::NeumannNeumannLinearA`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnConfig {
    pub subdomains: usize,
    pub params: NnParams,
}

/// Which scheme advances a field, and with which step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub eps: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub nn: Option<NnConfig>,
}

impl PropagatorSpec {
    pub fn new(scheme: Scheme, dt: f64, eps: f64) -> Self {
        Self {
            scheme,
            dt,
            eps,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
            nn: None,
        }
    }

    pub fn with_newton(mut self, tol: f64, max_iter: usize) -> Self {
        self.newton_tol = tol;
        self.newton_max_iter = max_iter;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("dt", self.dt)?;
        check_positive("eps", self.eps)?;
        check_positive("newton_tol", self.newton_tol)?;
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "newton_max_iter",
                reason: "must be at least 1".into(),
            });
        }
        match (self.scheme, self.nn) {
            (Scheme::NeumannNeumannLinearA, None) => Err(Error::InvalidParameter {
                name: "nn",
                reason: "the Neumann-Neumann scheme needs decomposition settings".into(),
            }),
            (Scheme::NeumannNeumannLinearA, Some(nn)) => nn.params.validate(),
            _ => Ok(()),
        }
    }
}

/// Diagnostics of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    /// Newton updates performed (0 for the linear schemes).
    pub newton_iterations: usize,
    /// Final nonlinear residual (0 for the linear schemes).
    pub residual_norm: f64,
    pub energy_before: f64,
    pub energy_after: f64,
}

/// A [`PropagatorSpec`] bound to a grid, with its operators assembled.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Propagator {
    spec: PropagatorSpec,
    grid: SpatialGrid,
    laplacian: DiscreteOperator,
    /// `I + ε²Δt D_h²`, shared by every scheme's implicit matrix.
    base: BandMatrix,
    /// Factorized `I - 2Δt D_h + ε²Δt D_h²` (Linear-B only).
    linear_b: Option<BandLu>,
    nn: Option<NeumannNeumann>,
}

impl Propagator {
    pub fn new(spec: PropagatorSpec, grid: SpatialGrid) -> Result<Self> {
        spec.validate()?;
        let laplacian = build_laplacian(&grid);
        let base =
            BandMatrix::identity(grid.interior_count()).add_scaled(spec.eps * spec.eps * spec.dt, &laplacian.squared());
        let linear_b = match spec.scheme {
            Scheme::LinearB => Some(linear_b_matrix(&base, &laplacian, spec.dt).factor()?),
            _ => None,
        };
        let nn = match (spec.scheme, spec.nn) {
            (Scheme::NeumannNeumannLinearA, Some(cfg)) => {
                let decomposition = Decomposition::new(&grid, cfg.subdomains)?;
                Some(NeumannNeumann::new(decomposition, cfg.params, spec.dt, spec.eps)?)
            }
            _ => None,
        };
        Ok(Self {
            spec,
            grid,
            laplacian,
            base,
            linear_b,
            nn,
        })
    }

    pub fn spec(&self) -> &PropagatorSpec {
        &self.spec
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn laplacian(&self) -> &DiscreteOperator {
        &self.laplacian
    }

    fn check_field(&self, u: &Field) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::FieldLength {
                expected: self.grid.interior_count(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// One Linear-A step with the actual `diag((uⁿ)²)`.
    pub fn step_linear_a(&self, u: &Field) -> Result<Field> {
        self.check_field(u)?;
        let dt = self.spec.dt;
        let u = u.values();
        let squares: Vec<f64> = u.iter().map(|v| v * v).collect();
        let a = self
            .base
            .add_scaled(-dt, &self.laplacian.matrix().scale_columns(&squares));
        let du = self.laplacian.apply(u);
        let mut rhs: Vec<f64> = u.iter().zip(&du).map(|(v, d)| v - dt * d).collect();
        a.factor()?.solve_in_place(&mut rhs);
        Ok(Field::from_raw(self.grid, rhs))
    }

    /// One Linear-B step. The implicit matrix is constant and factorized once.
    pub fn step_linear_b(&self, u: &Field) -> Result<Field> {
        self.check_field(u)?;
        let dt = self.spec.dt;
        let u = u.values();
        let explicit: Vec<f64> = u.iter().map(|v| v * v * v - 3.0 * v).collect();
        let d_explicit = self.laplacian.apply(&explicit);
        let mut rhs: Vec<f64> = u.iter().zip(&d_explicit).map(|(v, d)| v + dt * d).collect();
        match &self.linear_b {
            Some(lu) => lu.solve_in_place(&mut rhs),
            None => linear_b_matrix(&self.base, &self.laplacian, dt)
                .factor()?
                .solve_in_place(&mut rhs),
        }
        Ok(Field::from_raw(self.grid, rhs))
    }

    /// Residual `H(Y) = Y + ε²Δt D_h² Y - Δt D_h Y³ - Ŷ`, evaluated as
    /// `Y - Ŷ + Δt D_h (ε² D_h Y - Y³)`.
    fn newton_residual(&self, y: &[f64], y_hat: &[f64]) -> Vec<f64> {
        let eps2 = self.spec.eps * self.spec.eps;
        let dy = self.laplacian.apply(y);
        let w: Vec<f64> = y.iter().zip(&dy).map(|(v, d)| eps2 * d - v * v * v).collect();
        let dw = self.laplacian.apply(&w);
        y.iter()
            .zip(y_hat)
            .zip(&dw)
            .map(|((v, vh), d)| v - vh + self.spec.dt * d)
            .collect()
    }

    /// One nonlinear (Eyre) step solved by Newton's method from `Y₀ = uⁿ`:
    /// `Y_{m+1} = (I + ε²Δt D_h² - 3Δt D_h diag(Y_m²))⁻¹ (Ŷ - 2Δt D_h Y_m³)`.
    pub fn step_nonlinear(&self, u: &Field) -> Result<(Field, StepReport)> {
        self.check_field(u)?;
        let dt = self.spec.dt;
        let du = self.laplacian.apply(u.values());
        let y_hat: Vec<f64> = u.values().iter().zip(&du).map(|(v, d)| v - dt * d).collect();
        let mut y = u.values().to_vec();
        let mut iterations = 0;
        loop {
            let residual = l2_norm_slice(&self.grid, &self.newton_residual(&y, &y_hat));
            if residual <= self.spec.newton_tol {
                break self.finish_newton(u, y, iterations, residual);
            }
            if !residual.is_finite() || iterations >= self.spec.newton_max_iter {
                return Err(Error::NewtonDiverged { iterations, residual });
            }
            let three_y2: Vec<f64> = y.iter().map(|v| 3.0 * v * v).collect();
            let jacobian = self
                .base
                .add_scaled(-dt, &self.laplacian.matrix().scale_columns(&three_y2));
            let cubes: Vec<f64> = y.iter().map(|v| v * v * v).collect();
            let d_cubes = self.laplacian.apply(&cubes);
            let mut rhs: Vec<f64> = y_hat.iter().zip(&d_cubes).map(|(vh, d)| vh - 2.0 * dt * d).collect();
            jacobian.factor()?.solve_in_place(&mut rhs);
            y = rhs;
            iterations += 1;
        }
    }

    fn finish_newton(&self, u: &Field, y: Vec<f64>, iterations: usize, residual: f64) -> Result<(Field, StepReport)> {
        let next = Field::from_raw(self.grid, y);
        let report = StepReport {
            newton_iterations: iterations,
            residual_norm: residual,
            energy_before: energy(u, self.spec.eps),
            energy_after: energy(&next, self.spec.eps),
        };
        Ok((next, report))
    }

    /// One step of the configured scheme.
    pub fn step(&self, u: &Field) -> Result<(Field, StepReport)> {
        let next = match self.spec.scheme {
            Scheme::LinearA => self.step_linear_a(u)?,
            Scheme::LinearB => self.step_linear_b(u)?,
            Scheme::NonlinearEyre => return self.step_nonlinear(u),
            Scheme::NeumannNeumannLinearA => {
                self.check_field(u)?;
                self.nn_solver().step(u, None)?.0
            }
        };
        let report = StepReport {
            energy_before: energy(u, self.spec.eps),
            energy_after: energy(&next, self.spec.eps),
            ..StepReport::default()
        };
        Ok((next, report))
    }

    fn nn_solver(&self) -> &NeumannNeumann {
        self.nn
            .as_ref()
            .expect("validated: Neumann-Neumann propagator has a solver")
    }

    /// `steps` consecutive steps.
    pub fn propagate(&self, u: &Field, steps: usize) -> Result<Field> {
        self.propagate_inspect(u, steps, |_| {})
    }

    /// Like [`Propagator::propagate`], handing every step's report to `inspect`.
    pub fn propagate_inspect(&self, u: &Field, steps: usize, mut inspect: impl FnMut(&StepReport)) -> Result<Field> {
        if steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "must be at least 1".into(),
            });
        }
        self.check_field(u)?;
        if self.spec.scheme == Scheme::NeumannNeumannLinearA {
            // Interface traces are carried over between consecutive steps
            // when warm starting is enabled.
            let solver = self.nn_solver();
            let mut state = u.clone();
            let mut traces = None;
            for _ in 0..steps {
                let (next, converged) = solver.step(&state, traces.take())?;
                if solver.params().warm_start {
                    traces = Some(converged);
                }
                inspect(&StepReport {
                    energy_before: energy(&state, self.spec.eps),
                    energy_after: energy(&next, self.spec.eps),
                    ..StepReport::default()
                });
                state = next;
            }
            return Ok(state);
        }
        let mut state = u.clone();
        for _ in 0..steps {
            let (next, report) = self.step(&state)?;
            inspect(&report);
            state = next;
        }
        Ok(state)
    }
}

fn linear_b_matrix(base: &BandMatrix, laplacian: &DiscreteOperator, dt: f64) -> BandMatrix {
    base.add_scaled(-2.0 * dt, laplacian.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialCondition;
    use nalgebra::{DMatrix, DVector};

    fn dense_d(grid: &SpatialGrid) -> DMatrix<f64> {
        build_laplacian(grid).matrix().to_dense()
    }

    fn random_field(grid: SpatialGrid, seed: u64, amplitude: f64) -> Field {
        InitialCondition::SeededRandom { seed, amplitude }.build(grid)
    }

    fn propagator(scheme: Scheme, grid: SpatialGrid, dt: f64, eps: f64) -> Propagator {
        Propagator::new(PropagatorSpec::new(scheme, dt, eps), grid).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_is_a_fixed_point() {
        for grid in [SpatialGrid::one_d(12).unwrap(), SpatialGrid::two_d(7).unwrap()] {
            for scheme in [Scheme::LinearA, Scheme::LinearB, Scheme::NonlinearEyre] {
                let p = propagator(scheme, grid, 0.1, 0.1);
                let (next, report) = p.step(&Field::zeros(grid)).unwrap();
                assert!(next.values().iter().all(|&v| v == 0.0), "{scheme}");
                assert!(report.newton_iterations <= 1);
                assert!(p
                    .propagate(&Field::zeros(grid), 5)
                    .unwrap()
                    .values()
                    .iter()
                    .all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn linear_a_matches_dense_oracle() {
        let grid = SpatialGrid::one_d(4).unwrap();
        let (dt, eps) = (0.3, 0.7);
        let u = Field::new(grid, vec![0.99, -1.02]).unwrap();
        let d = dense_d(&grid);
        let eye = DMatrix::<f64>::identity(2, 2);
        let sq = DMatrix::from_diagonal(&DVector::from_iterator(2, u.values().iter().map(|v| v * v)));
        let a = &eye - dt * &d * sq + eps * eps * dt * &d * &d;
        let rhs = (&eye - dt * &d) * DVector::from_column_slice(u.values());
        let expected = a.lu().solve(&rhs).unwrap();
        let got = propagator(Scheme::LinearA, grid, dt, eps).step_linear_a(&u).unwrap();
        assert!(max_diff(got.values(), expected.as_slice()) < 1e-13);
    }

    #[test]
    fn linear_a_dense_oracle_random_2d() {
        let grid = SpatialGrid::two_d(6).unwrap();
        let (dt, eps) = (0.01, 0.2);
        let u = random_field(grid, 3, 0.8);
        let n = grid.interior_count();
        let d = dense_d(&grid);
        let eye = DMatrix::<f64>::identity(n, n);
        let sq = DMatrix::from_diagonal(&DVector::from_iterator(n, u.values().iter().map(|v| v * v)));
        let a = &eye - dt * &d * sq + eps * eps * dt * &d * &d;
        let rhs = (&eye - dt * &d) * DVector::from_column_slice(u.values());
        let expected = a.lu().solve(&rhs).unwrap();
        let got = propagator(Scheme::LinearA, grid, dt, eps).step_linear_a(&u).unwrap();
        assert!(max_diff(got.values(), expected.as_slice()) < 1e-11);
    }

    #[test]
    fn linear_b_with_linearized_cube_matches_operator_form() {
        // Replacing (uⁿ)³ by uⁿ turns the Linear-B step into
        // (I - 2Δt D + ε²Δt D²)⁻¹ (I - 2Δt D) uⁿ.
        let grid = SpatialGrid::one_d(6).unwrap();
        let (dt, eps) = (0.05, 0.3);
        let u = random_field(grid, 9, 0.5);
        let n = grid.interior_count();
        let d = dense_d(&grid);
        let eye = DMatrix::<f64>::identity(n, n);
        let a = &eye - 2.0 * dt * &d + eps * eps * dt * &d * &d;
        let expected = a
            .lu()
            .solve(&((&eye - 2.0 * dt * &d) * DVector::from_column_slice(u.values())))
            .unwrap();

        let p = propagator(Scheme::LinearB, grid, dt, eps);
        let du = p.laplacian().apply(u.values());
        let mut rhs: Vec<f64> = u
            .values()
            .iter()
            .zip(&du)
            .map(|(v, dv)| v + dt * dv - 3.0 * dt * dv)
            .collect();
        p.linear_b.as_ref().unwrap().solve_in_place(&mut rhs);
        assert!(max_diff(&rhs, expected.as_slice()) < 1e-12);
    }

    #[test]
    fn linear_b_cached_factorization_matches_fresh_solve() {
        let grid = SpatialGrid::one_d(33).unwrap();
        let p = propagator(Scheme::LinearB, grid, 0.01, 0.0725);
        let mut state = random_field(grid, 1, 0.1);
        for _ in 0..10 {
            let cached = p.step_linear_b(&state).unwrap();
            let dt = p.spec.dt;
            let explicit: Vec<f64> = state.values().iter().map(|v| v * v * v - 3.0 * v).collect();
            let d_explicit = p.laplacian.apply(&explicit);
            let mut rhs: Vec<f64> = state
                .values()
                .iter()
                .zip(&d_explicit)
                .map(|(v, d)| v + dt * d)
                .collect();
            linear_b_matrix(&p.base, &p.laplacian, dt)
                .factor()
                .unwrap()
                .solve_in_place(&mut rhs);
            assert!(max_diff(cached.values(), &rhs) <= 1e-14);
            state = cached;
        }
    }

    #[test]
    fn newton_converges_to_tolerance() {
        let grid = SpatialGrid::one_d(65).unwrap();
        let p = propagator(Scheme::NonlinearEyre, grid, 0.05, 0.0725);
        let u = random_field(grid, 4, 0.5);
        let (y, report) = p.step_nonlinear(&u).unwrap();
        assert!(report.residual_norm <= 1e-10);
        assert!(report.newton_iterations >= 1);
        let du = p.laplacian().apply(u.values());
        let y_hat: Vec<f64> = u.values().iter().zip(&du).map(|(v, d)| v - 0.05 * d).collect();
        assert!(l2_norm_slice(&grid, &p.newton_residual(y.values(), &y_hat)) <= 1e-10);
    }

    #[test]
    fn newton_residual_matches_dense_definition() {
        let grid = SpatialGrid::one_d(8).unwrap();
        let p = propagator(Scheme::NonlinearEyre, grid, 0.2, 0.3);
        let y = random_field(grid, 2, 1.0);
        let y_hat = random_field(grid, 3, 1.0);
        let d = dense_d(&grid);
        let yv = DVector::from_column_slice(y.values());
        let cubes = yv.map(|v| v * v * v);
        let expected = &yv + 0.09 * 0.2 * &d * &d * &yv - 0.2 * &d * cubes - DVector::from_column_slice(y_hat.values());
        let got = p.newton_residual(y.values(), y_hat.values());
        assert!(max_diff(&got, expected.as_slice()) < 1e-9 * expected.amax().max(1.0));
    }

    #[test]
    fn newton_quadratic_tail() {
        let grid = SpatialGrid::one_d(33).unwrap();
        let p = propagator(Scheme::NonlinearEyre, grid, 0.1, 0.1)
            .spec
            .with_newton(1e-14, 50);
        let p = Propagator::new(p, grid).unwrap();
        let u = Field::from_fn(grid, |x, _| 0.8 * (std::f64::consts::PI * x).sin());
        let du = p.laplacian().apply(u.values());
        let y_hat: Vec<f64> = u.values().iter().zip(&du).map(|(v, d)| v - 0.1 * d).collect();
        // Replay the iteration and record residuals.
        let mut y = u.values().to_vec();
        let mut residuals = vec![];
        for _ in 0..8 {
            let r = l2_norm_slice(&grid, &p.newton_residual(&y, &y_hat));
            residuals.push(r);
            if r < 1e-12 {
                break;
            }
            let three_y2: Vec<f64> = y.iter().map(|v| 3.0 * v * v).collect();
            let jac = p.base.add_scaled(-0.1, &p.laplacian.matrix().scale_columns(&three_y2));
            let cubes: Vec<f64> = y.iter().map(|v| v * v * v).collect();
            let dc = p.laplacian.apply(&cubes);
            let mut rhs: Vec<f64> = y_hat.iter().zip(&dc).map(|(a, b)| a - 0.2 * b).collect();
            jac.factor().unwrap().solve_in_place(&mut rhs);
            y = rhs;
        }
        assert!(residuals.len() >= 3);
        for w in residuals.windows(2).skip(1) {
            if w[1] > 1e-13 {
                assert!(w[1] / (w[0] * w[0]) < 1e3, "{residuals:?}");
            }
        }
    }

    #[test]
    fn newton_failure_is_reported() {
        let grid = SpatialGrid::one_d(33).unwrap();
        let spec = PropagatorSpec::new(Scheme::NonlinearEyre, 0.5, 0.05).with_newton(1e-10, 1);
        let p = Propagator::new(spec, grid).unwrap();
        let u = random_field(grid, 8, 1.0);
        assert!(matches!(p.step(&u), Err(Error::NewtonDiverged { iterations: 1, .. })));
    }

    #[test]
    fn energy_does_not_increase() {
        let grid = SpatialGrid::one_d(65).unwrap();
        for scheme in [Scheme::LinearA, Scheme::LinearB, Scheme::NonlinearEyre] {
            for dt in [1e-3, 0.1, 1.0] {
                let p = propagator(scheme, grid, dt, 0.0725);
                let mut u = random_field(grid, 42, 0.1);
                for _ in 0..20 {
                    let (next, r) = p.step(&u).unwrap();
                    assert!(
                        r.energy_after <= r.energy_before + 1e-12 * r.energy_before.abs(),
                        "{scheme} dt={dt}"
                    );
                    u = next;
                }
            }
        }
    }

    #[test]
    fn propagate_composes_steps() {
        let grid = SpatialGrid::one_d(20).unwrap();
        let p = propagator(Scheme::LinearA, grid, 0.01, 0.1);
        let u = random_field(grid, 5, 0.5);
        assert_eq!(p.propagate(&u, 1).unwrap(), p.step(&u).unwrap().0);
        let three = p.propagate(&u, 3).unwrap();
        let manual = p.step(&p.step(&p.step(&u).unwrap().0).unwrap().0).unwrap().0;
        assert_eq!(three, manual);
        assert!(p.propagate(&u, 0).is_err());
    }

    #[test]
    fn linear_a_with_unit_squares_matches_fine_operator_power() {
        // With diag(u²) frozen at I the J-step Linear-A map is
        // [(I - Δt D + ε²Δt D²)⁻¹ (I - Δt D)]^J.
        let grid = SpatialGrid::one_d(6).unwrap();
        let (big_dt, j, eps) = (0.2, 5usize, 0.25);
        let dt = big_dt / j as f64;
        let n = grid.interior_count();
        let d = dense_d(&grid);
        let eye = DMatrix::<f64>::identity(n, n);
        let step = (&eye - dt * &d + eps * eps * dt * &d * &d).try_inverse().unwrap() * (&eye - dt * &d);
        let mut oracle = eye.clone();
        for _ in 0..j {
            oracle = &step * oracle;
        }
        let u = random_field(grid, 6, 1.0);
        let expected = oracle * DVector::from_column_slice(u.values());

        let p = propagator(Scheme::LinearA, grid, dt, eps);
        let mut state = u.values().to_vec();
        let base = p.base.add_scaled(-dt, p.laplacian.matrix());
        let lu = base.factor().unwrap();
        for _ in 0..j {
            let ds = p.laplacian.apply(&state);
            let mut rhs: Vec<f64> = state.iter().zip(&ds).map(|(v, d)| v - dt * d).collect();
            lu.solve_in_place(&mut rhs);
            state = rhs;
        }
        assert!(max_diff(&state, expected.as_slice()) < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(PropagatorSpec::new(Scheme::LinearA, 0.0, 0.1).validate().is_err());
        assert!(PropagatorSpec::new(Scheme::LinearA, 0.1, -1.0).validate().is_err());
        assert!(PropagatorSpec::new(Scheme::NeumannNeumannLinearA, 0.1, 0.1)
            .validate()
            .is_err());
        assert!("linear-b".parse::<Scheme>().unwrap() == Scheme::LinearB);
        assert!("bogus".parse::<Scheme>().is_err());
    }
}
