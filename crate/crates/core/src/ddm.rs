//! Neumann-Neumann non-overlapping domain decomposition for the Linear-A
//! step in 1D.
//!
//! The step is written in mixed form with the auxiliary variable `v`:
//!
//! ```text
//! [ I             -Δt D ] [u]   [ uⁿ]
//! [ ε² D - c          I ] [v] = [-uⁿ],     c = diag((uⁿ)²)
//! ```
//!
//! Eliminating `v` recovers `(I - Δt D c + ε²Δt D²) u = (I - Δt D) uⁿ`, the
//! Linear-A step. The interval is cut at grid nodes into `N0` subdomains.
//! Each iteration
//!
//! 1. solves a Dirichlet problem on every subdomain with the current interface
//!    traces `(g, h)` of `(u, v)`;
//! 2. evaluates the mismatch of the global equations at each interface node,
//!    which is the jump of the one-sided discrete fluxes of the two neighbours;
//! 3. solves a Neumann problem on every subdomain, driven by that jump, in
//!    which the interface rows keep only the subdomain's own half of the
//!    stencil (one-sided difference, half of the mass term);
//! 4. relaxes the traces with the two neighbouring Neumann corrections,
//!    `g ← g + θ (φ_left + φ_right)` and likewise for `h`.
//!
//! Because the half-split local matrices sum to the global matrix, the fixed
//! point of the iteration is exactly the monodomain Linear-A solution.

use rayon::prelude::*;

use crate::error::{check_positive, Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::linalg::{BandLu, BandMatrix};
use crate::schemes::{NnConfig, PropagatorSpec, Scheme};

/// Neumann correction `(φ_u, φ_v)` at one end of a subdomain.
type Correction = (f64, f64);

/// Equal split of the interval into non-overlapping subdomains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    grid: SpatialGrid,
    /// Global node indices `0 = b_0 < b_1 < … < b_N0 = N_x - 1`.
    breakpoints: Vec<usize>,
}

impl Decomposition {
    pub fn new(grid: &SpatialGrid, subdomains: usize) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Unsupported(
                "Neumann-Neumann decomposition is implemented in 1D only".into(),
            ));
        }
        if subdomains < 2 {
            return Err(Error::InvalidParameter {
                name: "subdomains",
                reason: format!("need at least 2 subdomains, got {subdomains}"),
            });
        }
        let intervals = grid.nodes_per_axis() - 1;
        if intervals < 2 * subdomains {
            return Err(Error::InvalidParameter {
                name: "subdomains",
                reason: format!(
                    "{subdomains} subdomains need at least {} grid intervals, got {intervals}",
                    2 * subdomains
                ),
            });
        }
        let breakpoints = (0..=subdomains).map(|i| i * intervals / subdomains).collect();
        Ok(Self {
            grid: *grid,
            breakpoints,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn subdomain_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Global node indices of the interfaces `Γ_1 … Γ_{N0-1}`.
    pub fn interfaces(&self) -> &[usize] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    /// Global node indices `(start, end)` of subdomain `i`, ends included.
    pub fn subdomain(&self, i: usize) -> (usize, usize) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }
}

pub const DEFAULT_NN_TOL: f64 = 1e-10;
pub const DEFAULT_NN_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnParams {
    /// Relaxation parameter in `(0, 1)`.
    pub theta: f64,
    pub nn_tol: f64,
    pub nn_max_iter: usize,
    /// Start each time step from the previous step's converged traces
    /// instead of zero.
    pub warm_start: bool,
}

impl Default for NnParams {
    fn default() -> Self {
        Self {
            theta: 0.25,
            nn_tol: DEFAULT_NN_TOL,
            nn_max_iter: DEFAULT_NN_MAX_ITER,
            warm_start: false,
        }
    }
}

impl NnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("must lie in (0, 1), got {}", self.theta),
            });
        }
        check_positive("nn_tol", self.nn_tol)?;
        if self.nn_max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "nn_max_iter",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Interface values of `u` (`g`) and `v` (`h`).
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceTraces {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// Iterations spent producing these traces.
    pub iterations: usize,
}

impl InterfaceTraces {
    pub fn zeros(interfaces: usize) -> Self {
        Self {
            g: vec![0.0; interfaces],
            h: vec![0.0; interfaces],
            iterations: 0,
        }
    }
}

/// What lies beyond one end of a local problem.
#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    /// Known value outside the local unknowns (physical boundary or a
    /// Dirichlet interface trace): the full stencil is kept.
    Dirichlet,
    /// The end node is itself an interface unknown and only the
    /// subdomain's half of its stencil is kept.
    Neumann,
}

/// One local linear system, on the consecutive global nodes
/// `first..first + count`, with unknowns interleaved as `(u_j, v_j)`.
#[derive(Debug, Clone)]
struct LocalSystem {
    first: usize,
    count: usize,
    lu: BandLu,
}

/// The Neumann-Neumann solver for one fixed step size.
#[derive(Debug, Clone)]
pub struct NeumannNeumann {
    decomposition: Decomposition,
    params: NnParams,
    dt: f64,
    eps: f64,
}

impl NeumannNeumann {
    pub fn new(decomposition: Decomposition, params: NnParams, dt: f64, eps: f64) -> Result<Self> {
        params.validate()?;
        check_positive("dt", dt)?;
        check_positive("eps", eps)?;
        Ok(Self {
            decomposition,
            params,
            dt,
            eps,
        })
    }

    pub fn params(&self) -> &NnParams {
        &self.params
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    /// Node `j` in global numbering has interior index `j - 1`; boundary
    /// nodes `0` and `N_x - 1` carry zero.
    fn last_interior_node(&self) -> usize {
        self.decomposition.grid.nodes_per_axis() - 2
    }

    fn assemble(&self, first: usize, count: usize, left: End, right: End, c: &[f64]) -> Result<LocalSystem> {
        let h = self.decomposition.grid.h();
        let (a, b) = (self.dt / (h * h), self.eps * self.eps / (h * h));
        let mut m = BandMatrix::zeros(2 * count, 3, 3);
        for k in 0..count {
            let j = first + k;
            let half_left = k == 0 && left == End::Neumann;
            let half_right = k + 1 == count && right == End::Neumann;
            let w = if half_left || half_right { 0.5 } else { 1.0 };
            let (ru, rv) = (2 * k, 2 * k + 1);
            m.add_to(ru, ru, w);
            m.add_to(rv, rv, w);
            m.add_to(rv, ru, -w * c[j - 1]);
            // Each retained side contributes (neighbour - self) / h².
            for (kept, neighbour) in [(!half_left, k.checked_sub(1)), (!half_right, Some(k + 1))] {
                if !kept {
                    continue;
                }
                // u-row: -Δt (v_nb - v_j)/h², v-row: ε² (u_nb - u_j)/h²
                m.add_to(ru, rv, a);
                m.add_to(rv, ru, -b);
                if let Some(nb) = neighbour.filter(|&nb| nb < count) {
                    m.add_to(ru, 2 * nb + 1, -a);
                    m.add_to(rv, 2 * nb, b);
                }
            }
        }
        Ok(LocalSystem {
            first,
            count,
            lu: m.factor()?,
        })
    }

    /// Dirichlet systems on the open subdomains (ends excluded).
    fn dirichlet_systems(&self, c: &[f64]) -> Result<Vec<LocalSystem>> {
        (0..self.decomposition.subdomain_count())
            .into_par_iter()
            .map(|i| {
                let (s, e) = self.decomposition.subdomain(i);
                self.assemble(s + 1, e - s - 1, End::Dirichlet, End::Dirichlet, c)
            })
            .collect()
    }

    /// Neumann systems including interface end nodes; physical boundary
    /// nodes stay excluded (homogeneous Dirichlet).
    fn neumann_systems(&self, c: &[f64]) -> Result<Vec<LocalSystem>> {
        let n0 = self.decomposition.subdomain_count();
        (0..n0)
            .into_par_iter()
            .map(|i| {
                let (s, e) = self.decomposition.subdomain(i);
                let (first, left) = if i == 0 {
                    (s + 1, End::Dirichlet)
                } else {
                    (s, End::Neumann)
                };
                let (last, right) = if i + 1 == n0 {
                    (e - 1, End::Dirichlet)
                } else {
                    (e, End::Neumann)
                };
                self.assemble(first, last - first + 1, left, right, c)
            })
            .collect()
    }

    /// Full-domain `(u, v)` values on global nodes `0..N_x`, from the
    /// Dirichlet solutions and the interface traces.
    fn dirichlet_sweep(&self, systems: &[LocalSystem], un: &[f64], traces: &InterfaceTraces) -> (Vec<f64>, Vec<f64>) {
        let h = self.decomposition.grid.h();
        let (a, b) = (self.dt / (h * h), self.eps * self.eps / (h * h));
        let n0 = systems.len();
        let trace_at = |i: usize| -> (f64, f64) {
            // Value at breakpoint i: zero on the physical boundary.
            if i == 0 || i == n0 {
                (0.0, 0.0)
            } else {
                (traces.g[i - 1], traces.h[i - 1])
            }
        };
        let local: Vec<Vec<f64>> = systems
            .par_iter()
            .enumerate()
            .map(|(i, sys)| {
                let mut rhs = vec![0.0; 2 * sys.count];
                for k in 0..sys.count {
                    let j = sys.first + k;
                    rhs[2 * k] = un[j - 1];
                    rhs[2 * k + 1] = -un[j - 1];
                }
                let (gl, hl) = trace_at(i);
                let (gr, hr) = trace_at(i + 1);
                let last = 2 * (sys.count - 1);
                rhs[0] += a * hl;
                rhs[1] -= b * gl;
                rhs[last] += a * hr;
                rhs[last + 1] -= b * gr;
                sys.lu.solve_in_place(&mut rhs);
                rhs
            })
            .collect();

        let nodes = self.decomposition.grid.nodes_per_axis();
        let mut u = vec![0.0; nodes];
        let mut v = vec![0.0; nodes];
        for (sys, x) in systems.iter().zip(&local) {
            for k in 0..sys.count {
                u[sys.first + k] = x[2 * k];
                v[sys.first + k] = x[2 * k + 1];
            }
        }
        for (q, &node) in self.decomposition.interfaces().iter().enumerate() {
            u[node] = traces.g[q];
            v[node] = traces.h[q];
        }
        (u, v)
    }

    /// Mismatch of the global `(u, v)` equations at each interface node.
    fn interface_residuals(&self, u: &[f64], v: &[f64], un: &[f64], c: &[f64]) -> Vec<(f64, f64)> {
        let h = self.decomposition.grid.h();
        let (a, b) = (self.dt / (h * h), self.eps * self.eps / (h * h));
        self.decomposition
            .interfaces()
            .iter()
            .map(|&q| {
                let lap_v = v[q - 1] - 2.0 * v[q] + v[q + 1];
                let lap_u = u[q - 1] - 2.0 * u[q] + u[q + 1];
                let ru = un[q - 1] - (u[q] - a * lap_v);
                let rv = -un[q - 1] - (b * lap_u - c[q - 1] * u[q] + v[q]);
                (ru, rv)
            })
            .collect()
    }

    /// One Linear-A time step. Returns `uⁿ⁺¹` and the converged traces.
    pub fn step(&self, un: &Field, initial: Option<InterfaceTraces>) -> Result<(Field, InterfaceTraces)> {
        let grid = self.decomposition.grid;
        if *un.grid() != grid {
            return Err(Error::FieldLength {
                expected: grid.interior_count(),
                got: un.len(),
            });
        }
        let interfaces = self.decomposition.interfaces().len();
        let un = un.values();
        let c: Vec<f64> = un.iter().map(|x| x * x).collect();
        let dirichlet = self.dirichlet_systems(&c)?;
        let neumann = self.neumann_systems(&c)?;
        let n0 = neumann.len();

        let mut traces = initial
            .filter(|t| t.g.len() == interfaces && t.h.len() == interfaces)
            .unwrap_or_else(|| InterfaceTraces::zeros(interfaces));
        traces.iterations = 0;

        loop {
            let (u, v) = self.dirichlet_sweep(&dirichlet, un, &traces);
            let residuals = self.interface_residuals(&u, &v, un, &c);

            // Each Neumann problem is driven by the residuals at its own ends.
            let corrections: Vec<(Option<Correction>, Option<Correction>)> = neumann
                .par_iter()
                .enumerate()
                .map(|(i, sys)| {
                    let mut rhs = vec![0.0; 2 * sys.count];
                    let last = 2 * (sys.count - 1);
                    if i > 0 {
                        rhs[0] = residuals[i - 1].0;
                        rhs[1] = residuals[i - 1].1;
                    }
                    if i + 1 < n0 {
                        rhs[last] = residuals[i].0;
                        rhs[last + 1] = residuals[i].1;
                    }
                    sys.lu.solve_in_place(&mut rhs);
                    let left = (i > 0).then(|| (rhs[0], rhs[1]));
                    let right = (i + 1 < n0).then(|| (rhs[last], rhs[last + 1]));
                    (left, right)
                })
                .collect();

            let theta = self.params.theta;
            let mut dg = 0.0;
            let mut dh = 0.0;
            for q in 0..interfaces {
                let (phi_l, psi_l) = corrections[q].1.expect("left neighbour of an interface");
                let (phi_r, psi_r) = corrections[q + 1].0.expect("right neighbour of an interface");
                let inc_g = theta * (phi_l + phi_r);
                let inc_h = theta * (psi_l + psi_r);
                traces.g[q] += inc_g;
                traces.h[q] += inc_h;
                dg += inc_g * inc_g;
                dh += inc_h * inc_h;
            }
            traces.iterations += 1;
            let (dg, dh) = (dg.sqrt(), dh.sqrt());

            if dg <= self.params.nn_tol && dh <= self.params.nn_tol {
                let (u, _) = self.dirichlet_sweep(&dirichlet, un, &traces);
                let values = u[1..=self.last_interior_node()].to_vec();
                return Ok((Field::from_raw(grid, values), traces));
            }
            if !(dg.is_finite() && dh.is_finite()) || traces.iterations >= self.params.nn_max_iter {
                return Err(Error::NeumannNeumannDiverged {
                    iterations: traces.iterations,
                    g_increment: dg,
                    h_increment: dh,
                });
            }
        }
    }
}

/// The Neumann-Neumann step as a one-shot function.
pub fn nn_time_step(un: &Field, decomposition: &Decomposition, params: &NnParams, dt: f64, eps: f64) -> Result<Field> {
    NeumannNeumann::new(decomposition.clone(), *params, dt, eps)?
        .step(un, None)
        .map(|(u, _)| u)
}

/// A propagator spec whose steps are [`nn_time_step`]s.
pub fn nn_propagator(decomposition: &Decomposition, params: &NnParams, dt: f64, eps: f64) -> PropagatorSpec {
    let mut spec = PropagatorSpec::new(Scheme::NeumannNeumannLinearA, dt, eps);
    spec.nn = Some(NnConfig {
        subdomains: decomposition.subdomain_count(),
        params: *params,
    });
    spec
}
