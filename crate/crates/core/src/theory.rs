//! Contraction factors and error envelopes for the Parareal variants.
//!
//! With the variable coefficient `diag(u²)` replaced by `I`, the linear
//! schemes are rational functions of `D_h`:
//!
//! ```text
//! P_i     = (I - iΔT D_h + ε²ΔT D_h²)⁻¹ (I - iΔT D_h)
//! P_{J_i} = [(I - iΔt D_h + ε²Δt D_h²)⁻¹ (I - iΔt D_h)]^J,   Δt = ΔT/J
//! ```
//!
//! so on the eigenvector of `λ_p` they act as `g_i(y)` and `g_i(y; Δt)^J`
//! with `y = -λ_p > 0`, and every spectral norm is a maximum over the
//! spectrum. `i = 3` is the linearised Newton operator of the nonlinear
//! coarse step.
//!
//! The error of iterate `k + 1` is bounded by
//!
//! ```text
//! α^{k+1} min{ ((1 - β^{N-1}) / (1 - β))^{k+1}, C(N-1, k+1) } · max_j ‖E_j^0‖
//! ```
//!
//! where `α = ‖P_{J_f} - P_c‖` for the linear variants and `α = C ΔT²` with an
//! estimated LTE constant `C` for the nonlinear ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_positive, Error, Result};
use crate::grid::{l2_norm, laplacian_eigenvalues, Field, SpatialGrid};
use crate::parareal::{AlgorithmVariant, Parareal, ParerealConfig, TimePartition};

fn check_index(i: u8) -> Result<()> {
    if (1..=3).contains(&i) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "i",
            reason: format!("splitting index must be 1, 2 or 3, got {i}"),
        })
    }
}

fn g_unchecked(i: u8, y: f64, dt: f64, eps: f64) -> f64 {
    let a = 1.0 + i as f64 * dt * y;
    a / (a + eps * eps * dt * y * y)
}

/// `g_i(y) = (1 + iΔT y) / (1 + iΔT y + ε²ΔT y²)`.
pub fn g(i: u8, y: f64, dt: f64, eps: f64) -> Result<f64> {
    check_index(i)?;
    check_positive("y", y)?;
    check_positive("dt", dt)?;
    check_positive("eps", eps)?;
    Ok(g_unchecked(i, y, dt, eps))
}

/// Fine and coarse splitting index of `φ_i`.
fn phi_pair(i: u8) -> (u8, u8) {
    match i {
        3 => (2, 1),
        _ => (i, i),
    }
}

fn phi_unchecked(i: u8, y: f64, dt: f64, eps: f64, j: usize) -> f64 {
    let (fine, coarse) = phi_pair(i);
    fine_symbol(fine, y, dt, eps, j) - g_unchecked(coarse, y, dt, eps)
}

fn fine_symbol(i: u8, y: f64, dt: f64, eps: f64, j: usize) -> f64 {
    g_unchecked(i, y, dt / j as f64, eps).powi(j as i32)
}

/// `φ_i(y) = g_i(y; ΔT/J)^J - g_i(y; ΔT)` for `i = 1, 2`, and
/// `φ_3(y) = g_2(y; ΔT/J)^J - g_1(y; ΔT)`.
pub fn phi(i: u8, y: f64, dt: f64, eps: f64, j: usize) -> Result<f64> {
    check_index(i)?;
    check_positive("y", y)?;
    check_positive("dt", dt)?;
    check_positive("eps", eps)?;
    if j < 2 || j > i32::MAX as usize {
        return Err(Error::InvalidParameter {
            name: "J",
            reason: format!("must be at least 2, got {j}"),
        });
    }
    Ok(phi_unchecked(i, y, dt, eps, j))
}

/// `P_i` (with `j = None`) or `P_{J_i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PMatrixSpec {
    pub i: u8,
    pub dt: f64,
    pub eps: f64,
    pub j: Option<usize>,
}

impl PMatrixSpec {
    pub fn coarse(i: u8, dt: f64, eps: f64) -> Self {
        Self { i, dt, eps, j: None }
    }

    pub fn fine(i: u8, dt: f64, eps: f64, j: usize) -> Self {
        Self { i, dt, eps, j: Some(j) }
    }

    pub fn validate(&self) -> Result<()> {
        check_index(self.i)?;
        check_positive("dt", self.dt)?;
        check_positive("eps", self.eps)?;
        match self.j {
            Some(_) if self.i == 3 => Err(Error::InvalidParameter {
                name: "i",
                reason: "P_{J_i} is defined for i = 1, 2 only".into(),
            }),
            Some(0) => Err(Error::InvalidParameter {
                name: "J",
                reason: "must be at least 1".into(),
            }),
            _ => Ok(()),
        }
    }

    /// Eigenvalue on the mode with `D_h` eigenvalue `-y`.
    pub fn symbol(&self, y: f64) -> f64 {
        match self.j {
            Some(j) => fine_symbol(self.i, y, self.dt, self.eps, j),
            None => g_unchecked(self.i, y, self.dt, self.eps),
        }
    }
}

/// Spectral norm, `max_p |symbol(-λ_p)|`.
pub fn p_matrix_norm(spec: &PMatrixSpec, grid: &SpatialGrid) -> Result<f64> {
    spec.validate()?;
    Ok(laplacian_eigenvalues(grid)
        .into_iter()
        .map(|l| spec.symbol(-l).abs())
        .fold(0.0, f64::max))
}

/// `‖P_{J_f} - P_c‖` for the pairing of `φ_i`.
pub fn p_difference_norm(i: u8, dt: f64, eps: f64, j: usize, grid: &SpatialGrid) -> Result<f64> {
    check_index(i)?;
    check_positive("dt", dt)?;
    check_positive("eps", eps)?;
    if j == 0 {
        return Err(Error::InvalidParameter {
            name: "J",
            reason: "must be at least 1".into(),
        });
    }
    Ok(laplacian_eigenvalues(grid)
        .into_iter()
        .map(|l| phi_unchecked(i, -l, dt, eps, j).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub alpha: f64,
    pub beta: f64,
    /// Number of coarse slices `N`.
    pub slices: usize,
    pub variant: AlgorithmVariant,
}

impl BoundParams {
    /// Weight of the iterate growth in the stability envelope: `1` for the
    /// linear variants, `C ΔT²` for the nonlinear ones.
    pub fn stability_weight(&self) -> f64 {
        if self.variant.is_nonlinear() {
            self.alpha
        } else {
            1.0
        }
    }
}

/// `φ` index for a linear variant: `PA1 → 1, PA2 → 2, PA3 → 3`.
fn linear_index(variant: AlgorithmVariant) -> Option<u8> {
    match variant {
        AlgorithmVariant::Pa1 => Some(1),
        AlgorithmVariant::Pa2 => Some(2),
        AlgorithmVariant::Pa3 => Some(3),
        _ => None,
    }
}

/// `α = ‖P_{J_f} - P_c‖`, `β = ‖P_c‖` for PA-I/II/III.
pub fn alpha_beta(
    variant: AlgorithmVariant,
    partition: TimePartition,
    eps: f64,
    grid: &SpatialGrid,
) -> Result<BoundParams> {
    let i = linear_index(variant).ok_or_else(|| {
        Error::Unsupported(format!(
            "{variant} has a nonlinear fine propagator; its α comes from the LTE constant"
        ))
    })?;
    let dt = partition.coarse_dt();
    let coarse = phi_pair(i).1;
    Ok(BoundParams {
        alpha: p_difference_norm(i, dt, eps, partition.fine_steps(), grid)?,
        beta: p_matrix_norm(&PMatrixSpec::coarse(coarse, dt, eps), grid)?,
        slices: partition.slices(),
        variant,
    })
}

/// `α = C ΔT²`, `β = ‖P_1‖` (NPA-I) or `‖P_3‖` (NPA-II).
pub fn npa_bound_params(
    variant: AlgorithmVariant,
    partition: TimePartition,
    eps: f64,
    grid: &SpatialGrid,
    lte_constant: f64,
) -> Result<BoundParams> {
    let i = match variant {
        AlgorithmVariant::Npa1 => 1,
        AlgorithmVariant::Npa2 => 3,
        _ => return Err(Error::Unsupported(format!("{variant} is linear; use alpha_beta"))),
    };
    if !(lte_constant >= 0.0 && lte_constant.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lte_constant",
            reason: format!("must be finite and non-negative, got {lte_constant}"),
        });
    }
    let dt = partition.coarse_dt();
    Ok(BoundParams {
        alpha: lte_constant * dt * dt,
        beta: p_matrix_norm(&PMatrixSpec::coarse(i, dt, eps), grid)?,
        slices: partition.slices(),
        variant,
    })
}

/// `C(n, k)` as a float; `0` when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, m| acc * (n - m) as f64 / (m + 1) as f64)
}

/// `(1 - β^{N-1}) / (1 - β)`, continuous at `β = 1`.
fn geometric_sum(beta: f64, slices: usize) -> f64 {
    let terms = slices.saturating_sub(1);
    if (1.0 - beta).abs() < 1e-12 {
        terms as f64
    } else {
        (1.0 - beta.powi(terms as i32)) / (1.0 - beta)
    }
}

/// Bound on `max_j ‖E_j^{k+1}‖` given `e0 = max_j ‖E_j^0‖`.
pub fn error_bound(params: &BoundParams, k: usize, e0: f64) -> f64 {
    let power = k + 1;
    let binom = binomial(params.slices.saturating_sub(1), power);
    if binom == 0.0 || params.alpha == 0.0 {
        return 0.0;
    }
    let geometric = geometric_sum(params.beta, params.slices).powi(power as i32);
    params.alpha.powi(power as i32) * geometric.min(binom) * e0
}

/// LTE constant of an NPA variant, estimated along the serial fine
/// trajectory `U_n` and the coarse initial guess `U_n^0`:
///
/// ```text
/// C ≈ max_n ‖(F - G)(U_n) - (F - G)(U_n^0)‖ / (ΔT² ‖U_n - U_n^0‖)
/// ```
///
/// Slices where the two states agree to `1e-14` are skipped.
pub fn lte_constant(
    variant: AlgorithmVariant,
    partition: TimePartition,
    eps: f64,
    grid: &SpatialGrid,
    u0: &Field,
) -> Result<f64> {
    let engine = Parareal::new(ParerealConfig::new(variant, partition, eps), *grid)?;
    let reference = engine.serial_fine_reference(u0)?;
    let coarse = engine.coarse_init(u0)?;
    lte_constant_from_trajectories(&engine, &reference, &coarse)
}

/// [`lte_constant`] on trajectories that are already available.
pub fn lte_constant_from_trajectories(engine: &Parareal, reference: &[Field], coarse: &[Field]) -> Result<f64> {
    let variant = engine.config().variant;
    if !variant.is_nonlinear() {
        return Err(Error::Unsupported(format!(
            "LTE constants are estimated for npa1 and npa2, not {variant}"
        )));
    }
    let partition = engine.config().partition;
    let n = partition.slices();
    let dt2 = partition.coarse_dt().powi(2);

    // F(U_n) and G(U_n^0) are the next entries of the trajectories.
    let (fine_on_coarse, _) = engine.fine_sweep(coarse)?;
    let mut best: Option<f64> = None;
    for i in 0..n {
        let distance = l2_norm(&(&reference[i] - &coarse[i]));
        if distance < 1e-14 {
            continue;
        }
        let (g_ref, _) = engine.apply_coarse(&reference[i])?;
        let lte_ref = &reference[i + 1] - &g_ref;
        let lte_coarse = &fine_on_coarse[i] - &coarse[i + 1];
        let ratio = l2_norm(&(&lte_ref - &lte_coarse)) / (dt2 * distance);
        best = Some(best.map_or(ratio, |b| b.max(ratio)));
    }
    best.ok_or_else(|| {
        Error::DegenerateTrajectory("fine and coarse trajectories coincide at every coarse point".into())
    })
}

/// `‖(F - G)(a) - (F - G)(b)‖ / (ΔT² ‖a - b‖)` for one pair of states;
/// `None` when they agree to `1e-14`.
pub fn lte_difference_quotient(engine: &Parareal, a: &Field, b: &Field) -> Result<Option<f64>> {
    let distance = l2_norm(&(a - b));
    if distance < 1e-14 {
        return Ok(None);
    }
    let lte = |u: &Field| -> Result<Field> { Ok(&engine.apply_fine(u)?.0 - &engine.apply_coarse(u)?.0) };
    let dt2 = engine.config().partition.coarse_dt().powi(2);
    Ok(Some(l2_norm(&(&lte(a)? - &lte(b)?)) / (dt2 * distance)))
}

/// Right-hand side of the stability estimate,
/// `‖u⁰‖ + weight (n + 1) max_{j ≤ n} ‖U_j^k‖`, bounding `‖U_{n+1}^{k+1}‖`.
pub fn stability_envelope(weight: f64, u0_norm: f64, n: usize, previous_norms: &[f64]) -> f64 {
    let max = previous_norms[..=n].iter().copied().fold(0.0, f64::max);
    u0_norm + weight * (n + 1) as f64 * max
}

/// The `n × n` lower bidiagonal matrix with `1` on the diagonal and `-β`
/// below it.
pub fn toeplitz_bidiagonal(beta: f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            1.0
        } else if r == c + 1 {
            -beta
        } else {
            0.0
        }
    })
}

/// Closed-form inverse of [`toeplitz_bidiagonal`]: entries `β^{r-c}` on and
/// below the diagonal.
pub fn toeplitz_inverse(beta: f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |r, c| if r >= c { beta.powi((r - c) as i32) } else { 0.0 })
}

/// The strictly lower triangular Toeplitz matrix `𝕋(β)` with first column
/// `(0, 1, β, β², …)`.
pub fn toeplitz_iteration_matrix(beta: f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |r, c| if r > c { beta.powi((r - c - 1) as i32) } else { 0.0 })
}

/// First column of `𝕋(β)^k`: entry `i` (1-based) is `0` for `i ≤ k` and
/// `C(i-2, k-1) β^{i-1-k}` otherwise.
pub fn toeplitz_power_column(beta: f64, n: usize, k: usize) -> DVector<f64> {
    assert!(k >= 1, "power must be at least 1");
    DVector::from_fn(n, |r, _| {
        let i = r + 1;
        if i <= k {
            0.0
        } else {
            binomial(i - 2, k - 1) * beta.powi((i - 1 - k) as i32)
        }
    })
}

/// `min{((1 - β^{N-1}) / (1 - β))^k, C(N-1, k)}`, an upper bound on
/// `‖𝕋(β)^k‖_∞`.
pub fn toeplitz_norm_bound(beta: f64, n: usize, k: usize) -> f64 {
    geometric_sum(beta, n)
        .powi(k as i32)
        .min(binomial(n.saturating_sub(1), k))
}
