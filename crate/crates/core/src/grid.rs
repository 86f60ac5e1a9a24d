//! Uniform finite-difference discretization of the unit interval or square
//! with homogeneous Dirichlet data.
//!
//! A grid with `N_x` nodes per axis has mesh width `h = 1 / (N_x - 1)` and
//! `(N_x - 2)^dim` interior unknowns. In 2D the unknowns are ordered
//! lexicographically with `x` running fastest.

use std::f64::consts::PI;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpatialGrid {
    dim: usize,
    nodes_per_axis: usize,
}

impl SpatialGrid {
    pub fn new(dim: usize, nodes_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if nodes_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 nodes per axis, got {nodes_per_axis}"
            )));
        }
        Ok(Self { dim, nodes_per_axis })
    }

    pub fn one_d(nodes_per_axis: usize) -> Result<Self> {
        Self::new(1, nodes_per_axis)
    }

    pub fn two_d(nodes_per_axis: usize) -> Result<Self> {
        Self::new(2, nodes_per_axis)
    }

    /// Grid with mesh width `1 / denominator`.
    pub fn from_h_denominator(dim: usize, denominator: usize) -> Result<Self> {
        Self::new(dim, denominator + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// Interior nodes along one axis, `N_x - 2`.
    pub fn interior_per_axis(&self) -> usize {
        self.nodes_per_axis - 2
    }

    pub fn interior_count(&self) -> usize {
        self.interior_per_axis().pow(self.dim as u32)
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.nodes_per_axis - 1) as f64
    }

    /// Quadrature weight of one node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Coordinates `(x, y)` of interior unknown `index` (`y = 0` in 1D).
    pub fn coordinates(&self, index: usize) -> (f64, f64) {
        let m = self.interior_per_axis();
        let h = self.h();
        match self.dim {
            1 => ((index + 1) as f64 * h, 0.0),
            _ => (((index % m) + 1) as f64 * h, ((index / m) + 1) as f64 * h),
        }
    }
}

/// Solution values at the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.interior_count() {
            return Err(Error::FieldLength {
                expected: grid.interior_count(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "field",
                reason: format!("entry {i} is not finite ({})", values[i]),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.interior_count()],
        }
    }

    /// Samples `f(x, y)` at the interior nodes.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.interior_count())
            .map(|i| {
                let (x, y) = grid.coordinates(i);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: SpatialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.interior_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        )
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// The Dirichlet discrete Laplacian `D_h` of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    grid: SpatialGrid,
    matrix: BandMatrix,
}

impl DiscreteOperator {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }

    /// `D_h²`, the discrete bilaplacian.
    pub fn squared(&self) -> BandMatrix {
        self.matrix.matmul(&self.matrix)
    }
}

fn laplacian_1d(m: usize, h: f64) -> BandMatrix {
    let s = 1.0 / (h * h);
    let mut d = BandMatrix::zeros(m, 1, 1);
    for i in 0..m {
        d.set(i, i, -2.0 * s);
        if i > 0 {
            d.set(i, i - 1, s);
        }
        if i + 1 < m {
            d.set(i, i + 1, s);
        }
    }
    d
}

/// Assembles `D_h`: `(1/h²) tridiag(1, -2, 1)` in 1D and the Kronecker sum
/// `I ⊗ D₁ + D₁ ⊗ I` in 2D.
pub fn build_laplacian(grid: &SpatialGrid) -> DiscreteOperator {
    let m = grid.interior_per_axis();
    let h = grid.h();
    let matrix = match grid.dim() {
        1 => laplacian_1d(m, h),
        _ => {
            let s = 1.0 / (h * h);
            let n = m * m;
            let mut d = BandMatrix::zeros(n, m, m);
            for iy in 0..m {
                for ix in 0..m {
                    let i = iy * m + ix;
                    d.set(i, i, -4.0 * s);
                    if ix > 0 {
                        d.set(i, i - 1, s);
                    }
                    if ix + 1 < m {
                        d.set(i, i + 1, s);
                    }
                    if iy > 0 {
                        d.set(i, i - m, s);
                    }
                    if iy + 1 < m {
                        d.set(i, i + m, s);
                    }
                }
            }
            d
        }
    };
    DiscreteOperator { grid: *grid, matrix }
}

/// Eigenvalues `λ_p = (2/h²)(cos(pπ/(N_x-1)) - 1)`, `p = 1..N_x-2`, of the
/// 1D operator, in increasing order of `p` (so decreasing in value).
pub fn axis_eigenvalues(grid: &SpatialGrid) -> Vec<f64> {
    let h = grid.h();
    let nx1 = (grid.nodes_per_axis() - 1) as f64;
    (1..=grid.interior_per_axis())
        .map(|p| 2.0 / (h * h) * ((p as f64 * PI / nx1).cos() - 1.0))
        .collect()
}

/// Full spectrum of `D_h`. In 2D these are the pairwise sums `λ_p + λ_q`
/// ordered like the unknowns (`p` fastest).
pub fn laplacian_eigenvalues(grid: &SpatialGrid) -> Vec<f64> {
    let axis = axis_eigenvalues(grid);
    match grid.dim() {
        1 => axis,
        _ => axis.iter().flat_map(|lq| axis.iter().map(move |lp| lp + lq)).collect(),
    }
}

/// Cell-weighted discrete L² norm, `sqrt(h^dim Σ u_j²)`.
pub fn l2_norm(f: &Field) -> f64 {
    l2_norm_slice(f.grid(), f.values())
}

pub(crate) fn l2_norm_slice(grid: &SpatialGrid, values: &[f64]) -> f64 {
    (grid.cell_volume() * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Bulk free energy density `F(u) = (u² - 1)² / 4`.
#[inline]
pub fn bulk_energy_density(u: f64) -> f64 {
    let s = u * u - 1.0;
    0.25 * s * s
}

/// Sum of squared forward differences over every grid edge, with the
/// boundary nodes held at zero.
fn gradient_sum_of_squares(grid: &SpatialGrid, u: &[f64]) -> f64 {
    let m = grid.interior_per_axis();
    let h = grid.h();
    let line = |get: &dyn Fn(usize) -> f64| -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for j in 0..m {
            let cur = get(j);
            acc += (cur - prev) * (cur - prev);
            prev = cur;
        }
        acc + prev * prev
    };
    let total = match grid.dim() {
        1 => line(&|j| u[j]),
        _ => {
            let mut acc = 0.0;
            for r in 0..m {
                acc += line(&|j| u[r * m + j]);
                acc += line(&|j| u[j * m + r]);
            }
            acc
        }
    };
    total / (h * h)
}

/// Discrete Ginzburg-Landau energy
/// `h^dim Σ F(u_j) + (ε²/2) h^dim Σ |∇_h u|²`.
pub fn energy(f: &Field, eps: f64) -> f64 {
    let grid = f.grid();
    let w = grid.cell_volume();
    let bulk: f64 = f.values().iter().map(|&u| bulk_energy_density(u)).sum();
    w * bulk + 0.5 * eps * eps * w * gradient_sum_of_squares(grid, f.values())
}

/// Discrete total mass `h^dim Σ u_j`.
pub fn mass(f: &Field) -> f64 {
    f.grid().cell_volume() * f.values().iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::one_d(3).is_err());
        assert!(SpatialGrid::new(3, 10).is_err());
        let g = SpatialGrid::two_d(6).unwrap();
        assert_eq!(g.interior_count(), 16);
        assert_eq!(g.h(), 0.2);
        assert_eq!(SpatialGrid::from_h_denominator(1, 64).unwrap().nodes_per_axis(), 65);
    }

    #[test]
    fn laplacian_smallest_1d() {
        let g = SpatialGrid::one_d(4).unwrap();
        let d = build_laplacian(&g).matrix().to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 1.0, -2.0]) * 9.0;
        assert!((d - expected).amax() < 1e-12);
    }

    #[test]
    fn laplacian_smallest_2d() {
        let g = SpatialGrid::two_d(4).unwrap();
        let d = build_laplacian(&g).matrix().to_dense();
        for i in 0..4 {
            assert!((d[(i, i)] + 36.0).abs() < 1e-12);
        }
        // Unknown 0 = (x1, y1) neighbours 1 = (x2, y1) and 2 = (x1, y2); 3 is diagonal.
        assert!((d[(0, 1)] - 9.0).abs() < 1e-12);
        assert!((d[(0, 2)] - 9.0).abs() < 1e-12);
        assert_eq!(d[(0, 3)], 0.0);
        assert_eq!(d[(1, 2)], 0.0);
    }

    #[test]
    fn laplacian_is_symmetric() {
        for g in [SpatialGrid::one_d(64).unwrap(), SpatialGrid::two_d(12).unwrap()] {
            let d = build_laplacian(&g).matrix().to_dense();
            assert_eq!(d.clone() - d.transpose(), DMatrix::zeros(d.nrows(), d.ncols()));
        }
    }

    #[test]
    fn kronecker_sum_matches_independent_assembly() {
        let g1 = SpatialGrid::one_d(7).unwrap();
        let g2 = SpatialGrid::two_d(7).unwrap();
        // Integer-scaled: h² D has entries in {-4, -2, 0, 1}.
        let h2 = g1.h() * g1.h();
        let d1 = build_laplacian(&g1).matrix().to_dense() * h2;
        let d1 = d1.map(|v| v.round());
        let m = d1.nrows();
        let eye = DMatrix::<f64>::identity(m, m);
        let expected = eye.kronecker(&d1) + d1.kronecker(&eye);
        let d2 = (build_laplacian(&g2).matrix().to_dense() * h2).map(|v| v.round());
        assert_eq!(d2, expected);
    }

    #[test]
    fn eigenvalue_of_smallest_grid() {
        let g = SpatialGrid::one_d(4).unwrap();
        let l = axis_eigenvalues(&g);
        assert!((l[0] + 9.0).abs() < 1e-12);
        assert!((l[1] + 27.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_match_dense_solver() {
        for nx in 4..=16 {
            for g in [SpatialGrid::one_d(nx).unwrap(), SpatialGrid::two_d(nx.min(9)).unwrap()] {
                let dense = build_laplacian(&g).matrix().to_dense();
                let scale = dense.amax();
                let mut numeric: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
                let mut analytic = laplacian_eigenvalues(&g);
                numeric.sort_by(f64::total_cmp);
                analytic.sort_by(f64::total_cmp);
                for (a, b) in analytic.iter().zip(&numeric) {
                    assert!((a - b).abs() <= 1e-10 * scale.max(1.0), "nx={nx} {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn eigenvalues_negative_and_distinct() {
        let l = axis_eigenvalues(&SpatialGrid::one_d(65).unwrap());
        assert!(l.iter().all(|&v| v < 0.0));
        assert!(l.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn negative_definite_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in [SpatialGrid::one_d(33).unwrap(), SpatialGrid::two_d(10).unwrap()] {
            let d = build_laplacian(&g);
            for _ in 0..100 {
                let v: Vec<f64> = (0..g.interior_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let dv = d.apply(&v);
                let q: f64 = v.iter().zip(&dv).map(|(a, b)| a * b).sum();
                assert!(q < 0.0);
            }
        }
    }

    #[test]
    fn norm_and_mass_examples() {
        let g = SpatialGrid::one_d(6).unwrap();
        assert_eq!(l2_norm(&Field::zeros(g)), 0.0);
        assert_eq!(mass(&Field::zeros(g)), 0.0);
        let ones = Field::from_fn(g, |_, _| 1.0);
        assert!((l2_norm(&ones) - 0.8f64.sqrt()).abs() < 1e-15);
        assert!((mass(&ones) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn energy_of_zero_field() {
        for g in [SpatialGrid::one_d(10).unwrap(), SpatialGrid::two_d(7).unwrap()] {
            let e = energy(&Field::zeros(g), 0.3);
            let expected = g.cell_volume() * g.interior_count() as f64 * 0.25;
            assert!((e - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_term_equals_laplacian_quadratic_form() {
        // Summation by parts: Σ|∇_h u|² = -uᵀ D_h u.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [SpatialGrid::one_d(17).unwrap(), SpatialGrid::two_d(8).unwrap()] {
            let u: Vec<f64> = (0..g.interior_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let du = build_laplacian(&g).apply(&u);
            let q: f64 = -u.iter().zip(&du).map(|(a, b)| a * b).sum::<f64>();
            let s = gradient_sum_of_squares(&g, &u);
            assert!((q - s).abs() < 1e-10 * s);
        }
    }

    #[test]
    fn field_rejects_bad_input() {
        let g = SpatialGrid::one_d(6).unwrap();
        assert!(matches!(Field::new(g, vec![0.0; 3]), Err(Error::FieldLength { .. })));
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn norm_is_homogeneous(vals in proptest::collection::vec(-2.0f64..2.0, 8), c in -5.0f64..5.0) {
            let g = SpatialGrid::one_d(10).unwrap();
            let f = Field::new(g, vals).unwrap();
            let lhs = l2_norm(&f.scaled(c));
            prop_assert!((lhs - c.abs() * l2_norm(&f)).abs() <= 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn energy_is_nonnegative(vals in proptest::collection::vec(-3.0f64..3.0, 16), eps in 0.01f64..1.0) {
            let g = SpatialGrid::two_d(6).unwrap();
            prop_assert!(energy(&Field::new(g, vals).unwrap(), eps) >= 0.0);
        }
    }

    #[test]
    fn homogeneity_example() {
        let g = SpatialGrid::one_d(8).unwrap();
        let f = Field::from_fn(g, |x, _| x.sin());
        assert!((l2_norm(&f.scaled(-3.0)) - 3.0 * l2_norm(&f)).abs() < 1e-14);
    }
}
