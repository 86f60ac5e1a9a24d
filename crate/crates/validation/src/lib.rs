//! Executable versions of the published claims about the solvers: one
//! check per acceptance criterion, each returning a [`Verdict`] with the
//! measured values.

use ch_parareal::theory::{self, toeplitz_inverse, toeplitz_iteration_matrix, toeplitz_norm_bound};
use ch_parareal::{
    nn_time_step, AlgorithmVariant, BoundMode, Decomposition, Field, FineSolver, InitialCondition, IterationTrace,
    NnConfig, NnParams, Parareal, ParerealConfig, Propagator, PropagatorSpec, Scheme, SpatialGrid, TimePartition,
};
use nalgebra::DMatrix;

/// `sin(2πx)`, the initial condition of the experiment presets.
pub const IC: InitialCondition = InitialCondition::Sine {
    amplitude: 1.0,
    mode: 2,
};
const TOL: f64 = 1e-6;
const EPS: f64 = 0.0725;

pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn all(parts: &[Verdict]) -> Verdict {
    let detail = parts
        .iter()
        .map(|v| format!("{}{}", if v.pass { "" } else { "[x] " }, v.detail))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(parts.iter().all(|v| v.pass), detail)
}

fn grid_1d(h_den: usize) -> SpatialGrid {
    SpatialGrid::from_h_denominator(1, h_den).unwrap()
}

fn engine(variant: AlgorithmVariant, grid: SpatialGrid, t: f64, n: usize, j: usize, eps: f64) -> Parareal {
    let partition = TimePartition::new(t, n, j).unwrap();
    Parareal::new(ParerealConfig::new(variant, partition, eps), grid).unwrap()
}

fn run(engine: &Parareal, u0: &Field, bound: BoundMode) -> IterationTrace {
    let trace = engine.run_with_bound(u0, TOL, None, bound).unwrap();
    if let Some(e) = &trace.failure {
        panic!("{} failed: {e}", engine.config().variant);
    }
    trace
}

fn baseline(variant: AlgorithmVariant, eps: f64) -> IterationTrace {
    let grid = grid_1d(64);
    run(
        &engine(variant, grid, 1.0, 20, 200, eps),
        &IC.build(grid),
        BoundMode::Theory,
    )
}

fn iterations(trace: &IterationTrace) -> usize {
    trace
        .converged_at
        .unwrap_or_else(|| panic!("{} did not reach {TOL}: {:?}", trace.variant, trace.errors()))
}

/// Every variant reproduces the serial fine solution after `N` iterations.
pub fn finite_step_convergence() -> Verdict {
    let grid = SpatialGrid::one_d(10).unwrap();
    let u0 = InitialCondition::default().build(grid);
    let parts: Vec<_> = AlgorithmVariant::ALL
        .into_iter()
        .map(|variant| {
            let e = engine(variant, grid, 0.5, 4, 4, 0.1);
            let reference = e.serial_fine_reference(&u0).unwrap();
            let scale = 1.0 + reference.iter().map(|u| u.l2_norm()).fold(0.0, f64::max);
            let trace = e.run(&u0, f64::MIN_POSITIVE, Some(4)).unwrap();
            let last = trace.records.last().unwrap();
            let ok = trace.failure.is_none() && last.k <= 4 && last.error <= 1e-12 * scale;
            verdict(ok, format!("{variant} error {:.1e} at k={}", last.error, last.k))
        })
        .collect();
    all(&parts)
}

/// PA-I at `T=1, h=1/64, N=20, J=200` reaches `1e-6` within 10 iterations, and
/// with `N=50` is below `1e-4` by iteration 4.
pub fn baseline_convergence() -> Verdict {
    let k = iterations(&baseline(AlgorithmVariant::Pa1, EPS));
    let grid = grid_1d(64);
    let trace = run(
        &engine(AlgorithmVariant::Pa1, grid, 1.0, 50, 200, EPS),
        &IC.build(grid),
        BoundMode::None,
    );
    let e4 = trace.records.get(4).map_or(0.0, |r| r.error);
    all(&[
        verdict(k <= 10, format!("N=20 converged in {k} iterations")),
        verdict(e4 < 1e-4, format!("N=50 error {e4:.2e} at k=4")),
    ])
}

/// `bound / error` at iteration 3.
fn gap_at_3(trace: &IterationTrace) -> f64 {
    let r = &trace.records[3];
    r.bound.unwrap() / r.error
}

/// The bounds of PA-I/II/III dominate the measured error, and are sharper for
/// `ε = 0.725` than for `ε = 0.0725`.
pub fn theory_domination() -> Verdict {
    let mut parts = Vec::new();
    for variant in [AlgorithmVariant::Pa1, AlgorithmVariant::Pa2, AlgorithmVariant::Pa3] {
        let trace = baseline(variant, EPS);
        let worst = trace
            .records
            .iter()
            .skip(1)
            .map(|r| r.bound.unwrap() / r.error)
            .fold(f64::INFINITY, f64::min);
        parts.push(verdict(worst >= 1.0, format!("{variant} min bound/error {worst:.3}")));
    }
    let small = gap_at_3(&baseline(AlgorithmVariant::Pa1, EPS));
    let large = gap_at_3(&baseline(AlgorithmVariant::Pa1, 0.725));
    parts.push(verdict(
        large < small,
        format!("k=3 bound/error {large:.3e} (eps=0.725) vs {small:.3e} (eps=0.0725)"),
    ));
    all(&parts)
}

/// 50 steps of each scheme never increase the discrete energy, for
/// `Δt ∈ {1e-3, 1e-2, 1e-1, 1}`.
pub fn gradient_stability() -> Verdict {
    let grid = grid_1d(64);
    let mut parts = Vec::new();
    for scheme in [Scheme::LinearA, Scheme::LinearB, Scheme::NonlinearEyre] {
        let mut worst = f64::NEG_INFINITY;
        for dt in [1e-3, 1e-2, 1e-1, 1.0] {
            let p = Propagator::new(PropagatorSpec::new(scheme, dt, EPS), grid).unwrap();
            let mut u = InitialCondition::default().build(grid);
            for _ in 0..50 {
                let (next, r) = p.step(&u).unwrap();
                worst = worst.max((r.energy_after - r.energy_before) / r.energy_before.abs());
                u = next;
            }
        }
        parts.push(verdict(
            worst <= 1e-12,
            format!("{scheme} max relative increase {worst:.1e}"),
        ));
    }
    all(&parts)
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |m| (a + (b - a) * m as f64 / (n - 1) as f64).exp())
}

fn dense_bidiagonal(beta: f64, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    for r in 1..n {
        m[(r, r - 1)] = -beta;
    }
    m
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense `P_{J} - P_c` on the matrix Laplacian, for `‖·‖₂` against the
/// analytic norm.
fn dense_p(grid: &SpatialGrid, i: f64, dt: f64, eps: f64, j: Option<usize>) -> DMatrix<f64> {
    let d = ch_parareal::grid::build_laplacian(grid).matrix().to_dense();
    let n = d.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let step = |dt: f64| {
        let lhs = &id - &d * (i * dt) + &d * &d * (eps * eps * dt);
        lhs.lu().solve(&(&id - &d * (i * dt))).unwrap()
    };
    match j {
        None => step(dt),
        Some(j) => {
            let s = step(dt / j as f64);
            (0..j).fold(id.clone(), |acc, _| &s * acc)
        }
    }
}

/// `g_i ∈ (0,1)`, `|φ_i| < 1`, and the Toeplitz and `P`-norm closed forms
/// against dense linear algebra.
pub fn lemma_suite() -> Verdict {
    let mut g_ok = true;
    let mut phi_max: f64 = 0.0;
    for (dt, eps) in [(0.05, 0.0725), (0.05, 0.725), (1.0, 0.0725), (0.02, 0.0625)] {
        for y in log_space(1.0, 1e6, 10_000) {
            for i in 1..=3 {
                let gi = theory::g(i, y, dt, eps).unwrap();
                g_ok &= gi > 0.0 && gi < 1.0;
                phi_max = phi_max.max(theory::phi(i, y, dt, eps, 200).unwrap().abs());
            }
        }
    }

    let mut toeplitz_err: f64 = 0.0;
    for n in 1..=10 {
        for beta in [0.0, 0.3, 0.9831530394637746, 1.0] {
            let inv = dense_bidiagonal(beta, n).try_inverse().unwrap();
            toeplitz_err = toeplitz_err.max(max_abs(&(&inv - toeplitz_inverse(beta, n))));
            let mut shift = DMatrix::zeros(n, n);
            for r in 1..n {
                shift[(r, r - 1)] = 1.0;
            }
            let t = inv * shift;
            toeplitz_err = toeplitz_err.max(max_abs(&(&t - toeplitz_iteration_matrix(beta, n))));
            let mut power = DMatrix::identity(n, n);
            for k in 1..=n {
                power = &power * &t;
                let col = theory::toeplitz_power_column(beta, n, k);
                toeplitz_err = toeplitz_err.max(
                    power
                        .column(0)
                        .iter()
                        .zip(col.iter())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                );
                if row_sum_norm(&power) > toeplitz_norm_bound(beta, n, k) * (1.0 + 1e-13) + 1e-13 {
                    toeplitz_err = f64::INFINITY;
                }
            }
        }
    }

    let mut p_err: f64 = 0.0;
    for (dim, nodes) in [(1, 6), (1, 9), (1, 12), (2, 6), (2, 9)] {
        let grid = SpatialGrid::new(dim, nodes).unwrap();
        for i in [1u8, 2] {
            let (dt, j) = (0.05, 7);
            let analytic = theory::p_difference_norm(i, dt, EPS, j, &grid).unwrap();
            let m = dense_p(&grid, i as f64, dt, EPS, Some(j)) - dense_p(&grid, i as f64, dt, EPS, None);
            p_err = p_err.max((spectral(&m) - analytic).abs());
            let coarse = theory::p_matrix_norm(&theory::PMatrixSpec::coarse(i, dt, EPS), &grid).unwrap();
            p_err = p_err.max((spectral(&dense_p(&grid, i as f64, dt, EPS, None)) - coarse).abs());
        }
    }

    all(&[
        verdict(g_ok && phi_max < 1.0, format!("g_i in (0,1), max |phi_i| {phi_max:.4}")),
        verdict(
            toeplitz_err <= 1e-13,
            format!("Toeplitz closed forms off by {toeplitz_err:.1e}"),
        ),
        verdict(p_err <= 1e-10, format!("P-norms off by {p_err:.1e}")),
    ])
}

fn spectral(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

fn npa_trace(variant: AlgorithmVariant, j: usize) -> IterationTrace {
    let grid = grid_1d(64);
    run(
        &engine(variant, grid, 20.0, 20, j, EPS),
        &IC.build(grid),
        BoundMode::Theory,
    )
}

/// Every Newton solve of the NPA baselines converges to `1e-10` within 20 iterations.
pub fn newton_contract() -> Verdict {
    let parts: Vec<_> = [
        (AlgorithmVariant::Npa1, 200),
        (AlgorithmVariant::Npa2, 200),
        (AlgorithmVariant::Npa2, 150),
    ]
    .into_iter()
    .map(|(variant, j)| {
        let trace = npa_trace(variant, j);
        let stats = trace
            .records
            .iter()
            .flat_map(|r| [r.fine_stats, r.coarse_stats])
            .chain([trace.reference_stats]);
        let (iters, residual) = stats.fold((0, 0.0_f64), |(i, r), s| {
            (i.max(s.max_newton_iterations), r.max(s.max_residual))
        });
        verdict(
            iters <= 20 && residual <= 1e-10,
            format!("{variant} J={j}: <= {iters} Newton iterations, residual <= {residual:.1e}"),
        )
    })
    .collect();
    all(&parts)
}

/// Estimated LTE constants within a factor of 5 of the published ones, and the
/// NPA bounds built from them dominate the error.
pub fn lte_constants() -> Verdict {
    let mut parts = Vec::new();
    for (variant, published) in [(AlgorithmVariant::Npa1, 0.1181), (AlgorithmVariant::Npa2, 0.1498)] {
        let trace = npa_trace(variant, 200);
        let c = trace.lte_constant.unwrap();
        parts.push(verdict(
            c >= published / 5.0 && c <= published * 5.0,
            format!("{variant} C1 {c:.4} (x{:.2} of {published})", c / published),
        ));
        let dominated = trace.records.iter().skip(1).all(|r| r.bound.unwrap() >= r.error);
        parts.push(verdict(dominated, format!("{variant} bound dominates: {dominated}")));
    }
    all(&parts)
}

/// PA-I iteration counts across mesh widths and across `ε ∈ {0.0725, 0.1, 0.3}`
/// (the latter with `N = 50`).
pub fn robustness() -> Verdict {
    let pa1 = |h_den: usize, n: usize, eps: f64| {
        let grid = grid_1d(h_den);
        iterations(&run(
            &engine(AlgorithmVariant::Pa1, grid, 1.0, n, 200, eps),
            &IC.build(grid),
            BoundMode::None,
        ))
    };
    let (coarse, fine) = (pa1(64, 20, EPS), pa1(128, 20, EPS));
    let counts: Vec<usize> = [0.0725, 0.1, 0.3].into_iter().map(|eps| pa1(64, 50, eps)).collect();
    let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
    all(&[
        verdict(
            coarse.abs_diff(fine) <= 1,
            format!("h=1/64: {coarse}, h=1/128: {fine} iterations"),
        ),
        verdict(
            spread <= 2,
            format!("eps 0.0725/0.1/0.3 at N=50: {counts:?} iterations"),
        ),
    ])
}

/// Neumann-Neumann steps reproduce Linear-A, and PA-I converges as fast with
/// them as with the direct fine solver.
pub fn neumann_neumann() -> Verdict {
    let grid = grid_1d(128);
    let dt = 1.0 / 4000.0;
    let decomposition = Decomposition::new(&grid, 8).unwrap();
    let params = NnParams::default();
    let direct = Propagator::new(PropagatorSpec::new(Scheme::LinearA, dt, EPS), grid).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let u = InitialCondition::SeededRandom { seed, amplitude: 1.0 }.build(grid);
        let a = nn_time_step(&u, &decomposition, &params, dt, EPS).unwrap();
        let b = direct.step_linear_a(&u).unwrap();
        worst = worst.max(
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
    }

    let partition = TimePartition::new(1.0, 20, 200).unwrap();
    let u0 = IC.build(grid);
    let plain = iterations(&run(
        &Parareal::new(ParerealConfig::new(AlgorithmVariant::Pa1, partition, EPS), grid).unwrap(),
        &u0,
        BoundMode::None,
    ));
    let nn_config = ParerealConfig::new(AlgorithmVariant::Pa1, partition, EPS)
        .with_fine_solver(FineSolver::NeumannNeumann(NnConfig { subdomains: 8, params }));
    let with_nn = iterations(&run(&Parareal::new(nn_config, grid).unwrap(), &u0, BoundMode::None));
    all(&[
        verdict(worst <= 1e-8, format!("20 states, max deviation {worst:.1e}")),
        verdict(
            plain.abs_diff(with_nn) <= 1,
            format!("PA-I {plain} vs PA-I+NN {with_nn} iterations"),
        ),
    ])
}

fn fingerprint(trace: &IterationTrace) -> Vec<u64> {
    let records = trace.records.iter().flat_map(|r| {
        [r.error, r.bound.unwrap_or(f64::NAN), r.energy, r.mass]
            .into_iter()
            .chain(r.norms.iter().copied())
    });
    let iterates = trace.final_iterates.iter().flat_map(|u| u.values().iter().copied());
    records.chain(iterates).map(f64::to_bits).collect()
}

/// Traces and final iterates are bit-identical for 1, 4 and 8 workers.
pub fn determinism() -> Verdict {
    let grid = grid_1d(64);
    let u0 = IC.build(grid);
    let mut cases: Vec<(String, ParerealConfig)> = AlgorithmVariant::ALL
        .into_iter()
        .map(|v| {
            let t = if v.is_nonlinear() { 20.0 } else { 1.0 };
            (
                v.to_string(),
                ParerealConfig::new(v, TimePartition::new(t, 20, 200).unwrap(), EPS),
            )
        })
        .collect();
    cases.push((
        "pa3+nn".into(),
        ParerealConfig::new(AlgorithmVariant::Pa3, TimePartition::new(1.0, 10, 40).unwrap(), EPS).with_fine_solver(
            FineSolver::NeumannNeumann(NnConfig {
                subdomains: 8,
                params: NnParams::default(),
            }),
        ),
    ));
    let mut identical = Vec::new();
    let mut differing = Vec::new();
    for (name, config) in cases {
        let prints: Vec<_> = [1, 4, 8]
            .into_iter()
            .map(|w| {
                fingerprint(&run(
                    &Parareal::new(config.with_workers(w), grid).unwrap(),
                    &u0,
                    BoundMode::Theory,
                ))
            })
            .collect();
        if prints.windows(2).all(|p| p[0] == p[1]) {
            identical.push(name);
        } else {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "workers 1/4/8 bit-identical: [{}]; differing: [{}]",
            identical.join(", "),
            differing.join(", ")
        ),
    )
}

pub type Check = fn() -> Verdict;

pub const CRITERIA: [(&str, Check); 10] = [
    ("finite-step convergence", finite_step_convergence),
    ("baseline convergence", baseline_convergence),
    ("theory domination", theory_domination),
    ("gradient stability", gradient_stability),
    ("lemma suite", lemma_suite),
    ("Newton contract", newton_contract),
    ("LTE constants", lte_constants),
    ("mesh and eps robustness", robustness),
    ("Neumann-Neumann oracle", neumann_neumann),
    ("determinism", determinism),
];
