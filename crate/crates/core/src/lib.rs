//! Parareal solvers for the Cahn–Hilliard equation
//!
//! ```text
//! u_t = Δ(f(u) - ε² Δu),   f(u) = u³ - u
//! ```
//!
//! on `(0,1)^d`, `d = 1, 2`, with finite differences in space and
//! convex-splitting schemes in time.
//!
//! * [`grid`]: meshes, the discrete Laplacian, norms, energy and mass.
//! * [`schemes`]: the one-step propagators (Linear-A, Linear-B, the
//!   nonlinear Eyre scheme, and Linear-A by domain decomposition).
//! * [`parareal`]: the five fine/coarse pairings and the iteration itself.
//! * [`theory`]: contraction factors and the error envelopes they imply.
//! * [`ddm`]: the Neumann–Neumann solver for Linear-A in 1D.
//!
//! ```
//! use ch_parareal::{AlgorithmVariant, InitialCondition, Parareal, ParerealConfig, SpatialGrid, TimePartition};
//!
//! let grid = SpatialGrid::from_h_denominator(1, 32)?;
//! let partition = TimePartition::new(0.5, 5, 20)?;
//! let engine = Parareal::new(ParerealConfig::new(AlgorithmVariant::Pa1, partition, 0.1), grid)?;
//! let trace = engine.run(&InitialCondition::smooth_sine().build(grid), 1e-8, None)?;
//! assert!(trace.converged_at.unwrap() <= 5);
//! # Ok::<(), ch_parareal::Error>(())
//! ```

pub mod ddm;
pub mod error;
pub mod grid;
pub mod initial;
pub mod linalg;
pub mod parareal;
pub mod schemes;
pub mod theory;

pub use ddm::{nn_propagator, nn_time_step, Decomposition, InterfaceTraces, NeumannNeumann, NnParams};
pub use error::{Error, Result};
pub use grid::{energy, l2_norm, mass, Field, SpatialGrid};
pub use initial::InitialCondition;
pub use parareal::{
    AlgorithmVariant, BoundMode, FineSolver, IterationRecord, IterationTrace, Parareal, ParerealConfig, ParerealState,
    TimePartition,
};
pub use schemes::{NnConfig, Propagator, PropagatorSpec, Scheme, StepReport};
pub use theory::BoundParams;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/parareal.md")]
    mod parareal {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/neumann-neumann.md")]
    mod neumann_neumann {}
}
