//! Spectral stability analysis of closed-form solitons in a PT-symmetric
//! Rosen-Morse potential with competing cubic and power-law nonlinearities.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the working precision to `f64`.

// Validity checks are written `!(x <= limit)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod linearization;
pub mod presets;
pub mod propagation;
pub mod scalar;
pub mod sweep;

pub use analytic::{
    evaluate_solution, power_flow, sample_potential, solve_constraints, stationary_residual,
    Family, Knowns, ModelSpec, Potential, PowerFlowProfile, StationaryResidual, StationarySolution,
};
pub use eigen::{
    analyze, classify, continuous_band, eig_dense, separate_discrete, Analysis, BandLocus,
    EigenConfig, EigenPair, ModeClass, Spectrum, StabilityReport, Verdict,
};
pub use error::{Error, Result};
pub use grid::{ComplexField, Grid, Order};
pub use linearization::{build_operators, direct_frechet_operator, LinearizedOperator};
pub use propagation::{measure_growth, split_step, PropagationConfig, PropagationRecord};
pub use scalar::Real;
pub use sweep::{
    detect_bifurcation, run_sweep, BifurcationEvent, SweepConfig, SweepParameter, SweepResult,
};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type ComplexField64 = ComplexField<f64>;
pub type ModelSpec64 = ModelSpec<f64>;
pub type StationarySolution64 = StationarySolution<f64>;
