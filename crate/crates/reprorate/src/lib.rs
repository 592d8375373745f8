//! Monotone integral functionals and structured-population thresholds.
//!
//! See the module docs of [`grid_fn`] and [`stieltjes`] for the function
//! representation and the integration machinery.

pub mod cli;
pub mod error;
pub mod grid_fn;
pub mod monotone_props;
pub mod population;
pub mod stieltjes;

pub use error::{Error, Result};
pub use grid_fn::{BVFn, Direction, GridFn, Interval, MonotoneFn, TailSpec, SET_A_TOL, STRICT_TOL};
pub use population::{
    Density, EnvironmentKernel, EquilibriumOutcome, EquilibriumResult, Model, Modulation,
    MonotoneFlags, RateSpec, ReproductionOrderCheck, Response, SolverConfig, ThresholdConclusion,
    ThresholdReport, VitalRates, REPRODUCTION_ORDER_TOL,
};
pub use stieltjes::{
    antitone_functional, hazard_functional, improper_stieltjes, integration_by_parts_residual,
    l1_distance, monotone_functional, stieltjes_integral, FunctionalEval, HazardEval, IbpResidual,
    IntegralResult, QuadratureConfig,
};
