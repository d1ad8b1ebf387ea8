//! Numerics for meromorphic inner functions with a prescribed real spectrum.
//!
//! A separated sequence Λ is turned into a Clark measure, whose Cauchy
//! transform gives `Θ = (Kμ - 1)/(Kμ + 1)`. From there the crate evaluates the
//! boundary phase derivative `|Θ'|`, its supremum over windows, the zeros of
//! `Θ` in the upper half-plane, and the diagnostics used to tell bounded from
//! unbounded derivative regimes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clark;
pub mod error;
pub mod mif;
pub mod quad;
pub mod sequences;
pub mod sum;
pub mod transform;
pub mod zeros;

pub use clark::{
    build_measure, discrepancy, discrepancy_report, poisson_finiteness, Atom, ClarkMeasure, DiscrepancyReport,
    PoissonWitness, WeightStrategy,
};
pub use error::{Error, Result};
pub use mif::{
    krein_build, Branch, BoundaryPoint, InnerFunctionModel, KreinModel, ModelKind, PhaseIncrement, ProfileSample,
    StepFunction, SupReport,
};
pub use num_complex::Complex64;
pub use sequences::{
    classify, gaps, generate, regularity_functional, ClassifyConfig, Family, GapProfile, IndexWindow, Indexing,
    Provenance, Regime, RegimeVerdict, SeparatedSequence,
};
pub use transform::{cauchy_transform, cauchy_derivative, boundary_s, EvaluationConfig, Evaluation, TailStatus};
pub use zeros::{
    blaschke_phase_derivative, counterexample_experiment, counterexample_sweep, counting_check, find_zeros,
    BoxReport, Rect, ZeroMethod, ZeroSet,
};
