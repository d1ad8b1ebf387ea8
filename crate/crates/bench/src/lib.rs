//! Fixtures shared by the benchmarks.

use innerfn_core::{build_measure, generate, EvaluationConfig, Family, IndexWindow, InnerFunctionModel, WeightStrategy};

/// Clark model of a generated family window with zero singular factor.
pub fn family_model(family: &Family, window: IndexWindow, strategy: WeightStrategy) -> InnerFunctionModel {
    let seq = generate(family, window).expect("valid family window");
    let measure = build_measure(&seq, strategy, None).expect("valid measure");
    InnerFunctionModel::clark(measure, 0.0, EvaluationConfig::default()).expect("valid model")
}

/// Smallest and largest atom of a model.
pub fn span(model: &InnerFunctionModel) -> (f64, f64) {
    let p = model.measure().positions();
    (p[0], p[p.len() - 1])
}
