use serde::Serialize;

use crate::error::Result;
use crate::gpt::{GptInstance, InstanceParts, Side};
use crate::linalg::{orthonormal_span, RealMatrix, RealVector};
use crate::{TOL_EQ, TOL_RANK};

#[derive(Clone, Debug, Serialize)]
pub struct TomographyReport {
    pub local_span_a: usize,
    pub local_span_c: usize,
    pub product_span: usize,
    pub full_dimension: usize,
    /// Largest max-norm distance of a measurement effect from the span of
    /// product effects.
    pub max_residual: f64,
    pub locally_tomographic: bool,
}

fn projector(basis: &[RealVector], dim: usize) -> RealMatrix {
    let mut p = RealMatrix::zeros(dim, dim);
    for b in basis {
        p = &p + &RealMatrix::outer(b, b);
    }
    p
}

/// Span of the product effects `e f^T` over the local effects of both sides,
/// and whether every measurement effect lies in it.
pub fn local_tomography_check(inst: &GptInstance) -> TomographyReport {
    let span_a = orthonormal_span(&inst.local_effects(Side::A), TOL_RANK);
    let span_c = orthonormal_span(&inst.local_effects(Side::C), TOL_RANK);
    let pa = projector(&span_a, inst.dim_a());
    let pc = projector(&span_c, inst.dim_c());
    let max_residual = inst
        .measurement()
        .iter()
        .map(|o| o.matrix.max_abs_diff(&(&(&pa * &o.matrix) * &pc)))
        .fold(0.0, f64::max);
    TomographyReport {
        local_span_a: span_a.len(),
        local_span_c: span_c.len(),
        product_span: span_a.len() * span_c.len(),
        full_dimension: inst.dim_a() * inst.dim_c(),
        max_residual,
        locally_tomographic: max_residual <= TOL_EQ,
    }
}

fn complete_side(unit: &RealVector, effects: &[RealVector]) -> Vec<RealVector> {
    let dim = unit.dim();
    let span = orthonormal_span(effects, TOL_RANK);
    let mut all = span.clone();
    all.extend((0..dim).map(|i| RealVector::basis(dim, i)));
    let full = orthonormal_span(&all, TOL_RANK);
    full[span.len()..].iter().map(|w| (w + unit).scale(0.5)).collect()
}

/// Adds `(w + unit) / 2` on each side for an orthonormal basis `{w}` of the
/// orthocomplement of the current local effect span.
pub fn tomographic_completion(inst: &GptInstance) -> Result<GptInstance> {
    let mut parts: InstanceParts = inst.parts().clone();
    let add_a = complete_side(inst.unit_a(), &inst.local_effects(Side::A));
    let add_c = complete_side(inst.unit_c(), &inst.local_effects(Side::C));
    parts.extra_a.extend(add_a);
    parts.extra_c.extend(add_c);
    GptInstance::new(parts)
}
