//! Instances that must fail verification.

use crate::error::{Error, Result};
use crate::families::representatives::{build_family, chsh_effects, generated_group, FamilyId};
use crate::gpt::{GptInstance, InstanceParts, Outcome};
use crate::linalg::{RealMatrix, RealVector};

/// Adds `delta` to one entry of one measurement effect.
pub fn perturb_measurement(inst: &GptInstance, outcome: usize, row: usize, col: usize, delta: f64) -> Result<GptInstance> {
    let mut m = inst.measurement().to_vec();
    let o = m.get_mut(outcome).ok_or_else(|| Error::InvalidInput(format!("no outcome {outcome}")))?;
    if row >= o.matrix.rows() || col >= o.matrix.cols() {
        return Err(Error::InvalidInput(format!("entry ({row}, {col}) out of range")));
    }
    o.matrix.set(row, col, o.matrix.get(row, col) + delta);
    inst.with_measurement(m)
}

/// Negates one measurement effect.
pub fn negate_outcome(inst: &GptInstance, outcome: usize) -> Result<GptInstance> {
    let mut m = inst.measurement().to_vec();
    let o = m.get_mut(outcome).ok_or_else(|| Error::InvalidInput(format!("no outcome {outcome}")))?;
    o.matrix = o.matrix.scale(-1.0);
    inst.with_measurement(m)
}

/// The K4 family with the measurement replaced by the product effects
/// `e0 (x) unit` and `not e0 (x) unit`. Every swap outcome leaves a product
/// state, so no relabelling restores the CHSH value.
pub fn product_measurement(a: f64) -> Result<GptInstance> {
    let inst = build_family(FamilyId::K4Reg, a)?;
    let u = inst.unit_c().clone();
    let e0 = inst.e(0).clone();
    let not_e0 = inst.unit_a() - &e0;
    inst.with_measurement(vec![
        Outcome::new("e0 x u", RealMatrix::outer(&e0, &u)),
        Outcome::new("not e0 x u", RealMatrix::outer(&not_e0, &u)),
    ])
}

/// The K4 group representation plus one extra trivial coordinate before the
/// unit, so the trivial character occurs twice.
pub fn doubled_trivial(a: f64) -> Result<GptInstance> {
    let group = generated_group(FamilyId::K4Reg)?;
    let [e0, e1, f0, f1, _] = chsh_effects(5, a)?;
    let pad = |g: &RealMatrix| {
        let mut m = RealMatrix::zeros(5, 5);
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, g.get(i, j));
            }
        }
        m.set(3, 3, 1.0);
        m.set(4, 4, 1.0);
        m
    };
    let n = group.len() as f64;
    let measurement = group.iter().enumerate().map(|(k, g)| Outcome::new(format!("g{k}"), pad(g).scale(1.0 / n))).collect();
    let unit = RealVector::basis(5, 4);
    GptInstance::new(InstanceParts {
        unit_a: unit.clone(),
        unit_c: unit,
        e0,
        e1,
        f0,
        f1,
        extra_a: Vec::new(),
        extra_c: Vec::new(),
        rho: RealMatrix::identity(5),
        measurement,
    })
}

/// The K4 family with a quarter of the unit direction moved from the first
/// outcome to the second: the first outcome then has probability zero while
/// its map is nonzero.
pub fn zero_probability_outcome(a: f64) -> Result<GptInstance> {
    let inst = build_family(FamilyId::K4Reg, a)?;
    let mut m = inst.measurement().to_vec();
    let last = inst.dim_a() - 1;
    for (k, delta) in [(0, -0.25), (1, 0.25)] {
        let v = m[k].matrix.get(last, last);
        m[k].matrix.set(last, last, v + delta);
    }
    inst.with_measurement(m)
}
