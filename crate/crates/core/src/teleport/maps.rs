use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{GptInstance, StateFunctional};
use crate::linalg::RealMatrix;
use crate::TOL_EQ;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MapKind {
    /// `R = rho phi`, acting on `V_C*`.
    R,
    /// `L = phi rho`, acting on `V_A`.
    L,
}

/// A teleportation map with its outcome word and probability weight.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleportMap {
    pub matrix: RealMatrix,
    pub kind: MapKind,
    pub word: Vec<usize>,
    pub weight: f64,
    /// Whether `matrix` has been divided by `weight`.
    pub normalized: bool,
}

impl TeleportMap {
    pub fn normalized_matrix(&self) -> RealMatrix {
        if self.normalized {
            self.matrix.clone()
        } else {
            self.matrix.scale(1.0 / self.weight)
        }
    }
}

/// Single-step map for outcome `k`, unnormalized, with its probability.
pub fn teleport_map(inst: &GptInstance, k: usize, kind: MapKind) -> Result<TeleportMap> {
    if k >= inst.outcome_count() {
        return Err(Error::InvalidInput(format!(
            "outcome {k} out of range (instance has {})",
            inst.outcome_count()
        )));
    }
    let weight = inst.probability(k);
    if weight <= TOL_EQ {
        return Err(Error::ZeroProbabilityBranch { prefix: vec![k], probability: weight });
    }
    let matrix = match kind {
        MapKind::R => inst.r_map(k),
        MapKind::L => inst.l_map(k),
    };
    Ok(TeleportMap { matrix, kind, word: vec![k], weight, normalized: false })
}

/// Normalized composite `R_w / p_w` and the swapped state `R_w rho / p_w`.
///
/// Probabilities are accumulated as products of conditional step
/// probabilities; a step whose conditional probability is at most `TOL_EQ`
/// is reported as a zero-probability branch.
pub fn iterate(inst: &GptInstance, word: &[usize]) -> Result<(TeleportMap, StateFunctional)> {
    if word.is_empty() {
        return Err(Error::InvalidInput("outcome word must be nonempty".into()));
    }
    let mut t = RealMatrix::identity(inst.dim_c());
    let mut weight = 1.0;
    for (n, &k) in word.iter().enumerate() {
        if k >= inst.outcome_count() {
            return Err(Error::InvalidInput(format!("outcome {k} out of range")));
        }
        let u = &t * &inst.r_map(k);
        let p = inst.unit_pairing(&u);
        if p <= TOL_EQ {
            return Err(Error::ZeroProbabilityBranch { prefix: word[..=n].to_vec(), probability: weight * p });
        }
        weight *= p;
        t = u.scale(1.0 / p);
    }
    let state = StateFunctional::bipartite(&(&t * inst.rho()));
    let unit = crate::gpt::Effect::bipartite(&RealMatrix::outer(inst.unit_a(), inst.unit_c()));
    let state = state.assert_normalized(&unit)?;
    Ok((TeleportMap { matrix: t, kind: MapKind::R, word: word.to_vec(), weight, normalized: true }, state))
}
