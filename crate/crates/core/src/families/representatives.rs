use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::chsh::{ChshInstance, RelabelElement};
use crate::error::{Error, Result};
use crate::gpt::{GptInstance, InstanceParts, Outcome};
use crate::linalg::{RealMatrix, RealVector};
use crate::repclass::GroupTag;
use crate::teleport::closure::closure_of;
use crate::teleport::correction::match_correction;
use crate::{EPS_DEDUP, TOL_EQ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    Z4Reg,
    K4Reg,
    D4_125,
    D4_135,
    D4_145,
    D4_12345,
    D4Reg,
}

impl FamilyId {
    pub const ALL: [FamilyId; 7] = [
        FamilyId::Z4Reg,
        FamilyId::K4Reg,
        FamilyId::D4_125,
        FamilyId::D4_135,
        FamilyId::D4_145,
        FamilyId::D4_12345,
        FamilyId::D4Reg,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Z4Reg => "z4_reg",
            FamilyId::K4Reg => "k4_reg",
            FamilyId::D4_125 => "d4_125",
            FamilyId::D4_135 => "d4_135",
            FamilyId::D4_145 => "d4_145",
            FamilyId::D4_12345 => "d4_12345",
            FamilyId::D4Reg => "d4_reg",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            FamilyId::D4_12345 => 6,
            FamilyId::D4Reg => 8,
            _ => 4,
        }
    }

    pub fn group(&self) -> GroupTag {
        match self {
            FamilyId::Z4Reg => GroupTag::Z4,
            FamilyId::K4Reg => GroupTag::K4,
            _ => GroupTag::D4,
        }
    }

    pub fn group_order(&self) -> usize {
        match self.group() {
            GroupTag::D4 => 8,
            _ => 4,
        }
    }

    /// Multiplicities of the irreducible characters.
    pub fn multiplicities(&self) -> Vec<u32> {
        match self {
            FamilyId::Z4Reg | FamilyId::K4Reg => vec![1, 1, 1, 1],
            FamilyId::D4_125 => vec![1, 1, 0, 0, 1],
            FamilyId::D4_135 => vec![1, 0, 1, 0, 1],
            FamilyId::D4_145 => vec![1, 0, 0, 1, 1],
            FamilyId::D4_12345 => vec![1, 1, 1, 1, 1],
            FamilyId::D4Reg => vec![1, 1, 1, 1, 2],
        }
    }

    pub fn label(&self) -> String {
        let table = crate::repclass::builtin_table(self.group());
        crate::repclass::MultiplicityVector::new(&table, self.multiplicities()).label()
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        FamilyId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown family '{s}'")))
    }
}

fn block_diag(blocks: &[RealMatrix]) -> RealMatrix {
    let n: usize = blocks.iter().map(RealMatrix::rows).sum();
    let mut m = RealMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                m.set(off + i, off + j, b.get(i, j));
            }
        }
        off += b.rows();
    }
    m
}

fn rot() -> RealMatrix {
    RealMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).expect("2x2")
}

fn d(entries: &[f64]) -> RealMatrix {
    RealMatrix::diagonal(entries)
}

/// Generator matrices; the unit coordinate is last and fixed.
pub fn generators(id: FamilyId) -> Vec<RealMatrix> {
    match id {
        FamilyId::Z4Reg => vec![block_diag(&[rot(), d(&[-1.0, 1.0])])],
        FamilyId::K4Reg => vec![d(&[-1.0, -1.0, 1.0, 1.0]), d(&[-1.0, 1.0, -1.0, 1.0])],
        FamilyId::D4_125 => vec![block_diag(&[rot(), d(&[1.0, 1.0])]), d(&[-1.0, 1.0, -1.0, 1.0])],
        FamilyId::D4_135 => vec![block_diag(&[rot(), d(&[-1.0, 1.0])]), d(&[-1.0, 1.0, 1.0, 1.0])],
        FamilyId::D4_145 => vec![block_diag(&[rot(), d(&[-1.0, 1.0])]), d(&[-1.0, 1.0, -1.0, 1.0])],
        FamilyId::D4_12345 => vec![
            block_diag(&[rot(), d(&[1.0, -1.0, -1.0, 1.0])]),
            d(&[-1.0, 1.0, -1.0, 1.0, -1.0, 1.0]),
        ],
        FamilyId::D4Reg => vec![
            block_diag(&[rot(), rot(), d(&[1.0, -1.0, -1.0, 1.0])]),
            d(&[-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]),
        ],
    }
}

/// Finite group generated by the family's generators.
pub fn generated_group(id: FamilyId) -> Result<Vec<RealMatrix>> {
    let gens = generators(id).into_iter().enumerate().map(|(i, g)| (g, vec![i])).collect();
    let closure = closure_of(gens, EPS_DEDUP, 64)?;
    if closure.truncated {
        return Err(Error::NumericalFailure(format!("generators of {id} do not close")));
    }
    Ok(closure.elements)
}

/// `(e0, e1, f0, f1, unit)` for dimension `dim`.
pub fn chsh_effects(dim: usize, a: f64) -> Result<[RealVector; 5]> {
    if !(a > 0.5 && a <= 1.0) {
        return Err(Error::InvalidInput(format!("a = {a} outside (1/2, 1]")));
    }
    if dim < 3 {
        return Err(Error::InvalidInput("family dimension must be at least 3".into()));
    }
    let r = (a * std::f64::consts::SQRT_2).sqrt();
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let vec = |x: f64, y: f64| {
        let mut v = vec![0.0; dim];
        v[0] = 0.5 * x;
        v[1] = 0.5 * y;
        v[dim - 1] = 0.5;
        RealVector::new(v)
    };
    let e0 = vec(r, 0.0)?;
    let e1 = vec(0.0, r)?;
    // f0 = R e1, f1 = R e0 with R = [[c, c], [-c, c]]
    let f0 = vec(c * r, c * r)?;
    let f1 = vec(c * r, -c * r)?;
    Ok([e0, e1, f0, f1, RealVector::basis(dim, dim - 1)])
}

/// Family representative with `rho = identity` and the uniform group
/// measurement `{g / |H|}`. Outcomes are labelled by the relabelling each
/// group matrix induces on Alice's effects, in group-index order.
pub fn build_family(id: FamilyId, a: f64) -> Result<GptInstance> {
    let dim = id.dimension();
    let [e0, e1, f0, f1, unit] = chsh_effects(dim, a)?;
    let group = generated_group(id)?;
    let n = group.len() as f64;
    let chsh = ChshInstance::new(
        RealMatrix::identity(dim),
        unit.clone(),
        [e0.clone(), e1.clone()],
        unit.clone(),
        [f0.clone(), f1.clone()],
    )?;
    let mut labelled = Vec::with_capacity(group.len());
    for g in group {
        let h = match_correction(&g, &chsh, TOL_EQ)
            .ok_or_else(|| Error::NumericalFailure(format!("group element of {id} matches no relabelling")))?;
        labelled.push((h, g));
    }
    labelled.sort_by_key(|(h, _)| h.index());
    let measurement = labelled.into_iter().map(|(h, g)| Outcome::new(h.name(), g.scale(1.0 / n))).collect();
    GptInstance::new(InstanceParts {
        unit_a: unit.clone(),
        unit_c: unit,
        e0,
        e1,
        f0,
        f1,
        extra_a: Vec::new(),
        extra_c: Vec::new(),
        rho: RealMatrix::identity(dim),
        measurement,
    })
}

/// Relabellings attached to the outcomes of a built family.
pub fn outcome_relabellings(inst: &GptInstance) -> Vec<Option<RelabelElement>> {
    inst.measurement().iter().map(|o| RelabelElement::from_name(&o.label)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders_and_dimensions() {
        for id in FamilyId::ALL {
            let g = generated_group(id).unwrap();
            assert_eq!(g.len(), id.group_order(), "{id}");
            assert!(g.iter().all(|m| m.rows() == id.dimension()));
        }
    }

    #[test]
    fn names_round_trip() {
        for id in FamilyId::ALL {
            assert_eq!(id.name().parse::<FamilyId>().unwrap(), id);
        }
        assert!("d4_999".parse::<FamilyId>().is_err());
    }

    #[test]
    fn rejects_a_out_of_range() {
        assert!(build_family(FamilyId::K4Reg, 0.5).is_err());
        assert!(build_family(FamilyId::K4Reg, 1.01).is_err());
    }

    #[test]
    fn outcome_labels_are_distinct() {
        for id in FamilyId::ALL {
            let inst = build_family(id, 1.0).unwrap();
            let mut l: Vec<_> = inst.measurement().iter().map(|o| o.label.clone()).collect();
            l.dedup();
            assert_eq!(l.len(), id.group_order(), "{id}");
        }
    }
}
