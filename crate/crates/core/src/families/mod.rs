//! Explicit family representatives, quantum realizations, local-tomography
//! diagnostics and negative controls.

pub mod representatives;
pub mod controls;
pub mod quantum;
pub mod tomography;

pub use representatives::{build_family, FamilyId};
pub use quantum::{build_quantum, QuantumKind};
pub use tomography::{local_tomography_check, tomographic_completion, TomographyReport};

use crate::error::Result;
use crate::pipeline::{verify_instance, VerifyConfig, VerifyReport};

/// Builds the family and runs the full pipeline, requiring the character
/// to decompose to the family's label.
pub fn verify_family(id: FamilyId, a: f64, depth: usize) -> Result<VerifyReport> {
    let inst = build_family(id, a)?;
    let cfg = VerifyConfig { depth, expected_label: Some(id.label()), ..VerifyConfig::default() };
    verify_instance(&inst, &cfg)
}
