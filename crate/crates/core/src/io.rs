//! JSON instance format (version 1).
//!
//! ```json
//! {"version": 1, "dim_a": 4, "dim_c": 4,
//!  "unit_a": [...], "unit_c": [...], "e0": [...], "e1": [...], "f0": [...], "f1": [...],
//!  "rho": [[...], ...],
//!  "measurement": [{"label": "1", "matrix": [[...], ...]}, ...],
//!  "extra_a": [[...]], "extra_c": [[...]]}
//! ```
//!
//! `extra_a` / `extra_c` are optional lists of additional local effects.
//! Numbers are written with 17 significant digits, so a write/read round
//! trip is bit-exact.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{Error, Result};
use crate::gpt::{GptInstance, InstanceParts, Outcome};
use crate::linalg::{RealMatrix, RealVector};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct OutcomeFile {
    label: String,
    matrix: RealMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    dim_a: usize,
    dim_c: usize,
    unit_a: RealVector,
    unit_c: RealVector,
    e0: RealVector,
    e1: RealVector,
    f0: RealVector,
    f1: RealVector,
    rho: RealMatrix,
    measurement: Vec<OutcomeFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    extra_a: Vec<RealVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    extra_c: Vec<RealVector>,
}

/// Compact JSON with every float printed to 17 significant digits.
struct ExactFloatFormatter;

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // keep the sign of negative zero out of the files
            return writer.write_all(b"0.0");
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f32(writer, value)
    }
}

pub fn instance_to_json(inst: &GptInstance) -> Result<String> {
    let p = inst.parts();
    let file = InstanceFile {
        version: FORMAT_VERSION,
        dim_a: inst.dim_a(),
        dim_c: inst.dim_c(),
        unit_a: p.unit_a.clone(),
        unit_c: p.unit_c.clone(),
        e0: p.e0.clone(),
        e1: p.e1.clone(),
        f0: p.f0.clone(),
        f1: p.f1.clone(),
        rho: p.rho.clone(),
        measurement: p
            .measurement
            .iter()
            .map(|o| OutcomeFile { label: o.label.clone(), matrix: o.matrix.clone() })
            .collect(),
        extra_a: p.extra_a.clone(),
        extra_c: p.extra_c.clone(),
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter);
    file.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Parses and validates an instance. Syntax errors carry line and column.
pub fn instance_from_json(text: &str) -> Result<GptInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.version != FORMAT_VERSION {
        return Err(Error::InvalidInput(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            file.version
        )));
    }
    if file.unit_a.dim() != file.dim_a || file.unit_c.dim() != file.dim_c {
        return Err(Error::Dimension(format!(
            "declared dimensions ({}, {}) disagree with the unit effects ({}, {})",
            file.dim_a,
            file.dim_c,
            file.unit_a.dim(),
            file.unit_c.dim()
        )));
    }
    for v in [&file.unit_a, &file.unit_c, &file.e0, &file.e1, &file.f0, &file.f1]
        .into_iter()
        .chain(&file.extra_a)
        .chain(&file.extra_c)
    {
        RealVector::new(v.as_slice().to_vec())?;
    }
    GptInstance::new(InstanceParts {
        unit_a: file.unit_a,
        unit_c: file.unit_c,
        e0: file.e0,
        e1: file.e1,
        f0: file.f0,
        f1: file.f1,
        extra_a: file.extra_a,
        extra_c: file.extra_c,
        rho: file.rho,
        measurement: file.measurement.into_iter().map(|o| Outcome::new(o.label, o.matrix)).collect(),
    })
}

pub fn read_instance(path: &Path) -> Result<GptInstance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}

pub fn write_instance(inst: &GptInstance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GptInstance {
        let v = |x: &[f64]| RealVector::new(x.to_vec()).unwrap();
        GptInstance::new(InstanceParts {
            unit_a: v(&[0.0, 1.0]),
            unit_c: v(&[0.0, 1.0]),
            e0: v(&[0.1, 0.5]),
            e1: v(&[-0.1, 0.5]),
            f0: v(&[1.0 / 3.0, 0.5]),
            f1: v(&[0.0, 0.5]),
            extra_a: vec![],
            extra_c: vec![],
            rho: RealMatrix::identity(2),
            measurement: vec![Outcome::new("only", RealMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap())],
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let inst = tiny();
        let text = instance_to_json(&inst).unwrap();
        assert_eq!(instance_from_json(&text).unwrap(), inst);
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn syntax_errors_report_position() {
        let text = instance_to_json(&tiny()).unwrap();
        let err = instance_from_json(&text[..text.len() / 2]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn rejects_wrong_version_and_unknown_keys() {
        let text = instance_to_json(&tiny()).unwrap();
        assert!(instance_from_json(&text.replace("\"version\":1", "\"version\":2")).is_err());
        assert!(instance_from_json(&text.replace("\"version\":1", "\"version\":1,\"bogus\":0")).is_err());
    }
}
