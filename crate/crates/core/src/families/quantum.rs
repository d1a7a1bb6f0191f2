use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{GptInstance, InstanceParts, Outcome};
use crate::linalg::{RealMatrix, RealVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantumKind {
    BellBasis,
    D4Povm,
}

impl QuantumKind {
    pub const ALL: [QuantumKind; 2] = [QuantumKind::BellBasis, QuantumKind::D4Povm];

    pub fn name(&self) -> &'static str {
        match self {
            QuantumKind::BellBasis => "bell",
            QuantumKind::D4Povm => "povm",
        }
    }
}

impl fmt::Display for QuantumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bell" | "bell_basis" => Ok(QuantumKind::BellBasis),
            "povm" | "d4_povm" => Ok(QuantumKind::D4Povm),
            _ => Err(Error::InvalidInput(format!("unknown quantum kind '{s}'"))),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(I, X, Y, Z)`.
pub fn paulis() -> [Matrix2<Complex64>; 4] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    [
        Matrix2::new(o, z, z, o),
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(o, z, z, -o),
    ]
}

/// `v_i = tr(M sigma_i) / sqrt 2`.
pub fn embed_operator(m: &Matrix2<Complex64>) -> RealVector {
    let s = paulis();
    let v = (0..4).map(|i| (m * s[i]).trace().re * std::f64::consts::FRAC_1_SQRT_2).collect();
    RealVector::new(v).expect("finite")
}

/// `c[i][j] = tr(X sigma_i (x) sigma_j) / 2` for a two-qubit operator.
pub fn pauli_coefficients(x: &Matrix4<Complex64>) -> [[f64; 4]; 4] {
    let s = paulis();
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (x * s[i].kronecker(&s[j])).trace().re;
        }
    }
    out
}

fn projector(v: &Vector4<Complex64>) -> Matrix4<Complex64> {
    v * v.adjoint()
}

/// `|Phi+> = (|00> + |11>) / sqrt 2`.
pub fn phi_plus() -> Vector4<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0))
}

/// `exp(-i pi Y / 4)`.
pub fn phase_operator() -> Matrix2<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(c(h, 0.0), c(-h, 0.0), c(h, 0.0), c(h, 0.0))
}

/// `(label, weight, vector)` for the rank-one elements of the measurement,
/// on the (Charlie leg, Alice leg) pair.
pub fn measurement_vectors(kind: QuantumKind) -> Vec<(String, f64, Vector4<Complex64>)> {
    let s = paulis();
    let id = s[0];
    let bell: Vec<Vector4<Complex64>> = (0..4).map(|k| s[k].kronecker(&id) * phi_plus()).collect();
    let names = ["I", "X", "Y", "Z"];
    match kind {
        QuantumKind::BellBasis => bell.into_iter().enumerate().map(|(k, b)| (format!("b_{}", names[k]), 1.0, b)).collect(),
        QuantumKind::D4Povm => {
            let sp = phase_operator();
            let mut out: Vec<_> = bell.into_iter().enumerate().map(|(k, b)| (format!("b_{}", names[k]), 0.5, b)).collect();
            for k in 0..4 {
                out.push((format!("a_{}", names[k]), 0.5, (sp * s[k]).kronecker(&id) * phi_plus()));
            }
            out
        }
    }
}

/// Two-qubit instance in the Pauli embedding: the state `|Phi+>`, Alice
/// measuring X and Z, Charlie measuring `(X + Z)/sqrt 2` and `(X - Z)/sqrt 2`,
/// with the Y projectors added on both sides so the local effects span.
pub fn build_quantum(kind: QuantumKind) -> Result<GptInstance> {
    let s = paulis();
    let half = c(0.5, 0.0);
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let eff = |m: Matrix2<Complex64>| embed_operator(&((s[0] + m) * half));
    let unit = embed_operator(&s[0]);
    let e0 = eff(s[1]);
    let e1 = eff(s[3]);
    let f0 = eff((s[1] + s[3]) * h);
    let f1 = eff((s[1] - s[3]) * h);
    let y = eff(s[2]);

    let state = pauli_coefficients(&projector(&phi_plus()));
    // rho[j][i] = c[i][j] with i on Alice's leg
    let rho = RealMatrix::from_rows(&(0..4).map(|j| (0..4).map(|i| state[i][j]).collect()).collect::<Vec<_>>())?;

    let measurement = measurement_vectors(kind)
        .into_iter()
        .map(|(label, w, v)| {
            // coefficients c[j][i] with j on Charlie's leg; phi[i][j] = c[j][i]
            let coeff = pauli_coefficients(&(projector(&v) * c(w, 0.0)));
            let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| coeff[j][i]).collect()).collect();
            Ok(Outcome::new(label, RealMatrix::from_rows(&rows)?))
        })
        .collect::<Result<Vec<_>>>()?;

    GptInstance::new(InstanceParts {
        unit_a: unit.clone(),
        unit_c: unit,
        e0,
        e1,
        f0,
        f1,
        extra_a: vec![y.clone()],
        extra_c: vec![y],
        rho,
        measurement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_operator_squares_to_minus_i_y() {
        let s = phase_operator();
        let p = paulis();
        let expected = p[2] * c(0.0, -1.0);
        assert!((s * s - expected).norm() < 1e-15);
    }

    #[test]
    fn embedding_preserves_trace_pairing() {
        let p = paulis();
        let a = (p[0] + p[1] * c(0.3, 0.0)) * c(0.5, 0.0);
        let b = (p[0] + p[2] * c(-0.7, 0.0) + p[3] * c(0.1, 0.0)) * c(0.5, 0.0);
        let direct = (a * b).trace().re;
        assert!((embed_operator(&a).dot(&embed_operator(&b)) - direct).abs() < 1e-15);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("bell".parse::<QuantumKind>().unwrap(), QuantumKind::BellBasis);
        assert_eq!("d4-povm".parse::<QuantumKind>().unwrap(), QuantumKind::D4Povm);
        assert!("ghz".parse::<QuantumKind>().is_err());
    }
}
