//! Independent oracles shared by the integration tests: explicit complex
//! density matrices for the two-qubit realizations and a literal copy of the
//! character tables.

#![allow(dead_code)]

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct CMat {
    pub n: usize,
    pub d: Vec<Complex64>,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, d: vec![c(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.d[i * n + i] = c(1.0, 0.0);
        }
        m
    }

    pub fn from(n: usize, v: &[Complex64]) -> Self {
        assert_eq!(v.len(), n * n);
        CMat { n, d: v.to_vec() }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.d[i * self.n + j]
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m.d[i * n + j] += a * o.at(k, j);
                }
            }
        }
        m
    }

    pub fn add(&self, o: &CMat) -> CMat {
        CMat { n: self.n, d: self.d.iter().zip(&o.d).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat { n: self.n, d: self.d.iter().map(|a| a * s).collect() }
    }

    pub fn kron(&self, o: &CMat) -> CMat {
        let n = self.n * o.n;
        let mut m = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..o.n {
                    for l in 0..o.n {
                        m.d[(i * o.n + k) * n + j * o.n + l] = self.at(i, j) * o.at(k, l);
                    }
                }
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    pub fn ket_bra(v: &[Complex64]) -> CMat {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.d[i * n + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.at(i, j) * v[j]).sum()).collect()
    }
}

/// `I, X, Y, Z`.
pub fn pauli(k: usize) -> CMat {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match k {
        0 => CMat::from(2, &[o, z, z, o]),
        1 => CMat::from(2, &[z, o, o, z]),
        2 => CMat::from(2, &[z, -i, i, z]),
        3 => CMat::from(2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

pub fn phi_plus_ket() -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]
}

pub fn phi_plus() -> CMat {
    CMat::ket_bra(&phi_plus_ket())
}

/// Partial trace of a four-qubit operator keeping qubits `keep` (in order).
pub fn keep_two_of_four(m: &CMat, keep: [usize; 2]) -> CMat {
    assert_eq!(m.n, 16);
    let traced: Vec<usize> = (0..4).filter(|q| !keep.contains(q)).collect();
    let bit = |q: usize| 1usize << (3 - q);
    let index = |kept: usize, tr: usize| {
        let mut idx = 0;
        if kept & 2 != 0 {
            idx |= bit(keep[0]);
        }
        if kept & 1 != 0 {
            idx |= bit(keep[1]);
        }
        if tr & 2 != 0 {
            idx |= bit(traced[0]);
        }
        if tr & 1 != 0 {
            idx |= bit(traced[1]);
        }
        idx
    };
    let mut out = CMat::zeros(4);
    for a in 0..4 {
        for b in 0..4 {
            let mut s = c(0.0, 0.0);
            for t in 0..4 {
                s += m.at(index(a, t), index(b, t));
            }
            out.d[a * 4 + b] = s;
        }
    }
    out
}

/// Entanglement swap: `left` on (A, C), `right` on (A', C'), effect `phi`
/// on (C, A'). Returns the outcome probability and the normalized state on
/// (A, C').
pub fn swap(left: &CMat, right: &CMat, phi: &CMat) -> (f64, CMat) {
    let joint = left.kron(right);
    let op = CMat::identity(2).kron(phi).kron(&CMat::identity(2));
    let reduced = keep_two_of_four(&op.mul(&joint), [0, 3]);
    let p = reduced.trace().re;
    (p, reduced.scale(c(1.0 / p, 0.0)))
}

/// `tr(X sigma_i (x) sigma_j) / 2`.
pub fn coefficients(x: &CMat) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * x.mul(&pauli(i).kron(&pauli(j))).trace().re;
        }
    }
    out
}

/// `tr(M sigma_i) / sqrt 2`.
pub fn embed(m: &CMat) -> [f64; 4] {
    let mut v = [0.0; 4];
    for (i, x) in v.iter_mut().enumerate() {
        *x = m.mul(&pauli(i)).trace().re / 2f64.sqrt();
    }
    v
}

/// `(I + n . sigma) / 2` for a real Bloch vector `(x, y, z)`.
pub fn qubit_effect(x: f64, y: f64, z: f64) -> CMat {
    pauli(0)
        .add(&pauli(1).scale(c(x, 0.0)))
        .add(&pauli(2).scale(c(y, 0.0)))
        .add(&pauli(3).scale(c(z, 0.0)))
        .scale(c(0.5, 0.0))
}

/// Measurement operators on (C leg, A leg) with their labels.
pub fn bell_measurement(povm: bool) -> Vec<CMat> {
    let id = pauli(0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // exp(-i pi Y / 4) = (I - i Y) / sqrt 2
    let s = id.add(&pauli(2).scale(c(0.0, -1.0))).scale(c(h, 0.0));
    let weight = if povm { 0.5 } else { 1.0 };
    let mut out: Vec<CMat> = (0..4)
        .map(|k| CMat::ket_bra(&pauli(k).kron(&id).apply(&phi_plus_ket())).scale(c(weight, 0.0)))
        .collect();
    if povm {
        for k in 0..4 {
            let op = s.mul(&pauli(k)).kron(&id);
            out.push(CMat::ket_bra(&op.apply(&phi_plus_ket())).scale(c(weight, 0.0)));
        }
    }
    out
}

/// Character tables as literal integer pairs `(re, im)`.
pub fn table_d4() -> (Vec<i64>, Vec<Vec<(i64, i64)>>) {
    let r = |v: [i64; 5]| v.iter().map(|&x| (x, 0)).collect::<Vec<_>>();
    (
        vec![1, 2, 1, 2, 2],
        vec![r([1, 1, 1, 1, 1]), r([1, 1, 1, -1, -1]), r([1, -1, 1, 1, -1]), r([1, -1, 1, -1, 1]), r([2, 0, -2, 0, 0])],
    )
}

pub fn table_k4() -> (Vec<i64>, Vec<Vec<(i64, i64)>>) {
    let r = |v: [i64; 4]| v.iter().map(|&x| (x, 0)).collect::<Vec<_>>();
    (vec![1; 4], vec![r([1, 1, 1, 1]), r([1, 1, -1, -1]), r([1, -1, 1, -1]), r([1, -1, -1, 1])])
}

pub fn table_z4() -> (Vec<i64>, Vec<Vec<(i64, i64)>>) {
    (
        vec![1; 4],
        vec![
            vec![(1, 0), (1, 0), (1, 0), (1, 0)],
            vec![(1, 0), (0, 1), (-1, 0), (0, -1)],
            vec![(1, 0), (0, -1), (-1, 0), (0, 1)],
            vec![(1, 0), (-1, 0), (1, 0), (-1, 0)],
        ],
    )
}

/// `(1/|G|) sum_j |C_j| conj(chi_i(j)) v_j` for real class values.
pub fn inner_products(table: &(Vec<i64>, Vec<Vec<(i64, i64)>>), v: &[f64]) -> Vec<(f64, f64)> {
    let order: i64 = table.0.iter().sum();
    table
        .1
        .iter()
        .map(|row| {
            let mut re = 0.0;
            let mut im = 0.0;
            for ((&(a, b), &s), &x) in row.iter().zip(&table.0).zip(v) {
                re += (s * a) as f64 * x;
                im -= (s * b) as f64 * x;
            }
            (re / order as f64, im / order as f64)
        })
        .collect()
}
