//! CHSH observables, the self-testing conditions and the dihedral
//! relabelling group acting on effects and on CHSH sign vectors.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{GptInstance, Side};
use crate::linalg::{RealMatrix, RealVector};
use crate::{TOL_EQ, TOL_MARGIN};

/// `A = 2e - unit`.
pub fn correlator(e: &RealVector, unit: &RealVector) -> RealVector {
    &e.scale(2.0) - unit
}

/// The local effects and bipartite state of a CHSH test.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshInstance {
    pub rho: RealMatrix,
    pub unit_a: RealVector,
    pub e: [RealVector; 2],
    pub unit_c: RealVector,
    pub f: [RealVector; 2],
}

impl ChshInstance {
    pub fn new(
        rho: RealMatrix,
        unit_a: RealVector,
        e: [RealVector; 2],
        unit_c: RealVector,
        f: [RealVector; 2],
    ) -> Result<Self> {
        let (dc, da) = rho.shape();
        if unit_a.dim() != da || e.iter().any(|x| x.dim() != da) {
            return Err(Error::Dimension(format!("Alice effects must have dimension {da}")));
        }
        if unit_c.dim() != dc || f.iter().any(|x| x.dim() != dc) {
            return Err(Error::Dimension(format!("Charlie effects must have dimension {dc}")));
        }
        Ok(Self { rho, unit_a, e, unit_c, f })
    }

    pub fn from_gpt(inst: &GptInstance) -> Self {
        Self {
            rho: inst.rho().clone(),
            unit_a: inst.unit_a().clone(),
            e: [inst.e(0).clone(), inst.e(1).clone()],
            unit_c: inst.unit_c().clone(),
            f: [inst.f(0).clone(), inst.f(1).clone()],
        }
    }

    /// Same effects, different bipartite state.
    pub fn with_state(&self, rho: RealMatrix) -> Result<Self> {
        if rho.shape() != self.rho.shape() {
            return Err(Error::Dimension("replacement state has the wrong shape".into()));
        }
        Ok(Self { rho, ..self.clone() })
    }

    /// `rho(e, f) = f . (rho e)`.
    pub fn pairing(&self, e: &RealVector, f: &RealVector) -> f64 {
        self.rho.matvec(e).dot(f)
    }

    pub fn a_correlator(&self, i: usize) -> RealVector {
        correlator(&self.e[i], &self.unit_a)
    }

    pub fn b_correlator(&self, j: usize) -> RealVector {
        correlator(&self.f[j], &self.unit_c)
    }

    /// `rho(A_i (x) B_j)` in the order (00, 01, 10, 11).
    pub fn correlations(&self) -> [f64; 4] {
        let a = [self.a_correlator(0), self.a_correlator(1)];
        let b = [self.b_correlator(0), self.b_correlator(1)];
        [
            self.pairing(&a[0], &b[0]),
            self.pairing(&a[0], &b[1]),
            self.pairing(&a[1], &b[0]),
            self.pairing(&a[1], &b[1]),
        ]
    }

    /// Whether {unit, e0, e1} and {unit, f0, f1} are linearly independent.
    pub fn effects_independent(&self) -> bool {
        let rank3 = |u: &RealVector, x: &RealVector, y: &RealVector| {
            let m = RealMatrix::from_rows(&[u.as_slice().to_vec(), x.as_slice().to_vec(), y.as_slice().to_vec()])
                .expect("equal lengths");
            m.rank(crate::TOL_RANK) == 3
        };
        rank3(&self.unit_a, &self.e[0], &self.e[1]) && rank3(&self.unit_c, &self.f[0], &self.f[1])
    }
}

/// Signs of a CHSH observable in the order (A0B0, A0B1, A1B0, A1B1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignVector([i8; 4]);

impl SignVector {
    pub const STANDARD: SignVector = SignVector([1, 1, 1, -1]);

    pub fn new(signs: [i8; 4]) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!("sign vector {signs:?} has entries other than +1/-1")));
        }
        let s = SignVector(signs);
        if !all_sign_vectors().contains(&s) {
            return Err(Error::InvalidInput(format!("{s} is not a CHSH observable")));
        }
        Ok(s)
    }

    pub fn signs(&self) -> [i8; 4] {
        self.0
    }

    fn as_matrix(&self) -> [[i8; 2]; 2] {
        [[self.0[0], self.0[1]], [self.0[2], self.0[3]]]
    }

    fn from_matrix(m: [[i8; 2]; 2]) -> Self {
        SignVector([m[0][0], m[0][1], m[1][0], m[1][1]])
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
        write!(f, "({s})")
    }
}

/// The D4 orbit of the standard observable, in group-index order.
pub fn all_sign_vectors() -> Vec<SignVector> {
    RelabelElement::all().map(|h| h.act_on_signs_raw(Side::A, SignVector::STANDARD)).collect()
}

type Mat2 = [[i8; 2]; 2];

fn mul2(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = [[0i8; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

const ID2: Mat2 = [[1, 0], [0, 1]];
// columns are the images of A0 and A1
const XI: Mat2 = [[0, 1], [-1, 0]];
const ETA: Mat2 = [[0, -1], [-1, 0]];

/// An element `xi^a eta^b` of the relabelling group, `index = a + 4b`.
///
/// `xi` sends `e0 -> not e1 -> not e0 -> e1 -> e0`; `eta` sends `e0 -> not e1`
/// and `e1 -> not e0`. Products compose as maps: `g * h` applies `h` first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RelabelElement {
    index: u8,
}

const NAMES: [&str; 8] = ["1", "xi", "xi^2", "xi^3", "eta", "xi eta", "xi^2 eta", "xi^3 eta"];

impl RelabelElement {
    pub const IDENTITY: RelabelElement = RelabelElement { index: 0 };
    pub const XI: RelabelElement = RelabelElement { index: 1 };
    pub const ETA: RelabelElement = RelabelElement { index: 4 };

    pub fn new(index: u8) -> Result<Self> {
        if index < 8 {
            Ok(Self { index })
        } else {
            Err(Error::InvalidInput(format!("relabelling index {index} out of range 0..8")))
        }
    }

    pub fn all() -> impl Iterator<Item = RelabelElement> {
        (0..8).map(|index| RelabelElement { index })
    }

    pub fn from_name(name: &str) -> Option<Self> {
        NAMES.iter().position(|&n| n == name).map(|i| RelabelElement { index: i as u8 })
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn name(&self) -> &'static str {
        NAMES[self.index as usize]
    }

    /// Signed permutation on the correlator coordinates `(A0, A1)`.
    pub fn correlator_matrix(&self) -> [[i8; 2]; 2] {
        let a = self.index % 4;
        let b = self.index / 4;
        let mut m = ID2;
        for _ in 0..a {
            m = mul2(m, XI);
        }
        if b == 1 {
            m = mul2(m, ETA);
        }
        m
    }

    fn from_correlator_matrix(m: Mat2) -> Self {
        Self::all().find(|h| h.correlator_matrix() == m).expect("signed permutations of two letters form D4")
    }

    pub fn compose(&self, other: &RelabelElement) -> RelabelElement {
        Self::from_correlator_matrix(mul2(self.correlator_matrix(), other.correlator_matrix()))
    }

    pub fn inverse(&self) -> RelabelElement {
        let m = self.correlator_matrix();
        Self::from_correlator_matrix([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn pow(&self, n: u32) -> RelabelElement {
        (0..n).fold(Self::IDENTITY, |acc, _| acc.compose(self))
    }

    pub fn order(&self) -> u32 {
        (1..=8).find(|&n| self.pow(n) == Self::IDENTITY).expect("finite group")
    }

    /// Linear action on span{e0, e1, unit}, as a 3x3 matrix in that basis
    /// (column `j` holds the coordinates of the image of basis vector `j`).
    pub fn action_matrix(&self) -> RealMatrix {
        let m = self.correlator_matrix();
        let m = |i: usize, j: usize| f64::from(m[i][j]);
        RealMatrix::from_rows(&[
            vec![m(0, 0), m(0, 1), 0.0],
            vec![m(1, 0), m(1, 1), 0.0],
            vec![0.5 * (1.0 - m(0, 0) - m(1, 0)), 0.5 * (1.0 - m(0, 1) - m(1, 1)), 1.0],
        ])
        .expect("3x3")
    }

    /// Images of `(e0, e1)` given the generators and the unit.
    pub fn act_on_effects(&self, e: &[RealVector; 2], unit: &RealVector) -> [RealVector; 2] {
        let t = self.action_matrix();
        let image = |j: usize| {
            let mut v = e[0].scale(t.get(0, j));
            v = &v + &e[1].scale(t.get(1, j));
            &v + &unit.scale(t.get(2, j))
        };
        [image(0), image(1)]
    }

    /// Permutation-with-negation table on `{e0, e1, not e0, not e1}`, encoded
    /// as indices into that list.
    pub fn effect_table(&self) -> [usize; 4] {
        let m = self.correlator_matrix();
        let image = |j: usize| {
            let i = if m[0][j] != 0 { 0 } else { 1 };
            if m[i][j] > 0 {
                i
            } else {
                i + 2
            }
        };
        let (i0, i1) = (image(0), image(1));
        let neg = |k: usize| (k + 2) % 4;
        [i0, i1, neg(i0), neg(i1)]
    }

    fn act_on_signs_raw(&self, side: Side, s: SignVector) -> SignVector {
        let m = self.correlator_matrix();
        let sm = s.as_matrix();
        match side {
            Side::A => SignVector::from_matrix(mul2(m, sm)),
            Side::C => SignVector::from_matrix(mul2(sm, [[m[0][0], m[1][0]], [m[0][1], m[1][1]]])),
        }
    }
}

impl fmt::Display for RelabelElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// CHSH value for the given observable signs.
pub fn chsh_value(inst: &ChshInstance, signs: &SignVector) -> f64 {
    inst.correlations().iter().zip(signs.signs()).map(|(c, s)| f64::from(s) * c).sum()
}

/// Relabels one side's effect generators; the unit is fixed.
pub fn relabel_apply(h: &RelabelElement, inst: &ChshInstance, side: Side) -> ChshInstance {
    let mut out = inst.clone();
    match side {
        Side::A => out.e = h.act_on_effects(&inst.e, &inst.unit_a),
        Side::C => out.f = h.act_on_effects(&inst.f, &inst.unit_c),
    }
    out
}

/// Image of a sign vector, chosen so that
/// `chsh_value(relabel_apply(h, inst, side), s) == chsh_value(inst, relabel_on_signs(h, side, s))`.
pub fn relabel_on_signs(h: &RelabelElement, side: Side, signs: &SignVector) -> SignVector {
    h.act_on_signs_raw(side, *signs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub a: f64,
    pub marginal_defects: [f64; 4],
    pub correlator_defects: [f64; 4],
    pub pass: bool,
}

/// Marginals `rho(A_0 (x) 1), rho(A_1 (x) 1), rho(1 (x) B_0), rho(1 (x) B_1)`
/// must vanish and the signed correlators `(-1)^{ij} rho(A_i (x) B_j)` must
/// agree on a common value `a > 1/2`.
pub fn self_test_check(inst: &ChshInstance) -> SelfTestReport {
    let marginal_defects = [
        inst.pairing(&inst.a_correlator(0), &inst.unit_c).abs(),
        inst.pairing(&inst.a_correlator(1), &inst.unit_c).abs(),
        inst.pairing(&inst.unit_a, &inst.b_correlator(0)).abs(),
        inst.pairing(&inst.unit_a, &inst.b_correlator(1)).abs(),
    ];
    let c = inst.correlations();
    let signed = [c[0], c[1], c[2], -c[3]];
    let a = signed.iter().sum::<f64>() / 4.0;
    let correlator_defects = signed.map(|x| (x - a).abs());
    let pass = marginal_defects.iter().chain(&correlator_defects).all(|&d| d <= TOL_EQ) && a > 0.5 + TOL_MARGIN;
    SelfTestReport { a, marginal_defects, correlator_defects, pass }
}

/// Pairings `rho(e_i (x) f_j) = (1 + (-1)^{ij} a) / 4` in the order (00, 01, 10, 11).
pub fn derived_pairings(a: f64) -> Result<[f64; 4]> {
    if !(a > 0.5 && a <= 1.0) {
        return Err(Error::InvalidInput(format!("a = {a} outside (1/2, 1]")));
    }
    let p = 0.25 * (1.0 + a);
    Ok([p, p, p, 0.25 * (1.0 - a)])
}

/// The four pairings `rho(e_i (x) f_j)` of an instance.
pub fn effect_pairings(inst: &ChshInstance) -> [f64; 4] {
    [
        inst.pairing(&inst.e[0], &inst.f[0]),
        inst.pairing(&inst.e[0], &inst.f[1]),
        inst.pairing(&inst.e[1], &inst.f[0]),
        inst.pairing(&inst.e[1], &inst.f[1]),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub side: Side,
    pub group: Vec<RelabelElement>,
    pub orbits: Vec<Vec<SignVector>>,
    pub free: bool,
    pub transitive: bool,
}

/// Orbits of the full group acting on Alice's side.
pub fn orbit_check() -> OrbitReport {
    orbit_check_subgroup(&RelabelElement::all().collect::<Vec<_>>(), Side::A)
}

/// Orbits of the subgroup generated by `elements`.
pub fn orbit_check_subgroup(elements: &[RelabelElement], side: Side) -> OrbitReport {
    let mut group = vec![RelabelElement::IDENTITY];
    let mut i = 0;
    while i < group.len() {
        for g in elements {
            let x = group[i].compose(g);
            if !group.contains(&x) {
                group.push(x);
            }
        }
        i += 1;
    }
    group.sort();
    let vectors = all_sign_vectors();
    let mut orbits: Vec<Vec<SignVector>> = Vec::new();
    for s in &vectors {
        if orbits.iter().any(|o| o.contains(s)) {
            continue;
        }
        let mut orbit: Vec<SignVector> = Vec::new();
        for g in &group {
            let t = relabel_on_signs(g, side, s);
            if !orbit.contains(&t) {
                orbit.push(t);
            }
        }
        orbits.push(orbit);
    }
    let free = vectors
        .iter()
        .all(|s| group.iter().filter(|g| relabel_on_signs(g, side, s) == *s).count() == 1);
    let transitive = orbits.len() == 1;
    OrbitReport { side, group, orbits, free, transitive }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(s: &str) -> SignVector {
        let mut out = [0i8; 4];
        for (i, c) in s.chars().enumerate() {
            out[i] = if c == '+' { 1 } else { -1 };
        }
        SignVector::new(out).unwrap()
    }

    #[test]
    fn relations() {
        let xi = RelabelElement::XI;
        let eta = RelabelElement::ETA;
        assert_eq!(xi.pow(4), RelabelElement::IDENTITY);
        assert_eq!(eta.pow(2), RelabelElement::IDENTITY);
        assert_eq!(eta.compose(&xi).compose(&eta), xi.pow(3));
        assert_eq!(xi.order(), 4);
        for (k, h) in RelabelElement::all().enumerate() {
            let a = (k % 4) as u32;
            let expected = if k >= 4 { xi.pow(a).compose(&eta) } else { xi.pow(a) };
            assert_eq!(h, expected);
        }
    }

    #[test]
    fn effect_table_arrows() {
        // indices: 0 = e0, 1 = e1, 2 = not e0, 3 = not e1
        assert_eq!(RelabelElement::XI.effect_table(), [3, 0, 1, 2]);
        assert_eq!(RelabelElement::ETA.effect_table(), [3, 2, 1, 0]);
        assert_eq!(RelabelElement::IDENTITY.effect_table(), [0, 1, 2, 3]);
    }

    #[test]
    fn sign_vector_validation() {
        assert!(SignVector::new([1, 1, 1, 1]).is_err());
        assert!(SignVector::new([1, 0, 1, -1]).is_err());
        assert!(SignVector::new([-1, -1, -1, 1]).is_ok());
        let all = all_sign_vectors();
        assert_eq!(all.len(), 8);
        for s in &all {
            assert_eq!(s.signs().iter().filter(|&&x| x < 0).count() % 2, 1);
        }
    }

    #[test]
    fn xi_a_on_standard() {
        assert_eq!(relabel_on_signs(&RelabelElement::XI, Side::A, &SignVector::STANDARD), sv("+---"));
        assert_eq!(relabel_on_signs(&RelabelElement::ETA, Side::C, &SignVector::STANDARD), sv("--+-"));
    }

    #[test]
    fn subgroup_orbits() {
        let sq = RelabelElement::XI.pow(2);
        let rep = orbit_check_subgroup(&[sq], Side::A);
        assert_eq!(rep.orbits.len(), 4);
        assert!(rep.orbits.iter().all(|o| o.len() == 2));
        assert!(!rep.transitive);
        let trivial = orbit_check_subgroup(&[], Side::A);
        assert_eq!(trivial.orbits.len(), 8);
        assert!(trivial.free);
    }

    #[test]
    fn derived_pairings_range() {
        assert_eq!(derived_pairings(1.0).unwrap(), [0.5, 0.5, 0.5, 0.0]);
        assert!(derived_pairings(0.5).is_err());
        assert!(derived_pairings(1.01).is_err());
    }

    #[test]
    fn correlator_of_unit_and_half_unit() {
        let u = RealVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(correlator(&u, &u), u);
        assert_eq!(correlator(&u.scale(0.5), &u), RealVector::zeros(3));
    }
}
