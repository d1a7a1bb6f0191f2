//! GPT data model: effects, states, the bipartite state map and measurement,
//! consistency checks and elimination of unreachable degrees of freedom.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{MatrixSet, RealMatrix, RealVector};
use crate::{EPS_DEDUP, TOL_EQ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    C,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::C => "C",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Party {
    A,
    C,
    Bipartite { dim_a: usize, dim_c: usize },
}

impl From<Side> for Party {
    fn from(side: Side) -> Self {
        match side {
            Side::A => Party::A,
            Side::C => Party::C,
        }
    }
}

/// An effect vector. Bipartite effects store the row-major entries of the
/// `dim_a x dim_c` map `V_C* -> V_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    party: Party,
    coords: RealVector,
}

impl Effect {
    pub fn local(side: Side, coords: RealVector) -> Self {
        Self { party: side.into(), coords }
    }

    pub fn bipartite(map: &RealMatrix) -> Self {
        Self {
            party: Party::Bipartite { dim_a: map.rows(), dim_c: map.cols() },
            coords: RealVector::new(map.as_slice().to_vec()).expect("matrix entries are finite"),
        }
    }

    /// The product effect `f (x) e`, whose map is `e f^T`.
    pub fn product(e: &RealVector, f: &RealVector) -> Self {
        Self::bipartite(&RealMatrix::outer(e, f))
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn arity(&self) -> u8 {
        match self.party {
            Party::Bipartite { .. } => 2,
            _ => 1,
        }
    }

    pub fn coords(&self) -> &RealVector {
        &self.coords
    }

    pub fn as_map(&self) -> Option<RealMatrix> {
        match self.party {
            Party::Bipartite { dim_a, dim_c } => RealMatrix::new(dim_a, dim_c, self.coords.as_slice().to_vec()).ok(),
            _ => None,
        }
    }
}

/// A state functional. Bipartite states store the row-major entries of the
/// `dim_c x dim_a` map `V_A -> V_C*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateFunctional {
    party: Party,
    coords: RealVector,
    normalized: bool,
}

impl StateFunctional {
    pub fn local(side: Side, coords: RealVector) -> Self {
        Self { party: side.into(), coords, normalized: false }
    }

    pub fn bipartite(map: &RealMatrix) -> Self {
        Self {
            party: Party::Bipartite { dim_a: map.cols(), dim_c: map.rows() },
            coords: RealVector::new(map.as_slice().to_vec()).expect("matrix entries are finite"),
            normalized: false,
        }
    }

    /// Rescales so that the pairing with `unit` is one.
    pub fn normalize(self, unit: &Effect) -> Result<Self> {
        let p = pair(&self, unit)?;
        if p.abs() <= TOL_EQ {
            return Err(Error::DegenerateInstance(format!("state has unit pairing {p:e}")));
        }
        Ok(Self { party: self.party, coords: self.coords.scale(1.0 / p), normalized: true })
    }

    /// Marks the state normalized after checking the unit pairing.
    pub fn assert_normalized(self, unit: &Effect) -> Result<Self> {
        let p = pair(&self, unit)?;
        if (p - 1.0).abs() > TOL_EQ {
            return Err(Error::InvalidInput(format!("state is not normalized (unit pairing {p})")));
        }
        Ok(Self { normalized: true, ..self })
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn arity(&self) -> u8 {
        match self.party {
            Party::Bipartite { .. } => 2,
            _ => 1,
        }
    }

    pub fn coords(&self) -> &RealVector {
        &self.coords
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn as_map(&self) -> Option<RealMatrix> {
        match self.party {
            Party::Bipartite { dim_a, dim_c } => RealMatrix::new(dim_c, dim_a, self.coords.as_slice().to_vec()).ok(),
            _ => None,
        }
    }
}

/// Pairing of a state with an effect.
pub fn pair(state: &StateFunctional, effect: &Effect) -> Result<f64> {
    if state.party != effect.party {
        return Err(Error::Dimension(format!(
            "cannot pair a {:?} state with a {:?} effect",
            state.party, effect.party
        )));
    }
    match state.party {
        Party::Bipartite { dim_a, dim_c } => {
            let s = state.coords.as_slice();
            let e = effect.coords.as_slice();
            let mut acc = 0.0;
            for i in 0..dim_c {
                for j in 0..dim_a {
                    acc += s[i * dim_a + j] * e[j * dim_c + i];
                }
            }
            Ok(acc)
        }
        _ => state.coords.checked_dot(&effect.coords),
    }
}

/// `unit - e`.
pub fn negate(e: &Effect, unit: &Effect) -> Result<Effect> {
    if e.party != unit.party || e.coords.dim() != unit.coords.dim() {
        return Err(Error::Dimension("negation needs an effect and unit of the same type".into()));
    }
    Ok(Effect { party: e.party, coords: &unit.coords - &e.coords })
}

/// Converts a bilinear form indexed `(A-effect, C-effect)` into the map
/// `V_A -> V_C*`.
pub fn bilinear_to_map(rho_form: &RealMatrix) -> RealMatrix {
    rho_form.transpose()
}

pub fn map_to_bilinear(rho_map: &RealMatrix) -> RealMatrix {
    rho_map.transpose()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub matrix: RealMatrix,
}

impl Outcome {
    pub fn new(label: impl Into<String>, matrix: RealMatrix) -> Self {
        Self { label: label.into(), matrix }
    }
}

/// Unvalidated instance data.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceParts {
    pub unit_a: RealVector,
    pub unit_c: RealVector,
    pub e0: RealVector,
    pub e1: RealVector,
    pub f0: RealVector,
    pub f1: RealVector,
    /// Additional local effects beyond the CHSH generators (negations implied).
    pub extra_a: Vec<RealVector>,
    pub extra_c: Vec<RealVector>,
    pub rho: RealMatrix,
    pub measurement: Vec<Outcome>,
}

/// A dimensionally consistent iterated-CHSH instance. Physical consistency
/// is checked separately by [`consistency_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct GptInstance {
    parts: InstanceParts,
}

impl GptInstance {
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let dim_a = parts.unit_a.dim();
        let dim_c = parts.unit_c.dim();
        if dim_a == 0 || dim_c == 0 {
            return Err(Error::InvalidInput("local dimensions must be positive".into()));
        }
        let check = |name: &str, v: &RealVector, d: usize| {
            if v.dim() == d {
                Ok(())
            } else {
                Err(Error::Dimension(format!("{name} has dimension {}, expected {d}", v.dim())))
            }
        };
        check("e0", &parts.e0, dim_a)?;
        check("e1", &parts.e1, dim_a)?;
        check("f0", &parts.f0, dim_c)?;
        check("f1", &parts.f1, dim_c)?;
        for v in &parts.extra_a {
            check("extra_a effect", v, dim_a)?;
        }
        for v in &parts.extra_c {
            check("extra_c effect", v, dim_c)?;
        }
        if parts.rho.shape() != (dim_c, dim_a) {
            return Err(Error::Dimension(format!(
                "rho is {}x{}, expected {dim_c}x{dim_a}",
                parts.rho.rows(),
                parts.rho.cols()
            )));
        }
        if parts.measurement.is_empty() {
            return Err(Error::InvalidInput("measurement has no outcomes".into()));
        }
        for o in &parts.measurement {
            if o.matrix.shape() != (dim_a, dim_c) {
                return Err(Error::Dimension(format!(
                    "measurement effect '{}' is {}x{}, expected {dim_a}x{dim_c}",
                    o.label,
                    o.matrix.rows(),
                    o.matrix.cols()
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &InstanceParts {
        &self.parts
    }

    pub fn into_parts(self) -> InstanceParts {
        self.parts
    }

    pub fn dim_a(&self) -> usize {
        self.parts.unit_a.dim()
    }

    pub fn dim_c(&self) -> usize {
        self.parts.unit_c.dim()
    }

    pub fn unit_a(&self) -> &RealVector {
        &self.parts.unit_a
    }

    pub fn unit_c(&self) -> &RealVector {
        &self.parts.unit_c
    }

    pub fn e(&self, i: usize) -> &RealVector {
        if i == 0 {
            &self.parts.e0
        } else {
            &self.parts.e1
        }
    }

    pub fn f(&self, j: usize) -> &RealVector {
        if j == 0 {
            &self.parts.f0
        } else {
            &self.parts.f1
        }
    }

    pub fn extra_a(&self) -> &[RealVector] {
        &self.parts.extra_a
    }

    pub fn extra_c(&self) -> &[RealVector] {
        &self.parts.extra_c
    }

    pub fn rho(&self) -> &RealMatrix {
        &self.parts.rho
    }

    pub fn measurement(&self) -> &[Outcome] {
        &self.parts.measurement
    }

    pub fn outcome_count(&self) -> usize {
        self.parts.measurement.len()
    }

    pub fn with_measurement(&self, measurement: Vec<Outcome>) -> Result<Self> {
        Self::new(InstanceParts { measurement, ..self.parts.clone() })
    }

    pub fn with_rho(&self, rho: RealMatrix) -> Result<Self> {
        Self::new(InstanceParts { rho, ..self.parts.clone() })
    }

    pub fn unit_effect(&self, side: Side) -> Effect {
        match side {
            Side::A => Effect::local(Side::A, self.parts.unit_a.clone()),
            Side::C => Effect::local(Side::C, self.parts.unit_c.clone()),
        }
    }

    /// `{e0, e1, not e0, not e1}` (side A) or the same for the f's.
    pub fn omega(&self, side: Side) -> Vec<RealVector> {
        let (u, x0, x1) = match side {
            Side::A => (&self.parts.unit_a, &self.parts.e0, &self.parts.e1),
            Side::C => (&self.parts.unit_c, &self.parts.f0, &self.parts.f1),
        };
        vec![x0.clone(), x1.clone(), u - x0, u - x1]
    }

    /// Omega, the unit, and the extra effects with their negations.
    pub fn local_effects(&self, side: Side) -> Vec<RealVector> {
        let (u, extras) = match side {
            Side::A => (&self.parts.unit_a, &self.parts.extra_a),
            Side::C => (&self.parts.unit_c, &self.parts.extra_c),
        };
        let mut out = self.omega(side);
        out.push(u.clone());
        for x in extras {
            out.push(x.clone());
            out.push(u - x);
        }
        out
    }

    /// `R_k = rho phi_k`, a `dim_c x dim_c` map.
    pub fn r_map(&self, k: usize) -> RealMatrix {
        &self.parts.rho * &self.parts.measurement[k].matrix
    }

    /// `L_k = phi_k rho`, a `dim_a x dim_a` map.
    pub fn l_map(&self, k: usize) -> RealMatrix {
        &self.parts.measurement[k].matrix * &self.parts.rho
    }

    /// Unit pairing of the state `T rho`.
    pub fn unit_pairing(&self, t: &RealMatrix) -> f64 {
        let sigma_u = (t * &self.parts.rho).matvec(&self.parts.unit_a);
        sigma_u.dot(&self.parts.unit_c)
    }

    /// Probability `p_k` of a single swap outcome.
    pub fn probability(&self, k: usize) -> f64 {
        self.unit_pairing(&self.r_map(k))
    }

    /// `max |sum_k phi_k - unit_a unit_c^T|`.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = RealMatrix::zeros(self.dim_a(), self.dim_c());
        for o in &self.parts.measurement {
            sum = &sum + &o.matrix;
        }
        sum.max_abs_diff(&RealMatrix::outer(&self.parts.unit_a, &self.parts.unit_c))
    }
}

/// Local marginal state: `rho^T unit_c` on side A, `rho unit_a` on side C.
pub fn marginal(inst: &GptInstance, side: Side) -> StateFunctional {
    let v = match side {
        Side::A => inst.rho().transpose().matvec(inst.unit_c()),
        Side::C => inst.rho().matvec(inst.unit_a()),
    };
    let state = StateFunctional::local(side, v);
    let unit = inst.unit_effect(side);
    match state.clone().assert_normalized(&unit) {
        Ok(s) => s,
        Err(_) => state,
    }
}

/// `tr(rho phi_1 rho phi_2 ... rho phi_N)`.
pub fn loop_trace(rho: &RealMatrix, effects: &[&RealMatrix]) -> f64 {
    let Some((last, init)) = effects.split_last() else {
        return rho.trace();
    };
    let mut acc = RealMatrix::identity(rho.rows());
    for phi in init {
        acc = &(&acc * rho) * *phi;
    }
    (&acc * rho).trace_of_product(last)
}

/// Rank factorization of the bipartite state and the compressed effects.
#[derive(Clone, Debug)]
pub struct MapReduction {
    /// Invertible `r x r` compression of rho.
    pub rho: RealMatrix,
    /// Compressed effect maps `pi phi iota`.
    pub effects: Vec<RealMatrix>,
    /// `r x dim_a` projection onto a complement of ker rho.
    pub projector_pi: RealMatrix,
    /// `dim_c x r` embedding of img rho.
    pub embedding_iota: RealMatrix,
    pub rank: usize,
    pub condition_number: f64,
}

pub fn reduce_maps(rho: &RealMatrix, effects: &[RealMatrix], tol_rank: f64) -> Result<MapReduction> {
    if !(tol_rank > 0.0) {
        return Err(Error::InvalidInput("tol_rank must be positive".into()));
    }
    let (dim_c, dim_a) = rho.shape();
    for phi in effects {
        if phi.shape() != (dim_a, dim_c) {
            return Err(Error::Dimension(format!(
                "effect map is {}x{}, expected {dim_a}x{dim_c}",
                phi.rows(),
                phi.cols()
            )));
        }
    }
    let svd = rho.to_nalgebra().svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        return Err(Error::NumericalFailure("singular value decomposition did not converge".into()));
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = crate::linalg::numerical_rank(&sv, tol_rank);
    if rank == 0 {
        return Err(Error::DegenerateInstance("bipartite state map is zero".into()));
    }
    let condition_number = sv[0] / sv[rank - 1];

    if rank == dim_a && rank == dim_c {
        return Ok(MapReduction {
            rho: rho.clone(),
            effects: effects.to_vec(),
            projector_pi: RealMatrix::identity(dim_a),
            embedding_iota: RealMatrix::identity(dim_c),
            rank,
            condition_number,
        });
    }

    let mut pi = RealMatrix::zeros(rank, dim_a);
    let mut iota = RealMatrix::zeros(dim_c, rank);
    for (r, &idx) in order.iter().take(rank).enumerate() {
        for j in 0..dim_a {
            pi.set(r, j, v_t[(idx, j)]);
        }
        for i in 0..dim_c {
            iota.set(i, r, u[(i, idx)]);
        }
    }
    let rho_t = &(&iota.transpose() * rho) * &pi.transpose();
    let effects = effects.iter().map(|phi| &(&pi * phi) * &iota).collect();
    Ok(MapReduction { rho: rho_t, effects, projector_pi: pi, embedding_iota: iota, rank, condition_number })
}

#[derive(Clone, Debug)]
pub struct ReducedInstance {
    pub instance: GptInstance,
    pub projector_pi: RealMatrix,
    pub embedding_iota: RealMatrix,
    pub original_dims: (usize, usize),
    pub condition_number: f64,
}

impl ReducedInstance {
    pub fn is_trivial(&self) -> bool {
        self.instance.dim_a() == self.original_dims.0
            && self.instance.dim_c() == self.original_dims.1
            && self.projector_pi == RealMatrix::identity(self.original_dims.0)
    }
}

/// Restricts the instance to the image of rho. Alice's effects are projected
/// by `pi`, Charlie's are pulled back along `iota`.
pub fn reduce_instance(inst: &GptInstance, tol_rank: f64) -> Result<ReducedInstance> {
    let effects: Vec<RealMatrix> = inst.measurement().iter().map(|o| o.matrix.clone()).collect();
    let red = reduce_maps(inst.rho(), &effects, tol_rank)?;
    let original_dims = (inst.dim_a(), inst.dim_c());
    if red.rank == inst.dim_a() && red.rank == inst.dim_c() {
        return Ok(ReducedInstance {
            instance: inst.clone(),
            projector_pi: red.projector_pi,
            embedding_iota: red.embedding_iota,
            original_dims,
            condition_number: red.condition_number,
        });
    }
    let pi = &red.projector_pi;
    let iota_t = red.embedding_iota.transpose();
    let p = inst.parts();
    let parts = InstanceParts {
        unit_a: pi.matvec(&p.unit_a),
        unit_c: iota_t.matvec(&p.unit_c),
        e0: pi.matvec(&p.e0),
        e1: pi.matvec(&p.e1),
        f0: iota_t.matvec(&p.f0),
        f1: iota_t.matvec(&p.f1),
        extra_a: p.extra_a.iter().map(|x| pi.matvec(x)).collect(),
        extra_c: p.extra_c.iter().map(|x| iota_t.matvec(x)).collect(),
        rho: red.rho.clone(),
        measurement: inst
            .measurement()
            .iter()
            .zip(red.effects)
            .map(|(o, m)| Outcome::new(o.label.clone(), m))
            .collect(),
    };
    Ok(ReducedInstance {
        instance: GptInstance::new(parts)?,
        projector_pi: red.projector_pi,
        embedding_iota: red.embedding_iota,
        original_dims,
        condition_number: red.condition_number,
    })
}

/// Groups outcomes with vanishing probability into the first outcome of
/// nonzero probability. Returns the merged instance and `(from, into)` pairs
/// of original indices.
pub fn merge_null_outcomes(inst: &GptInstance) -> Result<(GptInstance, Vec<(usize, usize)>)> {
    let probs: Vec<f64> = (0..inst.outcome_count()).map(|k| inst.probability(k)).collect();
    let Some(target) = probs.iter().position(|&p| p > TOL_EQ) else {
        return Err(Error::DegenerateInstance("every measurement outcome has probability zero".into()));
    };
    let mut merged: Vec<(usize, usize)> = Vec::new();
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut target_pos = 0;
    for (k, o) in inst.measurement().iter().enumerate() {
        if k != target && probs[k].abs() <= TOL_EQ {
            merged.push((k, target));
        } else {
            if k == target {
                target_pos = outcomes.len();
            }
            outcomes.push(o.clone());
        }
    }
    if merged.is_empty() {
        return Ok((inst.clone(), merged));
    }
    for &(k, _) in &merged {
        let m = &outcomes[target_pos].matrix + &inst.measurement()[k].matrix;
        outcomes[target_pos].matrix = m;
    }
    Ok((inst.with_measurement(outcomes)?, merged))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyViolation {
    pub check: &'static str,
    pub witness: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub pass: bool,
    pub depth: usize,
    pub reachable_states: usize,
    pub state_pairings_checked: usize,
    pub loop_words_checked: usize,
    pub chain_pairings_checked: usize,
    pub completeness_residual: f64,
    pub violation_count: usize,
    /// The first few violations in discovery order.
    pub violations: Vec<ConsistencyViolation>,
    pub first_witness: Option<String>,
}

const MAX_RECORDED_VIOLATIONS: usize = 32;

struct Collector {
    stop_on_first: bool,
    count: usize,
    recorded: Vec<ConsistencyViolation>,
}

impl Collector {
    fn check(&mut self, check: &'static str, value: f64, witness: impl FnOnce() -> String) -> bool {
        if (-TOL_EQ..=1.0 + TOL_EQ).contains(&value) {
            return true;
        }
        self.count += 1;
        if self.recorded.len() < MAX_RECORDED_VIOLATIONS {
            self.recorded.push(ConsistencyViolation { check, witness: witness(), value });
        }
        false
    }

    fn done(&self) -> bool {
        self.stop_on_first && self.count > 0
    }
}

fn word_string(inst: &GptInstance, word: &[usize]) -> String {
    let labels: Vec<&str> = word.iter().map(|&k| inst.measurement()[k].label.as_str()).collect();
    format!("[{}]", labels.join(", "))
}

/// Finite-depth consistency check; see [`consistency_check_with`].
pub fn consistency_check(inst: &GptInstance, depth: usize) -> Result<ConsistencyReport> {
    consistency_check_with(inst, depth, false)
}

/// Checks that
///
/// 1. every reachable swapped state (words of length at most `depth`, one
///    representative per normalized map) gives probabilities in `[0, 1]` on
///    all product effects and all measurement effects;
/// 2. every closed loop `tr(rho phi_1 ... rho phi_N)`, `N <= depth`, lies in
///    `[0, 1]`. Loops made of measurement effects only are enumerated word by
///    word. A loop containing a product effect `f (x) e` factorizes into
///    chain pairings `f . (R_w rho e)`, which are enumerated for all words
///    `w` with `|w| < depth`;
/// 3. the measurement is complete.
///
/// All tests are within `TOL_EQ`. The cost grows as `outcomes^depth`.
pub fn consistency_check_with(inst: &GptInstance, depth: usize, stop_on_first: bool) -> Result<ConsistencyReport> {
    if depth == 0 {
        return Err(Error::InvalidInput("consistency depth must be at least 1".into()));
    }
    let n = inst.outcome_count();
    let rho = inst.rho();
    let effects_a = inst.local_effects(Side::A);
    let effects_c = inst.local_effects(Side::C);
    let r_maps: Vec<RealMatrix> = (0..n).map(|k| inst.r_map(k)).collect();
    let mut col = Collector { stop_on_first, count: 0, recorded: Vec::new() };
    let mut state_pairings = 0usize;

    // (i) reachable states
    let mut seen = MatrixSet::new(EPS_DEDUP);
    seen.insert(RealMatrix::identity(inst.dim_c()));
    let mut frontier: Vec<(Vec<usize>, RealMatrix)> = vec![(Vec::new(), RealMatrix::identity(inst.dim_c()))];
    let mut level = 0;
    loop {
        let mut next = Vec::new();
        for (word, t) in &frontier {
            let sigma = t * rho;
            for (ia, e) in effects_a.iter().enumerate() {
                let se = sigma.matvec(e);
                for (ic, f) in effects_c.iter().enumerate() {
                    state_pairings += 1;
                    col.check("state_pairing", se.dot(f), || {
                        format!("state {} with product effect (C{ic}, A{ia})", word_string(inst, word))
                    });
                }
            }
            for (k, o) in inst.measurement().iter().enumerate() {
                state_pairings += 1;
                col.check("state_pairing", sigma.trace_of_product(&o.matrix), || {
                    format!("state {} with measurement effect '{}'", word_string(inst, word), o.label)
                });
                let _ = k;
            }
            if col.done() {
                break;
            }
            if level == depth {
                continue;
            }
            for (k, r) in r_maps.iter().enumerate() {
                let u = t * r;
                let p = inst.unit_pairing(&u);
                let mut w = word.clone();
                w.push(k);
                if !col.check("outcome_probability", p, || format!("outcome word {}", word_string(inst, &w))) {
                    continue;
                }
                if p <= TOL_EQ {
                    continue;
                }
                let normalized = u.scale(1.0 / p);
                if seen.insert(normalized.clone()).1 {
                    next.push((w, normalized));
                }
            }
        }
        if col.done() || next.is_empty() || level == depth {
            break;
        }
        frontier = next;
        level += 1;
    }

    // (ii) loops, by depth-first enumeration of unnormalized prefixes R_w
    let mut loop_words = 0usize;
    let mut chain_pairings = 0usize;
    let mut stack: Vec<(Vec<usize>, RealMatrix)> = vec![(Vec::new(), RealMatrix::identity(inst.dim_c()))];
    while let Some((word, prefix)) = stack.pop() {
        if col.done() {
            break;
        }
        let sigma = &prefix * rho;
        for (ia, e) in effects_a.iter().enumerate() {
            let se = sigma.matvec(e);
            for (ic, f) in effects_c.iter().enumerate() {
                chain_pairings += 1;
                col.check("chain_pairing", se.dot(f), || {
                    format!("chain {} closed by product effect (C{ic}, A{ia})", word_string(inst, &word))
                });
            }
        }
        for (k, r) in r_maps.iter().enumerate() {
            loop_words += 1;
            col.check("loop_word", prefix.trace_of_product(r), || {
                let mut w = word.clone();
                w.push(k);
                format!("loop {}", word_string(inst, &w))
            });
        }
        if word.len() + 1 < depth {
            for (k, r) in r_maps.iter().enumerate().rev() {
                let mut w = word.clone();
                w.push(k);
                stack.push((w, &prefix * r));
            }
        }
    }

    // (iii) completeness
    let completeness_residual = inst.completeness_residual();
    if completeness_residual > TOL_EQ {
        col.count += 1;
        if col.recorded.len() < MAX_RECORDED_VIOLATIONS {
            col.recorded.push(ConsistencyViolation {
                check: "completeness",
                witness: "sum of measurement effects differs from unit_a unit_c^T".into(),
                value: completeness_residual,
            });
        }
    }

    let first_witness = col.recorded.first().map(|v| format!("{}: {} (value {:e})", v.check, v.witness, v.value));
    Ok(ConsistencyReport {
        pass: col.count == 0,
        depth,
        reachable_states: seen.len(),
        state_pairings_checked: state_pairings,
        loop_words_checked: loop_words,
        chain_pairings_checked: chain_pairings,
        completeness_residual,
        violation_count: col.count,
        violations: col.recorded,
        first_witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessReport {
    pub lambda_min: f64,
    pub bound: f64,
    pub max_norm: f64,
    pub generators: usize,
    pub samples: usize,
    pub pass: bool,
}

/// Boundedness of the reachable normalized bipartite states with the default
/// depth and seed.
pub fn state_space_bounded(inst: &GptInstance, samples: usize) -> Result<BoundednessReport> {
    state_space_bounded_with(inst, samples, crate::CONSISTENCY_DEPTH, 0x5eed)
}

/// Generators are the unnormalized swapped states `R_w rho`, `|w| <= depth`.
/// With `lambda = (unit pairing) / norm` on each generator, every normalized
/// state in their cone has norm at most `1 / lambda_min`. The bound is checked
/// on the normalized generators and on `samples` random convex mixtures.
pub fn state_space_bounded_with(
    inst: &GptInstance,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<BoundednessReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let rho = inst.rho();
    let mut lambda_min = f64::INFINITY;
    let mut states: Vec<RealMatrix> = Vec::new();
    // normalized copy of a nonzero generator, tracking lambda_min
    let mut normalize = |sigma: &RealMatrix| -> Result<Option<RealMatrix>> {
        let norm = sigma.frobenius_norm();
        if norm <= TOL_EQ {
            return Ok(None);
        }
        let c = sigma.matvec(inst.unit_a()).dot(inst.unit_c());
        let lambda = c / norm;
        lambda_min = lambda_min.min(lambda);
        if lambda <= TOL_EQ {
            return Err(Error::DegenerateUnit { lambda_min: lambda });
        }
        Ok(Some(sigma.scale(1.0 / c)))
    };

    if let Some(s) = normalize(rho)? {
        states.push(s);
    }
    let mut seen = MatrixSet::new(EPS_DEDUP);
    seen.insert(RealMatrix::identity(inst.dim_c()));
    let mut frontier = vec![RealMatrix::identity(inst.dim_c())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            for k in 0..inst.outcome_count() {
                let u = t * &inst.r_map(k);
                let Some(state) = normalize(&(&u * rho))? else { continue };
                let p = inst.unit_pairing(&u);
                let map = u.scale(1.0 / p);
                if seen.insert(map.clone()).1 {
                    next.push(map);
                    states.push(state);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let bound = 1.0 / lambda_min;
    let mut max_norm = states.iter().map(RealMatrix::frobenius_norm).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let weights: Vec<f64> = states.iter().map(|_| rng.gen::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let mut mix = RealMatrix::zeros(inst.dim_c(), inst.dim_a());
        for (w, s) in weights.iter().zip(&states) {
            mix = &mix + &s.scale(w / total);
        }
        max_norm = max_norm.max(mix.frobenius_norm());
    }
    Ok(BoundednessReport {
        lambda_min,
        bound,
        max_norm,
        generators: states.len(),
        samples,
        pass: max_norm <= bound * (1.0 + TOL_EQ) + TOL_EQ,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TOL_RANK;

    fn v(x: &[f64]) -> RealVector {
        RealVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn negation_is_involutive() {
        let unit = Effect::local(Side::A, v(&[0.0, 0.0, 1.0]));
        let e = Effect::local(Side::A, v(&[0.3, -0.25, 0.5]));
        assert_eq!(negate(&negate(&e, &unit).unwrap(), &unit).unwrap(), e);
        let zero = Effect::local(Side::A, v(&[0.0, 0.0, 0.0]));
        assert_eq!(negate(&zero, &unit).unwrap(), unit);
    }

    #[test]
    fn pairing_rejects_mismatched_parties() {
        let s = StateFunctional::local(Side::A, v(&[1.0, 0.0]));
        let e = Effect::local(Side::C, v(&[1.0, 0.0]));
        assert!(matches!(pair(&s, &e), Err(Error::Dimension(_))));
    }

    #[test]
    fn bipartite_pairing_is_loop_trace() {
        let sigma = RealMatrix::from_rows(&[vec![1.0, 2.0, 0.5], vec![0.0, -1.0, 3.0]]).unwrap();
        let phi = RealMatrix::from_rows(&[vec![0.2, 0.1], vec![-0.3, 0.4], vec![1.0, 0.0]]).unwrap();
        let p = pair(&StateFunctional::bipartite(&sigma), &Effect::bipartite(&phi)).unwrap();
        assert!((p - (&sigma * &phi).trace()).abs() < 1e-15);
    }

    #[test]
    fn product_effect_pairs_as_separate_pairings() {
        let sigma = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let e = v(&[0.25, 0.75]);
        let f = v(&[1.0, -2.0]);
        let p = pair(&StateFunctional::bipartite(&sigma), &Effect::product(&e, &f)).unwrap();
        assert!((p - sigma.matvec(&e).dot(&f)).abs() < 1e-15);
    }

    #[test]
    fn bilinear_round_trip() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(map_to_bilinear(&bilinear_to_map(&m)), m);
        assert_eq!(bilinear_to_map(&RealMatrix::identity(3)), RealMatrix::identity(3));
    }

    #[test]
    fn loop_trace_matches_explicit_product() {
        let rho = RealMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap();
        let a = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = RealMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let explicit = (&(&(&rho * &a) * &rho) * &b).trace();
        assert!((loop_trace(&rho, &[&a, &b]) - explicit).abs() < 1e-14);
    }

    #[test]
    fn rank_one_reduction() {
        let u = v(&[1.0, 2.0, 0.0]);
        let w = v(&[0.0, 1.0, 1.0]);
        let rho = RealMatrix::outer(&u, &w);
        let red = reduce_maps(&rho, &[RealMatrix::identity(3)], TOL_RANK).unwrap();
        assert_eq!(red.rank, 1);
        assert_eq!(red.rho.shape(), (1, 1));
        let back = &(&red.embedding_iota * &red.rho) * &red.projector_pi;
        assert!(back.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn zero_state_is_degenerate() {
        let err = reduce_maps(&RealMatrix::zeros(2, 2), &[], TOL_RANK).unwrap_err();
        assert!(matches!(err, Error::DegenerateInstance(_)));
    }
}
