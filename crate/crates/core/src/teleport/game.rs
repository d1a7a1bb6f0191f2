use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chsh::{chsh_value, relabel_apply, self_test_check, ChshInstance, RelabelElement, SignVector};
use crate::error::{Error, Result};
use crate::gpt::{GptInstance, Outcome, Side};
use crate::linalg::{affine_dimension, MatrixSet, RealMatrix};
use crate::teleport::closure::SemigroupClosure;
use crate::teleport::correction::find_correction;
use crate::teleport::maps::iterate;
use crate::{EPS_DEDUP, TOL_EQ, TOL_RANK};

#[derive(Clone, Debug, Serialize)]
pub struct DepthStats {
    pub depth: usize,
    pub states: usize,
    pub max_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GameReport {
    pub pass: bool,
    pub a: f64,
    pub chsh_value: f64,
    pub per_depth: Vec<DepthStats>,
    /// Outcome-label word and reason of the first failure.
    pub witness: Option<String>,
}

fn labels(inst: &GptInstance, word: &[usize]) -> String {
    let l: Vec<&str> = word.iter().map(|&k| inst.measurement()[k].label.as_str()).collect();
    format!("[{}]", l.join(", "))
}

/// Plays the iterated game breadth first to `depth` swaps. At every depth
/// each distinct reachable swapped state must admit a correction restoring
/// the initial CHSH value `4a` and must pass the self-test.
pub fn iterated_game(inst: &GptInstance, depth: usize) -> Result<GameReport> {
    if depth == 0 {
        return Err(Error::InvalidInput("game depth must be at least 1".into()));
    }
    let chsh = ChshInstance::from_gpt(inst);
    let initial = self_test_check(&chsh);
    let value0 = chsh_value(&chsh, &SignVector::STANDARD);
    let mut report = GameReport { pass: true, a: initial.a, chsh_value: value0, per_depth: Vec::new(), witness: None };
    if !initial.pass {
        report.pass = false;
        report.witness = Some("[]: initial state fails the self-test".into());
        return Ok(report);
    }
    let a = initial.a;
    let mut frontier: Vec<(Vec<usize>, RealMatrix)> = vec![(Vec::new(), RealMatrix::identity(inst.dim_c()))];
    let r_maps: Vec<RealMatrix> = (0..inst.outcome_count()).map(|k| inst.r_map(k)).collect();
    for d in 1..=depth {
        let mut level = MatrixSet::new(EPS_DEDUP);
        let mut next = Vec::new();
        let mut max_defect: f64 = 0.0;
        for (word, t) in &frontier {
            for (k, r) in r_maps.iter().enumerate() {
                let u = t * r;
                let p = inst.unit_pairing(&u);
                if p <= TOL_EQ {
                    continue;
                }
                let map = u.scale(1.0 / p);
                if !level.insert(map.clone()).1 {
                    continue;
                }
                let mut w = word.clone();
                w.push(k);
                let swapped = &map * inst.rho();
                let fail = |report: &mut GameReport, why: String| {
                    report.pass = false;
                    if report.witness.is_none() {
                        report.witness = Some(format!("{}: {why}", labels(inst, &w)));
                    }
                };
                match find_correction(&chsh, &swapped, a) {
                    Ok(h) => {
                        let corrected = relabel_apply(&h.inverse(), &chsh.with_state(swapped.clone())?, Side::A);
                        let value = chsh_value(&corrected, &SignVector::STANDARD);
                        let defect = (value - 4.0 * a).abs();
                        max_defect = max_defect.max(defect);
                        if defect > TOL_EQ {
                            fail(&mut report, format!("corrected CHSH value {value} differs from {}", 4.0 * a));
                        }
                        if !self_test_check(&corrected).pass {
                            fail(&mut report, format!("corrected state fails the self-test (correction {h})"));
                        }
                    }
                    Err(e) => {
                        max_defect = f64::INFINITY;
                        fail(&mut report, e.to_string());
                    }
                }
                next.push((w, map));
            }
        }
        report.per_depth.push(DepthStats { depth: d, states: next.len(), max_defect });
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct HomomorphismFailure {
    pub word: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomomorphismReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub words_checked: usize,
    pub max_probability_defect: f64,
    /// Correction (group index) per single outcome, when assignable.
    pub corrections: Vec<Option<u8>>,
    pub failures: Vec<HomomorphismFailure>,
}

const SPOT_CHECKS_PER_LENGTH: usize = 64;

/// Checks `p_{lk} = p_l p_k` and `theta_{lk} = theta_l theta_k` on every
/// outcome pair, then on words up to `depth` (all words while there are at
/// most 64 of a given length, otherwise a seeded sample of 64).
pub fn verify_homomorphism(inst: &GptInstance, depth: usize) -> Result<HomomorphismReport> {
    let chsh = ChshInstance::from_gpt(inst);
    let a = self_test_check(&chsh).a;
    let n = inst.outcome_count();
    let mut report = HomomorphismReport {
        pass: true,
        pairs_checked: 0,
        words_checked: 0,
        max_probability_defect: 0.0,
        corrections: Vec::new(),
        failures: Vec::new(),
    };
    let name = |w: &[usize]| w.iter().map(|&k| inst.measurement()[k].label.clone()).collect::<Vec<_>>();
    let fail = |report: &mut HomomorphismReport, w: &[usize], reason: String| {
        report.pass = false;
        if report.failures.len() < 16 {
            report.failures.push(HomomorphismFailure { word: name(w), reason });
        }
    };

    let correction = |w: &[usize]| -> Result<(f64, RelabelElement)> {
        let (map, state) = iterate(inst, w)?;
        let sigma = state.as_map().expect("bipartite");
        Ok((map.weight, find_correction(&chsh, &sigma, a)?))
    };

    let mut single: Vec<Option<(f64, RelabelElement)>> = Vec::with_capacity(n);
    for k in 0..n {
        match correction(&[k]) {
            Ok(x) => single.push(Some(x)),
            Err(e) => {
                fail(&mut report, &[k], e.to_string());
                single.push(None);
            }
        }
    }
    report.corrections = single.iter().map(|s| s.map(|(_, h)| h.index())).collect();

    let check_word = |report: &mut HomomorphismReport, w: &[usize]| {
        let parts: Option<Vec<(f64, RelabelElement)>> = w.iter().map(|&k| single[k]).collect();
        let Some(parts) = parts else { return };
        let p_expected: f64 = parts.iter().map(|x| x.0).product();
        let h_expected = parts.iter().fold(RelabelElement::IDENTITY, |acc, x| acc.compose(&x.1));
        match correction(w) {
            Ok((p, h)) => {
                let defect = (p - p_expected).abs();
                report.max_probability_defect = report.max_probability_defect.max(defect);
                if defect > TOL_EQ {
                    fail(report, w, format!("probability {p} differs from product {p_expected}"));
                }
                if h != h_expected {
                    fail(report, w, format!("correction {h} differs from product {h_expected}"));
                }
            }
            Err(e) => fail(report, w, e.to_string()),
        }
    };

    for l in 0..n {
        for k in 0..n {
            report.pairs_checked += 1;
            check_word(&mut report, &[l, k]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a11);
    for len in 3..=depth {
        let total = (n as f64).powi(len as i32);
        if total <= SPOT_CHECKS_PER_LENGTH as f64 {
            let mut w = vec![0usize; len];
            loop {
                report.words_checked += 1;
                check_word(&mut report, &w);
                let mut i = len;
                while i > 0 {
                    i -= 1;
                    w[i] += 1;
                    if w[i] < n {
                        break;
                    }
                    w[i] = 0;
                }
                if w.iter().all(|&x| x == 0) {
                    break;
                }
            }
        } else {
            for _ in 0..SPOT_CHECKS_PER_LENGTH {
                let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
                report.words_checked += 1;
                check_word(&mut report, &w);
            }
        }
    }
    Ok(report)
}

/// Replaces the measurement by one effect per correction `h`:
/// `(1/8) sum_{i=1..8} sum_{|w| = i, theta_w = h} rho^-1 R_w`.
/// Labels are the relabelling-group names.
pub fn coarse_grain(inst: &GptInstance) -> Result<GptInstance> {
    let rank = inst.rho().rank(TOL_RANK);
    if !inst.rho().is_square() || rank < inst.dim_a() {
        return Err(Error::NotInvertible { rank, dim: inst.dim_a().max(inst.dim_c()) });
    }
    let chsh = ChshInstance::from_gpt(inst);
    let a = self_test_check(&chsh).a;
    let mut theta = Vec::with_capacity(inst.outcome_count());
    for k in 0..inst.outcome_count() {
        let (_, state) = iterate(inst, &[k])?;
        theta.push(find_correction(&chsh, &state.as_map().expect("bipartite"), a)?);
    }
    let zero = RealMatrix::zeros(inst.dim_a(), inst.dim_c());
    // s[h] = sum over words of the current length with correction h of rho^-1 R_w
    let mut s: Vec<RealMatrix> = vec![zero.clone(); 8];
    for (k, o) in inst.measurement().iter().enumerate() {
        let h = theta[k].index() as usize;
        s[h] = &s[h] + &o.matrix;
    }
    let mut total = s.clone();
    for _ in 1..8 {
        let mut next = vec![zero.clone(); 8];
        for (h_prev, acc) in s.iter().enumerate() {
            if acc.max_abs() == 0.0 {
                continue;
            }
            let acc_rho = acc * inst.rho();
            let prev = RelabelElement::new(h_prev as u8).expect("index below 8");
            for (k, o) in inst.measurement().iter().enumerate() {
                let h = prev.compose(&theta[k]).index() as usize;
                next[h] = &next[h] + &(&acc_rho * &o.matrix);
            }
        }
        for h in 0..8 {
            total[h] = &total[h] + &next[h];
        }
        s = next;
    }
    let measurement: Vec<Outcome> = total
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.max_abs() > TOL_EQ)
        .map(|(h, m)| Outcome::new(RelabelElement::new(h as u8).expect("index below 8").name(), m.scale(0.125)))
        .collect();
    inst.with_measurement(measurement)
}

/// Dimension of the affine span of `{g sigma}` over `g` in the closure and
/// the identity, with `sigma` ranging over the normalized Charlie-side
/// states `rho e` steered by Alice's local effects.
pub fn swap_orbit_dimension(inst: &GptInstance, closure: &SemigroupClosure) -> usize {
    let mut states = Vec::new();
    for e in inst.local_effects(Side::A) {
        let sigma = inst.rho().matvec(&e);
        let c = sigma.dot(inst.unit_c());
        if c > TOL_EQ {
            states.push(sigma.scale(1.0 / c));
        }
    }
    let identity = RealMatrix::identity(inst.dim_c());
    let points: Vec<_> = std::iter::once(&identity)
        .chain(&closure.elements)
        .flat_map(|g| states.iter().map(move |s| g.matvec(s)))
        .collect();
    affine_dimension(&points, TOL_RANK)
}
