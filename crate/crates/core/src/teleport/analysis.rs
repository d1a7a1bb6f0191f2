use serde::Serialize;

use crate::chsh::{self_test_check, ChshInstance, RelabelElement};
use crate::error::{Error, Result};
use crate::gpt::GptInstance;
use crate::linalg::{MatrixSet, RealMatrix};
use crate::repclass::{builtin_table, ClassValues, GroupTag};
use crate::teleport::closure::SemigroupClosure;
use crate::teleport::correction::find_correction;
use crate::{TOL_EQ, TOL_RANK};

/// Isomorphism type of a subgroup of the relabelling group, for the orders
/// that have a built-in character table.
pub fn subgroup_type(h: &[RelabelElement]) -> Option<GroupTag> {
    match h.len() {
        8 => Some(GroupTag::D4),
        4 if h.contains(&RelabelElement::XI) => Some(GroupTag::Z4),
        4 => Some(GroupTag::K4),
        _ => None,
    }
}

/// Index of the conjugacy class of `h` in the built-in table of `tag`, for
/// `h` in the subgroup `group` of that type.
///
/// D4 classes follow the table naming, where the class `eta` contains the
/// reflection `diag(-1, 1)` on `(A0, A1)`, i.e. `xi eta` in generator
/// notation.
pub fn class_index(tag: GroupTag, group: &[RelabelElement], h: RelabelElement) -> usize {
    let a = h.index() % 4;
    let b = h.index() / 4;
    match tag {
        GroupTag::D4 => match (b, a) {
            (0, 0) => 0,
            (0, 2) => 2,
            (0, _) => 1,
            (_, a) if a % 2 == 1 => 3,
            _ => 4,
        },
        GroupTag::Z4 => a as usize,
        GroupTag::K4 => {
            let sq = RelabelElement::XI.pow(2);
            let reflection = RelabelElement::new(5).expect("valid index");
            let s = if group.contains(&reflection) { reflection } else { RelabelElement::ETA };
            if h == RelabelElement::IDENTITY {
                0
            } else if h == sq {
                1
            } else if h == s {
                2
            } else {
                3
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupAnalysis {
    #[serde(skip)]
    pub idempotent_p: RealMatrix,
    pub idempotent_rank: usize,
    pub idempotent_count: usize,
    #[serde(skip)]
    pub group_elements: Vec<RealMatrix>,
    pub group_words: Vec<Vec<usize>>,
    /// Correction per group element.
    pub correction_of: Vec<RelabelElement>,
    /// Image of the correction map, sorted.
    pub correction_group: Vec<RelabelElement>,
    pub group_tag: Option<GroupTag>,
    pub correction_homomorphism: bool,
    pub kernel_elements: Vec<usize>,
    #[serde(skip)]
    pub projector_phi: RealMatrix,
    /// One group element index per correction.
    pub transversal: Vec<(RelabelElement, usize)>,
    /// `tr(g)` per group element.
    pub character_p: Vec<f64>,
    pub character_values: ClassValues,
    pub class_function: bool,
    pub trivial_multiplicity: f64,
    pub weighted_sum_rank: usize,
}

impl GroupAnalysis {
    pub fn group_order(&self) -> usize {
        self.group_elements.len()
    }

    pub fn min_character_p(&self) -> f64 {
        self.character_p.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Indices of the idempotents of minimal rank, in selection order (the
/// first is the one [`analyze_group`] uses).
pub fn minimal_idempotents(closure: &SemigroupClosure) -> (usize, Vec<usize>) {
    let idem: Vec<(usize, usize)> = closure
        .elements
        .iter()
        .enumerate()
        .filter(|(_, x)| (*x * *x).max_abs_diff(x) <= TOL_EQ)
        .map(|(i, x)| (i, x.rank(TOL_RANK)))
        .collect();
    let Some(min_rank) = idem.iter().map(|&(_, r)| r).min() else {
        return (0, Vec::new());
    };
    let mut chosen: Vec<usize> = idem.iter().filter(|&&(_, r)| r == min_rank).map(|&(i, _)| i).collect();
    chosen.sort_by(|&i, &j| closure.elements[i].rounded_key(12).cmp(&closure.elements[j].rounded_key(12)));
    (idem.len(), chosen)
}

pub fn analyze_group(closure: &SemigroupClosure, inst: &GptInstance) -> Result<GroupAnalysis> {
    let (_, minimal) = minimal_idempotents(closure);
    let Some(&p_index) = minimal.first() else {
        return Err(Error::NumericalFailure("no idempotent found in the closure".into()));
    };
    analyze_group_with_idempotent(closure, inst, p_index)
}

/// Group analysis relative to the idempotent `closure.elements[p_index]`.
pub fn analyze_group_with_idempotent(
    closure: &SemigroupClosure,
    inst: &GptInstance,
    p_index: usize,
) -> Result<GroupAnalysis> {
    if closure.truncated {
        return Err(Error::Unsupported("semigroup closure was truncated at the cap".into()));
    }
    let p = closure.elements.get(p_index).ok_or_else(|| Error::InvalidInput("idempotent index out of range".into()))?;
    if (p * p).max_abs_diff(p) > TOL_EQ {
        return Err(Error::InvalidInput("selected element is not idempotent".into()));
    }
    let (idempotent_count, _) = minimal_idempotents(closure);
    let eps = closure.eps_dedup;

    // G_P = P S P
    let mut set = MatrixSet::new(eps);
    let mut group_words = Vec::new();
    for (x, w) in closure.elements.iter().zip(&closure.words) {
        if set.insert(&(p * x) * p).1 {
            group_words.push(w.clone());
        }
    }
    let elements = set.items().to_vec();
    let n = elements.len();
    let identity_index = set.find(p).ok_or_else(|| Error::NotAGroup("P is not in P S P".into()))?;
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        if (p * &elements[i]).max_abs_diff(&elements[i]) > eps || (&elements[i] * p).max_abs_diff(&elements[i]) > eps {
            return Err(Error::NotAGroup(format!("P is not neutral for element {i}")));
        }
        for j in 0..n {
            table[i][j] = set
                .find(&(&elements[i] * &elements[j]))
                .ok_or_else(|| Error::NotAGroup(format!("product of elements {i} and {j} leaves the set")))?;
        }
        if !table[i].contains(&identity_index) {
            return Err(Error::NotAGroup(format!("element {i} has no inverse")));
        }
    }

    let chsh = ChshInstance::from_gpt(inst);
    let a = self_test_check(&chsh).a;
    let correction_of: Vec<RelabelElement> = elements
        .iter()
        .map(|g| find_correction(&chsh, &(g * inst.rho()), a))
        .collect::<Result<_>>()?;
    let correction_homomorphism =
        (0..n).all(|i| (0..n).all(|j| correction_of[table[i][j]] == correction_of[i].compose(&correction_of[j])));

    let mut correction_group: Vec<RelabelElement> = correction_of.clone();
    correction_group.sort();
    correction_group.dedup();
    let group_tag = subgroup_type(&correction_group);

    let kernel_elements: Vec<usize> =
        (0..n).filter(|&i| correction_of[i] == RelabelElement::IDENTITY).collect();
    let mut projector_phi = RealMatrix::zeros(p.rows(), p.cols());
    for &i in &kernel_elements {
        projector_phi = &projector_phi + &elements[i];
    }
    let projector_phi = projector_phi.scale(1.0 / kernel_elements.len() as f64);

    let transversal: Vec<(RelabelElement, usize)> = correction_group
        .iter()
        .map(|&h| (h, correction_of.iter().position(|&c| c == h).expect("h is in the image")))
        .collect();
    let chi = |g: &RealMatrix| (&(&projector_phi * g) * &projector_phi).trace();
    let chi_of_h: Vec<(RelabelElement, f64)> = transversal.iter().map(|&(h, i)| (h, chi(&elements[i]))).collect();

    let (character_values, class_function) = match group_tag {
        Some(tag) => {
            let t = builtin_table(tag);
            let mut values: Vec<Option<f64>> = vec![None; t.class_labels.len()];
            let mut consistent = true;
            for &(h, v) in &chi_of_h {
                let c = class_index(tag, &correction_group, h);
                match values[c] {
                    None => values[c] = Some(v),
                    Some(prev) => consistent &= (prev - v).abs() <= TOL_EQ,
                }
            }
            let pairs = t
                .class_labels
                .iter()
                .zip(values)
                .map(|(l, v)| (l.clone(), v.unwrap_or(f64::NAN)))
                .collect();
            (ClassValues(pairs), consistent)
        }
        None => (ClassValues(chi_of_h.iter().map(|&(h, v)| (h.name().to_string(), v)).collect()), true),
    };
    let trivial_multiplicity = chi_of_h.iter().map(|&(_, v)| v).sum::<f64>() / chi_of_h.len() as f64;

    let mut weighted = RealMatrix::zeros(p.rows(), p.cols());
    for k in 0..inst.outcome_count() {
        let r = inst.r_map(k);
        weighted = &weighted + &(&(&(&projector_phi * p) * &r) * &(p * &projector_phi));
    }
    let weighted_sum_rank = weighted.rank(TOL_RANK);

    Ok(GroupAnalysis {
        idempotent_p: p.clone(),
        idempotent_rank: p.rank(TOL_RANK),
        idempotent_count,
        character_p: elements.iter().map(RealMatrix::trace).collect(),
        group_elements: elements,
        group_words,
        correction_of,
        correction_group,
        group_tag,
        correction_homomorphism,
        kernel_elements,
        projector_phi,
        transversal,
        character_values,
        class_function,
        trivial_multiplicity,
        weighted_sum_rank,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneReport {
    pub residual: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub pass: bool,
}

/// Compares `sum_k p_k Pi g_k Pi` with `Pi (rho unit_a) unit_c^T Pi` and
/// checks that it has numerical rank at most one.
pub fn rank_one_check(analysis: &GroupAnalysis, inst: &GptInstance) -> RankOneReport {
    let pi = &analysis.projector_phi;
    let p = &analysis.idempotent_p;
    let mut lhs = RealMatrix::zeros(pi.rows(), pi.cols());
    for k in 0..inst.outcome_count() {
        let weight = inst.probability(k);
        if weight <= TOL_EQ {
            continue;
        }
        let g = &(p * &inst.r_map(k).scale(1.0 / weight)) * p;
        lhs = &lhs + &(&(pi * &g) * pi).scale(weight);
    }
    let marginal = inst.rho().matvec(inst.unit_a());
    let rhs = &(pi * &RealMatrix::outer(&marginal, inst.unit_c())) * pi;
    let residual = lhs.max_abs_diff(&rhs);
    let sv = lhs.singular_values();
    let rank = lhs.rank(TOL_RANK);
    RankOneReport {
        residual,
        singular_values: sv.into_iter().take(3).collect(),
        rank,
        pass: residual <= TOL_EQ && rank <= 1,
    }
}
