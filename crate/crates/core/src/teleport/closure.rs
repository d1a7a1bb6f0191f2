use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::GptInstance;
use crate::linalg::{MatrixSet, RealMatrix};
use crate::TOL_EQ;

/// Finite approximation of the closure of the realizable normalized
/// teleportation maps.
#[derive(Clone, Debug, Serialize)]
pub struct SemigroupClosure {
    #[serde(skip)]
    pub elements: Vec<RealMatrix>,
    /// A representative outcome word per element.
    pub words: Vec<Vec<usize>>,
    pub eps_dedup: f64,
    pub truncated: bool,
}

impl SemigroupClosure {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Closure under products of the normalized single-step maps `R_k / p_k`.
/// Outcomes of zero probability are skipped.
pub fn semigroup_closure(inst: &GptInstance, eps: f64, cap: usize) -> Result<SemigroupClosure> {
    let gens: Vec<(RealMatrix, Vec<usize>)> = (0..inst.outcome_count())
        .filter_map(|k| {
            let p = inst.probability(k);
            (p > TOL_EQ).then(|| (inst.r_map(k).scale(1.0 / p), vec![k]))
        })
        .collect();
    if cap < gens.len() {
        return Err(Error::InvalidInput(format!(
            "cap {cap} is smaller than the number of generators {}",
            gens.len()
        )));
    }
    closure_of(gens, eps, cap)
}

/// Closure of a generating set under products, breadth first. Every element
/// is a word in the generators; new elements are right-multiplied by each
/// generator until nothing new appears or `cap` elements are stored.
///
/// Products of one level are formed in parallel and merged sequentially in a
/// fixed order, so the result does not depend on scheduling.
pub fn closure_of(gens: Vec<(RealMatrix, Vec<usize>)>, eps: f64, cap: usize) -> Result<SemigroupClosure> {
    if !(eps > 0.0) || cap == 0 {
        return Err(Error::InvalidInput("closure needs eps > 0 and cap >= 1".into()));
    }
    let mut set = MatrixSet::new(eps);
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut frontier: Vec<usize> = Vec::new();
    let mut truncated = false;
    for (m, w) in &gens {
        if set.len() >= cap {
            truncated = true;
            break;
        }
        let (i, fresh) = set.insert(m.clone());
        if fresh {
            words.push(w.clone());
            frontier.push(i);
        }
    }
    while !frontier.is_empty() && !truncated {
        let products: Vec<(RealMatrix, Vec<usize>)> = frontier
            .par_iter()
            .flat_map_iter(|&i| {
                let x = set.get(i);
                let wx = &words[i];
                gens.iter().map(move |(g, wg)| {
                    let mut w = wx.clone();
                    w.extend_from_slice(wg);
                    (x * g, w)
                })
            })
            .collect();
        let mut next = Vec::new();
        for (m, w) in products {
            if set.find(&m).is_some() {
                continue;
            }
            if set.len() >= cap {
                truncated = true;
                break;
            }
            let (i, _) = set.insert(m);
            words.push(w);
            next.push(i);
        }
        frontier = next;
    }
    Ok(SemigroupClosure { elements: set.into_items(), words, eps_dedup: eps, truncated })
}
