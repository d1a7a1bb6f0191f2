use crate::chsh::{chsh_value, relabel_apply, ChshInstance, RelabelElement, SignVector};
use crate::error::{Error, Result};
use crate::gpt::Side;
use crate::linalg::RealMatrix;
use crate::TOL_MARGIN;

/// `min(1e-6, a - 1/2)`.
pub fn correction_tolerance(a: f64) -> f64 {
    (1e-6f64).min(a - 0.5)
}

/// CHSH values of the swapped state with Alice's effects relabelled by
/// `h^-1`, indexed by `h`.
pub fn corrected_values(chsh: &ChshInstance, swapped: &RealMatrix) -> Result<[f64; 8]> {
    let inst = chsh.with_state(swapped.clone())?;
    let mut out = [0.0; 8];
    for h in RelabelElement::all() {
        let relabelled = relabel_apply(&h.inverse(), &inst, Side::A);
        out[h.index() as usize] = chsh_value(&relabelled, &SignVector::STANDARD);
    }
    Ok(out)
}

/// The unique relabelling `h` such that relabelling Alice's effects by
/// `h^-1` restores the CHSH value `4a` on the swapped state.
pub fn find_correction(chsh: &ChshInstance, swapped: &RealMatrix, a: f64) -> Result<RelabelElement> {
    if !(a > 0.5 + TOL_MARGIN) {
        return Err(Error::InvalidInput(format!("a = {a} does not exceed 1/2 by the required margin")));
    }
    let tol = correction_tolerance(a);
    let target = 4.0 * a;
    let values = corrected_values(chsh, swapped)?;
    let hits: Vec<usize> = (0..8).filter(|&i| (values[i] - target).abs() <= tol).collect();
    match hits.as_slice() {
        [] => {
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Err(Error::ConditionViolated { target, best })
        }
        [h] => {
            let gap_violation = (0..8)
                .filter(|&i| i != *h)
                .map(|i| values[i])
                .find(|&v| v > target - 2.0 * a + tol);
            match gap_violation {
                Some(v) => Err(Error::ConditionViolated { target, best: v }),
                None => Ok(RelabelElement::new(*h as u8).expect("index below 8")),
            }
        }
        many => Err(Error::AmbiguousCorrection { target, count: many.len() }),
    }
}

/// The relabelling whose action on `{e0, e1, not e0, not e1, unit}` agrees
/// with the matrix `g` acting on Alice's effect space, if exactly one does.
pub fn match_correction(g: &RealMatrix, chsh: &ChshInstance, tol: f64) -> Option<RelabelElement> {
    if g.shape() != (chsh.unit_a.dim(), chsh.unit_a.dim()) {
        return None;
    }
    if g.matvec(&chsh.unit_a).max_abs_diff(&chsh.unit_a) > tol {
        return None;
    }
    let images = [g.matvec(&chsh.e[0]), g.matvec(&chsh.e[1])];
    let mut found = RelabelElement::all().filter(|h| {
        let expected = h.act_on_effects(&chsh.e, &chsh.unit_a);
        expected[0].max_abs_diff(&images[0]) <= tol && expected[1].max_abs_diff(&images[1]) <= tol
    });
    let first = found.next()?;
    found.next().is_none().then_some(first)
}
