use proptest::prelude::*;

use stable_chsh::chsh::{all_sign_vectors, chsh_value, relabel_apply, relabel_on_signs, ChshInstance, RelabelElement};
use stable_chsh::families::representatives::generators;
use stable_chsh::families::{build_family, FamilyId};
use stable_chsh::gpt::Side;
use stable_chsh::io::{instance_from_json, instance_to_json};
use stable_chsh::repclass::{builtin_table, decompose_character, solve_diophantine, ClassValues, GroupTag};
use stable_chsh::teleport::closure::closure_of;
use stable_chsh::{RealMatrix, EPS_DEDUP};

fn element() -> impl Strategy<Value = RelabelElement> {
    (0u8..8).prop_map(|i| RelabelElement::new(i).unwrap())
}

fn family() -> impl Strategy<Value = FamilyId> {
    prop::sample::select(FamilyId::ALL.to_vec())
}

fn group() -> impl Strategy<Value = GroupTag> {
    prop::sample::select(GroupTag::ALL.to_vec())
}

/// Orthogonal matrix from a product of Givens rotations.
fn rotation(n: usize, angles: &[f64]) -> RealMatrix {
    let mut q = RealMatrix::identity(n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let t = angles[k % angles.len()];
            k += 1;
            let mut g = RealMatrix::identity(n);
            g.set(i, i, t.cos());
            g.set(j, j, t.cos());
            g.set(i, j, -t.sin());
            g.set(j, i, t.sin());
            q = &q * &g;
        }
    }
    q
}

proptest! {
    #[test]
    fn relabelling_is_a_group(g in element(), h in element(), k in element()) {
        prop_assert_eq!(g.compose(&h).compose(&k), g.compose(&h.compose(&k)));
        prop_assert_eq!(g.compose(&g.inverse()), RelabelElement::IDENTITY);
        prop_assert_eq!(g.pow(g.order()), RelabelElement::IDENTITY);
        let m = &g.action_matrix() * &h.action_matrix();
        prop_assert!(m.max_abs_diff(&g.compose(&h).action_matrix()) < 1e-12);
    }

    #[test]
    fn sign_action_is_equivariant(id in family(), a in 0.55f64..=1.0, h in element(), s in 0usize..8, alice in any::<bool>()) {
        let inst = ChshInstance::from_gpt(&build_family(id, a).unwrap());
        let side = if alice { Side::A } else { Side::C };
        let signs = all_sign_vectors()[s];
        let lhs = chsh_value(&relabel_apply(&h, &inst, side), &signs);
        let rhs = chsh_value(&inst, &relabel_on_signs(&h, side, &signs));
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn decomposition_inverts_combination(tag in group(), n in prop::collection::vec(0u32..=4, 5)) {
        let t = builtin_table(tag);
        let n = &n[..t.class_count()];
        let chi = t.combine(n);
        let values = ClassValues(t.class_labels.iter().cloned().zip(chi.iter().map(|z| z.re as f64)).collect());
        // complex-conjugate pairs only give a real character when paired up
        if chi.iter().all(|z| z.im == 0) {
            let m = decompose_character(&values, &t).unwrap();
            prop_assert_eq!(&m.n[..], n);
        }
    }

    #[test]
    fn solutions_do_not_depend_on_the_bound(tag in group(), n_max in 8u32..=16) {
        let t = builtin_table(tag);
        let base: Vec<Vec<u32>> = solve_diophantine(&t, 8).unwrap().into_iter().map(|m| m.n).collect();
        let other: Vec<Vec<u32>> = solve_diophantine(&t, n_max).unwrap().into_iter().map(|m| m.n).collect();
        prop_assert_eq!(base, other);
    }

    #[test]
    fn json_round_trip_is_exact(id in family(), a in 0.51f64..=1.0) {
        let inst = build_family(id, a).unwrap();
        let text = instance_to_json(&inst).unwrap();
        let back = instance_from_json(&text).unwrap();
        prop_assert_eq!(back.rho().as_slice(), inst.rho().as_slice());
        for (x, y) in back.measurement().iter().zip(inst.measurement()) {
            prop_assert_eq!(x.matrix.as_slice(), y.matrix.as_slice());
        }
        prop_assert_eq!(instance_to_json(&back).unwrap(), text);
    }

    #[test]
    fn closure_size_is_basis_independent(id in family(), angles in prop::collection::vec(-3.0f64..3.0, 6)) {
        let gens = generators(id);
        let n = gens[0].rows();
        let q = rotation(n, &angles);
        let qt = q.transpose();
        let conj: Vec<(RealMatrix, Vec<usize>)> =
            gens.iter().enumerate().map(|(i, g)| (&(&q * g) * &qt, vec![i])).collect();
        let plain: Vec<(RealMatrix, Vec<usize>)> = gens.into_iter().enumerate().map(|(i, g)| (g, vec![i])).collect();
        let a = closure_of(plain, EPS_DEDUP, 64).unwrap();
        let b = closure_of(conj, EPS_DEDUP, 64).unwrap();
        prop_assert_eq!(a.len(), id.group_order());
        prop_assert_eq!(b.len(), a.len());
        prop_assert!(!b.truncated);
    }
}
