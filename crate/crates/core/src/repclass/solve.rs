use serde::Serialize;

use crate::error::{Error, Result};
use crate::repclass::table::{builtin_table, CharacterTable, ClassValues, GaussInt, GroupTag};
use crate::TOL_CHAR;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MultiplicityVector {
    pub group: GroupTag,
    pub n: Vec<u32>,
    pub dimension: u32,
}

impl MultiplicityVector {
    pub fn new(table: &CharacterTable, n: Vec<u32>) -> Self {
        let dimension = table.rows.iter().zip(&n).map(|(r, &m)| r[0].re as u32 * m).sum();
        Self { group: table.group, n, dimension }
    }

    /// `chi_{12345^2}^{(D4)}` style label.
    pub fn label(&self) -> String {
        let mut idx = String::new();
        for (i, &m) in self.n.iter().enumerate() {
            if m == 0 {
                continue;
            }
            idx.push_str(&(i + 1).to_string());
            if m > 1 {
                idx.push_str(&format!("^{m}"));
            }
        }
        format!("chi_{{{idx}}}^{{({})}}", self.group)
    }
}

/// All multiplicity vectors with `n_1 = 1`, `0 <= n_i <= n_max`, dimension at
/// least 3 and every class sum real and nonnegative. Exact arithmetic.
///
/// Fails with [`Error::BoundTooSmall`] when a solution has an entry equal to
/// `n_max`, since then the enumeration box may cut off further solutions.
pub fn solve_diophantine(table: &CharacterTable, n_max: u32) -> Result<Vec<MultiplicityVector>> {
    if n_max < 8 {
        return Err(Error::InvalidInput(format!("n_max = {n_max} must be at least 8")));
    }
    let r = table.rows.len();
    if r == 0 || !table.sizes_consistent() {
        return Err(Error::InvalidInput(format!("malformed character table for {}", table.group)));
    }
    let mut out = Vec::new();
    let mut n = vec![0u32; r];
    n[0] = 1;
    loop {
        if admissible(table, &n) {
            if n[1..].contains(&n_max) {
                return Err(Error::BoundTooSmall { n_max, witness: n });
            }
            out.push(MultiplicityVector::new(table, n.clone()));
        }
        // odometer over entries 1..r, last entry fastest
        let mut i = r;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            if n[i] < n_max {
                n[i] += 1;
                break;
            }
            n[i] = 0;
        }
    }
}

fn admissible(table: &CharacterTable, n: &[u32]) -> bool {
    let sums = table.combine(n);
    sums[0].re >= 3 && sums.iter().all(|s: &GaussInt| s.im == 0 && s.re >= 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedCharacter {
    pub group: GroupTag,
    pub multiplicities: Vec<u32>,
    pub dimension: u32,
    pub label: String,
    /// Label of the character this one is isomorphic to, if any.
    pub duplicate_of: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationResult {
    pub n_max: u32,
    /// Distinct families first, ordered by group (Z4, K4, D4), then dimension,
    /// then multiplicities in decreasing lexicographic order; duplicates last.
    pub solutions: Vec<ClassifiedCharacter>,
}

impl ClassificationResult {
    pub fn families(&self) -> impl Iterator<Item = &ClassifiedCharacter> {
        self.solutions.iter().filter(|s| s.duplicate_of.is_none())
    }

    pub fn duplicates(&self) -> impl Iterator<Item = &ClassifiedCharacter> {
        self.solutions.iter().filter(|s| s.duplicate_of.is_some())
    }
}

pub fn classify_all(n_max: u32) -> Result<ClassificationResult> {
    let tables: Vec<CharacterTable> = GroupTag::ALL.iter().map(|&g| builtin_table(g)).collect();
    classify_with(&tables, n_max)
}

/// Values of a D4 character pushed down to `D4 / {1, xi^2} = K4`, when its
/// kernel is exactly the centre: `(chi(1), chi(xi), chi(eta), chi(xi eta))`.
fn central_quotient(table: &CharacterTable, values: &[GaussInt]) -> Option<Vec<i64>> {
    let dim = values[0];
    let kernel: Vec<usize> = (0..values.len()).filter(|&j| values[j] == dim).collect();
    let centre = table.class_labels.iter().position(|l| l == "xi^2")?;
    (kernel == [0, centre]).then(|| {
        (0..values.len()).filter(|&j| j != centre).map(|j| values[j].re).collect()
    })
}

/// K4 characters agree up to an automorphism of K4 iff their degree and the
/// multiset of their non-identity values agree.
fn k4_key(values: &[i64]) -> (i64, Vec<i64>) {
    let mut rest = values[1..].to_vec();
    rest.sort_unstable();
    (values[0], rest)
}

pub fn classify_with(tables: &[CharacterTable], n_max: u32) -> Result<ClassificationResult> {
    let mut solved = Vec::new();
    for t in tables {
        let mut sols = solve_diophantine(t, n_max)?;
        sols.sort_by(|a, b| a.dimension.cmp(&b.dimension).then_with(|| b.n.cmp(&a.n)));
        solved.push((t, sols));
    }
    let k4_keys: Vec<((i64, Vec<i64>), String)> = solved
        .iter()
        .filter(|(t, _)| t.group == GroupTag::K4)
        .flat_map(|(t, sols)| {
            sols.iter().map(move |s| {
                let v: Vec<i64> = t.combine(&s.n).iter().map(|x| x.re).collect();
                (k4_key(&v), s.label())
            })
        })
        .collect();
    let mut families = Vec::new();
    let mut duplicates = Vec::new();
    for (t, sols) in &solved {
        for s in sols {
            let duplicate_of = if t.group == GroupTag::D4 {
                central_quotient(t, &t.combine(&s.n)).and_then(|q| {
                    let key = k4_key(&q);
                    k4_keys.iter().find(|(k, _)| *k == key).map(|(_, l)| l.clone())
                })
            } else {
                None
            };
            let c = ClassifiedCharacter {
                group: s.group,
                multiplicities: s.n.clone(),
                dimension: s.dimension,
                label: s.label(),
                duplicate_of,
            };
            if c.duplicate_of.is_some() {
                duplicates.push(c);
            } else {
                families.push(c);
            }
        }
    }
    families.extend(duplicates);
    Ok(ClassificationResult { n_max, solutions: families })
}

/// Expected classification: `(group, multiplicities, duplicate_of)`.
pub const GOLDEN: [(GroupTag, &[u32], Option<&str>); 8] = [
    (GroupTag::Z4, &[1, 1, 1, 1], None),
    (GroupTag::K4, &[1, 1, 1, 1], None),
    (GroupTag::D4, &[1, 1, 0, 0, 1], None),
    (GroupTag::D4, &[1, 0, 1, 0, 1], None),
    (GroupTag::D4, &[1, 0, 0, 1, 1], None),
    (GroupTag::D4, &[1, 1, 1, 1, 1], None),
    (GroupTag::D4, &[1, 1, 1, 1, 2], None),
    (GroupTag::D4, &[1, 1, 1, 1, 0], Some("chi_{1234}^{(K4)}")),
];

/// Differences between `result` and [`GOLDEN`], empty on a match.
pub fn golden_mismatches(result: &ClassificationResult) -> Vec<String> {
    let mut out = Vec::new();
    let golden: Vec<(GroupTag, Vec<u32>, Option<String>)> =
        GOLDEN.iter().map(|(g, n, d)| (*g, n.to_vec(), d.map(String::from))).collect();
    let got: Vec<(GroupTag, Vec<u32>, Option<String>)> =
        result.solutions.iter().map(|s| (s.group, s.multiplicities.clone(), s.duplicate_of.clone())).collect();
    for g in &golden {
        if !got.contains(g) {
            out.push(format!("missing {} {:?} (duplicate_of {:?})", g.0, g.1, g.2));
        }
    }
    for g in &got {
        if !golden.contains(g) {
            out.push(format!("unexpected {} {:?} (duplicate_of {:?})", g.0, g.1, g.2));
        }
    }
    out
}

/// Built-in tables with the D4 entry `chi_2(xi)` flipped to `-1`. Used to
/// exercise the mismatch path of `classify`.
pub fn corrupted_tables() -> Vec<CharacterTable> {
    GroupTag::ALL
        .iter()
        .map(|&g| {
            let mut t = builtin_table(g);
            if g == GroupTag::D4 {
                t.rows[1][1] = GaussInt::new(-1, 0);
            }
            t
        })
        .collect()
}

/// Multiplicities `n_i = (1/|G|) sum_j |C_j| conj(chi_i(j)) values(j)`.
pub fn decompose_character(values: &ClassValues, table: &CharacterTable) -> Result<MultiplicityVector> {
    let v: Vec<f64> = table
        .class_labels
        .iter()
        .map(|l| {
            values
                .get(l)
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("no finite value for class {l}")))
        })
        .collect::<Result<_>>()?;
    let order = table.order() as f64;
    let mut n = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for ((c, &s), x) in row.iter().zip(&table.class_sizes).zip(&v) {
            re += s as f64 * c.re as f64 * x;
            im -= s as f64 * c.im as f64 * x;
        }
        let (re, im) = (re / order, im / order);
        let rounded = re.round();
        if (re - rounded).abs() > TOL_CHAR || im.abs() > TOL_CHAR || rounded < 0.0 {
            return Err(Error::NotACharacter(format!(
                "multiplicity of irreducible {} is {re}{:+}i",
                i + 1,
                im
            )));
        }
        n.push(rounded as u32);
    }
    Ok(MultiplicityVector::new(table, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(t: &CharacterTable, v: &[f64]) -> ClassValues {
        ClassValues(t.class_labels.iter().cloned().zip(v.iter().copied()).collect())
    }

    #[test]
    fn labels_use_exponents() {
        let t = builtin_table(GroupTag::D4);
        assert_eq!(MultiplicityVector::new(&t, vec![1, 1, 1, 1, 2]).label(), "chi_{12345^2}^{(D4)}");
        assert_eq!(MultiplicityVector::new(&t, vec![1, 0, 1, 0, 1]).label(), "chi_{135}^{(D4)}");
    }

    #[test]
    fn d4_solutions() {
        let sols = solve_diophantine(&builtin_table(GroupTag::D4), 8).unwrap();
        let mut n: Vec<Vec<u32>> = sols.into_iter().map(|s| s.n).collect();
        n.sort();
        assert_eq!(
            n,
            vec![
                vec![1, 0, 0, 1, 1],
                vec![1, 0, 1, 0, 1],
                vec![1, 1, 0, 0, 1],
                vec![1, 1, 1, 1, 0],
                vec![1, 1, 1, 1, 1],
                vec![1, 1, 1, 1, 2]
            ]
        );
    }

    #[test]
    fn small_bound_rejected() {
        assert!(solve_diophantine(&builtin_table(GroupTag::K4), 7).is_err());
    }

    #[test]
    fn boundary_shell_detected() {
        // drop the sign rows so multiplicities of chi_5 are unbounded
        let mut t = builtin_table(GroupTag::D4);
        for r in t.rows.iter_mut().skip(1).take(3) {
            for x in r.iter_mut() {
                *x = GaussInt::new(0, 0);
            }
        }
        t.rows[4] = vec![GaussInt::new(2, 0); 5];
        match solve_diophantine(&t, 8) {
            Err(Error::BoundTooSmall { n_max: 8, witness }) => assert_eq!(witness[4], 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classification_matches_golden() {
        let r = classify_all(8).unwrap();
        assert!(golden_mismatches(&r).is_empty(), "{:?}", golden_mismatches(&r));
        assert_eq!(r.families().count(), 7);
        assert_eq!(r.duplicates().count(), 1);
    }

    #[test]
    fn corrupted_table_mismatches() {
        let r = classify_with(&corrupted_tables(), 8).unwrap();
        assert!(!golden_mismatches(&r).is_empty());
    }

    #[test]
    fn decompose_examples() {
        let t = builtin_table(GroupTag::D4);
        assert_eq!(decompose_character(&cv(&t, &[4.0, 2.0, 0.0, 0.0, 0.0]), &t).unwrap().n, vec![1, 1, 0, 0, 1]);
        assert_eq!(decompose_character(&cv(&t, &[8.0, 0.0, 0.0, 0.0, 0.0]), &t).unwrap().n, vec![1, 1, 1, 1, 2]);
        assert!(decompose_character(&cv(&t, &[3.0, 0.0, 0.0, 0.0, 0.0]), &t).is_err());
        assert!(decompose_character(&cv(&t, &[0.0, 1.0, 0.0, 0.0, 0.0]), &t).is_err());
    }
}
