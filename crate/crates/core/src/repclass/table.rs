use std::fmt;

use num_complex::Complex;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Exact Gaussian integer.
pub type GaussInt = Complex<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupTag {
    Z4,
    K4,
    D4,
}

impl GroupTag {
    pub const ALL: [GroupTag; 3] = [GroupTag::Z4, GroupTag::K4, GroupTag::D4];

    pub fn name(&self) -> &'static str {
        match self {
            GroupTag::Z4 => "Z4",
            GroupTag::K4 => "K4",
            GroupTag::D4 => "D4",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "Z4" => Some(GroupTag::Z4),
            "K4" => Some(GroupTag::K4),
            "D4" => Some(GroupTag::D4),
            _ => None,
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterTable {
    pub group: GroupTag,
    pub class_labels: Vec<String>,
    pub class_sizes: Vec<u32>,
    pub centralizer_sizes: Vec<u32>,
    /// `rows[i][j]` is the value of the i-th irreducible character on class j.
    pub rows: Vec<Vec<GaussInt>>,
}

fn re(v: &[i64]) -> Vec<GaussInt> {
    v.iter().map(|&x| Complex::new(x, 0)).collect()
}

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn builtin_table(group: GroupTag) -> CharacterTable {
    let i = Complex::new(0, 1);
    let one = Complex::new(1, 0);
    match group {
        GroupTag::D4 => CharacterTable {
            group,
            class_labels: labels(&["1", "xi", "xi^2", "eta", "xi eta"]),
            class_sizes: vec![1, 2, 1, 2, 2],
            centralizer_sizes: vec![8, 4, 8, 4, 4],
            rows: vec![
                re(&[1, 1, 1, 1, 1]),
                re(&[1, 1, 1, -1, -1]),
                re(&[1, -1, 1, 1, -1]),
                re(&[1, -1, 1, -1, 1]),
                re(&[2, 0, -2, 0, 0]),
            ],
        },
        GroupTag::K4 => CharacterTable {
            group,
            class_labels: labels(&["1", "xi^2", "eta", "xi^2 eta"]),
            class_sizes: vec![1; 4],
            centralizer_sizes: vec![4; 4],
            rows: vec![re(&[1, 1, 1, 1]), re(&[1, 1, -1, -1]), re(&[1, -1, 1, -1]), re(&[1, -1, -1, 1])],
        },
        GroupTag::Z4 => CharacterTable {
            group,
            class_labels: labels(&["1", "xi", "xi^2", "xi^3"]),
            class_sizes: vec![1; 4],
            centralizer_sizes: vec![4; 4],
            rows: vec![
                re(&[1, 1, 1, 1]),
                vec![one, i, -one, -i],
                vec![one, -i, -one, i],
                re(&[1, -1, 1, -1]),
            ],
        },
    }
}

impl CharacterTable {
    pub fn order(&self) -> u32 {
        self.class_sizes.iter().sum()
    }

    pub fn class_count(&self) -> usize {
        self.class_labels.len()
    }

    /// `sum_j |C_j| chi_a(j) conj(chi_b(j))`, which is `|G| delta_ab` for a
    /// valid table.
    pub fn row_inner(&self, a: usize, b: usize) -> GaussInt {
        self.rows[a]
            .iter()
            .zip(&self.rows[b])
            .zip(&self.class_sizes)
            .map(|((x, y), &s)| x * y.conj() * s as i64)
            .sum()
    }

    /// `sum_i chi_i(j) conj(chi_i(k))`, which is `|C_G(g_j)| delta_jk`.
    pub fn column_inner(&self, j: usize, k: usize) -> GaussInt {
        self.rows.iter().map(|r| r[j] * r[k].conj()).sum()
    }

    pub fn row_orthogonality_holds(&self) -> bool {
        let n = self.order() as i64;
        let r = self.rows.len();
        (0..r).all(|a| (0..r).all(|b| self.row_inner(a, b) == Complex::new(if a == b { n } else { 0 }, 0)))
    }

    pub fn column_orthogonality_holds(&self) -> bool {
        let c = self.class_count();
        (0..c).all(|j| {
            (0..c).all(|k| {
                let expected = if j == k { self.centralizer_sizes[j] as i64 } else { 0 };
                self.column_inner(j, k) == Complex::new(expected, 0)
            })
        })
    }

    pub fn sizes_consistent(&self) -> bool {
        let n = self.order();
        self.class_sizes.len() == self.class_count()
            && self.centralizer_sizes.len() == self.class_count()
            && self.class_sizes.iter().zip(&self.centralizer_sizes).all(|(s, c)| s * c == n)
            && self.rows.len() == self.class_count()
            && self.rows.iter().all(|r| r.len() == self.class_count())
    }

    /// Character `sum_i n_i chi_i`, per class.
    pub fn combine(&self, n: &[u32]) -> Vec<GaussInt> {
        (0..self.class_count())
            .map(|j| self.rows.iter().zip(n).map(|(r, &m)| r[j] * m as i64).sum())
            .collect()
    }
}

/// Real values per class, serialized as an ordered map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClassValues(pub Vec<(String, f64)>);

impl ClassValues {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.0.iter().find(|(l, _)| l == label).map(|&(_, v)| v)
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|&(_, v)| v).collect()
    }
}

impl Serialize for ClassValues {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}
