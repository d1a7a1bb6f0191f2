//! Character tables of Z4, K4 and D4, the Diophantine classification of
//! admissible characters, and decomposition of numerical characters.

pub mod solve;
pub mod table;

pub use solve::{
    classify_all, classify_with, corrupted_tables, decompose_character, golden_mismatches, solve_diophantine,
    ClassificationResult, ClassifiedCharacter, MultiplicityVector, GOLDEN,
};
pub use table::{builtin_table, CharacterTable, ClassValues, GaussInt, GroupTag};
