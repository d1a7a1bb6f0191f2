//! Entanglement swapping as iterated teleportation: single-step and
//! composite maps, the correction relabelling, the semigroup closure and the
//! compact-group analysis.

pub mod analysis;
pub mod closure;
pub mod correction;
pub mod game;
pub mod maps;

pub use analysis::{analyze_group, rank_one_check, GroupAnalysis, RankOneReport};
pub use closure::{semigroup_closure, SemigroupClosure};
pub use correction::{find_correction, match_correction};
pub use game::{coarse_grain, iterated_game, swap_orbit_dimension, verify_homomorphism, GameReport, HomomorphismReport};
pub use maps::{iterate, teleport_map, MapKind, TeleportMap};
