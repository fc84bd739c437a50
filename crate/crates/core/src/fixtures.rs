//! Data shipped with the crate: the transition frequency table, a starter
//! FV lexicon, the ten-spot catalog and the before/after feeling trace.

use crate::fv_store::FvDatabase;
use crate::mstn::TransitionTable;
use crate::recommend::SpotCatalog;

pub const TRANSITION_TABLE: &str = include_str!("../data/transition_table.tsv");
pub const DEFAULT_FV: &str = include_str!("../data/default_fv.tsv");
pub const SPOTS: &str = include_str!("../data/spots.tsv");
pub const FEELING_CHANGE_TRACE: &str = include_str!("../data/table6_trace.txt");

pub fn transition_table() -> TransitionTable {
    TransitionTable::parse(TRANSITION_TABLE).expect("bundled transition table is valid")
}

pub fn default_fv() -> FvDatabase {
    FvDatabase::parse(DEFAULT_FV).expect("bundled lexicon is valid")
}

pub fn spot_catalog() -> SpotCatalog {
    SpotCatalog::parse(SPOTS).expect("bundled catalog is valid")
}
