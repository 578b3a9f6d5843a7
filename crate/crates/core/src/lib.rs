//! Enumeration and classification of magic knight's tours on rectangular
//! boards.
//!
//! Tours are numbered grids `1..=N` in which consecutive numbers are a knight
//! move apart. Boards are kept in the orientation `width <= height`; rows are
//! the short lines and columns the long lines.

pub mod board;
pub mod classify;
pub mod emperor;
pub mod error;
pub mod filter;
pub mod fixtures;
pub mod search;
pub mod tour;
pub mod warnsdorf;

pub use board::{
    magic_constants, magic_feasibility, BoardDims, Cell, FeasibilityStatus, FeasibilityVerdict,
    MagicConstants, SymmetryOp,
};
pub use classify::{classify, ClassificationReport, Direction, MagicClass, Refinement};
pub use emperor::{
    enumerate_emperor, enumerate_emperor_with, validate_emperor, EmperorTour, Junction,
};
pub use error::{Error, Result};
pub use filter::{ClassFilter, Filter, LineRequirement};
pub use fixtures::{
    parse_fixture, verify_corpus, verify_fixture, CorpusReport, CorpusStatus, Fixture, FixtureKind,
    FixtureOutcome,
};
pub use search::{
    burnside_check, count_filters, count_tours, enumerate_tours, estimate_nodes, BurnsideReport,
    Closure, CountMode, SearchResult, SearchSpec, SearchStats,
};
pub use tour::{LineSumProfile, Tour, TourViolation};
pub use warnsdorf::warnsdorf_construct;
