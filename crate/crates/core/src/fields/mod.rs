//! Polynomial vector fields, Hörmander checks and Lie closure.

mod closure;
mod hormander;
mod vector_field;

pub use closure::{
    lie_closure, lie_closure_with_cap, GradedLieBasis, StructureCheck, DEFAULT_CLOSURE_CAP,
};
pub use hormander::{
    check_h1, hormander_rank_at_zero, max_word_length, word_label, BracketWord, H1Report,
    H1Violation, RankReport,
};
pub use vector_field::PolyVectorField;
