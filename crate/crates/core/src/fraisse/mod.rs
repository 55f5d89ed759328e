//! Generic sequences in the rational category: budgeted enumeration, a
//! fair resumable builder realizing condition (A), the universality
//! embedder and finite-stage back-and-forth.

pub mod backforth;
pub mod embed;
pub mod enumerate;
pub mod state;

pub use backforth::{back_and_forth, extend_property_b, BackAndForth, PropertyB};
pub use embed::{embed_universal, truncation_chain, verify_trace, EmbeddingTrace, StepSummary};
pub use enumerate::{enumerate_arrows, enumerate_objects, Budget, EnumeratedArrow};
pub use state::{
    build_generic, check_condition_a, verify_state, ArrowTask, FraisseConfig, FraisseState, TaskOrigin,
    TaskStatus,
};
