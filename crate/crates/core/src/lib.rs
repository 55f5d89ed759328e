//! Exact-arithmetic construction of finite stages of a complementably
//! universal space with a monotone basis: polyhedral rational normed
//! spaces, amalgamation and ε-correction pushouts, generic sequences, and
//! the certificates that back every isometry and projection claim.

pub mod amalgam;
pub mod correction;
pub mod error;
pub mod exactgeom;
pub mod format;
pub mod fraisse;
pub mod maps;
pub mod spaces;

pub use error::{ChainViolationKind, Error, Result};
pub use exactgeom::{Rat, RatMat, RatVec, SymPolytope};
pub use amalgam::PushoutResult;
pub use correction::CorrectionResult;
pub use maps::{EpsIsometryCert, InitialArrow, IsometryCert, LinMap, ProjectionChain};
pub use spaces::{MonotoneSpace, SpaceGalleryId};
pub use format::{emit_bundle, parse_bundle, verify_bundle, Bundle, CertDoc, RoundTrip};
pub use fraisse::{EmbeddingTrace, FraisseConfig, FraisseState};
