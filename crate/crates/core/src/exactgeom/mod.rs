//! Exact rational linear algebra and the symmetric-polytope kernel.

use std::cell::Cell;

pub mod dd;
pub mod lp;
pub mod polytope;
pub mod rational;

pub use polytope::{h_to_v, hull_reduce, v_to_h, MemberCert, Membership, SubsetCert, SymPolytope, WitnessTerm};
pub use rational::{Rat, RatMat, RatVec};

/// Default ambient dimension cap for representation conversion.
pub const DEFAULT_DIM_CAP: usize = 8;

thread_local! {
    static DIM_CAP: Cell<usize> = const { Cell::new(DEFAULT_DIM_CAP) };
}

/// Current conversion cap on this thread.
pub fn dim_cap() -> usize {
    DIM_CAP.with(Cell::get)
}

/// Sets the conversion cap for the current thread until dropped.
pub struct DimCapGuard {
    previous: usize,
}

impl DimCapGuard {
    pub fn new(cap: usize) -> Self {
        let previous = DIM_CAP.with(|c| c.replace(cap));
        DimCapGuard { previous }
    }
}

impl Drop for DimCapGuard {
    fn drop(&mut self) {
        DIM_CAP.with(|c| c.set(self.previous));
    }
}
