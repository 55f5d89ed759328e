//! Fixed inputs for the benchmarks.

use polyban_core::exactgeom::rational::rat;
use polyban_core::{LinMap, MonotoneSpace, RatMat, SpaceGalleryId};

pub fn lp_space(dim: usize) -> MonotoneSpace {
    let id: SpaceGalleryId = format!("lp:{dim}:p=3/2:res=6").parse().expect("valid gallery id");
    polyban_core::spaces::gallery(&id).expect("gallery space").space
}

/// `diag(4/5, 1, …)` on `ℓ1(dim)`, a `1/4`-isometry.
pub fn near_identity(dim: usize) -> LinMap {
    let l1 = MonotoneSpace::l1(dim);
    let mut m = RatMat::identity(dim);
    m.set(0, 0, rat(4, 5));
    LinMap::new(l1.ball().clone(), l1.ball().clone(), m).expect("square map")
}
