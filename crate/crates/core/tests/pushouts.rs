mod common;

use polyban_core::amalgam::{amalgamate, l1_sum, quotient_norm, verify_pushout};
use polyban_core::correction::{check_closeness, eps_pushout, inf_norm_formula, universal_map, verify_correction};
use polyban_core::exactgeom::rational::rat;
use polyban_core::maps::check_isometry;
use polyban_core::{Error, LinMap, MonotoneSpace, RatMat};

#[test]
fn pushout_embeds_both_factors_and_agrees_on_the_common_part() {
    let mut r = common::rng(101);
    for _ in 0..25 {
        let (n, x, y) = common::amalgam_triple(&mut r, 3);
        let p = amalgamate(n, &x, &y).unwrap();
        verify_pushout(&p).unwrap();
        assert_eq!(p.w.dim(), x.dim() + y.dim() - n);
        let incl_x = RatMat::inclusion(x.dim(), n);
        let incl_y = RatMat::inclusion(y.dim(), n);
        assert_eq!(p.ix.matrix().mul(&incl_x).unwrap(), p.jy.matrix().mul(&incl_y).unwrap());
        let xv = common::point(&mut r, x.dim());
        let yv = common::point(&mut r, y.dim());
        let w = polyban_core::exactgeom::rational::add(&p.ix.apply(&xv).unwrap(), &p.jy.apply(&yv).unwrap());
        assert_eq!(p.w.norm(&w).unwrap(), quotient_norm(n, &x, &y, &xv, &yv).unwrap());
    }
}

#[test]
fn pushout_over_zero_is_the_l1_sum() {
    let p = amalgamate(0, &MonotoneSpace::linf(2), &MonotoneSpace::l1(1)).unwrap();
    assert_eq!(p.w, l1_sum(&MonotoneSpace::linf(2), &MonotoneSpace::l1(1)).unwrap());
}

#[test]
fn pushout_rejects_mismatched_segments() {
    let e = amalgamate(2, &MonotoneSpace::l1(2), &MonotoneSpace::linf(2)).unwrap_err();
    assert_eq!(e.name(), "ZMismatch");
    assert!(amalgamate(3, &MonotoneSpace::l1(2), &MonotoneSpace::l1(3)).is_err());
}

#[test]
fn correction_is_eps_close_and_universal() {
    let mut r = common::rng(202);
    let eps = rat(1, 4);
    for _ in 0..12 {
        let f = common::eps_isometry(&mut r, 3, &eps);
        let c = eps_pushout(&f, &eps).unwrap();
        verify_correction(&c).unwrap();
        check_closeness(&c).unwrap();
        check_isometry(&c.i0).unwrap();
        check_isometry(&c.j0).unwrap();
        let xv = common::point(&mut r, c.dim_x());
        let yv = common::point(&mut r, c.dim_y());
        let mut joint = xv.clone();
        joint.extend(yv.iter().cloned());
        assert_eq!(c.xy.gauge(&joint).unwrap(), inf_norm_formula(&c, &xv, &yv).unwrap());

        // (i0, j0) is itself an object; the universal map is the identity.
        let t = universal_map(&c, &c.i0, &c.j0).unwrap();
        assert_eq!(t.matrix(), &RatMat::identity(c.dim_x() + c.dim_y()));
    }
}

#[test]
fn correction_rejects_bad_inputs() {
    let l1 = MonotoneSpace::l1(2);
    let half = LinMap::new(l1.ball().clone(), l1.ball().clone(), RatMat::identity(2).scaled(&rat(1, 2))).unwrap();
    assert!(matches!(eps_pushout(&half, &rat(1, 4)), Err(Error::NotEpsIsometry { .. })));
    let id = LinMap::identity(l1.ball());
    assert!(matches!(eps_pushout(&id, &rat(0, 1)), Err(Error::InvalidParameter(_))));
    let c = eps_pushout(&id, &rat(1, 4)).unwrap();
    let zero = LinMap::zero(l1.ball(), l1.ball());
    assert!(matches!(universal_map(&c, &zero, &LinMap::identity(l1.ball())), Err(Error::NotAnObject(_))));
}
