//! Property (B) for a built generic sequence and a finite-stage
//! back-and-forth between two of them.

use num_traits::Zero;

use super::embed::extension_step;
use super::state::FraisseState;
use crate::error::{Error, Result};
use crate::exactgeom::rational::fmt_rat;
use crate::exactgeom::{Rat, RatMat};
use crate::maps::{check_eps_isometry, op_norm, EpsIsometryCert, InitialArrow, LinMap};
use crate::spaces::MonotoneSpace;

/// An extension `g: Y → Y_m` of `f: X → Y_k`.
#[derive(Debug, Clone)]
pub struct PropertyB {
    pub m: usize,
    pub g: InitialArrow,
    pub cert: EpsIsometryCert,
    /// `‖g↾X − incl_{k→m}∘f‖`.
    pub deviation: Rat,
}

/// Given `X ⊆ Y` (an initial segment) and an isometric initial arrow
/// `f: X → Y_k`, extends the state and returns `g: Y → Y_m` with
/// `‖g↾X − f‖ <= ε` and `g` an ε-isometry.
pub fn extend_property_b(
    state: &mut FraisseState,
    x: &MonotoneSpace,
    y: &MonotoneSpace,
    f: &InitialArrow,
    k: usize,
    eps: &Rat,
) -> Result<PropertyB> {
    if eps <= &Rat::zero() {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {}", fmt_rat(eps))));
    }
    if x.dim() > y.dim() || y.truncate(x.dim())? != *x {
        return Err(Error::InvalidParameter("X is not an initial segment of Y".into()));
    }
    let half = eps / Rat::from_integer(2.into());
    let step = extension_step(state, x, y, f, k, &half)?;
    let cert = check_eps_isometry(&step.next.map, eps)?;
    Ok(PropertyB { m: step.m, g: step.next, cert, deviation: step.deviation })
}

#[derive(Debug, Clone)]
pub struct BackAndForth {
    pub stage: usize,
    /// `u: A_s → B_{m_b}`.
    pub u: InitialArrow,
    pub m_b: usize,
    /// `v: B_{m_b} → A_{m_a}`.
    pub v: InitialArrow,
    pub m_a: usize,
    pub u_cert: EpsIsometryCert,
    pub v_cert: EpsIsometryCert,
    /// `‖v∘u − incl_{s→m_a}‖`.
    pub deviation: Rat,
    pub a: FraisseState,
    pub b: FraisseState,
}

/// Forth: embeds `A_s` into `B` by extending the zero arrow out of the
/// trivial space. Back: extends the inclusion `A_s ⊆ A_s` along `u` into `A`.
/// Both extended states are returned.
pub fn back_and_forth(a: &FraisseState, b: &FraisseState, s: usize, eps: &Rat) -> Result<BackAndForth> {
    if eps <= &Rat::zero() {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {}", fmt_rat(eps))));
    }
    let mut a = a.clone();
    let mut b = b.clone();
    let a_s = a.stage(s)?.clone();

    let zero = MonotoneSpace::trivial();
    let into_b0 = InitialArrow::coordinate(zero.ball(), b.stage(0)?.ball())?;
    let forth = extend_property_b(&mut b, &zero, &a_s, &into_b0, 0, eps)?;
    let u = forth.g;

    let c = u.normalizing_basis()?;
    let cinv = c.inverse().ok_or(Error::RankDeficient)?;
    let b_rebased = MonotoneSpace::rebased(b.stage(forth.m)?.ball(), &c)?;
    let id = InitialArrow::coordinate(a_s.ball(), a_s.ball())?;
    let back = extend_property_b(&mut a, &a_s, &b_rebased, &id, s, eps)?;
    let vmap = LinMap::new(
        b.stage(forth.m)?.ball().clone(),
        a.stage(back.m)?.ball().clone(),
        back.g.map.matrix().mul(&cinv)?,
    )?;
    let v = InitialArrow::certify(vmap, back.g.chain.clone())?;

    let u_cert = check_eps_isometry(&u.map, eps)?;
    let v_cert = check_eps_isometry(&v.map, eps)?;
    let vu = v.map.compose(&u.map)?;
    let incl = RatMat::inclusion(vu.codomain().dim(), a_s.dim());
    let deviation = op_norm(&vu.with_matrix(vu.matrix().sub(&incl)?)?);
    if &deviation > eps {
        return Err(Error::Certificate(format!(
            "v∘u is {} away from the inclusion, above {}",
            fmt_rat(&deviation),
            fmt_rat(eps)
        )));
    }
    Ok(BackAndForth { stage: s, u, m_b: forth.m, v, m_a: back.m, u_cert, v_cert, deviation, a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::rat;
    use crate::fraisse::state::{build_generic, FraisseConfig};

    #[test]
    fn rejects_nonpositive_eps() {
        let st = build_generic(FraisseConfig::new(7), 2).unwrap();
        let err = back_and_forth(&st, &st, 0, &Rat::zero()).unwrap_err();
        assert_eq!(err.name(), "InvalidParameter");
    }

    #[test]
    fn small_stage_round_trip() {
        let a = build_generic(FraisseConfig::new(7), 4).unwrap();
        let b = build_generic(FraisseConfig::new(13), 4).unwrap();
        let s = a.top().min(2);
        let r = back_and_forth(&a, &b, s, &rat(1, 16)).unwrap();
        assert!(r.deviation.is_zero());
        r.u_cert.verify(&r.u.map).unwrap();
        r.v_cert.verify(&r.v.map).unwrap();
    }
}
