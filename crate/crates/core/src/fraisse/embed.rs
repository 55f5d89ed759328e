//! Embedding a monotone chain `X_0 ⊆ X_1 ⊆ …` into the generic sequence,
//! one ε-correction, one amalgamation and one absorption per step.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::state::FraisseState;
use crate::amalgam::{amalgamate, PushoutResult};
use crate::correction::{eps_pushout, universal_map, CorrectionResult};
use crate::error::{Error, Result};
use crate::exactgeom::rational::{fmt_rat, sub};
use crate::exactgeom::{Rat, RatMat};
use crate::maps::{
    check_eps_isometry, left_inverse, op_norm, rationalize_arrow, EpsIsometryCert, InitialArrow, LinMap,
};
use crate::spaces::MonotoneSpace;

/// `2^{-n}` as an exact rational.
pub fn pow2_inv(n: usize) -> Rat {
    Rat::new(BigInt::one(), BigInt::one() << n)
}

/// Everything computed while extending `e: X_small → Y_k` to `X_big`.
#[derive(Debug, Clone)]
pub struct ExtensionStep {
    pub eps: Rat,
    pub k: usize,
    pub m: usize,
    /// Correction pushout of `e` in normalized coordinates.
    pub correction: CorrectionResult,
    /// `max_v ‖j∘e(v) − i(v)‖` over vertices of `B_{X_small}`.
    pub closeness: Rat,
    /// The universal map collapsing the correction space back onto `Y_k`.
    pub collapse: LinMap,
    pub pushout: PushoutResult,
    /// `g: W → Y_m` from the absorption.
    pub g: InitialArrow,
    /// Norm-one left inverse of `g`: `H = g^{-1}∘P_0`.
    pub h: RatMat,
    /// The extended embedding `g∘ℓ: X_big → Y_m`.
    pub next: InitialArrow,
    /// `‖next↾X_small − incl∘e‖`.
    pub deviation: Rat,
}

/// Op norm of `a↾X_small − incl_{k→m}∘b` where `b` lands in a smaller
/// coordinate segment of `a`'s codomain.
fn restricted_deviation(a: &LinMap, small: &MonotoneSpace, b: &LinMap) -> Result<Rat> {
    let ra = a.restrict(small.ball())?;
    let lifted = RatMat::inclusion(a.codomain().dim(), b.codomain().dim()).mul(b.matrix())?;
    Ok(op_norm(&ra.with_matrix(ra.matrix().sub(&lifted)?)?))
}

pub fn extension_step(
    state: &mut FraisseState,
    small: &MonotoneSpace,
    big: &MonotoneSpace,
    e: &InitialArrow,
    k: usize,
    eps: &Rat,
) -> Result<ExtensionStep> {
    if big.truncate(small.dim())? != *small {
        return Err(Error::InvalidParameter("the smaller space is not an initial segment of the larger".into()));
    }
    let yk = state.stage(k)?.clone();
    if e.map.domain() != small.ball() || e.map.codomain() != yk.ball() {
        return Err(Error::InvalidParameter("arrow does not run from the small space into the stage".into()));
    }
    // Normalize e to the coordinate inclusion.
    let basis = e.normalizing_basis()?;
    let binv = basis.inverse().ok_or(Error::RankDeficient)?;
    let y_norm = MonotoneSpace::rebased(yk.ball(), &basis)?;
    let f = LinMap::inclusion(small.ball(), y_norm.ball())?;
    if binv.mul(e.map.matrix())? != *f.matrix() {
        return Err(Error::Certificate("normalizing basis does not straighten the arrow".into()));
    }

    // Correction of f: i = i0, j = j0 with ‖j∘f − i‖ <= ε.
    let correction = eps_pushout(&f, eps)?;
    let mut closeness = Rat::zero();
    for v in small.ball().vertices() {
        let d = sub(&correction.j0.apply(&f.apply(v)?)?, &correction.i0.apply(v)?);
        let g = correction.xy.gauge(&d)?;
        if g > closeness {
            closeness = g;
        }
    }
    if &closeness > eps {
        return Err(Error::Certificate(format!("closeness {} exceeds {}", fmt_rat(&closeness), fmt_rat(eps))));
    }
    // (f, id) is an object under the correction space; collapse onto Y_k.
    let collapse = universal_map(&correction, &f, &LinMap::identity(y_norm.ball()))?;

    // Amalgamate X_big with Y_k over X_small.
    let pushout = amalgamate(small.dim(), big, &y_norm)?;
    let ell = InitialArrow::certify(pushout.ix.clone(), pushout.chain_x.clone())?;
    let jf = pushout.jy.matrix().mul(f.matrix())?;
    if pushout.ix.matrix().column_block(0, small.dim()) != jf {
        return Err(Error::Certificate("ℓ restricted to the small space differs from j∘e".into()));
    }

    // Absorb jY∘B^{-1}: Y_k → W into the generic sequence.
    let h_map = LinMap::new(yk.ball().clone(), pushout.w.ball().clone(), pushout.jy.matrix().mul(&binv)?)?;
    let h_arrow = InitialArrow::certify(h_map, pushout.chain_y.clone())?;
    let (m, g) = state.extend(k, &h_arrow)?;
    let p0 = g.chain.first().ok_or(Error::EmptyInput)?;
    let h = left_inverse(g.map.matrix())?.mul(p0)?;
    if h.mul(g.map.matrix())? != RatMat::identity(pushout.w.dim()) {
        return Err(Error::Certificate("H∘g is not the identity".into()));
    }

    let next = g.compose(&ell)?;
    let bound = state.config.denominator_bound(state.steps);
    let bound = u64::try_from(bound).unwrap_or(u64::MAX);
    let rounded = rationalize_arrow(&next.map, bound, eps)?;
    if rounded != next.map {
        return Err(Error::BudgetInfeasible("extended arrow needs denominators beyond the schedule".into()));
    }
    let deviation = restricted_deviation(&next.map, small, &e.map)?;
    if &deviation > eps {
        return Err(Error::Certificate(format!("deviation {} exceeds {}", fmt_rat(&deviation), fmt_rat(eps))));
    }
    Ok(ExtensionStep {
        eps: eps.clone(),
        k,
        m,
        correction,
        closeness,
        collapse,
        pushout,
        g,
        h,
        next,
        deviation,
    })
}

/// Per-step numbers kept in a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSummary {
    pub margin: Rat,
    pub closeness: Rat,
    pub deviation: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingTrace {
    pub targets: Vec<MonotoneSpace>,
    /// `e_0, …, e_N` with `e_n: X_n → Y_{k_n}`.
    pub maps: Vec<InitialArrow>,
    pub ks: Vec<usize>,
    pub steps: Vec<StepSummary>,
    /// Telescoped tail `Σ_{m >= N} 2^{-m-1} = 2^{-N}`.
    pub final_eps: Rat,
    pub final_cert: EpsIsometryCert,
}

impl EmbeddingTrace {
    pub fn last(&self) -> &InitialArrow {
        self.maps.last().expect("e_0 always present")
    }
}

/// `[truncate(X, 0), …, truncate(X, dim X)]`.
pub fn truncation_chain(x: &MonotoneSpace) -> Result<Vec<MonotoneSpace>> {
    (0..=x.dim()).map(|k| x.truncate(k)).collect()
}

fn check_target(target: &[MonotoneSpace]) -> Result<()> {
    let first = target.first().ok_or(Error::EmptyInput)?;
    if first.dim() != 0 {
        return Err(Error::InvalidParameter("the target chain must start at the trivial space".into()));
    }
    for w in target.windows(2) {
        if w[1].dim() < w[0].dim() || w[1].truncate(w[0].dim())? != w[0] {
            return Err(Error::InvalidParameter("the target is not a chain of initial segments".into()));
        }
    }
    Ok(())
}

/// Runs `n_steps` steps of the inductive embedding on a copy of `state`;
/// returns the trace and the extended state.
pub fn embed_universal(
    state: &FraisseState,
    target: &[MonotoneSpace],
    n_steps: usize,
) -> Result<(EmbeddingTrace, FraisseState)> {
    check_target(target)?;
    if n_steps + 1 > target.len() {
        return Err(Error::InvalidParameter(format!(
            "{n_steps} steps need a chain of {} spaces",
            n_steps + 1
        )));
    }
    let mut st = state.clone();
    let mut maps = vec![InitialArrow::coordinate(target[0].ball(), st.stage(0)?.ball())?];
    let mut ks = vec![0];
    let mut steps = Vec::new();
    for n in 0..n_steps {
        let margin = pow2_inv(n + 1);
        let step = extension_step(&mut st, &target[n], &target[n + 1], &maps[n], ks[n], &margin)
            .map_err(|e| annotate(e, n))?;
        steps.push(StepSummary { margin, closeness: step.closeness, deviation: step.deviation });
        ks.push(step.m);
        maps.push(step.next);
    }
    let final_eps = pow2_inv(n_steps);
    let last = maps.last().expect("nonempty");
    let final_cert = check_eps_isometry(&last.map, &final_eps)?;
    let trace = EmbeddingTrace { targets: target[..=n_steps].to_vec(), maps, ks, steps, final_eps, final_cert };
    verify_trace(&trace, &st)?;
    Ok((trace, st))
}

fn annotate(e: Error, step: usize) -> Error {
    match e {
        Error::Certificate(s) => Error::Certificate(format!("step {step}: {s}")),
        other => other,
    }
}

/// Re-verifies a trace against the state it lives in: every `e_n` is a
/// certified initial arrow into `Y_{k_n}`, the step margins hold, the
/// telescoping bound holds for all pairs, and the final certificate checks.
pub fn verify_trace(trace: &EmbeddingTrace, state: &FraisseState) -> Result<()> {
    let fail = |s: String| Err(Error::Certificate(s));
    check_target(&trace.targets)?;
    let len = trace.maps.len();
    if trace.targets.len() != len || trace.ks.len() != len || trace.steps.len() + 1 != len {
        return fail("trace lengths disagree".into());
    }
    for (n, e) in trace.maps.iter().enumerate() {
        e.verify().map_err(|err| Error::Certificate(format!("condition (1) at step {n}: {err}")))?;
        if e.map.domain() != trace.targets[n].ball() || e.map.codomain() != state.stage(trace.ks[n])?.ball() {
            return fail(format!("e_{n} has the wrong domain or codomain"));
        }
    }
    for (n, s) in trace.steps.iter().enumerate() {
        if s.margin != pow2_inv(n + 1) || s.closeness > s.margin {
            return fail(format!("condition (3) at step {n}"));
        }
        let dev = restricted_deviation(&trace.maps[n + 1].map, &trace.targets[n], &trace.maps[n].map)?;
        if dev != s.deviation || dev > s.margin {
            return fail(format!("condition (2) at step {n}"));
        }
    }
    for n in 0..len {
        for m in n + 1..len {
            let bound = (n..m).fold(Rat::zero(), |acc, r| acc + pow2_inv(r + 1));
            let dev = restricted_deviation(&trace.maps[m].map, &trace.targets[n], &trace.maps[n].map)?;
            if dev > bound {
                return fail(format!("telescoping bound between steps {n} and {m}"));
            }
        }
    }
    if trace.final_eps != pow2_inv(len - 1) || trace.final_cert.eps != trace.final_eps {
        return fail("final ε is not the telescoped tail".into());
    }
    trace.final_cert.verify(&trace.last().map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::state::{build_generic, FraisseConfig};

    #[test]
    fn trivial_target() {
        let st = build_generic(FraisseConfig::new(7), 3).unwrap();
        let (trace, _) = embed_universal(&st, &[MonotoneSpace::trivial()], 0).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.maps[0].map.matrix().cols(), 0);
    }

    #[test]
    fn l1_two_steps() {
        let st = build_generic(FraisseConfig::new(7), 6).unwrap();
        let chain = truncation_chain(&MonotoneSpace::l1(2)).unwrap();
        let (trace, ext) = embed_universal(&st, &chain, 2).unwrap();
        verify_trace(&trace, &ext).unwrap();
        assert!(trace.steps.iter().all(|s| s.deviation.is_zero()));
    }
}
