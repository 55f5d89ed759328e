use std::collections::HashMap;

use polyban_core::amalgam::{amalgamate, verify_pushout};
use polyban_core::fraisse::state::{cantor_pair, cantor_unpair};
use polyban_core::fraisse::{
    build_generic, check_condition_a, embed_universal, enumerate_objects, extend_property_b, truncation_chain,
    verify_state, verify_trace, Budget, TaskOrigin, TaskStatus,
};
use polyban_core::{Error, FraisseConfig, FraisseState, InitialArrow, MonotoneSpace, Rat};

#[test]
fn cantor_pairing_is_a_bijection_on_a_prefix() {
    for p in 0..5000u64 {
        let (a, b) = cantor_unpair(p);
        assert_eq!(cantor_pair(a, b), p);
    }
}

/// Every dovetail position that named an existing arrow of an existing
/// stage when the cursor passed it has been processed exactly once.
#[test]
fn scheduler_is_fair() {
    let mut st = FraisseState::new(FraisseConfig::new(13));
    let mut stages_seen: Vec<(u64, usize)> = Vec::new();
    for _ in 0..40 {
        let before = (st.cursor, st.stages.len());
        st.step().unwrap();
        stages_seen.push(before);
    }
    let mut by_position = HashMap::new();
    for t in &st.tasks {
        if let TaskOrigin::Scheduled { position, arrow } = t.origin {
            assert!(by_position.insert(position, (t.n, arrow)).is_none(), "position {position} processed twice");
        }
    }
    for p in 0..st.cursor {
        let stages_then = stages_seen.iter().rev().find(|(c, _)| *c <= p).unwrap().1;
        let (n, i) = cantor_unpair(p);
        let (n, i) = (n as usize, i as usize);
        let exists = n < stages_then && i < st.arrows_for(n).len();
        assert_eq!(by_position.contains_key(&p), exists, "position {p} = ({n}, {i})");
        if let Some(&(tn, ti)) = by_position.get(&p) {
            assert_eq!((tn, ti), (n, i));
        }
    }
}

#[test]
fn satisfied_tasks_are_never_revisited() {
    let mut st = build_generic(FraisseConfig::new(7), 10).unwrap();
    for _ in 0..4 {
        let before: Vec<_> = st.satisfied_tasks().map(|(k, t)| (k, t.clone())).collect();
        let stages = st.stages.clone();
        st.run(5).unwrap();
        for (k, t) in before {
            assert_eq!(st.tasks[k], t);
        }
        assert_eq!(&st.stages[..stages.len()], &stages[..]);
        verify_state(&st).unwrap();
    }
}

#[test]
fn stages_form_a_chain_of_initial_segments() {
    let st = build_generic(FraisseConfig::new(7), 30).unwrap();
    for w in st.stages.windows(2) {
        assert!(w[0].dim() <= w[1].dim());
        assert_eq!(w[1].truncate(w[0].dim()).unwrap(), w[0]);
    }
    assert!(st.stages.iter().all(|s| s.dim() <= st.config.stage_limit()));
    for (_, t) in st.satisfied_tasks() {
        check_condition_a(&st, t).unwrap();
        let TaskStatus::Satisfied { m, .. } = &t.status else { unreachable!() };
        assert!(*m >= t.n && *m < st.stages.len());
    }
}

#[test]
fn resume_equals_uninterrupted_build() {
    let full = build_generic(FraisseConfig::new(21), 24).unwrap();
    let mut half = build_generic(FraisseConfig::new(21), 9).unwrap();
    half.run(15).unwrap();
    assert_eq!(full, half);
    assert_ne!(build_generic(FraisseConfig::new(22), 24).unwrap(), full);
}

#[test]
fn tiny_budget_respects_the_stage_limit() {
    let mut cfg = FraisseConfig::new(1);
    cfg.budget = Budget::new(1, 1, 1).unwrap();
    cfg.max_dim = 2;
    let mut st = FraisseState::new(cfg);
    st.run(60).unwrap();
    assert!(st.stages.iter().all(|s| s.dim() <= 1));
    for t in &st.tasks {
        if let TaskStatus::Deferred(reason) = &t.status {
            assert!(reason.starts_with("DimensionCapExceeded") || reason.starts_with("BudgetInfeasible"), "{reason}");
        }
    }
    verify_state(&st).unwrap();
    assert!(Budget::new(0, 1, 1).is_err());
}

#[test]
fn zero_cap_exhausts_the_schedule() {
    let mut cfg = FraisseConfig::new(1);
    cfg.budget = Budget::new(1, 1, 1).unwrap();
    cfg.max_dim = 0;
    let mut st = FraisseState::new(cfg);
    let mut last = Ok(());
    for _ in 0..100 {
        last = st.step();
        if last.is_err() {
            break;
        }
    }
    assert!(matches!(last, Err(Error::StateExhausted(_))), "{last:?}");
}

#[test]
fn stage_index_out_of_range() {
    let st = build_generic(FraisseConfig::new(7), 3).unwrap();
    assert!(matches!(st.stage(st.stages.len()), Err(Error::IndexOutOfRange { .. })));
}

/// Amalgamating over the zero space embeds any two enumerated objects
/// isometrically into a common one.
#[test]
fn joint_embedding_of_enumerated_objects() {
    let objects = enumerate_objects(&Budget::new(2, 2, 2).unwrap());
    assert!(objects.len() > 4);
    for x in objects.iter().take(6) {
        for y in objects.iter().rev().take(6) {
            let p = amalgamate(0, x, y).unwrap();
            verify_pushout(&p).unwrap();
            assert_eq!(p.w.dim(), x.dim() + y.dim());
        }
    }
}

#[test]
fn property_b_extends_an_identity() {
    let mut st = build_generic(FraisseConfig::new(7), 20).unwrap();
    let k = 3;
    let x = st.stage(k).unwrap().clone();
    let id = InitialArrow::coordinate(x.ball(), x.ball()).unwrap();
    let y = x.clone();
    let eps = Rat::new(1.into(), 8.into());
    let pb = extend_property_b(&mut st, &x, &y, &id, k, &eps).unwrap();
    assert!(pb.m >= k);
    assert!(pb.deviation <= eps);
    assert!(matches!(
        extend_property_b(&mut st, &x, &y, &id, k, &Rat::from_integer(0.into())),
        Err(Error::InvalidParameter(_))
    ));
    verify_state(&st).unwrap();
}

#[test]
fn embedding_telescopes_for_a_three_dimensional_target() {
    let st = build_generic(FraisseConfig::new(13), 30).unwrap();
    let target = truncation_chain(&MonotoneSpace::linf(3)).unwrap();
    let (trace, ext) = embed_universal(&st, &target, 3).unwrap();
    verify_trace(&trace, &ext).unwrap();
    assert_eq!(trace.maps.len(), 4);
    assert!(trace.final_eps <= Rat::new(1.into(), 8.into()));
    for w in trace.ks.windows(2) {
        assert!(w[0] <= w[1]);
    }
}
