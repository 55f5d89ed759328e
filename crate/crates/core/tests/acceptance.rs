//! Acceptance run: one PASS/FAIL line per criterion. Every comparison is
//! exact (tolerance 0) over rationals; the only inequalities are the
//! stated ε-margins, also checked exactly.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use polyban_core::amalgam::{amalgamate, quotient_matrix, quotient_norm, verify_pushout};
use polyban_core::correction::{check_closeness, eps_pushout, inf_norm_formula, universal_map, verify_correction};
use polyban_core::exactgeom::rational::{add, dot, int, rat, scale};
use polyban_core::exactgeom::{h_to_v, v_to_h, MemberCert};
use polyban_core::fraisse::embed::pow2_inv;
use polyban_core::fraisse::{
    back_and_forth, build_generic, check_condition_a, embed_universal, truncation_chain, verify_state,
    verify_trace, TaskStatus,
};
use polyban_core::maps::{check_chain, check_eps_isometry, op_norm};
use polyban_core::{emit_bundle, parse_bundle, Bundle, FraisseConfig, LinMap, MonotoneSpace, Rat, RatMat, SymPolytope};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn criterion_1() -> Check {
    let mut r = common::rng(1);
    let mut count = 0;
    for _ in 0..120 {
        let (n, x, y) = common::amalgam_triple(&mut r, 4);
        let (m, k) = (x.dim(), y.dim());
        let p = e(amalgamate(n, &x, &y))?;
        e(verify_pushout(&p))?;
        e(p.ix_cert.verify(&p.ix))?;
        e(p.jy_cert.verify(&p.jy))?;
        ensure(p.w.dim() == m + k - n, || format!("dim W = {} for M={m} K={k} N={n}", p.w.dim()))?;
        let left = e(p.ix.matrix().mul(&RatMat::inclusion(m, n)))?;
        let right = e(p.jy.matrix().mul(&RatMat::inclusion(k, n)))?;
        ensure(left == right, || "square does not commute".into())?;
        e(check_chain(&p.chain_x, p.w.ball()))?;
        e(check_chain(&p.chain_y, p.w.ball()))?;
        e(p.chain_x.check_start(p.ix.matrix()))?;
        e(p.chain_y.check_start(p.jy.matrix()))?;
        count += 1;
    }
    Ok(format!("{count} random triples (dims <= 4, denominators <= 8): isometries, square, dim W = M+K-N and both chains exact"))
}

fn correction_instances() -> Vec<(LinMap, Rat)> {
    let mut r = common::rng(2);
    let eps = [rat(1, 2), rat(1, 4), rat(1, 8)];
    (0..60)
        .map(|i| {
            let eps = eps[i % 3].clone();
            (common::eps_isometry(&mut r, 3, &eps), eps)
        })
        .collect()
}

fn criterion_2() -> Check {
    let mut r = common::rng(3);
    let instances = correction_instances();
    let mut objects = 0;
    for (idx, (f, eps)) in instances.iter().enumerate() {
        let c = e(eps_pushout(f, eps))?;
        e(c.i0_cert.verify(&c.i0))?;
        e(c.j0_cert.verify(&c.j0))?;
        e(check_closeness(&c))?;
        for v in f.domain().vertices() {
            let d = polyban_core::exactgeom::rational::sub(&e(c.i0.apply(v))?, &e(c.j0.apply(&e(f.apply(v))?))?);
            ensure(e(c.xy.gauge(&d))? <= *eps, || format!("instance {idx}: closeness fails"))?;
        }
        e(verify_correction(&c))?;
        if idx < 30 {
            let vdim = r.gen_range(1..=3);
            let v = common::monotone_space(&mut r, vdim);
            let s = common::contraction(&mut r, &c.xy, v.ball());
            let i = e(s.compose(&c.i0))?;
            let j = e(s.compose(&c.j0))?;
            let t = e(universal_map(&c, &i, &j))?;
            ensure(op_norm(&t) <= Rat::one(), || "universal map not contractive".into())?;
            ensure(e(t.compose(&c.i0))? == i && e(t.compose(&c.j0))? == j, || "T∘i0 or T∘j0 differs".into())?;
            ensure(t.matrix() == s.matrix(), || "universal map not unique".into())?;
            if !op_norm(&s).is_zero() {
                let big = e(s.with_matrix(s.matrix().scaled(&int(2))))?;
                let bad = universal_map(&c, &e(big.compose(&c.i0))?, &e(big.compose(&c.j0))?);
                ensure(bad.is_err(), || "an expanding candidate was accepted".into())?;
            }
            objects += 1;
        }
    }
    Ok(format!(
        "{} (f, ε) with dims <= 3 and ε in {{1/2, 1/4, 1/8}}: i0, j0 exact isometries, closeness <= ε, B_K = K both ways; {objects} universal maps contractive and exact",
        instances.len()
    ))
}

fn criterion_3() -> Check {
    let instances = correction_instances();
    let results: Vec<Result<usize, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = instances
            .iter()
            .enumerate()
            .map(|(idx, (f, eps))| {
                scope.spawn(move || -> Result<usize, String> {
                    let c = e(eps_pushout(f, eps))?;
                    let mut r = common::rng(300 + idx as u64);
                    let (m, k) = (c.dim_x(), c.dim_y());
                    for _ in 0..1000 {
                        let x = common::point(&mut r, m);
                        let y = common::point(&mut r, k);
                        let lp = e(inf_norm_formula(&c, &x, &y))?;
                        let mut xy = x.clone();
                        xy.extend(y.iter().cloned());
                        let g = e(c.xy.gauge(&xy))?;
                        ensure(lp == g, || format!("instance {idx}: formula {lp} vs gauge {g}"))?;
                    }
                    Ok(1000)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().map_err(|_| "panic".to_string()).and_then(|r| r)).collect()
    });
    let mut points = 0;
    for r in results {
        points += r?;
    }
    Ok(format!("{} instances x 1000 points: LP infimum equals the gauge of K exactly ({points} points)", instances.len()))
}

fn criterion_4() -> Check {
    let mut r = common::rng(4);
    let mut points = 0;
    let mut instances = 0;
    while instances < 20 {
        let (n, x, y) = common::amalgam_triple(&mut r, 3);
        let p = e(amalgamate(n, &x, &y))?;
        let q = quotient_matrix(n, x.dim(), y.dim());
        for _ in 0..200 {
            let xv = common::point(&mut r, x.dim());
            let yv = common::point(&mut r, y.dim());
            let lp = e(quotient_norm(n, &x, &y, &xv, &yv))?;
            let mut xy = xv.clone();
            xy.extend(yv.iter().cloned());
            let g = e(p.w.ball().gauge(&e(q.apply(&xy))?))?;
            ensure(lp == g, || format!("quotient LP {lp} vs gauge {g}"))?;
            points += 1;
        }
        instances += 1;
    }
    Ok(format!("{instances} pushouts with dims <= 3 x 200 points: LP quotient norm equals gauge_W(q(x, y)) exactly ({points} points)"))
}

fn criterion_5() -> Check {
    let steps = 30;
    let a = e(build_generic(FraisseConfig::new(7), steps))?;
    let b = e(build_generic(FraisseConfig::new(7), steps))?;
    let ta = emit_bundle(&Bundle::State(a.clone()));
    let tb = emit_bundle(&Bundle::State(b));
    ensure(ta.as_bytes() == tb.as_bytes(), || "two runs differ".into())?;
    let Bundle::State(reread) = e(parse_bundle(&ta))? else {
        return Err("state file did not parse as a state".into());
    };
    e(verify_state(&reread))?;
    let mut satisfied = 0;
    for t in &reread.tasks {
        if matches!(t.status, TaskStatus::Satisfied { .. }) {
            e(check_condition_a(&reread, t))?;
            satisfied += 1;
        }
    }
    let mut longer = a.clone();
    e(longer.run(10))?;
    for (old, new) in a.tasks.iter().zip(&longer.tasks) {
        if matches!(old.status, TaskStatus::Satisfied { .. }) {
            ensure(old == new, || "a satisfied task changed after resuming".into())?;
        }
    }
    Ok(format!(
        "seed 7, {steps} steps: {satisfied} satisfied tasks re-verified from the state file; two runs byte-identical ({} bytes)",
        ta.len()
    ))
}

fn criterion_6() -> Check {
    let state = e(build_generic(FraisseConfig::new(7), 30))?;
    let mut notes = Vec::new();
    for (name, x) in [("l1(3)", MonotoneSpace::l1(3)), ("linf(3)", MonotoneSpace::linf(3))] {
        let start = Instant::now();
        let chain = e(truncation_chain(&x))?;
        let (trace, ext) = e(embed_universal(&state, &chain, 3))?;
        for (n, s) in trace.steps.iter().enumerate() {
            let margin = pow2_inv(n + 1);
            let a = &trace.maps[n + 1].map;
            let ra = e(a.restrict(chain[n].ball()))?;
            let lifted = e(RatMat::inclusion(a.codomain().dim(), trace.maps[n].map.codomain().dim())
                .mul(trace.maps[n].map.matrix()))?;
            let dev = op_norm(&e(ra.with_matrix(e(ra.matrix().sub(&lifted))?))?);
            ensure(dev <= margin && dev == s.deviation, || format!("{name}: condition (2) fails at step {n}"))?;
            ensure(s.closeness <= margin, || format!("{name}: closeness fails at step {n}"))?;
        }
        for a in &trace.maps {
            e(a.verify())?;
        }
        let last = trace.maps.last().unwrap();
        e(check_eps_isometry(&last.map, &rat(1, 2)))?;
        e(trace.final_cert.verify(&last.map))?;
        ensure(trace.final_eps <= rat(1, 2), || "final ε above 1/2".into())?;
        e(verify_trace(&trace, &ext))?;
        let worst = trace.steps.iter().map(|s| s.deviation.clone()).max().unwrap_or_else(Rat::zero);
        notes.push(format!(
            "{name} into stage {} (max deviation {worst}, final ε {}, {:.2}s)",
            trace.ks[3],
            trace.final_eps,
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(format!("3 steps each; margins <= 2^(-n-1) exact, chains verified: {}", notes.join("; ")))
}

fn criterion_7() -> Check {
    let eps = rat(1, 16);
    let a = e(build_generic(FraisseConfig::new(7), 30))?;
    let b = e(build_generic(FraisseConfig::new(13), 30))?;
    let mut notes = Vec::new();
    for (label, p, q) in [("7->13", &a, &b), ("13->7", &b, &a)] {
        let res = e(back_and_forth(p, q, 6, &eps))?;
        ensure(res.u_cert.eps == eps && res.v_cert.eps == eps, || "certificates carry a different ε".into())?;
        e(res.u_cert.verify(&res.u.map))?;
        e(res.v_cert.verify(&res.v.map))?;
        let vu = e(res.v.map.compose(&res.u.map))?;
        let incl = RatMat::inclusion(vu.codomain().dim(), vu.domain().dim());
        let dev = op_norm(&e(vu.with_matrix(e(vu.matrix().sub(&incl))?))?);
        ensure(dev <= eps && dev == res.deviation, || format!("{label}: round trip deviation {dev}"))?;
        notes.push(format!(
            "{label}: A_6 (dim {}) -> B_{} -> A_{}, deviation {dev}",
            res.u.map.domain().dim(),
            res.m_b,
            res.m_a
        ));
    }
    Ok(format!("stage 6, ε = 1/16, exact certificates: {}", notes.join("; ")))
}

fn criterion_8() -> Check {
    let mut r = common::rng(8);
    let samples = 1000;
    let mut hv = 0;
    for _ in 0..samples {
        let dim = r.gen_range(1..=4);
        let pts: Vec<_> = (0..r.gen_range(dim..=dim + 4)).map(|_| common::nonzero_vec(&mut r, dim)).collect();
        let Ok(ball) = SymPolytope::from_vertices(dim, &pts) else { continue };
        let h = e(v_to_h(dim, ball.vertices()))?;
        let v = e(h_to_v(dim, &h))?;
        ensure(v.as_slice() == ball.vertices(), || "H to V does not return the vertices".into())?;
        ensure(e(v_to_h(dim, &v))? == h, || "V to H does not return the facets".into())?;
        ensure(e(SymPolytope::from_functionals(dim, &h))? == ball, || "H and V bodies differ".into())?;
        hv += 1;
    }
    ensure(hv >= samples * 9 / 10, || format!("only {hv} full-dimensional samples"))?;

    for _ in 0..samples {
        let dim = r.gen_range(1..=4);
        let ball = common::monotone_space(&mut r, dim).into_ball();
        let x = common::point(&mut r, dim);
        let y = common::point(&mut r, dim);
        let t = common::rat_in(&mut r, 3);
        let (gx, gy) = (e(ball.gauge(&x))?, e(ball.gauge(&y))?);
        ensure(e(ball.gauge(&add(&x, &y)))? <= &gx + &gy, || "triangle inequality".into())?;
        ensure(e(ball.gauge(&scale(&x, &t)))? == t.abs() * &gx, || "homogeneity".into())?;
        ensure(gx.is_zero() == x.iter().all(|c| c.is_zero()), || "definiteness".into())?;
        ensure(e(ball.gauge(&vec![Rat::zero(); dim]))?.is_zero(), || "gauge of zero".into())?;
    }

    for _ in 0..samples {
        let dim = r.gen_range(1..=4);
        let ball = common::monotone_space(&mut r, dim).into_ball();
        let x = common::point(&mut r, dim);
        let g = e(ball.gauge(&x))?;
        let mem = e(ball.member(&x))?;
        ensure(mem.inside == (g <= Rat::one()), || "member disagrees with gauge".into())?;
        match &mem.cert {
            MemberCert::Combination(terms) => {
                ensure(mem.inside && ball.verify_witness(&x, terms), || "bad membership witness".into())?
            }
            MemberCert::Violated(phi) => ensure(
                !mem.inside && dot(phi, &x).abs() > Rat::one() && ball.functionals().contains(phi),
                || "bad violation witness".into(),
            )?,
        }
    }

    for _ in 0..samples {
        let dim = r.gen_range(1..=4);
        let space = common::monotone_space(&mut r, dim);
        let chain = space.truncation_chain();
        e(check_chain(&chain, space.ball()))?;
        let ps = &chain.projections;
        for (i, p) in ps.iter().enumerate() {
            ensure(e(p.mul(p))? == *p, || "projection not idempotent".into())?;
            ensure(p.rank() == chain.start_rank + i, || "wrong rank".into())?;
            let t = e(LinMap::new(space.ball().clone(), space.ball().clone(), p.clone()))?;
            ensure(op_norm(&t) <= Rat::one(), || "projection norm above one".into())?;
            for q in &ps[..i] {
                ensure(e(p.mul(q))? == *q && e(q.mul(p))? == *q, || "projections do not nest".into())?;
            }
        }
        ensure(ps.last() == Some(&RatMat::identity(dim)), || "chain does not end at the identity".into())?;
    }
    Ok(format!(
        "{samples} samples each: H<->V round trip ({hv} full-dimensional), gauge axioms, member <=> gauge <= 1, chain identities; 0 violations"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("amalgamation pushouts", criterion_1),
        ("correction pushouts and universal maps", criterion_2),
        ("norm formula of the correction ball", criterion_3),
        ("quotient norm of the pushout", criterion_4),
        ("generic sequence ledger and determinism", criterion_5),
        ("universality embeddings", criterion_6),
        ("back-and-forth round trip", criterion_7),
        ("kernel invariants", criterion_8),
    ];
    // Optional positional arguments select criteria by number.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS, tolerance 0 (exact); {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL, tolerance 0 (exact); {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {ran} criteria pass", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
