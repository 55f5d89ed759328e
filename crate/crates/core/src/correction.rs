//! The ε-correction pushout: for an ε-isometry `f: X → Y`, the space
//! `X ⊕ Y` whose unit ball is `K = conv(G ∪ B_X×{0} ∪ {0}×B_Y)` with
//! `G = {(x, −f(x)) : ‖x‖ ≤ ε^{-1}}`.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactgeom::lp::Lp;
use crate::exactgeom::rational::{dot, fmt_rat, fmt_vec, scale, sub};
use crate::exactgeom::{dim_cap, Rat, RatMat, RatVec, SymPolytope};
use crate::maps::{
    check_chain, check_eps_isometry, check_isometry, op_norm, op_norm_of, IsometryCert, LinMap,
    ProjectionChain,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionResult {
    pub f: LinMap,
    pub eps: Rat,
    /// Unit ball `K` on `dim X + dim Y` coordinates, `X` first. It is in
    /// general not in monotone position.
    pub xy: SymPolytope,
    pub i0: LinMap,
    pub j0: LinMap,
    pub i0_cert: IsometryCert,
    pub j0_cert: IsometryCert,
    /// Chain from `i0[X]`, present only when every identity verifies.
    pub chain_x: Option<ProjectionChain>,
    /// Chain from `j0[Y]`, present only when every identity verifies.
    pub chain_y: Option<ProjectionChain>,
}

impl CorrectionResult {
    pub fn dim_x(&self) -> usize {
        self.f.domain().dim()
    }

    pub fn dim_y(&self) -> usize {
        self.f.codomain().dim()
    }
}

/// The invertible head block `A` of `f = [A; 0]`.
fn head_block(f: &LinMap) -> Result<RatMat> {
    let (m, k) = (f.domain().dim(), f.codomain().dim());
    let mat = f.matrix();
    if m > k {
        return Err(Error::NotInitialPosition("dim X exceeds dim Y".into()));
    }
    for r in m..k {
        if mat.row(r).iter().any(|c| !c.is_zero()) {
            return Err(Error::NotInitialPosition(format!(
                "f has a nonzero entry in row {r}, outside the initial segment"
            )));
        }
    }
    let a = mat.row_block(0, m);
    if a.rank() != m {
        return Err(Error::NotInitialPosition("f is not injective".into()));
    }
    Ok(a)
}

fn generators(f: &LinMap, eps: &Rat) -> Result<Vec<RatVec>> {
    let (m, k) = (f.domain().dim(), f.codomain().dim());
    let inv = Rat::one() / eps;
    let mut gens = Vec::new();
    for v in f.domain().vertices() {
        let mut p = v.clone();
        p.resize(m + k, Rat::zero());
        gens.push(p);
        let mut g = scale(v, &inv);
        g.extend(f.apply(v)?.iter().map(|c| -(c * &inv)));
        gens.push(g);
    }
    for w in f.codomain().vertices() {
        let mut p = vec![Rat::zero(); m];
        p.extend(w.iter().cloned());
        gens.push(p);
    }
    Ok(gens)
}

pub fn eps_pushout(f: &LinMap, eps: &Rat) -> Result<CorrectionResult> {
    if eps.is_negative() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    check_eps_isometry(f, eps).map_err(|e| match e {
        Error::NotIsometry { x, domain_norm, codomain_norm } => {
            Error::NotEpsIsometry { x, domain_norm, codomain_norm }
        }
        other => other,
    })?;
    if eps.is_zero() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let a = head_block(f)?;
    let (m, k) = (f.domain().dim(), f.codomain().dim());
    let d = m + k;
    if d > dim_cap() {
        return Err(Error::DimensionCapExceeded { dim: d, cap: dim_cap() });
    }
    let xy = SymPolytope::from_vertices(d, &generators(f, eps)?)?;
    let i0 = LinMap::new(f.domain().clone(), xy.clone(), RatMat::inclusion(d, m))?;
    let mut j0m = RatMat::zeros(d, k);
    for i in 0..k {
        j0m.set(m + i, i, Rat::one());
    }
    let j0 = LinMap::new(f.codomain().clone(), xy.clone(), j0m)?;
    let i0_cert = check_isometry(&i0)?;
    let j0_cert = check_isometry(&j0)?;
    let chain_x = candidate_chain_x(&a, m, k).filter(|c| {
        check_chain(c, &xy).is_ok() && c.check_start(i0.matrix()).is_ok()
    });
    let chain_y = candidate_chain_y(f, m, k)?.filter(|c| {
        check_chain(c, &xy).is_ok() && c.check_start(j0.matrix()).is_ok()
    });
    let r = CorrectionResult { f: f.clone(), eps: eps.clone(), xy, i0, j0, i0_cert, j0_cert, chain_x, chain_y };
    check_closeness(&r)?;
    Ok(r)
}

/// `S_0(x, y) = (x + A^{-1} y_head, 0)`; then the `Y` tail coordinates are
/// released one at a time, then the `Y` head ones.
fn candidate_chain_x(a: &RatMat, m: usize, k: usize) -> Option<ProjectionChain> {
    let ainv = a.inverse()?;
    let d = m + k;
    let mut projections = Vec::new();
    // Stage one: keep Y-tail coordinates m..m+t (tail indices within Y).
    for t in 0..=(k - m) {
        let mut p = RatMat::zeros(d, d);
        for i in 0..m {
            p.set(i, i, Rat::one());
            for j in 0..m {
                p.set(i, m + j, ainv.get(i, j).clone());
            }
        }
        for s in 0..t {
            let c = m + m + s;
            p.set(c, c, Rat::one());
        }
        projections.push(p);
    }
    // Stage two: release the Y head coordinates.
    for h in 1..=m {
        let mut p = RatMat::zeros(d, d);
        for i in 0..m {
            p.set(i, i, Rat::one());
            for j in h..m {
                p.set(i, m + j, ainv.get(i, j).clone());
            }
        }
        for j in 0..h {
            p.set(m + j, m + j, Rat::one());
        }
        for s in 0..(k - m) {
            let c = 2 * m + s;
            p.set(c, c, Rat::one());
        }
        projections.push(p);
    }
    Some(ProjectionChain::new(m, projections))
}

/// `R_n(x, y) = (P_n x, y + f(x − P_n x))`.
fn candidate_chain_y(f: &LinMap, m: usize, k: usize) -> Result<Option<ProjectionChain>> {
    let d = m + k;
    let mut projections = Vec::new();
    for n in 0..=m {
        let mut p = RatMat::zeros(d, d);
        for i in 0..n {
            p.set(i, i, Rat::one());
        }
        for i in 0..k {
            p.set(m + i, m + i, Rat::one());
            for c in n..m {
                p.set(m + i, c, f.matrix().get(i, c).clone());
            }
        }
        projections.push(p);
    }
    Ok(Some(ProjectionChain::new(k, projections)))
}

/// `‖i0(v) − j0(f v)‖_K <= ε` on every vertex of `B_X`.
pub fn check_closeness(r: &CorrectionResult) -> Result<()> {
    for v in r.f.domain().vertices() {
        let d = sub(&r.i0.apply(v)?, &r.j0.apply(&r.f.apply(v)?)?);
        let g = r.xy.gauge(&d)?;
        if g > r.eps {
            return Err(Error::Certificate(format!(
                "‖i0 − j0∘f‖ fails at {}: {} > {}",
                fmt_vec(v),
                fmt_rat(&g),
                fmt_rat(&r.eps)
            )));
        }
    }
    Ok(())
}

/// Re-derives every claim of a correction result.
pub fn verify_correction(r: &CorrectionResult) -> Result<()> {
    let fail = |what: &str| Err(Error::Certificate(what.to_string()));
    if !r.eps.is_positive() {
        return fail("eps must be positive");
    }
    check_eps_isometry(&r.f, &r.eps)?;
    head_block(&r.f)?;
    let k = SymPolytope::from_vertices(r.xy.dim(), &generators(&r.f, &r.eps)?)?;
    if !(k.is_subset(&r.xy) && r.xy.is_subset(&k)) {
        return fail("stored ball differs from the hull of the generators");
    }
    if r.i0.codomain() != &r.xy || r.j0.codomain() != &r.xy {
        return fail("arrow codomains");
    }
    if r.i0.matrix() != &RatMat::inclusion(r.xy.dim(), r.dim_x()) {
        return fail("i0 is not the canonical inclusion");
    }
    r.i0_cert.verify(&r.i0)?;
    r.j0_cert.verify(&r.j0)?;
    check_closeness(r)?;
    if let Some(c) = &r.chain_x {
        check_chain(c, &r.xy)?;
        c.check_start(r.i0.matrix())?;
    }
    if let Some(c) = &r.chain_y {
        check_chain(c, &r.xy)?;
        c.check_start(r.j0.matrix())?;
    }
    Ok(())
}

/// `inf{‖u‖_X + ‖v‖_Y + ε‖w‖_X : (x, y) = (u + w, v − f w)}` by linear
/// programming over `w` (then `u = x − w`, `v = y + f w`).
pub fn inf_norm_formula(r: &CorrectionResult, x: &[Rat], y: &[Rat]) -> Result<Rat> {
    let (m, k) = (r.dim_x(), r.dim_y());
    if x.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: x.len() });
    }
    if y.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: y.len() });
    }
    // Variables: w (m, free), a, b, c >= 0.
    let nv = m + 3;
    let mut lp = Lp::new(nv);
    for i in 0..m {
        lp.set_free(i);
    }
    let mut obj = vec![Rat::zero(); nv];
    obj[m] = Rat::one();
    obj[m + 1] = Rat::one();
    obj[m + 2] = r.eps.clone();
    lp.set_objective(obj);
    let ft = r.f.matrix().transpose();
    let mut push = |coef_w: RatVec, base: Rat, slot: usize| {
        for s in [Rat::one(), -Rat::one()] {
            // s·(base + coef_w·w) <= slack
            let mut row: RatVec = coef_w.iter().map(|c| &s * c).collect();
            row.resize(nv, Rat::zero());
            row[slot] = -Rat::one();
            lp.add_le(row, -(&s * &base));
        }
    };
    for phi in r.f.domain().functionals() {
        push(phi.iter().map(|c| -c).collect(), dot(phi, x), m);
        push(phi.clone(), Rat::zero(), m + 2);
    }
    for psi in r.f.codomain().functionals() {
        push(ft.apply(psi)?, dot(psi, y), m + 1);
    }
    Ok(lp.optimal_value_via_dual().expect("bounded below by zero and feasible"))
}

/// The unique `T` with `T∘i0 = i` and `T∘j0 = j`, for a candidate object
/// `(i, j)` into a common codomain.
pub fn universal_map(r: &CorrectionResult, i: &LinMap, j: &LinMap) -> Result<LinMap> {
    let not_object = |s: String| Err(Error::NotAnObject(s));
    if i.domain() != r.f.domain() || j.domain() != r.f.codomain() {
        return not_object("arrow domains differ from X and Y".into());
    }
    if i.codomain() != j.codomain() {
        return not_object("arrows have different codomains".into());
    }
    let ni = op_norm(i);
    if ni > Rat::one() {
        return not_object(format!("‖i‖ = {} > 1", fmt_rat(&ni)));
    }
    let nj = op_norm(j);
    if nj > Rat::one() {
        return not_object(format!("‖j‖ = {} > 1", fmt_rat(&nj)));
    }
    let diff = i.matrix().sub(&j.matrix().mul(r.f.matrix())?)?;
    let nd = op_norm_of(i.domain(), i.codomain(), &diff)?;
    if nd > r.eps {
        return not_object(format!("‖i − j∘f‖ = {} > ε = {}", fmt_rat(&nd), fmt_rat(&r.eps)));
    }
    let t = LinMap::new(r.xy.clone(), i.codomain().clone(), i.matrix().hcat(j.matrix())?)?;
    let nt = op_norm(&t);
    if nt > Rat::one() {
        return Err(Error::Certificate(format!("universal map has norm {}", fmt_rat(&nt))));
    }
    if t.matrix().mul(r.i0.matrix())? != *i.matrix() || t.matrix().mul(r.j0.matrix())? != *j.matrix() {
        return Err(Error::Certificate("T∘i0 = i or T∘j0 = j fails".into()));
    }
    Ok(t)
}
