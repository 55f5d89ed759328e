//! Amalgamation over a common initial segment: `W = (X ⊕₁ Y)/Δ` with
//! `Δ = {(z, −z) : z ∈ Z}`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactgeom::lp::Lp;
use crate::exactgeom::rational::dot;
use crate::exactgeom::{dim_cap, Rat, RatMat, RatVec, SymPolytope};
use crate::maps::{check_chain, check_isometry, IsometryCert, LinMap, ProjectionChain};
use crate::spaces::MonotoneSpace;

/// ℓ1-sum with `X` coordinates first.
pub fn l1_sum(x: &MonotoneSpace, y: &MonotoneSpace) -> Result<MonotoneSpace> {
    let (m, k) = (x.dim(), y.dim());
    let d = m + k;
    if d > dim_cap() {
        return Err(Error::DimensionCapExceeded { dim: d, cap: dim_cap() });
    }
    if m == 0 {
        return Ok(y.clone());
    }
    if k == 0 {
        return Ok(x.clone());
    }
    let mut verts = Vec::new();
    for v in x.ball().vertices() {
        let mut p = v.clone();
        p.resize(d, Rat::zero());
        verts.push(p);
    }
    for w in y.ball().vertices() {
        let mut p = vec![Rat::zero(); m];
        p.extend(w.iter().cloned());
        verts.push(p);
    }
    let mut funcs = Vec::new();
    for f in x.ball().functionals() {
        for g in y.ball().functionals() {
            for sign in [Rat::one(), -Rat::one()] {
                let mut h = f.clone();
                h.extend(g.iter().map(|c| c * &sign));
                funcs.push(h);
            }
        }
    }
    MonotoneSpace::new(SymPolytope::from_parts(d, verts, funcs)?)
}

/// Everything produced by [`amalgamate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    pub n: usize,
    pub x: MonotoneSpace,
    pub y: MonotoneSpace,
    pub w: MonotoneSpace,
    pub ix: LinMap,
    pub jy: LinMap,
    pub ix_cert: IsometryCert,
    pub jy_cert: IsometryCert,
    /// Truncations of `W` from `dim X` upward.
    pub chain_x: ProjectionChain,
    /// `diag(P_{N+n}, I)` for `n = 0..=dim X − N`, from `jY[Y]` upward.
    pub chain_y: ProjectionChain,
}

/// The quotient map `q(x, y) = (x + ỹ_head, y_tail)`.
pub fn quotient_matrix(n: usize, m: usize, k: usize) -> RatMat {
    let d = m + k - n;
    let mut q = RatMat::zeros(d, m + k);
    for i in 0..m {
        q.set(i, i, Rat::one());
    }
    for i in 0..n {
        q.set(i, m + i, Rat::one());
    }
    for t in 0..(k - n) {
        q.set(m + t, m + n + t, Rat::one());
    }
    q
}

/// `y ↦ (y_head, 0, y_tail)`.
fn jy_matrix(n: usize, m: usize, k: usize) -> RatMat {
    quotient_matrix(n, m, k).column_block(m, m + k)
}

fn chain_y(n: usize, m: usize, k: usize) -> ProjectionChain {
    let d = m + k - n;
    let projections = (0..=(m - n))
        .map(|s| {
            let mut p = RatMat::zeros(d, d);
            for i in 0..(n + s) {
                p.set(i, i, Rat::one());
            }
            for i in m..d {
                p.set(i, i, Rat::one());
            }
            p
        })
        .collect();
    ProjectionChain::new(k, projections)
}

pub fn amalgamate(n: usize, x: &MonotoneSpace, y: &MonotoneSpace) -> Result<PushoutResult> {
    let (m, k) = (x.dim(), y.dim());
    if n > m.min(k) {
        return Err(Error::IndexOutOfRange { index: n, max: m.min(k) });
    }
    if x.truncate(n)? != y.truncate(n)? {
        return Err(Error::ZMismatch(format!(
            "the first {n} coordinates of X and Y span different subspaces"
        )));
    }
    let d = m + k - n;
    if d > dim_cap() {
        return Err(Error::DimensionCapExceeded { dim: d, cap: dim_cap() });
    }
    // When one side is the common part, the quotient is the other side.
    let w = if n == 0 {
        l1_sum(x, y)?
    } else if n == k {
        x.clone()
    } else if n == m {
        y.clone()
    } else {
        let q = quotient_matrix(n, m, k);
        let mut gens: Vec<RatVec> = Vec::new();
        for v in x.ball().vertices() {
            let mut p = v.clone();
            p.resize(m + k, Rat::zero());
            gens.push(q.apply(&p)?);
        }
        for v in y.ball().vertices() {
            let mut p = vec![Rat::zero(); m];
            p.extend(v.iter().cloned());
            gens.push(q.apply(&p)?);
        }
        MonotoneSpace::new(SymPolytope::from_vertices(d, &gens)?)?
    };
    let ix = LinMap::new(x.ball().clone(), w.ball().clone(), RatMat::inclusion(d, m))?;
    let jy = LinMap::new(y.ball().clone(), w.ball().clone(), jy_matrix(n, m, k))?;
    let ix_cert = check_isometry(&ix)?;
    let jy_cert = check_isometry(&jy)?;
    let result = PushoutResult {
        n,
        x: x.clone(),
        y: y.clone(),
        chain_x: ProjectionChain::truncations(d, m),
        chain_y: chain_y(n, m, k),
        w,
        ix,
        jy,
        ix_cert,
        jy_cert,
    };
    check_chain(&result.chain_x, result.w.ball())?;
    check_chain(&result.chain_y, result.w.ball())?;
    Ok(result)
}

/// Re-derives every claim of a pushout from its stored data.
pub fn verify_pushout(p: &PushoutResult) -> Result<()> {
    let (n, m, k) = (p.n, p.x.dim(), p.y.dim());
    let fail = |what: &str| Err(Error::Certificate(what.to_string()));
    if n > m.min(k) || p.x.truncate(n)? != p.y.truncate(n)? {
        return fail("common subspace");
    }
    MonotoneSpace::new(p.w.ball().clone())?;
    if p.w.dim() != m + k - n {
        return fail("dim(W) = M + K − N");
    }
    if p.ix.domain() != p.x.ball() || p.jy.domain() != p.y.ball() {
        return fail("arrow domains");
    }
    if p.ix.codomain() != p.w.ball() || p.jy.codomain() != p.w.ball() {
        return fail("arrow codomains");
    }
    p.ix_cert.verify(&p.ix)?;
    p.jy_cert.verify(&p.jy)?;
    check_isometry(&p.ix)?;
    check_isometry(&p.jy)?;
    let left = p.ix.matrix().mul(&RatMat::inclusion(m, n))?;
    let right = p.jy.matrix().mul(&RatMat::inclusion(k, n))?;
    if left != right {
        return fail("commuting square");
    }
    check_chain(&p.chain_x, p.w.ball())?;
    p.chain_x.check_start(p.ix.matrix())?;
    check_chain(&p.chain_y, p.w.ball())?;
    p.chain_y.check_start(p.jy.matrix())?;
    // W must be the quotient of the ℓ1-sum: q maps the sum ball onto it.
    let sum = l1_sum(&p.x, &p.y)?;
    let q = quotient_matrix(n, m, k);
    let image = if p.w.dim() == 0 {
        SymPolytope::trivial()
    } else {
        sum.ball().linear_image(&q)?
    };
    if !image.same_body(p.w.ball()) {
        return fail("W is not the quotient of the ℓ1-sum");
    }
    Ok(())
}

/// `inf_z ‖x + z‖_X + ‖y − z‖_Y` over `z` in the common first `n`
/// coordinates, solved as a linear program.
pub fn quotient_norm(n: usize, x: &MonotoneSpace, y: &MonotoneSpace, xv: &[Rat], yv: &[Rat]) -> Result<Rat> {
    if xv.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: xv.len() });
    }
    if yv.len() != y.dim() {
        return Err(Error::DimensionMismatch { expected: y.dim(), found: yv.len() });
    }
    // Variables: z (n, free), s, t >= 0.
    let mut lp = Lp::new(n + 2);
    for i in 0..n {
        lp.set_free(i);
    }
    let mut obj = vec![Rat::zero(); n + 2];
    obj[n] = Rat::one();
    obj[n + 1] = Rat::one();
    lp.set_objective(obj);
    let mut add_rows = |funcs: &[RatVec], point: &[Rat], zsign: &Rat, slot: usize| {
        for f in funcs {
            let base = dot(f, point);
            for s in [Rat::one(), -Rat::one()] {
                // s·(f(point) + zsign·f_head(z)) <= slack
                let mut row = vec![Rat::zero(); n + 2];
                for i in 0..n {
                    row[i] = &s * zsign * &f[i];
                }
                row[slot] = -Rat::one();
                lp.add_le(row, -(&s * &base));
            }
        }
    };
    add_rows(x.ball().functionals(), xv, &Rat::one(), n);
    add_rows(y.ball().functionals(), yv, &-Rat::one(), n + 1);
    let (value, _) = lp
        .solve()
        .optimal()
        .expect("bounded below by zero and feasible");
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::int;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn l1_sum_examples() {
        let r = MonotoneSpace::l1(1);
        assert_eq!(l1_sum(&r, &r).unwrap(), MonotoneSpace::l1(2));
        let y = MonotoneSpace::linf(2);
        assert_eq!(l1_sum(&MonotoneSpace::trivial(), &y).unwrap(), y);
        let s = l1_sum(&MonotoneSpace::linf(2), &MonotoneSpace::l1(1)).unwrap();
        assert_eq!(s.norm(&v(&[1, 1, 1])).unwrap(), int(2));
        let direct = SymPolytope::from_vertices(3, &[v(&[1, 1, 0]), v(&[1, -1, 0]), v(&[0, 0, 1])]).unwrap();
        assert_eq!(s.ball(), &direct);
    }

    #[test]
    fn amalgamate_examples() {
        let r = MonotoneSpace::l1(1);
        let p = amalgamate(1, &r, &r).unwrap();
        assert_eq!(p.w, r);
        assert_eq!(p.ix.matrix(), &RatMat::identity(1));
        assert_eq!(p.jy.matrix(), &RatMat::identity(1));
        verify_pushout(&p).unwrap();

        let p = amalgamate(1, &MonotoneSpace::l1(2), &MonotoneSpace::linf(2)).unwrap();
        let expect = SymPolytope::from_vertices(3, &[v(&[0, 1, 0]), v(&[1, 0, 1]), v(&[1, 0, -1])]).unwrap();
        assert_eq!(p.w.ball(), &expect);
        assert_eq!(p.w.norm(&p.ix.apply(&v(&[0, 1])).unwrap()).unwrap(), int(1));
        assert_eq!(p.w.norm(&p.jy.apply(&v(&[1, 1])).unwrap()).unwrap(), int(1));
        verify_pushout(&p).unwrap();

        let p0 = amalgamate(0, &MonotoneSpace::l1(2), &MonotoneSpace::linf(1)).unwrap();
        assert_eq!(p0.w, l1_sum(&MonotoneSpace::l1(2), &MonotoneSpace::linf(1)).unwrap());
        verify_pushout(&p0).unwrap();
    }

    #[test]
    fn mismatch_and_tampering() {
        let y = MonotoneSpace::new(SymPolytope::cube(2).scaled(&int(2))).unwrap();
        assert!(matches!(amalgamate(1, &MonotoneSpace::l1(2), &y), Err(Error::ZMismatch(_))));
        let mut p = amalgamate(1, &MonotoneSpace::l1(2), &MonotoneSpace::linf(2)).unwrap();
        let mut m = p.jy.matrix().clone();
        m.set(0, 0, crate::exactgeom::rational::rat(1, 2));
        p.jy = p.jy.with_matrix(m).unwrap();
        assert!(verify_pushout(&p).is_err());
    }

    #[test]
    fn quotient_norm_matches_gauge() {
        let (x, y) = (MonotoneSpace::l1(2), MonotoneSpace::linf(2));
        let p = amalgamate(1, &x, &y).unwrap();
        let q = quotient_matrix(1, 2, 2);
        for a in -2..=2 {
            for b in -2..=2 {
                let (xv, yv) = (v(&[a, b]), v(&[b - a, 1]));
                let mut full = xv.clone();
                full.extend(yv.iter().cloned());
                let g = p.w.norm(&q.apply(&full).unwrap()).unwrap();
                assert_eq!(quotient_norm(1, &x, &y, &xv, &yv).unwrap(), g);
            }
        }
        let r = MonotoneSpace::l1(1);
        assert_eq!(quotient_norm(1, &r, &r, &v(&[3]), &v(&[-1])).unwrap(), int(2));
    }
}
