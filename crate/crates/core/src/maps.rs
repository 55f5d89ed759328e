//! Rational operators between polyhedral spaces, with exact norm
//! computation and certificates for isometries, ε-isometries, projection
//! chains and initial-position embeddings.

use num_traits::{One, Signed, Zero};

use crate::error::{ChainViolationKind, Error, Result};
use crate::exactgeom::lp::{Lp, LpOutcome};
use crate::exactgeom::rational::{fmt_rat, fmt_vec, is_zero_vec, round_toward_zero, scale};
use crate::exactgeom::{Rat, RatMat, RatVec, SymPolytope, WitnessTerm};

/// Matrix together with the unit balls of its domain and codomain.
#[derive(Clone, PartialEq, Eq)]
pub struct LinMap {
    domain: SymPolytope,
    codomain: SymPolytope,
    matrix: RatMat,
}

impl std::fmt::Debug for LinMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LinMap({} -> {}, {:?})", self.domain.dim(), self.codomain.dim(), self.matrix)
    }
}

impl LinMap {
    pub fn new(domain: SymPolytope, codomain: SymPolytope, matrix: RatMat) -> Result<Self> {
        if matrix.cols() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: matrix.cols() });
        }
        if matrix.rows() != codomain.dim() {
            return Err(Error::DimensionMismatch { expected: codomain.dim(), found: matrix.rows() });
        }
        Ok(LinMap { domain, codomain, matrix })
    }

    pub fn identity(ball: &SymPolytope) -> Self {
        LinMap {
            domain: ball.clone(),
            codomain: ball.clone(),
            matrix: RatMat::identity(ball.dim()),
        }
    }

    /// The zero map.
    pub fn zero(domain: &SymPolytope, codomain: &SymPolytope) -> Self {
        LinMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: RatMat::zeros(codomain.dim(), domain.dim()),
        }
    }

    /// Inclusion of the first `dim(domain)` coordinates.
    pub fn inclusion(domain: &SymPolytope, codomain: &SymPolytope) -> Result<Self> {
        Self::new(
            domain.clone(),
            codomain.clone(),
            RatMat::inclusion(codomain.dim(), domain.dim()),
        )
    }

    pub fn domain(&self) -> &SymPolytope {
        &self.domain
    }

    pub fn codomain(&self) -> &SymPolytope {
        &self.codomain
    }

    pub fn matrix(&self) -> &RatMat {
        &self.matrix
    }

    pub fn apply(&self, x: &[Rat]) -> Result<RatVec> {
        self.matrix.apply(x)
    }

    /// Same spaces, different matrix.
    pub fn with_matrix(&self, matrix: RatMat) -> Result<Self> {
        Self::new(self.domain.clone(), self.codomain.clone(), matrix)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinMap) -> Result<LinMap> {
        if inner.codomain.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: inner.codomain.dim(),
            });
        }
        Self::new(inner.domain.clone(), self.codomain.clone(), self.matrix.mul(&inner.matrix)?)
    }

    /// `self − other` on the same spaces.
    pub fn difference(&self, other: &LinMap) -> Result<LinMap> {
        self.with_matrix(self.matrix.sub(&other.matrix)?)
    }

    /// Restriction to the first `k` coordinates of the domain, viewed on
    /// the given smaller domain ball.
    pub fn restrict(&self, sub: &SymPolytope) -> Result<LinMap> {
        let k = sub.dim();
        if k > self.domain.dim() {
            return Err(Error::IndexOutOfRange { index: k, max: self.domain.dim() });
        }
        Self::new(sub.clone(), self.codomain.clone(), self.matrix.column_block(0, k))
    }
}

/// `max_v ‖A v‖_cod` over domain vertices.
pub fn op_norm_of(domain: &SymPolytope, codomain: &SymPolytope, a: &RatMat) -> Result<Rat> {
    let mut best = Rat::zero();
    for v in domain.vertices() {
        let g = codomain.gauge(&a.apply(v)?)?;
        if g > best {
            best = g;
        }
    }
    Ok(best)
}

pub fn op_norm(t: &LinMap) -> Rat {
    op_norm_of(&t.domain, &t.codomain, &t.matrix).expect("shapes checked at construction")
}

/// Exact certificate that `(1+ε)^{-1}‖x‖ <= ‖Tx‖ <= ‖x‖`.
///
/// `upper[i]` writes `T·v_i` as a convex combination of signed codomain
/// vertices. `lower[i]` writes `(1+ε)^{-1}·φ_i` as `Tᵀ` applied to a
/// subconvex combination of signed codomain functionals (term `vertex`
/// fields index functionals here).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsIsometryCert {
    pub eps: Rat,
    pub upper: Vec<Vec<WitnessTerm>>,
    pub lower: Vec<Vec<WitnessTerm>>,
}

/// The `ε = 0` case: `‖Tx‖ = ‖x‖` for all `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryCert {
    pub upper: Vec<Vec<WitnessTerm>>,
    pub lower: Vec<Vec<WitnessTerm>>,
}

impl IsometryCert {
    pub fn verify(&self, t: &LinMap) -> Result<()> {
        verify_bounds(t, &Rat::zero(), &self.upper, &self.lower)
    }

    pub fn into_eps(self) -> EpsIsometryCert {
        EpsIsometryCert { eps: Rat::zero(), upper: self.upper, lower: self.lower }
    }
}

impl EpsIsometryCert {
    pub fn verify(&self, t: &LinMap) -> Result<()> {
        if self.eps.is_negative() {
            return Err(Error::Certificate("negative eps".into()));
        }
        verify_bounds(t, &self.eps, &self.upper, &self.lower)
    }
}

fn adjoint_rows(t: &LinMap) -> Vec<RatVec> {
    let tt = t.matrix.transpose();
    t.codomain
        .functionals()
        .iter()
        .map(|psi| tt.apply(psi).expect("shape"))
        .collect()
}

fn verify_bounds(
    t: &LinMap,
    eps: &Rat,
    upper: &[Vec<WitnessTerm>],
    lower: &[Vec<WitnessTerm>],
) -> Result<()> {
    let fail = |what: &str| Err(Error::Certificate(what.to_string()));
    if upper.len() != t.domain.vertices().len() || lower.len() != t.domain.functionals().len() {
        return fail("witness count does not match the domain ball");
    }
    for (v, terms) in t.domain.vertices().iter().zip(upper) {
        if !t.codomain.verify_witness(&t.apply(v)?, terms) {
            return fail("upper bound witness rejected");
        }
    }
    let rows = adjoint_rows(t);
    let s = Rat::one() / (Rat::one() + eps);
    for (phi, terms) in t.domain.functionals().iter().zip(lower) {
        let mut acc = vec![Rat::zero(); t.domain.dim()];
        let mut mass = Rat::zero();
        for term in terms {
            if term.coef.is_negative() || term.vertex >= rows.len() {
                return fail("lower bound witness malformed");
            }
            for (a, r) in acc.iter_mut().zip(&rows[term.vertex]) {
                if term.negated {
                    *a -= &term.coef * r;
                } else {
                    *a += &term.coef * r;
                }
            }
            mass += &term.coef;
        }
        if mass > Rat::one() || acc != scale(phi, &s) {
            return fail("lower bound witness rejected");
        }
    }
    Ok(())
}

fn norm_error(eps: &Rat, x: &[Rat], dn: &Rat, cn: &Rat) -> Error {
    let (x, domain_norm, codomain_norm) = (fmt_vec(x), fmt_rat(dn), fmt_rat(cn));
    if eps.is_zero() {
        Error::NotIsometry { x, domain_norm, codomain_norm }
    } else {
        Error::NotEpsIsometry { x, domain_norm, codomain_norm }
    }
}

/// Dual witness for `target ∈ Tᵀ(codomain dual ball)`.
fn dual_witness(rows: &[RatVec], target: &[Rat]) -> Option<Vec<WitnessTerm>> {
    if is_zero_vec(target) {
        return Some(Vec::new());
    }
    // Single functional parallel to the target.
    for (j, r) in rows.iter().enumerate() {
        let Some(k) = target.iter().position(|x| !x.is_zero()) else { break };
        if r[k].is_zero() {
            continue;
        }
        let c = &target[k] / &r[k];
        if c.abs() <= Rat::one() && scale(r, &c).as_slice() == target {
            return Some(vec![WitnessTerm { coef: c.abs(), vertex: j, negated: c.is_negative() }]);
        }
    }
    let m = rows.len();
    let n = target.len();
    let mut lp = Lp::new(2 * m);
    for c in 0..n {
        let mut row = Vec::with_capacity(2 * m);
        for r in rows {
            row.push(r[c].clone());
            row.push(-&r[c]);
        }
        lp.add_eq(row, target[c].clone());
    }
    lp.add_le(vec![Rat::one(); 2 * m], Rat::one());
    lp.set_objective(vec![Rat::one(); 2 * m]);
    let (_, lam) = lp.solve().optimal()?;
    let mut terms = Vec::new();
    for (k, l) in lam.into_iter().enumerate() {
        if !l.is_zero() {
            terms.push(WitnessTerm { coef: l, vertex: k / 2, negated: k % 2 == 1 });
        }
    }
    Some(terms)
}

/// Minimizes `‖Tx‖` subject to `φ(x) = 1`.
fn lower_counterexample(t: &LinMap, phi: &[Rat]) -> (RatVec, Rat) {
    let n = t.domain.dim();
    let mut lp = Lp::new(n + 1);
    for i in 0..n {
        lp.set_free(i);
    }
    let mut obj = vec![Rat::zero(); n + 1];
    obj[n] = Rat::one();
    lp.set_objective(obj);
    for r in adjoint_rows(t) {
        let mut a = r.clone();
        a.push(-Rat::one());
        lp.add_le(a, Rat::zero());
        let mut b: RatVec = r.iter().map(|x| -x).collect();
        b.push(-Rat::one());
        lp.add_le(b, Rat::zero());
    }
    let mut e = phi.to_vec();
    e.push(Rat::zero());
    lp.add_eq(e, Rat::one());
    match lp.solve() {
        LpOutcome::Optimal { value, mut x } => {
            x.truncate(n);
            (x, value)
        }
        _ => unreachable!("objective bounded below by zero and a feasible point exists"),
    }
}

fn certify(t: &LinMap, eps: &Rat) -> Result<(Vec<Vec<WitnessTerm>>, Vec<Vec<WitnessTerm>>)> {
    if eps.is_negative() {
        return Err(Error::InvalidParameter("eps must be nonnegative".into()));
    }
    let mut upper = Vec::with_capacity(t.domain.vertices().len());
    for v in t.domain.vertices() {
        let w = t.apply(v)?;
        let g = t.codomain.gauge(&w)?;
        if g > Rat::one() {
            return Err(norm_error(eps, v, &Rat::one(), &g));
        }
        let terms = t
            .codomain
            .combination_witness(&w)
            .ok_or_else(|| Error::InvalidBall("codomain hull disagrees with gauge".into()))?;
        upper.push(terms);
    }
    let rows = adjoint_rows(t);
    let s = Rat::one() / (Rat::one() + eps);
    let mut lower = Vec::with_capacity(t.domain.functionals().len());
    for phi in t.domain.functionals() {
        match dual_witness(&rows, &scale(phi, &s)) {
            Some(terms) => lower.push(terms),
            None => {
                let (x, tx) = lower_counterexample(t, phi);
                let dn = t.domain.gauge(&x)?;
                return Err(norm_error(eps, &x, &dn, &tx));
            }
        }
    }
    Ok((upper, lower))
}

pub fn check_isometry(t: &LinMap) -> Result<IsometryCert> {
    let (upper, lower) = certify(t, &Rat::zero())?;
    Ok(IsometryCert { upper, lower })
}

pub fn check_eps_isometry(t: &LinMap, eps: &Rat) -> Result<EpsIsometryCert> {
    let (upper, lower) = certify(t, eps)?;
    Ok(EpsIsometryCert { eps: eps.clone(), upper, lower })
}

/// Chain of projections `P_0, …, P_L` on one space with
/// `rank(P_i) = start_rank + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionChain {
    pub start_rank: usize,
    pub projections: Vec<RatMat>,
}

impl ProjectionChain {
    pub fn new(start_rank: usize, projections: Vec<RatMat>) -> Self {
        ProjectionChain { start_rank, projections }
    }

    /// Coordinate truncations `P_start, …, P_n` on an `n`-dimensional space.
    pub fn truncations(n: usize, start: usize) -> Self {
        ProjectionChain {
            start_rank: start,
            projections: (start..=n).map(|k| RatMat::truncation(n, k)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn first(&self) -> Option<&RatMat> {
        self.projections.first()
    }

    /// All identities of a PRI on `ambient`; reports the first failure.
    pub fn check(&self, ambient: &SymPolytope) -> Result<()> {
        check_chain(self, ambient)
    }

    /// Range of the first projection equals the range of `embedding`.
    pub fn check_start(&self, embedding: &RatMat) -> Result<()> {
        let bad = Err(Error::ChainViolation { kind: ChainViolationKind::StartImage, index: 0 });
        let Some(p0) = self.first() else { return bad };
        if p0.cols() != embedding.rows() || self.start_rank != embedding.cols() {
            return bad;
        }
        if p0.mul(embedding)? != *embedding || embedding.rank() != embedding.cols() {
            return bad;
        }
        Ok(())
    }
}

pub fn check_chain(c: &ProjectionChain, ambient: &SymPolytope) -> Result<()> {
    let n = ambient.dim();
    let viol = |kind, index| Err(Error::ChainViolation { kind, index });
    if c.projections.is_empty() {
        return viol(ChainViolationKind::Shape, 0);
    }
    for (i, p) in c.projections.iter().enumerate() {
        if p.rows() != n || p.cols() != n {
            return viol(ChainViolationKind::Shape, i);
        }
        if p.mul(p)? != *p {
            return viol(ChainViolationKind::Idempotent, i);
        }
        if p.rank() != c.start_rank + i {
            return viol(ChainViolationKind::Rank, i);
        }
        for q in &c.projections[..i] {
            if p.mul(q)? != *q || q.mul(p)? != *q {
                return viol(ChainViolationKind::Commute, i);
            }
        }
        if op_norm_of(ambient, ambient, p)? > Rat::one() {
            return viol(ChainViolationKind::Contraction, i);
        }
    }
    let last = c.projections.len() - 1;
    if c.projections[last] != RatMat::identity(n) {
        return viol(ChainViolationKind::NotIdentity, last);
    }
    Ok(())
}

/// Whether the coordinate projection onto the (0-based) index set `s`
/// contracts the ball.
pub fn check_subbasis(ball: &SymPolytope, s: &[usize]) -> bool {
    let n = ball.dim();
    if s.iter().any(|&i| i >= n) {
        return false;
    }
    let mut p = RatMat::zeros(n, n);
    for &i in s {
        p.set(i, i, Rat::one());
    }
    matches!(op_norm_of(ball, ball, &p), Ok(v) if v <= Rat::one())
}

/// Entry-wise rounding toward zero to denominators at most `denom_bound`,
/// repaired to a contraction by rescaling with the reciprocal norm.
pub fn rationalize_arrow(t: &LinMap, denom_bound: u64, budget: &Rat) -> Result<LinMap> {
    if !budget.is_positive() {
        return Err(Error::InvalidParameter("budget must be positive".into()));
    }
    if denom_bound == 0 {
        return Err(Error::BudgetInfeasible("denominator bound must be positive".into()));
    }
    let round = |m: &RatMat| m.map_entries(|x| round_toward_zero(x, denom_bound));
    let mut m = round(&t.matrix);
    let mut norm = op_norm_of(&t.domain, &t.codomain, &m)?;
    let mut rounds = 0;
    while norm > Rat::one() {
        rounds += 1;
        if rounds > 16 {
            return Err(Error::BudgetInfeasible("cannot restore contraction".into()));
        }
        m = round(&m.scaled(&(Rat::one() / &norm)));
        norm = op_norm_of(&t.domain, &t.codomain, &m)?;
    }
    let dev = op_norm_of(&t.domain, &t.codomain, &m.sub(&t.matrix)?)?;
    if &dev > budget {
        return Err(Error::BudgetInfeasible(format!(
            "deviation {} exceeds budget {}",
            fmt_rat(&dev),
            fmt_rat(budget)
        )));
    }
    t.with_matrix(m)
}

/// A rational isometric embedding whose image is initial: the chain starts
/// at the image and climbs one dimension at a time to the codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialArrow {
    pub map: LinMap,
    pub chain: ProjectionChain,
    pub cert: IsometryCert,
}

impl InitialArrow {
    pub fn certify(map: LinMap, chain: ProjectionChain) -> Result<Self> {
        let cert = check_isometry(&map)?;
        check_chain(&chain, map.codomain())?;
        chain.check_start(map.matrix())?;
        Ok(InitialArrow { map, chain, cert })
    }

    /// Inclusion of an initial coordinate segment of a monotone ball.
    pub fn coordinate(domain: &SymPolytope, codomain: &SymPolytope) -> Result<Self> {
        let map = LinMap::inclusion(domain, codomain)?;
        let chain = ProjectionChain::truncations(codomain.dim(), domain.dim());
        Self::certify(map, chain)
    }

    pub fn verify(&self) -> Result<()> {
        self.cert.verify(&self.map)?;
        check_chain(&self.chain, self.map.codomain())?;
        self.chain.check_start(self.map.matrix())
    }

    /// Basis `B` of the codomain whose first columns are the image of the
    /// domain basis and whose `k`-th further column spans
    /// `range(P_k) ∩ ker(P_{k-1})`. In these coordinates the map is
    /// `[I; 0]` and the chain is the coordinate truncation chain.
    pub fn normalizing_basis(&self) -> Result<RatMat> {
        let m = self.map.codomain().dim();
        let mut cols: Vec<RatVec> = (0..self.map.domain().dim()).map(|i| self.map.matrix().column(i)).collect();
        for w in self.chain.projections.windows(2) {
            let d = w[1].sub(&w[0])?;
            let c = (0..m)
                .map(|j| d.column(j))
                .find(|c| !is_zero_vec(c))
                .ok_or_else(|| Error::Certificate("chain step has rank zero".into()))?;
            cols.push(c);
        }
        let b = RatMat::from_columns(m, &cols)?;
        if b.rank() != m {
            return Err(Error::Certificate("chain does not span the codomain".into()));
        }
        Ok(b)
    }

    /// `self ∘ inner`; the chain first climbs inside the image of `self`
    /// (conjugated through `self`), then continues with `self`'s chain.
    pub fn compose(&self, inner: &InitialArrow) -> Result<InitialArrow> {
        let map = self.map.compose(&inner.map)?;
        let g = self.map.matrix();
        let left = left_inverse(g)?;
        let r0 = self.chain.first().ok_or(Error::EmptyInput)?;
        let back = left.mul(r0)?;
        let mut projections = Vec::new();
        for q in &inner.chain.projections {
            projections.push(g.mul(q)?.mul(&back)?);
        }
        projections.extend(self.chain.projections.iter().skip(1).cloned());
        let chain = ProjectionChain::new(inner.chain.start_rank, projections);
        InitialArrow::certify(map, chain)
    }
}

/// `(GᵀG)^{-1}Gᵀ` for a full-column-rank `G`.
pub fn left_inverse(g: &RatMat) -> Result<RatMat> {
    let gt = g.transpose();
    let gram = gt.mul(g)?;
    Ok(gram.inverse().ok_or(Error::RankDeficient)?.mul(&gt)?)
}
