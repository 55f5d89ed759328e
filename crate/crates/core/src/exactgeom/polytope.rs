//! Origin-symmetric full-dimensional polytopes with both descriptions.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::dd::{dedupe_symmetric, symmetric_vertices};
use super::lp::{Lp, LpOutcome};
use super::rational::{
    canonical_cmp, dot, fmt_rat, is_zero_vec, neg, pivot_rows, rank_of_rows, sign_normalize, Rat,
    RatMat, RatVec,
};
use super::dim_cap;
use crate::error::{Error, Result};

/// Unit ball of a rational polyhedral norm.
///
/// Vertices and functionals are stored one per `±` pair, sign-normalized
/// (first nonzero entry positive) and sorted canonically, so two values
/// describing the same body compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymPolytope(Arc<Inner>);

#[derive(PartialEq, Eq, Hash)]
struct Inner {
    dim: usize,
    vertices: Vec<RatVec>,
    functionals: Vec<RatVec>,
}

impl fmt::Debug for SymPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |vs: &[RatVec]| -> String {
            vs.iter()
                .map(|v| format!("({})", v.iter().map(fmt_rat).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "SymPolytope(dim={}, V=±[{}], H=±[{}])",
            self.0.dim,
            show(&self.0.vertices),
            show(&self.0.functionals)
        )
    }
}

/// Convex-combination term `coef · (±vertex[index])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTerm {
    pub coef: Rat,
    pub vertex: usize,
    pub negated: bool,
}

/// Evidence for or against membership in a ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberCert {
    /// `x = Σ coef·(±v)` with nonnegative coefficients summing to one.
    Combination(Vec<WitnessTerm>),
    /// A functional of the ball with `|φ(x)| > 1`.
    Violated(RatVec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub inside: bool,
    pub cert: MemberCert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsetCert {
    /// One membership witness per vertex representative of the inner body.
    Contained(Vec<Vec<WitnessTerm>>),
    /// A vertex of the inner body outside the outer one.
    Escapes(RatVec),
}

fn canonicalize(mut vs: Vec<RatVec>) -> Vec<RatVec> {
    vs = vs.into_iter().map(sign_normalize).collect();
    vs.sort_by(|a, b| canonical_cmp(a, b));
    vs.dedup();
    vs
}

fn check_cap(dim: usize) -> Result<()> {
    let cap = dim_cap();
    if dim > cap {
        return Err(Error::DimensionCapExceeded { dim, cap });
    }
    Ok(())
}

fn check_dims(dim: usize, pts: &[RatVec]) -> Result<()> {
    for p in pts {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    Ok(())
}

/// Signed rows of `items` on which `probe` evaluates to exactly ±1.
fn tight_rows(items: &[RatVec], probe: &[Rat]) -> Vec<RatVec> {
    let mut out = Vec::new();
    for it in items {
        let v = dot(it, probe);
        if v.is_one() {
            out.push(it.clone());
        } else if (-&v).is_one() {
            out.push(neg(it));
        }
    }
    out
}

/// Extreme points of `conv(points ∪ -points)`, one per `±` pair, in
/// canonical order. Points need not span the ambient space.
pub fn hull_reduce(points: &[RatVec]) -> Result<Vec<RatVec>> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    check_dims(dim, points)?;
    let pts: Vec<RatVec> = dedupe_symmetric(
        points
            .iter()
            .filter(|p| !is_zero_vec(p))
            .cloned()
            .collect(),
    );
    if pts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let r = rank_of_rows(&pts, dim);
    if r == dim {
        let (verts, _) = reduce_full(dim, &pts)?;
        return Ok(canonicalize(verts));
    }
    // Coordinates on which the projection is injective over span(pts).
    let cols: Vec<RatVec> = (0..dim)
        .map(|c| pts.iter().map(|p| p[c].clone()).collect())
        .collect();
    let keep = pivot_rows(&cols, pts.len());
    let projected: Vec<RatVec> = pts
        .iter()
        .map(|p| keep.iter().map(|&c| p[c].clone()).collect())
        .collect();
    let (verts, _) = reduce_full(keep.len(), &projected)?;
    let chosen: Vec<RatVec> = verts
        .iter()
        .map(|v| {
            let idx = projected.iter().position(|q| q == v).expect("vertex comes from input");
            pts[idx].clone()
        })
        .collect();
    Ok(canonicalize(chosen))
}

/// Full-rank hull reduction: returns (extreme points, facet functionals).
fn reduce_full(dim: usize, pts: &[RatVec]) -> Result<(Vec<RatVec>, Vec<RatVec>)> {
    check_cap(dim)?;
    let facets = symmetric_vertices(dim, pts).map_err(|e| match e {
        Error::Unbounded => Error::NotFullDimensional,
        other => other,
    })?;
    let verts = pts
        .iter()
        .filter(|p| rank_of_rows(&tight_rows(&facets, p), dim) == dim)
        .cloned()
        .collect();
    Ok((verts, facets))
}

/// Facet functionals of the symmetric hull of `vertices`.
pub fn v_to_h(dim: usize, vertices: &[RatVec]) -> Result<Vec<RatVec>> {
    check_dims(dim, vertices)?;
    if vertices.iter().any(|v| is_zero_vec(v)) {
        return Err(Error::ZeroVector);
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    check_cap(dim)?;
    let facets = symmetric_vertices(dim, vertices).map_err(|e| match e {
        Error::Unbounded => Error::NotFullDimensional,
        other => other,
    })?;
    Ok(canonicalize(facets))
}

/// Vertices of `{x : |φ(x)| <= 1}`.
pub fn h_to_v(dim: usize, functionals: &[RatVec]) -> Result<Vec<RatVec>> {
    check_dims(dim, functionals)?;
    if functionals.iter().any(|v| is_zero_vec(v)) {
        return Err(Error::ZeroVector);
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    check_cap(dim)?;
    Ok(canonicalize(symmetric_vertices(dim, functionals)?))
}

impl SymPolytope {
    /// The ball of the zero space.
    pub fn trivial() -> Self {
        SymPolytope(Arc::new(Inner {
            dim: 0,
            vertices: Vec::new(),
            functionals: Vec::new(),
        }))
    }

    /// Symmetric hull of `points` (signs implied).
    pub fn from_vertices(dim: usize, points: &[RatVec]) -> Result<Self> {
        if dim == 0 {
            check_dims(0, points)?;
            return Ok(Self::trivial());
        }
        check_dims(dim, points)?;
        let pts = dedupe_symmetric(
            points
                .iter()
                .filter(|p| !is_zero_vec(p))
                .cloned()
                .collect(),
        );
        if pts.is_empty() {
            return Err(Error::NotFullDimensional);
        }
        if rank_of_rows(&pts, dim) < dim {
            return Err(Error::NotFullDimensional);
        }
        let (verts, facets) = reduce_full(dim, &pts)?;
        Ok(Self::assemble(dim, verts, facets))
    }

    /// Body `{x : |φ(x)| <= 1}`; redundant functionals are dropped.
    pub fn from_functionals(dim: usize, functionals: &[RatVec]) -> Result<Self> {
        if dim == 0 {
            check_dims(0, functionals)?;
            return Ok(Self::trivial());
        }
        let verts = h_to_v(dim, functionals)?;
        let fs = dedupe_symmetric(functionals.to_vec());
        let facets: Vec<RatVec> = fs
            .into_iter()
            .filter(|f| rank_of_rows(&tight_rows(&verts, f), dim) == dim)
            .collect();
        Ok(Self::assemble(dim, verts, facets))
    }

    /// Rebuilds from stored representations, checking the pairing
    /// invariants (every vertex has norm one, every functional is attained)
    /// without re-running the conversion.
    pub fn from_parts(dim: usize, vertices: Vec<RatVec>, functionals: Vec<RatVec>) -> Result<Self> {
        check_dims(dim, &vertices)?;
        check_dims(dim, &functionals)?;
        if vertices.iter().chain(&functionals).any(|v| is_zero_vec(v)) {
            return Err(Error::ZeroVector);
        }
        if dim == 0 {
            return Ok(Self::trivial());
        }
        if rank_of_rows(&vertices, dim) < dim {
            return Err(Error::NotFullDimensional);
        }
        if rank_of_rows(&functionals, dim) < dim {
            return Err(Error::Unbounded);
        }
        let p = Self::assemble(dim, vertices, functionals);
        p.check_pairing()?;
        Ok(p)
    }

    fn assemble(dim: usize, vertices: Vec<RatVec>, functionals: Vec<RatVec>) -> Self {
        SymPolytope(Arc::new(Inner {
            dim,
            vertices: canonicalize(vertices),
            functionals: canonicalize(functionals),
        }))
    }

    fn check_pairing(&self) -> Result<()> {
        for v in self.vertices() {
            let g = self.gauge_unchecked(v);
            if !g.is_one() {
                return Err(Error::InvalidBall(format!(
                    "vertex has gauge {} instead of 1",
                    fmt_rat(&g)
                )));
            }
        }
        for f in self.functionals() {
            let m = self
                .vertices()
                .iter()
                .map(|v| dot(f, v).abs())
                .max()
                .unwrap_or_else(Rat::zero);
            if !m.is_one() {
                return Err(Error::InvalidBall(format!(
                    "functional attains {} instead of 1",
                    fmt_rat(&m)
                )));
            }
        }
        Ok(())
    }

    /// Re-derives both descriptions from the vertex list and compares.
    pub fn validate_full(&self) -> Result<()> {
        if self.dim() == 0 {
            return Ok(());
        }
        self.check_pairing()?;
        let again = Self::from_vertices(self.dim(), self.vertices())?;
        if &again != self {
            return Err(Error::InvalidBall(
                "stored representations do not describe the same body".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Vertex representatives, one per `±` pair.
    pub fn vertices(&self) -> &[RatVec] {
        &self.0.vertices
    }

    /// Facet functional representatives, one per `±` pair.
    pub fn functionals(&self) -> &[RatVec] {
        &self.0.functionals
    }

    /// Every vertex with both signs, in the order used by witness indices.
    pub fn signed_vertices(&self) -> impl Iterator<Item = (usize, bool, RatVec)> + '_ {
        self.0.vertices.iter().enumerate().flat_map(|(i, v)| {
            [(i, false, v.clone()), (i, true, neg(v))]
        })
    }

    fn gauge_unchecked(&self, x: &[Rat]) -> Rat {
        self.0
            .functionals
            .iter()
            .map(|f| dot(f, x).abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// Minkowski functional: `max |φ_i(x)|`.
    pub fn gauge(&self, x: &[Rat]) -> Result<Rat> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.gauge_unchecked(x))
    }

    /// Membership with either a convex-combination witness or a violated
    /// functional.
    pub fn member(&self, x: &[Rat]) -> Result<Membership> {
        let g = self.gauge(x)?;
        if g > Rat::one() {
            let f = self
                .functionals()
                .iter()
                .find(|f| dot(f, x).abs() == g)
                .expect("gauge attained by some functional");
            return Ok(Membership {
                inside: false,
                cert: MemberCert::Violated(f.clone()),
            });
        }
        let terms = self.combination_witness(x).ok_or_else(|| {
            Error::InvalidBall("gauge and vertex hull disagree on membership".into())
        })?;
        Ok(Membership {
            inside: true,
            cert: MemberCert::Combination(terms),
        })
    }

    /// Solves for nonnegative weights on signed vertices summing to one.
    pub fn combination_witness(&self, x: &[Rat]) -> Option<Vec<WitnessTerm>> {
        if self.dim() == 0 {
            return Some(Vec::new());
        }
        // Shortcut: x is itself a signed vertex.
        for (i, v) in self.vertices().iter().enumerate() {
            if v.as_slice() == x {
                return Some(vec![WitnessTerm { coef: Rat::one(), vertex: i, negated: false }]);
            }
            if neg(v).as_slice() == x {
                return Some(vec![WitnessTerm { coef: Rat::one(), vertex: i, negated: true }]);
            }
        }
        let signed: Vec<(usize, bool, RatVec)> = self.signed_vertices().collect();
        let n = signed.len();
        let mut lp = Lp::new(n);
        for c in 0..self.dim() {
            let row: RatVec = signed.iter().map(|(_, _, v)| v[c].clone()).collect();
            lp.add_eq(row, x[c].clone());
        }
        lp.add_eq(vec![Rat::one(); n], Rat::one());
        match lp.solve() {
            LpOutcome::Optimal { x: lam, .. } => Some(
                signed
                    .iter()
                    .zip(lam)
                    .filter(|(_, l)| !l.is_zero())
                    .map(|((i, negd, _), l)| WitnessTerm {
                        coef: l,
                        vertex: *i,
                        negated: *negd,
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Checks a convex-combination witness for `x` exactly.
    pub fn verify_witness(&self, x: &[Rat], terms: &[WitnessTerm]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let mut acc = vec![Rat::zero(); self.dim()];
        let mut mass = Rat::zero();
        for t in terms {
            if t.coef.is_negative() || t.vertex >= self.vertices().len() {
                return false;
            }
            let v = &self.vertices()[t.vertex];
            for (a, c) in acc.iter_mut().zip(v) {
                if t.negated {
                    *a -= &t.coef * c;
                } else {
                    *a += &t.coef * c;
                }
            }
            mass += &t.coef;
        }
        if self.dim() == 0 {
            return true;
        }
        mass.is_one() && acc.as_slice() == x
    }

    /// Containment `self ⊆ other` with per-vertex witnesses.
    pub fn subset(&self, other: &SymPolytope) -> Result<(bool, SubsetCert)> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: other.dim(),
                found: self.dim(),
            });
        }
        if let Some(v) = self
            .vertices()
            .iter()
            .find(|v| other.gauge_unchecked(v) > Rat::one())
        {
            return Ok((false, SubsetCert::Escapes(v.clone())));
        }
        let mut witnesses = Vec::with_capacity(self.vertices().len());
        for v in self.vertices() {
            let w = other.combination_witness(v).ok_or_else(|| {
                Error::InvalidBall("gauge and vertex hull disagree on membership".into())
            })?;
            witnesses.push(w);
        }
        Ok((true, SubsetCert::Contained(witnesses)))
    }

    /// Gauge-only containment test.
    pub fn is_subset(&self, other: &SymPolytope) -> bool {
        self.dim() == other.dim()
            && self
                .vertices()
                .iter()
                .all(|v| other.gauge_unchecked(v) <= Rat::one())
    }

    /// Polytope equality by double containment.
    pub fn same_body(&self, other: &SymPolytope) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// `conv{A·v}` for a full-row-rank `A`.
    pub fn linear_image(&self, a: &RatMat) -> Result<SymPolytope> {
        if a.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.cols(),
            });
        }
        if a.rows() == 0 {
            return Ok(Self::trivial());
        }
        if a.rank() < a.rows() {
            return Err(Error::RankDeficient);
        }
        check_cap(a.rows())?;
        let imgs: Vec<RatVec> = self
            .vertices()
            .iter()
            .map(|v| a.apply(v))
            .collect::<Result<_>>()?;
        Self::from_vertices(a.rows(), &imgs)
    }

    /// Image under an invertible change of coordinates; both descriptions
    /// are transported without recomputation.
    pub fn transform(&self, b: &RatMat) -> Result<SymPolytope> {
        if b.rows() != self.dim() || b.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.rows(),
            });
        }
        if self.dim() == 0 {
            return Ok(self.clone());
        }
        let inv = b.inverse().ok_or(Error::RankDeficient)?;
        let inv_t = inv.transpose();
        let verts = self
            .vertices()
            .iter()
            .map(|v| b.apply(v))
            .collect::<Result<Vec<_>>>()?;
        let funcs = self
            .functionals()
            .iter()
            .map(|f| inv_t.apply(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(self.dim(), verts, funcs))
    }

    /// Ball scaled by a positive factor.
    pub fn scaled(&self, s: &Rat) -> SymPolytope {
        let verts = self.vertices().iter().map(|v| super::rational::scale(v, s)).collect();
        let inv = Rat::one() / s;
        let funcs = self
            .functionals()
            .iter()
            .map(|f| super::rational::scale(f, &inv))
            .collect();
        Self::assemble(self.dim(), verts, funcs)
    }

    /// Cross-polytope (unit ball of ℓ1).
    pub fn cross(dim: usize) -> SymPolytope {
        if dim == 0 {
            return Self::trivial();
        }
        let verts = (0..dim).map(|i| super::rational::unit_vec(dim, i)).collect();
        let funcs = sign_patterns(dim);
        Self::assemble(dim, verts, funcs)
    }

    /// Cube (unit ball of ℓ∞).
    pub fn cube(dim: usize) -> SymPolytope {
        if dim == 0 {
            return Self::trivial();
        }
        let funcs = (0..dim).map(|i| super::rational::unit_vec(dim, i)).collect();
        let verts = sign_patterns(dim);
        Self::assemble(dim, verts, funcs)
    }
}

/// All `±1` vectors with first entry `+1`.
fn sign_patterns(dim: usize) -> Vec<RatVec> {
    (0..(1usize << (dim - 1)))
        .map(|mask| {
            (0..dim)
                .map(|i| {
                    if i > 0 && mask & (1 << (i - 1)) != 0 {
                        -Rat::one()
                    } else {
                        Rat::one()
                    }
                })
                .collect()
        })
        .collect()
}
