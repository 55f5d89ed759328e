//! Rational normed spaces in monotone basis position, the standard
//! gallery, and coefficient rationalization.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactgeom::rational::{fmt_rat, parse_rat, pow_int, round_toward_zero};
use crate::exactgeom::{Rat, RatMat, RatVec, SymPolytope};
use crate::maps::{check_eps_isometry, EpsIsometryCert, LinMap, ProjectionChain};

/// A rational space whose coordinate truncations all contract the ball.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MonotoneSpace {
    ball: SymPolytope,
}

impl fmt::Debug for MonotoneSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonotoneSpace({:?})", self.ball)
    }
}

/// First truncation index and vertex violating monotone position.
pub fn monotone_violation(ball: &SymPolytope) -> Option<(usize, RatVec)> {
    let n = ball.dim();
    for k in 0..n {
        for v in ball.vertices() {
            let mut t = v.clone();
            for x in t.iter_mut().skip(k) {
                *x = Rat::zero();
            }
            if ball.gauge(&t).expect("same dimension") > Rat::one() {
                return Some((k, v.clone()));
            }
        }
    }
    None
}

impl MonotoneSpace {
    /// Accepts `ball` if every truncation `P_k` maps it into itself.
    pub fn new(ball: SymPolytope) -> Result<Self> {
        if let Some((k, v)) = monotone_violation(&ball) {
            return Err(Error::NotMonotone {
                k,
                vertex: format!("({})", v.iter().map(fmt_rat).collect::<Vec<_>>().join(",")),
            });
        }
        Ok(MonotoneSpace { ball })
    }

    /// The zero space.
    pub fn trivial() -> Self {
        MonotoneSpace {
            ball: SymPolytope::trivial(),
        }
    }

    pub fn l1(n: usize) -> Self {
        MonotoneSpace {
            ball: SymPolytope::cross(n),
        }
    }

    pub fn linf(n: usize) -> Self {
        MonotoneSpace {
            ball: SymPolytope::cube(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn ball(&self) -> &SymPolytope {
        &self.ball
    }

    pub fn into_ball(self) -> SymPolytope {
        self.ball
    }

    pub fn norm(&self, x: &[Rat]) -> Result<Rat> {
        self.ball.gauge(x)
    }

    /// The coordinate truncations `P_0, …, P_dim`.
    pub fn truncation_chain(&self) -> ProjectionChain {
        ProjectionChain::truncations(self.dim(), 0)
    }

    /// The first `k` coordinates as a subspace.
    pub fn truncate(&self, k: usize) -> Result<MonotoneSpace> {
        let n = self.dim();
        if k > n {
            return Err(Error::IndexOutOfRange { index: k, max: n });
        }
        if k == n {
            return Ok(self.clone());
        }
        if k == 0 {
            return Ok(Self::trivial());
        }
        let restricted: Vec<RatVec> = self
            .ball
            .functionals()
            .iter()
            .map(|f| f[..k].to_vec())
            .filter(|f| f.iter().any(|x| !x.is_zero()))
            .collect();
        let ball = SymPolytope::from_functionals(k, &restricted)?;
        MonotoneSpace::new(ball)
    }

    /// Coordinate change: the ball becomes `B^{-1}·ball`, so that the map
    /// `B` from the new space to the old one is an isometry.
    pub fn rebased(ball: &SymPolytope, basis: &RatMat) -> Result<MonotoneSpace> {
        let inv = basis.inverse().ok_or(Error::RankDeficient)?;
        MonotoneSpace::new(ball.transform(&inv)?)
    }
}

/// Family of the standard gallery spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalleryFamily {
    L1,
    Linf,
    LpApprox,
}

/// Address of a gallery space, written `l1:3`, `linf:2` or
/// `lp:2:p=3/2:res=8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceGalleryId {
    pub family: GalleryFamily,
    pub n: usize,
    pub p: Option<Rat>,
    pub resolution: Option<u32>,
}

impl SpaceGalleryId {
    pub fn l1(n: usize) -> Self {
        SpaceGalleryId { family: GalleryFamily::L1, n, p: None, resolution: None }
    }

    pub fn linf(n: usize) -> Self {
        SpaceGalleryId { family: GalleryFamily::Linf, n, p: None, resolution: None }
    }

    pub fn lp(n: usize, p: Rat, resolution: u32) -> Self {
        SpaceGalleryId {
            family: GalleryFamily::LpApprox,
            n,
            p: Some(p),
            resolution: Some(resolution),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if self.family == GalleryFamily::LpApprox {
            let p = self
                .p
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("missing p".into()))?;
            if p <= &Rat::one() {
                return Err(Error::InvalidParameter("p must exceed 1".into()));
            }
            match self.resolution {
                Some(r) if r >= 4 => {}
                _ => return Err(Error::InvalidParameter("resolution must be at least 4".into())),
            }
        }
        Ok(())
    }
}

impl fmt::Display for SpaceGalleryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            GalleryFamily::L1 => write!(f, "l1:{}", self.n),
            GalleryFamily::Linf => write!(f, "linf:{}", self.n),
            GalleryFamily::LpApprox => write!(
                f,
                "lp:{}:p={}:res={}",
                self.n,
                self.p.as_ref().map(fmt_rat).unwrap_or_default(),
                self.resolution.unwrap_or_default()
            ),
        }
    }
}

impl FromStr for SpaceGalleryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognized gallery id {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let n: usize = parts.get(1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let id = match (parts[0], parts.len()) {
            ("l1", 2) => Self::l1(n),
            ("linf", 2) => Self::linf(n),
            ("lp", 4) => {
                let p = parts[2].strip_prefix("p=").ok_or_else(bad)?;
                let r = parts[3].strip_prefix("res=").ok_or_else(bad)?;
                Self::lp(n, parse_rat(p)?, r.parse().map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        id.validate()?;
        Ok(id)
    }
}

/// A gallery space together with its approximation error, `None` for the
/// exactly rational families.
#[derive(Debug, Clone)]
pub struct GallerySpace {
    pub space: MonotoneSpace,
    pub delta: Option<Rat>,
}

pub fn gallery(id: &SpaceGalleryId) -> Result<GallerySpace> {
    id.validate()?;
    match id.family {
        GalleryFamily::L1 => Ok(GallerySpace { space: MonotoneSpace::l1(id.n), delta: None }),
        GalleryFamily::Linf => Ok(GallerySpace { space: MonotoneSpace::linf(id.n), delta: None }),
        GalleryFamily::LpApprox => lp_approx(
            id.n,
            id.p.as_ref().expect("validated"),
            id.resolution.expect("validated"),
        ),
    }
}

/// Rational `u >= 0` with `u^b >= c^a`, i.e. an upper bound for `c^(a/b)`.
pub fn pow_upper(c: &Rat, a: u32, b: u32) -> Rat {
    let target = pow_int(&c.abs(), a);
    if b == 1 || target.is_zero() {
        return target;
    }
    let est = target.to_f64().unwrap_or(f64::MAX).powf(1.0 / b as f64);
    let scale = BigInt::from(1u64 << 40);
    let mut u = Rat::from_float(est * (1.0 + 1e-12)).unwrap_or_else(|| target.clone() + Rat::one());
    u = Rat::new((u * Rat::from_integer(scale.clone())).ceil().to_integer(), scale);
    let step = Rat::new(BigInt::one(), BigInt::from(1u64 << 30));
    while pow_int(&u, b) < target {
        u = &u + &u * &step + &step;
    }
    u
}

fn rat_exponent(p: &Rat) -> Result<(u32, u32)> {
    let a = p.numer().to_u32();
    let b = p.denom().to_u32();
    match (a, b) {
        (Some(a), Some(b)) if a <= 64 && b <= 64 => Ok((a, b)),
        _ => Err(Error::InvalidParameter("p must have numerator and denominator at most 64".into())),
    }
}

/// Upper bound for `‖x‖_p`.
fn lp_norm_upper(x: &[Rat], p: &Rat) -> Result<Rat> {
    let (a, b) = rat_exponent(p)?;
    let sum: Rat = x.iter().map(|c| pow_upper(c, a, b)).fold(Rat::zero(), |s, t| s + t);
    // (sum)^(1/p) = sum^(b/a)
    Ok(pow_upper(&sum, b, a))
}

/// Polyhedral ball `B` with `B_p ⊆ B ⊆ (1+δ)·B_p`: supporting functionals
/// of the ℓp ball at primitive grid directions, rounded toward zero to
/// denominator `res²`, then closed under coordinate truncation.
fn lp_approx(n: usize, p: &Rat, res: u32) -> Result<GallerySpace> {
    let q = p / (p - Rat::one());
    let (qa, qb) = rat_exponent(&q)?;
    let pf = p.to_f64().expect("small rational");
    let r = res as i64;
    let den = u64::from(res) * u64::from(res);

    let mut functionals: Vec<RatVec> = Vec::new();
    for d in grid_directions(n, r) {
        let norm: f64 = d.iter().map(|&x| (x.abs() as f64).powf(pf)).sum::<f64>().powf(1.0 / pf);
        let ideal: Vec<f64> = d
            .iter()
            .map(|&x| (x.signum() as f64) * ((x.abs() as f64) / norm).powf(pf - 1.0))
            .collect();
        let mut shrink = 1.0;
        let phi = loop {
            let cand: RatVec = ideal
                .iter()
                .map(|&x| {
                    let r = Rat::from_float(x * shrink).unwrap_or_else(Rat::zero);
                    round_toward_zero(&r, den)
                })
                .collect();
            let qnorm: Rat = cand.iter().map(|c| pow_upper(c, qa, qb)).fold(Rat::zero(), |s, t| s + t);
            if qnorm <= Rat::one() {
                break cand;
            }
            shrink *= 1.0 - 1.0 / den as f64;
        };
        if phi.iter().any(|x| !x.is_zero()) {
            functionals.push(phi);
        }
    }
    let ball = SymPolytope::from_functionals(n, &functionals)?;
    // Close under truncations so the result is in monotone position.
    let mut pts: Vec<RatVec> = Vec::new();
    for v in ball.vertices() {
        for k in 1..=n {
            let mut t = v.clone();
            for x in t.iter_mut().skip(k) {
                *x = Rat::zero();
            }
            pts.push(t);
        }
    }
    let ball = SymPolytope::from_vertices(n, &pts)?;
    let mut worst = Rat::zero();
    for v in ball.vertices() {
        let u = lp_norm_upper(v, p)?;
        if u > worst {
            worst = u;
        }
    }
    let delta = if worst > Rat::one() { worst - Rat::one() } else { Rat::zero() };
    Ok(GallerySpace {
        space: MonotoneSpace::new(ball)?,
        delta: Some(delta),
    })
}

/// Primitive integer vectors in `[-r, r]^n` with first nonzero entry positive.
fn grid_directions(n: usize, r: i64) -> Vec<Vec<i64>> {
    use num_integer::Integer;
    let side = (2 * r + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut d = Vec::with_capacity(n);
        for _ in 0..n {
            d.push((c % side) as i64 - r);
            c /= side;
        }
        let Some(first) = d.iter().find(|&&x| x != 0) else { continue };
        if *first < 0 {
            continue;
        }
        let g = d.iter().fold(0i64, |g, &x| g.gcd(&x));
        if g == 1 {
            out.push(d);
        }
    }
    out
}

/// Space with small-denominator functionals, plus the identity
/// ε-isometry certificate from the input to it.
pub fn rationalize_space(x: &MonotoneSpace, denom_bound: u64) -> Result<(MonotoneSpace, EpsIsometryCert)> {
    if denom_bound == 0 {
        return Err(Error::BoundTooSmall("bound must be positive".into()));
    }
    if x.dim() == 0 {
        let id = LinMap::identity(x.ball());
        return Ok((x.clone(), check_eps_isometry(&id, &Rat::zero())?));
    }
    let shrink = Rat::one() - Rat::new(BigInt::one(), BigInt::from(2 * denom_bound));
    let mut functionals = Vec::new();
    for f in x.ball().functionals() {
        let mut s = Rat::one();
        let mut found = None;
        for _ in 0..64 {
            let cand: RatVec = f.iter().map(|c| round_toward_zero(&(c * &s), denom_bound)).collect();
            let fits = cand.iter().any(|c| !c.is_zero())
                && x.ball()
                    .vertices()
                    .iter()
                    .all(|v| crate::exactgeom::rational::dot(&cand, v).abs() <= Rat::one());
            if fits {
                found = Some(cand);
                break;
            }
            s = &s * &shrink;
        }
        functionals.push(found.ok_or_else(|| {
            Error::BoundTooSmall("a functional cannot be rounded inside the dual ball".into())
        })?);
    }
    let ball = SymPolytope::from_functionals(x.dim(), &functionals).map_err(|e| match e {
        Error::Unbounded => Error::BoundTooSmall("rounded functionals do not bound the body".into()),
        other => other,
    })?;
    let rounded = MonotoneSpace::new(ball)
        .map_err(|_| Error::BoundTooSmall("monotone position lost at this bound".into()))?;
    let mut eps = Rat::zero();
    for w in rounded.ball().vertices() {
        let g = x.norm(w)? - Rat::one();
        if g > eps {
            eps = g;
        }
    }
    let id = LinMap::new(x.ball().clone(), rounded.ball().clone(), RatMat::identity(x.dim()))?;
    let cert = check_eps_isometry(&id, &eps)?;
    Ok((rounded, cert))
}
