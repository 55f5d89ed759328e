//! Random instance generators shared by the integration suites.
//!
//! Every generated coordinate has denominator at most 8 and absolute value
//! at most 1. A hull of a point set closed under the coordinate truncations
//! is automatically monotone, which is how spaces are produced here.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use polyban_core::exactgeom::rational::is_zero_vec;
use polyban_core::maps::{check_eps_isometry, op_norm};
use polyban_core::{LinMap, MonotoneSpace, Rat, RatMat, RatVec, SymPolytope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DEN: i64 = 8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `1 <= q <= 8` and `|p/q| <= 1`.
pub fn small_rat(r: &mut ChaCha8Rng) -> Rat {
    let q = r.gen_range(1..=MAX_DEN);
    let p = r.gen_range(-q..=q);
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// `p/q` with `1 <= q <= 8` and `|p/q| <= bound`.
pub fn rat_in(r: &mut ChaCha8Rng, bound: i64) -> Rat {
    let q = r.gen_range(1..=MAX_DEN);
    let p = r.gen_range(-bound * q..=bound * q);
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn small_vec(r: &mut ChaCha8Rng, dim: usize) -> RatVec {
    (0..dim).map(|_| small_rat(r)).collect()
}

pub fn nonzero_vec(r: &mut ChaCha8Rng, dim: usize) -> RatVec {
    loop {
        let v = small_vec(r, dim);
        if !is_zero_vec(&v) {
            return v;
        }
    }
}

fn truncated(v: &[Rat], k: usize) -> RatVec {
    v.iter().enumerate().map(|(i, x)| if i < k { x.clone() } else { Rat::zero() }).collect()
}

fn close_under_truncation(points: &[RatVec], from: usize) -> Vec<RatVec> {
    let mut out = Vec::new();
    for p in points {
        for k in from.max(1)..=p.len() {
            let t = truncated(p, k);
            if !is_zero_vec(&t) {
                out.push(t);
            }
        }
    }
    out
}

/// A random monotone space of dimension `dim`.
pub fn monotone_space(r: &mut ChaCha8Rng, dim: usize) -> MonotoneSpace {
    if dim == 0 {
        return MonotoneSpace::trivial();
    }
    loop {
        let n = r.gen_range(dim..=dim + 3);
        let pts: Vec<RatVec> = (0..n).map(|_| nonzero_vec(r, dim)).collect();
        let closed = close_under_truncation(&pts, 1);
        if let Ok(ball) = SymPolytope::from_vertices(dim, &closed) {
            return MonotoneSpace::new(ball).expect("truncation-closed hulls are monotone");
        }
    }
}

/// A random monotone space `Y` of dimension `dim` with `truncate(Y, dim Z) = Z`.
pub fn extension(r: &mut ChaCha8Rng, z: &MonotoneSpace, dim: usize) -> MonotoneSpace {
    let n = z.dim();
    assert!(dim >= n);
    if dim == n {
        return z.clone();
    }
    let pad = |v: &RatVec| -> RatVec {
        let mut w = v.clone();
        w.resize(dim, Rat::zero());
        w
    };
    loop {
        let mut pts: Vec<RatVec> = z.ball().vertices().iter().map(pad).collect();
        for _ in 0..r.gen_range(dim - n..=dim - n + 3) {
            let mut head = small_vec(r, n);
            if n > 0 && z.ball().gauge(&head).unwrap() > Rat::one() {
                head = (0..n).map(|_| Rat::zero()).collect();
                for _ in 0..8 {
                    let h = small_vec(r, n);
                    if z.ball().gauge(&h).unwrap() <= Rat::one() {
                        head = h;
                        break;
                    }
                }
            }
            let tail = nonzero_vec(r, dim - n);
            let mut w = head;
            w.extend(tail);
            pts.push(w);
        }
        let closed = close_under_truncation(&pts, n + 1);
        let mut all: Vec<RatVec> = z.ball().vertices().iter().map(pad).collect();
        all.extend(closed);
        let Ok(ball) = SymPolytope::from_vertices(dim, &all) else { continue };
        let y = MonotoneSpace::new(ball).expect("truncation-closed hulls are monotone");
        assert_eq!(y.truncate(n).unwrap(), *z, "extension keeps the common segment");
        return y;
    }
}

/// `(N, X, Y)` with `truncate(X, N) = truncate(Y, N)` and dims at most `max_dim`.
pub fn amalgam_triple(r: &mut ChaCha8Rng, max_dim: usize) -> (usize, MonotoneSpace, MonotoneSpace) {
    let m = r.gen_range(0..=max_dim);
    let k = r.gen_range(0..=max_dim);
    let n = r.gen_range(0..=m.min(k));
    let z = monotone_space(r, n);
    let x = extension(r, &z, m);
    let y = extension(r, &z, k);
    (n, x, y)
}

/// A random ε-isometry `f = [A; 0]: X → Y` with `A` invertible, found by
/// perturbing a scaled identity until the exact check accepts it.
pub fn eps_isometry(r: &mut ChaCha8Rng, max_dim: usize, eps: &Rat) -> LinMap {
    loop {
        let m = r.gen_range(1..=max_dim);
        let k = r.gen_range(m..=max_dim);
        let x = monotone_space(r, m);
        let y = extension(r, &x, k);
        let mut a = RatMat::identity(m);
        for i in 0..m {
            for j in 0..m {
                let e = Rat::new(BigInt::from(r.gen_range(-1..=1)), BigInt::from(r.gen_range(8..=16)));
                a.set(i, j, a.get(i, j) + e);
            }
        }
        if a.inverse().is_none() {
            continue;
        }
        let mut mat = RatMat::zeros(k, m);
        for i in 0..m {
            for j in 0..m {
                mat.set(i, j, a.get(i, j).clone());
            }
        }
        let f = LinMap::new(x.ball().clone(), y.ball().clone(), mat).unwrap();
        let norm = op_norm(&f);
        if norm.is_zero() {
            continue;
        }
        let f = f.with_matrix(f.matrix().scaled(&(Rat::one() / norm))).unwrap();
        if check_eps_isometry(&f, eps).is_ok() {
            return f;
        }
    }
}

/// A uniformly scaled random contraction `dom → cod` with norm exactly one
/// (or the zero map when the random matrix vanishes).
pub fn contraction(r: &mut ChaCha8Rng, dom: &SymPolytope, cod: &SymPolytope) -> LinMap {
    let mut m = RatMat::zeros(cod.dim(), dom.dim());
    for i in 0..cod.dim() {
        for j in 0..dom.dim() {
            m.set(i, j, small_rat(r));
        }
    }
    let t = LinMap::new(dom.clone(), cod.clone(), m).unwrap();
    let n = op_norm(&t);
    if n.is_zero() {
        return t;
    }
    t.with_matrix(t.matrix().scaled(&(Rat::one() / n))).unwrap()
}

/// A random rational point of the given dimension with entries in `[-2, 2]`.
pub fn point(r: &mut ChaCha8Rng, dim: usize) -> RatVec {
    (0..dim).map(|_| rat_in(r, 2)).collect()
}
