//! Double description vertex enumeration for symmetric polytopes
//! `{x : |<a_i, x>| <= 1}`, run on the homogenized cone in exact integers.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{clear_denominators, pivot_rows, Rat, RatVec};
use crate::error::{Error, Result};

type IVec = Vec<BigInt>;

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

fn primitive(mut v: IVec) -> IVec {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

struct Ray {
    v: IVec,
    zero: FixedBitSet,
}

/// Vertices of `{x : |<a, x>| <= 1 for a in constraints}`, one per `±` pair
/// (unsorted). Fails with `Unbounded` if the constraints do not span.
pub fn symmetric_vertices(dim: usize, constraints: &[RatVec]) -> Result<Vec<RatVec>> {
    if dim == 0 {
        return Ok(Vec::new());
    }
    for c in constraints {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
    }
    let basis = pivot_rows(constraints, dim);
    if basis.len() < dim {
        return Err(Error::Unbounded);
    }

    // Homogenized rows h·(t, x) >= 0: t >= 0, t - a·x >= 0, t + a·x >= 0.
    let big_d = dim + 1;
    let mut rows: Vec<IVec> = Vec::with_capacity(2 * constraints.len() + 1);
    let mut t_row = vec![BigInt::zero(); big_d];
    t_row[0] = BigInt::one();
    rows.push(t_row);
    for c in constraints {
        let mut ext = Vec::with_capacity(big_d);
        ext.push(Rat::one());
        ext.extend(c.iter().map(|x| -x));
        let neg_row = clear_denominators(&ext);
        let pos_row: IVec = neg_row
            .iter()
            .enumerate()
            .map(|(i, x)| if i == 0 { x.clone() } else { -x })
            .collect();
        rows.push(neg_row);
        rows.push(pos_row);
    }
    let nrows = rows.len();

    // Initial simplicial cone from t >= 0 and `t - a_i·x >= 0` for a basis.
    let init: Vec<usize> = std::iter::once(0)
        .chain(basis.iter().map(|&i| 1 + 2 * i))
        .collect();
    let h0: Vec<RatVec> = init
        .iter()
        .map(|&r| rows[r].iter().map(|x| Rat::from_integer(x.clone())).collect())
        .collect();
    let h0 = super::rational::RatMat::from_row_vecs(big_d, &h0)?;
    let inv = h0.inverse().ok_or(Error::Unbounded)?;

    let mut processed = FixedBitSet::with_capacity(nrows);
    for &r in &init {
        processed.insert(r);
    }
    let mut rays: Vec<Ray> = (0..big_d)
        .map(|k| {
            let col = inv.column(k);
            let v = primitive(clear_denominators(&col));
            let mut zero = FixedBitSet::with_capacity(nrows);
            for (pos, &r) in init.iter().enumerate() {
                if pos != k {
                    zero.insert(r);
                }
            }
            Ray { v, zero }
        })
        .collect();

    for r in 0..nrows {
        if processed.contains(r) {
            continue;
        }
        add_row(&mut rays, &rows[r], r, big_d);
        processed.insert(r);
    }

    let mut out = Vec::new();
    for ray in rays {
        if !ray.v[0].is_positive() {
            return Err(Error::Unbounded);
        }
        let t = Rat::from_integer(ray.v[0].clone());
        let x: RatVec = ray.v[1..]
            .iter()
            .map(|c| Rat::from_integer(c.clone()) / &t)
            .collect();
        out.push(x);
    }
    Ok(dedupe_symmetric(out))
}

fn add_row(rays: &mut Vec<Ray>, h: &[BigInt], row_id: usize, big_d: usize) {
    let vals: Vec<BigInt> = rays.iter().map(|r| idot(h, &r.v)).collect();
    if vals.iter().all(|v| !v.is_negative()) {
        for (ray, v) in rays.iter_mut().zip(&vals) {
            if v.is_zero() {
                ray.zero.insert(row_id);
            }
        }
        return;
    }
    let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
    let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();

    let mut fresh: Vec<Ray> = Vec::new();
    let mut common = FixedBitSet::with_capacity(rays[0].zero.len());
    for &p in &pos {
        for &n in &neg {
            common.clone_from(&rays[p].zero);
            common.intersect_with(&rays[n].zero);
            if common.count_ones(..) + 2 < big_d {
                continue;
            }
            let blocked = rays
                .iter()
                .enumerate()
                .any(|(k, r)| k != p && k != n && common.is_subset(&r.zero));
            if blocked {
                continue;
            }
            let a = &vals[p];
            let b = &vals[n];
            let v: IVec = rays[n]
                .v
                .iter()
                .zip(&rays[p].v)
                .map(|(xn, xp)| a * xn - b * xp)
                .collect();
            let mut zero = common.clone();
            zero.insert(row_id);
            fresh.push(Ray {
                v: primitive(v),
                zero,
            });
        }
    }

    let old = std::mem::take(rays);
    for (ray, v) in old.into_iter().zip(&vals) {
        if v.is_negative() {
            continue;
        }
        let mut ray = ray;
        if v.is_zero() {
            ray.zero.insert(row_id);
        }
        rays.push(ray);
    }
    rays.extend(fresh);
}

/// Keeps one representative per `±` pair and drops exact duplicates.
pub fn dedupe_symmetric(points: Vec<RatVec>) -> Vec<RatVec> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for p in points {
        let key = super::rational::sign_normalize(p);
        if seen.insert(key.clone()) {
            out.push(key);
        }
    }
    out
}
