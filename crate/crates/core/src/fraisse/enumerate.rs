//! Budgeted enumeration of rational monotone spaces and of the arrows of
//! the rational category out of a given space.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exactgeom::rational::{canonical_cmp, neg, pivot_rows, sign_normalize};
use crate::exactgeom::{Rat, RatMat, RatVec, SymPolytope};
use crate::maps::{check_isometry, IsometryCert, LinMap};
use crate::spaces::MonotoneSpace;

/// Limits of one enumeration: dimension, size and denominator of the
/// generating vertex coordinates, and the number of generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_dim: usize,
    pub max_denominator: u64,
    pub max_generators: usize,
}

impl Budget {
    pub fn new(max_dim: usize, max_denominator: u64, max_generators: usize) -> Result<Self> {
        if max_dim == 0 || max_denominator == 0 || max_generators == 0 {
            return Err(Error::InvalidParameter("budget components must be at least 1".into()));
        }
        Ok(Budget { max_dim, max_denominator, max_generators })
    }

    /// Rationals `a/b` with `1 <= b <= D` and `|a/b| <= D`, ascending.
    pub fn grid(&self) -> Vec<Rat> {
        let d = self.max_denominator as i64;
        let mut vals: Vec<Rat> = Vec::new();
        for b in 1..=d {
            for a in -(d * b)..=(d * b) {
                vals.push(Rat::new(BigInt::from(a), BigInt::from(b)));
            }
        }
        vals.sort();
        vals.dedup();
        vals
    }

    pub fn in_grid(&self, x: &Rat) -> bool {
        let d = BigInt::from(self.max_denominator);
        x.denom() <= &d && x.abs() <= Rat::from_integer(d)
    }
}

fn bits(x: &BigInt) -> u64 {
    x.bits().max(1)
}

/// Total bit length of the canonical vertex and functional data.
pub fn bit_size(ball: &SymPolytope) -> u64 {
    ball.vertices()
        .iter()
        .chain(ball.functionals())
        .flatten()
        .map(|c| bits(c.numer()) + bits(c.denom()))
        .sum()
}

fn cmp_lists(a: &[RatVec], b: &[RatVec]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match canonical_cmp(x, y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Enumeration order: dimension, bit size, then lexicographic data.
pub fn object_order(a: &MonotoneSpace, b: &MonotoneSpace) -> Ordering {
    a.dim()
        .cmp(&b.dim())
        .then_with(|| bit_size(a.ball()).cmp(&bit_size(b.ball())))
        .then_with(|| cmp_lists(a.ball().vertices(), b.ball().vertices()))
        .then_with(|| cmp_lists(a.ball().functionals(), b.ball().functionals()))
}

/// Nonzero grid vectors of length `dim`, one per `±` pair.
fn grid_vectors(grid: &[Rat], dim: usize) -> Vec<RatVec> {
    let mut out: Vec<RatVec> = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * grid.len());
        for v in &out {
            for g in grid {
                let mut w = v.clone();
                w.push(g.clone());
                next.push(w);
            }
        }
        out = next;
    }
    let mut seen = HashSet::new();
    let mut res = Vec::new();
    for v in out {
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let v = sign_normalize(v);
        if seen.insert(v.clone()) {
            res.push(v);
        }
    }
    res.sort_by(|a, b| canonical_cmp(a, b));
    res
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every monotone space spanned by at most `max_generators` grid vectors,
/// led by the trivial space. Exact duplicates are dropped; isometric
/// copies are kept.
pub fn enumerate_objects(budget: &Budget) -> Vec<MonotoneSpace> {
    let grid = budget.grid();
    let mut out = vec![MonotoneSpace::trivial()];
    for dim in 1..=budget.max_dim {
        let vecs = grid_vectors(&grid, dim);
        let mut found: HashSet<SymPolytope> = HashSet::new();
        for size in dim..=budget.max_generators {
            combinations(vecs.len(), size, |idx| {
                let gens: Vec<RatVec> = idx.iter().map(|&i| vecs[i].clone()).collect();
                if let Ok(ball) = SymPolytope::from_vertices(dim, &gens) {
                    if !found.contains(&ball) {
                        if let Ok(space) = MonotoneSpace::new(ball.clone()) {
                            found.insert(ball);
                            out.push(space);
                        }
                    }
                }
            });
        }
    }
    out.sort_by(object_order);
    out
}

/// An arrow out of a space into an enumerated object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedArrow {
    pub object: usize,
    pub map: LinMap,
    pub cert: IsometryCert,
}

/// Linear bijections `A: X → truncate(Z, dim X)` carrying the vertex set
/// onto the vertex set, with entries in the budget grid.
fn head_isometries(x: &SymPolytope, zn: &SymPolytope, budget: &Budget) -> Vec<RatMat> {
    let n = x.dim();
    if x.vertices().len() != zn.vertices().len() {
        return Vec::new();
    }
    let basis_idx = pivot_rows(x.vertices(), n);
    let basis: Vec<RatVec> = basis_idx.iter().map(|&i| x.vertices()[i].clone()).collect();
    let Some(binv) = RatMat::from_columns(n, &basis).ok().and_then(|b| b.inverse()) else {
        return Vec::new();
    };
    let signed: Vec<RatVec> = zn
        .vertices()
        .iter()
        .flat_map(|v| [v.clone(), neg(v)])
        .collect();
    let targets: HashSet<RatVec> = zn.vertices().iter().cloned().collect();
    let mut out: Vec<RatMat> = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        let cols: Vec<RatVec> = choice.iter().map(|&c| signed[c].clone()).collect();
        let a = RatMat::from_columns(n, &cols).expect("shape").mul(&binv).expect("shape");
        let ok = a.entries().iter().all(|e| budget.in_grid(e))
            && a.rank() == n
            && x.vertices().iter().all(|v| {
                let w = sign_normalize(a.apply(v).expect("shape"));
                targets.contains(&w)
            });
        if ok && !out.contains(&a) {
            out.push(a);
        }
        // Next choice in odometer order.
        let mut i = 0;
        loop {
            if i == n {
                out.sort_by(|p, q| cmp_lists(&p.row_vecs(), &q.row_vecs()));
                return out;
            }
            choice[i] += 1;
            if choice[i] < signed.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Isometric embeddings of `x` onto initial coordinate segments of the
/// enumerated objects, each with its isometry certificate.
pub fn enumerate_arrows(x: &MonotoneSpace, objects: &[MonotoneSpace], budget: &Budget) -> Vec<EnumeratedArrow> {
    let n = x.dim();
    let mut out = Vec::new();
    for (idx, z) in objects.iter().enumerate() {
        if z.dim() < n {
            continue;
        }
        let heads = if n == 0 {
            vec![RatMat::zeros(0, 0)]
        } else {
            let Ok(zn) = z.truncate(n) else { continue };
            head_isometries(x.ball(), zn.ball(), budget)
        };
        for a in heads {
            let mut m = RatMat::zeros(z.dim(), n);
            for r in 0..n {
                for c in 0..n {
                    m.set(r, c, a.get(r, c).clone());
                }
            }
            let map = LinMap::new(x.ball().clone(), z.ball().clone(), m).expect("shape");
            if let Ok(cert) = check_isometry(&map) {
                out.push(EnumeratedArrow { object: idx, map, cert });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::{int, rat};

    #[test]
    fn one_dimensional_budget() {
        let b = Budget::new(1, 2, 1).unwrap();
        let objs = enumerate_objects(&b);
        assert_eq!(objs[0].dim(), 0);
        let radii: Vec<Rat> = objs[1..].iter().map(|s| s.ball().vertices()[0][0].clone()).collect();
        let mut sorted = radii.clone();
        sorted.sort();
        assert_eq!(sorted, vec![rat(1, 2), int(1), rat(3, 2), int(2)]);
    }

    #[test]
    fn two_dimensional_budget_contains_l1_linf() {
        let objs = enumerate_objects(&Budget::new(2, 1, 2).unwrap());
        assert!(objs.contains(&MonotoneSpace::l1(2)));
        assert!(objs.contains(&MonotoneSpace::linf(2)));
        for w in objs.windows(2) {
            assert_ne!(object_order(&w[0], &w[1]), Ordering::Greater);
        }
    }

    #[test]
    fn arrows_out_of_trivial_and_line() {
        let b = Budget::new(2, 1, 2).unwrap();
        let objs = enumerate_objects(&b);
        let from_zero = enumerate_arrows(&MonotoneSpace::trivial(), &objs, &b);
        assert_eq!(from_zero.len(), objs.len());
        let line = MonotoneSpace::l1(1);
        let arrows = enumerate_arrows(&line, &objs, &b);
        let l12 = objs.iter().position(|o| o == &MonotoneSpace::l1(2)).unwrap();
        assert!(arrows
            .iter()
            .any(|a| a.object == l12 && a.map.matrix() == &RatMat::inclusion(2, 1)));
    }
}
