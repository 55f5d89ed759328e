//! Exact two-phase simplex over rationals (dense tableau). Pivots follow
//! Dantzig's rule and fall back to Bland's rule after a run of degenerate
//! pivots, which rules out cycling.

use num_traits::{One, Signed, Zero};

use super::rational::{Rat, RatVec};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rat, x: RatVec },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Rat, RatVec)> {
        match self {
            LpOutcome::Optimal { value, x } => Some((value, x)),
            _ => None,
        }
    }
}

/// Minimize `objective · x` subject to linear equalities and `≤` rows.
/// Variables are nonnegative unless marked free.
#[derive(Debug, Clone)]
pub struct Lp {
    num_vars: usize,
    objective: RatVec,
    rows: Vec<(RatVec, Rat, bool)>,
    free: Vec<bool>,
}

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Lp {
            num_vars,
            objective: vec![Rat::zero(); num_vars],
            rows: Vec::new(),
            free: vec![false; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn set_objective(&mut self, c: RatVec) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn add_eq(&mut self, a: RatVec, b: Rat) {
        assert_eq!(a.len(), self.num_vars);
        self.rows.push((a, b, true));
    }

    pub fn add_le(&mut self, a: RatVec, b: Rat) {
        assert_eq!(a.len(), self.num_vars);
        self.rows.push((a, b, false));
    }

    pub fn solve(&self) -> LpOutcome {
        // Column layout: one column per nonnegative variable, two per free
        // variable, then one slack per `≤` row.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.num_vars);
        let mut ncols = 0;
        for v in 0..self.num_vars {
            if self.free[v] {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let structural = ncols;
        let n_le = self.rows.iter().filter(|r| !r.2).count();
        ncols += n_le;

        let m = self.rows.len();
        let mut a = vec![vec![Rat::zero(); ncols]; m];
        let mut b = vec![Rat::zero(); m];
        let mut slack = structural;
        let mut start: Vec<Option<usize>> = Vec::with_capacity(m);
        for (i, (row, rhs, is_eq)) in self.rows.iter().enumerate() {
            for (v, coef) in row.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let (p, n) = col_of[v];
                a[i][p] = coef.clone();
                if let Some(n) = n {
                    a[i][n] = -coef;
                }
            }
            b[i] = rhs.clone();
            if !is_eq {
                a[i][slack] = Rat::one();
                start.push((!b[i].is_negative()).then_some(slack));
                slack += 1;
            } else {
                start.push(None);
            }
            if b[i].is_negative() {
                for x in a[i].iter_mut() {
                    *x = -&*x;
                }
                b[i] = -&b[i];
            }
        }

        let mut cost = vec![Rat::zero(); ncols];
        for (v, c) in self.objective.iter().enumerate() {
            let (p, n) = col_of[v];
            cost[p] = c.clone();
            if let Some(n) = n {
                cost[n] = -c;
            }
        }

        let mut tab = Tableau::phase_one(a, b, &start, ncols);
        if !tab.run() {
            // Phase one objective is bounded below by zero.
            unreachable!("phase one cannot be unbounded");
        }
        if !tab.objective_value().is_zero() {
            return LpOutcome::Infeasible;
        }
        tab.drive_out_artificials(ncols);
        tab.install_objective(&cost, ncols);
        if !tab.run() {
            return LpOutcome::Unbounded;
        }
        let sol = tab.solution(ncols);
        let x: RatVec = col_of
            .iter()
            .map(|&(p, n)| match n {
                Some(n) => &sol[p] - &sol[n],
                None => sol[p].clone(),
            })
            .collect();
        let value = super::rational::dot(&self.objective, &x);
        LpOutcome::Optimal { value, x }
    }
}

impl Lp {
    /// Optimal value of a problem with only `≤` rows, computed from its
    /// dual `max −b·μ` s.t. `−Aᵀμ = c` on free and `−Aᵀμ ≤ c` on
    /// nonnegative variables, `μ ≥ 0`. The dual has one row per variable,
    /// which is much smaller than the primal tableau when there are many
    /// constraints. `None` if the primal is infeasible or unbounded.
    pub fn optimal_value_via_dual(&self) -> Option<Rat> {
        assert!(self.rows.iter().all(|r| !r.2), "dual route needs inequality rows only");
        let m = self.rows.len();
        let mut dual = Lp::new(m);
        dual.set_objective(self.rows.iter().map(|r| r.1.clone()).collect());
        for j in 0..self.num_vars {
            let col: RatVec = self.rows.iter().map(|r| -&r.0[j]).collect();
            if self.free[j] {
                dual.add_eq(col, self.objective[j].clone());
            } else {
                dual.add_le(col, self.objective[j].clone());
            }
        }
        match dual.solve() {
            LpOutcome::Optimal { value, .. } => Some(-value),
            _ => None,
        }
    }
}

struct Tableau {
    /// Constraint rows, each of width `width + 1` (last entry is the rhs).
    rows: Vec<RatVec>,
    /// Reduced-cost row with the negated objective value in the last slot.
    z: RatVec,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    active: usize,
    width: usize,
}

impl Tableau {
    /// Rows with `Some(slack)` start with that slack basic; the others get
    /// an artificial column.
    fn phase_one(a: Vec<RatVec>, b: RatVec, start: &[Option<usize>], ncols: usize) -> Self {
        let n_art = start.iter().filter(|s| s.is_none()).count();
        let width = ncols + n_art;
        let mut rows = Vec::with_capacity(a.len());
        let mut basis = Vec::with_capacity(a.len());
        let mut z = vec![Rat::zero(); width + 1];
        let mut art = ncols;
        for ((mut row, rhs), s) in a.into_iter().zip(b).zip(start) {
            row.resize(width, Rat::zero());
            row.push(rhs);
            match s {
                Some(col) => basis.push(*col),
                None => {
                    row[art] = Rat::one();
                    basis.push(art);
                    art += 1;
                    // Reduced costs for minimizing the sum of artificials.
                    for j in 0..ncols {
                        z[j] -= &row[j];
                    }
                    z[width] -= &row[width];
                }
            }
            rows.push(row);
        }
        Tableau { rows, z, basis, active: width, width }
    }

    fn objective_value(&self) -> Rat {
        -&self.z[self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                *x /= &p;
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        if !self.z[c].is_zero() {
            let f = self.z[c].clone();
            for (x, y) in self.z.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations; returns false on unboundedness.
    fn run(&mut self) -> bool {
        const DEGENERATE_LIMIT: usize = 32;
        let mut degenerate = 0;
        loop {
            let enter = if degenerate < DEGENERATE_LIMIT {
                let mut best: Option<usize> = None;
                for j in 0..self.active {
                    if self.z[j].is_negative() && best.map_or(true, |b| self.z[j] < self.z[b]) {
                        best = Some(j);
                    }
                }
                best
            } else {
                (0..self.active).find(|&j| self.z[j].is_negative())
            };
            let Some(enter) = enter else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = &row[self.width] / &row[enter];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        degenerate += 1;
                    } else if degenerate < DEGENERATE_LIMIT {
                        degenerate = 0;
                    }
                    self.pivot(r, enter)
                }
                None => return false,
            }
        }
    }

    fn drive_out_artificials(&mut self, ncols: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= ncols {
                if let Some(c) = (0..ncols).find(|&c| !self.rows[i][c].is_zero()) {
                    self.pivot(i, c);
                    i += 1;
                } else {
                    // Redundant equality.
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
        self.active = ncols;
    }

    fn install_objective(&mut self, cost: &[Rat], ncols: usize) {
        let mut z = vec![Rat::zero(); self.width + 1];
        z[..ncols].clone_from_slice(&cost[..ncols]);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (x, y) in z.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= cb * y;
                }
            }
        }
        // Artificial columns are inactive; clear their costs.
        for x in z.iter_mut().take(self.width).skip(ncols) {
            *x = Rat::zero();
        }
        self.z = z;
    }

    fn solution(&self, ncols: usize) -> RatVec {
        let mut x = vec![Rat::zero(); ncols];
        for (i, &bcol) in self.basis.iter().enumerate() {
            if bcol < ncols {
                x[bcol] = self.rows[i][self.width].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::{int, rat};

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
        let mut lp = Lp::new(2);
        lp.set_objective(vec![int(-1), int(-1)]);
        lp.add_le(vec![int(1), int(2)], int(4));
        lp.add_le(vec![int(3), int(1)], int(6));
        let (v, x) = lp.solve().optimal().unwrap();
        assert_eq!(v, rat(-14, 5));
        assert_eq!(x, vec![rat(8, 5), rat(6, 5)]);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |z - 3| via s >= z - 3, s >= 3 - z with z free.
        let mut lp = Lp::new(2);
        lp.set_free(0);
        lp.set_objective(vec![int(0), int(1)]);
        lp.add_le(vec![int(1), int(-1)], int(3));
        lp.add_le(vec![int(-1), int(-1)], int(-3));
        let (v, x) = lp.solve().optimal().unwrap();
        assert_eq!(v, int(0));
        assert_eq!(x[0], int(3));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = Lp::new(1);
        lp.add_eq(vec![int(1)], int(-1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = Lp::new(1);
        lp.set_objective(vec![int(-1)]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn dual_value_matches_primal() {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = r.gen_range(1..=4);
            let mut lp = Lp::new(n + 1);
            for v in 0..n {
                lp.set_free(v);
            }
            let mut obj = vec![int(0); n + 1];
            obj[n] = int(1);
            lp.set_objective(obj);
            // min t  s.t.  |a_i·x − b_i| <= t
            for _ in 0..r.gen_range(1..=8) {
                let mut row: RatVec = (0..n).map(|_| rat(r.gen_range(-4..=4), r.gen_range(1..=3))).collect();
                let b = rat(r.gen_range(-6..=6), r.gen_range(1..=4));
                row.push(int(-1));
                lp.add_le(row.clone(), b.clone());
                let neg: RatVec = row[..n].iter().map(|c| -c).chain([int(-1)]).collect();
                lp.add_le(neg, -b);
            }
            let primal = lp.solve().optimal().map(|(v, _)| v);
            assert_eq!(primal, lp.optimal_value_via_dual());
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = Lp::new(2);
        lp.set_objective(vec![int(1), int(1)]);
        lp.add_eq(vec![int(1), int(1)], int(2));
        lp.add_eq(vec![int(2), int(2)], int(4));
        let (v, _) = lp.solve().optimal().unwrap();
        assert_eq!(v, int(2));
    }
}
