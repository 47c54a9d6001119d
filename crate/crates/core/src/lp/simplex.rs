//! Dense two-phase tableau simplex over the rationals in column (standard)
//! form: minimize `c·u` subject to `A u = b`, `u ≥ 0`.
//!
//! Pivoting follows Bland's rule in both phases (smallest eligible entering
//! index, ratio ties broken by smallest basic variable index), so the method
//! terminates on degenerate inputs.

use num_traits::{One, Signed, Zero};

use crate::exact::{dot, zero_vec, RVector, Rational};

#[derive(Debug, Clone)]
pub struct StandardLp {
    /// Equality rows, each of length `n`.
    pub a: Vec<RVector>,
    pub b: RVector,
    /// Cost vector of length `n`; minimized.
    pub c: RVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StandardOutcome {
    /// `y` with `yᵀA ≤ 0` componentwise and `yᵀb > 0`.
    Infeasible { farkas: RVector },
    /// Basic optimal solution with the simplex multipliers `y`
    /// (`yᵀA_j ≤ c_j` for every column, `yᵀb = value`).
    Optimal { x: RVector, basis: Vec<usize>, duals: RVector, value: Rational },
    /// Feasible `x` and a direction `d ≥ 0` with `A d = 0`, `c·d < 0`.
    Unbounded { x: RVector, direction: RVector },
}

struct Tableau {
    /// k rows of length n + k + 1 (real columns, artificial columns, rhs).
    t: Vec<RVector>,
    basis: Vec<usize>,
    n: usize,
    k: usize,
    /// Row sign flips applied so the initial rhs is nonnegative.
    flip: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.t[r][self.n + self.k]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.t[row][col].recip();
        for x in self.t[row].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let prow = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].is_zero() {
                continue;
            }
            let f = line[col].clone();
            for (x, p) in line.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x = &*x - &f * p;
                }
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Simplex multipliers for the tableau system `[DA | I]` with column
    /// costs `cost` (length n + k): `y_i = Σ_r cost[basis[r]] · (B⁻¹)_{r,i}`,
    /// where `B⁻¹` sits under the artificial columns.
    fn multipliers(&self, cost: &[Rational]) -> RVector {
        let mut y = zero_vec(self.k);
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = &cost[bv];
            if cb.is_zero() {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                let v = &self.t[r][self.n + i];
                if !v.is_zero() {
                    *yi += cb * v;
                }
            }
        }
        y
    }

    /// Runs Bland-rule iterations minimizing `cost` over the columns allowed by
    /// `eligible`. Returns `Some(col)` if column `col` certifies
    /// unboundedness.
    fn optimize(&mut self, cost: &[Rational], eligible: impl Fn(usize) -> bool) -> Option<usize> {
        let width = self.n + self.k;
        loop {
            // Reduced costs from the current tableau: c_j - c_B · T_j.
            let mut entering = None;
            for j in 0..width {
                if !eligible(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (r, &bv) in self.basis.iter().enumerate() {
                    let tj = &self.t[r][j];
                    if !tj.is_zero() && !cost[bv].is_zero() {
                        rc -= &cost[bv] * tj;
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let col = entering?;
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.k {
                let a = &self.t[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                None => return Some(col),
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }

    fn basic_solution(&self) -> RVector {
        let mut x = zero_vec(self.n);
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.n {
                x[bv] = self.rhs(r).clone();
            }
        }
        x
    }

    fn unflip(&self, y: RVector) -> RVector {
        y.into_iter().zip(&self.flip).map(|(v, &f)| if f { -v } else { v }).collect()
    }
}

impl StandardLp {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn solve(&self) -> StandardOutcome {
        self.solve_counted().0
    }

    /// Solves and also reports the number of pivots performed.
    pub fn solve_counted(&self) -> (StandardOutcome, usize) {
        let n = self.c.len();
        let k = self.a.len();
        assert_eq!(self.b.len(), k, "rhs length must match row count");
        for row in &self.a {
            assert_eq!(row.len(), n, "constraint row width must match cost length");
        }
        let mut t = Vec::with_capacity(k);
        let mut flip = Vec::with_capacity(k);
        for (i, row) in self.a.iter().enumerate() {
            let f = self.b[i].is_negative();
            let mut line: RVector = Vec::with_capacity(n + k + 1);
            for v in row {
                line.push(if f { -v.clone() } else { v.clone() });
            }
            for j in 0..k {
                line.push(if i == j { Rational::one() } else { Rational::zero() });
            }
            line.push(if f { -self.b[i].clone() } else { self.b[i].clone() });
            t.push(line);
            flip.push(f);
        }
        let mut tab = Tableau { t, basis: (n..n + k).collect(), n, k, flip, pivots: 0 };

        // Phase 1: minimize the sum of artificials.
        let mut phase1 = zero_vec(n + k);
        for c in phase1.iter_mut().skip(n) {
            *c = Rational::one();
        }
        let unb = tab.optimize(&phase1, |_| true);
        debug_assert!(unb.is_none(), "phase 1 is bounded below by zero");
        let infeas: Rational = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bv)| bv >= n)
            .map(|(r, _)| tab.rhs(r).clone())
            .sum();
        if infeas.is_positive() {
            let y = tab.multipliers(&phase1);
            return (StandardOutcome::Infeasible { farkas: tab.unflip(y) }, tab.pivots);
        }

        // Drive zero-level artificials out of the basis where possible; rows
        // with no real nonzero are redundant and keep their artificial.
        for r in 0..k {
            if tab.basis[r] >= n {
                if let Some(j) = (0..n).find(|&j| !tab.t[r][j].is_zero()) {
                    tab.pivot(r, j);
                }
            }
        }

        // Phase 2 with artificials barred from entering.
        let mut cost = self.c.clone();
        cost.extend(std::iter::repeat_n(Rational::zero(), k));
        if let Some(col) = tab.optimize(&cost, |j| j < n) {
            let x = tab.basic_solution();
            let mut d = zero_vec(n);
            d[col] = Rational::one();
            for (r, &bv) in tab.basis.iter().enumerate() {
                if bv < n {
                    d[bv] = -tab.t[r][col].clone();
                }
            }
            return (StandardOutcome::Unbounded { x, direction: d }, tab.pivots);
        }
        let x = tab.basic_solution();
        let value = dot(&self.c, &x);
        let y = tab.unflip(tab.multipliers(&cost));
        let basis = tab.basis.clone();
        (StandardOutcome::Optimal { x, basis, duals: y, value }, tab.pivots)
    }
}
