//! Exact rational feasibility for systems `sum_j a_ij x_j >= b_i` over free
//! variables, answering either with a solution or with a Farkas witness.
//!
//! Phase-1 simplex on a dense tableau with Bland's least-index rule. Every
//! answer is re-checked against the input before it is returned.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::exact_arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: BTreeMap<usize, Rational>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub rows: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    /// One nonnegative multiplier per row.
    Infeasible(Vec<Rational>),
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, rows: Vec::new() }
    }

    /// Adds `sum coeffs >= rhs`. Zero coefficients are dropped.
    pub fn push_ge<I>(&mut self, coeffs: I, rhs: Rational)
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (var, c) in coeffs {
            assert!(var < self.num_vars, "variable {var} out of range");
            *map.entry(var).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        self.rows.push(Constraint { coeffs: map, rhs });
    }

    /// Adds `sum coeffs = rhs` as a pair of inequalities.
    pub fn push_eq<I>(&mut self, coeffs: I, rhs: Rational)
    where
        I: IntoIterator<Item = (usize, Rational)> + Clone,
    {
        self.push_ge(coeffs.clone(), rhs.clone());
        self.push_ge(coeffs.into_iter().map(|(v, c)| (v, -c)), -rhs);
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.rows.iter().all(|row| {
                let lhs: Rational = row.coeffs.iter().map(|(&v, c)| c * &x[v]).sum();
                lhs >= row.rhs
            })
    }

    /// Checks `lambda >= 0`, `lambda^T A = 0` and `lambda^T b > 0`.
    pub fn is_farkas_witness(&self, lambda: &[Rational]) -> bool {
        if lambda.len() != self.rows.len() || lambda.iter().any(Signed::is_negative) {
            return false;
        }
        let mut combo = vec![Rational::zero(); self.num_vars];
        let mut rhs = Rational::zero();
        for (row, l) in self.rows.iter().zip(lambda) {
            if l.is_zero() {
                continue;
            }
            for (&v, c) in &row.coeffs {
                combo[v] += c * l;
            }
            rhs += &row.rhs * l;
        }
        combo.iter().all(Zero::is_zero) && rhs.is_positive()
    }
}

struct Tableau {
    /// `rows[i]` has `cols` entries followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs followed by minus the objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let support: Vec<usize> = (0..=self.cols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rational>| {
            let factor = row[c].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &support {
                let t = &factor * &pivot_row[j];
                row[j] -= t;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[r] = c;
    }

    /// Runs Bland's rule to optimality (phase 1 is bounded below by zero).
    fn optimize(&mut self) {
        loop {
            let Some(enter) = (0..self.cols).find(|&j| self.cost[j].is_negative()) else {
                return;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (r, _) = leave.expect("phase-1 objective is bounded below");
            self.pivot(r, enter);
        }
    }
}

/// Decides feasibility of `sys`, returning a verified witness either way.
pub fn solve_feasibility(sys: &LinearSystem) -> LpOutcome {
    let n = sys.num_vars;
    let m = sys.rows.len();
    // Column layout: x+ (n), x- (n), surplus (m), artificial (m).
    let cols = 2 * n + 2 * m;
    let art = 2 * n + m;
    let mut signs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for (i, con) in sys.rows.iter().enumerate() {
        let d = if con.rhs.is_negative() { -Rational::one() } else { Rational::one() };
        let mut row = vec![Rational::zero(); cols + 1];
        for (&v, c) in &con.coeffs {
            row[v] = &d * c;
            row[n + v] = -(&d * c);
        }
        row[2 * n + i] = -d.clone();
        row[art + i] = Rational::one();
        row[cols] = &d * &con.rhs;
        signs.push(d);
        rows.push(row);
    }
    let mut cost = vec![Rational::zero(); cols + 1];
    for j in (0..art).chain(std::iter::once(cols)) {
        cost[j] = -rows.iter().map(|r| r[j].clone()).sum::<Rational>();
    }
    let mut t = Tableau {
        rows,
        cost,
        basis: (art..art + m).collect(),
        cols,
    };
    t.optimize();

    if t.cost[cols].is_zero() {
        let mut z = vec![Rational::zero(); cols];
        for (i, &b) in t.basis.iter().enumerate() {
            z[b] = t.rows[i][cols].clone();
        }
        let x: Vec<Rational> = (0..n).map(|j| &z[j] - &z[n + j]).collect();
        debug_assert!(sys.is_satisfied_by(&x));
        return LpOutcome::Feasible(x);
    }

    // Phase-1 duals: y_i = 1 - reduced cost of artificial i.
    let mut lambda: Vec<Rational> = (0..m)
        .map(|i| &signs[i] * (Rational::one() - &t.cost[art + i]))
        .collect();
    let max = lambda.iter().max().cloned().unwrap_or_else(Rational::zero);
    if max.is_positive() {
        for l in lambda.iter_mut() {
            *l = &*l / &max;
        }
    }
    debug_assert!(sys.is_farkas_witness(&lambda));
    LpOutcome::Infeasible(lambda)
}
