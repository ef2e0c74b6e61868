//! Dense two-phase simplex over any [`Scalar`].
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! basic variable among ratio ties), so a program always reproduces the same
//! outcome and cannot cycle in exact arithmetic.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("simplex iteration limit reached ({0} pivots)")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `optimize c·x  s.t.  A·x <= b,  lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub constraints: Vec<Vec<S>>,
    pub rhs: Vec<S>,
    pub lower: Vec<Option<S>>,
    pub upper: Vec<Option<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { value: S, point: Vec<S> },
    Infeasible,
    Unbounded,
}

impl<S> LpOutcome<S> {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<&S> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[S]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

const MAX_PIVOTS: usize = 200_000;

impl<S: Scalar> LinearProgram<S> {
    /// Maximization over free variables.
    pub fn maximize(objective: Vec<S>, constraints: Vec<Vec<S>>, rhs: Vec<S>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense: Sense::Maximize,
            objective,
            constraints,
            rhs,
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    pub fn minimize(objective: Vec<S>, constraints: Vec<Vec<S>>, rhs: Vec<S>) -> Self {
        LinearProgram { sense: Sense::Minimize, ..Self::maximize(objective, constraints, rhs) }
    }

    /// Pure feasibility problem (zero objective).
    pub fn feasibility(n_vars: usize, constraints: Vec<Vec<S>>, rhs: Vec<S>) -> Self {
        Self::maximize(vec![S::zero(); n_vars], constraints, rhs)
    }

    pub fn with_bounds(mut self, lower: Vec<Option<S>>, upper: Vec<Option<S>>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.constraints.len() != self.rhs.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                self.constraints.len(),
                self.rhs.len()
            )));
        }
        if let Some((i, row)) = self.constraints.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LpError::DimensionMismatch(format!("row {i} has {} coefficients, expected {n}", row.len())));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "bounds cover {}/{} variables, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        let finite = |v: &S| v.is_finite_value();
        if !self.objective.iter().all(finite) {
            return Err(LpError::NonFinite("objective"));
        }
        if !self.constraints.iter().flatten().all(finite) {
            return Err(LpError::NonFinite("constraints"));
        }
        if !self.rhs.iter().all(finite) {
            return Err(LpError::NonFinite("rhs"));
        }
        if !self.lower.iter().chain(&self.upper).flatten().all(finite) {
            return Err(LpError::NonFinite("bounds"));
        }
        Ok(())
    }
}

/// How an original variable is rebuilt from nonnegative tableau columns.
struct VarMap<S> {
    offset: S,
    columns: Vec<(usize, bool)>,
}

pub fn lp_solve<S: Scalar>(program: &LinearProgram<S>) -> Result<LpOutcome<S>, LpError> {
    program.validate()?;
    let n = program.n_vars();

    // Shift/split variables so every tableau column is nonnegative; finite
    // upper bounds on shifted variables become extra rows.
    let mut maps = Vec::with_capacity(n);
    let mut n_cols = 0usize;
    let mut extra_rows: Vec<(usize, S)> = Vec::new();
    for j in 0..n {
        match (&program.lower[j], &program.upper[j]) {
            (Some(l), Some(u)) => {
                if l.gt_tol(u) {
                    return Ok(LpOutcome::Infeasible);
                }
                extra_rows.push((n_cols, u.clone() - l.clone()));
                maps.push(VarMap { offset: l.clone(), columns: vec![(n_cols, true)] });
                n_cols += 1;
            }
            (Some(l), None) => {
                maps.push(VarMap { offset: l.clone(), columns: vec![(n_cols, true)] });
                n_cols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap { offset: u.clone(), columns: vec![(n_cols, false)] });
                n_cols += 1;
            }
            (None, None) => {
                maps.push(VarMap { offset: S::zero(), columns: vec![(n_cols, true), (n_cols + 1, false)] });
                n_cols += 2;
            }
        }
    }

    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    for (coeffs, b) in program.constraints.iter().zip(&program.rhs) {
        let mut row = vec![S::zero(); n_cols];
        let mut shifted = b.clone();
        for (j, a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            shifted = shifted - a.clone() * maps[j].offset.clone();
            for &(col, positive) in &maps[j].columns {
                row[col] = if positive { a.clone() } else { -a.clone() };
            }
        }
        rows.push(row);
        rhs.push(shifted);
    }
    for (col, cap) in extra_rows {
        let mut row = vec![S::zero(); n_cols];
        row[col] = S::one();
        rows.push(row);
        rhs.push(cap);
    }

    let mut cost = vec![S::zero(); n_cols];
    let sign = match program.sense {
        Sense::Maximize => S::one(),
        Sense::Minimize => -S::one(),
    };
    let mut constant = S::zero();
    for (j, c) in program.objective.iter().enumerate() {
        constant = constant + c.clone() * maps[j].offset.clone();
        for &(col, positive) in &maps[j].columns {
            let v = sign.clone() * c.clone();
            cost[col] = if positive { v } else { -v };
        }
    }

    let solution = match Tableau::build(rows, rhs, n_cols).solve(&cost)? {
        Phase::Infeasible => return Ok(LpOutcome::Infeasible),
        Phase::Unbounded => return Ok(LpOutcome::Unbounded),
        Phase::Optimal(y) => y,
    };

    let point: Vec<S> = maps
        .iter()
        .map(|m| {
            m.columns.iter().fold(m.offset.clone(), |acc, &(col, positive)| {
                if positive {
                    acc + solution[col].clone()
                } else {
                    acc - solution[col].clone()
                }
            })
        })
        .collect();
    let value = program.objective.iter().zip(&point).fold(S::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
    Ok(LpOutcome::Optimal { value, point })
}

enum Phase<S> {
    Optimal(Vec<S>),
    Infeasible,
    Unbounded,
}

/// Row-major tableau `[A | I_slack | I_art | rhs]` with an explicit basis.
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
    first_artificial: usize,
    pivots: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(a: Vec<Vec<S>>, b: Vec<S>, n_struct: usize) -> Self {
        let m = a.len();
        let negative: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
        let n_art = negative.iter().filter(|&&neg| neg).count();
        let first_artificial = n_struct + m;
        let n_total = first_artificial + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = first_artificial;
        for (i, (coeffs, rhs)) in a.into_iter().zip(b).enumerate() {
            let mut row = vec![S::zero(); n_total + 1];
            if negative[i] {
                for (j, c) in coeffs.into_iter().enumerate() {
                    row[j] = -c;
                }
                row[n_struct + i] = -S::one();
                row[next_art] = S::one();
                row[n_total] = -rhs;
                basis.push(next_art);
                next_art += 1;
            } else {
                for (j, c) in coeffs.into_iter().enumerate() {
                    row[j] = c;
                }
                row[n_struct + i] = S::one();
                row[n_total] = rhs;
                basis.push(n_struct + i);
            }
            rows.push(row);
        }
        Tableau { rows, basis, n_struct, n_total, first_artificial, pivots: 0 }
    }

    fn solve(mut self, cost: &[S]) -> Result<Phase<S>, LpError> {
        if self.n_total > self.first_artificial {
            let mut phase1 = vec![S::zero(); self.n_total];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = -S::one();
            }
            let allowed = self.n_total;
            let value = match self.optimize(&phase1, allowed)? {
                Some(v) => v,
                None => unreachable!("phase one is bounded"),
            };
            if value.lt_tol(&S::zero()) {
                return Ok(Phase::Infeasible);
            }
            self.evict_artificials();
        }
        let mut full_cost = cost.to_vec();
        full_cost.resize(self.n_total, S::zero());
        match self.optimize(&full_cost, self.first_artificial)? {
            None => Ok(Phase::Unbounded),
            Some(_) => {
                let mut y = vec![S::zero(); self.n_struct];
                for (i, &var) in self.basis.iter().enumerate() {
                    if var < self.n_struct {
                        y[var] = self.rows[i][self.n_total].clone();
                    }
                }
                Ok(Phase::Optimal(y))
            }
        }
    }

    /// Maximize `cost·x` over the current basis using columns `< allowed`.
    /// Returns `None` when unbounded.
    fn optimize(&mut self, cost: &[S], allowed: usize) -> Result<Option<S>, LpError> {
        loop {
            let reduced = self.reduced_costs(cost);
            let entering = (0..allowed).filter(|j| !self.basis.contains(j)).find(|&j| reduced[j] > S::opt_tol());
            let Some(col) = entering else {
                let value = self
                    .basis
                    .iter()
                    .zip(&self.rows)
                    .fold(S::zero(), |acc, (&var, row)| acc + cost[var].clone() * row[self.n_total].clone());
                return Ok(Some(value));
            };
            let mut leaving: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[col];
                if !a.gt_tol(&S::zero()) {
                    continue;
                }
                let ratio = row[self.n_total].clone() / a.clone();
                let better = match &leaving {
                    None => true,
                    Some((best_i, best)) => {
                        ratio.lt_tol(best) || (ratio.approx_eq(best) && self.basis[i] < self.basis[*best_i])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(None);
            };
            self.pivot(row, col)?;
        }
    }

    fn reduced_costs(&self, cost: &[S]) -> Vec<S> {
        let mut reduced: Vec<S> = cost[..self.n_total].to_vec();
        for (i, &var) in self.basis.iter().enumerate() {
            let cb = &cost[var];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in reduced.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *r = r.clone() - cb.clone() * a.clone();
                }
            }
        }
        reduced
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(LpError::IterationLimit(MAX_PIVOTS));
        }
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - factor.clone() * pv.clone();
                }
            }
            if !S::EXACT {
                r[col] = S::zero();
            }
        }
        self.basis[row] = col;
        Ok(())
    }

    /// After phase one, pivot zero-level artificials out of the basis; rows
    /// whose only support is artificial are linearly dependent and dropped.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .filter(|j| !self.basis.contains(j))
                    .find(|&j| !self.rows[i][j].near_zero());
                match col {
                    Some(j) => {
                        // Level is zero, so the pivot keeps primal feasibility.
                        let _ = self.pivot(i, j);
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
