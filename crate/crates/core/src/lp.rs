//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems are in equality form `A x = b`, `0 <= x <= u` (with `u` possibly
//! infinite). Finite upper bounds become extra rows with slack columns inside
//! the solver; the caller's row count is unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used throughout the audit LPs.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// `None` means unbounded above.
    pub upper: Vec<Option<f64>>,
    pub sense: Sense,
}

impl LpProblem {
    /// Problem with `x >= 0` and no upper bounds.
    pub fn new(sense: Sense, objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        let p = LpProblem { upper: vec![None; n], objective, rows, rhs, sense };
        p.check_dims()?;
        Ok(p)
    }

    pub fn with_upper_bound(mut self, column: usize, bound: f64) -> Self {
        self.upper[column] = Some(bound);
        self
    }

    pub fn num_columns(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.objective.len();
        if self.rows.len() != self.rhs.len() {
            return Err(Error::MismatchedProblem(format!(
                "{} rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != n) {
            return Err(Error::MismatchedProblem(format!("row {i} does not have {n} columns")));
        }
        if self.upper.len() != n {
            return Err(Error::MismatchedProblem("upper bound count differs from columns".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// `A x - b`, one entry per row.
    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().zip(&self.rhs).map(|(row, b)| dot(row, x) - b).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An optimal basic feasible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub residuals: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<f64>>,
    /// Reduced costs (minimization form); last entry is `-z`.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    enterable: Vec<bool>,
    tol: f64,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn set_cost(&mut self, costs: &[f64]) {
        let w = self.width();
        self.cost = costs.to_vec();
        self.cost.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for j in 0..=w {
                    self.cost[j] -= cb * self.rows[i][j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..=w {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..=w {
                self.cost[j] -= f * pivot_row[j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule: lowest-index improving column, then lowest-index basic
    /// variable among minimum-ratio rows.
    fn run(&mut self) -> Result<()> {
        let w = self.width();
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(Error::IterationLimit(MAX_PIVOTS));
            }
            let entering = (0..w).find(|&j| self.enterable[j] && self.cost[j] < -self.tol);
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a <= self.tol {
                    continue;
                }
                let ratio = row[w] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, best)) => {
                        if ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, best))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(Error::Unbounded(c)),
            }
        }
    }
}

/// Solves `p` to optimality; `tol` is the pivoting and feasibility tolerance.
pub fn solve_simplex(p: &LpProblem, tol: f64) -> Result<LpSolution> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    p.check_dims()?;
    let n = p.num_columns();
    let bounded: Vec<(usize, f64)> =
        p.upper.iter().enumerate().filter_map(|(j, u)| u.map(|u| (j, u))).collect();
    let m_eq = p.num_rows();
    let m = m_eq + bounded.len();
    let slack0 = n;
    let art0 = n + bounded.len();
    let width = art0 + m_eq;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (row, &b)) in p.rows.iter().zip(&p.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width + 1];
        for (j, &a) in row.iter().enumerate() {
            t[j] = sign * a;
        }
        t[art0 + i] = 1.0;
        t[width] = sign * b;
        rows.push(t);
        basis.push(art0 + i);
    }
    for (k, &(j, u)) in bounded.iter().enumerate() {
        let mut t = vec![0.0; width + 1];
        t[j] = 1.0;
        t[slack0 + k] = 1.0;
        t[width] = u;
        rows.push(t);
        basis.push(slack0 + k);
    }

    let mut tab = Tableau {
        rows,
        cost: vec![0.0; width + 1],
        basis,
        enterable: vec![true; width],
        tol,
        pivots: 0,
    };

    // Phase one: minimize the sum of artificials.
    let mut phase1 = vec![0.0; width];
    for c in phase1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    tab.set_cost(&phase1);
    tab.run()?;
    let infeasibility = -tab.cost[width];
    if infeasibility > tol {
        return Err(Error::Infeasible(infeasibility));
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= art0 {
            match (0..art0).find(|&j| tab.rows[i][j].abs() > tol) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    for e in tab.enterable.iter_mut().skip(art0) {
        *e = false;
    }

    // Phase two on the caller's objective, in minimization form.
    let mut costs = vec![0.0; width];
    let flip = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    for (c, &o) in costs.iter_mut().zip(&p.objective) {
        *c = flip * o;
    }
    tab.set_cost(&costs);
    tab.run()?;

    let mut x = vec![0.0; n];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        if b < n {
            x[b] = row[width].max(0.0);
        }
    }
    Ok(LpSolution {
        objective: p.objective_value(&x),
        residuals: p.residuals(&x),
        x,
        pivots: tab.pivots,
    })
}

/// One named comparison inside a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected,
            actual,
            passed: (expected - actual).abs() <= tol,
        }
    }

    /// Passes iff `actual >= lower - tol`.
    pub fn at_least(name: impl Into<String>, lower: f64, actual: f64, tol: f64) -> Self {
        Check { name: name.into(), expected: lower, actual, passed: actual >= lower - tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Re-checks a solution against the raw problem data: bounds, every row
/// residual, and the claimed objective.
pub fn verify_solution(sol: &LpSolution, p: &LpProblem, tol: f64) -> Result<VerificationReport> {
    if sol.x.len() != p.num_columns() {
        return Err(Error::MismatchedProblem(format!(
            "solution has {} variables, problem has {}",
            sol.x.len(),
            p.num_columns()
        )));
    }
    let mut checks = Vec::new();
    for (j, &v) in sol.x.iter().enumerate() {
        checks.push(Check::at_least(format!("x[{j}] >= 0"), 0.0, v, tol));
        if let Some(u) = p.upper[j] {
            checks.push(Check::at_least(format!("x[{j}] <= {u}"), -u, -v, tol));
        }
    }
    for (i, r) in p.residuals(&sol.x).into_iter().enumerate() {
        checks.push(Check::new(format!("row {i}"), 0.0, r, tol));
    }
    checks.push(Check::new("objective", sol.objective, p.objective_value(&sol.x), tol));
    Ok(VerificationReport { tolerance: tol, checks })
}
