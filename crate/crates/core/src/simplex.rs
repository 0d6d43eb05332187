//! Dense bounded-variable primal simplex.
//!
//! Every solve ends at a basic (vertex) solution: each non-basic variable
//! sits exactly at one of its bounds, and at most `rows` variables are
//! strictly between their bounds. The workload partitioning relies on this
//! to bound the number of processor-type-spanning jobs per interval.
//!
//! Rows are `a . x (<=|=|>=) b`. Internally each row gets a slack column
//! `s_i` so that `a . x + s_i = b`, with the slack's bounds encoding the
//! relation. Rows whose initial slack would leave its bounds receive an
//! artificial column that phase 1 drives to zero.

use std::io::{self, Write};

use thiserror::Error;

/// Absolute tolerance on row residuals and bounds.
pub const FEAS_TOL: f64 = 1e-9;
/// Tableau entries below this are never pivoted on.
pub const PIVOT_TOL: f64 = 1e-10;

/// Step lengths below this count as degenerate and switch pricing to Bland.
const DEGENERATE_STEP: f64 = 1e-12;
/// Accepted residual when checking an externally supplied point.
const POINT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("point violates the LP by {0:e}")]
    InfeasiblePoint(f64),
    #[error("objective is unbounded along a feasible direction")]
    Unbounded,
    #[error("feasible region contains a line; no vertex exists")]
    NoVertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c . x` subject to row constraints and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(cost);
        self.lower.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(LpError::Malformed("no variables".into()));
        }
        if self.upper.len() != n || self.objective.len() != n {
            return Err(LpError::Malformed("bound/objective length mismatch".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("variable {j} has bounds [{l}, {u}]")));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::Malformed(format!("variable {j} has a non-finite cost")));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has a non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n || !a.is_finite() {
                    return Err(LpError::Malformed(format!("row {i} has a bad coefficient")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.constraints[i].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for (i, row) in self.constraints.iter().enumerate() {
            let r = self.row_activity(i, x) - row.rhs;
            worst = worst.max(match row.relation {
                Relation::Le => r,
                Relation::Ge => -r,
                Relation::Eq => r.abs(),
            });
        }
        worst
    }

    fn slack_bounds(&self, i: usize) -> (f64, f64) {
        match self.constraints[i].relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        }
    }

    fn dense_rows(&self) -> Vec<Vec<f64>> {
        let n = self.num_vars();
        self.constraints
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for &(j, a) in &row.coeffs {
                    dense[j] += a;
                }
                dense
            })
            .collect()
    }

    /// Fixed-format MPS dump. Columns are `X0000001..` in variable order,
    /// rows `R0000001..` in constraint order, objective row `COST`.
    pub fn write_mps<W: Write>(&self, name: &str, mut w: W) -> io::Result<()> {
        let col = |j: usize| format!("X{:07}", j + 1);
        let row = |i: usize| format!("R{:07}", i + 1);
        writeln!(w, "NAME          {}", name.chars().take(8).collect::<String>())?;
        writeln!(w, "ROWS")?;
        writeln!(w, " N  COST")?;
        for (i, c) in self.constraints.iter().enumerate() {
            let kind = match c.relation {
                Relation::Le => "L",
                Relation::Ge => "G",
                Relation::Eq => "E",
            };
            writeln!(w, " {kind}  {}", row(i))?;
        }
        writeln!(w, "COLUMNS")?;
        let dense = self.dense_rows();
        for j in 0..self.num_vars() {
            if self.objective[j] != 0.0 {
                writeln!(w, "    {:<8}  {:<8}  {:>12}", col(j), "COST", mps_number(self.objective[j]))?;
            }
            for (i, r) in dense.iter().enumerate() {
                if r[j] != 0.0 {
                    writeln!(w, "    {:<8}  {:<8}  {:>12}", col(j), row(i), mps_number(r[j]))?;
                }
            }
        }
        writeln!(w, "RHS")?;
        for (i, c) in self.constraints.iter().enumerate() {
            if c.rhs != 0.0 {
                writeln!(w, "    {:<8}  {:<8}  {:>12}", "RHS", row(i), mps_number(c.rhs))?;
            }
        }
        writeln!(w, "BOUNDS")?;
        for j in 0..self.num_vars() {
            let (l, u) = (self.lower[j], self.upper[j]);
            let mut bound = |kind: &str, v: Option<f64>| match v {
                Some(v) => writeln!(w, " {kind} {:<8}  {:<8}  {:>12}", "BND", col(j), mps_number(v)),
                None => writeln!(w, " {kind} {:<8}  {:<8}", "BND", col(j)),
            };
            if l == u {
                bound("FX", Some(l))?;
            } else if l == f64::NEG_INFINITY && u == f64::INFINITY {
                bound("FR", None)?;
            } else {
                if l == f64::NEG_INFINITY {
                    bound("MI", None)?;
                } else if l != 0.0 {
                    bound("LO", Some(l))?;
                }
                if u != f64::INFINITY {
                    bound("UP", Some(u))?;
                }
            }
        }
        writeln!(w, "ENDATA")
    }
}

/// Most precise rendering of `v` that fits a 12-character MPS field.
fn mps_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    (0..=10)
        .rev()
        .map(|p| format!("{v:.p$e}"))
        .find(|s| s.len() <= 12)
        .unwrap_or_else(|| format!("{v:.0e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A basis could not be refactorized, or pivoting failed to terminate.
    NumericallySingular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Non-basic free variable resting at zero.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    /// Status of each structural variable.
    pub basis: Vec<VarStatus>,
    /// Number of basic columns (structural, slack or artificial); equals the row count.
    pub basis_size: usize,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn failed(status: LpStatus, n: usize, iterations: usize) -> Self {
        Self {
            status,
            values: vec![f64::NAN; n],
            basis: vec![VarStatus::AtLower; n],
            basis_size: 0,
            objective: f64::NAN,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Structural variables strictly inside their bounds.
    pub fn interior_count(&self, lp: &LinearProgram) -> usize {
        self.values
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v > lp.lower[j] + FEAS_TOL && v < lp.upper[j] - FEAS_TOL)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColState {
    Basic(usize),
    AtLower,
    AtUpper,
    Free,
}

struct Tableau {
    rows: usize,
    cols: usize,
    structural: usize,
    /// `B^-1 [A | I | art]`, row-major.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    lo: Vec<f64>,
    up: Vec<f64>,
    /// Original column of each artificial: (row, coefficient).
    artificial: Vec<(usize, f64)>,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let dense = lp.dense_rows();
        let mut lo: Vec<f64> = lp.lower.clone();
        let mut up: Vec<f64> = lp.upper.clone();
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            state.push(if lo[j].is_finite() {
                ColState::AtLower
            } else if up[j].is_finite() {
                ColState::AtUpper
            } else {
                ColState::Free
            });
        }
        for i in 0..m {
            let (l, u) = lp.slack_bounds(i);
            lo.push(l);
            up.push(u);
            state.push(ColState::AtLower);
        }
        let x0: Vec<f64> = (0..n).map(|j| nonbasic_value(state[j], lo[j], up[j])).collect();

        let mut basis = vec![0; m];
        let mut beta = vec![0.0; m];
        let mut artificial = Vec::new();
        let mut row_scale = vec![1.0; m];
        for i in 0..m {
            let r = lp.constraints[i].rhs - dense[i].iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>();
            let (sl, su) = (lo[n + i], up[n + i]);
            if r >= sl && r <= su {
                basis[i] = n + i;
                beta[i] = r;
            } else {
                let (bound, at) = if r > su {
                    (su, ColState::AtUpper)
                } else {
                    (sl, ColState::AtLower)
                };
                state[n + i] = at;
                let coef = if r > bound { 1.0 } else { -1.0 };
                row_scale[i] = coef;
                artificial.push((i, coef));
                beta[i] = (r - bound).abs();
            }
        }
        let k = artificial.len();
        let cols = n + m + k;
        let mut t = vec![0.0; m * cols];
        for i in 0..m {
            let s = row_scale[i];
            let row = &mut t[i * cols..(i + 1) * cols];
            for j in 0..n {
                row[j] = dense[i][j] * s;
            }
            row[n + i] = s;
        }
        for (a, &(i, _)) in artificial.iter().enumerate() {
            // coef * s == 1 by construction
            t[i * cols + n + m + a] = 1.0;
            basis[i] = n + m + a;
            lo.push(0.0);
            up.push(f64::INFINITY);
            state.push(ColState::AtLower);
        }
        for (i, &b) in basis.iter().enumerate() {
            state[b] = ColState::Basic(i);
        }
        Self {
            rows: m,
            cols,
            structural: n,
            t,
            beta,
            basis,
            state,
            lo,
            up,
            artificial,
            iterations: 0,
            max_iterations: 50 * (m + cols) + 1000,
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::Basic(i) => self.beta[i],
            s => nonbasic_value(s, self.lo[j], self.up[j]),
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        d
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let cols = self.cols;
        let p = self.t[r * cols + q];
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_mut(cols).chain(after.chunks_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (x, pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let f = d[q];
        if f != 0.0 {
            for (x, pr) in d.iter_mut().zip(pivot_row.iter()) {
                *x -= f * pr;
            }
            d[q] = 0.0;
        }
    }

    fn run_phase(&mut self, cost: &[f64]) -> PhaseEnd {
        let mut d = self.reduced_costs(cost);
        let scale = cost.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        let dual_tol = 1e-9 * scale;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            // pricing
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if self.lo[j] == self.up[j] {
                    continue;
                }
                let score = match self.state[j] {
                    ColState::Basic(_) => continue,
                    ColState::AtLower if d[j] < -dual_tol => -d[j],
                    ColState::AtUpper if d[j] > dual_tol => d[j],
                    ColState::Free if d[j].abs() > dual_tol => d[j].abs(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, score));
                    break;
                }
                if entering.map_or(true, |(_, s)| score > s) {
                    entering = Some((j, score));
                }
            }
            let Some((q, _)) = entering else {
                return PhaseEnd::Optimal;
            };
            self.iterations += 1;
            let dir = match self.state[q] {
                ColState::AtLower => 1.0,
                ColState::AtUpper => -1.0,
                _ => {
                    if d[q] < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };

            // ratio test
            let mut theta = self.up[q] - self.lo[q];
            if !theta.is_finite() {
                theta = f64::INFINITY;
            }
            let mut leave: Option<(usize, bool, f64)> = None; // (row, hits_lower, |alpha|)
            for i in 0..self.rows {
                let alpha = self.t[i * self.cols + q];
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha;
                let b = self.basis[i];
                let (limit, hits_lower) = if rate < 0.0 {
                    if self.lo[b] == f64::NEG_INFINITY {
                        continue;
                    }
                    ((self.beta[i] - self.lo[b]) / -rate, true)
                } else {
                    if self.up[b] == f64::INFINITY {
                        continue;
                    }
                    ((self.up[b] - self.beta[i]) / rate, false)
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    None => limit < theta,
                    Some((r, _, a)) => {
                        if (limit - theta).abs() <= 1e-12 * theta.max(1.0) {
                            if bland {
                                b < self.basis[r]
                            } else {
                                alpha.abs() > a
                            }
                        } else {
                            limit < theta
                        }
                    }
                };
                if better {
                    theta = limit;
                    leave = Some((i, hits_lower, alpha.abs()));
                }
            }
            if theta == f64::INFINITY {
                return PhaseEnd::Unbounded;
            }
            bland = theta < DEGENERATE_STEP;

            let entering_value = self.value(q) + dir * theta;
            for i in 0..self.rows {
                let alpha = self.t[i * self.cols + q];
                if alpha != 0.0 {
                    self.beta[i] -= dir * theta * alpha;
                }
            }
            match leave {
                None => {
                    self.state[q] = if dir > 0.0 {
                        ColState::AtUpper
                    } else {
                        ColState::AtLower
                    };
                }
                Some((r, hits_lower, _)) => {
                    let b = self.basis[r];
                    self.state[b] = if hits_lower {
                        ColState::AtLower
                    } else {
                        ColState::AtUpper
                    };
                    self.pivot(r, q, &mut d);
                    self.basis[r] = q;
                    self.state[q] = ColState::Basic(r);
                    self.beta[r] = entering_value;
                }
            }
        }
    }

    /// Pivot basic artificials out on any usable non-artificial column.
    fn purge_artificials(&mut self) {
        let first_art = self.structural + self.rows;
        let mut scratch = vec![0.0; self.cols];
        for r in 0..self.rows {
            if self.basis[r] < first_art {
                continue;
            }
            let row = &self.t[r * self.cols..(r + 1) * self.cols];
            let q = (0..first_art).find(|&j| {
                !matches!(self.state[j], ColState::Basic(_)) && row[j].abs() > 1e-7
            });
            if let Some(q) = q {
                let b = self.basis[r];
                let v = self.value(q);
                self.state[b] = ColState::AtLower;
                self.pivot(r, q, &mut scratch);
                self.basis[r] = q;
                self.state[q] = ColState::Basic(r);
                self.beta[r] = v;
            }
        }
    }

    /// Recompute basic values from the original data and report whether the
    /// basis is usable.
    fn refactor(&mut self, lp: &LinearProgram, dense: &[Vec<f64>]) -> bool {
        let m = self.rows;
        let n = self.structural;
        if m == 0 {
            return true;
        }
        let column = |j: usize, i: usize| -> f64 {
            if j < n {
                dense[i][j]
            } else if j < n + m {
                f64::from(u8::from(j - n == i))
            } else {
                let (row, coef) = self.artificial[j - n - m];
                if row == i {
                    coef
                } else {
                    0.0
                }
            }
        };
        let mut rhs: Vec<f64> = (0..m).map(|i| lp.constraints[i].rhs).collect();
        for j in 0..self.cols {
            if matches!(self.state[j], ColState::Basic(_)) {
                continue;
            }
            let v = self.value(j);
            if v != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= column(j, i) * v;
                }
            }
        }
        let mut b: Vec<Vec<f64>> = (0..m)
            .map(|i| self.basis.iter().map(|&j| column(j, i)).collect())
            .collect();
        match solve_dense(&mut b, &mut rhs) {
            Some(x) => {
                self.beta = x;
                true
            }
            None => false,
        }
    }
}

fn nonbasic_value(state: ColState, lo: f64, up: f64) -> f64 {
    match state {
        ColState::AtLower => lo,
        ColState::AtUpper => up,
        _ => 0.0,
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let m = b.len();
    for k in 0..m {
        let p = (k..m).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
        if a[p][k].abs() < 1e-12 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..m {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Solve `lp` to a basic optimal solution. Infeasible and unbounded
/// problems are reported through [`LpSolution::status`].
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_rows();
    let dense = lp.dense_rows();
    let mut tab = Tableau::build(lp);

    if !tab.artificial.is_empty() {
        let mut cost = vec![0.0; tab.cols];
        for c in &mut cost[n + m..] {
            *c = 1.0;
        }
        match tab.run_phase(&cost) {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded | PhaseEnd::IterationLimit => {
                return Ok(LpSolution::failed(LpStatus::NumericallySingular, n, tab.iterations));
            }
        }
        let infeasibility = (n + m..tab.cols).map(|j| tab.value(j)).fold(0.0, f64::max);
        if infeasibility > FEAS_TOL {
            return Ok(LpSolution::failed(LpStatus::Infeasible, n, tab.iterations));
        }
        for j in n + m..tab.cols {
            tab.up[j] = 0.0;
        }
        tab.purge_artificials();
    }

    let mut cost = vec![0.0; tab.cols];
    cost[..n].copy_from_slice(&lp.objective);
    match tab.run_phase(&cost) {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => {
            return Ok(LpSolution::failed(LpStatus::Unbounded, n, tab.iterations));
        }
        PhaseEnd::IterationLimit => {
            return Ok(LpSolution::failed(LpStatus::NumericallySingular, n, tab.iterations));
        }
    }
    if !tab.refactor(lp, &dense) {
        return Ok(LpSolution::failed(LpStatus::NumericallySingular, n, tab.iterations));
    }

    let mut values = Vec::with_capacity(n);
    let mut basis = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = tab.value(j);
        // snap round-off back inside the box
        if v < lp.lower[j] && v > lp.lower[j] - FEAS_TOL {
            v = lp.lower[j];
        } else if v > lp.upper[j] && v < lp.upper[j] + FEAS_TOL {
            v = lp.upper[j];
        }
        values.push(v);
        basis.push(match tab.state[j] {
            ColState::Basic(_) => VarStatus::Basic,
            ColState::AtLower => VarStatus::AtLower,
            ColState::AtUpper => VarStatus::AtUpper,
            ColState::Free => VarStatus::Free,
        });
    }
    if lp.max_violation(&values) > 1e3 * FEAS_TOL {
        return Ok(LpSolution::failed(LpStatus::NumericallySingular, n, tab.iterations));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&values),
        values,
        basis,
        basis_size: m,
        iterations: tab.iterations,
    })
}

/// Null vector of the columns `cols` of `[A | I]`, if they are dependent.
fn null_vector(dense: &[Vec<f64>], n: usize, cols: &[usize]) -> Option<Vec<f64>> {
    let m = dense.len();
    let k = cols.len();
    let mut mat: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            cols.iter()
                .map(|&j| {
                    if j < n {
                        dense[i][j]
                    } else {
                        f64::from(u8::from(j - n == i))
                    }
                })
                .collect()
        })
        .collect();
    let scale = mat
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()))
        .max(1.0);
    let tol = 1e-9 * scale;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for c in 0..k {
        if row == m {
            break;
        }
        let p = (row..m)
            .max_by(|&a, &b| mat[a][c].abs().total_cmp(&mat[b][c].abs()))
            .unwrap();
        if mat[p][c].abs() <= tol {
            continue;
        }
        mat.swap(row, p);
        let pv = mat[row][c];
        for v in &mut mat[row] {
            *v /= pv;
        }
        for i in 0..m {
            if i != row {
                let f = mat[i][c];
                if f != 0.0 {
                    for cc in 0..k {
                        mat[i][cc] -= f * mat[row][cc];
                    }
                }
            }
        }
        pivots.push((row, c));
        row += 1;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let free = (0..k).find(|c| !pivot_cols.contains(c))?;
    let mut d = vec![0.0; k];
    d[free] = 1.0;
    for &(r, c) in &pivots {
        d[c] = -mat[r][free];
    }
    Some(d)
}

/// Move a feasible point to a basic feasible point without increasing the
/// objective. Each step follows a null-space direction of the variables that
/// are strictly inside their bounds until one of them reaches a bound.
pub fn to_basic(lp: &LinearProgram, point: &[f64]) -> Result<Vec<f64>, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_rows();
    if point.len() != n {
        return Err(LpError::Malformed("point has the wrong dimension".into()));
    }
    let violation = lp.max_violation(point);
    if violation > POINT_TOL {
        return Err(LpError::InfeasiblePoint(violation));
    }
    let dense = lp.dense_rows();
    let mut lo = lp.lower.clone();
    let mut up = lp.upper.clone();
    for i in 0..m {
        let (l, u) = lp.slack_bounds(i);
        lo.push(l);
        up.push(u);
    }
    let mut z: Vec<f64> = point
        .iter()
        .enumerate()
        .map(|(j, &v)| v.clamp(lp.lower[j], lp.upper[j]))
        .collect();
    for i in 0..m {
        let s = lp.constraints[i].rhs - dense[i].iter().zip(&z).map(|(a, x)| a * x).sum::<f64>();
        z.push(s.clamp(lo[n + i], up[n + i]));
    }
    let cost = |j: usize| if j < n { lp.objective[j] } else { 0.0 };
    let snap = 1e-12;

    for _ in 0..=(n + m) {
        let free: Vec<usize> = (0..n + m)
            .filter(|&j| z[j] > lo[j] + snap && z[j] < up[j] - snap)
            .collect();
        let Some(mut d) = null_vector(&dense, n, &free) else {
            break;
        };
        let cd: f64 = free.iter().zip(&d).map(|(&j, dj)| cost(j) * dj).sum();
        if cd > 1e-14 {
            d.iter_mut().for_each(|v| *v = -*v);
        }
        let step = |d: &[f64]| -> (f64, Option<usize>) {
            let mut theta = f64::INFINITY;
            let mut block = None;
            for (&j, &dj) in free.iter().zip(d) {
                let limit = if dj > 1e-15 {
                    (up[j] - z[j]) / dj
                } else if dj < -1e-15 {
                    (lo[j] - z[j]) / dj
                } else {
                    continue;
                };
                if limit < theta {
                    theta = limit;
                    block = Some(j);
                }
            }
            (theta, block)
        };
        let (mut theta, mut block) = step(&d);
        if block.is_none() {
            if cd.abs() > 1e-14 {
                return Err(LpError::Unbounded);
            }
            d.iter_mut().for_each(|v| *v = -*v);
            (theta, block) = step(&d);
            if block.is_none() {
                return Err(LpError::NoVertex);
            }
        }
        let theta = theta.max(0.0);
        for (&j, &dj) in free.iter().zip(&d) {
            z[j] += theta * dj;
            if (z[j] - lo[j]).abs() <= snap {
                z[j] = lo[j];
            } else if (z[j] - up[j]).abs() <= snap {
                z[j] = up[j];
            }
        }
        let b = block.unwrap();
        let dj = d[free.iter().position(|&j| j == b).unwrap()];
        z[b] = if dj > 0.0 { up[b] } else { lo[b] };
    }
    z.truncate(n);
    Ok(z)
}
