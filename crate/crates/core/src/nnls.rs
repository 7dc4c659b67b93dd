//! Non-negative least squares: `min ‖y − X a‖²` subject to `a ≥ 0`.
//!
//! Active-set method in the style of Lawson and Hanson. The unconstrained
//! subproblem on the passive set is solved with a column-pivoted Householder
//! QR, returning the minimum-norm solution when the passive columns are rank
//! deficient. Rows are processed in order of decreasing magnitude so a single
//! heavily weighted row (the fairness row of linear pricing) does not spoil the
//! factorization.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::scenario::check_len;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Design matrix `X` (`n × d`, row-major) and target `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsProblem {
    rows: usize,
    cols: usize,
    design: Vec<f64>,
    target: Vec<f64>,
}

impl LsProblem {
    pub fn new(rows: usize, cols: usize, design: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(PricingError::InvalidArgument(format!(
                "least-squares problem must be at least 1×1, got {rows}×{cols}"
            )));
        }
        if design.len() != rows * cols {
            return Err(PricingError::DimensionMismatch {
                expected: rows * cols,
                found: design.len(),
            });
        }
        if target.len() != rows {
            return Err(PricingError::DimensionMismatch {
                expected: rows,
                found: target.len(),
            });
        }
        if let Some(i) = design.iter().position(|x| !x.is_finite()) {
            return Err(PricingError::NonFinite {
                row: i / cols,
                field: "design",
            });
        }
        if let Some(row) = target.iter().position(|x| !x.is_finite()) {
            return Err(PricingError::NonFinite {
                row,
                field: "target",
            });
        }
        Ok(LsProblem {
            rows,
            cols,
            design,
            target,
        })
    }

    pub fn from_rows(design_rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self> {
        let cols = design_rows.first().map_or(0, Vec::len);
        if let Some(bad) = design_rows.iter().find(|r| r.len() != cols) {
            return Err(PricingError::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        let design = design_rows.iter().flatten().copied().collect();
        LsProblem::new(design_rows.len(), cols, design, target)
    }

    /// The same problem in variables `b_j = s_j·a_j`, i.e. column `j` divided
    /// by `s_j > 0`. Non-negativity is preserved.
    pub fn with_column_scales(&self, scales: &[f64]) -> Result<LsProblem> {
        check_len(self.cols, scales.len())?;
        if let Some(bad) = scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(PricingError::InvalidArgument(format!(
                "column scales must be positive and finite, got {bad}"
            )));
        }
        let mut design = self.design.clone();
        for row in design.chunks_mut(self.cols) {
            for (x, s) in row.iter_mut().zip(scales) {
                *x /= s;
            }
        }
        LsProblem::new(self.rows, self.cols, design, self.target.clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn design_row(&self, i: usize) -> &[f64] {
        &self.design[i * self.cols..(i + 1) * self.cols]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// `X a − y`.
    pub fn residual(&self, a: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| dot(self.design_row(i), a) - self.target[i])
            .collect()
    }

    pub fn residual_norm_sq(&self, a: &[f64]) -> f64 {
        self.residual(a).iter().map(|r| r * r).sum()
    }

    /// `Xᵀ(X a − y)`, half the gradient of the objective.
    pub fn gradient(&self, a: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.cols];
        for (i, r) in self.residual(a).into_iter().enumerate() {
            for (gj, xij) in g.iter_mut().zip(self.design_row(i)) {
                *gj += xij * r;
            }
        }
        g
    }

    /// `‖Xᵀ y‖_∞ + 1`, the unit in which KKT tolerances are expressed.
    pub fn tolerance_scale(&self) -> f64 {
        let mut xty = vec![0.0; self.cols];
        for (i, &y) in self.target.iter().enumerate() {
            for (acc, xij) in xty.iter_mut().zip(self.design_row(i)) {
                *acc += xij * y;
            }
        }
        xty.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnlsSolution {
    pub coefficients: Vec<f64>,
    pub residual_norm_sq: f64,
    pub kkt_violation: f64,
    pub iterations: usize,
}

/// KKT violation of a non-negative candidate `a`:
/// `max( max_i (−g_i)⁺, max_{a_i > 0} |g_i| )` with `g = Xᵀ(X a − y)`.
///
/// Zero exactly at the global minimizer.
pub fn kkt_residual(problem: &LsProblem, a: &[f64]) -> Result<f64> {
    if a.len() != problem.cols() {
        return Err(PricingError::DimensionMismatch {
            expected: problem.cols(),
            found: a.len(),
        });
    }
    if let Some(i) = a.iter().position(|&x| x.is_nan() || x < 0.0) {
        return Err(PricingError::InvalidArgument(format!(
            "coefficient {i} is not non-negative: {}",
            a[i]
        )));
    }
    Ok(kkt_of_gradient(&problem.gradient(a), a))
}

fn kkt_of_gradient(g: &[f64], a: &[f64]) -> f64 {
    g.iter().zip(a).fold(0.0f64, |worst, (&gi, &ai)| {
        let v = if ai > 0.0 { gi.abs() } else { (-gi).max(0.0) };
        worst.max(v)
    })
}

/// Solves the NNLS problem.
///
/// Terminates when every gradient entry satisfies `g_i ≥ −tolerance·scale` and
/// `|g_i| ≤ tolerance·scale` on the support, with `scale = ‖Xᵀy‖_∞ + 1`.
/// `max_iterations` defaults to `3·d·max(n, d)`.
pub fn nnls_solve(
    problem: &LsProblem,
    tolerance: f64,
    max_iterations: Option<usize>,
) -> Result<NnlsSolution> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(PricingError::InvalidArgument(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let n = problem.rows();
    let d = problem.cols();
    let max_iterations = max_iterations.unwrap_or(3 * d * n.max(d));
    let bound = tolerance * problem.tolerance_scale();
    let row_order = rows_by_magnitude(problem);

    let mut x = vec![0.0; d];
    let mut passive = vec![false; d];
    // Columns whose admission produced no progress; cleared once `x` moves.
    let mut blocked = vec![false; d];
    let mut iterations = 0;
    let mut objective = problem.residual_norm_sq(&x);
    let y_norm_sq: f64 = problem.target().iter().map(|y| y * y).sum();

    let finish = |x: Vec<f64>, iterations: usize| {
        let g = problem.gradient(&x);
        NnlsSolution {
            residual_norm_sq: problem.residual_norm_sq(&x),
            kkt_violation: kkt_of_gradient(&g, &x),
            coefficients: x,
            iterations,
        }
    };

    loop {
        let g = problem.gradient(&x);
        let mut entering = None;
        let mut most_negative = -bound;
        for j in 0..d {
            if !passive[j] && !blocked[j] && g[j] < most_negative {
                most_negative = g[j];
                entering = Some(j);
            }
        }
        let Some(j) = entering else { break };
        if iterations >= max_iterations {
            return Err(PricingError::NonConvergence {
                partial: Box::new(finish(x, iterations)),
            });
        }
        iterations += 1;
        passive[j] = true;

        let mut first_pass = true;
        loop {
            let z = passive_least_squares(problem, &passive, &row_order);
            let infeasible = (0..d).any(|i| passive[i] && z[i] <= 0.0);
            if !infeasible {
                x = z;
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            if first_pass && z[j] <= 0.0 {
                // The entering column cannot move off zero; only roundoff
                // allows this, so set it aside until the iterate changes.
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            first_pass = false;

            let mut step = 1.0f64;
            let mut leaving = None;
            for i in 0..d {
                if passive[i] && z[i] <= 0.0 {
                    let t = x[i] / (x[i] - z[i]);
                    if t < step || leaving.is_none() {
                        step = t;
                        leaving = Some(i);
                    }
                }
            }
            for i in 0..d {
                if passive[i] {
                    x[i] += step * (z[i] - x[i]);
                }
            }
            for i in 0..d {
                if passive[i] && (Some(i) == leaving || x[i] <= 0.0) {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if iterations >= max_iterations {
                return Err(PricingError::NonConvergence {
                    partial: Box::new(finish(x, iterations)),
                });
            }
            iterations += 1;
        }

        let next = problem.residual_norm_sq(&x);
        debug_assert!(
            next <= objective + 1e-9 * (objective + y_norm_sq),
            "NNLS objective increased from {objective} to {next}"
        );
        objective = next;
    }

    let solution = finish(x, iterations);
    if solution.kkt_violation > bound {
        return Err(PricingError::NonConvergence {
            partial: Box::new(solution),
        });
    }
    Ok(solution)
}

fn rows_by_magnitude(problem: &LsProblem) -> Vec<usize> {
    let norms: Vec<f64> = (0..problem.rows())
        .map(|i| {
            problem
                .design_row(i)
                .iter()
                .fold(problem.target()[i].abs(), |m, x| m.max(x.abs()))
        })
        .collect();
    let mut order: Vec<usize> = (0..problem.rows()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order
}

/// Unconstrained least squares restricted to the passive columns; zero elsewhere.
fn passive_least_squares(problem: &LsProblem, passive: &[bool], row_order: &[usize]) -> Vec<f64> {
    let columns: Vec<usize> = (0..problem.cols()).filter(|&j| passive[j]).collect();
    let n = problem.rows();
    let k = columns.len();
    let mut a = vec![0.0; n * k];
    let mut b = vec![0.0; n];
    for (r, &i) in row_order.iter().enumerate() {
        let row = problem.design_row(i);
        for (c, &j) in columns.iter().enumerate() {
            a[c * n + r] = row[j];
        }
        b[r] = problem.target()[i];
    }
    let local = min_norm_least_squares(&mut a, &mut b, n, k);
    let mut out = vec![0.0; problem.cols()];
    for (c, &j) in columns.iter().enumerate() {
        out[j] = local[c];
    }
    out
}

/// Minimum-norm solution of `min ‖b − A x‖` for column-major `A` (`n × k`).
///
/// Householder QR with column pivoting (largest remaining norm, lowest index
/// on ties); the rank is the number of diagonal entries above
/// `10·max(n,k)·ε·|R_00|`. `a` and `b` are overwritten.
pub(crate) fn min_norm_least_squares(a: &mut [f64], b: &mut [f64], n: usize, k: usize) -> Vec<f64> {
    let col = |j: usize| j * n;
    let mut perm: Vec<usize> = (0..k).collect();
    let steps = n.min(k);
    let mut diag = Vec::with_capacity(steps);

    for s in 0..steps {
        let mut pivot = s;
        let mut best = -1.0;
        for j in s..k {
            let norm: f64 = a[col(j) + s..col(j) + n].iter().map(|x| x * x).sum();
            if norm > best {
                best = norm;
                pivot = j;
            }
        }
        if pivot != s {
            for i in 0..n {
                a.swap(col(s) + i, col(pivot) + i);
            }
            perm.swap(s, pivot);
        }

        let norm = best.sqrt();
        if norm == 0.0 {
            diag.push(0.0);
            continue;
        }
        let head = a[col(s) + s];
        let alpha = if head > 0.0 { -norm } else { norm };
        // v = x − alpha·e1, stored in place; H = I − 2 v vᵀ / (vᵀ v).
        a[col(s) + s] = head - alpha;
        let vtv: f64 = a[col(s) + s..col(s) + n].iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            for j in s + 1..k {
                let proj: f64 = (s..n).map(|i| a[col(s) + i] * a[col(j) + i]).sum();
                let factor = 2.0 * proj / vtv;
                for i in s..n {
                    a[col(j) + i] -= factor * a[col(s) + i];
                }
            }
            let proj: f64 = (s..n).map(|i| a[col(s) + i] * b[i]).sum();
            let factor = 2.0 * proj / vtv;
            for i in s..n {
                b[i] -= factor * a[col(s) + i];
            }
        }
        diag.push(alpha);
    }

    let threshold =
        diag.first().map_or(0.0, |d: &f64| d.abs()) * 10.0 * (n.max(k) as f64) * f64::EPSILON;
    let rank = diag
        .iter()
        .take_while(|d| d.abs() > threshold && **d != 0.0)
        .count();

    // R entry (i, j) for i < j lives at a[col(j) + i]; the diagonal is `diag`.
    let r_at = |a: &[f64], i: usize, j: usize| if i == j { diag[i] } else { a[col(j) + i] };
    let back_substitute = |a: &[f64], rhs: &mut [f64]| {
        for i in (0..rank).rev() {
            let mut acc = rhs[i];
            for j in i + 1..rank {
                acc -= r_at(a, i, j) * rhs[j];
            }
            rhs[i] = acc / diag[i];
        }
    };

    let mut basic = b[..rank].to_vec();
    back_substitute(a, &mut basic);
    let mut solution = vec![0.0; k];
    solution[..rank].copy_from_slice(&basic);

    if rank < k {
        // Null space of [R11 R12] is spanned by [−T; I] with T = R11⁻¹ R12.
        let free = k - rank;
        let mut t = vec![vec![0.0; free]; rank];
        for c in 0..free {
            let mut column: Vec<f64> = (0..rank).map(|i| r_at(a, i, rank + c)).collect();
            back_substitute(a, &mut column);
            for i in 0..rank {
                t[i][c] = column[i];
            }
        }
        // (TᵀT + I) w = −Tᵀ x_B; then x_B += T w, x_N = −w.
        let mut gram = vec![vec![0.0; free]; free];
        let mut rhs = vec![0.0; free];
        for p in 0..free {
            for q in 0..free {
                gram[p][q] = (0..rank).map(|i| t[i][p] * t[i][q]).sum::<f64>()
                    + if p == q { 1.0 } else { 0.0 };
            }
            rhs[p] = -(0..rank).map(|i| t[i][p] * basic[i]).sum::<f64>();
        }
        let w = cholesky_solve(gram, rhs);
        for i in 0..rank {
            solution[i] += (0..free).map(|c| t[i][c] * w[c]).sum::<f64>();
        }
        for c in 0..free {
            solution[rank + c] = -w[c];
        }
    }

    let mut out = vec![0.0; k];
    for (pos, &j) in perm.iter().enumerate() {
        out[j] = solution[pos];
    }
    out
}

fn cholesky_solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for j in 0..n {
        let mut d = m[j][j];
        for p in 0..j {
            d -= m[j][p] * m[j][p];
        }
        let d = d.sqrt();
        m[j][j] = d;
        for i in j + 1..n {
            let mut s = m[i][j];
            for p in 0..j {
                s -= m[i][p] * m[j][p];
            }
            m[i][j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = rhs[i];
        for p in 0..i {
            s -= m[i][p] * rhs[p];
        }
        rhs[i] = s / m[i][i];
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for p in i + 1..n {
            s -= m[p][i] * rhs[p];
        }
        rhs[i] = s / m[i][i];
    }
    rhs
}
