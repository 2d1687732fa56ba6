//! Dense two-phase primal simplex for small boxed linear programs.
//!
//! Problems have the form `min c·x` subject to `A x ≤ b` and
//! `lo ≤ x ≤ hi`. Variables are shifted to `y = x − lo ≥ 0`, upper bounds
//! become extra rows, and rows with a negative right-hand side receive an
//! artificial variable for phase one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries below this magnitude never serve as pivots.
pub const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
pub const DEGENERATE_LIMIT: usize = 500;
pub const DEFAULT_MAX_ITERS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.bounds.len() != n {
            return bad(format!("{} bounds for {n} variables", self.bounds.len()));
        }
        if self.a_ub.len() != self.b_ub.len() {
            return bad(format!(
                "{} constraint rows but {} right-hand sides",
                self.a_ub.len(),
                self.b_ub.len()
            ));
        }
        if let Some(i) = self.a_ub.iter().position(|r| r.len() != n) {
            return bad(format!("constraint row {i} has the wrong length"));
        }
        let finite = self
            .c
            .iter()
            .chain(self.a_ub.iter().flatten())
            .chain(&self.b_ub)
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite coefficient".into());
        }
        if let Some(j) = self
            .bounds
            .iter()
            .position(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
        {
            return bad(format!("variable {j} has invalid bounds"));
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .a_ub
            .iter()
            .zip(&self.b_ub)
            .map(|(row, b)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b);
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// Row-major `rows × width`; the last column is the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs for the current phase, with `-objective` last.
    cost: Vec<f64>,
}

enum Step {
    Done,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width;
        let p = self.at(r, col);
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[col] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        eliminate(&mut self.cost);
        self.basis[r] = col;
    }

    /// Sets reduced costs for objective `c` over the current basis.
    fn price(&mut self, c: &[f64]) {
        self.cost.clear();
        self.cost.extend_from_slice(c);
        self.cost.resize(self.width, 0.0);
        for i in 0..self.rows {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * self.width..(i + 1) * self.width];
                for (d, a) in self.cost.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
    }

    fn step(&mut self, enter_limit: usize, bland: bool) -> (Step, bool) {
        let mut enter = None;
        let mut best = -PIVOT_TOL;
        for j in 0..enter_limit {
            let d = self.cost[j];
            if d < best {
                enter = Some(j);
                if bland {
                    break;
                }
                best = d;
            }
        }
        let Some(col) = enter else {
            return (Step::Done, false);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, col);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((r, ratio)) = leave else {
            return (Step::Unbounded, false);
        };
        self.pivot(r, col);
        (Step::Pivoted, ratio <= 1e-12)
    }

    /// Runs pivots until optimal for the current costs.
    fn optimize(&mut self, enter_limit: usize, iters: &mut usize, max_iters: usize) -> LpStatus {
        let mut degenerate = 0;
        loop {
            if *iters >= max_iters {
                return LpStatus::IterLimit;
            }
            match self.step(enter_limit, degenerate >= DEGENERATE_LIMIT) {
                (Step::Done, _) => return LpStatus::Optimal,
                (Step::Unbounded, _) => return LpStatus::Unbounded,
                (Step::Pivoted, degen) => {
                    *iters += 1;
                    degenerate = if degen { degenerate + 1 } else { 0 };
                }
            }
        }
    }
}

/// Solves `problem` with at most `max_iters` pivots over both phases.
///
/// Pricing is Dantzig's rule with lowest-index ties, switching to Bland's
/// rule after [`DEGENERATE_LIMIT`] consecutive degenerate pivots. Optimal
/// solutions are clamped into their bounds.
pub fn solve(problem: &LpProblem, max_iters: usize) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.num_vars();
    let lo: Vec<f64> = problem.bounds.iter().map(|b| b.0).collect();

    // rows: A y ≤ b − A lo, then y_j ≤ hi_j − lo_j
    let mut rows: Vec<(Vec<f64>, f64)> = problem
        .a_ub
        .iter()
        .zip(&problem.b_ub)
        .map(|(a, b)| {
            let shift: f64 = a.iter().zip(&lo).map(|(a, l)| a * l).sum();
            (a.clone(), b - shift)
        })
        .collect();
    for (j, &(l, h)) in problem.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, h - l));
    }
    let m = rows.len();
    let flipped: Vec<usize> = (0..m).filter(|&i| rows[i].1 < 0.0).collect();
    let n_art = flipped.len();
    let width = n + m + n_art + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut art = 0;
    for (i, (a, b)) in rows.iter().enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (v, a) in row.iter_mut().zip(a) {
            *v = sign * a;
        }
        row[n + i] = sign;
        row[width - 1] = sign * b;
        if *b < 0.0 {
            row[n + m + art] = 1.0;
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut t = Tableau {
        rows: m,
        width,
        data,
        basis,
        cost: Vec::with_capacity(width),
    };
    let mut iters = 0;

    if n_art > 0 {
        let mut c1 = vec![0.0; width];
        for v in &mut c1[n + m..n + m + n_art] {
            *v = 1.0;
        }
        t.price(&c1);
        let status = t.optimize(n + m + n_art, &mut iters, max_iters);
        if status == LpStatus::IterLimit {
            return Ok(finish(problem, &t, &lo, LpStatus::IterLimit, iters));
        }
        let infeasibility = -t.cost[width - 1];
        let scale = 1.0 + flipped.iter().map(|&i| rows[i].1.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Ok(finish(problem, &t, &lo, LpStatus::Infeasible, iters));
        }
        // drive zero-valued artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t.at(i, j).abs() > PIVOT_TOL) {
                    t.pivot(i, j);
                }
            }
        }
    }

    let mut c2 = vec![0.0; width];
    c2[..n].copy_from_slice(&problem.c);
    t.price(&c2);
    let status = t.optimize(n + m, &mut iters, max_iters);
    Ok(finish(problem, &t, &lo, status, iters))
}

fn finish(
    problem: &LpProblem,
    t: &Tableau,
    lo: &[f64],
    status: LpStatus,
    iterations: usize,
) -> LpSolution {
    let n = problem.num_vars();
    let mut x = lo.to_vec();
    for i in 0..t.rows {
        let j = t.basis[i];
        if j < n {
            x[j] += t.rhs(i);
        }
    }
    for (v, &(l, h)) in x.iter_mut().zip(&problem.bounds) {
        *v = v.clamp(l, h);
    }
    LpSolution {
        status,
        objective: problem.objective(&x),
        x,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> LpProblem {
        let n = c.len();
        LpProblem {
            c,
            a_ub: a,
            b_ub: b,
            bounds: vec![(0.0, 1.0); n],
        }
    }

    #[test]
    fn minimize_single_variable() {
        let s = solve(&boxed(vec![1.0], vec![], vec![]), 100).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x, vec![0.0]);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn textbook_face() {
        let p = boxed(vec![-1.0, -1.0], vec![vec![1.0, 1.0]], vec![1.0]);
        let s = solve(&p, 100).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x + y ≥ 1.5 written as −x − y ≤ −1.5; minimize x + 2y → x = 1, y = 0.5
        let p = boxed(vec![1.0, 2.0], vec![vec![-1.0, -1.0]], vec![-1.5]);
        let s = solve(&p, 100).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn detects_infeasible() {
        let p = boxed(vec![1.0, 1.0], vec![vec![-1.0, -1.0]], vec![-2.5]);
        assert_eq!(solve(&p, 100).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn shifted_bounds() {
        let p = LpProblem {
            c: vec![1.0, -1.0],
            a_ub: vec![vec![1.0, 1.0]],
            b_ub: vec![0.5],
            bounds: vec![(-2.0, 3.0), (-1.0, 1.0)],
        };
        let s = solve(&p, 100).unwrap();
        // x = −2, y = 1 satisfies x + y ≤ 0.5
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 3.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let p = boxed(vec![-1.0, -1.0], vec![vec![1.0, 1.0]], vec![1.0]);
        assert_eq!(solve(&p, 0).unwrap().status, LpStatus::IterLimit);
    }

    #[test]
    fn rejects_bad_problems() {
        let mut p = boxed(vec![1.0], vec![vec![1.0, 2.0]], vec![1.0]);
        assert!(solve(&p, 10).is_err());
        p = boxed(vec![f64::NAN], vec![], vec![]);
        assert!(solve(&p, 10).is_err());
        p = LpProblem {
            c: vec![1.0],
            a_ub: vec![],
            b_ub: vec![],
            bounds: vec![(1.0, 0.0)],
        };
        assert!(solve(&p, 10).is_err());
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // many constraints through the origin
        let a: Vec<Vec<f64>> = (1..30).map(|k| vec![k as f64, -1.0, 0.5]).collect();
        let p = boxed(vec![-1.0, -0.5, -0.1], a, vec![0.0; 29]);
        let s = solve(&p, 10_000).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(p.max_violation(&s.x) < 1e-8);
    }
}
