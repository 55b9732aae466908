use super::problem::{LpProblem, LpSolution, LpStatus};
use crate::Result;

/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-10;
/// Residual phase-one infeasibility tolerated before declaring infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;
const OPTIMALITY_TOL: f64 = 1e-10;
const HARRIS_TOL: f64 = 1e-9;
const RAY_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;

/// How an original variable maps onto nonnegative internal columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// v = lo + y
    Shift { col: usize, lo: f64 },
    /// v = hi - y
    Mirror { col: usize, hi: f64 },
    /// v = y+ - y-
    Split { pos: usize, neg: usize },
    /// lo == hi
    Fixed(f64),
}

struct Tableau {
    m: usize,
    width: usize,
    /// (m + 1) x (width + 1); last row holds reduced costs, last column the rhs.
    t: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * (self.width + 1) + self.width]
    }

    fn set_cost(&mut self, cost: &[f64]) {
        let w = self.width + 1;
        let obj = self.m * w;
        for j in 0..self.width {
            self.t[obj + j] = cost[j];
        }
        self.t[obj + self.width] = 0.0;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[obj + j] -= cb * self.t[i * w + j];
                }
            }
        }
    }

    /// Current objective value of the cost last given to `set_cost`.
    fn value(&self) -> f64 {
        -self.t[self.m * (self.width + 1) + self.width]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width + 1;
        let p = self.t[r * w + q];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + q] = 1.0;
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[i * w + j] -= f * self.t[r * w + j];
            }
            self.t[i * w + q] = 0.0;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn run(&mut self, allowed: &[bool], may_be_unbounded: bool) -> Outcome {
        let mut skipped = vec![false; self.width];
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Outcome::Limit;
            }
            let obj = self.m;
            let Some(q) = (0..self.width).find(|&j| allowed[j] && !skipped[j] && self.at(obj, j) < -OPTIMALITY_TOL)
            else {
                return Outcome::Optimal;
            };
            // Harris two-pass ratio test: bound the step with rhs relaxed by the
            // feasibility tolerance, then take the largest pivot within it.
            let mut theta = f64::INFINITY;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a > PIVOT_TOL {
                    theta = theta.min((self.rhs(i).max(0.0) + HARRIS_TOL) / a);
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a <= PIVOT_TOL || self.rhs(i).max(0.0) / a > theta {
                    continue;
                }
                best = match best {
                    Some((bi, ba)) if ba > a || ba == a && self.basis[bi] < self.basis[i] => Some((bi, ba)),
                    _ => Some((i, a)),
                };
            }
            match best {
                // A ray needs a clearly negative reduced cost; otherwise the
                // column is rounding noise and is passed over until the next pivot.
                None if may_be_unbounded && self.at(obj, q) < -RAY_TOL => return Outcome::Unbounded,
                None => skipped[q] = true,
                Some((r, _)) => {
                    // The Harris test lets rhs dip to -HARRIS_TOL; dividing that by a
                    // small pivot would magnify it, so the pivot row restarts at zero.
                    if self.rhs(r) < 0.0 {
                        let w = self.width;
                        self.t[r * (w + 1) + w] = 0.0;
                    }
                    self.pivot(r, q);
                    skipped.fill(false);
                }
            }
        }
    }
}

fn solution(status: LpStatus, n: usize, iterations: usize) -> LpSolution {
    let value = match status {
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => f64::NEG_INFINITY,
        _ => f64::NAN,
    };
    LpSolution { status, value, x: vec![f64::NAN; n], iterations }
}

/// Solve `p`. Infeasibility and unboundedness are reported through the status;
/// only malformed problems produce an error.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    if p.lower.iter().zip(&p.upper).any(|(l, u)| l > u) {
        return Ok(solution(LpStatus::Infeasible, n, 0));
    }

    // Internal columns y >= 0 and the extra rows for two-sided bounds.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (p.lower[j], p.upper[j]);
        let map = if lo == hi {
            VarMap::Fixed(lo)
        } else if lo.is_finite() {
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
            VarMap::Shift { col: ncols - 1, lo }
        } else if hi.is_finite() {
            ncols += 1;
            VarMap::Mirror { col: ncols - 1, hi }
        } else {
            ncols += 2;
            VarMap::Split { pos: ncols - 2, neg: ncols - 1 }
        };
        maps.push(map);
    }

    let m = p.num_rows() + bound_rows.len();
    let mut a = vec![vec![0.0; ncols]; m];
    let mut b = vec![0.0; m];
    for (i, (row, &rhs)) in p.rows.iter().zip(&p.rhs).enumerate() {
        b[i] = rhs;
        for (j, &coef) in row.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    a[i][col] += coef;
                    b[i] -= coef * lo;
                }
                VarMap::Mirror { col, hi } => {
                    a[i][col] -= coef;
                    b[i] -= coef * hi;
                }
                VarMap::Split { pos, neg } => {
                    a[i][pos] += coef;
                    a[i][neg] -= coef;
                }
                VarMap::Fixed(v) => b[i] -= coef * v,
            }
        }
    }
    for (k, &(col, width)) in bound_rows.iter().enumerate() {
        let i = p.num_rows() + k;
        a[i][col] = 1.0;
        b[i] = width;
    }
    let mut cost = vec![0.0; ncols];
    for (j, &c) in p.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
            VarMap::Fixed(_) => {}
        }
    }

    // Columns: structural | slacks | artificials (rows with negative rhs).
    let needs_art: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let nart = needs_art.len();
    let width = ncols + m + nart;
    let w = width + 1;
    let mut t = vec![0.0; (m + 1) * w];
    let mut basis = vec![0; m];
    let mut art_k = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..ncols {
            t[i * w + j] = sign * a[i][j];
        }
        t[i * w + ncols + i] = sign;
        t[i * w + width] = sign * b[i];
        if sign < 0.0 {
            let col = ncols + m + art_k;
            t[i * w + col] = 1.0;
            basis[i] = col;
            art_k += 1;
        } else {
            basis[i] = ncols + i;
        }
    }
    let mut tab = Tableau { m, width, t, basis, pivots: 0 };

    if nart > 0 {
        let mut c1 = vec![0.0; width];
        for c in c1.iter_mut().skip(ncols + m) {
            *c = 1.0;
        }
        tab.set_cost(&c1);
        // phase one is bounded below by zero
        if let Outcome::Limit = tab.run(&vec![true; width], false) {
            return Ok(solution(LpStatus::IterationLimit, n, tab.pivots));
        }
        let scale = 1.0 + b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if tab.value() > FEASIBILITY_TOL * scale {
            return Ok(solution(LpStatus::Infeasible, n, tab.pivots));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < ncols + m {
                continue;
            }
            if let Some(q) = (0..ncols + m).find(|&j| tab.at(r, j).abs() > PIVOT_TOL) {
                tab.pivot(r, q);
            }
        }
    }

    let mut c2 = vec![0.0; width];
    c2[..ncols].copy_from_slice(&cost);
    tab.set_cost(&c2);
    let allowed: Vec<bool> = (0..width).map(|j| j < ncols + m).collect();
    match tab.run(&allowed, true) {
        Outcome::Limit => return Ok(solution(LpStatus::IterationLimit, n, tab.pivots)),
        Outcome::Unbounded => return Ok(solution(LpStatus::Unbounded, n, tab.pivots)),
        Outcome::Optimal => {}
    }

    let mut y = vec![0.0; width];
    for (i, &col) in tab.basis.iter().enumerate() {
        y[col] = tab.rhs(i).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .enumerate()
        .map(|(j, map)| {
            let v = match *map {
                VarMap::Shift { col, lo } => lo + y[col],
                VarMap::Mirror { col, hi } => hi - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
                VarMap::Fixed(v) => v,
            };
            v.clamp(p.lower[j], p.upper[j])
        })
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: p.objective_value(&x),
        x,
        iterations: tab.pivots,
    })
}
