//! Dense tableau simplex for bounded LPs of the form
//!
//! ```text
//! max c'x  s.t.  A x <= b,  0 <= x <= u
//! ```
//!
//! with `b >= 0`, so the all-slack basis with every structural variable at
//! its lower bound is feasible and no phase one is needed. Upper bounds are
//! handled implicitly: a nonbasic variable sits at either bound, and the
//! ratio test includes bound flips.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone)]
pub struct BoundedLp {
    pub objective: Vec<f64>,
    /// Dense rows over the structural variables.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Upper bounds; `f64::INFINITY` for none.
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptimum {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows by `n` columns, row-major, holding `B^-1 A`.
    t: Vec<f64>,
    /// Reduced costs `c_j - c_B B^-1 a_j`.
    d: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    upper: Vec<f64>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.n + j]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let p = self.t[r * n + q];
        for v in &mut self.t[r * n..(r + 1) * n] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * n..(r + 1) * n].to_vec();
        let nz: Vec<usize> = (0..n).filter(|&j| pivot_row[j] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * pivot_row[j];
            }
        }
    }
}

pub fn solve(lp: &BoundedLp, max_iterations: usize) -> Result<LpOptimum> {
    let ns = lp.objective.len();
    let m = lp.rows.len();
    let n = ns + m;
    debug_assert!(lp.rhs.iter().all(|&b| b >= 0.0));

    let mut t = vec![0.0; m * n];
    for (i, row) in lp.rows.iter().enumerate() {
        t[i * n..i * n + ns].copy_from_slice(row);
        t[i * n + ns + i] = 1.0;
    }
    let mut d = vec![0.0; n];
    d[..ns].copy_from_slice(&lp.objective);
    let mut upper = lp.upper.clone();
    upper.extend(std::iter::repeat_n(f64::INFINITY, m));
    let mut status = vec![Status::AtLower; n];
    for s in &mut status[ns..] {
        *s = Status::Basic;
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        d,
        beta: lp.rhs.clone(),
        basis: (ns..n).collect(),
        status,
        upper,
    };

    let mut stalled = 0usize;
    for iteration in 0..max_iterations {
        let bland = stalled >= STALL_LIMIT;
        let Some((q, dir)) = entering(&tab, bland) else {
            return Ok(extract(&tab, &lp.objective, iteration));
        };

        // Unit step of the entering variable in direction `dir` moves
        // basic variable i by -dir * alpha_i.
        let mut step = tab.upper[q];
        let mut leave: Option<(usize, bool)> = None;
        for i in 0..m {
            let delta = -dir * tab.at(i, q);
            let b = tab.basis[i];
            let limit = if delta < -EPS {
                (tab.beta[i].max(0.0) / -delta, false)
            } else if delta > EPS && tab.upper[b].is_finite() {
                ((tab.upper[b] - tab.beta[i]).max(0.0) / delta, true)
            } else {
                continue;
            };
            let better = if limit.0 < step - EPS {
                true
            } else if limit.0 <= step + EPS {
                match leave {
                    None => true,
                    Some((r, _)) => bland && b < tab.basis[r],
                }
            } else {
                false
            };
            if better {
                step = limit.0;
                leave = Some((i, limit.1));
            }
        }
        if !step.is_finite() {
            return Err(Error::UnboundedLp);
        }

        let gain = step * tab.d[q].abs();
        for i in 0..m {
            let a = tab.at(i, q);
            if a != 0.0 {
                tab.beta[i] -= dir * step * a;
            }
        }
        stalled = if gain > EPS { 0 } else { stalled + 1 };

        let entering_value = if dir > 0.0 { step } else { tab.upper[q] - step };
        match leave {
            None => {
                tab.status[q] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
            }
            Some((r, to_upper)) => {
                let b = tab.basis[r];
                tab.status[b] = if to_upper { Status::AtUpper } else { Status::AtLower };
                tab.pivot(r, q);
                tab.basis[r] = q;
                tab.status[q] = Status::Basic;
                tab.beta[r] = entering_value;
            }
        }
    }
    Err(Error::SolverIterationLimit(max_iterations))
}

fn entering(tab: &Tableau, bland: bool) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..tab.n {
        let dj = tab.d[j];
        let dir = match tab.status[j] {
            Status::AtLower if dj > EPS => 1.0,
            Status::AtUpper if dj < -EPS => -1.0,
            _ => continue,
        };
        if bland {
            return Some((j, dir));
        }
        if best.is_none_or(|(_, _, score)| dj.abs() > score) {
            best = Some((j, dir, dj.abs()));
        }
    }
    best.map(|(j, dir, _)| (j, dir))
}

fn extract(tab: &Tableau, c: &[f64], iterations: usize) -> LpOptimum {
    let ns = c.len();
    let mut x = vec![0.0; ns];
    for (j, xj) in x.iter_mut().enumerate() {
        if tab.status[j] == Status::AtUpper {
            *xj = tab.upper[j];
        }
    }
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < ns {
            x[b] = tab.beta[i];
        }
    }
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = xj.clamp(0.0, tab.upper[j]);
    }
    let objective = c.iter().zip(&x).map(|(c, x)| c * x).fold(0.0, |s, v| s + v);
    LpOptimum {
        x,
        objective,
        iterations,
    }
}
