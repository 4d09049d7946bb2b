//! Dense two-phase simplex for the tiny linear programs that appear in the
//! worst-case coupling bound.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::{Error, Result};

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

struct Tableau {
    /// `rows + 1` rows; the last one is the objective (reduced costs, value).
    t: Matrix,
    basis: Vec<usize>,
    rows: usize,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[(r, self.width)]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[(r, c)];
        for v in self.t.row_mut(r) {
            *v /= p;
        }
        let pivot_row = self.t.row(r).to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[(i, c)];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.t.row_mut(i).iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes the objective row over columns `< allowed` using Bland's rule.
    fn run(&mut self, allowed: usize) -> Result<()> {
        let obj = self.rows;
        loop {
            let Some(enter) = (0..allowed).find(|&c| self.t[(obj, c)] < -EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.t[(r, enter)];
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best - EPS || (ratio <= best + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::LpUnbounded);
            };
            self.pivot(r, enter);
        }
    }
}

/// Maximizes `c . x` subject to `a x = b`, `x >= 0`.
pub fn maximize(c: &[f64], a: &Matrix, b: &[f64]) -> Result<LpSolution> {
    let (m, n) = (a.rows(), a.cols());
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }
    let width = n + m;
    let mut t = Matrix::zeros(m + 1, width + 1);
    for r in 0..m {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(r, j)] = sign * a[(r, j)];
        }
        t[(r, n + r)] = 1.0;
        t[(r, width)] = sign * b[r];
    }
    // Phase one: maximize minus the sum of artificials.
    for r in 0..m {
        for j in 0..=width {
            if j < n || j == width {
                let v = t[(r, j)];
                t[(m, j)] -= v;
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        rows: m,
        width,
    };
    tab.run(width)?;
    if tab.t[(m, width)] < -1e-9 {
        return Err(Error::LpInfeasible);
    }
    // Drive remaining artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| crate::math::abs(tab.t[(r, j)]) > EPS) {
                tab.pivot(r, j);
            }
        }
    }
    // Phase two objective.
    for j in 0..=width {
        tab.t[(m, j)] = 0.0;
    }
    for (j, cj) in c.iter().enumerate() {
        tab.t[(m, j)] = -cj;
    }
    for r in 0..m {
        let bj = tab.basis[r];
        if bj < n && c[bj] != 0.0 {
            let f = tab.t[(m, bj)];
            let row = tab.t.row(r).to_vec();
            for (v, rv) in tab.t.row_mut(m).iter_mut().zip(&row) {
                *v -= f * rv;
            }
        }
    }
    // Artificials stuck in the basis sit on redundant rows; keep them at zero
    // by forbidding re-entry (only original columns may enter).
    tab.run(n)?;
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 (slacks added)
        let a = Matrix::from_rows(&[
            [1.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 1.0, 0.0],
            [3.0, 2.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let sol = maximize(&[3.0, 5.0, 0.0, 0.0, 0.0], &a, &[4.0, 12.0, 18.0]).unwrap();
        assert!((sol.value - 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_transport_constraints() {
        // 2x2 coupling of (0.3, 0.7) with itself, maximize off-diagonal mass
        let a = Matrix::from_rows(&[
            [1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
        ])
        .unwrap();
        let sol = maximize(&[0.0, 1.0, 1.0, 0.0], &a, &[0.3, 0.7, 0.3, 0.7]).unwrap();
        assert!((sol.value - 0.6).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert_eq!(maximize(&[1.0, 0.0], &a, &[-1.0]), Err(Error::LpInfeasible));
        let a = Matrix::from_rows(&[[1.0, -1.0]]).unwrap();
        assert_eq!(maximize(&[1.0, 0.0], &a, &[1.0]), Err(Error::LpUnbounded));
    }
}
