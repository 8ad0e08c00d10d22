//! Dense phase-1 simplex for `A x = b, x ≥ 0`.
//!
//! One artificial variable per row starts in the basis and the sum of
//! artificials is minimized. Pivoting follows Bland's rule (lowest-index
//! entering column, lowest-index leaving basic variable among ratio ties), so
//! the method terminates on degenerate problems. Redundant rows are kept; their
//! artificials may stay basic at level zero.
//!
//! At termination `y` (the phase-1 duals) satisfies `Aᵀy ≤ 0` up to the pivot
//! tolerance and `bᵀy` equals the optimal artificial sum. When that sum is
//! positive, `y` is a Farkas certificate: every `x ≥ 0` has `yᵀAx ≤ 0 < bᵀy`.

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Solution {
    /// Nonnegative primal point; satisfies `A x = b` when `objective` is ~0.
    pub x: Vec<f64>,
    /// Optimal sum of artificial variables.
    pub objective: f64,
    /// Dual multipliers, one per row of `A`.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLimit(pub usize);

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(r)) {
                    *o += a * yr;
                }
            }
        }
        out
    }
}

struct Tableau {
    width: usize,
    /// `m` constraint rows then the reduced-cost row; last column is the RHS.
    cells: Vec<f64>,
    basis: Vec<usize>,
    m: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.cells[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.cells[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let factor = self.at(r, pc);
            if factor == 0.0 {
                continue;
            }
            for (v, p) in self.cells[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cells[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }
}

/// Minimize the sum of artificials for `A x = b`, `x ≥ 0`.
pub fn phase_one(a: &DenseMatrix, b: &[f64], max_pivots: usize) -> Result<Phase1Solution, IterationLimit> {
    assert_eq!(a.rows(), b.len(), "row count of A and length of b differ");
    let (m, n) = (a.rows(), a.cols());
    let width = n + m + 1;
    let mut cells = vec![0.0; (m + 1) * width];
    let mut signs = vec![1.0; m];
    for r in 0..m {
        // keep the right-hand side nonnegative
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        signs[r] = sign;
        for c in 0..n {
            cells[r * width + c] = sign * a.get(r, c);
        }
        cells[r * width + n + r] = 1.0;
        cells[r * width + width - 1] = sign * b[r];
    }
    // reduced costs relative to the all-artificial basis
    let obj = m * width;
    for r in 0..m {
        for c in 0..n {
            cells[obj + c] -= cells[r * width + c];
        }
        cells[obj + width - 1] -= cells[r * width + width - 1];
    }
    let mut t = Tableau {
        width,
        cells,
        basis: (n..n + m).collect(),
        m,
    };

    let mut pivots = 0;
    while let Some(pc) = (0..n + m).find(|&c| t.at(m, c) < -PIVOT_TOL) {
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t.at(r, pc);
            if coef <= PIVOT_TOL {
                continue;
            }
            let ratio = t.rhs(r) / coef;
            leave = match leave {
                None => Some((r, ratio)),
                Some((lr, lratio)) => {
                    if ratio < lratio - PIVOT_TOL || (ratio <= lratio + PIVOT_TOL && t.basis[r] < t.basis[lr]) {
                        Some((r, ratio))
                    } else {
                        Some((lr, lratio))
                    }
                }
            };
        }
        // the phase-1 objective is bounded below by zero, so a column with a
        // negative reduced cost always has a positive entry
        let Some((pr, _)) = leave else {
            break;
        };
        if pivots >= max_pivots {
            return Err(IterationLimit(pivots));
        }
        t.pivot(pr, pc);
        pivots += 1;
    }

    let mut x = vec![0.0; n];
    for (r, &var) in t.basis.iter().enumerate() {
        if var < n {
            x[var] = t.rhs(r).max(0.0);
        }
    }
    // reduced cost of artificial i is 1 − y'_i; undo the row sign flip
    let duals = (0..m).map(|i| signs[i] * (1.0 - t.at(m, n + i))).collect();
    Ok(Phase1Solution {
        x,
        objective: -t.at(m, width - 1),
        duals,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    #[test]
    fn feasible_system_returns_a_solution() {
        // x0 + x1 = 1, x1 + x2 = 0.5
        let a = matrix(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        let b = [1.0, 0.5];
        let s = phase_one(&a, &b, 1000).unwrap();
        assert!(s.objective.abs() < 1e-12);
        let ax = a.mul_vec(&s.x);
        assert!(ax.iter().zip(&b).all(|(l, r)| (l - r).abs() < 1e-12));
        assert!(s.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn infeasible_system_yields_farkas_certificate() {
        // x0 + x1 = 1 and x0 + x1 = 2 cannot both hold
        let a = matrix(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let b = [1.0, 2.0];
        let s = phase_one(&a, &b, 1000).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        let aty = a.transpose_mul_vec(&s.duals);
        assert!(aty.iter().all(|&v| v <= 1e-12));
        let by: f64 = b.iter().zip(&s.duals).map(|(x, y)| x * y).sum();
        assert!(by > 0.5);
    }

    #[test]
    fn negative_rhs_is_handled() {
        // −x0 = −0.25, x0 + x1 = 1
        let a = matrix(&[&[-1.0, 0.0], &[1.0, 1.0]]);
        let s = phase_one(&a, &[-0.25, 1.0], 100).unwrap();
        assert!(s.objective.abs() < 1e-12);
        assert!((s.x[0] - 0.25).abs() < 1e-12 && (s.x[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let a = matrix(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        assert_eq!(phase_one(&a, &[1.0, 0.5], 0), Err(IterationLimit(0)));
    }
}
