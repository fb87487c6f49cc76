//! Dense two-phase simplex for the small linear programs behind the
//! auxiliary-array design.
//!
//! [`LinearProgram`] describes `min cᵀx  s.t.  Gx ≤ h, Ex = e` with free `x`.
//! It is solved through its dual, which is in standard form and has one row
//! per primal variable; the primal optimum is read back as the simplex
//! multipliers of the dual.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const HARRIS_SLACK: f64 = 1e-10;
const REFACTOR_EVERY: usize = 32;
const MAX_PIVOTS: usize = 200_000;
/// Degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 64;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    num_vars: usize,
    cost: Vec<f64>,
    ineq: Vec<(Vec<f64>, f64)>,
    eq: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    pub fn minimize(cost: Vec<f64>) -> Self {
        Self {
            num_vars: cost.len(),
            cost,
            ..Default::default()
        }
    }

    /// Adds `row · x ≤ rhs`.
    pub fn less_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.num_vars);
        self.ineq.push((row, rhs));
        self
    }

    /// Adds `row · x = rhs`.
    pub fn equal(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.num_vars);
        self.eq.push((row, rhs));
        self
    }

    pub fn num_constraints(&self) -> usize {
        self.ineq.len() + self.eq.len()
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        self.solve_warm(None).map(|(x, _)| x)
    }

    /// Solves starting from the final basis of an earlier solve of a program
    /// that had the same variables and a prefix of these constraints.
    pub fn solve_warm(&self, warm: Option<&WarmStart>) -> Result<(Vec<f64>, WarmStart)> {
        // Dual: min hᵀλ + eᵀμ⁺ - eᵀμ⁻  s.t.  Gᵀλ + Eᵀμ⁺ - Eᵀμ⁻ = -c,  λ, μ± ≥ 0.
        let n = self.num_vars;
        let base = self.ineq.len();
        let cols = base + 2 * self.eq.len();
        let mut a = vec![vec![0.0; cols]; n];
        let mut cost = Vec::with_capacity(cols);
        for (j, (row, rhs)) in self.ineq.iter().enumerate() {
            for i in 0..n {
                a[i][j] = row[i];
            }
            cost.push(*rhs);
        }
        for (k, (row, rhs)) in self.eq.iter().enumerate() {
            for i in 0..n {
                a[i][base + 2 * k] = row[i];
                a[i][base + 2 * k + 1] = -row[i];
            }
            cost.push(*rhs);
            cost.push(-*rhs);
        }
        let start = warm
            .filter(|w| w.slots.len() == n && w.num_eq == self.eq.len())
            .and_then(|w| {
                w.slots
                    .iter()
                    .map(|slot| match *slot {
                        Slot::Ineq(i) => (i < base).then_some(i),
                        Slot::Eq(k, neg) => Some(base + 2 * k + neg as usize),
                        Slot::Artificial(r) => Some(cols + r),
                    })
                    .collect::<Option<Vec<usize>>>()
            });
        let b: Vec<f64> = self.cost.iter().map(|c| -c).collect();
        match standard_form(a, b, cost, start)? {
            Outcome::Optimal { multipliers, basis } => {
                let slots = basis
                    .into_iter()
                    .map(|j| {
                        if j < base {
                            Slot::Ineq(j)
                        } else if j < cols {
                            Slot::Eq((j - base) / 2, (j - base) % 2 == 1)
                        } else {
                            Slot::Artificial(j - cols)
                        }
                    })
                    .collect();
                Ok((multipliers, WarmStart { slots, num_eq: self.eq.len() }))
            }
            Outcome::Infeasible => Err(Error::Lp("primal problem is unbounded".into())),
            Outcome::Unbounded => Err(Error::Lp("primal problem is infeasible".into())),
        }
    }
}

/// Final basis of a solve, valid for later programs that only append
/// inequality constraints.
#[derive(Debug, Clone)]
pub struct WarmStart {
    slots: Vec<Slot>,
    num_eq: usize,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Ineq(usize),
    Eq(usize, bool),
    Artificial(usize),
}

enum Outcome {
    Optimal { multipliers: Vec<f64>, basis: Vec<usize> },
    Infeasible,
    Unbounded,
}

/// Revised simplex on `[A | I]` with an explicit basis inverse, updated in
/// place and rebuilt from scratch every few pivots.
struct Revised {
    /// Columns of `[A | I]`.
    cols: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    inv: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl Revised {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m();
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|i| self.basis.iter().map(|&j| self.cols[j][i]).collect())
            .collect();
        let mut inv: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|k| (i == k) as u8 as f64).collect())
            .collect();
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .expect("non-empty");
            if a[piv][c].abs() < 1e-14 {
                return Err(Error::Lp("singular basis".into()));
            }
            a.swap(c, piv);
            inv.swap(c, piv);
            let p = a[c][c];
            for v in a[c].iter_mut() {
                *v /= p;
            }
            for v in inv[c].iter_mut() {
                *v /= p;
            }
            for r in 0..m {
                if r != c && a[r][c] != 0.0 {
                    let f = a[r][c];
                    for k in 0..m {
                        a[r][k] -= f * a[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                }
            }
        }
        self.inv = inv;
        Ok(())
    }

    fn solve_col(&self, col: &[f64]) -> Vec<f64> {
        self.inv
            .iter()
            .map(|row| row.iter().zip(col).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn values(&self) -> Vec<f64> {
        self.solve_col(&self.b)
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m();
        (0..m)
            .map(|k| (0..m).map(|i| cost[self.basis[i]] * self.inv[i][k]).sum())
            .collect()
    }

    /// Replaces basis row `r` by a column with direction `d = B⁻¹a`.
    fn update(&mut self, r: usize, d: &[f64]) {
        let p = d[r];
        for v in self.inv[r].iter_mut() {
            *v /= p;
        }
        let pivot = self.inv[r].clone();
        for (i, row) in self.inv.iter_mut().enumerate() {
            if i != r && d[i] != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v -= d[i] * pv;
                }
            }
        }
    }

    /// Primal simplex iterations; columns `>= allowed` never enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        let scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-9 * scale;
        let mut stall = 0;
        let mut since_refactor = usize::MAX;
        for _ in 0..MAX_PIVOTS {
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            let y = self.duals(cost);
            let x = self.values();
            let mut in_basis = vec![false; self.cols.len()];
            self.basis.iter().for_each(|&j| in_basis[j] = true);
            let mut candidates: Vec<(usize, f64)> = (0..allowed)
                .filter(|&j| !in_basis[j])
                .map(|j| (j, cost[j] - self.cols[j].iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()))
                .filter(|&(_, r)| r < -tol)
                .collect();
            if stall > STALL_LIMIT {
                candidates.sort_by_key(|c| c.0);
            } else {
                let key = |c: &(usize, f64)| c.1 / self.norms[c.0];
                candidates.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.0.cmp(&b.0)));
            }
            let mut pivot = None;
            for &(c, r) in &candidates {
                let d = self.solve_col(&self.cols[c]);
                let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let ptol = PIVOT_TOL.max(1e-9 * dmax);
                // Harris two-pass ratio test: bound the step with a small
                // primal slack, then take the largest pivot among the rows
                // that block within it.
                let bound = (0..self.m())
                    .filter(|&i| d[i] > ptol)
                    .map(|i| (x[i].max(0.0) + HARRIS_SLACK) / d[i])
                    .fold(f64::INFINITY, f64::min);
                if bound.is_infinite() {
                    if r < -1e-6 * scale && d.iter().all(|&v| v <= PIVOT_TOL) {
                        return Ok(false);
                    }
                    // Round-off: the column only looks attractive.
                    continue;
                }
                let blocking = (0..self.m()).filter(|&i| d[i] > ptol && x[i].max(0.0) / d[i] <= bound);
                let row = if stall > STALL_LIMIT {
                    blocking.min_by_key(|&i| self.basis[i])
                } else {
                    blocking.max_by(|&i, &j| d[i].total_cmp(&d[j]).then(j.cmp(&i)))
                }
                .expect("bound comes from a blocking row");
                pivot = Some((c, row, d));
                break;
            }
            let Some((c, row, d)) = pivot else {
                return Ok(true);
            };
            let ratio = x[row].max(0.0) / d[row];
            stall = if ratio <= 1e-12 { stall + 1 } else { 0 };
            self.basis[row] = c;
            self.update(row, &d);
            since_refactor += 1;
        }
        Err(Error::Lp("pivot limit reached".into()))
    }
}

/// `min cᵀy  s.t.  Ay = b, y ≥ 0`, returning the simplex multipliers `π`
/// with `Aᵀπ ≤ c` at the optimum.
fn standard_form(a: Vec<Vec<f64>>, mut b: Vec<f64>, cost: Vec<f64>, start: Option<Vec<usize>>) -> Result<Outcome> {
    let m = a.len();
    let n = cost.len();
    let mut sign = vec![1.0; m];
    for i in 0..m {
        if b[i] < 0.0 {
            sign[i] = -1.0;
            b[i] = -b[i];
        }
    }
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| sign[i] * a[i][j]).collect())
        .collect();
    cols.extend((0..m).map(|k| (0..m).map(|i| (i == k) as u8 as f64).collect()));
    let norms = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
        .collect();
    let mut lp = Revised {
        norms,
        cols,
        b,
        basis: (n..n + m).collect(),
        inv: Vec::new(),
    };

    let bscale = lp.b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let warm = start.is_some_and(|basis| {
        lp.basis = basis;
        lp.refactor().is_ok()
            && lp.values().iter().zip(&lp.basis).all(|(&x, &j)| {
                x >= -1e-9 * bscale && (j < n || x <= 1e-9 * bscale)
            })
    });
    if !warm {
        // Phase 1: drive the artificials out.
        lp.basis = (n..n + m).collect();
        let mut phase1 = vec![0.0; n + m];
        phase1[n..].iter_mut().for_each(|c| *c = 1.0);
        lp.optimize(&phase1, n + m)?;
        lp.refactor()?;
        let x = lp.values();
        let infeas: f64 = (0..m).filter(|&i| lp.basis[i] >= n).map(|i| x[i].max(0.0)).sum();
        if infeas > 1e-9 * bscale {
            return Ok(Outcome::Infeasible);
        }
    }
    for r in 0..m {
        if lp.basis[r] < n {
            continue;
        }
        let candidate = (0..n).find(|j| {
            !lp.basis.contains(j)
                && lp.inv[r].iter().zip(&lp.cols[*j]).map(|(a, b)| a * b).sum::<f64>().abs() > 1e-9
        });
        if let Some(j) = candidate {
            lp.basis[r] = j;
            lp.refactor()?;
        }
    }

    let mut full_cost = cost;
    full_cost.extend(std::iter::repeat_n(0.0, m));
    if !lp.optimize(&full_cost, n)? {
        return Ok(Outcome::Unbounded);
    }
    lp.refactor()?;
    let y = lp.duals(&full_cost);
    Ok(Outcome::Optimal {
        multipliers: y.iter().zip(&sign).map(|(v, s)| v * s).collect(),
        basis: lp.basis,
    })
}
