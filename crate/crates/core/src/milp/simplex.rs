//! Dense bounded-variable revised simplex.
//!
//! Minimises `c'x` subject to `Ax = b`, `l <= x <= u`, with the basis
//! inverse kept explicitly and updated per pivot. Dantzig pricing with a
//! fallback to Bland's rule after a stretch of degenerate pivots prevents
//! cycling. Instances here are small (a two-day horizon is ~700 columns),
//! so dense linear algebra is adequate.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value (meaningful only when optimal).
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Equality-form LP with box bounds on every variable. Constraint
/// columns are stored sparsely (our columns have at most four nonzeros);
/// the basis inverse stays dense.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Sparse columns as (row, value) pairs.
    pub cols: Vec<Vec<(u32, f64)>>,
    pub rhs: Vec<f64>,
    pub obj: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// Builds sparse columns from dense ones.
    pub fn from_dense(
        dense_cols: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        obj: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Self {
        let n_rows = rhs.len();
        let cols = dense_cols
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .map(|(r, v)| (r as u32, v))
                    .collect()
            })
            .collect::<Vec<Vec<(u32, f64)>>>();
        let n_cols = cols.len();
        Self { n_rows, n_cols, cols, rhs, obj, lower, upper }
    }
}

const RCOST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const STALL_LIMIT: usize = 400;
const MAX_ITERS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau<'a> {
    p: &'a LpProblem,
    lower: &'a [f64],
    upper: &'a [f64],
    /// Phase-1 artificial column signs (empty in a hinted start).
    art_sign: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    binv: Vec<f64>, // row-major m x m
    x_basic: Vec<f64>,
}

impl<'a> Tableau<'a> {
    fn m(&self) -> usize {
        self.p.n_rows
    }

    fn total_cols(&self) -> usize {
        self.p.n_cols + self.art_sign.len()
    }

    fn lower_of(&self, col: usize) -> f64 {
        if col < self.p.n_cols {
            self.lower[col]
        } else {
            0.0
        }
    }

    fn upper_of(&self, col: usize, art_fixed: bool) -> f64 {
        if col < self.p.n_cols {
            self.upper[col]
        } else if art_fixed {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn nonbasic_value(&self, col: usize, art_fixed: bool) -> f64 {
        match self.status[col] {
            VarStatus::AtLower => self.lower_of(col),
            VarStatus::AtUpper => {
                let u = self.upper_of(col, art_fixed);
                if u.is_finite() {
                    u
                } else {
                    self.lower_of(col)
                }
            }
            VarStatus::Basic(r) => self.x_basic[r],
        }
    }

    /// Recomputes the basic values from the nonbasic bound values.
    fn recompute_basics(&mut self, art_fixed: bool) {
        let m = self.m();
        let mut resid = self.p.rhs.clone();
        for col in 0..self.total_cols() {
            if matches!(self.status[col], VarStatus::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(col, art_fixed);
            if v != 0.0 {
                if col < self.p.n_cols {
                    for &(row, a) in &self.p.cols[col] {
                        resid[row as usize] -= a * v;
                    }
                } else {
                    resid[col - self.p.n_cols] -= self.art_sign[col - self.p.n_cols] * v;
                }
            }
        }
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i * m + k] * resid[k];
            }
            self.x_basic[i] = acc;
        }
    }

    /// Rebuilds the dense basis inverse by Gauss-Jordan elimination.
    fn refactorize(&mut self) -> Result<()> {
        let m = self.m();
        let mut a = vec![0.0; m * m]; // basis matrix, row-major
        for (j, &col) in self.basis.iter().enumerate() {
            if col < self.p.n_cols {
                for &(row, v) in &self.p.cols[col] {
                    a[row as usize * m + j] = v;
                }
            } else {
                let row = col - self.p.n_cols;
                a[row * m + j] = self.art_sign[row];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            // Partial pivoting.
            let mut best = k;
            let mut best_abs = a[k * m + k].abs();
            for r in (k + 1)..m {
                let v = a[r * m + k].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs < 1e-12 {
                return Err(CoreError::Solver("singular basis during refactorisation".into()));
            }
            if best != k {
                for c in 0..m {
                    a.swap(k * m + c, best * m + c);
                    inv.swap(k * m + c, best * m + c);
                }
            }
            let piv = a[k * m + k];
            for c in 0..m {
                a[k * m + c] /= piv;
                inv[k * m + c] /= piv;
            }
            for r in 0..m {
                if r != k {
                    let f = a[r * m + k];
                    if f != 0.0 {
                        for c in 0..m {
                            a[r * m + c] -= f * a[k * m + c];
                            inv[r * m + c] -= f * inv[k * m + c];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        Ok(())
    }

    /// `y = c_B' B^-1` for the given objective.
    fn duals(&self, obj: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (k, &col) in self.basis.iter().enumerate() {
            let c = obj(col);
            if c != 0.0 {
                for i in 0..m {
                    y[i] += c * self.binv[k * m + i];
                }
            }
        }
        y
    }

    /// `d = B^-1 A_q`.
    fn ftran(&self, col: usize) -> Vec<f64> {
        let m = self.m();
        let mut d = vec![0.0; m];
        if col < self.p.n_cols {
            for &(row, v) in &self.p.cols[col] {
                let k = row as usize;
                for i in 0..m {
                    d[i] += self.binv[i * m + k] * v;
                }
            }
        } else {
            let row = col - self.p.n_cols;
            let s = self.art_sign[row];
            for i in 0..m {
                d[i] = self.binv[i * m + row] * s;
            }
        }
        d
    }

    /// Runs the simplex loop under the given objective until optimality.
    fn optimize(&mut self, obj: &dyn Fn(usize) -> f64, art_fixed: bool) -> Result<()> {
        let m = self.m();
        let mut bland = false;
        let mut stalled = 0usize;
        let mut since_refactor = 0usize;
        for _iter in 0..MAX_ITERS {
            let y = self.duals(obj);
            // Pricing: pick the entering column.
            let mut entering: Option<(usize, f64)> = None;
            for col in 0..self.total_cols() {
                let (lo, up) = (self.lower_of(col), self.upper_of(col, art_fixed));
                if up - lo <= 0.0 {
                    continue;
                }
                let dir_ok = match self.status[col] {
                    VarStatus::Basic(_) => continue,
                    VarStatus::AtLower => 1.0,
                    VarStatus::AtUpper => -1.0,
                };
                let mut r = obj(col);
                if col < self.p.n_cols {
                    for &(row, v) in &self.p.cols[col] {
                        r -= y[row as usize] * v;
                    }
                } else {
                    r -= y[col - self.p.n_cols] * self.art_sign[col - self.p.n_cols];
                }
                let viol = -dir_ok * r; // positive when improving
                if viol > RCOST_TOL {
                    if bland {
                        entering = Some((col, viol));
                        break;
                    }
                    match entering {
                        Some((_, best)) if best >= viol => {}
                        _ => entering = Some((col, viol)),
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(()); // optimal for this objective
            };

            let sigma = match self.status[q] {
                VarStatus::AtLower => 1.0,
                VarStatus::AtUpper => -1.0,
                VarStatus::Basic(_) => unreachable!(),
            };
            let d = self.ftran(q);

            // Ratio test: smallest step among basic-variable bound hits and
            // the entering variable's own bound flip. Ties between basic
            // rows prefer the larger |pivot| for stability.
            let mut t_max = self.upper_of(q, art_fixed) - self.lower_of(q); // bound flip
            let mut leaving: Option<(usize, bool)> = None; // (row, hits_upper)
            for i in 0..m {
                let delta = sigma * d[i];
                let bi = self.basis[i];
                let candidate = if delta > PIVOT_TOL {
                    Some((((self.x_basic[i] - self.lower_of(bi)) / delta).max(0.0), false))
                } else if delta < -PIVOT_TOL {
                    let ub = self.upper_of(bi, art_fixed);
                    ub.is_finite().then(|| (((ub - self.x_basic[i]) / -delta).max(0.0), true))
                } else {
                    None
                };
                if let Some((t, hits_upper)) = candidate {
                    let better = t < t_max - 1e-12;
                    let tied = (t - t_max).abs() <= 1e-12;
                    let wins_tie = tied
                        && leaving.map_or(true, |(r, _)| d[i].abs() > d[r].abs());
                    if better || wins_tie {
                        t_max = t.min(t_max);
                        leaving = Some((i, hits_upper));
                    }
                }
            }
            if t_max.is_infinite() {
                return Err(CoreError::Solver("unbounded direction".into()));
            }

            // Degenerate-stall bookkeeping drives the Bland fallback.
            if t_max <= 1e-12 {
                stalled += 1;
                if stalled > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stalled = 0;
                bland = false;
            }

            // Apply the step to the basic values.
            if t_max > 0.0 {
                for i in 0..m {
                    self.x_basic[i] -= sigma * t_max * d[i];
                }
            }
            match leaving {
                None => {
                    // Bound flip: q moves to its other bound, basis unchanged.
                    self.status[q] = match self.status[q] {
                        VarStatus::AtLower => VarStatus::AtUpper,
                        VarStatus::AtUpper => VarStatus::AtLower,
                        VarStatus::Basic(_) => unreachable!(),
                    };
                }
                Some((r, hits_upper)) => {
                    let entering_value = match self.status[q] {
                        VarStatus::AtLower => self.lower_of(q) + t_max,
                        VarStatus::AtUpper => self.upper_of(q, art_fixed) - t_max,
                        VarStatus::Basic(_) => unreachable!(),
                    };
                    let old = self.basis[r];
                    self.status[old] =
                        if hits_upper { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.basis[r] = q;
                    self.status[q] = VarStatus::Basic(r);
                    self.x_basic[r] = entering_value;
                    // Rank-one update of the explicit inverse.
                    let piv = d[r];
                    if piv.abs() < 1e-11 {
                        self.refactorize()?;
                        self.recompute_basics(art_fixed);
                    } else {
                        for c in 0..m {
                            self.binv[r * m + c] /= piv;
                        }
                        for i in 0..m {
                            if i != r {
                                let f = d[i];
                                if f != 0.0 {
                                    for c in 0..m {
                                        self.binv[i * m + c] -= f * self.binv[r * m + c];
                                    }
                                }
                            }
                        }
                        since_refactor += 1;
                        if since_refactor >= 256 {
                            self.refactorize()?;
                            self.recompute_basics(art_fixed);
                            since_refactor = 0;
                        }
                    }
                }
            }
        }
        Err(CoreError::Solver("simplex iteration limit exceeded".into()))
    }

    fn extract(&self, art_fixed: bool) -> Vec<f64> {
        (0..self.p.n_cols).map(|c| self.nonbasic_value(c, art_fixed)).collect()
    }
}

/// Solves a bounded LP, optionally with per-call bound overrides and a
/// starting basis hint (one column per row). An infeasible hint silently
/// falls back to the artificial-variable phase 1.
pub fn solve_bounded(
    p: &LpProblem,
    lower: &[f64],
    upper: &[f64],
    basis_hint: Option<&[usize]>,
) -> Result<LpSolution> {
    debug_assert_eq!(lower.len(), p.n_cols);
    debug_assert_eq!(upper.len(), p.n_cols);
    for c in 0..p.n_cols {
        if lower[c] > upper[c] + 1e-12 {
            return Ok(LpSolution { status: LpStatus::Infeasible, objective: 0.0, x: vec![] });
        }
    }

    // Hinted warm start.
    if let Some(hint) = basis_hint {
        if hint.len() == p.n_rows {
            let mut t = Tableau {
                p,
                lower,
                upper,
                art_sign: Vec::new(),
                status: vec![VarStatus::AtLower; p.n_cols],
                basis: hint.to_vec(),
                binv: vec![0.0; p.n_rows * p.n_rows],
                x_basic: vec![0.0; p.n_rows],
            };
            for (row, &col) in t.basis.clone().iter().enumerate() {
                t.status[col] = VarStatus::Basic(row);
            }
            if t.refactorize().is_ok() {
                t.recompute_basics(true);
                let feasible = (0..p.n_rows).all(|i| {
                    let bi = t.basis[i];
                    t.x_basic[i] >= t.lower_of(bi) - FEAS_TOL
                        && t.x_basic[i] <= t.upper_of(bi, true) + FEAS_TOL
                });
                if feasible {
                    let obj = |c: usize| if c < p.n_cols { p.obj[c] } else { 0.0 };
                    t.optimize(&obj, true)?;
                    return finish(&t);
                }
            }
        }
    }

    // Phase 1 from scratch.
    let m = p.n_rows;
    let mut resid = p.rhs.clone();
    for c in 0..p.n_cols {
        let v = lower[c];
        if v != 0.0 {
            for &(row, a) in &p.cols[c] {
                resid[row as usize] -= a * v;
            }
        }
    }
    let art_sign: Vec<f64> = resid.iter().map(|r| if *r >= 0.0 { 1.0 } else { -1.0 }).collect();
    let mut t = Tableau {
        p,
        lower,
        upper,
        art_sign,
        status: vec![VarStatus::AtLower; p.n_cols + m],
        basis: (p.n_cols..p.n_cols + m).collect(),
        binv: {
            let mut b = vec![0.0; m * m];
            for i in 0..m {
                b[i * m + i] = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
            }
            b
        },
        x_basic: resid.iter().map(|r| r.abs()).collect(),
    };
    for (row, &col) in t.basis.clone().iter().enumerate() {
        t.status[col] = VarStatus::Basic(row);
    }
    let phase1 = |c: usize| if c < p.n_cols { 0.0 } else { 1.0 };
    t.optimize(&phase1, false)?;
    let infeas: f64 = (0..m)
        .map(|i| {
            let col = t.basis[i];
            if col >= p.n_cols {
                t.x_basic[i].abs()
            } else {
                0.0
            }
        })
        .sum::<f64>()
        + (p.n_cols..p.n_cols + m)
            .map(|c| match t.status[c] {
                VarStatus::Basic(_) => 0.0,
                _ => t.nonbasic_value(c, false),
            })
            .sum::<f64>();
    if infeas > 1e-6 {
        return Ok(LpSolution { status: LpStatus::Infeasible, objective: 0.0, x: vec![] });
    }
    // Phase 2 with artificials pinned to zero.
    for c in p.n_cols..p.n_cols + m {
        if matches!(t.status[c], VarStatus::AtUpper) {
            t.status[c] = VarStatus::AtLower;
        }
    }
    t.recompute_basics(true);
    let obj = |c: usize| if c < p.n_cols { p.obj[c] } else { 0.0 };
    t.optimize(&obj, true)?;
    finish(&t)
}

fn finish(t: &Tableau<'_>) -> Result<LpSolution> {
    let p = t.p;
    let x = t.extract(true);
    // Residual check: every equality row must close.
    let mut resid = p.rhs.clone();
    for (c, xc) in x.iter().enumerate() {
        if *xc != 0.0 {
            for &(row, a) in &p.cols[c] {
                resid[row as usize] -= a * xc;
            }
        }
    }
    // Artificials still basic contribute their value.
    for (row, &col) in t.basis.iter().enumerate() {
        if col >= p.n_cols {
            resid[row] -= t.art_sign[col - p.n_cols] * t.x_basic[row];
        }
    }
    let worst = resid.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    if worst > FEAS_TOL * 10.0 {
        return Err(CoreError::Solver(format!("residual {worst:.2e} after optimisation")));
    }
    let objective = x.iter().zip(p.obj.iter()).map(|(a, b)| a * b).sum();
    Ok(LpSolution { status: LpStatus::Optimal, objective, x })
}

/// Convenience entry point using the problem's own bounds.
pub fn solve(p: &LpProblem, basis_hint: Option<&[usize]>) -> Result<LpSolution> {
    solve_bounded(p, &p.lower, &p.upper, basis_hint)
}
