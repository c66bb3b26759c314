//! Thin conic-program builder over the interior-point backend. Rows are
//! collected as affine expressions grouped by cone, then emitted in the
//! solver's `A x + s = b, s in K` form.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::{Error, Result};

/// Affine expression `constant + sum coef * x_idx`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Affine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn var(idx: usize) -> Affine {
        Affine {
            constant: 0.0,
            terms: vec![(idx, 1.0)],
        }
    }

    pub fn constant(c: f64) -> Affine {
        Affine {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, idx: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((idx, coef));
        }
    }

    pub fn scaled(&self, s: f64) -> Affine {
        Affine {
            constant: self.constant * s,
            terms: self.terms.iter().map(|&(i, c)| (i, c * s)).collect(),
        }
    }

    pub fn plus_const(mut self, c: f64) -> Affine {
        self.constant += c;
        self
    }
}

#[derive(Debug, Default)]
pub(crate) struct ConicBuilder {
    n_vars: usize,
    cost: Vec<f64>,
    quad_cost: Vec<(usize, usize, f64)>,
    zero: Vec<Affine>,
    nonneg: Vec<Affine>,
    soc: Vec<Vec<Affine>>,
    exp: Vec<[Affine; 3]>,
    psd: Vec<(usize, Vec<Affine>)>,
}

impl ConicBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocate `count` variables, returning the index of the first.
    pub fn add_vars(&mut self, count: usize) -> usize {
        let first = self.n_vars;
        self.n_vars += count;
        self.cost.resize(self.n_vars, 0.0);
        first
    }

    /// Add `coef * x_idx` to the minimized objective.
    pub fn add_cost(&mut self, idx: usize, coef: f64) {
        self.cost[idx] += coef;
    }

    /// Add `0.5 * coef * x_i x_j` (+ symmetric term) to the minimized
    /// objective; `i <= j` expected.
    pub fn add_quad_cost(&mut self, i: usize, j: usize, coef: f64) {
        self.quad_cost.push((i, j, coef));
    }

    /// Constrain `expr == 0`.
    pub fn eq_zero(&mut self, expr: Affine) {
        self.zero.push(expr);
    }

    /// Constrain `expr >= 0`.
    pub fn nonneg(&mut self, expr: Affine) {
        self.nonneg.push(expr);
    }

    /// `exprs[0] >= ||exprs[1..]||_2`.
    pub fn soc(&mut self, exprs: Vec<Affine>) {
        self.soc.push(exprs);
    }

    /// `(x, y, z)` in the exponential cone: `y exp(x/y) <= z, y > 0`.
    pub fn exp_cone(&mut self, x: Affine, y: Affine, z: Affine) {
        self.exp.push([x, y, z]);
    }

    /// The scaled-triangle rows form a PSD matrix of (real) dimension `n`.
    pub fn psd(&mut self, n: usize, rows: Vec<Affine>) {
        debug_assert_eq!(rows.len(), n * (n + 1) / 2);
        self.psd.push((n, rows));
    }

    /// Helper: `lo <= quadratic` encoded as a second-order cone, where the
    /// quadratic is `||y||^2 <= a` for affine `a` and affine entries `y`.
    pub fn quad_le(&mut self, y: Vec<Affine>, a: Affine) {
        let mut rows = Vec::with_capacity(y.len() + 2);
        rows.push(a.clone().plus_const(1.0));
        for e in y {
            rows.push(e.scaled(2.0));
        }
        rows.push(a.plus_const(-1.0));
        // (a+1) >= sqrt(4||y||^2 + (a-1)^2)  <=>  ||y||^2 <= a
        self.soc(rows);
    }

    pub fn solve(self, tol: f64) -> Result<Vec<f64>> {
        let n = self.n_vars;
        let mut rows: Vec<&Affine> = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        if !self.zero.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(self.zero.len()));
            rows.extend(self.zero.iter());
        }
        if !self.nonneg.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(self.nonneg.len()));
            rows.extend(self.nonneg.iter());
        }
        for blk in &self.soc {
            cones.push(SupportedConeT::SecondOrderConeT(blk.len()));
            rows.extend(blk.iter());
        }
        for blk in &self.exp {
            cones.push(SupportedConeT::ExponentialConeT());
            rows.extend(blk.iter());
        }
        for (dim, blk) in &self.psd {
            cones.push(SupportedConeT::PSDTriangleConeT(*dim));
            rows.extend(blk.iter());
        }

        let m = rows.len();
        // s = b - A x must equal each expression: A = -coefs, b = constant.
        let mut trips: Vec<(usize, usize, f64)> = Vec::new();
        let mut b = vec![0.0; m];
        for (r, expr) in rows.iter().enumerate() {
            b[r] = expr.constant;
            for &(c, v) in &expr.terms {
                trips.push((r, c, -v));
            }
        }
        let a = csc_from_triplets(m, n, &mut trips);

        let mut ptrips = self.quad_cost.clone();
        let p = csc_from_triplets_upper(n, &mut ptrips);

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(200)
            .tol_feas(tol)
            .tol_gap_abs(tol)
            .tol_gap_rel(tol)
            .build()
            .map_err(|e| Error::Solver(format!("settings: {e:?}")))?;
        let mut solver = DefaultSolver::new(&p, &self.cost, &a, &b, &cones, settings)
            .map_err(|e| Error::Solver(format!("problem assembly: {e:?}")))?;
        solver.solve();
        match solver.solution.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(solver.solution.x),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                Err(Error::Infeasible("conic program is primal infeasible".into()))
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                Err(Error::Solver("conic program is unbounded".into()))
            }
            other => Err(Error::Solver(format!("solver status {other:?}"))),
        }
    }
}

/// Column-compressed matrix from (row, col, value) triplets; duplicate
/// entries are summed.
fn csc_from_triplets(m: usize, n: usize, trips: &mut Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    trips.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(trips.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(trips.len());
    let mut last: Option<(usize, usize)> = None;
    for &(r, c, v) in trips.iter() {
        if last == Some((c, r)) {
            *nzval.last_mut().unwrap() += v;
        } else {
            rowval.push(r);
            nzval.push(v);
            colptr[c + 1] += 1;
            last = Some((c, r));
        }
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

/// Upper-triangle CSC for the quadratic cost.
fn csc_from_triplets_upper(n: usize, trips: &mut Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    let mut t: Vec<(usize, usize, f64)> = trips
        .iter()
        .map(|&(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) })
        .collect();
    csc_from_triplets(n, n, &mut t)
}
