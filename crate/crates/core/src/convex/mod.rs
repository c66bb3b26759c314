//! Solver-facing contracts shared by the optimization modules: semidefinite
//! programs with the fractional-programming rate objective, concave
//! quadratic programs for the antenna positions, rank-1 extraction, the
//! closed-form auxiliary-variable update, and a generalized dominant
//! eigenvector solver.
//!
//! Problems carrying only a unit-diagonal constraint set (the lifted
//! analog-beamforming and RIS subproblems) are dispatched to a warm-started
//! projected-gradient solver on the elliptope; everything else goes through
//! the interior-point conic backend.

mod conic;
mod elliptope;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{
    hermitian_eigen, hermitize, inner_re, nsd_factor, realify, smat, standard_cn_vector, svec,
    svec_len, trace_re, unrealify, CMat, CVec,
};
use crate::{Error, Result};

use conic::{Affine, ConicBuilder};

pub const LN2: f64 = std::f64::consts::LN_2;

/// One fractional-programming rate term
/// `log2(1 + 2 alpha sqrt(Tr(A X)) - alpha^2 (sum_j Tr(B_j X_j) + noise))`.
#[derive(Debug, Clone)]
pub struct SdpRateTerm {
    pub alpha: f64,
    pub signal_block: usize,
    pub signal: CMat,
    /// (block, matrix) pairs summed inside the denominator.
    pub interference: Vec<(usize, CMat)>,
    pub noise: f64,
}

/// Linear objective term `coef * Tr(C X_block)` (rank-1 penalty terms).
#[derive(Debug, Clone)]
pub struct SdpLinTerm {
    pub block: usize,
    pub coef: f64,
    pub matrix: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

/// Affine trace constraint `sum_b Tr(C_b X_b) (=|<=) rhs`.
#[derive(Debug, Clone)]
pub struct SdpConstraint {
    pub terms: Vec<(usize, CMat)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverHint {
    #[default]
    Auto,
    Conic,
    Elliptope,
}

/// Semidefinite program over a list of Hermitian PSD decision blocks.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    /// Complex dimension of each decision block.
    pub blocks: Vec<usize>,
    pub rate_terms: Vec<SdpRateTerm>,
    pub linear_terms: Vec<SdpLinTerm>,
    pub constraints: Vec<SdpConstraint>,
    /// Optional feasible warm start per block (used by the first-order path).
    pub warm_start: Vec<Option<CMat>>,
    pub hint: SolverHint,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> SdpProblem {
        let warm = vec![None; blocks.len()];
        SdpProblem {
            blocks,
            warm_start: warm,
            ..Default::default()
        }
    }

    /// Add `Tr(O_mm X_block) = 1` for every diagonal slot of a block.
    pub fn unit_diagonal(&mut self, block: usize) {
        let n = self.blocks[block];
        for m in 0..n {
            let mut c = CMat::zeros(n, n);
            c[(m, m)] = Complex64::new(1.0, 0.0);
            self.constraints.push(SdpConstraint {
                terms: vec![(block, c)],
                sense: Sense::Eq,
                rhs: 1.0,
            });
        }
    }

    /// Rate plus linear objective evaluated at a candidate solution.
    pub fn objective_at(&self, blocks: &[CMat]) -> f64 {
        self.rate_objective_at(blocks)
            + self
                .linear_terms
                .iter()
                .map(|t| t.coef * inner_re(&t.matrix, &blocks[t.block]))
                .sum::<f64>()
    }

    /// The fractional-programming objective alone (no penalty terms).
    pub fn rate_objective_at(&self, blocks: &[CMat]) -> f64 {
        self.rate_terms
            .iter()
            .map(|t| {
                let s = t.value_at(blocks);
                if 1.0 + s <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (1.0 + s).log2()
                }
            })
            .sum()
    }

    fn is_unit_diag_only(&self) -> bool {
        if self.blocks.len() != 1 {
            return false;
        }
        let n = self.blocks[0];
        if self.constraints.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for c in &self.constraints {
            if c.sense != Sense::Eq || (c.rhs - 1.0).abs() > 0.0 || c.terms.len() != 1 {
                return false;
            }
            let (b, m) = (&c.terms[0].0, &c.terms[0].1);
            if *b != 0 {
                return false;
            }
            let mut slot = None;
            for i in 0..n {
                for j in 0..n {
                    let v = m[(i, j)];
                    if v != Complex64::default() {
                        if i != j || (v - Complex64::new(1.0, 0.0)).norm() > 0.0 || slot.is_some() {
                            return false;
                        }
                        slot = Some(i);
                    }
                }
            }
            match slot {
                Some(i) => seen[i] = true,
                None => return false,
            }
        }
        seen.iter().all(|&s| s)
    }
}

impl SdpRateTerm {
    /// `2 alpha sqrt(Tr(A X)) - alpha^2 (sum Tr(B X) + noise)`.
    pub fn value_at(&self, blocks: &[CMat]) -> f64 {
        let t = inner_re(&self.signal, &blocks[self.signal_block]).max(0.0);
        let den: f64 = self
            .interference
            .iter()
            .map(|(b, m)| inner_re(m, &blocks[*b]))
            .sum::<f64>()
            + self.noise;
        2.0 * self.alpha * t.sqrt() - self.alpha * self.alpha * den
    }
}

/// Solver output: the PSD blocks plus objective values recomputed from them.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub blocks: Vec<CMat>,
    /// Rate objective plus linear (penalty) terms.
    pub objective: f64,
    /// Rate objective alone.
    pub rate_objective: f64,
}

/// Solve an [`SdpProblem`]; constraint and KKT residuals are driven below
/// `tol` (interior-point path) or the projected-gradient residual below a
/// matching threshold (elliptope path).
pub fn solve_sdp(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    let use_elliptope = match p.hint {
        SolverHint::Conic => false,
        SolverHint::Elliptope => true,
        SolverHint::Auto => p.is_unit_diag_only(),
    };
    if use_elliptope {
        elliptope::solve(p, tol)
    } else {
        solve_conic(p, tol)
    }
}

/// Coefficients of `Tr(C X)` over the scaled-triangle variables of the
/// realified block.
fn trace_affine(offset: usize, c: &CMat) -> Affine {
    let coeffs = svec(&realify(c)) * 0.5;
    let mut a = Affine::constant(0.0);
    for (i, &v) in coeffs.iter().enumerate() {
        if v != 0.0 {
            a.push(offset + i, v);
        }
    }
    a
}

fn solve_conic(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    let mut cb = ConicBuilder::new();
    // svec variables per realified block
    let offsets: Vec<usize> = p
        .blocks
        .iter()
        .map(|&n| cb.add_vars(svec_len(2 * n)))
        .collect();

    for (b, &n) in p.blocks.iter().enumerate() {
        let rows = (0..svec_len(2 * n))
            .map(|i| Affine::var(offsets[b] + i))
            .collect();
        cb.psd(2 * n, rows);
    }

    for c in &p.constraints {
        let mut expr = Affine::constant(-c.rhs);
        for (b, m) in &c.terms {
            let t = trace_affine(offsets[*b], m);
            expr.constant += t.constant;
            expr.terms.extend(t.terms);
        }
        match c.sense {
            Sense::Eq => cb.eq_zero(expr),
            // expr = sum - rhs <= 0
            Sense::Le => cb.nonneg(expr.scaled(-1.0)),
        }
    }

    for t in &p.linear_terms {
        let tr = trace_affine(offsets[t.block], &t.matrix);
        for (idx, v) in tr.terms {
            cb.add_cost(idx, -t.coef * v);
        }
    }

    for term in &p.rate_terms {
        if term.alpha == 0.0 {
            continue;
        }
        let u = cb.add_vars(1);
        let tau = cb.add_vars(1);
        let v = trace_affine(offsets[term.signal_block], &term.signal);
        cb.quad_le(vec![Affine::var(u)], v);
        // z = 1 + 2 alpha u - alpha^2 (sum Tr(B X) + noise)
        let a2 = term.alpha * term.alpha;
        let mut z = Affine::constant(1.0 - a2 * term.noise);
        z.push(u, 2.0 * term.alpha);
        for (b, m) in &term.interference {
            let tr = trace_affine(offsets[*b], m);
            z.constant -= a2 * tr.constant;
            for (idx, c) in tr.terms {
                z.push(idx, -a2 * c);
            }
        }
        cb.exp_cone(Affine::var(tau), Affine::constant(1.0), z);
        cb.add_cost(tau, -1.0 / LN2);
    }

    let x = cb.solve(tol)?;
    let blocks: Vec<CMat> = p
        .blocks
        .iter()
        .zip(&offsets)
        .map(|(&n, &off)| {
            let slice = &x[off..off + svec_len(2 * n)];
            unrealify(&smat(slice, 2 * n), n)
        })
        .collect();
    let objective = p.objective_at(&blocks);
    let rate_objective = p.rate_objective_at(&blocks);
    Ok(SdpSolution {
        blocks,
        objective,
        rate_objective,
    })
}

// ---------------------------------------------------------------------------
// Concave quadratic programs for the antenna positions
// ---------------------------------------------------------------------------

/// `q(z) = 0.5 z^T R z + r^T z + c` with negative-semidefinite `R`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub curvature: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn zeros(n: usize) -> Quadratic {
        Quadratic {
            curvature: DMatrix::zeros(n, n),
            linear: DVector::zeros(n),
            constant: 0.0,
        }
    }

    pub fn eval(&self, z: &DVector<f64>) -> f64 {
        0.5 * (z.transpose() * &self.curvature * z)[(0, 0)] + self.linear.dot(z) + self.constant
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        // curvature is symmetric
        &self.curvature * z + &self.linear
    }

    pub fn add(&mut self, other: &Quadratic) {
        self.curvature += &other.curvature;
        self.linear += &other.linear;
        self.constant += other.constant;
    }

    pub fn negated(&self) -> Quadratic {
        Quadratic {
            curvature: -&self.curvature,
            linear: -&self.linear,
            constant: -self.constant,
        }
    }
}

/// One position-domain rate term
/// `log2(1 + 2 alpha sqrt(signal(z)) + alpha^2 neg_interference(z))`, where
/// `signal` minorizes the desired power and `neg_interference` minorizes the
/// negated interference-plus-noise.
#[derive(Debug, Clone)]
pub struct QpRateTerm {
    pub alpha: f64,
    pub signal: Quadratic,
    pub neg_interference: Quadratic,
}

#[derive(Debug, Clone)]
pub enum QpObjective {
    /// Maximize a single concave quadratic.
    Quadratic(Quadratic),
    /// Maximize the summed FP rate surrogate.
    FpRate(Vec<QpRateTerm>),
}

/// Concave maximization over linear inequality constraints `a^T z <= b`.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub dim: usize,
    pub objective: QpObjective,
    pub constraints: Vec<(DVector<f64>, f64)>,
}

impl QpProblem {
    /// Objective value at `z` (surrogate rate for the FP form).
    pub fn objective_at(&self, z: &DVector<f64>) -> f64 {
        match &self.objective {
            QpObjective::Quadratic(q) => q.eval(z),
            QpObjective::FpRate(terms) => terms
                .iter()
                .map(|t| {
                    let s =
                        2.0 * t.alpha * t.signal.eval(z).max(0.0).sqrt()
                            + t.alpha * t.alpha * t.neg_interference.eval(z);
                    (1.0 + s).max(1e-300).log2()
                })
                .sum(),
        }
    }
}

/// Solve a [`QpProblem`]; returns the optimal coordinates.
pub fn solve_qp(p: &QpProblem) -> Result<DVector<f64>> {
    const NSD_TOL: f64 = 1e-9;
    let n = p.dim;
    let mut cb = ConicBuilder::new();
    let z0 = cb.add_vars(n);

    for (a, b) in &p.constraints {
        // b - a^T z >= 0
        let mut expr = Affine::constant(*b);
        for i in 0..n {
            expr.push(z0 + i, -a[i]);
        }
        cb.nonneg(expr);
    }

    match &p.objective {
        QpObjective::Quadratic(q) => {
            // maximize 0.5 z^T R z + r^T z  ->  minimize 0.5 z^T (-R) z - r^T z
            nsd_factor(&q.curvature, NSD_TOL)?; // validates curvature
            for i in 0..n {
                for j in i..n {
                    let v = -0.5 * (q.curvature[(i, j)] + q.curvature[(j, i)]);
                    if v != 0.0 {
                        cb.add_quad_cost(i, j, v);
                    }
                }
            }
            for i in 0..n {
                cb.add_cost(z0 + i, -q.linear[i]);
            }
        }
        QpObjective::FpRate(terms) => {
            for t in terms {
                if t.alpha == 0.0 {
                    continue;
                }
                let lbar = nsd_factor(&t.signal.curvature, NSD_TOL)?;
                let ltil = nsd_factor(&t.neg_interference.curvature, NSD_TOL)?;
                let u = cb.add_vars(1);
                let ttil = cb.add_vars(1);
                let tau = cb.add_vars(1);
                // u^2 + 0.5||L^T z||^2 <= rbar^T z + cbar
                let mut y = vec![Affine::var(u)];
                let half = 0.5f64.sqrt();
                for c in 0..lbar.ncols() {
                    let mut row = Affine::constant(0.0);
                    for i in 0..n {
                        row.push(z0 + i, lbar[(i, c)] * half);
                    }
                    y.push(row);
                }
                let mut a = Affine::constant(t.signal.constant);
                for i in 0..n {
                    a.push(z0 + i, t.signal.linear[i]);
                }
                cb.quad_le(y, a);
                // ttil + 0.5||Ltil^T z||^2 <= rtil^T z + ctil
                let mut y2 = Vec::new();
                for c in 0..ltil.ncols() {
                    let mut row = Affine::constant(0.0);
                    for i in 0..n {
                        row.push(z0 + i, ltil[(i, c)] * half);
                    }
                    y2.push(row);
                }
                let mut a2 = Affine::constant(t.neg_interference.constant);
                for i in 0..n {
                    a2.push(z0 + i, t.neg_interference.linear[i]);
                }
                a2.push(ttil, -1.0);
                cb.quad_le(y2, a2);
                // z-slot of the exponential cone: 1 + 2 alpha u + alpha^2 ttil
                let mut zex = Affine::constant(1.0);
                zex.push(u, 2.0 * t.alpha);
                zex.push(ttil, t.alpha * t.alpha);
                cb.exp_cone(Affine::var(tau), Affine::constant(1.0), zex);
                cb.add_cost(tau, -1.0 / LN2);
            }
        }
    }

    let x = cb.solve(1e-9)?;
    Ok(DVector::from_iterator(n, x[z0..z0 + n].iter().cloned()))
}

// ---------------------------------------------------------------------------
// Shared spectral operations
// ---------------------------------------------------------------------------

/// Dominant rank-1 factor of a Hermitian PSD matrix: `sqrt(lambda_1) u_1`
/// plus the tightness ratio `lambda_1 / Tr(X)`.
pub fn extract_rank1(x: &CMat) -> Result<(CVec, f64)> {
    let tr = trace_re(x);
    if !(tr > 0.0) || tr < 1e-300 {
        return Err(Error::Numerical("rank-1 extraction of a zero matrix".into()));
    }
    let (vals, vecs) = hermitian_eigen(x);
    let lam = vals[0].max(0.0);
    let v = vecs.column(0) * Complex64::new(lam.sqrt(), 0.0);
    Ok((v.into_owned(), lam / tr))
}

/// Fractional-programming auxiliary update `alpha = sqrt(A) / B`.
pub fn fp_alpha(a: f64, b: f64) -> Result<f64> {
    if b <= 0.0 {
        return Err(Error::Numerical(format!("fp_alpha denominator {b} <= 0")));
    }
    if a < 0.0 {
        return Err(Error::Numerical(format!("fp_alpha numerator {a} < 0")));
    }
    Ok(a.sqrt() / b)
}

/// Dominant generalized eigenpair of `(S, T)` with `T` Hermitian positive
/// definite: maximizes the generalized Rayleigh quotient
/// `v^H S v / v^H T v`.
pub fn generalized_rayleigh_max(s: &CMat, t: &CMat) -> Result<(CVec, f64)> {
    let chol = Cholesky::new(hermitize(t))
        .ok_or_else(|| Error::Numerical("generalized eigenproblem: T not positive definite".into()))?;
    let l_inv = chol
        .l()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("generalized eigenproblem: singular factor".into()))?;
    let m = hermitize(&(&l_inv * hermitize(s) * l_inv.adjoint()));
    let (vals, vecs) = hermitian_eigen(&m);
    let u = l_inv.adjoint() * vecs.column(0);
    let norm = u.norm();
    Ok((u / Complex64::new(norm, 0.0), vals[0]))
}

/// Gaussian randomization candidates for a lifted solution: samples
/// `X^{1/2} w` with `w ~ CN(0, I)`.
pub fn gaussian_rank1_samples(x: &CMat, count: usize, rng: &mut impl Rng) -> Vec<CVec> {
    let (vals, vecs) = hermitian_eigen(x);
    let n = x.nrows();
    let mut sqrt = vecs;
    for (i, &v) in vals.iter().enumerate() {
        let s = Complex64::new(v.max(0.0).sqrt(), 0.0);
        sqrt.column_mut(i).apply(|e| *e *= s);
    }
    (0..count)
        .map(|_| &sqrt * standard_cn_vector(n, rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn complex(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sdp_dominant_eigenvector_example() {
        // maximize Tr(C X) s.t. Tr(X) = 1, X psd, C = diag(2, 1)
        let mut p = SdpProblem::new(vec![2]);
        let c = CMat::from_diagonal(&CVec::from_vec(vec![complex(2.0, 0.0), complex(1.0, 0.0)]));
        p.linear_terms.push(SdpLinTerm {
            block: 0,
            coef: 1.0,
            matrix: c,
        });
        p.constraints.push(SdpConstraint {
            terms: vec![(0, CMat::identity(2, 2))],
            sense: Sense::Eq,
            rhs: 1.0,
        });
        let sol = solve_sdp(&p, 1e-9).unwrap();
        assert_relative_eq!(sol.objective, 2.0, epsilon = 1e-6);
        assert_relative_eq!(sol.blocks[0][(0, 0)].re, 1.0, epsilon = 1e-6);
        assert!(sol.blocks[0][(1, 1)].re.abs() < 1e-6);
    }

    #[test]
    fn sdp_detects_infeasibility() {
        // Tr(X) <= -1 with X psd
        let mut p = SdpProblem::new(vec![2]);
        p.constraints.push(SdpConstraint {
            terms: vec![(0, CMat::identity(2, 2))],
            sense: Sense::Le,
            rhs: -1.0,
        });
        match solve_sdp(&p, 1e-9) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn sdp_single_user_mrt() {
        // single rate term, pure channel h: optimal Gamma = P h h^H / ||h||^2
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let n = 4;
        let h = standard_cn_vector(n, &mut rng) * complex(3.0, 0.0);
        let power = 2.5;
        let noise = 0.7;
        let alpha = 1.3; // any positive alpha gives the same maximizer
        let mut p = SdpProblem::new(vec![n]);
        p.rate_terms.push(SdpRateTerm {
            alpha,
            signal_block: 0,
            signal: hermitize(&(&h * h.adjoint())),
            interference: vec![],
            noise,
        });
        p.constraints.push(SdpConstraint {
            terms: vec![(0, CMat::identity(n, n))],
            sense: Sense::Le,
            rhs: power,
        });
        let sol = solve_sdp(&p, 1e-9).unwrap();
        let (f, tightness) = extract_rank1(&sol.blocks[0]).unwrap();
        assert!(tightness > 0.999, "tightness {tightness}");
        // |h^H f|^2 should reach P ||h||^2
        let gain = h.dotc(&f).norm_sqr();
        assert_relative_eq!(gain, power * h.norm_squared(), max_relative = 1e-5);

        // grid-search oracle over rank-1 candidates Gamma = P v v^H cannot
        // beat the returned objective
        let obj = sol.rate_objective;
        for seed in 0..200u64 {
            let mut r2 = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let v = standard_cn_vector(n, &mut r2);
            let v = &v / complex(v.norm(), 0.0);
            let cand = hermitize(&(&v * v.adjoint())) * complex(power, 0.0);
            let val = p.rate_objective_at(&[cand]);
            assert!(val <= obj + 1e-6, "candidate beat solver: {val} > {obj}");
        }
    }

    #[test]
    fn elliptope_and_conic_paths_agree() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 5;
        let y1 = standard_cn_vector(n, &mut rng);
        let y2 = standard_cn_vector(n, &mut rng);
        let mut p = SdpProblem::new(vec![n]);
        p.rate_terms.push(SdpRateTerm {
            alpha: 0.8,
            signal_block: 0,
            signal: hermitize(&(&y1 * y1.adjoint())),
            interference: vec![(0, hermitize(&(&y2 * y2.adjoint())))],
            noise: 0.5,
        });
        p.unit_diagonal(0);
        p.hint = SolverHint::Conic;
        let conic = solve_sdp(&p, 1e-9).unwrap();
        p.hint = SolverHint::Elliptope;
        p.warm_start[0] = Some(CMat::identity(n, n));
        let pg = solve_sdp(&p, 1e-8).unwrap();
        assert_relative_eq!(conic.objective, pg.objective, max_relative = 2e-4);
        for i in 0..n {
            assert_relative_eq!(pg.blocks[0][(i, i)].re, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn extract_rank1_examples() {
        let x = CMat::from_diagonal(&CVec::from_vec(vec![complex(5.0, 0.0), complex(0.0, 0.0)]));
        let (v, t) = extract_rank1(&x).unwrap();
        assert_relative_eq!(v[0].norm(), 5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(t, 1.0, epsilon = 1e-12);

        let (_, t) = extract_rank1(&CMat::identity(2, 2)).unwrap();
        assert_relative_eq!(t, 0.5, epsilon = 1e-12);

        assert!(extract_rank1(&CMat::zeros(3, 3)).is_err());

        // rank-1 reconstruction up to global phase
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let v = standard_cn_vector(6, &mut rng);
        let x = hermitize(&(&v * v.adjoint()));
        let (w, t) = extract_rank1(&x).unwrap();
        assert_relative_eq!(t, 1.0, epsilon = 1e-10);
        let phase = w.dotc(&v);
        let aligned = &w * (phase / complex(phase.norm(), 0.0));
        assert!((aligned - &v).norm() < 1e-10);
    }

    #[test]
    fn rank1_extraction_frobenius_bound() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = standard_cn_vector(5, &mut rng);
            let b = standard_cn_vector(5, &mut rng);
            let x = hermitize(&(&a * a.adjoint() + &b * b.adjoint() * complex(0.1, 0.0)));
            let (v, t) = extract_rank1(&x).unwrap();
            let resid = (&x - &v * v.adjoint()).norm();
            let bound = (1.0 - t).sqrt() * trace_re(&x) * 2f64.sqrt();
            assert!(resid <= bound + 1e-9, "{resid} > {bound}");
        }
    }

    #[test]
    fn fp_alpha_examples() {
        assert_relative_eq!(fp_alpha(4.0, 2.0).unwrap(), 1.0);
        assert_eq!(fp_alpha(0.0, 3.0).unwrap(), 0.0);
        assert!(fp_alpha(1.0, 0.0).is_err());
        // at the fixed point the transform recovers the SINR
        let (a, b) = (2.3, 1.7);
        let alpha = fp_alpha(a, b).unwrap();
        let recovered = 2.0 * alpha * a.sqrt() - alpha * alpha * b;
        assert_relative_eq!(recovered, a / b, max_relative = 1e-12);
    }

    #[test]
    fn generalized_rayleigh_examples() {
        let s = CMat::from_diagonal(&CVec::from_vec(vec![complex(3.0, 0.0), complex(1.0, 0.0)]));
        let t = CMat::identity(2, 2);
        let (v, val) = generalized_rayleigh_max(&s, &t).unwrap();
        assert_relative_eq!(val, 3.0, epsilon = 1e-10);
        assert!(v[0].norm() > 0.999);

        let (_, val) = generalized_rayleigh_max(&t, &t).unwrap();
        assert_relative_eq!(val, 1.0, epsilon = 1e-10);

        // Monte Carlo dominance
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let a = standard_cn_vector(4, &mut rng);
        let b = standard_cn_vector(4, &mut rng);
        let s = hermitize(&(&a * a.adjoint() + &b * b.adjoint() * complex(0.3, 0.0)));
        let c = standard_cn_vector(4, &mut rng);
        let t = hermitize(&(&c * c.adjoint())) + CMat::identity(4, 4) * complex(0.4, 0.0);
        let (_, val) = generalized_rayleigh_max(&s, &t).unwrap();
        for _ in 0..1000 {
            let w = standard_cn_vector(4, &mut rng);
            let q = w.dotc(&(&s * &w)).re / w.dotc(&(&t * &w)).re;
            assert!(val >= q - 1e-9);
        }

        // singular T errors
        assert!(generalized_rayleigh_max(&s, &CMat::zeros(4, 4)).is_err());
    }

    #[test]
    fn qp_unconstrained_optimum_is_returned() {
        // maximize -||z - zbar||^2 with zbar feasible
        let n = 4;
        let zbar = DVector::from_vec(vec![0.1, 0.6, 1.2, 1.9]);
        let q = Quadratic {
            curvature: DMatrix::identity(n, n) * -2.0,
            linear: &zbar * 2.0,
            constant: -zbar.norm_squared(),
        };
        let mut constraints = vec![];
        // z1 >= 0, spacing 0.2, z4 <= 5
        let mut a = DVector::zeros(n);
        a[0] = -1.0;
        constraints.push((a, 0.0));
        for i in 0..n - 1 {
            let mut a = DVector::zeros(n);
            a[i] = 1.0;
            a[i + 1] = -1.0;
            constraints.push((a, -0.2));
        }
        let mut a = DVector::zeros(n);
        a[n - 1] = 1.0;
        constraints.push((a, 5.0));
        let p = QpProblem {
            dim: n,
            objective: QpObjective::Quadratic(q),
            constraints,
        };
        let z = solve_qp(&p).unwrap();
        assert!((z - zbar).norm() < 1e-6);
    }

    #[test]
    fn qp_projection_onto_ordering_cone() {
        // maximize -||z||^2 with z1 >= 0 and spacing delta: optimum is the
        // arithmetic progression 0, delta, 2 delta, ...
        let n = 3;
        let delta = 0.5;
        let q = Quadratic {
            curvature: DMatrix::identity(n, n) * -2.0,
            linear: DVector::zeros(n),
            constant: 0.0,
        };
        let mut constraints = vec![];
        let mut a = DVector::zeros(n);
        a[0] = -1.0;
        constraints.push((a, 0.0));
        for i in 0..n - 1 {
            let mut a = DVector::zeros(n);
            a[i] = 1.0;
            a[i + 1] = -1.0;
            constraints.push((a, -delta));
        }
        let p = QpProblem {
            dim: n,
            objective: QpObjective::Quadratic(q),
            constraints,
        };
        let z = solve_qp(&p).unwrap();
        for i in 0..n {
            assert!((z[i] - i as f64 * delta).abs() < 1e-6, "{z:?}");
        }
    }

    #[test]
    fn qp_matches_projected_gradient_oracle() {
        // random concave quadratic over the ordering cone, cross-checked
        // against a long projected-gradient run
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        let n = 5;
        let delta = 0.3;
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rand::Rng::gen::<f64>(&mut rng) - 0.5);
        let curv = -(&m * m.transpose()) - DMatrix::identity(n, n) * 0.5;
        let lin = DVector::from_fn(n, |_, _| rand::Rng::gen::<f64>(&mut rng) - 0.2);
        let q = Quadratic {
            curvature: curv.clone(),
            linear: lin.clone(),
            constant: 0.0,
        };
        let mut constraints = vec![];
        let mut a = DVector::zeros(n);
        a[0] = -1.0;
        constraints.push((a, 0.0));
        for i in 0..n - 1 {
            let mut a = DVector::zeros(n);
            a[i] = 1.0;
            a[i + 1] = -1.0;
            constraints.push((a, -delta));
        }
        let p = QpProblem {
            dim: n,
            objective: QpObjective::Quadratic(q.clone()),
            constraints,
        };
        let z = solve_qp(&p).unwrap();

        // projected-gradient oracle (projection via the shifted isotonic fit)
        let project = |v: &DVector<f64>| -> DVector<f64> {
            let raw: Vec<f64> = v.iter().cloned().collect();
            let apv = crate::scenario::Apv::project(&raw, 1e6, delta).unwrap();
            DVector::from_vec(apv.positions().to_vec())
        };
        let mut zo = project(&DVector::zeros(n));
        let step = 0.05;
        for _ in 0..20000 {
            let g = q.gradient(&zo);
            zo = project(&(&zo + g * step));
        }
        assert!((q.eval(&z) - q.eval(&zo)).abs() < 1e-6, "{} vs {}", q.eval(&z), q.eval(&zo));
        assert!((z - zo).norm() < 1e-3);
    }
}
