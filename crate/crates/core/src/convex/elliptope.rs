//! First-order solver for lifted subproblems whose feasible set is the
//! elliptope `{X >= 0, diag(X) = 1}` (analog-beamforming and RIS lifts).
//! Projected gradient ascent with Barzilai-Borwein steps and an Armijo
//! backtracking safeguard; the projection is Higham's alternating method
//! with a Dykstra correction on the cone step, finished by an exact
//! diagonal rescale so iterates are feasible to machine precision.

use num_complex::Complex64;

use super::{SdpProblem, SdpSolution};
use crate::linalg::{hermitian_eigen, hermitize, inner_re, psd_project, CMat};
use crate::{Error, Result};

const MAX_ITERS: usize = 4000;
const PROJ_SWEEPS: usize = 200;
const PROJ_TOL: f64 = 1e-11;

/// Frobenius inner product of Hermitian matrices.
fn dot(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Projection onto the elliptope.
fn project(x0: &CMat) -> CMat {
    let n = x0.nrows();
    let mut y = hermitize(x0);
    for i in 0..n {
        y[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let mut correction = CMat::zeros(n, n);
    let mut xp = y.clone();
    for _ in 0..PROJ_SWEEPS {
        let r = &y - &correction;
        xp = psd_project(&r);
        correction = &xp - &r;
        // diagonal residual before the affine step
        let diag_res = (0..n)
            .map(|i| (xp[(i, i)].re - 1.0).abs())
            .fold(0.0f64, f64::max);
        y = xp.clone();
        for i in 0..n {
            y[(i, i)] = Complex64::new(1.0, 0.0);
        }
        if diag_res < PROJ_TOL {
            break;
        }
    }
    // exact repair: congruence rescale of the PSD iterate pins the diagonal
    // without leaving the cone
    let mut out = xp;
    let mut scale = vec![1.0f64; n];
    for (i, s) in scale.iter_mut().enumerate() {
        let d = out[(i, i)].re.max(1e-12);
        *s = 1.0 / d.sqrt();
    }
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] *= Complex64::new(scale[i] * scale[j], 0.0);
        }
    }
    for i in 0..n {
        out[(i, i)] = Complex64::new(1.0, 0.0);
    }
    hermitize(&out)
}

struct Objective<'a> {
    p: &'a SdpProblem,
    lin: CMat,
}

impl<'a> Objective<'a> {
    fn new(p: &'a SdpProblem) -> Objective<'a> {
        let n = p.blocks[0];
        let mut lin = CMat::zeros(n, n);
        for t in &p.linear_terms {
            lin += &t.matrix * Complex64::new(t.coef, 0.0);
        }
        Objective { p, lin }
    }

    fn eval(&self, x: &CMat) -> f64 {
        let blocks = std::slice::from_ref(x);
        let mut obj = inner_re(&self.lin, x);
        for t in &self.p.rate_terms {
            let s = t.value_at(blocks);
            if 1.0 + s <= 1e-12 {
                return f64::NEG_INFINITY;
            }
            obj += (1.0 + s).log2();
        }
        obj
    }

    fn gradient(&self, x: &CMat) -> CMat {
        let blocks = std::slice::from_ref(x);
        let mut g = self.lin.clone();
        for t in &self.p.rate_terms {
            if t.alpha == 0.0 {
                continue;
            }
            let s = t.value_at(blocks);
            let w = 1.0 / ((1.0 + s).max(1e-12) * super::LN2);
            let tval = inner_re(&t.signal, x).max(1e-30);
            let c_sig = w * t.alpha / tval.sqrt();
            g += &t.signal * Complex64::new(c_sig, 0.0);
            let c_int = -w * t.alpha * t.alpha;
            for (_, m) in &t.interference {
                g += m * Complex64::new(c_int, 0.0);
            }
        }
        g
    }
}

pub(super) fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    if p.blocks.len() != 1 {
        return Err(Error::Solver("elliptope path expects a single block".into()));
    }
    let n = p.blocks[0];
    let obj = Objective::new(p);

    let mut x = match &p.warm_start[0] {
        Some(w) => project(w),
        None => CMat::identity(n, n),
    };
    let mut f = obj.eval(&x);
    if f == f64::NEG_INFINITY {
        x = CMat::identity(n, n);
        f = obj.eval(&x);
    }
    let mut g = obj.gradient(&x);
    let gnorm = dot(&g, &g).sqrt().max(1e-12);
    let mut step = 1.0 / gnorm;
    let tol_obj = tol.max(1e-12);

    let mut stall = 0usize;
    for _ in 0..MAX_ITERS {
        let mut accepted = false;
        let mut xt = x.clone();
        let mut ft = f;
        let mut local = step;
        for _ in 0..40 {
            let cand = project(&(&x + &g * Complex64::new(local, 0.0)));
            let fc = obj.eval(&cand);
            let dir = dot(&g, &(&cand - &x));
            if fc >= f + 1e-4 * dir && fc > f - 1e-15 * (1.0 + f.abs()) {
                xt = cand;
                ft = fc;
                accepted = true;
                break;
            }
            local *= 0.5;
            if local < 1e-18 / gnorm {
                break;
            }
        }
        if !accepted {
            break;
        }
        let dx = &xt - &x;
        let gt = obj.gradient(&xt);
        let dg = &gt - &g;
        let sy = dot(&dx, &dg);
        let ss = dot(&dx, &dx);
        // Barzilai-Borwein step for the next iteration (concave: sy <= 0)
        step = if sy.abs() > 1e-300 {
            (ss / sy.abs()).clamp(local * 1e-3, local * 1e3)
        } else {
            local * 2.0
        };
        let df = ft - f;
        x = xt;
        f = ft;
        g = gt;
        if ss.sqrt() <= tol_obj * (1.0 + x.norm()) && df <= tol_obj * (1.0 + f.abs()) {
            stall += 1;
            if stall >= 3 {
                break;
            }
        } else {
            stall = 0;
        }
    }

    let objective = p.objective_at(std::slice::from_ref(&x));
    let rate_objective = p.rate_objective_at(std::slice::from_ref(&x));
    Ok(SdpSolution {
        blocks: vec![x],
        objective,
        rate_objective,
    })
}
