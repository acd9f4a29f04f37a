//! Krylov solvers for the assembled systems: CG (symmetric), BiCGStab and
//! flexible GMRES (nonsymmetric). Operators and preconditioners are closures so
//! that matrix-free Schur complements plug in unchanged.

use crate::error::SolverReport;
use crate::field::dot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl KrylovOptions {
    pub fn relative(rel_tol: f64) -> Self {
        KrylovOptions {
            rel_tol,
            abs_tol: 0.0,
            max_iter: 2000,
            restart: 60,
        }
    }

    fn target(&self, bnorm: f64) -> f64 {
        (self.rel_tol * bnorm).max(self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub residual: f64,
    pub rhs_norm: f64,
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn residual(op: &dyn Fn(&[f64], &mut [f64]), b: &[f64], x: &[f64], r: &mut [f64]) {
    op(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Removes the mean of `x` (used for pressure-like unknowns).
pub fn project_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Preconditioned conjugate gradients. `project` keeps iterates mean-free
/// for operators with a constant null space.
pub fn cg(
    op: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: KrylovOptions,
    project: bool,
) -> Result<KrylovStats, SolverReport> {
    let n = b.len();
    let bnorm = norm(b);
    let target = opts.target(bnorm);
    let mut r = vec![0.0; n];
    if project {
        project_mean(x);
    }
    residual(op, b, x, &mut r);
    if project {
        project_mean(&mut r);
    }
    let mut rnorm = norm(&r);
    if rnorm <= target {
        return Ok(KrylovStats {
            iterations: 0,
            residual: rnorm,
            rhs_norm: bnorm,
        });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    if project {
        project_mean(&mut z);
    }
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        op(&p, &mut ap);
        if project {
            project_mean(&mut ap);
        }
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(SolverReport {
                solver: "cg",
                iterations: it,
                residual: rnorm,
                target,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm(&r);
        if rnorm <= target {
            return Ok(KrylovStats {
                iterations: it,
                residual: rnorm,
                rhs_norm: bnorm,
            });
        }
        precond(&r, &mut z);
        if project {
            project_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverReport {
        solver: "cg",
        iterations: opts.max_iter,
        residual: rnorm,
        target,
    })
}

/// Right-preconditioned BiCGStab. Convergence is confirmed against the true
/// residual; a stale recurrence triggers a restart from the current iterate.
pub fn bicgstab(
    op: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: KrylovOptions,
) -> Result<KrylovStats, SolverReport> {
    let n = b.len();
    let bnorm = norm(b);
    let target = opts.target(bnorm);
    let mut r = vec![0.0; n];
    residual(op, b, x, &mut r);
    let mut rnorm = norm(&r);
    let mut total = 0usize;
    if rnorm <= target {
        return Ok(KrylovStats {
            iterations: 0,
            residual: rnorm,
            rhs_norm: bnorm,
        });
    }
    let (mut p, mut v, mut phat, mut s, mut shat, mut t) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    'restart: while total < opts.max_iter {
        let rhat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        p.iter_mut().for_each(|q| *q = 0.0);
        v.iter_mut().for_each(|q| *q = 0.0);
        while total < opts.max_iter {
            total += 1;
            let rho_new = dot(&rhat, &r);
            if rho_new.abs() < 1e-300 {
                residual(op, b, x, &mut r);
                rnorm = norm(&r);
                continue 'restart;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precond(&p, &mut phat);
            op(&phat, &mut v);
            let rv = dot(&rhat, &v);
            if rv.abs() < 1e-300 {
                residual(op, b, x, &mut r);
                rnorm = norm(&r);
                continue 'restart;
            }
            alpha = rho / rv;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if norm(&s) <= target {
                for i in 0..n {
                    x[i] += alpha * phat[i];
                }
                residual(op, b, x, &mut r);
                rnorm = norm(&r);
                if rnorm <= target {
                    return Ok(KrylovStats {
                        iterations: total,
                        residual: rnorm,
                        rhs_norm: bnorm,
                    });
                }
                continue 'restart;
            }
            precond(&s, &mut shat);
            op(&shat, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for i in 0..n {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            rnorm = norm(&r);
            if !rnorm.is_finite() {
                break 'restart;
            }
            if rnorm <= target {
                residual(op, b, x, &mut r);
                rnorm = norm(&r);
                if rnorm <= target {
                    return Ok(KrylovStats {
                        iterations: total,
                        residual: rnorm,
                        rhs_norm: bnorm,
                    });
                }
                continue 'restart;
            }
            if omega == 0.0 {
                continue 'restart;
            }
        }
    }
    Err(SolverReport {
        solver: "bicgstab",
        iterations: total,
        residual: rnorm,
        target,
    })
}

/// Restarted flexible GMRES with right preconditioning; the preconditioner may
/// change between iterations (inner iterative solves).
pub fn fgmres(
    op: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: KrylovOptions,
) -> Result<KrylovStats, SolverReport> {
    let n = b.len();
    let m = opts.restart.max(1);
    let bnorm = norm(b);
    let target = opts.target(bnorm);
    let mut r = vec![0.0; n];
    residual(op, b, x, &mut r);
    let mut rnorm = norm(&r);
    let mut total = 0usize;
    while rnorm > target && total < opts.max_iter {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = rnorm;
        basis.push(r.iter().map(|v| v / rnorm).collect());
        let mut k_used = 0;
        for k in 0..m {
            total += 1;
            let mut z = vec![0.0; n];
            precond(&basis[k], &mut z);
            let mut w = vec![0.0; n];
            op(&z, &mut w);
            zs.push(z);
            for (i, q) in basis.iter().enumerate() {
                let hik = dot(&w, q);
                h[i][k] = hik;
                for (wv, qv) in w.iter_mut().zip(q) {
                    *wv -= hik * qv;
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let tmp = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = tmp;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() <= target || wn == 0.0 || total >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k_used × k_used triangle
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
        }
        for (yi, z) in y.iter().zip(&zs) {
            for (xv, zv) in x.iter_mut().zip(z) {
                *xv += yi * zv;
            }
        }
        residual(op, b, x, &mut r);
        let new_norm = norm(&r);
        if !new_norm.is_finite() || (k_used == 0 && new_norm >= rnorm) {
            rnorm = new_norm;
            break;
        }
        rnorm = new_norm;
    }
    if rnorm <= target {
        Ok(KrylovStats {
            iterations: total,
            residual: rnorm,
            rhs_norm: bnorm,
        })
    } else {
        Err(SolverReport {
            solver: "fgmres",
            iterations: total,
            residual: rnorm,
            target,
        })
    }
}
