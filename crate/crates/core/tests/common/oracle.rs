//! Dense reference systems for small grids.
//!
//! Everything here is written from the weak forms: velocities are read
//! through ghost rules, bilinear forms are evaluated on unit vectors, the
//! interaction potential is a direct quadrature over cells and angles, and
//! the angular derivative matrices come from Fourier sums instead of the
//! closed forms used by the library.

use std::f64::consts::PI;

use active_doi::grid::DomainGrid;
use active_doi::params::Problem;
use nalgebra::{DMatrix, DVector};

pub struct Ghosts<'a> {
    pub g: &'a DomainGrid,
}

impl Ghosts<'_> {
    fn periodic(&self) -> bool {
        self.g.is_periodic()
    }

    fn wrap(k: isize, n: usize) -> usize {
        k.rem_euclid(n as isize) as usize
    }

    /// Mirror index across a wall at the low or high edge.
    fn mirror(k: isize, n: usize) -> (usize, f64) {
        let n = n as isize;
        if k < 0 {
            ((-1 - k) as usize, -1.0)
        } else if k >= n {
            ((2 * n - 1 - k) as usize, -1.0)
        } else {
            (k as usize, 1.0)
        }
    }

    pub fn x_active(&self, i: usize) -> bool {
        self.periodic() || i != 0
    }

    pub fn y_active(&self, j: usize) -> bool {
        self.periodic() || j != 0
    }

    pub fn slot_active(&self, k: usize) -> bool {
        let n = self.g.cells();
        if k < n {
            self.x_active(k % self.g.nx)
        } else {
            self.y_active((k - n) / self.g.nx)
        }
    }

    /// x-velocity on the face at the left of column `i`, row `j`.
    pub fn ux(&self, u: &[f64], i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.g.nx, self.g.ny);
        if self.periodic() {
            return u[self.g.cell(Self::wrap(i, nx), Self::wrap(j, ny))];
        }
        if i <= 0 || i >= nx as isize {
            return 0.0;
        }
        let (jj, s) = Self::mirror(j, ny);
        s * u[self.g.cell(i as usize, jj)]
    }

    pub fn uy(&self, u: &[f64], i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.g.nx, self.g.ny);
        let n = self.g.cells();
        if self.periodic() {
            return u[n + self.g.cell(Self::wrap(i, nx), Self::wrap(j, ny))];
        }
        if j <= 0 || j >= ny as isize {
            return 0.0;
        }
        let (ii, s) = Self::mirror(i, nx);
        s * u[n + self.g.cell(ii, j as usize)]
    }

    /// `[∂x ux, ∂y ux, ∂x uy, ∂y uy]` at the centre of cell `(i, j)`.
    pub fn gradient(&self, u: &[f64], i: usize, j: usize) -> [f64; 4] {
        let (hx, hy) = (self.g.hx, self.g.hy);
        let (i, j) = (i as isize, j as isize);
        let uxc = |i: isize, j: isize| 0.5 * (self.ux(u, i, j) + self.ux(u, i + 1, j));
        let uyc = |i: isize, j: isize| 0.5 * (self.uy(u, i, j) + self.uy(u, i, j + 1));
        [
            (self.ux(u, i + 1, j) - self.ux(u, i, j)) / hx,
            (uxc(i, j + 1) - uxc(i, j - 1)) / (2.0 * hy),
            (uyc(i + 1, j) - uyc(i - 1, j)) / (2.0 * hx),
            (self.uy(u, i, j + 1) - self.uy(u, i, j)) / hy,
        ]
    }

    pub fn divergence(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let g = self.gradient(u, i, j);
        g[0] + g[3]
    }

    /// Discrete Dirichlet energy: one-cell differences at centres and
    /// corners, half weight on wall corners.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        let g = self.g;
        let vol = g.cell_volume();
        let (nx, ny) = (g.nx as isize, g.ny as isize);
        let mut e = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let d = self.gradient(u, i, j);
                e += vol * (d[0] * d[0] + d[3] * d[3]);
            }
        }
        let last_j = if self.periodic() { ny - 1 } else { ny };
        for i in 0..nx {
            for j in 0..=last_j {
                let d = (self.ux(u, i, j) - self.ux(u, i, j - 1)) / g.hy;
                let w = if !self.periodic() && (j == 0 || j == ny) { 0.5 } else { 1.0 };
                e += w * vol * d * d;
            }
        }
        let last_i = if self.periodic() { nx - 1 } else { nx };
        for j in 0..ny {
            for i in 0..=last_i {
                let d = (self.uy(u, i, j) - self.uy(u, i - 1, j)) / g.hx;
                let w = if !self.periodic() && (i == 0 || i == nx) { 0.5 } else { 1.0 };
                e += w * vol * d * d;
            }
        }
        e
    }

    /// `(v·∇)u` at every face slot, zero on inactive slots.
    pub fn convect(&self, v: &[f64], u: &[f64]) -> Vec<f64> {
        let g = self.g;
        let (hx, hy) = (g.hx, g.hy);
        let mut out = vec![0.0; g.face_dofs()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (ii, jj) = (i as isize, j as isize);
                if self.x_active(i) {
                    let ax = self.ux(v, ii, jj);
                    let ay = 0.25
                        * (self.uy(v, ii - 1, jj)
                            + self.uy(v, ii, jj)
                            + self.uy(v, ii - 1, jj + 1)
                            + self.uy(v, ii, jj + 1));
                    out[g.cell(i, j)] = ax * (self.ux(u, ii + 1, jj) - self.ux(u, ii - 1, jj)) / (2.0 * hx)
                        + ay * (self.ux(u, ii, jj + 1) - self.ux(u, ii, jj - 1)) / (2.0 * hy);
                }
                if self.y_active(j) {
                    let ay = self.uy(v, ii, jj);
                    let ax = 0.25
                        * (self.ux(v, ii, jj - 1)
                            + self.ux(v, ii + 1, jj - 1)
                            + self.ux(v, ii, jj)
                            + self.ux(v, ii + 1, jj));
                    out[g.cells() + g.cell(i, j)] = ay
                        * (self.uy(u, ii, jj + 1) - self.uy(u, ii, jj - 1))
                        / (2.0 * hy)
                        + ax * (self.uy(u, ii + 1, jj) - self.uy(u, ii - 1, jj)) / (2.0 * hx);
                }
            }
        }
        out
    }

    /// Interior faces as `(left cell, right cell, spacing, slot)`.
    pub fn faces(&self) -> Vec<(usize, usize, f64, usize)> {
        let g = self.g;
        let mut out = Vec::new();
        for j in 0..g.ny {
            for i in 0..g.nx {
                if self.periodic() || i > 0 {
                    let l = (i + g.nx - 1) % g.nx;
                    out.push((g.cell(l, j), g.cell(i, j), g.hx, g.cell(i, j)));
                }
                if self.periodic() || j > 0 {
                    let d = (j + g.ny - 1) % g.ny;
                    out.push((g.cell(i, d), g.cell(i, j), g.hy, g.cells() + g.cell(i, j)));
                }
            }
        }
        out
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Fourier-sum collocation derivatives `(D1, D2)` on `M` equispaced nodes.
pub fn fourier_derivatives(m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let half = (m / 2) as i64;
    let mut d1 = DMatrix::zeros(m, m);
    let mut d2 = DMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            let delta = 2.0 * PI * (r as f64 - c as f64) / m as f64;
            let (mut a1, mut a2) = (0.0, 0.0);
            for k in -half + 1..half {
                let kf = k as f64;
                a1 -= kf * (kf * delta).sin();
                a2 -= kf * kf * (kf * delta).cos();
            }
            let nyq = half as f64;
            a2 -= nyq * nyq * (nyq * delta).cos();
            d1[(r, c)] = a1 / m as f64;
            d2[(r, c)] = a2 / m as f64;
        }
    }
    (d1, d2)
}

/// Interaction potential of `strength · ψ` and its angular derivative,
/// `[cell][angle]`, by direct quadrature of the mollified kernel.
pub fn quadrature_potential(pr: &Problem, psi: &[f64], strength: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let g = &pr.grid;
    let m = pr.orient.len();
    let w = 2.0 * PI / m as f64;
    let vol = g.hx * g.hy;
    let (rx, ry) = pr.kernel.radius();
    let phi = |k: usize| 2.0 * PI * k as f64 / m as f64;
    let mut value = vec![vec![0.0; m]; g.cells()];
    let mut deriv = vec![vec![0.0; m]; g.cells()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let c = g.cell(i, j);
            for dj in -(ry as isize)..=ry as isize {
                for di in -(rx as isize)..=rx as isize {
                    let (si, sj) = (i as isize + di, j as isize + dj);
                    let (si, sj) = if g.is_periodic() {
                        (si.rem_euclid(g.nx as isize), sj.rem_euclid(g.ny as isize))
                    } else if si < 0 || sj < 0 || si >= g.nx as isize || sj >= g.ny as isize {
                        continue;
                    } else {
                        (si, sj)
                    };
                    let src = g.cell(si as usize, sj as usize);
                    let kw = strength * pr.kernel.weight(di, dj) * vol * w;
                    for k in 0..m {
                        for q in 0..m {
                            let d = phi(k) - phi(q);
                            let p = psi[src * m + q];
                            value[c][k] += kw * p * (1.0 - d.cos() * d.cos());
                            deriv[c][k] += kw * p * (2.0 * d).sin();
                        }
                    }
                }
            }
        }
    }
    (value, deriv)
}

pub struct FlowOracle {
    pub matrix: DMatrix<f64>,
    pub constraint: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// Velocity block, constraint and load of one fixed-point iteration.
pub fn flow_oracle(pr: &Problem, psi_bar: &[f64], psi_prev: &[f64], u_prev: &[f64]) -> FlowOracle {
    let g = &pr.grid;
    let p = &pr.params;
    let gh = Ghosts { g };
    let n = g.face_dofs();
    let cells = g.cells();
    let m = pr.orient.len();
    let w = 2.0 * PI / m as f64;
    let vol = g.hx * g.hy;
    let rede = p.re * p.de;
    let q0 = |s: f64| s.max(0.0).min(p.cutoff);
    let mm = |k: usize| {
        let a = 2.0 * PI * k as f64 / m as f64;
        ([a.cos(), a.sin()], [-a.sin(), a.cos()])
    };

    let grads: Vec<Vec<[f64; 4]>> = (0..n)
        .map(|a| {
            let e = unit(n, a);
            (0..cells).map(|c| gh.gradient(&e, c % g.nx, c / g.nx)).collect()
        })
        .collect();
    let conv: Vec<Vec<f64>> = (0..n).map(|b| gh.convect(u_prev, &unit(n, b))).collect();

    let mut a_mat = DMatrix::zeros(n, n);
    for a in 0..n {
        a_mat[(a, a)] += if gh.slot_active(a) { rede * vol } else { vol * rede.max(1.0) };
        for b in 0..n {
            let (ea, eb) = (unit(n, a), unit(n, b));
            let plus: Vec<f64> = ea.iter().zip(&eb).map(|(x, y)| x + y).collect();
            let minus: Vec<f64> = ea.iter().zip(&eb).map(|(x, y)| x - y).collect();
            let k = 0.25 * (gh.dirichlet(&plus) - gh.dirichlet(&minus));
            let skew = 0.5 * vol * (conv[b][a] - conv[a][b]);
            let mut poly = 0.0;
            for c in 0..cells {
                for kk in 0..m {
                    let (mv, _) = mm(kk);
                    let contract = |d: &[f64; 4]| {
                        d[0] * mv[0] * mv[0] + (d[1] + d[2]) * mv[0] * mv[1] + d[3] * mv[1] * mv[1]
                    };
                    poly += vol * w * q0(psi_bar[c * m + kk]) * contract(&grads[a][c]) * contract(&grads[b][c]);
                }
            }
            a_mat[(a, b)] += p.tau * rede * skew
                + p.tau * p.gamma * p.de * k
                + p.tau * (1.0 - p.gamma) * p.de / 2.0 * poly;
        }
    }

    let sum: Vec<f64> = psi_bar.iter().zip(psi_prev).map(|(x, y)| x + y).collect();
    let (pot, dpot) = quadrature_potential(pr, &sum, 0.5 * p.potential_strength);
    let s = p.tau * (1.0 - p.gamma);
    let mut rhs = DVector::zeros(n);
    for a in 0..n {
        if !gh.slot_active(a) {
            continue;
        }
        let mut f = rede * vol * u_prev[a];
        for &(l, r, h, slot) in &gh.faces() {
            if slot != a {
                continue;
            }
            for k in 0..m {
                let avg = 0.5 * (psi_bar[l * m + k] + psi_bar[r * m + k]);
                f -= s * vol * w * avg * (pot[r][k] - pot[l][k]) / h;
            }
        }
        for c in 0..cells {
            let d = &grads[a][c];
            for k in 0..m {
                let (mv, tv) = mm(k);
                let psi = psi_bar[c * m + k];
                let q = q0(psi);
                let t_grad_m = tv[0] * (d[0] * mv[0] + d[1] * mv[1]) + tv[1] * (d[2] * mv[0] + d[3] * mv[1]);
                let mm_grad = d[0] * mv[0] * mv[0] + (d[1] + d[2]) * mv[0] * mv[1] + d[3] * mv[1] * mv[1];
                let trace = d[0] + d[3];
                f -= s * vol * w * (q * t_grad_m * dpot[c][k] + psi * (2.0 * mm_grad - trace) + p.alpha * q * mm_grad);
            }
        }
        rhs[a] = f;
    }

    let mut constraint = DMatrix::zeros(cells, n);
    for b in 0..n {
        let e = unit(n, b);
        for c in 0..cells {
            constraint[(c, b)] = vol * gh.divergence(&e, c % g.nx, c / g.nx);
        }
    }
    FlowOracle { matrix: a_mat, constraint, rhs }
}

pub struct ConfigOracle {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// Smoluchowski operator `b(u)` and load `l(u, ψ̄)`; row = test node,
/// column = trial node, angle fastest.
pub fn config_oracle(pr: &Problem, u: &[f64], psi_bar: &[f64], psi_prev: &[f64]) -> ConfigOracle {
    let g = &pr.grid;
    let p = &pr.params;
    let gh = Ghosts { g };
    let m = pr.orient.len();
    let cells = g.cells();
    let len = cells * m;
    let node = g.hx * g.hy * 2.0 * PI / m as f64;
    let (d1, d2) = fourier_derivatives(m);
    let q0 = |s: f64| s.max(0.0).min(p.cutoff);
    let faces = gh.faces();

    // b(ψ, θ) for ψ = e_col, all θ at once
    let apply = |psi: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; len];
        for c in 0..cells {
            for r in 0..m {
                let mut lap = 0.0;
                for q in 0..m {
                    lap += d2[(r, q)] * psi[c * m + q];
                }
                out[c * m + r] += node * psi[c * m + r] - p.tau / p.de * node * lap;
            }
        }
        for &(l, r, h, slot) in &faces {
            for k in 0..m {
                let (pl, pr_) = (psi[l * m + k], psi[r * m + k]);
                let transport = -p.tau * node * u[slot] * 0.5 * (pl + pr_) / h;
                let diffusion = p.tau * p.epsilon * p.epsilon / p.de * node * (pr_ - pl) / (h * h);
                // θ = e_R contributes +1/h to ∇θ, θ = e_L contributes −1/h
                out[r * m + k] += transport + diffusion;
                out[l * m + k] -= transport + diffusion;
            }
        }
        out
    };
    let mut matrix = DMatrix::zeros(len, len);
    for col in 0..len {
        let v = apply(&unit(len, col));
        for (row, x) in v.into_iter().enumerate() {
            matrix[(row, col)] = x;
        }
    }

    let sum: Vec<f64> = psi_bar.iter().zip(psi_prev).map(|(x, y)| x + y).collect();
    let (pot, dpot) = quadrature_potential(pr, &sum, 0.5 * p.potential_strength);
    let mut rhs = DVector::from_iterator(len, psi_prev.iter().map(|v| node * v));
    let drift = p.tau * p.epsilon * p.epsilon / p.de * node;
    for &(l, r, h, _) in &faces {
        for k in 0..m {
            let q = 0.5 * (q0(psi_bar[l * m + k]) + q0(psi_bar[r * m + k]));
            let flux = drift * q * (pot[r][k] - pot[l][k]) / h / h;
            rhs[r * m + k] -= flux;
            rhs[l * m + k] += flux;
        }
    }
    for c in 0..cells {
        let d = gh.gradient(u, c % g.nx, c / g.nx);
        for k in 0..m {
            let a = 2.0 * PI * k as f64 / m as f64;
            let (mv, tv) = ([a.cos(), a.sin()], [-a.sin(), a.cos()]);
            let t_grad_m = tv[0] * (d[0] * mv[0] + d[1] * mv[1]) + tv[1] * (d[2] * mv[0] + d[3] * mv[1]);
            let coef = node * q0(psi_bar[c * m + k]) * (p.tau * t_grad_m - p.tau / p.de * dpot[c][k]);
            // ∂_φ θ at node k for θ = e_(c, r) is D1[k][r]
            for r in 0..m {
                rhs[c * m + r] += coef * d1[(k, r)];
            }
        }
    }
    ConfigOracle { matrix, rhs }
}

/// Dense solve of the bordered saddle point `[A −Bᵀ 0; B 0 1; 0 1ᵀ 0]`
/// with a zero-mean pressure.
pub fn dense_saddle(o: &FlowOracle) -> (DVector<f64>, DVector<f64>) {
    let n = o.matrix.nrows();
    let c = o.constraint.nrows();
    let size = n + c + 1;
    let mut k = DMatrix::zeros(size, size);
    k.view_mut((0, 0), (n, n)).copy_from(&o.matrix);
    k.view_mut((0, n), (n, c)).copy_from(&(-o.constraint.transpose()));
    k.view_mut((n, 0), (c, n)).copy_from(&o.constraint);
    for i in 0..c {
        k[(n + i, n + c)] = 1.0;
        k[(n + c, n + i)] = 1.0;
    }
    let mut b = DVector::zeros(size);
    b.rows_mut(0, n).copy_from(&o.rhs);
    let x = k.lu().solve(&b).expect("bordered saddle point is nonsingular");
    (x.rows(0, n).into_owned(), x.rows(n, c).into_owned())
}

/// Random discretely solenoidal face field from a streamfunction on nodes
/// (zero on walls in walled mode).
pub fn solenoidal(g: &DomainGrid, node_value: &mut impl FnMut() -> f64) -> Vec<f64> {
    let (nx, ny) = (g.nx, g.ny);
    let mut s = vec![vec![0.0; ny + 1]; nx + 1];
    for (i, col) in s.iter_mut().enumerate() {
        for (j, v) in col.iter_mut().enumerate() {
            let boundary = i == 0 || j == 0 || i == nx || j == ny;
            if g.is_periodic() || !boundary {
                *v = node_value();
            }
        }
    }
    if g.is_periodic() {
        for j in 0..=ny {
            s[nx][j] = s[0][j];
        }
        for col in s.iter_mut() {
            col[ny] = col[0];
        }
    }
    let mut u = vec![0.0; g.face_dofs()];
    for j in 0..ny {
        for i in 0..nx {
            u[g.cell(i, j)] = (s[i][j + 1] - s[i][j]) / g.hy;
            u[g.cells() + g.cell(i, j)] = -(s[i + 1][j] - s[i][j]) / g.hx;
        }
    }
    u
}
