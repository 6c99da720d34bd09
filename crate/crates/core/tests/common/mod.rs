//! Test-only oracles. Nothing here calls into the prox or solver code it is
//! used to check; nalgebra is used as a container and for small dense solves.

#![allow(dead_code)]

use flr::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        scale * rng.sample::<f64, _>(StandardNormal)
    })
}

/// Singular values by one-sided Jacobi rotations, sorted nonincreasing.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_singular_values(m: &Mat) -> Vec<f64> {
    // Work on the orientation with at least as many rows as columns.
    let a = if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = a.shape();
    let mut u: Vec<Vec<f64>> = (0..cols)
        .map(|j| a.column(j).iter().copied().collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = u[p].iter().map(|v| v * v).sum();
                let beta: f64 = u[q].iter().map(|v| v * v).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-300 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = u
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn jacobi_nuclear(m: &Mat) -> f64 {
    jacobi_singular_values(m).iter().sum()
}

/// Minimizes `f` on `[lo, hi]` by golden-section search.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    f(0.5 * (lo + hi)).min(fa).min(fb)
}

pub fn half_sq_dist(a: &Mat, b: &Mat) -> f64 {
    0.5 * (a - b).norm_squared()
}

/// `τ‖X‖_* + ½‖X − M‖²` with the nuclear norm from Jacobi.
pub fn nuclear_prox_objective(x: &Mat, m: &Mat, tau: f64) -> f64 {
    tau * jacobi_nuclear(x) + half_sq_dist(x, m)
}

/// Minimum of `τ/2(‖P‖² + ‖Q‖²) + ½‖PQᵀ − M‖²` over full-width factors by
/// alternating ridge solves. Its minimum equals the nuclear-norm prox value.
pub fn nuclear_prox_oracle(m: &Mat, tau: f64, seed: u64) -> f64 {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    let mut rng = rng(seed);
    let mut p = gaussian(&mut rng, rows, r, 1.0);
    let mut q = gaussian(&mut rng, cols, r, 1.0);
    let eye = Mat::identity(r, r);
    let value = |p: &Mat, q: &Mat| {
        0.5 * tau * (p.norm_squared() + q.norm_squared()) + half_sq_dist(&(p * q.transpose()), m)
    };
    let mut last = value(&p, &q);
    for _ in 0..200_000 {
        let gq = q.transpose() * &q + &eye * tau;
        p = (m * &q) * gq.try_inverse().expect("ridge system is positive definite");
        let gp = p.transpose() * &p + &eye * tau;
        q = (m.transpose() * &p) * gp.try_inverse().expect("ridge system is positive definite");
        let now = value(&p, &q);
        if (last - now).abs() <= 1e-16 * (1.0 + now.abs()) {
            last = now;
            break;
        }
        last = now;
    }
    last
}

/// `ω‖E‖₁ + ½‖E − M‖²` minimized entry by entry with golden-section search.
pub fn l1_prox_oracle(m: &Mat, omega: f64) -> f64 {
    m.iter()
        .map(|&v| {
            let f = |e: f64| omega * e.abs() + 0.5 * (e - v) * (e - v);
            golden_section(f, -v.abs() - 1.0, v.abs() + 1.0)
        })
        .sum()
}

pub fn l1_prox_objective(e: &Mat, m: &Mat, omega: f64) -> f64 {
    omega * e.iter().map(|v| v.abs()).sum::<f64>() + half_sq_dist(e, m)
}

/// `ξ Σ‖eᵢ‖ + ½‖E − M‖²` per row. For a fixed row length the quadratic is
/// smallest along `mᵢ`, leaving a search over the length alone.
pub fn l21_prox_oracle(m: &Mat, xi: f64) -> f64 {
    m.row_iter()
        .map(|row| {
            let r = row.norm();
            let f = |t: f64| xi * t + 0.5 * (t - r) * (t - r);
            golden_section(f, 0.0, r + 1.0)
        })
        .sum()
}

pub fn l21_prox_objective(e: &Mat, m: &Mat, xi: f64) -> f64 {
    xi * e.row_iter().map(|r| r.norm()).sum::<f64>() + half_sq_dist(e, m)
}

/// B-block terms of the augmented Lagrangian, everything else held fixed.
#[allow(clippy::too_many_arguments)]
pub fn b_block_objective(
    b: &Mat,
    ytilde: &Mat,
    el: &Mat,
    kj: &Mat,
    m2: &Mat,
    m4: &Mat,
    mu: f64,
) -> f64 {
    let r2 = ytilde - b - el;
    let r4 = b - kj;
    m2.dot(&r2) + m4.dot(&r4) + 0.5 * mu * (r2.norm_squared() + r4.norm_squared())
}

pub struct RandomProblem {
    pub state: flr::solver::SolverState,
    pub xtilde: Mat,
    pub ytilde: Mat,
    pub hp: flr::solver::Hyperparams,
}

/// A solver state with every iterate and multiplier drawn at random, plus a
/// random feature matrix and one-hot labels of matching shapes.
pub fn random_problem(seed: u64, n: usize, d: usize, c: usize) -> RandomProblem {
    let mut r = rng(seed);
    let hp = flr::solver::Hyperparams {
        lambda1: r.random_range(0.05..1.0),
        lambda2: r.random_range(0.05..1.0),
        lambda3: r.random_range(0.05..1.0),
        ..flr::solver::Hyperparams::default()
    };
    let mut state = flr::solver::SolverState::zeros(n, d, c, &hp).unwrap();
    state.x = gaussian(&mut r, n, d, 1.0);
    state.z = gaussian(&mut r, d, c, 1.0);
    state.b = Mat::from_fn(n, c, |_, _| r.random_range(0.0..1.0));
    state.j = gaussian(&mut r, d, c, 1.0);
    state.k = gaussian(&mut r, n, d, 1.0);
    state.ef = gaussian(&mut r, n, d, 0.5);
    state.el = gaussian(&mut r, n, c, 0.5);
    state.m1 = gaussian(&mut r, n, d, 1.0);
    state.m2 = gaussian(&mut r, n, c, 1.0);
    state.m3 = gaussian(&mut r, d, c, 1.0);
    state.m4 = gaussian(&mut r, n, c, 1.0);
    state.m5 = gaussian(&mut r, n, d, 1.0);
    state.mu = r.random_range(0.2..5.0);
    let xtilde = gaussian(&mut r, n, d, 2.0);
    let mut ytilde = Mat::zeros(n, c);
    for i in 0..n {
        let k = r.random_range(0..c);
        ytilde[(i, k)] = 1.0;
    }
    RandomProblem {
        state,
        xtilde,
        ytilde,
        hp,
    }
}

/// Worst-case violations of the block-optimality conditions at one state.
#[derive(Debug, Default, Clone, Copy)]
pub struct BlockReport {
    /// `‖∂L/∂J‖/μ` after the J update.
    pub j_stationarity: f64,
    /// `‖∂L/∂K‖/μ` after the K update.
    pub k_stationarity: f64,
    /// Largest central-difference partial of the B-block objective at the
    /// unprojected B minimizer.
    pub b_gradient: f64,
    /// Largest increase of the augmented Lagrangian over one block update.
    pub max_increase: f64,
}

pub fn block_report(p: &RandomProblem) -> BlockReport {
    let (xt, yt, hp) = (&p.xtilde, &p.ytilde, &p.hp);
    let mut s = p.state.clone();
    let mu = s.mu;
    let mut report = BlockReport::default();

    // B: gradient of the smooth block objective at the unprojected minimizer.
    let b0 = s.b_unconstrained(yt);
    let kj = &s.k * &s.j;
    let h = 1e-4;
    for idx in 0..b0.len() {
        let (mut plus, mut minus) = (b0.clone(), b0.clone());
        plus[idx] += h;
        minus[idx] -= h;
        let g = (b_block_objective(&plus, yt, &s.el, &kj, &s.m2, &s.m4, mu)
            - b_block_objective(&minus, yt, &s.el, &kj, &s.m2, &s.m4, mu))
            / (2.0 * h);
        report.b_gradient = report.b_gradient.max(g.abs());
    }

    let mut al = s.augmented_lagrangian(xt, yt, hp).unwrap();
    let mut step = |s: &mut flr::solver::SolverState, report: &mut BlockReport| {
        let now = s.augmented_lagrangian(xt, yt, hp).unwrap();
        report.max_increase = report.max_increase.max(now - al);
        al = now;
    };
    s.x = s.update_x(xt).unwrap();
    step(&mut s, &mut report);
    s.z = s.update_z(hp).unwrap();
    step(&mut s, &mut report);
    s.b = s.update_b(yt).unwrap();
    step(&mut s, &mut report);
    s.j = s.update_j().unwrap();
    step(&mut s, &mut report);
    let grad_j = -&s.m3 / mu
        - s.k.transpose() * &s.m4 / mu
        - (&s.z - &s.j)
        - s.k.transpose() * (&s.b - &s.k * &s.j);
    report.j_stationarity = grad_j.norm();
    s.k = s.update_k().unwrap();
    step(&mut s, &mut report);
    let grad_k = -&s.m4 * s.j.transpose() / mu
        - &s.m5 / mu
        - (&s.b - &s.k * &s.j) * s.j.transpose()
        - (&s.x - &s.k);
    report.k_stationarity = grad_k.norm();
    s.ef = s.update_ef(xt, hp).unwrap();
    step(&mut s, &mut report);
    s.el = s.update_el(yt, hp).unwrap();
    step(&mut s, &mut report);
    report
}
