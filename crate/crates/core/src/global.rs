//! Maximization of the squared model distance over the design space.
//!
//! Lattices are enumerated exhaustively. Boxes are scanned on a regular grid,
//! and the best grid points are polished with a projected quasi-Newton ascent.
//! Equal values are resolved towards the lexicographically smallest point.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::design::{lex_cmp, DesignPoint, DesignSpace};
use crate::error::{Error, Result};
use crate::model::ModelPair;

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalSearchConfig {
    pub grid_per_dim: usize,
    pub refine_top: usize,
    pub local_tol: f64,
}

impl Default for GlobalSearchConfig {
    fn default() -> Self {
        Self {
            grid_per_dim: 64,
            refine_top: 5,
            local_tol: 1e-10,
        }
    }
}

impl GlobalSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_per_dim < 2 {
            return Err(Error::InvalidConfig("grid_per_dim must be at least 2".into()));
        }
        if self.refine_top < 1 {
            return Err(Error::InvalidConfig("refine_top must be at least 1".into()));
        }
        if !(self.local_tol > 0.0) {
            return Err(Error::InvalidConfig("local_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Is `(a, va)` strictly better than `(b, vb)`?
fn better(va: f64, a: &[f64], vb: f64, b: &[f64]) -> bool {
    match va.partial_cmp(&vb) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => lex_cmp(a, b) == Ordering::Less,
        _ => false,
    }
}

/// Best point among `candidates`, skipping those whose evaluation failed.
fn argmax(candidates: &[(Vec<f64>, Result<f64>)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (x, v)) in candidates.iter().enumerate() {
        let Ok(v) = v else { continue };
        match best {
            Some((b, bv)) if !better(*v, x, bv, &candidates[b].0) => {}
            _ => best = Some((i, *v)),
        }
    }
    best
}

fn evaluate(pair: &ModelPair, theta: &[f64], xs: Vec<Vec<f64>>) -> Vec<(Vec<f64>, Result<f64>)> {
    xs.into_par_iter()
        .map(|x| {
            let v = DesignPoint::new(x.clone()).and_then(|p| pair.squared_distance(&p, theta));
            (x, v)
        })
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Regular grid with `n` points per dimension (one for degenerate sides),
/// last coordinate fastest.
pub(crate) fn box_grid(lower: &[f64], upper: &[f64], n: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| linspace(*l, *u, n))
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect());
        for d in (0..axes.len()).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Finds `argmax_x phi(x, theta_hat)` over `space`.
pub fn maximize_distance(
    pair: &ModelPair,
    theta_hat: &[f64],
    space: &DesignSpace,
    cfg: &GlobalSearchConfig,
) -> Result<(DesignPoint, f64)> {
    cfg.validate()?;
    match space {
        DesignSpace::Lattice { .. } => {
            let xs = space
                .lattice_points()
                .into_iter()
                .map(DesignPoint::into_inner)
                .collect();
            let evals = evaluate(pair, theta_hat, xs);
            let (i, v) = argmax(&evals).ok_or(Error::GlobalSearch)?;
            Ok((DesignPoint::new(evals[i].0.clone())?, v))
        }
        DesignSpace::Box { lower, upper } => {
            let evals = evaluate(pair, theta_hat, box_grid(lower, upper, cfg.grid_per_dim));
            let mut order: Vec<usize> = (0..evals.len()).filter(|&i| evals[i].1.is_ok()).collect();
            if order.is_empty() {
                return Err(Error::GlobalSearch);
            }
            let value = |i: usize| *evals[i].1.as_ref().unwrap();
            order.sort_by(|&a, &b| {
                value(b)
                    .total_cmp(&value(a))
                    .then_with(|| lex_cmp(&evals[a].0, &evals[b].0))
            });
            order.truncate(cfg.refine_top);

            let refined: Vec<(Vec<f64>, Result<f64>)> = order
                .par_iter()
                .map(|&i| {
                    let f = |x: &[f64]| -> Result<f64> {
                        pair.squared_distance(&DesignPoint::new(x.to_vec())?, theta_hat)
                    };
                    match ascend(&f, &evals[i].0, value(i), lower, upper, cfg.local_tol) {
                        Ok((x, v)) => (x, Ok(v)),
                        Err(_) => (evals[i].0.clone(), Ok(value(i))),
                    }
                })
                .collect();

            let mut pool = refined;
            let (gi, _) = argmax(&evals).expect("at least one grid value");
            pool.push((evals[gi].0.clone(), Ok(value(gi))));
            let (i, v) = argmax(&pool).expect("pool is nonempty");
            Ok((DesignPoint::new(pool[i].0.clone())?, v))
        }
    }
}

fn fd_gradient<F>(f: &F, x: &[f64], fx: f64, lower: &[f64], upper: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let mut h = 1e-7 * x[j].abs().max(1.0);
        if x[j] + h > upper[j] {
            h = -h;
        }
        if x[j] + h < lower[j] {
            continue;
        }
        xp[j] = x[j] + h;
        let step = xp[j] - x[j];
        g[j] = (f(&xp)? - fx) / step;
        xp[j] = x[j];
    }
    Ok(g)
}

/// Projected BFGS ascent on `f` inside the box. Returns the best point seen.
fn ascend<F>(
    f: &F,
    x0: &[f64],
    f0: f64,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let diam = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| (u - l) * (u - l))
        .sum::<f64>()
        .sqrt();
    if diam == 0.0 {
        return Ok((x0.to_vec(), f0));
    }
    let project = |x: &mut [f64]| {
        for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
            *v = v.clamp(*l, *u);
        }
    };

    // Work with the ascent gradient g = grad f; step along +H g.
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut g = fd_gradient(f, &x, fx, lower, upper)?;
    let mut h = identity(n);
    let mut fresh = true;

    for _ in 0..200 {
        let free: Vec<bool> = (0..n)
            .map(|j| !((x[j] <= lower[j] && g[j] < 0.0) || (x[j] >= upper[j] && g[j] > 0.0)))
            .collect();
        let pg = (0..n).filter(|&j| free[j]).map(|j| g[j].abs()).fold(0.0, f64::max);
        if pg <= tol * (1.0 + fx.abs()) {
            break;
        }
        let mut d = vec![0.0; n];
        for i in 0..n {
            if free[i] {
                d[i] = (0..n).filter(|&j| free[j]).map(|j| h[i][j] * g[j]).sum();
            }
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope > 0.0) {
            h = identity(n);
            fresh = true;
            for i in 0..n {
                d[i] = if free[i] { g[i] } else { 0.0 };
            }
            slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        }
        let d_norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d_norm == 0.0 || slope <= 0.0 {
            break;
        }
        let mut alpha = if fresh { 0.05 * diam / d_norm } else { 1.0 };

        let mut accepted = None;
        for _ in 0..60 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            project(&mut xn);
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let gain: f64 = s.iter().zip(&g).map(|(a, b)| a * b).sum();
            if s.iter().all(|v| *v == 0.0) {
                break;
            }
            if let Ok(fn_) = f(&xn) {
                if fn_ >= fx + 1e-4 * gain.max(0.0) && fn_ >= fx {
                    accepted = Some((xn, fn_, s));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_, s)) = accepted else { break };
        let gn = fd_gradient(f, &xn, fn_, lower, upper)?;
        // Minimization form: y = grad(-f)_new - grad(-f)_old.
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            if fresh {
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                h = identity(n).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        let step = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xnorm = xn.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = xn;
        fx = fn_;
        g = gn;
        if step <= tol * (1.0 + xnorm) {
            break;
        }
    }
    Ok((x, fx))
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Inverse-Hessian BFGS update.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * y[j]).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
