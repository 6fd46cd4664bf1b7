#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use relaycache_core::analytic::{KktCoefficients, TierSpec};
use relaycache_core::NetworkConfig;
use statrs::function::gamma::gamma;

/// Nodes and weights of a Gauss rule from its Jacobi matrix.
pub fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&vec![0.0; n], &off, 2.0)
}

pub fn laguerre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|i| i as f64).collect();
    golub_welsch(&diag, &off, 1.0)
}

/// Composite Gauss–Legendre quadrature on `[a, b]`.
pub struct Composite {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Composite {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = legendre_rule(order);
        let h = (b - a) / panels as f64;
        let mut x = Vec::with_capacity(panels * order);
        let mut w = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let c = a + h * (p as f64 + 0.5);
            for (xi, wi) in gx.iter().zip(&gw) {
                x.push(c + 0.5 * h * xi);
                w.push(0.5 * h * wi);
            }
        }
        Composite { x, w }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.x.iter().zip(&self.w).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `∫_a^b f` in the log variable, for `0 < a < b`.
pub fn log_integral<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    Composite::new(a.ln(), b.ln(), panels, 16).integrate(|u| {
        let x = u.exp();
        f(x) * x
    })
}

/// Two-sample-free KS distance between two densities sampled on a log grid.
pub fn ks_distance<F: FnMut(f64) -> f64, G: FnMut(f64) -> f64>(
    mut f: F,
    mut g: G,
    lo: f64,
    hi: f64,
    points: usize,
) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / points as f64;
    let mut cf = vec![0.0; points + 1];
    let mut cg = vec![0.0; points + 1];
    let (mut pf, mut pg) = (0.0, 0.0);
    for i in 0..=points {
        let x = (a + h * i as f64).exp();
        let (vf, vg) = (f(x) * x, g(x) * x);
        if i > 0 {
            cf[i] = cf[i - 1] + 0.5 * h * (vf + pf);
            cg[i] = cg[i - 1] + 0.5 * h * (vg + pg);
        }
        pf = vf;
        pg = vg;
    }
    let (mf, mg) = (cf[points], cg[points]);
    cf.iter()
        .zip(&cg)
        .map(|(u, v)| (u / mf - v / mg).abs())
        .fold(0.0, f64::max)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `Λ([0, x])` of `tier` by direct quadrature over distance.
pub fn intensity_oracle(tier: &TierSpec, x: f64) -> f64 {
    let area = |radius: f64, los: bool| {
        Composite::new(0.0, radius, 64, 16).integrate(|v| {
            let b = (-tier.beta * v).exp();
            2.0 * PI * tier.density * v * if los { b } else { 1.0 - b }
        })
    };
    area(tier.radius(x, true), true) + area(tier.radius(x, false), false)
}

// 2D trapezoid over (ln v, s) with the fading density evaluated at v^α/ξ + s
pub fn blocked_grid(density: f64, xi: f64, los: bool, cfg: &NetworkConfig) -> f64 {
    let alpha = cfg.alpha(los);
    let n = cfg.nakagami(los) as f64;
    let norm = n.powf(n) / gamma(n);
    let fading = |g: f64| norm * g.powf(n - 1.0) * (-n * g).exp();
    let (u0, u1) = (1e-2f64.ln(), ((200.0 / n) * xi).powf(1.0 / alpha).ln());
    let s_max = 60.0 / n;
    let (nu, ns) = (3000, 3000);
    let (hu, hs) = ((u1 - u0) / nu as f64, s_max / ns as f64);
    let mut total = 0.0;
    for i in 0..=nu {
        let v = (u0 + hu * i as f64).exp();
        let base = v.powf(alpha) / xi;
        let mut inner = 0.0;
        for j in 0..=ns {
            let w = if j == 0 || j == ns { 0.5 } else { 1.0 };
            inner += w * fading(base + hs * j as f64);
        }
        let w = if i == 0 || i == nu { 0.5 } else { 1.0 };
        total += w * 2.0 * PI * density * v * v * (-cfg.beta * v).exp() * inner * hs;
    }
    total * hu
}

/// Best noise-limited objective on the 0.01 lattice of the feasible set.
pub fn grid_best(c: &KktCoefficients, a: &[f64], cap: f64) -> f64 {
    let f = a.len();
    let steps = 101usize;
    let mut idx = vec![0usize; f];
    let mut best: f64 = 0.0;
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| i as f64 * 0.01).collect();
        if p.iter().sum::<f64>() <= cap + 1e-12 {
            best = best.max(c.objective(a, &p));
        }
        let mut d = 0;
        while d < f {
            idx[d] += 1;
            if idx[d] < steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == f {
            return best;
        }
    }
}
