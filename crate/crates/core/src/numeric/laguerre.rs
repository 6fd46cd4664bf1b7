use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported Gauss–Laguerre order.
pub const MAX_ORDER: usize = 128;

/// Gauss–Laguerre rule for `∫₀^∞ e^-r g(r) dr ≈ Σ w_i g(r_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// `Σ w_i g(r_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * g(r))
            .sum()
    }
}

// Laguerre polynomials L_{n-1}(x), L_n(x) with a shared decimal exponent to
// survive the huge magnitudes at the outer roots of high orders.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64, i32) {
    let mut p_prev = 0.0;
    let mut p = 1.0;
    let mut scale = 0i32;
    for j in 1..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0 - x) * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
        if p.abs() > 1e100 {
            p *= 1e-100;
            p_prev *= 1e-100;
            scale += 100;
        }
    }
    (p_prev, p, scale)
}

/// Nodes are the roots of `L_q`; weights follow `w = r / ((q+1)² L_{q+1}(r)²)`.
pub fn gauss_laguerre(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "quadrature order must lie in [1, {MAX_ORDER}], got {order}"
        )));
    }
    let n = order as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(order);
    let mut z = 0.0;
    for i in 0..order {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * n),
            1 => z + 15.0 / (1.0 + 2.5 * n),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for _ in 0..100 {
            let (pm1, p, _) = laguerre_pair(order, z);
            // L_q'(z) = q (L_q − L_{q−1}) / z
            let dp = n * (p - pm1) / z;
            let step = p / dp;
            z -= step;
            if !z.is_finite() {
                break;
            }
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
            last_step = step.abs();
        }
        // rounding can make the final Newton steps dither just above the tolerance
        converged |= last_step <= 1e-11 * z.abs().max(1.0);
        if !converged || !(z > 0.0) || nodes.last().is_some_and(|&prev| z <= prev) {
            return Err(Error::Numeric(format!(
                "Laguerre root {i} of order {order} did not converge (last iterate {z})"
            )));
        }
        nodes.push(z);
    }
    let weights = nodes
        .iter()
        .map(|&r| {
            let (_, p, scale) = laguerre_pair(order + 1, r);
            let ln_l = p.abs().ln() + scale as f64 * std::f64::consts::LN_10;
            (r.ln() - 2.0 * (n + 1.0).ln() - 2.0 * ln_l).exp()
        })
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
    })
}
