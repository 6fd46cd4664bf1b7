//! Polyblock outer approximation for maximising an increasing objective
//! over `{p ∈ [0, 1]^F : Σ p ≤ C}`.
//!
//! The search runs on `y = p + 1` inside the normal set
//! `{y ∈ [0, 2]^F : Σ max(y_i − 1, 0) ≤ C}` with `ψ(y) = f(clamp(y − 1, 0, 1))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAMMA_TOL: f64 = 1e-9;
const DOMINANCE_SCAN_LIMIT: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoaOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub max_vertices: usize,
}

impl Default for PoaOptions {
    fn default() -> Self {
        PoaOptions {
            epsilon: 0.01,
            max_iterations: 10_000,
            max_vertices: 100_000,
        }
    }
}

/// A polyblock vertex in shifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub coords: Vec<f64>,
    /// `ψ(v)`, an upper bound on the objective inside the box `[0, v]`.
    pub bound: f64,
    pub projection: Vec<f64>,
    /// `ψ(Υ(v))`.
    pub cached_objective: f64,
}

impl Vertex {
    /// `‖v − Υ(v)‖ / ‖v‖`.
    pub fn relative_gap(&self) -> f64 {
        let norm = self.coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let diff = self
            .coords
            .iter()
            .zip(&self.projection)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        diff / norm
    }
}

#[derive(Debug, Clone)]
pub struct PolyblockState {
    pub vertices: Vec<Vertex>,
    pub iteration: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaResult {
    pub probs: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max ψ(v)` over the vertex set, per iteration.
    pub upper_bounds: Vec<f64>,
    /// Best feasible value, per iteration.
    pub best_values: Vec<f64>,
}

/// `Υ(v) = γ₀ v` with `γ₀ = max{γ ∈ [0, 1] : γ v ∈ Z}`.
pub fn project_to_boundary<M>(v: &[f64], member: M) -> Result<Vec<f64>>
where
    M: Fn(&[f64]) -> bool,
{
    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidArgument("vertex must lie in the nonnegative orthant".into()));
    }
    if member(v) {
        return Ok(v.to_vec());
    }
    if !member(&vec![0.0; v.len()]) {
        return Err(Error::InvalidState("feasible set does not contain the origin".into()));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut scaled = vec![0.0; v.len()];
    while hi - lo > GAMMA_TOL {
        let mid = 0.5 * (lo + hi);
        for (s, x) in scaled.iter_mut().zip(v) {
            *s = mid * x;
        }
        if member(&scaled) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(v.iter().map(|x| lo * x).collect())
}

fn unshift(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| (v - 1.0).clamp(0.0, 1.0)).collect()
}

fn check_monotone<F>(objective: &F, f_count: usize) -> Result<()>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let step = 0.05;
    let bases: [Box<dyn Fn(usize) -> f64>; 3] = [
        Box::new(|_| 0.2),
        Box::new(|_| 0.6),
        Box::new(|i| if i % 2 == 0 { 0.1 } else { 0.85 }),
    ];
    for base in &bases {
        let p: Vec<f64> = (0..f_count).map(base).collect();
        let at = objective(&p);
        let tol = 1e-9 * at.abs().max(1.0);
        for i in 0..f_count {
            let mut q = p.clone();
            q[i] += step;
            let up = objective(&q);
            if !(up >= at - tol) {
                return Err(Error::ContractViolation(format!(
                    "objective decreases along coordinate {i}: {at} -> {up}"
                )));
            }
        }
    }
    Ok(())
}

/// CP-POA: maximises the increasing `objective` subject to `Σ p ≤ cache_size`.
pub fn cp_poa<F>(objective: F, f_count: usize, cache_size: f64, opts: PoaOptions) -> Result<PoaResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if f_count == 0 {
        return Err(Error::InvalidArgument("empty catalog".into()));
    }
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {} must be positive", opts.epsilon)));
    }
    if !(cache_size >= 0.0) {
        return Err(Error::InvalidArgument(format!("cache size {cache_size} invalid")));
    }
    check_monotone(&objective, f_count)?;

    let member = |y: &[f64]| {
        y.iter().all(|&v| (0.0..=2.0).contains(&v))
            && y.iter().map(|&v| (v - 1.0).max(0.0)).sum::<f64>() <= cache_size
    };
    let psi = |y: &[f64]| objective(&unshift(y));
    let make_vertex = |coords: Vec<f64>| -> Result<Vertex> {
        let projection = project_to_boundary(&coords, member)?;
        Ok(Vertex {
            bound: psi(&coords),
            cached_objective: psi(&projection),
            coords,
            projection,
        })
    };

    let root = make_vertex(vec![2.0; f_count])?;
    let mut state = PolyblockState {
        best_point: unshift(&root.projection),
        best_value: root.cached_objective,
        vertices: vec![root],
        iteration: 0,
        epsilon: opts.epsilon,
    };
    let mut upper_bounds = Vec::new();
    let mut best_values = Vec::new();
    let mut converged = false;

    while state.iteration < opts.max_iterations {
        let Some(idx) = state
            .vertices
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cached_objective.total_cmp(&b.1.cached_objective))
            .map(|(i, _)| i)
        else {
            converged = true;
            break;
        };
        state.iteration += 1;
        upper_bounds.push(state.vertices.iter().map(|v| v.bound).fold(f64::NEG_INFINITY, f64::max));
        best_values.push(state.best_value);
        let v = state.vertices.swap_remove(idx);
        if v.relative_gap() <= state.epsilon {
            converged = true;
            break;
        }
        let children = (0..f_count)
            .into_par_iter()
            .filter(|&i| v.projection[i] < v.coords[i])
            .map(|i| {
                let mut c = v.coords.clone();
                c[i] = v.projection[i];
                make_vertex(c)
            })
            .collect::<Result<Vec<_>>>()?;
        for child in &children {
            if child.cached_objective > state.best_value {
                state.best_value = child.cached_objective;
                state.best_point = unshift(&child.projection);
            }
        }
        let best = state.best_value;
        state.vertices.retain(|u| u.bound > best);
        let scan = state.vertices.len() <= DOMINANCE_SCAN_LIMIT;
        for child in children {
            if child.bound <= best {
                continue;
            }
            let dominated = scan
                && state
                    .vertices
                    .iter()
                    .any(|u| u.coords.iter().zip(&child.coords).all(|(a, b)| b <= a));
            if !dominated {
                state.vertices.push(child);
            }
        }
        if state.vertices.len() > opts.max_vertices {
            state.vertices.sort_by(|a, b| b.bound.total_cmp(&a.bound));
            state.vertices.truncate(opts.max_vertices);
        }
    }
    if !converged {
        log::warn!(
            "polyblock search stopped after {} iterations without meeting epsilon {}",
            state.iteration,
            state.epsilon
        );
    }
    Ok(PoaResult {
        value: state.best_value,
        probs: state.best_point,
        iterations: state.iteration,
        converged,
        upper_bounds,
        best_values,
    })
}
