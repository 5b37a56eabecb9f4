//! Smallest nonzero eigenvalue `λ₁` of the graph Laplacian `Δ = r·I − A`.
//!
//! Small graphs go through a dense symmetric eigendecomposition. Large ones
//! use a thick-restart Lanczos iteration on the orthogonal complement of the
//! constant vector, with full reorthogonalization and a deterministic
//! starting vector so that reports are reproducible bit for bit.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RegularMultigraph;
use crate::LOOP_CONVENTION;

pub const DEFAULT_DENSE_THRESHOLD: usize = 3000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("graph is disconnected ({components} components); λ₁ would be 0")]
    Disconnected { components: usize },
    #[error("graph has a single vertex and no nonzero eigenvalue")]
    NoNonzeroEigenvalue,
    #[error("{n} vertices exceeds the dense threshold {threshold}")]
    TooLargeForDense { n: usize, threshold: usize },
    #[error(
        "no convergence after {iterations} matvecs: best λ₁ ≈ {best:e}, residual {residual:e}"
    )]
    NotConverged {
        best: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub dense_threshold: usize,
    /// Largest Lanczos basis kept between restarts.
    pub krylov_dim: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50_000,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            krylov_dim: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda1: f64,
    pub method: Method,
    /// `‖Δv − λv‖ / ‖v‖`; 0 by convention for the dense method.
    pub residual: f64,
    /// Matrix-vector products (iterative) or 1 (dense).
    pub iterations: usize,
    pub tolerance: f64,
    pub connected: bool,
    pub converged: bool,
    pub loop_convention: String,
    /// Unit eigenvector from the iterative method, orthogonal to constants.
    #[serde(skip)]
    pub eigenvector: Option<Vec<f64>>,
}

/// `(connected, component count)` by breadth-first search.
pub fn connectivity(g: &RegularMultigraph) -> (bool, usize) {
    (g.is_connected(), g.components())
}

fn require_connected(g: &RegularMultigraph) -> Result<(), SpectralError> {
    if !g.is_connected() {
        return Err(SpectralError::Disconnected {
            components: g.components(),
        });
    }
    if g.n() < 2 {
        return Err(SpectralError::NoNonzeroEigenvalue);
    }
    Ok(())
}

/// Exact `λ₁` from the full spectrum; `n` must not exceed the default dense
/// threshold.
pub fn lambda1_dense(g: &RegularMultigraph) -> Result<SpectralReport, SpectralError> {
    if g.n() > DEFAULT_DENSE_THRESHOLD {
        return Err(SpectralError::TooLargeForDense {
            n: g.n(),
            threshold: DEFAULT_DENSE_THRESHOLD,
        });
    }
    dense_unchecked(g)
}

/// All eigenvalues of `Δ` in ascending order.
pub fn dense_spectrum(g: &RegularMultigraph) -> Vec<f64> {
    let n = g.n();
    let m = DMatrix::from_row_slice(n, n, &g.dense_laplacian());
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

fn dense_unchecked(g: &RegularMultigraph) -> Result<SpectralReport, SpectralError> {
    require_connected(g)?;
    let spectrum = dense_spectrum(g);
    Ok(SpectralReport {
        lambda1: spectrum[1].max(0.0),
        method: Method::Dense,
        residual: 0.0,
        iterations: 1,
        tolerance: 0.0,
        connected: true,
        converged: true,
        loop_convention: LOOP_CONVENTION.into(),
        eigenvector: None,
    })
}

/// Dense below `settings.dense_threshold`, Lanczos above.
pub fn lambda1(
    g: &RegularMultigraph,
    settings: &SolverSettings,
) -> Result<SpectralReport, SpectralError> {
    if g.n() <= settings.dense_threshold {
        dense_unchecked(g)
    } else {
        lambda1_iterative(g, settings.tol, settings.max_iter, settings.krylov_dim)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Deterministic pseudo-generic vector: `sin` of a scaled vertex index.
fn seeded_vector(n: usize, salt: usize) -> Vec<f64> {
    const GOLDEN: f64 = 1.618_033_988_749_895;
    let scale = GOLDEN * (salt + 1) as f64 + 0.5;
    (0..n).map(|i| ((i + 1) as f64 * scale).sin()).collect()
}

/// Orthonormalizes `w` against the basis and constants (two passes);
/// returns the coefficients of the first pass plus corrections.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        remove_mean(w);
        for (c, b) in coeffs.iter_mut().zip(basis) {
            let h = dot(b, w);
            axpy(-h, b, w);
            *c += h;
        }
    }
    remove_mean(w);
    coeffs
}

struct Ritz {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

fn ritz_pair(g: &RegularMultigraph, basis: &[Vec<f64>], y: &[f64]) -> Ritz {
    let n = g.n();
    let mut x = vec![0.0; n];
    for (b, &c) in basis.iter().zip(y) {
        axpy(c, b, &mut x);
    }
    remove_mean(&mut x);
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let ax = g.laplacian_apply(&x).expect("length matches");
    let value = dot(&x, &ax);
    let mut r = ax;
    axpy(-value, &x, &mut r);
    Ritz {
        value,
        vector: x,
        residual: norm(&r),
    }
}

/// `λ₁` by thick-restart Lanczos on `1^⊥`. Converged when the explicit
/// residual `‖Δx − λx‖` of the unit Ritz vector is at most `tol`.
pub fn lambda1_iterative(
    g: &RegularMultigraph,
    tol: f64,
    max_iter: usize,
    krylov_dim: usize,
) -> Result<SpectralReport, SpectralError> {
    if !(tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(tol));
    }
    require_connected(g)?;
    let n = g.n();
    let dim_max = (n - 1).min(krylov_dim.max(4));
    let keep = (dim_max / 2).max(1);

    let mut iterations = 0usize;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim_max + 1);
    // `t` is the projection Vᵀ Δ V, stored densely at full size.
    let mut t = DMatrix::<f64>::zeros(dim_max, dim_max);
    let mut best: Option<Ritz> = None;
    let mut salt = 0;

    let mut start = seeded_vector(n, salt);
    remove_mean(&mut start);
    let s = norm(&start);
    start.iter_mut().for_each(|x| *x /= s);
    basis.push(start);

    let mut w = vec![0.0; n];
    loop {
        let j = basis.len() - 1;
        g.laplacian_apply_into(&basis[j], &mut w)
            .expect("length matches");
        iterations += 1;
        let coeffs = orthogonalize(&basis, &mut w);
        for (i, &h) in coeffs.iter().enumerate() {
            t[(i, j)] = h;
            t[(j, i)] = h;
        }
        let beta = norm(&w);
        let k = basis.len();
        let exhausted = beta <= 1e-10 * (g.degree() as f64).max(1.0);
        let full = k == dim_max;

        if exhausted || full || k % 5 == 0 || iterations >= max_iter {
            let eig = SymmetricEigen::new(t.view((0, 0), (k, k)).into_owned());
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let lo = order[0];
            let estimate = beta * eig.eigenvectors[(k - 1, lo)].abs();

            if estimate <= tol || exhausted || iterations >= max_iter {
                let y: Vec<f64> = eig.eigenvectors.column(lo).iter().copied().collect();
                let ritz = ritz_pair(g, &basis, &y);
                iterations += 1;
                if ritz.residual <= tol {
                    debug_assert!(ritz.value <= 2.0 * g.degree() as f64 + 1e-9);
                    return Ok(SpectralReport {
                        lambda1: ritz.value.max(0.0),
                        method: Method::Iterative,
                        residual: ritz.residual,
                        iterations,
                        tolerance: tol,
                        connected: true,
                        converged: true,
                        loop_convention: LOOP_CONVENTION.into(),
                        eigenvector: Some(ritz.vector),
                    });
                }
                if best.as_ref().is_none_or(|b| ritz.residual < b.residual) {
                    best = Some(ritz);
                }
            }
            if iterations >= max_iter {
                let b = best.expect("a Ritz pair was formed");
                return Err(SpectralError::NotConverged {
                    best: b.value,
                    residual: b.residual,
                    iterations,
                });
            }

            if exhausted {
                // Krylov space is invariant; widen it with a fresh vector.
                if k >= n - 1 {
                    let b = best.expect("a Ritz pair was formed");
                    return Err(SpectralError::NotConverged {
                        best: b.value,
                        residual: b.residual,
                        iterations,
                    });
                }
                let mut fresh = None;
                for _ in 0..8 {
                    salt += 1;
                    let mut f = seeded_vector(n, salt);
                    orthogonalize(&basis, &mut f);
                    let nf = norm(&f);
                    if nf > 1e-6 {
                        f.iter_mut().for_each(|x| *x /= nf);
                        fresh = Some(f);
                        break;
                    }
                }
                let Some(f) = fresh else {
                    let b = best.expect("a Ritz pair was formed");
                    return Err(SpectralError::NotConverged {
                        best: b.value,
                        residual: b.residual,
                        iterations,
                    });
                };
                if full {
                    restart(&mut basis, &mut t, &eig, &order, keep);
                }
                basis.push(f);
                continue;
            }

            if full {
                restart(&mut basis, &mut t, &eig, &order, keep);
            }
        }

        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w.clone());
    }
}

/// Replaces the basis by its `keep` lowest Ritz vectors; the projected
/// matrix becomes diagonal on them.
fn restart(
    basis: &mut Vec<Vec<f64>>,
    t: &mut DMatrix<f64>,
    eig: &SymmetricEigen<f64, nalgebra::Dyn>,
    order: &[usize],
    keep: usize,
) {
    let n = basis[0].len();
    let kept: Vec<Vec<f64>> = order[..keep]
        .iter()
        .map(|&c| {
            let mut x = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(i, c)], b, &mut x);
            }
            x
        })
        .collect();
    *basis = kept;
    t.fill(0.0);
    for (i, &c) in order[..keep].iter().enumerate() {
        t[(i, i)] = eig.eigenvalues[c];
    }
}
