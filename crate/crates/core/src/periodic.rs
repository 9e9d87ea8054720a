//! Midpoint-weight cubature for the periodic kernel
//!
//! ```text
//! Kf(s) = ∫∫_{[0,2π]²} f(σ) / (sin²((σ₁-s₁)/2) + sin²((σ₂-s₂)/2))^λ dσ
//! ```
//!
//! evaluated at a cell midpoint `s = (x'_i, x'_j)`. Off-diagonal weights are
//! the cell area times the kernel at the cell midpoint. The diagonal weight is
//! the integral of the regularised kernel `1 / (K^{-1} + h)` over the cell
//! centred on `s`, computed by a tensor Gauss rule.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{gauss_panel_integrate, oracle_integrate, OracleOptions, Rect, SummationPolicy};

/// Default ceiling for the Gauss order of the diagonal weight.
pub const DEFAULT_GAUSS_CEILING: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicKernelSpec {
    pub lambda: f64,
}

impl PeriodicKernelSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid(format!("kernel exponent must lie in (0, 1), got {lambda}")));
        }
        Ok(PeriodicKernelSpec { lambda })
    }

    /// Kernel as a function of the offsets `σ - s`.
    pub fn eval(&self, d1: f64, d2: f64) -> f64 {
        let a = (0.5 * d1).sin();
        let b = (0.5 * d2).sin();
        (a * a + b * b).powf(-self.lambda)
    }
}

/// Regularisation parameter and Gauss order for singular cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub h: f64,
    pub m_gauss: usize,
    /// Order the formula asked for before the ceiling was applied.
    pub m_requested: f64,
    pub clamped: bool,
}

pub fn choose_regularization(n: usize, lambda: f64, alpha: f64) -> Result<Regularization> {
    choose_regularization_with_ceiling(n, lambda, alpha, DEFAULT_GAUSS_CEILING)
}

/// `h = n^{-2(2λ+α)/(1-λ)}` and `m = max(⌊n^{(8λ+4α)/(1-λ)+α-3}⌋, 1)`, with `m`
/// capped at `ceiling`.
pub fn choose_regularization_with_ceiling(n: usize, lambda: f64, alpha: f64, ceiling: usize) -> Result<Regularization> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if n < 1 {
        return Err(Error::invalid("n must be positive"));
    }
    if ceiling < 1 {
        return Err(Error::invalid("Gauss ceiling must be >= 1"));
    }
    let nf = n as f64;
    let h = nf.powf(-2.0 * (2.0 * lambda + alpha) / (1.0 - lambda));
    let m_requested = nf.powf((8.0 * lambda + 4.0 * alpha) / (1.0 - lambda) + alpha - 3.0).floor().max(1.0);
    let clamped = m_requested > ceiling as f64;
    let m_gauss = if clamped { ceiling } else { m_requested as usize };
    Ok(Regularization { h, m_gauss, m_requested, clamped })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions {
    /// Hölder exponent of the integrand class; 1 for smooth integrands.
    pub alpha: f64,
    pub gauss_ceiling: usize,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions { alpha: 1.0, gauss_ceiling: DEFAULT_GAUSS_CEILING }
    }
}

/// Weights `p*_{kl}` for one evaluation cell, row-major in `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWeightTable {
    pub n: usize,
    pub lambda: f64,
    pub eval_cell: (usize, usize),
    pub weights: Vec<f64>,
    pub diag: Regularization,
}

impl PeriodicWeightTable {
    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.weights[k * self.n + l]
    }

    pub fn total(&self, policy: SummationPolicy) -> f64 {
        policy.sum(&self.weights)
    }
}

pub fn periodic_weights(n: usize, lambda: f64, i: usize, j: usize) -> Result<PeriodicWeightTable> {
    periodic_weights_with(n, lambda, i, j, &PeriodicOptions::default())
}

pub fn periodic_weights_with(
    n: usize,
    lambda: f64,
    i: usize,
    j: usize,
    opts: &PeriodicOptions,
) -> Result<PeriodicWeightTable> {
    let kernel = PeriodicKernelSpec::new(lambda)?;
    if n < 4 {
        return Err(Error::invalid(format!("periodic weights need n >= 4, got {n}")));
    }
    if i >= n || j >= n {
        return Err(Error::invalid(format!("evaluation cell ({i}, {j}) outside a {n}x{n} grid")));
    }
    let diag = choose_regularization_with_ceiling(n, lambda, opts.alpha, opts.gauss_ceiling)?;
    let nf = n as f64;
    let area = 4.0 * PI * PI / (nf * nf);
    // sin²(π d / n) with the offset reduced mod n, so cyclic shifts are exact.
    let s2: Vec<f64> = (0..n)
        .map(|d| {
            let s = (PI * d as f64 / nf).sin();
            s * s
        })
        .collect();
    let mut weights = vec![0.0; n * n];
    for k in 0..n {
        let a = s2[(k + n - i) % n];
        for l in 0..n {
            if k == i && l == j {
                continue;
            }
            let b = s2[(l + n - j) % n];
            weights[k * n + l] = area * (a + b).powf(-lambda);
        }
    }
    let half = PI / nf;
    let h = diag.h;
    weights[i * n + j] = gauss_panel_integrate(
        |x, y| {
            let a = (0.5 * x).sin();
            let b = (0.5 * y).sin();
            1.0 / ((a * a + b * b).powf(kernel.lambda) + h)
        },
        &Rect::new(-half, half, -half, half),
        diag.m_gauss,
    )?;
    Ok(PeriodicWeightTable { n, lambda, eval_cell: (i, j), weights, diag })
}

/// `γ(λ)`, the integral of the periodic kernel over one period.
pub fn gamma_constant(lambda: f64, tol: f64) -> Result<f64> {
    crate::theory::check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(4.0 * PI * PI);
    }
    let kernel = PeriodicKernelSpec { lambda };
    // One period centred on the singularity.
    let res = oracle_integrate(
        |x, y| kernel.eval(x, y),
        &Rect::new(-PI, PI, -PI, PI),
        tol,
        OracleOptions::singular_at(0.0, 0.0),
    )?;
    Ok(res.estimate)
}

/// `Σ p*_{kl} f(x'_k, x'_l)` for samples in row-major order.
#[allow(non_snake_case)]
pub fn eval_Kf(f_samples: &[f64], weights: &PeriodicWeightTable, policy: SummationPolicy) -> Result<f64> {
    if f_samples.len() != weights.weights.len() {
        return Err(Error::invalid(format!(
            "expected {} samples for an n = {} grid, got {}",
            weights.weights.len(),
            weights.n,
            f_samples.len()
        )));
    }
    Ok(policy.sum_iter(f_samples.iter().zip(&weights.weights).map(|(f, w)| f * w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_example() {
        let t = periodic_weights(4, 0.5, 0, 0).unwrap();
        let expected = PI * PI / 4.0 * 2f64.sqrt();
        assert!((t.weight(1, 0) - expected).abs() < 1e-13);
    }

    #[test]
    fn regularization_examples() {
        let r = choose_regularization(10, 0.5, 0.5).unwrap();
        assert!((r.h - 1e-6).abs() < 1e-20);
        assert_eq!(r.m_gauss, 64);
        assert!(r.clamped);
        assert!((r.m_requested - 10f64.powf(9.5).floor()).abs() < 1.0);
        let r = choose_regularization(10, 0.01, 0.01).unwrap();
        assert_eq!(r.m_gauss, 1);
        assert!(choose_regularization(10, 1.0, 0.5).is_err());
    }

    #[test]
    fn cyclic_shift_is_exact() {
        let n = 12;
        let a = periodic_weights(n, 0.4, 3, 5).unwrap();
        let b = periodic_weights(n, 0.4, 4, 5).unwrap();
        for k in 0..n {
            for l in 0..n {
                assert_eq!(a.weight(k, l).to_bits(), b.weight((k + 1) % n, l).to_bits());
            }
        }
    }

    #[test]
    fn axis_swap_symmetry() {
        let n = 10;
        let a = periodic_weights(n, 0.3, 2, 7).unwrap();
        let b = periodic_weights(n, 0.3, 7, 2).unwrap();
        for k in 0..n {
            for l in 0..n {
                assert_eq!(a.weight(k, l).to_bits(), b.weight(l, k).to_bits());
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let t = periodic_weights(4, 0.5, 0, 0).unwrap();
        assert!(eval_Kf(&[1.0; 15], &t, SummationPolicy::default()).is_err());
        assert_eq!(eval_Kf(&[0.0; 16], &t, SummationPolicy::default()).unwrap(), 0.0);
    }
}
