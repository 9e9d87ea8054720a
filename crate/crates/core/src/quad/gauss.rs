//! Gauss-Legendre rules on `[-1, 1]` and their tensor products on rectangles.

use std::sync::OnceLock;

use super::grid::Rect;
use crate::error::{Error, Result};

/// Largest order kept in the process-wide cache; larger orders are built on demand.
const CACHED_MAX: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on `P_m` from the Chebyshev-like initial guesses.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss rule needs at least one point");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(m, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One-dimensional rule on `[a, b]`.
    pub fn integrate_1d<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss-Legendre rule of order `m`.
pub fn gauss_legendre(m: usize) -> std::borrow::Cow<'static, GaussRule> {
    static CACHE: [OnceLock<GaussRule>; CACHED_MAX + 1] = [const { OnceLock::new() }; CACHED_MAX + 1];
    if m <= CACHED_MAX {
        std::borrow::Cow::Borrowed(CACHE[m].get_or_init(|| GaussRule::new(m)))
    } else {
        std::borrow::Cow::Owned(GaussRule::new(m))
    }
}

/// `m × m` tensor Gauss-Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussPanelRule {
    pub m: usize,
    rule: std::borrow::Cow<'static, GaussRule>,
}

impl GaussPanelRule {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("Gauss panel order must be >= 1"));
        }
        Ok(GaussPanelRule { m, rule: gauss_legendre(m) })
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    /// Mapped nodes and weights `(x, y, w)` on `rect`, in row-major order.
    pub fn points(&self, rect: &Rect) -> Vec<(f64, f64, f64)> {
        let (cx, cy) = rect.center();
        let hx = 0.5 * rect.width();
        let hy = 0.5 * rect.height();
        let r = &*self.rule;
        let mut out = Vec::with_capacity(self.m * self.m);
        for (xi, wi) in r.nodes.iter().zip(&r.weights) {
            for (yj, wj) in r.nodes.iter().zip(&r.weights) {
                out.push((cx + hx * xi, cy + hy * yj, wi * wj * hx * hy));
            }
        }
        out
    }

    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F, rect: &Rect) -> Result<f64> {
        if rect.is_degenerate() {
            return Err(Error::invalid(format!("degenerate rectangle {}", rect.id())));
        }
        let (cx, cy) = rect.center();
        let hx = 0.5 * rect.width();
        let hy = 0.5 * rect.height();
        let r = &*self.rule;
        let mut acc = 0.0;
        for (xi, wi) in r.nodes.iter().zip(&r.weights) {
            let x = cx + hx * xi;
            let mut row = 0.0;
            for (yj, wj) in r.nodes.iter().zip(&r.weights) {
                let v = f(x, cy + hy * yj);
                if !v.is_finite() {
                    return Err(Error::NonFinite { panel: rect.id() });
                }
                row += wj * v;
            }
            acc += wi * row;
        }
        Ok(acc * hx * hy)
    }
}

pub fn gauss_panel_integrate<F: Fn(f64, f64) -> f64>(f: F, rect: &Rect, m: usize) -> Result<f64> {
    GaussPanelRule::new(m)?.integrate(f, rect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_nodes() {
        let r = GaussRule::new(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = GaussRule::new(3);
        assert_eq!(r.nodes[1], 0.0);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_two() {
        for m in [1, 5, 17, 64, 200] {
            let s: f64 = GaussRule::new(m).weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m={m} sum={s}");
        }
    }

    #[test]
    fn panel_examples() {
        let unit = Rect::new(0.0, 1.0, 0.0, 1.0);
        assert!((gauss_panel_integrate(|_, _| 1.0, &unit, 3).unwrap() - 1.0).abs() < 1e-15);
        let sq = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let odd = gauss_panel_integrate(|x, y| (x * y).powi(3), &sq, 2).unwrap();
        assert!(odd.abs() < 1e-15);
        let even = gauss_panel_integrate(|x, y| (x * y).powi(2), &sq, 2).unwrap();
        assert!((even - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_reports_panel() {
        let r = Rect::new(0.0, 1.0, 0.0, 1.0);
        match gauss_panel_integrate(|_, _| f64::NAN, &r, 2) {
            Err(Error::NonFinite { panel }) => assert_eq!(panel.x1, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
