//! Blockwise tensor Lagrange interpolation.
//!
//! The node set per axis is `M·r + 1` equispaced points. Consecutive groups of
//! `r + 1` nodes (sharing their end nodes) form `M` blocks, and on each block
//! the interpolant is the tensor-product Lagrange polynomial of degree `r` per
//! axis. Shared edge nodes make the result continuous across blocks.

use crate::error::{Error, Result};
use crate::quad::Rect;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSpline2D {
    pub r: usize,
    pub blocks: usize,
    pub rect: Rect,
    /// Node values, row-major `(k, l)` with `k` along x.
    values: Vec<f64>,
}

pub fn build_local_spline(samples: &[f64], nodes_per_axis: usize, r: usize, rect: Rect) -> Result<LocalSpline2D> {
    if !(1..=3).contains(&r) {
        return Err(Error::invalid(format!("spline degree must be 1, 2 or 3, got {r}")));
    }
    if nodes_per_axis < r + 1 || !(nodes_per_axis - 1).is_multiple_of(r) {
        return Err(Error::invalid(format!("{nodes_per_axis} nodes per axis is not of the form M*{r} + 1")));
    }
    if samples.len() != nodes_per_axis * nodes_per_axis {
        return Err(Error::invalid(format!(
            "expected {} samples, got {}",
            nodes_per_axis * nodes_per_axis,
            samples.len()
        )));
    }
    if rect.is_degenerate() {
        return Err(Error::invalid("degenerate spline domain"));
    }
    Ok(LocalSpline2D { r, blocks: (nodes_per_axis - 1) / r, rect, values: samples.to_vec() })
}

impl LocalSpline2D {
    pub fn nodes_per_axis(&self) -> usize {
        self.blocks * self.r + 1
    }

    /// Node coordinate `i` along x and y.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let m = (self.nodes_per_axis() - 1) as f64;
        (self.rect.x0 + self.rect.width() * i as f64 / m, self.rect.y0 + self.rect.height() * j as f64 / m)
    }

    /// Block index and Lagrange basis values along one axis.
    fn basis(&self, x: f64, lo: f64, len: f64, out: &mut [f64; 4]) -> usize {
        let u = (x - lo) / len * self.blocks as f64;
        let b = (u.floor().max(0.0) as usize).min(self.blocks - 1);
        // Local coordinate in node units, 0..=r within the block.
        let s = (u - b as f64) * self.r as f64;
        for (i, o) in out.iter_mut().enumerate().take(self.r + 1) {
            let mut v = 1.0;
            for j in 0..=self.r {
                if j != i {
                    v *= (s - j as f64) / (i as f64 - j as f64);
                }
            }
            *o = v;
        }
        b
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut bx = [0.0; 4];
        let mut by = [0.0; 4];
        let kx = self.basis(x, self.rect.x0, self.rect.width(), &mut bx);
        let ky = self.basis(y, self.rect.y0, self.rect.height(), &mut by);
        let np = self.nodes_per_axis();
        let mut acc = 0.0;
        for (i, wx) in bx.iter().enumerate().take(self.r + 1) {
            let row = (kx * self.r + i) * np + ky * self.r;
            let mut inner = 0.0;
            for (j, wy) in by.iter().enumerate().take(self.r + 1) {
                inner += wy * self.values[row + j];
            }
            acc += wx * inner;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample<F: Fn(f64, f64) -> f64>(np: usize, rect: Rect, f: F) -> Vec<f64> {
        let m = (np - 1) as f64;
        let mut v = Vec::with_capacity(np * np);
        for i in 0..np {
            for j in 0..np {
                v.push(f(rect.x0 + rect.width() * i as f64 / m, rect.y0 + rect.height() * j as f64 / m));
            }
        }
        v
    }

    #[test]
    fn reproduces_nodes() {
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0);
        for r in 1..=3 {
            let np = 4 * r + 1;
            let f = |x: f64, y: f64| (3.0 * x).sin() + (x * y).exp();
            let s = build_local_spline(&sample(np, rect, f), np, r, rect).unwrap();
            for i in 0..np {
                for j in 0..np {
                    let (x, y) = s.node(i, j);
                    assert!((s.eval(x, y) - f(x, y)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bilinear_and_quadratic_exact() {
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let f1 = |x: f64, y: f64| 2.0 + x - 3.0 * y + 0.5 * x * y;
        let s1 = build_local_spline(&sample(9, rect, f1), 9, 1, rect).unwrap();
        let f2 = |x: f64, y: f64| x * x * y * y;
        let s2 = build_local_spline(&sample(9, rect, f2), 9, 2, rect).unwrap();
        for k in 0..50 {
            let x = -1.0 + 2.0 * (k as f64 * 0.6180339887).fract();
            let y = -1.0 + 2.0 * (k as f64 * 0.4142135623).fract();
            assert!((s1.eval(x, y) - f1(x, y)).abs() < 1e-13);
            assert!((s2.eval(x, y) - f2(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn cubic_order_for_quadratic_spline() {
        let rect = Rect::new(0.0, 2.0 * PI, 0.0, 2.0 * PI);
        let f = |x: f64, y: f64| x.sin() * y.sin();
        let err = |m: usize| {
            let np = 2 * m + 1;
            let s = build_local_spline(&sample(np, rect, f), np, 2, rect).unwrap();
            let mut e = 0.0f64;
            for i in 0..=200 {
                for j in 0..=200 {
                    let x = 2.0 * PI * i as f64 / 200.0;
                    let y = 2.0 * PI * j as f64 / 200.0;
                    e = e.max((s.eval(x, y) - f(x, y)).abs());
                }
            }
            e
        };
        let (e8, e16) = (err(8), err(16));
        let ratio = e8 / e16;
        assert!(ratio > 6.0 && ratio < 10.0, "ratio {ratio}");
        assert!(e8 < 0.05);
    }

    #[test]
    fn rejects_bad_node_count() {
        let rect = Rect::new(0.0, 1.0, 0.0, 1.0);
        assert!(build_local_spline(&[0.0; 36], 6, 2, rect).is_err());
        assert!(build_local_spline(&[0.0; 25], 5, 4, rect).is_err());
    }
}
