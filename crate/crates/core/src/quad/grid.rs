use std::f64::consts::PI;

use crate::error::{Error, PanelId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0, 2π]` per axis.
    Periodic2Pi,
    /// `[-1, 1]` per axis.
    UnitSquareSigned,
}

impl Domain {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Domain::Periodic2Pi => (0.0, 2.0 * PI),
            Domain::UnitSquareSigned => (-1.0, 1.0),
        }
    }

    pub fn rect(self) -> Rect {
        let (a, b) = self.bounds();
        Rect::new(a, b, a, b)
    }
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0) || !self.area().is_finite()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Closest point of the rectangle to `(x, y)`.
    pub fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        (x.clamp(self.x0, self.x1), y.clamp(self.y0, self.y1))
    }

    /// Quadrants in the order (lower-left, lower-right, upper-left, upper-right).
    pub fn quarters(&self) -> [Rect; 4] {
        let (cx, cy) = self.center();
        [
            Rect::new(self.x0, cx, self.y0, cy),
            Rect::new(cx, self.x1, self.y0, cy),
            Rect::new(self.x0, cx, cy, self.y1),
            Rect::new(cx, self.x1, cy, self.y1),
        ]
    }

    /// Splits at `(x, y)` into at most four non-degenerate pieces, each having
    /// the split point as a corner.
    pub fn split_at(&self, x: f64, y: f64) -> Vec<Rect> {
        let (x, y) = self.clamp(x, y);
        let xs = [(self.x0, x), (x, self.x1)];
        let ys = [(self.y0, y), (y, self.y1)];
        let mut out = Vec::with_capacity(4);
        for &(y0, y1) in &ys {
            for &(x0, x1) in &xs {
                let r = Rect::new(x0, x1, y0, y1);
                if !r.is_degenerate() {
                    out.push(r);
                }
            }
        }
        out
    }

    pub fn id(&self) -> PanelId {
        PanelId { x0: self.x0, x1: self.x1, y0: self.y0, y1: self.y1 }
    }
}

/// Uniform tensor grid with `n` cells per axis. Cells are indexed `(k, l)`
/// with `k` along the first axis; canonical order is row-major in `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub domain: Domain,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub midpoints: Vec<f64>,
}

pub fn make_grid(domain: Domain, n: usize) -> Result<Grid2D> {
    if n < 2 {
        return Err(Error::invalid(format!("grid needs n >= 2, got {n}")));
    }
    let (a, b) = domain.bounds();
    let step = (b - a) / n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|k| a + k as f64 * step).collect();
    nodes[n] = b;
    let midpoints = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(Grid2D { domain, n, nodes, midpoints })
}

impl Grid2D {
    pub fn step(&self) -> f64 {
        let (a, b) = self.domain.bounds();
        (b - a) / self.n as f64
    }

    pub fn cell(&self, k: usize, l: usize) -> Rect {
        Rect::new(self.nodes[k], self.nodes[k + 1], self.nodes[l], self.nodes[l + 1])
    }

    pub fn cell_area(&self) -> f64 {
        self.step() * self.step()
    }

    pub fn midpoint(&self, k: usize, l: usize) -> (f64, f64) {
        (self.midpoints[k], self.midpoints[l])
    }

    /// Cell index along one axis containing coordinate `x`. Points on an
    /// interior node belong to the cell on the left.
    pub fn locate(&self, x: f64) -> usize {
        let (a, _) = self.domain.bounds();
        let u = (x - a) / self.step();
        let idx = if u > 0.0 && u.fract() == 0.0 { u as usize - 1 } else { u.floor().max(0.0) as usize };
        idx.min(self.n - 1)
    }

    /// Samples `f` at all cell midpoints, row-major in `(k, l)`.
    pub fn sample_midpoints<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for k in 0..self.n {
            for l in 0..self.n {
                out.push(f(self.midpoints[k], self.midpoints[l]));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_midpoints() {
        let g = make_grid(Domain::Periodic2Pi, 4).unwrap();
        assert!((g.midpoints[0] - PI / 4.0).abs() < 1e-15);
        assert!((g.midpoints[1] - 3.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn signed_square_nodes() {
        let g = make_grid(Domain::UnitSquareSigned, 2).unwrap();
        assert_eq!(g.nodes, vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.midpoints, vec![-0.5, 0.5]);
    }

    #[test]
    fn uniform_cells() {
        let g = make_grid(Domain::Periodic2Pi, 40).unwrap();
        let target = (PI / 20.0).powi(2);
        let mut count = 0;
        for k in 0..40 {
            for l in 0..40 {
                let c = g.cell(k, l);
                assert!((c.area() - target).abs() < 1e-14);
                let (mx, my) = g.midpoint(k, l);
                assert!(c.x0 < mx && mx < c.x1 && c.y0 < my && my < c.y1);
                count += 1;
            }
        }
        assert_eq!(count, 1600);
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(make_grid(Domain::UnitSquareSigned, 1).is_err());
    }

    #[test]
    fn locate_ties_go_left() {
        let g = make_grid(Domain::UnitSquareSigned, 8).unwrap();
        assert_eq!(g.locate(0.0), 3);
        assert_eq!(g.locate(-1.0), 0);
        assert_eq!(g.locate(1.0), 7);
        assert_eq!(g.locate(0.1), 4);
    }

    #[test]
    fn split_keeps_area() {
        let r = Rect::new(0.0, 2.0, -1.0, 1.0);
        let parts = r.split_at(0.5, 0.25);
        assert_eq!(parts.len(), 4);
        let a: f64 = parts.iter().map(Rect::area).sum();
        assert!((a - 4.0).abs() < 1e-15);
        assert_eq!(r.split_at(0.0, -1.0).len(), 1);
    }
}
