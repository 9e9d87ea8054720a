//! Cubature for the planar kernel
//!
//! ```text
//! Tf(t) = ∫∫_{[-1,1]²} f(τ) / ((τ₁-t₁)² + (τ₂-t₂)²)^λ dτ
//! ```
//!
//! Two formulas are provided. The Hölder formula weights midpoint samples by
//! cell integrals of the kernel `J_kl(t)`. The smooth formula integrates a
//! local Lagrange spline of `f` against the kernel.
//!
//! Cells outside the 3×3 block around the cell containing `t` are integrated by
//! a tensor Gauss rule of order `⌈4 n^{2λ}⌉` (capped). Cells inside the block
//! use the regularised kernel `1 / (|τ-t|^{2λ} + h)`. A single Gauss panel
//! cannot resolve that kernel near `t`, so each near cell is split at the
//! point closest to `t` and graded geometrically toward it.

mod spline;

pub use spline::{build_local_spline, LocalSpline2D};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::periodic::{choose_regularization_with_ceiling, Regularization, DEFAULT_GAUSS_CEILING};
use crate::quad::{make_grid, Domain, GaussPanelRule, Grid2D, Rect, SummationPolicy};

/// Gauss order per piece of the graded near-cell rule.
const GRADED_ORDER: usize = 12;
/// Upper bound on the number of dyadic rings in the graded rule.
const MAX_RINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NearPolicy {
    /// Every near cell keeps its own weight.
    PerCell,
    /// The whole 3×3 block integral is attached to the midpoint of the cell
    /// containing `t`; the other eight near cells get weight zero.
    #[default]
    MergedDelta,
}

/// How a weight was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    GaussPanel,
    RegularizedNear,
    /// Absorbed into the merged block weight.
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarOptions {
    /// Hölder exponent of the target class; sets the regularisation.
    pub alpha: f64,
    pub policy: NearPolicy,
    pub gauss_ceiling: usize,
}

impl Default for PlanarOptions {
    fn default() -> Self {
        PlanarOptions { alpha: 1.0, policy: NearPolicy::MergedDelta, gauss_ceiling: DEFAULT_GAUSS_CEILING }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarWeightTable {
    pub n: usize,
    pub t: (f64, f64),
    pub lambda: f64,
    pub policy: NearPolicy,
    /// Cell containing `t`.
    pub home: (usize, usize),
    /// Row-major in `(k, l)`.
    pub weights: Vec<f64>,
    pub sources: Vec<WeightSource>,
    pub far_order: usize,
    pub far_order_clamped: bool,
    pub reg: Regularization,
}

impl PlanarWeightTable {
    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.weights[k * self.n + l]
    }

    pub fn total(&self, policy: SummationPolicy) -> f64 {
        policy.sum(&self.weights)
    }
}

/// Gauss order for cells away from `t`: `⌈4 n^{2λ}⌉`, capped at `ceiling`.
pub fn far_gauss_order(n: usize, lambda: f64, ceiling: usize) -> (usize, bool) {
    let m = (4.0 * (n as f64).powf(2.0 * lambda)).ceil();
    if m > ceiling as f64 {
        (ceiling, true)
    } else {
        (m.max(1.0) as usize, false)
    }
}

/// Shared per-cell integration rules, used by both formulas so they agree on
/// constant integrands.
struct CellRules {
    grid: Grid2D,
    t: (f64, f64),
    lambda: f64,
    h: f64,
    home: (usize, usize),
    far: GaussPanelRule,
    graded: GaussPanelRule,
    /// Rings stop once they are smaller than this.
    floor: f64,
}

impl CellRules {
    fn new(n: usize, t: (f64, f64), lambda: f64, opts: &PlanarOptions) -> Result<(Self, Regularization, bool)> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid(format!("kernel exponent must lie in (0, 1), got {lambda}")));
        }
        if n < 4 {
            return Err(Error::invalid(format!("planar cubature needs n >= 4, got {n}")));
        }
        let dom = Domain::UnitSquareSigned.rect();
        if !(t.0.is_finite() && t.1.is_finite()) || !dom.contains(t.0, t.1) {
            return Err(Error::invalid(format!("evaluation point ({}, {}) outside [-1, 1]^2", t.0, t.1)));
        }
        let grid = make_grid(Domain::UnitSquareSigned, n)?;
        let reg = choose_regularization_with_ceiling(n, lambda, opts.alpha, opts.gauss_ceiling)?;
        let (m_far, clamped) = far_gauss_order(n, lambda, opts.gauss_ceiling);
        let home = (grid.locate(t.0), grid.locate(t.1));
        // Below this radius the regularised kernel is flat to within a factor 2.
        let r_h = reg.h.powf(0.5 / lambda);
        let floor = (0.01 * r_h).max(1e-14 * grid.step());
        let rules = CellRules {
            grid,
            t,
            lambda,
            h: reg.h,
            home,
            far: GaussPanelRule::new(m_far)?,
            graded: GaussPanelRule::new(GRADED_ORDER)?,
            floor,
        };
        Ok((rules, reg, clamped))
    }

    fn is_near(&self, k: usize, l: usize) -> bool {
        k.abs_diff(self.home.0) <= 1 && l.abs_diff(self.home.1) <= 1
    }

    fn kernel(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.t.0;
        let dy = y - self.t.1;
        (dx * dx + dy * dy).powf(-self.lambda)
    }

    fn regularized(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.t.0;
        let dy = y - self.t.1;
        1.0 / ((dx * dx + dy * dy).powf(self.lambda) + self.h)
    }

    /// `∫∫_cell g · K` with the far or near rule as appropriate.
    fn cell_integral<G: Fn(f64, f64) -> f64>(&self, k: usize, l: usize, g: &G) -> Result<f64> {
        let cell = self.grid.cell(k, l);
        if self.is_near(k, l) {
            self.graded(&cell, &|x, y| g(x, y) * self.regularized(x, y))
        } else {
            self.far.integrate(|x, y| g(x, y) * self.kernel(x, y), &cell)
        }
    }

    /// Splits `cell` at the point nearest `t` and peels dyadic rings toward it.
    fn graded<F: Fn(f64, f64) -> f64>(&self, cell: &Rect, f: &F) -> Result<f64> {
        let (px, py) = cell.clamp(self.t.0, self.t.1);
        // Beyond a fraction of the distance to t the integrand is smooth on the
        // remaining corner box.
        let stop = self.floor.max(0.25 * (px - self.t.0).hypot(py - self.t.1));
        let mut total = 0.0;
        for piece in cell.split_at(px, py) {
            let w = if px == piece.x0 { piece.width() } else { -piece.width() };
            let h = if py == piece.y0 { piece.height() } else { -piece.height() };
            let map = |u0: f64, u1: f64, v0: f64, v1: f64| {
                let (xa, xb) = (px + u0 * w, px + u1 * w);
                let (ya, yb) = (py + v0 * h, py + v1 * h);
                Rect::new(xa.min(xb), xa.max(xb), ya.min(yb), ya.max(yb))
            };
            let diam = piece.diameter();
            let mut a = 1.0f64;
            let mut acc = 0.0;
            for _ in 0..MAX_RINGS {
                let b = 0.5 * a;
                // Slivers left by a t within round-off of a cell edge collapse.
                for r in [map(b, a, 0.0, b), map(0.0, b, b, a), map(b, a, b, a)] {
                    if !r.is_degenerate() {
                        acc += self.graded.integrate(f, &r)?;
                    }
                }
                a = b;
                if a * diam <= stop {
                    break;
                }
            }
            let core = map(0.0, a, 0.0, a);
            if !core.is_degenerate() {
                acc += self.graded.integrate(f, &core)?;
            }
            total += acc;
        }
        Ok(total)
    }

    fn cells(&self) -> impl IndexedParallelIterator<Item = (usize, usize)> + '_ {
        let n = self.grid.n;
        (0..n * n).into_par_iter().map(move |c| (c / n, c % n))
    }
}

pub fn planar_weights(
    n: usize,
    t: (f64, f64),
    lambda: f64,
    alpha: f64,
    policy: NearPolicy,
) -> Result<PlanarWeightTable> {
    planar_weights_with(n, t, lambda, &PlanarOptions { alpha, policy, ..Default::default() })
}

pub fn planar_weights_with(n: usize, t: (f64, f64), lambda: f64, opts: &PlanarOptions) -> Result<PlanarWeightTable> {
    let (rules, reg, far_order_clamped) = CellRules::new(n, t, lambda, opts)?;
    let one = |_: f64, _: f64| 1.0;
    let mut weights: Vec<f64> =
        rules.cells().map(|(k, l)| rules.cell_integral(k, l, &one)).collect::<Result<Vec<_>>>()?;
    let mut sources: Vec<WeightSource> = (0..n * n)
        .map(|c| if rules.is_near(c / n, c % n) { WeightSource::RegularizedNear } else { WeightSource::GaussPanel })
        .collect();
    if opts.policy == NearPolicy::MergedDelta {
        let (i, j) = rules.home;
        let mut block = Vec::with_capacity(9);
        for c in 0..n * n {
            if sources[c] == WeightSource::RegularizedNear {
                block.push(weights[c]);
                if c != i * n + j {
                    weights[c] = 0.0;
                    sources[c] = WeightSource::Merged;
                }
            }
        }
        weights[i * n + j] = SummationPolicy::SequentialCompensated.sum(&block);
    }
    Ok(PlanarWeightTable {
        n,
        t,
        lambda,
        policy: opts.policy,
        home: rules.home,
        weights,
        sources,
        far_order: rules.far.m,
        far_order_clamped,
        reg,
    })
}

/// `Σ J_kl(t) f(x'_k, x'_l)` for midpoint samples in row-major order.
#[allow(non_snake_case)]
pub fn eval_Tf_holder(f_samples: &[f64], weights: &PlanarWeightTable, policy: SummationPolicy) -> Result<f64> {
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

/// Integrates the degree-`r` local spline of `f` (nodes at the grid nodes)
/// against the kernel, cell by cell.
#[allow(non_snake_case)]
pub fn eval_Tf_smooth<F: Fn(f64, f64) -> f64>(
    f: F,
    n: usize,
    r: usize,
    lambda: f64,
    t: (f64, f64),
    opts: &PlanarOptions,
    policy: SummationPolicy,
) -> Result<f64> {
    if !(1..=3).contains(&r) {
        return Err(Error::invalid(format!("spline degree must be 1, 2 or 3, got {r}")));
    }
    if !n.is_multiple_of(r) {
        return Err(Error::invalid(format!("n = {n} is not a multiple of the spline degree {r}")));
    }
    let (rules, _, _) = CellRules::new(n, t, lambda, opts)?;
    let nodes = &rules.grid.nodes;
    let mut samples = Vec::with_capacity((n + 1) * (n + 1));
    for &x in nodes {
        for &y in nodes {
            let v = f(x, y);
            if !v.is_finite() {
                return Err(Error::numeric(format!("integrand is not finite at ({x}, {y})")));
            }
            samples.push(v);
        }
    }
    let spline = build_local_spline(&samples, n + 1, r, Domain::UnitSquareSigned.rect())?;
    let g = |x: f64, y: f64| spline.eval(x, y);
    let parts: Vec<f64> = rules.cells().map(|(k, l)| rules.cell_integral(k, l, &g)).collect::<Result<Vec<_>>>()?;
    Ok(policy.sum(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_symmetry_about_origin() {
        let n = 8;
        let w = planar_weights(n, (0.0, 0.0), 0.3, 1.0, NearPolicy::PerCell).unwrap();
        for k in 0..n {
            for l in 0..n {
                let (k2, l2) = (n - 1 - k, n - 1 - l);
                let a = w.weight(k, l);
                let b = w.weight(k2, l2);
                // t sits on a node, so the tie-break puts the near block
                // off-centre; mirrored cells may then differ by the regularisation.
                let tol = if w.sources[k * n + l] == w.sources[k2 * n + l2] { 1e-12 } else { 1e-3 };
                assert!((a - b).abs() <= tol * a.abs(), "({k},{l}) {a} {b}");
            }
        }
    }

    #[test]
    fn merged_total_matches_per_cell() {
        let t = (0.13, -0.41);
        let a = planar_weights(8, t, 0.4, 0.5, NearPolicy::PerCell).unwrap();
        let b = planar_weights(8, t, 0.4, 0.5, NearPolicy::MergedDelta).unwrap();
        let p = SummationPolicy::SequentialCompensated;
        assert!((a.total(p) - b.total(p)).abs() < 1e-12);
        assert_eq!(b.sources.iter().filter(|s| **s == WeightSource::Merged).count(), 8);
        assert!(b.weights.iter().all(|w| *w >= 0.0));
        assert!(a.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn tiny_lambda_far_cells_are_areas() {
        let w = planar_weights(8, (0.0, 0.0), 1e-12, 1.0, NearPolicy::PerCell).unwrap();
        assert!((w.weight(0, 0) - (0.25f64).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_points_outside() {
        assert!(planar_weights(8, (1.5, 0.0), 0.3, 1.0, NearPolicy::PerCell).is_err());
    }

    #[test]
    fn far_order_examples() {
        assert_eq!(far_gauss_order(16, 0.5, 64), (64, false));
        assert_eq!(far_gauss_order(64, 0.5, 64), (64, true));
        assert_eq!(far_gauss_order(8, 0.3, 64), (14, false));
    }

    #[test]
    fn point_one_ulp_off_a_cell_edge() {
        let edge = 0.25f64;
        let t = (f64::from_bits(edge.to_bits() + 1), -f64::from_bits(edge.to_bits() + 1));
        let w = planar_weights(8, t, 0.4, 1.0, NearPolicy::PerCell).unwrap();
        let on = planar_weights(8, (edge, -edge), 0.4, 1.0, NearPolicy::PerCell).unwrap();
        let (a, b) = (w.total(SummationPolicy::default()), on.total(SummationPolicy::default()));
        assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
    }
}
