//! Empirical convergence studies for the cubature formulas.
//!
//! Each study evaluates a formula on a family of grids, compares with an
//! oracle value and fits the observed order. The Hölder corpus is built to be
//! hard for midpoint sampling at every resolution:
//!
//! ```text
//! f_n(x, y) = d_n(x)^α + d_n(y)^α + cos x cos y
//! ```
//!
//! where `d_n` is the distance to the nearest grid midpoint. The cusps of `f_n`
//! sit on the sample points, so the error is dominated by the `O(h^α)` term
//! the Hölder bounds describe. A fixed cusp at the evaluation point would
//! converge faster, since the midpoint rule integrates a symmetric cusp across
//! a cell almost exactly.
//!
//! Each cusp term depends on one coordinate only, so its reference value is a
//! nested 1-D integral: the kernel is integrated across the strip by Gauss
//! panels graded toward the singular line, and the result against `d_n^α`
//! strip by strip between consecutive midpoints and nodes, with a `v⁶`
//! endpoint map that flattens both the cusp and the kernel singularity. The
//! smooth term goes through the adaptive oracle.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::periodic::{gamma_constant, periodic_weights_with, PeriodicKernelSpec, PeriodicOptions};
use crate::planar::{eval_Tf_holder, eval_Tf_smooth, planar_weights_with, PlanarOptions};
use crate::quad::{
    gauss_legendre, make_grid, oracle_integrate, Domain, GaussRule, OracleOptions, Rect, SummationPolicy,
};
use crate::theory::{planar_gamma, predicted_error, BoundContext, FunctionClass, KernelFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Absolute oracle tolerance per grid.
    pub tol: f64,
    pub policy: SummationPolicy,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions { tol: 1e-7, policy: SummationPolicy::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub computed: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    /// Fitted order `p` in `error ≈ C n^{-p}`; `None` with fewer than two
    /// usable points.
    pub slope: Option<f64>,
}

impl RateStudy {
    fn from_rows(rows: Vec<RateRow>) -> Self {
        let pts: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.abs_error)).collect();
        RateStudy { slope: fit_slope(&pts), rows }
    }
}

/// Least-squares order `p` from `log e = c - p log n`. Points with zero or
/// non-finite error are skipped.
pub fn fit_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, e)| *n > 0 && e.is_finite() && *e > 0.0)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

/// Distance from `x` to the nearest point of `offset + step·Z`.
fn lattice_distance(x: f64, offset: f64, step: f64) -> f64 {
    let u = (x - offset) / step;
    (u - u.round()).abs() * step
}

/// The Hölder corpus `f_n` on a grid with the given first midpoint and step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCorpus {
    pub alpha: f64,
    pub first_midpoint: f64,
    pub step: f64,
}

impl HolderCorpus {
    pub fn cusp(&self, x: f64) -> f64 {
        lattice_distance(x, self.first_midpoint, self.step).powf(self.alpha)
    }

    pub fn smooth(x: f64, y: f64) -> f64 {
        x.cos() * y.cos()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.cusp(x) + self.cusp(y) + Self::smooth(x, y)
    }
}

fn check_study(lambda: f64, alpha: f64, ns: &[usize]) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if ns.is_empty() {
        return Err(Error::invalid("empty list of grid sizes"));
    }
    Ok(())
}

/// `∫_a^b g` for `g` smooth on `(a, b)` but sharply peaked within `scale` of
/// `a`: dyadically graded panels growing away from `a`.
fn graded<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, scale: f64, rule: &GaussRule) -> f64 {
    let len = (b - a).abs();
    let dir = (b - a).signum();
    let mut acc = 0.0;
    let mut lo = 0.0;
    let mut hi = scale.clamp(len * 1e-300, len);
    loop {
        acc += rule.integrate_1d(a + dir * lo, a + dir * hi, g) * dir;
        if hi >= len {
            return acc;
        }
        lo = hi;
        hi = (2.0 * hi).min(len);
    }
}

/// `∫_{lo}^{hi} g` where `g` may have integrable power singularities at
/// either end. Each half is mapped by `x = end ± (half) v⁶`, which flattens
/// `|x - end|^β` to `v^{6β + 5}`.
fn endpoint_singular<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, rule: &GaussRule) -> f64 {
    let half = 0.5 * (hi - lo);
    let mapped = |end: f64, dir: f64| {
        move |v: f64| {
            let v5 = v.powi(5);
            g(end + dir * half * v5 * v) * 6.0 * half * v5
        }
    };
    let left = mapped(lo, 1.0);
    let right = mapped(hi, -1.0);
    let pieces = [(0.0, 0.5), (0.5, 1.0)];
    pieces.iter().map(|&(a, b)| rule.integrate_1d(a, b, left) + rule.integrate_1d(a, b, right)).sum()
}

/// Nested 1-D reference for `∫_{x∈[a,b]} d(x)^α k̄(x) dx` with `k̄` given.
/// Runs two Gauss orders and fails if they disagree by more than `tol`.
fn cusp_reference<K: Fn(f64, &GaussRule) -> f64>(
    kbar: &K,
    alpha: f64,
    pieces: &[((f64, f64), f64)],
    tol: f64,
    policy: SummationPolicy,
) -> Result<f64> {
    let run = |m: usize| {
        let rule = gauss_legendre(m);
        let inner = gauss_legendre(m);
        let parts: Vec<f64> = pieces
            .iter()
            .map(|&((lo, hi), cusp)| {
                let g = |x: f64| (x - cusp).abs().powf(alpha) * kbar(x, &inner);
                endpoint_singular(&g, lo, hi, &rule)
            })
            .collect();
        policy.sum(&parts)
    };
    let (coarse, fine) = (run(24), run(36));
    if !((fine - coarse).abs() <= tol) {
        return Err(Error::numeric(format!(
            "cusp reference unresolved: orders 24 and 36 differ by {:e}",
            (fine - coarse).abs()
        )));
    }
    Ok(fine)
}

/// Splits each strip at `x_s` when it lies strictly inside, so that every
/// piece has its singular points at its ends.
fn split_at(strips: Vec<((f64, f64), f64)>, x_s: f64) -> Vec<((f64, f64), f64)> {
    let mut out = Vec::with_capacity(strips.len() + 1);
    for ((lo, hi), cusp) in strips {
        if x_s > lo && x_s < hi {
            out.push(((lo, x_s), cusp));
            out.push(((x_s, hi), cusp));
        } else {
            out.push(((lo, hi), cusp));
        }
    }
    out
}

/// Strips `[x_k, x_{k+1}]` between consecutive midpoints and nodes of the
/// grid on `[a, b]`, each with its cusp (midpoint) end.
fn strips(a: f64, b: f64, n: usize) -> Vec<((f64, f64), f64)> {
    let h = (b - a) / n as f64;
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let x0 = a + k as f64 * h;
        let xm = x0 + 0.5 * h;
        let x1 = if k + 1 == n { b } else { a + (k + 1) as f64 * h };
        out.push(((x0, xm), xm));
        out.push(((xm, x1), xm));
    }
    out
}

/// Hölder study of the periodic formula, evaluated at the midpoint of cell
/// `(n/4, n/2)`.
pub fn periodic_holder_study(lambda: f64, alpha: f64, ns: &[usize], opts: &StudyOptions) -> Result<RateStudy> {
    check_study(lambda, alpha, ns)?;
    let kernel = PeriodicKernelSpec::new(lambda)?;
    let gamma = gamma_constant(lambda, opts.tol)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = make_grid(Domain::Periodic2Pi, n)?;
        let (i, j) = (n / 4, n / 2);
        let s = grid.midpoint(i, j);
        let corpus = HolderCorpus { alpha, first_midpoint: grid.midpoints[0], step: grid.step() };
        let table = periodic_weights_with(n, lambda, i, j, &PeriodicOptions { alpha, ..Default::default() })?;
        let computed = crate::periodic::eval_Kf(&grid.sample_midpoints(|x, y| corpus.eval(x, y)), &table, opts.policy)?;

        // In offsets u = σ - s the cusp lattice is hZ and the kernel is even
        // in each offset and symmetric under swapping them, so both cusp
        // terms equal 2 ∫_{u₁∈[0,π]} d(u₁)^α k̄(u₁) with k̄ the kernel
        // integrated over u₂ ∈ [-π, π].
        let kbar = |u1: f64, rule: &GaussRule| 2.0 * graded(&|u2| kernel.eval(u1, u2), 0.0, PI, u1.abs(), rule);
        let h = grid.step();
        let pieces: Vec<((f64, f64), f64)> = (0..n)
            .map(|q| {
                let (lo, hi) = (q as f64 * 0.5 * h, (q + 1) as f64 * 0.5 * h);
                ((lo, hi), if q % 2 == 0 { lo } else { hi })
            })
            .collect();
        let cusp_total = 4.0 * cusp_reference(&kbar, alpha, &pieces, opts.tol / 8.0, opts.policy)?;
        let smooth = oracle_integrate(
            |u1, u2| kernel.eval(u1, u2) * HolderCorpus::smooth(s.0 + u1, s.1 + u2),
            &Rect::new(-PI, PI, -PI, PI),
            opts.tol / 2.0,
            OracleOptions::singular_at(0.0, 0.0),
        )?;
        if !smooth.converged {
            return Err(Error::numeric(format!("oracle did not converge (error bound {:e})", smooth.error_bound)));
        }
        let oracle = cusp_total + smooth.estimate;
        let predicted = predicted_error(&BoundContext {
            class: FunctionClass::Holder { alpha },
            family: KernelFamily::Periodic,
            n,
            lambda,
            kernel_integral: gamma,
        })?;
        rows.push(RateRow { n, computed, oracle, abs_error: (computed - oracle).abs(), predicted });
    }
    Ok(RateStudy::from_rows(rows))
}

fn check_point(t: (f64, f64)) -> Result<()> {
    if !(t.0.abs() <= 1.0 && t.1.abs() <= 1.0) {
        return Err(Error::invalid(format!("evaluation point ({}, {}) outside [-1, 1]²", t.0, t.1)));
    }
    Ok(())
}

/// `∫∫_{[-1,1]²} cos x cos y / |(x, y) - t|^{2λ}`, integrated in offsets from
/// `t` so the kernel keeps full precision next to the singularity.
fn planar_smooth_reference(lambda: f64, t: (f64, f64), tol: f64) -> Result<f64> {
    let res = oracle_integrate(
        |u1, u2| (u1 * u1 + u2 * u2).powf(-lambda) * HolderCorpus::smooth(t.0 + u1, t.1 + u2),
        &Rect::new(-1.0 - t.0, 1.0 - t.0, -1.0 - t.1, 1.0 - t.1),
        tol,
        OracleOptions::singular_at(0.0, 0.0),
    )?;
    if !res.converged {
        return Err(Error::numeric(format!("oracle did not converge (error bound {:e})", res.error_bound)));
    }
    Ok(res.estimate)
}

/// Hölder study of the planar midpoint formula at `t` on `[-1, 1]²`.
pub fn planar_holder_study(
    lambda: f64,
    alpha: f64,
    ns: &[usize],
    t: (f64, f64),
    planar: &PlanarOptions,
    opts: &StudyOptions,
) -> Result<RateStudy> {
    check_study(lambda, alpha, ns)?;
    check_point(t)?;
    let gamma = planar_gamma(lambda, opts.tol)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = make_grid(Domain::UnitSquareSigned, n)?;
        let corpus = HolderCorpus { alpha, first_midpoint: grid.midpoints[0], step: grid.step() };
        let table = planar_weights_with(n, t, lambda, &PlanarOptions { alpha, ..*planar })?;
        let computed = eval_Tf_holder(&grid.sample_midpoints(|x, y| corpus.eval(x, y)), &table, opts.policy)?;

        // The y-cusp term is the x-cusp term with t reflected in the diagonal.
        let mut cusp_total = 0.0;
        for tt in [t, (t.1, t.0)] {
            // Inner integral in offsets u = |y - tt.1|. Outer nodes that round
            // onto tt.0 itself are floored at round-off distance.
            let kbar = |x: f64, rule: &GaussRule| {
                let d = (x - tt.0).abs().max(f64::EPSILON * (1.0 + tt.0.abs()));
                let g = |u: f64| (d * d + u * u).powf(-lambda);
                graded(&g, 0.0, 1.0 + tt.1, d, rule) + graded(&g, 0.0, 1.0 - tt.1, d, rule)
            };
            let pieces = split_at(strips(-1.0, 1.0, n), tt.0);
            cusp_total += cusp_reference(&kbar, alpha, &pieces, opts.tol / 8.0, opts.policy)?;
        }
        let smooth = planar_smooth_reference(lambda, t, opts.tol / 2.0)?;
        let oracle = cusp_total + smooth;
        let predicted = predicted_error(&BoundContext {
            class: FunctionClass::Holder { alpha },
            family: KernelFamily::Planar,
            n,
            lambda,
            kernel_integral: gamma,
        })?;
        rows.push(RateRow { n, computed, oracle, abs_error: (computed - oracle).abs(), predicted });
    }
    Ok(RateStudy::from_rows(rows))
}

/// Smooth study of the local-spline formula of degree `r` for
/// `f = cos x cos y`. Grid sizes must be multiples of `r`.
pub fn planar_smooth_study(
    lambda: f64,
    r: usize,
    ns: &[usize],
    t: (f64, f64),
    planar: &PlanarOptions,
    opts: &StudyOptions,
) -> Result<RateStudy> {
    check_study(lambda, 1.0, ns)?;
    check_point(t)?;
    let gamma = planar_gamma(lambda, opts.tol)?;
    let oracle = planar_smooth_reference(lambda, t, opts.tol)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let computed = eval_Tf_smooth(HolderCorpus::smooth, n, r, lambda, t, planar, opts.policy)?;
        let predicted = predicted_error(&BoundContext {
            class: FunctionClass::Sobolev { r: r as u32, p: 1.0 },
            family: KernelFamily::Planar,
            n,
            lambda,
            kernel_integral: gamma,
        })?;
        rows.push(RateRow { n, computed, oracle, abs_error: (computed - oracle).abs(), predicted });
    }
    Ok(RateStudy::from_rows(rows))
}
