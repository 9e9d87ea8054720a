//! Adaptive reference integrator.
//!
//! Quadtree subdivision with a 5×5 Gauss rule per cell: a cell is accepted when
//! the parent estimate and the sum over its four children agree to within the
//! cell's share of the tolerance. A declared point singularity is isolated by
//! splitting the rectangle so the point sits on a corner of every piece, and
//! each piece is then peeled into dyadic L-shaped rings down to a floor
//! diameter. The remaining corner box is estimated by extending the geometric
//! decay of the last two rings, which is exact for integrands homogeneous about
//! the singular point.
//!
//! The integrator never fails because of tolerance: if the evaluation budget
//! runs out it returns its best estimate with the achieved error bound and
//! `converged = false`.

use super::gauss::GaussPanelRule;
use super::grid::Rect;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Point singularity of the integrand, if any.
    pub singular: Option<(f64, f64)>,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
    /// Rings around the singular point stop at this fraction of the domain diameter.
    pub floor_fraction: f64,
    /// Gauss points per axis on each cell.
    pub order: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { singular: None, max_evals: 50_000_000, floor_fraction: 2f64.powi(-30), order: 5 }
    }
}

impl OracleOptions {
    pub fn singular_at(x: f64, y: f64) -> Self {
        OracleOptions { singular: Some((x, y)), ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub estimate: f64,
    pub error_bound: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Adaptive<'a, F> {
    f: &'a F,
    rule: GaussPanelRule,
    evals: usize,
    max_evals: usize,
    exhausted: bool,
}

impl<F: Fn(f64, f64) -> f64> Adaptive<'_, F> {
    fn panel(&mut self, r: &Rect) -> Result<f64> {
        self.evals += self.rule.m * self.rule.m;
        self.rule.integrate(self.f, r)
    }

    /// Returns `(estimate, error)` for `r` with absolute target `tol`.
    fn integrate(&mut self, r: &Rect, tol: f64) -> Result<(f64, f64)> {
        let coarse = self.panel(r)?;
        self.refine(r, coarse, tol, 0)
    }

    fn refine(&mut self, r: &Rect, coarse: f64, tol: f64, depth: u32) -> Result<(f64, f64)> {
        let kids = r.quarters();
        let mut vals = [0.0; 4];
        for (v, k) in vals.iter_mut().zip(&kids) {
            *v = self.panel(k)?;
        }
        let fine = vals[0] + vals[1] + vals[2] + vals[3];
        let err = (fine - coarse).abs();
        // Below round-off scale the quarters stop being distinct rectangles.
        let tiny = r.width() <= 1e-13 * (1.0 + r.x0.abs()) || r.height() <= 1e-13 * (1.0 + r.y0.abs());
        if err <= tol || depth >= 48 || tiny || self.exhausted {
            return Ok((fine, err));
        }
        if self.evals >= self.max_evals {
            self.exhausted = true;
            return Ok((fine, err));
        }
        let mut est = 0.0;
        let mut total_err = 0.0;
        for (v, k) in vals.iter().zip(&kids) {
            let (e, de) = self.refine(k, *v, 0.25 * tol, depth + 1)?;
            est += e;
            total_err += de;
        }
        Ok((est, total_err))
    }

    /// Piece with the singular point at corner `(sx, sy)`; the opposite corner
    /// is `(sx + w, sy + h)` with signed extents.
    fn corner_singular(&mut self, piece: &Rect, sx: f64, sy: f64, tol: f64, floor: f64) -> Result<(f64, f64)> {
        let w = if sx == piece.x0 { piece.width() } else { -piece.width() };
        let h = if sy == piece.y0 { piece.height() } else { -piece.height() };
        let map = |u0: f64, u1: f64, v0: f64, v1: f64| {
            let (xa, xb) = (sx + u0 * w, sx + u1 * w);
            let (ya, yb) = (sy + v0 * h, sy + v1 * h);
            Rect::new(xa.min(xb), xa.max(xb), ya.min(yb), ya.max(yb))
        };
        let diam = piece.diameter();
        let mut est = 0.0;
        let mut err = 0.0;
        let mut rings: Vec<f64> = Vec::new();
        let mut a = 1.0f64;
        let mut ring_tol = 0.5 * tol;
        loop {
            let b = 0.5 * a;
            // Coordinates near the corner lose digits in x - sx, so the ring
            // cannot be resolved below that relative noise.
            let noise = 64.0 * f64::EPSILON * (1.0 + sx.abs().max(sy.abs())) / (b * diam);
            let floor_tol = noise * rings.last().map_or(0.0, |r: &f64| r.abs());
            let cell_tol = ring_tol.max(floor_tol) / 3.0;
            let mut ring = 0.0;
            for r in [map(b, a, 0.0, b), map(0.0, b, b, a), map(b, a, b, a)] {
                let (e, de) = self.integrate(&r, cell_tol)?;
                ring += e;
                err += de;
            }
            est += ring;
            rings.push(ring);
            a = b;
            ring_tol *= 0.5;
            if a * diam <= floor || self.exhausted {
                break;
            }
        }
        let core = map(0.0, a, 0.0, a);
        let (tail, tail_err) = self.tail(&rings, &core)?;
        Ok((est + tail, err + tail_err))
    }

    fn tail(&mut self, rings: &[f64], core: &Rect) -> Result<(f64, f64)> {
        let k = rings.len();
        if k >= 3 {
            let (r0, r1, r2) = (rings[k - 3], rings[k - 2], rings[k - 1]);
            let q = r2 / r1;
            let q_prev = r1 / r0;
            if q > 0.0 && q < 1.0 && q_prev > 0.0 && q_prev < 1.0 {
                let t = r2 * q / (1.0 - q);
                let t_prev = r2 * q_prev / (1.0 - q_prev);
                return Ok((t, (t - t_prev).abs()));
            }
        }
        let g = self.panel(core)?;
        Ok((g, g.abs()))
    }
}

/// Integrates `f` over `rect` to absolute tolerance `tol`.
pub fn oracle_integrate<F: Fn(f64, f64) -> f64>(
    f: F,
    rect: &Rect,
    tol: f64,
    opts: OracleOptions,
) -> Result<OracleResult> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("oracle tolerance must be positive, got {tol}")));
    }
    if rect.is_degenerate() {
        return Err(Error::invalid(format!("degenerate rectangle {}", rect.id())));
    }
    let mut ad = Adaptive {
        f: &f,
        rule: GaussPanelRule::new(opts.order.max(1))?,
        evals: 0,
        max_evals: opts.max_evals,
        exhausted: false,
    };
    let (estimate, err) = match opts.singular {
        Some((sx, sy)) if rect.contains(sx, sy) => {
            let floor = opts.floor_fraction * rect.diameter();
            let pieces = rect.split_at(sx, sy);
            let total = rect.area();
            let mut est = 0.0;
            let mut err = 0.0;
            for p in &pieces {
                let share = tol * p.area() / total;
                let (e, de) = ad.corner_singular(p, sx, sy, share, floor)?;
                est += e;
                err += de;
            }
            (est, err)
        }
        _ => ad.integrate(rect, tol)?,
    };
    Ok(OracleResult { estimate, error_bound: err, converged: !ad.exhausted && err <= tol, evaluations: ad.evals })
}
