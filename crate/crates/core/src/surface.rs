//! Star-shaped bodies and their latitude-longitude panelization.
//!
//! Vertex directions come from the spherical grid `φ_k = 2kπ/n`,
//! `θ_l = πl/m`; each direction is pushed out along its ray to the body
//! surface. The polar caps are fans of `n` triangles. Each band between two
//! interior latitudes is cut into `n` quads, and every quad is split along a
//! diagonal. The diagonal is mirrored in the southern hemisphere, which keeps
//! the mesh symmetric under `z → -z`. Band triangles are close to right
//! triangles, so many panels fall back to the centroid as their collocation
//! point (see [`collocation_point`]). The result is `N = 2n(m - 1)` flat triangles, all counterclockwise as seen
//! from outside the body.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, SummationPolicy};

pub type Point = Vector3<f64>;

/// Radial function sampled on a `(φ, θ)` grid, bilinear in between.
///
/// Rows are `φ_i = 2πi / rows` (periodic, the row at `2π` is implied), columns
/// are `θ_j = πj / (cols - 1)` from the north pole to the south pole.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    rows: usize,
    cols: usize,
    radii: Vec<f64>,
}

impl RadialTable {
    pub fn new(rows: usize, cols: usize, radii: Vec<f64>) -> Result<Self> {
        if rows < 1 || cols < 2 {
            return Err(Error::invalid("radial table needs at least one φ row and two θ columns"));
        }
        if radii.len() != rows * cols {
            return Err(Error::invalid(format!("radial table is {rows}x{cols} but holds {} values", radii.len())));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid(format!("radial table holds a non-positive radius {r}")));
        }
        Ok(RadialTable { rows, cols, radii })
    }

    /// Whitespace- or comma-separated numbers, one φ row per line. Blank lines
    /// and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut radii = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("radial table line {}: bad number '{s}'", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::invalid(format!(
                        "radial table line {}: expected {c} values, found {}",
                        lineno + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            radii.extend(row);
            rows += 1;
        }
        RadialTable::new(rows, cols.unwrap_or(0), radii)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read radial table {}: {e}", path.display())))?;
        RadialTable::parse(&text)
    }

    pub fn radius(&self, phi: f64, theta: f64) -> f64 {
        let u = phi.rem_euclid(2.0 * PI) / (2.0 * PI) * self.rows as f64;
        let i0 = (u.floor() as usize).min(self.rows - 1);
        let fu = u - i0 as f64;
        let i1 = (i0 + 1) % self.rows;
        let v = (theta.clamp(0.0, PI) / PI) * (self.cols - 1) as f64;
        let j0 = (v.floor() as usize).min(self.cols - 2);
        let fv = v - j0 as f64;
        let at = |i: usize, j: usize| self.radii[i * self.cols + j];
        let lo = at(i0, j0) * (1.0 - fv) + at(i0, j0 + 1) * fv;
        let hi = at(i1, j0) * (1.0 - fv) + at(i1, j0 + 1) * fv;
        lo * (1.0 - fu) + hi * fu
    }
}

/// Body described by its radius along each ray from an interior origin.
#[derive(Clone)]
pub enum StarBody {
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    Tabulated(RadialTable),
    /// `r(φ, θ)` supplied by the caller.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarBody::Ellipsoid { a, b, c } => write!(f, "Ellipsoid({a}, {b}, {c})"),
            StarBody::Tabulated(t) => write!(f, "Tabulated({}x{})", t.rows, t.cols),
            StarBody::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl StarBody {
    #[allow(non_snake_case)]
    pub fn Sphere(a: f64) -> Self {
        StarBody::Ellipsoid { a, b: a, c: a }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("semiaxis {name} must be positive, got {v}")));
            }
        }
        Ok(StarBody::Ellipsoid { a, b, c })
    }

    /// Distance from the origin to the surface along the unit vector `u`.
    pub fn radius_along(&self, u: &Point) -> f64 {
        match self {
            StarBody::Ellipsoid { a, b, c } => {
                let q = (u.x / a).powi(2) + (u.y / b).powi(2) + (u.z / c).powi(2);
                1.0 / q.sqrt()
            }
            StarBody::Tabulated(t) => {
                let (phi, theta) = angles(u);
                t.radius(phi, theta)
            }
            StarBody::Custom(f) => {
                let (phi, theta) = angles(u);
                f(phi, theta)
            }
        }
    }

    /// Surface point on the ray through `p` (any non-zero vector).
    pub fn project(&self, p: &Point) -> Point {
        let u = p.normalize();
        u * self.radius_along(&u)
    }

    pub fn point(&self, phi: f64, theta: f64) -> Point {
        let u = direction(phi, theta);
        u * self.radius_along(&u)
    }

    /// Checks positivity and finiteness of the radius on a dense direction
    /// sample. Any positive radial function describes a star-shaped body, so
    /// this is the whole star-shapedness check.
    pub fn validate(&self) -> Result<()> {
        if let StarBody::Ellipsoid { a, b, c } = *self {
            StarBody::ellipsoid(a, b, c)?;
        }
        let (np, nt) = (72, 37);
        for i in 0..np {
            for j in 0..nt {
                let phi = 2.0 * PI * i as f64 / np as f64;
                let theta = PI * j as f64 / (nt - 1) as f64;
                let r = self.radius_along(&direction(phi, theta));
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::invalid(format!("radius {r} at (φ, θ) = ({phi}, {theta}) is not positive")));
                }
            }
        }
        Ok(())
    }
}

fn direction(phi: f64, theta: f64) -> Point {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Point::new(st * cp, st * sp, ct)
}

fn angles(u: &Point) -> (f64, f64) {
    let phi = u.y.atan2(u.x).rem_euclid(2.0 * PI);
    let theta = (u.z / u.norm()).clamp(-1.0, 1.0).acos();
    (phi, theta)
}

/// Collocation point of one flat triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collocation {
    /// Point on the body surface.
    pub point: Point,
    /// Circumcenter or centroid, in the plane of the triangle.
    pub in_plane: Point,
    pub used_centroid: bool,
}

/// Smallest barycentric coordinate at which the circumcenter is still used.
/// A circumcenter on or next to an edge makes the exact flat-panel gradient of
/// the neighbouring panel log-singular there.
pub const CIRCUMCENTER_MARGIN: f64 = 0.1;

/// Circumcenter of the flat triangle if it lies well inside, otherwise the
/// centroid; then pushed along its ray onto `body`.
pub fn collocation_point(tri: &[Point; 3], body: &StarBody) -> Result<Collocation> {
    let in_plane = collocation_in_plane(tri)?;
    let (p, used_centroid) = in_plane;
    Ok(Collocation { point: body.project(&p), in_plane: p, used_centroid })
}

fn collocation_in_plane(tri: &[Point; 3]) -> Result<(Point, bool)> {
    let [a0, b0, c0] = *tri;
    let a = b0 - a0;
    let b = c0 - a0;
    let axb = a.cross(&b);
    let n2 = axb.norm_squared();
    if !(n2 > 1e-28 * a.norm_squared() * b.norm_squared()) || !n2.is_finite() {
        return Err(Error::geometry(format!("degenerate triangle {a0:?} {b0:?} {c0:?}")));
    }
    let cc = a0 + (b * a.norm_squared() - a * b.norm_squared()).cross(&axb) / (2.0 * n2);
    // Barycentric coordinates via signed sub-areas.
    let bary = [
        (b0 - cc).cross(&(c0 - cc)).dot(&axb) / n2,
        (c0 - cc).cross(&(a0 - cc)).dot(&axb) / n2,
        (a0 - cc).cross(&(b0 - cc)).dot(&axb) / n2,
    ];
    if bary.iter().all(|&w| w > CIRCUMCENTER_MARGIN) {
        Ok((cc, false))
    } else {
        Ok(((a0 + b0 + c0) / 3.0, true))
    }
}

/// One flat panel of the triangulated surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub vertices: [Point; 3],
    pub indices: [usize; 3],
    pub area: f64,
    /// Outward unit normal.
    pub normal: Point,
    pub collocation: Collocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedSurface {
    pub n: usize,
    pub m: usize,
    pub vertices: Vec<Point>,
    pub panels: Vec<Panel>,
    /// Panels whose circumcenter was not well inside and used the centroid instead.
    pub centroid_fallbacks: usize,
}

impl TriangulatedSurface {
    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.panels.iter().map(|p| p.area).collect()
    }

    pub fn collocation_points(&self) -> Vec<Point> {
        self.panels.iter().map(|p| p.collocation.point).collect()
    }
}

pub fn triangulate(body: &StarBody, n: usize, m: usize) -> Result<TriangulatedSurface> {
    if n < 3 {
        return Err(Error::invalid(format!("need n >= 3 longitudes, got {n}")));
    }
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::invalid(format!("m must be even and >= 2, got {m}")));
    }
    body.validate()?;
    let north = 0;
    let south = 1;
    let mut vertices = vec![
        Point::new(0.0, 0.0, 1.0) * body.radius_along(&Point::new(0.0, 0.0, 1.0)),
        Point::new(0.0, 0.0, -1.0) * body.radius_along(&Point::new(0.0, 0.0, -1.0)),
    ];
    // V(k, l) for k in 0..n, l in 1..m.
    for k in 0..n {
        for l in 1..m {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let theta = PI * l as f64 / m as f64;
            vertices.push(body.point(phi, theta));
        }
    }
    let v = |k: usize, l: usize| 2 + (k % n) * (m - 1) + (l - 1);

    let mut idx: Vec<[usize; 3]> = Vec::with_capacity(2 * n * (m - 1));
    for k in 0..n {
        idx.push([north, v(k, 1), v(k + 1, 1)]);
    }
    for l in 1..m - 1 {
        for k in 0..n {
            if l < m / 2 {
                idx.push([v(k, l), v(k + 1, l + 1), v(k + 1, l)]);
                idx.push([v(k, l), v(k, l + 1), v(k + 1, l + 1)]);
            } else {
                idx.push([v(k, l + 1), v(k + 1, l + 1), v(k + 1, l)]);
                idx.push([v(k, l + 1), v(k + 1, l), v(k, l)]);
            }
        }
    }
    for k in 0..n {
        idx.push([south, v(k + 1, m - 1), v(k, m - 1)]);
    }

    let mut panels = Vec::with_capacity(idx.len());
    let mut fallbacks = 0;
    for ids in idx {
        let tri = [vertices[ids[0]], vertices[ids[1]], vertices[ids[2]]];
        let cross = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
        let norm = cross.norm();
        let col = collocation_point(&tri, body)?;
        if col.used_centroid {
            fallbacks += 1;
        }
        let normal = cross / norm;
        if normal.dot(&col.point) <= 0.0 {
            return Err(Error::geometry(format!(
                "panel {ids:?} faces the origin; the body is not star-shaped at this resolution"
            )));
        }
        panels.push(Panel { vertices: tri, indices: ids, area: 0.5 * norm, normal, collocation: col });
    }
    Ok(TriangulatedSurface { n, m, vertices, panels, centroid_fallbacks: fallbacks })
}

/// Total flat area `S_N`.
pub fn surface_area(surf: &TriangulatedSurface, policy: SummationPolicy) -> f64 {
    policy.sum_iter(surf.panels.iter().map(|p| p.area))
}

/// `∫_T dA / |p - t|` for a flat triangle and a point `p` in its plane, by the
/// edge-wise closed form of the Newtonian potential of a polygon.
pub fn self_potential(tri: &[Point; 3], p: &Point) -> f64 {
    let normal = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
    let mut acc = 0.0;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let e = b - a;
        let len = e.norm();
        let t = e / len;
        // In-plane unit vector pointing into the triangle from this edge.
        let inward = normal.cross(&t);
        // Signed distance to the edge line, positive when p is inside.
        let d = (p - a).dot(&inward);
        if d.abs() < 1e-300 {
            continue;
        }
        let s1 = (a - p).dot(&t);
        let s2 = (b - p).dot(&t);
        acc += d * ((s2 / d.abs()).asinh() - (s1 / d.abs()).asinh());
    }
    acc
}

/// Potential `Φ(x) = ∫_T dA / |x - t|` of a flat triangle with unit density and
/// its gradient, at any point `x` off the triangle's edges.
///
/// Closed form of Wilton et al.: per edge, a logarithmic term weighted by the
/// in-plane distance to the edge line, and a solid-angle term weighted by the
/// height above the plane.
pub fn triangle_potential(tri: &[Point; 3], x: &Point) -> (f64, Point) {
    let normal = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
    let w = (x - tri[0]).dot(&normal);
    let aw = w.abs();
    let rho = x - normal * w;
    let mut phi = 0.0;
    let mut beta = 0.0;
    let mut grad = Point::zeros();
    for i in 0..3 {
        let pm = tri[i];
        let pp = tri[(i + 1) % 3];
        let l_hat = (pp - pm).normalize();
        // Outward in-plane normal of the edge.
        let u_hat = l_hat.cross(&normal);
        let p0 = (pm - rho).dot(&u_hat);
        let lp = (pp - rho).dot(&l_hat);
        let lm = (pm - rho).dot(&l_hat);
        let r02 = p0 * p0 + w * w;
        let r0 = r02.sqrt();
        let rp = (r02 + lp * lp).sqrt();
        let rm = (r02 + lm * lm).sqrt();
        let f = if r0 > 1e-14 * (lp.abs() + lm.abs()) {
            (lp / r0).asinh() - (lm / r0).asinh()
        } else {
            // On the edge line but off the segment.
            (lp.abs() / lm.abs()).ln() * lp.signum()
        };
        let b = if r02 > 0.0 { (p0 * lp / (r02 + aw * rp)).atan() - (p0 * lm / (r02 + aw * rm)).atan() } else { 0.0 };
        phi += p0 * f - aw * b;
        beta += b;
        grad -= u_hat * f;
    }
    grad -= normal * (w.signum() * beta * if aw > 0.0 { 1.0 } else { 0.0 });
    (phi, grad)
}

/// Same integral by Gauss quadrature in polar coordinates about `p`; kept to
/// validate [`self_potential`].
pub fn self_potential_polar(tri: &[Point; 3], p: &Point, order: usize) -> f64 {
    let rule = gauss_legendre(order.max(1));
    let normal = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
    let mut acc = 0.0;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let e = b - a;
        // Signed height of p over the edge line, positive when p is inside.
        let h = (a - p).cross(&e).dot(&normal) / e.norm();
        if h.abs() < 1e-300 {
            continue;
        }
        // ∫ρ dθ along the edge, parametrised by arc position s ∈ [0, 1].
        acc += rule.integrate_1d(0.0, 1.0, |s| {
            let q = a + e * s;
            h * e.norm() / (q - p).norm()
        });
    }
    acc
}
