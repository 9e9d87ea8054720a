//! Capacitance by the double-layer iteration.
//!
//! With `A δ(s) = (1/2π) ∫ δ(t) ∂/∂N_s |s - t|^{-1} dt` and outward normals,
//! the equilibrium charge density is the fixed point of `δ ↦ -Aδ` under the
//! normalisation `∫ δ = S`. Each iterate gives the estimate
//! `C^(n) = 4πε₀ S² / ∫∫ δ_n(t) / |s - t| dt ds`.
//!
//! `A` is discretised by collocation at one point per panel, with near pairs
//! integrated exactly over the flat source panel. Its diagonal is not
//! integrated; instead it is fixed by a closure identity, see
//! [`DiagonalClosure`].

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::SummationPolicy;
use crate::surface::{
    self_potential, surface_area, triangle_potential, triangulate, Point, StarBody, TriangulatedSurface,
};

/// How the diagonal of the discrete operator is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalClosure {
    /// `w_jj = -1 - Σ_{k≠j} w_jk`, so the matrix maps the constant 1 to -1.
    /// Every iterate then stays exactly constant, which is correct only for
    /// the sphere.
    Row,
    /// `w_kk = -1 - (1/a_k) Σ_{j≠k} a_j w_jk`, the discrete form of
    /// `∫ ∂/∂N_s |s - t|^{-1} ds = -2π` for `t` on the surface. It keeps
    /// `Σ a_j δ_j` invariant, so the iteration contracts toward the
    /// equilibrium density.
    #[default]
    Adjoint,
}

/// Dense `N × N` discretisation of `A`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleLayerMatrix {
    pub n: usize,
    pub closure: DiagonalClosure,
    data: Vec<f64>,
    /// `Σ_{k≠j} w_jk` before the diagonal was set.
    pub offdiag_row_sums: Vec<f64>,
}

impl DoubleLayerMatrix {
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.n + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    /// `W x`, each row reduced under `policy`.
    pub fn apply(&self, x: &[f64], policy: SummationPolicy) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::invalid(format!("vector of length {} for a {}x{} matrix", x.len(), self.n, self.n)));
        }
        Ok((0..self.n)
            .into_par_iter()
            .map(|j| policy.sum_iter(self.row(j).iter().zip(x).map(|(w, v)| w * v)))
            .collect())
    }
}

/// Default near-field radius, in panel diameters.
pub const DEFAULT_NEAR_FACTOR: f64 = 4.0;

/// Panel-pair interaction rule.
///
/// Pairs farther than `near_factor` source diameters use the one-point rule at
/// the collocation point. Closer pairs are integrated exactly over the flat
/// source panel: always for the single layer, and for the double layer only
/// when the two panels face away from each other (opposite sides of a thin
/// body). Neighbours on the same side keep the one-point rule, since the
/// flat-panel gradient is log-singular along the shared edge while the curved
/// surface's is not. `near_factor = 0` gives the one-point rule throughout.
#[derive(Debug, Clone, Copy)]
struct Interaction<'a> {
    surf: &'a TriangulatedSurface,
    tau: &'a [Point],
    areas: &'a [f64],
    diam: &'a [f64],
    near_factor: f64,
}

impl Interaction<'_> {
    fn is_near(&self, r: f64, k: usize) -> bool {
        r < self.near_factor * self.diam[k]
    }

    fn opposed(&self, j: usize, k: usize) -> bool {
        self.surf.panels[j].normal.dot(&self.surf.panels[k].normal) < 0.0
    }

    /// `(1/2π) ∫_{Δ_k} ∂/∂N_j |τ_j - t|^{-1} dt`.
    fn double_layer(&self, j: usize, k: usize) -> Result<f64> {
        let nj = self.surf.panels[j].normal;
        let d = self.tau[k] - self.tau[j];
        let r2 = d.norm_squared();
        if !(r2 > 0.0) {
            return Err(Error::geometry(format!("coincident collocation points at {:?}", self.tau[j])));
        }
        let r = r2.sqrt();
        if self.is_near(r, k) && self.opposed(j, k) {
            let (_, grad) = triangle_potential(&self.surf.panels[k].vertices, &self.tau[j]);
            Ok(nj.dot(&grad) / (2.0 * PI))
        } else {
            Ok(self.areas[k] * nj.dot(&d) / (2.0 * PI * r2 * r))
        }
    }

    /// `a_j ∫_{Δ_k} dt / |τ_j - t|`; the self term integrates about the
    /// in-plane collocation point.
    fn single_layer(&self, j: usize, k: usize) -> f64 {
        let pk = &self.surf.panels[k];
        if j == k {
            return self.areas[j] * self_potential(&pk.vertices, &pk.collocation.in_plane);
        }
        let r = (self.tau[k] - self.tau[j]).norm();
        if self.is_near(r, k) {
            self.areas[j] * triangle_potential(&pk.vertices, &self.tau[j]).0
        } else {
            self.areas[j] * self.areas[k] / r
        }
    }
}

fn panel_diameters(surf: &TriangulatedSurface) -> Vec<f64> {
    surf.panels
        .iter()
        .map(|p| {
            let [a, b, c] = p.vertices;
            (b - a).norm().max((c - b).norm()).max((a - c).norm())
        })
        .collect()
}

pub fn build_double_layer(surf: &TriangulatedSurface, closure: DiagonalClosure) -> Result<DoubleLayerMatrix> {
    build_double_layer_with(surf, closure, DEFAULT_NEAR_FACTOR)
}

/// As [`build_double_layer`] with an explicit near-field radius;
/// `near_factor = 0` uses the one-point rule for every pair.
pub fn build_double_layer_with(
    surf: &TriangulatedSurface,
    closure: DiagonalClosure,
    near_factor: f64,
) -> Result<DoubleLayerMatrix> {
    let n = surf.len();
    if n < 4 {
        return Err(Error::invalid(format!("double layer needs at least 4 panels, got {n}")));
    }
    let tau = surf.collocation_points();
    let areas = surf.areas();
    let diam = panel_diameters(surf);
    let ia = Interaction { surf, tau: &tau, areas: &areas, diam: &diam, near_factor };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![0.0; n];
            for (k, w) in row.iter_mut().enumerate() {
                if k != j {
                    *w = ia.double_layer(j, k)?;
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        data.extend(r);
    }
    let offdiag_row_sums: Vec<f64> =
        (0..n).into_par_iter().map(|j| SummationPolicy::SequentialCompensated.sum(&data[j * n..(j + 1) * n])).collect();
    match closure {
        DiagonalClosure::Row => {
            for j in 0..n {
                data[j * n + j] = -1.0 - offdiag_row_sums[j];
            }
        }
        DiagonalClosure::Adjoint => {
            let cols: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|k| SummationPolicy::SequentialCompensated.sum_iter((0..n).map(|j| areas[j] * data[j * n + k])))
                .collect();
            for k in 0..n {
                data[k * n + k] = -1.0 - cols[k] / areas[k];
            }
        }
    }
    Ok(DoubleLayerMatrix { n, closure, data, offdiag_row_sums })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub values: Vec<f64>,
    pub iteration: usize,
}

impl DensityState {
    pub fn uniform(n: usize) -> Self {
        DensityState { values: vec![1.0; n], iteration: 0 }
    }
}

/// `δ ↦ -W δ`, rescaled so that `Σ a_k δ_k = S_N`.
pub fn iterate_density(
    matrix: &DoubleLayerMatrix,
    state: &DensityState,
    areas: &[f64],
    policy: SummationPolicy,
) -> Result<DensityState> {
    if areas.len() != matrix.n {
        return Err(Error::invalid("area vector does not match the matrix"));
    }
    let s_n = policy.sum(areas);
    let mut next = matrix.apply(&state.values, policy)?;
    for v in &mut next {
        *v = -*v;
    }
    let total = policy.sum_iter(next.iter().zip(areas).map(|(d, a)| d * a));
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::numeric(format!(
            "iterate {} has total charge {total}; the density cannot be normalised",
            state.iteration + 1
        )));
    }
    let scale = s_n / total;
    for v in &mut next {
        *v *= scale;
    }
    Ok(DensityState { values: next, iteration: state.iteration + 1 })
}

/// Self-term integrals `∫_{Δ_j} dt / |c_j - t|` about each in-plane
/// collocation point.
pub fn self_integrals(surf: &TriangulatedSurface) -> Vec<f64> {
    surf.panels.iter().map(|p| self_potential(&p.vertices, &p.collocation.in_plane)).collect()
}

/// `Σ_j a_j [Σ_{k≠j} δ_k ∫_{Δ_k} dt / |τ_j - t| + δ_j I_self(j)]`, with the
/// inner integrals taken exactly for near pairs and as `a_k / |τ_j - τ_k|`
/// otherwise.
pub fn single_layer_energy(surf: &TriangulatedSurface, density: &[f64], policy: SummationPolicy) -> Result<f64> {
    single_layer_energy_with(surf, density, policy, DEFAULT_NEAR_FACTOR)
}

pub fn single_layer_energy_with(
    surf: &TriangulatedSurface,
    density: &[f64],
    policy: SummationPolicy,
    near_factor: f64,
) -> Result<f64> {
    let n = surf.len();
    if density.len() != n {
        return Err(Error::invalid(format!("density of length {} for {n} panels", density.len())));
    }
    let tau = surf.collocation_points();
    let areas = surf.areas();
    let diam = panel_diameters(surf);
    let ia = Interaction { surf, tau: &tau, areas: &areas, diam: &diam, near_factor };
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let terms = (0..n).map(|k| density[k] * ia.single_layer(j, k));
            policy.sum_iter(terms)
        })
        .collect();
    let j = policy.sum(&rows);
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::numeric(format!("single-layer energy {j} is not positive")));
    }
    Ok(j)
}

/// Closed-form capacitance of a spheroid `a = b`, if the body is one.
pub fn exact_capacitance(body: &StarBody, eps0: f64) -> Option<f64> {
    match *body {
        StarBody::Ellipsoid { a, b, c } if a == b => {
            let k = 4.0 * PI * eps0;
            Some(if c < a {
                k * (a * a - c * c).sqrt() / (c / a).acos()
            } else if c > a {
                k * (c * c - a * a).sqrt() / (c / a).acosh()
            } else {
                k * a
            })
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitanceOptions {
    pub closure: DiagonalClosure,
    pub policy: SummationPolicy,
    /// Near-field radius in panel diameters; zero selects the one-point rule.
    pub near_factor: f64,
}

impl Default for CapacitanceOptions {
    fn default() -> Self {
        CapacitanceOptions {
            closure: DiagonalClosure::Adjoint,
            policy: SummationPolicy::PairwiseDeterministic,
            near_factor: DEFAULT_NEAR_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceResult {
    pub n: usize,
    pub m: usize,
    pub panels: usize,
    pub surface_area: f64,
    /// `C^(0), C^(1), …`.
    pub estimates: Vec<f64>,
    /// Single-layer energies matching `estimates`.
    pub energies: Vec<f64>,
    /// `max_k |δ_{i+1,k} - δ_{i,k}|` for each iteration.
    pub density_changes: Vec<f64>,
    pub final_density: Vec<f64>,
    pub exact: Option<f64>,
    pub centroid_fallbacks: usize,
    pub wall_seconds: f64,
}

impl CapacitanceResult {
    pub fn capacitance(&self) -> f64 {
        *self.estimates.last().expect("at least C^(0) is always present")
    }

    pub fn error(&self) -> Option<f64> {
        self.exact.map(|e| self.capacitance() - e)
    }

    pub fn relative_error(&self) -> Option<f64> {
        self.exact.map(|e| (self.capacitance() - e).abs() / e)
    }
}

pub fn capacitance_run(
    body: &StarBody,
    n: usize,
    m: usize,
    iters: usize,
    eps0: f64,
    opts: &CapacitanceOptions,
) -> Result<CapacitanceResult> {
    if !(eps0.is_finite() && eps0 > 0.0) {
        return Err(Error::invalid(format!("permittivity must be positive, got {eps0}")));
    }
    let start = Instant::now();
    let surf = triangulate(body, n, m)?;
    let policy = opts.policy;
    let s_n = surface_area(&surf, policy);
    let areas = surf.areas();
    let k = 4.0 * PI * eps0 * s_n * s_n;

    let mut state = DensityState::uniform(surf.len());
    let nf = opts.near_factor;
    let mut energies = vec![single_layer_energy_with(&surf, &state.values, policy, nf)?];
    let mut density_changes = Vec::with_capacity(iters);
    if iters > 0 {
        let w = build_double_layer_with(&surf, opts.closure, nf)?;
        for _ in 0..iters {
            let next = iterate_density(&w, &state, &areas, policy)?;
            let change = next.values.iter().zip(&state.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            density_changes.push(change);
            state = next;
            energies.push(single_layer_energy_with(&surf, &state.values, policy, nf)?);
        }
    }
    let estimates = energies.iter().map(|j| k / j).collect();
    Ok(CapacitanceResult {
        n,
        m,
        panels: surf.len(),
        surface_area: s_n,
        estimates,
        energies,
        density_changes,
        final_density: state.values,
        exact: exact_capacitance(body, eps0),
        centroid_fallbacks: surf.centroid_fallbacks,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values() {
        let s = StarBody::Sphere(2.0);
        assert!((exact_capacitance(&s, 1.0).unwrap() - 8.0 * PI).abs() < 1e-14);
        let e = StarBody::ellipsoid(1.0, 1.0, 0.5).unwrap();
        assert!((exact_capacitance(&e, 1.0).unwrap() - 10.392304).abs() < 1e-6);
        let e = StarBody::ellipsoid(1.0, 1.0, 0.9).unwrap();
        assert!((exact_capacitance(&e, 1.0).unwrap() - 12.144630).abs() < 1e-6);
        let e = StarBody::ellipsoid(1.0, 1.0, 1.0001).unwrap();
        assert!((exact_capacitance(&e, 1.0).unwrap() - 4.0 * PI).abs() < 1e-3);
        assert!(exact_capacitance(&StarBody::ellipsoid(1.0, 2.0, 3.0).unwrap(), 1.0).is_none());
    }

    #[test]
    fn point_rule_energy_by_hand() {
        // With the near field disabled, off-diagonal terms are a_j a_k / r.
        let body = StarBody::Sphere(1.0);
        let surf = triangulate(&body, 3, 2).unwrap();
        let d: Vec<f64> = vec![1.0; surf.len()];
        let j = single_layer_energy_with(&surf, &d, SummationPolicy::SequentialCompensated, 0.0).unwrap();
        let tau = surf.collocation_points();
        let a = surf.areas();
        let selfs = self_integrals(&surf);
        let mut manual = 0.0;
        for p in 0..surf.len() {
            manual += a[p] * selfs[p];
            for q in 0..surf.len() {
                if p != q {
                    manual += a[p] * a[q] / (tau[p] - tau[q]).norm();
                }
            }
        }
        assert!((j - manual).abs() < 1e-13 * manual);
    }

    #[test]
    fn adjoint_closure_preserves_charge() {
        let body = StarBody::ellipsoid(1.0, 1.0, 0.5).unwrap();
        let surf = triangulate(&body, 12, 8).unwrap();
        let w = build_double_layer(&surf, DiagonalClosure::Adjoint).unwrap();
        let a = surf.areas();
        let x: Vec<f64> = (0..surf.len()).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        let y = w.apply(&x, SummationPolicy::SequentialCompensated).unwrap();
        let before: f64 = x.iter().zip(&a).map(|(u, v)| u * v).sum();
        let after: f64 = y.iter().zip(&a).map(|(u, v)| u * v).sum();
        assert!((after + before).abs() < 1e-12 * before);
    }

    #[test]
    fn row_closure_maps_one_to_minus_one() {
        let surf = triangulate(&StarBody::ellipsoid(1.0, 1.0, 0.3).unwrap(), 10, 6).unwrap();
        let w = build_double_layer(&surf, DiagonalClosure::Row).unwrap();
        let y = w.apply(&vec![1.0; surf.len()], SummationPolicy::SequentialCompensated).unwrap();
        assert!(y.iter().all(|v| (v + 1.0).abs() < 1e-14));
    }
}
