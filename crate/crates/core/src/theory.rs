//! Constants in the error bounds and the leading-order bounds themselves.
//!
//! All bounds drop their `o(1)` factors, so they are meant as envelopes for
//! empirical errors rather than as rigorous estimates at finite `n`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{oracle_integrate, Domain, OracleOptions};

/// Function class a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionClass {
    /// Hölder continuity with exponent `alpha` in each coordinate.
    Holder { alpha: f64 },
    /// Mixed Sobolev class `W^{r,r}` with the integrability index `p`.
    Sobolev { r: u32, p: f64 },
    /// `r` times continuously differentiable; only lower bounds are known.
    Crr { r: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Periodic,
    Planar,
}

/// Everything needed to evaluate one bound. `kernel_integral` is `γ(λ)` for the
/// periodic family and `γ̂(λ)` for the planar one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundContext {
    pub class: FunctionClass,
    pub family: KernelFamily,
    pub n: usize,
    pub lambda: f64,
    pub kernel_integral: f64,
}

/// `K_r = (4/π) Σ_{j≥0} [(-1)^j / (2j+1)]^{r+1}`.
pub fn favard_constant(r: u32) -> f64 {
    let s = r as i32 + 1;
    let series = if r.is_multiple_of(2) { dirichlet_beta(s) } else { odd_zeta(s) };
    4.0 / PI * series
}

/// `Σ (-1)^j (2j+1)^{-s}` by the Cohen-Villegas-Zagier acceleration.
fn dirichlet_beta(s: i32) -> f64 {
    const TERMS: usize = 40;
    let nf = TERMS as f64;
    let mut d = (3.0 + 8f64.sqrt()).powf(nf);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut acc = 0.0;
    for k in 0..TERMS {
        let kf = k as f64;
        c = b - c;
        acc += c * (2.0 * kf + 1.0).powi(-s);
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    acc / d
}

/// `Σ (2j+1)^{-s}` for `s ≥ 2`: a direct head plus an Euler-Maclaurin tail.
fn odd_zeta(s: i32) -> f64 {
    const HEAD: usize = 1000;
    let sf = s as f64;
    let x = 2.0 * HEAD as f64 + 1.0;
    let f = x.powi(-s);
    let d1 = -2.0 * sf * x.powi(-s - 1);
    let d3 = -8.0 * sf * (sf + 1.0) * (sf + 2.0) * x.powi(-s - 3);
    let mut acc = x.powi(1 - s) / (2.0 * (sf - 1.0)) + 0.5 * f - d1 / 12.0 + d3 / 720.0;
    for j in (0..HEAD).rev() {
        acc += (2.0 * j as f64 + 1.0).powi(-s);
    }
    acc
}

/// Value at 1 of the monic degree-`r` polynomial deviating least from zero in
/// `L_q(-1, 1)`. Only `q = 1` (scaled Chebyshev of the second kind) and
/// `q = ∞` (scaled Chebyshev of the first kind) are supported.
pub fn least_dev_value(r: u32, q: f64) -> Result<f64> {
    if r == 0 {
        return Err(Error::invalid("least-deviation degree must be >= 1"));
    }
    if q == 1.0 {
        Ok((r as f64 + 1.0) / 2f64.powi(r as i32))
    } else if q == f64::INFINITY {
        Ok(2f64.powi(1 - r as i32))
    } else {
        Err(Error::NotImplemented(format!("least-deviating polynomial for q = {q}")))
    }
}

/// `γ̂(λ) = ∫∫_{[-1,1]²} (τ₁² + τ₂²)^{-λ} dτ`.
pub fn planar_gamma(lambda: f64, tol: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(4.0);
    }
    let res = oracle_integrate(
        |x, y| (x * x + y * y).powf(-lambda),
        &Domain::UnitSquareSigned.rect(),
        tol,
        OracleOptions::singular_at(0.0, 0.0),
    )?;
    Ok(res.estimate)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    Ok(())
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Leading-order error bound for the given class and kernel family.
///
/// Hölder classes give the upper bounds of the midpoint-weight formulas,
/// Sobolev classes the local-spline bounds, and `Crr` the lower bounds that no
/// formula of the midpoint type can beat.
pub fn predicted_error(ctx: &BoundContext) -> Result<f64> {
    if ctx.n == 0 {
        return Err(Error::invalid("bound needs n >= 1"));
    }
    if !(ctx.kernel_integral.is_finite() && ctx.kernel_integral > 0.0) {
        return Err(Error::invalid("kernel integral must be positive and finite"));
    }
    let n = ctx.n as f64;
    let g = ctx.kernel_integral;
    match (ctx.class, ctx.family) {
        (FunctionClass::Holder { alpha }, fam) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::invalid(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
            }
            Ok(match fam {
                KernelFamily::Periodic => 2.0 * g / (1.0 + alpha) * (PI / n).powf(alpha),
                KernelFamily::Planar => g / ((1.0 + alpha) * n.powf(alpha)),
            })
        }
        (FunctionClass::Sobolev { r, p }, fam) => {
            if r == 0 {
                return Err(Error::invalid("Sobolev order must be >= 1"));
            }
            if !(p >= 1.0) {
                return Err(Error::invalid(format!("Sobolev index must be >= 1, got {p}")));
            }
            let rr = least_dev_value(r, 1.0)?;
            let denom = factorial(r + 1) * (n - 1.0 + rr.powf(1.0 / r as f64)).powi(r as i32);
            Ok(match fam {
                KernelFamily::Periodic => 2.0 * PI.powi(r as i32) * rr / denom * g,
                KernelFamily::Planar => 2.0 * rr / denom * g,
            })
        }
        (FunctionClass::Crr { r }, KernelFamily::Periodic) => Ok(2.0 * g * favard_constant(r) / n.powi(r as i32)),
        (FunctionClass::Crr { r }, KernelFamily::Planar) => {
            Ok(2.0 * favard_constant(r) / (2f64.powf(2.0 * ctx.lambda) * (PI * n).powi(r as i32)) * g)
        }
    }
}
