use std::io::Write;

use wsquad::capacitance::{capacitance_run, CapacitanceOptions};
use wsquad::convergence::{periodic_holder_study, planar_holder_study, planar_smooth_study, RateStudy, StudyOptions};
use wsquad::periodic::{gamma_constant, periodic_weights_with, PeriodicOptions};
use wsquad::planar::{planar_weights_with, PlanarOptions};
use wsquad::quad::{make_grid, Domain};
use wsquad::surface::{RadialTable, StarBody};
use wsquad::theory::{favard_constant, least_dev_value, planar_gamma};

use crate::config::{Family, RunConfig, Shape};
use crate::CliError;

/// Tolerance for constants computed by the adaptive oracle.
const CONSTANT_TOL: f64 = 1e-9;

pub fn run_capacitance(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "c,n,m,N,computed,exact,error,relative_error,wall_seconds")?;
    let opts = CapacitanceOptions { closure: cfg.closure, policy: cfg.policy, near_factor: cfg.near_factor };
    let bodies: Vec<(Option<f64>, StarBody)> = match &cfg.shape {
        Shape::Ellipsoid { a, b, c } => {
            c.iter().map(|&c| Ok((Some(c), StarBody::ellipsoid(*a, *b, c)?))).collect::<Result<_, CliError>>()?
        }
        Shape::RadialTable(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            let table = RadialTable::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            vec![(None, StarBody::Tabulated(table))]
        }
    };
    for (c, body) in &bodies {
        for (&n, &m) in cfg.n.iter().zip(&cfg.m) {
            let res = capacitance_run(body, n, m, cfg.iters, cfg.eps0, &opts)?;
            let computed = res.capacitance();
            let (exact, error, rel) = match res.exact {
                Some(e) => (e.to_string(), (computed - e).to_string(), ((computed - e).abs() / e).to_string()),
                None => Default::default(),
            };
            let wall = if cfg.timing { format!("{:.3}", res.wall_seconds) } else { String::new() };
            let c = c.map(|c| c.to_string()).unwrap_or_default();
            writeln!(out, "{c},{n},{m},{},{computed},{exact},{error},{rel},{wall}", res.panels)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn run_convergence(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let lambda = cfg.lambda[0];
    let opts = StudyOptions { policy: cfg.policy, ..Default::default() };
    let planar = PlanarOptions { policy: cfg.near, ..Default::default() };
    let study = match cfg.family {
        Family::Periodic => periodic_holder_study(lambda, cfg.alpha, &cfg.n, &opts)?,
        Family::Planar => planar_holder_study(lambda, cfg.alpha, &cfg.n, cfg.t, &planar, &opts)?,
        Family::PlanarSmooth => planar_smooth_study(lambda, cfg.r, &cfg.n, cfg.t, &planar, &opts)?,
    };
    write_study(&study, out)
}

fn write_study(study: &RateStudy, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "n,computed,oracle,abs_error,predicted_bound")?;
    for r in &study.rows {
        writeln!(out, "{},{},{},{},{}", r.n, r.computed, r.oracle, r.abs_error, r.predicted)?;
    }
    match study.slope {
        Some(s) => writeln!(out, "slope,{s},,,")?,
        None => writeln!(out, "slope,insufficient points,,,")?,
    }
    Ok(())
}

pub fn run_weights(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let n = cfg.n[0];
    let lambda = cfg.lambda[0];
    writeln!(out, "k,l,x,y,weight")?;
    let (grid, weights) = match cfg.family {
        Family::Periodic => {
            let opts = PeriodicOptions { alpha: cfg.alpha, ..Default::default() };
            let table = periodic_weights_with(n, lambda, cfg.cell.0, cfg.cell.1, &opts)?;
            (make_grid(Domain::Periodic2Pi, n)?, table.weights)
        }
        Family::Planar | Family::PlanarSmooth => {
            let opts = PlanarOptions { alpha: cfg.alpha, policy: cfg.near, ..Default::default() };
            let table = planar_weights_with(n, cfg.t, lambda, &opts)?;
            (make_grid(Domain::UnitSquareSigned, n)?, table.weights)
        }
    };
    for k in 0..n {
        for l in 0..n {
            let (x, y) = grid.midpoint(k, l);
            writeln!(out, "{k},{l},{x},{y},{}", weights[k * n + l])?;
        }
    }
    Ok(())
}

pub fn run_constants(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "kernel integrals")?;
    for &l in &cfg.lambda {
        let g = gamma_constant(l, CONSTANT_TOL)?;
        let gh = planar_gamma(l, CONSTANT_TOL)?;
        writeln!(out, "  lambda={l:<6} gamma={g:.10}  gamma_hat={gh:.10}")?;
    }
    writeln!(out, "Favard constants")?;
    for r in 0..=4 {
        writeln!(out, "  K_{r} = {:.10}", favard_constant(r))?;
    }
    writeln!(out, "least-deviation values at 1")?;
    for r in 1..=4 {
        let l1 = least_dev_value(r, 1.0)?;
        let linf = least_dev_value(r, f64::INFINITY)?;
        writeln!(out, "  r={r}  R_1={l1:.10}  R_inf={linf:.10}")?;
    }
    Ok(())
}
