//! Run configuration: built-in defaults, then an optional `key=value` file,
//! then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use wsquad::capacitance::{DiagonalClosure, DEFAULT_NEAR_FACTOR};
use wsquad::planar::NearPolicy;
use wsquad::SummationPolicy;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Capacitance,
    Convergence,
    Weights,
    Constants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Periodic,
    Planar,
    /// Local-spline formula on the smooth test integrand.
    PlanarSmooth,
}

#[derive(Debug, Parser)]
#[command(name = "wsquad", version, about = "Weakly singular cubature and panel capacitance experiments")]
pub struct Cli {
    pub command: Command,
    /// Flat `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Comma-separated list of `c` semi-axes to sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long)]
    pub radial_table: Option<PathBuf>,
    /// Comma-separated list. For `capacitance` it is zipped with `--m`.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Comma-separated list for `constants`; a single value elsewhere.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t2: Option<f64>,
    /// `per-cell` or `merged`.
    #[arg(long)]
    pub near: Option<String>,
    /// `adjoint` or `row`.
    #[arg(long)]
    pub closure: Option<String>,
    /// Near-field radius in panel diameters; 0 selects the one-point rule.
    #[arg(long)]
    pub near_factor: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `pairwise` or `compensated`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Leave the wall-time column empty so that outputs can be compared.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ellipsoid { a: f64, b: f64, c: Vec<f64> },
    RadialTable(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub shape: Shape,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub iters: usize,
    pub eps0: f64,
    pub lambda: Vec<f64>,
    pub alpha: f64,
    pub r: usize,
    pub family: Family,
    pub cell: (usize, usize),
    pub t: (f64, f64),
    pub near: NearPolicy,
    pub closure: DiagonalClosure,
    pub near_factor: f64,
    pub out: Option<PathBuf>,
    pub policy: SummationPolicy,
    pub timing: bool,
}

/// Raw string values keyed like the long flags, before parsing.
#[derive(Debug, Default)]
struct Raw {
    shape: Option<String>,
    a: Option<String>,
    b: Option<String>,
    c: Option<String>,
    radial_table: Option<String>,
    n: Option<String>,
    m: Option<String>,
    iters: Option<String>,
    eps0: Option<String>,
    lambda: Option<String>,
    alpha: Option<String>,
    r: Option<String>,
    family: Option<String>,
    i: Option<String>,
    j: Option<String>,
    t1: Option<String>,
    t2: Option<String>,
    near: Option<String>,
    closure: Option<String>,
    near_factor: Option<String>,
    out: Option<String>,
    policy: Option<String>,
    no_timing: Option<String>,
}

impl Raw {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key.replace('_', "-").as_str() {
            "shape" => &mut self.shape,
            "a" => &mut self.a,
            "b" => &mut self.b,
            "c" => &mut self.c,
            "radial-table" => &mut self.radial_table,
            "n" => &mut self.n,
            "m" => &mut self.m,
            "iters" => &mut self.iters,
            "eps0" => &mut self.eps0,
            "lambda" => &mut self.lambda,
            "alpha" => &mut self.alpha,
            "r" => &mut self.r,
            "family" => &mut self.family,
            "i" => &mut self.i,
            "j" => &mut self.j,
            "t1" => &mut self.t1,
            "t2" => &mut self.t2,
            "near" => &mut self.near,
            "closure" => &mut self.closure,
            "near-factor" => &mut self.near_factor,
            "out" => &mut self.out,
            "policy" => &mut self.policy,
            "no-timing" => &mut self.no_timing,
            _ => return None,
        })
    }

    fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let mut raw = Raw::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
            let slot = raw.slot(key.trim()).ok_or_else(|| {
                CliError::config(format!("{}:{}: unknown key '{}'", path.display(), lineno + 1, key.trim()))
            })?;
            *slot = Some(value.trim().to_string());
        }
        Ok(raw)
    }

    fn overlay(&mut self, cli: &Cli) {
        fn set<T: ToString>(slot: &mut Option<String>, v: &Option<T>) {
            if let Some(v) = v {
                *slot = Some(v.to_string());
            }
        }
        set(&mut self.shape, &cli.shape);
        set(&mut self.a, &cli.a);
        set(&mut self.b, &cli.b);
        set(&mut self.c, &cli.c);
        set(&mut self.radial_table, &cli.radial_table.as_ref().map(|p| p.display().to_string()));
        set(&mut self.n, &cli.n);
        set(&mut self.m, &cli.m);
        set(&mut self.iters, &cli.iters);
        set(&mut self.eps0, &cli.eps0);
        set(&mut self.lambda, &cli.lambda);
        set(&mut self.alpha, &cli.alpha);
        set(&mut self.r, &cli.r);
        set(&mut self.family, &cli.family.map(|f| f.to_possible_value().unwrap().get_name().to_string()));
        set(&mut self.i, &cli.i);
        set(&mut self.j, &cli.j);
        set(&mut self.t1, &cli.t1);
        set(&mut self.t2, &cli.t2);
        set(&mut self.near, &cli.near);
        set(&mut self.closure, &cli.closure);
        set(&mut self.near_factor, &cli.near_factor);
        set(&mut self.out, &cli.out.as_ref().map(|p| p.display().to_string()));
        set(&mut self.policy, &cli.policy);
        if cli.no_timing {
            self.no_timing = Some("true".into());
        }
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::config(format!("{key}: cannot parse '{v}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_one(key, s)).collect()
}

fn get<T: std::str::FromStr>(key: &str, v: &Option<String>, default: T) -> Result<T, CliError> {
    v.as_deref().map_or(Ok(default), |s| parse_one(key, s))
}

fn get_list<T: std::str::FromStr>(key: &str, v: &Option<String>, default: Vec<T>) -> Result<Vec<T>, CliError> {
    v.as_deref().map_or(Ok(default), |s| parse_list(key, s))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(CliError::config(format!("{key}: expected true or false, got '{other}'"))),
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut raw = match &cli.config {
            Some(path) => Raw::from_file(path)?,
            None => Raw::default(),
        };
        raw.overlay(cli);
        let cfg = Self::from_raw(cli.command, &raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_raw(command: Command, raw: &Raw) -> Result<Self, CliError> {
        let shape = match (raw.shape.as_deref(), &raw.radial_table) {
            (Some("ellipsoid") | None, None) => Shape::Ellipsoid {
                a: get("a", &raw.a, 1.0)?,
                b: get("b", &raw.b, 1.0)?,
                c: get_list("c", &raw.c, vec![1.0])?,
            },
            (Some("radial-table") | None, Some(path)) => Shape::RadialTable(PathBuf::from(path)),
            (Some("ellipsoid"), Some(_)) => {
                return Err(CliError::config("--shape ellipsoid conflicts with --radial-table"));
            }
            (Some(other), _) => return Err(CliError::config(format!("unknown shape '{other}'"))),
        };
        let family = match raw.family.as_deref() {
            None => Family::Periodic,
            Some(s) => Family::from_str(s, true).map_err(|_| CliError::config(format!("unknown family '{s}'")))?,
        };
        let (default_n, default_m): (Vec<usize>, Vec<usize>) = match (command, family) {
            (Command::Capacitance, _) => (vec![40], vec![30]),
            (Command::Convergence, Family::PlanarSmooth) => (vec![8, 16, 32], vec![]),
            (Command::Convergence, _) => (vec![8, 16, 32, 64], vec![]),
            _ => (vec![16], vec![]),
        };
        let default_lambda = match command {
            Command::Constants => vec![0.0, 0.25, 0.5, 0.75],
            _ => vec![0.3],
        };
        let near = match raw.near.as_deref() {
            None | Some("merged") => NearPolicy::MergedDelta,
            Some("per-cell") => NearPolicy::PerCell,
            Some(other) => return Err(CliError::config(format!("unknown near policy '{other}'"))),
        };
        let closure = match raw.closure.as_deref() {
            None | Some("adjoint") => DiagonalClosure::Adjoint,
            Some("row") => DiagonalClosure::Row,
            Some(other) => return Err(CliError::config(format!("unknown closure '{other}'"))),
        };
        let policy = match raw.policy.as_deref() {
            None | Some("pairwise") => SummationPolicy::PairwiseDeterministic,
            Some("compensated") => SummationPolicy::SequentialCompensated,
            Some(other) => return Err(CliError::config(format!("unknown summation policy '{other}'"))),
        };
        let timing = match raw.no_timing.as_deref() {
            None => true,
            Some(v) => !parse_bool("no-timing", v)?,
        };
        Ok(RunConfig {
            command,
            shape,
            n: get_list("n", &raw.n, default_n)?,
            m: get_list("m", &raw.m, default_m)?,
            iters: get("iters", &raw.iters, 1)?,
            eps0: get("eps0", &raw.eps0, 1.0)?,
            lambda: get_list("lambda", &raw.lambda, default_lambda)?,
            alpha: get("alpha", &raw.alpha, 0.6)?,
            r: get("r", &raw.r, 2)?,
            family,
            cell: (get("i", &raw.i, 0)?, get("j", &raw.j, 0)?),
            t: (get("t1", &raw.t1, 0.0)?, get("t2", &raw.t2, 0.0)?),
            near,
            closure,
            near_factor: get("near-factor", &raw.near_factor, DEFAULT_NEAR_FACTOR)?,
            out: raw.out.as_ref().map(PathBuf::from),
            policy,
            timing,
        })
    }

    /// Range checks that can be made before any computation starts.
    fn validate(&self) -> Result<(), CliError> {
        let lambda_range = |allow_zero: bool| -> Result<(), CliError> {
            for &l in &self.lambda {
                let ok = if allow_zero { (0.0..1.0).contains(&l) } else { l > 0.0 && l < 1.0 };
                if !ok {
                    return Err(CliError::config(format!("lambda must lie in (0, 1), got {l}")));
                }
            }
            Ok(())
        };
        match self.command {
            Command::Capacitance => {
                if self.n.len() != self.m.len() {
                    return Err(CliError::config(format!(
                        "--n and --m must have the same length ({} vs {})",
                        self.n.len(),
                        self.m.len()
                    )));
                }
                for (&n, &m) in self.n.iter().zip(&self.m) {
                    if n < 3 {
                        return Err(CliError::config(format!("n must be >= 3, got {n}")));
                    }
                    if m < 2 || m % 2 != 0 {
                        return Err(CliError::config(format!("m must be even and >= 2, got {m}")));
                    }
                }
                if let Shape::Ellipsoid { a, b, c } = &self.shape {
                    for &x in [a, b].into_iter().chain(c) {
                        if !(x.is_finite() && x > 0.0) {
                            return Err(CliError::config(format!("semi-axes must be positive, got {x}")));
                        }
                    }
                }
                if !(self.eps0.is_finite() && self.eps0 > 0.0) {
                    return Err(CliError::config(format!("eps0 must be positive, got {}", self.eps0)));
                }
                if !(self.near_factor.is_finite() && self.near_factor >= 0.0) {
                    return Err(CliError::config(format!("near-factor must be >= 0, got {}", self.near_factor)));
                }
            }
            Command::Convergence | Command::Weights => {
                if self.lambda.len() != 1 {
                    return Err(CliError::config("give exactly one --lambda"));
                }
                lambda_range(false)?;
                if !(self.alpha > 0.0 && self.alpha <= 1.0) {
                    return Err(CliError::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
                }
                if self.n.is_empty() {
                    return Err(CliError::config("empty --n list"));
                }
                if let Some(&n) = self.n.iter().find(|&&n| n < 4) {
                    return Err(CliError::config(format!("n must be >= 4, got {n}")));
                }
                if self.command == Command::Weights && self.n.len() != 1 {
                    return Err(CliError::config("weights takes a single --n"));
                }
                if self.family == Family::PlanarSmooth {
                    if !(1..=3).contains(&self.r) {
                        return Err(CliError::config(format!("r must be 1, 2 or 3, got {}", self.r)));
                    }
                    if let Some(&n) = self.n.iter().find(|&&n| n % self.r != 0) {
                        return Err(CliError::config(format!("n = {n} is not a multiple of r = {}", self.r)));
                    }
                }
                if self.family != Family::Periodic && !(self.t.0.abs() <= 1.0 && self.t.1.abs() <= 1.0) {
                    return Err(CliError::config(format!("t = ({}, {}) outside [-1, 1]^2", self.t.0, self.t.1)));
                }
                if self.command == Command::Weights {
                    let n = self.n[0];
                    if self.family == Family::Periodic && (self.cell.0 >= n || self.cell.1 >= n) {
                        return Err(CliError::config(format!(
                            "cell ({}, {}) outside an {n}x{n} grid",
                            self.cell.0, self.cell.1
                        )));
                    }
                }
            }
            Command::Constants => lambda_range(true)?,
        }
        Ok(())
    }
}
