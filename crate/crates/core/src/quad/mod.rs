//! Numerical substrate shared by the cubature and capacitance modules.

pub mod gauss;
pub mod grid;
pub mod oracle;
pub mod summation;

pub use gauss::{gauss_legendre, gauss_panel_integrate, GaussPanelRule, GaussRule};
pub use grid::{make_grid, Domain, Grid2D, Rect};
pub use oracle::{oracle_integrate, OracleOptions, OracleResult};
pub use summation::SummationPolicy;
