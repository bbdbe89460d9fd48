//! Field grids as CSV and analytic solutions sampled on grids.
//!
//! Rows follow the row-major node order with excluded nodes skipped. Every
//! float is written with 17 significant digits, so a file is a pure function
//! of the values it holds.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::config::{Family, RunConfig};
use crate::error::{Result, VortexError};
use crate::integrable::{bradlow_eval, eval_impurity_solution, SingleFieldSolution, TodaSolution};
use crate::surface::{build_grid, Grid};

/// Per-flavour `h_A` sampled on every lattice node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub grid: Grid,
    pub h: Vec<Vec<f64>>,
}

impl FieldGrid {
    pub fn new(grid: Grid, h: Vec<Vec<f64>>) -> Result<Self> {
        if h.is_empty() || h.len() > 2 || h.iter().any(|v| v.len() != grid.len()) {
            return Err(VortexError::GridMismatch(format!(
                "expected one or two fields of {} values",
                grid.len()
            )));
        }
        Ok(Self { grid, h })
    }

    pub fn flavours(&self) -> usize {
        self.h.len()
    }

    pub fn phi_sq(&self, flavour: usize) -> Vec<f64> {
        self.h[flavour].iter().map(|x| (2.0 * x).exp()).collect()
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(flavours: usize) -> &'static str {
    if flavours == 1 {
        "x,y,h1,phi1_sq"
    } else {
        "x,y,h1,h2,phi1_sq,phi2_sq"
    }
}

/// Renders the active nodes of `fields` as CSV text.
pub fn write_csv(fields: &FieldGrid) -> String {
    let nf = fields.flavours();
    let phi: Vec<Vec<f64>> = (0..nf).map(|a| fields.phi_sq(a)).collect();
    let mut out = String::from(csv_header(nf));
    out.push('\n');
    for k in fields.grid.active_indices() {
        let z = fields.grid.point(k);
        let _ = write!(out, "{},{}", sci(z.re), sci(z.im));
        for h in &fields.h {
            let _ = write!(out, ",{}", sci(h[k]));
        }
        for p in &phi {
            let _ = write!(out, ",{}", sci(p[k]));
        }
        out.push('\n');
    }
    out
}

/// Reads CSV written by [`write_csv`] back onto `grid`. Node coordinates must
/// match the lattice; nodes absent from the file are NaN.
pub fn read_csv(text: &str, grid: &Grid) -> Result<FieldGrid> {
    let malformed = |line: usize, msg: String| VortexError::Io(format!("line {line}: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed(1, "empty field file".into()))?;
    let nf = match header.trim() {
        h if h == csv_header(1) => 1,
        h if h == csv_header(2) => 2,
        h => return Err(malformed(1, format!("unexpected header `{h}`"))),
    };
    let mut h = vec![vec![f64::NAN; grid.len()]; nf];
    let mut active = grid.active_indices();
    let tol = 1e-9 * grid.radius().max(1.0);
    for (idx, line) in lines.enumerate() {
        let number = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| malformed(number, format!("bad number: {e}")))?;
        if cols.len() != 2 + 2 * nf {
            return Err(malformed(number, format!("expected {} columns, found {}", 2 + 2 * nf, cols.len())));
        }
        let k = active
            .next()
            .ok_or_else(|| VortexError::GridMismatch(format!("line {number}: more rows than active nodes")))?;
        let z = grid.point(k);
        if (z - Complex64::new(cols[0], cols[1])).norm() > tol {
            return Err(VortexError::GridMismatch(format!(
                "line {number}: node ({}, {}) expected at {z}",
                cols[0], cols[1]
            )));
        }
        for (a, field) in h.iter_mut().enumerate() {
            field[k] = cols[2 + a];
        }
    }
    if active.next().is_some() {
        return Err(VortexError::GridMismatch("fewer rows than active nodes".into()));
    }
    FieldGrid::new(grid.clone(), h)
}

/// The analytic solution named by `config.family`, sampled on the config's
/// grid. Nodes where the solution is undefined (outside its positivity
/// domain or at a pole) hold NaN; vortex centres hold `-inf`.
pub fn sample_analytic(config: &RunConfig) -> Result<FieldGrid> {
    let family = config.family.ok_or_else(|| VortexError::Config {
        line: 0,
        key: "family".into(),
        message: "analytic runs need a solution family".into(),
    })?;
    let surface = config.surface()?;
    let grid = build_grid(&surface, config.grid_n)?;
    let map_err = |key: &str, message: String| VortexError::Config {
        line: 0,
        key: key.into(),
        message,
    };
    let f1 = config
        .map(1)
        .map_err(|e| map_err("f1", e.to_string()))?
        .ok_or_else(|| map_err("f1", "map coefficients are required".into()))?;
    let log_metric = |z: Complex64| (surface.metric_factor(z) / 2.0).ln();
    let h = match family {
        Family::SingleField | Family::Bradlow => {
            let lambda = if family == Family::Bradlow { 0 } else { config.lambda };
            let sol = SingleFieldSolution::new(surface, lambda, f1).map_err(|e| map_err("f1", e.to_string()))?;
            let h: Vec<f64> = (0..grid.len())
                .map(|k| {
                    let z = grid.point(k);
                    if family == Family::Bradlow {
                        bradlow_eval(&surface, sol.map(), z)
                            .map(|e2g| 0.5 * e2g.ln() + log_metric(z))
                            .unwrap_or(f64::NAN)
                    } else {
                        sol.eval(z).map(|p| p.h).unwrap_or(f64::NAN)
                    }
                })
                .collect();
            vec![h]
        }
        Family::Impurity => {
            let alpha = match config.alpha.as_slice() {
                [a] => *a,
                _ => return Err(map_err("alpha", "the impurity family needs exactly one strength".into())),
            };
            let h: Vec<f64> = (0..grid.len())
                .map(|k| {
                    eval_impurity_solution(&surface, config.lambda, alpha, &f1, grid.point(k))
                        .map(|p| 0.5 * p.phi_norm_sq.ln())
                        .unwrap_or(f64::NAN)
                })
                .collect();
            vec![h]
        }
        Family::Toda => {
            let f2 = config
                .map(2)
                .map_err(|e| map_err("f2", e.to_string()))?
                .ok_or_else(|| map_err("f2", "the toda family needs a second map".into()))?;
            let sol = TodaSolution::new(&f1, &f2, config.lambda).map_err(|e| map_err("f2", e.to_string()))?;
            let mut h = vec![vec![f64::NAN; grid.len()]; 2];
            for k in 0..grid.len() {
                let z = grid.point(k);
                if let Ok(p) = sol.eval(z) {
                    for a in 0..2 {
                        if p.e2g[a] >= 0.0 {
                            h[a][k] = 0.5 * p.e2g[a].ln() + log_metric(z);
                        }
                    }
                }
            }
            h
        }
    };
    FieldGrid::new(grid, h)
}
