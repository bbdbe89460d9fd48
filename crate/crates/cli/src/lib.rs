//! Batch commands behind the `exotic-vortex` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use exotic_vortex::config::{Family, RunConfig};
use exotic_vortex::diagnostics::{
    compare_fields, liouville_residual, locate_zeros, magnetic_flux, toda_residual, Region,
    ResidualReport,
};
use exotic_vortex::holomorphic::{HoloMap, Poly};
use exotic_vortex::integrable::{SingleFieldSolution, TodaSolution};
use exotic_vortex::io::{read_csv, sample_analytic, write_csv, FieldGrid};
use exotic_vortex::solver::{newton_solve, residual, Boundary, FieldSet, ImpuritySpec, ProblemSpec};
use exotic_vortex::surface::build_grid;
use exotic_vortex::{Complex64, VortexError};
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;
pub const EXIT_TOLERANCE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "exotic-vortex", version, about = "Exotic vortex solutions and solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an analytic solution family on the grid.
    Analytic(Common),
    /// Solve the coupled vortex equations numerically.
    Solve(Common),
    /// Check a field file against its equations and report diagnostics.
    Verify(Common),
    /// Compare a field file with another one or with the analytic family.
    Compare(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (default: `[output] dir`, then the working directory).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Residual or comparison tolerance (default: `[solver] tol`).
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,
    /// Half-width of the grid in spacings (default: `[grid] n`).
    #[arg(long = "grid-n", value_name = "INT")]
    pub grid_n: Option<usize>,
}

/// What a command produced: an exit code, a JSON report and a message for
/// stderr on failure.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub report: Option<Value>,
    pub message: Option<String>,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { code: EXIT_OK, report: Some(report), message: None }
    }

    fn fail(code: u8, message: impl Into<String>) -> Self {
        Self { code, report: None, message: Some(message.into()) }
    }
}

fn input_error(e: &VortexError) -> u8 {
    match e {
        VortexError::Divergence { .. } => EXIT_DIVERGENCE,
        VortexError::Io(_) => EXIT_FAILURE,
        _ => EXIT_CONFIG,
    }
}

struct Context {
    config: RunConfig,
    out: PathBuf,
}

impl Context {
    fn load(common: &Common) -> Result<Self, Outcome> {
        let text = fs::read_to_string(&common.config).map_err(|e| {
            Outcome::fail(EXIT_CONFIG, format!("cannot read {}: {e}", common.config.display()))
        })?;
        let mut config = RunConfig::parse(&text).map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
        if let Some(tol) = common.tol {
            if !(tol > 0.0) {
                return Err(Outcome::fail(EXIT_CONFIG, format!("--tol must be positive, got {tol}")));
            }
            config.tol = tol;
        }
        if let Some(n) = common.grid_n {
            config.grid_n = n;
        }
        let out = common
            .out
            .clone()
            .or_else(|| config.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { config, out })
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.out.join(format!("{}{suffix}", self.config.name))
    }

    fn fields_path(&self) -> PathBuf {
        self.config
            .fields
            .as_ref()
            .map(PathBuf::from)
            .unwrap_or_else(|| self.path(".csv"))
    }

    fn write(&self, path: &Path, contents: &str) -> Result<(), Outcome> {
        fs::create_dir_all(&self.out)
            .and_then(|_| fs::write(path, contents))
            .map_err(|e| Outcome::fail(EXIT_FAILURE, format!("cannot write {}: {e}", path.display())))
    }

    fn write_json(&self, path: &Path, value: &Value) -> Result<(), Outcome> {
        let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        self.write(path, &(text + "\n"))
    }
}

/// Runs one command; never panics on bad input.
pub fn run(command: &Command) -> Outcome {
    let (common, f): (&Common, fn(&Context) -> Result<Value, Outcome>) = match command {
        Command::Analytic(c) => (c, cmd_analytic),
        Command::Solve(c) => (c, cmd_solve),
        Command::Verify(c) => (c, cmd_verify),
        Command::Compare(c) => (c, cmd_compare),
    };
    let ctx = match Context::load(common) {
        Ok(ctx) => ctx,
        Err(outcome) => return outcome,
    };
    match f(&ctx) {
        Ok(report) => {
            let violated = report.get("pass").and_then(Value::as_bool) == Some(false);
            let mut outcome = Outcome::ok(report);
            if violated {
                outcome.code = EXIT_TOLERANCE;
                outcome.message = Some("declared tolerance violated".into());
            }
            outcome
        }
        Err(outcome) => outcome,
    }
}

fn residual_json(r: Option<ResidualReport>) -> Value {
    match r {
        Some(r) => json!({ "max": r.max, "nodes": r.nodes, "spacing": r.spacing }),
        None => Value::Null,
    }
}

/// The residual summary of the configured analytic family, if it has one.
fn analytic_residual(config: &RunConfig) -> Result<Option<ResidualReport>, VortexError> {
    let family = config.family.expect("checked by caller");
    let surface = config.surface()?;
    let f1 = config
        .map(1)?
        .ok_or_else(|| VortexError::InvalidInput("f1 is required".into()))?;
    match family {
        Family::SingleField | Family::Bradlow => {
            let lambda = if family == Family::Bradlow { 0 } else { config.lambda };
            liouville_residual(&SingleFieldSolution::new(surface, lambda, f1)?, config.grid_n).map(Some)
        }
        Family::Impurity => {
            let alpha = config.alpha.first().copied().unwrap_or(0.0);
            let shifted = f1.numerator().mul(&Poly::monomial(Complex64::new(1.0, 0.0), 1));
            let map = HoloMap::new(shifted, f1.denominator().clone(), f1.power())?.with_extra_power(alpha)?;
            let sol = SingleFieldSolution::new(surface, config.lambda, map)?;
            Ok(liouville_residual(&sol, config.grid_n).ok())
        }
        Family::Toda => {
            let f2 = config
                .map(2)?
                .ok_or_else(|| VortexError::InvalidInput("f2 is required".into()))?;
            let sol = TodaSolution::new(&f1, &f2, config.lambda)?;
            let grid = build_grid(&surface, config.grid_n)?;
            toda_residual(&sol, &grid, config.min_det, false).map(Some)
        }
    }
}

fn grid_json(fields: &FieldGrid) -> Value {
    json!({
        "n": fields.grid.n(),
        "radius": fields.grid.radius(),
        "spacing": fields.grid.spacing(),
        "active_nodes": fields.grid.active_indices().count(),
    })
}

fn cmd_analytic(ctx: &Context) -> Result<Value, Outcome> {
    let config = &ctx.config;
    if config.family.is_none() {
        return Err(Outcome::fail(EXIT_CONFIG, "config error: analytic runs need `family` in [problem]"));
    }
    let fields = sample_analytic(config).map_err(|e| Outcome::fail(input_error(&e), e.to_string()))?;
    let res = analytic_residual(config).map_err(|e| Outcome::fail(input_error(&e), e.to_string()))?;
    let csv = ctx.path(".csv");
    ctx.write(&csv, &write_csv(&fields))?;
    let meta = json!({
        "command": "analytic",
        "family": config.family.map(Family::name),
        "parameters": config,
        "grid": grid_json(&fields),
        "residual": residual_json(res),
        "fields": csv,
    });
    ctx.write_json(&ctx.path(".json"), &meta)?;
    Ok(meta)
}

fn problem(config: &RunConfig) -> Result<ProblemSpec, Outcome> {
    let spec = config.problem().map_err(|e| Outcome::fail(EXIT_CONFIG, format!("config error: {e}")))?;
    if spec.boundary == Boundary::Vacuum {
        let sigma = match spec.impurity {
            ImpuritySpec::Constant(s) => s,
            _ => 0.0,
        };
        spec.vacuum(sigma).map_err(|e| {
            Outcome::fail(EXIT_CONFIG, format!("config error: vacuum_moduli failed: {e}"))
        })?;
    }
    Ok(spec)
}

fn zeros_json(fields: &FieldSet) -> Value {
    (0..fields.flavours())
        .map(|a| locate_zeros(fields, a).iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into()
}

fn cmd_solve(ctx: &Context) -> Result<Value, Outcome> {
    let config = &ctx.config;
    let spec = problem(config)?;
    let history_path = ctx.path("_history.json");
    let fields = match newton_solve(&spec, &config.newton()) {
        Ok(f) => f,
        Err(VortexError::Divergence { iterations, reason, history }) => {
            ctx.write_json(
                &history_path,
                &json!({ "converged": false, "iterations": iterations, "reason": reason, "residual_history": history }),
            )?;
            return Err(Outcome::fail(EXIT_DIVERGENCE, format!("diverged after {iterations} iterations: {reason}")));
        }
        Err(e) => return Err(Outcome::fail(input_error(&e), e.to_string())),
    };
    ctx.write_json(
        &history_path,
        &json!({ "converged": true, "iterations": fields.iterations, "residual_history": fields.residual_history }),
    )?;
    let grid = FieldGrid::new(fields.grid().clone(), (0..fields.flavours()).map(|a| fields.h(a)).collect())
        .map_err(|e| Outcome::fail(EXIT_FAILURE, e.to_string()))?;
    let csv = ctx.path(".csv");
    ctx.write(&csv, &write_csv(&grid))?;
    let flux = magnetic_flux(&spec, &fields).map_err(|e| Outcome::fail(EXIT_FAILURE, e.to_string()))?;
    let meta = json!({
        "command": "solve",
        "parameters": config,
        "grid": grid_json(&grid),
        "converged": fields.converged,
        "iterations": fields.iterations,
        "final_residual": fields.final_residual,
        "residual_history": fields.residual_history,
        "boundary_mismatch": fields.boundary_mismatch,
        "flux": flux,
        "zeros": zeros_json(&fields),
        "fields": csv,
    });
    ctx.write_json(&ctx.path(".json"), &meta)?;
    Ok(meta)
}

fn read_fields(ctx: &Context, path: &Path) -> Result<FieldGrid, Outcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| Outcome::fail(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    let surface = ctx.config.surface().map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
    let grid = build_grid(&surface, ctx.config.grid_n).map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
    read_csv(&text, &grid).map_err(|e| Outcome::fail(EXIT_CONFIG, format!("{}: {e}", path.display())))
}

fn field_difference(a: &FieldGrid, b: &FieldGrid) -> Result<Vec<Value>, Outcome> {
    if a.flavours() != b.flavours() {
        return Err(Outcome::fail(EXIT_CONFIG, "field files hold different numbers of flavours"));
    }
    (0..a.flavours())
        .map(|f| {
            compare_fields(&a.grid, &a.h[f], &b.grid, &b.h[f], &Region::AllInterior)
                .map(|c| json!({ "flavour": f + 1, "l_inf": c.l_inf, "l2": c.l2, "nodes": c.nodes }))
                .map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))
        })
        .collect()
}

fn max_l_inf(diffs: &[Value]) -> f64 {
    diffs
        .iter()
        .filter_map(|d| d["l_inf"].as_f64())
        .fold(0.0, f64::max)
}

fn cmd_verify(ctx: &Context) -> Result<Value, Outcome> {
    let config = &ctx.config;
    let path = ctx.fields_path();
    let file = read_fields(ctx, &path)?;
    let report = if config.family.is_some() {
        let expected = sample_analytic(config).map_err(|e| Outcome::fail(input_error(&e), e.to_string()))?;
        let diffs = field_difference(&file, &expected)?;
        let res = analytic_residual(config).map_err(|e| Outcome::fail(input_error(&e), e.to_string()))?;
        let res_max = res.and_then(|r| r.max);
        let pass = max_l_inf(&diffs) <= config.tol && res_max.is_none_or(|m| m <= config.tol);
        json!({
            "command": "verify",
            "family": config.family.map(Family::name),
            "fields": path,
            "tol": config.tol,
            "residual": residual_json(res),
            "difference_from_formula": diffs,
            "pass": pass,
        })
    } else {
        let spec = problem(config)?;
        let fields = FieldSet::from_h(&spec, file.h.clone(), true)
            .map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
        let res = residual(&spec, &fields).map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
        let interior: Vec<usize> = fields.grid().interior_indices().collect();
        let maxes: Vec<f64> = res
            .iter()
            .map(|r| interior.iter().map(|&k| r[k].abs()).fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x) }))
            .collect();
        let worst = maxes.iter().copied().fold(0.0, f64::max);
        let flux = magnetic_flux(&spec, &fields).map_err(|e| Outcome::fail(EXIT_FAILURE, e.to_string()))?;
        json!({
            "command": "verify",
            "fields": path,
            "tol": config.tol,
            "residual_max": maxes,
            "flux": flux.k,
            "flux_raw": flux.k_raw,
            "contracted": flux.contracted,
            "n_inferred": flux.n_inferred,
            "v_bps": flux.v_bps,
            "zeros": zeros_json(&fields),
            "pass": worst <= config.tol,
        })
    };
    ctx.write_json(&ctx.path("_verify.json"), &report)?;
    Ok(report)
}

fn cmd_compare(ctx: &Context) -> Result<Value, Outcome> {
    let config = &ctx.config;
    let path = ctx.fields_path();
    let a = read_fields(ctx, &path)?;
    let (b, against) = match &config.compare {
        Some(other) => (read_fields(ctx, Path::new(other))?, json!(other)),
        None => {
            if config.family.is_none() {
                return Err(Outcome::fail(
                    EXIT_CONFIG,
                    "config error: compare needs `compare` in [output] or `family` in [problem]",
                ));
            }
            let b = sample_analytic(config).map_err(|e| Outcome::fail(input_error(&e), e.to_string()))?;
            (b, json!(config.family.map(Family::name)))
        }
    };
    let diffs = field_difference(&a, &b)?;
    let report = json!({
        "command": "compare",
        "fields": path,
        "against": against,
        "tol": config.tol,
        "difference": diffs,
        "pass": max_l_inf(&diffs) <= config.tol,
    });
    ctx.write_json(&ctx.path("_compare.json"), &report)?;
    Ok(report)
}
