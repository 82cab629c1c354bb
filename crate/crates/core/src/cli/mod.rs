//! Command-line front end: argument parsing, command dispatch and reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 Fatou-Shishikura FAIL.

pub mod expr;
mod table;

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, DEFAULT_PRECISION, MAX_PRECISION, MIN_PRECISION};
use crate::cycles::{cycle_through, enumerate_cycles, Cycle, CycleClass};
use crate::error::{Error, Result};
use crate::fscount::{self, cycle_row, marked_set, Verdict};
use crate::numkernel::Cx;
use crate::parabolic::{attach_parabolic_data, gamma_of_cycle, invariant_divergence_basis, parabolic_invariants, BasisKind};
use crate::qd::{lattes_test, nabla_matrix, pull, push, LattesVerdict, Qd, RationalQD};
use crate::ratmap::{DynMap, Pt};
use crate::residues::{balance_check, complete_cycle_divergence, polar_part, residue_closed, residue_flux};
use crate::VERSION;

pub use expr::{parse_constant, parse_map, parse_point, parse_points, parse_qd, print_map, qd_json, Constant};

pub const SCHEMA: &str = "fatoulab/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_FS_FAIL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fatoulab", version, about = "Dynamics of rational maps of the Riemann sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Rational map in z, e.g. "z^2 + 1/4"; `-` reads it from standard input
    #[arg(long)]
    map: String,
    /// Working precision in bits
    #[arg(long, env = "FATOULAB_PRECISION", default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on the degree of iterates
    #[arg(long)]
    degree_cap: Option<u64>,
    /// Cap on the truncation order of local series
    #[arg(long)]
    series_order: Option<usize>,
    #[arg(long)]
    eps_super: Option<f64>,
    #[arg(long)]
    eps_ind: Option<f64>,
    #[arg(long)]
    eps_unity: Option<f64>,
    #[arg(long)]
    eps_orbit: Option<f64>,
    #[arg(long)]
    eps_beta: Option<f64>,
    /// Relative singular-value threshold for operator ranks
    #[arg(long)]
    eps_rank: Option<f64>,
    /// Cell budget of the adaptive quadrature
    #[arg(long)]
    quad_max_cells: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate and classify the cycles of period at most Pmax
    Cycles {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        period_max: u32,
    },
    /// Classify the cycle through a periodic point
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Longest period searched for
        #[arg(long, default_value_t = 16)]
        period_max: u32,
    },
    /// Formal invariants of the parabolic cycle through a point
    Parabolic {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 16)]
        period_max: u32,
    },
    /// Partial sum of the cycle weights gamma over periods up to Pmax
    Gamma {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        period_max: u32,
    },
    /// Number of infinite tails of critical orbits
    Delta {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        iter_cap: usize,
    },
    /// Fatou-Shishikura check gamma <= delta <= 2D - 2
    CheckFs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        period_max: u32,
        #[arg(long, default_value_t = 1000)]
        iter_cap: usize,
        /// Also compare the flat dimension with gamma and test injectivity of nabla
        #[arg(long)]
        dimension_check: bool,
        /// Critical orbit segment length for the marked set of the dimension check
        #[arg(long, default_value_t = 2)]
        segment: usize,
    },
    /// Pushforward of a quadratic differential
    QdPush {
        #[command(flatten)]
        common: Common,
        /// JSON {"num": [...], "den": [...]}, `@path` or `-` for standard input
        #[arg(long)]
        qd: String,
    },
    /// Pullback of a quadratic differential
    QdPull {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        qd: String,
    },
    /// Matrix and singular values of nabla_f = I - f_* on Q(P^1, A)
    Nabla {
        #[command(flatten)]
        common: Common,
        /// Comma-separated marked points; defaults to the nonrepelling cycles and critical orbit segments
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        #[arg(long, default_value_t = 2)]
        period_max: u32,
        #[arg(long, default_value_t = 2)]
        segment: usize,
    },
    /// Residue at a cycle in closed form and as a flux limit
    Residue {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Quadratic differential whose divergence is used (default: a basis element)
        #[arg(long)]
        qd: Option<String>,
        /// Index into the invariant divergence basis
        #[arg(long)]
        element: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        r0: f64,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        period_max: u32,
    },
    /// Balance inequality ||nabla_f q|| >= |Dec(f:q) - 2 pi Res(f:q)|
    Balance {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        qd: String,
        #[arg(long, default_value_t = 8)]
        period_max: u32,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Lattes test
    Lattes {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cycles { .. } => "cycles",
            Command::Classify { .. } => "classify",
            Command::Parabolic { .. } => "parabolic",
            Command::Gamma { .. } => "gamma",
            Command::Delta { .. } => "delta",
            Command::CheckFs { .. } => "check-fs",
            Command::QdPush { .. } => "qd-push",
            Command::QdPull { .. } => "qd-pull",
            Command::Nabla { .. } => "nabla",
            Command::Residue { .. } => "residue",
            Command::Balance { .. } => "balance",
            Command::Lattes { .. } => "lattes",
        }
    }
    fn common(&self) -> &Common {
        match self {
            Command::Cycles { common, .. }
            | Command::Classify { common, .. }
            | Command::Parabolic { common, .. }
            | Command::Gamma { common, .. }
            | Command::Delta { common, .. }
            | Command::CheckFs { common, .. }
            | Command::QdPush { common, .. }
            | Command::QdPull { common, .. }
            | Command::Nabla { common, .. }
            | Command::Residue { common, .. }
            | Command::Balance { common, .. }
            | Command::Lattes { common } => common,
        }
    }
}

/// Every setting a run depends on; embedded in each report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub precision: u32,
    pub degree_cap: u64,
    pub series_order_cap: usize,
    pub k_root: u32,
    pub eps_super: f64,
    pub eps_ind: f64,
    pub eps_unity: f64,
    pub eps_orbit: f64,
    pub eps_beta: f64,
    pub eps_cluster: f64,
    pub eps_series: f64,
    pub eps_push: f64,
    pub eps_solve: f64,
    pub eps_rank: f64,
    pub quad_tol: f64,
    pub quad_max_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iter_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Radii>,
    pub format: Format,
}

#[derive(Clone, Debug, Serialize)]
pub struct Radii {
    pub r0: f64,
    pub steps: usize,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(usage(format!("--{name} must be positive"))),
        _ => Ok(()),
    }
}

fn build_config(cmd: &Command) -> Result<(Config, RunConfig)> {
    let c = cmd.common();
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&c.precision) {
        return Err(usage(format!("precision must lie in [{MIN_PRECISION}, {MAX_PRECISION}]")));
    }
    let mut cfg = Config::with_precision(c.precision);
    for (name, v) in [
        ("eps-super", c.eps_super),
        ("eps-ind", c.eps_ind),
        ("eps-unity", c.eps_unity),
        ("eps-orbit", c.eps_orbit),
        ("eps-beta", c.eps_beta),
        ("eps-rank", c.eps_rank),
    ] {
        positive(name, v)?;
    }
    cfg.eps_super = c.eps_super;
    cfg.eps_ind = c.eps_ind;
    cfg.eps_unity = c.eps_unity;
    cfg.eps_orbit = c.eps_orbit;
    cfg.eps_beta = c.eps_beta;
    if let Some(r) = c.eps_rank {
        cfg.eps_rank = r;
    }
    if let Some(d) = c.degree_cap {
        if d == 0 {
            return Err(usage("--degree-cap must be positive"));
        }
        cfg.degree_cap = d;
    }
    if let Some(t) = c.series_order {
        if t == 0 {
            return Err(usage("--series-order must be positive"));
        }
        cfg.series_order_cap = t;
    }
    if let Some(n) = c.quad_max_cells {
        if n == 0 {
            return Err(usage("--quad-max-cells must be positive"));
        }
        cfg.quad_max_cells = n;
    }
    let (mut period_max, mut iter_cap, mut tol, mut radii) = (None, None, None, None);
    match cmd {
        Command::Cycles { period_max: p, .. }
        | Command::Classify { period_max: p, .. }
        | Command::Parabolic { period_max: p, .. }
        | Command::Gamma { period_max: p, .. }
        | Command::Nabla { period_max: p, .. } => period_max = Some(*p),
        Command::Delta { iter_cap: t, .. } => iter_cap = Some(*t),
        Command::CheckFs { period_max: p, iter_cap: t, .. } => {
            period_max = Some(*p);
            iter_cap = Some(*t);
        }
        Command::Residue { period_max: p, r0, steps, .. } => {
            period_max = Some(*p);
            positive("r0", Some(*r0))?;
            if *steps < 2 {
                return Err(usage("--steps must be at least 2"));
            }
            radii = Some(Radii { r0: *r0, steps: *steps });
        }
        Command::Balance { period_max: p, tol: t, .. } => {
            period_max = Some(*p);
            positive("tol", Some(*t))?;
            tol = Some(*t);
            cfg.quad_tol = *t;
        }
        _ => {}
    }
    if period_max == Some(0) || iter_cap == Some(0) {
        return Err(usage("--period-max and --iter-cap must be positive"));
    }
    let run = RunConfig {
        precision: cfg.precision,
        degree_cap: cfg.degree_cap,
        series_order_cap: cfg.series_order_cap,
        k_root: cfg.k_root,
        eps_super: cfg.eps_super(),
        eps_ind: cfg.eps_ind(),
        eps_unity: cfg.eps_unity(),
        eps_orbit: cfg.eps_orbit(),
        eps_beta: cfg.eps_beta(),
        eps_cluster: cfg.eps_cluster(),
        eps_series: cfg.eps_series(),
        eps_push: cfg.eps_push(),
        eps_solve: cfg.eps_solve(),
        eps_rank: cfg.eps_rank,
        quad_tol: cfg.quad_tol,
        quad_max_cells: cfg.quad_max_cells,
        period_max,
        iter_cap,
        tol,
        radii,
        format: c.format,
    };
    Ok((cfg, run))
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    version: &'static str,
    command: &'a str,
    input: Value,
    config: &'a RunConfig,
    result: Value,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    schema: &'static str,
    version: &'static str,
    command: &'a str,
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    kind: String,
    message: String,
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Outcome of a command before rendering.
struct Outcome {
    input: Value,
    result: Value,
    code: i32,
    diagnostics: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_source(arg: &str, stdin: &mut dyn Read, used: &mut bool) -> Result<String> {
    if arg == "-" {
        if *used {
            return Err(usage("standard input can only be read once"));
        }
        *used = true;
        let mut s = String::new();
        stdin.read_to_string(&mut s).map_err(|e| usage(format!("reading standard input: {e}")))?;
        return Ok(s.trim().to_string());
    }
    if let Some(path) = arg.strip_prefix('@') {
        return std::fs::read_to_string(path).map_err(|e| usage(format!("reading {path}: {e}")));
    }
    Ok(arg.to_string())
}

fn mode(f: &DynMap) -> &'static str {
    if f.is_exact() {
        "exact"
    } else {
        "float"
    }
}

fn require_dynamical(f: &DynMap) -> Result<()> {
    if f.degree() < 2 {
        return Err(Error::DegreeTooSmall(f.degree()));
    }
    Ok(())
}

fn cycle_at(f: &DynMap, x: &Pt, period_max: u32, cfg: &Config) -> Result<Cycle> {
    let c = cycle_through(f, x, period_max as usize, cfg)?;
    let k = c.points.iter().position(|p| p.coincides(x, cfg.eps_orbit())).unwrap_or(0);
    let mut c = c.rotated(k);
    if c.class() == CycleClass::Parabolic {
        c.parabolic = Some(parabolic_invariants(f, &c, cfg)?);
    }
    Ok(c)
}

fn cx_literal(z: &Cx) -> String {
    z.to_decimal_string(None)
}

fn divisor_json(q: &RationalQD<Cx>, cfg: &Config) -> Result<Value> {
    let div = q.divisor(cfg.precision, cfg.eps_cluster())?;
    Ok(Value::Array(
        div.iter()
            .map(|e| {
                let p = match &e.exact {
                    Some(x) => Pt::from_exact(x.clone(), cfg.precision),
                    None => Pt::from_approx(e.point.clone()),
                };
                json!({ "point": p.literal(), "order": e.order })
            })
            .collect(),
    ))
}

fn qd_route(f: &DynMap, q: &Qd) -> &'static str {
    match (f.is_exact(), q) {
        (true, Qd::Exact(_)) if f.degree() <= 3 => "exact",
        _ => "sampled",
    }
}

fn execute(cmd: &Command, cfg: &Config, stdin: &mut dyn Read) -> Result<Outcome> {
    let common = cmd.common();
    let mut stdin_used = false;
    let map_text = read_source(&common.map, stdin, &mut stdin_used)?;
    let f = parse_map(&map_text, cfg.precision)?;
    let mut input = json!({
        "map": print_map(&f),
        "source": map_text,
        "mode": mode(&f),
        "degree": f.degree(),
    });
    let mut code = EXIT_OK;
    let mut diagnostics = Vec::new();
    let mut read_qd = |arg: &str, input: &mut Value| -> Result<Qd> {
        let text = read_source(arg, stdin, &mut stdin_used)?;
        let q = parse_qd(&text, cfg.precision)?;
        input["qd"] = qd_json(&q);
        Ok(q)
    };
    let result = match cmd {
        Command::Cycles { period_max, .. } | Command::Gamma { period_max, .. } => {
            require_dynamical(&f)?;
            let mut cycles = enumerate_cycles(&f, *period_max, cfg)?;
            attach_parabolic_data(&f, &mut cycles, cfg)?;
            let rows = cycles.iter().map(cycle_row).collect::<Result<Vec<_>>>()?;
            if matches!(cmd, Command::Cycles { .. }) {
                json!({ "count": rows.len(), "cycles": rows })
            } else {
                let total: usize = rows.iter().map(|r| r.gamma).sum();
                json!({ "gamma_partial": total, "gamma_is_lower_bound": true, "cycles": rows })
            }
        }
        Command::Classify { point, period_max, .. } => {
            require_dynamical(&f)?;
            let x = parse_point(point, cfg.precision)?;
            input["point"] = json!(x.literal());
            let c = cycle_at(&f, &x, *period_max, cfg)?;
            let mut v = to_value(&cycle_row(&c)?);
            if let Some(note) = &c.classification.note {
                v["note"] = json!(note);
            }
            v
        }
        Command::Parabolic { point, period_max, .. } => {
            require_dynamical(&f)?;
            let x = parse_point(point, cfg.precision)?;
            input["point"] = json!(x.literal());
            let c = cycle_at(&f, &x, *period_max, cfg)?;
            let p = c.parabolic.as_ref().ok_or(Error::NotParabolic)?;
            let row = cycle_row(&c)?;
            let pr = row.parabolic.clone().expect("parabolic row");
            json!({
                "points": row.points,
                "period": c.period,
                "multiplier": row.multiplier,
                "n": p.n,
                "N": p.big_n,
                "nu": p.nu,
                "iota": pr.iota,
                "beta": pr.beta,
                "subtype": pr.subtype,
                "within_tolerance": pr.within_tolerance,
                "germ_order": p.germ_order,
                "gamma": gamma_of_cycle(&c)?,
            })
        }
        Command::Delta { iter_cap, .. } => {
            require_dynamical(&f)?;
            to_value(&fscount::delta(&f, *iter_cap, cfg)?)
        }
        Command::CheckFs {
            period_max,
            iter_cap,
            dimension_check,
            segment,
            ..
        } => {
            require_dynamical(&f)?;
            let r = fscount::check_fs(&f, *period_max, *iter_cap, cfg)?;
            if r.verdict == Verdict::Fail {
                code = EXIT_FS_FAIL;
                diagnostics.push(format!(
                    "FS verdict FAIL: gamma_partial {} exceeds delta {}",
                    r.gamma_partial, r.delta.delta
                ));
            }
            if !r.classical_ok {
                code = EXIT_FS_FAIL;
                diagnostics.push(format!(
                    "classical count {} exceeds 2D - 2 = {}",
                    r.classical_count, r.classical_bound
                ));
            }
            let mut v = to_value(&r);
            if *dimension_check {
                v["dimension_check"] = to_value(&fscount::dimension_check(&f, *period_max, *segment, cfg)?);
            }
            v
        }
        Command::QdPush { qd, .. } => {
            let q = read_qd(qd, &mut input)?;
            let route = qd_route(&f, &q);
            let out = push(&f, &q, cfg)?;
            json!({
                "route": route,
                "qd": qd_json(&out),
                "divisor": divisor_json(&out.to_cx(cfg.precision), cfg)?,
            })
        }
        Command::QdPull { qd, .. } => {
            let q = read_qd(qd, &mut input)?;
            let out = pull(&f, &q);
            let route = if matches!(out, Qd::Exact(_)) { "exact" } else { "float" };
            json!({
                "route": route,
                "qd": qd_json(&out),
                "divisor": divisor_json(&out.to_cx(cfg.precision), cfg)?,
            })
        }
        Command::Nabla {
            points,
            period_max,
            segment,
            ..
        } => {
            require_dynamical(&f)?;
            let a = match points {
                Some(s) => parse_points(s, cfg.precision)?,
                None => {
                    let mut cycles = enumerate_cycles(&f, *period_max, cfg)?;
                    attach_parabolic_data(&f, &mut cycles, cfg)?;
                    marked_set(&f, &cycles, *segment, cfg)?
                }
            };
            input["points"] = json!(a.iter().map(|p| p.literal()).collect::<Vec<_>>());
            let m = nabla_matrix(&f, &a, cfg)?;
            let digits = Some(30);
            json!({
                "domain_dim": m.domain.dim(),
                "codomain_dim": m.codomain.dim(),
                "domain_gram_condition": m.domain.gram_condition,
                "codomain_gram_condition": m.codomain.gram_condition,
                "added_points": m.added.iter().map(|p| p.literal()).collect::<Vec<_>>(),
                "critical_values_in_a": m.critical_values_in_a,
                "matrix": m.matrix.iter().map(|row| row.iter().map(|z| z.to_decimal_string(digits)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "singular_values": m.singular_values,
                "rank": m.rank,
                "injective": m.injective,
                "solve_residual": m.solve_residual,
                "warnings": m.warnings,
            })
        }
        Command::Residue {
            point,
            qd,
            element,
            r0,
            steps,
            period_max,
            ..
        } => {
            require_dynamical(&f)?;
            let x = parse_point(point, cfg.precision)?;
            input["point"] = json!(x.literal());
            let c = cycle_at(&f, &x, *period_max, cfg)?;
            let basis = invariant_divergence_basis(&f, &c, cfg)?;
            let (coeffs, q, chosen) = match qd {
                Some(arg) => {
                    let q = read_qd(arg, &mut input)?.to_cx(cfg.precision);
                    (polar_part(&q, &basis.chart)?, q, None)
                }
                None => {
                    let k = match element {
                        Some(k) => *k,
                        None => basis
                            .elements
                            .iter()
                            .position(|e| e.kind == BasisKind::Canonical)
                            .unwrap_or(0),
                    };
                    let e = basis
                        .elements
                        .get(k)
                        .ok_or_else(|| usage(format!("--element {k} out of range (basis has {} elements)", basis.elements.len())))?;
                    let comp = complete_cycle_divergence(&f, &c, &e.coeffs, &[])?;
                    (e.coeffs.clone(), comp.q, Some(k))
                }
            };
            let closed = residue_closed(&c, &basis, &coeffs, cfg)?;
            let flux = residue_flux(&f, &c, &q, *r0, *steps, cfg)?;
            let elements: Vec<Value> = basis
                .elements
                .iter()
                .map(|e| {
                    json!({
                        "kind": e.kind,
                        "flat": e.flat,
                        "coeffs": match &e.exact {
                            Some(ex) => ex.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                            None => e.coeffs.iter().map(|z| z.to_decimal_string(Some(30))).collect(),
                        },
                    })
                })
                .collect();
            json!({
                "cycle": cycle_row(&c)?,
                "basis": elements,
                "element": chosen,
                "divergence_coefficient": cx_literal(&closed.c),
                "closed_form": closed.value,
                "differential": qd_json(&Qd::Approx(q)),
                "flux": flux,
                "difference": (flux.limit - closed.value).abs(),
            })
        }
        Command::Balance { qd, period_max, tol, .. } => {
            require_dynamical(&f)?;
            let q = read_qd(qd, &mut input)?.to_cx(cfg.precision);
            let r = balance_check(&f, &q, *period_max as usize, *tol, cfg)?;
            let mut v = to_value(&r);
            v["holds"] = json!(r.slack >= -2.0 * tol);
            v
        }
        Command::Lattes { .. } => {
            require_dynamical(&f)?;
            match lattes_test(&f, cfg)? {
                LattesVerdict::Lattes { q, poles, deviation } => json!({
                    "verdict": "Lattes",
                    "q": qd_json(&q),
                    "poles": poles.iter().map(|p| p.literal()).collect::<Vec<_>>(),
                    "deviation": deviation,
                }),
                LattesVerdict::NotLattes { clause } => json!({ "verdict": "NotLattes", "clause": clause }),
            }
        }
    };
    Ok(Outcome {
        input,
        result,
        code,
        diagnostics,
    })
}

/// Run the command line with explicit streams; returns the exit code.
pub fn run_with_io<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let name = cli.command.name();
    let fail = |e: Error, stderr: &mut dyn Write| {
        let body = ErrorEnvelope {
            schema: SCHEMA,
            version: VERSION,
            command: name,
            error: ErrorBody {
                kind: error_kind(&e),
                message: e.to_string(),
            },
        };
        let _ = writeln!(stderr, "{}", serde_json::to_string_pretty(&body).expect("error envelope"));
        if e.is_usage() {
            EXIT_USAGE
        } else {
            EXIT_NUMERICAL
        }
    };
    let (cfg, run) = match build_config(&cli.command) {
        Ok(c) => c,
        Err(e) => return fail(e, stderr),
    };
    let out = match execute(&cli.command, &cfg, stdin) {
        Ok(o) => o,
        Err(e) => return fail(e, stderr),
    };
    let env = Envelope {
        schema: SCHEMA,
        version: VERSION,
        command: name,
        input: out.input,
        config: &run,
        result: out.result,
    };
    let text = match run.format {
        Format::Json => serde_json::to_string_pretty(&env).expect("report serializes") + "\n",
        Format::Table => table::render(&to_value(&env)),
    };
    let _ = stdout.write_all(text.as_bytes());
    for d in &out.diagnostics {
        let _ = writeln!(stderr, "{d}");
    }
    out.code
}

/// Run against the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}
