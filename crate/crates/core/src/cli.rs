//! Batch command-line front end.
//!
//! Exit status: 0 on success (whatever the inequality checks found), 1 for a bad
//! command line or unreadable input, 2 when the computation itself fails. Failed
//! computations still write a report carrying the error message.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::entropy::{entropy_report, fisher_pair};
use crate::error::{Error, Result};
use crate::fockq::{self, QFockSpace};
use crate::freeconv::ou_flow;
use crate::ineq::{self, Weights};
use crate::measure::{Measure1D, DEFAULT_GRID_SIZE};
use crate::ncpoly::{tangent_inequality_check, MatrixTuple, NCPoly};
use crate::stein::{estimate_kernel, DEFAULT_RIDGE, MAX_DEGREE};
use crate::transforms::{cauchy, hilbert_many};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug, Serialize)]
#[command(name = "freeprob", version, about = "Free entropy, Fisher information and Stein discrepancy toolkit")]
pub struct Cli {
    /// Report destination (stdout when omitted)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Nodes used when building named families
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_SIZE, value_parser = grid_size_parser)]
    pub grid_size: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Free entropy, relative entropy and Fisher information
    Entropy(MeasureArgs),
    /// Absolute and relative free Fisher information
    Fisher(RhoArgs),
    /// Minimal-norm Stein kernel and discrepancy lower bound
    Stein(SteinArgs),
    /// Hilbert transform (and optionally Cauchy transform) on a set of points
    Transform(TransformArgs),
    /// Entropy and Fisher information along the Ornstein–Uhlenbeck flow
    Flow(FlowArgs),
    /// Log-Sobolev inequality
    Lsi(RhoArgs),
    /// HSI inequality with the degree-d discrepancy bound
    Hsi(CheckArgs),
    /// de Bruijn identity, Fisher decay and Stein decay along the flow
    FlowChecks(FlowCheckArgs),
    /// Entropy-deficit inequality
    Deficit(RhoArgs),
    /// Free Stam inequality for μ ⊞ ν
    Stam(StamArgs),
    /// Entropic CLT rate table
    Clt(CltArgs),
    /// Truncated q-Fock space: moments, Stein identity, Ξ bounds
    Fock(FockArgs),
    /// Tangent-line inequality on seeded random matrix tuples
    NcpolyCheck(NcpolyArgs),
    /// lsi, hsi, deficit and the flow checks together
    CheckAll(FlowCheckArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MeasureArgs {
    /// Measure spec (JSON)
    #[arg(long)]
    pub measure: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct RhoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SteinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    pub ridge: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    /// Explicit evaluation points
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Number of equispaced interior points when --x is absent
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Also report G(x + iε)
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct FlowArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1,2")]
    pub t: Vec<f64>,
    /// Embed each flowed law (grid form) in the report
    #[arg(long)]
    pub emit_law: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct FlowCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1,2")]
    pub t: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct StamArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    /// Second measure spec
    #[arg(long)]
    pub measure2: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    pub n_list: Vec<usize>,
    /// Custom weight vector (comma separated, unit square sum); repeatable, replaces --n-list
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Append, num_args = 1)]
    pub weights: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct FockArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q: f64,
    /// Truncation depth (defaults depend on n)
    #[arg(long)]
    pub depth: Option<usize>,
    /// Whitespace-separated symmetric q-matrix; overrides --n and --q
    #[arg(long)]
    pub qmatrix: Option<PathBuf>,
    /// Longest word compared against the pair-partition oracle
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct NcpolyArgs {
    /// Polynomial file: one `re im i1 i2 ...` term per line
    #[arg(long)]
    pub poly_file: PathBuf,
    #[arg(long)]
    pub rng_seed: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
}

fn grid_size_parser(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (101..=200_001).contains(&n) {
        Ok(n)
    } else {
        Err("grid size must lie in 101..=200001".into())
    }
}

/// A report: a JSON payload plus an optional table for CSV output.
pub struct Output {
    pub json: Value,
    pub table: Option<(Vec<String>, Vec<Vec<Value>>)>,
}

impl Output {
    fn plain(json: Value) -> Self {
        Output { json, table: None }
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn load_measure(path: &Path, grid_size: usize) -> Result<Measure1D> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    // a spec that does not describe a valid law is a bad input, not a failed computation
    Measure1D::from_json(&v, grid_size).map_err(|e| match e {
        Error::Parse(_) => e,
        other => Error::Parse(format!("{}: {other}", path.display())),
    })
}

fn load_qmatrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("q-matrix entry {f:?}: {e}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("q-matrix must be square".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if rows[i][j] != rows[j][i] {
                return Err(Error::Parse(format!("q-matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn float(x: f64) -> Value {
    serde_json::to_value(Float(x)).expect("float serializes")
}

#[derive(Serialize)]
struct Float(#[serde(serialize_with = "crate::serde_ext::float")] f64);

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn validate(cli: &Cli) -> Result<()> {
    let rho_ok = |rho: f64| {
        if rho > 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(config_error(format!("--rho must be positive, got {rho}")))
        }
    };
    let degree_ok = |d: usize| {
        if (1..=MAX_DEGREE).contains(&d) {
            Ok(())
        } else {
            Err(config_error(format!("--degree must lie in 1..={MAX_DEGREE}")))
        }
    };
    let times_ok = |t: &[f64]| {
        if !t.is_empty() && t.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(config_error("--t needs positive times"))
        }
    };
    match &cli.command {
        Command::Fisher(a) | Command::Lsi(a) | Command::Deficit(a) => rho_ok(a.rho),
        Command::Stein(a) => {
            degree_ok(a.degree)?;
            if a.ridge >= 0.0 { Ok(()) } else { Err(config_error("--ridge must be nonnegative")) }
        }
        Command::Hsi(a) => {
            rho_ok(a.rho)?;
            degree_ok(a.degree)
        }
        Command::Transform(a) => {
            if a.x.is_empty() && a.points < 2 {
                return Err(config_error("--points must be at least 2"));
            }
            match a.epsilon {
                Some(e) if !(e > 0.0) => Err(config_error("--epsilon must be positive")),
                _ => Ok(()),
            }
        }
        Command::Flow(a) => {
            rho_ok(a.rho)?;
            if a.t.iter().all(|x| *x >= 0.0 && x.is_finite()) && !a.t.is_empty() {
                Ok(())
            } else {
                Err(config_error("--t needs nonnegative times"))
            }
        }
        Command::FlowChecks(a) | Command::CheckAll(a) => {
            rho_ok(a.rho)?;
            degree_ok(a.degree)?;
            times_ok(&a.t)
        }
        Command::Clt(a) => {
            if a.weights.is_empty() && (a.n_list.is_empty() || a.n_list.contains(&0)) {
                return Err(config_error("--n-list needs positive sizes"));
            }
            for w in parse_weights(&a.weights)? {
                let sq: f64 = w.iter().map(|x| x * x).sum();
                if (sq - 1.0).abs() > 1e-9 {
                    return Err(config_error(format!("weights {w:?} have square sum {sq}, not 1")));
                }
            }
            Ok(())
        }
        Command::Fock(a) => {
            if a.qmatrix.is_none() && (a.n == 0 || !(a.q.abs() < 1.0)) {
                return Err(config_error("need n ≥ 1 and |q| < 1"));
            }
            Ok(())
        }
        Command::NcpolyCheck(a) => {
            if a.samples == 0 || a.dim == 0 {
                return Err(config_error("--samples and --dim must be positive"));
            }
            Ok(())
        }
        Command::Entropy(_) | Command::Stam(_) => Ok(()),
    }
}

fn report_rows(reports: &[ineq::IneqReport]) -> (Vec<String>, Vec<Vec<Value>>) {
    let header = ["name", "lhs", "rhs", "slack", "holds", "conservative", "inconclusive", "vacuous", "t"]
        .map(String::from)
        .to_vec();
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                json!(r.name),
                float(r.lhs),
                float(r.rhs),
                float(r.slack),
                json!(r.holds),
                json!(r.conservative),
                json!(r.inconclusive),
                json!(r.vacuous),
                r.inputs.get("t").cloned().unwrap_or(Value::Null),
            ]
        })
        .collect();
    (header, rows)
}

fn parse_weights(raw: &[String]) -> Result<Vec<Vec<f64>>> {
    // clap splits on commas; rows are separated by `;` inside a value
    let joined = raw.join(",");
    joined
        .split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|r| {
            r.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<f64>().map_err(|e| config_error(format!("weight {x:?}: {e}"))))
                .collect()
        })
        .collect()
}

fn words(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=n).map(move |j| {
                    let mut v = w.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
    }
    out
}

fn fock_report(space: &QFockSpace, max_len: usize) -> Result<Value> {
    let n = space.n();
    let q = space.q_matrix().clone();
    let mut worst_moment: f64 = 0.0;
    let mut table = Vec::new();
    for len in 0..=max_len {
        for w in words(n, len) {
            let m = space.vacuum_moment(&w)?;
            let oracle = fockq::q_moment_oracle(&q, &w)?;
            worst_moment = worst_moment.max((m - oracle).abs());
            if len <= 4 && len % 2 == 0 {
                table.push(json!({ "word": w, "moment": m }));
            }
        }
    }
    let kernels = space.stein_kernel();
    let mut worst_residual: f64 = 0.0;
    for len in 0..space.depth() {
        for w in words(n, len) {
            let p = NCPoly::monomial(n, w, num_complex::Complex64::new(1.0, 0.0))?;
            for j in 1..=n {
                worst_residual = worst_residual.max(space.stein_identity_residual(&kernels, &p, j)?);
            }
        }
    }
    Ok(json!({
        "n": n,
        "depth": space.depth(),
        "moments": table,
        "max_moment_deviation": worst_moment,
        "max_stein_residual": worst_residual,
        "xi": to_value(&space.xi_report()),
    }))
}

/// Execute a parsed command line.
pub fn execute(cli: &Cli) -> Result<Output> {
    let g = cli.grid_size;
    let measure = |a: &MeasureArgs| load_measure(&a.measure, g);
    Ok(match &cli.command {
        Command::Entropy(a) => Output::plain(to_value(&entropy_report(&measure(a)?)?)),
        Command::Fisher(a) => {
            let (abs, rel) = fisher_pair(&measure(&a.measure)?, a.rho)?;
            Output::plain(json!({ "fisher_abs": float(abs), "fisher_rel": float(rel), "rho": a.rho }))
        }
        Command::Stein(a) => Output::plain(to_value(&estimate_kernel(&measure(&a.measure)?, a.degree, a.ridge)?)),
        Command::Transform(a) => {
            let mu = measure(&a.measure)?;
            let xs = if a.x.is_empty() {
                let (lo, hi) = mu.support();
                let h = (hi - lo) / (a.points + 1) as f64;
                (1..=a.points).map(|i| lo + h * i as f64).collect()
            } else {
                a.x.clone()
            };
            let hs = hilbert_many(&mu, &xs)?;
            let mut header = vec!["x".to_string(), "hilbert".to_string()];
            let mut rows = Vec::new();
            for (x, h) in xs.iter().zip(&hs) {
                let mut row = vec![json!(x), float(*h)];
                if let Some(eps) = a.epsilon {
                    let gz = cauchy(&mu, num_complex::Complex64::new(*x, eps))?;
                    row.push(json!(gz.re));
                    row.push(json!(gz.im));
                }
                rows.push(row);
            }
            if a.epsilon.is_some() {
                header.push("cauchy_re".into());
                header.push("cauchy_im".into());
            }
            let json = table_json(&header, &rows);
            Output { json, table: Some((header, rows)) }
        }
        Command::Flow(a) => {
            // JSON carries the scalar trajectory, CSV the flowed densities in long form
            let mu = measure(&a.measure)?;
            let mut points = Vec::new();
            let mut density_rows = Vec::new();
            for &t in &a.t {
                let p = ou_flow(&mu, t, a.rho)?;
                for (x, d) in p.law.grid().iter().zip(p.law.density()) {
                    density_rows.push(vec![json!(t), json!(x), float(*d)]);
                }
                let mut point = json!({
                    "t": p.t,
                    "chi": float(p.chi),
                    "chi_star": float(p.chi_star),
                    "fisher": float(p.fisher),
                    "fisher_rel": float(p.fisher_rel),
                    "variance": p.law.variance(),
                });
                if a.emit_law {
                    point["law"] = p.law.to_json();
                }
                points.push(point);
            }
            let header = ["t", "x", "density"].map(String::from).to_vec();
            Output { json: json!({ "rho": a.rho, "points": points }), table: Some((header, density_rows)) }
        }
        Command::Lsi(a) => single(ineq::lsi_check(&measure(&a.measure)?, a.rho)?),
        Command::Hsi(a) => single(ineq::hsi_check(&measure(&a.measure)?, a.rho, a.degree)?),
        Command::Deficit(a) => single(ineq::deficit_check(&measure(&a.measure)?, a.rho)?),
        Command::FlowChecks(a) => {
            let mu = measure(&a.measure)?;
            let db = ineq::de_bruijn_check(&mu, a.rho, &a.t)?;
            let ed = ineq::exp_decay_check(&mu, a.rho, &a.t)?;
            let sd = ineq::stein_decay_check(&mu, a.rho, a.degree, &a.t)?;
            let all: Vec<_> = db.iter().chain(&ed).chain(&sd).cloned().collect();
            let json = json!({ "de_bruijn": to_value(&db), "exp_decay": to_value(&ed), "stein_decay": to_value(&sd) });
            Output { json, table: Some(report_rows(&all)) }
        }
        Command::CheckAll(a) => {
            let reports = ineq::check_all(&measure(&a.measure)?, a.rho, a.degree, &a.t)?;
            let all_hold = reports.iter().all(|r| r.holds);
            let json = json!({ "all_hold": all_hold, "reports": to_value(&reports) });
            Output { json, table: Some(report_rows(&reports)) }
        }
        Command::Stam(a) => {
            let nu = load_measure(&a.measure2, g)?;
            single(ineq::stam_check(&measure(&a.measure)?, &nu)?)
        }
        Command::Clt(a) => {
            let mu = measure(&a.measure)?;
            let weights = if a.weights.is_empty() {
                Weights::Equal
            } else {
                Weights::Custom(parse_weights(&a.weights)?)
            };
            let report = ineq::clt_harness(&mu, &a.n_list, &weights)?;
            let header: Vec<String> =
                ["n", "weights", "sigma_n", "entropy_gap", "fisher_rel", "bound", "ratio"].map(String::from).to_vec();
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        json!(r.n),
                        json!(r.weights),
                        float(r.sigma_n),
                        float(r.entropy_gap),
                        float(r.fisher_rel),
                        float(r.bound),
                        json!(r.ratio),
                    ]
                })
                .collect();
            Output { json: to_value(&report), table: Some((header, rows)) }
        }
        Command::Fock(a) => {
            let space = match &a.qmatrix {
                Some(path) => {
                    let q = load_qmatrix(path)?;
                    let depth = a.depth.unwrap_or_else(|| fockq::default_depth(q.nrows()));
                    fockq::build_mixed(q, depth)?
                }
                None => fockq::build_fock(a.n, a.q, a.depth.unwrap_or_else(|| fockq::default_depth(a.n)))?,
            };
            let max_len = a.max_len.unwrap_or(10).min(2 * space.depth()).min(fockq::ORACLE_MAX_LEN);
            let mut json = fock_report(&space, max_len)?;
            if a.qmatrix.is_none() {
                json["closed_form_hs_sq"] = to_value(&fockq::xi_q_closed_form(a.n, a.q));
                json["bound"] = to_value(&fockq::example1_bound(a.n, a.q));
            } else {
                json["bound"] = to_value(&fockq::example2_bound(space.q_matrix()));
            }
            Output::plain(json)
        }
        Command::NcpolyCheck(a) => {
            let text = fs::read_to_string(&a.poly_file)
                .map_err(|e| Error::Io(format!("{}: {e}", a.poly_file.display())))?;
            let f = NCPoly::parse(&text, None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.rng_seed);
            let header: Vec<String> = ["sample", "lhs", "rhs", "margin", "holds"].map(String::from).to_vec();
            let mut rows = Vec::new();
            let mut min_margin = f64::INFINITY;
            for i in 0..a.samples {
                let x = MatrixTuple::random(f.n_vars(), a.dim, &mut rng);
                let y = MatrixTuple::random(f.n_vars(), a.dim, &mut rng);
                let r = tangent_inequality_check(&f, &x, &y)?;
                min_margin = min_margin.min(r.margin);
                rows.push(vec![json!(i), float(r.lhs), float(r.rhs), float(r.margin), json!(r.holds)]);
            }
            let all_hold = rows.iter().all(|r| r[4] == json!(true));
            let mut json = table_json(&header, &rows);
            json["min_margin"] = float(min_margin);
            json["all_hold"] = json!(all_hold);
            Output { json, table: Some((header, rows)) }
        }
    })
}

fn single(r: ineq::IneqReport) -> Output {
    let table = report_rows(std::slice::from_ref(&r));
    Output { json: to_value(&r), table: Some(table) }
}

fn table_json(header: &[String], rows: &[Vec<Value>]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| Value::Object(header.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
        .collect();
    json!({ "rows": rows })
}

/// Round every float to 12 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            *v = json!(r);
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_floats),
        Value::Object(m) => m.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn fmt_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.11e}", n.as_f64().expect("f64")),
        other => other.to_string(),
    }
}

fn render(cli: &Cli, out: Result<Output>) -> (String, i32) {
    let config = to_value(cli);
    match (out, cli.format) {
        (Ok(Output { table: Some((header, rows)), .. }), Format::Csv) => {
            let mut s = header.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(&r.iter().map(fmt_cell).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            (s, 0)
        }
        (Ok(Output { json, .. }), Format::Csv) => {
            // key/value listing for reports without a natural table
            let mut s = String::from("key,value\n");
            if let Value::Object(m) = &json {
                for (k, v) in m {
                    s.push_str(&format!("{k},{}\n", fmt_cell(v).replace(',', ";")));
                }
            }
            (s, 0)
        }
        (result, _) => {
            let (result, error, code) = match result {
                Ok(o) => (o.json, Value::Null, 0),
                Err(e) => (Value::Null, json!(e.to_string()), 2),
            };
            let mut report = json!({
                "tool": "freeprob",
                "version": VERSION,
                "config": config,
                "result": result,
            });
            if code != 0 {
                report["error"] = error;
            }
            round_floats(&mut report);
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            (s, code)
        }
    }
}

fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn is_input_error(e: &Error) -> bool {
    matches!(e, Error::Io(_) | Error::Parse(_))
}

/// Parse, run and write; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = validate(&cli) {
        eprintln!("error: {e}");
        return 1;
    }
    let out = execute(&cli);
    if let Err(e) = &out {
        eprintln!("error: {e}");
        // unreadable or malformed inputs count as configuration errors
        if is_input_error(e) {
            return 1;
        }
    }
    let (text, code) = render(&cli, out);
    let written = match &cli.output {
        Some(path) => write_atomic(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return 1;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        let mut v = json!({ "a": [0.1 + 0.2, 1.0 / 3.0], "b": 7, "c": "x" });
        round_floats(&mut v);
        assert_eq!(v["a"][0], json!(0.3));
        assert_eq!(v["a"][1], json!(0.333333333333));
        assert_eq!(v["b"], json!(7));
    }

    #[test]
    fn weight_rows_split_on_semicolons() {
        let w = parse_weights(&["0.6".into(), "0.8;1".into()]).unwrap();
        assert_eq!(w, vec![vec![0.6, 0.8], vec![1.0]]);
        assert!(parse_weights(&["a".into()]).is_err());
    }

    #[test]
    fn word_enumeration() {
        assert_eq!(words(2, 2), vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(words(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn nonfinite_values_become_strings() {
        assert_eq!(float(f64::INFINITY), json!("inf"));
        assert_eq!(float(-f64::INFINITY), json!("-inf"));
        assert_eq!(float(1.5), json!(1.5));
    }
}
