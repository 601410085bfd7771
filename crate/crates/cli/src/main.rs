//! `wm` — batch command-line front end for the warped-metrics laboratory.
//!
//! Every analysis in the library is exposed as a subcommand with
//! machine-readable output: CSV (header row, LF endings, shortest
//! round-trip floats) for tables, a single JSON envelope for censuses and
//! reports. Identical invocations produce byte-identical standard output.
//!
//! Exit codes: 0 success, 2 rejected input, 3 numerical failure, 4 I/O.
//! Every failure prints exactly one machine-parsable JSON line on standard
//! error. `WM_THREADS` caps the internal thread pool.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use warped_metrics::census::{census, CensusOptions, FamilyKind, MetricCensus};
use warped_metrics::orbit::{bifurcation_points, energy_for_period};
use warped_metrics::period::{monotonicity_certificate, period_table, GridSpec};
use warped_metrics::potential::{
    derive_params, normalized_system, raw_system, ModelParams, PotentialSystem,
};
use warped_metrics::profile::SolutionProfile;
use warped_metrics::ricci::{
    conformal_length, harmonic_residual, ode_residual, parallelism_test, ParallelVerdict,
};
use warped_metrics::yamabe::{yamabe_census, yamabe_system, yamabe_threshold};
use warped_metrics::Error as WmError;

#[derive(Parser)]
#[command(
    name = "wm",
    version,
    about = "Periodic solutions of the warped-metric ODE on a circle: period maps, censuses, curvature checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; tables default to csv, censuses and reports to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Relative tolerance of the period quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    quad_tol: f64,

    /// Re-integration closure tolerance for family verification.
    #[arg(long, global = true, default_value_t = 1e-8)]
    closure_tol: f64,

    /// Sup-norm threshold separating parallel from non-parallel Ricci.
    #[arg(long, global = true, default_value_t = 1e-10)]
    parallel_tol: f64,

    /// Fraction of the boundary energy beyond which the solver refuses to
    /// go (the period integrand degenerates there).
    #[arg(long, global = true, default_value_t = 0.999_999)]
    energy_cutoff: f64,
}

/// Geometric inputs shared by the physical-variable commands.
#[derive(Args)]
struct ModelArgs {
    /// Fiber dimension n ≥ 3.
    #[arg(long)]
    n: u32,

    /// Fiber scalar curvature R > 0.
    #[arg(long = "scalar-curvature")]
    scalar_curvature: f64,

    /// Harmonic-curvature constant C > 0.
    #[arg(long)]
    constant: f64,
}

impl ModelArgs {
    fn to_params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.n, self.scalar_curvature, self.constant).map_err(CliError::Lib)
    }

    fn echo(&self) -> Value {
        json!({
            "n": self.n,
            "scalar_curvature": self.scalar_curvature,
            "constant": self.constant,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Echo the derived constants (α, β, c₀, T_min, φ′(α)) for a parameter triple.
    Params(ModelArgs),

    /// Period-map table for the normalized system: columns c, a, b, T, dT, err.
    PeriodTable {
        /// Fiber dimension n ≥ 3.
        #[arg(long)]
        n: u32,
        /// Explicit comma-separated energy list (normalized units).
        #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
        energies: Option<Vec<f64>>,
        /// Number of log-spaced grid energies (used when --energies is absent).
        #[arg(long)]
        grid: Option<usize>,
        /// Lower grid energy.
        #[arg(long, default_value_t = 1e-8)]
        c_min: f64,
        /// Upper grid energy; defaults to 0.99·c₀ of the system.
        #[arg(long)]
        c_max: Option<f64>,
    },

    /// Monotonicity certificate (H, Δ) on an abscissa grid.
    Certificate {
        /// Fiber dimension n ≥ 3.
        #[arg(long)]
        n: u32,
        /// Left edge of the abscissa grid.
        #[arg(long, default_value_t = 0.05)]
        grid_min: f64,
        /// Right edge of the abscissa grid.
        #[arg(long, default_value_t = 4.0)]
        grid_max: f64,
        /// Number of grid points before the center neighborhood is excluded.
        #[arg(long, default_value_t = 2000)]
        grid_count: usize,
    },

    /// Enumerate all periodic families on a circle of the given length.
    Census {
        #[command(flatten)]
        model: ModelArgs,
        /// Circle length T.
        #[arg(long)]
        length: f64,
        /// Samples per verified profile.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },

    /// Integrate one census family and emit its full derivative chain.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Circle length T.
        #[arg(long)]
        length: f64,
        /// Divisor index j: the family whose minimal period is T/j.
        #[arg(long, default_value_t = 1)]
        family: u32,
        /// Number of grid segments.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },

    /// Re-verify a profile file: curvature residuals, parallelism, lengths.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// CSV profile: header `t,h` (derivatives rebuilt by periodic finite
        /// differences) or the full `solve` column set (derivatives taken
        /// as stored).
        file: PathBuf,
    },

    /// Conformal (constant-scalar-curvature) family: threshold, and census
    /// when --length is given.
    Yamabe {
        /// Sphere dimension n ≥ 3.
        #[arg(long)]
        n: u32,
        /// Circle length T.
        #[arg(long)]
        length: Option<f64>,
        /// Samples per verified profile.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },

    /// Bifurcation lengths T_k = 2πk/√C (or 2πk/√(n−2) with --yamabe).
    Bifurcations {
        /// Fiber dimension (only the threshold formula's α echo depends on it).
        #[arg(long, default_value_t = 5)]
        n: u32,
        /// Fiber scalar curvature R > 0.
        #[arg(long = "scalar-curvature", default_value_t = 16.0)]
        scalar_curvature: f64,
        /// Harmonic-curvature constant C > 0.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
        /// Largest branch index.
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        /// Emit the conformal-family thresholds 2πk/√(n−2) instead.
        #[arg(long)]
        yamabe: bool,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum CliError {
    Lib(WmError),
    Io(String),
}

impl From<WmError> for CliError {
    fn from(e: WmError) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_input_error() => 2,
            CliError::Lib(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Lib(e) => match e {
                WmError::InvalidParameter(_) => "invalid_parameter",
                WmError::EnergyOutOfRange { .. } => "energy_out_of_range",
                WmError::BracketFailure(_) => "bracket_failure",
                WmError::AccuracyNotReached { .. } => "accuracy_not_reached",
                WmError::TargetBelowMinimum { .. } => "target_below_minimum",
                WmError::TargetUnattainable { .. } => "target_unattainable",
                WmError::Isochronous { .. } => "isochronous",
                WmError::NonClosure { .. } => "non_closure",
                WmError::PositivityViolation(_) => "positivity_violation",
                WmError::ZeroTrace => "zero_trace",
                WmError::InvalidProfile(_) => "invalid_profile",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Io(m) => m.clone(),
        }
    }
}

fn emit_error(err: &CliError) {
    eprintln!(
        "{}",
        json!({"error": {"code": err.code(), "kind": err.kind(), "message": err.message()}})
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.to_string().lines().next().unwrap_or("usage error").to_string();
            eprintln!("{}", json!({"error": {"code": 2, "kind": "usage", "message": message}}));
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = std::env::var("WM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if threads > 0 {
            // A second initialization (tests, repeated embedding) is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    match run(cli) {
        Ok(out) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            if let Err(e) = lock.write_all(out.as_bytes()).and_then(|()| lock.flush()) {
                let err = CliError::Io(format!("writing standard output: {e}"));
                emit_error(&err);
                return ExitCode::from(err.code());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            emit_error(&err);
            ExitCode::from(err.code())
        }
    }
}

/// Shortest round-trip decimal for a float (Rust's default `Display`).
fn fmt_f(v: f64) -> String {
    format!("{v}")
}

/// Assembles a CSV table: header row, comma separators, LF endings.
fn csv_table(headers: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = String::with_capacity(rows.len() * 32 + 64);
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Wraps a payload in the single JSON envelope object.
fn envelope<T: Serialize>(
    command: &str,
    params: Value,
    data: T,
    diagnostics: Vec<String>,
) -> Result<String, CliError> {
    let value = json!({
        "command": command,
        "params": params,
        "data": serde_json::to_value(data).map_err(|e| CliError::Io(format!("serialization: {e}")))?,
        "diagnostics": diagnostics,
    });
    serde_json::to_string_pretty(&value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(format!("serialization: {e}")))
}

fn kind_str(kind: FamilyKind) -> &'static str {
    match kind {
        FamilyKind::Constant => "constant",
        FamilyKind::Nonconstant => "nonconstant",
        FamilyKind::Degenerate => "degenerate",
        FamilyKind::Unrealized => "unrealized",
    }
}

fn verdict_str(v: ParallelVerdict) -> &'static str {
    match v {
        ParallelVerdict::Parallel => "parallel",
        ParallelVerdict::NonParallel => "non_parallel",
    }
}

/// Family rows shared by the census and yamabe CSV outputs.
fn census_csv(cen: &MetricCensus) -> String {
    let headers = [
        "kind",
        "j",
        "c",
        "minimal_period",
        "closure",
        "energy_drift",
        "codazzi_residual",
        "ode_fd_residual",
        "fd_samples",
        "parallel",
    ];
    let rows = cen
        .families
        .iter()
        .map(|f| {
            let v = f.verification.as_ref();
            vec![
                kind_str(f.kind).to_string(),
                f.j.map(|j| j.to_string()).unwrap_or_default(),
                f.c.map(fmt_f).unwrap_or_default(),
                f.minimal_period.map(fmt_f).unwrap_or_default(),
                v.map(|v| fmt_f(v.closure)).unwrap_or_default(),
                v.map(|v| fmt_f(v.energy_drift)).unwrap_or_default(),
                v.and_then(|v| v.codazzi_residual).map(fmt_f).unwrap_or_default(),
                v.map(|v| fmt_f(v.ode_fd_residual)).unwrap_or_default(),
                v.map(|v| v.fd_samples.to_string()).unwrap_or_default(),
                v.and_then(|v| v.parallel).map(|p| verdict_str(p).to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    csv_table(&headers, rows)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let quad_tol = cli.quad_tol;
    let closure_tol = cli.closure_tol;
    let parallel_tol = cli.parallel_tol;
    let energy_cutoff = cli.energy_cutoff;
    let census_options = |samples: usize| CensusOptions {
        closure_tol,
        parallel_tol,
        energy_cutoff,
        quad_rel_tol: quad_tol,
        samples,
    };

    match cli.command {
        Command::Params(model) => {
            let params = model.to_params()?;
            let derived = derive_params(&params)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => envelope("params", model.echo(), derived, Vec::new()),
                Format::Csv => Ok(csv_table(
                    &["alpha", "beta", "c0", "T_min", "phi_prime_alpha"],
                    vec![vec![
                        fmt_f(derived.alpha),
                        fmt_f(derived.beta),
                        fmt_f(derived.c0),
                        fmt_f(derived.t_min),
                        fmt_f(derived.phi_prime_alpha),
                    ]],
                )),
            }
        }

        Command::PeriodTable { n, energies, grid, c_min, c_max } => {
            let sys = normalized_system(n)?;
            let user_list = energies.is_some();
            let energies = match energies {
                Some(list) => list,
                None => {
                    let count = grid.unwrap_or(50);
                    let hi = c_max.unwrap_or(0.99 * sys.energy_max());
                    if !(count >= 2 && c_min > 0.0 && hi > c_min) {
                        return Err(WmError::InvalidParameter(format!(
                            "period-table grid needs count ≥ 2 and 0 < c_min < c_max, got {count} over [{c_min}, {hi}]"
                        ))
                        .into());
                    }
                    let span = (hi / c_min).ln();
                    (0..count)
                        .map(|i| c_min * (span * i as f64 / (count - 1) as f64).exp())
                        .collect()
                }
            };
            let mut samples = Vec::with_capacity(energies.len());
            for row in period_table(&sys, &energies, quad_tol) {
                samples.push(row?);
            }
            let echo = json!({
                "n": n,
                "energies": if user_list { Value::from(energies.clone()) } else { Value::Null },
                "grid": grid,
                "c_min": c_min,
                "c_max": c_max,
                "quad_tol": quad_tol,
            });
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(csv_table(
                    &["c", "a", "b", "T", "dT", "err"],
                    samples
                        .iter()
                        .map(|s| {
                            vec![
                                fmt_f(s.energy),
                                fmt_f(s.turning.a),
                                fmt_f(s.turning.b),
                                fmt_f(s.period),
                                fmt_f(s.dperiod.unwrap_or(f64::NAN)),
                                fmt_f(s.quadrature_error_estimate),
                            ]
                        })
                        .collect(),
                )),
                Format::Json => {
                    let rows: Vec<Value> = samples
                        .iter()
                        .map(|s| {
                            json!({
                                "c": s.energy,
                                "a": s.turning.a,
                                "b": s.turning.b,
                                "T": s.period,
                                "dT": s.dperiod,
                                "err": s.quadrature_error_estimate,
                            })
                        })
                        .collect();
                    envelope("period-table", echo, rows, Vec::new())
                }
            }
        }

        Command::Certificate { n, grid_min, grid_max, grid_count } => {
            let spec = GridSpec {
                min: grid_min,
                max: grid_max,
                count: grid_count,
                ..GridSpec::default()
            };
            let report = monotonicity_certificate(n, &spec)?;
            let echo = json!({
                "n": n,
                "grid_min": grid_min,
                "grid_max": grid_max,
                "grid_count": grid_count,
            });
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    // The headline verdicts ride the diagnostics stream so the
                    // table itself stays plot-ready.
                    eprintln!(
                        "note: n={} H_positive={} Delta_nonnegative={} ({})",
                        report.n, report.h_positive, report.delta_nonnegative, report.notes
                    );
                    Ok(csv_table(
                        &["x", "H", "Delta"],
                        report
                            .grid
                            .iter()
                            .zip(report.h_values.iter().zip(&report.delta_values))
                            .map(|(&x, (&h, &d))| vec![fmt_f(x), fmt_f(h), fmt_f(d)])
                            .collect(),
                    ))
                }
                Format::Json => envelope("certificate", echo, report, Vec::new()),
            }
        }

        Command::Census { model, length, samples } => {
            let params = model.to_params()?;
            let opts = census_options(samples);
            let mut cen = census(&params, length, &opts)?;
            let diagnostics = std::mem::take(&mut cen.diagnostics);
            let mut echo = model.echo();
            echo["length"] = json!(length);
            echo["samples"] = json!(samples);
            echo["quad_tol"] = json!(quad_tol);
            echo["closure_tol"] = json!(closure_tol);
            echo["parallel_tol"] = json!(parallel_tol);
            echo["energy_cutoff"] = json!(energy_cutoff);
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => envelope("census", echo, cen, diagnostics),
                Format::Csv => Ok(census_csv(&cen)),
            }
        }

        Command::Solve { model, length, family, samples } => {
            let params = model.to_params()?;
            if family == 0 {
                return Err(WmError::InvalidParameter(
                    "family index j must be at least 1".into(),
                )
                .into());
            }
            let sys = raw_system(&params)?;
            let derived = derive_params(&params)?;
            let target = length / f64::from(family);
            let c_phys = energy_for_period(&sys, target, energy_cutoff, quad_tol)?;
            let scale = derived.alpha * derived.beta;
            let profile = SolutionProfile::from_energy(&params, c_phys / (scale * scale), length, samples)?;
            let mut echo = model.echo();
            echo["length"] = json!(length);
            echo["family"] = json!(family);
            echo["samples"] = json!(samples);
            echo["quad_tol"] = json!(quad_tol);
            echo["energy_cutoff"] = json!(energy_cutoff);
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let headers = ["t", "h", "h1", "h2", "h3", "q", "q1", "q2", "q3"];
                    let rows = (0..profile.len())
                        .map(|i| {
                            vec![
                                fmt_f(profile.t[i]),
                                fmt_f(profile.h[i]),
                                fmt_f(profile.h1[i]),
                                fmt_f(profile.h2[i]),
                                fmt_f(profile.h3[i]),
                                fmt_f(profile.q[i]),
                                fmt_f(profile.q1[i]),
                                fmt_f(profile.q2[i]),
                                fmt_f(profile.q3[i]),
                            ]
                        })
                        .collect();
                    Ok(csv_table(&headers, rows))
                }
                Format::Json => envelope("solve", echo, profile, Vec::new()),
            }
        }

        Command::Verify { model, file } => {
            let params = model.to_params()?;
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            let (profile, source) = parse_profile_csv(&params, &text)?;
            let harmonic = harmonic_residual(&profile)?;
            let ode = ode_residual(&profile)?;
            let par = parallelism_test(&profile, parallel_tol)?;
            let length = conformal_length(&profile)?;
            let data = json!({
                "samples": profile.segments(),
                "T": profile.period,
                "derivative_source": source,
                "periodicity_defect": profile.periodicity_defect,
                "harmonic_residual": harmonic,
                "ode_closure_residual": ode.closure,
                "ode_fd_residual": ode.finite_difference,
                "parallel": verdict_str(par.verdict),
                "parallel_sup": par.sup_norm,
                "parallel_threshold": par.threshold,
                "conformal_length": length,
            });
            let mut echo = model.echo();
            echo["file"] = json!(file.display().to_string());
            echo["parallel_tol"] = json!(parallel_tol);
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => envelope("verify", echo, data, Vec::new()),
                Format::Csv => {
                    let object = data.as_object().expect("verify payload is an object");
                    let rows = object
                        .iter()
                        .map(|(k, v)| {
                            let rendered = match v {
                                Value::String(s) => s.clone(),
                                other => other.to_string(),
                            };
                            vec![k.clone(), rendered]
                        })
                        .collect();
                    Ok(csv_table(&["metric", "value"], rows))
                }
            }
        }

        Command::Yamabe { n, length, samples } => {
            let sys = yamabe_system(n)?;
            let threshold = yamabe_threshold(n)?;
            let mut diagnostics = Vec::new();
            let mut data = json!({
                "n": n,
                "threshold": threshold,
                "beta": sys.beta_const(),
                "limit_period": sys.limit_period(),
            });
            let mut census_value: Option<MetricCensus> = None;
            if let Some(length) = length {
                let mut cen = yamabe_census(n, length, &census_options(samples))?;
                diagnostics = std::mem::take(&mut cen.diagnostics);
                census_value = Some(cen);
            }
            let echo = json!({
                "n": n,
                "length": length,
                "samples": samples,
                "quad_tol": quad_tol,
                "closure_tol": closure_tol,
                "energy_cutoff": energy_cutoff,
            });
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => {
                    if let Some(cen) = census_value {
                        data["census"] = serde_json::to_value(cen)
                            .map_err(|e| CliError::Io(format!("serialization: {e}")))?;
                    }
                    envelope("yamabe", echo, data, diagnostics)
                }
                Format::Csv => match census_value {
                    Some(cen) => Ok(census_csv(&cen)),
                    None => Ok(csv_table(
                        &["n", "threshold", "beta", "limit_period"],
                        vec![vec![
                            n.to_string(),
                            fmt_f(threshold),
                            fmt_f(sys.beta_const()),
                            fmt_f(sys.limit_period()),
                        ]],
                    )),
                },
            }
        }

        Command::Bifurcations { n, scalar_curvature, constant, k_max, yamabe } => {
            let rows: Vec<(u32, f64, f64)> = if yamabe {
                let threshold = yamabe_threshold(n)?;
                let beta = yamabe_system(n)?.beta_const();
                (1..=k_max).map(|k| (k, f64::from(k) * threshold, beta)).collect()
            } else {
                let params = ModelParams::new(n, scalar_curvature, constant)?;
                bifurcation_points(&params, k_max)?
                    .into_iter()
                    .map(|p| (p.k, p.t_k, p.u_k))
                    .collect()
            };
            let echo = json!({
                "n": n,
                "scalar_curvature": scalar_curvature,
                "constant": constant,
                "k_max": k_max,
                "yamabe": yamabe,
            });
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(csv_table(
                    &["k", "T_k", "u_k"],
                    rows.iter()
                        .map(|&(k, t, u)| vec![k.to_string(), fmt_f(t), fmt_f(u)])
                        .collect(),
                )),
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|&(k, t, u)| json!({"k": k, "T_k": t, "u_k": u}))
                        .collect();
                    envelope("bifurcations", echo, rows, Vec::new())
                }
            }
        }
    }
}

/// Parses a profile CSV. Accepts the minimal header `t,h` (derivatives
/// rebuilt internally with periodic finite differences) or any header
/// containing at least `t,h,h1,h2,h3` — the `solve` output — in which case
/// the stored derivative columns are taken as-is.
fn parse_profile_csv(
    params: &ModelParams,
    text: &str,
) -> Result<(SolutionProfile, &'static str), CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| WmError::InvalidProfile("empty profile file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| columns.iter().position(|c| *c == name);
    let (Some(it), Some(ih)) = (find("t"), find("h")) else {
        return Err(WmError::InvalidProfile(format!(
            "profile header must contain columns t and h, got `{header}`"
        ))
        .into());
    };
    let derivative_cols = match (find("h1"), find("h2"), find("h3")) {
        (Some(i1), Some(i2), Some(i3)) => Some((i1, i2, i3)),
        _ => None,
    };

    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (line_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(WmError::InvalidProfile(format!(
                "row {} has {} fields, expected {}",
                line_no + 2,
                fields.len(),
                columns.len()
            ))
            .into());
        }
        for (slot, field) in cells.iter_mut().zip(&fields) {
            let v: f64 = field.parse().map_err(|_| {
                WmError::InvalidProfile(format!("row {}: unparsable float `{field}`", line_no + 2))
            })?;
            slot.push(v);
        }
    }

    let take = |i: usize| cells[i].clone();
    match derivative_cols {
        Some((i1, i2, i3)) => {
            let profile =
                SolutionProfile::from_columns(params, take(it), take(ih), take(i1), take(i2), take(i3))?;
            Ok((profile, "columns"))
        }
        None => {
            let profile = SolutionProfile::from_time_series(params, take(it), take(ih))?;
            Ok((profile, "finite_difference"))
        }
    }
}
