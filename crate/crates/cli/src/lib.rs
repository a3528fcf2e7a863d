//! Command implementations behind the `svar` binary.
//!
//! Every command returns a [`CliError`] on failure; [`CliError::exit_code`]
//! maps it to 2 (usage or input problem) or 3 (numerical or sample-size
//! precondition failure).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use svar_core::{
    companion_spectral_radius, default_burn_in, fit_both, fit_svar, lic_multiply_count, ls_multiply_count,
    random_stable_svar, savings_ratio, simulate_series, svar_residuals, whitening_error, DenseMatrix, Method,
    ModelOrder, MultiplyCount, SignalMatrix, SvarCoefficients, SvarError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<SvarError> for CliError {
    fn from(e: SvarError) -> Self {
        match e {
            SvarError::OrderTooLarge { .. } => CliError::Usage(e.to_string()),
            SvarError::DimensionMismatch(_) | SvarError::NonFinite { .. } | SvarError::InvalidArgument(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "svar", version, about = "Fit, simulate and cost structural VAR models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ls,
    Lic,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit SVAR coefficients to a CSV series (rows = samples, columns = branches).
    Fit {
        #[arg(short = 'i', long)]
        input: PathBuf,
        #[arg(short = 'k', long)]
        order: usize,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Skip one header line.
        #[arg(long)]
        header: bool,
    },
    /// Simulate a stable random SVAR model and write the series as CSV.
    Simulate {
        #[arg(short = 'm', long)]
        branches: usize,
        #[arg(short = 'k', long)]
        order: usize,
        #[arg(short = 'n', long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        radius: f64,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Print the multiply-count tables of both estimators.
    Count {
        #[arg(short = 'm', long)]
        branches: usize,
        #[arg(short = 'k', long)]
        order: usize,
        #[arg(short = 'n', long)]
        length: usize,
    },
    /// Time both estimators on a simulated dataset.
    Bench {
        #[arg(short = 'm', long)]
        branches: usize,
        #[arg(short = 'k', long)]
        order: usize,
        #[arg(short = 'n', long)]
        length: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Runs a parsed command, returning what belongs on standard output.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Fit {
            input,
            order,
            method,
            output,
            header,
        } => {
            let x = read_csv(&input, header)?;
            let report = cmd_fit(&x, ModelOrder(order), method)?;
            emit(report, output.as_deref())
        }
        Command::Simulate {
            branches,
            order,
            length,
            seed,
            radius,
            output,
        } => {
            cmd_simulate(branches, order, length, seed, radius, &output)?;
            Ok(String::new())
        }
        Command::Count {
            branches,
            order,
            length,
        } => cmd_count(branches, order, length),
        Command::Bench {
            branches,
            order,
            length,
            trials,
            seed,
        } => cmd_bench(branches, order, length, trials, seed),
    }
}

fn emit(report: String, output: Option<&Path>) -> CliResult<String> {
    match output {
        Some(path) => {
            fs::write(path, report).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(report),
    }
}

/// Reads a real-valued CSV series: one row per sample, one column per branch.
pub fn read_csv(path: &Path, header: bool) -> CliResult<SignalMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = idx + 1 + usize::from(header);
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    CliError::Input(format!("malformed CSV: line {line}: '{field}' is not a finite number"))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input("malformed CSV: no samples".into()));
    }
    Ok(SignalMatrix::from_time_rows(&rows)?)
}

/// Formats with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
    format!("[{}]", items.join(", "))
}

fn json_matrix(m: &DenseMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.rows()).map(|i| json_vector(m.row(i))).collect();
    format!("[{}]", rows.join(", "))
}

fn json_coefficients(out: &mut String, indent: &str, m: &SvarCoefficients<f64>) {
    let r: Vec<String> = m.r().iter().map(json_matrix).collect();
    let _ = writeln!(out, "{indent}\"L\": {},", json_matrix(m.l()));
    let _ = writeln!(out, "{indent}\"R\": [{}],", r.join(", "));
    let _ = writeln!(out, "{indent}\"t\": {},", json_vector(m.t()));
}

fn json_count(out: &mut String, name: &str, c: &MultiplyCount, last: bool) {
    let items: Vec<String> = c
        .items()
        .iter()
        .map(|(label, v)| format!("[\"{label}\", {}]", fmt_num(*v)))
        .collect();
    let _ = writeln!(
        out,
        "    \"{name}\": {{\"items\": [{}], \"total\": {}}}{}",
        items.join(", "),
        fmt_num(c.total()),
        if last { "" } else { "," }
    );
}

/// Fits with the requested method(s) and renders the JSON report.
pub fn cmd_fit(x: &SignalMatrix<f64>, k: ModelOrder, method: MethodArg) -> CliResult<String> {
    let (m, n) = (x.branches(), x.samples());
    if n <= k.0 {
        return Err(SvarError::OrderTooLarge { order: k.0, samples: n }.into());
    }
    let (fits, discrepancy) = match method {
        MethodArg::Ls => (
            vec![(Method::LeastSquares, fit_svar(x, k, Method::LeastSquares)?)],
            None,
        ),
        MethodArg::Lic => (
            vec![(
                Method::LargeInverseCholesky,
                fit_svar(x, k, Method::LargeInverseCholesky)?,
            )],
            None,
        ),
        MethodArg::Both => {
            let both = fit_both(x, k)?;
            (
                vec![
                    (Method::LeastSquares, both.ls),
                    (Method::LargeInverseCholesky, both.lic),
                ],
                Some(both.discrepancy),
            )
        }
    };
    let ls_count = ls_multiply_count(m, k.0, n)?;
    let lic_count = lic_multiply_count(m, k.0, n)?;
    let savings = savings_ratio(m, k.0, n)?;

    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"M\": {m},");
    let _ = writeln!(out, "  \"N\": {n},");
    let _ = writeln!(out, "  \"K\": {},", k.0);
    let method_name = match method {
        MethodArg::Ls => "ls",
        MethodArg::Lic => "lic",
        MethodArg::Both => "both",
    };
    let _ = writeln!(out, "  \"method\": \"{method_name}\",");
    out.push_str("  \"fits\": [\n");
    for (idx, (meth, fit)) in fits.iter().enumerate() {
        let err = whitening_error(&svar_residuals(fit, x)?);
        out.push_str("    {\n");
        let _ = writeln!(out, "      \"method\": \"{}\",", meth.name());
        json_coefficients(&mut out, "      ", fit);
        let _ = writeln!(out, "      \"residual_covariance_error\": {}", fmt_num(err));
        out.push_str(if idx + 1 == fits.len() { "    }\n" } else { "    },\n" });
    }
    out.push_str("  ],\n");
    out.push_str("  \"multiply_counts\": {\n");
    json_count(&mut out, "ls", &ls_count, false);
    json_count(&mut out, "lic", &lic_count, true);
    out.push_str("  },\n");
    match discrepancy {
        Some(d) => {
            let _ = writeln!(out, "  \"savings_ratio\": {},", fmt_num(savings));
            let _ = writeln!(out, "  \"discrepancy\": {}", fmt_num(d));
        }
        None => {
            let _ = writeln!(out, "  \"savings_ratio\": {}", fmt_num(savings));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Path of the generating-model report written next to a simulated CSV.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".model.json");
    PathBuf::from(name)
}

fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub fn cmd_simulate(m: usize, k: usize, n: usize, seed: u64, radius: f64, output: &Path) -> CliResult<()> {
    if m == 0 || n == 0 {
        return Err(CliError::Usage("branches and length must be positive".into()));
    }
    let model = random_stable_svar::<f64>(m, k, seed, radius)?;
    let burn_in = default_burn_in(m, k);
    let x = simulate_series(&model, n, noise_seed(seed), burn_in)?;

    let mut csv = String::with_capacity(n * m * 24);
    for col in 0..n {
        let fields: Vec<String> = (0..m).map(|row| fmt_num(x.data()[(row, col)])).collect();
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    fs::write(output, csv).map_err(|e| CliError::Input(format!("cannot write {}: {e}", output.display())))?;

    let mut side = String::from("{\n");
    let _ = writeln!(side, "  \"M\": {m},");
    let _ = writeln!(side, "  \"K\": {k},");
    let _ = writeln!(side, "  \"N\": {n},");
    let _ = writeln!(side, "  \"seed\": {seed},");
    let _ = writeln!(side, "  \"burn_in\": {burn_in},");
    let _ = writeln!(side, "  \"target_radius\": {},", fmt_num(radius));
    let _ = writeln!(
        side,
        "  \"spectral_radius\": {},",
        fmt_num(companion_spectral_radius(&model))
    );
    json_coefficients(&mut side, "  ", &model);
    let _ = writeln!(side, "  \"noise\": \"iid standard normal, unit variance per branch\"");
    side.push_str("}\n");
    let path = sidecar_path(output);
    fs::write(&path, side).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn count_table(out: &mut String, title: &str, c: &MultiplyCount) {
    let _ = writeln!(out, "{title}");
    for line in c.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
}

pub fn cmd_count(m: usize, k: usize, n: usize) -> CliResult<String> {
    let ls = ls_multiply_count(m, k, n)?;
    let lic = lic_multiply_count(m, k, n)?;
    let savings = savings_ratio(m, k, n)?;
    let mut out = String::new();
    let _ = writeln!(out, "Multiply counts for M = {m}, K = {k}, N = {n}");
    let _ = writeln!(out);
    count_table(&mut out, "Least squares method", &ls);
    let _ = writeln!(out);
    count_table(&mut out, "Large inverse Cholesky method", &lic);
    let _ = writeln!(out);
    let _ = writeln!(out, "savings_ratio = {savings:.6} ({:.2}%)", savings * 100.0);
    if savings < 0.0 {
        let _ = writeln!(out, "LIC not beneficial at this size");
    }
    Ok(out)
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2
    }
}

/// Median wall time of each estimator over `trials` runs on one dataset.
pub fn time_fits(x: &SignalMatrix<f64>, k: ModelOrder, trials: usize) -> CliResult<(Duration, Duration)> {
    let mut ls = Vec::with_capacity(trials);
    let mut lic = Vec::with_capacity(trials);
    for _ in 0..trials {
        let start = Instant::now();
        std::hint::black_box(fit_svar(x, k, Method::LeastSquares)?);
        ls.push(start.elapsed());
        let start = Instant::now();
        std::hint::black_box(fit_svar(x, k, Method::LargeInverseCholesky)?);
        lic.push(start.elapsed());
    }
    Ok((median(ls), median(lic)))
}

pub fn cmd_bench(m: usize, k: usize, n: usize, trials: usize, seed: u64) -> CliResult<String> {
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    if m == 0 || n == 0 {
        return Err(CliError::Usage("branches and length must be positive".into()));
    }
    if n <= k {
        return Err(SvarError::OrderTooLarge { order: k, samples: n }.into());
    }
    let model = random_stable_svar::<f64>(m, k, seed, 0.9)?;
    let x = simulate_series(&model, n, noise_seed(seed), default_burn_in(m, k))?;
    let (ls, lic) = time_fits(&x, ModelOrder(k), trials)?;
    let measured = 1.0 - lic.as_secs_f64() / ls.as_secs_f64();
    let modeled = savings_ratio(m, k, n)?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "Benchmark M = {m}, K = {k}, N = {n}, trials = {trials}, seed = {seed}"
    );
    let _ = writeln!(out, "method  median_seconds");
    let _ = writeln!(out, "ls      {:.9}", ls.as_secs_f64());
    let _ = writeln!(out, "lic     {:.9}", lic.as_secs_f64());
    let _ = writeln!(out, "measured_savings  {measured:.4}");
    let _ = writeln!(out, "modeled_savings   {modeled:.4}");
    Ok(out)
}
