//! The `magspec` command-line frontend.
//!
//! Every subcommand writes a data section (CSV or JSON) preceded by
//! `#`-prefixed provenance lines. The only line that changes between
//! identical runs is the one starting with `# timestamp:`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::{ModelField, TaylorField};
use crate::gaps::{
    bloch_grid, bloch_operator, certificate_from_quasimodes, certify, detect_gaps, gap_count_scaling,
    spectrum_cloud, CloudOptions, GapCertificate, PeriodicField, CLOUD_TOLERANCE,
};
use crate::model2d::{
    assemble_h0, assemble_h_dirichlet, conjecture_study, dilation_study, dirichlet_grid, lowest_eigs_model,
    GridPolicy,
};
use crate::montgomery::{asymptotic_lambda0, invert_band, lambda0, load_cache, nu_hat, save_cache};
use crate::quasimode::{build_phi, energy_scale, quasimode_grid, residual_study, transverse_state, QuasimodeGridPolicy};
use crate::spectral::{sparse_lowest_eigs, Grid1D, Grid2D};

/// Environment variable overriding the band cache file.
pub const CACHE_ENV: &str = "MAGSPEC_CACHE";
/// Cache file name used next to the output file.
pub const CACHE_FILE: &str = "magspec-band-cache.json";

#[derive(Debug, Parser)]
#[command(name = "magspec", version, about = "Spectra of magnetic Schrödinger operators with vanishing fields")]
struct Cli {
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep of the band function λ₀(α, β).
    Band {
        #[arg(long)]
        k: u32,
        /// Single value or lo:hi:step.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Minimum ν̂ of the band function and its minimiser.
    NuHat {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Solves λ₀(α, 1) = target on the increasing branch.
    Invert {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Band function against its large-α asymptote.
    MontgomeryAsym {
        #[arg(long)]
        k: u32,
        /// Single value or lo:hi:step.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Lowest eigenvalues of the hypersurface model operator.
    Model2d {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// `dirichlet` (one well, Dirichlet ends) or `periodic` (whole circle).
        #[arg(long, default_value = "dirichlet")]
        operator: String,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Dilation law of the discrete-well model operator K^h.
    KDilation {
        /// Taylor field JSON (file path or inline).
        #[arg(long)]
        taylor: String,
        /// Comma-separated h values.
        #[arg(long, default_value = "1,0.5,0.25")]
        h: String,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[arg(long, default_value_t = 41)]
        nodes: usize,
    },
    /// Quasimode at one energy with its residual.
    Quasimode {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        target: f64,
        #[command(flatten)]
        policy: QuasimodePolicyArgs,
    },
    /// Quasimode residuals along an h list with the fitted rate.
    ResidualStudy {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        target: f64,
        /// Comma-separated h values.
        #[arg(long, default_value = "0.04,0.02,0.01,0.005")]
        h: String,
        #[command(flatten)]
        policy: QuasimodePolicyArgs,
    },
    /// Lowest eigenvalues of one Floquet–Bloch fiber.
    Bloch {
        #[command(flatten)]
        field: PeriodicFieldArgs,
        #[arg(long)]
        h: f64,
        /// Quasimomentum `θ_s,θ_t`.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Gap detection in a rescaled window; several h values give a count table.
    Gaps {
        #[command(flatten)]
        field: PeriodicFieldArgs,
        /// Comma-separated h values.
        #[arg(long)]
        h: String,
        /// Window coefficients `a,b` in units of h^{4/3}.
        #[arg(long, default_value = "0.6,1.6")]
        window: String,
        #[arg(long, default_value_t = crate::gaps::DEFAULT_THETA_COUNT)]
        theta_count: usize,
        #[arg(long, default_value_t = crate::gaps::DEFAULT_BANDS)]
        bands: usize,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Checks a gap certificate, read from JSON or built from quasimodes.
    Certify {
        /// Certificate JSON file.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        h: Option<f64>,
        /// Comma-separated energies ν_j for a built certificate.
        #[arg(long, default_value = "0.8,1,1.2")]
        targets: String,
        #[arg(long, default_value_t = 0.05)]
        c: f64,
        #[command(flatten)]
        policy: QuasimodePolicyArgs,
    },
    /// Rescaled Dirichlet bottoms along a decreasing h list.
    Conjecture {
        #[command(flatten)]
        field: FieldArgs,
        /// Comma-separated, strictly decreasing h values.
        #[arg(long, default_value = "0.1,0.07,0.05,0.035")]
        h: String,
        #[command(flatten)]
        policy: PolicyArgs,
    },
}

#[derive(Debug, Args, Serialize)]
struct FieldArgs {
    /// Model field JSON (file path or inline); defaults to ω ≡ 1.
    #[arg(long)]
    field: Option<String>,
    /// Vanishing order of the default field.
    #[arg(long, default_value_t = 1)]
    k: u32,
}

impl FieldArgs {
    fn load(&self) -> Result<ModelField> {
        match &self.field {
            Some(source) => ModelField::from_json(&read_source(source)?),
            None => ModelField::uniform(self.k, 1.0),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct PeriodicFieldArgs {
    /// Periodic field JSON (file path or inline); defaults to b = sin t.
    #[arg(long)]
    field: Option<String>,
}

impl PeriodicFieldArgs {
    fn load(&self) -> Result<PeriodicField> {
        match &self.field {
            Some(source) => PeriodicField::from_json(&read_source(source)?),
            None => Ok(PeriodicField::sine()),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct PolicyArgs {
    #[arg(long)]
    s_per_width: Option<f64>,
    #[arg(long)]
    t_per_width: Option<f64>,
    #[arg(long)]
    t_extent: Option<f64>,
}

impl PolicyArgs {
    fn policy(&self) -> GridPolicy {
        let mut p = GridPolicy::default();
        if let Some(v) = self.s_per_width {
            p.s_per_width = v;
        }
        if let Some(v) = self.t_per_width {
            p.t_per_width = v;
        }
        if self.t_extent.is_some() {
            p.t_extent = self.t_extent;
        }
        p
    }
}

#[derive(Debug, Args, Serialize)]
struct QuasimodePolicyArgs {
    /// Nodes per envelope width along s.
    #[arg(long)]
    q_s_per_width: Option<f64>,
    /// Nodes per transverse width along t.
    #[arg(long)]
    q_t_per_width: Option<f64>,
}

impl QuasimodePolicyArgs {
    fn policy(&self) -> QuasimodeGridPolicy {
        let mut p = QuasimodeGridPolicy::default();
        if let Some(v) = self.q_s_per_width {
            p.s_per_width = v;
        }
        if let Some(v) = self.q_t_per_width {
            p.t_per_width = v;
        }
        p
    }
}

/// A file path, or the JSON text itself when it starts with `{`.
fn read_source(source: &str) -> Result<String> {
    if source.trim_start().starts_with('{') {
        Ok(source.to_string())
    } else {
        Ok(std::fs::read_to_string(source)?)
    }
}

/// Parses `lo:hi:step` or a single number. Points are `lo + i·step`; the
/// last one is `hi` when the range divides evenly.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::param(format!("cannot parse '{s}' as a number")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::param(format!("range {text} needs lo <= hi and a positive step")));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            if n > 1_000_000 {
                return Err(Error::param(format!("range {text} has too many points")));
            }
            let mut values: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
            if ((hi - lo) / step - n as f64).abs() < 1e-9 {
                values[n] = hi;
            }
            Ok(values)
        }
        _ => Err(Error::param(format!("expected a number or lo:hi:step, got {text}"))),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::param(format!("cannot parse '{s}' as a number")))
        })
        .collect()
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(format!("{name} must be positive, got {value}")))
    }
}

/// A finished run: data section plus metadata lines for the header.
struct Output {
    data: String,
    meta: Vec<String>,
}

impl Output {
    fn new(data: String) -> Self {
        Output { data, meta: Vec::new() }
    }

    fn json<T: Serialize>(value: &T) -> Result<Self> {
        Ok(Output::new(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn with(mut self, line: String) -> Self {
        self.meta.push(line);
        self
    }
}

fn grid_line(grid: &Grid2D) -> String {
    format!(
        "grid: s [{}, {}] x {} ({:?}), t [{}, {}] x {} ({:?})",
        grid.s.lower(),
        grid.s.upper(),
        grid.s.points(),
        grid.s.kind(),
        grid.t.lower(),
        grid.t.upper(),
        grid.t.points(),
        grid.t.kind()
    )
}

fn header(argv: &[String], meta: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# magspec {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# command: {}", argv.join(" "));
    for line in meta {
        let _ = writeln!(out, "# {line}");
    }
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let _ = writeln!(out, "# timestamp: {stamp}");
    out
}

/// Strips the `#` header, leaving the data section.
pub fn data_section(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn cache_path(out: Option<&Path>) -> Option<PathBuf> {
    if let Some(path) = std::env::var_os(CACHE_ENV) {
        return Some(PathBuf::from(path));
    }
    out.map(|p| p.parent().unwrap_or(Path::new(".")).join(CACHE_FILE))
}

fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Band { k, alpha, beta, tol } => {
            let mut data = String::from("k,alpha,beta,lambda0,tolerance,L,nodes\n");
            for a in parse_range(alpha)? {
                let p = lambda0(*k, a, *beta, *tol)?;
                let _ = writeln!(data, "{k},{a},{beta},{},{},{},{}", p.lambda0, p.tolerance, p.length, p.nodes);
            }
            Ok(Output::new(data).with(format!("parameters: k = {k}, beta = {beta}, tol = {tol}")))
        }
        Command::NuHat { k, tol } => Output::json(&nu_hat(*k, *tol)?),
        Command::Invert { k, target, tol } => {
            let alpha1 = invert_band(*k, *target, *tol)?;
            let check = lambda0(*k, alpha1, 1.0, *tol)?.lambda0;
            Output::json(&json!({"k": k, "target": target, "alpha1": alpha1, "lambda0": check, "tol": tol}))
        }
        Command::MontgomeryAsym { k, alpha } => {
            let mut data = String::from("alpha,lambda0,asymptote,ratio\n");
            for a in parse_range(alpha)? {
                let value = lambda0(*k, a, 1.0, 1e-10)?.lambda0;
                let asym = asymptotic_lambda0(*k, a)?;
                let _ = writeln!(data, "{a},{value},{asym},{}", value / asym);
            }
            Ok(Output::new(data).with(format!("parameters: k = {k}")))
        }
        Command::Model2d {
            field,
            h,
            count,
            operator,
            policy,
        } => {
            let model = field.load()?;
            let h = positive("h", *h)?;
            let grid = dirichlet_grid(&model, h, &policy.policy())?;
            let (grid, op) = match operator.as_str() {
                "dirichlet" => {
                    let op = assemble_h_dirichlet(&model, h, &grid)?;
                    (grid, op)
                }
                "periodic" => {
                    let s = Grid1D::periodic(grid.s.lower(), grid.s.upper(), grid.s.points() + 1)?;
                    let grid = Grid2D::new(s, grid.t);
                    let op = assemble_h0(&model, h, &grid)?;
                    (grid, op)
                }
                other => return Err(Error::param(format!("unknown operator '{other}'"))),
            };
            let values = lowest_eigs_model(&op, *count)?;
            let scale = energy_scale(model.k(), h);
            let mut data = String::from("index,eigenvalue,rescaled\n");
            for (j, v) in values.iter().enumerate() {
                let _ = writeln!(data, "{j},{v},{}", v / scale);
            }
            Ok(Output::new(data)
                .with(format!("field: {}", serde_json::to_string(&model.to_spec())?))
                .with(format!("parameters: h = {h}, operator = {operator}"))
                .with(grid_line(&grid)))
        }
        Command::KDilation {
            taylor,
            h,
            count,
            radius,
            nodes,
        } => {
            let field = TaylorField::from_json(&read_source(taylor)?)?;
            let study = dilation_study(&field, &parse_list(h)?, *count, *radius, *nodes)?;
            Ok(Output::new(study.to_csv())
                .with(format!("field: {}", field.to_json()))
                .with(format!("parameters: radius = {radius}, nodes = {nodes}")))
        }
        Command::Quasimode {
            field,
            h,
            target,
            policy,
        } => {
            let model = field.load()?;
            let h = positive("h", *h)?;
            let psi = transverse_state(&model, *target)?;
            let grid = quasimode_grid(&model, h, &psi, &policy.policy())?;
            let b = build_phi(&model, h, *target, &grid)?;
            let summary = json!({
                "k": b.k, "h": b.h, "target_nu": b.target_nu, "mu": b.mu, "alpha1": b.alpha1,
                "beta": b.beta, "s1": b.s1, "omega_min": b.omega_min, "norm": b.norm,
                "residual": b.residual, "residual_over_mu": b.residual / b.mu,
            });
            Ok(Output::json(&summary)?
                .with(format!("field: {}", serde_json::to_string(&model.to_spec())?))
                .with(grid_line(&grid)))
        }
        Command::ResidualStudy {
            field,
            target,
            h,
            policy,
        } => {
            let model = field.load()?;
            let study = residual_study(&model, *target, &parse_list(h)?, &policy.policy())?;
            let fit = study.fit()?;
            Output::json(&json!({"rows": study.rows, "fit": fit, "worst_budget_ratio": study.worst_budget_ratio()}))
                .map(|o| o.with(format!("field: {}", serde_json::to_string(&model.to_spec()).unwrap_or_default())))
        }
        Command::Bloch {
            field,
            h,
            theta,
            count,
            policy,
        } => {
            let periodic = field.load()?;
            let h = positive("h", *h)?;
            let theta = parse_list(theta)?;
            let [ts, tt] = theta[..] else {
                return Err(Error::param("theta needs two components"));
            };
            let grid = bloch_grid(&periodic, h, &policy.policy())?;
            let op = bloch_operator(&periodic, h, [ts, tt], &grid)?;
            let values = sparse_lowest_eigs(&op, *count, 0.0, CLOUD_TOLERANCE * op.norm_bound())?;
            let scale = energy_scale(1, h);
            let mut data = String::from("index,eigenvalue,rescaled\n");
            for (j, v) in values.iter().enumerate() {
                let _ = writeln!(data, "{j},{v},{}", v / scale);
            }
            Ok(Output::new(data)
                .with(format!("field: {}", serde_json::to_string(&periodic)?))
                .with(format!("parameters: h = {h}, theta = ({ts}, {tt})"))
                .with(grid_line(&grid)))
        }
        Command::Gaps {
            field,
            h,
            window,
            theta_count,
            bands,
            policy,
        } => {
            let periodic = field.load()?;
            let h_list = parse_list(h)?;
            let coefficients = parse_list(window)?;
            let [a, b] = coefficients[..] else {
                return Err(Error::param("window needs two coefficients a,b"));
            };
            let options = CloudOptions {
                theta_count: *theta_count,
                bands: *bands,
                policy: policy.policy(),
            };
            let meta = format!("field: {}", serde_json::to_string(&periodic)?);
            if let [h] = h_list[..] {
                let h = positive("h", h)?;
                let grid = bloch_grid(&periodic, h, &options.policy)?;
                let cloud = spectrum_cloud(&periodic, h, *theta_count, *bands, &grid)?;
                let scale = energy_scale(1, h);
                let report = detect_gaps(&cloud, (a * scale, b * scale))?;
                Ok(Output::new(report.to_json()? + "\n")
                    .with(meta)
                    .with(format!(
                        "cloud: {theta_count}x{theta_count} quasimomenta, {bands} bands, reliable ceiling {}",
                        cloud.reliable_ceiling()
                    ))
                    .with(grid_line(&grid)))
            } else {
                let table = gap_count_scaling(&periodic, 1, (a, b), &h_list, &options)?;
                Ok(Output::json(&table)?.with(meta))
            }
        }
        Command::Certify {
            input,
            field,
            h,
            targets,
            c,
            policy,
        } => match (input, h) {
            (Some(path), _) => {
                let cert = GapCertificate::from_json(&std::fs::read_to_string(path)?)?;
                Output::json(&certify(&cert))
            }
            (None, Some(h)) => {
                let model = field.load()?;
                let cert = certificate_from_quasimodes(&model, *h, &parse_list(targets)?, *c, &policy.policy())?;
                let verdict = certify(&cert);
                Output::json(&json!({"certificate": cert, "verdict": verdict}))
            }
            (None, None) => Err(Error::param("certify needs --in <file> or --h to build a certificate")),
        },
        Command::Conjecture { field, h, policy } => {
            let model = field.load()?;
            let study = conjecture_study(&model, &parse_list(h)?, &policy.policy())?;
            Ok(Output::new(study.to_csv()).with(format!("field: {}", serde_json::to_string(&model.to_spec())?)))
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code:
/// 0 on success, 2 on usage or parameter errors, 3 on numerical failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let printable: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();

    let cache = cache_path(cli.out.as_deref());
    if let Some(path) = &cache {
        if path.exists() {
            if let Err(e) = load_cache(path) {
                eprintln!("magspec: ignoring unreadable band cache {}: {e}", path.display());
            }
        }
    }

    let output = match execute(&cli.command) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("magspec: {e}");
            return if e.is_parameter() { 2 } else { 3 };
        }
    };

    if let Some(path) = &cache {
        if let Err(e) = save_cache(path) {
            eprintln!("magspec: could not write band cache {}: {e}", path.display());
        }
    }

    let text = header(&printable, &output.meta) + &output.data;
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("magspec: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    0
}
