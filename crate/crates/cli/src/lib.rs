//! The `freejac` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! code together with everything that should be written to stdout and
//! stderr, so the binary is a thin wrapper and tests can call it in-process.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or failed
//! precondition (stdout carries `{"error": {"code": …, "message": …}}`),
//! 3 scan found singular derivatives.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use freejac_core::invertibility::{
    collision_from_kernel, jacobian_scan, kernel_from_collision, newton_invert, series_inverse, KernelWitness,
    NewtonOptions, ScanReport,
};
use freejac_core::linalg::CMatrix;
use freejac_core::linearization::{derivative_matrix, singularity_certificate, sylvester_solve, sylvester_unique};
use freejac_core::matrixeval::{eval_map, jet_eval, sample_commuting_tuple, sample_tuple, Distribution};
use freejac_core::parser::{map_digest, parse_map, print_map_styled, print_poly_styled, PrintStyle};
use freejac_core::{Complex64, DomainSpec, Error, ErrorCode, FreePolyMap, MatrixTuple, SampleConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_HITS: i32 = 3;

/// Environment variable capping the worker threads used by scans.
pub const THREADS_ENV: &str = "FREEJAC_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "freejac",
    version,
    about = "Derivatives, singularity certificates and inversion for free polynomial maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result to this file instead of stdout.
    #[arg(short = 'o', long, global = true)]
    pub output: Option<PathBuf>,
    /// Indented JSON, and a table for scan reports.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct MapSource {
    /// Map text, e.g. "vars X,Y; (X + Y^2, Y)".
    #[arg(short = 'm', long = "map", conflicts_with = "map_file")]
    pub map: Option<String>,
    /// File containing the map text.
    #[arg(long)]
    pub map_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the map on a matrix tuple.
    Eval {
        #[command(flatten)]
        map: MapSource,
        /// Matrix-tuple JSON.
        #[arg(short = 'x', long)]
        point: PathBuf,
    },
    /// Evaluate on the block jet [[X, H], [0, X]].
    Jet {
        #[command(flatten)]
        map: MapSource,
        #[arg(short = 'x', long)]
        point: PathBuf,
        /// Direction tuple H.
        #[arg(long = "dir")]
        direction: PathBuf,
    },
    /// Dense matrix of the derivative at a point.
    DerivMatrix {
        #[command(flatten)]
        map: MapSource,
        #[arg(short = 'x', long)]
        point: PathBuf,
    },
    /// Singularity certificate of the derivative at a point.
    Certify {
        #[command(flatten)]
        map: MapSource,
        #[arg(short = 'x', long)]
        point: PathBuf,
    },
    /// Spectral separation of A·H + H·B = C, and its solution when C is given.
    Sylvester {
        /// Matrix JSON {"rows", "cols", "entries"} for A.
        #[arg(short = 'a', long)]
        a: PathBuf,
        #[arg(short = 'b', long)]
        b: PathBuf,
        #[arg(short = 'c', long)]
        c: Option<PathBuf>,
    },
    /// Sample the domain and certify the derivative at every sample.
    Scan {
        #[command(flatten)]
        map: MapSource,
        /// DomainSpec JSON; unconstrained when omitted.
        #[arg(short = 'd', long)]
        domain: Option<PathBuf>,
        /// Matrix sizes, comma separated.
        #[arg(short = 'n', long = "sizes", value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(short = 's', long, required = true)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_enum, default_value = "ginibre")]
        distribution: DistributionArg,
        /// Extra tuples to test as given; repeatable.
        #[arg(long)]
        plant: Vec<PathBuf>,
    },
    /// Draw seeded matrix tuples.
    Sample {
        /// Number of matrices per tuple; taken from the map when one is given.
        #[arg(long)]
        vars: Option<usize>,
        #[command(flatten)]
        map: MapSource,
        #[arg(short = 'n', long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(short = 's', long, required = true)]
        seed: u64,
        #[arg(short = 'd', long)]
        domain: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ginibre")]
        distribution: DistributionArg,
        /// Commuting tuples p_i(T) of one random matrix T.
        #[arg(long, conflicts_with_all = ["domain", "distribution"])]
        commuting: bool,
    },
    /// Convert a kernel witness into a collision, or a collision into a kernel witness.
    Witness {
        #[command(flatten)]
        map: MapSource,
        #[arg(short = 'x', long)]
        point: PathBuf,
        /// Kernel direction H at X; yields a collision.
        #[arg(long = "dir", conflicts_with = "other", required_unless_present = "other")]
        direction: Option<PathBuf>,
        /// Second point with the same image as X; yields a kernel witness.
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Truncated compositional inverse as a free power series.
    InvertSeries {
        #[command(flatten)]
        map: MapSource,
        #[arg(long)]
        degree: usize,
        /// Emit JSON instead of the bare inverse.
        #[arg(long)]
        json: bool,
    },
    /// Solve P(Z) = W by Newton's method.
    InvertNewton {
        #[command(flatten)]
        map: MapSource,
        /// Target tuple W.
        #[arg(short = 'x', long = "target")]
        target: PathBuf,
        /// Starting tuple; defaults to W.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Halve steps that increase the residual.
        #[arg(long)]
        damping: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DistributionArg {
    Ginibre,
    HermitianGinibre,
}

impl From<DistributionArg> for Distribution {
    fn from(d: DistributionArg) -> Self {
        match d {
            DistributionArg::Ginibre => Distribution::Ginibre,
            DistributionArg::HermitianGinibre => Distribution::HermitianGinibre,
        }
    }
}

/// A rectangular complex matrix, row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, String> {
        if self.entries.len() != self.rows * self.cols {
            return Err(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                self.rows * self.cols,
                self.rows,
                self.cols,
                self.entries.len()
            ));
        }
        if self.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err("matrix has non-finite entries".into());
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            Complex64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct CliError {
    exit: i32,
    code: ErrorCode,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            exit: EXIT_PRECONDITION,
            code: ErrorCode::InvalidInput,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError {
            exit: EXIT_IO,
            code: ErrorCode::Io,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn to_json(&self) -> String {
        json!({"error": {"code": self.code, "message": self.message}}).to_string()
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        let e = e.into();
        CliError {
            exit: EXIT_PRECONDITION,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_tuple(path: &Path) -> Result<MatrixTuple, CliError> {
    read_json(path)
}

fn read_matrix(path: &Path) -> Result<CMatrix, CliError> {
    read_json::<MatrixJson>(path)?
        .to_matrix()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_domain(path: Option<&PathBuf>) -> Result<DomainSpec, CliError> {
    path.map_or_else(|| Ok(DomainSpec::unconstrained()), |p| read_json(p))
}

fn load_map(src: &MapSource) -> Result<FreePolyMap, CliError> {
    let text = match (&src.map, &src.map_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => read_text(path)?,
        (None, None) => return Err(CliError::input("a map is required (-m or --map-file)")),
    };
    Ok(parse_map(&text)?)
}

fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let s = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    s.expect("output types serialize")
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        // Fails harmlessly when the pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Output names of an inverse map: `Y` for one variable, `Y1..YN` otherwise.
pub fn inverse_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["Y".to_string()]
    } else {
        (1..=n).map(|i| format!("Y{i}")).collect()
    }
}

fn scan_table(r: &ScanReport) -> String {
    let mut out = format!(
        "map {}  seed {}  samples/size {}  domain {}\n",
        r.map_digest,
        r.seed,
        r.samples_per_size,
        if r.domain_is_free {
            "free"
        } else {
            "not closed under direct sums"
        }
    );
    out.push_str(&format!(
        "{:>5} {:>8} {:>8} {:>14} {:>18} {:>6}\n",
        "size", "samples", "planted", "min sigma_min", "argmin", "hits"
    ));
    for rec in &r.records {
        out.push_str(&format!(
            "{:>5} {:>8} {:>8} {:>14.6e} {:>18} {:>6}\n",
            rec.size,
            rec.samples_tested,
            rec.planted_tested,
            rec.min_sigma_min,
            rec.argmin_digest,
            rec.hits.len()
        ));
    }
    out.push_str("sampled evidence only; sizes and samples not listed were not checked\n");
    out
}

fn execute(cli: &Cli) -> Result<(String, i32), CliError> {
    let pretty = cli.pretty;
    let ok = |v: Value| Ok((to_json(&v, pretty), EXIT_OK));
    match &cli.command {
        Command::Eval { map, point } => {
            let p = load_map(map)?;
            let x = read_tuple(point)?;
            Ok((to_json(&eval_map(&p, &x)?, pretty), EXIT_OK))
        }
        Command::Jet { map, point, direction } => {
            let p = load_map(map)?;
            let jet = jet_eval(&p, &read_tuple(point)?, &read_tuple(direction)?)?;
            ok(json!({
                "value": jet.value,
                "derivative": jet.derivative,
                "lower_left": jet.lower_left,
                "lower_right": jet.lower_right,
            }))
        }
        Command::DerivMatrix { map, point } => {
            let p = load_map(map)?;
            let d = derivative_matrix(&p, &read_tuple(point)?)?;
            ok(json!({
                "map_digest": d.map_digest,
                "point_digest": d.point_digest,
                "num_outputs": d.num_outputs,
                "num_vars": d.num_vars,
                "n": d.n,
                "matrix": MatrixJson::from_matrix(&d.matrix),
            }))
        }
        Command::Certify { map, point } => {
            let p = load_map(map)?;
            let d = derivative_matrix(&p, &read_tuple(point)?)?;
            let cert = singularity_certificate(&d);
            ok(json!({
                "map_digest": d.map_digest,
                "point_digest": d.point_digest,
                "certificate": cert,
            }))
        }
        Command::Sylvester { a, b, c } => {
            let (a, b) = (read_matrix(a)?, read_matrix(b)?);
            let sep = sylvester_unique(&a, &b)?;
            let mut out = json!({"separation": sep});
            if let Some(c) = c {
                let h = sylvester_solve(&a, &b, &read_matrix(c)?)?;
                out["solution"] = serde_json::to_value(MatrixJson::from_matrix(&h)).expect("serializable");
            }
            ok(out)
        }
        Command::Scan {
            map,
            domain,
            sizes,
            seed,
            samples,
            distribution,
            plant,
        } => {
            let p = load_map(map)?;
            let domain = read_domain(domain.as_ref())?;
            let planted = plant.iter().map(|f| read_tuple(f)).collect::<Result<Vec<_>, _>>()?;
            let cfg = SampleConfig::new(0, *samples, *seed).with_distribution((*distribution).into());
            configure_threads();
            let report = jacobian_scan(&p, &domain, sizes, &cfg, &planted)?;
            let exit = if report.has_hits() { EXIT_HITS } else { EXIT_OK };
            let text = if pretty {
                scan_table(&report)
            } else {
                to_json(&report, false)
            };
            Ok((text, exit))
        }
        Command::Sample {
            vars,
            map,
            size,
            count,
            seed,
            domain,
            distribution,
            commuting,
        } => {
            let num_vars = match (vars, map.map.is_some() || map.map_file.is_some()) {
                (Some(v), _) => *v,
                (None, true) => load_map(map)?.num_vars(),
                (None, false) => return Err(CliError::input("--vars or a map is required")),
            };
            let samples = if *commuting {
                (0..*count)
                    .map(|k| sample_commuting_tuple(*size, num_vars, seed.wrapping_add(k as u64)))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                let mut cfg = SampleConfig::new(*size, *count, *seed).with_distribution((*distribution).into());
                if let Some(d) = domain {
                    cfg = cfg.with_domain(read_json(d)?);
                }
                sample_tuple(&cfg, num_vars)?
            };
            ok(json!({
                "seed": seed,
                "size": size,
                "vars": num_vars,
                "commuting": commuting,
                "samples": samples,
            }))
        }
        Command::Witness {
            map,
            point,
            direction,
            other,
        } => {
            let p = load_map(map)?;
            let x = read_tuple(point)?;
            match (direction, other) {
                (Some(h), _) => {
                    let w = KernelWitness::new(&p, x, read_tuple(h)?)?;
                    let c = collision_from_kernel(&p, &w)?;
                    ok(json!({"map_digest": map_digest(&p), "kernel": w, "collision": c}))
                }
                (None, Some(x2)) => {
                    let w = kernel_from_collision(&p, &x, &read_tuple(x2)?)?;
                    ok(json!({"map_digest": map_digest(&p), "kernel": w}))
                }
                (None, None) => Err(CliError::input("--dir or --other is required")),
            }
        }
        Command::InvertSeries { map, degree, json } => {
            let p = load_map(map)?;
            let q = series_inverse(&p, *degree)?;
            if !q.valid {
                return Err(CliError {
                    exit: EXIT_PRECONDITION,
                    code: ErrorCode::ResidualTooLarge,
                    message: format!("P ∘ Q deviates from the identity through degree {degree}"),
                });
            }
            let names = inverse_names(p.num_vars());
            let text = if p.num_vars() == 1 {
                print_poly_styled(&q.map.components()[0], &names, PrintStyle::Compact)
            } else {
                print_map_styled(&q.map, &names, PrintStyle::Compact)
            };
            if *json {
                ok(json!({
                    "map_digest": map_digest(&p),
                    "degree": q.degree,
                    "valid": q.valid,
                    "inverse": print_map_styled(&q.map, &names, PrintStyle::Canonical),
                }))
            } else {
                Ok((text, EXIT_OK))
            }
        }
        Command::InvertNewton {
            map,
            target,
            start,
            tol,
            max_iter,
            damping,
        } => {
            let p = load_map(map)?;
            let w = read_tuple(target)?;
            let z0 = match start {
                Some(s) => read_tuple(s)?,
                None => w.clone(),
            };
            let opts = NewtonOptions {
                tol: *tol,
                max_iter: *max_iter,
                damping: *damping,
            };
            let r = newton_invert(&p, &w, &z0, &opts)?;
            ok(json!({
                "map_digest": map_digest(&p),
                "z": r.z,
                "iterations": r.iterations,
                "residual": r.residual,
            }))
        }
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: rendered,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_PRECONDITION,
                    stdout: CliError::input(rendered.trim_end()).to_json() + "\n",
                    stderr: rendered,
                },
            };
        }
    };
    let (text, code) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                code: e.exit,
                stdout: e.to_json() + "\n",
                stderr: format!("freejac: {}\n", e.message),
            }
        }
    };
    let text = if text.ends_with('\n') { text } else { text + "\n" };
    match &cli.output {
        Some(path) => match fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                ..Outcome::default()
            },
            Err(e) => {
                let err = CliError::io(path, e);
                Outcome {
                    code: err.exit,
                    stdout: err.to_json() + "\n",
                    stderr: format!("freejac: {}\n", err.message),
                }
            }
        },
        None => Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}
