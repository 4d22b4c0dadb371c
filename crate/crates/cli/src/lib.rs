//! Command-line front end: residual verification, EFG tensors, singular
//! sets, separated solutions on grids, transforms and VTK export.

pub mod commands;
pub mod error;
pub mod expr;
pub mod output;
pub mod spec;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};

pub use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "meridian", version, about = "Axially symmetric fields in layered media: residual checks, EFG tensors, singular sets and transforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check a candidate against a PDE system on a grid; exit 1 if the residual exceeds --tol.
    Verify(Opts),
    /// EFG matrix, invariants, closed-form and numeric roots at a point.
    Efg(Opts),
    /// Trace the singular set (det of the EFG = 0) of a gallery field.
    Singular(Opts),
    /// Potential and residual of a separated solution on a grid.
    Sov(Opts),
    /// Evaluate a Laplace-Fueter / Fourier-Fueter transform or a zero-divergence integral.
    Transform(Opts),
    /// Write a field on a structured grid (VTK legacy ASCII or CSV).
    Export(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Efg(_) => "efg",
            Command::Singular(_) => "singular",
            Command::Sov(_) => "sov",
            Command::Transform(_) => "transform",
            Command::Export(_) => "export",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Verify(o)
            | Command::Efg(o)
            | Command::Singular(o)
            | Command::Sov(o)
            | Command::Transform(o)
            | Command::Export(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Vtk,
}

/// Options shared by all subcommands; also the schema of the config file's
/// "command" object.
#[derive(Args, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Opts {
    /// JSON file with a top-level "command" object; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// System tag, e.g. weinstein, cyl-epd, maxwell-merid.
    #[arg(long)]
    pub system: Option<String>,
    /// gallery:NAME,k=v | euler-planar:... | euler-cyl:... | cart-sov:... | cyl-sov:BRANCH,...
    /// | transform:KIND,original=NAME,k=v | literal:EXPR[;EXPR]
    #[arg(long, allow_hyphen_values = true)]
    pub candidate: Option<String>,
    /// Gallery example: bessel_j0, bessel_i0, mobius, cubic, power, exp_pair.
    #[arg(long)]
    pub example: Option<String>,
    /// k=v,... for the example, the system (alpha1, alpha2, ...) or the divergence source.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "string_or_map")]
    pub params: Option<String>,
    /// x0,x1,x2
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "string_or_seq")]
    pub point: Option<String>,
    /// x0=a:b,rho=c:d
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Cells per side for contour tracing, or scan steps for root finding.
    #[arg(long)]
    pub res: Option<usize>,
    /// axis=lo:hi:n,... | random:N | FILE.csv
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// lf, gamma, gamma-conj, ffc, ffs, ffe, or div-{lf,gamma,ffc,ffs,ffe,exp}.
    #[arg(long)]
    pub kind: Option<String>,
    /// one | tau | exp-decay:a=A | double-exp
    #[arg(long, allow_hyphen_values = true)]
    pub original: Option<String>,
}

fn string_or_map<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        S(String),
        M(std::collections::BTreeMap<String, f64>),
    }
    Ok(Option::<V>::deserialize(d)?.map(|v| match v {
        V::S(s) => s,
        V::M(m) => m.iter().map(|(k, v)| format!("{k}={v:?}")).collect::<Vec<_>>().join(","),
    }))
}

fn string_or_seq<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        S(String),
        L(Vec<f64>),
    }
    Ok(Option::<V>::deserialize(d)?.map(|v| match v {
        V::S(s) => s,
        V::L(l) => l.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
    }))
}

impl Opts {
    /// Flag values win over `file` values.
    pub fn merged_over(self, file: Opts) -> Opts {
        Opts {
            config: self.config,
            system: self.system.or(file.system),
            candidate: self.candidate.or(file.candidate),
            example: self.example.or(file.example),
            params: self.params.or(file.params),
            point: self.point.or(file.point),
            window: self.window.or(file.window),
            res: self.res.or(file.res),
            grid: self.grid.or(file.grid),
            alpha: self.alpha.or(file.alpha),
            seed: self.seed.or(file.seed),
            tol: self.tol.or(file.tol),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            kind: self.kind.or(file.kind),
            original: self.original.or(file.original),
        }
    }
}

/// Reads the "command" object of a config file; a "name" entry must match `command`.
pub fn load_config(path: &std::path::Path, command: &str) -> Result<Opts, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let mut root: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let obj = root
        .get_mut("command")
        .and_then(|c| c.as_object_mut())
        .ok_or_else(|| CliError::usage(format!("{}: missing top-level \"command\" object", path.display())))?;
    if let Some(name) = obj.remove("name") {
        if name.as_str() != Some(command) {
            return Err(CliError::usage(format!("config is for command {name}, not {command}")));
        }
    }
    serde_json::from_value(serde_json::Value::Object(obj.clone()))
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Caps the global thread pool at `MERIDIAN_THREADS` when set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MERIDIAN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("MERIDIAN_THREADS = '{v}' must be a positive integer")))?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_PASS;
            }
            let err = CliError::usage(e.to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.to_json());
            return EXIT_ERROR;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(pass) => {
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            EXIT_ERROR
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<bool, CliError> {
    configure_threads()?;
    let flags = command.opts().clone();
    let opts = match &flags.config {
        Some(path) => {
            let file = load_config(path, command.name())?;
            flags.merged_over(file)
        }
        None => flags,
    };
    let out = match command {
        Command::Verify(_) => commands::verify(&opts)?,
        Command::Efg(_) => commands::efg(&opts)?,
        Command::Singular(_) => commands::singular(&opts)?,
        Command::Sov(_) => commands::sov(&opts)?,
        Command::Transform(_) => commands::transform(&opts)?,
        Command::Export(_) => commands::export(&opts)?,
    };
    out.emit(opts.out.as_deref(), stdout)?;
    Ok(out.pass)
}
