use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmv_core::inverse::{reconstruct, uniqueness_check, AGREEMENT_TOL};
use cmv_core::{forward, CmvError, ForwardData, Route, TaylorSeries, UniquenessKind, VerblunskyWindow};

#[derive(Parser)]
#[command(name = "cmv", version, about = "Forward and inverse spectral computations for CMV operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a coefficient window on [k0 - radius, k0 + radius].
    Gen(GenArgs),
    /// Compute moments, m/M/Phi functions and Green's data at k0.
    Forward(ForwardArgs),
    /// Recover coefficients from the output of `forward`.
    Reconstruct(ReconstructArgs),
    /// Check local uniqueness for two windows; exit 1 if it fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Shape {
    /// Data order N.
    #[arg(long = "order", default_value_t = 6)]
    order: usize,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    k0: i64,
    /// Half-width of the window around k0 (default 2N + 8, at least 2N + 6).
    #[arg(long)]
    radius: Option<usize>,
}

impl Shape {
    fn radius(&self) -> Result<usize, CliError> {
        let min = 2 * self.order + 6;
        let r = self.radius.unwrap_or(2 * self.order + 8);
        if r < min {
            return Err(CliError::Input(format!("--radius {r} is below 2N + 6 = {min}")));
        }
        Ok(r)
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    shape: Shape,
    /// Coefficients are uniform on the disk of this radius.
    #[arg(long, default_value_t = 0.9)]
    amax: f64,
    /// Write `index,re,im` rows instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ForwardArgs {
    /// Window JSON (`-` for stdin). Without it a window is sampled from --seed.
    #[arg(long)]
    window: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    amax: f64,
    #[command(flatten)]
    shape: Shape,
    /// Write `series,index,re,im` rows instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Moments,
    RightM,
    #[value(name = "left-M")]
    LeftM,
    FullGh,
    FullGg,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Moments => Route::Moments,
            RouteArg::RightM => Route::RightM,
            RouteArg::LeftM => Route::LeftM,
            RouteArg::FullGh => Route::FullGh,
            RouteArg::FullGg => Route::FullGg,
        }
    }
}

#[derive(Args)]
struct ReconstructArgs {
    /// Forward data JSON (`-` for stdin).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    route: RouteArg,
    /// N; defaults to the order of the data.
    #[arg(long = "order")]
    order: Option<usize>,
    /// Window JSON to report residuals against.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Write `index,re,im` rows of the recovered window instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    HalfRight,
    HalfLeft,
    FullGh,
    FullGg,
}

impl From<KindArg> for UniquenessKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::HalfRight => UniquenessKind::HalfRight,
            KindArg::HalfLeft => UniquenessKind::HalfLeft,
            KindArg::FullGh => UniquenessKind::FullGh,
            KindArg::FullGg => UniquenessKind::FullGg,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    w1: PathBuf,
    #[arg(long)]
    w2: PathBuf,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    k0: i64,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Largest data order compared.
    #[arg(long = "order", default_value_t = 6)]
    order: usize,
    /// Relative tolerance for coefficient agreement.
    #[arg(long, default_value_t = AGREEMENT_TOL)]
    tol: f64,
}

enum CliError {
    Input(String),
    Numerical(String),
}

impl From<CmvError> for CliError {
    fn from(e: CmvError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

fn read_window(path: &PathBuf) -> Result<VerblunskyWindow, CliError> {
    Ok(VerblunskyWindow::from_json(&read_input(path)?)?)
}

fn sample(seed: u64, amax: f64, shape: &Shape) -> Result<VerblunskyWindow, CliError> {
    let r = shape.radius()? as i64;
    if !(0.0..1.0).contains(&amax) {
        return Err(CliError::Input(format!("--amax {amax} must lie in [0, 1)")));
    }
    Ok(VerblunskyWindow::random(seed, shape.k0 - r, shape.k0 + r, amax)?)
}

fn window_csv(w: &VerblunskyWindow) -> String {
    let mut out = String::from("index,re,im\n");
    for (i, a) in w.alphas().iter().enumerate() {
        out.push_str(&format!("{},{:e},{:e}\n", w.kmin() + i as i64, a.re, a.im));
    }
    out
}

fn forward_csv(d: &ForwardData) -> String {
    let mut out = String::from("series,index,re,im\n");
    let mut rows = |name: &str, s: &TaylorSeries| {
        for (n, c) in s.coeffs().iter().enumerate() {
            out.push_str(&format!("{name},{n},{:e},{:e}\n", c.re, c.im));
        }
    };
    rows("m_plus", &d.m_plus);
    rows("m_minus", &d.m_minus);
    rows("M_plus", &d.big_m_plus);
    rows("M_minus", &d.big_m_minus);
    rows("phi_plus", &d.phi_plus);
    rows("inv_phi_minus", &d.inv_phi_minus);
    rows("g", &d.g);
    rows("h", &d.h);
    rows("g_prev", &d.g_prev);
    for (name, mu) in [("moments_plus", &d.moments_plus), ("moments_minus", &d.moments_minus)] {
        for (k, c) in mu.positive().iter().enumerate() {
            out.push_str(&format!("{name},{},{:e},{:e}\n", k + 1, c.re, c.im));
        }
    }
    out
}

fn emit(text: &str) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        stdout.write_all(b"\n")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gen(a) => {
            let w = sample(a.seed, a.amax, &a.shape)?;
            if a.csv {
                emit(&window_csv(&w))?;
            } else {
                emit(&serde_json::to_string(&w)?)?;
            }
        }
        Command::Forward(a) => {
            let w = match &a.window {
                Some(p) => read_window(p)?,
                None => sample(a.seed, a.amax, &a.shape)?,
            };
            let d = forward(&w, a.shape.k0, a.shape.order)?;
            if d.radius_warning() {
                eprintln!(
                    "warning: window reaches fewer than 2N + 6 = {} sites beyond k0; moments may feel the truncation",
                    2 * a.shape.order + 6
                );
            }
            if a.csv {
                emit(&forward_csv(&d))?;
            } else {
                emit(&serde_json::to_string(&d)?)?;
            }
        }
        Command::Reconstruct(a) => {
            let data: ForwardData = serde_json::from_str(&read_input(&a.data)?)?;
            let mut report = reconstruct(&data, a.route.into(), a.order)?;
            if let Some(p) = &a.reference {
                report.compare_with(&read_window(p)?)?;
            }
            if a.csv {
                emit(&window_csv(&report.recovered))?;
            } else {
                emit(&serde_json::to_string(&report)?)?;
            }
        }
        Command::Verify(a) => {
            let w1 = read_window(&a.w1)?;
            let w2 = read_window(&a.w2)?;
            let report = uniqueness_check(&w1, &w2, a.k0, a.kind.into(), a.order, a.tol)?;
            emit(&serde_json::to_string(&report)?)?;
            if !report.theorem_holds {
                eprintln!(
                    "data agree to order {} but coefficients to order {}",
                    report.data_agreement_order, report.coefficient_agreement_order
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
