mod commands;
mod doc;
mod error;
mod selftest;
mod svg;

use clap::{Args, Parser, Subcommand};
use doc::{parse_curve_request, parse_hermite_request, CurveRequest, Document, Engine, Point};
use error::{CliError, CliResult};
use serde::Serialize;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "phbs", version, about = "Planar PH B-spline curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a PH curve from its preimage.
    Construct(ConstructArgs),
    /// Offset curves of a constructed curve.
    Offset(OffsetArgs),
    /// Arc length of a constructed curve.
    Arclength(ArclengthArgs),
    /// Solve a G2 Hermite interpolation problem.
    Hermite(HermiteArgs),
    /// Run randomized consistency checks (seed from PH_SPLINE_SEED).
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG drawing.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Samples per curve in the SVG.
    #[arg(long, default_value_t = 512)]
    svg_samples: usize,
}

#[derive(Args)]
struct ConstructArgs {
    /// Curve request JSON; flags below are ignored when given.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// open, clamped or closed
    #[arg(long)]
    mode: Option<String>,
    /// Full preimage knot vector as a JSON array.
    #[arg(long)]
    knots: Option<String>,
    /// Preimage coefficients as a JSON array of [u, v] pairs.
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    r0: Option<String>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EngineArg {
    General,
    Explicit,
}

#[derive(Args)]
struct OffsetArgs {
    /// Curve document or request; stdin when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Signed offset distance; repeat for a family.
    #[arg(long, required = true, allow_hyphen_values = true)]
    h: Vec<f64>,
    /// Samples per offset in the JSON output.
    #[arg(long, default_value_t = 129)]
    samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ArclengthArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Parameter values at which to report the length from the start.
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HermiteArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// "k0min,k0max,k1min,k1max": sample the I3 = 0 boundary of conic A.
    #[arg(long, allow_hyphen_values = true)]
    feasibility_box: Option<String>,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 20)]
    draws: usize,
}

fn read_input(path: &Option<PathBuf>) -> CliResult<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json_arg<T: serde::de::DeserializeOwned>(name: &str, value: &Option<String>) -> CliResult<T> {
    let text = value
        .as_deref()
        .ok_or_else(|| CliError::Input(format!("--{name} is required")))?;
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

fn construct_request(a: &ConstructArgs) -> CliResult<CurveRequest> {
    if a.input.is_some() {
        return parse_curve_request(&read_input(&a.input)?);
    }
    let r0: Point = match &a.r0 {
        Some(_) => json_arg("r0", &a.r0)?,
        None => [0.0, 0.0],
    };
    Ok(CurveRequest {
        mode: a
            .mode
            .clone()
            .ok_or_else(|| CliError::Input("--mode is required".into()))?,
        n: a.n.ok_or_else(|| CliError::Input("--n is required".into()))?,
        mu: json_arg("knots", &a.knots)?,
        z: json_arg("z", &a.z)?,
        r0,
        engine: match a.engine {
            Some(EngineArg::Explicit) => Engine::Explicit,
            _ => Engine::General,
        },
    })
}

fn parse_box(s: &str) -> CliResult<[f64; 4]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("--feasibility-box: {e}")))?;
    match v.as_slice() {
        &[a, b, c, d] if a < b && c < d => Ok([a, b, c, d]),
        _ => Err(CliError::Input(
            "--feasibility-box needs k0min<k0max,k1min<k1max".into(),
        )),
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Construct(a) => {
            let req = construct_request(&a)?;
            let (doc, built) = commands::construct(&req)?;
            emit(&doc, &a.output.out)?;
            if let Some(p) = &a.output.svg {
                std::fs::write(p, commands::construct_svg(&built, a.output.svg_samples))?;
            }
        }
        Command::Offset(a) => {
            let req = parse_curve_request(&read_input(&a.input)?)?;
            let built = commands::build(&req)?;
            let res = commands::offsets(&built, &a.h, a.samples)?;
            if let Some(p) = &a.output.svg {
                let dense = commands::offsets(&built, &a.h, a.output.svg_samples)?;
                std::fs::write(p, commands::offset_svg(&dense))?;
            }
            emit(&Document::new(req, res), &a.output.out)?;
        }
        Command::Arclength(a) => {
            let req = parse_curve_request(&read_input(&a.input)?)?;
            let built = commands::build(&req)?;
            let res = commands::arclength(&built, &a.at)?;
            emit(&Document::new(req, res), &a.out)?;
        }
        Command::Hermite(a) => {
            let req = parse_hermite_request(&read_input(&a.input)?)?;
            let bbox = a.feasibility_box.as_deref().map(parse_box).transpose()?;
            let run = commands::hermite(&req, bbox, a.resolution)?;
            if let Some(p) = &a.output.svg {
                std::fs::write(p, commands::hermite_svg(&req, &run, a.output.svg_samples))?;
            }
            emit(&Document::new(req, run.results), &a.output.out)?;
        }
        Command::Selftest(a) => {
            let seed = match std::env::var("PH_SPLINE_SEED") {
                Ok(s) => s
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| CliError::Input(format!("PH_SPLINE_SEED: {e}")))?,
                Err(_) => 0,
            };
            let report = selftest::run(seed, a.draws);
            emit(&report, &None)?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("phbs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
