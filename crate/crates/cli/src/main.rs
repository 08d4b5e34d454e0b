mod attack;
mod estimate;
mod selftest;
mod survey;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use wpa2_brute::handshake::{generate_capture_with, HandshakeMessage};
use wpa2_brute::{parse_capture, verify_candidate, HandshakeCapture};

/// Brute-force WPA2-Personal handshakes and model the hardware that does it.
#[derive(Parser)]
#[command(name = "wpa2-brute", version, about)]
struct Cli {
    /// Emit one JSON record per line instead of tables.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Attack(attack::AttackArgs),
    Estimate(estimate::EstimateArgs),
    Verify(VerifyArgs),
    Generate(GenerateArgs),
    Selftest,
    Survey(survey::SurveyArgs),
}

/// Check one password against a capture. Exits 0 on a match, 1 otherwise.
#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    capture: PathBuf,
    #[arg(long)]
    password: String,
}

/// Write a synthetic capture for a known password.
#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    password: String,
    #[arg(long)]
    ssid: String,
    /// Seeds the MAC addresses and nonces.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Handshake message carrying the MIC (2 or 4).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(2..=4))]
    message: u8,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Where results go: aligned text for people, JSON lines for programs.
#[derive(Clone, Copy)]
pub struct Output {
    pub json: bool,
}

impl Output {
    /// Prints `value` as one JSON line tagged with `kind`.
    pub fn record(&self, kind: &str, value: Value) {
        let mut value = value;
        if let Value::Object(map) = &mut value {
            map.insert("record".into(), Value::String(kind.into()));
        }
        println!("{value}");
    }
}

pub fn read_capture(path: &Path) -> Result<HandshakeCapture> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_capture(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verify(args: &VerifyArgs, out: Output) -> Result<ExitCode> {
    let capture = read_capture(&args.capture)?;
    let (ok, cost) = verify_candidate(&capture, args.password.as_bytes())?;
    if out.json {
        out.record(
            "verify",
            serde_json::json!({
                "ssid": capture.ssid_display(),
                "match": ok,
                "sha1_compressions": cost.get(),
            }),
        );
    } else {
        let verdict = if ok { "match" } else { "no match" };
        println!("{verdict} for {} ({cost} SHA1 compressions)", capture.ssid_display());
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn generate(args: &GenerateArgs, out: Output) -> Result<ExitCode> {
    let message = match args.message {
        2 => HandshakeMessage::Two,
        4 => HandshakeMessage::Four,
        m => anyhow::bail!("no MIC-carrying handshake message {m}; use 2 or 4"),
    };
    let capture = generate_capture_with(
        args.password.as_bytes(),
        args.ssid.as_bytes(),
        args.seed,
        message,
    )?;
    let text = capture.to_text();
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            if out.json {
                out.record("generate", serde_json::json!({ "path": path.display().to_string() }));
            } else {
                println!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = Output { json: cli.json };
    match &cli.command {
        Command::Attack(args) => attack::run(args, out),
        Command::Estimate(args) => estimate::run(args, out),
        Command::Verify(args) => verify(args, out),
        Command::Generate(args) => generate(args, out),
        Command::Selftest => selftest::run(out),
        Command::Survey(args) => survey::run(args, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
