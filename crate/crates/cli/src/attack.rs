use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::Args;

use wpa2_brute::orchestrator::DEFAULT_BLOCK_SIZE;
use wpa2_brute::pool::ProgressSnapshot;
use wpa2_brute::{run_attack, Charset, PasswordSpace, SearchConfig};

use crate::{read_capture, Output};

/// Sweep a fixed-length password space against a capture.
///
/// Exits 0 when the password is found, 1 when the space is exhausted and 2 on
/// errors.
#[derive(Args)]
pub struct AttackArgs {
    #[arg(long)]
    capture: PathBuf,
    /// Symbols to try: literal characters plus ?u ?l ?d ?h classes (?? for `?`).
    #[arg(long)]
    charset: String,
    #[arg(long)]
    length: usize,
    /// First password to try; the space's first password by default.
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
    block_size: u64,
    /// Worker threads; all available cores by default.
    #[arg(long)]
    workers: Option<usize>,
    /// Stop after this many candidates.
    #[arg(long)]
    limit: Option<u64>,
    /// Seconds between progress reports.
    #[arg(long, default_value_t = 5.0)]
    progress: f64,
}

pub fn run(args: &AttackArgs, out: Output) -> Result<ExitCode> {
    let capture = read_capture(&args.capture)?;
    let charset = Charset::parse(&args.charset).context("bad --charset")?;
    let mut space = PasswordSpace::new(charset, args.length, args.start.as_deref().map(str::as_bytes))?;
    if let Some(limit) = args.limit {
        space = space.with_limit(limit);
    }
    let mut config = SearchConfig {
        block_size: args.block_size,
        ..Default::default()
    };
    if let Some(w) = args.workers {
        config.workers = w;
    }
    anyhow::ensure!(args.progress > 0.0, "--progress must be positive");
    config.progress_interval = Duration::from_secs_f64(args.progress);

    if !out.json {
        eprintln!(
            "attacking {} over {} candidates from {} with {} workers",
            capture.ssid_display(),
            space.candidate_count(),
            String::from_utf8_lossy(space.start_password()),
            config.workers
        );
    }
    let mut report = |snap: &ProgressSnapshot| {
        if out.json {
            out.record("progress", serde_json::to_value(snap).unwrap_or_default());
        } else {
            eprintln!(
                "{:6.2}% {}/{} candidates, {} pwd/s, eta {}",
                snap.fraction * 100.0,
                snap.candidates_done,
                snap.candidates_total,
                snap.rate.map_or("–".to_string(), |r| format!("{r:.0}")),
                snap.eta_display()
            );
        }
    };
    let outcome = run_attack(&capture, &space, &config, Some(&mut report))?;

    if out.json {
        out.record("outcome", serde_json::to_value(&outcome)?);
    } else {
        match (&outcome.password, outcome.offset) {
            (Some(pw), Some(offset)) => {
                println!("found    {}", String::from_utf8_lossy(pw));
                println!("offset   {offset}");
            }
            _ => println!("exhausted without a match"),
        }
        println!("tested   {}", outcome.candidates_tested);
        println!("elapsed  {:.2} s", outcome.elapsed_secs);
        println!("rate     {:.1} pwd/s", outcome.rate);
        println!("sha1     {:.2} M compressions/s", outcome.compression_rate / 1e6);
    }
    Ok(if outcome.found { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
