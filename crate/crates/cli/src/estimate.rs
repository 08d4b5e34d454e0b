use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args};
use serde_json::json;

use wpa2_brute::keyspace::space_size;
use wpa2_brute::pipeline::{
    attack_duration, cluster_rate, find_preset, ideal_rate, parse_device_table, presets,
    simulate_core_batch, ClusterSpec,
};
use wpa2_brute::Charset;

use crate::Output;

/// Theoretical rate of an FPGA cluster and the worst-case time to sweep a space.
#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["devices", "preset", "list_presets"])))]
pub struct EstimateArgs {
    /// Device table: `name clock_mhz cores count` per line.
    #[arg(long)]
    devices: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Print the built-in presets and exit.
    #[arg(long)]
    list_presets: bool,
    #[arg(long, required_unless_present = "list_presets")]
    charset: Option<String>,
    #[arg(long, required_unless_present = "list_presets")]
    length: Option<usize>,
}

fn list(out: Output) -> Result<ExitCode> {
    for p in presets() {
        let rate = cluster_rate(&p.cluster)?;
        if out.json {
            out.record(
                "preset",
                json!({
                    "name": p.name,
                    "description": p.description,
                    "calc_rate": rate,
                    "measured_rate": p.measured_rate,
                }),
            );
        } else {
            println!("{:<16} {:>11} pwd/s  {}", p.name, rate, p.description);
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn run(args: &EstimateArgs, out: Output) -> Result<ExitCode> {
    if args.list_presets {
        return list(out);
    }
    let (cluster, measured): (ClusterSpec, Option<u64>) = match (&args.devices, &args.preset) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cluster =
                parse_device_table(&text).with_context(|| format!("parsing {}", path.display()))?;
            (cluster, None)
        }
        (None, Some(name)) => {
            let p = find_preset(name)?;
            (p.cluster, p.measured_rate)
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let charset = Charset::parse(args.charset.as_deref().unwrap_or_default()).context("bad --charset")?;
    let length = args.length.unwrap_or_default();
    let keyspace = space_size(charset.len(), length)?;

    let total = cluster_rate(&cluster)?;
    let mut simulated = 0.0;
    if !out.json {
        println!(
            "{:<32} {:>5} {:>5} {:>6} {:>12} {:>12}",
            "device", "count", "MHz", "cores", "calc pwd/s", "with refill"
        );
    }
    for (device, count) in cluster.devices.iter().filter(|(_, n)| *n > 0) {
        let rate = ideal_rate(device);
        let sim = simulate_core_batch(device)?;
        simulated += sim.effective_rate * *count as f64;
        if out.json {
            out.record(
                "device",
                json!({
                    "name": device.name,
                    "count": count,
                    "clock_hz": device.clock_hz,
                    "cores": device.cores,
                    "calc_rate": rate,
                    "simulated_rate": sim.effective_rate,
                }),
            );
        } else {
            println!(
                "{:<32} {:>5} {:>5} {:>6} {:>12} {:>12.0}",
                device.name,
                count,
                device.clock_hz as f64 / 1e6,
                device.cores,
                rate,
                sim.effective_rate
            );
        }
    }

    let worst = attack_duration(keyspace, total)?;
    if out.json {
        out.record(
            "estimate",
            json!({
                "calc_rate": total,
                "simulated_rate": simulated,
                "measured_rate": measured,
                "keyspace": keyspace,
                "worst_case_secs": worst.as_secs_f64(),
                "average_secs": worst.as_secs_f64() / 2.0,
            }),
        );
    } else {
        println!("total calc rate   {total} pwd/s");
        println!("with refill       {simulated:.0} pwd/s");
        if let Some(m) = measured {
            println!("measured          {m} pwd/s");
        }
        println!("keyspace          {keyspace} ({}^{length})", charset.len());
        println!("worst case        {worst}");
        let avg = worst.as_secs_f64() / 2.0;
        println!("average           {avg:.1} s ({:.2} h)", avg / 3600.0);
    }
    Ok(ExitCode::SUCCESS)
}
