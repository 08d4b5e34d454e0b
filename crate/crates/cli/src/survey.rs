use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use wpa2_brute::survey::{
    aggregate, load_dataset, report, GridSpec, LoadOptions, SsidPattern, SurveyReport,
    DEFAULT_CELL_DEG,
};

use crate::Output;

/// Count default-SSID networks per grid cell in a wardriving CSV export.
#[derive(Args)]
pub struct SurveyArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// latmin,lonmin,latmax,lonmax
    #[arg(long, allow_hyphen_values = true)]
    bbox: String,
    /// Cell edge in degrees.
    #[arg(long, default_value_t = DEFAULT_CELL_DEG)]
    cell: f64,
    /// Anchored regular expression for SSIDs; UPC plus 6 or 7 digits by default.
    #[arg(long)]
    pattern: Option<String>,
    /// Attack rate in pwd/s for the per-network worst case over 26^8 candidates.
    #[arg(long)]
    rate: Option<u64>,
    /// Densest cells to list.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Name printed above the summary.
    #[arg(long)]
    label: Option<String>,
    /// Drop rows repeating an earlier SSID and position.
    #[arg(long)]
    dedup: bool,
    #[arg(long)]
    ssid_column: Option<String>,
    #[arg(long)]
    lat_column: Option<String>,
    #[arg(long)]
    lon_column: Option<String>,
}

pub fn run(args: &SurveyArgs, out: Output) -> Result<ExitCode> {
    let grid = GridSpec::from_bbox(&args.bbox, args.cell)?;
    let pattern = match &args.pattern {
        Some(p) => SsidPattern::parse(p)?,
        None => SsidPattern::DefaultUpc,
    };
    let options = LoadOptions {
        ssid_column: args.ssid_column.clone(),
        lat_column: args.lat_column.clone(),
        lon_column: args.lon_column.clone(),
        dedup: args.dedup,
    };
    let file = File::open(&args.dataset).with_context(|| format!("opening {}", args.dataset.display()))?;
    let data = load_dataset(file, &options).with_context(|| format!("reading {}", args.dataset.display()))?;
    if data.skipped > 0 {
        eprintln!("warning: skipped {} invalid rows", data.skipped);
    }
    let density = aggregate(&data.records, grid, &pattern);

    let summary = match args.rate {
        Some(rate) => report(&density, &pattern, rate, args.top, args.label.as_deref())?,
        None => SurveyReport {
            label: args.label.clone(),
            pattern: pattern.to_string(),
            total_records: density.total_records,
            total_matches: density.total_matches,
            top_cells: density.cells().into_iter().take(args.top).collect(),
            rate: 0,
            keyspace: 0,
            worst_case: None,
            worst_case_secs: None,
        },
    };

    if out.json {
        for c in density.cells() {
            out.record("cell", serde_json::to_value(c)?);
        }
        let mut value = serde_json::to_value(&summary)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("top_cells");
            if args.rate.is_none() {
                map.remove("rate");
                map.remove("keyspace");
            }
            map.insert("skipped".into(), json!(data.skipped));
            map.insert("duplicates".into(), json!(data.duplicates));
            map.insert("outside".into(), json!(density.outside));
            map.insert("rows".into(), json!(grid.rows()));
            map.insert("cols".into(), json!(grid.cols()));
        }
        out.record("survey", value);
    } else {
        println!("grid: {} x {} cells of {} deg", grid.rows(), grid.cols(), grid.cell_deg);
        print!("{summary}");
        if density.outside > 0 {
            println!("matching networks outside the box: {}", density.outside);
        }
    }
    Ok(ExitCode::SUCCESS)
}
