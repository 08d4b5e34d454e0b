//! Throughput model of a fabric of fully pipelined SHA1 cores.
//!
//! A core retires one SHA1 compression per clock once its pipeline is full, so
//! the steady-state candidate rate is `clock * cores / compressions_per_candidate`.
//! [`simulate_core_batch`] steps one core through a batch cycle by cycle to
//! expose the cost of refilling the pipeline between batches.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Compressions per candidate: 16,386 for the PMK, 5 for the KCK, 5 for the MIC.
pub const DEFAULT_ITERS_PER_CANDIDATE: u64 = 16_396;
/// 80 round stages plus buffer, initiate and add.
pub const DEFAULT_PIPELINE_DEPTH: u32 = 83;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviceSpec {
    pub name: String,
    pub clock_hz: u64,
    pub cores: u32,
    pub pipeline_depth: u32,
    pub iters_per_candidate: u64,
}

impl DeviceSpec {
    pub fn new(name: impl Into<String>, clock_hz: u64, cores: u32) -> Result<Self> {
        let spec = DeviceSpec {
            name: name.into(),
            clock_hz,
            cores,
            pipeline_depth: DEFAULT_PIPELINE_DEPTH,
            iters_per_candidate: DEFAULT_ITERS_PER_CANDIDATE,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_mhz(name: impl Into<String>, mhz: u64, cores: u32) -> Result<Self> {
        Self::new(name, mhz * 1_000_000, cores)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clock_hz == 0 {
            return Err(Error::DeviceSpec(format!("{}: clock must be positive", self.name)));
        }
        if self.cores == 0 {
            return Err(Error::DeviceSpec(format!("{}: needs at least one core", self.name)));
        }
        if self.pipeline_depth == 0 {
            return Err(Error::DeviceSpec(format!("{}: pipeline depth must be positive", self.name)));
        }
        if self.iters_per_candidate == 0 {
            return Err(Error::DeviceSpec(format!(
                "{}: compressions per candidate must be positive",
                self.name
            )));
        }
        Ok(())
    }

    /// Unfloored steady-state rate in candidates per second.
    pub fn exact_rate(&self) -> Ratio<u128> {
        Ratio::new(
            self.clock_hz as u128 * self.cores as u128,
            self.iters_per_candidate as u128,
        )
    }
}

/// Steady-state passwords per second, floored.
pub fn ideal_rate(spec: &DeviceSpec) -> u64 {
    (spec.clock_hz as u128 * spec.cores as u128 / spec.iters_per_candidate as u128) as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterSpec {
    pub devices: Vec<(DeviceSpec, u32)>,
}

impl ClusterSpec {
    pub fn new(devices: Vec<(DeviceSpec, u32)>) -> Result<Self> {
        if devices.is_empty() {
            return Err(Error::EmptyCluster);
        }
        for (d, _) in &devices {
            d.validate()?;
        }
        Ok(ClusterSpec { devices })
    }

    pub fn single(device: DeviceSpec) -> Self {
        ClusterSpec {
            devices: vec![(device, 1)],
        }
    }
}

/// Sum of per-device floored rates times device counts.
pub fn cluster_rate(cluster: &ClusterSpec) -> Result<u64> {
    let mut live = cluster.devices.iter().filter(|(_, count)| *count > 0).peekable();
    if live.peek().is_none() {
        return Err(Error::EmptyCluster);
    }
    Ok(live.map(|(d, count)| ideal_rate(d) * *count as u64).sum())
}

/// A named hardware configuration plus its reported measured rate,
/// where one exists.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub cluster: ClusterSpec,
    pub measured_rate: Option<u64>,
}

fn preset(
    name: &'static str,
    description: &'static str,
    mhz: u64,
    cores: u32,
    count: u32,
    measured_rate: Option<u64>,
) -> Preset {
    let device = DeviceSpec::with_mhz(description, mhz, cores).expect("valid preset");
    Preset {
        name,
        description,
        cluster: ClusterSpec {
            devices: vec![(device, count)],
        },
        measured_rate,
    }
}

/// The published FPGA configurations, at their actual (not tool) clocks.
pub fn presets() -> Vec<Preset> {
    vec![
        preset("ztex-1.15y-fpga", "Ztex 1.15y, one XC6SLX150T-3", 180, 2, 1, Some(21_871)),
        preset("ztex-1.15y", "Ztex 1.15y, 4x XC6SLX150T-3", 180, 8, 1, Some(87_461)),
        preset("ztex-1.15y-x9", "9x Ztex 1.15y, 36x XC6SLX150T-3", 180, 72, 1, Some(741_200)),
        preset("ztex-2.16", "Ztex 2.16, XC7A200T-2", 180, 8, 1, Some(87_737)),
        preset("xc7k410t", "XC7K410T-3", 216, 16, 1, None),
        preset("sc5-m505-48", "XC7K410T-3", 216, 16, 48, None),
    ]
}

pub fn find_preset(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Parses a device table: `name clock_mhz cores count` per line, `#` comments.
pub fn parse_device_table(text: &str) -> Result<ClusterSpec> {
    let mut devices = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::DeviceTable {
            line: idx + 1,
            reason,
        };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, got {}", cols.len())));
        }
        let mhz: f64 = cols[1]
            .parse()
            .map_err(|_| err(format!("bad clock `{}`", cols[1])))?;
        if !mhz.is_finite() || mhz <= 0.0 {
            return Err(err(format!("clock must be positive, got {mhz}")));
        }
        let cores: u32 = cols[2]
            .parse()
            .map_err(|_| err(format!("bad core count `{}`", cols[2])))?;
        let count: u32 = cols[3]
            .parse()
            .map_err(|_| err(format!("bad device count `{}`", cols[3])))?;
        let clock_hz = (mhz * 1e6).round() as u64;
        let device = DeviceSpec::new(cols[0], clock_hz, cores).map_err(|e| err(e.to_string()))?;
        devices.push((device, count));
    }
    ClusterSpec::new(devices)
}

/// Worst-case time to sweep a keyspace, held as an exact number of seconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AttackDuration {
    seconds: Ratio<u128>,
}

impl AttackDuration {
    pub fn seconds(&self) -> Ratio<u128> {
        self.seconds
    }

    pub fn hours(&self) -> Ratio<u128> {
        self.seconds / 3600
    }

    pub fn days(&self) -> Ratio<u128> {
        self.seconds / 86_400
    }

    pub fn as_secs_f64(&self) -> f64 {
        ratio_f64(self.seconds)
    }
}

impl fmt::Display for AttackDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.as_secs_f64();
        write!(f, "{s:.1} s ({:.2} h, {:.2} days)", s / 3600.0, s / 86_400.0)
    }
}

pub fn ratio_f64(r: Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn attack_duration(keyspace_size: u64, rate: u64) -> Result<AttackDuration> {
    if rate == 0 {
        return Err(Error::ZeroRate);
    }
    Ok(AttackDuration {
        seconds: Ratio::new(keyspace_size as u128, rate as u128),
    })
}

pub fn speedup_vs_reference(rate: u64, reference_rate: u64) -> Result<f64> {
    if reference_rate == 0 {
        return Err(Error::ZeroRate);
    }
    Ok(rate as f64 / reference_rate as f64)
}

/// Rate after applying an observed efficiency (measured over calculated).
pub fn derated(rate: u64, efficiency: f64) -> Result<f64> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::DeviceSpec(format!("efficiency {efficiency} outside (0, 1]")));
    }
    Ok(rate as f64 * efficiency)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSimulation {
    /// Cycles from the first fill to the restart of the next fill.
    pub batch_cycles: u64,
    /// Candidates completed per batch (one per pipeline stage).
    pub candidates: u64,
    /// Compressions retired per batch.
    pub compressions: u64,
    /// Cycles in which the pipeline input stage held no work.
    pub idle_cycles: u64,
    /// Candidates per second across all cores.
    pub effective_rate: f64,
    #[serde(skip)]
    pub effective_rate_exact: Ratio<u128>,
}

/// `depth * iters` compressions plus `depth` cycles spent refilling.
pub fn batch_cycles(spec: &DeviceSpec) -> u64 {
    let depth = spec.pipeline_depth as u64;
    spec.iters_per_candidate * depth + depth
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Controller {
    Fill,
    Run,
    Restart,
}

/// Steps one core through a single batch.
///
/// The controller fills the pipeline with one candidate per cycle until every
/// stage holds one, lets each candidate circulate until it has retired its
/// compressions, waits for the last one to drain and spends one cycle
/// restarting before the next fill. All cores run the same schedule.
pub fn simulate_core_batch(spec: &DeviceSpec) -> Result<BatchSimulation> {
    spec.validate()?;
    let depth = spec.pipeline_depth as usize;
    let iters = spec.iters_per_candidate;

    // slot[c % depth] holds the candidate that entered stage 0 at cycle c;
    // it is back at stage 0 exactly `depth` cycles later.
    let mut slot: Vec<u64> = vec![0; depth];
    let mut state = Controller::Fill;
    let mut injected = 0usize;
    let mut finished = 0usize;
    let mut compressions = 0u64;
    let mut idle = 0u64;
    let mut cycle = 0u64;

    loop {
        let i = (cycle % depth as u64) as usize;
        if slot[i] > 0 && cycle >= depth as u64 {
            // the occupant has made a full pass since it last entered
            slot[i] -= 1;
            compressions += 1;
            if slot[i] == 0 {
                finished += 1;
            }
        }
        match state {
            Controller::Fill => {
                slot[i] = iters;
                injected += 1;
                if injected == depth {
                    state = Controller::Run;
                }
            }
            Controller::Run => {
                if slot[i] == 0 {
                    idle += 1;
                }
                if finished == depth {
                    state = Controller::Restart;
                }
            }
            Controller::Restart => {
                break;
            }
        }
        cycle += 1;
    }
    // the draining cycles were counted idle while the last candidate finished
    let batch = cycle;

    let candidates = depth as u64;
    let exact = Ratio::new(
        candidates as u128 * spec.clock_hz as u128 * spec.cores as u128,
        batch as u128,
    );
    Ok(BatchSimulation {
        batch_cycles: batch,
        candidates,
        compressions,
        idle_cycles: idle,
        effective_rate: ratio_f64(exact),
        effective_rate_exact: exact,
    })
}
