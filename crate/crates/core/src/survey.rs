//! Density survey of default-named networks in a war-driving export.
//!
//! Records come from a CSV file (WiGLE exports or anything with SSID and
//! coordinate columns), are filtered by an SSID pattern and binned into a flat
//! lat/lon grid.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use regex::Regex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::keyspace::space_size;
use crate::pipeline::{attack_duration, AttackDuration};

pub const DEFAULT_CELL_DEG: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkRecord {
    pub ssid: String,
    pub latitude: f64,
    pub longitude: f64,
}

impl NetworkRecord {
    pub fn new(ssid: impl Into<String>, latitude: f64, longitude: f64) -> Option<Self> {
        let valid = latitude.is_finite()
            && longitude.is_finite()
            && latitude.abs() <= 90.0
            && longitude.abs() <= 180.0;
        valid.then(|| NetworkRecord {
            ssid: ssid.into(),
            latitude,
            longitude,
        })
    }
}

/// Column names to read; any left `None` are detected from the header.
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub ssid_column: Option<String>,
    pub lat_column: Option<String>,
    pub lon_column: Option<String>,
    pub dedup: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub records: Vec<NetworkRecord>,
    /// Rows dropped for unparsable or out-of-range fields.
    pub skipped: u64,
    /// Rows dropped as exact duplicates (only with `dedup`).
    pub duplicates: u64,
}

const SSID_NAMES: [&str; 2] = ["ssid", "name"];
const LAT_NAMES: [&str; 4] = ["trilat", "currentlatitude", "latitude", "lat"];
const LON_NAMES: [&str; 5] = ["trilong", "currentlongitude", "longitude", "lon", "lng"];

fn find_column(headers: &[String], explicit: Option<&str>, names: &[&str]) -> Result<usize> {
    let wanted: Vec<String> = match explicit {
        Some(name) => vec![name.to_ascii_lowercase()],
        None => names.iter().map(|s| s.to_string()).collect(),
    };
    wanted
        .iter()
        .find_map(|w| headers.iter().position(|h| h == w))
        .ok_or_else(|| {
            Error::Dataset(format!(
                "no column named {} in header [{}]",
                wanted.join("/"),
                headers.join(",")
            ))
        })
}

/// Reads records from CSV. A leading `WigleWifi-` preamble line is skipped.
pub fn load_dataset<R: Read>(reader: R, options: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();

    let mut header = None;
    for row in rows.by_ref() {
        let row = row.map_err(|e| Error::Dataset(e.to_string()))?;
        let first = row.get(0).unwrap_or("");
        if row.len() == 1 && first.trim().is_empty() || first.starts_with("WigleWifi-") {
            continue;
        }
        header = Some(row);
        break;
    }
    let header = header.ok_or_else(|| Error::Dataset("missing header row".into()))?;
    let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let ssid_col = find_column(&names, options.ssid_column.as_deref(), &SSID_NAMES)?;
    let lat_col = find_column(&names, options.lat_column.as_deref(), &LAT_NAMES)?;
    let lon_col = find_column(&names, options.lon_column.as_deref(), &LON_NAMES)?;

    let mut out = Dataset::default();
    let mut seen: HashSet<(String, u64, u64)> = HashSet::new();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(Error::Dataset(e.to_string())),
            Err(_) => {
                out.skipped += 1;
                continue;
            }
        };
        let parsed = (|| {
            let ssid = row.get(ssid_col)?;
            let lat: f64 = row.get(lat_col)?.trim().parse().ok()?;
            let lon: f64 = row.get(lon_col)?.trim().parse().ok()?;
            NetworkRecord::new(ssid, lat, lon)
        })();
        let Some(record) = parsed else {
            out.skipped += 1;
            continue;
        };
        if options.dedup {
            let key = (
                record.ssid.clone(),
                record.latitude.to_bits(),
                record.longitude.to_bits(),
            );
            if !seen.insert(key) {
                out.duplicates += 1;
                continue;
            }
        }
        out.records.push(record);
    }
    Ok(out)
}

/// `UPC` followed by exactly six or seven ASCII digits.
pub fn match_default_ssid(ssid: &str) -> bool {
    match ssid.strip_prefix("UPC") {
        Some(digits) => {
            matches!(digits.len(), 6 | 7) && digits.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

#[derive(Clone, Debug, Default)]
pub enum SsidPattern {
    #[default]
    DefaultUpc,
    /// Anchored regular expression.
    Regex(Regex),
}

impl SsidPattern {
    pub fn parse(pattern: &str) -> Result<Self> {
        Regex::new(&format!("^(?:{pattern})$"))
            .map(SsidPattern::Regex)
            .map_err(|e| Error::Pattern(e.to_string()))
    }

    pub fn matches(&self, ssid: &str) -> bool {
        match self {
            SsidPattern::DefaultUpc => match_default_ssid(ssid),
            SsidPattern::Regex(re) => re.is_match(ssid),
        }
    }
}

impl fmt::Display for SsidPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SsidPattern::DefaultUpc => f.write_str("UPC[0-9]{6,7}"),
            SsidPattern::Regex(re) => {
                let s = re.as_str();
                f.write_str(&s[4..s.len() - 2])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lat_min: f64,
    pub lon_min: f64,
    pub lat_max: f64,
    pub lon_max: f64,
    pub cell_deg: f64,
    rows: usize,
    cols: usize,
}

// Coordinates within this fraction of a cell from an edge count as on it.
const EDGE_SNAP: f64 = 1e-9;

fn cells_along(min: f64, max: f64, cell: f64) -> usize {
    ((max - min) / cell - EDGE_SNAP).ceil().max(1.0) as usize
}

impl GridSpec {
    pub fn new(lat_min: f64, lon_min: f64, lat_max: f64, lon_max: f64, cell_deg: f64) -> Result<Self> {
        let all = [lat_min, lon_min, lat_max, lon_max, cell_deg];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("non-finite value".into()));
        }
        if lat_min >= lat_max || lon_min >= lon_max {
            return Err(Error::Grid("minimum must be below maximum on both axes".into()));
        }
        if cell_deg <= 0.0 {
            return Err(Error::Grid("cell size must be positive".into()));
        }
        let rows = cells_along(lat_min, lat_max, cell_deg);
        let cols = cells_along(lon_min, lon_max, cell_deg);
        if rows.checked_mul(cols).is_none_or(|n| n > 100_000_000) {
            return Err(Error::Grid(format!("{rows}x{cols} cells is too many")));
        }
        Ok(GridSpec {
            lat_min,
            lon_min,
            lat_max,
            lon_max,
            cell_deg,
            rows,
            cols,
        })
    }

    /// Parses `latmin,lonmin,latmax,lonmax`.
    pub fn from_bbox(bbox: &str, cell_deg: f64) -> Result<Self> {
        let v: Vec<f64> = bbox
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Grid(format!("bad bbox `{bbox}`: {e}")))?;
        match v.as_slice() {
            &[a, b, c, d] => GridSpec::new(a, b, c, d, cell_deg),
            _ => Err(Error::Grid(format!("bbox needs 4 values, got {}", v.len()))),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// South-west corner of a cell.
    pub fn cell_origin(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.lat_min + row as f64 * self.cell_deg,
            self.lon_min + col as f64 * self.cell_deg,
        )
    }

    /// Half-open cells; points on the max edge fall into the last cell.
    pub fn cell_of(&self, lat: f64, lon: f64) -> Option<(usize, usize)> {
        if !(self.lat_min..=self.lat_max).contains(&lat) || !(self.lon_min..=self.lon_max).contains(&lon) {
            return None;
        }
        Some((
            axis_index(lat, self.lat_min, self.cell_deg, self.rows),
            axis_index(lon, self.lon_min, self.cell_deg, self.cols),
        ))
    }
}

fn axis_index(v: f64, min: f64, cell: f64, n: usize) -> usize {
    let i = ((v - min) / cell + EDGE_SNAP).floor().max(0.0) as usize;
    i.min(n - 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub counts: Vec<u64>,
    pub total_matches: u64,
    pub total_records: u64,
    pub outside: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCount {
    pub row: usize,
    pub col: usize,
    pub lat: f64,
    pub lon: f64,
    pub count: u64,
}

impl DensityGrid {
    pub fn empty(spec: GridSpec) -> Self {
        DensityGrid {
            spec,
            counts: vec![0; spec.rows * spec.cols],
            total_matches: 0,
            total_records: 0,
            outside: 0,
        }
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.spec.cols + col]
    }

    pub fn add(&mut self, record: &NetworkRecord, pattern: &SsidPattern) {
        self.total_records += 1;
        if !pattern.matches(&record.ssid) {
            return;
        }
        match self.spec.cell_of(record.latitude, record.longitude) {
            Some((r, c)) => {
                self.counts[r * self.spec.cols + c] += 1;
                self.total_matches += 1;
            }
            None => self.outside += 1,
        }
    }

    /// Adds another grid over the same spec.
    pub fn merge(&mut self, other: &DensityGrid) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Grid("cannot merge grids with different layouts".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_matches += other.total_matches;
        self.total_records += other.total_records;
        self.outside += other.outside;
        Ok(())
    }

    /// Non-empty cells, densest first.
    pub fn cells(&self) -> Vec<CellCount> {
        let mut out: Vec<CellCount> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &count)| {
                let (row, col) = (i / self.spec.cols, i % self.spec.cols);
                let (lat, lon) = self.spec.cell_origin(row, col);
                CellCount {
                    row,
                    col,
                    lat,
                    lon,
                    count,
                }
            })
            .collect();
        out.sort_by(|a, b| b.count.cmp(&a.count).then(a.row.cmp(&b.row)).then(a.col.cmp(&b.col)));
        out
    }
}

pub fn aggregate<'a, I>(records: I, grid: GridSpec, pattern: &SsidPattern) -> DensityGrid
where
    I: IntoIterator<Item = &'a NetworkRecord>,
{
    let mut out = DensityGrid::empty(grid);
    for r in records {
        out.add(r, pattern);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub label: Option<String>,
    pub pattern: String,
    pub total_records: u64,
    pub total_matches: u64,
    pub top_cells: Vec<CellCount>,
    pub rate: u64,
    pub keyspace: u64,
    #[serde(skip)]
    pub worst_case: Option<AttackDuration>,
    pub worst_case_secs: Option<f64>,
}

/// Summarizes a grid with the worst-case per-network time to sweep
/// `keyspace` candidates at `rate`.
pub fn report_with_keyspace(
    grid: &DensityGrid,
    pattern: &SsidPattern,
    rate: u64,
    keyspace: u64,
    top_n: usize,
    label: Option<&str>,
) -> Result<SurveyReport> {
    let worst_case = if grid.total_matches > 0 {
        Some(attack_duration(keyspace, rate)?)
    } else if rate == 0 {
        return Err(Error::ZeroRate);
    } else {
        None
    };
    Ok(SurveyReport {
        label: label.map(str::to_string),
        pattern: pattern.to_string(),
        total_records: grid.total_records,
        total_matches: grid.total_matches,
        top_cells: grid.cells().into_iter().take(top_n).collect(),
        rate,
        keyspace,
        worst_case,
        worst_case_secs: worst_case.map(|d| d.as_secs_f64()),
    })
}

/// Report against the eight-uppercase-letter default passphrase space.
pub fn report(
    grid: &DensityGrid,
    pattern: &SsidPattern,
    rate: u64,
    top_n: usize,
    label: Option<&str>,
) -> Result<SurveyReport> {
    let keyspace = space_size(26, 8)?;
    report_with_keyspace(grid, pattern, rate, keyspace, top_n, label)
}

impl fmt::Display for SurveyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            writeln!(f, "area: {label}")?;
        }
        writeln!(f, "pattern: {}", self.pattern)?;
        writeln!(f, "records: {}", self.total_records)?;
        writeln!(f, "matching networks: {}", self.total_matches)?;
        if !self.top_cells.is_empty() {
            writeln!(f, "{:>6} {:>6} {:>11} {:>11} {:>8}", "row", "col", "lat", "lon", "count")?;
            for c in &self.top_cells {
                writeln!(
                    f,
                    "{:>6} {:>6} {:>11.5} {:>11.5} {:>8}",
                    c.row, c.col, c.lat, c.lon, c.count
                )?;
            }
        }
        if let Some(d) = &self.worst_case {
            writeln!(
                f,
                "worst case per network: {d} ({} candidates at {} pwd/s)",
                self.keyspace, self.rate
            )?;
        }
        Ok(())
    }
}
