//! Run configuration: a flat `key = value` file, overridable from the command line.
//!
//! Recognized keys:
//!
//! | key               | value                                              |
//! |-------------------|----------------------------------------------------|
//! | `seed`            | unsigned integer                                   |
//! | `total`           | mean fourfold events per table (`0` = exact mode)  |
//! | `visibility`      | real in `[0, 1]`                                   |
//! | `qber_target`     | QBER emulated through per-table visibility         |
//! | `noise_plates`    | comma-separated plates, e.g. `HWP 59, QWP 13.5`    |
//! | `noise_pauli`     | eight reals: re/im of `a_id, a_z, a_y, a_x`        |
//! | `noise_haar_seed` | unsigned integer                                   |
//! | `format`          | `csv` or `json`                                    |
//! | `out`             | output path (stdout when absent)                   |
//!
//! At most one `noise_*` key may appear; without one the reference plates
//! `HWP 59, QWP 13.5` are used.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use dfq::optics::{haar_u2, reference_noise_plates, unitary_from_pauli, waveplate_channel};
use dfq::{Operator, PauliCoefficients, SeedStream, WaveplateSetting, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => bail!("unknown output format {other:?} (expected csv or json)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    Plates(Vec<WaveplateSetting>),
    Pauli(PauliCoefficients),
    Haar(u64),
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Plates(reference_noise_plates())
    }
}

impl NoiseSpec {
    pub fn unitary(&self) -> Result<Operator> {
        Ok(match self {
            NoiseSpec::Plates(plates) => waveplate_channel(plates)?,
            NoiseSpec::Pauli(coeffs) => unitary_from_pauli(coeffs)?,
            NoiseSpec::Haar(seed) => haar_u2(&mut SeedStream::new(*seed)),
        })
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Plates(plates) => {
                let names: Vec<String> = plates.iter().map(|p| p.to_string()).collect();
                write!(f, "plates[{}]", names.join(", "))
            }
            NoiseSpec::Pauli(c) => {
                write!(f, "pauli[id={} z={} y={} x={}]", c.identity, c.z, c.y, c.x)
            }
            NoiseSpec::Haar(seed) => write!(f, "haar[seed={seed}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Visibility {
    Fixed(f64),
    /// Chosen per table so that white noise alone produces this QBER.
    FromQber(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub noise: NoiseSpec,
    pub visibility: Visibility,
    pub total_expected: f64,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            noise: NoiseSpec::default(),
            visibility: Visibility::Fixed(1.0),
            total_expected: 1000.0,
            seed: 0,
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub total: Option<f64>,
    pub visibility: Option<f64>,
    pub qber_target: Option<f64>,
    pub noise_hwp: Option<f64>,
    pub noise_qwp: Option<f64>,
    pub haar_seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

const KEYS: [&str; 9] = [
    "seed",
    "total",
    "visibility",
    "qber_target",
    "noise_plates",
    "noise_pauli",
    "noise_haar_seed",
    "format",
    "out",
];

/// Parses a config file body into its raw key/value map.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", number + 1))?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            bail!("line {}: unknown key {key:?}", number + 1);
        }
        if pairs
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            bail!("line {}: duplicate key {key:?}", number + 1);
        }
    }
    Ok(pairs)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow!("invalid value {value:?} for {key}"))
}

fn parse_plates(value: &str) -> Result<Vec<WaveplateSetting>> {
    let plates = value
        .split(',')
        .map(|p| p.trim().parse::<WaveplateSetting>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("invalid noise_plates {value:?}"))?;
    if plates.is_empty() {
        bail!("noise_plates is empty");
    }
    Ok(plates)
}

fn parse_pauli(value: &str) -> Result<PauliCoefficients> {
    let nums: Vec<f64> = value
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value("noise_pauli", s))
        .collect::<Result<_>>()?;
    if nums.len() != 8 {
        bail!("noise_pauli needs 8 numbers, found {}", nums.len());
    }
    let pair = |i: usize| C64::new(nums[2 * i], nums[2 * i + 1]);
    Ok(PauliCoefficients {
        identity: pair(0),
        z: pair(1),
        y: pair(2),
        x: pair(3),
    })
}

fn check_visibility(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        bail!("visibility {v} outside [0, 1]");
    }
    Ok(v)
}

fn check_qber(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        bail!("qber_target {q} outside [0, 1)");
    }
    Ok(q)
}

fn check_total(t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        bail!("total {t} must be a finite nonnegative number");
    }
    Ok(t)
}

impl RunConfig {
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let noise_keys: Vec<&str> = ["noise_plates", "noise_pauli", "noise_haar_seed"]
            .into_iter()
            .filter(|k| pairs.contains_key(*k))
            .collect();
        if noise_keys.len() > 1 {
            bail!(
                "exactly one noise specification allowed, found {}",
                noise_keys.join(" and ")
            );
        }
        if pairs.contains_key("visibility") && pairs.contains_key("qber_target") {
            bail!("visibility and qber_target are mutually exclusive");
        }
        for (key, value) in pairs {
            match key.as_str() {
                "seed" => cfg.seed = parse_value(key, value)?,
                "total" => cfg.total_expected = check_total(parse_value(key, value)?)?,
                "visibility" => {
                    cfg.visibility = Visibility::Fixed(check_visibility(parse_value(key, value)?)?)
                }
                "qber_target" => {
                    cfg.visibility = Visibility::FromQber(check_qber(parse_value(key, value)?)?)
                }
                "noise_plates" => cfg.noise = NoiseSpec::Plates(parse_plates(value)?),
                "noise_pauli" => cfg.noise = NoiseSpec::Pauli(parse_pauli(value)?),
                "noise_haar_seed" => cfg.noise = NoiseSpec::Haar(parse_value(key, value)?),
                "format" => cfg.format = value.parse()?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                _ => unreachable!("keys are validated by parse_pairs"),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_pairs(&parse_pairs(&text)?)
            .with_context(|| format!("in config {}", path.display()))
    }

    /// Loads the optional file, then applies command-line overrides.
    pub fn resolve(path: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply(o)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(t) = o.total {
            self.total_expected = check_total(t)?;
        }
        match (o.visibility, o.qber_target) {
            (Some(_), Some(_)) => bail!("--visibility and --qber-target are mutually exclusive"),
            (Some(v), None) => self.visibility = Visibility::Fixed(check_visibility(v)?),
            (None, Some(q)) => self.visibility = Visibility::FromQber(check_qber(q)?),
            (None, None) => {}
        }
        let plate_flags = o.noise_hwp.is_some() || o.noise_qwp.is_some();
        if plate_flags && o.haar_seed.is_some() {
            bail!("exactly one noise specification allowed: waveplate flags and --haar-seed given");
        }
        if plate_flags {
            let mut plates = Vec::new();
            if let Some(a) = o.noise_hwp {
                plates.push(WaveplateSetting::hwp(a)?);
            }
            if let Some(a) = o.noise_qwp {
                plates.push(WaveplateSetting::qwp(a)?);
            }
            self.noise = NoiseSpec::Plates(plates);
        }
        if let Some(seed) = o.haar_seed {
            self.noise = NoiseSpec::Haar(seed);
        }
        if let Some(f) = o.format {
            self.format = f;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        Ok(())
    }
}
