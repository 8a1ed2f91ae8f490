//! On-disk formats owned by the command-line layer: the protocol config
//! file, the calibration fixture, the run manifest and CSV emission.
//!
//! Every file starts with (JSON) or carries (CSV comment line) the format
//! version string.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use weakreal::calibration::{BlochVector, POVMElement};
use weakreal::imperfect::NoiseParams;
use weakreal::protocol::Order;
use weakreal::FORMAT_VERSION;

/// Protocol configuration file: angles, order and optional per-meter noise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub version: String,
    pub psi: f64,
    pub theta: f64,
    #[serde(default = "default_order")]
    pub order: Order,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_a: Option<NoiseParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_b: Option<NoiseParams>,
}

fn default_order() -> Order {
    Order::AB
}

impl ProtocolFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ProtocolFile = serde_json::from_str(&text).map_err(|e| {
            anyhow::anyhow!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            )
        })?;
        if cfg.version != FORMAT_VERSION {
            bail!(
                "{}: version {:?}, expected {FORMAT_VERSION:?}",
                path.display(),
                cfg.version
            );
        }
        Ok(cfg)
    }
}

/// Calibration fixture: preparations, four-outcome measurement, drive
/// direction and strength.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationFixture {
    pub version: String,
    pub preparations: [BlochVector; 3],
    pub povm: [POVMElement; 4],
    pub q: BlochVector,
    pub lambda: f64,
}

impl CalibrationFixture {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading fixture {}", path.display()))?;
        let fixture: CalibrationFixture = serde_json::from_str(&text).map_err(|e| {
            anyhow::anyhow!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            )
        })?;
        if fixture.version != FORMAT_VERSION {
            bail!(
                "{}: version {:?}, expected {FORMAT_VERSION:?}",
                path.display(),
                fixture.version
            );
        }
        Ok(fixture)
    }
}

/// Record of one CLI invocation, written next to file outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: String,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&Path>, seed: Option<u64>, out: &Path) -> Self {
        Self {
            version: FORMAT_VERSION.to_string(),
            command: command.to_string(),
            config: config.map(|p| p.display().to_string()),
            seed,
            output_dir: out.display().to_string(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        fs::write(&path, format!("{}\n", serde_json::to_string_pretty(self)?))
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Write CSV with the version comment line above the header.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = format!("# {FORMAT_VERSION}\n{header}\n");
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(())
}

/// Format a float with full round-trip precision.
pub fn fmt_f64(x: f64) -> String {
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("nan") {
        s.push_str(".0");
    }
    s
}
