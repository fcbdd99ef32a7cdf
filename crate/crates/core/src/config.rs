//! JSON run configuration. Every section is optional and unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cordic::CordicSettings;
use crate::dse::{PipelineConfig, QualityConstraints, SweepPlan};
use crate::music::MusicConfig;
use crate::ofdm::{OfdmConfig, RadarScene};

/// Adder used when the configuration names none.
pub const DEFAULT_ADDER: &str = "exact:16";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    /// The message carries the line and column.
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("set either `adder` or `adders`, not both")]
    AdderConflict,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub ofdm: OfdmConfig,
    pub scene: RadarScene,
    pub music: MusicConfig,
    pub cordic: CordicSettings,
    /// Adder spec for single runs.
    pub adder: Option<String>,
    /// Adder specs for sweeps.
    pub adders: Option<Vec<String>>,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Vec<f64>,
    pub runs: u64,
    pub seed: u64,
    pub constraints: Option<QualityConstraints>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let p = SweepPlan::default();
        SweepSection {
            snr_db: p.snr_db,
            runs: p.runs,
            seed: p.seed,
            constraints: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Report directory for sweeps.
    pub dir: PathBuf,
    /// Pseudospectrum CSV for single runs.
    pub spectrum_csv: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("music-lite-out"),
            spectrum_csv: None,
        }
    }
}

impl CliConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: CliConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if cfg.adder.is_some() && cfg.adders.is_some() {
            return Err(ConfigError::AdderConflict);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            ofdm: self.ofdm.clone(),
            scene: self.scene.clone(),
            music: self.music.clone(),
            cordic: self.cordic,
        }
    }

    /// `adder`, else the first of `adders`, else [`DEFAULT_ADDER`].
    pub fn single_adder(&self) -> String {
        self.adder
            .clone()
            .or_else(|| self.adders.as_ref().and_then(|a| a.first().cloned()))
            .unwrap_or_else(|| DEFAULT_ADDER.to_string())
    }

    /// `adders`, else `[adder]`, else the default sweep list.
    pub fn sweep_plan(&self) -> SweepPlan {
        let adders = match (&self.adders, &self.adder) {
            (Some(a), _) => a.clone(),
            (None, Some(a)) => vec![a.clone()],
            (None, None) => SweepPlan::default().adders,
        };
        SweepPlan {
            adders,
            snr_db: self.sweep.snr_db.clone(),
            runs: self.sweep.runs,
            seed: self.sweep.seed,
        }
    }
}
