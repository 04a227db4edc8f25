//! JSON run configuration.
//!
//! Every key is optional; missing keys take the macro-cell defaults. Unknown
//! keys are rejected so typos surface as errors.
//!
//! ```json
//! {
//!   "scenario": { "n_users": 100, "correlation": "low", "seed": 1 },
//!   "beamformer": "dft",
//!   "receiver": { "strategy": "sic", "knowledge": "full_b", "feedback": true, "preeq": true },
//!   "mcs": [0, 3, 7],
//!   "alpha": [0.1, 0.3, 0.5, 0.7, 0.9],
//!   "frames_per_user": 300
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beamforming::{BeamError, BeamformingMatrix};
use crate::channel::{Position, Scenario};
use crate::codec::{Mcs, MCS_TABLE};
use crate::receivers::ReceiverConfig;
use crate::simulation::SweepSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Beams(#[from] BeamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamformerKind {
    #[default]
    Dft,
    Steered,
}

fn default_mcs() -> Vec<u8> {
    MCS_TABLE.iter().map(|m| m.index).collect()
}

fn default_alpha() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub beamformer: BeamformerKind,
    /// Steering angles for the `steered` beamformer, one per antenna.
    pub angles_deg: Option<Vec<f64>>,
    pub receiver: ReceiverConfig,
    pub mcs: Vec<u8>,
    pub alpha: Vec<f64>,
    pub frames_per_user: usize,
    pub symbols_per_block: usize,
    /// Number of user drops pooled by the `snr` command.
    pub drops: usize,
    /// Forced user positions; overrides the random drop when present.
    pub users: Option<Vec<Position>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            beamformer: BeamformerKind::Dft,
            angles_deg: None,
            receiver: ReceiverConfig::default(),
            mcs: default_mcs(),
            alpha: default_alpha(),
            frames_per_user: 300,
            symbols_per_block: 256,
            drops: 50,
            users: None,
        }
    }
}

impl SimConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: display.clone(),
            source,
        })?;
        Self::from_json(&text, &display)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario.validate().map_err(ConfigError::Invalid)?;
        self.receiver
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.mcs.is_empty() {
            return Err(ConfigError::Invalid("mcs list is empty".into()));
        }
        if let Some(i) = self.mcs.iter().find(|&&i| Mcs::from_index(i).is_none()) {
            return Err(ConfigError::Invalid(format!(
                "mcs index {i} is not in the table (0..{})",
                MCS_TABLE.len() - 1
            )));
        }
        if self.alpha.is_empty() {
            return Err(ConfigError::Invalid("alpha list is empty".into()));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(ConfigError::Invalid(format!("alpha {a} is outside [0, 1]")));
        }
        if self.frames_per_user == 0 || self.symbols_per_block == 0 || self.drops == 0 {
            return Err(ConfigError::Invalid(
                "frames_per_user, symbols_per_block and drops must be positive".into(),
            ));
        }
        if let Some(users) = &self.users {
            if users.is_empty() {
                return Err(ConfigError::Invalid("users list is empty".into()));
            }
            if let Some(u) = users
                .iter()
                .find(|u| !(u.distance_m >= 0.0 && u.distance_m <= self.scenario.cell_radius_m))
            {
                return Err(ConfigError::Invalid(format!(
                    "user distance {} m is outside the cell",
                    u.distance_m
                )));
            }
        }
        match (self.beamformer, &self.angles_deg) {
            (BeamformerKind::Steered, None) => {
                return Err(ConfigError::Invalid(
                    "steered beamformer needs angles_deg".into(),
                ))
            }
            (BeamformerKind::Steered, Some(a)) if a.len() != self.scenario.n_t => {
                return Err(ConfigError::Invalid(format!(
                    "angles_deg has {} entries but n_t is {}",
                    a.len(),
                    self.scenario.n_t
                )))
            }
            (BeamformerKind::Dft, Some(_)) => {
                return Err(ConfigError::Invalid(
                    "angles_deg is only used by the steered beamformer".into(),
                ))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn beams(&self) -> Result<BeamformingMatrix, ConfigError> {
        Ok(match (self.beamformer, &self.angles_deg) {
            (BeamformerKind::Steered, Some(angles)) => BeamformingMatrix::steered(angles)?,
            _ => BeamformingMatrix::dft(self.scenario.n_t)?,
        })
    }

    pub fn mcs_list(&self) -> Vec<Mcs> {
        self.mcs
            .iter()
            .filter_map(|&i| Mcs::from_index(i))
            .collect()
    }

    pub fn sweep_spec(&self, seed: u64) -> Result<SweepSpec, ConfigError> {
        Ok(SweepSpec {
            scenario: Scenario {
                seed,
                ..self.scenario.clone()
            },
            beams: self.beams()?,
            receiver: self.receiver,
            mcs: self.mcs_list(),
            alphas: self.alpha.clone(),
            frames_per_user: self.frames_per_user,
            symbols_per_block: self.symbols_per_block,
            users: self.users.clone(),
            seed,
        })
    }
}
