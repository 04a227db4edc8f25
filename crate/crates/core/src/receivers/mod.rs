//! MMSE-SIC and joint-decoding receivers.

pub mod filters;
mod pipeline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::CodecError;
use crate::mmse::MmseError;

pub use self::filters::{broadcast_filter, joint_filter, multicast_filter, Observation};
pub use self::pipeline::{
    jd_receive, receive, sic_receive, BroadcastEstimate, DecodedStreams, FrameContext,
    JointReceiver, SicReceiver, SymbolEstimate,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReceiverError {
    #[error(transparent)]
    Mmse(#[from] MmseError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid receiver configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Strategy {
    #[default]
    #[serde(rename = "sic", alias = "SIC")]
    Sic,
    #[serde(rename = "jd", alias = "JD")]
    Jd,
}

/// What the receiver knows about the beamforming matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Knowledge {
    #[default]
    #[serde(rename = "full_b", alias = "FullB")]
    FullB,
    #[serde(rename = "beam_only", alias = "BeamOnly")]
    BeamOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub strategy: Strategy,
    pub knowledge: Knowledge,
    /// Decode, re-encode and subtract the broadcast block instead of the raw
    /// symbol estimates.
    pub feedback: bool,
    pub preeq: bool,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Sic,
            knowledge: Knowledge::FullB,
            feedback: true,
            preeq: true,
        }
    }
}

impl ReceiverConfig {
    pub fn sic(knowledge: Knowledge, feedback: bool, preeq: bool) -> Self {
        Self {
            strategy: Strategy::Sic,
            knowledge,
            feedback,
            preeq,
        }
    }

    pub fn jd(preeq: bool) -> Self {
        Self {
            strategy: Strategy::Jd,
            knowledge: Knowledge::FullB,
            feedback: false,
            preeq,
        }
    }

    pub fn validate(&self) -> Result<(), ReceiverError> {
        if self.strategy == Strategy::Jd {
            if self.feedback {
                return Err(ReceiverError::Config(
                    "joint decoding has no feedback stage".into(),
                ));
            }
            if self.knowledge == Knowledge::BeamOnly {
                return Err(ReceiverError::Config(
                    "joint decoding needs the full beamforming matrix".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.strategy {
            Strategy::Jd => format!("JD{}", if self.preeq { " + pre-eq" } else { "" }),
            Strategy::Sic => {
                let mut s = String::from(match self.knowledge {
                    Knowledge::FullB => "SIC full-B",
                    Knowledge::BeamOnly => "SIC beam-only",
                });
                if self.feedback {
                    s.push_str(" + feedback");
                }
                if self.preeq {
                    s.push_str(" + pre-eq");
                }
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_joint_configs() {
        let mut cfg = ReceiverConfig::jd(true);
        assert!(cfg.validate().is_ok());
        cfg.feedback = true;
        assert!(cfg.validate().is_err());
        cfg.feedback = false;
        cfg.knowledge = Knowledge::BeamOnly;
        assert!(cfg.validate().is_err());
        assert!(ReceiverConfig::sic(Knowledge::BeamOnly, false, true)
            .validate()
            .is_ok());
    }

    #[test]
    fn config_keys() {
        let cfg: ReceiverConfig =
            serde_json::from_str(r#"{"strategy":"jd","feedback":false,"preeq":false}"#).unwrap();
        assert_eq!(cfg, ReceiverConfig::jd(false));
        assert_eq!(
            serde_json::to_string(&ReceiverConfig::default()).unwrap(),
            r#"{"strategy":"sic","knowledge":"full_b","feedback":true,"preeq":true}"#
        );
        assert!(serde_json::from_str::<ReceiverConfig>(r#"{"fedback":true}"#).is_err());
    }
}
