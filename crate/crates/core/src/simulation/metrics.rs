//! Packet error rate, coverage and SNR distribution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("group has no users")]
    EmptyGroup,
    #[error("PER needs at least one frame")]
    NoFrames,
    #[error("broadcast and multicast records cover different users")]
    UserSetMismatch,
    #[error("SNR distribution needs at least one value")]
    NoSamples,
}

/// Outcome of one user in one (MCS, α) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub user_id: usize,
    /// One-based group (beam) index.
    pub group_k: usize,
    pub mcs_index: u8,
    pub alpha: f64,
    pub frames: usize,
    pub bc_errors: usize,
    pub mc_errors: usize,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Broadcast,
    Multicast,
}

impl TrialRecord {
    pub fn errors(&self, stream: Stream) -> usize {
        match stream {
            Stream::Broadcast => self.bc_errors,
            Stream::Multicast => self.mc_errors,
        }
    }

    pub fn in_outage(&self, stream: Stream, threshold: f64) -> Result<bool, MetricError> {
        Ok(per(self.errors(stream), self.frames)? > threshold)
    }
}

pub fn per(errors: usize, frames: usize) -> Result<f64, MetricError> {
    if frames == 0 {
        return Err(MetricError::NoFrames);
    }
    Ok(errors as f64 / frames as f64)
}

/// A user is in outage when its PER is strictly above the threshold.
pub fn is_outage(per: f64, threshold: f64) -> bool {
    per > threshold
}

fn percent(kept: usize, total: usize) -> f64 {
    100.0 * kept as f64 / total as f64
}

/// `100·(1 − N'/N)` for one stream of one group.
pub fn coverage(
    records: &[TrialRecord],
    stream: Stream,
    threshold: f64,
) -> Result<f64, MetricError> {
    if records.is_empty() {
        return Err(MetricError::EmptyGroup);
    }
    let mut in_outage = 0;
    for r in records {
        in_outage += r.in_outage(stream, threshold)? as usize;
    }
    Ok(percent(records.len() - in_outage, records.len()))
}

/// Percentage of users with neither stream in outage. `multicast` and
/// `broadcast` must describe the same users.
pub fn joint_coverage(
    multicast: &[TrialRecord],
    broadcast: &[TrialRecord],
    threshold: f64,
) -> Result<f64, MetricError> {
    if multicast.is_empty() {
        return Err(MetricError::EmptyGroup);
    }
    let bc: BTreeMap<usize, &TrialRecord> = broadcast.iter().map(|r| (r.user_id, r)).collect();
    if bc.len() != multicast.len() || broadcast.len() != multicast.len() {
        return Err(MetricError::UserSetMismatch);
    }
    let mut in_outage = 0;
    for m in multicast {
        let b = bc.get(&m.user_id).ok_or(MetricError::UserSetMismatch)?;
        let out = m.in_outage(Stream::Multicast, threshold)?
            || b.in_outage(Stream::Broadcast, threshold)?;
        in_outage += out as usize;
    }
    Ok(percent(multicast.len() - in_outage, multicast.len()))
}

/// Standard error of a coverage percentage estimated from `n` users.
pub fn coverage_standard_error(coverage_pct: f64, n: usize) -> f64 {
    let p = (coverage_pct / 100.0).clamp(0.0, 1.0);
    100.0 * (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrBin {
    /// Left edge of the 1 dB bin.
    pub bin_db: f64,
    pub pdf: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrDistribution {
    pub bins: Vec<SnrBin>,
    pub mean_db: f64,
    pub min_db: f64,
    pub max_db: f64,
    pub samples: usize,
}

/// 1 dB histogram over integer-aligned bins from `⌊min⌋−1` to `⌊max⌋+1`.
/// `pdf` is the fraction of samples per bin.
pub fn snr_distribution(snr_db: &[f64]) -> Result<SnrDistribution, MetricError> {
    if snr_db.is_empty() {
        return Err(MetricError::NoSamples);
    }
    let min = snr_db.iter().copied().fold(f64::INFINITY, f64::min);
    let max = snr_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min.floor() as i64 - 1;
    let hi = max.floor() as i64 + 1;
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for &s in snr_db {
        counts[(s.floor() as i64 - lo) as usize] += 1;
    }
    let n = snr_db.len();
    let mut seen = 0;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            seen += count;
            SnrBin {
                bin_db: (lo + i as i64) as f64,
                pdf: count as f64 / n as f64,
                cdf: seen as f64 / n as f64,
            }
        })
        .collect();
    Ok(SnrDistribution {
        bins,
        mean_db: snr_db.iter().sum::<f64>() / n as f64,
        min_db: min,
        max_db: max,
        samples: n,
    })
}
