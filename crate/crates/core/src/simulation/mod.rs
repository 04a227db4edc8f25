//! Coverage study: Monte Carlo engine, metrics and result files.

pub mod metrics;
pub mod report;
pub mod rng;
pub mod sweep;

use thiserror::Error;

use crate::beamforming::BeamformingMatrix;
use crate::channel::{drop_users, Scenario, UserDrop};
use crate::codec::CodecError;
use crate::receivers::ReceiverError;
use crate::transmitter::FrameAssemblyError;

pub use self::metrics::{
    coverage, coverage_standard_error, is_outage, joint_coverage, per, snr_distribution,
    MetricError, SnrBin, SnrDistribution, Stream, TrialRecord,
};
pub use self::report::{
    snr_csv, write_atomic, CoverageCell, CoverageReport, McsRow, COVERAGE_CSV_HEADER,
    SNR_CSV_HEADER,
};
pub use self::sweep::{run_sweep, FrameOutcome, Link, SweepSpec, RECOMMENDED_MIN_FRAMES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid sweep grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Frame(#[from] FrameAssemblyError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// `drops` independent user drops of `scenario.n_users` users each.
pub fn drop_sets(
    scenario: &Scenario,
    beams: &BeamformingMatrix,
    drops: usize,
    seed: u64,
) -> Vec<Vec<UserDrop>> {
    (0..drops)
        .map(|d| drop_users(scenario, beams, &mut rng::drop_stream(seed, d)))
        .collect()
}

/// Per-user SNR values of `drops` drops, in drop order.
pub fn snr_samples(
    scenario: &Scenario,
    beams: &BeamformingMatrix,
    drops: usize,
    seed: u64,
) -> Vec<f64> {
    drop_sets(scenario, beams, drops, seed)
        .iter()
        .flatten()
        .map(|u| u.snr_db)
        .collect()
}
