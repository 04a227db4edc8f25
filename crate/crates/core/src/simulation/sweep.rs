//! Monte Carlo engine: per-frame link simulation and the (MCS, α) sweep.

use log::{info, warn};
use rayon::prelude::*;

use crate::beamforming::BeamformingMatrix;
use crate::channel::{
    apply_channel_with_noise, complex_gaussian, drop_users, place_user, ChannelModel, Position,
    Scenario, UserDrop,
};
use crate::codec::{encode, Mcs, Payload, StreamRole, TransportFormat};
use crate::mmse::MmseError;
use crate::receivers::{receive, FrameContext, ReceiverConfig, ReceiverError};
use crate::transmitter::{superpose, transmit, StreamGains};

use super::metrics::{coverage, joint_coverage, Stream, TrialRecord};
use super::report::{CoverageCell, CoverageReport};
use super::rng::{drop_stream, trial_stream, Purpose};
use super::SimulationError;

/// PER resolution at the 1 % threshold gets poor below this many frames.
pub const RECOMMENDED_MIN_FRAMES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub broadcast_ok: bool,
    pub multicast_ok: bool,
}

/// Fixed link setup shared by every frame of a sweep.
#[derive(Debug, Clone)]
pub struct Link {
    pub scenario: Scenario,
    pub beams: BeamformingMatrix,
    pub receiver: ReceiverConfig,
    pub seed: u64,
    channel: ChannelModel,
}

impl Link {
    pub fn new(
        scenario: Scenario,
        beams: BeamformingMatrix,
        receiver: ReceiverConfig,
        seed: u64,
    ) -> Result<Self, SimulationError> {
        scenario.validate().map_err(SimulationError::Scenario)?;
        receiver.validate()?;
        if beams.n_t() != scenario.n_t {
            return Err(SimulationError::Scenario(format!(
                "beamformer has {} beams but n_t is {}",
                beams.n_t(),
                scenario.n_t
            )));
        }
        let channel = ChannelModel::new(scenario.n_r, scenario.n_t, scenario.correlation.rho());
        Ok(Self {
            scenario,
            beams,
            receiver,
            seed,
            channel,
        })
    }

    /// Simulates frame `frame` of `user`. Channel, noise and payload bits
    /// depend only on `(seed, user, frame)`.
    pub fn run_frame(
        &self,
        user: &UserDrop,
        frame: usize,
        format: &TransportFormat,
        alpha: f64,
    ) -> Result<FrameOutcome, SimulationError> {
        let n_t = self.scenario.n_t;
        let mut bits = trial_stream(self.seed, user.user_id, frame, Purpose::Payload);
        let bc_payload = Payload::random(format.payload_bits, &mut bits);
        let mc_payloads: Vec<Payload> = (0..n_t)
            .map(|_| Payload::random(format.payload_bits, &mut bits))
            .collect();

        let bc_block = encode(&bc_payload, format)?;
        let mc_blocks = mc_payloads
            .iter()
            .enumerate()
            .map(|(k, p)| Ok(encode(p, format)?.with_role(StreamRole::Multicast(k))))
            .collect::<Result<Vec<_>, SimulationError>>()?;
        let frame_x = superpose(&mc_blocks, &bc_block, alpha)?;
        let tx = transmit(&frame_x, &self.beams)?;

        let h = self.channel.draw(&mut trial_stream(
            self.seed,
            user.user_id,
            frame,
            Purpose::Channel,
        ));
        let sigma2 = user.sigma2();
        let noise = complex_gaussian(
            self.scenario.n_r,
            tx.ncols(),
            sigma2,
            &mut trial_stream(self.seed, user.user_id, frame, Purpose::Noise),
        );
        let y = apply_channel_with_noise(&h, &tx, &noise);

        let ctx = FrameContext {
            h: &h,
            sigma2,
            beams: &self.beams,
            k: user.group,
            gains: StreamGains::new(alpha, n_t)?,
            broadcast_format: *format,
            multicast_format: *format,
        };
        match receive(&y, &ctx, &self.receiver) {
            Ok(out) => Ok(FrameOutcome {
                broadcast_ok: out.broadcast.delivered(&bc_payload),
                multicast_ok: out.multicast.delivered(&mc_payloads[user.group]),
            }),
            // An ill-conditioned realization is a lost frame, not a failed run.
            Err(ReceiverError::Mmse(MmseError::SingularModel { .. })) => Ok(FrameOutcome {
                broadcast_ok: false,
                multicast_ok: false,
            }),
            Err(e) => Err(e.into()),
        }
    }

    pub fn run_user(
        &self,
        user: &UserDrop,
        mcs: Mcs,
        format: &TransportFormat,
        alpha: f64,
        frames: usize,
    ) -> Result<TrialRecord, SimulationError> {
        let mut bc_errors = 0;
        let mut mc_errors = 0;
        for frame in 0..frames {
            let o = self.run_frame(user, frame, format, alpha)?;
            bc_errors += !o.broadcast_ok as usize;
            mc_errors += !o.multicast_ok as usize;
        }
        Ok(TrialRecord {
            user_id: user.user_id,
            group_k: user.group + 1,
            mcs_index: mcs.index,
            alpha,
            frames,
            bc_errors,
            mc_errors,
            snr_db: user.snr_db,
        })
    }
}

/// Everything that defines one coverage sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub beams: BeamformingMatrix,
    pub receiver: ReceiverConfig,
    pub mcs: Vec<Mcs>,
    pub alphas: Vec<f64>,
    pub frames_per_user: usize,
    pub symbols_per_block: usize,
    /// Forced user positions; a random drop of `scenario.n_users` otherwise.
    pub users: Option<Vec<Position>>,
    pub seed: u64,
}

impl SweepSpec {
    pub fn drops(&self) -> Vec<UserDrop> {
        match &self.users {
            Some(positions) => positions
                .iter()
                .enumerate()
                .map(|(i, &p)| place_user(&self.scenario, &self.beams, i, p))
                .collect(),
            None => drop_users(&self.scenario, &self.beams, &mut drop_stream(self.seed, 0)),
        }
    }

    fn validate(&self) -> Result<(), SimulationError> {
        if self.mcs.is_empty() || self.alphas.is_empty() {
            return Err(SimulationError::Grid(
                "MCS and alpha lists must be non-empty".into(),
            ));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(SimulationError::Grid(format!(
                "alpha {a} is outside [0, 1]"
            )));
        }
        if self.frames_per_user == 0 {
            return Err(SimulationError::Grid(
                "frames_per_user must be at least 1".into(),
            ));
        }
        if matches!(&self.users, Some(u) if u.is_empty()) {
            return Err(SimulationError::Grid("forced user list is empty".into()));
        }
        Ok(())
    }
}

/// Runs every (MCS, α) cell over one shared user drop.
///
/// Work items are (cell, user) pairs evaluated on the current rayon pool;
/// the result does not depend on the pool size.
pub fn run_sweep(spec: &SweepSpec) -> Result<CoverageReport, SimulationError> {
    spec.validate()?;
    if spec.frames_per_user < RECOMMENDED_MIN_FRAMES {
        warn!(
            "{} frames per user cannot resolve a PER of {}",
            spec.frames_per_user, spec.scenario.outage_per_threshold
        );
    }
    let link = Link::new(
        spec.scenario.clone(),
        spec.beams.clone(),
        spec.receiver,
        spec.seed,
    )?;
    let users = spec.drops();
    let formats = spec
        .mcs
        .iter()
        .map(|&m| TransportFormat::for_symbol_budget(m, spec.symbols_per_block))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(usize, f64)> = (0..spec.mcs.len())
        .flat_map(|m| spec.alphas.iter().map(move |&a| (m, a)))
        .collect();
    info!(
        "sweep: {} cells x {} users x {} frames, {}",
        cells.len(),
        users.len(),
        spec.frames_per_user,
        spec.receiver.label()
    );

    let work: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..users.len()).map(move |u| (c, u)))
        .collect();
    let records = work
        .par_iter()
        .map(|&(c, u)| {
            let (m, alpha) = cells[c];
            link.run_user(
                &users[u],
                spec.mcs[m],
                &formats[m],
                alpha,
                spec.frames_per_user,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let threshold = spec.scenario.outage_per_threshold;
    let mut out = Vec::new();
    for (c, &(m, alpha)) in cells.iter().enumerate() {
        let cell_records = &records[c * users.len()..(c + 1) * users.len()];
        for group in 1..=spec.scenario.n_t {
            let g: Vec<TrialRecord> = cell_records
                .iter()
                .filter(|r| r.group_k == group)
                .cloned()
                .collect();
            if g.is_empty() {
                continue;
            }
            out.push(CoverageCell {
                group,
                mcs: spec.mcs[m].index,
                alpha,
                coverage_bc: coverage(&g, Stream::Broadcast, threshold)?,
                coverage_mc: coverage(&g, Stream::Multicast, threshold)?,
                joint_coverage: joint_coverage(&g, &g, threshold)?,
                n_users: g.len(),
                n_frames: g.len() * spec.frames_per_user,
            });
        }
    }
    Ok(CoverageReport::new(spec, out, records))
}
