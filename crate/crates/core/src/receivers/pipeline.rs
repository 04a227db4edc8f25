//! Per-frame receiver pipelines.
//!
//! Filters are computed once per frame (block fading) and applied to every
//! symbol. Before decoding, each stream estimate is divided by its effective
//! gain `μ = w·a` and the LLRs are scaled with the residual variance
//! `(w R_y w^H − |μ|²)/|μ|²`, where `R_y` is the covariance of the received
//! signal under the true channel. This keeps the demapper calibrated even
//! when a filter's model is approximate (beam-only knowledge, pre-equalized
//! observation with the channel treated as suppressed).

use num_complex::Complex64;

use crate::beamforming::BeamformingMatrix;
use crate::codec::{decode, reencode, Payload, TransportFormat};
use crate::linalg::{column, identity, CMatrix};
use crate::mmse::PreEqualizer;
use crate::transmitter::StreamGains;

use super::filters::{self, Observation};
use super::{Knowledge, ReceiverConfig, ReceiverError, Strategy};

const MIN_GAIN: f64 = 1e-12;
const MIN_NOISE_VAR: f64 = 1e-9;

/// Everything a receiver knows about one frame besides the samples.
#[derive(Debug, Clone, Copy)]
pub struct FrameContext<'a> {
    pub h: &'a CMatrix,
    pub sigma2: f64,
    pub beams: &'a BeamformingMatrix,
    /// Zero-based beam index of the user's group.
    pub k: usize,
    pub gains: StreamGains,
    pub broadcast_format: TransportFormat,
    pub multicast_format: TransportFormat,
}

impl FrameContext<'_> {
    /// `g_BC·H·B1`.
    fn broadcast_direction(&self) -> CMatrix {
        (self.h * column(&self.beams.broadcast_beam())).scale(self.gains.broadcast)
    }

    /// `g_MC·H·b_k`.
    fn multicast_direction(&self) -> CMatrix {
        (self.h * column(&self.beams.beam(self.k))).scale(self.gains.multicast)
    }

    /// Covariance of `y` under the true channel.
    fn received_covariance(&self) -> CMatrix {
        let hb = self.h * self.beams.matrix();
        let a = self.broadcast_direction();
        identity(self.h.nrows()).scale(self.sigma2)
            + (&hb * hb.adjoint()).scale(self.gains.multicast.powi(2))
            + &a * a.adjoint()
    }
}

/// Effective gain and residual variance of one filter row.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Calibration {
    gain: Complex64,
    noise_var: f64,
}

impl Calibration {
    /// `w` is a row acting on `y`, `a` the wanted direction, `extra` a
    /// residual power term added to `w R w^H`.
    fn new(w: &CMatrix, a: &CMatrix, r: &CMatrix, extra: f64) -> Self {
        let gain = (w * a)[(0, 0)];
        let power = (w * r * w.adjoint())[(0, 0)].re + extra;
        let g2 = gain.norm_sqr();
        let noise_var = if g2 < MIN_GAIN * MIN_GAIN {
            1.0
        } else {
            ((power - g2) / g2).max(MIN_NOISE_VAR)
        };
        Self { gain, noise_var }
    }

    fn estimate(&self, raw: Vec<Complex64>) -> SymbolEstimate {
        let normalized = if self.gain.norm() < MIN_GAIN {
            vec![Complex64::new(0.0, 0.0); raw.len()]
        } else {
            raw.iter().map(|z| z / self.gain).collect()
        };
        SymbolEstimate {
            raw,
            normalized,
            gain: self.gain,
            noise_var: self.noise_var,
        }
    }
}

/// Filter output for one stream over a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEstimate {
    /// MMSE filter output.
    pub raw: Vec<Complex64>,
    /// `raw / gain`, zero when the stream carries no power.
    pub normalized: Vec<Complex64>,
    pub gain: Complex64,
    pub noise_var: f64,
}

impl SymbolEstimate {
    pub fn mse(&self, reference: &[Complex64]) -> f64 {
        self.normalized
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / reference.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastEstimate {
    pub symbols: SymbolEstimate,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStreams {
    pub broadcast: Payload,
    pub multicast: Payload,
    /// `t̂_BC`.
    pub raw_broadcast: Vec<Complex64>,
    /// `t̂_k`.
    pub raw_multicast: Vec<Complex64>,
}

fn row(w: &CMatrix, i: usize) -> CMatrix {
    w.rows(i, 1).into_owned()
}

fn apply_row(w: &CMatrix, z: &CMatrix) -> Vec<Complex64> {
    (w * z).row(0).iter().copied().collect()
}

/// Optional pre-equalizer plus the observation the filters are built on.
fn front_end(
    ctx: &FrameContext<'_>,
    preeq: bool,
) -> Result<(Option<CMatrix>, Observation), ReceiverError> {
    if preeq {
        let eq = PreEqualizer::new(ctx.h, ctx.sigma2)?;
        let obs = Observation::from_equalizer(&eq);
        Ok((Some(eq.filter().clone()), obs))
    } else {
        Ok((None, Observation::direct(ctx.h, ctx.sigma2)))
    }
}

fn check_samples(ctx: &FrameContext<'_>, y: &CMatrix) -> Result<(), ReceiverError> {
    if y.nrows() != ctx.h.nrows() {
        return Err(ReceiverError::Config(format!(
            "received frame has {} rows, channel has {}",
            y.nrows(),
            ctx.h.nrows()
        )));
    }
    Ok(())
}

/// MMSE-SIC receiver for one frame, with its stages exposed.
#[derive(Debug, Clone)]
pub struct SicReceiver {
    front: Option<CMatrix>,
    w_bc: CMatrix,
    w_mc: CMatrix,
    /// Direction the broadcast reconstruction is subtracted along.
    cancel: CMatrix,
    feedback: bool,
    bc: Calibration,
    mc: Calibration,
}

impl SicReceiver {
    pub fn new(ctx: &FrameContext<'_>, config: &ReceiverConfig) -> Result<Self, ReceiverError> {
        config.validate()?;
        let (front, obs) = front_end(ctx, config.preeq)?;
        let w_bc = filters::broadcast_filter(&obs, ctx.beams, ctx.k, ctx.gains, config.knowledge)?;
        let w_mc = filters::multicast_filter(&obs, ctx.beams, ctx.k, ctx.gains, config.knowledge)?;
        let along = match config.knowledge {
            Knowledge::FullB => ctx.beams.broadcast_beam(),
            Knowledge::BeamOnly => ctx.beams.beam(ctx.k),
        };
        let cancel = (obs.channel() * column(&along)).scale(ctx.gains.broadcast);

        // Calibration in the y domain.
        let p0 = front.clone().unwrap_or_else(|| identity(ctx.h.nrows()));
        let r = ctx.received_covariance();
        let a_bc = ctx.broadcast_direction();
        let a_mc = ctx.multicast_direction();
        let bc = Calibration::new(&(&w_bc * &p0), &a_bc, &r, 0.0);
        let mc = if config.feedback {
            // Assumes a correct reconstruction; only the mismatch between the
            // true and the subtracted broadcast direction remains.
            let w = &w_mc * &p0;
            let leak = (&w_mc * (&p0 * &a_bc - &cancel))[(0, 0)].norm_sqr();
            Calibration::new(&w, &a_mc, &(&r - &a_bc * a_bc.adjoint()), leak)
        } else {
            let dim = cancel.nrows();
            let w = &w_mc * (identity(dim) - &cancel * &w_bc) * &p0;
            Calibration::new(&w, &a_mc, &r, 0.0)
        };
        Ok(Self {
            front,
            w_bc,
            w_mc,
            cancel,
            feedback: config.feedback,
            bc,
            mc,
        })
    }

    /// `ȳ` (pre-equalized) or `y`.
    pub fn observe(&self, y: &CMatrix) -> CMatrix {
        match &self.front {
            Some(m) => m * y,
            None => y.clone(),
        }
    }

    pub fn estimate_broadcast(&self, z: &CMatrix) -> SymbolEstimate {
        self.bc.estimate(apply_row(&self.w_bc, z))
    }

    /// Estimates and decodes the broadcast block.
    pub fn decode_broadcast(
        &self,
        z: &CMatrix,
        format: &TransportFormat,
    ) -> Result<BroadcastEstimate, ReceiverError> {
        let symbols = self.estimate_broadcast(z);
        let payload = decode(&symbols.normalized, format, symbols.noise_var)?;
        Ok(BroadcastEstimate { symbols, payload })
    }

    /// Symbols subtracted in the cancellation step: the re-encoded block with
    /// feedback, the raw MMSE estimates otherwise.
    pub fn reconstruction(
        &self,
        estimate: &BroadcastEstimate,
        format: &TransportFormat,
    ) -> Result<Vec<Complex64>, ReceiverError> {
        if self.feedback {
            Ok(reencode(&estimate.payload, format)?.symbols)
        } else {
            Ok(estimate.symbols.raw.clone())
        }
    }

    /// `z − d·t`, with `d` the scaled broadcast direction.
    pub fn cancel(&self, z: &CMatrix, reconstruction: &[Complex64]) -> CMatrix {
        let t = CMatrix::from_row_slice(1, reconstruction.len(), reconstruction);
        z - &self.cancel * t
    }

    pub fn estimate_multicast(&self, z_cancelled: &CMatrix) -> SymbolEstimate {
        self.mc.estimate(apply_row(&self.w_mc, z_cancelled))
    }

    pub fn receive(
        &self,
        y: &CMatrix,
        ctx: &FrameContext<'_>,
    ) -> Result<DecodedStreams, ReceiverError> {
        check_samples(ctx, y)?;
        let z = self.observe(y);
        let bc = self.decode_broadcast(&z, &ctx.broadcast_format)?;
        let rec = self.reconstruction(&bc, &ctx.broadcast_format)?;
        let mc = self.estimate_multicast(&self.cancel(&z, &rec));
        let multicast = decode(&mc.normalized, &ctx.multicast_format, mc.noise_var)?;
        Ok(DecodedStreams {
            broadcast: bc.payload,
            multicast,
            raw_broadcast: bc.symbols.raw,
            raw_multicast: mc.raw,
        })
    }
}

/// Joint-decoding receiver: one two-row MMSE filter, no cancellation.
#[derive(Debug, Clone)]
pub struct JointReceiver {
    front: Option<CMatrix>,
    w: CMatrix,
    mc: Calibration,
    bc: Calibration,
}

impl JointReceiver {
    pub fn new(ctx: &FrameContext<'_>, config: &ReceiverConfig) -> Result<Self, ReceiverError> {
        config.validate()?;
        let (front, obs) = front_end(ctx, config.preeq)?;
        let w = filters::joint_filter(&obs, ctx.beams, ctx.k, ctx.gains)?;
        let p0 = front.clone().unwrap_or_else(|| identity(ctx.h.nrows()));
        let r = ctx.received_covariance();
        let weff = &w * &p0;
        let mc = Calibration::new(&row(&weff, 0), &ctx.multicast_direction(), &r, 0.0);
        let bc = Calibration::new(&row(&weff, 1), &ctx.broadcast_direction(), &r, 0.0);
        Ok(Self { front, w, mc, bc })
    }

    pub fn filter(&self) -> &CMatrix {
        &self.w
    }

    /// `(t̂_k, t̂_BC)`.
    pub fn estimate(&self, y: &CMatrix) -> (SymbolEstimate, SymbolEstimate) {
        let z = match &self.front {
            Some(m) => m * y,
            None => y.clone(),
        };
        let out = &self.w * z;
        let take = |i: usize| out.row(i).iter().copied().collect::<Vec<_>>();
        (self.mc.estimate(take(0)), self.bc.estimate(take(1)))
    }

    pub fn receive(
        &self,
        y: &CMatrix,
        ctx: &FrameContext<'_>,
    ) -> Result<DecodedStreams, ReceiverError> {
        check_samples(ctx, y)?;
        let (mc, bc) = self.estimate(y);
        let multicast = decode(&mc.normalized, &ctx.multicast_format, mc.noise_var)?;
        let broadcast = decode(&bc.normalized, &ctx.broadcast_format, bc.noise_var)?;
        Ok(DecodedStreams {
            broadcast,
            multicast,
            raw_broadcast: bc.raw,
            raw_multicast: mc.raw,
        })
    }
}

pub fn sic_receive(
    y: &CMatrix,
    ctx: &FrameContext<'_>,
    config: &ReceiverConfig,
) -> Result<DecodedStreams, ReceiverError> {
    if config.strategy != Strategy::Sic {
        return Err(ReceiverError::Config(
            "sic_receive needs strategy sic".into(),
        ));
    }
    SicReceiver::new(ctx, config)?.receive(y, ctx)
}

pub fn jd_receive(
    y: &CMatrix,
    ctx: &FrameContext<'_>,
    config: &ReceiverConfig,
) -> Result<DecodedStreams, ReceiverError> {
    if config.strategy != Strategy::Jd {
        return Err(ReceiverError::Config("jd_receive needs strategy jd".into()));
    }
    JointReceiver::new(ctx, config)?.receive(y, ctx)
}

/// Dispatches on `config.strategy`.
pub fn receive(
    y: &CMatrix,
    ctx: &FrameContext<'_>,
    config: &ReceiverConfig,
) -> Result<DecodedStreams, ReceiverError> {
    match config.strategy {
        Strategy::Sic => sic_receive(y, ctx, config),
        Strategy::Jd => jd_receive(y, ctx, config),
    }
}
