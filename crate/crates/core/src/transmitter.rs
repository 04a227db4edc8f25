//! Superposition of the broadcast and multicast streams and beamformed frame
//! assembly.
//!
//! Row `k` of a frame is `x_k[n] = (√α·t_k[n] + √(1−α)·t_BC[n]) / √N_t` and
//! the radiated vector at instant `n` is `B·x[n]`. With unit-energy streams and
//! a unitary `B` the average radiated power per instant is one for every α.

use num_complex::Complex64;
use thiserror::Error;

use crate::beamforming::BeamformingMatrix;
use crate::codec::CodedBlock;
use crate::linalg::CMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameAssemblyError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("block lengths differ: {0}")]
    LengthMismatch(String),
    #[error("expected {expected} multicast blocks, got {got}")]
    StreamCount { expected: usize, got: usize },
}

/// Per-stream amplitudes seen after the transmitter normalization.
///
/// Every receiver filter is written in terms of these two numbers: the
/// amplitude of each multicast symbol on its beam and the amplitude of the
/// broadcast symbol on every beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamGains {
    pub multicast: f64,
    pub broadcast: f64,
}

impl StreamGains {
    /// `(√(α/N_t), √((1−α)/N_t))`, the amplitudes produced by [`superpose`].
    pub fn new(alpha: f64, n_t: usize) -> Result<Self, FrameAssemblyError> {
        check_alpha(alpha)?;
        let n = n_t as f64;
        Ok(Self {
            multicast: (alpha / n).sqrt(),
            broadcast: ((1.0 - alpha) / n).sqrt(),
        })
    }

    pub fn from_amplitudes(multicast: f64, broadcast: f64) -> Self {
        Self {
            multicast,
            broadcast,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), FrameAssemblyError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(FrameAssemblyError::Alpha(alpha))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperposedFrame {
    /// `N_t × N`, row `k` is `x_k`.
    pub x: CMatrix,
    pub alpha: f64,
    pub power_scale: f64,
}

impl SuperposedFrame {
    pub fn n_symbols(&self) -> usize {
        self.x.ncols()
    }
}

pub fn superpose(
    multicast_blocks: &[CodedBlock],
    broadcast_block: &CodedBlock,
    alpha: f64,
) -> Result<SuperposedFrame, FrameAssemblyError> {
    check_alpha(alpha)?;
    let n_t = multicast_blocks.len();
    if n_t == 0 {
        return Err(FrameAssemblyError::StreamCount {
            expected: 1,
            got: 0,
        });
    }
    let n = broadcast_block.len();
    if let Some((k, b)) = multicast_blocks
        .iter()
        .enumerate()
        .find(|(_, b)| b.len() != n)
    {
        return Err(FrameAssemblyError::LengthMismatch(format!(
            "multicast block {k} has {} symbols, broadcast has {n}",
            b.len()
        )));
    }
    let power_scale = 1.0 / (n_t as f64).sqrt();
    let (a, b) = (alpha.sqrt(), (1.0 - alpha).sqrt());
    let x = CMatrix::from_fn(n_t, n, |k, i| {
        (multicast_blocks[k].symbols[i] * a + broadcast_block.symbols[i] * b) * power_scale
    });
    Ok(SuperposedFrame {
        x,
        alpha,
        power_scale,
    })
}

/// Column `n` of the result is `B·x[n]`.
pub fn transmit(
    frame: &SuperposedFrame,
    beams: &BeamformingMatrix,
) -> Result<CMatrix, FrameAssemblyError> {
    if frame.x.nrows() != beams.n_t() {
        return Err(FrameAssemblyError::StreamCount {
            expected: beams.n_t(),
            got: frame.x.nrows(),
        });
    }
    Ok(beams.matrix() * &frame.x)
}

/// Mean of `‖s[n]‖²` over the columns of a transmitted frame.
pub fn mean_radiated_power(tx: &CMatrix) -> f64 {
    tx.iter().map(Complex64::norm_sqr).sum::<f64>() / tx.ncols().max(1) as f64
}
