//! Channel coding `G(·)` and its inverse.
//!
//! Encoding chain: CRC-16 → rate-1/3 convolutional code with six zero flush
//! bits → puncturing to the MCS rate → zero padding up to the block's symbol
//! count → Gray mapping. Decoding runs the chain backwards with soft
//! (max-log) demapping and a Viterbi decoder.

pub mod convolutional;
pub mod crc;
pub mod mcs;
pub mod modulation;
pub mod puncture;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::crc::CRC_BITS;
pub use self::mcs::{Mcs, MCS_TABLE};
pub use self::modulation::{demap, Constellation};
pub use self::puncture::CodeRate;

use self::convolutional::MEMORY;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("payload has {got} bits, transport format expects {expected}")]
    BlockSize { expected: usize, got: usize },
    #[error("{0} symbols cannot carry a single payload bit with {1}")]
    BudgetTooSmall(usize, Mcs),
    #[error("block has {got} symbols, transport format expects {expected}")]
    SymbolCount { expected: usize, got: usize },
    #[error("unsupported MCS entry: {0}")]
    UnsupportedMcs(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrcStatus {
    #[default]
    Unknown,
    Pass,
    Fail,
}

/// Information bits of one stream, one bit per byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub bits: Vec<u8>,
    pub crc: CrcStatus,
}

impl Payload {
    pub fn new(bits: Vec<u8>) -> Self {
        Self {
            bits,
            crc: CrcStatus::Unknown,
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::new((0..len).map(|_| rng.random::<bool>() as u8).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// True when the CRC passed and the bits equal `reference`.
    pub fn delivered(&self, reference: &Payload) -> bool {
        self.crc == CrcStatus::Pass && self.bits == reference.bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamRole {
    Broadcast,
    Multicast(usize),
}

/// Modulated symbols of one stream, unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedBlock {
    pub symbols: Vec<Complex64>,
    pub mcs: Mcs,
    pub role: StreamRole,
}

impl CodedBlock {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn mean_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.symbols.len().max(1) as f64
    }

    pub fn with_role(mut self, role: StreamRole) -> Self {
        self.role = role;
        self
    }
}

/// Fixes the payload size and symbol count of a block for one MCS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportFormat {
    pub mcs: Mcs,
    pub payload_bits: usize,
    pub n_symbols: usize,
}

impl TransportFormat {
    /// Punctured code bits produced for a payload of `payload_bits`.
    pub fn coded_bits(mcs: &Mcs, payload_bits: usize) -> usize {
        mcs.code_rate
            .punctured_len(payload_bits + CRC_BITS + MEMORY)
    }

    /// Natural symbol count for a given payload size.
    pub fn for_payload(mcs: Mcs, payload_bits: usize) -> Result<Self, CodecError> {
        if payload_bits == 0 {
            return Err(CodecError::BlockSize {
                expected: 1,
                got: 0,
            });
        }
        let bps = mcs.constellation.bits_per_symbol();
        Ok(Self {
            mcs,
            payload_bits,
            n_symbols: Self::coded_bits(&mcs, payload_bits).div_ceil(bps),
        })
    }

    /// Largest payload that fits in `n_symbols` symbols.
    pub fn for_symbol_budget(mcs: Mcs, n_symbols: usize) -> Result<Self, CodecError> {
        let capacity = n_symbols * mcs.constellation.bits_per_symbol();
        // coded_bits is monotone in the payload size
        let (n, d) = mcs.code_rate.fraction();
        let mut payload_bits =
            (capacity * n as usize / d as usize).saturating_sub(CRC_BITS + MEMORY);
        while payload_bits > 0 && Self::coded_bits(&mcs, payload_bits) > capacity {
            payload_bits -= 1;
        }
        while Self::coded_bits(&mcs, payload_bits + 1) <= capacity {
            payload_bits += 1;
        }
        if payload_bits == 0 {
            return Err(CodecError::BudgetTooSmall(n_symbols, mcs));
        }
        Ok(Self {
            mcs,
            payload_bits,
            n_symbols,
        })
    }

    fn trellis_steps(&self) -> usize {
        self.payload_bits + CRC_BITS + MEMORY
    }

    fn channel_bits(&self) -> usize {
        self.n_symbols * self.mcs.constellation.bits_per_symbol()
    }
}

/// `t = G(u)`.
pub fn encode(payload: &Payload, format: &TransportFormat) -> Result<CodedBlock, CodecError> {
    if payload.len() != format.payload_bits {
        return Err(CodecError::BlockSize {
            expected: format.payload_bits,
            got: payload.len(),
        });
    }
    let with_crc = crc::append_crc(&payload.bits);
    let mother = convolutional::encode(&with_crc);
    let mut bits = puncture::puncture(&mother, format.mcs.code_rate);
    bits.resize(format.channel_bits(), 0);
    Ok(CodedBlock {
        symbols: format.mcs.constellation.map(&bits),
        mcs: format.mcs,
        role: StreamRole::Broadcast,
    })
}

/// `û = G^{-1}(t̂)` for a unit-gain symbol estimate with complex noise
/// variance `noise_var`.
pub fn decode(
    block_estimate: &[Complex64],
    format: &TransportFormat,
    noise_var: f64,
) -> Result<Payload, CodecError> {
    if block_estimate.len() != format.n_symbols {
        return Err(CodecError::SymbolCount {
            expected: format.n_symbols,
            got: block_estimate.len(),
        });
    }
    let llrs = demap(block_estimate, noise_var, format.mcs.constellation);
    Ok(decode_llrs(&llrs, format))
}

/// Decodes from channel LLRs (padding included).
pub fn decode_llrs(llrs: &[f64], format: &TransportFormat) -> Payload {
    let steps = format.trellis_steps();
    let kept = format.mcs.code_rate.punctured_len(steps);
    let soft = puncture::depuncture(&llrs[..kept.min(llrs.len())], steps, format.mcs.code_rate);
    let decoded = convolutional::viterbi_decode(&soft);
    let crc = if crc::check_crc(&decoded) {
        CrcStatus::Pass
    } else {
        CrcStatus::Fail
    };
    let mut bits = decoded;
    bits.truncate(format.payload_bits);
    Payload { bits, crc }
}

/// `t̄ = G(û)`, the reconstruction used for feedback error correction.
/// Accepts payloads whose CRC failed.
pub fn reencode(decoded: &Payload, format: &TransportFormat) -> Result<CodedBlock, CodecError> {
    encode(&Payload::new(decoded.bits.clone()), format)
}
