//! Gray-mapped square constellations and max-log soft demapping.
//!
//! Bits are split between the axes: even bit positions (b0, b2, b4) drive
//! the in-phase amplitude and odd positions (b1, b3, b5) the quadrature
//! amplitude. Per axis the amplitude follows the 3GPP recursion
//!
//! ```text
//! QPSK   (1−2b0)
//! 16QAM  (1−2b0)·(2 − (1−2b2))
//! 64QAM  (1−2b0)·(4 − (1−2b2)·(2 − (1−2b4)))
//! ```
//!
//! scaled by 1/√2, 1/√10 and 1/√42 respectively for unit average energy.
//! LLRs are `log P(b=0)/P(b=1)`: a positive value favours bit 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "64qam")]
    Qam64,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Self::Qpsk => 2,
            Self::Qam16 => 4,
            Self::Qam64 => 6,
        }
    }

    fn bits_per_axis(self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// Amplitude normalization so that the average symbol energy is one.
    pub fn scale(self) -> f64 {
        match self {
            Self::Qpsk => 1.0 / 2f64.sqrt(),
            Self::Qam16 => 1.0 / 10f64.sqrt(),
            Self::Qam64 => 1.0 / 42f64.sqrt(),
        }
    }

    /// Unnormalized PAM amplitude for the axis bits (MSB = sign bit).
    fn axis_level(self, axis_bits: &[u8]) -> f64 {
        let s = |b: u8| 1.0 - 2.0 * b as f64;
        match self {
            Self::Qpsk => s(axis_bits[0]),
            Self::Qam16 => s(axis_bits[0]) * (2.0 - s(axis_bits[1])),
            Self::Qam64 => s(axis_bits[0]) * (4.0 - s(axis_bits[1]) * (2.0 - s(axis_bits[2]))),
        }
    }

    /// All (axis bit pattern, normalized level) pairs of one axis.
    fn axis_table(self) -> Vec<(u8, f64)> {
        let m = self.bits_per_axis();
        (0..1u8 << m)
            .map(|pattern| {
                let bits: Vec<u8> = (0..m).map(|i| (pattern >> (m - 1 - i)) & 1).collect();
                (pattern, self.axis_level(&bits) * self.scale())
            })
            .collect()
    }

    /// Maps one group of `bits_per_symbol` bits to a symbol.
    pub fn map_symbol(self, bits: &[u8]) -> Complex64 {
        let m = self.bits_per_axis();
        let mut i_bits = [0u8; 3];
        let mut q_bits = [0u8; 3];
        for j in 0..m {
            i_bits[j] = bits[2 * j] & 1;
            q_bits[j] = bits[2 * j + 1] & 1;
        }
        Complex64::new(
            self.axis_level(&i_bits[..m]) * self.scale(),
            self.axis_level(&q_bits[..m]) * self.scale(),
        )
    }

    /// Maps a bit stream whose length is a multiple of `bits_per_symbol`.
    pub fn map(self, bits: &[u8]) -> Vec<Complex64> {
        bits.chunks_exact(self.bits_per_symbol())
            .map(|chunk| self.map_symbol(chunk))
            .collect()
    }

    /// Every constellation point with its bit label, label bit `j` at
    /// position `j`.
    pub fn points(self) -> Vec<(Vec<u8>, Complex64)> {
        let n = self.bits_per_symbol();
        (0..1usize << n)
            .map(|label| {
                let bits: Vec<u8> = (0..n).map(|j| ((label >> (n - 1 - j)) & 1) as u8).collect();
                let point = self.map_symbol(&bits);
                (bits, point)
            })
            .collect()
    }
}

impl std::fmt::Display for Constellation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Qpsk => "QPSK",
            Self::Qam16 => "16QAM",
            Self::Qam64 => "64QAM",
        })
    }
}

/// Max-log LLRs for every received symbol, `bits_per_symbol` values each.
///
/// `noise_var` is the total complex noise variance `E|n|²`. Because the
/// labelling is separable per axis the minimum distances split into
/// one-dimensional searches.
pub fn demap(received: &[Complex64], noise_var: f64, constellation: Constellation) -> Vec<f64> {
    let m = constellation.bits_per_axis();
    let table = constellation.axis_table();
    let inv = 1.0 / noise_var;
    let mut out = Vec::with_capacity(received.len() * constellation.bits_per_symbol());
    let axis_llr = |value: f64, llrs: &mut [f64; 3]| {
        for (j, llr) in llrs.iter_mut().enumerate().take(m) {
            let mut best0 = f64::INFINITY;
            let mut best1 = f64::INFINITY;
            for &(pattern, level) in &table {
                let d = (value - level) * (value - level);
                if (pattern >> (m - 1 - j)) & 1 == 0 {
                    best0 = best0.min(d);
                } else {
                    best1 = best1.min(d);
                }
            }
            *llr = (best1 - best0) * inv;
        }
    };
    for y in received {
        let mut li = [0.0; 3];
        let mut lq = [0.0; 3];
        axis_llr(y.re, &mut li);
        axis_llr(y.im, &mut lq);
        for j in 0..m {
            out.push(li[j]);
            out.push(lq[j]);
        }
    }
    out
}
