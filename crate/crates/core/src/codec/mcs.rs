//! Modulation and coding scheme table.
//!
//! Eight entries ordered by spectral efficiency. This is a stand-in index
//! set for the coverage sweeps; the indices are not comparable with LTE CQI
//! or MCS indices.

use serde::{Deserialize, Serialize};

use super::modulation::Constellation;
use super::puncture::CodeRate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mcs {
    pub index: u8,
    pub constellation: Constellation,
    pub code_rate: CodeRate,
}

impl Mcs {
    pub const fn new(index: u8, constellation: Constellation, code_rate: CodeRate) -> Self {
        Self {
            index,
            constellation,
            code_rate,
        }
    }

    /// Information bits per channel symbol, ignoring CRC and tail overhead.
    pub fn spectral_efficiency(&self) -> f64 {
        self.constellation.bits_per_symbol() as f64 * self.code_rate.value()
    }

    pub fn from_index(index: u8) -> Option<Mcs> {
        MCS_TABLE.get(index as usize).copied()
    }
}

impl std::fmt::Display for Mcs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MCS{} ({} r={})",
            self.index, self.constellation, self.code_rate
        )
    }
}

pub const MCS_TABLE: [Mcs; 8] = [
    Mcs::new(0, Constellation::Qpsk, CodeRate::OneThird),
    Mcs::new(1, Constellation::Qpsk, CodeRate::OneHalf),
    Mcs::new(2, Constellation::Qpsk, CodeRate::ThreeQuarters),
    Mcs::new(3, Constellation::Qam16, CodeRate::OneHalf),
    Mcs::new(4, Constellation::Qam16, CodeRate::TwoThirds),
    Mcs::new(5, Constellation::Qam16, CodeRate::ThreeQuarters),
    Mcs::new(6, Constellation::Qam64, CodeRate::TwoThirds),
    Mcs::new(7, Constellation::Qam64, CodeRate::ThreeQuarters),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_indexed_and_ordered() {
        for (i, m) in MCS_TABLE.iter().enumerate() {
            assert_eq!(m.index as usize, i);
        }
        for w in MCS_TABLE.windows(2) {
            assert!(w[1].spectral_efficiency() > w[0].spectral_efficiency());
        }
        assert!(Mcs::from_index(8).is_none());
    }
}
