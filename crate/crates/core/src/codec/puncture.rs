//! Puncturing of the rate-1/3 mother code.
//!
//! Patterns are periodic in the trellis step. Each period lists which of the
//! three generator outputs are transmitted:
//!
//! | rate | period | kept outputs per step            |
//! |------|--------|----------------------------------|
//! | 1/3  | 1      | `111`                            |
//! | 1/2  | 1      | `110`                            |
//! | 2/3  | 2      | `110`, `100`                     |
//! | 3/4  | 3      | `110`, `100`, `010`              |
//!
//! The 1/2, 2/3 and 3/4 patterns puncture the (133, 171) pair the same way
//! as IEEE 802.11a.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeRate {
    #[serde(rename = "1/3")]
    OneThird,
    #[serde(rename = "1/2")]
    OneHalf,
    #[serde(rename = "2/3")]
    TwoThirds,
    #[serde(rename = "3/4")]
    ThreeQuarters,
}

impl CodeRate {
    pub fn from_fraction(num: u32, den: u32) -> Option<Self> {
        match (num, den) {
            (1, 3) => Some(Self::OneThird),
            (1, 2) => Some(Self::OneHalf),
            (2, 3) => Some(Self::TwoThirds),
            (3, 4) => Some(Self::ThreeQuarters),
            _ => None,
        }
    }

    pub fn fraction(self) -> (u32, u32) {
        match self {
            Self::OneThird => (1, 3),
            Self::OneHalf => (1, 2),
            Self::TwoThirds => (2, 3),
            Self::ThreeQuarters => (3, 4),
        }
    }

    pub fn value(self) -> f64 {
        let (n, d) = self.fraction();
        n as f64 / d as f64
    }

    pub fn pattern(self) -> &'static [[bool; 3]] {
        const T: bool = true;
        const F: bool = false;
        match self {
            Self::OneThird => &[[T, T, T]],
            Self::OneHalf => &[[T, T, F]],
            Self::TwoThirds => &[[T, T, F], [T, F, F]],
            Self::ThreeQuarters => &[[T, T, F], [T, F, F], [F, T, F]],
        }
    }

    /// Number of transmitted bits for `steps` trellis steps.
    pub fn punctured_len(self, steps: usize) -> usize {
        let pattern = self.pattern();
        let per_period: usize = pattern
            .iter()
            .map(|p| p.iter().filter(|&&k| k).count())
            .sum();
        let full = steps / pattern.len();
        let rest: usize = pattern[..steps % pattern.len()]
            .iter()
            .map(|p| p.iter().filter(|&&k| k).count())
            .sum();
        full * per_period + rest
    }
}

impl std::fmt::Display for CodeRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (n, d) = self.fraction();
        write!(f, "{n}/{d}")
    }
}

pub fn puncture(code: &[[u8; 3]], rate: CodeRate) -> Vec<u8> {
    let pattern = rate.pattern();
    let mut out = Vec::with_capacity(rate.punctured_len(code.len()));
    for (t, triple) in code.iter().enumerate() {
        let keep = &pattern[t % pattern.len()];
        for i in 0..3 {
            if keep[i] {
                out.push(triple[i]);
            }
        }
    }
    out
}

/// Re-inserts zero LLRs at punctured positions. `llrs` must hold at least
/// `rate.punctured_len(steps)` values; extra values are ignored.
pub fn depuncture(llrs: &[f64], steps: usize, rate: CodeRate) -> Vec<[f64; 3]> {
    let pattern = rate.pattern();
    let mut it = llrs.iter();
    (0..steps)
        .map(|t| {
            let keep = &pattern[t % pattern.len()];
            let mut triple = [0.0; 3];
            for i in 0..3 {
                if keep[i] {
                    triple[i] = *it.next().unwrap_or(&0.0);
                }
            }
            triple
        })
        .collect()
}
