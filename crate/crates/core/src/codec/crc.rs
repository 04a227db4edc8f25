//! CRC-16-CCITT (polynomial 0x1021, initial value 0xFFFF, no reflection).
//!
//! Operates on unpacked bits (one bit per byte, MSB first). The non-zero
//! initial value means an all-zero block never carries a valid checksum, so
//! an erased stream always fails the check.

pub const CRC_BITS: usize = 16;
const POLY: u16 = 0x1021;
const INIT: u16 = 0xFFFF;

pub fn crc16(bits: &[u8]) -> u16 {
    let mut reg = INIT;
    for &bit in bits {
        let top = ((reg >> 15) as u8) ^ (bit & 1);
        reg <<= 1;
        if top == 1 {
            reg ^= POLY;
        }
    }
    reg
}

/// The 16 checksum bits, MSB first.
pub fn crc_bits(bits: &[u8]) -> [u8; CRC_BITS] {
    let crc = crc16(bits);
    let mut out = [0u8; CRC_BITS];
    for (i, b) in out.iter_mut().enumerate() {
        *b = ((crc >> (15 - i)) & 1) as u8;
    }
    out
}

/// `payload ‖ crc(payload)`.
pub fn append_crc(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + CRC_BITS);
    out.extend_from_slice(payload);
    out.extend_from_slice(&crc_bits(payload));
    out
}

/// Checks a block laid out as `payload ‖ crc`.
pub fn check_crc(block: &[u8]) -> bool {
    if block.len() < CRC_BITS {
        return false;
    }
    let (payload, crc) = block.split_at(block.len() - CRC_BITS);
    crc == crc_bits(payload)
}
