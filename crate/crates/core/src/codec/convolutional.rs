//! Rate-1/3 convolutional code, constraint length 7, generators
//! (133, 171, 165) octal, zero-tail terminated, with a soft-input Viterbi
//! decoder.
//!
//! The shift register holds the current input in bit 6 and the six previous
//! inputs in bits 5..0 (most recent in bit 5). Output `i` is the parity of the
//! register masked with generator `i`.

pub const CONSTRAINT_LENGTH: usize = 7;
pub const MEMORY: usize = CONSTRAINT_LENGTH - 1;
pub const N_STATES: usize = 1 << MEMORY;
pub const GENERATORS: [u32; 3] = [0o133, 0o171, 0o165];

/// Three output bits per register value, packed as `c0 | c1 << 1 | c2 << 2`.
const fn output_table() -> [u8; 128] {
    let mut table = [0u8; 128];
    let mut reg = 0;
    while reg < 128 {
        let mut out = 0u8;
        let mut g = 0;
        while g < 3 {
            let parity = ((reg as u32) & GENERATORS[g]).count_ones() & 1;
            out |= (parity as u8) << g;
            g += 1;
        }
        table[reg] = out;
        reg += 1;
    }
    table
}

static OUTPUTS: [u8; 128] = output_table();

/// Encodes `bits` followed by `MEMORY` zero flush bits. Returns one
/// `[c0, c1, c2]` triple per trellis step.
pub fn encode(bits: &[u8]) -> Vec<[u8; 3]> {
    let mut state = 0usize;
    let mut out = Vec::with_capacity(bits.len() + MEMORY);
    for &bit in bits.iter().chain(std::iter::repeat_n(&0u8, MEMORY)) {
        let reg = ((bit as usize & 1) << MEMORY) | state;
        let o = OUTPUTS[reg];
        out.push([o & 1, (o >> 1) & 1, (o >> 2) & 1]);
        state = reg >> 1;
    }
    out
}

/// Output triples of the two branches entering each state: index 0 comes
/// from predecessor `(s << 1) & 63`, index 1 from `((s << 1) & 63) | 1`.
const fn branch_table() -> [[u8; 2]; N_STATES] {
    let mut table = [[0u8; 2]; N_STATES];
    let mut s = 0;
    while s < N_STATES {
        let input = s >> (MEMORY - 1);
        let p0 = (s << 1) & (N_STATES - 1);
        table[s] = [
            OUTPUTS[(input << MEMORY) | p0],
            OUTPUTS[(input << MEMORY) | p0 | 1],
        ];
        s += 1;
    }
    table
}

static BRANCHES: [[u8; 2]; N_STATES] = branch_table();

/// Path metrics are re-centred every this many steps.
const RENORM_INTERVAL: usize = 8;

/// Soft Viterbi decoding of a zero-tail terminated codeword.
///
/// `llrs` holds one triple per trellis step; positive values favour bit 0 and
/// punctured positions carry 0. Returns the information bits without the
/// flush bits.
pub fn viterbi_decode(llrs: &[[f64; 3]]) -> Vec<u8> {
    let steps = llrs.len();
    if steps <= MEMORY {
        return Vec::new();
    }
    // Unreachable states start far below any reachable metric.
    let mut metric = [-1e30f32; N_STATES];
    metric[0] = 0.0;
    let mut next = [0.0f32; N_STATES];
    let mut decisions: Vec<u64> = Vec::with_capacity(steps);

    for (t, l) in llrs.iter().enumerate() {
        let (a, b, c) = (l[0] as f32, l[1] as f32, l[2] as f32);
        // branch metric of each output triple, bit i of the index is c_i
        let bm = [
            a + b + c,
            -a + b + c,
            a - b + c,
            -a - b + c,
            a + b - c,
            -a + b - c,
            a - b - c,
            -a - b - c,
        ];
        let mut word = 0u64;
        for s in 0..N_STATES {
            let p0 = (s << 1) & (N_STATES - 1);
            let [o0, o1] = BRANCHES[s];
            let m0 = metric[p0] + bm[o0 as usize];
            let m1 = metric[p0 | 1] + bm[o1 as usize];
            let take1 = m1 > m0;
            next[s] = if take1 { m1 } else { m0 };
            word |= (take1 as u64) << s;
        }
        decisions.push(word);
        std::mem::swap(&mut metric, &mut next);
        if t % RENORM_INTERVAL == RENORM_INTERVAL - 1 {
            let best = metric.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            metric.iter_mut().for_each(|m| *m -= best);
        }
    }

    let mut bits = vec![0u8; steps];
    let mut state = 0usize;
    for t in (0..steps).rev() {
        bits[t] = (state >> (MEMORY - 1)) as u8;
        let x = ((decisions[t] >> state) & 1) as usize;
        state = ((state << 1) | x) & (N_STATES - 1);
    }
    bits.truncate(steps - MEMORY);
    bits
}
