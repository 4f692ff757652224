//! Rate-1/2 binary convolutional code: shift-register encoder and a
//! soft-metric Viterbi decoder that maximizes accumulated credit for
//! coded bits equal to zero.

use crate::error::{QuantError, Result};

/// Rate-1/2 feedforward convolutional code. The register is read with the
/// newest input in the top bit, so a generator written in the usual octal
/// notation (tap k set means the input k steps ago) masks it directly.
#[derive(Clone, Debug)]
pub struct ConvCode {
    generators: [u32; 2],
    constraint_length: u32,
}

/// GF(2) polynomial gcd by Euclid's algorithm on bit strings.
fn gf2_gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let shift_max = (32 - b.leading_zeros()) as i32;
        let mut r = a;
        // Reduce r modulo b by cancelling leading terms.
        while r != 0 {
            let d = (32 - r.leading_zeros()) as i32 - shift_max;
            if d < 0 {
                break;
            }
            r ^= b << d;
        }
        a = b;
        b = r;
    }
    a
}

impl ConvCode {
    /// Generators are octal numerals, e.g. ("133", "171") for the
    /// constraint-length-7 code. They must fit the register, and be
    /// coprime as GF(2) polynomials so the code is non-catastrophic.
    pub fn new(gen_octal: [&str; 2], constraint_length: u32) -> Result<Self> {
        if !(2..=16).contains(&constraint_length) {
            return Err(QuantError::InvalidConfig(format!(
                "constraint length {constraint_length} outside 2..=16"
            )));
        }
        let mut generators = [0u32; 2];
        for (slot, s) in generators.iter_mut().zip(gen_octal) {
            *slot = u32::from_str_radix(s, 8).map_err(|_| {
                QuantError::InvalidConfig(format!("generator {s:?} is not an octal numeral"))
            })?;
        }
        for g in generators {
            if g == 0 || g >= 1 << constraint_length {
                return Err(QuantError::InvalidConfig(format!(
                    "generator {g:o} (octal) does not fit constraint length {constraint_length}"
                )));
            }
        }
        if gf2_gcd(generators[0], generators[1]) != 1 {
            return Err(QuantError::InvalidConfig(format!(
                "generators {:o}/{:o} (octal) share a GF(2) factor; the code is catastrophic",
                generators[0], generators[1]
            )));
        }
        Ok(Self { generators, constraint_length })
    }

    pub fn memory(&self) -> u32 {
        self.constraint_length - 1
    }

    /// Coded bits produced for a frame of `info` bits plus the
    /// zero-flushing tail.
    pub fn coded_len(&self, info_bits: usize) -> usize {
        2 * (info_bits + self.memory() as usize)
    }

    #[inline]
    fn step(&self, state: u32, input: u32) -> (u32, [u8; 2]) {
        let reg = (input << self.memory()) | state;
        let out = [
            ((reg & self.generators[0]).count_ones() & 1) as u8,
            ((reg & self.generators[1]).count_ones() & 1) as u8,
        ];
        (reg >> 1, out)
    }

    /// Encodes the info bits followed by `memory` zero tail bits, so the
    /// encoder ends in the all-zero state.
    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coded_len(info.len()));
        let mut state = 0u32;
        for &b in info.iter().chain(std::iter::repeat_n(&0u8, self.memory() as usize)) {
            let (next, pair) = self.step(state, u32::from(b));
            out.extend_from_slice(&pair);
            state = next;
        }
        out
    }

    /// Soft Viterbi decode. `metrics[j]` is the credit earned when coded
    /// bit j is zero (and forfeited when it is one); the survivor path
    /// maximizes total credit. The trellis is terminated, so traceback
    /// starts from state 0. Returns the info bits without the tail.
    ///
    /// With the newest-bit-on-top register, a successor state encodes the
    /// input in its top bit; the only ambiguity along a survivor path is
    /// the predecessor's dropped low bit, which is what gets recorded.
    pub fn viterbi(&self, metrics: &[f64], info_bits: usize) -> Result<Vec<u8>> {
        if metrics.len() != self.coded_len(info_bits) {
            return Err(QuantError::InvalidConfig(format!(
                "{} bit metrics for a trellis of {} coded bits",
                metrics.len(),
                self.coded_len(info_bits)
            )));
        }
        let m = self.memory();
        let mask = (1u32 << m) - 1;
        let n_states = 1usize << m;
        let steps = info_bits + m as usize;
        let mut score = vec![f64::NEG_INFINITY; n_states];
        score[0] = 0.0;
        let mut next = vec![f64::NEG_INFINITY; n_states];
        let mut dropped = vec![vec![0u8; n_states]; steps];
        for (t, dec) in dropped.iter_mut().enumerate() {
            let credit = |bit: u8, j: usize| if bit == 0 { metrics[2 * t + j] } else { 0.0 };
            let inputs: &[u32] = if t >= info_bits { &[0] } else { &[0, 1] };
            next.fill(f64::NEG_INFINITY);
            for (state, &acc) in score.iter().enumerate() {
                if acc == f64::NEG_INFINITY {
                    continue;
                }
                for &input in inputs {
                    let (to, out) = self.step(state as u32, input);
                    let cand = acc + credit(out[0], 0) + credit(out[1], 1);
                    if cand > next[to as usize] {
                        next[to as usize] = cand;
                        dec[to as usize] = (state & 1) as u8;
                    }
                }
            }
            std::mem::swap(&mut score, &mut next);
        }
        let mut state = 0u32;
        let mut bits = vec![0u8; steps];
        for t in (0..steps).rev() {
            bits[t] = ((state >> (m - 1)) & 1) as u8;
            state = ((state << 1) & mask) | u32::from(dropped[t][state as usize]);
        }
        bits.truncate(info_bits);
        Ok(bits)
    }
}
