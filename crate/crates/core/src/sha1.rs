//! SHA1 at block granularity.
//!
//! Everything the key derivation does reduces to [`compress_block`] calls, so the
//! chaining state and the 512-bit message block are public value types. Callers
//! cache mid-stream states and resume from them with [`resume`], which also
//! reports how many compressions it spent.

use std::fmt;

use crate::error::{Error, Result};

/// Bytes per message block.
pub const BLOCK_LEN: usize = 64;
/// Bytes in a rendered digest.
pub const DIGEST_LEN: usize = 20;

const IV: [u32; 5] = [0x6745_2301, 0xefcd_ab89, 0x98ba_dcfe, 0x1032_5476, 0xc3d2_e1f0];

const ROUND_CONSTANTS: [u32; 4] = [0x5a82_7999, 0x6ed9_eba1, 0x8f1b_bcdc, 0xca62_c1d6];

/// Five 32-bit chaining words, H0..H4.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sha1State(pub [u32; 5]);

impl Sha1State {
    pub const INITIAL: Sha1State = Sha1State(IV);

    pub fn words(&self) -> &[u32; 5] {
        &self.0
    }

    /// Big-endian rendering of the five words.
    pub fn to_bytes(&self) -> [u8; DIGEST_LEN] {
        let mut out = [0u8; DIGEST_LEN];
        for (chunk, word) in out.chunks_exact_mut(4).zip(self.0.iter()) {
            chunk.copy_from_slice(&word.to_be_bytes());
        }
        out
    }
}

impl Default for Sha1State {
    fn default() -> Self {
        Self::INITIAL
    }
}

impl fmt::Debug for Sha1State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Sha1State({:08x} {:08x} {:08x} {:08x} {:08x})",
            self.0[0], self.0[1], self.0[2], self.0[3], self.0[4]
        )
    }
}

/// Sixteen big-endian message words.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct MessageBlock(pub [u32; 16]);

impl MessageBlock {
    pub fn from_bytes(bytes: &[u8; BLOCK_LEN]) -> Self {
        let mut words = [0u32; 16];
        for (word, chunk) in words.iter_mut().zip(bytes.chunks_exact(4)) {
            *word = u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        }
        MessageBlock(words)
    }

    pub fn to_bytes(&self) -> [u8; BLOCK_LEN] {
        let mut out = [0u8; BLOCK_LEN];
        for (chunk, word) in out.chunks_exact_mut(4).zip(self.0.iter()) {
            chunk.copy_from_slice(&word.to_be_bytes());
        }
        out
    }
}

/// The eighty expanded schedule words W0..W79.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MessageSchedule(pub [u32; 80]);

pub fn expand_schedule(block: &MessageBlock) -> MessageSchedule {
    let mut w = [0u32; 80];
    w[..16].copy_from_slice(&block.0);
    for t in 16..80 {
        w[t] = (w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]).rotate_left(1);
    }
    MessageSchedule(w)
}

fn check_round(t: usize) -> Result<()> {
    if t < 80 {
        Ok(())
    } else {
        Err(Error::RoundOutOfRange(t))
    }
}

/// K_t of the 20-round band containing `t`.
pub fn round_constant(t: usize) -> Result<u32> {
    check_round(t)?;
    Ok(ROUND_CONSTANTS[t / 20])
}

/// f_t: choose, parity, majority, parity.
pub fn round_function(t: usize, x: u32, y: u32, z: u32) -> Result<u32> {
    check_round(t)?;
    Ok(band_function(t / 20, x, y, z))
}

#[inline(always)]
fn band_function(band: usize, x: u32, y: u32, z: u32) -> u32 {
    match band {
        0 => (x & y) ^ (!x & z),
        2 => (x & y) ^ (x & z) ^ (y & z),
        _ => x ^ y ^ z,
    }
}

/// Runs the 80 rounds over `block` and adds the result onto `state`.
///
/// The schedule is kept as a 16-word window instead of all 80 words; the
/// values are the ones [`expand_schedule`] produces.
#[inline]
pub fn compress_block(state: Sha1State, block: &MessageBlock) -> Sha1State {
    let mut w = block.0;
    let [mut a, mut b, mut c, mut d, mut e] = state.0;

    macro_rules! round {
        ($t:expr, $band:expr) => {{
            let wt = if $t < 16 {
                w[$t & 15]
            } else {
                let x = (w[($t + 13) & 15] ^ w[($t + 8) & 15] ^ w[($t + 2) & 15] ^ w[$t & 15])
                    .rotate_left(1);
                w[$t & 15] = x;
                x
            };
            let tmp = a
                .rotate_left(5)
                .wrapping_add(band_function($band, b, c, d))
                .wrapping_add(e)
                .wrapping_add(ROUND_CONSTANTS[$band])
                .wrapping_add(wt);
            e = d;
            d = c;
            c = b.rotate_left(30);
            b = a;
            a = tmp;
        }};
    }
    macro_rules! band {
        ($band:expr) => {
            for i in 0..20 {
                round!($band * 20 + i, $band);
            }
        };
    }
    band!(0);
    band!(1);
    band!(2);
    band!(3);

    let h = state.0;
    Sha1State([
        h[0].wrapping_add(a),
        h[1].wrapping_add(b),
        h[2].wrapping_add(c),
        h[3].wrapping_add(d),
        h[4].wrapping_add(e),
    ])
}

/// Number of compressions needed to absorb and finalize `tail_len` bytes.
pub const fn finalize_cost(tail_len: usize) -> u64 {
    // one 0x80 byte and the 8-byte length field must fit
    (tail_len + 9).div_ceil(BLOCK_LEN) as u64
}

/// Continues a hash from `state`, which has already absorbed `absorbed`
/// bytes (a multiple of 64), over `tail`, then applies the standard padding.
///
/// Returns the final chaining state and the number of compressions spent.
pub fn resume(state: Sha1State, absorbed: u64, tail: &[u8]) -> (Sha1State, u64) {
    debug_assert_eq!(absorbed % BLOCK_LEN as u64, 0);
    let mut state = state;
    let mut compressions = 0u64;

    let mut chunks = tail.chunks_exact(BLOCK_LEN);
    for chunk in &mut chunks {
        let block = MessageBlock::from_bytes(chunk.try_into().expect("64-byte chunk"));
        state = compress_block(state, &block);
        compressions += 1;
    }

    let rest = chunks.remainder();
    let bit_len = (absorbed + tail.len() as u64).wrapping_mul(8);
    let mut buf = [0u8; 2 * BLOCK_LEN];
    buf[..rest.len()].copy_from_slice(rest);
    buf[rest.len()] = 0x80;
    let padded = if rest.len() + 9 <= BLOCK_LEN { BLOCK_LEN } else { 2 * BLOCK_LEN };
    buf[padded - 8..padded].copy_from_slice(&bit_len.to_be_bytes());
    for chunk in buf[..padded].chunks_exact(BLOCK_LEN) {
        let block = MessageBlock::from_bytes(chunk.try_into().expect("64-byte chunk"));
        state = compress_block(state, &block);
        compressions += 1;
    }
    debug_assert_eq!(compressions, finalize_cost(tail.len()));
    (state, compressions)
}

/// One-shot SHA1.
pub fn digest(message: &[u8]) -> [u8; DIGEST_LEN] {
    resume(Sha1State::INITIAL, 0, message).0.to_bytes()
}
