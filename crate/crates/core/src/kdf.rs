//! WPA2-Personal key derivation: HMAC-SHA1 over cached pad states,
//! PBKDF2 (4,096 iterations per output block), the PMK, the KCK prefix of the
//! PTK and the EAPOL MIC.
//!
//! Every operation reports the number of SHA1 block compressions it ran as an
//! [`IterationCount`]. The counts are tallied from the compressions actually
//! executed, not looked up, so they follow input sizes.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};
use crate::handshake::HandshakeCapture;
use crate::sha1::{compress_block, resume, MessageBlock, Sha1State, BLOCK_LEN, DIGEST_LEN};

pub const PBKDF2_ITERATIONS: u32 = 4096;
pub const MIN_PASSPHRASE: usize = 8;
pub const MAX_PASSPHRASE: usize = 63;
pub const MAX_SSID: usize = 32;

const IPAD: u8 = 0x36;
const OPAD: u8 = 0x5c;
const PTK_LABEL: &[u8] = b"Pairwise key expansion";

/// SHA1 block compressions spent by an operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IterationCount(pub u64);

impl IterationCount {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl Add for IterationCount {
    type Output = IterationCount;
    fn add(self, rhs: Self) -> Self {
        IterationCount(self.0 + rhs.0)
    }
}

impl AddAssign for IterationCount {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sum for IterationCount {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(IterationCount(0), Add::add)
    }
}

impl fmt::Display for IterationCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Chaining states after absorbing `key ^ ipad` and `key ^ opad`.
///
/// Both stay fixed for as long as the key does, so every HMAC under the same
/// key resumes from them instead of recompressing the pad blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HmacStatePair {
    pub inner: Sha1State,
    pub outer: Sha1State,
}

impl HmacStatePair {
    pub fn new(key: &[u8]) -> Result<(Self, IterationCount)> {
        if key.len() > BLOCK_LEN {
            return Err(Error::KeyTooLong(key.len()));
        }
        let mut ipad = [IPAD; BLOCK_LEN];
        let mut opad = [OPAD; BLOCK_LEN];
        for (i, &b) in key.iter().enumerate() {
            ipad[i] ^= b;
            opad[i] ^= b;
        }
        let inner = compress_block(Sha1State::INITIAL, &MessageBlock::from_bytes(&ipad));
        let outer = compress_block(Sha1State::INITIAL, &MessageBlock::from_bytes(&opad));
        Ok((HmacStatePair { inner, outer }, IterationCount(2)))
    }
}

/// Same as [`HmacStatePair::new`].
pub fn hmac_precompute(key: &[u8]) -> Result<(HmacStatePair, IterationCount)> {
    HmacStatePair::new(key)
}

/// HMAC-SHA1 resumed from cached pad states. The reported count excludes the
/// two pad compressions already folded into `states`.
pub fn hmac_sha1(states: &HmacStatePair, message: &[u8]) -> ([u8; DIGEST_LEN], IterationCount) {
    let (inner, inner_cost) = resume(states.inner, BLOCK_LEN as u64, message);
    let (outer, outer_cost) = resume(states.outer, BLOCK_LEN as u64, &inner.to_bytes());
    (outer.to_bytes(), IterationCount(inner_cost + outer_cost))
}

/// One 160-bit PBKDF2-HMAC-SHA1 output block with the SSID as salt.
pub fn pbkdf2_block(
    states: &HmacStatePair,
    ssid: &[u8],
    block_index: u32,
) -> Result<([u8; DIGEST_LEN], IterationCount)> {
    if ssid.len() > MAX_SSID {
        return Err(Error::SsidTooLong(ssid.len()));
    }
    if !(1..=2).contains(&block_index) {
        return Err(Error::BlockIndex(block_index));
    }
    let mut salt = [0u8; MAX_SSID + 4];
    salt[..ssid.len()].copy_from_slice(ssid);
    salt[ssid.len()..ssid.len() + 4].copy_from_slice(&block_index.to_be_bytes());
    let (first, mut count) = hmac_sha1(states, &salt[..ssid.len() + 4]);

    // U_i is always 20 bytes: one padded block on each side, with a constant
    // tail of 0x80 and the bit length of pad block plus digest.
    let mut block = MessageBlock::default();
    block.0[5] = 0x8000_0000;
    block.0[15] = ((BLOCK_LEN + DIGEST_LEN) * 8) as u32;

    let mut u = Sha1State(words_of(&first));
    let mut acc = u.0;
    let mut compressions = 0u64;
    for _ in 1..PBKDF2_ITERATIONS {
        block.0[..5].copy_from_slice(&u.0);
        let inner = compress_block(states.inner, &block);
        block.0[..5].copy_from_slice(&inner.0);
        u = compress_block(states.outer, &block);
        compressions += 2;
        for (a, w) in acc.iter_mut().zip(u.0.iter()) {
            *a ^= w;
        }
    }
    count += IterationCount(compressions);
    Ok((Sha1State(acc).to_bytes(), count))
}

fn words_of(digest: &[u8; DIGEST_LEN]) -> [u32; 5] {
    let mut w = [0u32; 5];
    for (word, chunk) in w.iter_mut().zip(digest.chunks_exact(4)) {
        *word = u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    w
}

macro_rules! key_type {
    ($name:ident, $len:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), hex::encode(self.0))
            }
        }
    };
}

key_type!(Pmk, 32);
key_type!(Kck, 16);
key_type!(Mic, 16);

pub fn check_passphrase(password: &[u8]) -> Result<()> {
    if (MIN_PASSPHRASE..=MAX_PASSPHRASE).contains(&password.len()) {
        Ok(())
    } else {
        Err(Error::PassphraseLength(password.len()))
    }
}

/// PMK = PBKDF2 block 1 || first 96 bits of PBKDF2 block 2.
pub fn derive_pmk(password: &[u8], ssid: &[u8]) -> Result<(Pmk, IterationCount)> {
    check_passphrase(password)?;
    if ssid.len() > MAX_SSID {
        return Err(Error::SsidTooLong(ssid.len()));
    }
    let (states, mut count) = HmacStatePair::new(password)?;
    let (t1, c1) = pbkdf2_block(&states, ssid, 1)?;
    let (t2, c2) = pbkdf2_block(&states, ssid, 2)?;
    count += c1 + c2;
    let mut pmk = [0u8; 32];
    pmk[..DIGEST_LEN].copy_from_slice(&t1);
    pmk[DIGEST_LEN..].copy_from_slice(&t2[..32 - DIGEST_LEN]);
    Ok((Pmk(pmk), count))
}

fn fixed<const N: usize>(field: &'static str, bytes: &[u8]) -> Result<[u8; N]> {
    bytes.try_into().map_err(|_| Error::FieldLength {
        field,
        expected: N,
        actual: bytes.len(),
    })
}

/// Builds the PRF input for the first PTK block: label, NUL, sorted MACs,
/// sorted nonces and the zero counter byte.
pub fn ptk_message(
    ap_mac: &[u8],
    sta_mac: &[u8],
    anonce: &[u8],
    snonce: &[u8],
) -> Result<Vec<u8>> {
    let ap: [u8; 6] = fixed("ap_mac", ap_mac)?;
    let sta: [u8; 6] = fixed("sta_mac", sta_mac)?;
    let an: [u8; 32] = fixed("anonce", anonce)?;
    let sn: [u8; 32] = fixed("snonce", snonce)?;

    let mut msg = Vec::with_capacity(PTK_LABEL.len() + 1 + 12 + 64 + 1);
    msg.extend_from_slice(PTK_LABEL);
    msg.push(0);
    msg.extend_from_slice(&ap.min(sta));
    msg.extend_from_slice(&ap.max(sta));
    msg.extend_from_slice(&an.min(sn));
    msg.extend_from_slice(&an.max(sn));
    msg.push(0);
    Ok(msg)
}

fn kck_from_message(pmk: &Pmk, message: &[u8]) -> (Kck, IterationCount) {
    let (states, mut count) = HmacStatePair::new(&pmk.0).expect("32-byte key");
    let (ptk, cost) = hmac_sha1(&states, message);
    count += cost;
    let mut kck = [0u8; 16];
    kck.copy_from_slice(&ptk[..16]);
    (Kck(kck), count)
}

/// First 128 bits of the PTK, i.e. the key confirmation key.
pub fn derive_kck(
    pmk: &Pmk,
    ap_mac: &[u8],
    sta_mac: &[u8],
    anonce: &[u8],
    snonce: &[u8],
) -> Result<(Kck, IterationCount)> {
    let message = ptk_message(ap_mac, sta_mac, anonce, snonce)?;
    Ok(kck_from_message(pmk, &message))
}

/// HMAC-SHA1 of the frame under the KCK, truncated to 128 bits. The frame's
/// MIC field must already be zeroed.
pub fn compute_mic(kck: &Kck, eapol_frame: &[u8]) -> (Mic, IterationCount) {
    let (states, mut count) = HmacStatePair::new(&kck.0).expect("16-byte key");
    let (mac, cost) = hmac_sha1(&states, eapol_frame);
    count += cost;
    let mut mic = [0u8; 16];
    mic.copy_from_slice(&mac[..16]);
    (Mic(mic), count)
}

/// Per-capture precomputation for repeated candidate checks.
#[derive(Clone, Debug)]
pub struct Verifier {
    ssid: Vec<u8>,
    ptk_message: Vec<u8>,
    zeroed_frame: Vec<u8>,
    observed: Mic,
}

impl Verifier {
    pub fn new(capture: &HandshakeCapture) -> Result<Self> {
        Ok(Verifier {
            ssid: capture.ssid().to_vec(),
            ptk_message: ptk_message(
                capture.ap_mac(),
                capture.sta_mac(),
                capture.anonce(),
                capture.snonce(),
            )?,
            zeroed_frame: capture.zeroed_frame().to_vec(),
            observed: *capture.observed_mic(),
        })
    }

    /// Runs the PMK, KCK and MIC chain for one candidate.
    pub fn check(&self, password: &[u8]) -> Result<(bool, IterationCount)> {
        let (pmk, mut count) = derive_pmk(password, &self.ssid)?;
        let (kck, kck_cost) = kck_from_message(&pmk, &self.ptk_message);
        let (mic, mic_cost) = compute_mic(&kck, &self.zeroed_frame);
        count += kck_cost + mic_cost;
        Ok((mic == self.observed, count))
    }
}

/// Derives the MIC for `password` and compares it with the observed one.
pub fn verify_candidate(
    capture: &HandshakeCapture,
    password: &[u8],
) -> Result<(bool, IterationCount)> {
    Verifier::new(capture)?.check(password)
}
