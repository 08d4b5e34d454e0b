//! Reference implementations the crate is checked against. The straight-loop
//! SHA1 pieces follow the textbook description; everything above SHA1 uses the
//! RustCrypto crates.

#![allow(dead_code, clippy::manual_rotate, clippy::needless_range_loop)]

use hmac::{Hmac, Mac};
use sha1::{Digest, Sha1};

type HmacSha1 = Hmac<Sha1>;

pub fn schedule_oracle(words: &[u32; 16]) -> Vec<u32> {
    let mut w = Vec::with_capacity(80);
    for t in 0..80 {
        if t < 16 {
            w.push(words[t]);
        } else {
            let x = w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16];
            w.push((x << 1) | (x >> 31));
        }
    }
    w
}

pub fn compress_oracle(h: [u32; 5], words: &[u32; 16]) -> [u32; 5] {
    let w = schedule_oracle(words);
    let (mut a, mut b, mut c, mut d, mut e) = (h[0], h[1], h[2], h[3], h[4]);
    for t in 0..80 {
        let (f, k) = if t <= 19 {
            ((b & c) | ((!b) & d), 0x5a827999u32)
        } else if t <= 39 {
            (b ^ c ^ d, 0x6ed9eba1)
        } else if t <= 59 {
            ((b & c) | (b & d) | (c & d), 0x8f1bbcdc)
        } else {
            (b ^ c ^ d, 0xca62c1d6)
        };
        let temp = ((a << 5) | (a >> 27))
            .wrapping_add(f)
            .wrapping_add(e)
            .wrapping_add(k)
            .wrapping_add(w[t]);
        e = d;
        d = c;
        c = (b << 30) | (b >> 2);
        b = a;
        a = temp;
    }
    [
        h[0].wrapping_add(a),
        h[1].wrapping_add(b),
        h[2].wrapping_add(c),
        h[3].wrapping_add(d),
        h[4].wrapping_add(e),
    ]
}

pub fn sha1_oracle(message: &[u8]) -> [u8; 20] {
    Sha1::digest(message).into()
}

pub fn hmac_oracle(key: &[u8], message: &[u8]) -> [u8; 20] {
    let mut mac = HmacSha1::new_from_slice(key).unwrap();
    mac.update(message);
    mac.finalize().into_bytes().into()
}

pub fn pbkdf2_oracle(password: &[u8], salt: &[u8], out: &mut [u8]) {
    pbkdf2::pbkdf2_hmac::<Sha1>(password, salt, 4096, out);
}

pub fn pmk_oracle(password: &[u8], ssid: &[u8]) -> [u8; 32] {
    let mut out = [0u8; 32];
    pbkdf2_oracle(password, ssid, &mut out);
    out
}

pub fn kck_oracle(pmk: &[u8; 32], ap: &[u8; 6], sta: &[u8; 6], an: &[u8; 32], sn: &[u8; 32]) -> [u8; 16] {
    let mut msg = b"Pairwise key expansion\0".to_vec();
    if ap < sta {
        msg.extend_from_slice(ap);
        msg.extend_from_slice(sta);
    } else {
        msg.extend_from_slice(sta);
        msg.extend_from_slice(ap);
    }
    if an < sn {
        msg.extend_from_slice(an);
        msg.extend_from_slice(sn);
    } else {
        msg.extend_from_slice(sn);
        msg.extend_from_slice(an);
    }
    msg.push(0);
    let mut out = [0u8; 16];
    out.copy_from_slice(&hmac_oracle(pmk, &msg)[..16]);
    out
}

pub fn mic_oracle(kck: &[u8; 16], frame: &[u8]) -> [u8; 16] {
    let mut out = [0u8; 16];
    out.copy_from_slice(&hmac_oracle(kck, frame)[..16]);
    out
}

/// Full PMK -> KCK -> MIC chain over a zeroed frame.
pub fn chain_oracle(
    password: &[u8],
    ssid: &[u8],
    ap: &[u8; 6],
    sta: &[u8; 6],
    an: &[u8; 32],
    sn: &[u8; 32],
    zeroed_frame: &[u8],
) -> [u8; 16] {
    let pmk = pmk_oracle(password, ssid);
    let kck = kck_oracle(&pmk, ap, sta, an, sn);
    mic_oracle(&kck, zeroed_frame)
}

/// Odometer successor by hand, rightmost fastest.
pub fn successor_oracle(charset: &[u8], pw: &[u8]) -> Option<Vec<u8>> {
    let mut out = pw.to_vec();
    let mut i = out.len();
    while i > 0 {
        i -= 1;
        let pos = charset.iter().position(|&c| c == out[i]).unwrap();
        if pos + 1 < charset.len() {
            out[i] = charset[pos + 1];
            return Some(out);
        }
        out[i] = charset[0];
    }
    None
}

/// Character-level recognizer for UPC followed by six or seven digits.
pub fn upc_oracle(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() != 9 && chars.len() != 10 {
        return false;
    }
    chars[0] == 'U'
        && chars[1] == 'P'
        && chars[2] == 'C'
        && chars[3..].iter().all(|c| c.is_ascii_digit())
}

/// Tester that panics at chosen offsets a set number of times before
/// answering, standing in for a worker process that dies mid-block.
pub struct FlakyTester {
    pub target: Option<u64>,
    kills: std::sync::Mutex<std::collections::HashMap<u64, u32>>,
}

impl FlakyTester {
    pub fn new(target: Option<u64>, kills: impl IntoIterator<Item = (u64, u32)>) -> Self {
        FlakyTester {
            target,
            kills: std::sync::Mutex::new(kills.into_iter().collect()),
        }
    }
}

impl wpa2_brute::orchestrator::CandidateTester for FlakyTester {
    fn test(
        &self,
        offset: u64,
        _password: &[u8],
    ) -> wpa2_brute::Result<(bool, wpa2_brute::IterationCount)> {
        let die = {
            let mut kills = self.kills.lock().unwrap_or_else(|e| e.into_inner());
            match kills.get_mut(&offset) {
                Some(n) if *n > 0 => {
                    *n -= 1;
                    true
                }
                _ => false,
            }
        };
        if die {
            panic!("injected worker death at offset {offset}");
        }
        Ok((Some(offset) == self.target, wpa2_brute::IterationCount(1)))
    }
}

/// Injected panics are expected; keep them off stderr.
pub fn silence_panics() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        let default = std::panic::take_hook();
        std::panic::set_hook(Box::new(move |info| {
            let msg = info
                .payload()
                .downcast_ref::<String>()
                .map(String::as_str)
                .unwrap_or("");
            if !msg.starts_with("injected worker death") {
                default(info);
            }
        }));
    });
}

/// How many times each offset appears across the ledger's blocks.
pub fn coverage(ledger: &[wpa2_brute::WorkBlock], total: u64) -> Vec<u32> {
    let mut seen = vec![0u32; total as usize];
    for b in ledger {
        for o in b.offsets() {
            seen[o as usize] += 1;
        }
    }
    seen
}

/// Cell counts by scanning every cell for every record.
pub fn tally_oracle(
    records: &[(String, f64, f64)],
    lat_min: f64,
    lon_min: f64,
    rows: usize,
    cols: usize,
    cell: f64,
    matches: impl Fn(&str) -> bool,
) -> Vec<u64> {
    let mut counts = vec![0u64; rows * cols];
    for (ssid, lat, lon) in records {
        if !matches(ssid) {
            continue;
        }
        'cells: for r in 0..rows {
            for c in 0..cols {
                let (la, lo) = (lat_min + r as f64 * cell, lon_min + c as f64 * cell);
                if *lat >= la && *lat < la + cell && *lon >= lo && *lon < lo + cell {
                    counts[r * cols + c] += 1;
                    break 'cells;
                }
            }
        }
    }
    counts
}
