//! Captured 4-way-handshake data: the handful of fields an offline MIC check
//! needs, a line-oriented text file format for them, and a deterministic
//! generator of synthetic captures.
//!
//! ```text
//! # comments start with '#'
//! ssid       = "HomeNet"          # or hex:486f6d654e6574
//! ap_mac     = 02:00:00:00:00:01
//! sta_mac    = 02:00:00:00:00:02
//! anonce     = <64 hex digits>
//! snonce     = <64 hex digits>
//! eapol      = <hex of the whole EAPOL frame>
//! mic_offset = 81
//! mic        = <32 hex digits>
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kdf::{self, check_passphrase, MAX_SSID};

pub const MIC_LEN: usize = 16;

/// Offset of the MIC inside an EAPOL-Key frame (802.1X header, descriptor
/// type, key info, key length, replay counter, nonce, IV, RSC, reserved).
pub const EAPOL_KEY_MIC_OFFSET: usize = 4 + 1 + 2 + 2 + 8 + 32 + 16 + 8 + 8;

const KEYS: [&str; 8] = [
    "ssid",
    "ap_mac",
    "sta_mac",
    "anonce",
    "snonce",
    "eapol",
    "mic_offset",
    "mic",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandshakeCapture {
    ssid: Vec<u8>,
    ap_mac: [u8; 6],
    sta_mac: [u8; 6],
    anonce: [u8; 32],
    snonce: [u8; 32],
    eapol: Vec<u8>,
    mic_offset: usize,
    observed_mic: kdf::Mic,
    zeroed: Vec<u8>,
}

impl HandshakeCapture {
    /// Validates and assembles a capture.
    ///
    /// `eapol` may carry either the observed MIC or zeros at `mic_offset`;
    /// the stored frame always carries the MIC.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ssid: &[u8],
        ap_mac: [u8; 6],
        sta_mac: [u8; 6],
        anonce: [u8; 32],
        snonce: [u8; 32],
        eapol: &[u8],
        mic_offset: usize,
        mic: [u8; MIC_LEN],
    ) -> Result<Self> {
        if ssid.is_empty() || ssid.len() > MAX_SSID {
            return Err(field_err("ssid", format!("must be 1..=32 bytes, got {}", ssid.len())));
        }
        let zeroed = zero_mic_field(eapol, mic_offset)?;
        let embedded = &eapol[mic_offset..mic_offset + MIC_LEN];
        if embedded.iter().any(|&b| b != 0) && embedded != mic {
            return Err(field_err("mic", "does not match the MIC field inside the EAPOL frame"));
        }
        let mut frame = zeroed.clone();
        frame[mic_offset..mic_offset + MIC_LEN].copy_from_slice(&mic);
        Ok(HandshakeCapture {
            ssid: ssid.to_vec(),
            ap_mac,
            sta_mac,
            anonce,
            snonce,
            eapol: frame,
            mic_offset,
            observed_mic: kdf::Mic(mic),
            zeroed,
        })
    }

    pub fn ssid(&self) -> &[u8] {
        &self.ssid
    }
    pub fn ap_mac(&self) -> &[u8; 6] {
        &self.ap_mac
    }
    pub fn sta_mac(&self) -> &[u8; 6] {
        &self.sta_mac
    }
    pub fn anonce(&self) -> &[u8; 32] {
        &self.anonce
    }
    pub fn snonce(&self) -> &[u8; 32] {
        &self.snonce
    }
    /// The frame as captured, MIC included.
    pub fn eapol_frame(&self) -> &[u8] {
        &self.eapol
    }
    /// The frame with its MIC field zeroed, which is what the MIC covers.
    pub fn zeroed_frame(&self) -> &[u8] {
        &self.zeroed
    }
    pub fn mic_offset(&self) -> usize {
        self.mic_offset
    }
    pub fn observed_mic(&self) -> &kdf::Mic {
        &self.observed_mic
    }

    /// SSID for display: the string if it is printable UTF-8, hex otherwise.
    pub fn ssid_display(&self) -> String {
        match printable(&self.ssid) {
            Some(s) => s.to_string(),
            None => format!("hex:{}", hex::encode(&self.ssid)),
        }
    }

    /// Renders the capture in the canonical text form read by [`parse_capture`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let ssid = match printable(&self.ssid) {
            Some(s) => quote(s),
            None => format!("hex:{}", hex::encode(&self.ssid)),
        };
        let _ = writeln!(out, "ssid = {ssid}");
        let _ = writeln!(out, "ap_mac = {}", format_mac(&self.ap_mac));
        let _ = writeln!(out, "sta_mac = {}", format_mac(&self.sta_mac));
        let _ = writeln!(out, "anonce = {}", hex::encode(self.anonce));
        let _ = writeln!(out, "snonce = {}", hex::encode(self.snonce));
        let _ = writeln!(out, "eapol = {}", hex::encode(&self.eapol));
        let _ = writeln!(out, "mic_offset = {}", self.mic_offset);
        let _ = writeln!(out, "mic = {}", hex::encode(self.observed_mic.0));
        out
    }
}

fn field_err(field: &str, reason: impl Into<String>) -> Error {
    Error::CaptureField {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn printable(bytes: &[u8]) -> Option<&str> {
    std::str::from_utf8(bytes)
        .ok()
        .filter(|s| !s.chars().any(char::is_control))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn format_mac(mac: &[u8; 6]) -> String {
    mac.iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(":")
}

/// Copy of `frame` with the 16 MIC bytes at `offset` cleared.
pub fn zero_mic_field(frame: &[u8], offset: usize) -> Result<Vec<u8>> {
    if offset.checked_add(MIC_LEN).is_none_or(|end| end > frame.len()) {
        return Err(Error::MicOffset {
            offset,
            len: frame.len(),
        });
    }
    let mut out = frame.to_vec();
    out[offset..offset + MIC_LEN].fill(0);
    Ok(out)
}

fn parse_ssid(value: &str) -> Result<Vec<u8>> {
    if let Some(h) = value.strip_prefix("hex:") {
        return hex::decode(h.trim()).map_err(|e| field_err("ssid", e.to_string()));
    }
    let inner = value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .filter(|_| value.len() >= 2)
        .ok_or_else(|| field_err("ssid", "expected a quoted string or hex:"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                _ => return Err(field_err("ssid", "bad escape sequence")),
            },
            '"' => return Err(field_err("ssid", "unescaped quote")),
            c => out.push(c),
        }
    }
    Ok(out.into_bytes())
}

fn parse_hex<const N: usize>(field: &str, value: &str) -> Result<[u8; N]> {
    let bytes = hex::decode(value).map_err(|e| field_err(field, e.to_string()))?;
    bytes
        .as_slice()
        .try_into()
        .map_err(|_| field_err(field, format!("expected {N} bytes, got {}", bytes.len())))
}

fn parse_mac(field: &str, value: &str) -> Result<[u8; 6]> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 6 || parts.iter().any(|p| p.len() != 2) {
        return Err(field_err(field, "expected six colon-separated hex octets"));
    }
    let mut mac = [0u8; 6];
    for (b, p) in mac.iter_mut().zip(parts) {
        *b = u8::from_str_radix(p, 16).map_err(|e| field_err(field, e.to_string()))?;
    }
    Ok(mac)
}

/// Parses the `key = value` capture format.
pub fn parse_capture(text: &str) -> Result<HandshakeCapture> {
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::CaptureSyntax {
            line: idx + 1,
            reason: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(Error::CaptureSyntax {
                line: idx + 1,
                reason: format!("unknown key `{key}`"),
            });
        }
        if fields.insert(key, value).is_some() {
            return Err(Error::CaptureSyntax {
                line: idx + 1,
                reason: format!("duplicate key `{key}`"),
            });
        }
    }
    let get = |key: &str| {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| field_err(key, "missing"))
    };

    let ssid = parse_ssid(get("ssid")?)?;
    let ap_mac = parse_mac("ap_mac", get("ap_mac")?)?;
    let sta_mac = parse_mac("sta_mac", get("sta_mac")?)?;
    let anonce = parse_hex::<32>("anonce", get("anonce")?)?;
    let snonce = parse_hex::<32>("snonce", get("snonce")?)?;
    let eapol = hex::decode(get("eapol")?).map_err(|e| field_err("eapol", e.to_string()))?;
    let mic_offset: usize = get("mic_offset")?
        .parse()
        .map_err(|e: std::num::ParseIntError| field_err("mic_offset", e.to_string()))?;
    let mic = parse_hex::<MIC_LEN>("mic", get("mic")?)?;
    HandshakeCapture::new(&ssid, ap_mac, sta_mac, anonce, snonce, &eapol, mic_offset, mic)
}

/// Which EAPOL-Key frame a synthetic capture carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HandshakeMessage {
    /// Station to AP with SNonce and an RSN element; 121 bytes.
    Two,
    /// Final station acknowledgement without key data; 99 bytes.
    #[default]
    Four,
}

// RSN element: CCMP group and pairwise cipher, PSK AKM.
const RSN_IE: [u8; 22] = [
    0x30, 0x14, 0x01, 0x00, 0x00, 0x0f, 0xac, 0x04, 0x01, 0x00, 0x00, 0x0f, 0xac, 0x04, 0x01,
    0x00, 0x00, 0x0f, 0xac, 0x02, 0x00, 0x00,
];

/// Builds an EAPOL-Key frame (HMAC-SHA1 / AES key descriptor) with a zeroed
/// MIC field at [`EAPOL_KEY_MIC_OFFSET`].
pub fn eapol_key_frame(
    message: HandshakeMessage,
    replay_counter: u64,
    snonce: &[u8; 32],
) -> Vec<u8> {
    let (key_info, nonce, key_data): (u16, [u8; 32], &[u8]) = match message {
        HandshakeMessage::Two => (0x010a, *snonce, &RSN_IE),
        HandshakeMessage::Four => (0x030a, [0u8; 32], &[]),
    };
    let body_len = 95 + key_data.len();
    let mut f = Vec::with_capacity(4 + body_len);
    f.push(0x01); // 802.1X-2001
    f.push(0x03); // EAPOL-Key
    f.extend_from_slice(&(body_len as u16).to_be_bytes());
    f.push(0x02); // RSN descriptor
    f.extend_from_slice(&key_info.to_be_bytes());
    f.extend_from_slice(&0u16.to_be_bytes());
    f.extend_from_slice(&replay_counter.to_be_bytes());
    f.extend_from_slice(&nonce);
    f.extend_from_slice(&[0u8; 16 + 8 + 8]);
    debug_assert_eq!(f.len(), EAPOL_KEY_MIC_OFFSET);
    f.extend_from_slice(&[0u8; MIC_LEN]);
    f.extend_from_slice(&(key_data.len() as u16).to_be_bytes());
    f.extend_from_slice(key_data);
    f
}

/// Deterministic synthetic capture whose MIC verifies under `password`.
pub fn generate_capture(password: &[u8], ssid: &[u8], seed: u64) -> Result<HandshakeCapture> {
    generate_capture_with(password, ssid, seed, HandshakeMessage::default())
}

pub fn generate_capture_with(
    password: &[u8],
    ssid: &[u8],
    seed: u64,
    message: HandshakeMessage,
) -> Result<HandshakeCapture> {
    check_passphrase(password)?;
    if ssid.is_empty() || ssid.len() > MAX_SSID {
        return Err(field_err("ssid", format!("must be 1..=32 bytes, got {}", ssid.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mac = || {
        let mut m: [u8; 6] = rng.gen();
        m[0] = (m[0] & 0xfe) | 0x02; // unicast, locally administered
        m
    };
    let ap_mac = mac();
    let sta_mac = mac();
    let anonce: [u8; 32] = rng.gen();
    let snonce: [u8; 32] = rng.gen();
    let replay: u64 = rng.gen_range(1..1 << 16);

    let frame = eapol_key_frame(message, replay, &snonce);
    let (pmk, _) = kdf::derive_pmk(password, ssid)?;
    let (kck, _) = kdf::derive_kck(&pmk, &ap_mac, &sta_mac, &anonce, &snonce)?;
    let (mic, _) = kdf::compute_mic(&kck, &frame);
    HandshakeCapture::new(
        ssid,
        ap_mac,
        sta_mac,
        anonce,
        snonce,
        &frame,
        EAPOL_KEY_MIC_OFFSET,
        mic.0,
    )
}
