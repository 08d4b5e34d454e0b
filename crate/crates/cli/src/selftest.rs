//! Known-answer checks over the whole derivation chain.

use std::process::ExitCode;

use anyhow::Result;
use serde_json::json;

use wpa2_brute::kdf::{compute_mic, derive_kck, derive_pmk, hmac_precompute, hmac_sha1, pbkdf2_block};
use wpa2_brute::pipeline::{cluster_rate, find_preset};
use wpa2_brute::sha1::digest;
use wpa2_brute::{generate_capture, verify_candidate};

use crate::Output;

type Fixture = (&'static str, fn() -> Result<Option<String>>);

fn expect(name: &str, got: impl AsRef<[u8]>, want_hex: &str) -> Result<Option<String>> {
    let got = hex(got.as_ref());
    Ok((got != want_hex).then(|| format!("{name}: got {got}, want {want_hex}")))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha1_vectors() -> Result<Option<String>> {
    let cases: [(&[u8], &str); 3] = [
        (b"", "da39a3ee5e6b4b0d3255bfef95601890afd80709"),
        (b"abc", "a9993e364706816aba3e25717850c26c9cd0d89d"),
        (
            b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq",
            "84983e441c3bd26ebaae4aa1f95129e5e54670f1",
        ),
    ];
    for (msg, want) in cases {
        if let Some(e) = expect("sha1", digest(msg), want)? {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

fn hmac_vectors() -> Result<Option<String>> {
    let cases: [(&[u8], &[u8], &str); 2] = [
        (&[0x0b; 20], b"Hi There", "b617318655057264e28bc0b6fb378c8ef146be00"),
        (b"Jefe", b"what do ya want for nothing?", "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79"),
    ];
    for (key, msg, want) in cases {
        let (states, _) = hmac_precompute(key)?;
        if let Some(e) = expect("hmac-sha1", hmac_sha1(&states, msg).0, want)? {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

fn pbkdf2_vector() -> Result<Option<String>> {
    let (states, _) = hmac_precompute(b"password")?;
    let (block, _) = pbkdf2_block(&states, b"salt", 1)?;
    expect("pbkdf2", block, "4b007901b765489abead49d926f721d065a429c1")
}

fn pmk_vectors() -> Result<Option<String>> {
    let cases: [(&[u8], &[u8], &str); 2] = [
        (b"password", b"IEEE", "f42c6fc52df0ebef9ebb4b90b38a5f902e83fe1b135a70e23aed762e9710a12e"),
        (
            b"ThisIsAPassword",
            b"ThisIsASSID",
            "0dc0d6eb90555ed6419756b9a15ec3e3209b63df707dd508d14581f8982721af",
        ),
    ];
    for (pw, ssid, want) in cases {
        let (pmk, cost) = derive_pmk(pw, ssid)?;
        if cost.get() != 16_386 {
            return Ok(Some(format!("pmk: {cost} compressions, want 16386")));
        }
        if let Some(e) = expect("pmk", pmk.as_bytes(), want)? {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

fn kck_and_mic() -> Result<Option<String>> {
    let (pmk, _) = derive_pmk(b"password", b"IEEE")?;
    let ap = [0x00, 0x11, 0x22, 0x33, 0x44, 0x55];
    let sta = [0x66, 0x77, 0x88, 0x99, 0xaa, 0xbb];
    let an: [u8; 32] = std::array::from_fn(|i| i as u8);
    let sn: [u8; 32] = std::array::from_fn(|i| 32 + i as u8);
    let (kck, cost) = derive_kck(&pmk, &ap, &sta, &an, &sn)?;
    if cost.get() != 5 {
        return Ok(Some(format!("kck: {cost} compressions, want 5")));
    }
    if let Some(e) = expect("kck", kck.as_bytes(), "85c98eca56145629359ac8830bb66a59")? {
        return Ok(Some(e));
    }
    let frame: Vec<u8> = (0..99).collect();
    let (mic, cost) = compute_mic(&kck, &frame);
    if cost.get() != 5 {
        return Ok(Some(format!("mic: {cost} compressions, want 5")));
    }
    expect("mic", mic.as_bytes(), "ef612b96c8f063d1ec3dd181b3564df1")
}

fn capture_round_trip() -> Result<Option<String>> {
    let capture = generate_capture(b"SECRETPW", b"UPC1234567", 1)?;
    let (ok, cost) = verify_candidate(&capture, b"SECRETPW")?;
    if !ok || cost.get() != 16_396 {
        return Ok(Some(format!("true password: match={ok}, {cost} compressions")));
    }
    let (bad, _) = verify_candidate(&capture, b"SECRETPX")?;
    Ok(bad.then(|| "wrong password accepted".to_string()))
}

fn table_rates() -> Result<Option<String>> {
    let cases = [
        ("ztex-1.15y-fpga", 21_956),
        ("ztex-1.15y", 87_826),
        ("ztex-1.15y-x9", 790_436),
        ("xc7k410t", 210_783),
        ("sc5-m505-48", 10_117_584),
    ];
    for (name, want) in cases {
        let got = cluster_rate(&find_preset(name)?.cluster)?;
        if got != want {
            return Ok(Some(format!("{name}: {got} pwd/s, want {want}")));
        }
    }
    Ok(None)
}

pub fn run(out: Output) -> Result<ExitCode> {
    let fixtures: [Fixture; 7] = [
        ("sha1", sha1_vectors),
        ("hmac-sha1", hmac_vectors),
        ("pbkdf2", pbkdf2_vector),
        ("pmk", pmk_vectors),
        ("kck+mic", kck_and_mic),
        ("capture", capture_round_trip),
        ("device rates", table_rates),
    ];
    let mut failures = 0;
    for (name, check) in fixtures {
        let problem = match check() {
            Ok(p) => p,
            Err(e) => Some(format!("{e:#}")),
        };
        failures += problem.is_some() as usize;
        if out.json {
            out.record("selftest", json!({ "name": name, "ok": problem.is_none(), "detail": problem }));
        } else {
            match problem {
                None => println!("ok    {name}"),
                Some(p) => println!("FAIL  {name}: {p}"),
            }
        }
    }
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
