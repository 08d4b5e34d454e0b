//! Release gate. Each check prints one PASS/FAIL line; the process exits
//! non-zero if any check fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wpa2_brute::handshake::generate_capture;
use wpa2_brute::kdf::{
    compute_mic, derive_kck, derive_pmk, hmac_precompute, hmac_sha1, pbkdf2_block, verify_candidate,
    IterationCount, Kck, Pmk,
};
use wpa2_brute::orchestrator::search;
use wpa2_brute::pipeline::{
    attack_duration, cluster_rate, find_preset, ideal_rate, simulate_core_batch, DeviceSpec,
};
use wpa2_brute::sha1::digest;
use wpa2_brute::survey::{aggregate, match_default_ssid, GridSpec, NetworkRecord, SsidPattern};
use wpa2_brute::{run_attack, Charset, PasswordSpace, SearchConfig};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const SAMPLES: usize = 1_000;

fn bytes(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<u8> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| rng.gen()).collect()
}

fn oracle_equivalence() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for i in 0..SAMPLES {
        let msg = bytes(&mut rng, 0, 300);
        ensure!(digest(&msg) == sha1_oracle(&msg), "sha1 sample {i}, len {}", msg.len());
    }
    for i in 0..SAMPLES {
        let key = bytes(&mut rng, 0, 64);
        let msg = bytes(&mut rng, 0, 300);
        let (states, _) = hmac_precompute(&key).map_err(|e| e.to_string())?;
        ensure!(hmac_sha1(&states, &msg).0 == hmac_oracle(&key, &msg), "hmac sample {i}");
    }
    for i in 0..SAMPLES {
        let pw = bytes(&mut rng, 8, 63);
        let ssid = bytes(&mut rng, 0, 32);
        let block = rng.gen_range(1..=2u32);
        let (states, _) = hmac_precompute(&pw).map_err(|e| e.to_string())?;
        let (ours, _) = pbkdf2_block(&states, &ssid, block).map_err(|e| e.to_string())?;
        let mut full = [0u8; 40];
        pbkdf2_oracle(&pw, &ssid, &mut full);
        let want = &full[(block as usize - 1) * 20..block as usize * 20];
        ensure!(ours[..] == *want, "pbkdf2 block {block} sample {i}");
    }
    for i in 0..SAMPLES {
        let pw = bytes(&mut rng, 8, 63);
        let ssid = bytes(&mut rng, 0, 32);
        let (pmk, _) = derive_pmk(&pw, &ssid).map_err(|e| e.to_string())?;
        ensure!(pmk.0 == pmk_oracle(&pw, &ssid), "pmk sample {i}");
    }
    for i in 0..SAMPLES {
        let pmk: [u8; 32] = rng.gen();
        let (ap, sta): ([u8; 6], [u8; 6]) = (rng.gen(), rng.gen());
        let (an, sn): ([u8; 32], [u8; 32]) = (rng.gen(), rng.gen());
        let (kck, _) = derive_kck(&Pmk(pmk), &ap, &sta, &an, &sn).map_err(|e| e.to_string())?;
        ensure!(kck.0 == kck_oracle(&pmk, &ap, &sta, &an, &sn), "kck sample {i}");
    }
    for i in 0..SAMPLES {
        let kck: [u8; 16] = rng.gen();
        let frame = bytes(&mut rng, 0, 300);
        ensure!(compute_mic(&Kck(kck), &frame).0 .0 == mic_oracle(&kck, &frame), "mic sample {i}");
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs <= 120.0, "took {secs:.1}s, budget 120s");
    Ok(format!("6 x {SAMPLES} samples bit-exact in {secs:.1}s"))
}

fn iteration_accounting() -> Check {
    let (_, pmk_cost) = derive_pmk(b"password", b"IEEE").map_err(|e| e.to_string())?;
    ensure!(pmk_cost == IterationCount(16_386), "derive_pmk counted {pmk_cost}");
    let cap = generate_capture(b"SECRETPW", b"UPC1234567", 7).map_err(|e| e.to_string())?;
    let (ok, cost) = verify_candidate(&cap, b"SECRETPW").map_err(|e| e.to_string())?;
    ensure!(ok, "generating password rejected");
    ensure!(cost == IterationCount(16_396), "verify_candidate counted {cost}");
    let (bad, bad_cost) = verify_candidate(&cap, b"SECRETPX").map_err(|e| e.to_string())?;
    ensure!(!bad && bad_cost == cost, "wrong password: match={bad}, cost {bad_cost}");
    Ok(format!("derive_pmk {pmk_cost}, verify_candidate {cost}"))
}

fn table_rates() -> Check {
    let expected = [
        ("ztex-1.15y-fpga", 21_956u64),
        ("ztex-1.15y", 87_826),
        ("ztex-2.16", 87_826),
        ("ztex-1.15y-x9", 790_436),
        ("xc7k410t", 210_783),
        ("sc5-m505-48", 10_117_584),
    ];
    let mut got = Vec::new();
    for (name, want) in expected {
        let preset = find_preset(name).map_err(|e| e.to_string())?;
        let rate = cluster_rate(&preset.cluster).map_err(|e| e.to_string())?;
        ensure!(rate == want, "{name}: {rate} != {want}");
        got.push(rate.to_string());
    }
    let single = DeviceSpec::with_mhz("k", 216, 16).map_err(|e| e.to_string())?;
    ensure!(ideal_rate(&single) == 210_783, "ideal_rate 216 MHz x16 = {}", ideal_rate(&single));
    Ok(got.join(", "))
}

fn duration_claims() -> Check {
    let keyspace = 26u64.pow(8);
    let slow = attack_duration(keyspace, 790_436).map_err(|e| e.to_string())?;
    let fast = attack_duration(keyspace, 10_117_584).map_err(|e| e.to_string())?;
    let days = slow.days();
    let hours = fast.hours();
    ensure!(
        days >= Ratio::from_integer(3) && days <= Ratio::new(31, 10),
        "790,436 pwd/s: {days} days"
    );
    ensure!(
        hours >= Ratio::new(570, 100) && hours <= Ratio::new(575, 100),
        "10,117,584 pwd/s: {hours} hours"
    );
    Ok(format!("{:.4} days, {:.4} hours", ratio(days), ratio(hours)))
}

fn ratio(r: Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn speedup() -> Check {
    let preset = find_preset("sc5-m505-48").map_err(|e| e.to_string())?;
    let rate = cluster_rate(&preset.cluster).map_err(|e| e.to_string())?;
    let r = Ratio::new(rate as u128, 1_988_360);
    ensure!(r > Ratio::from_integer(5), "ratio {}", ratio(r));
    Ok(format!("{rate} / 1,988,360 = {:.3}", ratio(r)))
}

fn fill_penalty() -> Check {
    let target = Ratio::new(1u128, 16_397);
    let mut specs = vec![DeviceSpec::with_mhz("default", 100, 1).map_err(|e| e.to_string())?];
    for name in ["ztex-1.15y-fpga", "xc7k410t"] {
        specs.push(find_preset(name).map_err(|e| e.to_string())?.cluster.devices[0].0.clone());
    }
    let mut factors = Vec::new();
    for spec in &specs {
        let sim = simulate_core_batch(spec).map_err(|e| e.to_string())?;
        // the floored rate is off by up to one candidate/s, which swamps a
        // 6e-5 relative gap on small devices, so compare unfloored rates
        let ideal = spec.exact_rate();
        let gap = (ideal - sim.effective_rate_exact) / ideal;
        let factor = gap / target;
        ensure!(
            factor >= Ratio::new(9, 10) && factor <= Ratio::new(11, 10),
            "{}: gap {} is {:.4} x 1/16,397",
            spec.name,
            ratio(gap),
            ratio(factor)
        );
        factors.push(format!("{:.4}", ratio(factor)));
    }
    Ok(format!("gap / (1/16,397) = {}", factors.join(", ")))
}

fn end_to_end() -> Check {
    let started = Instant::now();
    let charset = Charset::parse("?u").map_err(|e| e.to_string())?;
    let full = PasswordSpace::new(charset.clone(), 8, None).map_err(|e| e.to_string())?;
    let password = b"UPCWPAKQ".to_vec();
    let window = 1_500u64;
    let inside = 1_037u64;
    let abs = full.rank(&password).map_err(|e| e.to_string())?;
    let start = full.index_to_password(abs - inside).map_err(|e| e.to_string())?;
    let next_start = full.index_to_password(abs - inside + window).map_err(|e| e.to_string())?;
    let cap = generate_capture(&password, b"UPC4412873", 42).map_err(|e| e.to_string())?;

    let space = PasswordSpace::new(charset.clone(), 8, Some(&start))
        .map_err(|e| e.to_string())?
        .with_limit(window);
    let mut rates = Vec::new();
    for workers in [1usize, 2, 8] {
        let config = SearchConfig::new(workers, 64);
        let out = run_attack(&cap, &space, &config, None).map_err(|e| e.to_string())?;
        ensure!(out.found, "workers={workers}: not found");
        ensure!(out.offset == Some(inside), "workers={workers}: offset {:?}", out.offset);
        ensure!(out.password.as_deref() == Some(&password[..]), "workers={workers}: wrong password");
        rates.push(format!("{workers}w {:.0}/s", out.rate));
    }

    let adjacent = PasswordSpace::new(charset, 8, Some(&next_start))
        .map_err(|e| e.to_string())?
        .with_limit(window);
    let out = run_attack(&cap, &adjacent, &SearchConfig::new(2, 64), None).map_err(|e| e.to_string())?;
    ensure!(!out.found, "adjacent window matched at {:?}", out.offset);
    ensure!(out.candidates_tested == window, "adjacent window tested {}", out.candidates_tested);
    rates.push(format!(
        "adjacent {:.0}/s ({:.2} M compressions/s)",
        out.rate,
        out.compression_rate / 1e6
    ));

    let secs = started.elapsed().as_secs_f64();
    ensure!(secs <= 600.0, "took {secs:.0}s, budget 600s");
    Ok(format!("offset {inside} recovered; measured {} in {secs:.0}s", rates.join(", ")))
}

fn fault_tolerance() -> Check {
    silence_panics();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let schedules = 120;
    let mut deaths = 0u64;
    for s in 0..schedules {
        let total = rng.gen_range(20..1_500u64);
        let space = PasswordSpace::new(Charset::parse("?d").map_err(|e| e.to_string())?, 4, None)
            .map_err(|e| e.to_string())?
            .with_limit(total);
        let kills: Vec<(u64, u32)> = (0..rng.gen_range(1..16))
            .map(|_| (rng.gen_range(0..total), rng.gen_range(1..4)))
            .collect();
        let tester = FlakyTester::new(None, kills);
        let mut config = SearchConfig::new(rng.gen_range(1..=8), rng.gen_range(1..=128));
        config.pool_capacity = Some(rng.gen_range(1..=16));
        config.max_attempts = 64;
        config.progress_interval = Duration::from_millis(5);
        let out = search(&space, &tester, &config, None).map_err(|e| format!("schedule {s}: {e}"))?;
        let seen = coverage(&out.ledger, total);
        ensure!(
            seen.iter().all(|&n| n == 1),
            "schedule {s}: offsets covered {:?} times",
            seen.iter().copied().collect::<HashSet<_>>()
        );
        ensure!(out.blocks_abandoned > 0, "schedule {s}: no worker was killed");
        deaths += out.blocks_abandoned;
    }
    Ok(format!("{schedules} schedules, {deaths} injected deaths, ledger exact every time"))
}

fn keyspace_bijection() -> Check {
    let mut checked = 0u64;
    let mut cases: Vec<(Vec<u8>, usize)> = vec![(b"0123456789".to_vec(), 6)];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    while cases.len() < 12 {
        let k = rng.gen_range(1..=40usize);
        let n = rng.gen_range(1..=6usize);
        if (k as u64).checked_pow(n as u32).is_some_and(|s| s <= 1_000_000) {
            let mut pool: Vec<u8> = (b'!'..=b'~').collect();
            for i in 0..k {
                let j = rng.gen_range(i..pool.len());
                pool.swap(i, j);
            }
            cases.push((pool[..k].to_vec(), n));
        }
    }
    for (symbols, length) in cases {
        let space = PasswordSpace::new(Charset::new(&symbols).map_err(|e| e.to_string())?, length, None)
            .map_err(|e| e.to_string())?;
        let mut current = space.index_to_password(0).map_err(|e| e.to_string())?;
        ensure!(current == vec![symbols[0]; length], "first password wrong");
        for idx in 0..space.size() {
            let pw = space.index_to_password(idx).map_err(|e| e.to_string())?;
            ensure!(pw == current, "enumeration diverges at {idx}");
            let back = space.password_to_index(&pw).map_err(|e| e.to_string())?;
            ensure!(back == idx, "index {idx} -> {pw:?} -> {back}");
            let next = space.next_password(&pw).map_err(|e| e.to_string())?;
            ensure!(next == successor_oracle(&symbols, &pw), "successor of {pw:?}");
            if let Some(n) = next {
                current = n;
            } else {
                ensure!(idx + 1 == space.size(), "enumeration ended early at {idx}");
            }
            checked += 1;
        }
        ensure!(space.index_to_password(space.size()).is_err(), "index past end accepted");
    }
    Ok(format!("{checked} passwords over 12 spaces"))
}

fn survey() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let mut records_total = 0;
    for _ in 0..20 {
        let rows = rng.gen_range(1..20usize);
        let cols = rng.gen_range(1..20usize);
        let cell = [0.01, 0.05, 0.1][rng.gen_range(0..3)];
        let (lat0, lon0) = (rng.gen_range(-60.0..60.0), rng.gen_range(-170.0..160.0));
        let raw: Vec<(String, f64, f64)> = (0..10_000)
            .map(|_| {
                let ssid = match rng.gen_range(0..3) {
                    0 => format!("UPC{}", rng.gen_range(0..100_000_000u64)),
                    1 => format!("UPC{:06}", rng.gen_range(0..1_000_000)),
                    _ => random_ssid(&mut rng),
                };
                let r = rng.gen_range(-1..=rows as i64) as f64 + rng.gen_range(0.02..0.98);
                let c = rng.gen_range(-1..=cols as i64) as f64 + rng.gen_range(0.02..0.98);
                (ssid, lat0 + r * cell, lon0 + c * cell)
            })
            .collect();
        let grid = GridSpec::new(lat0, lon0, lat0 + rows as f64 * cell, lon0 + cols as f64 * cell, cell)
            .map_err(|e| e.to_string())?;
        let records: Vec<NetworkRecord> = raw
            .iter()
            .filter_map(|(s, la, lo)| NetworkRecord::new(s.clone(), *la, *lo))
            .collect();
        ensure!(records.len() == raw.len(), "records dropped");
        let got = aggregate(&records, grid, &SsidPattern::DefaultUpc);
        let want = tally_oracle(&raw, lat0, lon0, rows, cols, cell, upc_oracle);
        ensure!(got.counts == want, "grid {rows}x{cols} @ {cell}: counts differ");
        records_total += records.len();
    }

    let language = SsidPattern::parse("UPC[0-9]{6,7}").map_err(|e| e.to_string())?;
    let mut accepted = 0;
    for i in 0..100_000 {
        let s = if i % 2 == 0 {
            let digits: String = (0..rng.gen_range(0..10)).map(|_| rng.gen_range('0'..='9')).collect();
            let prefix = ["UPC", "UPc", "upc", "XUPC", "UP", ""][rng.gen_range(0..6)];
            let suffix = ["", "", "", " ", "A", "\n"][rng.gen_range(0..6)];
            format!("{prefix}{digits}{suffix}")
        } else {
            random_ssid(&mut rng)
        };
        let want = upc_oracle(&s);
        ensure!(match_default_ssid(&s) == want, "matcher on {s:?}");
        ensure!(language.matches(&s) == want, "regex language on {s:?}");
        accepted += want as u32;
    }
    Ok(format!(
        "{records_total} records tallied exactly; matcher agreed on 100000 strings ({accepted} in language)"
    ))
}

fn random_ssid(rng: &mut ChaCha8Rng) -> String {
    let alphabet: Vec<char> = "UPC0123456789 abcxyz-_".chars().chain(['é', '☃']).collect();
    (0..rng.gen_range(0..14)).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

fn main() -> ExitCode {
    let checks: [Criterion; 10] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 iteration accounting", iteration_accounting),
        ("3 device table rates", table_rates),
        ("4 attack durations", duration_claims),
        ("5 cluster speedup", speedup),
        ("6 pipeline fill penalty", fill_penalty),
        ("7 end-to-end recovery", end_to_end),
        ("8 fault tolerance", fault_tolerance),
        ("9 keyspace bijection", keyspace_bijection),
        ("10 survey aggregation", survey),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance check(s) failed");
        ExitCode::FAILURE
    }
}
