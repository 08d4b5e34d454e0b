//! Offline WPA2-Personal passphrase search.
//!
//! The crate covers the full per-candidate derivation (SHA1 blocks, HMAC over
//! cached pad states, PBKDF2, PMK, KCK, MIC) with exact compression
//! accounting, fixed-length keyspace enumeration, a block-pool search engine,
//! a throughput model for pipelined SHA1 hardware and a density survey of
//! default-SSID networks.
//!
//! ```
//! use wpa2_brute::{generate_capture, run_attack, Charset, PasswordSpace, SearchConfig};
//!
//! let capture = generate_capture(b"AAAAAMQZ", b"UPC1234567", 1)?;
//! let space = PasswordSpace::new(Charset::parse("?u")?, 8, Some(b"AAAAAMQA"))?.with_limit(40);
//! let outcome = run_attack(&capture, &space, &SearchConfig::new(2, 8), None)?;
//! assert_eq!(outcome.password.as_deref(), Some(&b"AAAAAMQZ"[..]));
//! assert_eq!(outcome.offset, Some(25));
//! # Ok::<(), wpa2_brute::Error>(())
//! ```

pub mod error;
pub mod handshake;
pub mod kdf;
pub mod keyspace;
pub mod orchestrator;
pub mod pipeline;
pub mod pool;
pub mod sha1;
pub mod survey;

pub use error::{Error, Result};
pub use handshake::{generate_capture, parse_capture, HandshakeCapture};
pub use kdf::{verify_candidate, IterationCount, Verifier};
pub use keyspace::{Charset, PasswordSpace, WorkBlock};
pub use orchestrator::{run_attack, search, AttackOutcome, SearchConfig};
pub use pool::BlockPool;
