//! Parallel exhaustive search over a password space.
//!
//! Worker threads pull blocks from a [`BlockPool`], test every candidate in
//! them and report back over a channel; the calling thread is the coordinator
//! and the only writer of the outcome. When a worker panics its block is
//! returned to the pool for someone else. When a match turns up, blocks past
//! it stop being issued but blocks before it still finish, so the reported
//! offset is the lowest match in the space regardless of worker count.

use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::handshake::HandshakeCapture;
use crate::kdf::{check_passphrase, IterationCount, Verifier};
use crate::keyspace::{PasswordSpace, WorkBlock};
use crate::pool::{BlockPool, ProgressSnapshot};

pub const DEFAULT_BLOCK_SIZE: u64 = 1 << 16;

/// Decides whether one candidate is the password.
pub trait CandidateTester: Sync {
    fn test(&self, offset: u64, password: &[u8]) -> Result<(bool, IterationCount)>;
}

impl CandidateTester for Verifier {
    fn test(&self, _offset: u64, password: &[u8]) -> Result<(bool, IterationCount)> {
        self.check(password)
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub workers: usize,
    pub block_size: u64,
    /// Live blocks held by the pool; twice the worker count when `None`.
    pub pool_capacity: Option<usize>,
    /// Hand-outs of a single block before the search gives up on it.
    pub max_attempts: u32,
    pub progress_interval: Duration,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            block_size: DEFAULT_BLOCK_SIZE,
            pool_capacity: None,
            max_attempts: 8,
            progress_interval: Duration::from_secs(5),
        }
    }
}

impl SearchConfig {
    pub fn new(workers: usize, block_size: u64) -> Self {
        SearchConfig {
            workers,
            block_size,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    /// Lowest matching offset.
    pub found: Option<u64>,
    /// Candidate tests run, including those of abandoned attempts.
    pub candidates_tested: u64,
    pub sha1_compressions: u64,
    pub blocks_completed: u64,
    pub blocks_abandoned: u64,
    pub elapsed_secs: f64,
    /// Completed blocks, in completion order.
    #[serde(skip)]
    pub ledger: Vec<WorkBlock>,
}

enum Event {
    BlockDone,
    Abandoned,
    Found(u64),
    Failed(Error),
}

struct Shared<'a, T> {
    space: &'a PasswordSpace,
    tester: &'a T,
    pool: &'a BlockPool,
    best: AtomicU64,
    abort: AtomicBool,
    tested: AtomicU64,
    compressions: AtomicU64,
}

impl<T: CandidateTester> Shared<'_, T> {
    /// Tests the block front to back, stopping early once a lower match
    /// exists. Returns the first match inside the block.
    fn run_block(&self, block: &WorkBlock) -> Result<Option<u64>> {
        let mut password = self.space.index_to_password(block.start_offset)?;
        for offset in block.offsets() {
            if offset >= self.best.load(Ordering::Acquire) || self.abort.load(Ordering::Relaxed) {
                break;
            }
            let (hit, cost) = self.tester.test(offset, &password)?;
            self.tested.fetch_add(1, Ordering::Relaxed);
            self.compressions.fetch_add(cost.get(), Ordering::Relaxed);
            if hit {
                return Ok(Some(offset));
            }
            self.space.advance(&mut password);
        }
        Ok(None)
    }

    fn worker(&self, events: mpsc::Sender<Event>, max_attempts: u32) {
        while !self.abort.load(Ordering::Relaxed) {
            let Some(block) = self.pool.acquire_block_wait(Duration::from_millis(200)) else {
                if self.pool.is_drained() {
                    break;
                }
                continue;
            };
            let result = panic::catch_unwind(AssertUnwindSafe(|| self.run_block(&block)));
            let event = match result {
                Ok(Ok(hit)) => {
                    if let Some(offset) = hit {
                        self.best.fetch_min(offset, Ordering::AcqRel);
                        self.pool.restrict_to(offset + 1);
                        let _ = events.send(Event::Found(offset));
                    }
                    match self.pool.complete_block(block.block_id) {
                        Ok(_) => Event::BlockDone,
                        Err(e) => Event::Failed(e),
                    }
                }
                Ok(Err(e)) => Event::Failed(e),
                Err(_) => match self.pool.abandon_block(block.block_id) {
                    Ok(attempts) if attempts >= max_attempts => Event::Failed(Error::BlockFailed {
                        id: block.block_id,
                        attempts,
                    }),
                    Ok(_) => Event::Abandoned,
                    Err(e) => Event::Failed(e),
                },
            };
            if matches!(event, Event::Failed(_)) {
                self.abort.store(true, Ordering::Relaxed);
            }
            if events.send(event).is_err() {
                break;
            }
        }
    }
}

/// Searches `space` with `config.workers` threads, calling `on_progress`
/// every `config.progress_interval`.
pub fn search<T: CandidateTester>(
    space: &PasswordSpace,
    tester: &T,
    config: &SearchConfig,
    mut on_progress: Option<&mut dyn FnMut(&ProgressSnapshot)>,
) -> Result<SearchOutcome> {
    if config.workers == 0 {
        return Err(Error::NoWorkers);
    }
    let started = Instant::now();
    let capacity = config.pool_capacity.unwrap_or(config.workers * 2);
    let pool = BlockPool::new(space.blocks(config.block_size)?, capacity);
    let shared = Shared {
        space,
        tester,
        pool: &pool,
        best: AtomicU64::new(u64::MAX),
        abort: AtomicBool::new(false),
        tested: AtomicU64::new(0),
        compressions: AtomicU64::new(0),
    };

    let mut found: Option<u64> = None;
    let mut failure: Option<Error> = None;
    let mut completed = 0u64;
    let mut abandoned = 0u64;

    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..config.workers {
            let tx = tx.clone();
            let shared = &shared;
            scope.spawn(move || shared.worker(tx, config.max_attempts));
        }
        drop(tx);

        let mut next_tick = Instant::now() + config.progress_interval;
        loop {
            let wait = next_tick.saturating_duration_since(Instant::now());
            match rx.recv_timeout(wait) {
                Ok(Event::BlockDone) => completed += 1,
                Ok(Event::Abandoned) => abandoned += 1,
                Ok(Event::Found(offset)) => {
                    found = Some(found.map_or(offset, |f: u64| f.min(offset)));
                }
                Ok(Event::Failed(e)) => {
                    failure.get_or_insert(e);
                }
                Err(RecvTimeoutError::Timeout) => {
                    if let Some(cb) = on_progress.as_mut() {
                        cb(&pool.progress_report());
                    }
                    next_tick = Instant::now() + config.progress_interval;
                }
                Err(RecvTimeoutError::Disconnected) => break,
            }
        }
    });

    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SearchOutcome {
        found,
        candidates_tested: shared.tested.into_inner(),
        sha1_compressions: shared.compressions.into_inner(),
        blocks_completed: completed,
        blocks_abandoned: abandoned,
        elapsed_secs: started.elapsed().as_secs_f64(),
        ledger: pool.ledger(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackOutcome {
    pub found: bool,
    pub offset: Option<u64>,
    #[serde(serialize_with = "lossy_bytes")]
    pub password: Option<Vec<u8>>,
    pub candidates_tested: u64,
    pub sha1_compressions: u64,
    pub elapsed_secs: f64,
    /// Candidates per second.
    pub rate: f64,
    /// SHA1 compressions per second.
    pub compression_rate: f64,
}

fn lossy_bytes<S: serde::Serializer>(v: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_some(&String::from_utf8_lossy(b)),
        None => s.serialize_none(),
    }
}

/// Recovers the passphrase behind `capture` by sweeping `space`.
pub fn run_attack(
    capture: &HandshakeCapture,
    space: &PasswordSpace,
    config: &SearchConfig,
    on_progress: Option<&mut dyn FnMut(&ProgressSnapshot)>,
) -> Result<AttackOutcome> {
    check_passphrase(space.start_password())?;
    let verifier = Verifier::new(capture)?;
    let outcome = search(space, &verifier, config, on_progress)?;
    let password = outcome
        .found
        .map(|offset| space.index_to_password(offset))
        .transpose()?;
    let secs = outcome.elapsed_secs.max(f64::MIN_POSITIVE);
    Ok(AttackOutcome {
        found: outcome.found.is_some(),
        offset: outcome.found,
        password,
        candidates_tested: outcome.candidates_tested,
        sha1_compressions: outcome.sha1_compressions,
        elapsed_secs: outcome.elapsed_secs,
        rate: outcome.candidates_tested as f64 / secs,
        compression_rate: outcome.sha1_compressions as f64 / secs,
    })
}
