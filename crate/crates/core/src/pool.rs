//! Constant-size pool of working blocks.
//!
//! Blocks are materialized lazily from the keyspace cursor so the pool never
//! holds more than `capacity` unfinished blocks. A block goes
//! free → assigned → done; a worker that dies returns its block to free so the
//! next idle worker picks it up again. Finished blocks leave the pool and are
//! recorded in a ledger.

use std::collections::BTreeMap;
use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::keyspace::{BlockStatus, Blocks, WorkBlock};

#[derive(Debug)]
struct PoolState {
    live: BTreeMap<u64, WorkBlock>,
    attempts: BTreeMap<u64, u32>,
    source: Blocks,
    ledger: Vec<WorkBlock>,
    done_candidates: u64,
    /// Blocks starting at or past this offset are no longer issued.
    horizon: u64,
    first_done_at: Option<Instant>,
}

#[derive(Debug)]
pub struct BlockPool {
    capacity: usize,
    total: u64,
    started: Instant,
    state: Mutex<PoolState>,
    changed: Condvar,
}

/// Point-in-time view of pool progress.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProgressSnapshot {
    pub blocks_done: u64,
    pub blocks_assigned: u64,
    pub blocks_free: u64,
    pub candidates_done: u64,
    pub candidates_total: u64,
    pub fraction: f64,
    /// Completed candidates per second since the pool was created.
    pub rate: Option<f64>,
    /// Seconds until the remaining candidates are done at `rate`.
    pub eta_secs: Option<f64>,
    pub elapsed_secs: f64,
}

impl ProgressSnapshot {
    pub fn eta_display(&self) -> String {
        match self.eta_secs {
            Some(s) => format!("{s:.0}s"),
            None => "–".to_string(),
        }
    }
}

impl BlockPool {
    pub fn new(blocks: Blocks, capacity: usize) -> Self {
        let capacity = capacity.max(1);
        let total = blocks.remaining_candidates();
        let mut state = PoolState {
            live: BTreeMap::new(),
            attempts: BTreeMap::new(),
            source: blocks,
            ledger: Vec::new(),
            done_candidates: 0,
            horizon: u64::MAX,
            first_done_at: None,
        };
        refill(&mut state, capacity);
        BlockPool {
            capacity,
            total,
            started: Instant::now(),
            state: Mutex::new(state),
            changed: Condvar::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn lock(&self) -> MutexGuard<'_, PoolState> {
        // a panicking worker never holds the lock across user code
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Hands out the lowest-offset free block, if any.
    pub fn acquire_block(&self) -> Option<WorkBlock> {
        let mut st = self.lock();
        let horizon = st.horizon;
        let block = st
            .live
            .values_mut()
            .find(|b| b.status == BlockStatus::Free && b.start_offset < horizon)?;
        block.status = BlockStatus::Assigned;
        let block = *block;
        *st.attempts.entry(block.block_id).or_insert(0) += 1;
        Some(block)
    }

    /// Like [`acquire_block`](Self::acquire_block) but waits while blocks are
    /// in flight elsewhere. Returns `None` once nothing is left to hand out.
    pub fn acquire_block_wait(&self, timeout: Duration) -> Option<WorkBlock> {
        let deadline = Instant::now() + timeout;
        loop {
            if let Some(b) = self.acquire_block() {
                return Some(b);
            }
            let st = self.lock();
            if !has_pending(&st) {
                return None;
            }
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            let _ = self
                .changed
                .wait_timeout(st, (deadline - now).min(Duration::from_millis(50)));
        }
    }

    pub fn complete_block(&self, id: u64) -> Result<WorkBlock> {
        let mut st = self.lock();
        let block = st.live.get(&id).copied().ok_or_else(|| done_or_unknown(&st, id))?;
        if block.status != BlockStatus::Assigned {
            return Err(illegal(id, "complete", block.status));
        }
        st.live.remove(&id);
        st.attempts.remove(&id);
        let done = WorkBlock {
            status: BlockStatus::Done,
            ..block
        };
        st.ledger.push(done);
        st.done_candidates += done.n;
        st.first_done_at.get_or_insert_with(Instant::now);
        refill(&mut st, self.capacity);
        drop(st);
        self.changed.notify_all();
        Ok(done)
    }

    /// Returns an assigned block to the free state; reports how many times it
    /// has been handed out so far.
    pub fn abandon_block(&self, id: u64) -> Result<u32> {
        let mut st = self.lock();
        let attempts = st.attempts.get(&id).copied().unwrap_or(0);
        let block = st.live.get_mut(&id).ok_or(Error::UnknownBlock(id))?;
        if block.status != BlockStatus::Assigned {
            return Err(illegal(id, "abandon", block.status));
        }
        block.status = BlockStatus::Free;
        drop(st);
        self.changed.notify_all();
        Ok(attempts)
    }

    /// Stops issuing blocks at or beyond `offset`. Free blocks past it are
    /// dropped and the cursor no longer advances past it.
    pub fn restrict_to(&self, offset: u64) {
        let mut st = self.lock();
        if offset < st.horizon {
            st.horizon = offset;
            st.live
                .retain(|_, b| b.status != BlockStatus::Free || b.start_offset < offset);
        }
        drop(st);
        self.changed.notify_all();
    }

    /// Whether every block below the horizon has completed.
    pub fn is_drained(&self) -> bool {
        !has_pending(&self.lock())
    }

    pub fn live_blocks(&self) -> Vec<WorkBlock> {
        self.lock().live.values().copied().collect()
    }

    /// Completed blocks in completion order.
    pub fn ledger(&self) -> Vec<WorkBlock> {
        self.lock().ledger.clone()
    }

    pub fn progress_report(&self) -> ProgressSnapshot {
        let st = self.lock();
        let assigned = st
            .live
            .values()
            .filter(|b| b.status == BlockStatus::Assigned)
            .count() as u64;
        let free = st.live.len() as u64 - assigned;
        let elapsed = self.started.elapsed().as_secs_f64();
        let rate = st
            .first_done_at
            .filter(|_| elapsed > 0.0)
            .map(|_| st.done_candidates as f64 / elapsed);
        let remaining = self.total - st.done_candidates.min(self.total);
        let eta = rate.filter(|&r| r > 0.0).map(|r| remaining as f64 / r);
        ProgressSnapshot {
            blocks_done: st.ledger.len() as u64,
            blocks_assigned: assigned,
            blocks_free: free,
            candidates_done: st.done_candidates,
            candidates_total: self.total,
            fraction: if self.total == 0 {
                1.0
            } else {
                st.done_candidates as f64 / self.total as f64
            },
            rate,
            eta_secs: eta,
            elapsed_secs: elapsed,
        }
    }
}

fn has_pending(st: &PoolState) -> bool {
    st.live.values().any(|b| b.start_offset < st.horizon)
        || (st.source.remaining_candidates() > 0 && st.source.cursor() < st.horizon)
}

fn refill(st: &mut PoolState, capacity: usize) {
    while st.live.len() < capacity && st.source.cursor() < st.horizon {
        match st.source.next() {
            Some(b) => {
                st.live.insert(b.block_id, b);
            }
            None => break,
        }
    }
}

fn illegal(id: u64, action: &'static str, status: BlockStatus) -> Error {
    Error::IllegalTransition {
        id,
        action,
        status: status.as_str(),
    }
}

fn done_or_unknown(st: &PoolState, id: u64) -> Error {
    if st.ledger.iter().any(|b| b.block_id == id) {
        illegal(id, "complete", BlockStatus::Done)
    } else {
        Error::UnknownBlock(id)
    }
}
