//! Fixed-length password spaces over a single charset.
//!
//! Candidates are ordered like an odometer: the rightmost position turns
//! fastest and carries into its left neighbour when it passes the last symbol.
//! A candidate is addressed by its offset from the space's start password.

use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Charset {
    symbols: Vec<u8>,
    positions: [u8; 256],
}

impl Charset {
    pub fn new(symbols: &[u8]) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Charset("empty".into()));
        }
        if symbols.len() > 255 {
            return Err(Error::Charset("more than 255 symbols".into()));
        }
        let mut positions = [u8::MAX; 256];
        for (i, &s) in symbols.iter().enumerate() {
            if positions[s as usize] != u8::MAX {
                return Err(Error::Charset(format!("duplicate symbol {:?}", s as char)));
            }
            positions[s as usize] = i as u8;
        }
        Ok(Charset {
            symbols: symbols.to_vec(),
            positions,
        })
    }

    /// Parses a charset description. `?u`, `?l`, `?d` and `?h` expand to
    /// upper case, lower case, digits and lower-case hex; `??` is a literal
    /// `?`; anything else is taken literally.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out = Vec::new();
        let mut bytes = spec.bytes();
        while let Some(b) = bytes.next() {
            if b != b'?' {
                out.push(b);
                continue;
            }
            match bytes.next() {
                Some(b'u') => out.extend(b'A'..=b'Z'),
                Some(b'l') => out.extend(b'a'..=b'z'),
                Some(b'd') => out.extend(b'0'..=b'9'),
                Some(b'h') => out.extend(b"0123456789abcdef"),
                Some(b'?') => out.push(b'?'),
                other => {
                    return Err(Error::Charset(format!(
                        "unknown class ?{}",
                        other.map(|c| c as char).unwrap_or(' ')
                    )))
                }
            }
        }
        Charset::new(&out)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn position(&self, symbol: u8) -> Option<usize> {
        match self.positions[symbol as usize] {
            u8::MAX => None,
            p => Some(p as usize),
        }
    }

    fn first(&self) -> u8 {
        self.symbols[0]
    }

    fn last(&self) -> u8 {
        self.symbols[self.symbols.len() - 1]
    }
}

impl fmt::Debug for Charset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Charset({:?})", String::from_utf8_lossy(&self.symbols))
    }
}

/// `symbols^length`, or an error once it no longer fits 64 bits.
pub fn space_size(symbols: usize, length: usize) -> Result<u64> {
    let base = symbols as u64;
    (0..length).try_fold(1u64, |acc, _| acc.checked_mul(base))
        .ok_or(Error::SpaceOverflow { symbols, length })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PasswordSpace {
    charset: Charset,
    length: usize,
    start: Vec<u8>,
    start_rank: u64,
    size: u64,
    limit: Option<u64>,
}

impl PasswordSpace {
    /// The space of `length`-symbol passwords, enumerated from `start`
    /// (the first password when `None`).
    pub fn new(charset: Charset, length: usize, start: Option<&[u8]>) -> Result<Self> {
        if length == 0 {
            return Err(Error::ZeroLength);
        }
        let size = space_size(charset.len(), length)?;
        let start = match start {
            Some(s) => s.to_vec(),
            None => vec![charset.first(); length],
        };
        let mut space = PasswordSpace {
            charset,
            length,
            start: Vec::new(),
            start_rank: 0,
            size,
            limit: None,
        };
        space.start_rank = space.rank(&start)?;
        space.start = start;
        Ok(space)
    }

    /// Restricts enumeration to at most `limit` candidates from the start.
    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn charset(&self) -> &Charset {
        &self.charset
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn start_password(&self) -> &[u8] {
        &self.start
    }

    /// Offset of the start password from the first password of the space.
    pub fn start_rank(&self) -> u64 {
        self.start_rank
    }

    /// All passwords of this length and charset.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Candidates enumerated by this space: from the start password to the
    /// end, capped by the limit.
    pub fn candidate_count(&self) -> u64 {
        let rest = self.size - self.start_rank;
        self.limit.map_or(rest, |l| l.min(rest))
    }

    /// Absolute position of `password` in odometer order.
    pub fn rank(&self, password: &[u8]) -> Result<u64> {
        if password.len() != self.length {
            return Err(self.not_in_space(password));
        }
        let base = self.charset.len() as u64;
        password.iter().try_fold(0u64, |acc, &b| {
            let digit = self
                .charset
                .position(b)
                .ok_or_else(|| self.not_in_space(password))?;
            Ok(acc * base + digit as u64)
        })
    }

    fn not_in_space(&self, password: &[u8]) -> Error {
        Error::NotInSpace(String::from_utf8_lossy(password).into_owned())
    }

    /// Password at `idx` candidates past the start password.
    pub fn index_to_password(&self, idx: u64) -> Result<Vec<u8>> {
        let count = self.candidate_count();
        if idx >= count {
            return Err(Error::IndexOutOfRange { idx, count });
        }
        let mut value = self.start_rank + idx;
        let base = self.charset.len() as u64;
        let mut out = vec![0u8; self.length];
        for slot in out.iter_mut().rev() {
            *slot = self.charset.symbols[(value % base) as usize];
            value /= base;
        }
        Ok(out)
    }

    /// Offset of `password` from the start password.
    pub fn password_to_index(&self, password: &[u8]) -> Result<u64> {
        let rank = self.rank(password)?;
        rank.checked_sub(self.start_rank)
            .filter(|&i| i < self.candidate_count())
            .ok_or_else(|| self.not_in_space(password))
    }

    /// Odometer increment in place. Returns `false`, leaving the password
    /// wrapped to all-first-symbols, when `password` was the last one.
    pub fn advance(&self, password: &mut [u8]) -> bool {
        for slot in password.iter_mut().rev() {
            if *slot == self.charset.last() {
                *slot = self.charset.first();
            } else {
                let p = self.charset.position(*slot).expect("symbol in charset");
                *slot = self.charset.symbols[p + 1];
                return true;
            }
        }
        false
    }

    /// Successor of `current`, or `None` once the space is exhausted.
    pub fn next_password(&self, current: &[u8]) -> Result<Option<Vec<u8>>> {
        self.rank(current)?;
        let mut next = current.to_vec();
        Ok(self.advance(&mut next).then_some(next))
    }

    /// Lazily tiles the candidate range into blocks of `block_size`.
    pub fn blocks(&self, block_size: u64) -> Result<Blocks> {
        if block_size == 0 {
            return Err(Error::ZeroBlockSize);
        }
        Ok(Blocks {
            next_id: 0,
            cursor: 0,
            total: self.candidate_count(),
            block_size,
        })
    }

    pub fn partition(&self, block_size: u64) -> Result<Vec<WorkBlock>> {
        Ok(self.blocks(block_size)?.collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockStatus {
    Free,
    Assigned,
    Done,
}

impl BlockStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockStatus::Free => "free",
            BlockStatus::Assigned => "assigned",
            BlockStatus::Done => "done",
        }
    }
}

/// A contiguous run of `n` candidates starting at `start_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WorkBlock {
    pub block_id: u64,
    pub start_offset: u64,
    pub n: u64,
    pub status: BlockStatus,
}

impl WorkBlock {
    pub fn offsets(&self) -> Range<u64> {
        self.start_offset..self.start_offset + self.n
    }
}

#[derive(Clone, Debug)]
pub struct Blocks {
    next_id: u64,
    cursor: u64,
    total: u64,
    block_size: u64,
}

impl Blocks {
    /// Offset of the first candidate not yet handed out.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn remaining_candidates(&self) -> u64 {
        self.total - self.cursor
    }
}

impl Iterator for Blocks {
    type Item = WorkBlock;

    fn next(&mut self) -> Option<WorkBlock> {
        if self.cursor >= self.total {
            return None;
        }
        let n = self.block_size.min(self.total - self.cursor);
        let block = WorkBlock {
            block_id: self.next_id,
            start_offset: self.cursor,
            n,
            status: BlockStatus::Free,
        };
        self.next_id += 1;
        self.cursor += n;
        Some(block)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.remaining_candidates().div_ceil(self.block_size);
        let left = usize::try_from(left).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}
