// SPDX-License-Identifier: Apache-2.0

//! Byte-addressed sparse memory.
//!
//! Backs the agent-side memory that the device writes into. Unwritten
//! addresses read as zero, so dumps of partially written regions are
//! well-defined.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseMemory {
    bytes: BTreeMap<u64, u8>,
}

impl SparseMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes consecutive bytes starting at `addr`; addresses wrap at the
    /// top of the 64-bit space rather than panicking.
    pub fn write(&mut self, addr: u64, data: &[u8]) {
        for (i, &b) in data.iter().enumerate() {
            self.bytes.insert(addr.wrapping_add(i as u64), b);
        }
    }

    pub fn read_byte(&self, addr: u64) -> u8 {
        self.bytes.get(&addr).copied().unwrap_or(0)
    }

    /// Copies `len` bytes starting at `base`, zero-filling unwritten gaps.
    pub fn dump(&self, base: u64, len: usize) -> Vec<u8> {
        (0..len)
            .map(|i| self.read_byte(base.wrapping_add(i as u64)))
            .collect()
    }

    /// Number of bytes ever written.
    pub fn written_len(&self) -> usize {
        self.bytes.len()
    }
}
