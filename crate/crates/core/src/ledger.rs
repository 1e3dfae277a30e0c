//! Query accounting for sublinearity checks.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Counters of every access issued against the sampled inputs.
///
/// Each entry read, norm read and sample bumps exactly one counter. The
/// counters are relaxed atomics so a ledger can be shared by concurrent
/// readers of the same structure.
#[derive(Debug, Default)]
pub struct QueryLedger {
    entry_queries: AtomicU64,
    norm_queries: AtomicU64,
    samples: AtomicU64,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub entry_queries: u64,
    pub norm_queries: u64,
    pub samples: u64,
}

impl LedgerSnapshot {
    pub fn total(&self) -> u64 {
        self.entry_queries + self.norm_queries + self.samples
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            entry_queries: self.entry_queries - earlier.entry_queries,
            norm_queries: self.norm_queries - earlier.norm_queries,
            samples: self.samples - earlier.samples,
        }
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record_entry(&self) {
        self.entry_queries.fetch_add(1, Ordering::Relaxed);
    }

    /// Record `n` entry reads at once.
    #[inline]
    pub fn record_entries(&self, n: u64) {
        self.entry_queries.fetch_add(n, Ordering::Relaxed);
    }

    #[inline]
    pub fn record_norm(&self) {
        self.norm_queries.fetch_add(1, Ordering::Relaxed);
    }

    #[inline]
    pub fn record_sample(&self) {
        self.samples.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            entry_queries: self.entry_queries.load(Ordering::Relaxed),
            norm_queries: self.norm_queries.load(Ordering::Relaxed),
            samples: self.samples.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.entry_queries.store(0, Ordering::Relaxed);
        self.norm_queries.store(0, Ordering::Relaxed);
        self.samples.store(0, Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_record_bumps_one_counter() {
        let ledger = QueryLedger::new();
        ledger.record_entry();
        ledger.record_entry();
        ledger.record_norm();
        ledger.record_sample();
        let snap = ledger.snapshot();
        assert_eq!(snap.entry_queries, 2);
        assert_eq!(snap.norm_queries, 1);
        assert_eq!(snap.samples, 1);
        assert_eq!(snap.total(), 4);

        ledger.record_sample();
        assert_eq!(ledger.snapshot().since(&snap).samples, 1);
        ledger.reset();
        assert_eq!(ledger.snapshot().total(), 0);
    }
}
