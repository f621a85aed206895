use std::cell::Cell;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crossbeam_utils::CachePadded;

const SHARDS: usize = 16;

static NEXT_THREAD: AtomicUsize = AtomicUsize::new(0);

thread_local! {
    static SHARD: Cell<usize> = Cell::new(NEXT_THREAD.fetch_add(1, Ordering::Relaxed) % SHARDS);
}

/// Monotone oracle-call tally, sharded per worker thread so concurrent chains
/// do not contend on a single cache line.
#[derive(Debug, Default)]
pub struct CallCounter {
    shards: [CachePadded<AtomicU64>; SHARDS],
}

impl CallCounter {
    #[inline]
    pub fn bump(&self) {
        let shard = SHARD.with(|s| s.get());
        self.shards[shard].fetch_add(1, Ordering::Relaxed);
    }

    pub fn total(&self) -> u64 {
        self.shards.iter().map(|s| s.load(Ordering::Relaxed)).sum()
    }
}
