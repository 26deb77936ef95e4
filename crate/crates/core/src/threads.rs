//! Process-wide parallelism cap.

use std::sync::Once;

static INIT: Once = Once::new();

/// Initializes the global rayon pool from the `DESIGNFORGE_THREADS`
/// environment variable and pins faer's dense kernels to sequential
/// execution.
///
/// Results must be bit-identical across thread counts: rayon is only used
/// for index-parallel fills that write disjoint slots, and every reduction
/// runs in a fixed order, so the pool size never changes output bytes.
///
/// Safe to call multiple times; only the first call takes effect.
pub fn init_threads() {
    INIT.call_once(|| {
        faer::set_global_parallelism(faer::Par::Seq);
        if let Some(n) = std::env::var("DESIGNFORGE_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
        {
            // Ignore failure: a global pool may already exist in test harnesses.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}
