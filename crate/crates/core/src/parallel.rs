//! Order-preserving parallel map used for path tracking and batch runs.

/// Maps `f` over `items`, keeping input order. `threads == 0` lets the pool
/// pick; `threads == 1` runs inline.
pub fn ordered_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if threads != 1 && items.len() > 1 {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
            if let Ok(pool) = pool {
                return pool.install(|| items.par_iter().map(&f).collect());
            }
        }
    }
    let _ = threads;
    items.iter().map(f).collect()
}
