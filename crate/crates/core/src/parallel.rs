//! Static partitioning of sample indices over worker threads.

use std::ops::Range;

/// Contiguous index ranges, one per worker, covering `0..count`.
pub fn partition(count: u64, workers: usize) -> Vec<Range<u64>> {
    let workers = workers.max(1) as u64;
    let base = count / workers;
    let extra = count % workers;
    let mut start = 0;
    (0..workers)
        .map(|k| {
            let len = base + u64::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Evaluate `f(i)` for `i in 0..count` on `workers` threads. The result is
/// in index order and independent of the worker count.
pub fn map_indexed<T, F>(count: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let ranges = partition(count, workers);
    if ranges.len() == 1 {
        return (0..count).map(&f).collect();
    }
    let f = &f;
    let chunks: Vec<Vec<T>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| scope.spawn(move || r.map(f).collect::<Vec<T>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    chunks.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_covers_everything_once() {
        for (count, workers) in [(0, 3), (10, 1), (10, 3), (3, 8), (1000, 7)] {
            let parts = partition(count, workers);
            assert_eq!(parts.len(), workers);
            let flat: Vec<u64> = parts.into_iter().flatten().collect();
            assert_eq!(flat, (0..count).collect::<Vec<_>>());
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let f = |i: u64| (i as f64).sin();
        let one = map_indexed(1001, 1, f);
        let eight = map_indexed(1001, 8, f);
        assert_eq!(one, eight);
    }
}
