//! Execution mode for batch and per-row work.
//!
//! Every parallel path has a sequential twin that produces bit-identical
//! output: work items never share state, and floating-point reductions are
//! always folded sequentially in item order after the parallel map.

/// How a batch of independent work items is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// falls back to [`Mode::Sequential`].
    #[default]
    Parallel,
}

impl Mode {
    /// Whether this mode will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Mode::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(mode: Mode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Calls `f(row_index, row)` for every `row_len`-sized chunk of `data`.
pub fn for_each_row<T, F>(mode: Mode, data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(y, row)| f(y, row));
        return;
    }
    let _ = mode;
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
}

/// Runs `f` inside a dedicated pool of `workers` threads (or inline when
/// `workers` is 1 or the `parallel` feature is off).
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Mode) -> R + Send,
{
    if workers <= 1 {
        return f(Mode::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| f(Mode::Parallel)),
            Err(e) => {
                log::warn!("could not build a {workers}-thread pool ({e}); running sequentially");
                f(Mode::Sequential)
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        f(Mode::Sequential)
    }
}

/// Default worker count: the machine's available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map(Mode::Sequential, &items, |x| x * x + 1);
        let par = map(Mode::Parallel, &items, |x| x * x + 1);
        assert_eq!(seq, par);
    }

    #[test]
    fn rows_are_visited_once() {
        let mut data = vec![0u32; 12];
        for_each_row(Mode::Parallel, &mut data, 4, |y, row| {
            row.iter_mut().for_each(|v| *v += y as u32 + 1)
        });
        assert_eq!(data, vec![1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3]);
    }

    #[test]
    fn pool_of_one_is_sequential() {
        assert_eq!(with_workers(1, |m| m), Mode::Sequential);
    }
}
