//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) the helpers run on the rayon
//! pool; without it, or with [`Exec::Sequential`], they are plain loops.
//! Results never depend on the execution mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the hot loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Rayon when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Parallel,
}

impl Exec {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel, preserving order.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Calls `f(chunk_index, chunk)` for consecutive chunks of `data`.
pub fn for_each_chunk<T, F>(exec: Exec, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Like [`for_each_chunk`] but with caller state created once per worker.
pub fn for_each_chunk_with<T, S, I, F>(exec: Exec, data: &mut [T], chunk: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each_init(&init, |s, (i, c)| f(s, i, c));
        return;
    }
    let _ = exec;
    let mut state = init();
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(&mut state, i, c));
}

/// Elementwise `out[i] = f(i, out[i])`.
pub fn update<F>(exec: Exec, data: &mut [f64], f: F)
where
    F: Fn(usize, f64) -> f64 + Sync + Send,
{
    const CHUNK: usize = 1 << 14;
    for_each_chunk(exec, data, CHUNK, |ci, c| {
        let base = ci * CHUNK;
        for (j, v) in c.iter_mut().enumerate() {
            *v = f(base + j, *v);
        }
    });
}

/// `Σ a_i b_i`, with a fixed reduction tree so the result does not depend
/// on the thread count.
pub fn dot(exec: Exec, a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 1 << 12;
    assert_eq!(a.len(), b.len());
    let parts = map_range(exec, a.len().div_ceil(CHUNK), |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(a.len());
        a[lo..hi].iter().zip(&b[lo..hi]).map(|(x, y)| x * y).sum::<f64>()
    });
    parts.iter().sum()
}
