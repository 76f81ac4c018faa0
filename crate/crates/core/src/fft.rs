//! Multidimensional complex FFT on a zero-padded box, used for circulant
//! embedding.
//!
//! Data is stored with the fastest axis first. A pass transforms the lines
//! along the fastest axis and then rotates the axes with an out-of-place
//! transpose, so every transform runs on contiguous memory. Lines that are
//! known to be zero (forward) or whose output is discarded (inverse) are
//! skipped.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::par::{self, Exec};

pub(crate) type C64 = Complex<f64>;

/// Smallest integer ≥ `n` whose only prime factors are 2, 3 and 5.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

pub(crate) struct PaddedFft {
    /// Transform length per axis.
    pub sizes: Vec<usize>,
    /// Leading extent per axis that may hold nonzero input / needed output.
    pub active: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    scratch_len: usize,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedFft")
            .field("sizes", &self.sizes)
            .field("active", &self.active)
            .finish()
    }
}

/// Scratch buffers for one transform pair.
#[derive(Debug, Default)]
pub(crate) struct Buffers {
    pub data: Vec<C64>,
    pub other: Vec<C64>,
}

impl PaddedFft {
    pub fn new(sizes: Vec<usize>, active: Vec<usize>) -> Self {
        let mut planner = FftPlanner::new();
        let forward: Vec<_> = sizes.iter().map(|&p| planner.plan_fft_forward(p)).collect();
        let inverse: Vec<_> = sizes.iter().map(|&p| planner.plan_fft_inverse(p)).collect();
        let scratch_len = forward
            .iter()
            .chain(&inverse)
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            sizes,
            active,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Prepares zeroed buffers of the right size.
    pub fn reset(&self, buf: &mut Buffers) {
        let total = self.total();
        buf.data.clear();
        buf.data.resize(total, C64::new(0.0, 0.0));
        buf.other.resize(total, C64::new(0.0, 0.0));
    }

    /// Forward transform over all axes. Input in natural layout; output in
    /// the layout whose fastest axis is the last one, followed by
    /// `0, 1, …, d−2`. With `sparse`, input outside the active box is
    /// assumed zero.
    pub fn forward(&self, buf: &mut Buffers, exec: Exec, sparse: bool) {
        let d = self.sizes.len();
        for s in 0..d {
            self.lines(&mut buf.data, s, &self.forward[s], exec, sparse);
            if s + 1 < d {
                let cols = self.sizes[s];
                let rows = self.total() / cols;
                transpose(exec, &buf.data, &mut buf.other, rows, cols);
                std::mem::swap(&mut buf.data, &mut buf.other);
            }
        }
    }

    /// Inverse of [`forward`](Self::forward), unnormalized. With `sparse`,
    /// only output inside the active box is correct.
    pub fn inverse(&self, buf: &mut Buffers, exec: Exec, sparse: bool) {
        let d = self.sizes.len();
        for s in (0..d).rev() {
            self.lines(&mut buf.data, s, &self.inverse[s], exec, sparse);
            if s > 0 {
                // The slowest axis s − 1 becomes the fastest.
                let rows = self.sizes[s - 1];
                let cols = self.total() / rows;
                transpose(exec, &buf.data, &mut buf.other, rows, cols);
                std::mem::swap(&mut buf.data, &mut buf.other);
            }
        }
    }

    /// Transforms the lines along axis `s`, which is currently the fastest;
    /// the remaining axes follow in the order `s+1, …, d−1, 0, …, s−1`.
    fn lines(&self, data: &mut [C64], s: usize, fft: &Arc<dyn Fft<f64>>, exec: Exec, sparse: bool) {
        let d = self.sizes.len();
        let len = self.sizes[s];
        let order: Vec<usize> = (1..d).map(|k| (s + k) % d).collect();
        let sizes = &self.sizes;
        let active = &self.active;
        let is_active = |mut line: usize| {
            if !sparse {
                return true;
            }
            for &a in &order {
                let idx = line % sizes[a];
                line /= sizes[a];
                if a > s && idx >= active[a] {
                    return false;
                }
            }
            true
        };
        // Group lines so each task amortizes its scratch buffer.
        let group = (4096 / len).max(1);
        par::for_each_chunk_with(
            exec,
            data,
            group * len,
            || vec![C64::new(0.0, 0.0); self.scratch_len],
            |scratch, ci, chunk| {
                for (li, line) in chunk.chunks_mut(len).enumerate() {
                    if is_active(ci * group + li) {
                        fft.process_with_scratch(line, scratch);
                    }
                }
            },
        );
    }
}

/// `out[c * rows + r] = input[r * cols + c]`.
fn transpose(exec: Exec, input: &[C64], out: &mut [C64], rows: usize, cols: usize) {
    const BLOCK: usize = 16;
    debug_assert_eq!(input.len(), rows * cols);
    par::for_each_chunk(exec, &mut out[..rows * cols], BLOCK * rows, |bi, chunk| {
        let c0 = bi * BLOCK;
        let width = chunk.len() / rows;
        for r0 in (0..rows).step_by(BLOCK) {
            let r1 = (r0 + BLOCK).min(rows);
            for r in r0..r1 {
                let src = &input[r * cols + c0..r * cols + c0 + width];
                for (j, v) in src.iter().enumerate() {
                    chunk[j * rows + r] = *v;
                }
            }
        }
    });
}
