//! The discrete operator `(−Δ + λ)^{α/2}_{h,γ}` on interior grid values.
//!
//! Entries depend only on componentwise index differences,
//! `A[i, j] = −c_d^{α,λ} · a_{|i−j|}`, so the matrix is multilevel Toeplitz.
//! Each level is embedded in a circulant of smooth size at least twice the
//! number of unknowns along that axis; the product then costs two padded
//! FFTs and a pointwise multiply by the precomputed eigenvalues.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fft::{next_smooth, Buffers, PaddedFft, C64};
use crate::par::{self, Exec};
use crate::special::normalization_constant;
use crate::stencil::{cached_stencil, SchemeParams, StencilTensor};

/// Default limit on the number of unknowns for dense evaluation.
pub const DENSE_CAP: usize = 20_000;

/// Values at the interior nodes of the grid, first axis fastest.
///
/// Values outside the domain are zero by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if dims.is_empty() || dims.len() > 3 || len != values.len() {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: vec![values.len()],
            });
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            values: vec![0.0; dims.iter().product()],
        }
    }

    /// Samples `f` at the interior nodes of `params`.
    pub fn sample(params: &SchemeParams, f: impl Fn(&[f64]) -> f64) -> Self {
        let dims = params.interior_dims();
        let h = params.h();
        let len: usize = dims.iter().product();
        let mut x = vec![0.0; dims.len()];
        let values = (0..len)
            .map(|mut idx| {
                for (a, xa) in x.iter_mut().enumerate() {
                    let i = idx % dims[a];
                    idx /= dims[a];
                    *xa = params.domain[a][0] + (i + 1) as f64 * h;
                }
                f(&x)
            })
            .collect();
        Self { dims, values }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at interior multi-index `i` (zero based).
    pub fn at(&self, i: &[usize]) -> f64 {
        self.values[flat_index(&self.dims, i)]
    }
}

fn flat_index(dims: &[usize], i: &[usize]) -> usize {
    assert_eq!(dims.len(), i.len());
    i.iter()
        .zip(dims)
        .rev()
        .fold(0, |acc, (&ia, &na)| {
            assert!(ia < na, "grid index out of range");
            acc * na + ia
        })
}

/// Per-call scratch for [`TemperedOperator::apply_into`].
#[derive(Debug, Default)]
pub struct Workspace {
    buffers: Buffers,
}

/// A stencil bound to its grid, with the circulant eigenvalues precomputed.
#[derive(Debug)]
pub struct TemperedOperator {
    stencil: Arc<StencilTensor>,
    scale: f64,
    dims: Vec<usize>,
    fft: PaddedFft,
    /// Circulant eigenvalues times `scale / total`, in transformed layout.
    spectrum: Vec<f64>,
    exec: Exec,
}

impl TemperedOperator {
    /// Builds (or fetches from the cache) the stencil and the spectrum.
    pub fn new(params: &SchemeParams) -> Result<Self> {
        Self::from_stencil(cached_stencil(params)?, Exec::default())
    }

    pub fn from_stencil(stencil: Arc<StencilTensor>, exec: Exec) -> Result<Self> {
        let params = stencil.params().clone();
        let scale = -normalization_constant(params.d, params.alpha, params.lambda)?;
        let dims = params.interior_dims();
        let sizes: Vec<usize> = dims.iter().map(|&n| next_smooth(2 * n)).collect();
        let fft = PaddedFft::new(sizes.clone(), dims.clone());

        let mut buf = Buffers::default();
        fft.reset(&mut buf);
        let total = fft.total();
        let d = dims.len();
        let mut k = vec![0usize; d];
        'fill: for (idx, slot) in buf.data.iter_mut().enumerate() {
            let mut rem = idx;
            for a in 0..d {
                let j = rem % sizes[a];
                rem /= sizes[a];
                k[a] = if j < dims[a] {
                    j
                } else if sizes[a] - j < dims[a] {
                    sizes[a] - j
                } else {
                    continue 'fill;
                };
            }
            *slot = C64::new(stencil.get(&k), 0.0);
        }
        fft.forward(&mut buf, exec, false);
        let factor = scale / total as f64;
        let spectrum = buf.data.iter().map(|z| z.re * factor).collect();
        Ok(Self {
            stencil,
            scale,
            dims,
            fft,
            spectrum,
            exec,
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn stencil(&self) -> &StencilTensor {
        &self.stencil
    }

    pub fn params(&self) -> &SchemeParams {
        self.stencil.params()
    }

    /// `−c_d^{α,λ}`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis circulant sizes.
    pub fn embedding(&self) -> &[usize] {
        &self.fft.sizes
    }

    pub fn workspace(&self) -> Workspace {
        Workspace::default()
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: u.dims().to_vec(),
            });
        }
        Ok(())
    }

    /// `A u` by circulant embedding.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check(u)?;
        let mut out = GridFunction::zeros(&self.dims);
        self.apply_into(u.values(), out.values_mut(), &mut self.workspace())?;
        Ok(out)
    }

    /// `out = A u` on raw interior arrays, reusing `ws`.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        let m = self.len();
        if u.len() != m || out.len() != m {
            return Err(Error::DimensionMismatch {
                expected: vec![m],
                found: vec![u.len(), out.len()],
            });
        }
        let buf = &mut ws.buffers;
        self.fft.reset(buf);
        let n0 = self.dims[0];
        let lines = m / n0;
        scatter_lines(&mut buf.data, u, &self.dims, &self.fft.sizes, lines);
        self.fft.forward(buf, self.exec, true);
        let spectrum = &self.spectrum;
        par::for_each_chunk(self.exec, &mut buf.data, 1 << 14, |ci, chunk| {
            let base = ci << 14;
            let len = chunk.len();
            for (z, &s) in chunk.iter_mut().zip(&spectrum[base..base + len]) {
                *z *= s;
            }
        });
        self.fft.inverse(buf, self.exec, true);
        let data = &buf.data;
        let dims = &self.dims;
        let sizes = &self.fft.sizes;
        par::for_each_chunk(self.exec, out, n0, |line, row| {
            let src = padded_line_offset(line, dims, sizes);
            for (o, z) in row.iter_mut().zip(&data[src..src + n0]) {
                *o = z.re;
            }
        });
        Ok(())
    }

    /// `A u` by direct summation over all pairs of unknowns.
    pub fn apply_dense(&self, u: &GridFunction) -> Result<GridFunction> {
        self.apply_dense_capped(u, DENSE_CAP)
    }

    pub fn apply_dense_capped(&self, u: &GridFunction, cap: usize) -> Result<GridFunction> {
        self.check(u)?;
        let m = self.len();
        if m > cap {
            return Err(Error::CapExceeded { requested: m, cap });
        }
        let coords: Vec<Vec<usize>> = (0..m).map(|i| unflatten(i, &self.dims)).collect();
        let uv = u.values();
        let mut k = vec![0usize; self.dims.len()];
        let values = (0..m)
            .map(|i| {
                let mut acc = 0.0;
                for (j, cj) in coords.iter().enumerate() {
                    for (a, ka) in k.iter_mut().enumerate() {
                        *ka = coords[i][a].abs_diff(cj[a]);
                    }
                    acc += self.stencil.get(&k) * uv[j];
                }
                self.scale * acc
            })
            .collect();
        GridFunction::new(self.dims.clone(), values)
    }

    /// Matrix entry between interior multi-indices `i` and `j`.
    pub fn entry(&self, i: &[usize], j: &[usize]) -> f64 {
        let k: Vec<usize> = i.iter().zip(j).map(|(a, b)| a.abs_diff(*b)).collect();
        self.scale * self.stencil.get(&k)
    }

    /// Row-major dense realization; limited to `cap` unknowns.
    pub fn dense_matrix(&self, cap: usize) -> Result<Vec<f64>> {
        let m = self.len();
        if m > cap {
            return Err(Error::CapExceeded { requested: m, cap });
        }
        let coords: Vec<Vec<usize>> = (0..m).map(|i| unflatten(i, &self.dims)).collect();
        let mut out = Vec::with_capacity(m * m);
        for ci in &coords {
            for cj in &coords {
                out.push(self.entry(ci, cj));
            }
        }
        Ok(out)
    }
}

fn unflatten(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&n| {
            let v = idx % n;
            idx /= n;
            v
        })
        .collect()
}

/// Start of interior line `line` (indexed over axes 1..d) inside the padded box.
fn padded_line_offset(mut line: usize, dims: &[usize], sizes: &[usize]) -> usize {
    let mut offset = 0;
    let mut stride = sizes[0];
    for a in 1..dims.len() {
        let i = line % dims[a];
        line /= dims[a];
        offset += i * stride;
        stride *= sizes[a];
    }
    offset
}

fn scatter_lines(data: &mut [C64], u: &[f64], dims: &[usize], sizes: &[usize], lines: usize) {
    let n0 = dims[0];
    for line in 0..lines {
        let dst = padded_line_offset(line, dims, sizes);
        for (z, &v) in data[dst..dst + n0].iter_mut().zip(&u[line * n0..(line + 1) * n0]) {
            *z = C64::new(v, 0.0);
        }
    }
}
