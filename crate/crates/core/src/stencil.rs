//! Coefficient tensors `a_k` of the finite difference scheme.
//!
//! For a multi-index `k ∈ {0..N}^d \ {0}` with `ξ_k = k h`,
//!
//! ```text
//! a_k = 2^{σ(k)} / (2^d |ξ_k|^γ) · ( ∫_{T_k} w + c_k ⌊γ/2⌋ ∫_{I_0} w )
//! ```
//!
//! where `w = e^{−λ|ξ|}|ξ|^{γ−(d+α)}`, `σ(k)` counts the zero indices,
//! `T_k` is the union of the elements `I_j = Π [j_i h, (j_i+1) h]` that
//! have `ξ_k` as a vertex (clipped to `(0, L)^d`), `I_0` is the element at
//! the origin and `c_k` is the limit correction for the nodes adjacent to
//! the origin. The center coefficient closes the stencil:
//!
//! ```text
//! a_0 = −Σ_k 2^{d−σ(k)} a_k − 2^d ∫_{R_+^d \ [0,L]^d} e^{−λ|ξ|}|ξ|^{−(d+α)} dξ
//! ```

use std::collections::VecDeque;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::quadrature::{
    box_weight_integral, exterior_integral, radial_weight_integral, AxisBox, WeightSpec, DEFAULT_TOL,
};

/// Full description of a discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    /// Splitting parameter in `(α, 2]`.
    pub gamma: f64,
    /// `(a_i, b_i)` per axis.
    pub domain: Vec<[f64; 2]>,
    /// Number of intervals along the longest side.
    pub n: usize,
}

impl SchemeParams {
    /// Parameters with the default splitting parameter `γ = 2`.
    pub fn new(d: usize, alpha: f64, lambda: f64, domain: Vec<[f64; 2]>, n: usize) -> Result<Self> {
        let p = Self {
            d,
            alpha,
            lambda,
            gamma: 2.0,
            domain,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    /// The cube `(a, b)^d`.
    pub fn cube(d: usize, alpha: f64, lambda: f64, a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(d, alpha, lambda, vec![[a, b]; d], n)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_n(mut self, n: usize) -> Result<Self> {
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        WeightSpec::new(self.d, self.alpha, self.gamma, self.lambda)?;
        if self.domain.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: vec![self.d],
                found: vec![self.domain.len()],
            });
        }
        for (i, [a, b]) in self.domain.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::domain(format!("domain side {i} is empty: ({a}, {b})")));
            }
        }
        if self.n < 2 {
            return Err(Error::domain(format!("N = {} must be at least 2", self.n)));
        }
        if self.counts().iter().any(|&c| c < 2) {
            return Err(Error::domain(format!(
                "N = {} leaves an axis without interior nodes",
                self.n
            )));
        }
        Ok(())
    }

    /// `L = max_i (b_i − a_i)`.
    pub fn length(&self) -> f64 {
        self.domain.iter().map(|[a, b]| b - a).fold(0.0, f64::max)
    }

    pub fn h(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Per-axis interval counts `N_i`, the smallest integers with `a_i + N_i h ≥ b_i`.
    pub fn counts(&self) -> Vec<usize> {
        let l = self.length();
        self.domain
            .iter()
            .map(|[a, b]| {
                let ratio = (b - a) / l * self.n as f64;
                let rounded = ratio.round();
                if (ratio - rounded).abs() < 1e-9 * ratio.max(1.0) {
                    rounded as usize
                } else {
                    ratio.ceil() as usize
                }
            })
            .collect()
    }

    /// Interior unknowns per axis, `N_i − 1`.
    pub fn interior_dims(&self) -> Vec<usize> {
        self.counts().iter().map(|c| c - 1).collect()
    }

    pub fn weight(&self) -> WeightSpec {
        WeightSpec {
            d: self.d,
            alpha: self.alpha,
            gamma: self.gamma,
            lambda: self.lambda,
        }
    }
}

/// Coefficients `a_k`, `k ∈ {0..N}^d`, with `a_0` the center.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilTensor {
    params: SchemeParams,
    entries: Vec<f64>,
    exterior: f64,
}

impl StencilTensor {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    /// Largest index per axis.
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn center(&self) -> f64 {
        self.entries[0]
    }

    /// Exterior weight integral folded into the center.
    pub fn exterior(&self) -> f64 {
        self.exterior
    }

    /// `a_k`; `k = 0` gives the center.
    pub fn get(&self, k: &[usize]) -> f64 {
        self.entries[self.offset(k)]
    }

    /// All entries, `k_0` fastest, `N + 1` per axis.
    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    fn offset(&self, k: &[usize]) -> usize {
        assert_eq!(k.len(), self.d(), "multi-index of wrong dimension");
        let stride = self.n() + 1;
        k.iter().rev().fold(0, |acc, &ki| {
            assert!(ki < stride, "stencil index {ki} out of range");
            acc * stride + ki
        })
    }

    /// Multi-indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let stride = self.n() + 1;
        let d = self.d();
        (0..self.entries.len()).map(move |mut i| {
            let mut k = Vec::with_capacity(d);
            for _ in 0..d {
                k.push(i % stride);
                i /= stride;
            }
            k
        })
    }
}

pub fn build_stencil_1d(params: &SchemeParams) -> Result<StencilTensor> {
    expect_dim(params, 1)?;
    build_stencil(params, Exec::default())
}

pub fn build_stencil_2d(params: &SchemeParams) -> Result<StencilTensor> {
    expect_dim(params, 2)?;
    build_stencil(params, Exec::default())
}

pub fn build_stencil_3d(params: &SchemeParams) -> Result<StencilTensor> {
    expect_dim(params, 3)?;
    build_stencil(params, Exec::default())
}

fn expect_dim(params: &SchemeParams, d: usize) -> Result<()> {
    if params.d != d {
        return Err(Error::DimensionMismatch {
            expected: vec![d],
            found: vec![params.d],
        });
    }
    Ok(())
}

/// Stencil for any `d`, built from scratch.
pub fn build_stencil(params: &SchemeParams, exec: Exec) -> Result<StencilTensor> {
    params.validate()?;
    let d = params.d;
    let n = params.n;
    let h = params.h();
    let weight = params.weight();
    let elements = element_integrals(&weight, n, h, exec)?;

    let stride = n + 1;
    let total = stride.pow(d as u32);
    let two_d = (1usize << d) as f64;
    let floor_half_gamma = (params.gamma / 2.0).floor();
    let w0 = elements[0];
    let mut entries = par::map_range(exec, total, |idx| {
        if idx == 0 {
            return 0.0;
        }
        // Sorting makes permuted indices bitwise equal.
        let mut k = unflatten(idx, stride, d);
        k.sort_unstable();
        let sigma = k.iter().filter(|&&v| v == 0).count();
        let t = neighbourhood_integral(&elements, &k, n);
        let r2: f64 = k.iter().map(|&v| (v as f64 * h).powi(2)).sum();
        let bracket = t + limit_correction(&k) * floor_half_gamma * w0;
        (1usize << sigma) as f64 / (two_d * r2.powf(0.5 * params.gamma)) * bracket
    });

    let exterior = exterior_integral(d, params.length(), params.alpha, params.lambda, DEFAULT_TOL)?;
    let mut terms: Vec<f64> = (1..total)
        .map(|idx| {
            let k = unflatten(idx, stride, d);
            let sigma = k.iter().filter(|&&v| v == 0).count();
            (1usize << (d - sigma)) as f64 * entries[idx]
        })
        .collect();
    terms.sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()));
    entries[0] = -compensated_sum(&terms) - two_d * exterior;

    Ok(StencilTensor {
        params: params.clone(),
        entries,
        exterior,
    })
}

/// Stencil shared through a small process-wide cache.
pub fn cached_stencil(params: &SchemeParams) -> Result<Arc<StencilTensor>> {
    const CAPACITY: usize = 6;
    static CACHE: OnceLock<Mutex<VecDeque<Arc<StencilTensor>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(VecDeque::new()));
    {
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(pos) = guard.iter().position(|s| s.params == *params) {
            let hit = guard.remove(pos).expect("position is valid");
            guard.push_front(hit.clone());
            return Ok(hit);
        }
    }
    let built = Arc::new(build_stencil(params, Exec::default())?);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.push_front(built.clone());
    guard.truncate(CAPACITY);
    Ok(built)
}

fn unflatten(mut idx: usize, stride: usize, d: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let v = idx % stride;
            idx /= stride;
            v
        })
        .collect()
}

/// Correction factor `c_k` for nodes next to the origin.
///
/// A node with exactly one nonzero index, equal to one, gets `2^d/d − 1`;
/// other nodes with every index ≤ 1 get `−1`; all others `0`.
fn limit_correction(k: &[usize]) -> f64 {
    if k.iter().any(|&v| v > 1) {
        return 0.0;
    }
    let d = k.len();
    match k.iter().filter(|&&v| v == 1).count() {
        0 => 0.0,
        1 => (1usize << d) as f64 / d as f64 - 1.0,
        _ => -1.0,
    }
}

/// `∫_{T_k} w` as a sum of element integrals `W[j]`, `j_i ∈ {k_i − 1, k_i} ∩ [0, N−1]`.
fn neighbourhood_integral(elements: &[f64], k: &[usize], n: usize) -> f64 {
    let d = k.len();
    let mut total = 0.0;
    'corners: for mask in 0..(1usize << d) {
        let mut offset = 0;
        for i in (0..d).rev() {
            let j = if mask >> i & 1 == 1 {
                match k[i].checked_sub(1) {
                    Some(j) => j,
                    None => continue 'corners,
                }
            } else {
                k[i]
            };
            if j >= n {
                continue 'corners;
            }
            offset = offset * n + j;
        }
        total += elements[offset];
    }
    total
}

/// `W[j] = ∫_{I_j} w` for every element of `[0, L]^d`, `j_0` fastest.
///
/// The weight is radial, so only non-decreasing multi-indices are
/// integrated and the rest are filled in by permutation.
fn element_integrals(weight: &WeightSpec, n: usize, h: f64, exec: Exec) -> Result<Vec<f64>> {
    let nu = weight.nu();
    match weight.d {
        1 => (0..n)
            .map(|j| radial_weight_integral(j as f64 * h, (j + 1) as f64 * h, nu, weight.lambda))
            .collect(),
        2 => {
            let rows = par::map_range(exec, n, |j1| {
                (0..=j1)
                    .map(|j0| box_weight_integral(weight, &AxisBox::element(&[j0, j1], h), DEFAULT_TOL))
                    .collect::<Result<Vec<f64>>>()
            });
            let mut out = vec![0.0; n * n];
            for (j1, row) in rows.into_iter().enumerate() {
                for (j0, v) in row?.into_iter().enumerate() {
                    out[j0 + n * j1] = v;
                    out[j1 + n * j0] = v;
                }
            }
            Ok(out)
        }
        3 => {
            let sorted: Vec<(usize, usize)> = (0..n).flat_map(|j2| (0..=j2).map(move |j1| (j1, j2))).collect();
            let rows = par::map_range(exec, sorted.len(), |r| {
                let (j1, j2) = sorted[r];
                (0..=j1)
                    .map(|j0| box_weight_integral(weight, &AxisBox::element(&[j0, j1, j2], h), DEFAULT_TOL))
                    .collect::<Result<Vec<f64>>>()
            });
            let mut out = vec![0.0; n * n * n];
            for (&(j1, j2), row) in sorted.iter().zip(rows) {
                for (j0, v) in row?.into_iter().enumerate() {
                    for [a, b, c] in [
                        [j0, j1, j2],
                        [j0, j2, j1],
                        [j1, j0, j2],
                        [j1, j2, j0],
                        [j2, j0, j1],
                        [j2, j1, j0],
                    ] {
                        out[a + n * (b + n * c)] = v;
                    }
                }
            }
            Ok(out)
        }
        d => Err(Error::domain(format!("dimension {d} not in 1..=3"))),
    }
}

/// Neumaier summation.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
