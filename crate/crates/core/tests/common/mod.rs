//! Reference computations shared by the integration tests and the
//! acceptance runner. Nothing here calls into the library's quadrature.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use tfl_core::operator::TemperedOperator;
use tfl_core::stencil::SchemeParams;

// Kronrod 21-point nodes and weights; odd entries carry the 10-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980528686,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    for i in 0..10 {
        let s = f(c - r * XGK[i]) + f(c + r * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Globally adaptive Gauss–Kronrod on `[a, b]` to relative accuracy `rel`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let mut parts = vec![(a, b, gk21(f, a, b))];
    loop {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel.max(1e-14) * total.abs() || err < 1e-300 || parts.len() > 4000 {
            return total;
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk21(f, lo, mid)));
        parts.push((mid, hi, gk21(f, mid, hi)));
    }
}

/// Iterated integral over a box, innermost axis last.
pub fn integrate_box(f: &dyn Fn(&[f64]) -> f64, lower: &[f64], upper: &[f64], rel: f64) -> f64 {
    fn level(f: &dyn Fn(&[f64]) -> f64, lower: &[f64], upper: &[f64], x: &[f64], rel: f64) -> f64 {
        let a = x.len();
        if a == lower.len() {
            return f(x);
        }
        let inner = |t: f64| {
            let mut y = x.to_vec();
            y.push(t);
            level(f, lower, upper, &y, rel * 0.1)
        };
        integrate(&inner, lower[a], upper[a], rel)
    }
    level(f, lower, upper, &[], rel)
}

/// Scheme constants in the form the oracle uses.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub h: f64,
    pub n: usize,
}

impl Oracle {
    pub fn new(p: &SchemeParams) -> Self {
        Self {
            d: p.d,
            alpha: p.alpha,
            lambda: p.lambda,
            gamma: p.gamma,
            h: p.h(),
            n: p.n,
        }
    }

    fn w(&self, r: f64) -> f64 {
        (-self.lambda * r).exp() * r.powf(self.gamma - self.d as f64 - self.alpha)
    }

    /// `∫ w` over the element `Π [j_i h, (j_i + 1) h]`.
    pub fn element(&self, j: &[usize]) -> f64 {
        let s = self.gamma - self.alpha;
        if self.d == 1 && self.lambda == 0.0 {
            // (j+1)^s − j^s = j^s expm1(s ln(1 + 1/j)).
            let j = j[0] as f64;
            let diff = if j == 0.0 { 1.0 } else { j.powf(s) * (s * (1.0 / j).ln_1p()).exp_m1() };
            return diff * self.h.powf(s) / s;
        }
        if j.iter().all(|&v| v == 0) {
            return self.origin_element();
        }
        let lower: Vec<f64> = j.iter().map(|&v| v as f64 * self.h).collect();
        let upper: Vec<f64> = j.iter().map(|&v| (v + 1) as f64 * self.h).collect();
        integrate_box(
            &|x: &[f64]| self.w(x.iter().map(|v| v * v).sum::<f64>().sqrt()),
            &lower,
            &upper,
            1e-13,
        )
    }

    /// Origin element by the Duffy map `ξ = h u (1, v_2, …, v_d)` with
    /// `u = t^{1/(γ−α)}`, which removes the singularity at the corner.
    fn origin_element(&self) -> f64 {
        let d = self.d;
        let s = self.gamma - self.alpha;
        let m = 1.0 / s;
        let f = |x: &[f64]| {
            let t = x[0];
            let rho = (1.0 + x[1..].iter().map(|v| v * v).sum::<f64>()).sqrt();
            rho.powf(self.gamma - d as f64 - self.alpha) * (-self.lambda * self.h * t.powf(m) * rho).exp()
        };
        let unit = vec![1.0; d];
        d as f64 * self.h.powf(s) * m * integrate_box(&f, &vec![0.0; d], &unit, 1e-13)
    }

    /// `∫_{R_+^d \ [0, L]^d} e^{−λ r} r^{−(d+α)}`.
    pub fn exterior(&self) -> f64 {
        let l = self.n as f64 * self.h;
        let (alpha, lambda) = (self.alpha, self.lambda);
        // ∫_R^∞ e^{−λr} r^{−1−α} dr with r = R s^{−1/α}.
        let radial = move |r0: f64| {
            if lambda == 0.0 {
                return r0.powf(-alpha) / alpha;
            }
            r0.powf(-alpha) / alpha * integrate(&|s: f64| (-lambda * r0 * s.powf(-1.0 / alpha)).exp(), 0.0, 1.0, 1e-14)
        };
        match self.d {
            1 => radial(l),
            2 => 2.0 * integrate(&|th: f64| radial(l / th.cos()), 0.0, FRAC_PI_4, 1e-13),
            3 => {
                // Six copies of the region where ξ_3 is the largest coordinate and φ ≤ π/4.
                let in_phi = |phi: f64| {
                    let top = (1.0 / phi.cos()).atan();
                    integrate(&|th: f64| th.sin() * radial(l / th.cos()), 0.0, top, 1e-13)
                };
                6.0 * integrate(&in_phi, 0.0, FRAC_PI_4, 1e-12)
            }
            d => panic!("dimension {d}"),
        }
    }

    /// Every coefficient, `k_0` fastest, in the layout of `StencilTensor::as_slice`.
    pub fn stencil(&self) -> Vec<f64> {
        let d = self.d;
        let stride = self.n + 1;
        let total = stride.pow(d as u32);
        let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut element = |j: &[usize]| {
            let mut key = j.to_vec();
            key.sort_unstable();
            *cache.entry(key.clone()).or_insert_with(|| self.element(&key))
        };
        let w0 = element(&vec![0; d]);
        let mut out = vec![0.0; total];
        for (idx, slot) in out.iter_mut().enumerate().skip(1) {
            let k = unflatten(idx, stride, d);
            let mut t = 0.0;
            for mask in 0..(1usize << d) {
                let j: Option<Vec<usize>> = (0..d)
                    .map(|i| {
                        let v = k[i] as isize - ((mask >> i) & 1) as isize;
                        (v >= 0 && (v as usize) < self.n).then_some(v as usize)
                    })
                    .collect();
                if let Some(j) = j {
                    t += element(&j);
                }
            }
            let ones = k.iter().filter(|&&v| v == 1).count();
            let c = if k.iter().any(|&v| v > 1) {
                0.0
            } else if ones == 1 {
                (1 << d) as f64 / d as f64 - 1.0
            } else {
                -1.0
            };
            let sigma = k.iter().filter(|&&v| v == 0).count() as i32;
            let r = self.h * (k.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
            *slot = 2f64.powi(sigma) / (2f64.powi(d as i32) * r.powf(self.gamma))
                * (t + c * (self.gamma / 2.0).floor() * w0);
        }
        let mut center = 0.0;
        for (idx, v) in out.iter().enumerate().skip(1) {
            let sigma = unflatten(idx, stride, d).iter().filter(|&&x| x == 0).count();
            center -= 2f64.powi((d - sigma) as i32) * v;
        }
        out[0] = center - 2f64.powi(d as i32) * self.exterior();
        out
    }
}

pub fn unflatten(mut idx: usize, stride: usize, d: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let v = idx % stride;
            idx /= stride;
            v
        })
        .collect()
}

pub fn dense(op: &TemperedOperator) -> DMatrix<f64> {
    let m = op.len();
    DMatrix::from_row_slice(m, m, &op.dense_matrix(m).unwrap())
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

pub fn max_rel_entry(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if *y == 0.0 { x.abs() } else { ((x - y) / y).abs() })
        .fold(0.0, f64::max)
}
