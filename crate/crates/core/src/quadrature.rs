//! Integrals of the weight `w(ξ) = e^{−λ|ξ|} |ξ|^{γ−(d+α)}` that feed the
//! stencil coefficients.
//!
//! Three kinds of regions occur:
//!
//! * radial intervals `[a, b]` (one dimension, and the radial factor of the
//!   origin element), integrated in closed form;
//! * axis-aligned boxes in the positive orthant, by adaptive tensor-product
//!   Gauss–Legendre, or by a spherical change of variables when the box has
//!   a corner at the origin;
//! * the exterior `R_+^d \ [0, L]^d`, split into a radial tail beyond
//!   `L√d` and a band `L < |ξ| < L√d` weighted by the angular measure of the
//!   directions that have left the cube.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::special::upper_incomplete_gamma;

/// Relative tolerance used for every coefficient-feeding integral.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Parameters of the weight `e^{−λ|ξ|} |ξ|^{γ−(d+α)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub d: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl WeightSpec {
    pub fn new(d: usize, alpha: f64, gamma: f64, lambda: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::domain(format!("dimension {d} not in 1..=3")));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain(format!("alpha = {alpha} not in (0, 2)")));
        }
        if !(gamma > alpha && gamma <= 2.0) {
            return Err(Error::domain(format!(
                "splitting parameter gamma = {gamma} not in (alpha, 2]"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
        }
        Ok(Self {
            d,
            alpha,
            gamma,
            lambda,
        })
    }

    /// `ν = γ − α`, the exponent of the radial factor `r^{ν−1}`.
    pub fn nu(&self) -> f64 {
        self.gamma - self.alpha
    }

    /// Power of `|ξ|` in the weight.
    pub fn exponent(&self) -> f64 {
        self.gamma - (self.d as f64 + self.alpha)
    }

    #[inline]
    pub fn eval_radius(&self, r: f64) -> f64 {
        let p = r.powf(self.exponent());
        if self.lambda == 0.0 {
            p
        } else {
            p * (-self.lambda * r).exp()
        }
    }
}

/// Axis-aligned box `[lower_i, upper_i]` in the positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: vec![lower.len()],
                found: vec![upper.len()],
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo >= 0.0) {
                return Err(Error::domain(format!(
                    "box coordinate {i} has negative lower bound {lo}"
                )));
            }
            if !(hi > lo) || !hi.is_finite() {
                return Err(Error::domain(format!("box side {i} is empty: [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[k_i h, (k_i + 1) h]`.
    pub fn element(index: &[usize], h: f64) -> Self {
        Self {
            lower: index.iter().map(|&k| k as f64 * h).collect(),
            upper: index.iter().map(|&k| (k + 1) as f64 * h).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn touches_origin(&self) -> bool {
        self.lower.iter().all(|&l| l == 0.0)
    }
}

// ---------------------------------------------------------------------------
// Rules

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule for small orders.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        const MAX: usize = 64;
        static RULES: [OnceLock<GaussLegendre>; MAX] = [const { OnceLock::new() }; MAX];
        assert!((1..=MAX).contains(&n), "cached Gauss-Legendre order {n} out of range");
        RULES[n - 1].get_or_init(|| GaussLegendre::new(n))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Gauss–Kronrod 7/15 pair (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Estimate { value: result, error: err }
}

/// Globally adaptive Gauss–Kronrod integration over `[a, b]` with optional
/// interior breakpoints. Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol · |I|)`; `rel_tol` is floored at `100 ε` since the
/// per-interval error estimate never drops below `50 ε` times the local
/// integral of `|f|`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Estimate> {
    const MAX_INTERVALS: usize = 4000;
    assert!(points.len() >= 2);
    let rel_tol = rel_tol.max(100.0 * f64::EPSILON);
    let mut intervals: Vec<(f64, f64, Estimate)> = points
        .windows(2)
        .map(|w| (w[0], w[1], gk15(&mut f, w[0], w[1])))
        .collect();
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2.value).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::domain("integrand is not finite on the interval"));
        }
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::ToleranceNotMet {
                estimate: total,
                error: err,
                tolerance: rel_tol,
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("non-empty");
        let (a, b, _) = intervals.swap_remove(worst);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Err(Error::ToleranceNotMet {
                estimate: total,
                error: err,
                tolerance: rel_tol,
            });
        }
        intervals.push((a, m, gk15(&mut f, a, m)));
        intervals.push((m, b, gk15(&mut f, m, b)));
    }
}

// ---------------------------------------------------------------------------
// Tensor-product Gauss–Legendre on boxes

const GL_LOW: usize = 5;
const GL_HIGH: usize = 8;
const MAX_BOX_DEPTH: usize = 24;

fn tensor_gl<F: Fn(&[f64]) -> f64>(f: &F, lower: &[f64], upper: &[f64], rule: &GaussLegendre) -> f64 {
    let d = lower.len();
    let half: Vec<f64> = (0..d).map(|i| 0.5 * (upper[i] - lower[i])).collect();
    let mid: Vec<f64> = (0..d).map(|i| 0.5 * (upper[i] + lower[i])).collect();
    let n = rule.nodes.len();
    let scale: f64 = half.iter().product();
    let mut x = [0.0; 3];
    let mut sum = 0.0;
    match d {
        1 => {
            for i in 0..n {
                x[0] = mid[0] + half[0] * rule.nodes[i];
                sum += rule.weights[i] * f(&x[..1]);
            }
        }
        2 => {
            for j in 0..n {
                x[1] = mid[1] + half[1] * rule.nodes[j];
                let mut row = 0.0;
                for i in 0..n {
                    x[0] = mid[0] + half[0] * rule.nodes[i];
                    row += rule.weights[i] * f(&x[..2]);
                }
                sum += rule.weights[j] * row;
            }
        }
        3 => {
            for k in 0..n {
                x[2] = mid[2] + half[2] * rule.nodes[k];
                let mut plane = 0.0;
                for j in 0..n {
                    x[1] = mid[1] + half[1] * rule.nodes[j];
                    let mut row = 0.0;
                    for i in 0..n {
                        x[0] = mid[0] + half[0] * rule.nodes[i];
                        row += rule.weights[i] * f(&x[..3]);
                    }
                    plane += rule.weights[j] * row;
                }
                sum += rule.weights[k] * plane;
            }
        }
        _ => unreachable!("boxes are at most three dimensional"),
    }
    sum * scale
}

/// Adaptive tensor-product Gauss–Legendre over a box of dimension 1..=3.
///
/// Each cell compares an order-5 and an order-8 rule; cells whose
/// difference exceeds their share of the tolerance are halved along every
/// axis.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(f: &F, lower: &[f64], upper: &[f64], rel_tol: f64) -> Result<Estimate> {
    let lo_rule = GaussLegendre::cached(GL_LOW);
    let hi_rule = GaussLegendre::cached(GL_HIGH);
    let coarse = tensor_gl(f, lower, upper, hi_rule);
    let abs_tol = rel_tol * coarse.abs();
    if !coarse.is_finite() {
        return Err(Error::domain("integrand is not finite on the box"));
    }
    let est = refine_box(f, lower, upper, abs_tol.max(f64::MIN_POSITIVE), 0, lo_rule, hi_rule, Some(coarse));
    if !est.value.is_finite() || !est.error.is_finite() {
        return Err(Error::domain("integrand is not finite on the box"));
    }
    if est.error > abs_tol.max(rel_tol * est.value.abs()) {
        return Err(Error::ToleranceNotMet {
            estimate: est.value,
            error: est.error,
            tolerance: rel_tol,
        });
    }
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn refine_box<F: Fn(&[f64]) -> f64>(
    f: &F,
    lower: &[f64],
    upper: &[f64],
    abs_tol: f64,
    depth: usize,
    lo_rule: &GaussLegendre,
    hi_rule: &GaussLegendre,
    hi_known: Option<f64>,
) -> Estimate {
    let hi = hi_known.unwrap_or_else(|| tensor_gl(f, lower, upper, hi_rule));
    let lo = tensor_gl(f, lower, upper, lo_rule);
    let err = (hi - lo).abs();
    let d = lower.len();
    if err <= abs_tol || depth >= MAX_BOX_DEPTH || !err.is_finite() {
        return Estimate { value: hi, error: err };
    }
    let children = 1usize << d;
    let child_tol = abs_tol / children as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo_c = [0.0; 3];
    let mut hi_c = [0.0; 3];
    for mask in 0..children {
        for i in 0..d {
            let m = 0.5 * (lower[i] + upper[i]);
            if mask >> i & 1 == 0 {
                lo_c[i] = lower[i];
                hi_c[i] = m;
            } else {
                lo_c[i] = m;
                hi_c[i] = upper[i];
            }
        }
        let e = refine_box(f, &lo_c[..d], &hi_c[..d], child_tol, depth + 1, lo_rule, hi_rule, None);
        value += e.value;
        error += e.error;
    }
    Estimate { value, error }
}

// ---------------------------------------------------------------------------
// Weight integrals

/// `∫_a^b ξ^{ν−1} e^{−λξ} dξ` in closed form.
pub fn radial_weight_integral(a: f64, b: f64, nu: f64, lambda: f64) -> Result<f64> {
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(Error::domain(format!("radial interval [{a}, {b}] is invalid")));
    }
    if !(nu > 0.0) {
        return Err(Error::domain(format!("nu = {nu} must be positive")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
    }
    if lambda == 0.0 {
        if a == 0.0 {
            return Ok(b.powf(nu) / nu);
        }
        // b^ν − a^ν = a^ν (e^{ν ln(b/a)} − 1), without cancellation for small ν.
        return Ok(a.powf(nu) * (nu * ((b - a) / a).ln_1p()).exp_m1() / nu);
    }
    let upper = match upper_incomplete_gamma(nu, lambda * b) {
        Ok(v) => v,
        Err(Error::Underflow(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let lower = upper_incomplete_gamma(nu, lambda * a)?;
    Ok(lambda.powf(-nu) * (lower - upper))
}

/// `∫_box e^{−λ|ξ|} |ξ|^{γ−(d+α)} dξ` for `d ∈ {2, 3}` to relative tolerance `tol`.
pub fn box_weight_integral(spec: &WeightSpec, cell: &AxisBox, tol: f64) -> Result<f64> {
    let d = cell.dim();
    if d != spec.d {
        return Err(Error::DimensionMismatch {
            expected: vec![spec.d],
            found: vec![d],
        });
    }
    if !(2..=3).contains(&d) {
        return Err(Error::domain("box integrals are for d = 2 or 3"));
    }
    if cell.lower.iter().any(|&l| l < 0.0) {
        return Err(Error::domain("box leaves the positive orthant"));
    }
    if cell.touches_origin() {
        return origin_box_integral(spec, &cell.upper, tol);
    }
    let weight = |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        spec.eval_radius(r2.sqrt())
    };
    Ok(integrate_box(&weight, &cell.lower, &cell.upper, tol)?.value)
}

/// Box `[0, b_1] × … × [0, b_d]` by spherical coordinates.
///
/// The box is the union of the `d` cones over its far faces `ξ_i = b_i`.
/// Directions in cone `i` are parametrized by `p_j = ξ_j / ξ_i` (`j ≠ i`),
/// for which the solid angle element is `dp / (1 + |p|²)^{d/2}` and the
/// ray leaves the box at radius `b_i √(1 + |p|²)`. The radial factor
/// `r^{ν−1} e^{−λr}` is integrated exactly along each ray.
fn origin_box_integral(spec: &WeightSpec, upper: &[f64], tol: f64) -> Result<f64> {
    let d = upper.len();
    let nu = spec.nu();
    let lambda = spec.lambda;
    let mut total = 0.0;
    for face in 0..d {
        let others: Vec<usize> = (0..d).filter(|&j| j != face).collect();
        let bi = upper[face];
        let face_upper: Vec<f64> = others.iter().map(|&j| upper[j] / bi).collect();
        let face_lower = vec![0.0; d - 1];
        let failure = std::cell::Cell::new(None);
        let integrand = |p: &[f64]| {
            let q = 1.0 + p.iter().map(|v| v * v).sum::<f64>();
            let reach = bi * q.sqrt();
            match radial_weight_integral(0.0, reach, nu, lambda) {
                Ok(v) => v / q.powf(0.5 * d as f64),
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        };
        let est = integrate_box(&integrand, &face_lower, &face_upper, tol);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        total += est?.value;
    }
    Ok(total)
}

/// `∫_{R_+^d \ [0,L]^d} e^{−λ|ξ|} |ξ|^{−(d+α)} dξ` to relative tolerance `tol`.
pub fn exterior_integral(d: usize, l: f64, alpha: f64, lambda: f64, tol: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!("dimension {d} not in 1..=3")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!("L = {l} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha = {alpha} not in (0, 2)")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
    }
    let radial_tail = |r0: f64| -> Result<f64> {
        if lambda == 0.0 {
            Ok(r0.powf(-alpha) / alpha)
        } else {
            match upper_incomplete_gamma(-alpha, lambda * r0) {
                Ok(v) => Ok(lambda.powf(alpha) * v),
                Err(Error::Underflow(_)) => Ok(0.0),
                Err(e) => Err(e),
            }
        }
    };
    if d == 1 {
        return radial_tail(l);
    }
    let sqrt_d = (d as f64).sqrt();
    let tail = FRAC_PI_2 * radial_tail(l * sqrt_d)?;
    let kernel = |r: f64| {
        let p = r.powf(-1.0 - alpha);
        if lambda == 0.0 {
            p
        } else {
            p * (-lambda * r).exp()
        }
    };
    let band = match d {
        2 => {
            // r = L (1 + s²) removes the square-root onset of arccos(L/r).
            let s_max = (sqrt_d - 1.0).sqrt();
            integrate_1d(
                |s| {
                    let r = l * (1.0 + s * s);
                    2.0 * (l / r).acos() * kernel(r) * 2.0 * l * s
                },
                &[0.0, s_max],
                tol * 0.1,
                0.0,
            )?
            .value
        }
        3 => {
            let mut failure = None;
            let r_mid = l * std::f64::consts::SQRT_2;
            let value = integrate_1d(
                |r| match orthant_exit_measure_3d(l / r, tol * 0.01) {
                    Ok(mu) => mu * kernel(r),
                    Err(e) => {
                        failure = Some(e);
                        f64::NAN
                    }
                },
                &[l, r_mid, l * sqrt_d],
                tol * 0.1,
                0.0,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            value?.value
        }
        _ => unreachable!(),
    };
    Ok(tail + band)
}

/// Angular measure of the directions `ω` in the positive octant with
/// `max_i ω_i > t`, i.e. the part of the sphere of radius `L/t` outside the
/// cube `[0, L]^3`. Valid for `1/√3 ≤ t ≤ 1`.
fn orthant_exit_measure_3d(t: f64, tol: f64) -> Result<f64> {
    let caps = 3.0 * FRAC_PI_2 * (1.0 - t);
    Ok(caps - 3.0 * pairwise_cap_overlap(t, tol)?)
}

/// Measure of `{ω_1 > t, ω_2 > t}` in the positive octant, zero for `t ≥ 1/√2`.
///
/// With `z = ω_3` and the azimuth of `(ω_1, ω_2)`, the area element is
/// `dz dφ`; for fixed `z` the admissible azimuths form an interval of
/// length `π/2 − 2 arcsin(t / √(1 − z²))`.
fn pairwise_cap_overlap(t: f64, tol: f64) -> Result<f64> {
    let top2 = 1.0 - 2.0 * t * t;
    if top2 <= 0.0 {
        return Ok(0.0);
    }
    let top = top2.sqrt();
    // z = top − w² smooths the square-root decay at z = top.
    let w_max = top.sqrt();
    let est = integrate_1d(
        |w| {
            // π/2 − 2 arcsin(t/ρ) = arcsin(1 − 2t²/ρ²), and
            // ρ² − 2t² = top² − z² = w² (2 top − w²) without cancellation.
            let w2 = w * w;
            let z = top - w2;
            let s = (w2 * (2.0 * top - w2) / (1.0 - z * z)).min(1.0);
            s.asin() * 2.0 * w
        },
        &[0.0, w_max],
        tol,
        1e-300,
    )?;
    Ok(est.value)
}
