//! Gamma-family special functions and the normalization constant of the
//! tempered fractional Laplacian.
//!
//! The upper incomplete gamma function is needed for negative parameters
//! (the exterior tail uses `Γ(−α, x)`), so the positive-parameter
//! evaluation is combined with the downward recurrence
//! `Γ(a, x) = (Γ(a+1, x) − x^a e^{−x}) / a` for small `x`, and with the
//! Legendre continued fraction (valid for every real `a`) for larger `x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Iteration cap for the series and continued fraction.
const MAX_ITER: usize = 2000;

/// Above this abscissa the continued fraction is used whenever `x ≥ a + 1`.
const CF_THRESHOLD: f64 = 2.0;

// ζ(k) − 1 for k = 2..=60.
#[allow(clippy::excessive_precision)]
const ZETA_MINUS_ONE: [f64; 59] = [
    6.4493406684822643647e-1, 2.020569031595942854e-1, 8.2323233711138191516e-2,
    3.6927755143369926331e-2, 1.7343061984449139715e-2, 8.3492773819228268398e-3,
    4.0773561979443393787e-3, 2.0083928260822144179e-3, 9.9457512781808533715e-4,
    4.941886041194645587e-4, 2.4608655330804829864e-4, 1.2271334757848914675e-4,
    6.1248135058704829259e-5, 3.0588236307020493552e-5, 1.5282259408651871733e-5,
    7.6371976378997622736e-6, 3.8172932649998398565e-6, 1.9082127165539389257e-6,
    9.5396203387279611315e-7, 4.7693298678780646312e-7, 2.3845050272773299e-7,
    1.1921992596531107307e-7, 5.9608189051259479612e-8, 2.9803503514652280186e-8,
    1.4901554828365041235e-8, 7.450711789835429492e-9, 3.7253340247884570548e-9,
    1.8626597235130490064e-9, 9.3132743241966818287e-10, 4.656629065033784073e-10,
    2.328311833676505492e-10, 1.1641550172700519776e-10, 5.8207720879027008893e-11,
    2.9103850444970996869e-11, 1.4551921891041984236e-11, 7.2759598350574810145e-12,
    3.6379795473786511902e-12, 1.8189896503070659477e-12, 9.0949478402638892829e-13,
    4.547473783042154027e-13, 2.2737368458246525151e-13, 1.1368684076802278492e-13,
    5.6843419876275856141e-14, 2.8421709768893018463e-14, 1.4210854828031606744e-14,
    7.1054273952108527052e-15, 3.5527136913371137367e-15, 1.7763568435791204144e-15,
    8.8817842109308161928e-16, 4.4408921031438141182e-16, 2.2204460507980423997e-16,
    1.110223025141065656e-16, 5.551115124845479754e-17, 2.7755575621361171278e-17,
    1.3877787809725275083e-17, 6.9388939045442335586e-18, 3.4694469521660149876e-18,
    1.7347234760476073607e-18, 8.6736173801206937436e-19,
];

// Lanczos approximation, g = 7, n = 9.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.75 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.75 {
        -(PI * (1.0 + r)).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

/// The complete gamma function. Poles at the non-positive integers yield an error.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma of non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    if x < 0.5 {
        return Ok(PI / (sin_pi(x) * gamma(1.0 - x)?));
    }
    if x > 40.0 {
        return Ok(lanczos(x));
    }
    // Reduce to [0.5, 1.5) where the log series is accurate to rounding.
    let mut z = x;
    let mut scale = 1.0;
    while z >= 1.5 {
        z -= 1.0;
        scale *= z;
    }
    Ok(scale * (1.0 + (z - 1.0) * gamma1pm1_over_a(z - 1.0)))
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    // t^(z+0.5) e^{-t} split to delay overflow.
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * acc
}

/// `(Γ(1 + a) − 1) / a`, accurate for small `a`; defined by continuity at `a = 0`.
fn gamma1pm1_over_a(a: f64) -> f64 {
    debug_assert!((-0.5..=1.0).contains(&a));
    if a.abs() > 0.5 && a > 0.0 {
        // Γ(1+a) = a Γ(a) keeps the series argument in [−0.5, 0.5].
        return (a * (1.0 + (a - 1.0) * gamma1pm1_over_a(a - 1.0)) - 1.0) / a;
    }
    if a == 0.0 {
        return -EULER_GAMMA;
    }
    // ln Γ(1+a) = −ln(1+a) + a(1 − γ) + Σ_{k≥2} (−1)^k (ζ(k) − 1) a^k / k
    let mut sum = 0.0;
    let mut pow = -a;
    for (i, z) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -a;
        let term = z * pow / k;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    let lg = -a.ln_1p() + a * (1.0 - EULER_GAMMA) + sum;
    lg.exp_m1() / a
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt`.
///
/// Defined for any real `a` when `x > 0` and for `a > 0` when `x = 0`.
/// Results below the normal `f64` range are reported as [`Error::Underflow`]
/// rather than returned as denormals or zero.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!("non-finite argument ({a}, {x})")));
    }
    if x < 0.0 {
        return Err(Error::domain(format!("x = {x} must be non-negative")));
    }
    if x == 0.0 {
        if a <= 0.0 {
            return Err(Error::domain(format!(
                "Γ({a}, 0) diverges for non-positive parameter"
            )));
        }
        return gamma(a);
    }
    let value = if x >= CF_THRESHOLD && x >= a + 1.0 {
        continued_fraction(a, x)?
    } else if a >= 1.0 {
        gamma(a)? - lower_series(a, x)?
    } else if a >= 0.0 {
        small_parameter(a, x)?
    } else {
        // Step down from a0 = a + k in [0, 1).
        let k = (-a).ceil();
        let mut b = a + k;
        if b >= 1.0 {
            b -= 1.0;
        }
        let mut value = small_parameter(b, x)?;
        let ln_x = x.ln();
        while b - 1.0 >= a - 1e-12 {
            let next = b - 1.0;
            value = (value - (next * ln_x - x).exp()) / next;
            b = next;
        }
        value
    };
    if !value.is_finite() {
        return Err(Error::domain(format!("Γ({a}, {x}) overflows")));
    }
    if value < f64::MIN_POSITIVE {
        return Err(Error::Underflow(format!("Γ({a}, {x})")));
    }
    Ok(value)
}

/// Lower incomplete gamma `γ(a, x)` by its positive series, for `a > 0`.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            return Ok(sum * (a * x.ln() - x).exp());
        }
    }
    Err(Error::NoConvergence(format!("lower gamma series at ({a}, {x})")))
}

/// `Γ(a, x)` for `a ∈ [0, 1)` and moderate `x`, free of the cancellation
/// between `Γ(a)` and `γ(a, x)` as `a → 0`:
/// `Γ(a, x) = (Γ(1+a) − 1)/a − (x^a − 1)/a − Σ_{n≥1} (−1)^n x^{a+n} / (n! (a+n))`.
fn small_parameter(a: f64, x: f64) -> Result<f64> {
    let ln_x = x.ln();
    let xa_minus_one_over_a = if a == 0.0 {
        ln_x
    } else {
        (a * ln_x).exp_m1() / a
    };
    let xa = (a * ln_x).exp();
    let mut sum = 0.0;
    let mut pow = 1.0; // (−x)^n / n!
    for n in 1..MAX_ITER {
        let nf = n as f64;
        pow *= -x / nf;
        let term = pow / (a + nf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Ok(gamma1pm1_over_a(a) - xa_minus_one_over_a - xa * sum);
        }
    }
    Err(Error::NoConvergence(format!("small-parameter series at ({a}, {x})")))
}

/// Legendre continued fraction by the modified Lentz method.
fn continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let log_prefactor = a * x.ln() - x;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut f = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            // Split the exponential so an underflowing prefactor does not
            // hide a representable result.
            return Ok((log_prefactor + f.ln()).exp());
        }
    }
    Err(Error::NoConvergence(format!("continued fraction at ({a}, {x})")))
}

/// Normalization constant `c_d^{α,λ}` of the tempered fractional Laplacian.
///
/// The `λ = 0` (or `α = 1`) branch is `2^α α Γ((d+α)/2) / Γ(1 − α/2)`, the
/// tempered branch is `Γ(d/2) / |Γ(−α)|`; both are divided by `2 π^{d/2}`.
pub fn normalization_constant(d: usize, alpha: f64, lambda: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!("dimension {d} not in 1..=3")));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha = {alpha} not in (0, 2)")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
    }
    let df = d as f64;
    let denom = 2.0 * PI.powf(df / 2.0);
    let value = if lambda == 0.0 || alpha == 1.0 {
        2f64.powf(alpha) * alpha * gamma((df + alpha) / 2.0)? / gamma(1.0 - alpha / 2.0)?
    } else {
        gamma(df / 2.0)? / gamma(-alpha)?.abs()
    };
    Ok(value / denom)
}
