//! Integer-order Bessel functions of the first kind.
//!
//! `J_k(x)` is evaluated from the integral representation
//!
//! ```text
//!   J_k(x) = (1/π) ∫₀^π cos(kτ − x sin τ) dτ
//! ```
//!
//! with the equispaced trapezoid rule, which is spectrally accurate because the
//! integrand is smooth, even and 2π-periodic. The rule only delivers absolute
//! accuracy, so where `J_k(x)` is small relative to the size of the integrand
//! (`(x/2)² ≤ (k+1)/2`) the ascending series is summed instead: there its terms
//! alternate and decrease from the first one, which bounds the relative error by
//! a few ulps. Relative accuracy of tiny values matters for the sign of Wronskians
//! like `J_1 J_64' − J_64 J_1'` near `x ≈ 4`, where `J_64 ≈ 1e-71`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 256;
pub const MAX_ARGUMENT: f64 = 1e4;
/// Orders accepted by [`bessel_root`].
pub const MAX_ROOT_ORDER: u32 = 64;
pub const MAX_ROOT_INDEX: u32 = 8;

const ROOT_SCAN_STEP: f64 = 0.05;
const ROOT_WIDTH: f64 = 1e-13;

/// `J_k(x)` together with `J_k'(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselEval {
    pub order: u32,
    pub x: f64,
    pub value: f64,
    pub derivative: f64,
}

impl BesselEval {
    pub fn new(order: u32, x: f64) -> Result<Self> {
        check_envelope(order, x)?;
        Ok(Self { order, x, value: j(order, x), derivative: j_prime(order, x) })
    }
}

/// A positive zero `j_{k,n}` of `J_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselRoot {
    pub order: u32,
    pub index: u32,
    pub value: f64,
}

fn check_envelope(k: u32, x: f64) -> Result<()> {
    if k > MAX_ORDER || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::Domain(format!(
            "J_{k}({x}) is outside the envelope 0 <= k <= {MAX_ORDER}, 0 <= x <= {MAX_ARGUMENT:e}"
        )));
    }
    Ok(())
}

/// `J_k(x)` for `k <= 256`, `0 <= x <= 1e4`.
///
/// Absolute error is below `1e-12` for `k <= 64`, `x <= 60`.
pub fn bessel_j(k: u32, x: f64) -> Result<f64> {
    check_envelope(k, x)?;
    Ok(j(k, x))
}

/// `J_k'(x)` from `J_k' = J_{k-1} − (k/x) J_k` and `J_0' = −J_1`.
///
/// At `x = 0` the series limits are returned (`1/2` for `k = 1`, else `0`).
pub fn bessel_j_prime(k: u32, x: f64) -> Result<f64> {
    check_envelope(k, x)?;
    Ok(j_prime(k, x))
}

/// `J_k''(x)` from the recurrence chain `(J_{k-2} − 2 J_k + J_{k+2}) / 4`.
///
/// The chain uses only the order recurrences, not Bessel's equation, so the
/// equation's residual is a genuine check of the evaluations.
pub fn bessel_j_second(k: u32, x: f64) -> Result<f64> {
    check_envelope(k + 2, x)?;
    Ok(j_second(k, x))
}

/// Unchecked `J_k(x)` for callers that have validated their ranges.
pub fn j(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let h = 0.5 * x;
    if h * h <= 0.5 * (k as f64 + 1.0) {
        j_series(k, x)
    } else {
        j_integral(k, x)
    }
}

/// `J_n(x)` for a signed order, using `J_{-n} = (-1)^n J_n`.
pub fn j_signed(n: i64, x: f64) -> f64 {
    let v = j(n.unsigned_abs() as u32, x);
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

pub fn j_prime(k: u32, x: f64) -> f64 {
    if k == 0 {
        return -j(1, x);
    }
    if x == 0.0 {
        return if k == 1 { 0.5 } else { 0.0 };
    }
    j(k - 1, x) - (k as f64 / x) * j(k, x)
}

pub fn j_second(k: u32, x: f64) -> f64 {
    let k = k as i64;
    0.25 * (j_signed(k - 2, x) - 2.0 * j_signed(k, x) + j_signed(k + 2, x))
}

/// Periodic trapezoid rule on the integral representation.
pub fn j_integral(k: u32, x: f64) -> f64 {
    let n = (4 * x.ceil() as usize + 4 * k as usize).max(64);
    let period = 2 * n as u64;
    let endpoint = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut sum = 0.5 * (1.0 + endpoint);
    for i in 1..n {
        let tau = PI * i as f64 / n as f64;
        // kτ reduced exactly modulo 2π before the trig call
        let phase = PI * ((k as u64 * i as u64) % period) as f64 / n as f64;
        let s = x * tau.sin();
        sum += phase.cos() * s.cos() + phase.sin() * s.sin();
    }
    sum / n as f64
}

/// Ascending series `Σ (-1)^j (x/2)^{2j+k} / (j! (j+k)!)`.
pub fn j_series(k: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=k {
        term *= h / i as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = h * h;
    let kf = k as f64;
    let mut sum = term;
    for i in 1..1000 {
        let jf = i as f64;
        term *= -q / (jf * (jf + kf));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && jf * (jf + kf) > q {
            break;
        }
    }
    sum
}

/// The `n`-th positive zero of `J_k`, by a sign scan with step 0.05 over
/// `[k/2, k + 20n]` followed by bisection to width `1e-13`.
pub fn bessel_root(k: u32, n: u32) -> Result<BesselRoot> {
    if k > MAX_ROOT_ORDER || n == 0 || n > MAX_ROOT_INDEX {
        return Err(Error::Domain(format!(
            "bessel_root({k}, {n}) requires k <= {MAX_ROOT_ORDER} and 1 <= n <= {MAX_ROOT_INDEX}"
        )));
    }
    let start = 0.5 * k as f64;
    let stop = k as f64 + 20.0 * n as f64;
    let mut seen = 0;
    let mut a = start;
    let mut fa = j(k, a);
    let mut i = 1;
    loop {
        let b = start + i as f64 * ROOT_SCAN_STEP;
        if b > stop {
            break;
        }
        let fb = j(k, b);
        if fb == 0.0 || fa * fb < 0.0 {
            seen += 1;
            if seen == n {
                let value = if fb == 0.0 { b } else { bisect(|x| j(k, x), a, b, fa) };
                return Ok(BesselRoot { order: k, index: n, value });
            }
        }
        a = b;
        fa = fb;
        i += 1;
    }
    Err(Error::Search(format!("found {seen} sign changes of J_{k} in [{start}, {stop}], wanted {n}")))
}

/// Bisection on `[a, b]` with `f(a)` of opposite sign to `f(b)`, to width `1e-13`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= ROOT_WIDTH {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
