//! Cross-Wronskians `𝒲_{k,l} = J_k J_l' − J_l J_k'` and the bifurcation values `μ_m`.
//!
//! `μ_m` is the smallest positive root of `𝒲_{1,m}` for `m >= 4`. It lies in
//! `(j_{1,1}, j_{1,2})`, where `J_1` changes sign while `J_m` stays positive,
//! so `𝒲_{1,m}(j_{1,1}) > 0 > 𝒲_{1,m}(j_{1,2})` brackets it, and
//! `(μ 𝒲_{1,m})' = ((m² − 1)/μ) J_1 J_m < 0` on that interval makes it simple.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::special::{self, j, j_prime};

pub const MIN_MODE: u32 = 4;
pub const MAX_MODE: u32 = 64;

/// The bifurcation value `μ_m` with its certificate data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WronskianRoot {
    pub m: u32,
    pub mu: f64,
    /// Final bisection interval inside `(j_{1,1}, j_{1,2})`.
    pub bracket: (f64, f64),
    /// `(μ 𝒲_{1,m})'` at `μ_m`; negative certifies a simple root.
    pub slope: f64,
}

impl WronskianRoot {
    /// `𝒲_{1,m}'(μ_m)`, which equals `slope / μ_m` because `𝒲_{1,m}(μ_m) = 0`.
    pub fn derivative(&self) -> f64 {
        self.slope / self.mu
    }
}

pub fn wronskian(k: u32, l: u32, mu: f64) -> f64 {
    j(k, mu) * j_prime(l, mu) - j(l, mu) * j_prime(k, mu)
}

/// `d/dμ (μ 𝒲_{k,l}(μ)) = ((l² − k²)/μ) J_k(μ) J_l(μ)`.
pub fn mu_wronskian_derivative(k: u32, l: u32, mu: f64) -> f64 {
    let (k2, l2) = ((k * k) as f64, (l * l) as f64);
    (l2 - k2) / mu * j(k, mu) * j(l, mu)
}

/// `𝒲_{k,l}'(μ)`.
pub fn wronskian_derivative(k: u32, l: u32, mu: f64) -> f64 {
    (mu_wronskian_derivative(k, l, mu) - wronskian(k, l, mu)) / mu
}

fn cached_root(cell: &'static OnceLock<f64>, k: u32, n: u32) -> f64 {
    *cell.get_or_init(|| special::bessel_root(k, n).expect("low-order Bessel roots are always bracketed").value)
}

/// `j_{1,1}`, first positive zero of `J_1`.
pub fn j11() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    cached_root(&CELL, 1, 1)
}

/// `j_{1,2}`, second positive zero of `J_1`.
pub fn j12() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    cached_root(&CELL, 1, 2)
}

/// `j_{0,2}`, second positive zero of `J_0`.
pub fn j02() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    cached_root(&CELL, 0, 2)
}

/// `true` when `mu` lies in the operating interval `(j_{1,1}, j_{0,2})`.
pub fn in_operating_interval(mu: f64) -> bool {
    mu > j11() && mu < j02()
}

static ROOTS: [OnceLock<WronskianRoot>; (MAX_MODE + 1) as usize] = [const { OnceLock::new() }; (MAX_MODE + 1) as usize];

/// `μ_m`, memoized per `m`. Concurrent first calls may both compute, but every
/// caller receives the single stored value.
pub fn find_mu(m: u32) -> Result<WronskianRoot> {
    if !(MIN_MODE..=MAX_MODE).contains(&m) {
        return Err(Error::Domain(format!("find_mu requires {MIN_MODE} <= m <= {MAX_MODE}, got {m}")));
    }
    let cell = &ROOTS[m as usize];
    if let Some(root) = cell.get() {
        return Ok(*root);
    }
    let root = compute_mu(m)?;
    Ok(*cell.get_or_init(|| root))
}

fn compute_mu(m: u32) -> Result<WronskianRoot> {
    let (lo, hi) = (j11(), j12());
    let f = |mu: f64| wronskian(1, m, mu);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Consistency(format!(
            "W_1,{m} does not change sign from + to - on (j11, j12): {flo:e}, {fhi:e}"
        )));
    }

    // Bisection to 1e-13, keeping the final interval as the certificate.
    let (mut a, mut b, mut fa) = (lo, hi, flo);
    while b - a > 1e-13 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let mut mu = 0.5 * (a + b);
    // One Newton polish, kept only if it stays in the bracket.
    let d = wronskian_derivative(1, m, mu);
    if d != 0.0 {
        let polished = mu - f(mu) / d;
        if polished >= a && polished <= b {
            mu = polished;
        }
    }

    let slope = mu_wronskian_derivative(1, m, mu);
    let root = WronskianRoot { m, mu, bracket: (a, b), slope };
    if slope.is_nan() || slope >= 0.0 {
        return Err(Error::Consistency(format!("slope at mu_{m} is {slope:e}, expected < 0")));
    }
    if !(mu > lo && mu < j02()) {
        return Err(Error::Consistency(format!("mu_{m} = {mu} is outside (j11, j02) = ({lo}, {})", j02())));
    }
    Ok(root)
}

/// One named check with the worst signed margin over everything it covers;
/// a positive margin means the check passed with room to spare.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub detail: String,
}

/// Sign data `J_0(μ_m) < 0`, `J_1(μ_m) < 0`, `J_m(μ_m) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Signs {
    #[serde(rename = "J0")]
    pub j0: f64,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "Jm")]
    pub jm: f64,
    pub passed: bool,
}

impl Signs {
    pub fn at(m: u32, mu: f64) -> Self {
        let (j0, j1, jm) = (j(0, mu), j(1, mu), j(m, mu));
        Self { j0, j1, jm, passed: j0 < 0.0 && j1 < 0.0 && jm > 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub m: u32,
    pub mu: f64,
    pub bracket: (f64, f64),
    pub slope: f64,
    pub residual: f64,
    pub signs: Signs,
    /// `𝒲_{1,m+1}(μ_m)`, negative because `μ_{m+1} < μ_m`.
    pub next_wronskian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub m_max: u32,
    pub passed: bool,
    pub checks: Vec<CheckItem>,
    pub modes: Vec<ModeReport>,
    /// `𝒲_{1,4}(j_{0,2})`; negative is equivalent to `μ_4 < j_{0,2}`.
    #[serde(rename = "W14_at_j02")]
    pub w14_at_j02: f64,
}

impl Lemma1Report {
    pub fn check(&self, name: &str) -> Option<&CheckItem> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Samples of the three-term identity `J_1 𝒲_{k,m} − J_k 𝒲_{1,m} + J_m 𝒲_{1,k} = 0`.
pub const IDENTITY_SAMPLES: usize = 100;
const IDENTITY_SEED: u64 = 0x5eed_1de7;

/// Largest `|J_1 𝒲_{k,m} − J_k 𝒲_{1,m} + J_m 𝒲_{1,k}|` over seeded random
/// `k, m ∈ [0, 64]`, `μ ∈ [0.5, 20]`.
pub fn three_term_identity_residual(samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(IDENTITY_SEED);
    (0..samples)
        .map(|_| {
            let k = rng.random_range(0..=64u32);
            let m = rng.random_range(0..=64u32);
            let mu = rng.random_range(0.5..20.0);
            (j(1, mu) * wronskian(k, m, mu) - j(k, mu) * wronskian(1, m, mu) + j(m, mu) * wronskian(1, k, mu)).abs()
        })
        .fold(0.0, f64::max)
}

fn item(name: &str, margins: &[f64], detail: String) -> CheckItem {
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    CheckItem { name: name.to_string(), passed: margins.iter().all(|&x| x > 0.0), worst_margin: worst, detail }
}

/// Runs every root property for `4 <= m <= m_max` and reports pass/fail per
/// check with worst-case margins. Failures are reported, not raised.
pub fn verify_lemma1(m_max: u32) -> Result<Lemma1Report> {
    verify_lemma1_with(m_max, Exec::default())
}

pub fn verify_lemma1_with(m_max: u32, exec: Exec) -> Result<Lemma1Report> {
    if !(MIN_MODE..=MAX_MODE).contains(&m_max) {
        return Err(Error::Domain(format!("verify_lemma1 requires {MIN_MODE} <= m_max <= {MAX_MODE}, got {m_max}")));
    }
    let ms: Vec<u32> = (MIN_MODE..=m_max).collect();
    let roots = exec.map(&ms, |&m| find_mu(m));

    let (lo, hi, top) = (j11(), j12(), j02());
    let mut modes = Vec::with_capacity(ms.len());
    let mut failures = Vec::new();
    for (m, root) in ms.iter().zip(roots) {
        match root {
            Ok(r) => modes.push(ModeReport {
                m: *m,
                mu: r.mu,
                bracket: r.bracket,
                slope: r.slope,
                residual: wronskian(1, *m, r.mu),
                signs: Signs::at(*m, r.mu),
                next_wronskian: wronskian(1, m + 1, r.mu),
            }),
            Err(e) => failures.push(format!("m={m}: {e}")),
        }
    }

    let mut checks = Vec::new();
    let existence: Vec<f64> = modes
        .iter()
        .map(|r| (r.bracket.0 - lo).min(hi - r.bracket.1).min(r.mu - lo).min(hi - r.mu))
        .chain(failures.iter().map(|_| -1.0))
        .collect();
    checks.push(item(
        "existence_bracket",
        &existence,
        format!("root bracketed inside (j11, j12) = ({lo}, {hi}); {} failures", failures.len()),
    ));
    checks.push(item(
        "below_j02",
        &modes.iter().map(|r| top - r.mu).collect::<Vec<_>>(),
        format!("mu_m < j02 = {top}"),
    ));
    checks.push(item(
        "root_residual",
        &modes.iter().map(|r| 1e-12 - r.residual.abs()).collect::<Vec<_>>(),
        "|W_1m(mu_m)| <= 1e-12".into(),
    ));
    checks.push(item("simplicity", &modes.iter().map(|r| -r.slope).collect::<Vec<_>>(), "(mu W_1m)'(mu_m) < 0".into()));
    checks.push(item(
        "monotone_decreasing",
        &modes.windows(2).map(|w| w[0].mu - w[1].mu).collect::<Vec<_>>(),
        "mu_(m+1) < mu_m".into(),
    ));
    checks.push(item(
        "signs",
        &modes.iter().map(|r| (-r.signs.j0).min(-r.signs.j1).min(r.signs.jm)).collect::<Vec<_>>(),
        "J0(mu_m) < 0, J1(mu_m) < 0, Jm(mu_m) > 0".into(),
    ));
    checks.push(item(
        "next_wronskian_negative",
        &modes.iter().map(|r| -r.next_wronskian).collect::<Vec<_>>(),
        "W_1,(m+1)(mu_m) < 0".into(),
    ));
    let identity = three_term_identity_residual(IDENTITY_SAMPLES);
    checks.push(item(
        "three_term_identity",
        &[1e-12 - identity],
        format!("max residual {identity:e} over {IDENTITY_SAMPLES} samples"),
    ));
    let w14 = wronskian(1, 4, top);
    checks.push(item("W14_at_j02_negative", &[-w14], format!("W_14(j02) = {w14}")));

    let passed = checks.iter().all(|c| c.passed);
    Ok(Lemma1Report { m_max, passed, checks, modes, w14_at_j02: w14 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_wronskian_vanishes() {
        assert_eq!(wronskian(3, 3, 2.7), 0.0);
        for mu in [0.5, 1.0, 4.0, 9.0] {
            assert_eq!(mu_wronskian_derivative(1, 1, mu), 0.0);
        }
    }

    #[test]
    fn published_value_at_j02() {
        assert!((wronskian(1, 4, 5.5201) + 0.012148).abs() < 1e-5);
        assert!((wronskian(1, 4, j02()) + 0.012148).abs() < 1e-5);
    }

    #[test]
    fn derivative_identity_against_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..50 {
            let mu: f64 = rng.random_range(0.5..8.0);
            let g = |x: f64| x * wronskian(1, 4, x);
            let fd = (g(mu + h) - g(mu - h)) / (2.0 * h);
            assert!((fd - mu_wronskian_derivative(1, 4, mu)).abs() < 1e-7, "mu={mu}");
        }
    }

    #[test]
    fn slope_negative_between_j11_and_j12() {
        let (lo, hi) = (j11(), j12());
        for m in [4, 5, 9, 30, 64] {
            for i in 1..50 {
                let mu = lo + (hi - lo) * i as f64 / 50.0;
                assert!(mu_wronskian_derivative(1, m, mu) < 0.0);
            }
        }
    }

    #[test]
    fn mu4_inside_interval() {
        let r = find_mu(4).unwrap();
        assert!(r.mu > 3.8317 && r.mu < 5.5201);
        assert!(r.bracket.0 <= r.mu && r.mu <= r.bracket.1);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-13);
        assert!(wronskian(1, 4, r.mu).abs() <= 1e-12);
        assert!(find_mu(5).unwrap().mu < r.mu);
        let r64 = find_mu(64).unwrap();
        assert!(r64.mu > j11() && r64.mu < j02());
    }

    #[test]
    fn rejects_excluded_modes() {
        for m in [0, 1, 2, 3, 65] {
            assert!(matches!(find_mu(m), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn root_signs_and_transversality() {
        for m in 4..=12 {
            let r = find_mu(m).unwrap();
            assert!(Signs::at(m, r.mu).passed);
            assert!(r.slope < 0.0);
            let d = wronskian_derivative(1, m, r.mu);
            assert!((d - r.derivative()).abs() < 1e-12);
        }
    }

    #[test]
    fn wronskian_vanishes_at_origin() {
        for m in 4..=64 {
            assert!(wronskian(1, m, 1e-3).abs() <= 1e-6);
        }
    }

    #[test]
    fn verify_small_range() {
        let rep = verify_lemma1(8).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert_eq!(rep.modes.len(), 5);
        for m in 4..=8 {
            let r = &rep.modes[(m - 4) as usize];
            assert!(r.next_wronskian < 0.0);
        }
        assert!(verify_lemma1(3).is_err());
    }

    #[test]
    fn memo_is_consistent_across_threads() {
        let handles: Vec<_> = (0..8).map(|_| std::thread::spawn(|| find_mu(11).unwrap())).collect();
        let first = find_mu(11).unwrap();
        for h in handles {
            assert_eq!(h.join().unwrap(), first);
        }
    }
}
