//! Cross-checks against oracles that share no code with the library:
//! a plain ascending series for `J_k`, sign scans for roots, and finite
//! differences for derivatives.

use overdet::special::{bessel_j, bessel_j_prime, bessel_root};
use overdet::wronskian::{self, find_mu, wronskian, wronskian_derivative};

/// 40 terms of `Σ (−1)^s (x/2)^{2s+k} / (s! (s+k)!)`.
fn series(k: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = (1..=k).fold(1.0, |acc, i| acc * half / i as f64);
    let mut sum = term;
    for s in 1..40 {
        term *= -half * half / (s as f64 * (s + k) as f64);
        sum += term;
    }
    sum
}

fn series_prime(k: u32, x: f64) -> f64 {
    if k == 0 {
        -series(1, x)
    } else {
        0.5 * (series(k - 1, x) - series(k + 1, x))
    }
}

fn oracle_wronskian(k: u32, l: u32, mu: f64) -> f64 {
    series(k, mu) * series_prime(l, mu) - series(l, mu) * series_prime(k, mu)
}

/// Sign scan with step `h` from `a`, then bisection to `1e-14`.
fn scan_root(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64, nth: usize) -> f64 {
    let mut found = 0;
    let mut x = a;
    while x < b {
        let (fa, fb) = (f(x), f(x + h));
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == nth {
                let (mut lo, mut hi, mut flo) = (x, x + h, fa);
                while hi - lo > 1e-14 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        x += h;
    }
    panic!("no root in [{a}, {b}]");
}

#[test]
fn values_match_the_series() {
    for k in [0, 1, 2, 4, 7, 10] {
        for i in 0..=40 {
            let x = 12.0 * i as f64 / 40.0;
            // the alternating series loses about e^x ulps to cancellation
            let tol = 1e-13_f64.max(x.exp() * 1e-16);
            let (a, b) = (bessel_j(k, x).unwrap(), series(k, x));
            assert!((a - b).abs() <= tol, "J_{k}({x}): {a} vs {b}");
            let (a, b) = (bessel_j_prime(k, x).unwrap(), series_prime(k, x));
            assert!((a - b).abs() <= tol, "J_{k}'({x}): {a} vs {b}");
        }
    }
}

#[test]
fn roots_match_scans_and_tabulated_values() {
    let cases = [(1, 1, 3.8317), (0, 2, 5.5201), (3, 1, 6.3802), (1, 2, 7.0156), (4, 1, 7.5883)];
    for (k, n, published) in cases {
        let oracle = scan_root(|x| series(k, x), 0.5, 12.0, 1e-4, n as usize);
        let root = bessel_root(k, n).unwrap().value;
        assert!((root - oracle).abs() <= 1e-11, "j_{k},{n}: {root} vs {oracle}");
        assert!((root - published).abs() <= 5e-5);
    }
}

#[test]
fn bifurcation_values_match_a_scan() {
    // frozen from the oracle scan below, agreeing with an independent
    // double-precision evaluation to the last printed digit
    let frozen = [(4, 5.342907124862), (5, 4.827064564786), (6, 4.599182814406)];
    let (lo, hi) = (wronskian::j11(), wronskian::j12());
    for (m, value) in frozen {
        let oracle = scan_root(|mu| oracle_wronskian(1, m, mu), lo + 1e-9, hi, 1e-4, 1);
        let mu = find_mu(m).unwrap().mu;
        assert!((mu - oracle).abs() <= 1e-11, "mu_{m}: {mu} vs {oracle}");
        assert!((mu - value).abs() <= 1e-11);
    }
}

#[test]
fn w14_at_j02() {
    let j02 = wronskian::j02();
    let w = wronskian(1, 4, j02);
    assert!((w - oracle_wronskian(1, 4, j02)).abs() <= 1e-13);
    assert!((w + 0.012148).abs() <= 1e-5, "{w}");
}

#[test]
fn wronskian_derivative_against_differences() {
    let (k, l, mu) = (1, 5, 4.0);
    let h = 1e-3;
    let f = |x| wronskian(k, l, x);
    // fourth-order central difference
    let fd = (-f(mu + 2.0 * h) + 8.0 * f(mu + h) - 8.0 * f(mu - h) + f(mu - 2.0 * h)) / (12.0 * h);
    assert!((wronskian_derivative(k, l, mu) - fd).abs() <= 1e-9);
}
