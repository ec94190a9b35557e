//! Closed-form objects around the disk: the radial trivial solution, m-fold
//! symmetric conformal perturbations, the Schwarz lift, the linearized
//! operator restricted to Fourier–Bessel inputs, its kernel, and the
//! first-order family of solutions.
//!
//! Angular dependence is always in the m-fold even class: a boundary trace is a
//! cosine series in `cos(i m θ)`, a Fourier–Bessel field is a sum of
//! `J_{im}(μ r) cos(i m θ)`, and a conformal perturbation `w` only carries the
//! exponents `z^{im+1}`, `i >= 1`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{j, j_prime, j_second};
use crate::wronskian::{self, in_operating_interval, j02, j11};

const MEAN_ZERO_TOL: f64 = 1e-13;

/// `Σ c_i cos(i m θ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosineSeries {
    pub m: u32,
    pub coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn new(m: u32, coeffs: Vec<f64>) -> Self {
        Self { m, coeffs }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let m = self.m as f64;
        self.coeffs.iter().enumerate().map(|(i, c)| c * (i as f64 * m * theta).cos()).sum()
    }

    /// Mean over the circle.
    pub fn mean(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Max of `|eval|` over `samples` equispaced angles on the full circle.
    pub fn sup_norm(&self, samples: usize) -> f64 {
        (0..samples).map(|i| self.eval(std::f64::consts::TAU * i as f64 / samples as f64).abs()).fold(0.0, f64::max)
    }

    fn padded(&self, len: usize) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        c.resize(len.max(c.len()), 0.0);
        c
    }

    pub fn linear_combination(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        assert_eq!(x.m, y.m, "mode class mismatch");
        let n = x.coeffs.len().max(y.coeffs.len());
        let (cx, cy) = (x.padded(n), y.padded(n));
        Self::new(x.m, cx.iter().zip(&cy).map(|(p, q)| a * p + b * q).collect())
    }
}

/// Radial solution `U(r) = J_0(μ r) / J_0(μ)` on the unit disk with `U(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrivialSolution {
    pub mu: f64,
    pub j0: f64,
    pub j1: f64,
    /// `U_r(1) = −μ J_1(μ) / J_0(μ)`, the Neumann value on the disk.
    pub c0: f64,
}

/// Requires `μ ∈ (j_{1,1}, j_{0,2})`, where `J_0(μ) < 0` stays away from zero.
pub fn trivial_solution(mu: f64) -> Result<TrivialSolution> {
    if !in_operating_interval(mu) {
        return Err(Error::Domain(format!("mu = {mu} outside (j11, j02) = ({}, {})", j11(), j02())));
    }
    let (j0, j1) = (j(0, mu), j(1, mu));
    Ok(TrivialSolution { mu, j0, j1, c0: -mu * j1 / j0 })
}

impl TrivialSolution {
    pub fn u(&self, r: f64) -> f64 {
        if r == 1.0 {
            return 1.0;
        }
        j(0, self.mu * r) / self.j0
    }

    pub fn u_r(&self, r: f64) -> f64 {
        if r == 1.0 {
            return self.c0;
        }
        -self.mu * j(1, self.mu * r) / self.j0
    }

    /// `U_rr = μ² J_0''(μ r) / J_0(μ)` with `J_0'' = −J_0 + J_1(x)/x`.
    pub fn u_rr(&self, r: f64) -> f64 {
        let x = self.mu * r;
        let j1_over_x = if x == 0.0 { 0.5 } else { j(1, x) / x };
        self.mu * self.mu * (j1_over_x - j(0, x)) / self.j0
    }
}

/// `w(z) = Σ_{i>=1} a_{im+1} z^{im+1}`, the perturbation in `φ = id + w`.
///
/// Only exponents `≡ 1 (mod m)` with real coefficients are representable, so
/// `w(e^{2πi/m} z) = e^{2πi/m} w(z)` and `w(z̄) = conj w(z)` hold by
/// construction, and the linear coefficient `a_1` (hence `φ'(0) − 1`) is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalMap {
    m: u32,
    /// `coeffs[i]` multiplies `z^{(i+1) m + 1}`.
    coeffs: Vec<f64>,
}

impl ConformalMap {
    pub fn identity(m: u32) -> Self {
        Self { m, coeffs: Vec::new() }
    }

    pub fn new(m: u32, coeffs: Vec<f64>) -> Self {
        assert!(m >= 1, "symmetry order must be positive");
        Self { m, coeffs }
    }

    /// `w = ε z^{m+1}`.
    pub fn single_mode(m: u32, eps: f64) -> Self {
        Self::new(m, vec![eps])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Exponent carried by `coeffs()[i]`.
    pub fn exponent(&self, i: usize) -> u32 {
        (i as u32 + 1) * self.m + 1
    }

    /// `a_{m+1}`, the branch amplitude.
    pub fn amplitude(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Always zero; kept for symmetry with the exponent list.
    pub fn linear_coefficient(&self) -> f64 {
        0.0
    }

    pub fn w(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().enumerate().map(|(i, a)| z.powu(self.exponent(i)) * *a).sum()
    }

    pub fn dw(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = self.exponent(i);
                z.powu(p - 1) * (*a * p as f64)
            })
            .sum()
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        z + self.w(z)
    }

    pub fn dphi(&self, z: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.dw(z)
    }

    /// `Σ p |a_p|`, an upper bound for `max_{|z|<=1} |w'(z)|`.
    pub fn derivative_bound(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, a)| self.exponent(i) as f64 * a.abs()).sum()
    }

    /// `|w'| < 1` on the closed disk, so `id + w` is injective there.
    pub fn is_injective(&self) -> bool {
        self.derivative_bound() < 1.0
    }

    pub fn require_injective(&self) -> Result<()> {
        if !self.is_injective() {
            return Err(Error::Domain(format!(
                "injectivity certificate fails: sum p|a_p| = {} >= 1",
                self.derivative_bound()
            )));
        }
        Ok(())
    }

    /// `x · w` on the unit circle as a cosine series: `Σ a_{im+1} cos(i m θ)`.
    pub fn boundary_trace(&self) -> CosineSeries {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.coeffs);
        CosineSeries::new(self.m, c)
    }

    /// Preimage of `p` under `φ` by Newton's method from `z = p`.
    pub fn invert(&self, p: Complex64) -> Option<Complex64> {
        let mut z = p;
        for _ in 0..60 {
            let d = self.dphi(z);
            if d.norm() == 0.0 {
                return None;
            }
            let step = (self.phi(z) - p) / d;
            z -= step;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        None
    }
}

/// Unique normalized symmetric `w` with `x · w = g` on the unit circle:
/// `w(z) = z G(z)`, `G(z) = Σ_{i>=1} g_i z^{im}`.
///
/// A mean-zero trace is required; otherwise no normalized lift exists.
pub fn schwarz_lift(g: &CosineSeries) -> Result<ConformalMap> {
    let mean = g.mean();
    if mean.abs() > MEAN_ZERO_TOL {
        return Err(Error::Solvability { mean });
    }
    Ok(ConformalMap::new(g.m, g.coeffs.iter().skip(1).copied().collect()))
}

/// `v(r, θ) = Σ b_i J_{im}(μ r) cos(i m θ)`; every term solves `Δv + μ² v = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierBesselField {
    pub m: u32,
    pub mu: f64,
    pub coeffs: Vec<f64>,
}

impl FourierBesselField {
    pub fn new(m: u32, mu: f64, coeffs: Vec<f64>) -> Self {
        Self { m, mu, coeffs }
    }

    pub fn zero(m: u32, mu: f64) -> Self {
        Self::new(m, mu, Vec::new())
    }

    fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, b)| (i as u32 * self.m, *b))
    }

    pub fn value(&self, r: f64, theta: f64) -> f64 {
        self.terms().map(|(k, b)| b * j(k, self.mu * r) * (k as f64 * theta).cos()).sum()
    }

    pub fn dr(&self, r: f64, theta: f64) -> f64 {
        self.terms().map(|(k, b)| b * self.mu * j_prime(k, self.mu * r) * (k as f64 * theta).cos()).sum()
    }

    /// `Δv + μ² v` from `v_rr + v_r / r + v_θθ / r² + μ² v`, using the recurrence
    /// form of `J''` so the result is a real check rather than an identity.
    pub fn helmholtz_residual(&self, r: f64, theta: f64) -> f64 {
        let mu = self.mu;
        self.terms()
            .map(|(k, b)| {
                let x = mu * r;
                let kf = k as f64;
                let radial = mu * mu * j_second(k, x) + mu * j_prime(k, x) / r;
                let angular = -kf * kf * j(k, x) / (r * r);
                b * (radial + angular + mu * mu * j(k, x)) * (kf * theta).cos()
            })
            .sum()
    }

    /// `v(1, θ)` as a cosine series.
    pub fn boundary_value(&self) -> CosineSeries {
        let c = self.terms().map(|(k, b)| b * j(k, self.mu)).collect();
        CosineSeries::new(self.m, c)
    }

    /// `v_r(1, θ)` as a cosine series.
    pub fn boundary_radial(&self) -> CosineSeries {
        let c = self.terms().map(|(k, b)| b * self.mu * j_prime(k, self.mu)).collect();
        CosineSeries::new(self.m, c)
    }
}

/// `(v, w, γ)`, an element of the domain of the linearized operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizedInput {
    pub v: FourierBesselField,
    pub w: ConformalMap,
    pub gamma: f64,
}

impl LinearizedInput {
    pub fn new(v: FourierBesselField, w: ConformalMap, gamma: f64) -> Result<Self> {
        if v.m != w.m() {
            return Err(Error::Consistency(format!("v has symmetry order {} but w has {}", v.m, w.m())));
        }
        Ok(Self { v, w, gamma })
    }

    /// `a x + b y`.
    pub fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        if x.v.m != y.v.m || x.v.mu != y.v.mu {
            return Err(Error::Consistency("inputs built at different (m, mu)".into()));
        }
        let n = x.v.coeffs.len().max(y.v.coeffs.len());
        let pad = |c: &[f64]| {
            let mut c = c.to_vec();
            c.resize(n, 0.0);
            c
        };
        let (vx, vy) = (pad(&x.v.coeffs), pad(&y.v.coeffs));
        let v = FourierBesselField::new(x.v.m, x.v.mu, vx.iter().zip(&vy).map(|(p, q)| a * p + b * q).collect());
        let wt = CosineSeries::linear_combination(a, &x.w.boundary_trace(), b, &y.w.boundary_trace());
        let w = schwarz_lift(&wt)?;
        Self::new(v, w, a * x.gamma + b * y.gamma)
    }
}

/// The three components of the linearized operator applied to `(v, w, γ)`:
///
/// 1. `Δv + μ² v` in the disk (zero for Fourier–Bessel `v`),
/// 2. `v + U_r x · w` on the circle,
/// 3. `U_r v_r − U_rr v + U_r γ` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizedImage {
    pub mu: f64,
    pub v: FourierBesselField,
    pub kinematic: CosineSeries,
    pub dynamic: CosineSeries,
}

impl LinearizedImage {
    /// Component 1 at an interior point.
    pub fn interior_residual(&self, r: f64, theta: f64) -> f64 {
        self.v.helmholtz_residual(r, theta)
    }
}

pub fn apply_linearized(input: &LinearizedInput, mu: f64) -> Result<LinearizedImage> {
    if (input.v.mu - mu).abs() > 1e-14 * mu {
        return Err(Error::Consistency(format!(
            "v was built at mu = {} but the operator is evaluated at mu = {mu}",
            input.v.mu
        )));
    }
    let triv = trivial_solution(mu)?;
    let (ur, urr) = (triv.c0, triv.u_rr(1.0));

    let kinematic = CosineSeries::linear_combination(1.0, &input.v.boundary_value(), ur, &input.w.boundary_trace());
    let mut dynamic = CosineSeries::linear_combination(ur, &input.v.boundary_radial(), -urr, &input.v.boundary_value());
    if dynamic.coeffs.is_empty() {
        dynamic.coeffs.push(0.0);
    }
    dynamic.coeffs[0] += ur * input.gamma;

    Ok(LinearizedImage { mu, v: input.v.clone(), kinematic, dynamic })
}

/// `V_m = J_m(μ r) cos mθ` and `W_m = A z^{m+1}` with
/// `A = J_m(μ) J_0(μ) / (μ J_1(μ))`, chosen so that `V_m + U_r x · W_m = 0` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelField {
    pub m: u32,
    pub mu: f64,
    pub amplitude: f64,
    pub v: FourierBesselField,
    pub w: ConformalMap,
}

pub fn kernel_fields(m: u32, mu: f64) -> Result<KernelField> {
    if m < wronskian::MIN_MODE {
        return Err(Error::Domain(format!("kernel fields need m >= 4, got {m}")));
    }
    let triv = trivial_solution(mu)?;
    let amplitude = j(m, mu) * triv.j0 / (mu * triv.j1);
    Ok(KernelField {
        m,
        mu,
        amplitude,
        v: FourierBesselField::new(m, mu, vec![0.0, 1.0]),
        w: ConformalMap::single_mode(m, amplitude),
    })
}

impl KernelField {
    pub fn input(&self) -> LinearizedInput {
        LinearizedInput { v: self.v.clone(), w: self.w.clone(), gamma: 0.0 }
    }

    /// `sup_θ |V_m(1, θ) + U_r(1) x · W_m|` over `samples` angles.
    pub fn boundary_relation_residual(&self, samples: usize) -> f64 {
        let c0 = -self.mu * j(1, self.mu) / j(0, self.mu);
        let trace = self.w.boundary_trace();
        (0..samples)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / samples as f64;
                (self.v.value(1.0, t) + c0 * trace.eval(t)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Coefficient of `cos mθ` in component 3 for the kernel input at `μ`:
/// `−(μ² / J_0(μ)) 𝒲_{1,m}(μ)`.
pub fn kernel_dynamic_coefficient(m: u32, mu: f64) -> f64 {
    -mu * mu / j(0, mu) * wronskian::wronskian(1, m, mu)
}

/// Leading-order solution family at amplitude `ε`:
///
/// * `φ(z) = z + ε z^{m+1}`
/// * `(u∘φ)(r, θ) = J_0(μr)/J_0(μ) + ε μ (J_1(μ) J_m(μr) / (J_0(μ) J_m(μ)) − J_1(μr) r^{m+1} / J_0(μ)) cos mθ`
/// * `c = −μ J_1(μ)/J_0(μ)`, `λ = μ²`
///
/// with `μ = μ_m`; the `O(ε²)` remainders are dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstOrderFamily {
    pub m: u32,
    pub eps: f64,
    pub mu: f64,
    pub map: ConformalMap,
    pub c: f64,
    pub lambda: f64,
    j0: f64,
    j1: f64,
    jm: f64,
}

pub const MAX_FIRST_ORDER_EPS: f64 = 0.2;

pub fn asymptotic_family(m: u32, eps: f64) -> Result<FirstOrderFamily> {
    if !eps.is_finite() || eps.abs() > MAX_FIRST_ORDER_EPS {
        return Err(Error::Domain(format!("|eps| = {eps} exceeds {MAX_FIRST_ORDER_EPS}")));
    }
    let root = wronskian::find_mu(m)?;
    let map = ConformalMap::single_mode(m, eps);
    map.require_injective()?;
    let mu = root.mu;
    let (j0, j1, jm) = (j(0, mu), j(1, mu), j(m, mu));
    Ok(FirstOrderFamily { m, eps, mu, map, c: -mu * j1 / j0, lambda: mu * mu, j0, j1, jm })
}

impl FirstOrderFamily {
    /// `(u∘φ)(r, θ)` on the closed unit disk.
    pub fn pulled_back(&self, r: f64, theta: f64) -> f64 {
        let mu = self.mu;
        let base = j(0, mu * r) / self.j0;
        let bracket =
            self.j1 * j(self.m, mu * r) / (self.j0 * self.jm) - j(1, mu * r) * r.powi(self.m as i32 + 1) / self.j0;
        base + self.eps * mu * bracket * (self.m as f64 * theta).cos()
    }

    /// `u(p)` for a physical point, or `None` when `p` is not in `φ(closed disk)`.
    pub fn value_at(&self, p: Complex64) -> Option<f64> {
        let z = self.map.invert(p)?;
        (z.norm() <= 1.0 + 1e-12).then(|| self.pulled_back(z.norm().min(1.0), z.arg()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wronskian::{find_mu, wronskian};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn angles(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| TAU * i as f64 / n as f64)
    }

    #[test]
    fn trivial_solution_identities() {
        let t = trivial_solution(4.2).unwrap();
        assert_eq!(t.u(1.0), 1.0);
        let direct = -4.2 * crate::special::bessel_j(1, 4.2).unwrap() / crate::special::bessel_j(0, 4.2).unwrap();
        assert!((t.c0 - direct).abs() < 1e-12);
        assert!((t.u_r(1.0 - 1e-15) - t.c0).abs() < 1e-12);
        for i in 0..40 {
            let r = 0.05 + 0.95 * i as f64 / 39.0;
            let res = t.u_rr(r) + t.u_r(r) / r + 4.2 * 4.2 * t.u(r);
            assert!(res.abs() < 1e-10, "r={r} residual {res:e}");
        }
        let mu4 = find_mu(4).unwrap().mu;
        assert!(trivial_solution(mu4).unwrap().c0 < 0.0);
        assert!(trivial_solution(3.0).is_err());
        assert!(trivial_solution(5.6).is_err());
    }

    #[test]
    fn single_mode_lift() {
        let g = CosineSeries::new(5, vec![0.0, 1.0]);
        let w = schwarz_lift(&g).unwrap();
        assert_eq!(w, ConformalMap::single_mode(5, 1.0));
        let z = Complex64::from_polar(0.7, 0.3);
        assert!((w.w(z) - z.powu(6)).norm() < 1e-15);
    }

    #[test]
    fn kernel_lift_reproduces_w_m() {
        let mu = 4.7;
        let k = kernel_fields(4, mu).unwrap();
        let triv = trivial_solution(mu).unwrap();
        let g = CosineSeries::new(4, k.v.boundary_value().coeffs.iter().map(|c| -c / triv.c0).collect());
        let w = schwarz_lift(&g).unwrap();
        let expected = j(4, mu) * j(0, mu) / (mu * j(1, mu));
        assert!((w.amplitude() - expected).abs() < 1e-12);
        assert_eq!(w.coeffs().len(), 1);
    }

    #[test]
    fn nonzero_mean_has_no_lift() {
        let mu4 = find_mu(4).unwrap().mu;
        let g = CosineSeries::new(4, vec![j(0, mu4)]);
        assert!(matches!(schwarz_lift(&g), Err(Error::Solvability { .. })));
    }

    #[test]
    fn dynamic_component_is_the_wronskian() {
        let mu = 4.4;
        let k = kernel_fields(4, mu).unwrap();
        let img = apply_linearized(&k.input(), mu).unwrap();
        let amp = -mu * mu / j(0, mu) * wronskian(1, 4, mu);
        for t in angles(64) {
            assert!((img.dynamic.eval(t) - amp * (4.0 * t).cos()).abs() < 1e-10);
            assert!(img.kinematic.eval(t).abs() < 1e-12);
        }
        assert!((kernel_dynamic_coefficient(4, mu) - amp).abs() < 1e-14);
    }

    #[test]
    fn kernel_vanishes_at_mu_m() {
        for m in 4..=6 {
            let mu = find_mu(m).unwrap().mu;
            let k = kernel_fields(m, mu).unwrap();
            let img = apply_linearized(&k.input(), mu).unwrap();
            assert!(img.dynamic.sup_norm(64) <= 1e-10);
            assert!(img.kinematic.sup_norm(64) <= 1e-10);
            assert!(k.boundary_relation_residual(64) <= 1e-12);
            assert!(k.amplitude > 0.0);
            for d in [-0.1, 0.1] {
                let k = kernel_fields(m, mu + d).unwrap();
                let img = apply_linearized(&k.input(), mu + d).unwrap();
                assert!(img.dynamic.sup_norm(64) >= 1e-3);
            }
        }
    }

    #[test]
    fn gamma_column() {
        let mu = 4.6;
        let input = LinearizedInput::new(FourierBesselField::zero(4, mu), ConformalMap::identity(4), 1.0).unwrap();
        let img = apply_linearized(&input, mu).unwrap();
        let c0 = trivial_solution(mu).unwrap().c0;
        for t in angles(16) {
            assert!((img.dynamic.eval(t) - c0).abs() < 1e-15);
            assert_eq!(img.kinematic.eval(t), 0.0);
            assert_eq!(img.interior_residual(0.5, t), 0.0);
        }
    }

    #[test]
    fn mismatched_mu_is_rejected() {
        let k = kernel_fields(4, 4.5).unwrap();
        assert!(matches!(apply_linearized(&k.input(), 4.6), Err(Error::Consistency(_))));
        let bad = LinearizedInput::new(FourierBesselField::zero(4, 4.5), ConformalMap::identity(5), 0.0);
        assert!(bad.is_err());
    }

    #[test]
    fn kernel_v_is_periodic_and_solves_helmholtz() {
        let k = kernel_fields(5, 4.8).unwrap();
        for (r, t) in [(0.3, 0.2), (0.9, 1.7), (0.5, 4.0), (0.1, 2.2), (0.77, 5.9)] {
            let a = k.v.value(r, t);
            let b = k.v.value(r, t + TAU / 5.0);
            assert!((a - b).abs() < 1e-14);
            assert!(k.v.helmholtz_residual(r, t).abs() < 1e-9);
        }
    }

    #[test]
    fn transversality_surrogate() {
        for m in 4..=8 {
            let r = find_mu(m).unwrap();
            assert!(r.derivative().abs() >= 1e-4);
            let h = 1e-6;
            let fd = (kernel_dynamic_coefficient(m, r.mu + h) - kernel_dynamic_coefficient(m, r.mu - h)) / (2.0 * h);
            let expected = -r.mu * r.mu / j(0, r.mu) * r.derivative();
            assert!((fd - expected).abs() < 1e-6 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn first_order_family_at_zero() {
        let f = asymptotic_family(4, 0.0).unwrap();
        let mu = find_mu(4).unwrap().mu;
        let t = trivial_solution(mu).unwrap();
        assert_eq!(f.map, ConformalMap::single_mode(4, 0.0));
        assert_eq!(f.lambda, mu * mu);
        assert_eq!(f.c, t.c0);
        for r in [0.0, 0.4, 0.8] {
            assert!((f.pulled_back(r, 0.3) - t.u(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn first_order_boundary_value_is_one() {
        // The ε-bracket cancels identically at r = 1, so the deviation sits at
        // rounding level for every ε: well inside any C ε² bound.
        for m in 4..=8 {
            let f0 = asymptotic_family(m, 0.0).unwrap();
            assert!(f0.c < 0.0);
            for eps in [1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
                let f = asymptotic_family(m, eps).unwrap();
                let dev = angles(128).map(|t| (f.pulled_back(1.0, t) - 1.0).abs()).fold(0.0, f64::max);
                assert!(dev <= 1e-14, "m={m} eps={eps} dev={dev:e}");
            }
        }
    }

    #[test]
    fn first_order_pde_residual_is_second_order() {
        // Pulled back, Δũ + μ² |φ'|² ũ = 0. The truncation cancels the O(ε)
        // part, so its residual must scale like ε². Fourth-order differences.
        let m = 4;
        let h = 1e-3;
        let points = [(0.3, 0.1), (0.6, 0.5), (0.85, 0.2)];
        let residual = |eps: f64| {
            let f = asymptotic_family(m, eps).unwrap();
            let u = |x: f64, y: f64| f.pulled_back((x * x + y * y).sqrt(), y.atan2(x));
            points
                .iter()
                .map(|&(r, t)| {
                    let (x, y) = (r * f64::cos(t), r * f64::sin(t));
                    let d2 = |g: &dyn Fn(f64) -> f64| {
                        (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h)
                    };
                    let lap = d2(&|s| u(x + s, y)) + d2(&|s| u(x, y + s));
                    let jac = f.map.dphi(Complex64::new(x, y)).norm_sqr();
                    (lap + f.lambda * jac * u(x, y)).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = residual(0.01);
        let e2 = residual(0.02);
        let e4 = residual(0.04);
        let s1 = (e2 / e1).log2();
        let s2 = (e4 / e2).log2();
        assert!(s1 > 1.9 && s2 > 1.9, "slopes {s1} {s2} ({e1:e} {e2:e} {e4:e})");
    }

    #[test]
    fn first_order_rejects_large_eps() {
        assert!(asymptotic_family(4, 0.25).is_err());
        assert!(asymptotic_family(9, 0.15).is_err());
        assert!(asymptotic_family(3, 0.01).is_err());
    }

    #[test]
    fn inversion_round_trip() {
        let f = asymptotic_family(5, 0.1).unwrap();
        for (r, t) in [(0.2, 0.4), (0.95, 2.0), (1.0, 0.0)] {
            let z = Complex64::from_polar(r, t);
            let back = f.map.invert(f.map.phi(z)).unwrap();
            assert!((back - z).norm() < 1e-13);
        }
        assert!(f.value_at(Complex64::new(1.3, 0.0)).is_none());
        assert!((f.value_at(f.map.phi(Complex64::from_polar(1.0, 0.7))).unwrap() - 1.0).abs() < 1e-12);
    }

    fn input_strategy() -> impl Strategy<Value = LinearizedInput> {
        (proptest::collection::vec(-1.0f64..1.0, 4), proptest::collection::vec(-0.05f64..0.05, 3), -1.0f64..1.0)
            .prop_map(|(v, w, g)| LinearizedInput {
                v: FourierBesselField::new(4, 4.5, v),
                w: ConformalMap::new(4, w),
                gamma: g,
            })
    }

    proptest! {
        #[test]
        fn schwarz_round_trip(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
            let mut c = vec![0.0];
            c.extend(coeffs);
            let g = CosineSeries::new(6, c);
            let w = schwarz_lift(&g).unwrap();
            for t in angles(256) {
                let x = Complex64::from_polar(1.0, t);
                let dot = (x.conj() * w.w(x)).re;
                prop_assert!((dot - g.eval(t)).abs() < 1e-12);
            }
        }

        #[test]
        fn linearized_operator_is_linear(
            x in input_strategy(), y in input_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0,
        ) {
            let combo = LinearizedInput::combine(a, &x, b, &y).unwrap();
            let (ix, iy, ic) = (
                apply_linearized(&x, 4.5).unwrap(),
                apply_linearized(&y, 4.5).unwrap(),
                apply_linearized(&combo, 4.5).unwrap(),
            );
            for t in angles(32) {
                let k = a * ix.kinematic.eval(t) + b * iy.kinematic.eval(t);
                let d = a * ix.dynamic.eval(t) + b * iy.dynamic.eval(t);
                prop_assert!((ic.kinematic.eval(t) - k).abs() < 1e-11);
                prop_assert!((ic.dynamic.eval(t) - d).abs() < 1e-11);
            }
        }

        #[test]
        fn symmetry_is_structural(coeffs in proptest::collection::vec(-0.03f64..0.03, 1..4), r in 0.0f64..1.0, t in 0.0f64..6.3) {
            let w = ConformalMap::new(4, coeffs);
            let z = Complex64::from_polar(r, t);
            let rot = Complex64::from_polar(1.0, TAU / 4.0);
            prop_assert!((w.w(rot * z) - rot * w.w(z)).norm() < 1e-14);
            prop_assert!((w.w(z.conj()) - w.w(z).conj()).norm() < 1e-15);
            prop_assert!(w.dw(Complex64::new(0.0, 0.0)).norm() == 0.0);
        }
    }
}
