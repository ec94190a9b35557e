//! Dirichlet problem `Δu + λu = 0`, `u = 1` on `∂Ω` for `Ω = φ(𝔻)` in the
//! m-fold even symmetry class, by Trefftz collocation.
//!
//! The trial space is spanned by `ψ_0 = J_0(κρ)` and
//! `ψ_k = J_k(κρ)/J_k(κ) cos kα` for `k = m, 2m, …, Km`, with `κ = √λ` and
//! `(ρ, α)` the physical polar coordinates. Each `ψ_k` solves the equation
//! exactly, so only the boundary condition is fitted. Dividing by `J_k(κ)`
//! makes every basis function O(1) on the boundary; the raw coefficients of
//! `J_k(κρ) cos kα` are available from [`DirichletSolution::raw_coefficients`].
//!
//! The boundary is sampled on the fundamental sector `θ ∈ [0, π/m]` of the
//! reference circle. For traces that are even and `2π/m`-periodic, the
//! trapezoid rule there (half weights at the ends) is the periodic trapezoid
//! rule on the whole circle, so weighted sums converge spectrally.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{SolverConfig, ILL_CONDITIONED, MODE_STEP, OVERSAMPLING};
use crate::error::{Error, Result};
use crate::fields::ConformalMap;
use crate::lsq::{self, Matrix};
use crate::special::{j, j_prime, j_second, MAX_ORDER};

/// Boundary samples at reference angles `θ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    pub theta: Vec<f64>,
    /// `φ(e^{iθ_i})`.
    pub points: Vec<Complex64>,
    /// Outward unit normals.
    pub normals: Vec<Complex64>,
    /// Arc-length quadrature weights for the sector.
    pub weights: Vec<f64>,
}

impl BoundaryGrid {
    fn new(map: &ConformalMap, theta: Vec<f64>, rule: impl Fn(usize) -> f64) -> Self {
        let mut points = Vec::with_capacity(theta.len());
        let mut normals = Vec::with_capacity(theta.len());
        let mut weights = Vec::with_capacity(theta.len());
        for (i, &t) in theta.iter().enumerate() {
            let e = Complex64::from_polar(1.0, t);
            let d = map.dphi(e);
            // tangent φ'·ie^{iθ}, turned by −π/2
            let n = d * e;
            points.push(map.phi(e));
            normals.push(n / n.norm());
            weights.push(rule(i) * d.norm());
        }
        Self { theta, points, normals, weights }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// `Ω = φ(𝔻)` with a collocation grid and an offset validation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDomain {
    pub map: ConformalMap,
    /// `M` angles `θ_i = iπ/(m(M−1))`, trapezoid weights.
    pub collocation: BoundaryGrid,
    /// `M − 1` midpoints of the collocation angles, midpoint weights.
    pub validation: BoundaryGrid,
}

impl SymmetricDomain {
    pub fn m(&self) -> u32 {
        self.map.m()
    }
}

pub fn build_domain(map: &ConformalMap, points: usize) -> Result<SymmetricDomain> {
    map.require_injective()?;
    if points < OVERSAMPLING {
        return Err(Error::InvalidArgument(format!("need at least {OVERSAMPLING} collocation angles, got {points}")));
    }
    let h = PI / (map.m() as f64 * (points - 1) as f64);
    let col = (0..points).map(|i| i as f64 * h).collect();
    let last = points - 1;
    let collocation = BoundaryGrid::new(map, col, |i| if i == 0 || i == last { h / 2.0 } else { h });
    let val = (0..points - 1).map(|i| (i as f64 + 0.5) * h).collect();
    let validation = BoundaryGrid::new(map, val, |_| h);
    Ok(SymmetricDomain { map: map.clone(), collocation, validation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSolution {
    pub lambda: f64,
    pub m: u32,
    /// Coefficients of the boundary-normalized basis, index `i` ↔ order `i m`.
    pub coeffs: Vec<f64>,
    /// `sup |u − 1|` on the validation grid.
    pub residual: f64,
    /// `max |R_ii| / min |R_ii|` of the column-equilibrated QR factor.
    pub condition: f64,
    /// Set when `condition` exceeds the ill-conditioning threshold.
    pub warning: Option<String>,
    kappa: f64,
    norms: Vec<f64>,
}

impl DirichletSolution {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Orders `0, m, …, K m`.
    pub fn orders(&self) -> Vec<u32> {
        (0..self.coeffs.len() as u32).map(|i| i * self.m).collect()
    }

    /// Coefficients of `J_k(κρ) cos kα`.
    pub fn raw_coefficients(&self) -> Vec<f64> {
        self.coeffs.iter().zip(&self.norms).map(|(c, n)| c / n).collect()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.coeffs.iter().zip(&self.norms).enumerate().map(|(i, (c, n))| ((i as u32 * self.m) as f64, *c, *n))
    }

    pub fn value(&self, p: Complex64) -> f64 {
        let (rho, alpha) = (p.norm(), p.arg());
        self.terms().map(|(k, c, n)| c * j(k as u32, self.kappa * rho) / n * (k * alpha).cos()).sum()
    }

    /// `∇u` as `u_x + i u_y`.
    pub fn gradient(&self, p: Complex64) -> Complex64 {
        let (rho, alpha) = (p.norm(), p.arg());
        let x = self.kappa * rho;
        let (mut dr, mut da) = (0.0, 0.0);
        for (k, c, n) in self.terms() {
            let (cos, sin) = ((k * alpha).cos(), (k * alpha).sin());
            dr += c * self.kappa * j_prime(k as u32, x) / n * cos;
            if k > 0.0 {
                da -= c * k * j(k as u32, x) / n * sin;
            }
        }
        let e = Complex64::from_polar(1.0, alpha);
        if rho == 0.0 {
            // only the k = m term can contribute and m >= 1 makes it vanish
            return Complex64::new(0.0, 0.0);
        }
        e * Complex64::new(dr, da / rho)
    }

    /// `Δu + λu` at `p` from closed-form second derivatives; zero up to rounding.
    pub fn pde_residual(&self, p: Complex64) -> f64 {
        let (rho, alpha) = (p.norm(), p.arg());
        let kap = self.kappa;
        let x = kap * rho;
        self.terms()
            .map(|(k, c, n)| {
                let ku = k as u32;
                let radial = kap * kap * j_second(ku, x) + kap * j_prime(ku, x) / rho;
                let angular = -k * k * j(ku, x) / (rho * rho);
                c / n * (radial + angular + self.lambda * j(ku, x)) * (k * alpha).cos()
            })
            .sum()
    }
}

/// `∂u/∂n` sampled on a boundary grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BoundaryTrace {
    pub fn deviation(&self) -> (f64, f64) {
        deviation(&self.values, &self.weights)
    }
}

fn basis_row(m: u32, kappa: f64, norms: &[f64], p: Complex64) -> Vec<f64> {
    let (rho, alpha) = (p.norm(), p.arg());
    norms
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let k = i as u32 * m;
            j(k, kappa * rho) / n * (k as f64 * alpha).cos()
        })
        .collect()
}

pub fn solve_dirichlet(domain: &SymmetricDomain, lambda: f64, modes: usize) -> Result<DirichletSolution> {
    solve_dirichlet_with(domain, lambda, &SolverConfig::with_modes(modes))
}

/// Least-squares collocation with exactly `cfg.modes` modes and tolerance
/// `cfg.dirichlet_tol`; the collocation grid is the one stored in `domain`.
pub fn solve_dirichlet_with(domain: &SymmetricDomain, lambda: f64, cfg: &SolverConfig) -> Result<DirichletSolution> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let modes = cfg.modes;
    let needed = OVERSAMPLING * (modes + 1);
    if modes == 0 || domain.collocation.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "{} collocation angles cannot support {modes} modes (need >= {needed})",
            domain.collocation.len()
        )));
    }
    let m = domain.m();
    let kappa = lambda.sqrt();
    let norms: Vec<f64> = (0..=modes as u32).map(|i| if i == 0 { 1.0 } else { j(i * m, kappa) }).collect();
    if let Some(i) = norms.iter().position(|n| *n == 0.0 || !n.is_finite()) {
        return Err(Error::Domain(format!("J_{}(sqrt(lambda)) vanishes", i as u32 * m)));
    }

    let grid = &domain.collocation;
    let mut a = Matrix::zeros(grid.len(), modes + 1);
    let mut b = vec![0.0; grid.len()];
    for (i, (p, w)) in grid.points.iter().zip(&grid.weights).enumerate() {
        let s = w.sqrt();
        for (k, v) in basis_row(m, kappa, &norms, *p).into_iter().enumerate() {
            a.set(i, k, s * v);
        }
        b[i] = s;
    }
    let ls = lsq::solve(&a, &b)?;
    let mut sol = DirichletSolution {
        lambda,
        m,
        coeffs: ls.solution,
        residual: 0.0,
        condition: ls.condition,
        warning: None,
        kappa,
        norms,
    };
    sol.residual = domain.validation.points.iter().map(|p| (sol.value(*p) - 1.0).abs()).fold(0.0, f64::max);
    if sol.condition > ILL_CONDITIONED {
        sol.warning = Some(format!("ill-conditioned collocation system (estimate {:e})", sol.condition));
    }
    if sol.residual.is_nan() || sol.residual > cfg.dirichlet_tol {
        return Err(Error::DirichletResidual { residual: sol.residual, tolerance: cfg.dirichlet_tol });
    }
    Ok(sol)
}

/// Builds the domain for `map` and solves, raising `K` by [`MODE_STEP`] from
/// `cfg.modes` until the validation residual meets `cfg.dirichlet_tol`.
///
/// Fourier–Bessel coefficients decay geometrically at a rate set by how far
/// the boundary departs from a circle, so a fixed `K` that is ample at
/// `ε = 10⁻²` is not enough near `ε = 0.05`.
pub fn solve_on_map(
    map: &ConformalMap,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<(SymmetricDomain, DirichletSolution)> {
    let m = map.m() as usize;
    let mut modes = cfg.modes;
    loop {
        let domain = build_domain(map, cfg.points(modes))?;
        let step = SolverConfig { modes, ..*cfg };
        let next = modes + MODE_STEP;
        let can_grow = next <= cfg.max_modes && next * m <= MAX_ORDER as usize;
        match solve_dirichlet_with(&domain, lambda, &step) {
            Err(Error::DirichletResidual { .. }) if can_grow => modes = next,
            other => return other.map(|s| (domain, s)),
        }
    }
}

/// `n · ∇u` on the validation grid.
pub fn normal_derivative(sol: &DirichletSolution, domain: &SymmetricDomain) -> BoundaryTrace {
    normal_derivative_on(sol, &domain.validation)
}

pub fn normal_derivative_on(sol: &DirichletSolution, grid: &BoundaryGrid) -> BoundaryTrace {
    let values = grid
        .points
        .iter()
        .zip(&grid.normals)
        .map(|(p, n)| {
            let g = sol.gradient(*p);
            g.re * n.re + g.im * n.im
        })
        .collect();
    BoundaryTrace { theta: grid.theta.clone(), values, weights: grid.weights.clone() }
}

/// Weighted mean and weighted RMS about the mean.
pub fn deviation(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values.iter().zip(weights).map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / total;
    (mean, var.sqrt())
}
