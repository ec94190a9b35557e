//! Overdetermination defect, the ε-scaling study, and Gauss–Newton
//! continuation of the symmetric branch from the disk.
//!
//! The defect of a domain at a given `λ` is the arc-length RMS of `∂u/∂n`
//! about its mean, where `u` solves the Dirichlet problem with `u = 1` on the
//! boundary. It vanishes exactly when the Neumann condition holds with some
//! constant `c`.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ContinuationConfig, SolverConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fields::{trivial_solution, ConformalMap};
use crate::helmholtz::{build_domain, normal_derivative, normal_derivative_on, solve_on_map};
use crate::lsq::{self, Matrix};
use crate::wronskian::{self, find_mu};

/// Largest `|ε|` accepted by the scaling study and the continuation.
pub const MAX_EPS: f64 = 0.05;
/// Extra shape modes `a_{2m+1}, …` allowed in the continuation.
///
/// The exact branch has `a_{km+1} = O(ε^k)` for every `k`, so truncating after
/// `J` extra modes leaves a defect floor of order `ε^{J+2}` times a large
/// Neumann sensitivity. Near `ε = 0.05` with `m = 4` each mode buys about one
/// decade and `J = 9` is the first to get below `1e-9`.
pub const MAX_SHAPE_MODES: usize = 10;
/// Defects below this are rounding noise and cannot carry a slope.
pub const DEFECT_FLOOR: f64 = 1e-13;
const STAGNATION: f64 = 1e-14;
const RANK_DEFICIENT: f64 = 1e14;

pub fn overdetermination_defect(map: &ConformalMap, lambda: f64) -> Result<f64> {
    overdetermination_defect_with(map, lambda, &SolverConfig::default())
}

pub fn overdetermination_defect_with(map: &ConformalMap, lambda: f64, cfg: &SolverConfig) -> Result<f64> {
    let (domain, sol) = solve_on_map(map, lambda, cfg)?;
    Ok(normal_derivative(&sol, &domain).deviation().1)
}

/// Least-squares line through `(ln x, ln y)`; returns `(slope, intercept)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateData(format!("need at least two points, got {}", xs.len().min(ys.len()))));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateData("log-log fit needs positive finite data".into()));
    }
    let a = Matrix::from_rows(xs.iter().map(|x| vec![1.0, x.ln()]).collect());
    let b: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let ls = lsq::solve(&a, &b).map_err(|e| Error::DegenerateData(e.to_string()))?;
    Ok((ls.solution[1], ls.solution[0]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub m: u32,
    pub mu: f64,
    /// `(ε, defect)` with `ε` strictly increasing.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

pub fn scaling_study(m: u32, eps_list: &[f64], mu: f64) -> Result<ScalingReport> {
    scaling_study_with(m, eps_list, mu, &SolverConfig::default())
}

/// Defect of `w = ε z^{m+1}` at `λ = mu²` for each `ε`, and the log-log slope.
/// The solves are independent and run under `cfg.exec`.
pub fn scaling_study_with(m: u32, eps_list: &[f64], mu: f64, cfg: &SolverConfig) -> Result<ScalingReport> {
    if eps_list.len() < 2 {
        return Err(Error::DegenerateData(format!("a slope needs at least two eps values, got {}", eps_list.len())));
    }
    if eps_list.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 eps values, got {}", eps_list.len())));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= MAX_EPS)) {
        return Err(Error::InvalidArgument(format!("eps = {e} outside (0, {MAX_EPS}]")));
    }
    if eps_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("eps values must be strictly increasing".into()));
    }
    if eps_list[eps_list.len() - 1] < 10.0 * eps_list[0] {
        return Err(Error::InvalidArgument("eps values must span at least a decade".into()));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let inner = SolverConfig { exec: Exec::Sequential, ..*cfg };
    let defects: Vec<f64> = cfg
        .exec
        .map(eps_list, |&eps| overdetermination_defect_with(&ConformalMap::single_mode(m, eps), mu * mu, &inner))
        .into_iter()
        .collect::<Result<_>>()?;
    if let Some(i) = defects.iter().position(|d| *d < DEFECT_FLOOR) {
        return Err(Error::DegenerateData(format!(
            "defect {:e} at eps = {} is below the noise floor {DEFECT_FLOOR:e}",
            defects[i], eps_list[i]
        )));
    }
    let (slope, intercept) = fit_loglog(eps_list, &defects)?;
    Ok(ScalingReport { m, mu, points: eps_list.iter().copied().zip(defects).collect(), slope, intercept })
}

/// A refined point `(Ω(ε), λ(ε), c(ε))` on the branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub m: u32,
    /// The fixed amplitude `a_{m+1}`.
    pub eps: f64,
    /// `a_{m+1} = ε` followed by the refined `a_{2m+1}, …`.
    pub map: ConformalMap,
    pub lambda: f64,
    pub c: f64,
    /// RMS of `∂u/∂n` about its mean on the refined domain.
    pub defect: f64,
    /// `c_0 − c` with `c_0 = −μ_m J_1(μ_m)/J_0(μ_m)`.
    pub gamma: f64,
    /// Fourier–Bessel modes used in the final solve.
    pub modes: usize,
    pub iterations: usize,
    /// Weighted residual norm before each iteration and after the last.
    pub residual_history: Vec<f64>,
}

impl BranchPoint {
    /// The free unknowns `(a_{2m+1}, …, λ, c)`.
    fn unknowns(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.map.coeffs()[1..].to_vec();
        x.push(self.lambda);
        x.push(self.c);
        x
    }
}

/// One ε-step of the continuation: fixed amplitude, fixed trace grid.
struct Step {
    m: u32,
    eps: f64,
    cfg: SolverConfig,
    /// Collocation angles of the grid whose midpoints carry the residual.
    trace_points: usize,
    /// Smallest `K` that met the tolerance so far; solves start here.
    modes: AtomicUsize,
}

struct Evaluation {
    residual: Vec<f64>,
    norm: f64,
    defect: f64,
    modes: usize,
}

impl Step {
    fn new(m: u32, eps: f64, cfg: &ContinuationConfig) -> Self {
        let cfg = SolverConfig { exec: Exec::Sequential, ..cfg.solver };
        Self { m, eps, cfg, trace_points: cfg.points(cfg.max_modes), modes: AtomicUsize::new(cfg.modes) }
    }

    fn map(&self, x: &[f64]) -> ConformalMap {
        let n = x.len() - 2;
        let mut coeffs = vec![self.eps];
        coeffs.extend_from_slice(&x[..n]);
        ConformalMap::new(self.m, coeffs)
    }

    /// `F_i = sqrt(w_i / Σw) (∂_n u(θ_i) − c)` on the trace grid.
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let n = x.len();
        let (lambda, c) = (x[n - 2], x[n - 1]);
        let map = self.map(x);
        let start = SolverConfig { modes: self.modes.load(Ordering::Relaxed), ..self.cfg };
        let (_, sol) = solve_on_map(&map, lambda, &start)?;
        let modes = sol.coeffs.len() - 1;
        self.modes.fetch_max(modes, Ordering::Relaxed);
        let grid = build_domain(&map, self.trace_points)?.validation;
        let trace = normal_derivative_on(&sol, &grid);
        let total: f64 = trace.weights.iter().sum();
        let residual: Vec<f64> =
            trace.values.iter().zip(&trace.weights).map(|(g, w)| (w / total).sqrt() * (g - c)).collect();
        let norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
        Ok(Evaluation { residual, norm, defect: trace.deviation().1, modes })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Gauss–Newton for the unknowns of `BranchPoint::unknowns` at fixed `ε`,
/// starting from `x0`.
fn refine(m: u32, eps: f64, x0: Vec<f64>, c0: f64, cfg: &ContinuationConfig) -> Result<BranchPoint> {
    let n = x0.len();
    let step = Step::new(m, eps, cfg);

    let mut x = x0;
    let mut current = step.evaluate(&x)?;
    let mut history = vec![current.norm];
    let mut iterations = 0;
    let fail = |x: &[f64], defect: f64, iterations: usize| Error::NonConvergence {
        eps,
        defect,
        iterations,
        last_iterate: x.to_vec(),
    };

    while current.norm > cfg.defect_tol {
        if iterations == cfg.max_iterations {
            return Err(fail(&x, current.defect, iterations));
        }
        iterations += 1;
        let h = cfg.fd_step;
        let columns: Vec<Vec<f64>> = cfg
            .solver
            .exec
            .map_range(n, |j| {
                let mut xp = x.clone();
                xp[j] += h;
                step.evaluate(&xp).map(|e| e.residual.iter().zip(&current.residual).map(|(a, b)| (a - b) / h).collect())
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let rows = current.residual.len();
        let mut jac = Matrix::zeros(rows, n);
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                jac.set(i, j, *v);
            }
        }
        let rhs: Vec<f64> = current.residual.iter().map(|r| -r).collect();
        let ls = lsq::solve(&jac, &rhs).map_err(|e| Error::Singular(format!("Jacobian at eps = {eps}: {e}")))?;
        if ls.condition > RANK_DEFICIENT {
            return Err(Error::Singular(format!(
                "Jacobian at eps = {eps} is rank deficient (condition estimate {:e})",
                ls.condition
            )));
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&ls.solution).map(|(a, d)| a + t * d).collect();
            if let Ok(e) = step.evaluate(&trial) {
                if e.norm < current.norm {
                    accepted = Some((trial, e));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, e)) = accepted else {
            return Err(fail(&x, current.defect, iterations));
        };
        let moved = t * norm(&ls.solution);
        x = trial;
        current = e;
        history.push(current.norm);
        if moved < STAGNATION * (1.0 + norm(&x)) && current.norm > cfg.defect_tol {
            return Err(fail(&x, current.defect, iterations));
        }
    }

    let (lambda, c) = (x[n - 2], x[n - 1]);
    Ok(BranchPoint {
        m,
        eps,
        map: step.map(&x),
        lambda,
        c,
        defect: current.defect,
        gamma: c0 - c,
        modes: current.modes,
        iterations,
        residual_history: history,
    })
}

fn validate(m: u32, eps_target: f64, steps: usize, shape_modes: usize) -> Result<()> {
    if !(wronskian::MIN_MODE..=wronskian::MAX_MODE).contains(&m) {
        return Err(Error::Domain(format!("continuation needs 4 <= m <= 64, got {m}")));
    }
    if !(eps_target.is_finite() && eps_target.abs() <= MAX_EPS) {
        return Err(Error::InvalidArgument(format!("|eps| = {eps_target} exceeds {MAX_EPS}")));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if shape_modes > MAX_SHAPE_MODES {
        return Err(Error::InvalidArgument(format!("at most {MAX_SHAPE_MODES} extra shape modes, got {shape_modes}")));
    }
    Ok(())
}

/// Marches `ε` from 0 to the target in equal steps, yielding each refined
/// point as it is found. The first item is the disk; iteration stops after
/// the first error.
pub struct BranchTracer {
    m: u32,
    eps_target: f64,
    steps: usize,
    shape_modes: usize,
    cfg: ContinuationConfig,
    mu: f64,
    c0: f64,
    done: Vec<BranchPoint>,
    next: usize,
    failed: bool,
}

impl BranchTracer {
    pub fn new(m: u32, eps_target: f64, steps: usize, shape_modes: usize, cfg: ContinuationConfig) -> Result<Self> {
        validate(m, eps_target, steps, shape_modes)?;
        let mu = find_mu(m)?.mu;
        let c0 = trivial_solution(mu)?.c0;
        let steps = if eps_target == 0.0 { 0 } else { steps };
        Ok(Self { m, eps_target, steps, shape_modes, cfg, mu, c0, done: Vec::new(), next: 0, failed: false })
    }

    fn eps_at(&self, i: usize) -> f64 {
        self.eps_target * i as f64 / self.steps as f64
    }

    fn trivial(&self) -> Result<BranchPoint> {
        let map = ConformalMap::new(self.m, vec![0.0; self.shape_modes + 1]);
        let lambda = self.mu * self.mu;
        let defect = overdetermination_defect_with(&map, lambda, &self.cfg.solver)?;
        Ok(BranchPoint {
            m: self.m,
            eps: 0.0,
            map,
            lambda,
            c: self.c0,
            defect,
            gamma: 0.0,
            modes: self.cfg.solver.modes,
            iterations: 0,
            residual_history: vec![defect],
        })
    }

    fn guess(&self, eps: f64) -> Vec<f64> {
        match self.done.as_slice() {
            [.., a, b] => {
                // linear extrapolation in ε from the last two points
                let s = (eps - b.eps) / (b.eps - a.eps);
                b.unknowns().iter().zip(a.unknowns()).map(|(y1, y0)| y1 + s * (y1 - y0)).collect()
            }
            // truncation of the first-order family: disk shape, λ = μ², c = c0
            [b] => b.unknowns(),
            [] => unreachable!("the disk is always computed first"),
        }
    }
}

impl Iterator for BranchTracer {
    type Item = Result<BranchPoint>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next > self.steps {
            return None;
        }
        let i = self.next;
        self.next += 1;
        let point = if i == 0 {
            self.trivial()
        } else {
            let eps = self.eps_at(i);
            refine(self.m, eps, self.guess(eps), self.c0, &self.cfg)
        };
        match &point {
            Ok(p) => self.done.push(p.clone()),
            Err(_) => self.failed = true,
        }
        Some(point)
    }
}

pub fn newton_continue(m: u32, eps_target: f64, steps: usize, shape_modes: usize) -> Result<Vec<BranchPoint>> {
    newton_continue_with(m, eps_target, steps, shape_modes, ContinuationConfig::default())
}

pub fn newton_continue_with(
    m: u32,
    eps_target: f64,
    steps: usize,
    shape_modes: usize,
    cfg: ContinuationConfig,
) -> Result<Vec<BranchPoint>> {
    BranchTracer::new(m, eps_target, steps, shape_modes, cfg)?.collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiagnostics {
    pub eps: f64,
    /// RMS of `|φ(e^{iθ})|` about its mean.
    pub non_circularity: f64,
    pub c: f64,
    pub c_negative: bool,
    /// `max |φ(e^{2πi/m} z) − e^{2πi/m} φ(z)|` on the unit circle.
    pub symmetry_residual: f64,
    pub lambda_in_range: bool,
}

const DIAGNOSTIC_SAMPLES: usize = 720;

pub fn branch_diagnostics(points: &[BranchPoint]) -> Result<Vec<PointDiagnostics>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no branch points to diagnose".into()));
    }
    let (lo, hi) = (wronskian::j11().powi(2), wronskian::j02().powi(2));
    Ok(points
        .iter()
        .map(|p| {
            let rot = Complex64::from_polar(1.0, TAU / p.m as f64);
            let zs: Vec<Complex64> = (0..DIAGNOSTIC_SAMPLES)
                .map(|i| Complex64::from_polar(1.0, TAU * i as f64 / DIAGNOSTIC_SAMPLES as f64))
                .collect();
            let radii: Vec<f64> = zs.iter().map(|z| p.map.phi(*z).norm()).collect();
            let mean = radii.iter().sum::<f64>() / radii.len() as f64;
            let rms = (radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / radii.len() as f64).sqrt();
            let symmetry_residual =
                zs.iter().map(|z| (p.map.phi(rot * z) - rot * p.map.phi(*z)).norm()).fold(0.0, f64::max);
            PointDiagnostics {
                eps: p.eps,
                non_circularity: rms,
                c: p.c,
                c_negative: p.c < 0.0,
                symmetry_residual,
                lambda_in_range: p.lambda > lo && p.lambda < hi,
            }
        })
        .collect())
}
