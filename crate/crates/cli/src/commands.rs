use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use overdet::branch::{branch_diagnostics, scaling_study_with, BranchPoint, BranchTracer};
use overdet::config::{ContinuationConfig, SolverConfig, REFINED_DIRICHLET_TOL};
use overdet::fields::{apply_linearized, asymptotic_family, kernel_fields, ConformalMap, FirstOrderFamily};
use overdet::helmholtz::{solve_on_map, DirichletSolution};
use overdet::special::j;
use overdet::wronskian::{self, find_mu, verify_lemma1_with, CheckItem, ModeReport};
use overdet::Exec;

use crate::output::{csv_row, num, to_json, Artifact, Outcome};
use crate::{CliError, Command, Format, RunConfig};

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let format = cfg.format();
    let solver = SolverConfig { modes: cfg.common.modes, ..SolverConfig::default() };
    let continuation = ContinuationConfig {
        solver: SolverConfig { dirichlet_tol: REFINED_DIRICHLET_TOL, ..solver },
        defect_tol: cfg.common.tol,
        ..ContinuationConfig::default()
    };
    match &cfg.command {
        Command::MuTable { m_min, m_max } => cmd_mu_table(*m_min, *m_max, format),
        Command::Verify { m_max } => cmd_verify(*m_max, format),
        Command::Scaling { m, eps_list, control_offset } => {
            let solver = SolverConfig { dirichlet_tol: cfg.common.tol, ..solver };
            cmd_scaling(*m, eps_list, *control_offset, &solver, format)
        }
        Command::Branch { m, eps, steps, shape_modes } => {
            cmd_branch(*m, *eps, *steps, *shape_modes, continuation, format)
        }
        Command::Figure { m_list, eps, grid_n, first_order, steps, shape_modes } => {
            let refined = (!*first_order).then_some((*steps, *shape_modes, continuation));
            cmd_figure(m_list, eps.unwrap_or_else(|| crate::figure_eps(*first_order)), *grid_n, refined)
        }
    }
}

#[derive(Debug, Serialize)]
struct MuRow {
    m: u32,
    mu_m: f64,
    slope: f64,
    #[serde(rename = "J0")]
    j0: f64,
    #[serde(rename = "J1")]
    j1: f64,
    #[serde(rename = "Jm")]
    jm: f64,
}

pub fn cmd_mu_table(m_min: u32, m_max: u32, format: Format) -> Result<Outcome, CliError> {
    eprintln!("mu-table: m = {m_min}..={m_max}");
    let rows: Vec<MuRow> = (m_min..=m_max)
        .map(|m| {
            let r = find_mu(m)?;
            Ok(MuRow { m, mu_m: r.mu, slope: r.slope, j0: j(0, r.mu), j1: j(1, r.mu), jm: j(m, r.mu) })
        })
        .collect::<Result<_, overdet::Error>>()?;
    if rows.windows(2).any(|w| w[1].mu_m >= w[0].mu_m) {
        return Err(CliError::Compute("mu_m is not strictly decreasing".into()));
    }
    let content = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("m,mu_m,slope,J0(mu_m),J1(mu_m),Jm(mu_m)\n");
            for r in &rows {
                s += &csv_row(&[r.m.to_string(), num(r.mu_m), num(r.slope), num(r.j0), num(r.j1), num(r.jm)]);
            }
            s
        }
    };
    Ok(Outcome::single("mu_table", content))
}

/// Kernel certificate at `μ_m` and at `μ_m ± δ`, with boundary components
/// divided by `J_m` at the same `μ` so the thresholds mean the same for all `m`.
#[derive(Debug, Serialize)]
pub struct KernelCertificate {
    pub m: u32,
    pub mu: f64,
    pub offset: f64,
    pub kinematic_sup: f64,
    pub dynamic_sup: f64,
    pub dynamic_sup_below: f64,
    pub dynamic_sup_above: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct TransversalityCertificate {
    pub m: u32,
    /// `𝒲_{1,m}'(μ_m)`.
    pub derivative: f64,
    /// `𝒲_{1,m}'(μ_m) / J_m(μ_m)`.
    pub normalized: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub m_max: u32,
    pub passed: bool,
    #[serde(rename = "W14_at_j02")]
    pub w14_at_j02: f64,
    pub checks: Vec<CheckItem>,
    pub modes: Vec<ModeReport>,
    pub kernel: Vec<KernelCertificate>,
    pub transversality: Vec<TransversalityCertificate>,
}

const KERNEL_ZERO: f64 = 1e-10;
const KERNEL_AWAY: f64 = 1e-3;
const TRANSVERSAL: f64 = 1e-4;
const TRACE_SAMPLES: usize = 64;
const CERT_OFFSET: f64 = 0.1;

fn kernel_certificate(m: u32) -> Result<KernelCertificate, overdet::Error> {
    let mu = find_mu(m)?.mu;
    let offset = CERT_OFFSET.min(0.5 * (mu - wronskian::j11()));
    let sup = |at: f64| -> Result<(f64, f64), overdet::Error> {
        let k = kernel_fields(m, at)?;
        let img = apply_linearized(&k.input(), at)?;
        let scale = j(m, at);
        Ok((img.kinematic.sup_norm(TRACE_SAMPLES) / scale, img.dynamic.sup_norm(TRACE_SAMPLES) / scale))
    };
    let (kinematic_sup, dynamic_sup) = sup(mu)?;
    let (_, dynamic_sup_below) = sup(mu - offset)?;
    let (_, dynamic_sup_above) = sup(mu + offset)?;
    Ok(KernelCertificate {
        m,
        mu,
        offset,
        kinematic_sup,
        dynamic_sup,
        dynamic_sup_below,
        dynamic_sup_above,
        passed: kinematic_sup <= KERNEL_ZERO
            && dynamic_sup <= KERNEL_ZERO
            && dynamic_sup_below >= KERNEL_AWAY
            && dynamic_sup_above >= KERNEL_AWAY,
    })
}

fn summarize(name: &str, margins: Vec<f64>, detail: String) -> CheckItem {
    CheckItem {
        name: name.to_string(),
        passed: margins.iter().all(|x| *x > 0.0),
        worst_margin: margins.into_iter().fold(f64::INFINITY, f64::min),
        detail,
    }
}

pub fn verify_report(m_max: u32) -> Result<VerifyReport, CliError> {
    let lemma = verify_lemma1_with(m_max, Exec::default())?;
    let ms: Vec<u32> = (wronskian::MIN_MODE..=m_max).collect();
    let kernel: Vec<KernelCertificate> =
        Exec::default().map(&ms, |&m| kernel_certificate(m)).into_iter().collect::<Result<_, _>>()?;
    let transversality: Vec<TransversalityCertificate> = lemma
        .modes
        .iter()
        .map(|r| {
            let derivative = r.slope / r.mu;
            let normalized = derivative / r.signs.jm;
            TransversalityCertificate { m: r.m, derivative, normalized, passed: normalized.abs() >= TRANSVERSAL }
        })
        .collect();

    let mut checks = lemma.checks.clone();
    checks.push(summarize(
        "kernel_certificate",
        kernel
            .iter()
            .flat_map(|k| {
                [
                    KERNEL_ZERO - k.kinematic_sup,
                    KERNEL_ZERO - k.dynamic_sup,
                    k.dynamic_sup_below - KERNEL_AWAY,
                    k.dynamic_sup_above - KERNEL_AWAY,
                ]
            })
            .collect(),
        format!("boundary components / J_m: <= {KERNEL_ZERO:e} at mu_m, >= {KERNEL_AWAY:e} at mu_m +/- offset"),
    ));
    checks.push(summarize(
        "transversality",
        transversality.iter().map(|t| t.normalized.abs() - TRANSVERSAL).collect(),
        format!("|W'_(1,m)(mu_m)| / J_m(mu_m) >= {TRANSVERSAL:e}"),
    ));
    Ok(VerifyReport {
        m_max,
        passed: checks.iter().all(|c| c.passed),
        w14_at_j02: lemma.w14_at_j02,
        checks,
        modes: lemma.modes,
        kernel,
        transversality,
    })
}

pub fn cmd_verify(m_max: u32, format: Format) -> Result<Outcome, CliError> {
    eprintln!("verify: m = 4..={m_max}");
    let report = verify_report(m_max)?;
    let content = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("check,passed,worst_margin\n");
            for c in &report.checks {
                s += &csv_row(&[c.name.clone(), c.passed.to_string(), num(c.worst_margin)]);
            }
            s += &csv_row(&["W14_at_j02".into(), (report.w14_at_j02 < 0.0).to_string(), num(report.w14_at_j02)]);
            s
        }
    };
    let mut outcome = Outcome::single("verify", content);
    if !report.passed {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        outcome.failure = Some(format!("verification failed: {}", failed.join(", ")));
    }
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct ScalingRow {
    eps: f64,
    dev_at_mu_m: f64,
    dev_at_control: f64,
}

#[derive(Debug, Serialize)]
struct ScalingSummary {
    m: u32,
    mu_m: f64,
    control_mu: f64,
    slope_at_mu_m: f64,
    slope_at_control: f64,
}

#[derive(Debug, Serialize)]
struct ScalingJson {
    #[serde(flatten)]
    summary: ScalingSummary,
    rows: Vec<ScalingRow>,
}

pub fn cmd_scaling(
    m: u32,
    eps_list: &[f64],
    control_offset: f64,
    solver: &SolverConfig,
    format: Format,
) -> Result<Outcome, CliError> {
    let mu = find_mu(m)?.mu;
    let control = mu + control_offset;
    eprintln!("scaling: m = {m}, mu_m = {mu}, control = {control}, {} eps values", eps_list.len());
    let at = scaling_study_with(m, eps_list, mu, solver)?;
    let ctl = scaling_study_with(m, eps_list, control, solver)?;
    let rows: Vec<ScalingRow> = at
        .points
        .iter()
        .zip(&ctl.points)
        .map(|(&(eps, a), &(_, b))| ScalingRow { eps, dev_at_mu_m: a, dev_at_control: b })
        .collect();
    let summary =
        ScalingSummary { m, mu_m: mu, control_mu: control, slope_at_mu_m: at.slope, slope_at_control: ctl.slope };
    let content = match format {
        Format::Json => to_json(&ScalingJson { summary, rows })?,
        Format::Csv => {
            let mut s = String::from("eps,dev_at_mu_m,dev_at_control\n");
            for r in &rows {
                s += &csv_row(&[num(r.eps), num(r.dev_at_mu_m), num(r.dev_at_control)]);
            }
            let footer = serde_json::to_string(&summary).map_err(|e| CliError::Compute(e.to_string()))?;
            s += &format!("# {footer}\n");
            s
        }
    };
    Ok(Outcome::single("scaling", content))
}

#[derive(Debug, Serialize)]
struct BranchRecord {
    m: u32,
    eps: f64,
    exponents: Vec<u32>,
    coefficients: Vec<f64>,
    lambda: f64,
    c: f64,
    gamma: f64,
    defect: f64,
    non_circularity: f64,
    modes: usize,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct FailureRecord {
    failure: String,
}

/// Runs the continuation, keeping every point found before a failure.
pub fn trace_branch(
    m: u32,
    eps: f64,
    steps: usize,
    shape_modes: usize,
    cfg: ContinuationConfig,
) -> Result<(Vec<BranchPoint>, Option<String>), CliError> {
    let mut points = Vec::new();
    for p in BranchTracer::new(m, eps, steps, shape_modes, cfg)? {
        match p {
            Ok(p) => {
                eprintln!("branch: eps = {:.6} defect = {:.3e} after {} iterations", p.eps, p.defect, p.iterations);
                points.push(p);
            }
            Err(e) => return Ok((points, Some(e.to_string()))),
        }
    }
    Ok((points, None))
}

pub fn cmd_branch(
    m: u32,
    eps: f64,
    steps: usize,
    shape_modes: usize,
    cfg: ContinuationConfig,
    format: Format,
) -> Result<Outcome, CliError> {
    let (points, failure) = trace_branch(m, eps, steps, shape_modes, cfg)?;
    let diagnostics = if points.is_empty() { Vec::new() } else { branch_diagnostics(&points)? };
    let records: Vec<BranchRecord> = points
        .iter()
        .zip(&diagnostics)
        .map(|(p, d)| BranchRecord {
            m: p.m,
            eps: p.eps,
            exponents: (0..p.map.coeffs().len()).map(|i| p.map.exponent(i)).collect(),
            coefficients: p.map.coeffs().to_vec(),
            lambda: p.lambda,
            c: p.c,
            gamma: p.gamma,
            defect: p.defect,
            non_circularity: d.non_circularity,
            modes: p.modes,
            iterations: p.iterations,
        })
        .collect();
    let content = match format {
        Format::Json => {
            let mut values: Vec<serde_json::Value> = records
                .iter()
                .map(serde_json::to_value)
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Compute(e.to_string()))?;
            if let Some(msg) = &failure {
                values.push(serde_json::to_value(FailureRecord { failure: msg.clone() }).expect("plain struct"));
            }
            to_json(&values)?
        }
        Format::Csv => {
            let mut header = vec!["eps", "lambda", "c", "gamma", "defect", "non_circularity"]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>();
            header.extend((0..=shape_modes).map(|i| format!("a_{}", (i as u32 + 1) * m + 1)));
            let mut s = csv_row(&header);
            for r in &records {
                let mut row =
                    vec![num(r.eps), num(r.lambda), num(r.c), num(r.gamma), num(r.defect), num(r.non_circularity)];
                row.extend(r.coefficients.iter().map(|a| num(*a)));
                s += &csv_row(&row);
            }
            if let Some(msg) = &failure {
                s += &format!("# failure: {msg}\n");
            }
            s
        }
    };
    Ok(Outcome { artifacts: vec![Artifact { name: "branch".into(), content }], failure })
}

enum FigureField {
    FirstOrder(FirstOrderFamily),
    Refined(ConformalMap, DirichletSolution),
}

impl FigureField {
    fn map(&self) -> &ConformalMap {
        match self {
            FigureField::FirstOrder(f) => &f.map,
            FigureField::Refined(map, _) => map,
        }
    }

    fn boundary_value(&self, theta: f64) -> f64 {
        match self {
            FigureField::FirstOrder(f) => f.pulled_back(1.0, theta),
            FigureField::Refined(map, sol) => sol.value(map.phi(Complex64::from_polar(1.0, theta))),
        }
    }

    fn value(&self, p: Complex64) -> Option<f64> {
        match self {
            FigureField::FirstOrder(f) => f.value_at(p),
            FigureField::Refined(map, sol) => {
                let z = map.invert(p)?;
                (z.norm() <= 1.0).then(|| sol.value(p))
            }
        }
    }
}

/// Closed boundary polyline resolution.
pub const BOUNDARY_SAMPLES: usize = 720;

fn figure_field(
    m: u32,
    eps: f64,
    refined: Option<(usize, usize, ContinuationConfig)>,
) -> Result<FigureField, CliError> {
    match refined {
        None => Ok(FigureField::FirstOrder(asymptotic_family(m, eps)?)),
        Some((steps, shape_modes, cfg)) => {
            let (points, failure) = trace_branch(m, eps, steps, shape_modes, cfg)?;
            if let Some(msg) = failure {
                return Err(CliError::Compute(msg));
            }
            let p = points.last().expect("the disk is always the first point");
            let (_, sol) = solve_on_map(&p.map, p.lambda, &cfg.solver)?;
            Ok(FigureField::Refined(p.map.clone(), sol))
        }
    }
}

pub fn cmd_figure(
    m_list: &[u32],
    eps: f64,
    grid_n: usize,
    refined: Option<(usize, usize, ContinuationConfig)>,
) -> Result<Outcome, CliError> {
    let mut artifacts = Vec::new();
    for &m in m_list {
        eprintln!("figure: m = {m}, eps = {eps}, {}", if refined.is_some() { "refined" } else { "first order" });
        let field = figure_field(m, eps, refined)?;
        let map = field.map();

        let mut boundary = String::from("x,y,u\n");
        let mut radius: f64 = 0.0;
        for i in 0..=BOUNDARY_SAMPLES {
            let t = TAU * (i % BOUNDARY_SAMPLES) as f64 / BOUNDARY_SAMPLES as f64;
            let p = map.phi(Complex64::from_polar(1.0, t));
            radius = radius.max(p.norm());
            boundary += &csv_row(&[num(p.re), num(p.im), num(field.boundary_value(t))]);
        }

        let step = 2.0 * radius / (grid_n - 1) as f64;
        let rows = Exec::default().map_range(grid_n, |row| {
            let y = -radius + step * row as f64;
            (0..grid_n)
                .filter_map(|col| {
                    let x = -radius + step * col as f64;
                    field.value(Complex64::new(x, y)).map(|u| csv_row(&[num(x), num(y), num(u)]))
                })
                .collect::<String>()
        });
        let mut grid = String::from("x,y,u\n");
        rows.iter().for_each(|r| grid += r);

        artifacts.push(Artifact { name: format!("figure_m{m}_boundary.csv"), content: boundary });
        artifacts.push(Artifact { name: format!("figure_m{m}_field.csv"), content: grid });
    }
    Ok(Outcome { artifacts, failure: None })
}
