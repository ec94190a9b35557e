//! Default discretization and tolerance settings, in one place.
//!
//! | setting                       | default        |
//! |-------------------------------|----------------|
//! | Fourier–Bessel modes `K`      | 12             |
//! | collocation angles per sector | `8 (K + 1)`    |
//! | mode escalation               | +4 up to 48    |
//! | Dirichlet residual tolerance  | 1e-9           |
//! | overdetermination tolerance   | 1e-9           |
//! | finite-difference step        | 1e-6           |
//! | step halvings                 | 8              |
//! | Gauss–Newton iterations       | 30             |
//! | ill-conditioning warning      | 1e12           |
//! | control offset in μ           | 0.3            |

use crate::exec::Exec;

pub const DEFAULT_MODES: usize = 12;
/// Ceiling for adaptive mode escalation.
pub const MAX_MODES: usize = 48;
pub const MODE_STEP: usize = 4;
/// Dirichlet tolerance used inside continuation, where the normal derivative
/// must be accurate well below the defect tolerance.
pub const REFINED_DIRICHLET_TOL: f64 = 1e-12;
pub const OVERSAMPLING: usize = 8;
pub const DIRICHLET_TOL: f64 = 1e-9;
pub const DEFECT_TOL: f64 = 1e-9;
pub const FD_STEP: f64 = 1e-6;
pub const MAX_HALVINGS: usize = 8;
pub const MAX_NEWTON_ITERATIONS: usize = 30;
pub const ILL_CONDITIONED: f64 = 1e12;
pub const CONTROL_OFFSET: f64 = 0.3;
/// Trace truncation (modes of the symmetry class) for boundary cosine series.
pub const TRACE_MODES: usize = 32;

/// Collocation angles per fundamental sector for `modes` Fourier–Bessel modes.
pub fn collocation_points(modes: usize) -> usize {
    OVERSAMPLING * (modes + 1)
}

/// Discretization used for every Dirichlet solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Starting Fourier–Bessel mode index `K`; the basis uses orders `0, m, ..., K m`.
    pub modes: usize,
    /// Adaptive solves raise `K` in steps of [`MODE_STEP`] up to this value.
    pub max_modes: usize,
    /// Collocation angles per mode: `M = oversampling (K + 1)` on `[0, π/m]`.
    pub oversampling: usize,
    /// Sup-norm tolerance for `u − 1` on the validation grid.
    pub dirichlet_tol: f64,
    pub exec: Exec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::with_modes(DEFAULT_MODES)
    }
}

impl SolverConfig {
    pub fn points(&self, modes: usize) -> usize {
        self.oversampling * (modes + 1)
    }

    pub fn with_modes(modes: usize) -> Self {
        Self {
            modes,
            max_modes: MAX_MODES.max(modes),
            oversampling: OVERSAMPLING,
            dirichlet_tol: DIRICHLET_TOL,
            exec: Exec::default(),
        }
    }
}

/// Gauss–Newton continuation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationConfig {
    pub solver: SolverConfig,
    pub defect_tol: f64,
    pub fd_step: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig { dirichlet_tol: REFINED_DIRICHLET_TOL, ..SolverConfig::default() },
            defect_tol: DEFECT_TOL,
            fd_step: FD_STEP,
            max_iterations: MAX_NEWTON_ITERATIONS,
            max_halvings: MAX_HALVINGS,
        }
    }
}
