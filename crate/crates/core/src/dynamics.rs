//! Numeric integration of the closed-form Euler-Lagrange families.
//!
//! Each family equation reads `c Σ_j ẋ_j ∂_j P_k + s ∂L/∂x_f = 0`, i.e. the
//! implicit linear system `M(x) ẋ = r(x)` with `M_kj = c ∂_j P_k` and
//! `r_k = −s ∂L/∂x_f`. Every RK4 stage solves it by LU with partial pivoting.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::chart::Chart;
use crate::exterior::DifferentialForm;
use crate::mechanics::{energy, formal_semispray, ELSystem, EnergyExpr, MechanicsError};
use crate::structures::StructureEndo;
use crate::symexpr::{EvalError, Expr, Lambda};

pub const DEFAULT_COND_BOUND: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("singular or ill-conditioned system at t = {t} (condition estimate {condition:e}), x = {x:?}")]
    Singular { t: f64, x: Vec<f64>, condition: f64 },
    #[error("invalid integrator settings: {0}")]
    Settings(String),
    #[error("initial state needs {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Mechanics(#[from] MechanicsError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeAssembly {
    pub m: DMatrix<f64>,
    pub r: DVector<f64>,
}

impl OdeAssembly {
    /// `κ₁(M) = ‖M‖₁ ‖M⁻¹‖₁`, infinite when `M` is singular.
    pub fn condition(&self) -> f64 {
        match self.m.clone().lu().try_inverse() {
            Some(inv) => norm1(&self.m) * norm1(&inv),
            None => f64::INFINITY,
        }
    }

    /// Solves `M v = r`, failing when the condition estimate exceeds `bound`.
    pub fn solve(&self, bound: f64) -> Option<DVector<f64>> {
        let condition = self.condition();
        if !condition.is_finite() || condition > bound {
            return None;
        }
        let v = self.m.clone().lu().solve(&self.r)?;
        v.iter().all(|c| c.is_finite()).then_some(v)
    }
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The symbolic rows of `M` and `r`, differentiated once up front.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    chart: Chart,
    lambda: Lambda,
    rows: Vec<Vec<Expr>>,
    rhs: Vec<Expr>,
}

impl OdeSystem {
    pub fn new(sys: &ELSystem) -> Self {
        let dim = sys.chart.dim();
        let rows = sys
            .equations
            .iter()
            .map(|eq| {
                eq.momentum
                    .gradient(dim, &sys.lambda)
                    .into_iter()
                    .map(|g| g.scale(&eq.coefficient))
                    .collect()
            })
            .collect();
        let rhs = sys.equations.iter().map(|eq| -eq.forcing.clone()).collect();
        OdeSystem {
            chart: sys.chart,
            lambda: sys.lambda.clone(),
            rows,
            rhs,
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn assemble(&self, x: &[f64]) -> Result<OdeAssembly, DynamicsError> {
        let dim = self.chart.dim();
        if x.len() != dim {
            return Err(DynamicsError::Shape {
                expected: dim,
                got: x.len(),
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (k, row) in self.rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    m[(k, j)] = e.eval(x, &self.lambda)?;
                }
            }
        }
        let r = self
            .rhs
            .iter()
            .map(|e| e.eval(x, &self.lambda))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OdeAssembly {
            m,
            r: DVector::from_vec(r),
        })
    }

    /// `ẋ` at `x`, or the singularity diagnostics.
    pub fn velocity(&self, t: f64, x: &[f64], bound: f64) -> Result<Vec<f64>, DynamicsError> {
        let asm = self.assemble(x)?;
        asm.solve(bound)
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| DynamicsError::Singular {
                t,
                x: x.to_vec(),
                condition: asm.condition(),
            })
    }
}

pub fn assemble(sys: &ELSystem, x: &[f64]) -> Result<OdeAssembly, DynamicsError> {
    OdeSystem::new(sys).assemble(x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub t_end: f64,
    pub h: f64,
    pub output_every: usize,
    pub cond_bound: f64,
}

impl IntegratorConfig {
    pub fn new(t_end: f64, h: f64) -> Self {
        IntegratorConfig {
            t_end,
            h,
            output_every: 1,
            cond_bound: DEFAULT_COND_BOUND,
        }
    }

    /// Number of uniform steps; the step actually taken is `t_end / steps`.
    pub fn steps(&self) -> Result<usize, DynamicsError> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(DynamicsError::Settings(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(DynamicsError::Settings(format!(
                "h must be finite and > 0, got {}",
                self.h
            )));
        }
        if self.output_every == 0 {
            return Err(DynamicsError::Settings("output_every must be >= 1".into()));
        }
        Ok((self.t_end / self.h - 1e-9).ceil().max(0.0) as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: Vec<f64>,
    pub xdot: Option<Vec<f64>>,
    pub energy: Option<f64>,
}

impl TrajectoryState {
    /// `[x, ẋ]`, the point at which velocity-dependent expressions are read.
    pub fn phase_point(&self) -> Option<Vec<f64>> {
        let v = self.xdot.as_ref()?;
        Some(self.x.iter().chain(v).copied().collect())
    }
}

/// Classical RK4 over `[0, t_end]`. Emits step 0, every `output_every`-th
/// step and the final step, each with its solved velocity.
pub fn integrate(
    sys: &ELSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectoryState>, DynamicsError> {
    let ode = OdeSystem::new(sys);
    integrate_system(&ode, x0, cfg)
}

pub fn integrate_system(
    ode: &OdeSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectoryState>, DynamicsError> {
    let dim = ode.chart.dim();
    if x0.len() != dim {
        return Err(DynamicsError::Shape {
            expected: dim,
            got: x0.len(),
        });
    }
    let steps = cfg.steps()?;
    let h = if steps == 0 {
        0.0
    } else {
        cfg.t_end / steps as f64
    };
    let bound = cfg.cond_bound;

    let mut x = x0.to_vec();
    let mut v = ode.velocity(0.0, &x, bound)?;
    let mut out = vec![TrajectoryState {
        t: 0.0,
        x: x.clone(),
        xdot: Some(v.clone()),
        energy: None,
    }];
    let shifted = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for step in 1..=steps {
        let t = (step - 1) as f64 * h;
        let k1 = v;
        let k2 = ode.velocity(t + h / 2.0, &shifted(&x, &k1, h / 2.0), bound)?;
        let k3 = ode.velocity(t + h / 2.0, &shifted(&x, &k2, h / 2.0), bound)?;
        let k4 = ode.velocity(t + h, &shifted(&x, &k3, h), bound)?;
        for i in 0..dim {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if step == steps {
            cfg.t_end
        } else {
            step as f64 * h
        };
        v = ode.velocity(t_next, &x, bound)?;
        if step % cfg.output_every == 0 || step == steps {
            out.push(TrajectoryState {
                t: t_next,
                x: x.clone(),
                xdot: Some(v.clone()),
                energy: None,
            });
        }
    }
    Ok(out)
}

/// Fills in `E` on every state from the solved velocities.
pub fn attach_energy(
    traj: &mut [TrajectoryState],
    e: &EnergyExpr,
    lambda: &Lambda,
) -> Result<(), DynamicsError> {
    for state in traj.iter_mut() {
        state.energy = match state.phase_point() {
            Some(point) => Some(e.eval(&point, lambda)?),
            None => None,
        };
    }
    Ok(())
}

/// `max |E(t) − E(0)|` along the trajectory, with `X^k = ẋ_k`.
pub fn monitor_energy(
    traj: &mut [TrajectoryState],
    l: &crate::mechanics::Lagrangian,
    w: &StructureEndo,
) -> Result<f64, DynamicsError> {
    let e = energy(l, &formal_semispray(l.chart()), w)?;
    attach_energy(traj, &e, w.lambda())?;
    let values: Vec<f64> = traj.iter().filter_map(|s| s.energy).collect();
    let Some(&first) = values.first() else {
        return Ok(0.0);
    };
    Ok(values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max))
}

/// Largest residual coefficient magnitude at `[x, ẋ]` over the trajectory.
pub fn max_residual(
    traj: &[TrajectoryState],
    residual: &DifferentialForm,
    lambda: &Lambda,
) -> Result<f64, DynamicsError> {
    let mut worst: f64 = 0.0;
    for state in traj {
        let Some(point) = state.phase_point() else {
            continue;
        };
        for (_, c) in residual.terms() {
            worst = worst.max(c.eval(&point, lambda)?.abs());
        }
    }
    Ok(worst)
}

/// `t,x0,…,x{4n−1},E`, 17 significant digits.
pub fn write_csv(mut out: impl Write, chart: Chart, traj: &[TrajectoryState]) -> io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((0..chart.dim()).map(|k| format!("x{k}")));
    header.push("E".into());
    writeln!(out, "{}", header.join(","))?;
    for s in traj {
        let mut row = vec![format!("{:.16e}", s.t)];
        row.extend(s.x.iter().map(|v| format!("{v:.16e}")));
        row.push(s.energy.map(|e| format!("{e:.16e}")).unwrap_or_default());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
