//! Conjugate gradients, Poisson solves and Crank–Nicolson time stepping.
//!
//! The time stepper advances `∂_t w = −κ A w + R(w)` for one or two fields.
//! The linear part is treated by the trapezoidal rule and the reaction by
//! second-order extrapolation, so each step costs one SPD solve per field:
//!
//! ```text
//! (I + τκ/2 A) w^{n+1} = (I − τκ/2 A) w^n + τ (3/2 R(w^n) − 1/2 R(w^{n−1}))
//! ```
//!
//! The first step uses `R(w^0)`. Fields are stored shifted so that their
//! exterior values vanish: Allen–Cahn evolves `ū = u + 1`, Gray–Scott
//! evolves `ū = u − 1` and `v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{GridFunction, TemperedOperator, Workspace};
use crate::par::{self, Exec};
use crate::stencil::SchemeParams;

/// Stopping rule for [`cg_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CgConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` at exit.
    pub residual: f64,
}

/// A symmetric positive definite action `x ↦ A x`.
pub trait LinearOperator {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

/// `x ↦ m x + c A x`.
#[derive(Debug)]
pub struct ShiftedOperator<'a> {
    op: &'a TemperedOperator,
    pub mass: f64,
    pub coeff: f64,
    ws: Workspace,
}

impl<'a> ShiftedOperator<'a> {
    pub fn new(op: &'a TemperedOperator, mass: f64, coeff: f64) -> Self {
        Self {
            op,
            mass,
            coeff,
            ws: op.workspace(),
        }
    }
}

impl LinearOperator for ShiftedOperator<'_> {
    fn len(&self) -> usize {
        self.op.len()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.op.apply_into(x, y, &mut self.ws)?;
        let (m, c) = (self.mass, self.coeff);
        par::update(Exec::default(), y, |i, v| m * x[i] + c * v);
        Ok(())
    }
}

/// Solves `A x = b` starting from the contents of `x`.
pub fn cg_solve<A: LinearOperator>(a: &mut A, b: &[f64], x: &mut [f64], cfg: &CgConfig) -> Result<CgStats> {
    cg_solve_monitored(a, b, x, cfg, |_, _, _| {})
}

/// [`cg_solve`] reporting `(iteration, iterate, relative residual)` after
/// every update.
pub fn cg_solve_monitored<A, M>(a: &mut A, b: &[f64], x: &mut [f64], cfg: &CgConfig, mut monitor: M) -> Result<CgStats>
where
    A: LinearOperator,
    M: FnMut(usize, &[f64], f64),
{
    let n = a.len();
    if b.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: vec![n],
            found: vec![b.len(), x.len()],
        });
    }
    if !(cfg.rel_tol > 0.0) {
        return Err(Error::domain(format!("rel_tol = {} must be positive", cfg.rel_tol)));
    }
    let exec = Exec::default();
    let b_norm = par::dot(exec, b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    a.apply(x, &mut r)?;
    par::update(exec, &mut r, |i, v| b[i] - v);
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = par::dot(exec, &r, &r);
    let mut residual = rr.sqrt() / b_norm;
    if residual <= cfg.rel_tol {
        return Ok(CgStats {
            iterations: 0,
            residual,
        });
    }
    for it in 1..=cfg.max_iter {
        a.apply(&p, &mut q)?;
        let pq = par::dot(exec, &p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotConverged {
                iterations: it,
                residual,
            });
        }
        let step = rr / pq;
        par::update(exec, x, |i, v| v + step * p[i]);
        par::update(exec, &mut r, |i, v| v - step * q[i]);
        let rr_new = par::dot(exec, &r, &r);
        residual = rr_new.sqrt() / b_norm;
        monitor(it, x, residual);
        if residual <= cfg.rel_tol {
            return Ok(CgStats {
                iterations: it,
                residual,
            });
        }
        let beta = rr_new / rr;
        rr = rr_new;
        par::update(exec, &mut p, |i, v| r[i] + beta * v);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual,
    })
}

/// Solves `A u = f` with homogeneous exterior data.
pub fn solve_poisson(params: &SchemeParams, f: &GridFunction, cfg: &CgConfig) -> Result<(GridFunction, CgStats)> {
    let op = TemperedOperator::new(params)?;
    solve_poisson_with(&op, f, cfg)
}

pub fn solve_poisson_with(op: &TemperedOperator, f: &GridFunction, cfg: &CgConfig) -> Result<(GridFunction, CgStats)> {
    if f.dims() != op.dims() {
        return Err(Error::DimensionMismatch {
            expected: op.dims().to_vec(),
            found: f.dims().to_vec(),
        });
    }
    let mut u = GridFunction::zeros(op.dims());
    let mut action = ShiftedOperator::new(op, 0.0, 1.0);
    let stats = cg_solve(&mut action, f.values(), u.values_mut(), cfg)?;
    Ok((u, stats))
}

// ---------------------------------------------------------------------------
// Reactions

/// Reaction terms, written for the shifted variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReactionSpec {
    /// `R(ū) = −(ū − 1)((ū − 1)² − 1) / ε^α`.
    AllenCahn { epsilon: f64 },
    /// `R_u = −(ū + 1) v² − a ū`, `R_v = (ū + 1) v² − (a + b) v`.
    GrayScott { kappa1: f64, kappa2: f64, a: f64, b: f64 },
    /// Pure diffusion of a single field.
    Diffusion { kappa: f64 },
}

impl ReactionSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} = {v} must be positive")))
            }
        };
        match *self {
            ReactionSpec::AllenCahn { epsilon } => positive("epsilon", epsilon),
            ReactionSpec::GrayScott { kappa1, kappa2, a, b } => {
                positive("kappa1", kappa1)?;
                positive("kappa2", kappa2)?;
                positive("a", a)?;
                positive("b", b)
            }
            ReactionSpec::Diffusion { kappa } => positive("kappa", kappa),
        }
    }

    pub fn field_count(&self) -> usize {
        match self {
            ReactionSpec::GrayScott { .. } => 2,
            _ => 1,
        }
    }

    /// Diffusion coefficient of each field.
    pub fn diffusivities(&self) -> Vec<f64> {
        match *self {
            ReactionSpec::AllenCahn { .. } => vec![1.0],
            ReactionSpec::GrayScott { kappa1, kappa2, .. } => vec![kappa1, kappa2],
            ReactionSpec::Diffusion { kappa } => vec![kappa],
        }
    }

    /// `out[k] = R_k(fields)`, pointwise.
    pub fn evaluate(&self, alpha: f64, fields: &[Vec<f64>], out: &mut [Vec<f64>]) {
        let exec = Exec::default();
        match *self {
            ReactionSpec::AllenCahn { epsilon } => {
                let inv = epsilon.powf(-alpha);
                let u = &fields[0];
                par::update(exec, &mut out[0], |i, _| {
                    let w = u[i] - 1.0;
                    -w * (w * w - 1.0) * inv
                });
            }
            ReactionSpec::GrayScott { a, b, .. } => {
                let (u, v) = (&fields[0], &fields[1]);
                let (ou, ov) = out.split_at_mut(1);
                par::update(exec, &mut ou[0], |i, _| -(u[i] + 1.0) * v[i] * v[i] - a * u[i]);
                par::update(exec, &mut ov[0], |i, _| (u[i] + 1.0) * v[i] * v[i] - (a + b) * v[i]);
            }
            ReactionSpec::Diffusion { .. } => {
                for o in out.iter_mut() {
                    o.fill(0.0);
                }
            }
        }
    }
}

/// How the reaction enters a Crank–Nicolson step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearTreatment {
    /// `3/2 R(w^n) − 1/2 R(w^{n−1})`, one linear solve per field.
    #[default]
    Extrapolated,
    /// Trapezoidal `(R(w^n) + R(w^{n+1}))/2`, resolved by fixed-point iteration.
    FixedPoint { max_iter: usize, tol: f64 },
}

/// Shifted fields with the reaction history needed for extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeStepperState {
    pub t: f64,
    pub step: usize,
    pub fields: Vec<GridFunction>,
    previous_reaction: Option<Vec<Vec<f64>>>,
}

impl TimeStepperState {
    pub fn new(fields: Vec<GridFunction>) -> Self {
        Self {
            t: 0.0,
            step: 0,
            fields,
            previous_reaction: None,
        }
    }
}

/// Options shared by every step of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOptions {
    pub cg: CgConfig,
    pub treatment: NonlinearTreatment,
}

/// Advances `state` by one step of length `dt`.
pub fn cn_step(
    op: &TemperedOperator,
    state: &TimeStepperState,
    dt: f64,
    reaction: &ReactionSpec,
    opts: &StepOptions,
) -> Result<TimeStepperState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step {dt} must be positive")));
    }
    reaction.validate()?;
    let count = reaction.field_count();
    if state.fields.len() != count {
        return Err(Error::DimensionMismatch {
            expected: vec![count],
            found: vec![state.fields.len()],
        });
    }
    for f in &state.fields {
        if f.dims() != op.dims() {
            return Err(Error::DimensionMismatch {
                expected: op.dims().to_vec(),
                found: f.dims().to_vec(),
            });
        }
    }
    let exec = Exec::default();
    let alpha = op.params().alpha;
    let m = op.len();
    let current: Vec<Vec<f64>> = state.fields.iter().map(|f| f.values().to_vec()).collect();
    let mut r_now = vec![vec![0.0; m]; count];
    reaction.evaluate(alpha, &current, &mut r_now);

    // Explicit half of the linear operator, shared by every iterate.
    let kappas = reaction.diffusivities();
    let mut ws = op.workspace();
    let mut base = vec![vec![0.0; m]; count];
    for k in 0..count {
        op.apply_into(&current[k], &mut base[k], &mut ws)?;
        let half = 0.5 * dt * kappas[k];
        let w = &current[k];
        par::update(exec, &mut base[k], |i, aw| w[i] - half * aw);
    }

    let mut next = current.clone();
    let solve = |forcing: &[Vec<f64>], next: &mut Vec<Vec<f64>>| -> Result<()> {
        for k in 0..count {
            let mut rhs = base[k].clone();
            let f = &forcing[k];
            par::update(exec, &mut rhs, |i, v| v + dt * f[i]);
            let mut action = ShiftedOperator::new(op, 1.0, 0.5 * dt * kappas[k]);
            cg_solve(&mut action, &rhs, &mut next[k], &opts.cg)?;
        }
        Ok(())
    };

    match opts.treatment {
        NonlinearTreatment::Extrapolated => {
            let forcing = match &state.previous_reaction {
                None => r_now.clone(),
                Some(prev) => r_now
                    .iter()
                    .zip(prev)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 1.5 * x - 0.5 * y).collect())
                    .collect(),
            };
            solve(&forcing, &mut next)?;
        }
        NonlinearTreatment::FixedPoint { max_iter, tol } => {
            let mut r_next = r_now.clone();
            let mut converged = false;
            for _ in 0..max_iter.max(1) {
                let forcing: Vec<Vec<f64>> = r_now
                    .iter()
                    .zip(&r_next)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
                    .collect();
                let before = next.clone();
                solve(&forcing, &mut next)?;
                let change = next
                    .iter()
                    .zip(&before)
                    .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                    .fold(0.0, f64::max);
                reaction.evaluate(alpha, &next, &mut r_next);
                if change <= tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence(format!(
                    "fixed-point reaction iteration at step {}",
                    state.step + 1
                )));
            }
        }
    }

    let dims = op.dims().to_vec();
    Ok(TimeStepperState {
        t: state.t + dt,
        step: state.step + 1,
        fields: next
            .into_iter()
            .map(|v| GridFunction::new(dims.clone(), v))
            .collect::<Result<_>>()?,
        previous_reaction: Some(r_now),
    })
}

// ---------------------------------------------------------------------------
// Runs

/// A field snapshot in the unshifted variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub names: Vec<String>,
    pub fields: Vec<GridFunction>,
}

/// Kissing-bubbles Allen–Cahn run on `(0, 1)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllenCahnConfig {
    pub params: SchemeParams,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
}

impl AllenCahnConfig {
    /// `h = 1/256`, `τ = 5·10⁻⁴`.
    pub fn desk(alpha: f64, lambda: f64) -> Result<Self> {
        Self::preset(alpha, lambda, 256)
    }

    /// `h = 1/1024`, `τ = 5·10⁻⁴`. Long running.
    pub fn full(alpha: f64, lambda: f64) -> Result<Self> {
        Self::preset(alpha, lambda, 1024)
    }

    fn preset(alpha: f64, lambda: f64, n: usize) -> Result<Self> {
        Ok(Self {
            params: SchemeParams::cube(2, alpha, lambda, 0.0, 1.0, n)?,
            epsilon: 0.03,
            dt: 5e-4,
            t_end: 5.0,
            snapshot_times: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            centers: vec![[0.4, 0.4], [0.6, 0.6]],
            radius: 0.12,
        })
    }

    /// `u(x, 0) = 1 − Σ_j tanh((|x − x_j| − r)/ε)` (two bubbles give values in `[−1, 1]`).
    pub fn initial(&self) -> GridFunction {
        let (eps, r) = (self.epsilon, self.radius);
        GridFunction::sample(&self.params, |x| {
            let mut u = self.centers.len() as f64 - 1.0;
            for c in &self.centers {
                let dist = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
                u -= ((dist - r) / eps).tanh();
            }
            u
        })
    }
}

/// Pattern formation run on `(0, 2.5)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayScottConfig {
    pub params: SchemeParams,
    pub kappa1: f64,
    pub kappa2: f64,
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Box where `(u, v) = (0.5, 0.25)` initially; `None` leaves the trivial state.
    pub perturbation: Option<Vec<[f64; 2]>>,
}

impl GrayScottConfig {
    /// `N = 256` (2D) or `N = 64` (3D), `τ = 0.5`.
    pub fn desk(d: usize, alpha: f64, lambda: f64) -> Result<Self> {
        Self::preset(d, alpha, lambda, if d == 3 { 64 } else { 256 })
    }

    /// `N = 1024`, `τ = 0.5`. Long running.
    pub fn full(d: usize, alpha: f64, lambda: f64) -> Result<Self> {
        Self::preset(d, alpha, lambda, 1024)
    }

    fn preset(d: usize, alpha: f64, lambda: f64, n: usize) -> Result<Self> {
        let side = if d == 3 { [1.152, 1.348] } else { [1.201, 1.299] };
        Ok(Self {
            params: SchemeParams::cube(d, alpha, lambda, 0.0, 2.5, n)?,
            kappa1: 2e-5,
            kappa2: 1e-5,
            a: 0.04,
            b: 0.065,
            dt: 0.5,
            t_end: 1000.0,
            snapshot_times: vec![0.0, 250.0, 500.0, 1000.0],
            perturbation: Some(vec![side; d]),
        })
    }

    pub fn reaction(&self) -> ReactionSpec {
        ReactionSpec::GrayScott {
            kappa1: self.kappa1,
            kappa2: self.kappa2,
            a: self.a,
            b: self.b,
        }
    }

    /// Unshifted `(u, v)`.
    pub fn initial(&self) -> (GridFunction, GridFunction) {
        let inside = |x: &[f64]| match &self.perturbation {
            Some(b) => x.iter().zip(b).all(|(xi, [lo, hi])| *xi >= *lo && *xi <= *hi),
            None => false,
        };
        let u = GridFunction::sample(&self.params, |x| if inside(x) { 0.5 } else { 1.0 });
        let v = GridFunction::sample(&self.params, |x| if inside(x) { 0.25 } else { 0.0 });
        (u, v)
    }
}

fn shifted(f: &GridFunction, by: f64) -> GridFunction {
    let values = f.values().iter().map(|v| v + by).collect();
    GridFunction::new(f.dims().to_vec(), values).expect("same shape")
}

/// Steps at which snapshots are due (nearest step to each requested time).
fn snapshot_steps(times: &[f64], dt: f64, steps: usize) -> Vec<usize> {
    times
        .iter()
        .filter(|t| t.is_finite() && **t >= 0.0)
        .map(|t| ((t / dt).round() as usize).min(steps))
        .collect()
}

/// Drives `cn_step` from `t = 0` to `t_end`, recording snapshots. The
/// observer sees every state and may stop the run by returning `false`.
#[allow(clippy::too_many_arguments)]
fn drive<O>(
    op: &TemperedOperator,
    initial: TimeStepperState,
    reaction: &ReactionSpec,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
    opts: &StepOptions,
    unshift: &dyn Fn(&TimeStepperState) -> Snapshot,
    mut observer: O,
) -> Result<Vec<Snapshot>>
where
    O: FnMut(&TimeStepperState) -> bool,
{
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::domain(format!("need dt > 0 and t_end >= 0 (dt = {dt}, t_end = {t_end})")));
    }
    let steps = (t_end / dt).round() as usize;
    let due = snapshot_steps(snapshot_times, dt, steps);
    let mut state = initial;
    let mut out = Vec::new();
    loop {
        if due.contains(&state.step) {
            out.push(unshift(&state));
        }
        if !observer(&state) || state.step >= steps {
            break;
        }
        state = cn_step(op, &state, dt, reaction, opts)?;
    }
    Ok(out)
}

pub fn run_allen_cahn(cfg: &AllenCahnConfig, opts: &StepOptions) -> Result<Vec<Snapshot>> {
    run_allen_cahn_observed(cfg, opts, |_| true)
}

/// Like [`run_allen_cahn`], with an observer of the shifted state that can stop the run.
pub fn run_allen_cahn_observed<O>(cfg: &AllenCahnConfig, opts: &StepOptions, observer: O) -> Result<Vec<Snapshot>>
where
    O: FnMut(&TimeStepperState) -> bool,
{
    if cfg.params.d != 2 {
        return Err(Error::DimensionMismatch {
            expected: vec![2],
            found: vec![cfg.params.d],
        });
    }
    let reaction = ReactionSpec::AllenCahn { epsilon: cfg.epsilon };
    reaction.validate()?;
    let op = TemperedOperator::new(&cfg.params)?;
    let state = TimeStepperState::new(vec![shifted(&cfg.initial(), 1.0)]);
    let unshift = |s: &TimeStepperState| Snapshot {
        t: s.t,
        names: vec!["u".into()],
        fields: vec![shifted(&s.fields[0], -1.0)],
    };
    drive(&op, state, &reaction, cfg.dt, cfg.t_end, &cfg.snapshot_times, opts, &unshift, observer)
}

pub fn run_gray_scott(cfg: &GrayScottConfig, opts: &StepOptions) -> Result<Vec<Snapshot>> {
    run_gray_scott_observed(cfg, opts, |_| true)
}

pub fn run_gray_scott_observed<O>(cfg: &GrayScottConfig, opts: &StepOptions, observer: O) -> Result<Vec<Snapshot>>
where
    O: FnMut(&TimeStepperState) -> bool,
{
    let reaction = cfg.reaction();
    reaction.validate()?;
    let op = TemperedOperator::new(&cfg.params)?;
    let (u, v) = cfg.initial();
    let state = TimeStepperState::new(vec![shifted(&u, -1.0), v]);
    let unshift = |s: &TimeStepperState| Snapshot {
        t: s.t,
        names: vec!["u".into(), "v".into()],
        fields: vec![shifted(&s.fields[0], 1.0), s.fields[1].clone()],
    };
    drive(&op, state, &reaction, cfg.dt, cfg.t_end, &cfg.snapshot_times, opts, &unshift, observer)
}
