//! Convergence studies, error norms and experiment I/O.
//!
//! Studies run on the cube `(−1, 1)^d` with nested grids: a coarse grid with
//! `N` intervals shares its nodes with a reference grid of `N_ref` intervals
//! whenever `N` divides `N_ref`.

pub mod config;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{GridFunction, TemperedOperator};
use crate::solver::{solve_poisson_with, CgConfig};
use crate::stencil::SchemeParams;

pub use io::{read_snapshot, write_coeffs_csv, write_csv, write_snapshot, SnapshotMeta};

/// `u(x) = Π_i (1 − x_i²)_+^p`, supported on `(−1, 1)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub p: f64,
    pub d: usize,
}

impl TestFunctionSpec {
    pub fn new(p: f64, d: usize) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::domain(format!("exponent p = {p} must be positive")));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::domain(format!("dimension {d} not in 1..=3")));
        }
        Ok(Self { p, d })
    }

    /// The 1D profile `(1 − x²)_+^{3 + α/2}`.
    pub fn smooth_1d(alpha: f64) -> Self {
        Self {
            p: 3.0 + 0.5 * alpha,
            d: 1,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|xi| (1.0 - xi * xi).max(0.0).powf(self.p)).product()
    }

    pub fn sample(&self, params: &SchemeParams) -> GridFunction {
        GridFunction::sample(params, |x| self.eval(x))
    }
}

/// `(max |u − v|, h^{d/2} ‖u − v‖₂)` over interior nodes.
pub fn error_norms(u: &GridFunction, v: &GridFunction, h: f64) -> Result<(f64, f64)> {
    if u.dims() != v.dims() {
        return Err(Error::DimensionMismatch {
            expected: u.dims().to_vec(),
            found: v.dims().to_vec(),
        });
    }
    let mut inf: f64 = 0.0;
    let mut sq = 0.0;
    for (a, b) in u.values().iter().zip(v.values()) {
        let e = (a - b).abs();
        inf = inf.max(e);
        sq += e * e;
    }
    Ok((inf, h.powf(0.5 * u.d() as f64) * sq.sqrt()))
}

/// Values of `fine` at the nodes of the grid `stride` times coarser.
pub fn restrict(fine: &GridFunction, stride: usize) -> Result<GridFunction> {
    let fd = fine.dims();
    if stride == 0 || fd.iter().any(|&n| (n + 1) % stride != 0) {
        return Err(Error::NonNested {
            coarse: fd.first().map_or(0, |n| (n + 1) / stride.max(1)),
            reference: fd.first().map_or(0, |n| n + 1),
        });
    }
    let dims: Vec<usize> = fd.iter().map(|&n| (n + 1) / stride - 1).collect();
    let len: usize = dims.iter().product();
    let mut idx = vec![0usize; dims.len()];
    let values = (0..len)
        .map(|mut flat| {
            for (a, slot) in idx.iter_mut().enumerate() {
                *slot = (flat % dims[a] + 1) * stride - 1;
                flat /= dims[a];
            }
            fine.at(&idx)
        })
        .collect();
    GridFunction::new(dims, values)
}

/// One line of an [`ErrorTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub h: f64,
    pub err_inf: f64,
    pub err_l2: f64,
    /// `log2(err(2h) / err(h))` against the previous row of the same series.
    pub order_inf: Option<f64>,
    pub order_l2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Appends a row, filling in orders against the previous row when it
    /// belongs to the same `(α, λ, γ)` series.
    pub fn push(&mut self, alpha: f64, lambda: f64, gamma: f64, h: f64, err_inf: f64, err_l2: f64) {
        let (order_inf, order_l2) = match self.rows.last() {
            Some(prev) if prev.alpha == alpha && prev.lambda == lambda && prev.gamma == gamma => (
                Some(local_order(prev.h, prev.err_inf, h, err_inf)),
                Some(local_order(prev.h, prev.err_l2, h, err_l2)),
            ),
            _ => (None, None),
        };
        self.rows.push(ErrorRow {
            alpha,
            lambda,
            gamma,
            h,
            err_inf,
            err_l2,
            order_inf,
            order_l2,
        });
    }

    /// Rows of one series, in insertion order.
    pub fn series(&self, alpha: f64, lambda: f64) -> Vec<&ErrorRow> {
        self.rows
            .iter()
            .filter(|r| r.alpha == alpha && r.lambda == lambda)
            .collect()
    }

    /// Least-squares slopes `(inf, l2)` of `log err` against `log h` for one series.
    pub fn fitted_orders(&self, alpha: f64, lambda: f64) -> Option<(f64, f64)> {
        let rows = self.series(alpha, lambda);
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let inf: Vec<f64> = rows.iter().map(|r| r.err_inf).collect();
        let l2: Vec<f64> = rows.iter().map(|r| r.err_l2).collect();
        Some((fitted_order(&hs, &inf)?, fitted_order(&hs, &l2)?))
    }
}

fn local_order(h_prev: f64, e_prev: f64, h: f64, e: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

/// Least-squares slope of `log e` against `log h`; `None` with fewer than two points.
pub fn fitted_order(h: &[f64], e: &[f64]) -> Option<f64> {
    if h.len() != e.len() || h.len() < 2 {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Grids and parameters of a convergence study on `(−1, 1)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sweep {
    pub d: usize,
    pub alphas: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
    /// Interval counts of the coarse grids, coarsest first.
    pub ns: Vec<usize>,
    /// Interval count of the reference grid.
    pub n_ref: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            d: 1,
            alphas: vec![0.5, 1.0, 1.5],
            lambda: 0.5,
            gamma: 2.0,
            ns: vec![16, 32, 64, 128],
            n_ref: 1024,
        }
    }
}

impl Sweep {
    fn params(&self, alpha: f64, n: usize) -> Result<SchemeParams> {
        SchemeParams::cube(self.d, alpha, self.lambda, -1.0, 1.0, n)?.with_gamma(self.gamma)
    }

    fn check_nested(&self) -> Result<()> {
        for &n in &self.ns {
            if n == 0 || self.n_ref % n != 0 {
                return Err(Error::NonNested {
                    coarse: n,
                    reference: self.n_ref,
                });
            }
        }
        Ok(())
    }
}

/// Operator truncation errors: `(−Δ+λ)^{α/2}_h u` on each coarse grid
/// against the reference-grid image restricted to the same nodes.
pub fn operator_convergence(spec: &TestFunctionSpec, sweep: &Sweep) -> Result<ErrorTable> {
    sweep.check_nested()?;
    let mut table = ErrorTable::default();
    for &alpha in &sweep.alphas {
        let reference = {
            let p = sweep.params(alpha, sweep.n_ref)?;
            TemperedOperator::new(&p)?.apply(&spec.sample(&p))?
        };
        for &n in &sweep.ns {
            let p = sweep.params(alpha, n)?;
            let image = TemperedOperator::new(&p)?.apply(&spec.sample(&p))?;
            let exact = restrict(&reference, sweep.n_ref / n)?;
            let (inf, l2) = error_norms(&image, &exact, p.h())?;
            table.push(alpha, sweep.lambda, sweep.gamma, p.h(), inf, l2);
        }
    }
    Ok(table)
}

/// Right-hand side of a Poisson study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoissonProblem {
    /// Exact solution given; `f` is the reference-grid operator applied to it.
    Manufactured { p: f64 },
    /// `f ≡ value`; no exact solution, so errors are self-convergence differences.
    Constant {
        value: f64,
        #[serde(default)]
        reference: SelfReference,
    },
}

/// What a coarse solution is compared with when no exact solution exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfReference {
    /// `u_h − u_{h/2}` on the nodes of the coarser grid; `n_ref` is unused.
    #[default]
    Successive,
    /// `u_h` against the `n_ref` solution restricted to the same nodes.
    Finest,
}

/// Poisson errors on each coarse grid of `sweep`.
pub fn poisson_convergence(problem: &PoissonProblem, sweep: &Sweep, cg: &CgConfig) -> Result<ErrorTable> {
    match *problem {
        PoissonProblem::Manufactured { p } => manufactured_convergence(p, sweep, cg),
        PoissonProblem::Constant {
            value,
            reference: SelfReference::Finest,
        } => finest_convergence(value, sweep, cg),
        PoissonProblem::Constant {
            value,
            reference: SelfReference::Successive,
        } => successive_convergence(value, sweep, cg),
    }
}

fn constant_solve(sweep: &Sweep, alpha: f64, n: usize, value: f64, cg: &CgConfig) -> Result<(GridFunction, f64)> {
    let p = sweep.params(alpha, n)?;
    let op = TemperedOperator::new(&p)?;
    let f = GridFunction::sample(&p, |_| value);
    Ok((solve_poisson_with(&op, &f, cg)?.0, p.h()))
}

/// `f` is the reference-grid operator applied to `(1 − |x|²)_+^p`, restricted.
fn manufactured_convergence(power: f64, sweep: &Sweep, cg: &CgConfig) -> Result<ErrorTable> {
    sweep.check_nested()?;
    let spec = TestFunctionSpec::new(power, sweep.d)?;
    let mut table = ErrorTable::default();
    for &alpha in &sweep.alphas {
        let ref_params = sweep.params(alpha, sweep.n_ref)?;
        let rhs = TemperedOperator::new(&ref_params)?.apply(&spec.sample(&ref_params))?;
        for &n in &sweep.ns {
            let p = sweep.params(alpha, n)?;
            let op = TemperedOperator::new(&p)?;
            let f = restrict(&rhs, sweep.n_ref / n)?;
            let u_h = solve_poisson_with(&op, &f, cg)?.0;
            let (inf, l2) = error_norms(&u_h, &spec.sample(&p), p.h())?;
            table.push(alpha, sweep.lambda, sweep.gamma, p.h(), inf, l2);
        }
    }
    Ok(table)
}

fn finest_convergence(value: f64, sweep: &Sweep, cg: &CgConfig) -> Result<ErrorTable> {
    sweep.check_nested()?;
    let mut table = ErrorTable::default();
    for &alpha in &sweep.alphas {
        let (reference, _) = constant_solve(sweep, alpha, sweep.n_ref, value, cg)?;
        for &n in &sweep.ns {
            let (u_h, h) = constant_solve(sweep, alpha, n, value, cg)?;
            let (inf, l2) = error_norms(&u_h, &restrict(&reference, sweep.n_ref / n)?, h)?;
            table.push(alpha, sweep.lambda, sweep.gamma, h, inf, l2);
        }
    }
    Ok(table)
}

fn successive_convergence(value: f64, sweep: &Sweep, cg: &CgConfig) -> Result<ErrorTable> {
    let mut table = ErrorTable::default();
    for &alpha in &sweep.alphas {
        let mut solved: Vec<(usize, GridFunction)> = Vec::new();
        let mut get = |n: usize| -> Result<GridFunction> {
            if let Some((_, u)) = solved.iter().find(|(m, _)| *m == n) {
                return Ok(u.clone());
            }
            let (u, _) = constant_solve(sweep, alpha, n, value, cg)?;
            solved.push((n, u.clone()));
            Ok(u)
        };
        for &n in &sweep.ns {
            let coarse = get(n)?;
            let fine = restrict(&get(2 * n)?, 2)?;
            let h = sweep.params(alpha, n)?.h();
            let (inf, l2) = error_norms(&coarse, &fine, h)?;
            table.push(alpha, sweep.lambda, sweep.gamma, h, inf, l2);
        }
    }
    Ok(table)
}
