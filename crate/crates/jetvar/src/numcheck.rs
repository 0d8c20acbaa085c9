//! Numerical verification on a periodic box.
//!
//! The base manifold is the p-torus `[0, 2pi)^p` with a uniform lattice;
//! plain summation is the trapezoid rule there and is spectrally accurate
//! for smooth periodic integrands, so boundary terms vanish and the Green
//! formula can be checked without boundary-condition machinery.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::jetops::prolong_base_variation;
use crate::multiindex::MultiIndex;
use crate::symexpr::{subst_jets, EvalError, Expr, NumericPoint, SectionSym};
use crate::varcalc::{euler_lagrange, first_variation, VarcalcError};
use crate::vforms::{VForm, VFormError};

pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Below this magnitude both sides count as zero and the absolute error
/// decides. Central differences of an O(1) Action carry ~1e-11 of
/// cancellation noise, so the cutoff must sit above that.
pub const ZERO_MAGNITUDE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NumcheckError {
    #[error("grid needs at least 4 points per axis, got {0}")]
    GridTooCoarse(usize),
    #[error("numeric checks need closed-form sections; component {0} is opaque")]
    OpaqueSection(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Form(#[from] VFormError),
    #[error(transparent)]
    Varcalc(#[from] VarcalcError),
}

/// Uniform periodic lattice on `[0, 2pi)^p`.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub dim: usize,
    pub points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Grid, NumcheckError> {
        if points_per_axis < 4 {
            return Err(NumcheckError::GridTooCoarse(points_per_axis));
        }
        Ok(Grid {
            dim,
            points_per_axis,
        })
    }

    pub fn cell_volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.points_per_axis as f64).powi(self.dim as i32)
    }

    /// All lattice points, row-major.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.points_per_axis;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let total = n.pow(self.dim as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut coords = Vec::with_capacity(self.dim);
            let mut rest = flat;
            for _ in 0..self.dim {
                coords.push((rest % n) as f64 * h);
                rest /= n;
            }
            out.push(coords);
        }
        out
    }
}

/// Result of one lhs-vs-rhs comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
    pub runtime_ms: f64,
}

impl CheckReport {
    pub fn compare(name: &str, lhs: f64, rhs: f64, tol: f64, started: Instant) -> CheckReport {
        let abs_err = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        let pass = if scale < ZERO_MAGNITUDE {
            abs_err <= tol
        } else {
            rel_err <= tol
        };
        CheckReport {
            name: name.to_string(),
            lhs,
            rhs,
            abs_err,
            rel_err,
            tol,
            pass,
            runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn require_closed(section: &SectionSym) -> Result<(), NumcheckError> {
    for a in 0..section.space.num_fields() {
        if section.component(a).contains_opaque() {
            return Err(NumcheckError::OpaqueSection(a));
        }
    }
    Ok(())
}

fn lagrangian_density(lagrangian: &VForm) -> Expr {
    lagrangian
        .terms()
        .values()
        .next()
        .cloned()
        .unwrap_or_else(Expr::zero)
}

/// Quadrature of a `(p,0)`-form on the base: the volume coefficient summed
/// over the lattice times the cell volume. Coefficients must be free of
/// jet variables and opaque atoms.
pub fn integrate_base_form(form: &VForm, grid: &Grid) -> Result<f64, NumcheckError> {
    let density = lagrangian_density(form);
    let mut acc = 0.0;
    for coords in grid.points() {
        acc += density.eval_numeric(&NumericPoint::new(coords))?;
    }
    Ok(acc * grid.cell_volume())
}

/// The Action: quadrature of the Lagrangian density along the prolonged
/// section.
pub fn action(lagrangian: &VForm, upsilon: &SectionSym, grid: &Grid) -> Result<f64, NumcheckError> {
    require_closed(upsilon)?;
    let pulled = subst_jets(&lagrangian_density(lagrangian), upsilon);
    let mut acc = 0.0;
    for coords in grid.points() {
        acc += pulled.eval_numeric(&NumericPoint::new(coords))?;
    }
    Ok(acc * grid.cell_volume())
}

/// Jet values of `upsilon + t*y` at a lattice point, assembled from the
/// exact symbolic derivatives of the unperturbed pieces.
struct JetTable {
    derivs_u: BTreeMap<(usize, MultiIndex), Expr>,
    derivs_y: BTreeMap<(usize, MultiIndex), Expr>,
}

impl JetTable {
    fn build(upsilon: &SectionSym, y: &SectionSym, order: usize) -> JetTable {
        JetTable {
            derivs_u: prolong_base_variation(upsilon, order),
            derivs_y: prolong_base_variation(y, order),
        }
    }

    fn point(&self, coords: &[f64], t: f64) -> Result<NumericPoint, NumcheckError> {
        let base = NumericPoint::new(coords.to_vec());
        let mut pt = NumericPoint::new(coords.to_vec());
        for ((a, n), du) in &self.derivs_u {
            let dy = &self.derivs_y[&(*a, n.clone())];
            let value = du.eval_numeric(&base)? + t * dy.eval_numeric(&base)?;
            pt.set_jet(*a, n.clone(), value);
        }
        Ok(pt)
    }
}

fn action_perturbed(
    lagrangian: &VForm,
    table: &JetTable,
    t: f64,
    grid: &Grid,
) -> Result<f64, NumcheckError> {
    let density = lagrangian_density(lagrangian);
    let mut acc = 0.0;
    for coords in grid.points() {
        let pt = table.point(&coords, t)?;
        acc += density.eval_numeric(&pt)?;
    }
    Ok(acc * grid.cell_volume())
}

/// Central finite difference of the Action along the deformation
/// `t -> upsilon + t*y`: `(S(+h) - S(-h)) / 2h`.
pub fn fd_action_derivative(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
    grid: &Grid,
    step: f64,
) -> Result<f64, NumcheckError> {
    require_closed(upsilon)?;
    require_closed(y)?;
    let order = lagrangian.measured_coeff_order();
    let table = JetTable::build(upsilon, y, order);
    let plus = action_perturbed(lagrangian, &table, step, grid)?;
    let minus = action_perturbed(lagrangian, &table, -step, grid)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Compare the finite-difference Action derivative against the quadrature
/// of the symbolic first variation.
pub fn verify_first_variation(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
    grid: &Grid,
    step: f64,
    tol: f64,
) -> Result<CheckReport, NumcheckError> {
    let started = Instant::now();
    let lhs = fd_action_derivative(lagrangian, upsilon, y, grid, step)?;
    let fv = first_variation(lagrangian, upsilon, y)?;
    let rhs = integrate_base_form(&fv, grid)?;
    Ok(CheckReport::compare(
        "first_variation",
        lhs,
        rhs,
        tol,
        started,
    ))
}

/// Compare the finite-difference Action derivative against the quadrature
/// of `<y, pulled-back Euler-Lagrange form>`. Equality holds because the
/// exact boundary term integrates to zero on the closed torus.
pub fn verify_green(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
    grid: &Grid,
    step: f64,
    tol: f64,
) -> Result<CheckReport, NumcheckError> {
    let started = Instant::now();
    let lhs = fd_action_derivative(lagrangian, upsilon, y, grid, step)?;
    let rhs = integrate_base_form(&el_pairing(lagrangian, upsilon, y)?, grid)?;
    Ok(CheckReport::compare("green_formula", lhs, rhs, tol, started))
}

/// `<y, (j_2r upsilon)^* epsilon>` as a `(p,0)`-form on the base.
pub fn el_pairing(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
) -> Result<VForm, NumcheckError> {
    let el = euler_lagrange(lagrangian)?;
    let pulled = el.pull_back_section(upsilon);
    let y0 = prolong_base_variation(y, 0);
    Ok(pulled.contract(&y0)?)
}

/// Errors of the finite-difference derivative against the symbolic first
/// variation for a run of step sizes, and the observed convergence slopes
/// between consecutive steps.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slopes: Vec<f64>,
    pub pass: bool,
}

/// Slope check for second-order convergence. Step pairs whose errors both
/// sit below the rounding floor are already converged and are skipped;
/// remaining pairs must show slope >= 1.6.
pub fn fd_convergence(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
    grid: &Grid,
    steps: &[f64],
) -> Result<ConvergenceReport, NumcheckError> {
    let fv = first_variation(lagrangian, upsilon, y)?;
    let exact = integrate_base_form(&fv, grid)?;
    let floor = 1e-9 * exact.abs().max(1.0);
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let fd = fd_action_derivative(lagrangian, upsilon, y, grid, h)?;
        errors.push((fd - exact).abs());
    }
    let mut slopes = Vec::new();
    let mut pass = true;
    for i in 1..steps.len() {
        if errors[i - 1] < floor && errors[i] < floor {
            slopes.push(f64::NAN);
            continue;
        }
        let slope = (errors[i - 1] / errors[i]).ln() / (steps[i - 1] / steps[i]).ln();
        if slope < 1.6 {
            pass = false;
        }
        slopes.push(slope);
    }
    Ok(ConvergenceReport {
        steps: steps.to_vec(),
        errors,
        slopes,
        pass,
    })
}
