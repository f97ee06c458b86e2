//! Limit profile of the spread window: the distribution function `F`
//! solving
//!
//! ```text
//! 1 - F(t) = exp(-Integral_{-inf}^t F(s) (t - s)^2 ds),
//! ```
//!
//! pinned by the translation gauge `F(0) = 1/2`. `F` rises from 0 to 1,
//! with left tail `F ~ A e^{beta t}`, `beta = 2^{1/3}` (substituting the
//! tail into the equation forces `2 / beta^3 = 1`).
//!
//! The solver iterates `F <- recenter(1 - exp(-K*F))` on a uniform grid.
//! The kernel integral expands as `t^2 P0 - 2 t P1 + P2` with prefix
//! moments `Pm(t) = Integral F(s) s^m ds`, so each sweep is linear in the
//! grid size. Trapezoidal quadrature is superconvergent here: the
//! integrand `F(s)(t-s)^2` vanishes to high order at both ends (left tail
//! exponentially small, double zero of the kernel at `s = t`), killing the
//! leading Euler-Maclaurin boundary terms.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::report::{Check, SuiteReport};

/// Uniform grid `t_i = start + i * step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl GridSpec {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(Error::invalid("grid needs a finite start and positive step"));
        }
        if len < 3 {
            return Err(Error::invalid(format!("grid needs at least 3 points, got {len}")));
        }
        let end = start + step * (len - 1) as f64;
        if !(start < 0.0 && end > 0.0) {
            return Err(Error::invalid(format!(
                "grid [{start}, {end}] must straddle 0 to pin the gauge F(0) = 1/2"
            )));
        }
        Ok(GridSpec { start, step, len })
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.len - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

/// Default grid `[-21, 9]` with step `1e-3`: wide enough that the solved
/// profile carries less than `1e-10` of mass outside it.
pub fn default_window_grid() -> GridSpec {
    GridSpec::new(-21.0, 1e-3, 30_001).expect("static grid is valid")
}

/// A solved window profile.
#[derive(Clone, Debug)]
pub struct WindowProfile {
    pub grid: GridSpec,
    /// `F` at the grid points; nondecreasing from ~0 to ~1.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Final self-consistency gap `sup |1 - F - exp(-K*F)|`.
    pub residual: f64,
}

impl WindowProfile {
    /// Linear interpolation of `F` at `t`, clamped to the boundary values.
    pub fn value_at(&self, t: f64) -> f64 {
        let pos = (t - self.grid.start) / self.grid.step;
        if pos <= 0.0 {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if pos >= last as f64 {
            return self.values[last];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}

const MAX_SWEEPS: usize = 600;

/// Left-tail rate `beta = 2^{1/3}` forced by the equation: substituting
/// `F ~ A e^{beta t}` gives `2 A e^{beta t} / beta^3`, so `beta^3 = 2`.
const TAIL_RATE: f64 = 1.259_921_049_894_873_2;

/// Applies the integral map: `out[i] = 1 - exp(-Integral F(s)(t_i - s)^2 ds)`
/// with trapezoidal prefix moments on the grid.
///
/// Below the grid the profile is continued analytically as
/// `f[0] e^{beta (s - t_0)}` and its exact moments seed the accumulators.
/// This matters: cutting the integral at the grid edge starves the left
/// tail — a neutral mode of the map with nothing to regenerate it — and
/// the profile then steepens and travels off as a front instead of
/// converging. Because `beta^3 = 2`, the continuation reproduces itself at
/// the boundary: `I(t_0) = f[0] * 2 / beta^3 = f[0]` exactly.
fn integral_map(grid: &GridSpec, f: &[f64], out: &mut [f64]) {
    let h = grid.step;
    let t0 = grid.start;
    let b = TAIL_RATE;
    // Moments of f[0] e^{beta (s - t0)} over s in (-inf, t0].
    let mut p0 = f[0] / b;
    let mut p1 = f[0] * (t0 / b - 1.0 / (b * b));
    let mut p2 = f[0] * (t0 * t0 / b - 2.0 * t0 / (b * b) + 2.0 / (b * b * b));
    let mut prev_t = t0;
    let mut prev_f = f[0];
    out[0] = 1.0 - (-(t0 * t0 * p0 - 2.0 * t0 * p1 + p2)).exp();
    for i in 1..f.len() {
        let t = grid.point(i);
        let fi = f[i];
        p0 += 0.5 * h * (prev_f + fi);
        p1 += 0.5 * h * (prev_f * prev_t + fi * t);
        p2 += 0.5 * h * (prev_f * prev_t * prev_t + fi * t * t);
        let integral = t * t * p0 - 2.0 * t * p1 + p2;
        out[i] = 1.0 - (-integral).exp();
        prev_t = t;
        prev_f = fi;
    }
}

/// Interpolated crossing time of level 1/2, or `None` if the curve never
/// crosses it inside the grid.
fn half_crossing(grid: &GridSpec, f: &[f64]) -> Option<f64> {
    if f[0] >= 0.5 {
        return None;
    }
    let i = f.iter().position(|&v| v >= 0.5)?;
    let (lo, hi) = (f[i - 1], f[i]);
    let frac = if hi > lo { (0.5 - lo) / (hi - lo) } else { 0.0 };
    Some(grid.point(i - 1) + frac * grid.step)
}

/// One sweep of the fixed-point map in forward-substitution order, with
/// the left-tail amplitude `a = F(t_0)` held as a boundary datum.
///
/// The kernel weight `(t - s)^2` vanishes at `s = t`, so the trapezoidal
/// node `i` has zero coefficient in its own update and the sweep can use
/// already-updated values throughout: `out[i] = 1 - exp(-I_i(out[..i]))`.
/// A single left-to-right pass therefore lands exactly on the discrete
/// fixed point compatible with the given tail amplitude — evaluating the
/// map in causal order sidesteps the neutral tail mode that makes the
/// simultaneous-update iteration drift instead of converge.
///
/// `r0/r1/r2` accumulate the moments `Integral F ds`, `Integral F s ds`,
/// `Integral F s^2 ds`; keeping them running makes the sweep `O(len)`.
fn forward_sweep(grid: &GridSpec, amplitude: f64, out: &mut [f64]) {
    let h = grid.step;
    let t0 = grid.start;
    let b = TAIL_RATE;
    // Moments of the analytic continuation a e^{beta (s - t0)} over
    // s in (-inf, t0], plus the half-weight trapezoid endpoint at t0.
    let mut r0 = amplitude / b + 0.5 * h * amplitude;
    let mut r1 = amplitude * (t0 / b - 1.0 / (b * b)) + 0.5 * h * amplitude * t0;
    let mut r2 = amplitude * (t0 * t0 / b - 2.0 * t0 / (b * b) + 2.0 / (b * b * b))
        + 0.5 * h * amplitude * t0 * t0;
    out[0] = amplitude;
    for i in 1..out.len() {
        let t = grid.point(i);
        let integral = t * t * r0 - 2.0 * t * r1 + r2;
        let fi = 1.0 - (-integral).exp();
        out[i] = fi;
        // Node i enters later prefixes with full interior weight h; its
        // half-weight end-point share cancels against the zero kernel
        // weight at s = t, which is what frees out[i] from the update.
        r0 += h * fi;
        r1 += h * fi * t;
        r2 += h * fi * t * t;
    }
}

/// Solves the window-profile equation on `grid` by fixed-point sweeps of
/// `F <- 1 - exp(-K*F)` in forward-substitution order, enforcing the
/// translation gauge `F(0) = 1/2` between sweeps: a shift of the profile
/// by `c` is the same as scaling the left-tail amplitude by `e^{beta c}`,
/// so each round rescales the amplitude by the measured half-crossing
/// offset. Iterates until the sup-change of a sweep drops below
/// `tolerance`; gives up with a numeric error (carrying the last
/// residual) after 600 sweeps. After convergence the left boundary must
/// carry less than `1e-6` of mass, else the grid was too narrow and the
/// solver asks for a wider one.
pub fn solve_window_profile(grid: GridSpec, tolerance: f64) -> Result<WindowProfile> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let n = grid.len;
    // Left-tail amplitude in the gauge F(0) = 1/2 is about 0.73 e^{beta t};
    // starting near it keeps the first crossing well inside the grid.
    let mut amplitude = (0.73f64).min(0.45 * (TAIL_RATE * grid.start).exp().recip())
        * (TAIL_RATE * grid.start).exp();
    let mut f = vec![0.0; n];
    let mut next = vec![0.0; n];
    forward_sweep(&grid, amplitude, &mut f);
    let mut mapped = vec![0.0; n];
    let mut iterations = 1;
    let mut converged = false;
    let mut change = f64::INFINITY;
    while iterations < MAX_SWEEPS {
        let shift = half_crossing(&grid, &f).ok_or_else(|| {
            Error::numeric("window profile lost the half-level crossing; widen the grid")
        })?;
        amplitude = (amplitude * (TAIL_RATE * shift).exp()).min(0.499);
        forward_sweep(&grid, amplitude, &mut next);
        change = f
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut f, &mut next);
        iterations += 1;
        if change < tolerance {
            converged = true;
            break;
        }
    }
    // Residual of the unrecentered equation on the final iterate; at the
    // fixed point the recentering shift vanishes, so this is the honest
    // self-consistency gap.
    integral_map(&grid, &f, &mut mapped);
    let residual = f
        .iter()
        .zip(&mapped)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if !converged {
        return Err(Error::numeric(format!(
            "window profile did not converge in {MAX_SWEEPS} sweeps: last sweep changed {change:.3e}, residual {residual:.3e}"
        )));
    }
    if f[0] >= 1e-6 {
        return Err(Error::invalid(format!(
            "left boundary carries mass {:.3e} >= 1e-6; widen the grid leftward",
            f[0]
        )));
    }
    Ok(WindowProfile { grid, values: f, iterations, residual })
}

/// Solver verdict suite: self-consistency residual below `10 x tolerance`,
/// exact monotonicity, boundary values within `1e-6` of {0, 1}, the gauge
/// `F(0) = 1/2`, and pointwise stability under refining the grid step 2x.
/// Emits the profile (downsampled) as a curve.
pub fn window_profile_suite(tolerance: f64) -> Result<SuiteReport> {
    let fine_grid = default_window_grid();
    let fine = solve_window_profile(fine_grid, tolerance)?;
    let coarse_grid = GridSpec::new(fine_grid.start, 2.0 * fine_grid.step, (fine_grid.len + 1) / 2)?;
    let coarse = solve_window_profile(coarse_grid, tolerance)?;

    let mut report = SuiteReport::new(
        "window-profile",
        json!({
            "tolerance": tolerance,
            "grid": fine_grid,
        }),
    );
    report.push(Check::bound("residual", fine.residual, 10.0 * tolerance));
    let violations =
        fine.values.windows(2).filter(|w| w[1] < w[0]).count() as f64;
    report.push(Check::identity("monotone-violations", violations, 0.0, 0.0));
    report.push(Check::bound("left-boundary", fine.values[0], 1e-6));
    report.push(Check::bound(
        "right-boundary",
        1.0 - fine.values[fine.values.len() - 1],
        1e-6,
    ));
    report.push(Check::identity("gauge-center", fine.value_at(0.0), 0.5, 1e-6));
    // Coarse grid point j sits exactly on fine grid point 2j.
    let refinement_gap = coarse
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| (fine.values[2 * j] - v).abs())
        .fold(0.0f64, f64::max);
    report.push(Check::bound("refinement-sup-diff", refinement_gap, 10.0 * tolerance));
    let curve: Vec<[f64; 2]> = fine
        .values
        .iter()
        .enumerate()
        .step_by(100)
        .map(|(i, v)| [fine.grid.point(i), *v])
        .collect();
    report.add_curve("window-profile", curve);
    Ok(report)
}
