//! Predual certificates and optimality checks.
//!
//! A pair `(u, w)` minimises the TGV² energy exactly when some `v` with
//! `v = v′ = 0` at both ends satisfies
//!
//! ```text
//! v″ = f − u,   −v′ ∈ α·Sgn(Du − w),   v ∈ β·Sgn(Dw).
//! ```
//!
//! [`reconstruct_v`] builds `v` from `f − u` by integrating from the left end,
//! so the first condition holds by construction and the boundary values at
//! the right end measure the mass and first-moment defects of `f − u`.
//! [`check_conditions`] then tests feasibility (`|v′| ≤ α`, `|v| ≤ β`) and
//! Sgn alignment on the support of `Du − w` and `Dw`.
//!
//! On a grid, `v′` lives on nodes and the Sgn condition for `Du − w` is read
//! at the node where `(Du)ⱼ` sits. The condition for `Dw` is read from the
//! cell-centred values `V`, which form the exact discrete predual variable;
//! the node values of `v` are the trapezoid averages of `V`.

use alloc::vec::Vec;

use crate::dual;
use crate::exact::{ExactSolution, PiecewisePoly};
use crate::math::sup_norm;
use crate::signal::{Grid, Signal};
use crate::solver::primal_energy;
use crate::{Error, RegParams, Result};

/// `(v(a), v′(a), v(b), v′(b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundaryResiduals {
    pub v_a: f64,
    pub dv_a: f64,
    pub v_b: f64,
    pub dv_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DualCertificate {
    /// `v` at all `n + 1` nodes (see [`Grid::all_nodes_grid`]).
    pub v: Signal,
    /// `v′` at all `n + 1` nodes.
    pub v_prime: Signal,
    /// Cell-centred `V`, the discrete predual variable.
    pub v_cells: Signal,
    pub boundary_residuals: BoundaryResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CertificateReport {
    /// `max |v″ − (f − u)|` away from the right end.
    pub cf_residual: f64,
    /// `max |v′| − α`.
    pub alpha_margin: f64,
    pub alpha_feasible: bool,
    /// `max |v| − β`.
    pub beta_margin: f64,
    pub beta_feasible: bool,
    pub sgn_alpha_ok: bool,
    /// Worst `|−v′ − α·sign(Du − w)|` over active points.
    pub sgn_alpha_error: f64,
    pub sgn_alpha_active: usize,
    pub sgn_beta_ok: bool,
    /// Worst `|v − β·sign(Dw)|` over active points.
    pub sgn_beta_error: f64,
    pub sgn_beta_active: usize,
    pub boundary: BoundaryResiduals,
    pub boundary_ok: bool,
    pub gap: f64,
    pub pass: bool,
}

/// Tolerances for [`check_conditions_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Relative tolerance for every condition.
    pub tol: f64,
    /// Threshold above which `|Du − w|` or `|Dw|` counts as active. `None`
    /// selects [`default_jump_tol`].
    pub jump_tol: Option<f64>,
}

/// `1e−6·max(1, ‖Du‖∞)`.
pub fn default_jump_tol(u: &Signal) -> f64 {
    let d = u.grid().delta();
    let du = sup_norm(u.values().windows(2).map(|w| (w[1] - w[0]) / d));
    1e-6 * du.max(1.0)
}

/// Integrates `f − u` twice from the left end.
///
/// `v′` is the cumulative midpoint integral of `f − u` at the nodes and `v`
/// the cumulative trapezoid integral of `v′`.
pub fn reconstruct_v(f: &Signal, u: &Signal) -> Result<DualCertificate> {
    f.ensure_same_grid(u)?;
    let g = *f.grid();
    let n = g.n();
    let d = g.delta();
    let r: Vec<f64> = f.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
    let (cells, vp) = dual::integrate_twice(&r, d);
    let mut v = alloc::vec![0.0; n + 1];
    for k in 1..=n {
        v[k] = v[k - 1] + 0.5 * d * (vp[k - 1] + vp[k]);
    }
    let boundary_residuals = BoundaryResiduals { v_a: v[0], dv_a: vp[0], v_b: v[n], dv_b: vp[n] };
    let nodes = g.all_nodes_grid()?;
    Ok(DualCertificate {
        v: Signal::new(nodes, v)?,
        v_prime: Signal::new(nodes, vp)?,
        v_cells: Signal::new(g, cells)?,
        boundary_residuals,
    })
}

fn check_shapes(f: &Signal, u: &Signal, w: &Signal) -> Result<Grid> {
    f.ensure_same_grid(u)?;
    let g = *f.grid();
    if g.n() < 3 {
        return Err(Error::InvalidGrid(alloc::format!("certificates need at least 3 cells, got {}", g.n())));
    }
    if w.len() + 1 != g.n() {
        return Err(Error::LengthMismatch { expected: g.n() - 1, found: w.len() });
    }
    Ok(g)
}

/// Primal energy minus the predual objective of the reconstructed `V`, made
/// feasible by pinning `V` to zero at the right end and scaling it radially
/// by `min(1, α/max|v′|, β/max|V|)`.
///
/// The result is an upper bound on the suboptimality of `(u, w)`, so it is
/// non-negative up to rounding.
pub fn duality_gap(f: &Signal, u: &Signal, w: &Signal, p: RegParams) -> Result<f64> {
    let g = check_shapes(f, u, w)?;
    let p = p.validated()?;
    let e = primal_energy(f, u, w, p)?;
    let cert = reconstruct_v(f, u)?;
    let lower = dual::tgv_dual_lower_bound(f.values(), cert.v_cells.values(), g.delta(), p.alpha, p.beta);
    Ok(e - lower)
}

/// [`check_conditions_with`] at relative tolerance `tol` and the default
/// jump threshold.
pub fn check_conditions(f: &Signal, u: &Signal, w: &Signal, p: RegParams, tol: f64) -> Result<CertificateReport> {
    check_conditions_with(f, u, w, p, CheckOptions { tol, jump_tol: None })
}

/// Verifies the optimality conditions for a sampled triple `(f, u, w)`.
///
/// Feasibility allows `α(1 + tol)` and `β(1 + tol)`, Sgn alignment allows
/// `tol·α` and `tol·β`. With `F = max(‖f‖∞, ‖u‖∞)` the boundary residuals
/// must satisfy `|v′(b)| ≤ tol·F·(b − a)` and `|v(b)| ≤ tol·F·(b − a)²`, so
/// every test is invariant under joint scaling of `(f, u, w, α, β)`.
pub fn check_conditions_with(
    f: &Signal,
    u: &Signal,
    w: &Signal,
    p: RegParams,
    opts: CheckOptions,
) -> Result<CertificateReport> {
    let g = check_shapes(f, u, w)?;
    let p = p.validated()?;
    let tol = opts.tol;
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("tol must be non-negative, got {tol}")));
    }
    let jump_tol = opts.jump_tol.unwrap_or_else(|| default_jump_tol(u));
    let n = g.n();
    let d = g.delta();
    let cert = reconstruct_v(f, u)?;
    let vp = cert.v_prime.values();
    let cells = cert.v_cells.values();

    let r: Vec<f64> = f.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
    let s = dual::second_difference(cells, d);
    let cf_residual = sup_norm((0..n - 1).map(|i| s[i] - r[i]));

    let alpha_margin = sup_norm(vp.iter().copied()) - p.alpha;
    let beta_margin = sup_norm(cells.iter().copied()) - p.beta;

    let (uv, wv) = (u.values(), w.values());
    let mut sgn_alpha_error = 0.0f64;
    let mut sgn_alpha_active = 0;
    for j in 0..n - 1 {
        let e = (uv[j + 1] - uv[j]) / d - wv[j];
        if e.abs() > jump_tol {
            sgn_alpha_active += 1;
            sgn_alpha_error = sgn_alpha_error.max((-vp[j + 1] - p.alpha * e.signum()).abs());
        }
    }
    let mut sgn_beta_error = 0.0f64;
    let mut sgn_beta_active = 0;
    for k in 0..n - 2 {
        let e = (wv[k + 1] - wv[k]) / d;
        if e.abs() > jump_tol {
            sgn_beta_active += 1;
            sgn_beta_error = sgn_beta_error.max((cells[k + 1] - p.beta * e.signum()).abs());
        }
    }

    let scale = sup_norm(f.values().iter().copied()).max(sup_norm(uv.iter().copied()));
    let len = g.length();
    let b = cert.boundary_residuals;
    let boundary_ok = b.dv_b.abs() <= tol * scale * len && b.v_b.abs() <= tol * scale * len * len;

    let alpha_feasible = alpha_margin <= tol * p.alpha;
    let beta_feasible = beta_margin <= tol * p.beta;
    let sgn_alpha_ok = sgn_alpha_error <= tol * p.alpha;
    let sgn_beta_ok = sgn_beta_error <= tol * p.beta;
    let cf_ok = cf_residual <= (tol + 1e-9) * scale;
    let gap = primal_energy(f, u, w, p)? - dual::tgv_dual_lower_bound(f.values(), cells, d, p.alpha, p.beta);
    Ok(CertificateReport {
        cf_residual,
        alpha_margin,
        alpha_feasible,
        beta_margin,
        beta_feasible,
        sgn_alpha_ok,
        sgn_alpha_error,
        sgn_alpha_active,
        sgn_beta_ok,
        sgn_beta_error,
        sgn_beta_active,
        boundary: b,
        boundary_ok,
        gap,
        pass: cf_ok && alpha_feasible && beta_feasible && sgn_alpha_ok && sgn_beta_ok && boundary_ok,
    })
}

/// Points where a Sgn condition is tested on one piece of a piecewise
/// polynomial: both ends and interior points.
fn piece_samples(x0: f64, x1: f64) -> impl Iterator<Item = f64> {
    (0..=16).map(move |i| x0 + (x1 - x0) * f64::from(i) / 16.0)
}

/// Analytic version of [`check_conditions`] for a closed-form solution.
///
/// Feasibility uses exact maxima of the piecewise cubics. Sgn alignment is
/// tested at every jump of `u` and `w` and on a 17-point sampling of every
/// piece where `u′ − w` or `w′` is non-zero. The gap compares the analytic
/// primal energy with `∫ f v″ − ½∫ (v″)²`.
pub fn check_exact(sol: &ExactSolution, tol: f64) -> Result<CertificateReport> {
    let p = sol.params;
    let f = sol.data();
    let (a, b) = f.domain();
    let len = b - a;
    let vp = sol.v.derivative();
    let vpp = vp.derivative();
    let r = f.sub(&sol.u)?;
    let cf_residual = vpp.sub(&r)?.max_abs().0;
    let alpha_margin = vp.max_abs().0 - p.alpha;
    let beta_margin = sol.v.max_abs().0 - p.beta;
    let scale = f.max_abs().0.max(sol.u.max_abs().0);
    let jump_tol = 1e-12 * scale.max(1.0);

    let mut sgn_alpha_error = 0.0f64;
    let mut sgn_alpha_active = 0;
    let mut check_alpha = |x: f64, sign: f64| {
        sgn_alpha_active += 1;
        sgn_alpha_error = sgn_alpha_error.max((-vp.eval(x) - p.alpha * sign).abs());
    };
    for (x, size) in sol.u.jumps(jump_tol) {
        check_alpha(x, size.signum());
    }
    let slack = sol.u.derivative().sub(&sol.w)?;
    for_active_pieces(&slack, jump_tol, check_alpha);

    let mut sgn_beta_error = 0.0f64;
    let mut sgn_beta_active = 0;
    let mut check_beta = |x: f64, sign: f64| {
        sgn_beta_active += 1;
        sgn_beta_error = sgn_beta_error.max((sol.v.eval(x) - p.beta * sign).abs());
    };
    for (x, size) in sol.w.jumps(jump_tol) {
        check_beta(x, size.signum());
    }
    for_active_pieces(&sol.w.derivative(), jump_tol, check_beta);

    let boundary = BoundaryResiduals { v_a: sol.v.eval(a), dv_a: vp.eval(a), v_b: sol.v.eval_left(b), dv_b: vp.eval_left(b) };
    let boundary_ok = boundary.dv_b.abs() <= tol * scale * len
        && boundary.v_b.abs() <= tol * scale * len * len
        && boundary.v_a == 0.0
        && boundary.dv_a == 0.0;

    let jumps_u: f64 = sol.u.jumps(0.0).iter().map(|(_, s)| s.abs()).sum();
    let jumps_w: f64 = sol.w.jumps(0.0).iter().map(|(_, s)| s.abs()).sum();
    let fidelity = 0.5 * r.mul(&r)?.integral();
    let primal = fidelity
        + p.alpha * (jumps_u + slack.abs_integral())
        + p.beta * (jumps_w + sol.w.derivative().abs_integral());
    let predual = f.mul(&vpp)?.integral() - 0.5 * vpp.mul(&vpp)?.integral();

    let alpha_feasible = alpha_margin <= tol * p.alpha;
    let beta_feasible = beta_margin <= tol * p.beta;
    let sgn_alpha_ok = sgn_alpha_error <= tol * p.alpha;
    let sgn_beta_ok = sgn_beta_error <= tol * p.beta;
    let cf_ok = cf_residual <= tol * scale;
    Ok(CertificateReport {
        cf_residual,
        alpha_margin,
        alpha_feasible,
        beta_margin,
        beta_feasible,
        sgn_alpha_ok,
        sgn_alpha_error,
        sgn_alpha_active,
        sgn_beta_ok,
        sgn_beta_error,
        sgn_beta_active,
        boundary,
        boundary_ok,
        gap: primal - predual,
        pass: cf_ok && alpha_feasible && beta_feasible && sgn_alpha_ok && sgn_beta_ok && boundary_ok,
    })
}

/// Calls `check(x, sign)` at sample points of every piece where `|p| > tol`.
fn for_active_pieces(p: &PiecewisePoly, tol: f64, mut check: impl FnMut(f64, f64)) {
    let bps = p.breakpoints();
    for k in 0..p.pieces().len() {
        let (x0, x1) = (bps[k], bps[k + 1]);
        for x in piece_samples(x0, x1) {
            // stay inside the piece so one-sided values are used at its ends
            let inner = x.clamp(x0 + 1e-12 * (x1 - x0), x1 - 1e-12 * (x1 - x0));
            let value = p.eval(inner);
            if value.abs() > tol {
                check(x, value.signum());
            }
        }
    }
}
