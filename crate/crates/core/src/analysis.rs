//! Structural decomposition of solutions, property checks and regime sweeps.
//!
//! [`segment_affine`] splits a sampled signal into affine segments separated
//! by jumps or kinks. The `check_*` functions measure the qualitative
//! properties every minimiser has (jump inclusion, symmetry, moment
//! preservation, shift equivariance). [`sweep_regimes`] labels a grid of
//! `(α, β)` pairs either with the closed-form classification or by solving
//! and reading the structure of the numeric solution.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::exact::{classify, PiecewisePoly};
use crate::math::sup_norm;
use crate::signal::{moments, sample_shape};
use crate::solver::{solve_tgv2, SolverOptions};
use crate::{Error, RegParams, Result, ShapeKind, ShapeSpec, Signal};

/// Affine piece `slope·x + intercept` on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Discontinuity of size `right − left` at `location`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Jump {
    pub location: f64,
    pub size: f64,
}

/// Affine segments tiling the domain, the jumps between them and the
/// locations where the slope changes without a jump.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StructureDescription {
    pub segments: Vec<Segment>,
    pub jumps: Vec<Jump>,
    pub kink_points: Vec<f64>,
}

impl StructureDescription {
    /// Interior segment boundaries, jumps and kinks alike, in order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }
}

/// Detection thresholds for [`segment_affine`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SegmentTolerances {
    pub slope_tol: f64,
    pub jump_tol: f64,
}

impl SegmentTolerances {
    /// `slope_tol = 10⁻³·r/(b − a)` and `jump_tol = 10⁻²·r` with `r` the range
    /// of `f` (or 1 for constant data).
    pub fn for_data(f: &Signal) -> Self {
        let mut range = f.max() - f.min();
        if !(range > 0.0) {
            range = 1.0;
        }
        Self { slope_tol: 1e-3 * range / f.grid().length(), jump_tol: 1e-2 * range }
    }

    pub fn validated(self) -> Result<Self> {
        let ok = |t: f64| t > 0.0 && t.is_finite();
        if !ok(self.slope_tol) || !ok(self.jump_tol) {
            return Err(Error::InvalidParameter(alloc::format!(
                "tolerances must be positive and finite, got slope_tol = {}, jump_tol = {}",
                self.slope_tol,
                self.jump_tol
            )));
        }
        Ok(self)
    }
}

/// Maximal run of node slopes that agree within the slope tolerance.
#[derive(Debug, Clone, Copy)]
struct Run {
    first: usize,
    last: usize,
}

impl Run {
    fn len(&self) -> usize {
        self.last - self.first + 1
    }
}

/// Least-squares line through cells `c0..=c1`.
fn fit_cells(u: &Signal, c0: usize, c1: usize) -> (f64, f64) {
    let g = u.grid();
    if c0 == c1 {
        return (0.0, u.values()[c0]);
    }
    let m = (c1 - c0 + 1) as f64;
    let xm = (c0..=c1).map(|i| g.x(i)).sum::<f64>() / m;
    let ym = u.values()[c0..=c1].iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in c0..=c1 {
        let dx = g.x(i) - xm;
        sxy += dx * (u.values()[i] - ym);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    (slope, ym - slope * xm)
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

/// Splits `u` into affine segments.
///
/// Node `j` (between cells `j` and `j + 1`) carries a jump when
/// `|u_{j+1} − u_j| > jump_tol + |s|·δ`, where `s` is the median slope of the
/// three nodes on either side. Consecutive jump nodes form one jump. Between
/// jumps, consecutive node slopes are merged greedily while they stay within
/// `slope_tol` of the running mean. A cluster of short runs (two nodes or
/// fewer each) squeezed between longer runs is the transition of a kink when
/// it spans at most two nodes and one segment otherwise; kinks sit where the
/// neighbouring lines intersect. Each segment is the least-squares line
/// through its cells. Neighbouring segments whose slopes agree within
/// `slope_tol` are merged unless a jump larger than `jump_tol` separates them.
pub fn segment_affine(u: &Signal, slope_tol: f64, jump_tol: f64) -> Result<StructureDescription> {
    SegmentTolerances { slope_tol, jump_tol }.validated()?;
    let g = *u.grid();
    let (n, d) = (g.n(), g.delta());
    let vals = u.values();
    let diffs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let slopes: Vec<f64> = diffs.iter().map(|&dv| dv / d).collect();

    let is_jump: Vec<bool> = (0..n - 1)
        .map(|j| {
            let lo = j.saturating_sub(3);
            let hi = (j + 3).min(n - 2);
            let near: Vec<f64> = (lo..=hi).filter(|&k| k != j).map(|k| slopes[k].abs()).collect();
            diffs[j].abs() > jump_tol + median(near) * d
        })
        .collect();

    // cell blocks between jump runs, with the jump runs between them
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut jump_runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    let mut j = 0;
    while j < n - 1 {
        if is_jump[j] {
            let j0 = j;
            while j + 1 < n - 1 && is_jump[j + 1] {
                j += 1;
            }
            blocks.push((start, j0));
            jump_runs.push((j0, j));
            start = j + 1;
        }
        j += 1;
    }
    blocks.push((start, n - 1));

    // segments as cell ranges, each tagged with the block it belongs to
    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for (b, &(c0, c1)) in blocks.iter().enumerate() {
        if c0 == c1 {
            cells.push((c0, c1, b));
            continue;
        }
        let mut runs: Vec<Run> = Vec::new();
        let mut sum = 0.0;
        for j in c0..c1 {
            match runs.last_mut() {
                Some(r) if (slopes[j] - sum / r.len() as f64).abs() <= slope_tol => {
                    r.last = j;
                    sum += slopes[j];
                }
                _ => {
                    runs.push(Run { first: j, last: j });
                    sum = slopes[j];
                }
            }
        }
        // clusters of short runs: a kink when squeezed between long runs and
        // at most two nodes wide, otherwise one segment
        let long = |r: &Run| r.len() > 2;
        let m = runs.len();
        let mut k = 0;
        while k < m {
            if long(&runs[k]) {
                cells.push((runs[k].first, runs[k].last + 1, b));
                k += 1;
                continue;
            }
            let mut k2 = k;
            while k2 + 1 < m && !long(&runs[k2 + 1]) {
                k2 += 1;
            }
            let (j0, j1) = (runs[k].first, runs[k2].last);
            if k > 0 && k2 + 1 < m {
                if j1 - j0 + 1 > 2 {
                    cells.push((j0 + 1, j1, b));
                }
            } else {
                cells.push((j0, j1 + 1, b));
            }
            k = k2 + 1;
        }
    }

    let mut out = StructureDescription::default();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut jump_iter = jump_runs.iter();
    for (k, &(c0, c1, b)) in cells.iter().enumerate() {
        let (slope, intercept) = fit_cells(u, c0, c1);
        let mut seg = Segment { start: g.a(), end: g.b(), slope, intercept };
        if let (Some(prev), Some(span)) = (out.segments.last_mut(), spans.last_mut()) {
            let (_, p1, pb) = cells[k - 1];
            if pb != b {
                let &(j0, j1) = jump_iter.next().expect("one jump run between blocks");
                let x = 0.5 * (g.node(j0 + 1) + g.node(j1 + 1));
                let size = seg.eval(x) - prev.eval(x);
                if size.abs() > jump_tol {
                    out.jumps.push(Jump { location: x, size });
                } else if (prev.slope - slope).abs() <= slope_tol {
                    // an insignificant step inside one affine piece
                    span.1 = c1;
                    let (s, i) = fit_cells(u, span.0, c1);
                    prev.slope = s;
                    prev.intercept = i;
                    continue;
                } else {
                    out.kink_points.push(x);
                }
                prev.end = x;
                seg.start = x;
            } else if (prev.slope - slope).abs() <= slope_tol {
                // a transition without a slope change
                span.1 = c1;
                let (s, i) = fit_cells(u, span.0, c1);
                prev.slope = s;
                prev.intercept = i;
                continue;
            } else {
                let lo = g.x(p1.min(c0)) - 0.5 * d;
                let hi = g.x(p1.max(c0)) + 0.5 * d;
                let ds = prev.slope - slope;
                let x = if ds.abs() * (hi - lo) > f64::EPSILON * (1.0 + intercept.abs()) {
                    ((intercept - prev.intercept) / ds).clamp(lo, hi)
                } else {
                    0.5 * (lo + hi)
                };
                prev.end = x;
                seg.start = x;
                out.kink_points.push(x);
            }
        }
        out.segments.push(seg);
        spans.push((c0, c1));
    }
    Ok(out)
}

/// Thresholds for [`check_jump_inclusion`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JumpInclusionTolerances {
    /// Detection thresholds applied to both signals.
    pub detect: SegmentTolerances,
    /// Inflation of the data's one-sided value interval.
    pub value_tol: f64,
}

impl JumpInclusionTolerances {
    pub fn for_data(f: &Signal) -> Self {
        let detect = SegmentTolerances::for_data(f);
        Self { detect, value_tol: detect.jump_tol }
    }
}

/// One-sided limits `(left, right)` at each jump.
fn one_sided(s: &StructureDescription) -> Vec<(f64, f64, f64)> {
    s.jumps
        .iter()
        .map(|j| {
            let k = s.segments.iter().position(|seg| seg.start == j.location).unwrap_or(1);
            let right = s.segments[k].eval(j.location);
            (j.location, right - j.size, right)
        })
        .collect()
}

/// Whether every jump of `u` lies within one cell of a jump of `f` whose
/// one-sided values, widened by `value_tol`, enclose those of `u`.
pub fn check_jump_inclusion(f: &Signal, u: &Signal, tols: JumpInclusionTolerances) -> Result<bool> {
    f.ensure_same_grid(u)?;
    let t = tols.detect;
    let fj = one_sided(&segment_affine(f, t.slope_tol, t.jump_tol)?);
    let uj = one_sided(&segment_affine(u, t.slope_tol, t.jump_tol)?);
    let reach = f.grid().delta() * (1.0 + 1e-9);
    Ok(uj.iter().all(|&(x, l, r)| {
        fj.iter().any(|&(y, fl, fr)| {
            (x - y).abs() <= reach
                && l.min(r) >= fl.min(fr) - tols.value_tol
                && l.max(r) <= fl.max(fr) + tols.value_tol
        })
    }))
}

/// Symmetry about the domain midpoint `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Symmetry {
    /// `u(x) = u(2m − x)`.
    EvenAboutMid,
    /// `u(x) + u(2m − x) = h`.
    PointSymmetric(f64),
}

/// Sup-norm residual of the claimed symmetry over mirrored cell pairs.
pub fn check_symmetry(u: &Signal, kind: Symmetry) -> f64 {
    let v = u.values();
    let n = v.len();
    sup_norm((0..n).map(|i| match kind {
        Symmetry::EvenAboutMid => v[i] - v[n - 1 - i],
        Symmetry::PointSymmetric(h) => v[i] + v[n - 1 - i] - h,
    }))
}

/// [`check_symmetry`] for a piecewise polynomial, evaluated exactly.
pub fn check_symmetry_poly(u: &PiecewisePoly, kind: Symmetry) -> Result<f64> {
    let (a, b) = u.domain();
    let mirrored = u.reflect(0.5 * (a + b));
    let r = match kind {
        Symmetry::EvenAboutMid => u.sub(&mirrored)?,
        Symmetry::PointSymmetric(h) => u.add(&mirrored)?.add_affine(0.0, -h),
    };
    Ok(r.max_abs().0)
}

/// `(|mass(u) − mass(f)|, |moment(u) − moment(f)|)` under the midpoint rule.
pub fn check_moment_preservation(f: &Signal, u: &Signal) -> Result<(f64, f64)> {
    f.ensure_same_grid(u)?;
    let (mf, xf) = moments(f);
    let (mu, xu) = moments(u);
    Ok(((mu - mf).abs(), (xu - xf).abs()))
}

/// [`check_moment_preservation`] for piecewise polynomials, evaluated exactly.
pub fn check_moment_preservation_poly(f: &PiecewisePoly, u: &PiecewisePoly) -> Result<(f64, f64)> {
    let r = u.sub(f)?;
    Ok((r.integral().abs(), r.first_moment().abs()))
}

/// `sup |u_g − u_f − λ(x − L)|` over the grid.
pub fn check_shift_equivariance(u_f: &Signal, u_g: &Signal, lambda: f64, half_length: f64) -> Result<f64> {
    u_f.ensure_same_grid(u_g)?;
    let g = u_f.grid();
    Ok(sup_norm(
        u_f.values()
            .iter()
            .zip(u_g.values())
            .enumerate()
            .map(|(i, (a, b))| b - a - lambda * (g.x(i) - half_length)),
    ))
}

/// [`check_shift_equivariance`] for piecewise polynomials, evaluated exactly.
pub fn check_shift_equivariance_poly(
    u_f: &PiecewisePoly,
    u_g: &PiecewisePoly,
    lambda: f64,
    half_length: f64,
) -> Result<f64> {
    Ok(u_g.sub(u_f)?.add_affine(-lambda, lambda * half_length).max_abs().0)
}

/// Whether `Σ|(Du)ⱼ| ≤ Σ|(Du)ⱼ + c|` for `u` even about the midpoint.
///
/// Fails with [`Error::NotEven`] when the even residual exceeds
/// `10⁻⁹·max(1, ‖u‖∞)`. The comparison allows for rounding in the sums and
/// for the odd part of `Du` that an even residual `r` leaves, at most
/// `2r/δ` per node.
pub fn check_even_monotone_tv(u: &Signal, c: f64) -> Result<bool> {
    let residual = check_symmetry(u, Symmetry::EvenAboutMid);
    let scale = sup_norm(u.values().iter().copied()).max(1.0);
    if residual > 1e-9 * scale {
        return Err(Error::NotEven(residual));
    }
    let d = u.grid().delta();
    let du: Vec<f64> = u.values().windows(2).map(|w| (w[1] - w[0]) / d).collect();
    let tv: f64 = du.iter().map(|x| x.abs()).sum();
    let tilted: f64 = du.iter().map(|x| (x + c).abs()).sum();
    let m = du.len() as f64;
    let slack = 4.0 * f64::EPSILON * m * (tv + tilted) + 2.0 * residual * m / d;
    Ok(tv <= tilted + slack)
}

/// How a sweep labels each `(α, β)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SweepMode {
    /// Closed-form classification.
    Analytic,
    /// Solve on a grid and read the structure of the solution.
    Numeric,
}

/// Label for analytic cells in the undetermined step region.
pub const INDETERMINATE: &str = "indeterminate";
/// Label for numeric solutions whose structure matches no regime.
pub const UNCLASSIFIED: &str = "unclassified";
/// Label for numeric solves that did not reach the gap tolerance.
pub const UNCONVERGED: &str = "unconverged";

/// Settings for numeric labelling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSettings {
    /// Cells per solve (even, so no midpoint falls on `x = L`).
    pub n: usize,
    pub solver: SolverOptions,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self { n: 512, solver: SolverOptions::default() }
    }
}

/// Regime labels over an `(α, β)` grid. `labels[i][j]` belongs to
/// `(alphas[j], betas[i])`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegimeMap {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub labels: Vec<Vec<String>>,
    pub mode: SweepMode,
}

impl RegimeMap {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>, labels: Vec<Vec<String>>, mode: SweepMode) -> Result<Self> {
        if labels.len() != betas.len() {
            return Err(Error::LengthMismatch { expected: betas.len(), found: labels.len() });
        }
        if let Some(row) = labels.iter().find(|r| r.len() != alphas.len()) {
            return Err(Error::LengthMismatch { expected: alphas.len(), found: row.len() });
        }
        Ok(Self { alphas, betas, labels, mode })
    }

    pub fn label(&self, beta_index: usize, alpha_index: usize) -> &str {
        &self.labels[beta_index][alpha_index]
    }

    /// Whether all (up to eight) neighbours of a cell share its label.
    pub fn is_interior(&self, beta_index: usize, alpha_index: usize) -> bool {
        let me = self.label(beta_index, alpha_index);
        let rows = beta_index.saturating_sub(1)..=(beta_index + 1).min(self.betas.len() - 1);
        rows.into_iter().all(|i| {
            let cols = alpha_index.saturating_sub(1)..=(alpha_index + 1).min(self.alphas.len() - 1);
            cols.into_iter().all(|j| self.label(i, j) == me)
        })
    }

    /// Distinct unordered pairs of labels that share a cell edge, sorted.
    pub fn adjacencies(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut add = |a: &str, b: &str| {
            if a != b {
                let pair = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
                if !out.contains(&pair) {
                    out.push(pair);
                }
            }
        };
        for i in 0..self.betas.len() {
            for j in 0..self.alphas.len() {
                if i + 1 < self.betas.len() {
                    add(self.label(i, j), self.label(i + 1, j));
                }
                if j + 1 < self.alphas.len() {
                    add(self.label(i, j), self.label(i, j + 1));
                }
            }
        }
        out.sort();
        out
    }

    /// Distinct labels in the 3×3 block around a cell.
    pub fn neighbourhood_labels(&self, beta_index: usize, alpha_index: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for i in beta_index.saturating_sub(1)..=(beta_index + 1).min(self.betas.len() - 1) {
            for j in alpha_index.saturating_sub(1)..=(alpha_index + 1).min(self.alphas.len() - 1) {
                let l = self.label(i, j);
                if !out.iter().any(|x| x == l) {
                    out.push(l.to_string());
                }
            }
        }
        out.sort();
        out
    }

    /// Cell nearest to `(alpha, beta)` as `(beta_index, alpha_index)`.
    pub fn nearest_cell(&self, alpha: f64, beta: f64) -> (usize, usize) {
        let nearest = |axis: &[f64], x: f64| {
            (0..axis.len()).min_by(|&p, &q| (axis[p] - x).abs().total_cmp(&(axis[q] - x).abs())).unwrap_or(0)
        };
        (nearest(&self.betas, beta), nearest(&self.alphas, alpha))
    }
}

/// Cells compared by [`agreement`] and how many of them matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Agreement {
    pub compared: usize,
    pub agreed: usize,
}

impl Agreement {
    pub fn fraction(&self) -> f64 {
        if self.compared == 0 {
            1.0
        } else {
            self.agreed as f64 / self.compared as f64
        }
    }
}

/// Compares a numeric map against an analytic one on the cells whose
/// analytic label is determinate and shared by all neighbours.
pub fn agreement(analytic: &RegimeMap, numeric: &RegimeMap) -> Result<Agreement> {
    if analytic.alphas != numeric.alphas || analytic.betas != numeric.betas {
        return Err(Error::GridMismatch);
    }
    let mut a = Agreement { compared: 0, agreed: 0 };
    for i in 0..analytic.betas.len() {
        for j in 0..analytic.alphas.len() {
            let l = analytic.label(i, j);
            if l == INDETERMINATE || !analytic.is_interior(i, j) {
                continue;
            }
            a.compared += 1;
            a.agreed += usize::from(numeric.label(i, j) == l);
        }
    }
    Ok(a)
}

/// Closed-form regime label, or [`INDETERMINATE`] where none is known.
pub fn analytic_label(shape: &ShapeSpec, p: RegParams) -> &'static str {
    classify(shape, p).map_or(INDETERMINATE, |r| r.label())
}

/// Regime label read off the structure of a solution for `shape` data.
///
/// Only the left half is segmented, since minimisers for the canonical
/// shapes inherit their symmetry about `L`; the jump test looks at the node
/// at the midpoint. Step shapes: a jump with one or two slopes gives NP1J or
/// NP2J, no jump with one or two slopes gives NP1C or NP2C. Hat: a single
/// flat segment is C, a single sloped one A; three segments are CEC when the
/// outer two are flat and AEA otherwise.
pub fn structure_label(kind: ShapeKind, f: &Signal, u: &Signal) -> Result<&'static str> {
    f.ensure_same_grid(u)?;
    let g = *u.grid();
    let n = g.n();
    if n % 2 != 0 || n < 8 {
        return Err(Error::InvalidGrid(alloc::format!("structure labels need an even n ≥ 8, got {n}")));
    }
    let tols = SegmentTolerances::for_data(f);
    let half = crate::Grid::new(g.a(), g.center(), n / 2)?;
    let left = Signal::new(half, u.values()[..n / 2].to_vec())?;
    let s = segment_affine(&left, tols.slope_tol, tols.jump_tol)?;
    if !s.jumps.is_empty() {
        return Ok(UNCLASSIFIED);
    }
    let last = s.segments[s.segments.len() - 1];
    let dv = u.values()[n / 2] - u.values()[n / 2 - 1];
    let jump = dv.abs() > tols.jump_tol + last.slope.abs() * g.delta();
    let flat = |seg: &Segment| seg.slope.abs() <= 10.0 * tols.slope_tol;
    let label = match (kind, jump, s.segments.len()) {
        (ShapeKind::Step | ShapeKind::AffineStep, true, 1) => "NP1J",
        (ShapeKind::Step | ShapeKind::AffineStep, true, 2) => "NP2J",
        (ShapeKind::Step | ShapeKind::AffineStep, false, 1) => "NP1C",
        (ShapeKind::Step | ShapeKind::AffineStep, false, 2) => "NP2C",
        (ShapeKind::Hat, false, 1) if flat(&s.segments[0]) => "C",
        (ShapeKind::Hat, false, 1) => "A",
        (ShapeKind::Hat, false, 3) if flat(&s.segments[0]) && flat(&s.segments[2]) => "CEC",
        (ShapeKind::Hat, false, 3) => "AEA",
        _ => UNCLASSIFIED,
    };
    Ok(label)
}

/// Solves on `settings.n` cells and labels the structure of the minimiser.
pub fn numeric_label(shape: &ShapeSpec, p: RegParams, settings: &NumericSettings) -> Result<&'static str> {
    let f = sample_shape(shape, shape.grid(settings.n)?)?;
    let sol = solve_tgv2(&f, p, settings.solver)?;
    if !sol.converged {
        return Ok(UNCONVERGED);
    }
    structure_label(shape.kind, &f, &sol.u)
}

/// Label of one sweep cell.
pub fn sweep_cell(shape: &ShapeSpec, p: RegParams, mode: SweepMode, settings: &NumericSettings) -> Result<&'static str> {
    match mode {
        SweepMode::Analytic => Ok(analytic_label(shape, p)),
        SweepMode::Numeric => numeric_label(shape, p, settings),
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() || axis.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(alloc::format!("{name} axis must be non-empty and positive")));
    }
    Ok(())
}

/// [`sweep_regimes_with`] using [`NumericSettings::default`].
pub fn sweep_regimes(shape: &ShapeSpec, alphas: &[f64], betas: &[f64], mode: SweepMode) -> Result<RegimeMap> {
    sweep_regimes_with(shape, alphas, betas, mode, &NumericSettings::default())
}

/// Labels every `(α, β)` pair of the two axes, one cell at a time.
pub fn sweep_regimes_with(
    shape: &ShapeSpec,
    alphas: &[f64],
    betas: &[f64],
    mode: SweepMode,
    settings: &NumericSettings,
) -> Result<RegimeMap> {
    let shape = shape.validated()?;
    check_axis("alpha", alphas)?;
    check_axis("beta", betas)?;
    let mut labels = Vec::with_capacity(betas.len());
    for &b in betas {
        let mut row = Vec::with_capacity(alphas.len());
        for &a in alphas {
            row.push(sweep_cell(&shape, RegParams::new(a, b)?, mode, settings)?.to_string());
        }
        labels.push(row);
    }
    RegimeMap::new(alphas.to_vec(), betas.to_vec(), labels, mode)
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests;
