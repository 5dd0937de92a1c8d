//! Closed-form minimisers for the canonical data shapes.
//!
//! For the step `f = h·[x > L]` on `(0, 2L)` the minimiser falls into one of
//! four families, named after the sign pattern of `u` on `(0, L)`, its number
//! of affine parts and whether it jumps at `L`:
//!
//! | label | `(0, L)` structure                        |
//! |-------|-------------------------------------------|
//! | NP1J  | one affine part, jump at `L`              |
//! | NP2J  | two affine parts, jump at `L`             |
//! | NP1C  | one affine part, continuous (regression)  |
//! | NP2C  | two affine parts, continuous              |
//!
//! A small wedge of the `(α, β)` plane is not covered by any known closed
//! form; [`classify_step`] reports it as [`RegimeF::IndeterminateAnalytic`].
//!
//! For the hat `λ|x − L| − λL` the families are CEC (constant, equal to the
//! data, constant), AEA (affine, equal, affine), C (constant) and A (affine
//! on each half).
//!
//! Every [`ExactSolution`] carries the predual certificate `v`, obtained by
//! integrating `f − u` twice from the left endpoint.

mod poly;
mod roots;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::signal::{linear_regression, Grid, ShapeKind, ShapeSpec, Signal};
use crate::{Error, Result};

pub use poly::{Cubic, PiecewisePoly};

/// Regularisation weights: `α` on `‖Du − w‖`, `β` on `‖Dw‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegParams {
    pub alpha: f64,
    pub beta: f64,
}

impl RegParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Self { alpha, beta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(self)
    }
}

/// Solution family for step data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RegimeF {
    NP1J,
    NP2J,
    NP1C,
    NP2C,
    IndeterminateAnalytic,
}

/// Solution family for hat data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RegimeH {
    CEC,
    AEA,
    C,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Regime {
    Step(RegimeF),
    Hat(RegimeH),
}

impl RegimeF {
    pub fn label(&self) -> &'static str {
        match self {
            RegimeF::NP1J => "NP1J",
            RegimeF::NP2J => "NP2J",
            RegimeF::NP1C => "NP1C",
            RegimeF::NP2C => "NP2C",
            RegimeF::IndeterminateAnalytic => "indeterminate",
        }
    }
}

impl RegimeH {
    pub fn label(&self) -> &'static str {
        match self {
            RegimeH::CEC => "CEC",
            RegimeH::AEA => "AEA",
            RegimeH::C => "C",
            RegimeH::A => "A",
        }
    }
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Step(r) => r.label(),
            Regime::Hat(r) => r.label(),
        }
    }
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// Named parameters of a closed form. Unused entries stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InternalPoints {
    /// Zero crossing of `u` (step) or end of the first affine part (hat).
    pub x1: Option<f64>,
    /// Reserved for families that never occur as minimisers.
    pub x1_tilde: Option<f64>,
    /// Kink of `u` on `(0, L)`.
    pub x2: Option<f64>,
    pub ell1: Option<f64>,
    pub ell2: Option<f64>,
    /// Reserved for families that never occur as minimisers.
    pub ell3: Option<f64>,
    /// `3β/α`.
    pub gamma: Option<f64>,
    /// Slope magnitude of the affine parts of the hat solution.
    pub mu: Option<f64>,
    pub t: Option<f64>,
}

impl InternalPoints {
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, f64)> {
        [
            ("x1", self.x1),
            ("x1_tilde", self.x1_tilde),
            ("x2", self.x2),
            ("ell1", self.ell1),
            ("ell2", self.ell2),
            ("ell3", self.ell3),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("t", self.t),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
    }
}

/// Exact minimiser `(u, w)` with its predual certificate `v`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExactSolution {
    pub shape: ShapeSpec,
    pub params: RegParams,
    pub regime: Regime,
    pub u: PiecewisePoly,
    pub w: PiecewisePoly,
    pub v: PiecewisePoly,
    pub internal_points: InternalPoints,
}

impl ExactSolution {
    fn assemble(
        shape: ShapeSpec,
        params: RegParams,
        regime: Regime,
        u: PiecewisePoly,
        w: PiecewisePoly,
        internal_points: InternalPoints,
    ) -> Result<Self> {
        let u = u.simplified(1e-13);
        let w = w.simplified(1e-13);
        let v = data_poly(&shape).sub(&u)?.antiderivative().antiderivative();
        Ok(Self { shape, params, regime, u, w, v, internal_points })
    }

    /// Data `f` as a piecewise polynomial.
    pub fn data(&self) -> PiecewisePoly {
        data_poly(&self.shape)
    }

    /// `u` at the midpoints of `grid`.
    pub fn sample_u(&self, grid: Grid) -> Result<Signal> {
        Signal::from_fn(grid, |x| self.u.eval(x))
    }

    /// `w` on the interior nodes of `grid`, averaged over the dual cell
    /// between the two neighbouring midpoints.
    pub fn sample_w(&self, grid: Grid) -> Vec<f64> {
        let big_w = self.w.antiderivative();
        let d = grid.delta();
        (1..grid.n()).map(|j| (big_w.eval(grid.x(j)) - big_w.eval(grid.x(j - 1))) / d).collect()
    }

    pub fn sample_v(&self, grid: Grid) -> Result<Signal> {
        Signal::from_fn(grid, |x| self.v.eval(x))
    }
}

fn data_poly(shape: &ShapeSpec) -> PiecewisePoly {
    let l = shape.half_length;
    let (h, lam) = (shape.height, shape.lambda);
    let bps = vec![0.0, l, 2.0 * l];
    let global = match shape.kind {
        ShapeKind::Step => [[0.0; 4], [h, 0.0, 0.0, 0.0]],
        ShapeKind::AffineStep => [[-lam * l, lam, 0.0, 0.0], [h - lam * l, lam, 0.0, 0.0]],
        ShapeKind::Hat => [[0.0, -lam, 0.0, 0.0], [-2.0 * lam * l, lam, 0.0, 0.0]],
    };
    PiecewisePoly::from_global(bps, &global).expect("valid shape")
}

/// Local coefficients of `slope·x + intercept` on a piece starting at `x0`.
fn affine(x0: f64, slope: f64, intercept: f64) -> Cubic {
    [slope * x0 + intercept, slope, 0.0, 0.0]
}

/// Piecewise affine function with the given `(slope, intercept)` parts.
fn affine_left(bps: &[f64], parts: &[(f64, f64)]) -> PiecewisePoly {
    let pieces = parts
        .iter()
        .zip(bps.windows(2))
        .map(|(&(s, c), w)| affine(w[0], s, c))
        .collect();
    PiecewisePoly::new(bps.to_vec(), pieces).expect("increasing breakpoints")
}

fn check_lengths(half_length: f64, h: f64) -> Result<()> {
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {half_length}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// A 4×4 spread of `(α, β)` inside every regime of the unit shapes
/// (`L = h = 1`, `λ = 1` for the hat), labelled with the regime it lies in.
///
/// The affine step shares the step picks, since adding `λ(x − L)` to the data
/// leaves the regime unchanged.
pub fn canonical_picks(kind: ShapeKind) -> Vec<(Regime, RegParams)> {
    let rp = |a: f64, b: f64| RegParams { alpha: a, beta: b };
    let mut out = Vec::new();
    match kind {
        ShapeKind::Step | ShapeKind::AffineStep => {
            let mut push = |r: RegimeF, a: f64, b: f64| out.push((Regime::Step(r), rp(a, b)));
            for a in [0.02, 0.05, 0.08, 0.11] {
                for k in [1.0, 1.5, 3.0, 10.0] {
                    push(RegimeF::NP1J, a, 4.0 * a / 27.0 * k);
                }
            }
            for a in [0.125, 0.2, 0.5, 1.0] {
                for b in [1.0 / 54.0, 0.05, 0.2, 1.0] {
                    push(RegimeF::NP1C, a, b);
                }
            }
            for a in [0.05, 0.1, 0.15, 0.3] {
                for k in [0.1, 0.3, 0.6, 0.95] {
                    let top = (32.0 * a * a / 27.0f64).min(1.0 / 54.0);
                    push(RegimeF::NP2C, a, top * k);
                }
            }
            for a in [0.02, 0.05, 0.08, 0.1] {
                for k in [0.0, 0.3, 0.6, 0.9] {
                    let lo = 36.0 * a * a / 27.0;
                    let hi = 4.0 * a / 27.0;
                    push(RegimeF::NP2J, a, lo + (hi - lo) * k);
                }
            }
        }
        ShapeKind::Hat => {
            let mut push = |r: RegimeH, a: f64, b: f64| out.push((Regime::Hat(r), rp(a, b)));
            let tail = |a: f64| a - (2.0 * a / 3.0) * sqrt(2.0 * a);
            for a in [0.01, 0.04, 0.08, 0.12] {
                for k in [1.0, 1.2, 2.0, 5.0] {
                    push(RegimeH::CEC, a, tail(a) * k);
                }
                for k in [0.05, 0.35, 0.65, 0.95] {
                    let lo = 2.0 * a / 3.0;
                    push(RegimeH::AEA, a, lo + (tail(a) - lo) * k + 1e-12);
                }
            }
            for a in [0.125, 0.2, 0.5, 2.0] {
                for b in [1.0 / 12.0, 0.1, 0.5, 3.0] {
                    push(RegimeH::C, a, b);
                }
            }
            for a in [0.01, 0.05, 0.125, 0.5] {
                for k in [0.05, 0.35, 0.65, 0.95] {
                    let top = (2.0 * a / 3.0f64).min(1.0 / 12.0);
                    push(RegimeH::A, a, top * k);
                }
            }
        }
    }
    out
}

/// Regime of the step `h·[x > L]` on `(0, 2L)`.
///
/// Boundary ties: NP1J owns `β = 4Lα/27`, NP1C owns `α = hL/8` and
/// `β = hL²/54`, NP2C owns `β = 32α²/(27h)` and NP2J owns `β = 36α²/(27h)`.
pub fn classify_step(half_length: f64, h: f64, p: RegParams) -> Result<RegimeF> {
    check_lengths(half_length, h)?;
    let p = p.validated()?;
    let (l, a, b) = (half_length, p.alpha, p.beta);
    let regime = if b >= 4.0 * l * a / 27.0 && a < h * l / 8.0 {
        RegimeF::NP1J
    } else if a >= h * l / 8.0 && b >= h * l * l / 54.0 {
        RegimeF::NP1C
    } else if b <= 32.0 * a * a / (27.0 * h) && b < h * l * l / 54.0 {
        RegimeF::NP2C
    } else if b < 4.0 * l * a / 27.0 && b >= 36.0 * a * a / (27.0 * h) {
        RegimeF::NP2J
    } else {
        RegimeF::IndeterminateAnalytic
    };
    Ok(regime)
}

/// `φ(ℓ₂) = sqrt(γℓ₂²/(γ − ℓ₂)) + ℓ₂ − L`.
pub fn phi_np2j(gamma: f64, half_length: f64, ell2: f64) -> f64 {
    sqrt(gamma * ell2 * ell2 / (gamma - ell2)) + ell2 - half_length
}

/// Root `ℓ₂ ∈ [3γ/4, γ)` of [`phi_np2j`], defined for `0 < γ ≤ 4L/9`.
///
/// The search runs in `s = ln(γ − ℓ₂)`, where the problem stays well
/// conditioned even for tiny `γ`.
pub fn solve_phi_np2j(gamma: f64, half_length: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need gamma > 0 and L > 0, got gamma = {gamma}, L = {half_length}"
        )));
    }
    let l = half_length;
    let sg = sqrt(gamma);
    // with e = γ − ℓ₂: ψ(e) = (γ − e)(sqrt(γ/e) + 1) − L, decreasing in e
    let psi = |s: f64| {
        let e = libm::exp(s);
        let r = sg / sqrt(e);
        let val = (gamma - e) * (r + 1.0) - l;
        let de = -(r + 1.0) - (gamma - e) * r / (2.0 * e);
        (val, e * de)
    };
    let hi = libm::log(0.25 * gamma);
    let (at_hi, _) = psi(hi);
    if at_hi > 1e-12 * l {
        return Err(Error::NoSignChange { lo: 0.75 * gamma, hi: gamma });
    }
    if at_hi >= -1e-12 * l {
        return Ok(0.75 * gamma);
    }
    let mut lo = hi;
    while psi(lo).0 <= 0.0 {
        lo -= 4.0;
        if lo < -700.0 {
            return Err(Error::NoSignChange { lo: 0.75 * gamma, hi: gamma });
        }
    }
    let s = roots::bracketed_root(psi, lo, hi, 1e-13 * l)?;
    let ell2 = gamma - libm::exp(s);
    Ok(ell2.clamp(0.75 * gamma, gamma))
}

/// `ψ(ℓ₁) = ℓ₁ + sqrt(12β/(h + 24β/ℓ₁²)) − L`.
pub fn phi_np2c(beta: f64, h: f64, half_length: f64, ell1: f64) -> f64 {
    ell1 + sqrt(12.0 * beta / (h + 24.0 * beta / (ell1 * ell1))) - half_length
}

/// Root `(ℓ₁, ℓ₂ = L − ℓ₁)` of [`phi_np2c`] with `ℓ₁ ∈ [2L/3, L)`, defined
/// for `0 < β ≤ hL²/54`.
pub fn solve_phi_np2c(beta: f64, h: f64, half_length: f64) -> Result<(f64, f64)> {
    check_lengths(half_length, h)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let l = half_length;
    let f = |x: f64| {
        let den = h + 24.0 * beta / (x * x);
        let g = 12.0 * beta / den;
        let dg = 576.0 * beta * beta / (x * x * x * den * den);
        (x + sqrt(g) - l, 1.0 + dg / (2.0 * sqrt(g)))
    };
    let lo = 2.0 * l / 3.0;
    let (at_lo, _) = f(lo);
    let ell1 = if at_lo.abs() <= 1e-12 * l {
        lo
    } else if at_lo > 0.0 {
        return Err(Error::NoSignChange { lo, hi: l });
    } else {
        roots::bracketed_root(f, lo, l, 1e-13 * l)?
    };
    Ok((ell1, l - ell1))
}

/// Extends fields on `(0, L)` to `(0, 2L)` by `u(x) = h − u(2L − x)` and an
/// even `w`.
fn mirror_step(u: PiecewisePoly, w: PiecewisePoly, l: f64, h: f64) -> Result<(PiecewisePoly, PiecewisePoly)> {
    let u_right = u.reflect(l).scale(-1.0).add_affine(0.0, h);
    let w_right = w.reflect(l);
    Ok((u.concat(&u_right)?, w.concat(&w_right)?))
}

/// Closed-form minimiser for the step `h·[x > L]` on `(0, 2L)`.
pub fn exact_step(half_length: f64, h: f64, p: RegParams) -> Result<ExactSolution> {
    let regime = classify_step(half_length, h, p)?;
    let (l, a, b) = (half_length, p.alpha, p.beta);
    let shape = ShapeSpec::step(l, h)?;
    let mut pts = InternalPoints::default();
    let (u, w) = match regime {
        RegimeF::IndeterminateAnalytic => return Err(Error::Indeterminate { alpha: a, beta: b }),
        RegimeF::NP1J => {
            let s = 6.0 * a / (l * l);
            pts.x1 = Some(l / 3.0);
            let u = affine_left(&[0.0, l], &[(s, -2.0 * a / l)]);
            mirror_step(u, PiecewisePoly::constant(0.0, l, s), l, h)?
        }
        RegimeF::NP1C => {
            let s = 3.0 * h / (4.0 * l);
            pts.x1 = Some(l / 3.0);
            let u = affine_left(&[0.0, 2.0 * l], &[(s, -h / 4.0)]);
            (u, PiecewisePoly::constant(0.0, 2.0 * l, s))
        }
        RegimeF::NP2J => {
            let gamma = 3.0 * b / a;
            let ell2 = solve_phi_np2j(gamma, l)?;
            let ell1 = l - ell2;
            let s1 = 12.0 * b / (ell1 * ell1 * ell1);
            let c1 = 6.0 * b / (ell1 * ell1);
            let big_a = 2.0 * b / (ell1 * ell1 * ell2) - a / (3.0 * ell2 * ell2);
            let s2 = -6.0 * big_a;
            pts = InternalPoints {
                x1: Some(0.5 * ell1),
                x2: Some(ell1),
                ell1: Some(ell1),
                ell2: Some(ell2),
                gamma: Some(gamma),
                ..pts
            };
            let u = affine_left(&[0.0, ell1, l], &[(s1, -c1), (s2, c1 - s2 * ell1)]);
            let w = affine_left(&[0.0, ell1, l], &[(0.0, s1), (0.0, s2)]);
            mirror_step(u, w, l, h)?
        }
        RegimeF::NP2C => {
            let (ell1, ell2) = solve_phi_np2c(b, h, l)?;
            let s1 = 12.0 * b / (ell1 * ell1 * ell1);
            let c1 = 6.0 * b / (ell1 * ell1);
            let a3 = (c1 - 0.5 * h) / (6.0 * ell2);
            let s2 = -6.0 * a3;
            pts = InternalPoints {
                x1: Some(0.5 * ell1),
                x2: Some(ell1),
                ell1: Some(ell1),
                ell2: Some(ell2),
                ..pts
            };
            let u = affine_left(&[0.0, ell1, l], &[(s1, -c1), (s2, c1 - s2 * ell1)]);
            let w = affine_left(&[0.0, ell1, l], &[(0.0, s1), (0.0, s2)]);
            mirror_step(u, w, l, h)?
        }
    };
    ExactSolution::assemble(shape, p, Regime::Step(regime), u, w, pts)
}

/// Closed-form minimiser for the affine step `λ(x − L) + h·[x > L]`.
///
/// It is the step solution shifted by `λ(x − L)`, with `w` shifted by `λ`
/// and the same certificate.
pub fn exact_affine_step(half_length: f64, h: f64, lambda: f64, p: RegParams) -> Result<ExactSolution> {
    let shape = ShapeSpec::affine_step(half_length, h, lambda)?;
    let base = exact_step(half_length, h, p)?;
    let u = base.u.add_affine(lambda, -lambda * half_length);
    let w = base.w.add_affine(0.0, lambda);
    let v = base.v;
    Ok(ExactSolution { shape, params: p, regime: base.regime, u, w, v, internal_points: base.internal_points })
}

/// Regime of the hat `λ|x − L| − λL` on `(0, 2L)`.
pub fn classify_hat(half_length: f64, lambda: f64, p: RegParams) -> Result<RegimeH> {
    let shape = ShapeSpec::hat(half_length, lambda)?;
    let p = p.validated()?;
    let (l, lam, a, b) = (shape.half_length, shape.lambda, p.alpha, p.beta);
    let tail = a * l - (2.0 * a / 3.0) * sqrt(2.0 * a / lam);
    let matches = [
        (RegimeH::CEC, a < lam * l * l / 8.0 && b >= tail),
        (RegimeH::AEA, b > 2.0 * l * a / 3.0 && b < tail),
        (RegimeH::C, b >= lam * l * l * l / 12.0 && a >= lam * l * l / 8.0),
        (RegimeH::A, b < lam * l * l * l / 12.0 && b <= 2.0 * l * a / 3.0),
    ];
    let mut hits = matches.iter().filter(|(_, hit)| *hit).map(|(r, _)| *r);
    match (hits.next(), hits.next()) {
        (Some(r), None) => Ok(r),
        _ => Err(Error::Inconsistent(format!(
            "hat regime conditions are not exclusive at L = {l}, lambda = {lam}, alpha = {a}, beta = {b}"
        ))),
    }
}

/// Closed-form minimiser for the hat `λ|x − L| − λL` on `(0, 2L)`.
pub fn exact_hat(half_length: f64, lambda: f64, p: RegParams) -> Result<ExactSolution> {
    let regime = classify_hat(half_length, lambda, p)?;
    let shape = ShapeSpec::hat(half_length, lambda)?;
    let (l, lam, a, b) = (half_length, lambda, p.alpha, p.beta);
    let mut pts = InternalPoints::default();
    let (u_left, w_left) = match regime {
        RegimeH::CEC => {
            let x1 = sqrt(2.0 * a / lam);
            pts.x1 = Some(x1);
            let u = affine_left(
                &[0.0, x1, l - x1, l],
                &[(0.0, -lam * x1), (-lam, 0.0), (0.0, -lam * l + lam * x1)],
            );
            (u, PiecewisePoly::constant(0.0, l, 0.0))
        }
        RegimeH::AEA => {
            let d = l - b / a;
            let mu = lam - 8.0 * a / (9.0 * d * d);
            let x1 = 1.5 * d;
            let t = (lam - mu) * x1;
            pts = InternalPoints { x1: Some(x1), mu: Some(mu), t: Some(t), ..pts };
            let u = affine_left(
                &[0.0, x1, l - x1, l],
                &[(-mu, -t), (-lam, 0.0), (-mu, -(lam - mu) * l + t)],
            );
            (u, PiecewisePoly::constant(0.0, l, -mu))
        }
        RegimeH::C => {
            pts.t = Some(0.5 * lam * l);
            let u = PiecewisePoly::constant(0.0, l, -0.5 * lam * l);
            (u, PiecewisePoly::constant(0.0, l, 0.0))
        }
        RegimeH::A => {
            let mu = lam - 12.0 * b / (l * l * l);
            let t = 6.0 * b / (l * l);
            pts = InternalPoints { mu: Some(mu), t: Some(t), ..pts };
            let u = affine_left(&[0.0, l], &[(-mu, -t)]);
            (u, PiecewisePoly::constant(0.0, l, -mu))
        }
    };
    let u = u_left.concat(&u_left.reflect(l))?;
    let w = w_left.concat(&w_left.reflect(l).scale(-1.0))?;
    ExactSolution::assemble(shape, p, Regime::Hat(regime), u, w, pts)
}

/// Exact solution for any canonical shape.
pub fn exact_for(shape: &ShapeSpec, p: RegParams) -> Result<ExactSolution> {
    let s = shape.validated()?;
    match s.kind {
        ShapeKind::Step => exact_step(s.half_length, s.height, p),
        ShapeKind::AffineStep => exact_affine_step(s.half_length, s.height, s.lambda, p),
        ShapeKind::Hat => exact_hat(s.half_length, s.lambda, p),
    }
}

/// Regime label for any canonical shape.
pub fn classify(shape: &ShapeSpec, p: RegParams) -> Result<Regime> {
    let s = shape.validated()?;
    match s.kind {
        ShapeKind::Step | ShapeKind::AffineStep => {
            classify_step(s.half_length, s.height, p).map(Regime::Step)
        }
        ShapeKind::Hat => classify_hat(s.half_length, s.lambda, p).map(Regime::Hat),
    }
}

/// Parameter thresholds above which the minimiser is the affine fit `f⋆`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Thresholds {
    pub alpha: f64,
    pub beta: f64,
}

impl Thresholds {
    /// Whether `p` dominates both thresholds.
    pub fn covers(&self, p: RegParams) -> bool {
        p.alpha >= self.alpha && p.beta >= self.beta
    }
}

/// `((ℓ/2)·r, (ℓ²/4)·r)` with `ℓ = b − a` and `r = max |f − f⋆|` on the grid.
///
/// Any `(α, β)` at or above both values yields `u = f⋆`, the least-squares
/// affine fit of `f`.
pub fn regression_thresholds(f: &Signal) -> Thresholds {
    let fit = linear_regression(f);
    let g = f.grid();
    let r = crate::math::sup_norm(f.values().iter().enumerate().map(|(i, &v)| v - fit.eval(g.x(i))));
    let ell = g.length();
    Thresholds { alpha: 0.5 * ell * r, beta: 0.25 * ell * ell * r }
}

/// Ratio `β/α` above which TGV² and `α`-weighted TV coincide for data even
/// about the grid centre: the half-length `(b − a)/2`.
pub fn tv_equivalence_threshold(grid: &Grid) -> f64 {
    0.5 * grid.length()
}
