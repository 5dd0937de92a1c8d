//! Midpoint grids, sampled signals and the canonical data shapes.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;
use crate::{Error, Result};

/// Uniform cell-centred grid on `(a, b)`.
///
/// Sample `i` sits at the midpoint `a + (i + ½)δ` of cell `i`, where
/// `δ = (b − a)/n`. Node `j` sits at `a + jδ`, `j = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite endpoints ({a}, {b})")));
        }
        if b <= a {
            return Err(Error::InvalidGrid(format!("empty interval ({a}, {b})")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Midpoint of cell `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.delta()
    }

    /// Node `j`, the left edge of cell `j`.
    pub fn node(&self, j: usize) -> f64 {
        self.a + j as f64 * self.delta()
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Grid whose midpoints are the `n − 1` interior nodes of `self`.
    ///
    /// Fields such as `w` and `Du` live there. Needs `n ≥ 3`.
    pub fn node_grid(&self) -> Result<Grid> {
        let d = self.delta();
        Grid::new(self.a + 0.5 * d, self.b - 0.5 * d, self.n - 1)
    }

    /// Grid whose midpoints are all `n + 1` nodes of `self`, endpoints
    /// included.
    pub fn all_nodes_grid(&self) -> Result<Grid> {
        let d = self.delta();
        Grid::new(self.a - 0.5 * d, self.b + 0.5 * d, self.n + 1)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Same grid up to rounding of the endpoints.
    pub fn matches(&self, other: &Grid) -> bool {
        let tol = 1e-12 * (1.0 + self.a.abs().max(self.b.abs()));
        self.n == other.n && (self.a - other.a).abs() <= tol && (self.b - other.b).abs() <= tol
    }
}

/// Values sampled at the midpoints of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Signal {
    grid: Grid,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: alloc::vec![0.0; grid.n()] }
    }

    /// Samples `f` at every midpoint.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.midpoints().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a signal on the same grid with `g` applied pointwise to `(x, value)`.
    pub fn map(&self, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.values.iter().enumerate().map(|(i, &v)| g(self.grid.x(i), v)).collect();
        Self::new(self.grid, values)
    }

    pub fn ensure_same_grid(&self, other: &Signal) -> Result<()> {
        if self.grid.matches(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `max |selfᵢ − otherᵢ|`.
    pub fn sup_distance(&self, other: &Signal) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(math::sup_norm(self.values.iter().zip(&other.values).map(|(a, b)| a - b)))
    }

    /// `sqrt(δ Σ (selfᵢ − otherᵢ)²)`.
    pub fn l2_distance(&self, other: &Signal) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(math::sqrt(self.grid.delta() * s))
    }

    /// Mirror image about the grid centre.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid, values }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `x ↦ slope·x + intercept` in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AffineFn {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineFn {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        if !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "affine coefficients must be finite, got ({slope}, {intercept})"
            )));
        }
        Ok(Self { slope, intercept })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn sample(&self, grid: Grid) -> Signal {
        Signal { grid, values: grid.midpoints().map(|x| self.eval(x)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ShapeKind {
    /// `0` on `(0, L)`, `h` on `(L, 2L)`.
    Step,
    /// `λ(x − L)` plus `h` on `(L, 2L)`.
    AffineStep,
    /// `λ|x − L| − λL`.
    Hat,
}

impl ShapeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Step => "step",
            ShapeKind::AffineStep => "affine-step",
            ShapeKind::Hat => "hat",
        }
    }
}

/// One of the three canonical data functions on `(0, 2L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Half-length `L` of the domain `(0, 2L)`.
    pub half_length: f64,
    /// Jump height `h` (step shapes only).
    pub height: f64,
    /// Gradient `λ` of the affine step, or slope of the hat.
    pub lambda: f64,
}

impl ShapeSpec {
    pub fn step(half_length: f64, height: f64) -> Result<Self> {
        Self { kind: ShapeKind::Step, half_length, height, lambda: 0.0 }.validated()
    }

    pub fn affine_step(half_length: f64, height: f64, lambda: f64) -> Result<Self> {
        Self { kind: ShapeKind::AffineStep, half_length, height, lambda }.validated()
    }

    pub fn hat(half_length: f64, lambda: f64) -> Result<Self> {
        Self { kind: ShapeKind::Hat, half_length, height: 0.0, lambda }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return bad("L must be positive and finite, got L", self.half_length);
        }
        match self.kind {
            ShapeKind::Step | ShapeKind::AffineStep => {
                if !(self.height > 0.0 && self.height.is_finite()) {
                    return bad("h must be positive and finite, got h", self.height);
                }
                if !self.lambda.is_finite() {
                    return bad("lambda must be finite, got lambda", self.lambda);
                }
            }
            ShapeKind::Hat => {
                if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                    return bad("the hat slope must be positive, got lambda", self.lambda);
                }
            }
        }
        Ok(self)
    }

    /// Domain `(0, 2L)`.
    pub fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * self.half_length)
    }

    /// Midpoint grid with `n` cells on the shape's domain.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        let (a, b) = self.domain();
        Grid::new(a, b, n)
    }

    pub fn has_jump(&self) -> bool {
        !matches!(self.kind, ShapeKind::Hat)
    }

    /// Pointwise value. The step shapes take the right limit at `x = L`.
    pub fn eval(&self, x: f64) -> f64 {
        let l = self.half_length;
        match self.kind {
            ShapeKind::Step => {
                if x < l {
                    0.0
                } else {
                    self.height
                }
            }
            ShapeKind::AffineStep => {
                let jump = if x < l { 0.0 } else { self.height };
                self.lambda * (x - l) + jump
            }
            ShapeKind::Hat => self.lambda * (x - l).abs() - self.lambda * l,
        }
    }
}

/// Evaluates `spec` at the midpoints of `grid`.
///
/// The grid has to span `(0, 2L)`, and for the step shapes no midpoint may
/// land on the discontinuity `x = L` (true whenever `n` is even).
pub fn sample_shape(spec: &ShapeSpec, grid: Grid) -> Result<Signal> {
    let spec = spec.validated()?;
    let (a, b) = spec.domain();
    let tol = 1e-12 * b.max(1.0);
    if (grid.a() - a).abs() > tol || (grid.b() - b).abs() > tol {
        return Err(Error::ShapeGridMismatch(format!(
            "grid ({}, {}) vs domain ({a}, {b})",
            grid.a(),
            grid.b()
        )));
    }
    if spec.has_jump() {
        let l = spec.half_length;
        if grid.midpoints().any(|x| (x - l).abs() <= tol) {
            return Err(Error::ShapeGridMismatch(format!(
                "a midpoint lands on the discontinuity x = {l}; use an even cell count"
            )));
        }
    }
    Signal::from_fn(grid, |x| spec.eval(x))
}

/// Adds i.i.d. `N(0, σ²)` noise.
///
/// The generator is ChaCha20 seeded through `SeedableRng::seed_from_u64`;
/// uniform variates take the top 53 bits of each `u64` and normals come from
/// the Box–Muller transform evaluated with `libm`, so the output is
/// bit-reproducible across platforms.
pub fn add_gaussian_noise(s: &Signal, sigma: f64, seed: u64) -> Result<Signal> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(s.clone());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut normals = GaussianStream::default();
    let values = s.values().iter().map(|v| v + sigma * normals.next(&mut rng)).collect();
    Signal::new(*s.grid(), values)
}

#[derive(Default)]
struct GaussianStream {
    spare: Option<f64>,
}

impl GaussianStream {
    fn next(&mut self, rng: &mut impl RngCore) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
        let r = math::sqrt(-2.0 * math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * math::sin(theta));
        r * math::cos(theta)
    }
}

/// `(δ Σ vᵢ, δ Σ xᵢ vᵢ)` with midpoint abscissae.
pub fn moments(s: &Signal) -> (f64, f64) {
    let g = s.grid();
    let mut mass = 0.0;
    let mut first = 0.0;
    for (i, &v) in s.values().iter().enumerate() {
        mass += v;
        first += g.x(i) * v;
    }
    (g.delta() * mass, g.delta() * first)
}

/// Least-squares affine fit under the midpoint-rule inner product.
pub fn linear_regression(s: &Signal) -> AffineFn {
    let g = s.grid();
    let n = g.n() as f64;
    let xm = g.center();
    let ym = s.values().iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &y) in s.values().iter().enumerate() {
        let dx = g.x(i) - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    AffineFn { slope, intercept: ym - slope * xm }
}
