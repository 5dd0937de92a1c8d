use alloc::vec::Vec;

use crate::{Error, Result};

/// Cubic coefficients in ascending powers of a local variable `t`.
pub type Cubic = [f64; 4];

fn eval_cubic(c: &Cubic, t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

fn deriv_cubic(c: &Cubic) -> Cubic {
    [c[1], 2.0 * c[2], 3.0 * c[3], 0.0]
}

/// Re-expands `p(t)` as a polynomial in `t − s`.
fn shift_cubic(c: &Cubic, s: f64) -> Cubic {
    [
        eval_cubic(c, s),
        c[1] + 2.0 * c[2] * s + 3.0 * c[3] * s * s,
        c[2] + 3.0 * c[3] * s,
        c[3],
    ]
}

/// Piecewise polynomial of degree at most three.
///
/// Piece `k` lives on `[x_k, x_{k+1}]` and stores its coefficients in
/// ascending powers of `x − x_k`. Values may jump at interior breakpoints;
/// [`PiecewisePoly::eval`] is right-continuous there.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    pieces: Vec<Cubic>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Cubic>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(Error::Inconsistent(alloc::format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Inconsistent("breakpoints must be strictly increasing".into()));
        }
        if pieces.iter().flatten().chain(&breakpoints).any(|v| !v.is_finite()) {
            return Err(Error::Inconsistent("non-finite polynomial data".into()));
        }
        Ok(Self { breakpoints, pieces })
    }

    /// Builds pieces from coefficients in powers of the global `x`.
    pub fn from_global(breakpoints: Vec<f64>, global: &[Cubic]) -> Result<Self> {
        let pieces = breakpoints.iter().zip(global).map(|(&x0, c)| shift_cubic(c, x0)).collect();
        Self::new(breakpoints, pieces)
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        Self { breakpoints: alloc::vec![a, b], pieces: alloc::vec![[c, 0.0, 0.0, 0.0]] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Cubic] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], self.breakpoints[self.breakpoints.len() - 1])
    }

    /// Index of the piece containing `x`; breakpoints belong to the piece on their right.
    pub fn piece_index(&self, x: f64) -> usize {
        let m = self.pieces.len();
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.clamp(1, m) - 1
    }

    fn eval_piece(&self, k: usize, x: f64) -> f64 {
        eval_cubic(&self.pieces[k], x - self.breakpoints[k])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_piece(self.piece_index(x), x)
    }

    /// Left limit at `x` (the value itself inside a piece).
    pub fn eval_left(&self, x: f64) -> f64 {
        let k = self.piece_index(x);
        if k > 0 && x == self.breakpoints[k] {
            self.eval_piece(k - 1, x)
        } else {
            self.eval_piece(k, x)
        }
    }

    pub fn derivative(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(deriv_cubic).collect(),
        }
    }

    /// Continuous antiderivative vanishing at the left endpoint.
    ///
    /// Pieces must have degree at most two.
    pub fn antiderivative(&self) -> Self {
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (k, c) in self.pieces.iter().enumerate() {
            debug_assert!(c[3] == 0.0, "antiderivative would exceed degree three");
            let p = [acc, c[0], c[1] / 2.0, c[2] / 3.0];
            acc = eval_cubic(&p, self.breakpoints[k + 1] - self.breakpoints[k]);
            pieces.push(p);
        }
        Self { breakpoints: self.breakpoints.clone(), pieces }
    }

    /// `∫ p` over the whole domain.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for (k, c) in self.pieces.iter().enumerate() {
            let d = self.breakpoints[k + 1] - self.breakpoints[k];
            total += d * (c[0] + d * (c[1] / 2.0 + d * (c[2] / 3.0 + d * c[3] / 4.0)));
        }
        total
    }

    /// `∫ x·p(x)` over the whole domain.
    pub fn first_moment(&self) -> f64 {
        let mut total = 0.0;
        for (k, c) in self.pieces.iter().enumerate() {
            let x0 = self.breakpoints[k];
            let d = self.breakpoints[k + 1] - x0;
            // ∫₀ᵈ (x0 + t) p(t) dt
            let int_p = d * (c[0] + d * (c[1] / 2.0 + d * (c[2] / 3.0 + d * c[3] / 4.0)));
            let int_tp =
                d * d * (c[0] / 2.0 + d * (c[1] / 3.0 + d * (c[2] / 4.0 + d * c[3] / 5.0)));
            total += x0 * int_p + int_tp;
        }
        total
    }

    /// Same function over a superset of the breakpoints.
    pub fn refine(&self, extra: &[f64]) -> Self {
        let (a, b) = self.domain();
        let mut bps: Vec<f64> =
            self.breakpoints.iter().chain(extra).copied().filter(|&x| a <= x && x <= b).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let pieces = bps[..bps.len() - 1]
            .iter()
            .zip(&bps[1..])
            .map(|(&x0, &x1)| {
                // pick the owning piece by the interval midpoint to avoid breakpoint ties
                let k = self.piece_index(0.5 * (x0 + x1));
                shift_cubic(&self.pieces[k], x0 - self.breakpoints[k])
            })
            .collect();
        Self { breakpoints: bps, pieces }
    }

    /// Both operands refined to the union of their breakpoints.
    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        let (a, b) = self.domain();
        let (c, d) = other.domain();
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if (a - c).abs() > tol || (b - d).abs() > tol {
            return Err(Error::GridMismatch);
        }
        let lhs = self.refine(&other.breakpoints[1..other.breakpoints.len() - 1]);
        let rhs = other.refine(&lhs.breakpoints[1..lhs.breakpoints.len() - 1]);
        debug_assert_eq!(lhs.pieces.len(), rhs.pieces.len());
        Ok((lhs, rhs))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (lhs, rhs) = self.aligned(other)?;
        let pieces = lhs
            .pieces
            .iter()
            .zip(&rhs.pieces)
            .map(|(p, q)| core::array::from_fn(|i| op(p[i], q[i])))
            .collect();
        Ok(Self { breakpoints: lhs.breakpoints, pieces })
    }

    /// Pointwise product; the degrees must add up to at most three.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (lhs, rhs) = self.aligned(other)?;
        let mut pieces = Vec::with_capacity(lhs.pieces.len());
        for (p, q) in lhs.pieces.iter().zip(&rhs.pieces) {
            let mut c = [0.0; 7];
            for i in 0..4 {
                for j in 0..4 {
                    c[i + j] += p[i] * q[j];
                }
            }
            if c[4..].iter().any(|&v| v != 0.0) {
                return Err(Error::Inconsistent("product exceeds degree three".into()));
            }
            pieces.push([c[0], c[1], c[2], c[3]]);
        }
        Ok(Self { breakpoints: lhs.breakpoints, pieces })
    }

    /// `∫ |p|` over the whole domain; pieces must have degree at most two.
    pub fn abs_integral(&self) -> f64 {
        let mut total = 0.0;
        for (k, c) in self.pieces.iter().enumerate() {
            debug_assert!(c[3] == 0.0, "abs_integral supports degree two");
            let d = self.breakpoints[k + 1] - self.breakpoints[k];
            let anti = |t: f64| t * (c[0] + t * (c[1] / 2.0 + t * c[2] / 3.0));
            let mut cuts = alloc::vec![0.0];
            let mut roots = quadratic_roots(c[2], c[1], c[0]);
            roots.sort_by(f64::total_cmp);
            cuts.extend(roots.into_iter().filter(|&t| t > 0.0 && t < d));
            cuts.push(d);
            for w in cuts.windows(2) {
                total += (anti(w[1]) - anti(w[0])).abs();
            }
        }
        total
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |p, q| p + q)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |p, q| p - q)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|c| c.map(|v| k * v)).collect(),
        }
    }

    /// Adds `slope·x + intercept`.
    pub fn add_affine(&self, slope: f64, intercept: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .zip(&self.breakpoints)
            .map(|(c, &x0)| [c[0] + slope * x0 + intercept, c[1] + slope, c[2], c[3]])
            .collect();
        Self { breakpoints: self.breakpoints.clone(), pieces }
    }

    /// `x ↦ p(2c − x)` on the mirrored domain.
    pub fn reflect(&self, c: f64) -> Self {
        let m = self.pieces.len();
        let breakpoints = self.breakpoints.iter().rev().map(|&x| 2.0 * c - x).collect();
        let pieces = (0..m)
            .rev()
            .map(|k| {
                let d = self.breakpoints[k + 1] - self.breakpoints[k];
                let s = shift_cubic(&self.pieces[k], d);
                [s[0], -s[1], s[2], -s[3]]
            })
            .collect();
        Self { breakpoints, pieces }
    }

    /// Joins `self` on `(a, m)` with `other` on `(m, b)`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let (_, m) = self.domain();
        let (m2, _) = other.domain();
        if (m - m2).abs() > 1e-12 * (1.0 + m.abs()) {
            return Err(Error::Inconsistent("pieces do not abut".into()));
        }
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend_from_slice(&other.breakpoints[1..]);
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        Ok(Self { breakpoints, pieces })
    }

    /// Joins adjacent pieces that describe the same polynomial.
    pub fn simplified(&self, tol: f64) -> Self {
        let mut breakpoints = alloc::vec![self.breakpoints[0]];
        let mut pieces: Vec<Cubic> = Vec::new();
        for (k, c) in self.pieces.iter().enumerate() {
            if let Some(last) = pieces.last() {
                let start = breakpoints[breakpoints.len() - 1];
                let prev_origin = breakpoints[breakpoints.len() - 2];
                let continued = shift_cubic(last, start - prev_origin);
                let scale = 1.0 + c.iter().chain(&continued).fold(0.0f64, |m, v| m.max(v.abs()));
                if continued.iter().zip(c).all(|(p, q)| (p - q).abs() <= tol * scale) {
                    *breakpoints.last_mut().unwrap() = self.breakpoints[k + 1];
                    continue;
                }
            }
            pieces.push(*c);
            breakpoints.push(self.breakpoints[k + 1]);
        }
        Self { breakpoints, pieces }
    }

    /// Interior discontinuities as `(location, right − left)` with `|size| > tol`.
    pub fn jumps(&self, tol: f64) -> Vec<(f64, f64)> {
        (1..self.pieces.len())
            .filter_map(|k| {
                let x = self.breakpoints[k];
                let size = self.eval_piece(k, x) - self.eval_piece(k - 1, x);
                (size.abs() > tol).then_some((x, size))
            })
            .collect()
    }

    /// `max |p|` over the closed pieces, returned with an arg-max.
    pub fn max_abs(&self) -> (f64, f64) {
        let mut best = (0.0, self.breakpoints[0]);
        let mut consider = |v: f64, x: f64| {
            if v.abs() > best.0 {
                best = (v.abs(), x);
            }
        };
        for (k, c) in self.pieces.iter().enumerate() {
            let x0 = self.breakpoints[k];
            let d = self.breakpoints[k + 1] - x0;
            consider(c[0], x0);
            consider(eval_cubic(c, d), x0 + d);
            for t in stationary_points(c) {
                if t > 0.0 && t < d {
                    consider(eval_cubic(c, t), x0 + t);
                }
            }
        }
        best
    }

    /// Maximum absolute coefficient difference after aligning breakpoints.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let diff = self.sub(other)?;
        let mut worst = 0.0f64;
        for k in 0..diff.pieces.len() {
            let x0 = diff.breakpoints[k];
            let x1 = diff.breakpoints[k + 1];
            worst = worst.max(diff.eval_piece(k, x0).abs()).max(diff.eval_piece(k, x1).abs());
        }
        Ok(worst.max(diff.max_abs().0))
    }
}

/// Real roots of `p′` for a cubic `p`.
fn stationary_points(c: &Cubic) -> Vec<f64> {
    quadratic_roots(3.0 * c[3], 2.0 * c[2], c[1])
}

/// Real roots of `a t² + b t + q`.
fn quadratic_roots(a: f64, b: f64, q: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if a == 0.0 {
        if b != 0.0 {
            out.push(-q / b);
        }
        return out;
    }
    let disc = b * b - 4.0 * a * q;
    if disc < 0.0 {
        return out;
    }
    let sq = crate::math::sqrt(disc);
    // numerically stable pair
    let qq = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    if qq != 0.0 {
        out.push(qq / a);
        out.push(q / qq);
    } else {
        out.push(0.0);
    }
    out
}
