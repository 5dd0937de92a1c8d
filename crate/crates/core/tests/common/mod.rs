// Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Minimum discrete TGV² energy by enumerating sign patterns.
///
/// A sign pattern of `(Du − w, Dw)` fixes which predual constraints are
/// active: `±` at a term means `v′ = ∓α` (resp. `V = ±β`) there, `0` leaves it
/// free. Each pattern reduces to an equality-constrained least-squares problem
/// `min ½|LV − f|²`, solved densely. Every feasible candidate gives a valid
/// lower bound and the optimal pattern attains the minimum, so the maximum
/// over candidates is the exact optimum. Patterns with more active
/// constraints than unknowns are skipped, since a linearly independent subset
/// already reproduces any such optimum.
pub fn brute_force_tgv(f: &[f64], delta: f64, alpha: f64, beta: f64) -> f64 {
    let n = f.len();
    assert!(n >= 3);
    let m = n - 2;
    // second difference of the interior unknowns V₁..V_m with V₀ = V_{n−1} = 0
    let mut l = DMatrix::<f64>::zeros(n, m);
    let inv = 1.0 / (delta * delta);
    for k in 0..m {
        let cell = k + 1;
        l[(cell - 1, k)] += inv;
        l[(cell, k)] -= 2.0 * inv;
        l[(cell + 1, k)] += inv;
    }
    let fv = DVector::from_column_slice(f);
    let h = l.transpose() * &l;
    let g = l.transpose() * &fv;

    // constraint rows and their magnitudes
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for k in 0..m {
        let mut r = DVector::zeros(m);
        r[k] = 1.0;
        rows.push((r, beta));
    }
    for j in 1..n {
        let mut r = DVector::zeros(m);
        if j <= m {
            r[j - 1] += 1.0;
        }
        if j >= 2 {
            r[j - 2] -= 1.0;
        }
        rows.push((r, alpha * delta));
    }

    let value = |v: &DVector<f64>| {
        let s = &l * v;
        delta * f.iter().zip(s.iter()).map(|(fi, si)| fi * si - 0.5 * si * si).sum::<f64>()
    };
    let feasible = |v: &DVector<f64>| rows.iter().all(|(r, b)| r.dot(v).abs() <= b * (1.0 + 1e-10) + 1e-15);

    let mut best = f64::NEG_INFINITY;
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    enumerate(&rows, m, 0, &mut chosen, &mut |active| {
        let k = active.len();
        let mut kkt = DMatrix::<f64>::zeros(m + k, m + k);
        let mut rhs = DVector::<f64>::zeros(m + k);
        kkt.view_mut((0, 0), (m, m)).copy_from(&h);
        rhs.rows_mut(0, m).copy_from(&g);
        for (q, &(idx, sign)) in active.iter().enumerate() {
            let (r, b) = &rows[idx];
            for c in 0..m {
                kkt[(m + q, c)] = r[c];
                kkt[(c, m + q)] = r[c];
            }
            rhs[m + q] = sign * b;
        }
        if let Some(sol) = kkt.lu().solve(&rhs) {
            let v = sol.rows(0, m).into_owned();
            if v.iter().all(|x| x.is_finite()) && feasible(&v) {
                best = best.max(value(&v));
            }
        }
    });
    best
}

fn enumerate(
    rows: &[(DVector<f64>, f64)],
    limit: usize,
    from: usize,
    chosen: &mut Vec<(usize, f64)>,
    visit: &mut impl FnMut(&[(usize, f64)]),
) {
    visit(chosen);
    if chosen.len() == limit {
        return;
    }
    for idx in from..rows.len() {
        for sign in [-1.0, 1.0] {
            chosen.push((idx, sign));
            enumerate(rows, limit, idx + 1, chosen, visit);
            chosen.pop();
        }
    }
}

/// Minimiser of `½Σ(uᵢ − fᵢ)² + λΣ|uᵢ₊₁ − uᵢ|` by the taut-string construction.
///
/// The string runs from `(0, 0)` to `(n, ΣF)` inside the tube of half-width
/// `λ` around the cumulative sums `Fₖ`, pinned at both ends. It is built
/// segment by segment: from the current vertex, the feasible slope window is
/// narrowed node by node until it closes, and the string then bends at the
/// node that last tightened the violated side. `u` is the string's slope.
pub fn taut_string(f: &[f64], lambda: f64) -> Vec<f64> {
    let n = f.len();
    let mut cum = vec![0.0; n + 1];
    for k in 0..n {
        cum[k + 1] = cum[k] + f[k];
    }
    let lower = |k: usize| if k == 0 || k == n { cum[k] } else { cum[k] - lambda };
    let upper = |k: usize| if k == 0 || k == n { cum[k] } else { cum[k] + lambda };

    let mut u = vec![0.0; n];
    let (mut k0, mut y0) = (0usize, 0.0f64);
    while k0 < n {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut lo_at, mut hi_at) = (k0, k0);
        let mut next = None;
        for k in k0 + 1..=n {
            let span = (k - k0) as f64;
            let a = (lower(k) - y0) / span;
            let b = (upper(k) - y0) / span;
            if a > hi {
                // the tube rises above the window: bend down at the upper bound
                next = Some((hi_at, hi, upper(hi_at)));
                break;
            }
            if b < lo {
                next = Some((lo_at, lo, lower(lo_at)));
                break;
            }
            if a >= lo {
                lo = a;
                lo_at = k;
            }
            if b <= hi {
                hi = b;
                hi_at = k;
            }
        }
        let (k1, slope, y1) = next.unwrap_or((n, (cum[n] - y0) / (n - k0) as f64, cum[n]));
        for ui in &mut u[k0..k1] {
            *ui = slope;
        }
        (k0, y0) = (k1, y1);
    }
    u
}

/// Deterministic uniform samples in `[lo, hi)`.
pub struct Uniform(ChaCha20Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self, lo: f64, hi: f64) -> f64 {
        let bits = self.0.next_u64() >> 11;
        lo + (hi - lo) * (bits as f64 / (1u64 << 53) as f64)
    }
}
