// Discrete predual variables.
//
// TGV²: the predual variable V is cell-centred with V₀ = V_{n−1} = 0. Its
// node derivative is v′ⱼ = (Vⱼ − Vⱼ₋₁)/δ for j = 1..n−1 (zero at nodes 0 and
// n), and sᵢ = (v′ᵢ₊₁ − v′ᵢ)/δ is the discrete v″. The dual objective is
// δ·Σ(fᵢsᵢ − sᵢ²/2) under |V| ≤ β and |v′| ≤ α, and u = f − s at the optimum.
//
// TV: the predual variable is node-based, v₀ = vₙ = 0, with sᵢ = (vᵢ₊₁ − vᵢ)/δ
// and |v| ≤ α.

use alloc::vec::Vec;

/// Zero-padded second difference of cell values.
pub(crate) fn second_difference(v: &[f64], delta: f64) -> Vec<f64> {
    let n = v.len();
    let inv = 1.0 / (delta * delta);
    (0..n)
        .map(|i| {
            let left = if i > 0 { v[i - 1] } else { 0.0 };
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            (right - 2.0 * v[i] + left) * inv
        })
        .collect()
}

/// `δ·Σ(fᵢsᵢ − sᵢ²/2)`.
pub(crate) fn quadratic_value(f: &[f64], s: &[f64], delta: f64) -> f64 {
    let mut acc = 0.0;
    for (fi, si) in f.iter().zip(s) {
        acc += fi * si - 0.5 * si * si;
    }
    delta * acc
}

/// Node derivative of cell values, `n + 1` entries with zero ends.
pub(crate) fn node_derivative(v: &[f64], delta: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = alloc::vec![0.0; n + 1];
    for j in 1..n {
        out[j] = (v[j] - v[j - 1]) / delta;
    }
    out
}

/// Integrates `r = f − u` twice from the left endpoint.
///
/// Returns cell values `V` (with `V₀ = 0`) and node values `P` of `v′`
/// (`n + 1` entries, `P₀ = 0`, `Pₙ = δΣr`). By construction the zero-padded
/// second difference of `V` equals `r` except in the last cell, where the
/// defect is `−Pₙ/δ − Vₙ₋₁/δ²`.
pub(crate) fn integrate_twice(r: &[f64], delta: f64) -> (Vec<f64>, Vec<f64>) {
    let n = r.len();
    let mut p = alloc::vec![0.0; n + 1];
    for k in 1..=n {
        p[k] = p[k - 1] + delta * r[k - 1];
    }
    let mut v = alloc::vec![0.0; n];
    for k in 1..n {
        v[k] = v[k - 1] + delta * p[k];
    }
    (v, p)
}

/// Smoothstep `3t² − 2t³`.
fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Zeroes `V_{n−1}` by subtracting a smooth ramp that leaves `V₀` alone.
pub(crate) fn pin_right_end(v: &mut [f64]) {
    let n = v.len();
    if n < 2 {
        return;
    }
    let end = v[n - 1];
    let last = (n - 1) as f64;
    for (i, vi) in v.iter_mut().enumerate() {
        *vi -= end * smoothstep(i as f64 / last);
    }
    v[n - 1] = 0.0;
}

/// Largest `k ≤ 1` with `|kV| ≤ β` and `|k v′| ≤ α`.
pub(crate) fn tgv_feasible_scale(v: &[f64], delta: f64, alpha: f64, beta: f64) -> f64 {
    let vmax = crate::math::sup_norm(v.iter().copied());
    let dmax = crate::math::sup_norm(node_derivative(v, delta));
    let mut k: f64 = 1.0;
    if vmax > beta {
        k = k.min(beta / vmax);
    }
    if dmax > alpha {
        k = k.min(alpha / dmax);
    }
    k
}

/// Feasible TGV² dual value of cell values `V` after pinning the ends and
/// radial scaling.
pub(crate) fn tgv_dual_lower_bound(f: &[f64], v: &[f64], delta: f64, alpha: f64, beta: f64) -> f64 {
    let mut v = v.to_vec();
    v[0] = 0.0;
    pin_right_end(&mut v);
    let k = tgv_feasible_scale(&v, delta, alpha, beta);
    for x in v.iter_mut() {
        *x *= k;
    }
    quadratic_value(f, &second_difference(&v, delta), delta)
}

/// Forward difference of node values, `n` entries from `n + 1` nodes.
pub(crate) fn tv_s(v: &[f64], delta: f64) -> Vec<f64> {
    v.windows(2).map(|w| (w[1] - w[0]) / delta).collect()
}

/// Feasible TV dual value of node values `v` (`n + 1` entries) after
/// pinning both ends with a linear ramp and radial scaling.
pub(crate) fn tv_dual_lower_bound(f: &[f64], v: &[f64], delta: f64, alpha: f64) -> f64 {
    let n = f.len();
    let mut v = v.to_vec();
    let (first, end) = (v[0], v[n]);
    for (j, vj) in v.iter_mut().enumerate() {
        let t = j as f64 / n as f64;
        *vj -= first * (1.0 - t) + end * t;
    }
    v[0] = 0.0;
    v[n] = 0.0;
    let vmax = crate::math::sup_norm(v.iter().copied());
    if vmax > alpha {
        let k = alpha / vmax;
        for x in v.iter_mut() {
            *x *= k;
        }
    }
    quadratic_value(f, &tv_s(&v, delta), delta)
}
