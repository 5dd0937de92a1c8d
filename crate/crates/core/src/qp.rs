// Primal active-set method for the discrete predual problems
//
//     min ½|A x − f|²   s.t.  |xᵢ| ≤ bound,  |xⱼ − xⱼ₋₁| ≤ edge_bound,
//
// where x holds the interior values of the predual variable, the two outer
// values are pinned to zero, and A is a zero-padded first or second
// difference. Constraints in the working set tie neighbouring unknowns into
// chains (edge constraints) or pin a chain (bound constraints, pinned ends),
// so every equality-constrained subproblem reduces to a banded system in one
// unknown per free chain.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stencil {
    /// sᵣ = (x_{r+1} − x_r)/δ over node values x₀..xₙ, r = 0..n−1.
    First,
    /// sᵣ = (x_{r+1} − 2x_r + x_{r−1})/δ² over cell values x₀..x_{n−1}.
    Second,
}

pub(crate) struct Problem<'a> {
    pub f: &'a [f64],
    pub delta: f64,
    pub stencil: Stencil,
    pub bound: f64,
    pub edge_bound: Option<f64>,
}

pub(crate) struct Outcome {
    /// Extended values including the pinned ends.
    pub x: Vec<f64>,
    /// Working-set signs: `bound_sign[i]` for |xᵢ| ≤ bound, `edge_sign[j]`
    /// for the difference xⱼ − xⱼ₋₁.
    pub bound_sign: Vec<i8>,
    pub edge_sign: Vec<i8>,
    pub iterations: usize,
}

impl Problem<'_> {
    /// Number of extended unknowns, pinned ends included.
    fn len(&self) -> usize {
        match self.stencil {
            Stencil::First => self.f.len() + 1,
            Stencil::Second => self.f.len(),
        }
    }

    /// A applied to extended values.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.delta;
        let n = self.f.len();
        match self.stencil {
            Stencil::First => (0..n).map(|r| (x[r + 1] - x[r]) / d).collect(),
            Stencil::Second => {
                let inv = 1.0 / (d * d);
                (0..n)
                    .map(|r| {
                        let l = if r > 0 { x[r - 1] } else { 0.0 };
                        let rr = if r + 1 < n { x[r + 1] } else { 0.0 };
                        (rr - 2.0 * x[r] + l) * inv
                    })
                    .collect()
            }
        }
    }

    /// Aᵀ applied to a residual, evaluated at the extended indices.
    fn apply_t(&self, r: &[f64]) -> Vec<f64> {
        let d = self.delta;
        let n = self.f.len();
        let m = self.len();
        let at = |k: isize| if k >= 0 && (k as usize) < n { r[k as usize] } else { 0.0 };
        match self.stencil {
            Stencil::First => (0..m).map(|i| (at(i as isize - 1) - at(i as isize)) / d).collect(),
            Stencil::Second => {
                let inv = 1.0 / (d * d);
                (0..m)
                    .map(|i| {
                        let i = i as isize;
                        (at(i - 1) - 2.0 * at(i) + at(i + 1)) * inv
                    })
                    .collect()
            }
        }
    }

    /// Sparse image of the indicator of `[a, b]` under A.
    fn chain_column(&self, a: usize, b: usize) -> ([(usize, f64); 4], usize) {
        let d = self.delta;
        let n = self.f.len();
        let mut out = [(0usize, 0.0f64); 4];
        let mut len = 0;
        let mut push = |row: isize, v: f64| {
            if row >= 0 && (row as usize) < n && v != 0.0 {
                out[len] = (row as usize, v);
                len += 1;
            }
        };
        let (a, b) = (a as isize, b as isize);
        match self.stencil {
            Stencil::First => {
                push(a - 1, 1.0 / d);
                push(b, -1.0 / d);
            }
            Stencil::Second => {
                let inv = 1.0 / (d * d);
                push(a - 1, inv);
                if a == b {
                    push(a, -2.0 * inv);
                } else {
                    push(a, -inv);
                    push(b, -inv);
                }
                push(b + 1, inv);
            }
        }
        (out, len)
    }
}

struct Chain {
    a: usize,
    b: usize,
    /// Value at `a` when pinned.
    pinned: Option<f64>,
}

/// Splits the extended index range into chains under the working set and
/// fills `offset` with values relative to each chain start.
fn chains(p: &Problem, bound_sign: &[i8], edge_sign: &[i8], offset: &mut [f64]) -> Vec<Chain> {
    let m = p.len();
    let e = p.edge_bound.unwrap_or(0.0);
    let mut out: Vec<Chain> = Vec::new();
    for i in 0..m {
        if i > 0 && edge_sign[i] != 0 {
            offset[i] = offset[i - 1] + f64::from(edge_sign[i]) * e;
            out.last_mut().expect("chain").b = i;
        } else {
            offset[i] = 0.0;
            out.push(Chain { a: i, b: i, pinned: None });
        }
        let c = out.last_mut().expect("chain");
        let fix = if i == 0 || i == m - 1 {
            Some(0.0)
        } else if bound_sign[i] != 0 {
            Some(f64::from(bound_sign[i]) * p.bound)
        } else {
            None
        };
        if let Some(value) = fix {
            c.pinned = Some(value - offset[i]);
        }
    }
    out
}

/// Banded LDLᵀ factorisation with half-bandwidth 2, in place.
fn banded_factor(diag: &mut [f64], sub1: &mut [f64], sub2: &mut [f64]) -> bool {
    for i in 0..diag.len() {
        if i >= 2 {
            sub2[i] /= diag[i - 2];
        }
        if i >= 1 {
            let t = if i >= 2 { sub2[i] * sub1[i - 1] * diag[i - 2] } else { 0.0 };
            sub1[i] = (sub1[i] - t) / diag[i - 1];
        }
        let mut dii = diag[i];
        if i >= 1 {
            dii -= sub1[i] * sub1[i] * diag[i - 1];
        }
        if i >= 2 {
            dii -= sub2[i] * sub2[i] * diag[i - 2];
        }
        if !(dii > 0.0) {
            return false;
        }
        diag[i] = dii;
    }
    true
}

fn banded_solve(diag: &[f64], sub1: &[f64], sub2: &[f64], rhs: &mut [f64]) {
    let k = diag.len();
    for i in 0..k {
        if i >= 1 {
            rhs[i] -= sub1[i] * rhs[i - 1];
        }
        if i >= 2 {
            rhs[i] -= sub2[i] * rhs[i - 2];
        }
    }
    for i in 0..k {
        rhs[i] /= diag[i];
    }
    for i in (0..k).rev() {
        if i + 1 < k {
            rhs[i] -= sub1[i + 1] * rhs[i + 1];
        }
        if i + 2 < k {
            rhs[i] -= sub2[i + 2] * rhs[i + 2];
        }
    }
}

/// Minimiser over the affine set defined by the working set.
fn solve_eqp(p: &Problem, bound_sign: &[i8], edge_sign: &[i8]) -> Option<Vec<f64>> {
    let m = p.len();
    let mut offset = vec![0.0; m];
    let cs = chains(p, bound_sign, edge_sign, &mut offset);
    let mut x = vec![0.0; m];
    for c in &cs {
        let base = c.pinned.unwrap_or(0.0);
        for i in c.a..=c.b {
            x[i] = base + offset[i];
        }
    }
    let free: Vec<&Chain> = cs.iter().filter(|c| c.pinned.is_none()).collect();
    if free.is_empty() {
        return Some(x);
    }
    let cols: Vec<([(usize, f64); 4], usize)> = free.iter().map(|c| p.chain_column(c.a, c.b)).collect();
    let dot = |u: &([(usize, f64); 4], usize), v: &([(usize, f64); 4], usize)| {
        let mut s = 0.0;
        for &(ru, xu) in &u.0[..u.1] {
            for &(rv, xv) in &v.0[..v.1] {
                if ru == rv {
                    s += xu * xv;
                }
            }
        }
        s
    };
    let k = free.len();
    let mut diag = vec![0.0; k];
    let mut sub1 = vec![0.0; k];
    let mut sub2 = vec![0.0; k];
    for g in 0..k {
        diag[g] = dot(&cols[g], &cols[g]);
        if g >= 1 {
            sub1[g] = dot(&cols[g], &cols[g - 1]);
        }
        if g >= 2 {
            sub2[g] = dot(&cols[g], &cols[g - 2]);
        }
    }
    if !banded_factor(&mut diag, &mut sub1, &mut sub2) {
        return None;
    }
    // The normal equations have condition number of order n⁴, so a few
    // rounds of refinement against the true residual recover full accuracy.
    let mut rhs = vec![0.0; k];
    for _ in 0..4 {
        let mut r = p.apply(&x);
        for (ri, fi) in r.iter_mut().zip(p.f) {
            *ri -= fi;
        }
        for g in 0..k {
            rhs[g] = -cols[g].0[..cols[g].1].iter().map(|&(row, v)| v * r[row]).sum::<f64>();
        }
        banded_solve(&diag, &sub1, &sub2, &mut rhs);
        for (c, shift) in free.iter().zip(&rhs) {
            for xi in &mut x[c.a..=c.b] {
                *xi += shift;
            }
        }
    }
    Some(x)
}

/// Most negative multiplier of the working set at an EQP minimiser, as
/// `(is_edge, index)`, or `None` when all are non-negative.
fn worst_multiplier(p: &Problem, x: &[f64], bound_sign: &[i8], edge_sign: &[i8]) -> Option<(bool, usize)> {
    let m = p.len();
    let mut r = p.apply(x);
    for (ri, fi) in r.iter_mut().zip(p.f) {
        *ri -= fi;
    }
    let g = p.apply_t(&r);
    let scale = p.apply_t(p.f).iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let tol = 1e-11 * scale;
    let mut offset = vec![0.0; m];
    let cs = chains(p, bound_sign, edge_sign, &mut offset);
    let mut worst: Option<(f64, bool, usize)> = None;
    let mut consider = |lam: f64, is_edge: bool, idx: usize| {
        if lam < -tol && worst.map_or(true, |(w, ..)| lam < w) {
            worst = Some((lam, is_edge, idx));
        }
    };
    for c in &cs {
        // pinned index inside the chain, if any
        let fixed = (c.a..=c.b).find(|&i| i == 0 || i == m - 1 || bound_sign[i] != 0);
        let split = fixed.unwrap_or(c.b);
        let mut acc = 0.0;
        for j in c.a + 1..=split {
            acc += g[j - 1];
            // τⱼμⱼ = Σ_{i<j} gᵢ
            consider(f64::from(edge_sign[j]) * acc, true, j);
        }
        if let Some(k) = fixed {
            let mut acc = 0.0;
            for j in (k + 1..=c.b).rev() {
                acc += g[j];
                consider(-f64::from(edge_sign[j]) * acc, true, j);
            }
            if k != 0 && k != m - 1 {
                let total: f64 = g[c.a..=c.b].iter().sum();
                consider(-f64::from(bound_sign[k]) * total, false, k);
            }
        }
    }
    worst.map(|(_, e, i)| (e, i))
}

pub(crate) fn solve(p: &Problem, max_iters: usize) -> Outcome {
    let m = p.len();
    let mut x = vec![0.0; m];
    let mut bound_sign = vec![0i8; m];
    let mut edge_sign = vec![0i8; m];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let Some(target) = solve_eqp(p, &bound_sign, &edge_sign) else { break };
        let dir: Vec<f64> = target.iter().zip(&x).map(|(t, c)| t - c).collect();

        let mut step = 1.0;
        let mut block: Option<(bool, usize, i8)> = None;
        for i in 1..m - 1 {
            if bound_sign[i] != 0 || dir[i] == 0.0 {
                continue;
            }
            let (limit, s) = if dir[i] > 0.0 { (p.bound, 1) } else { (-p.bound, -1) };
            let t = ((limit - x[i]) / dir[i]).max(0.0);
            if t < step {
                step = t;
                block = Some((false, i, s));
            }
        }
        if let Some(e) = p.edge_bound {
            for j in 1..m {
                let dd = dir[j] - dir[j - 1];
                if edge_sign[j] != 0 || dd == 0.0 {
                    continue;
                }
                let cur = x[j] - x[j - 1];
                let (limit, s) = if dd > 0.0 { (e, 1) } else { (-e, -1) };
                let t = ((limit - cur) / dd).max(0.0);
                if t < step {
                    step = t;
                    block = Some((true, j, s));
                }
            }
        }

        match block {
            Some((is_edge, idx, s)) => {
                for (xi, di) in x.iter_mut().zip(&dir) {
                    *xi += step * di;
                }
                if is_edge {
                    edge_sign[idx] = s;
                } else {
                    bound_sign[idx] = s;
                    x[idx] = f64::from(s) * p.bound;
                }
            }
            None => {
                x = target;
                match worst_multiplier(p, &x, &bound_sign, &edge_sign) {
                    None => break,
                    Some((true, j)) => edge_sign[j] = 0,
                    Some((false, i)) => bound_sign[i] = 0,
                }
            }
        }
    }
    Outcome { x, bound_sign, edge_sign, iterations }
}
