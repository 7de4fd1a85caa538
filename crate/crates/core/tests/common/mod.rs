//! Shared test support: independent oracles and deterministic generators.
//!
//! Everything here deliberately avoids the library's solvers so that test
//! expectations are derived through a second, unrelated route: vertex
//! enumeration and dense linear algebra for LPs, exhaustive enumeration for
//! integer programs, and greedy arguments for budgeted inner maxima.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Deterministic RNG for a named test and case index.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Solves `A x = b` for square dense `A` by Gaussian elimination with
/// partial pivoting. Returns `None` when the system is singular.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, piv);
        let inv = 1.0 / m[col][col];
        for k in col..=n {
            m[col][k] *= inv;
        }
        for r in 0..n {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col];
                for k in col..=n {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some(m.iter().map(|r| r[n]).collect())
}

/// Outcome of the vertex-enumeration oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Infeasible,
    Unbounded,
    Optimal(f64),
}

/// Minimizes `c'x` over `rows x <= rhs`, `x >= 0` by enumerating all basic
/// points: every choice of `n` active hyperplanes among the constraint rows
/// and the coordinate planes. The feasible region lies in the nonnegative
/// orthant, so it is pointed and a nonempty region has a vertex.
/// Unboundedness is certified on the normalized recession cone
/// `{d : rows d <= 0, d >= 0, sum d = 1}` with the same enumeration.
pub fn lp_oracle(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> OracleOutcome {
    let best_vertex = enumerate_min(c, rows, rhs, None);
    let Some(best) = best_vertex else {
        return OracleOutcome::Infeasible;
    };
    // Recession direction with negative cost proves unboundedness.
    let zero_rhs = vec![0.0; rows.len()];
    if let Some(ray_min) = enumerate_min(c, rows, &zero_rhs, Some(1.0)) {
        if ray_min < -1e-9 {
            return OracleOutcome::Unbounded;
        }
    }
    OracleOutcome::Optimal(best)
}

/// Enumerates vertices of `rows x <= rhs, x >= 0` (plus `sum x = norm` when
/// given) and returns the minimum of `c'x` over feasible vertices, or `None`
/// when no feasible vertex exists.
fn enumerate_min(c: &[f64], rows: &[Vec<f64>], rhs: &[f64], norm: Option<f64>) -> Option<f64> {
    let n = c.len();
    // Hyperplane list: constraint rows, then coordinate planes.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (r, &b) in rows.iter().zip(rhs) {
        planes.push((r.clone(), b));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let fixed: Option<(Vec<f64>, f64)> = norm.map(|s| (vec![1.0; n], s));
    let choose = if fixed.is_some() { n - 1 } else { n };

    let mut best: Option<f64> = None;
    let total = planes.len();
    let mut idx: Vec<usize> = (0..choose).collect();
    if choose > total {
        return None;
    }
    loop {
        // Assemble and solve the active system.
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for &i in &idx {
            a.push(planes[i].0.clone());
            b.push(planes[i].1);
        }
        if let Some((fr, fb)) = &fixed {
            a.push(fr.clone());
            b.push(*fb);
        }
        if let Some(x) = gauss_solve(&a, &b) {
            if feasible_point(&x, rows, rhs, norm) {
                let v: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                best = Some(match best {
                    None => v,
                    Some(cur) => cur.min(v),
                });
            }
        }
        // Next combination in lexicographic order.
        let mut i = choose;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] + (choose - i) < total {
                idx[i] += 1;
                for k in i + 1..choose {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn feasible_point(x: &[f64], rows: &[Vec<f64>], rhs: &[f64], norm: Option<f64>) -> bool {
    const TOL: f64 = 1e-7;
    if x.iter().any(|&v| v < -TOL || !v.is_finite()) {
        return false;
    }
    for (r, &b) in rows.iter().zip(rhs) {
        let lhs: f64 = r.iter().zip(x).map(|(a, v)| a * v).sum();
        let scale = 1.0 + b.abs();
        if lhs > b + TOL * scale {
            return false;
        }
    }
    if let Some(s) = norm {
        let sum: f64 = x.iter().sum();
        if (sum - s).abs() > TOL {
            return false;
        }
    }
    true
}

/// Greedy solution of the budgeted inner maximum
/// `max sum w_j z_j  s.t.  sum z_j <= gamma, 0 <= z <= 1` for `w >= 0`:
/// sort by weight descending (ties to the lowest index), fill whole units,
/// then one fractional remainder.
pub fn greedy_budget_max(w: &[f64], gamma: f64) -> (f64, Vec<f64>) {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    let mut z = vec![0.0; w.len()];
    let mut left = gamma;
    let mut val = 0.0;
    for &j in &order {
        if left <= 0.0 || w[j] <= 0.0 {
            break;
        }
        let take = left.min(1.0);
        z[j] = take;
        val += w[j] * take;
        left -= take;
    }
    (val, z)
}

/// Exhaustively enumerates all integral assignments of a pure-integer
/// program `min c'x, rows x (<=|=|>=) rhs, lo <= x <= hi, x integral` and
/// returns the best objective, or `None` when infeasible. Relations are
/// encoded as -1 (<=), 0 (=), +1 (>=).
pub fn exhaustive_integer_min(
    c: &[f64],
    rows: &[Vec<f64>],
    rels: &[i8],
    rhs: &[f64],
    lo: &[i64],
    hi: &[i64],
) -> Option<(f64, Vec<i64>)> {
    let n = c.len();
    let mut x = lo.to_vec();
    let mut best: Option<(f64, Vec<i64>)> = None;
    loop {
        let mut ok = true;
        for ((r, &rel), &b) in rows.iter().zip(rels).zip(rhs) {
            let lhs: f64 = r.iter().zip(&x).map(|(a, &v)| a * v as f64).sum();
            let pass = match rel {
                -1 => lhs <= b + 1e-9,
                0 => (lhs - b).abs() <= 1e-9,
                1 => lhs >= b - 1e-9,
                _ => unreachable!(),
            };
            if !pass {
                ok = false;
                break;
            }
        }
        if ok {
            let v: f64 = c.iter().zip(&x).map(|(ci, &xi)| ci * xi as f64).sum();
            let better = match &best {
                None => true,
                Some((cur, _)) => v < cur - 1e-12,
            };
            if better {
                best = Some((v, x.clone()));
            }
        }
        // Odometer increment.
        let mut j = 0;
        loop {
            if j == n {
                return best;
            }
            if x[j] < hi[j] {
                x[j] += 1;
                break;
            }
            x[j] = lo[j];
            j += 1;
        }
    }
}

/// Uniform integer in `[lo, hi]` inclusive.
pub fn int_in(r: &mut StdRng, lo: i64, hi: i64) -> i64 {
    r.gen_range(lo..=hi)
}

/// Budgeted greedy with per-item capacities:
/// `max sum rate_j sigma_j  s.t.  sigma_j <= cap_j, sum sigma <= gamma`.
pub fn greedy_capped_max(rate: &[f64], cap: &[f64], gamma: f64) -> f64 {
    let mut order: Vec<usize> = (0..rate.len()).collect();
    order.sort_by(|&a, &b| rate[b].partial_cmp(&rate[a]).unwrap().then(a.cmp(&b)));
    let mut left = gamma;
    let mut val = 0.0;
    for &j in &order {
        if left <= 0.0 || rate[j] <= 0.0 {
            break;
        }
        let take = left.min(cap[j]);
        val += rate[j] * take;
        left -= take;
    }
    val
}

/// A decoupled random instance: every resource coordinate is capped by its
/// own row `a_j'x + b_j y_j <= g_j` with `g_j = b_j cap_j + a_j' lb`, and
/// extra rows force `x >= lb`. At the cost-optimal allocation `x = lb` the
/// absorbable top of coordinate `j` is exactly `min(y_up_j, cap_j)`, which
/// makes stage-1 results, classifications, and effective parameters
/// available in closed form.
pub struct Decoupled {
    pub inst: effbudget::NominalInstance,
    /// Per-coordinate row cap at `x = lb`.
    pub caps: Vec<f64>,
    /// Shared per-group budget, inside `[0, min group size]`.
    pub gamma: f64,
}

/// Case mix: roughly 30% of coordinates keep the full interval, 30% are
/// truncated above the nominal, 30% at or below it, 10% collapse.
pub fn random_decoupled(seed: u64) -> Decoupled {
    let mut r = rng(seed ^ 0x4445_434f);
    let m = int_in(&mut r, 2, 6) as usize;
    let p = int_in(&mut r, 1, 3) as usize;

    let mut y_low = Vec::with_capacity(m);
    let mut y_nominal = Vec::with_capacity(m);
    let mut y_up = Vec::with_capacity(m);
    for _ in 0..m {
        let lo = int_in(&mut r, 0, 4) as f64;
        let half = [1.0, 1.5, 2.0, 3.0][int_in(&mut r, 0, 3) as usize];
        y_low.push(lo);
        y_nominal.push(lo + half);
        y_up.push(lo + 2.0 * half);
    }
    let lb: Vec<f64> = (0..p).map(|_| int_in(&mut r, 0, 2) as f64).collect();
    let c1: Vec<f64> = (0..p).map(|_| int_in(&mut r, 1, 3) as f64).collect();
    let mut c2: Vec<f64> = (0..m).map(|_| int_in(&mut r, 1, 6) as f64).collect();
    let cmax = c1.iter().cloned().fold(0.0_f64, f64::max);
    if !c2.iter().any(|&c| c >= cmax) {
        c2[0] = cmax;
    }

    let mut caps = Vec::with_capacity(m);
    for j in 0..m {
        let roll: f64 = r.gen();
        let cap = if roll < 0.3 {
            y_up[j] + int_in(&mut r, 0, 2) as f64
        } else if roll < 0.6 {
            y_nominal[j] + r.gen_range(0.25..0.85) * (y_up[j] - y_nominal[j])
        } else if roll < 0.9 {
            if r.gen_bool(0.15) {
                y_nominal[j]
            } else {
                y_low[j] + r.gen_range(0.3..0.95) * (y_nominal[j] - y_low[j])
            }
        } else {
            r.gen_range(0.0..0.85) * y_low[j]
        };
        caps.push(cap);
    }

    let mut a = Vec::with_capacity(m + p);
    let mut b = Vec::with_capacity(m + p);
    let mut g = Vec::with_capacity(m + p);
    for j in 0..m {
        let arow: Vec<f64> = (0..p).map(|_| int_in(&mut r, 0, 2) as f64).collect();
        let bj = int_in(&mut r, 1, 3) as f64;
        let mut brow = vec![0.0; m];
        brow[j] = bj;
        g.push(bj * caps[j] + arow.iter().zip(&lb).map(|(av, lv)| av * lv).sum::<f64>());
        a.push(arow);
        b.push(brow);
    }
    for k in 0..p {
        let mut arow = vec![0.0; p];
        arow[k] = -1.0;
        a.push(arow);
        b.push(vec![0.0; m]);
        g.push(-lb[k]);
    }

    let budget_groups = if m >= 4 && r.gen_bool(0.4) {
        Some(vec![(0..m / 2).collect(), (m / 2..m).collect()])
    } else {
        None
    };
    let min_group = match &budget_groups {
        Some(gs) => gs.iter().map(Vec::len).min().unwrap(),
        None => m,
    };
    let gamma = r.gen_range(0.0..min_group as f64);

    let inst = effbudget::NominalInstance {
        a,
        b,
        c1,
        c2,
        g,
        y_nominal,
        y_low,
        y_up,
        budget_groups,
        allow_non_centered: false,
        ellipsoid: None,
    };
    inst.validate().expect("generated instance must be valid");
    Decoupled { inst, caps, gamma }
}

/// Case letter a coordinate must land in, from its bounds and absorbable
/// top; mirrors the published classification rule independently.
pub fn expected_case_letter(y_low: f64, y_nom: f64, y_up: f64, s_up: f64) -> char {
    let tol = 1e-7 * (1.0 + y_up.abs());
    if s_up > y_nom + tol {
        if s_up >= y_up - tol {
            'a'
        } else {
            'b'
        }
    } else if s_up > y_low + tol {
        'c'
    } else {
        'd'
    }
}

/// Draws a uniformly random orthonormal basis of dimension `m` by
/// Gram-Schmidt on a Gaussian matrix, with one reorthogonalization pass.
pub fn random_orthonormal(r: &mut StdRng, m: usize) -> Vec<Vec<f64>> {
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        for _ in 0..m {
            let mut v: Vec<f64> = (0..m)
                .map(|_| r.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            for _ in 0..2 {
                for u in &basis {
                    let proj: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    for (vk, uk) in v.iter_mut().zip(u) {
                        *vk -= proj * uk;
                    }
                }
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-6 {
                break;
            }
            for vk in v.iter_mut() {
                *vk /= norm;
            }
            basis.push(v);
        }
        if basis.len() == m {
            return basis;
        }
    }
}

/// A point of the (un-budgeted) ellipsoid: `center + sum_j gamma l_j eta_j v_j`
/// where `eta` has norm at most one (exactly one for boundary points).
pub fn ellipsoid_point(
    center: &[f64],
    axes: &[Vec<f64>],
    lengths: &[f64],
    gamma: f64,
    eta: &[f64],
) -> Vec<f64> {
    let mut p = center.to_vec();
    for (j, v) in axes.iter().enumerate() {
        let step = gamma * lengths[j] * eta[j];
        for (pk, vk) in p.iter_mut().zip(v) {
            *pk += step * vk;
        }
    }
    p
}

/// Uniform direction on the unit sphere in dimension `m`.
pub fn unit_sphere(r: &mut StdRng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m)
            .map(|_| r.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Value of `max w'mu` over the budgeted ellipsoidal deviation set
/// `{ sum (mu_j/l_j)^2 <= gamma^2, sum mu_j <= budget, mu >= 0 }`, computed
/// through the one-dimensional Lagrangian dual of the budget row: the dual
/// function `d(theta) = theta*budget + gamma * ||(l .* (w - theta))_+||_2`
/// is convex on `[0, max w]` and strong duality holds (mu = 0 is interior),
/// so a grid scan plus golden-section refinement recovers the optimum. This
/// route shares nothing with the library's cutting-plane solver.
pub fn wc_dual_value(w: &[f64], l: &[f64], gamma: f64, budget: f64) -> f64 {
    if gamma <= 0.0 || budget <= 0.0 || w.iter().all(|&wj| wj <= 0.0) {
        return 0.0;
    }
    let d = |theta: f64| -> f64 {
        let s: f64 = w
            .iter()
            .zip(l)
            .map(|(&wj, &lj)| (lj * (wj - theta)).max(0.0).powi(2))
            .sum();
        theta * budget + gamma * s.sqrt()
    };
    let top = w.iter().cloned().fold(0.0, f64::max);
    let n = 4000;
    let mut best_k = 0usize;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let v = d(top * k as f64 / n as f64);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let mut lo = top * best_k.saturating_sub(1) as f64 / n as f64;
    let mut hi = top * (best_k + 1).min(n) as f64 / n as f64;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut fa, mut fb) = (d(a), d(b));
    for _ in 0..200 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = d(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = d(b);
        }
    }
    best.min(fa).min(fb)
}
