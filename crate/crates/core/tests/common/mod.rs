//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerical kernels.
#![allow(dead_code)]

pub type Dense = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            for j in 0..m {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn matvec(a: &Dense, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn inf_norm(a: &Dense) -> f64 {
    a.iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(t A)` by scaling and squaring with a 30-term Taylor polynomial.
pub fn expm(a: &Dense, t: f64) -> Dense {
    let n = a.len();
    let norm = inf_norm(a) * t.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let s = t / 2f64.powi(squarings as i32);
    let b: Dense = a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = matmul(&term, &b);
        term.iter_mut().flatten().for_each(|x| *x /= k as f64);
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// `phi_m(z) = int_0^1 e^{(1-s) z} s^{m-1} / (m-1)! ds` for `m >= 1`.
pub fn phi_by_quadrature(m: usize, z: f64) -> f64 {
    if m == 0 {
        return z.exp();
    }
    let c = factorial(m - 1);
    simpson(&|s| ((1.0 - s) * z).exp() * s.powi(m as i32 - 1) / c, 0.0, 1.0, 1e-15)
}

/// 4-point Gauss-Legendre rule on [-1, 1].
pub const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Nodes and weights of the composite 4-point rule with `panels` panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let x0 = a + h * p as f64;
            GAUSS4.iter().map(move |&(x, w)| (x0 + 0.5 * h * (x + 1.0), 0.5 * h * w))
        })
        .collect()
}

/// Root of `g` in `[lo, hi]` by plain bisection; `g(lo)` and `g(hi)` differ in sign.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    assert!(glo * g(hi) < 0.0, "bracket does not change sign");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Flory-Huggins well position for `theta = 1/4`, `theta_c = 1`.
pub fn alpha_oracle() -> f64 {
    bisect(|u| u - 0.125 * ((1.0 + u) / (1.0 - u)).ln(), 0.5, 1.0 - 1e-15)
}

/// Lagrange basis on `nodes`, evaluated at `x`.
pub fn lagrange_basis(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &xi)| (x - xi) / (nodes[j] - xi))
        .product()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Deterministic vector with entries in [-1, 1].
pub fn wiggle(n: usize, seed: f64) -> Vec<f64> {
    (0..n).map(|i| (seed * (i as f64 + 1.0) + 0.3 * seed * seed).sin()).collect()
}

/// Provisional value of one exponential multistep step by brute force:
/// `exp(tau L) u + int_0^tau exp((tau - s) L) p(s) ds`, where `p` interpolates
/// `f_levels[j]` (most recent first) at `s = -j tau`. 200-point composite
/// Gauss quadrature, dense exponential at every node.
pub fn brute_force_step(l: &Dense, u: &[f64], f_levels: &[Vec<f64>], tau: f64) -> Vec<f64> {
    let k = f_levels.len();
    let nodes: Vec<f64> = (0..k).map(|j| -(j as f64) * tau).collect();
    let mut out = matvec(&expm(l, tau), u);
    for (s, w) in composite_gauss(0.0, tau, 50) {
        let mut p = vec![0.0; u.len()];
        for (j, f) in f_levels.iter().enumerate() {
            let b = lagrange_basis(&nodes, j, s);
            p.iter_mut().zip(f).for_each(|(pi, fi)| *pi += b * fi);
        }
        let e = matvec(&expm(l, tau - s), &p);
        out.iter_mut().zip(e).for_each(|(o, x)| *o += w * x);
    }
    out
}
