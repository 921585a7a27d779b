//! Gauss-Lobatto quadrature and the nodal Lagrange basis on the reference
//! interval [-1, 1].
//!
//! The (r+1) Gauss-Lobatto points are the endpoints together with the roots
//! of P_r', so the rule is exact for polynomials of degree 2r-1. The same
//! points serve as the interpolation nodes of the degree-r element, which
//! is what makes the lumped mass matrix diagonal.

use crate::error::{Error, Result};

/// Largest supported polynomial degree per cell.
pub const MAX_DEGREE: usize = 16;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    /// Row-major (r+1)x(r+1); entry (i, j) is l_j'(x_i).
    diff: Vec<f64>,
}

/// Builds the degree-`r` reference element, `1 <= r <= MAX_DEGREE`.
pub fn build_reference_element(r: usize) -> Result<ReferenceElement> {
    if !(1..=MAX_DEGREE).contains(&r) {
        return Err(Error::InvalidDegree(r));
    }
    ReferenceElement::compute(r)
}

/// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < f64::EPSILON {
        // P_n'(+-1) = (+-1)^(n+1) n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p_prev - x * p) / (1.0 - x * x)
    };
    (p, dp)
}

impl ReferenceElement {
    /// No degree cap; used internally for auxiliary quadrature rules.
    pub(crate) fn compute(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidDegree(r));
        }
        let rf = r as f64;
        let mut nodes = vec![0.0; r + 1];
        nodes[0] = -1.0;
        nodes[r] = 1.0;
        for (j, node) in nodes.iter_mut().enumerate().take(r).skip(1) {
            // Chebyshev-Gauss-Lobatto guess, increasing order.
            let mut x = -(std::f64::consts::PI * j as f64 / rf).cos();
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre(r, x);
                // Legendre ODE gives P'' from P and P'.
                let d2p = (2.0 * x * dp - rf * (rf + 1.0) * p) / (1.0 - x * x);
                let dx = dp / d2p;
                x -= dx;
                if dx.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NodeNewtonFailed { degree: r, node: j });
            }
            *node = x;
        }
        for j in 0..=r / 2 {
            let s = 0.5 * (nodes[r - j] - nodes[j]);
            nodes[j] = -s;
            nodes[r - j] = s;
        }
        if r % 2 == 0 {
            nodes[r / 2] = 0.0;
        }

        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let (p, _) = legendre(r, x);
                2.0 / (rf * (rf + 1.0) * p * p)
            })
            .collect();
        for j in 0..=r / 2 {
            let w = 0.5 * (weights[j] + weights[r - j]);
            weights[j] = w;
            weights[r - j] = w;
        }

        let bary: Vec<f64> = (0..=r)
            .map(|j| {
                let prod: f64 = (0..=r)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();

        let n = r + 1;
        let mut diff = vec![0.0; n * n];
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                    diff[i * n + j] = d;
                    row_sum += d;
                }
            }
            diff[i * n + i] = -row_sum;
        }

        Ok(Self {
            degree: r,
            nodes,
            weights,
            bary,
            diff,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Derivative of basis function `j` at node `i`.
    pub fn diff(&self, i: usize, j: usize) -> f64 {
        self.diff[i * (self.degree + 1) + j]
    }

    /// Applies the rule to `f` on [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Value of the `j`-th Lagrange basis polynomial at `x` (barycentric form).
    pub fn lagrange_eval(&self, j: usize, x: f64) -> f64 {
        let mut denom = 0.0;
        let mut numer = 0.0;
        for (k, (&xk, &bk)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let d = x - xk;
            if d == 0.0 {
                return if k == j { 1.0 } else { 0.0 };
            }
            let t = bk / d;
            denom += t;
            if k == j {
                numer = t;
            }
        }
        numer / denom
    }

    /// All basis values at `x`; sums to one.
    pub fn basis_values(&self, x: f64) -> Vec<f64> {
        let n = self.degree + 1;
        let mut out = vec![0.0; n];
        if let Some(k) = self.nodes.iter().position(|&xk| xk == x) {
            out[k] = 1.0;
            return out;
        }
        let mut denom = 0.0;
        for (k, (&xk, &bk)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let t = bk / (x - xk);
            out[k] = t;
            denom += t;
        }
        out.iter_mut().for_each(|v| *v /= denom);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_degree() {
        assert_eq!(build_reference_element(0), Err(Error::InvalidDegree(0)));
        assert_eq!(build_reference_element(17), Err(Error::InvalidDegree(17)));
        assert!(build_reference_element(16).is_ok());
    }

    #[test]
    fn trapezoid_and_simpson() {
        let e1 = build_reference_element(1).unwrap();
        assert_eq!(e1.nodes(), &[-1.0, 1.0]);
        assert_eq!(e1.weights(), &[1.0, 1.0]);

        let e2 = build_reference_element(2).unwrap();
        assert_eq!(e2.nodes(), &[-1.0, 0.0, 1.0]);
        let expect = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (w, e) in e2.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_four_interior_nodes() {
        let e = build_reference_element(4).unwrap();
        let s = (3.0f64 / 7.0).sqrt();
        assert!((e.nodes()[1] + s).abs() < 1e-15);
        assert!((e.nodes()[3] - s).abs() < 1e-15);
        assert_eq!(e.nodes()[2], 0.0);
    }

    #[test]
    fn invariants_all_degrees() {
        for r in 1..=MAX_DEGREE {
            let e = build_reference_element(r).unwrap();
            assert_eq!(e.nodes()[0], -1.0);
            assert_eq!(e.nodes()[r], 1.0);
            assert!(e.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(e.weights().iter().all(|&w| w > 0.0));
            let total: f64 = e.weights().iter().sum();
            assert!((total - 2.0).abs() < 1e-14, "r={r} sum={total}");
            for j in 0..=r {
                assert!((e.nodes()[j] + e.nodes()[r - j]).abs() < 1e-14);
                assert!((e.weights()[j] - e.weights()[r - j]).abs() < 1e-14);
                let row: f64 = (0..=r).map(|k| e.diff(j, k)).sum();
                assert!(row.abs() < 1e-12, "r={r} row {j} sum {row}");
            }
        }
    }

    #[test]
    fn lagrange_basis_values() {
        let e = build_reference_element(2).unwrap();
        assert!((e.lagrange_eval(1, 0.5) - 0.75).abs() < 1e-15);
        for r in [1, 3, 7, 12] {
            let e = build_reference_element(r).unwrap();
            for i in 0..=r {
                for j in 0..=r {
                    let v = e.lagrange_eval(j, e.nodes()[i]);
                    assert_eq!(v, if i == j { 1.0 } else { 0.0 });
                }
            }
            for x in [-0.93, -0.2, 0.011, 0.77] {
                let s: f64 = (0..=r).map(|j| e.lagrange_eval(j, x)).sum();
                assert!((s - 1.0).abs() < 1e-13);
                let b = e.basis_values(x);
                for j in 0..=r {
                    assert!((b[j] - e.lagrange_eval(j, x)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn diff_matrix_reproduces_monomial_derivatives() {
        for r in 1..=MAX_DEGREE {
            let e = build_reference_element(r).unwrap();
            for m in 1..=r {
                for i in 0..=r {
                    let d: f64 = (0..=r)
                        .map(|j| e.diff(i, j) * e.nodes()[j].powi(m as i32))
                        .sum();
                    let exact = m as f64 * e.nodes()[i].powi(m as i32 - 1);
                    assert!((d - exact).abs() < 1e-11 * (1.0 + exact.abs()), "r={r} m={m} err={}", (d - exact).abs());
                }
            }
        }
    }
}
