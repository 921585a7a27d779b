use crate::error::{Error, Result};

/// Largest supported number of steps.
pub const MAX_STEPS: usize = 6;

/// Monomial coefficients of the backward Lagrange extrapolation basis.
///
/// With `theta = (s - t_{n-1}) / tau`, the past level `t_{n-j}` sits at
/// `theta = 1 - j`. Entry `[j - 1][m]` is the coefficient of `theta^m` in
/// `L_j`, the degree-(k-1) polynomial equal to one at `t_{n-j}` and zero at
/// the other `k - 1` levels.
pub fn lagrange_extrapolation_coeffs(k: usize) -> Result<Vec<Vec<f64>>> {
    if !(1..=MAX_STEPS).contains(&k) {
        return Err(Error::InvalidStepCount(k));
    }
    let node = |j: usize| 1.0 - j as f64;
    let mut out = Vec::with_capacity(k);
    for j in 1..=k {
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for i in (1..=k).filter(|&i| i != j) {
            // poly *= (theta - node(i))
            let mut next = vec![0.0; poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * node(i);
            }
            poly = next;
            denom *= node(j) - node(i);
        }
        out.push(poly.into_iter().map(|c| c / denom).collect());
    }
    Ok(out)
}

/// Coefficient vectors `c_m = sum_j L_j[m] f_j` of the extrapolant of
/// `levels` (most recent first).
pub fn extrapolant(coeffs: &[Vec<f64>], levels: &[&[f64]]) -> Vec<Vec<f64>> {
    let k = coeffs.len();
    debug_assert!(levels.len() >= k);
    let n = levels[0].len();
    (0..k)
        .map(|m| {
            let mut c = vec![0.0; n];
            for (row, f) in coeffs.iter().zip(levels) {
                let w = row[m];
                c.iter_mut().zip(f.iter()).for_each(|(ci, fi)| *ci += w * fi);
            }
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(poly: &[f64], x: f64) -> f64 {
        poly.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    #[test]
    fn one_and_two_steps() {
        assert_eq!(lagrange_extrapolation_coeffs(1).unwrap(), vec![vec![1.0]]);
        assert_eq!(
            lagrange_extrapolation_coeffs(2).unwrap(),
            vec![vec![1.0, 1.0], vec![0.0, -1.0]]
        );
    }

    #[test]
    fn rejects_bad_k() {
        assert_eq!(lagrange_extrapolation_coeffs(0), Err(Error::InvalidStepCount(0)));
        assert_eq!(lagrange_extrapolation_coeffs(7), Err(Error::InvalidStepCount(7)));
    }

    #[test]
    fn kronecker_property() {
        for k in 1..=MAX_STEPS {
            let c = lagrange_extrapolation_coeffs(k).unwrap();
            for (j, poly) in c.iter().enumerate() {
                for i in 0..k {
                    let v = eval(poly, -(i as f64));
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-12, "k={k} j={j} i={i}");
                }
            }
        }
    }

    #[test]
    fn reproduces_cubic() {
        // q(s) = s^3 sampled at t_{n-j} = t0 - (j-1) tau, evaluated at theta = 0.5.
        let (t0, tau) = (0.7, 0.1);
        let c = lagrange_extrapolation_coeffs(4).unwrap();
        let samples: Vec<f64> = (1..=4).map(|j| (t0 - (j as f64 - 1.0) * tau).powi(3)).collect();
        let theta: f64 = 0.5;
        let v: f64 = c.iter().zip(&samples).map(|(p, q)| eval(p, theta) * q).sum();
        let exact = (t0 + theta * tau).powi(3);
        assert!((v - exact).abs() < 1e-12);
    }
}
