//! Scalar phi-functions: phi_0 = exp, phi_{m+1}(z) = (phi_m(z) - 1/m!) / z.

use std::ops::{Add, Div, Mul, Sub};

use faer::c64;

use super::MAX_PHI_ORDER;

/// Below this modulus the Taylor series is used instead of the recurrence.
pub const TAYLOR_SWITCH: f64 = 1.0;
const TAYLOR_TERMS: usize = 25;

const INV_FACTORIAL: [f64; 8] = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0, 1.0 / 720.0, 1.0 / 5040.0];

pub(crate) trait PhiScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + From<f64>
{
    fn modulus(self) -> f64;
    fn expo(self) -> Self;
}

impl PhiScalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn expo(self) -> Self {
        self.exp()
    }
}

impl PhiScalar for c64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn expo(self) -> Self {
        self.exp()
    }
}

/// phi_0(z), ..., phi_MAX(z).
pub(crate) fn phi_all<T: PhiScalar>(z: T) -> [T; MAX_PHI_ORDER + 1] {
    let mut out = [T::from(0.0); MAX_PHI_ORDER + 1];
    if z.modulus() < TAYLOR_SWITCH {
        // phi_m(z) = sum_j z^j / (j + m)!, evaluated by Horner.
        for (m, slot) in out.iter_mut().enumerate() {
            let mut acc = T::from(0.0);
            for j in (0..TAYLOR_TERMS).rev() {
                acc = acc * z + T::from(inv_factorial(j + m));
            }
            *slot = acc;
        }
    } else {
        out[0] = z.expo();
        for m in 0..MAX_PHI_ORDER {
            out[m + 1] = (out[m] - T::from(INV_FACTORIAL[m])) / z;
        }
    }
    out
}

fn inv_factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc / k as f64)
}

/// phi_m(z) for real z.
pub fn phi(m: usize, z: f64) -> f64 {
    assert!(m <= MAX_PHI_ORDER, "phi order {m} out of range");
    phi_all(z)[m]
}

/// phi_m(z) for complex z.
pub fn phi_complex(m: usize, z: c64) -> c64 {
    assert!(m <= MAX_PHI_ORDER, "phi order {m} out of range");
    phi_all(z)[m]
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        for m in 0..=MAX_PHI_ORDER {
            assert!((phi(m, 0.0) - 1.0 / factorial(m)).abs() < 1e-16);
        }
    }

    #[test]
    fn phi1_closed_form() {
        assert!((phi(1, -1.0) - 0.6321205588285577).abs() < 1e-15);
        for z in [-3.0, -0.999, -0.5, -0.01, 0.3, 1.5] {
            let exact = if z == 0.0 { 1.0 } else { (f64::exp(z) - 1.0) / z };
            assert!((phi(1, z) - exact).abs() < 1e-13 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn continuous_across_switch() {
        for m in 0..=MAX_PHI_ORDER {
            let below = phi(m, -(TAYLOR_SWITCH - 1e-12));
            let above = phi(m, -(TAYLOR_SWITCH + 1e-12));
            assert!((below - above).abs() < 1e-10 * below.abs(), "m={m}");
        }
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for z in [-20.0, -1.2, -0.4, 0.0, 0.7] {
            for m in 0..=MAX_PHI_ORDER {
                let a = phi(m, z);
                let b = phi_complex(m, c64::new(z, 0.0));
                assert!((a - b.re).abs() <= 1e-13 * a.abs() && b.im.abs() <= 1e-13 * a.abs());
            }
        }
    }
}
