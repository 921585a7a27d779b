use faer::Mat;

use super::eigen::EigenData;
use crate::error::{Error, Result};
use crate::grid_fem::DiscreteOperator;

/// Per-axis eigenbasis of a tensor-product operator.
///
/// In 2D the generator is the Kronecker sum `L1 (x) I + I (x) L1`, so its
/// eigenvectors are products of 1D eigenvectors and its eigenvalues are
/// pairwise sums. Every phi-function is then diagonal in the product basis,
/// which is applied as `Q1^T W Q1` on the n x n array of nodal values.
pub(super) struct TensorData {
    axis: EigenData,
    dim: usize,
}

impl TensorData {
    pub(super) fn new(op: &DiscreteOperator) -> Result<Self> {
        let (factor, mass) = op.axis_factors().ok_or(Error::NotTensorGrid)?;
        let dim = op.tensor_dim().ok_or(Error::NotTensorGrid)?;
        let axis = EigenData::new(factor, mass, op.diffusion_coeff())?;
        Ok(Self { axis, dim })
    }

    pub(super) fn eigenvalues(&self) -> Vec<f64> {
        let l = &self.axis.lambda;
        match self.dim {
            1 => l.clone(),
            _ => l.iter().flat_map(|&a| l.iter().map(move |&b| a + b)).collect(),
        }
    }

    pub(super) fn combine(&self, t: f64, shift: f64, terms: &[(usize, &[f64])]) -> Vec<f64> {
        if self.dim == 1 {
            return self.axis.combine(t, shift, terms);
        }
        let n = self.axis.lambda.len();
        let d = &self.axis.sqrt_m;
        let q = &self.axis.q;
        let l = &self.axis.lambda;
        // The axis evaluator is never used on its own in 2D, so its phi
        // cache only ever holds tables of the 2D spectrum.
        let phis = self
            .axis
            .phi_table(t, shift, || (0..n * n).map(|idx| l[idx / n] + l[idx % n]).collect());
        let mut acc = Mat::<f64>::zeros(n, n);
        for &(m, v) in terms {
            let w = Mat::<f64>::from_fn(n, n, |i, j| d[i] * d[j] * v[i * n + j]);
            let y = q.transpose() * &w * q;
            for j in 0..n {
                for i in 0..n {
                    acc[(i, j)] += phis[i * n + j][m] * y[(i, j)];
                }
            }
        }
        let out = q * &acc * q.transpose();
        let mut res = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                res[i * n + j] = out[(i, j)] / (d[i] * d[j]);
            }
        }
        res
    }
}
