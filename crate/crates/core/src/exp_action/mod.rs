//! Actions of `exp(tL)` and the phi-functions of `L = M^{-1} A` on nodal
//! vectors, where `A = -c K` is the negated, scaled stiffness matrix.
//!
//! Every backend evaluates the same quantity,
//!
//! ```text
//! sum_m phi_m(t (L - s I)) v_m,
//! ```
//!
//! for a list of `(m, v_m)` terms and a scalar shift `s >= 0`. Exponential
//! actions, single phi actions and the exact integral of a polynomial source
//! against the semigroup are all special cases.

mod contour;
mod eigen;
pub mod phi;
mod tensor;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid_fem::DiscreteOperator;

pub use contour::CONTOUR_NODES;
pub use phi::{phi, phi_complex};

/// Largest phi index supported (k_max + 1 with k_max = 6).
pub const MAX_PHI_ORDER: usize = 7;

/// Dense factorization budget of the eigen backend.
pub const EIGEN_NODE_LIMIT: usize = 8192;

/// Problems up to this size default to the eigen backend.
pub const DEFAULT_EIGEN_NODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Eigen,
    Contour,
    Tensor,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Backend::Eigen),
            "contour" => Ok(Backend::Contour),
            "tensor" => Ok(Backend::Tensor),
            other => Err(Error::Config(format!("unknown backend `{other}`"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Eigen => "eigen",
            Backend::Contour => "contour",
            Backend::Tensor => "tensor",
        })
    }
}

/// Eigen for small problems, Tensor for 2D tensor grids, Contour otherwise.
pub fn default_backend(op: &DiscreteOperator) -> Backend {
    if op.tensor_dim() == Some(2) {
        Backend::Tensor
    } else if op.len() <= DEFAULT_EIGEN_NODES {
        Backend::Eigen
    } else {
        Backend::Contour
    }
}

enum Inner {
    Eigen(eigen::EigenData),
    Contour(contour::ContourData),
    Tensor(tensor::TensorData),
}

pub struct ExpEvaluator {
    op: Arc<DiscreteOperator>,
    backend: Backend,
    inner: Inner,
}

impl std::fmt::Debug for ExpEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpEvaluator")
            .field("backend", &self.backend)
            .field("nodes", &self.op.len())
            .finish()
    }
}

pub fn build_evaluator(op: Arc<DiscreteOperator>, backend: Backend) -> Result<ExpEvaluator> {
    let inner = match backend {
        Backend::Eigen => {
            if op.len() > EIGEN_NODE_LIMIT {
                return Err(Error::OversizeProblem {
                    nodes: op.len(),
                    limit: EIGEN_NODE_LIMIT,
                });
            }
            Inner::Eigen(eigen::EigenData::new(&op.stiffness_csr(), op.mass_diag(), op.diffusion_coeff())?)
        }
        Backend::Contour => Inner::Contour(contour::ContourData::new(&op)),
        Backend::Tensor => Inner::Tensor(tensor::TensorData::new(&op)?),
    };
    Ok(ExpEvaluator { op, backend, inner })
}

impl ExpEvaluator {
    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn len(&self) -> usize {
        self.op.len()
    }

    pub fn is_empty(&self) -> bool {
        self.op.is_empty()
    }

    /// Eigenvalues of `L` (all <= 0), when the backend has them.
    pub fn eigenvalues(&self) -> Option<Vec<f64>> {
        match &self.inner {
            Inner::Eigen(e) => Some(e.eigenvalues().to_vec()),
            Inner::Tensor(t) => Some(t.eigenvalues()),
            Inner::Contour(_) => None,
        }
    }

    /// `sum_m phi_m(t (L - shift I)) v_m`.
    pub fn phi_combination(&self, t: f64, shift: f64, terms: &[(usize, &[f64])]) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let n = self.len();
        for &(m, v) in terms {
            if m > MAX_PHI_ORDER {
                return Err(Error::PhiOrderOutOfRange(m));
            }
            if v.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if terms.is_empty() {
            return Ok(vec![0.0; n]);
        }
        if t == 0.0 {
            let mut out = vec![0.0; n];
            for &(m, v) in terms {
                let c = 1.0 / phi::factorial(m);
                out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
            }
            return Ok(out);
        }
        match &self.inner {
            Inner::Eigen(e) => Ok(e.combine(t, shift, terms)),
            Inner::Tensor(d) => Ok(d.combine(t, shift, terms)),
            Inner::Contour(c) => c.combine(t, shift, terms),
        }
    }

    /// `exp(tL) v`.
    pub fn exp_action(&self, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.phi_combination(t, 0.0, &[(0, v)])
    }

    /// `phi_m(tL) v`.
    pub fn phi_action(&self, m: usize, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.phi_combination(t, 0.0, &[(m, v)])
    }

    /// Exact integral `int_{t_{n-1}}^{t_n} exp((t_n - s) L) p(s) ds` for the
    /// polynomial `p = sum_m coeffs[m] theta^m`, `theta = (s - t_{n-1}) / tau`.
    pub fn step_integral_action(&self, tau: f64, coeffs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if coeffs.len() > MAX_PHI_ORDER {
            return Err(Error::DegreeOverflow(coeffs.len().saturating_sub(1)));
        }
        let scaled: Vec<Vec<f64>> = coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let s = tau * phi::factorial(m);
                c.iter().map(|x| s * x).collect()
            })
            .collect();
        let terms: Vec<(usize, &[f64])> = scaled.iter().enumerate().map(|(m, c)| (m + 1, c.as_slice())).collect();
        self.phi_combination(tau, 0.0, &terms)
    }
}
