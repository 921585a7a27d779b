use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use faer::{Col, Mat, Side};

use super::phi::phi_all;
use super::MAX_PHI_ORDER;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Eigenpairs of the symmetrized generator `S = -c M^{-1/2} K M^{-1/2}`,
/// so that `f(L) v = M^{-1/2} Q f(Lambda) Q^T M^{1/2} v`.
pub(super) struct EigenData {
    pub(super) lambda: Vec<f64>,
    pub(super) q: Mat<f64>,
    pub(super) sqrt_m: Vec<f64>,
    phi_cache: Mutex<HashMap<(u64, u64), Arc<Vec<[f64; MAX_PHI_ORDER + 1]>>>>,
}

/// Distinct `(t, shift)` tables kept before the cache is flushed.
const PHI_CACHE_LIMIT: usize = 16;

impl EigenData {
    pub(super) fn new(stiffness: &CsrMatrix, mass: &[f64], diffusion: f64) -> Result<Self> {
        let n = mass.len();
        let sqrt_m: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
        let mut s = Mat::<f64>::zeros(n, n);
        for (i, j, v) in stiffness.triplets() {
            s[(i, j)] = -diffusion * v / (sqrt_m[i] * sqrt_m[j]);
        }
        // Exact symmetry for the solver.
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        let evd = s.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let lambda: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        Ok(Self {
            lambda,
            q: evd.U().to_owned(),
            sqrt_m,
            phi_cache: Mutex::new(HashMap::new()),
        })
    }

    pub(super) fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub(super) fn combine(&self, t: f64, shift: f64, terms: &[(usize, &[f64])]) -> Vec<f64> {
        let n = self.lambda.len();
        let phis = self.phi_table(t, shift, || self.lambda.clone());
        let w = Mat::<f64>::from_fn(n, terms.len(), |i, c| self.sqrt_m[i] * terms[c].1[i]);
        let y = self.q.transpose() * &w;
        let acc = Col::<f64>::from_fn(n, |i| {
            terms
                .iter()
                .enumerate()
                .map(|(c, &(m, _))| phis[i][m] * y[(i, c)])
                .sum()
        });
        let out = &self.q * &acc;
        (0..n).map(|i| out[i] / self.sqrt_m[i]).collect()
    }

    /// `phi_m(t (lambda - shift))` for every eigenvalue of `spectrum()`,
    /// cached per `(t, shift)` since time steps are uniform.
    pub(super) fn phi_table(
        &self,
        t: f64,
        shift: f64,
        spectrum: impl FnOnce() -> Vec<f64>,
    ) -> Arc<Vec<[f64; MAX_PHI_ORDER + 1]>> {
        let key = (t.to_bits(), shift.to_bits());
        if let Some(tab) = self.phi_cache.lock().unwrap().get(&key) {
            return tab.clone();
        }
        let tab: Arc<Vec<_>> = Arc::new(spectrum().into_iter().map(|l| phi_all(t * (l - shift))).collect());
        let mut cache = self.phi_cache.lock().unwrap();
        if cache.len() >= PHI_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, tab.clone());
        tab
    }
}
