use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};

use super::MAX_PHI_ORDER;
use crate::error::{Error, Result};
use crate::grid_fem::DiscreteOperator;
use crate::sparse::CsrMatrix;

/// Trapezoidal nodes on each half of the hyperbola (2N+1 in total,
/// N+1 distinct solves after conjugate symmetry).
pub const CONTOUR_NODES: usize = 20;

// Hyperbola z(u) = mu (1 + sin(i u - a)) with the single-time optimal
// parameters of Weideman and Trefethen (2007).
const HYP_ANGLE: f64 = 1.1721;
const HYP_STEP: f64 = 1.0818;
const HYP_SCALE: f64 = 4.4921;

struct Node {
    z: c64,
    weight: c64,
    lu: Lu<usize, c64>,
}

pub(super) struct ContourData {
    generator: CsrMatrix,
    symbolic: Mutex<Option<SymbolicLu<usize>>>,
    cache: Mutex<HashMap<(u64, u64), Arc<Vec<Node>>>>,
}

impl ContourData {
    pub(super) fn new(op: &DiscreteOperator) -> Self {
        Self {
            generator: op.generator_csr(),
            symbolic: Mutex::new(None),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// `(w I - L)` with the diagonal always present in the pattern.
    fn shifted(&self, w: c64) -> SparseColMat<usize, c64> {
        let n = self.generator.nrows();
        let mut trip = Vec::with_capacity(self.generator.nnz() + n);
        for i in 0..n {
            let mut diag = w;
            for (j, v) in self.generator.row(i) {
                if j == i {
                    diag -= c64::new(v, 0.0);
                } else {
                    trip.push(Triplet::new(i, j, c64::new(-v, 0.0)));
                }
            }
            trip.push(Triplet::new(i, i, diag));
        }
        SparseColMat::try_new_from_triplets(n, n, &trip).expect("valid pattern")
    }

    fn nodes(&self, t: f64, shift: f64) -> Result<Arc<Vec<Node>>> {
        let key = (t.to_bits(), shift.to_bits());
        if let Some(nodes) = self.cache.lock().unwrap().get(&key) {
            return Ok(nodes.clone());
        }
        let n_half = CONTOUR_NODES;
        let h = HYP_STEP / n_half as f64;
        let mu = HYP_SCALE * n_half as f64 / t;
        let mut nodes = Vec::with_capacity(n_half + 1);
        for k in 0..=n_half {
            let u = k as f64 * h;
            let arg = c64::new(-HYP_ANGLE, u);
            let z = mu * (c64::new(1.0, 0.0) + arg.sin());
            let dz = c64::new(0.0, mu) * arg.cos();
            // h / (2 pi i) * z'(u); interior nodes are counted twice via 2 Re.
            let mut weight = dz * c64::new(0.0, -h / (2.0 * PI));
            if k > 0 {
                weight *= 2.0;
            }
            let mat = self.shifted(z + shift);
            let symbolic = {
                let mut guard = self.symbolic.lock().unwrap();
                if guard.is_none() {
                    *guard = Some(SymbolicLu::try_new(mat.symbolic()).map_err(|_| Error::Factorization(k))?);
                }
                guard.clone().unwrap()
            };
            let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|_| Error::Factorization(k))?;
            nodes.push(Node { z, weight, lu });
        }
        let nodes = Arc::new(nodes);
        self.cache.lock().unwrap().insert(key, nodes.clone());
        Ok(nodes)
    }

    pub(super) fn combine(&self, t: f64, shift: f64, terms: &[(usize, &[f64])]) -> Result<Vec<f64>> {
        let n = self.generator.nrows();
        let nodes = self.nodes(t, shift)?;
        let mut out = vec![0.0; n];
        for node in nodes.iter() {
            // The contour encloses 0, and phi_m(w) - e^w / w^m is a rational
            // function decaying like 1/w^2 with poles only at 0, so its
            // integral vanishes: e^w / w^m can stand in for phi_m(w).
            let w = node.z * t;
            let ew = w.exp();
            let mut phis = [c64::new(0.0, 0.0); MAX_PHI_ORDER + 1];
            let mut pow = c64::new(1.0, 0.0);
            for p in phis.iter_mut() {
                *p = ew / pow;
                pow *= w;
            }
            let rhs = Mat::<c64>::from_fn(n, 1, |i, _| {
                terms
                    .iter()
                    .fold(c64::new(0.0, 0.0), |acc, &(m, v)| acc + phis[m] * v[i])
            });
            let x = node.lu.solve(&rhs);
            for (i, o) in out.iter_mut().enumerate() {
                *o += (node.weight * x[(i, 0)]).re;
            }
        }
        Ok(out)
    }
}
