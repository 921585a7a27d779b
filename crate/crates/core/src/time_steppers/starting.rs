//! Two-stage Gauss-Legendre Runge-Kutta (order 4) for `u' = L u + f(u, t)`,
//! used to generate the first k-1 levels of the multistep scheme.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::Mat;

use super::Mode;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const BOUNDARY_FRACTION: f64 = 0.99;

const SQRT3_6: f64 = 0.288_675_134_594_812_9;
const A: [[f64; 2]; 2] = [[0.25, 0.25 - SQRT3_6], [0.25 + SQRT3_6, 0.25]];
const B: [f64; 2] = [0.5, 0.5];
const C: [f64; 2] = [0.5 - SQRT3_6, 0.5 + SQRT3_6];

/// Reusable Newton machinery for one generator `L`.
pub struct GaussLegendre {
    generator: CsrMatrix,
    symbolic: Option<SymbolicLu<usize>>,
}

impl GaussLegendre {
    pub fn new(generator: CsrMatrix) -> Self {
        Self {
            generator,
            symbolic: None,
        }
    }

    fn jacobian(&self, tau: f64, df: [&[f64]; 2]) -> CsrMatrix {
        let n = self.generator.nrows();
        let mut trip = Vec::with_capacity(4 * (self.generator.nnz() + n));
        for bi in 0..2 {
            for bj in 0..2 {
                let s = -tau * A[bi][bj];
                for i in 0..n {
                    let mut diag = s * df[bj][i];
                    if bi == bj {
                        diag += 1.0;
                    }
                    trip.push((bi * n + i, bj * n + i, diag));
                    for (j, v) in self.generator.row(i) {
                        trip.push((bi * n + i, bj * n + j, s * v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(2 * n, 2 * n, &trip)
    }

    /// Advances `u` from `t` to `t + tau`. `level` only labels failures.
    pub fn step(&mut self, mode: &Mode, u: &[f64], t: f64, tau: f64, level: usize) -> Result<Vec<f64>> {
        let n = u.len();
        let times = [t + C[0] * tau, t + C[1] * tau];
        let mut y = [u.to_vec(), u.to_vec()];
        let mut last_update = f64::INFINITY;
        let mut converged = false;
        for it in 0..NEWTON_MAX_ITER {
            let k: Vec<Vec<f64>> = (0..2)
                .map(|s| {
                    let ly = self.generator.matvec(&y[s]);
                    let (f, _) = mode.source(&y[s], times[s]);
                    ly.iter().zip(&f).map(|(a, b)| a + b).collect()
                })
                .collect();
            let mut rhs = Mat::<f64>::zeros(2 * n, 1);
            for s in 0..2 {
                for i in 0..n {
                    let g = y[s][i] - u[i] - tau * (A[s][0] * k[0][i] + A[s][1] * k[1][i]);
                    rhs[(s * n + i, 0)] = -g;
                }
            }
            let df = [mode.source_derivative(&y[0]), mode.source_derivative(&y[1])];
            let jac = self.jacobian(tau, [&df[0], &df[1]]).to_faer();
            if self.symbolic.is_none() {
                self.symbolic = Some(SymbolicLu::try_new(jac.symbolic()).map_err(|_| Error::StartingFailure {
                    level,
                    iterations: it,
                    residual: f64::NAN,
                })?);
            }
            let lu = Lu::try_new_with_symbolic(self.symbolic.clone().unwrap(), jac.as_ref()).map_err(|_| {
                Error::StartingFailure {
                    level,
                    iterations: it,
                    residual: f64::NAN,
                }
            })?;
            let delta = lu.solve(&rhs);
            // Fraction-to-boundary damping keeps logarithmic stages inside (-1, 1).
            let mut lambda: f64 = 1.0;
            if mode.has_log_domain() {
                for s in 0..2 {
                    for i in 0..n {
                        let (yi, d) = (y[s][i], delta[(s * n + i, 0)]);
                        let room = if d > 0.0 { 1.0 - yi } else { 1.0 + yi };
                        if d != 0.0 && yi.abs() < 1.0 {
                            lambda = lambda.min(BOUNDARY_FRACTION * room / d.abs());
                        }
                    }
                }
            }
            let mut max_delta: f64 = 0.0;
            let mut max_y: f64 = 0.0;
            for s in 0..2 {
                for i in 0..n {
                    let d = lambda * delta[(s * n + i, 0)];
                    y[s][i] += d;
                    max_delta = max_delta.max(d.abs());
                    max_y = max_y.max(y[s][i].abs());
                }
            }
            last_update = max_delta;
            if !max_delta.is_finite() {
                break;
            }
            if lambda == 1.0 && max_delta <= NEWTON_TOL * max_y.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::StartingFailure {
                level,
                iterations: NEWTON_MAX_ITER,
                residual: last_update,
            });
        }
        let mut out = u.to_vec();
        for s in 0..2 {
            let ly = self.generator.matvec(&y[s]);
            let (f, _) = mode.source(&y[s], times[s]);
            for i in 0..n {
                out[i] += tau * B[s] * (ly[i] + f[i]);
            }
        }
        Ok(out)
    }
}
