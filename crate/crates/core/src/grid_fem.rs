//! Uniform 1D and tensor-product 2D grids with Gauss-Lobatto lumped-mass
//! finite elements.
//!
//! Nodal vectors in 2D are stored row-major: node (i, j) at coordinates
//! (x_i, y_j) lives at index `i * n + j`, with `n` nodes per axis.

use std::io::Write;

use crate::error::{Error, Result};
use crate::gauss_lobatto::{build_reference_element, ReferenceElement};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Neumann,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    min: f64,
    max: f64,
    cells: usize,
    bc: BoundaryCondition,
    element: ReferenceElement,
    axis_coords: Vec<f64>,
    axis_weights: Vec<f64>,
    weights: Vec<f64>,
}

/// Builds a uniform grid of `cells` cells per axis on `[min, max]^dim`.
pub fn build_grid(
    dim: usize,
    domain: (f64, f64),
    cells: usize,
    degree: usize,
    bc: BoundaryCondition,
) -> Result<Grid> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if cells < 2 {
        return Err(Error::TooFewCells(cells));
    }
    let (min, max) = domain;
    if !(min < max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidDomain(min, max));
    }
    let element = build_reference_element(degree)?;
    let r = degree;
    let h = (max - min) / cells as f64;
    let n = match bc {
        BoundaryCondition::Neumann => cells * r + 1,
        BoundaryCondition::Periodic => cells * r,
    };

    let mut axis_coords = vec![0.0; n];
    let mut axis_weights = vec![0.0; n];
    for c in 0..cells {
        let left = min + (max - min) * c as f64 / cells as f64;
        let right = min + (max - min) * (c + 1) as f64 / cells as f64;
        for (a, (&xi, &w)) in element.nodes().iter().zip(element.weights()).enumerate() {
            let g = c * r + a;
            if g < n {
                axis_coords[g] = if a == 0 {
                    left
                } else if a == r {
                    right
                } else {
                    0.5 * (left + right) + 0.5 * h * xi
                };
            }
            axis_weights[g % n] += 0.5 * h * w;
        }
    }

    let weights = match dim {
        1 => axis_weights.clone(),
        _ => axis_weights
            .iter()
            .flat_map(|&wi| axis_weights.iter().map(move |&wj| wi * wj))
            .collect(),
    };

    Ok(Grid {
        dim,
        min,
        max,
        cells,
        bc,
        element,
        axis_coords,
        axis_weights,
        weights,
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn h(&self) -> f64 {
        (self.max - self.min) / self.cells as f64
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.axis_coords.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn axis_coords(&self) -> &[f64] {
        &self.axis_coords
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weights
    }

    /// Lumped mass diagonal.
    pub fn global_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Measure of the domain.
    pub fn measure(&self) -> f64 {
        (self.max - self.min).powi(self.dim as i32)
    }

    /// Coordinates of global node `idx` (length `dim`).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.dim {
            1 => vec![self.axis_coords[idx]],
            _ => {
                let n = self.nodes_per_axis();
                vec![self.axis_coords[idx / n], self.axis_coords[idx % n]]
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.num_nodes()).map(|i| self.point(i))
    }

    /// Cell index and local basis values for coordinate `x` on one axis.
    fn locate(&self, x: f64) -> (usize, Vec<f64>) {
        let h = self.h();
        let mut x = x;
        if self.bc == BoundaryCondition::Periodic {
            let len = self.max - self.min;
            x = self.min + (x - self.min).rem_euclid(len);
        }
        let c = (((x - self.min) / h).floor() as isize).clamp(0, self.cells as isize - 1) as usize;
        let left = self.min + (self.max - self.min) * c as f64 / self.cells as f64;
        let xi = (2.0 * (x - left) / h - 1.0).clamp(-1.0, 1.0);
        (c, self.element.basis_values(xi))
    }

    fn axis_index(&self, cell: usize, local: usize) -> usize {
        (cell * self.degree() + local) % self.nodes_per_axis()
    }

    /// Evaluates the piecewise polynomial with nodal values `u` at `x`.
    pub fn evaluate(&self, u: &[f64], x: &[f64]) -> f64 {
        assert_eq!(u.len(), self.num_nodes());
        match self.dim {
            1 => {
                let (c, b) = self.locate(x[0]);
                b.iter()
                    .enumerate()
                    .map(|(a, &w)| w * u[self.axis_index(c, a)])
                    .sum()
            }
            _ => {
                let n = self.nodes_per_axis();
                let (cx, bx) = self.locate(x[0]);
                let (cy, by) = self.locate(x[1]);
                let mut s = 0.0;
                for (a, &wx) in bx.iter().enumerate() {
                    let i = self.axis_index(cx, a);
                    for (b, &wy) in by.iter().enumerate() {
                        s += wx * wy * u[i * n + self.axis_index(cy, b)];
                    }
                }
                s
            }
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.num_nodes() {
            return Err(Error::SizeMismatch {
                expected: self.num_nodes(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// Discrete inner product `sum_j w_j u_j v_j`.
pub fn discrete_inner(grid: &Grid, u: &[f64], v: &[f64]) -> Result<f64> {
    grid.check_len(u)?;
    grid.check_len(v)?;
    Ok(grid
        .global_weights()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(w, (a, b))| w * a * b)
        .sum())
}

pub fn discrete_norm(grid: &Grid, u: &[f64]) -> Result<f64> {
    Ok(discrete_inner(grid, u, u)?.sqrt())
}

/// Exact L2 norm of the finite element function with nodal values `u`
/// (consistent mass), computed with a Gauss-Lobatto rule of degree r+1.
pub fn continuous_l2_norm(grid: &Grid, u: &[f64]) -> Result<f64> {
    grid.check_len(u)?;
    let quad = ReferenceElement::compute(grid.degree() + 1)?;
    let h = grid.h();
    let basis: Vec<Vec<f64>> = quad
        .nodes()
        .iter()
        .map(|&x| grid.element().basis_values(x))
        .collect();
    let r = grid.degree();
    let mut total = 0.0;
    match grid.dim() {
        1 => {
            for c in 0..grid.cells() {
                for (q, &wq) in quad.weights().iter().enumerate() {
                    let val: f64 = (0..=r).map(|a| basis[q][a] * u[grid.axis_index(c, a)]).sum();
                    total += 0.5 * h * wq * val * val;
                }
            }
        }
        _ => {
            let n = grid.nodes_per_axis();
            for cx in 0..grid.cells() {
                for cy in 0..grid.cells() {
                    for (qx, &wx) in quad.weights().iter().enumerate() {
                        for (qy, &wy) in quad.weights().iter().enumerate() {
                            let mut val = 0.0;
                            for a in 0..=r {
                                let i = grid.axis_index(cx, a);
                                for b in 0..=r {
                                    val += basis[qx][a] * basis[qy][b] * u[i * n + grid.axis_index(cy, b)];
                                }
                            }
                            total += 0.25 * h * h * wx * wy * val * val;
                        }
                    }
                }
            }
        }
    }
    Ok(total.sqrt())
}

/// L2 distance between two finite element functions on grids over the same
/// domain, e.g. a coarse run and a finer reference. Integrates exactly (up to
/// rounding) on the common refinement of both meshes.
pub fn l2_distance(a: &Grid, u: &[f64], b: &Grid, v: &[f64]) -> Result<f64> {
    a.check_len(u)?;
    b.check_len(v)?;
    if a.dim() != b.dim() {
        return Err(Error::InvalidDimension(b.dim()));
    }
    if a.domain() != b.domain() {
        return Err(Error::InvalidDomain(b.domain().0, b.domain().1));
    }
    let (lo, hi) = a.domain();
    let mut breaks: Vec<f64> = (0..=a.cells())
        .map(|c| lo + (hi - lo) * c as f64 / a.cells() as f64)
        .chain((0..=b.cells()).map(|c| lo + (hi - lo) * c as f64 / b.cells() as f64))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (hi - lo));
    // (a - b)^2 has degree 2 max(r_a, r_b); q Lobatto points are exact to 2q - 3.
    let quad = ReferenceElement::compute(a.degree().max(b.degree()) + 2)?;
    let pts: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|w| {
            let (x0, x1) = (w[0], w[1]);
            quad.nodes()
                .iter()
                .zip(quad.weights())
                .map(move |(&t, &wt)| (x0 + 0.5 * (t + 1.0) * (x1 - x0), 0.5 * (x1 - x0) * wt))
        })
        .collect();
    let mut total = 0.0;
    match a.dim() {
        1 => {
            for &(x, w) in &pts {
                let d = a.evaluate(u, &[x]) - b.evaluate(v, &[x]);
                total += w * d * d;
            }
        }
        _ => {
            for &(x, wx) in &pts {
                for &(y, wy) in &pts {
                    let d = a.evaluate(u, &[x, y]) - b.evaluate(v, &[x, y]);
                    total += wx * wy * d * d;
                }
            }
        }
    }
    Ok(total.sqrt())
}

/// L2 distance between the finite element function `u` and a smooth `f`,
/// using an (r+4)-point Gauss-Lobatto rule per cell.
pub fn l2_error_fn(grid: &Grid, u: &[f64], f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    grid.check_len(u)?;
    let quad = ReferenceElement::compute(grid.degree() + 3)?;
    let (lo, _) = grid.domain();
    let h = grid.h();
    let pts: Vec<(f64, f64)> = (0..grid.cells())
        .flat_map(|c| {
            let x0 = lo + h * c as f64;
            quad.nodes()
                .iter()
                .zip(quad.weights())
                .map(move |(&t, &wt)| (x0 + 0.5 * (t + 1.0) * h, 0.5 * h * wt))
        })
        .collect();
    let mut total = 0.0;
    match grid.dim() {
        1 => {
            for &(x, w) in &pts {
                let d = grid.evaluate(u, &[x]) - f(&[x]);
                total += w * d * d;
            }
        }
        _ => {
            for &(x, wx) in &pts {
                for &(y, wy) in &pts {
                    let d = grid.evaluate(u, &[x, y]) - f(&[x, y]);
                    total += wx * wy * d * d;
                }
            }
        }
    }
    Ok(total.sqrt())
}

/// Nodal values of `f` at the global nodes.
pub fn interpolate(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    grid.points().map(|p| f(&p)).collect()
}

/// Like [`interpolate`] but propagates evaluation failures.
pub fn try_interpolate<E>(grid: &Grid, f: impl Fn(&[f64]) -> std::result::Result<f64, E>) -> std::result::Result<Vec<f64>, E> {
    grid.points().map(|p| f(&p)).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Stiffness {
    Assembled(CsrMatrix),
    /// `K = K1 (x) M1 + M1 (x) K1`, applied without forming the product.
    Kron { factor: CsrMatrix, mass: Vec<f64> },
}

/// Lumped mass, stiffness and diffusion coefficient of the semidiscrete
/// system `M u' + c K u = M f`, i.e. `u' = L u + f` with `L = -c M^{-1} K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    mass: Vec<f64>,
    stiffness: Stiffness,
    diffusion: f64,
    tensor_dim: Option<usize>,
}

/// 1D stiffness matrix of the grid's axis.
fn assemble_axis_stiffness(grid: &Grid) -> CsrMatrix {
    let r = grid.degree();
    let e = grid.element();
    let h = grid.h();
    let n = grid.nodes_per_axis();
    let mut local = vec![vec![0.0; r + 1]; r + 1];
    for (a, row) in local.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = (2.0 / h)
                * (0..=r)
                    .map(|q| e.weights()[q] * e.diff(q, a) * e.diff(q, b))
                    .sum::<f64>();
        }
    }
    let mut trip = Vec::with_capacity(grid.cells() * (r + 1) * (r + 1));
    for c in 0..grid.cells() {
        for (a, row) in local.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                trip.push(((c * r + a) % n, (c * r + b) % n, v));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

pub fn assemble_operators(grid: &Grid, diffusion_coeff: f64) -> DiscreteOperator {
    let k1 = assemble_axis_stiffness(grid);
    let stiffness = match grid.dim() {
        1 => Stiffness::Assembled(k1),
        _ => Stiffness::Kron {
            factor: k1,
            mass: grid.axis_weights().to_vec(),
        },
    };
    DiscreteOperator {
        mass: grid.global_weights().to_vec(),
        stiffness,
        diffusion: diffusion_coeff,
        tensor_dim: Some(grid.dim()),
    }
}

impl DiscreteOperator {
    /// Operator without grid structure, e.g. a small test system.
    pub fn from_parts(mass: Vec<f64>, stiffness: CsrMatrix, diffusion_coeff: f64) -> Result<Self> {
        if stiffness.nrows() != mass.len() || stiffness.ncols() != mass.len() {
            return Err(Error::SizeMismatch {
                expected: mass.len(),
                got: stiffness.nrows(),
            });
        }
        Ok(Self {
            mass,
            stiffness: Stiffness::Assembled(stiffness),
            diffusion: diffusion_coeff,
            tensor_dim: None,
        })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass_diag(&self) -> &[f64] {
        &self.mass
    }

    pub fn diffusion_coeff(&self) -> f64 {
        self.diffusion
    }

    /// `Some(d)` when built from a d-dimensional tensor grid.
    pub fn tensor_dim(&self) -> Option<usize> {
        self.tensor_dim
    }

    /// 1D stiffness and mass factors of a tensor-product operator.
    pub fn axis_factors(&self) -> Option<(&CsrMatrix, &[f64])> {
        match (&self.stiffness, self.tensor_dim) {
            (Stiffness::Assembled(k), Some(1)) => Some((k, &self.mass)),
            (Stiffness::Kron { factor, mass }, Some(2)) => Some((factor, mass)),
            _ => None,
        }
    }

    pub fn stiffness_apply(&self, v: &[f64]) -> Vec<f64> {
        match &self.stiffness {
            Stiffness::Assembled(k) => k.matvec(v),
            Stiffness::Kron { factor, mass } => {
                let n = mass.len();
                assert_eq!(v.len(), n * n);
                let mut out = vec![0.0; n * n];
                // (K1 (x) M1) v: rows of U mixed by K1, columns scaled by M1.
                for i in 0..n {
                    for (k, kv) in factor.row(i) {
                        for j in 0..n {
                            out[i * n + j] += kv * v[k * n + j] * mass[j];
                        }
                    }
                }
                // (M1 (x) K1) v
                for i in 0..n {
                    for j in 0..n {
                        let s: f64 = factor.row(j).map(|(k, kv)| kv * v[i * n + k]).sum();
                        out[i * n + j] += mass[i] * s;
                    }
                }
                out
            }
        }
    }

    /// Stiffness as an assembled sparse matrix.
    pub fn stiffness_csr(&self) -> CsrMatrix {
        match &self.stiffness {
            Stiffness::Assembled(k) => k.clone(),
            Stiffness::Kron { factor, mass } => {
                let n = mass.len();
                let mut trip = Vec::with_capacity(2 * factor.nnz() * n);
                for (i, k, v) in factor.triplets() {
                    for j in 0..n {
                        trip.push((i * n + j, k * n + j, v * mass[j]));
                        trip.push((j * n + i, j * n + k, v * mass[j]));
                    }
                }
                CsrMatrix::from_triplets(n * n, n * n, &trip)
            }
        }
    }

    /// `L v = -c M^{-1} K v`.
    pub fn generator_apply(&self, v: &[f64]) -> Vec<f64> {
        let kv = self.stiffness_apply(v);
        kv.iter()
            .zip(&self.mass)
            .map(|(k, m)| -self.diffusion * k / m)
            .collect()
    }

    /// `L = -c M^{-1} K` as a sparse matrix.
    pub fn generator_csr(&self) -> CsrMatrix {
        let s: Vec<f64> = self.mass.iter().map(|m| -self.diffusion / m).collect();
        self.stiffness_csr().scale_rows(&s)
    }
}

/// Scientific notation with 10 significant digits.
pub fn fmt_sci(v: f64) -> String {
    format!("{v:.9e}")
}

/// Writes one row per node: coordinates then value, with a header line.
pub fn write_nodal_csv<W: Write>(grid: &Grid, u: &[f64], out: &mut W) -> Result<()> {
    grid.check_len(u)?;
    match grid.dim() {
        1 => writeln!(out, "x,value")?,
        _ => writeln!(out, "x1,x2,value")?,
    }
    for (p, &v) in grid.points().zip(u) {
        let coords: Vec<String> = p.iter().map(|&x| fmt_sci(x)).collect();
        writeln!(out, "{},{}", coords.join(","), fmt_sci(v))?;
    }
    Ok(())
}
