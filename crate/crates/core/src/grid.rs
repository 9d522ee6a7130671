//! Spatial discretization of `[0, 1]` and the dense linear algebra performed on it.
//!
//! Functions are stored as their samples on an endpoint-inclusive regular grid and
//! integrals use trapezoidal weights. An integral operator with kernel `K(x, y)` acts
//! on a sampled function `f` as `(K f)(x_i) = Σ_j K(x_i, x_j) w_j f(x_j)`, so the
//! matrix that acts on samples is `K W`. Decompositions and norms are computed on the
//! symmetrized form `W^{1/2} K W^{1/2}`, which is unitarily equivalent to the operator
//! on `L²` restricted to the grid's piecewise-linear interpolants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Regular grid `x_m = (m - 1)/(M - 1)` with trapezoidal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

/// Build the regular grid with `m` points.
pub fn make_grid(m: usize) -> Result<Grid> {
    if m < 2 {
        return invalid(format!("grid resolution must be at least 2, got {m}"));
    }
    let step = 1.0 / (m - 1) as f64;
    let points = (0..m).map(|i| i as f64 * step).collect();
    let mut weights = vec![step; m];
    weights[0] = 0.5 * step;
    weights[m - 1] = 0.5 * step;
    Ok(Grid { points, weights })
}

impl Grid {
    /// Resolution `M`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature approximation of `∫₀¹ f`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.len());
        samples.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// `⟨f, g⟩ = Σ w_i f_i g_i` for real samples.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    /// `⟨b, g⟩ = Σ w_i b_i g_i` for complex `b` against a real `g`.
    pub fn inner_real(&self, b: &[Complex64], g: &[f64]) -> Complex64 {
        b.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, c), w)| a * (c * w))
            .sum()
    }

    /// Samples of `f` at the grid points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points.iter().map(|&x| f(x)).collect()
    }

    pub(crate) fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }
}

/// Pointwise samples `K(x_i, x_j)` of a real kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct RealKernelMatrix {
    pub grid: Grid,
    pub values: DMatrix<f64>,
}

impl RealKernelMatrix {
    pub fn new(grid: Grid, values: DMatrix<f64>) -> Result<Self> {
        check_square(grid.len(), values.nrows(), values.ncols())?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let m = grid.len();
        Self {
            grid: grid.clone(),
            values: DMatrix::zeros(m, m),
        }
    }

    /// True if `|K_ij - K_ji| ≤ tol · max(1, max|K|)`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.values.amax().max(1.0);
        let m = self.values.nrows();
        (0..m).all(|i| (0..i).all(|j| (self.values[(i, j)] - self.values[(j, i)]).abs() <= tol * scale))
    }

    pub fn to_complex(&self) -> ComplexOperatorMatrix {
        ComplexOperatorMatrix {
            grid: self.grid.clone(),
            values: self.values.map(|v| Complex64::new(v, 0.0)),
            form: OperatorForm::Kernel,
        }
    }
}

/// How the entries of a [`ComplexOperatorMatrix`] relate to the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorForm {
    /// Kernel samples `K(x_i, x_j)`; the operator acts on samples as `K W`.
    /// Covariance and spectral density operators are stored this way.
    Kernel,
    /// The matrix acts on samples directly (e.g. `Id - Σ A_j W z^j`).
    Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperatorMatrix {
    pub grid: Grid,
    pub values: DMatrix<Complex64>,
    pub form: OperatorForm,
}

impl ComplexOperatorMatrix {
    pub fn new(grid: Grid, values: DMatrix<Complex64>, form: OperatorForm) -> Result<Self> {
        check_square(grid.len(), values.nrows(), values.ncols())?;
        Ok(Self { grid, values, form })
    }

    pub fn zeros(grid: &Grid, form: OperatorForm) -> Self {
        let m = grid.len();
        Self {
            grid: grid.clone(),
            values: DMatrix::zeros(m, m),
            form,
        }
    }

    pub fn identity(grid: &Grid) -> Self {
        let m = grid.len();
        Self {
            grid: grid.clone(),
            values: DMatrix::identity(m, m),
            form: OperatorForm::Action,
        }
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.values.nrows();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..=i {
                let d = (self.values[(i, j)] - self.values[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.values.iter().map(|v| v.norm()).fold(1.0, f64::max)
    }

    /// Real part, discarding the imaginary component.
    pub fn real_part(&self) -> RealKernelMatrix {
        RealKernelMatrix {
            grid: self.grid.clone(),
            values: self.values.map(|v| v.re),
        }
    }
}

fn check_square(m: usize, rows: usize, cols: usize) -> Result<()> {
    if rows != m || cols != m {
        return invalid(format!("matrix is {rows}x{cols} but the grid has {m} points"));
    }
    Ok(())
}

/// Evaluate `kernel(x_i, x_j)` at every grid pair.
pub fn discretize_kernel(kernel: impl Fn(f64, f64) -> f64, grid: &Grid) -> Result<RealKernelMatrix> {
    let m = grid.len();
    let pts = grid.points();
    let mut values = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..m {
            let v = kernel(pts[i], pts[j]);
            if !v.is_finite() {
                return Err(Error::Numeric(format!(
                    "kernel is not finite at (x, y) = ({}, {}): {v}",
                    pts[i], pts[j]
                )));
            }
            values[(i, j)] = v;
        }
    }
    Ok(RealKernelMatrix {
        grid: grid.clone(),
        values,
    })
}

/// Complex analogue of [`discretize_kernel`]; the result is in kernel form.
pub fn discretize_complex_kernel(
    kernel: impl Fn(f64, f64) -> Complex64,
    grid: &Grid,
) -> Result<ComplexOperatorMatrix> {
    let m = grid.len();
    let pts = grid.points();
    let mut values = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..m {
            let v = kernel(pts[i], pts[j]);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Numeric(format!(
                    "kernel is not finite at (x, y) = ({}, {}): {v}",
                    pts[i], pts[j]
                )));
            }
            values[(i, j)] = v;
        }
    }
    Ok(ComplexOperatorMatrix {
        grid: grid.clone(),
        values,
        form: OperatorForm::Kernel,
    })
}

/// Leading eigenpairs of a self-adjoint kernel operator.
///
/// `eigenfunctions` has one row per mode holding the grid samples of the
/// eigenfunction, orthonormal under the quadrature inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: DMatrix<Complex64>,
    /// Number of eigenvalues below `-tol` that were clamped to zero.
    pub clamped: usize,
}

impl EigenPairs {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ μ_n v_n v_n^*` in kernel form.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let m = self.eigenfunctions.ncols();
        let mut out = DMatrix::zeros(m, m);
        for (n, &mu) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenfunctions.row(n);
            for j in 0..m {
                let vj = v[j].conj() * mu;
                for i in 0..m {
                    out[(i, j)] += v[i] * vj;
                }
            }
        }
        out
    }
}

/// Borrowed kernel-form operator accepted by [`truncated_eigendecomposition`]
/// and [`operator_norms`].
#[derive(Debug, Clone, Copy)]
pub enum KernelRef<'a> {
    Real(&'a RealKernelMatrix),
    Complex(&'a ComplexOperatorMatrix),
}

impl<'a> From<&'a RealKernelMatrix> for KernelRef<'a> {
    fn from(k: &'a RealKernelMatrix) -> Self {
        KernelRef::Real(k)
    }
}

impl<'a> From<&'a ComplexOperatorMatrix> for KernelRef<'a> {
    fn from(k: &'a ComplexOperatorMatrix) -> Self {
        KernelRef::Complex(k)
    }
}

const HERMITIAN_TOL: f64 = 1e-8;

/// Top-`n` eigenpairs of the kernel operator, from a dense decomposition of
/// `W^{1/2} K W^{1/2}` with eigenvectors rescaled by `W^{-1/2}`.
pub fn truncated_eigendecomposition<'a>(op: impl Into<KernelRef<'a>>, n: usize) -> Result<EigenPairs> {
    let op = op.into();
    let grid = match op {
        KernelRef::Real(k) => &k.grid,
        KernelRef::Complex(k) => &k.grid,
    };
    let m = grid.len();
    if n > m {
        return invalid(format!("requested {n} eigenpairs from a {m}-point grid"));
    }
    let sw = grid.sqrt_weights();

    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = match op {
        KernelRef::Real(k) => {
            if !k.is_symmetric(HERMITIAN_TOL) {
                return invalid("eigendecomposition requires a symmetric kernel");
            }
            let mut a = k.values.clone();
            scale_symmetric(&mut a, &sw);
            symmetrize_real(&mut a);
            let eig = SymmetricEigen::new(a);
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|v| Complex64::new(v, 0.0)),
            )
        }
        KernelRef::Complex(k) => {
            if k.form != OperatorForm::Kernel {
                return invalid("eigendecomposition requires a kernel-form operator");
            }
            if !k.is_hermitian(HERMITIAN_TOL) {
                return invalid("eigendecomposition requires a Hermitian kernel");
            }
            let mut a = k.values.clone();
            for j in 0..m {
                for i in 0..m {
                    a[(i, j)] *= sw[i] * sw[j];
                }
            }
            let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(a);
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let top = values[order[0]].abs();
    let tol = 1e-10 * top;
    let mut clamped = 0;
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenfunctions = DMatrix::zeros(n, m);
    for (row, &idx) in order.iter().take(n).enumerate() {
        let mut mu = values[idx];
        if mu < -tol {
            clamped += 1;
        }
        if mu < 0.0 {
            mu = 0.0;
        }
        eigenvalues.push(mu);
        for i in 0..m {
            eigenfunctions[(row, i)] = vectors[(i, idx)] / sw[i];
        }
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} negative eigenvalue(s) below -{tol:e} to zero");
    }
    Ok(EigenPairs {
        eigenvalues,
        eigenfunctions,
        clamped,
    })
}

fn scale_symmetric(a: &mut DMatrix<f64>, sw: &[f64]) {
    let m = a.nrows();
    for j in 0..m {
        for i in 0..m {
            a[(i, j)] *= sw[i] * sw[j];
        }
    }
}

fn symmetrize_real(a: &mut DMatrix<f64>) {
    let m = a.nrows();
    for j in 0..m {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Largest condition number accepted by [`LinearSolver`].
pub const MAX_CONDITION: f64 = 1e12;

/// LU factorization of a dense complex system with a 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl LinearSolver {
    pub fn new(a: &DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() {
            return invalid("linear system matrix must be square");
        }
        if a.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numeric("linear system matrix has non-finite entries".into()));
        }
        let lu = a.clone().lu();
        let inverse = lu
            .try_inverse()
            .ok_or_else(|| Error::Numeric("linear system matrix is singular".into()))?;
        let condition = one_norm(a) * one_norm(&inverse);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::Numeric(format!(
                "linear system is ill-conditioned (condition estimate {condition:e})"
            )));
        }
        Ok(Self { lu, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.lu
            .solve(b)
            .ok_or_else(|| Error::Numeric("linear system matrix is singular".into()))
    }
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `A x = b` where `A` is the matrix acting on grid samples.
pub fn solve_linear_system(a: &ComplexOperatorMatrix, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if b.len() != a.grid.len() {
        return invalid(format!(
            "right-hand side has length {} but the grid has {} points",
            b.len(),
            a.grid.len()
        ));
    }
    LinearSolver::new(&a.values)?.solve(b)
}

/// Smallest `|1 - c‖g‖²|` accepted before the rank-one inverse is declared resonant.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Apply `(Id - c g⊗g)^{-1}` to `b`, with `g⊗g` acting through the quadrature inner
/// product and `gram = ‖g‖²`.
pub fn sherman_morrison_inverse_apply(
    scale: Complex64,
    g: &[f64],
    gram: f64,
    b: &[Complex64],
    grid: &Grid,
) -> Result<Vec<Complex64>> {
    if g.len() != grid.len() || b.len() != grid.len() {
        return invalid("rank-one factor and right-hand side must be sampled on the grid");
    }
    let denom = Complex64::new(1.0, 0.0) - scale * gram;
    if denom.norm() < RESONANCE_TOL {
        return Err(Error::Numeric(format!(
            "rank-one operator is not invertible: |1 - c‖g‖²| = {:e}",
            denom.norm()
        )));
    }
    let coef = scale / denom * grid.inner_real(b, g);
    Ok(b.iter().zip(g).map(|(bi, gi)| bi + coef * gi).collect())
}

/// Trace and Hilbert–Schmidt norms of a discretized operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorms {
    pub trace_norm: f64,
    pub hs_norm: f64,
}

/// Norms of the operator represented on the grid, computed from the singular values
/// of `W^{1/2} K W^{1/2}` (kernel form) or `W^{1/2} A W^{-1/2}` (action form).
pub fn operator_norms<'a>(op: impl Into<KernelRef<'a>>) -> Result<OperatorNorms> {
    match op.into() {
        KernelRef::Real(k) => real_operator_norms(&k.values, &k.grid),
        KernelRef::Complex(k) => {
            if k.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::Numeric("operator has non-finite entries".into()));
            }
            let sw = k.grid.sqrt_weights();
            let m = k.grid.len();
            let mut a = k.values.clone();
            for j in 0..m {
                for i in 0..m {
                    let s = match k.form {
                        OperatorForm::Kernel => sw[i] * sw[j],
                        OperatorForm::Action => sw[i] / sw[j],
                    };
                    a[(i, j)] *= s;
                }
            }
            let hs_norm = a.norm();
            let trace_norm = a.singular_values().iter().sum();
            Ok(OperatorNorms { trace_norm, hs_norm })
        }
    }
}

/// Norms of a real kernel-form matrix (e.g. an autocovariance) on `grid`.
pub fn real_operator_norms(values: &DMatrix<f64>, grid: &Grid) -> Result<OperatorNorms> {
    check_square(grid.len(), values.nrows(), values.ncols())?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("operator has non-finite entries".into()));
    }
    let mut a = values.clone();
    scale_symmetric(&mut a, &grid.sqrt_weights());
    let hs_norm = a.norm();
    let trace_norm = a.singular_values().iter().sum();
    Ok(OperatorNorms { trace_norm, hs_norm })
}

/// Trace norm of a real kernel-form matrix.
pub fn trace_norm(values: &DMatrix<f64>, grid: &Grid) -> Result<f64> {
    real_operator_norms(values, grid).map(|n| n.trace_norm)
}

/// Action-form matrix of the integral operator with kernel samples `k`: `K W`.
pub fn kernel_action(k: &DMatrix<f64>, grid: &Grid) -> DMatrix<f64> {
    let mut a = k.clone();
    for (j, w) in grid.weights().iter().enumerate() {
        a.column_mut(j).scale_mut(*w);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_points_and_weights() {
        let g = make_grid(3).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.weights(), &[0.25, 0.5, 0.25]);
        let g = make_grid(2).unwrap();
        assert_eq!(g.points(), &[0.0, 1.0]);
        assert_eq!(g.weights(), &[0.5, 0.5]);
        assert!(matches!(make_grid(1), Err(Error::InvalidArgument(_))));
        assert!(make_grid(0).is_err());
    }

    #[test]
    fn trapezoid_is_exact_on_affine_functions() {
        for m in [2, 3, 7, 101, 1000] {
            let g = make_grid(m).unwrap();
            assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((g.integrate(&g.sample(|_| 1.0)) - 1.0).abs() < 1e-12);
            assert!((g.integrate(&g.sample(|x| x)) - 0.5).abs() < 1e-12);
            assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn discretize_min_kernel() {
        let g = make_grid(3).unwrap();
        let k = discretize_kernel(f64::min, &g).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 1.0]);
        assert_eq!(k.values, expected);
        assert!(k.is_symmetric(0.0));

        let bb = |x: f64, y: f64| x.min(y) - x * y;
        assert_eq!(bb(0.5, 0.5), 0.25);
        let z = discretize_kernel(|_, _| 0.0, &g).unwrap();
        assert_eq!(z.values, DMatrix::zeros(3, 3));
    }

    #[test]
    fn discretize_rejects_non_finite() {
        let g = make_grid(5).unwrap();
        let err = discretize_kernel(|x, y| 1.0 / (x - y), &g).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("(0, 0)"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn brownian_leading_eigenvalue() {
        // Mercer: μ_1 = 1/(π/2)².
        let g = make_grid(201).unwrap();
        let k = discretize_kernel(f64::min, &g).unwrap();
        let eig = truncated_eigendecomposition(&k, 1).unwrap();
        let expected = 1.0 / (0.5 * PI).powi(2);
        assert!((eig.eigenvalues[0] - expected).abs() < 1e-3, "{}", eig.eigenvalues[0]);
        // Eigenfunction is ±√2 sin(πx/2).
        let v: Vec<f64> = eig.eigenfunctions.row(0).iter().map(|z| z.re).collect();
        let sign = v[200].signum();
        let max_err = g
            .points()
            .iter()
            .zip(&v)
            .map(|(x, vi)| (sign * vi - 2f64.sqrt() * (0.5 * PI * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-2, "{max_err}");
    }

    #[test]
    fn constant_kernel_is_rank_one() {
        let g = make_grid(11).unwrap();
        let k = discretize_kernel(|_, _| 1.0, &g).unwrap();
        let eig = truncated_eigendecomposition(&k, 3).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
        let v0 = eig.eigenfunctions[(0, 0)];
        for i in 0..11 {
            assert!((eig.eigenfunctions[(0, i)] - v0).norm() < 1e-10);
        }
        assert!((v0.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_eigenvalues() {
        let g = make_grid(4).unwrap();
        let eig = truncated_eigendecomposition(&RealKernelMatrix::zeros(&g), 2).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0, 0.0]);
        assert_eq!(eig.clamped, 0);
    }

    #[test]
    fn eigendecomposition_rejects_bad_input() {
        let g = make_grid(3).unwrap();
        let k = discretize_kernel(|x, y| x + 2.0 * y, &g).unwrap();
        assert!(matches!(truncated_eigendecomposition(&k, 1), Err(Error::InvalidArgument(_))));
        let k = discretize_kernel(f64::min, &g).unwrap();
        assert!(matches!(truncated_eigendecomposition(&k, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn negative_eigenvalues_are_clamped() {
        let g = make_grid(5).unwrap();
        let k = discretize_kernel(|x, y| if x == y { -1.0 } else { 0.0 }, &g).unwrap();
        let eig = truncated_eigendecomposition(&k, 5).unwrap();
        assert!(eig.eigenvalues.iter().all(|&v| v == 0.0));
        assert_eq!(eig.clamped, 5);
    }

    #[test]
    fn full_rank_reconstruction_and_orthonormality() {
        let g = make_grid(17).unwrap();
        let k = discretize_complex_kernel(
            |x, y| c(x.min(y), 0.3 * (x - y)) + c((x * y).exp(), 0.0),
            &g,
        )
        .unwrap();
        assert!(k.is_hermitian(1e-14));
        let eig = truncated_eigendecomposition(&k, 17).unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let diff = (&eig.reconstruct() - &k.values).norm() / k.values.norm();
        assert!(diff < 1e-8, "{diff}");
        for i in 0..17 {
            for j in 0..17 {
                let ip: Complex64 = (0..17)
                    .map(|m| eig.eigenfunctions[(i, m)] * eig.eigenfunctions[(j, m)].conj() * g.weights()[m])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn solve_identity_and_singular() {
        let g = make_grid(4).unwrap();
        let id = ComplexOperatorMatrix::identity(&g);
        let b = DVector::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0), c(7.0, -1.0)]);
        assert_eq!(solve_linear_system(&id, &b).unwrap(), b);
        let zero = ComplexOperatorMatrix::zeros(&g, OperatorForm::Action);
        assert!(matches!(solve_linear_system(&zero, &b), Err(Error::Numeric(_))));
    }

    #[test]
    fn solve_rejects_ill_conditioned() {
        let g = make_grid(2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0 + 1e-14, 0.0)]);
        let a = ComplexOperatorMatrix::new(g, a, OperatorForm::Action).unwrap();
        let b = DVector::from_element(2, c(1.0, 0.0));
        assert!(matches!(solve_linear_system(&a, &b), Err(Error::Numeric(_))));
    }

    #[test]
    fn sherman_morrison_zero_scale_is_identity() {
        let g = make_grid(6).unwrap();
        let f = g.sample(|x| x * x + 1.0);
        let gram = g.inner(&f, &f);
        let b: Vec<_> = (0..6).map(|i| c(i as f64, -(i as f64))).collect();
        let out = sherman_morrison_inverse_apply(c(0.0, 0.0), &f, gram, &b, &g).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn sherman_morrison_resonance() {
        let g = make_grid(6).unwrap();
        let f = g.sample(|_| 1.0);
        let b = vec![c(1.0, 0.0); 6];
        let err = sherman_morrison_inverse_apply(c(1.0, 0.0), &f, 1.0, &b, &g).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn operator_norms_basic() {
        let g = make_grid(51).unwrap();
        let zero = ComplexOperatorMatrix::zeros(&g, OperatorForm::Kernel);
        let n = operator_norms(&zero).unwrap();
        assert_eq!((n.trace_norm, n.hs_norm), (0.0, 0.0));

        // 1⊗1 has a single singular value ‖1‖² = 1.
        let one = discretize_kernel(|_, _| 1.0, &g).unwrap();
        let n = operator_norms(&one).unwrap();
        assert!((n.trace_norm - 1.0).abs() < 1e-6);
        assert!((n.hs_norm - 1.0).abs() < 1e-6);

        let k = discretize_kernel(|x, y| (x - y).cos() + x.min(y), &g).unwrap();
        let n = operator_norms(&k).unwrap();
        assert!(n.trace_norm >= n.hs_norm);

        // Identity in action form: all singular values 1.
        let id = ComplexOperatorMatrix::identity(&g);
        let n = operator_norms(&id).unwrap();
        assert!((n.trace_norm - 51.0).abs() < 1e-9);
    }
}
