//! Signed graphons and the integral operators they induce.
//!
//! A [`Kernel`] is either an analytic evaluator on the unit square or a
//! piecewise-constant matrix over the uniform partition
//! `I_i = ((i-1)/m, i/m]`. Every kernel carries a nonnegative `scale` applied
//! on evaluation, so that rescaled step graphons such as `ε⁻¹ W_n` never need
//! a copy of their matrix.

use std::fmt;
use std::sync::Arc;

use crate::error::{GraphonError, Result};
use crate::linalg::{self, PowerIteration};
use crate::scalar::{sym_mean, Scalar};

pub type AnalyticFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Tolerance used when validating user-supplied matrices for symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Largest grid for which [`Kernel::operator_norm_with`] may fall back to a
/// dense eigensolve.
pub const DENSE_NORM_LIMIT: usize = 4096;

/// Row-major, exactly symmetric `m × m` matrix of cell values.
#[derive(Clone, PartialEq)]
pub struct GridMatrix<T> {
    m: usize,
    values: Vec<T>,
}

impl<T: Scalar> GridMatrix<T> {
    /// Builds the matrix and overwrites both triangles with `(a_ij + a_ji)/2`.
    fn symmetrized(m: usize, mut values: Vec<T>) -> Self {
        for i in 0..m {
            for j in (i + 1)..m {
                let s = sym_mean(values[i * m + j], values[j * m + i]);
                values[i * m + j] = s;
                values[j * m + i] = s;
            }
        }
        GridMatrix { m, values }
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn row_means(&self) -> Vec<T> {
        let inv = T::one() / T::from_usize_lossy(self.m);
        (0..self.m)
            .map(|i| self.row(i).iter().copied().sum::<T>() * inv)
            .collect()
    }

    fn map(&self, f: impl Fn(T) -> T) -> Self {
        GridMatrix {
            m: self.m,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for GridMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridMatrix")
            .field("m", &self.m)
            .field("values", &self.values)
            .finish()
    }
}

#[derive(Clone)]
pub enum KernelForm<T> {
    Analytic(AnalyticFn<T>),
    Grid(Arc<GridMatrix<T>>),
}

/// How an analytic kernel is sampled onto a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discretization {
    /// Value at the cell centre.
    Midpoint,
    /// Mean over an `s × s` lattice of sub-cell centres.
    CellAverage(usize),
}

/// A signed graphon or a bounded symmetric kernel.
#[derive(Clone)]
pub struct Kernel<T> {
    form: KernelForm<T>,
    scale: T,
    /// `false` for difference kernels, whose values may leave `[-1, 1]`.
    bounded: bool,
}

impl<T: Scalar> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match &self.form {
            KernelForm::Analytic(_) => "Analytic".to_string(),
            KernelForm::Grid(g) => format!("Grid({})", g.m),
        };
        f.debug_struct("Kernel")
            .field("form", &form)
            .field("scale", &self.scale)
            .field("bounded", &self.bounded)
            .finish()
    }
}

/// Maps `x ∈ [0, 1]` to its 0-based cell in the uniform `m`-partition.
#[inline]
pub fn cell_index<T: Scalar>(x: T, m: usize) -> usize {
    let c = (x * T::from_usize_lossy(m)).ceil().to_usize().unwrap_or(0);
    c.clamp(1, m) - 1
}

/// Centre of the 0-based cell `i` of the uniform `m`-partition.
#[inline]
pub fn cell_center<T: Scalar>(i: usize, m: usize) -> T {
    (T::from_usize_lossy(i) + T::half()) / T::from_usize_lossy(m)
}

fn check_unit<T: Scalar>(x: T, y: T) -> Result<()> {
    let ok = |v: T| v.is_finite() && v >= T::zero() && v <= T::one();
    if ok(x) && ok(y) {
        Ok(())
    } else {
        Err(GraphonError::Domain {
            x: x.to_f64_lossy(),
            y: y.to_f64_lossy(),
        })
    }
}

fn check_resolution(m: usize) -> Result<()> {
    if m == 0 {
        Err(GraphonError::param("resolution must be at least 1"))
    } else {
        Ok(())
    }
}

impl<T: Scalar> Kernel<T> {
    /// Wraps an evaluator. The result is symmetrized as `(f(x,y) + f(y,x))/2`,
    /// which is bitwise symmetric in its arguments.
    pub fn analytic<F>(f: F) -> Self
    where
        F: Fn(T, T) -> T + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        Kernel {
            form: KernelForm::Analytic(Arc::new(move |x, y| sym_mean(f(x, y), f(y, x)))),
            scale: T::one(),
            bounded: true,
        }
    }

    /// `W ≡ p`.
    pub fn constant(p: T) -> Result<Self> {
        if !(p.abs() <= T::one()) {
            return Err(GraphonError::param(format!("constant kernel value {p} outside [-1, 1]")));
        }
        Ok(Kernel {
            form: KernelForm::Analytic(Arc::new(move |_, _| p)),
            scale: T::one(),
            bounded: true,
        })
    }

    /// `W(x, y) = x y`.
    pub fn product() -> Self {
        Kernel {
            form: KernelForm::Analytic(Arc::new(|x, y| x * y)),
            scale: T::one(),
            bounded: true,
        }
    }

    /// `W(x, y) = a cos(π (x + y))`.
    pub fn polarized(a: T) -> Result<Self> {
        if !(a.abs() <= T::one()) {
            return Err(GraphonError::param(format!("polarized amplitude {a} outside [-1, 1]")));
        }
        let pi = T::lit(std::f64::consts::PI);
        Ok(Kernel {
            form: KernelForm::Analytic(Arc::new(move |x, y| a * (pi * (x + y)).cos())),
            scale: T::one(),
            bounded: true,
        })
    }

    /// Signed community blocks: a `k × k` step graphon.
    pub fn block(values: &[Vec<T>]) -> Result<Self> {
        let k = values.len();
        check_resolution(k)?;
        if values.iter().any(|r| r.len() != k) {
            return Err(GraphonError::param("block matrix must be square"));
        }
        Self::grid(k, values.iter().flatten().copied().collect())
    }

    /// Step graphon from a row-major matrix; must be symmetric within
    /// [`SYMMETRY_TOL`] and bounded by one in absolute value.
    pub fn grid(m: usize, values: Vec<T>) -> Result<Self> {
        let k = Self::grid_unbounded(m, values)?;
        if let Some(v) = k.grid_matrix().unwrap().values.iter().find(|v| !(v.abs() <= T::one())) {
            return Err(GraphonError::param(format!("grid value {v} outside [-1, 1]")));
        }
        Ok(Kernel { bounded: true, ..k })
    }

    /// Like [`Kernel::grid`] but without the `[-1, 1]` check.
    pub fn grid_unbounded(m: usize, values: Vec<T>) -> Result<Self> {
        check_resolution(m)?;
        if values.len() != m * m {
            return Err(GraphonError::Dimension {
                expected: m * m,
                got: values.len(),
            });
        }
        let tol = T::lit(SYMMETRY_TOL);
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (values[i * m + j], values[j * m + i]);
                if !((a - b).abs() <= tol) {
                    return Err(GraphonError::param(format!(
                        "matrix not symmetric at ({}, {}): {a} vs {b}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GraphonError::param("matrix contains non-finite values"));
        }
        Ok(Kernel {
            form: KernelForm::Grid(Arc::new(GridMatrix::symmetrized(m, values))),
            scale: T::one(),
            bounded: false,
        })
    }

    pub fn with_scale(self, scale: T) -> Result<Self> {
        if !(scale >= T::zero()) || !scale.is_finite() {
            return Err(GraphonError::param(format!("scale must be finite and nonnegative, got {scale}")));
        }
        Ok(Kernel { scale, ..self })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn form(&self) -> &KernelForm<T> {
        &self.form
    }

    pub fn grid_matrix(&self) -> Option<&GridMatrix<T>> {
        match &self.form {
            KernelForm::Grid(g) => Some(g),
            KernelForm::Analytic(_) => None,
        }
    }

    pub fn resolution(&self) -> Option<usize> {
        self.grid_matrix().map(GridMatrix::resolution)
    }

    fn require_grid(&self, op: &str) -> Result<&GridMatrix<T>> {
        self.grid_matrix()
            .ok_or_else(|| GraphonError::param(format!("{op} requires a grid kernel")))
    }

    /// Unscaled value, no domain check.
    #[inline]
    pub(crate) fn raw(&self, x: T, y: T) -> T {
        match &self.form {
            KernelForm::Analytic(f) => f(x, y),
            KernelForm::Grid(g) => g.get(cell_index(x, g.m), cell_index(y, g.m)),
        }
    }

    /// `scale · W(x, y)`.
    pub fn evaluate(&self, x: T, y: T) -> Result<T> {
        check_unit(x, y)?;
        Ok(self.scale * self.raw(x, y))
    }

    /// Positive part, negative part and absolute value, in that order.
    pub fn split_parts(&self) -> (Kernel<T>, Kernel<T>, Kernel<T>) {
        let pos = |w: T| w.max(T::zero());
        let neg = |w: T| (-w).max(T::zero());
        let abs = |w: T| w.abs();
        (self.map_values(pos), self.map_values(neg), self.map_values(abs))
    }

    fn map_values<F>(&self, f: F) -> Kernel<T>
    where
        F: Fn(T) -> T + Send + Sync + Copy + 'static,
    {
        let form = match &self.form {
            KernelForm::Analytic(g) => {
                let g = Arc::clone(g);
                KernelForm::Analytic(Arc::new(move |x, y| f(g(x, y))))
            }
            KernelForm::Grid(g) => KernelForm::Grid(Arc::new(g.map(f))),
        };
        Kernel {
            form,
            scale: self.scale,
            bounded: self.bounded,
        }
    }

    /// Unscaled value of cell `(i, j)` of the `m`-grid, sampled at cell centres.
    /// Grid kernels whose resolution divides `m` take the exact parent cell.
    fn midpoint_value(&self, i: usize, j: usize, m: usize) -> T {
        match &self.form {
            KernelForm::Grid(g) if m.is_multiple_of(g.m) => {
                let r = m / g.m;
                g.get(i / r, j / r)
            }
            _ => self.raw(cell_center(i, m), cell_center(j, m)),
        }
    }

    /// Degree function `d(x) = ∫ W(x, y) dy` at the `m` cell centres.
    pub fn degree_profile(&self, m: usize) -> Result<DegreeProfile<T>> {
        check_resolution(m)?;
        let values = match &self.form {
            KernelForm::Grid(g) if m.is_multiple_of(g.m) => {
                let means = g.row_means();
                let r = m / g.m;
                (0..m).map(|c| self.scale * means[c / r]).collect()
            }
            _ => {
                let inv = T::one() / T::from_usize_lossy(m);
                (0..m)
                    .map(|i| {
                        let row: T = (0..m).map(|j| self.midpoint_value(i, j, m)).sum();
                        self.scale * row * inv
                    })
                    .collect()
            }
        };
        Ok(DegreeProfile::from_values(values))
    }

    /// Samples the kernel onto the uniform `m`-grid. Scale and the bounded
    /// flag carry over.
    pub fn discretize(&self, m: usize, mode: Discretization) -> Result<Kernel<T>> {
        check_resolution(m)?;
        let mut values = vec![T::zero(); m * m];
        match mode {
            Discretization::Midpoint => {
                for i in 0..m {
                    for j in i..m {
                        values[i * m + j] = self.midpoint_value(i, j, m);
                        values[j * m + i] = self.midpoint_value(j, i, m);
                    }
                }
            }
            Discretization::CellAverage(s) => {
                if s == 0 {
                    return Err(GraphonError::param("cell_average needs s >= 1"));
                }
                let fine = m * s;
                let inv = T::one() / T::from_usize_lossy(s * s);
                for i in 0..m {
                    for j in 0..m {
                        let mut acc = T::zero();
                        for a in 0..s {
                            let x = cell_center(i * s + a, fine);
                            for b in 0..s {
                                acc = acc + self.raw(x, cell_center(j * s + b, fine));
                            }
                        }
                        values[i * m + j] = acc * inv;
                    }
                }
            }
        }
        Ok(Kernel {
            form: KernelForm::Grid(Arc::new(GridMatrix::symmetrized(m, values))),
            scale: self.scale,
            bounded: self.bounded,
        })
    }

    /// Nyström quadrature of `T_W f`: `(scale/m) Σ_j M_ij f_j`.
    pub fn apply_operator(&self, f: &[T]) -> Result<Vec<T>> {
        let g = self.require_grid("apply_operator")?;
        if f.len() != g.m {
            return Err(GraphonError::Dimension {
                expected: g.m,
                got: f.len(),
            });
        }
        let mut out = vec![T::zero(); g.m];
        linalg::matvec(g.m, &g.values, f, &mut out);
        let c = self.scale / T::from_usize_lossy(g.m);
        out.iter_mut().for_each(|v| *v = *v * c);
        Ok(out)
    }

    /// `|||T_W|||` for a grid kernel, by power iteration with default settings.
    pub fn operator_norm(&self) -> Result<T> {
        self.operator_norm_with(&PowerIteration::default())
    }

    /// Falls back to a dense symmetric eigensolve when power iteration
    /// stalls on a near-degenerate top of the spectrum and
    /// `m ≤ DENSE_NORM_LIMIT`.
    pub fn operator_norm_with(&self, opts: &PowerIteration) -> Result<T> {
        let g = self.require_grid("operator_norm")?;
        let m = g.m;
        let raw = match linalg::power_iteration(m, |v, o| linalg::matvec(m, &g.values, v, o), opts) {
            Ok(r) => r,
            Err(GraphonError::NoConvergence { .. }) if m <= DENSE_NORM_LIMIT => linalg::spectral_radius_dense(m, &g.values),
            Err(e) => return Err(e),
        };
        Ok(raw * self.scale / T::from_usize_lossy(m))
    }
}

/// `a − b` on the common `m`-grid, scales folded in.
///
/// Grid operands must have a resolution dividing `m`; analytic operands are
/// sampled at cell centres. The result has scale one and is flagged unbounded.
pub fn kernel_difference<T: Scalar>(a: &Kernel<T>, b: &Kernel<T>, m: usize) -> Result<Kernel<T>> {
    check_resolution(m)?;
    for k in [a, b] {
        if let Some(r) = k.resolution() {
            if !m.is_multiple_of(r) {
                return Err(GraphonError::param(format!(
                    "grid resolution {r} does not divide comparison resolution {m}"
                )));
            }
        }
    }
    let mut values = vec![T::zero(); m * m];
    for i in 0..m {
        for j in i..m {
            let d = a.scale * a.midpoint_value(i, j, m) - b.scale * b.midpoint_value(i, j, m);
            values[i * m + j] = d;
            values[j * m + i] = d;
        }
    }
    Ok(Kernel {
        form: KernelForm::Grid(Arc::new(GridMatrix { m, values })),
        scale: T::one(),
        bounded: false,
    })
}

/// Degree function sampled on a grid, with its sup and mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile<T> {
    pub values: Vec<T>,
    pub sup: T,
    pub l1: T,
}

impl<T: Scalar> DegreeProfile<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        let sup = values.iter().copied().fold(T::neg_infinity(), T::max);
        let l1 = values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len().max(1));
        DegreeProfile { values, sup, l1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn signed_block() -> Kernel<f64> {
        Kernel::block(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn evaluate_constant_and_block() {
        let k = Kernel::constant(0.5).unwrap();
        assert_eq!(k.evaluate(0.3, 0.7).unwrap(), 0.5);
        assert_eq!(signed_block().evaluate(0.25, 0.75).unwrap(), -1.0);
    }

    #[test]
    fn evaluate_rejects_out_of_domain() {
        let k = Kernel::<f64>::product();
        assert!(matches!(k.evaluate(1.2, 0.5), Err(GraphonError::Domain { .. })));
        assert!(k.evaluate(-0.1, 0.5).is_err());
        assert!(k.evaluate(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn zero_maps_to_first_cell() {
        let k = Kernel::block(&[vec![0.2, 0.4], vec![0.4, 0.9]]).unwrap();
        assert_eq!(k.evaluate(0.0, 0.0).unwrap(), 0.2);
        assert_eq!(k.evaluate(0.5, 0.5).unwrap(), 0.2);
        assert_eq!(k.evaluate(1.0, 1.0).unwrap(), 0.9);
        assert_eq!(cell_index(0.0_f64, 4), 0);
        assert_eq!(cell_index(1.0_f64, 4), 3);
    }

    #[test]
    fn scale_applies_on_evaluation() {
        let k = Kernel::constant(0.5).unwrap().with_scale(4.0).unwrap();
        assert_eq!(k.evaluate(0.1, 0.2).unwrap(), 2.0);
        assert!(Kernel::constant(0.5).unwrap().with_scale(-1.0).is_err());
    }

    #[test]
    fn split_parts_of_negative_constant() {
        let (p, n, a) = Kernel::constant(-0.4).unwrap().split_parts();
        assert_eq!(p.evaluate(0.2, 0.9).unwrap(), 0.0);
        assert_eq!(n.evaluate(0.2, 0.9).unwrap(), 0.4);
        assert_eq!(a.evaluate(0.2, 0.9).unwrap(), 0.4);
    }

    #[test]
    fn split_parts_of_nonnegative_and_block() {
        let k = Kernel::<f64>::product();
        let (_, n, a) = k.split_parts();
        for &(x, y) in &[(0.1, 0.3), (0.9, 0.5)] {
            assert_eq!(n.evaluate(x, y).unwrap(), 0.0);
            assert_eq!(a.evaluate(x, y).unwrap(), k.evaluate(x, y).unwrap());
        }
        let (_, _, a) = signed_block().split_parts();
        assert!(a.grid_matrix().unwrap().as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn degree_profile_cases() {
        let d = Kernel::constant(0.3).unwrap().degree_profile(7).unwrap();
        assert_abs_diff_eq!(d.sup, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.l1, 0.3, epsilon = 1e-15);

        // ∫ x y dy = x / 2
        let d = Kernel::<f64>::product().degree_profile(1000).unwrap();
        assert!((d.sup - 0.5).abs() < 1e-3);
        for (i, v) in d.values.iter().enumerate() {
            assert_abs_diff_eq!(*v, cell_center::<f64>(i, 1000) / 2.0, epsilon = 1e-12);
        }

        let (_, _, a) = signed_block().split_parts();
        let d = a.degree_profile(4).unwrap();
        assert_eq!((d.sup, d.l1), (1.0, 1.0));

        assert!(Kernel::<f64>::product().degree_profile(0).is_err());
    }

    #[test]
    fn grid_degree_profile_is_exact_row_mean() {
        let k = Kernel::block(&[vec![0.2, 0.6], vec![0.6, -1.0]]).unwrap().with_scale(2.0).unwrap();
        let d = k.degree_profile(6).unwrap();
        assert_eq!(d.values, vec![0.8, 0.8, 0.8, -0.4, -0.4, -0.4]);
    }

    #[test]
    fn discretize_product_midpoint() {
        let k = Kernel::<f64>::product().discretize(2, Discretization::Midpoint).unwrap();
        assert_eq!(k.grid_matrix().unwrap().as_slice(), &[1.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0]);
    }

    #[test]
    fn discretize_constant_and_idempotence() {
        let k = Kernel::<f64>::constant(0.7).unwrap().discretize(5, Discretization::CellAverage(4)).unwrap();
        assert!(k.grid_matrix().unwrap().as_slice().iter().all(|&v| (v - 0.7).abs() < 1e-15));
        let g = Kernel::<f64>::polarized(0.9).unwrap().discretize(8, Discretization::Midpoint).unwrap();
        let again = g.discretize(8, Discretization::Midpoint).unwrap();
        assert_eq!(g.grid_matrix(), again.grid_matrix());
    }

    #[test]
    fn cell_average_resolves_jump() {
        // jump on the diagonal: W = 1 if x + y > 1
        let k = Kernel::analytic(|x: f64, y: f64| if x + y > 1.0 { 1.0 } else { 0.0 });
        let g = k.discretize(2, Discretization::CellAverage(4)).unwrap();
        let m = g.grid_matrix().unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 1), 1.0);
        // 10 of the 16 sub-centres in the off-diagonal cell lie above x + y = 1
        assert_abs_diff_eq!(m.get(0, 1), 6.0 / 16.0, epsilon = 1e-15);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn grid_rejects_asymmetric_and_out_of_range() {
        assert!(Kernel::grid(2, vec![0.0, 0.5, 0.4, 0.0]).is_err());
        assert!(Kernel::grid(2, vec![0.0, 1.5, 1.5, 0.0]).is_err());
        assert!(Kernel::grid(2, vec![0.0, 0.5]).is_err());
        let k = Kernel::<f64>::grid(2, vec![0.0, 0.5, 0.5 + 1e-13, 0.0]).unwrap();
        let g = k.grid_matrix().unwrap();
        assert_eq!(g.get(0, 1).to_bits(), g.get(1, 0).to_bits());
    }

    #[test]
    fn stalled_power_iteration_falls_back_to_dense() {
        let k = Kernel::<f64>::grid(2, vec![1.0, 0.0, 0.0, 0.99999]).unwrap();
        let slow = PowerIteration { tol_rel: 1e-14, max_iters: 50 };
        assert!(linalg::power_iteration(2, |v, o| linalg::matvec(2, k.grid_matrix().unwrap().as_slice(), v, o), &slow).is_err());
        assert!((k.operator_norm_with(&slow).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn apply_operator_cases() {
        let one = Kernel::<f64>::constant(1.0).unwrap().discretize(10, Discretization::Midpoint).unwrap();
        let out = one.apply_operator(&[3.0; 10]).unwrap();
        assert!(out.iter().all(|&v| (v - 3.0).abs() < 1e-14));

        let zero = Kernel::constant(0.0).unwrap().discretize(10, Discretization::Midpoint).unwrap();
        assert!(zero.apply_operator(&[1.0; 10]).unwrap().iter().all(|&v| v == 0.0));

        // ∫ x y · y dy = x / 3
        let m = 1000;
        let k = Kernel::<f64>::product().discretize(m, Discretization::Midpoint).unwrap();
        let f: Vec<f64> = (0..m).map(|i| cell_center(i, m)).collect();
        let out = k.apply_operator(&f).unwrap();
        let dev = out.iter().zip(&f).map(|(o, x)| (o - x / 3.0).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-3, "max deviation {dev}");

        assert!(matches!(one.apply_operator(&[1.0; 3]), Err(GraphonError::Dimension { .. })));
        assert!(Kernel::<f64>::product().apply_operator(&[1.0]).is_err());
    }

    #[test]
    fn operator_norm_constant_and_rank_one() {
        let k = Kernel::constant(0.35).unwrap().discretize(50, Discretization::Midpoint).unwrap();
        assert_abs_diff_eq!(k.operator_norm().unwrap(), 0.35, epsilon = 1e-10);

        let k = Kernel::<f64>::product().discretize(2000, Discretization::Midpoint).unwrap();
        assert!((k.operator_norm().unwrap() - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn operator_norm_is_spectral_radius_of_signed_block() {
        // eigenvalues of (1/2)[[1,-1],[-1,1]] are 0 and 1
        let k = signed_block();
        assert_abs_diff_eq!(k.operator_norm().unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn kernel_difference_cases() {
        let k = Kernel::<f64>::polarized(0.5).unwrap();
        let d = kernel_difference(&k, &k, 16).unwrap();
        assert!(!d.is_bounded());
        assert_eq!(d.operator_norm().unwrap(), 0.0);

        let one = Kernel::constant(1.0).unwrap();
        let two = Kernel::constant(1.0).unwrap().with_scale(2.0).unwrap();
        let d = kernel_difference(&one, &two, 4).unwrap();
        assert!(d.grid_matrix().unwrap().as_slice().iter().all(|&v| v == -1.0));
        assert_abs_diff_eq!(d.operator_norm().unwrap(), 1.0, epsilon = 1e-10);

        let step = Kernel::grid(3, vec![0.0; 9]).unwrap();
        assert!(kernel_difference(&one, &step, 4).is_err());
        assert!(kernel_difference(&one, &step, 6).is_ok());
    }

    #[test]
    fn kernel_difference_vanishes_under_refinement() {
        let k = Kernel::<f64>::product();
        let mut last = f64::INFINITY;
        for m in [4, 8, 16, 32] {
            let g = k.discretize(m, Discretization::Midpoint).unwrap();
            let norm = kernel_difference(&k, &g, 4 * m).unwrap().operator_norm().unwrap();
            assert!(norm < last);
            last = norm;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn works_in_single_precision() {
        let k = Kernel::<f32>::product().discretize(200, Discretization::Midpoint).unwrap();
        assert!((k.operator_norm().unwrap() - 1.0 / 3.0).abs() < 1e-3);
    }
}
