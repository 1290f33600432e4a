//! Dense helpers shared by the kernel operators and the ODE right-hand sides.

use crate::error::{GraphonError, Result};
use crate::scalar::Scalar;

/// Dot product with four independent accumulators.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] = acc[0] + a[k] * b[k];
        acc[1] = acc[1] + a[k + 1] * b[k + 1];
        acc[2] = acc[2] + a[k + 2] * b[k + 2];
        acc[3] = acc[3] + a[k + 3] * b[k + 3];
    }
    let mut tail = T::zero();
    for k in 4 * chunks..a.len() {
        tail = tail + a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn norm2<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// `out = M v` for a row-major square matrix.
pub fn matvec<T: Scalar>(m: usize, values: &[T], v: &[T], out: &mut [T]) {
    debug_assert_eq!(values.len(), m * m);
    for (i, o) in out.iter_mut().enumerate().take(m) {
        *o = dot(&values[i * m..(i + 1) * m], v);
    }
}

/// Stopping rule for [`power_iteration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub tol_rel: f64,
    pub max_iters: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tol_rel: 1e-10,
            max_iters: 10_000,
        }
    }
}

/// Largest absolute eigenvalue of a symmetric operator.
///
/// The estimate `‖A v_k‖` with `v_k = A^k v_0 / ‖A^k v_0‖` is nondecreasing for
/// symmetric `A` and tends to the spectral radius even when `±λ` are both
/// extremal.
pub fn power_iteration<T, F>(n: usize, mut apply: F, opts: &PowerIteration) -> Result<T>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]),
{
    if n == 0 {
        return Ok(T::zero());
    }
    let perturb = T::lit(1e-3);
    let mut v: Vec<T> = (0..n)
        .map(|i| {
            if i % 2 == 0 {
                T::one() + perturb
            } else {
                T::one() - perturb
            }
        })
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x = *x / nv);

    let tol = T::lit(opts.tol_rel);
    let mut w = vec![T::zero(); n];
    let mut prev = T::zero();
    let mut est = T::zero();
    let mut delta = T::nan();
    for k in 0..opts.max_iters {
        apply(&v, &mut w);
        est = norm2(&w);
        if est == T::zero() {
            return Ok(T::zero());
        }
        if !est.is_finite() {
            return Err(GraphonError::NoConvergence {
                what: "power iteration",
                iters: k + 1,
                last: est.to_f64_lossy(),
                residual: f64::NAN,
            });
        }
        if k > 0 {
            delta = (est - prev).abs();
            if delta < tol * est {
                return Ok(est);
            }
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = *wi / est;
        }
        prev = est;
    }
    Err(GraphonError::NoConvergence {
        what: "power iteration",
        iters: opts.max_iters,
        last: est.to_f64_lossy(),
        residual: (delta / est).to_f64_lossy(),
    })
}

/// `max |λ|` of a symmetric row-major matrix by dense eigendecomposition,
/// computed in `f64`.
pub fn spectral_radius_dense<T: Scalar>(n: usize, values: &[T]) -> T {
    let a = nalgebra::DMatrix::from_iterator(n, n, values.iter().map(|v| v.to_f64_lossy()));
    let r = a.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    T::lit(r)
}
