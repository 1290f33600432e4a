//! Error metrics between graph and graphon trajectories, the approximation
//! bounds they are checked against, and degree statistics of sampled graphs.

use crate::dynamics::{InitialCondition, Model, OpinionTrajectory};
use crate::error::{GraphonError, Result};
use crate::kernel::{kernel_difference, Kernel};
use crate::sampler::SignedAdjacency;
use crate::scalar::Scalar;

fn check_divides(n: usize, m: usize) -> Result<()> {
    if n == 0 || !m.is_multiple_of(n) {
        Err(GraphonError::param(format!("partition size {n} does not divide {m}")))
    } else {
        Ok(())
    }
}

/// Exact `L²` distance between a step function on `n` cells and one on `m`
/// cells, `n | m`.
pub fn l2_step_error<T: Scalar>(u_n: &[T], u_ref: &[T]) -> Result<T> {
    let (n, m) = (u_n.len(), u_ref.len());
    check_divides(n, m)?;
    let r = m / n;
    let sum: T = u_ref
        .iter()
        .enumerate()
        .map(|(c, &v)| {
            let d = v - u_n[c / r];
            d * d
        })
        .sum();
    Ok((sum / T::from_usize_lossy(m)).sqrt())
}

/// `L²` norm of a step function on a uniform partition.
pub fn step_l2_norm<T: Scalar>(f: &[T]) -> T {
    let s: T = f.iter().map(|&v| v * v).sum();
    (s / T::from_usize_lossy(f.len().max(1))).sqrt()
}

/// Per-time comparison of a graph trajectory with a graphon reference.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryComparison<T> {
    pub times: Vec<T>,
    pub l2_errors: Vec<T>,
    pub sup_error: T,
    /// Max of `|u_ref|` over every recorded time and cell.
    pub c_u_t: T,
}

pub fn trajectory_error<T: Scalar>(
    traj_n: &OpinionTrajectory<T>,
    traj_ref: &OpinionTrajectory<T>,
) -> Result<TrajectoryComparison<T>> {
    if traj_n.times.len() != traj_ref.times.len() {
        return Err(GraphonError::param(format!(
            "time grids differ in length: {} vs {}",
            traj_n.times.len(),
            traj_ref.times.len()
        )));
    }
    let tol = T::lit(1e-9);
    for (a, b) in traj_n.times.iter().zip(&traj_ref.times) {
        if (*a - *b).abs() > tol * T::one().max(b.abs()) {
            return Err(GraphonError::param(format!("time grids differ: {a} vs {b}")));
        }
    }
    check_divides(traj_n.n(), traj_ref.n())?;
    let l2_errors = traj_n
        .states
        .iter()
        .zip(&traj_ref.states)
        .map(|(a, b)| l2_step_error(a, b))
        .collect::<Result<Vec<T>>>()?;
    let sup_error = l2_errors.iter().copied().fold(T::zero(), T::max);
    let c_u_t = traj_ref
        .states
        .iter()
        .flatten()
        .fold(T::zero(), |a, v| a.max(v.abs()));
    Ok(TrajectoryComparison {
        times: traj_ref.times.clone(),
        l2_errors,
        sup_error,
        c_u_t,
    })
}

/// Upper bound on `‖(u − u_n)(·, t)‖₂` at each time:
///
/// `(‖g − g_n‖₂ + C/(nα δ) Σ op_norms) · exp(c nα δ t)`
///
/// with `δ = ‖d_{|W_n|}‖_∞`, `c = 2` and one operator norm for the repelling
/// model, `c = 4` and the positive/negative-part pair for the opposing one.
pub fn approximation_bound<T: Scalar>(
    model: Model,
    g_error: T,
    c_u_t: T,
    op_norms: &[T],
    deg_sup: T,
    n_alpha: T,
    times: &[T],
) -> Result<Vec<T>> {
    let expected = match model {
        Model::Repelling => 1,
        Model::Opposing => 2,
    };
    if op_norms.len() != expected {
        return Err(GraphonError::param(format!(
            "{model} bound takes {expected} operator norm(s), got {}",
            op_norms.len()
        )));
    }
    let inputs = [g_error, c_u_t, deg_sup, n_alpha];
    if inputs.iter().chain(op_norms).any(|v| !(*v >= T::zero())) {
        return Err(GraphonError::param("bound inputs must be nonnegative"));
    }
    let op_sum: T = op_norms.iter().copied().sum();
    let rate = n_alpha * deg_sup;
    let drift = if c_u_t * op_sum == T::zero() {
        T::zero()
    } else if rate == T::zero() {
        return Err(GraphonError::ZeroDegree {
            op_norm: op_sum.to_f64_lossy(),
        });
    } else {
        c_u_t * op_sum / rate
    };
    let coef = match model {
        Model::Repelling => T::lit(2.0),
        Model::Opposing => T::lit(4.0),
    };
    Ok(times
        .iter()
        .map(|&t| (g_error + drift) * (coef * rate * t).exp())
        .collect())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Everything needed to check the approximation bound for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport<T> {
    pub model: Model,
    pub times: Vec<T>,
    pub l2_errors: Vec<T>,
    pub sup_error: T,
    pub c_u_t: T,
    /// `|||T_{W − nα W_n}|||`
    pub op_norm_diff: T,
    /// `|||T_{W⁺} − nα T_{W_n⁺}|||`, computed for the opposing model only.
    pub op_norm_diff_pos: Option<T>,
    pub op_norm_diff_neg: Option<T>,
    pub deg_sup: T,
    pub n_alpha: T,
    pub g_error: T,
    pub bound_values: Vec<T>,
    /// `min_t (bound − ‖ξ‖₂)`
    pub min_margin: T,
    /// `min_t (bound − ‖ξ‖₂²)`, the squared left-hand side.
    pub min_margin_squared: T,
}

impl<T: Scalar> ErrorReport<T> {
    /// Value of the bound at the end of the horizon.
    pub fn final_bound(&self) -> T {
        self.bound_values.last().copied().unwrap_or(T::zero())
    }
}

/// Builds the full report for a graph trajectory against a graphon
/// reference trajectory.
///
/// `reference` is a grid kernel whose resolution divides the reference
/// trajectory's, so that trajectory solves the dynamics of `reference`
/// exactly. Operator norms are taken on the common refinement of
/// `reference` and `graph`, which is exact for step kernels.
///
/// `graph` is the step graphon `W_n` of the finite graph (unit scale for a
/// sampled graph) and `n_alpha` the product `n α_n`.
pub fn error_report<T: Scalar>(
    traj_n: &OpinionTrajectory<T>,
    traj_ref: &OpinionTrajectory<T>,
    reference: &Kernel<T>,
    graph: &Kernel<T>,
    n_alpha: T,
) -> Result<ErrorReport<T>> {
    let model = traj_n.model;
    if traj_ref.model != model {
        return Err(GraphonError::param("trajectories use different models"));
    }
    let cmp = trajectory_error(traj_n, traj_ref)?;
    let m = reference
        .resolution()
        .ok_or_else(|| GraphonError::param("reference kernel must be a grid"))?;
    let n = graph
        .resolution()
        .ok_or_else(|| GraphonError::param("graph kernel must be a grid"))?;
    if n != traj_n.n() || !traj_ref.n().is_multiple_of(m) {
        return Err(GraphonError::param("kernel and trajectory sizes disagree"));
    }
    let common = lcm(m, n);
    let scaled = graph.clone().with_scale(graph.scale() * n_alpha)?;
    let op_norm_diff = kernel_difference(reference, &scaled, common)?.operator_norm()?;

    let (op_pos, op_neg) = match model {
        Model::Repelling => (None, None),
        Model::Opposing => {
            let (rp, rn, _) = reference.split_parts();
            let (gp, gn, _) = scaled.split_parts();
            (
                Some(kernel_difference(&rp, &gp, common)?.operator_norm()?),
                Some(kernel_difference(&rn, &gn, common)?.operator_norm()?),
            )
        }
    };
    let (_, _, abs_graph) = graph.split_parts();
    let deg_sup = abs_graph.degree_profile(n)?.sup;
    let g_error = cmp.l2_errors[0];
    let norms: Vec<T> = match model {
        Model::Repelling => vec![op_norm_diff],
        Model::Opposing => vec![op_pos.unwrap(), op_neg.unwrap()],
    };
    let bound_values = approximation_bound(model, g_error, cmp.c_u_t, &norms, deg_sup, n_alpha, &cmp.times)?;
    let min_margin = bound_values
        .iter()
        .zip(&cmp.l2_errors)
        .map(|(b, e)| *b - *e)
        .fold(T::infinity(), T::min);
    let min_margin_squared = bound_values
        .iter()
        .zip(&cmp.l2_errors)
        .map(|(b, e)| *b - *e * *e)
        .fold(T::infinity(), T::min);
    Ok(ErrorReport {
        model,
        times: cmp.times,
        l2_errors: cmp.l2_errors,
        sup_error: cmp.sup_error,
        c_u_t: cmp.c_u_t,
        op_norm_diff,
        op_norm_diff_pos: op_pos,
        op_norm_diff_neg: op_neg,
        deg_sup,
        n_alpha,
        g_error,
        bound_values,
        min_margin,
        min_margin_squared,
    })
}

/// Degree statistics of one sampled graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeReport<T> {
    pub n: usize,
    pub eps: T,
    /// `δ_(n) = max_i d_i / n`
    pub max_norm_deg: T,
    /// `‖W_n‖₁ = mean_i d_i / n`
    pub avg_norm_deg: T,
    pub scaled_max: T,
    pub scaled_avg: T,
    /// `δ̄_(n)` of the expected graph on `|W|`.
    pub expected_max: T,
    /// `‖W̄_n‖₁` restricted to off-diagonal pairs.
    pub expected_avg: T,
    /// `√(log(2n/ν) / (n ε))`
    pub bound_gamma: T,
}

fn normalized_degrees<T: Scalar>(adj: &SignedAdjacency<T>) -> Vec<T> {
    let nf = T::from_usize_lossy(adj.n());
    (0..adj.n()).map(|i| T::from_usize_lossy(adj.degree(i)) / nf).collect()
}

/// `(1/n) Σ_{j ≠ i} |W(X_i, X_j)|`, the mean of `ε⁻¹ d_i / n`.
fn expected_normalized_degrees<T: Scalar>(adj: &SignedAdjacency<T>, k: &Kernel<T>) -> Result<Vec<T>> {
    let lat = adj
        .latents()
        .ok_or_else(|| GraphonError::param("adjacency carries no latent variables"))?;
    let x = lat.points();
    let n = x.len();
    let nf = T::from_usize_lossy(n);
    let mut deg = vec![T::zero(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = k.evaluate(x[i], x[j])?.abs();
            deg[i] = deg[i] + w;
            deg[j] = deg[j] + w;
        }
    }
    Ok(deg.into_iter().map(|d| d / nf).collect())
}

pub fn gamma_bound<T: Scalar>(n: usize, eps: T, nu: T) -> T {
    let nf = T::from_usize_lossy(n);
    ((T::lit(2.0) * nf / nu).ln() / (nf * eps)).sqrt()
}

/// Degrees count incident edges of either sign.
pub fn degree_report<T: Scalar>(adj: &SignedAdjacency<T>, k: &Kernel<T>, nu: T) -> Result<DegreeReport<T>> {
    if !(nu > T::zero() && nu < T::one()) {
        return Err(GraphonError::param(format!("nu = {nu} outside (0, 1)")));
    }
    let n = adj.n();
    let eps = adj.eps();
    let deg = normalized_degrees(adj);
    let expected = expected_normalized_degrees(adj, k)?;
    let nf = T::from_usize_lossy(n.max(1));
    let max_norm_deg = deg.iter().copied().fold(T::zero(), T::max);
    let avg_norm_deg = deg.iter().copied().sum::<T>() / nf;
    Ok(DegreeReport {
        n,
        eps,
        max_norm_deg,
        avg_norm_deg,
        scaled_max: max_norm_deg / eps,
        scaled_avg: avg_norm_deg / eps,
        expected_max: expected.iter().copied().fold(T::zero(), T::max),
        expected_avg: expected.iter().copied().sum::<T>() / nf,
        bound_gamma: gamma_bound(n, eps, nu),
    })
}

/// `max_i |ε⁻¹ δ_(i) − δ̄_(i)|` over the sorted degree sequences.
pub fn sorted_degree_gap<T: Scalar>(adj: &SignedAdjacency<T>, k: &Kernel<T>) -> Result<T> {
    let eps = adj.eps();
    let mut sampled: Vec<T> = normalized_degrees(adj).into_iter().map(|d| d / eps).collect();
    let mut expected = expected_normalized_degrees(adj, k)?;
    sampled.sort_by(|a, b| a.partial_cmp(b).expect("finite degrees"));
    expected.sort_by(|a, b| a.partial_cmp(b).expect("finite degrees"));
    Ok(sampled
        .iter()
        .zip(&expected)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), T::max))
}

/// Discrete `∫∫ W(x,y) (f(x)² − f(x) f(y)) dx dy` on the kernel's grid.
pub fn quadratic_form<T: Scalar>(k: &Kernel<T>, f: &[T]) -> Result<T> {
    let m = k
        .resolution()
        .ok_or_else(|| GraphonError::param("quadratic_form requires a grid kernel"))?;
    let tf = k.apply_operator(f)?;
    let d = k.degree_profile(m)?;
    let mf = T::from_usize_lossy(m);
    let s: T = (0..m).map(|i| f[i] * f[i] * d.values[i] - f[i] * tf[i]).sum();
    Ok(s / mf)
}

/// Row-major matrix of the discrete Laplacian `diag(d) − (scale/m) M`.
pub fn discrete_laplacian<T: Scalar>(k: &Kernel<T>) -> Result<Vec<T>> {
    let g = k
        .grid_matrix()
        .ok_or_else(|| GraphonError::param("discrete_laplacian requires a grid kernel"))?;
    let m = g.resolution();
    let d = k.degree_profile(m)?;
    let c = k.scale() / T::from_usize_lossy(m);
    let mut out: Vec<T> = g.as_slice().iter().map(|&v| -c * v).collect();
    for i in 0..m {
        out[i * m + i] = out[i * m + i] + d.values[i];
    }
    Ok(out)
}

// 5-point Gauss–Legendre on [-1, 1]
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// `‖g − g_n‖₂` for an analytic `g` and `g_n = g(X_i)` on `I_i`, by
/// composite Gauss–Legendre quadrature with `sub` panels per cell.
pub fn initial_condition_error<T: Scalar>(g: &InitialCondition<T>, points: &[T], sub: usize) -> Result<T> {
    let n = points.len();
    if n == 0 || sub == 0 {
        return Err(GraphonError::param("need at least one point and one panel"));
    }
    let gfun = match g {
        InitialCondition::Analytic(f) => f,
        InitialCondition::Vector(_) => return Err(GraphonError::param("initial condition must be analytic")),
    };
    let panels = T::from_usize_lossy(n * sub);
    let half_width = T::half() / panels;
    let mut total = T::zero();
    for (i, &xi) in points.iter().enumerate() {
        let gi = gfun(xi);
        for p in 0..sub {
            let centre = (T::from_usize_lossy(i * sub + p) + T::half()) / panels;
            for (node, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                let x = centre + half_width * T::lit(*node);
                let d = gfun(x) - gi;
                total = total + T::lit(w) * half_width * d * d;
            }
        }
    }
    Ok(total.sqrt())
}
