//! Repelling and opposing opinion dynamics.
//!
//! On a grid kernel with matrix `M`, scale `s` and speed `α`:
//!
//! * repelling: `du_i/dt = α s Σ_j M_ij (u_j − u_i)`
//! * opposing:  `du_i/dt = α s (Σ_j M_ij u_j − Σ_j |M_ij| u_i)`
//!
//! A sampled graph uses `M = A` and `α = 1/(n ε_n)`. A graphon is solved on
//! its midpoint grid with `α = 1/M`, which is exactly the weighted-graph
//! dynamics of the step kernel.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{GraphonError, Result};
use crate::kernel::{cell_center, Discretization, GridMatrix, Kernel};
use crate::linalg;
use crate::sampler::LatentVariables;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Repelling,
    Opposing,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Repelling => "repelling",
            Model::Opposing => "opposing",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Graph { n: usize, eps: f64 },
    GraphonGrid { m: usize },
    /// A bare grid kernel handed to [`integrate`].
    Grid { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpinionTrajectory<T> {
    pub model: Model,
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub alpha: T,
    pub source: Source,
}

impl<T: Scalar> OpinionTrajectory<T> {
    pub fn n(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    /// Long layout: header `t,i,u`, one row per node and time (1-based `i`).
    pub fn write_long<W: Write>(&self, mut w: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "t,i,u")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            for (i, u) in s.iter().enumerate() {
                writeln!(w, "{t},{},{u}", i + 1)?;
            }
        }
        Ok(())
    }

    /// Wide layout: header `t,u_1,…,u_n`, one row per time.
    pub fn write_wide<W: Write>(&self, mut w: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        write!(w, "t")?;
        for i in 1..=self.n() {
            write!(w, ",u_{i}")?;
        }
        writeln!(w)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t}")?;
            for u in s {
                write!(w, ",{u}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub type InitialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Initial opinion profile `g`.
#[derive(Clone)]
pub enum InitialCondition<T> {
    Analytic(InitialFn<T>),
    Vector(Vec<T>),
}

const PROBE_POINTS: usize = 10_000;

impl<T: Scalar> InitialCondition<T> {
    /// Wraps `g`, rejecting it if it is non-finite anywhere on a uniform probe grid.
    pub fn analytic<F>(g: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        for i in 0..=PROBE_POINTS {
            let x = T::from_usize_lossy(i) / T::from_usize_lossy(PROBE_POINTS);
            if !g(x).is_finite() {
                return Err(GraphonError::param(format!("initial condition not finite at x = {x}")));
            }
        }
        Ok(InitialCondition::Analytic(Arc::new(g)))
    }

    pub fn eval(&self, x: T) -> Option<T> {
        match self {
            InitialCondition::Analytic(g) => Some(g(x)),
            InitialCondition::Vector(_) => None,
        }
    }

    /// Values at the `m` cell centres. A vector must already have length `m`.
    pub fn on_midpoints(&self, m: usize) -> Result<Vec<T>> {
        match self {
            InitialCondition::Analytic(g) => Ok((0..m).map(|i| g(cell_center(i, m))).collect()),
            InitialCondition::Vector(v) if v.len() == m => Ok(v.clone()),
            InitialCondition::Vector(v) => Err(GraphonError::Dimension {
                expected: m,
                got: v.len(),
            }),
        }
    }
}

impl<T> fmt::Debug for InitialCondition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Analytic(_) => f.write_str("InitialCondition::Analytic"),
            InitialCondition::Vector(v) => write!(f, "InitialCondition::Vector(len {})", v.len()),
        }
    }
}

/// `(g(X_1), …, g(X_n))`.
pub fn sample_initial<T: Scalar>(g: &InitialCondition<T>, lat: &LatentVariables<T>) -> Result<Vec<T>> {
    match g {
        InitialCondition::Analytic(f) => Ok(lat.points().iter().map(|&x| f(x)).collect()),
        InitialCondition::Vector(v) if v.len() == lat.n() => Ok(v.clone()),
        InitialCondition::Vector(v) => Err(GraphonError::Dimension {
            expected: lat.n(),
            got: v.len(),
        }),
    }
}

/// Linear right-hand side `c (M u − d ∘ u)` with the diagonal term
/// precomputed from signed or absolute row sums.
struct Coupling<'a, T> {
    n: usize,
    values: &'a [T],
    coef: T,
    row_sums: Vec<T>,
}

impl<'a, T: Scalar> Coupling<'a, T> {
    fn new(model: Model, g: &'a GridMatrix<T>, coef: T) -> Self {
        let n = g.resolution();
        let row_sums = (0..n)
            .map(|i| match model {
                Model::Repelling => g.row(i).iter().copied().sum(),
                Model::Opposing => g.row(i).iter().map(|v| v.abs()).sum(),
            })
            .collect();
        Coupling {
            n,
            values: g.as_slice(),
            coef,
            row_sums,
        }
    }

    fn apply(&self, u: &[T], out: &mut [T]) {
        linalg::matvec(self.n, self.values, u, out);
        for ((o, &d), &ui) in out.iter_mut().zip(&self.row_sums).zip(u) {
            *o = self.coef * (*o - d * ui);
        }
    }
}

fn grid_of<'a, T: Scalar>(k: &'a Kernel<T>, op: &str) -> Result<&'a GridMatrix<T>> {
    k.grid_matrix()
        .ok_or_else(|| GraphonError::param(format!("{op} requires a grid kernel")))
}

/// Right-hand side of the repelling or opposing ODE at state `u`.
pub fn rhs<T: Scalar>(model: Model, k: &Kernel<T>, alpha: T, u: &[T]) -> Result<Vec<T>> {
    let g = grid_of(k, "rhs")?;
    if u.len() != g.resolution() {
        return Err(GraphonError::Dimension {
            expected: g.resolution(),
            got: u.len(),
        });
    }
    let mut out = vec![T::zero(); u.len()];
    Coupling::new(model, g, alpha * k.scale()).apply(u, &mut out);
    Ok(out)
}

fn step_count<T: Scalar>(horizon: T, h: T) -> Result<usize> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(GraphonError::param(format!("step h = {h} must be positive")));
    }
    if !(horizon >= T::zero()) || !horizon.is_finite() {
        return Err(GraphonError::param(format!("horizon T = {horizon} must be nonnegative")));
    }
    let k = (horizon / h).round();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * horizon.max(h);
    if (k * h - horizon).abs() > tol {
        return Err(GraphonError::param(format!("step h = {h} does not divide horizon T = {horizon}")));
    }
    Ok(k.to_usize().unwrap_or(0))
}

/// Largest `h ≤ min(1e−2, 0.1/L)` that divides `horizon`.
pub fn default_step(horizon: f64, lipschitz: f64) -> f64 {
    let mut h = 1e-2_f64;
    if lipschitz > 0.0 {
        h = h.min(0.1 / lipschitz);
    }
    if horizon <= 0.0 {
        return h;
    }
    horizon / (horizon / h).ceil()
}

/// Classical fixed-step RK4, recording the state at every step.
pub fn integrate<T: Scalar>(
    model: Model,
    k: &Kernel<T>,
    alpha: T,
    g: &[T],
    horizon: T,
    h: T,
) -> Result<OpinionTrajectory<T>> {
    let grid = grid_of(k, "integrate")?;
    let n = grid.resolution();
    if g.len() != n {
        return Err(GraphonError::Dimension { expected: n, got: g.len() });
    }
    let steps = step_count(horizon, h)?;
    let sys = Coupling::new(model, grid, alpha * k.scale());

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    states.push(g.to_vec());

    let half = T::half() * h;
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut u = g.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut tmp = vec![T::zero(); n];
    for step in 1..=steps {
        sys.apply(&u, &mut k1);
        for i in 0..n {
            tmp[i] = u[i] + half * k1[i];
        }
        sys.apply(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = u[i] + half * k2[i];
        }
        sys.apply(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = u[i] + h * k3[i];
        }
        sys.apply(&tmp, &mut k4);
        for i in 0..n {
            u[i] = u[i] + sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        let t = T::from_usize_lossy(step) * h;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(GraphonError::NonFinite { time: t.to_f64_lossy() });
        }
        times.push(t);
        states.push(u.clone());
    }
    Ok(OpinionTrajectory {
        model,
        times,
        states,
        alpha,
        source: Source::Grid { n },
    })
}

/// Nyström solution of the graphon dynamics on the midpoint `m`-grid.
pub fn solve_graphon<T: Scalar>(
    model: Model,
    k: &Kernel<T>,
    g: &InitialCondition<T>,
    horizon: T,
    h: T,
    m: usize,
) -> Result<OpinionTrajectory<T>> {
    let grid = k.discretize(m, Discretization::Midpoint)?;
    let g0 = g.on_midpoints(m)?;
    let alpha = T::one() / T::from_usize_lossy(m);
    Ok(integrate(model, &grid, alpha, &g0, horizon, h)?.with_source(Source::GraphonGrid { m }))
}

/// Sup-norm stopping threshold for a Picard window.
pub const PICARD_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PicardSolution<T> {
    pub trajectory: OpinionTrajectory<T>,
    /// Sup-norm change between successive iterates, per window.
    pub window_deltas: Vec<Vec<T>>,
    pub window_length: T,
}

/// Integrand of the fixed-point map, written in the `|W|`/`W⁻` split:
/// `W u_y − |W| u_x = |W| (u_y − u_x) − 2 W⁻ u_y`.
fn picard_integrand<T: Scalar>(model: Model, g: &GridMatrix<T>, coef: T, u: &[T], out: &mut [T]) {
    let n = g.resolution();
    let two = T::lit(2.0);
    for i in 0..n {
        let row = g.row(i);
        let mut s = T::zero();
        match model {
            Model::Repelling => {
                for j in 0..n {
                    s = s + row[j] * (u[j] - u[i]);
                }
            }
            Model::Opposing => {
                let mut neg = T::zero();
                for j in 0..n {
                    s = s + row[j].abs() * (u[j] - u[i]);
                    neg = neg + (-row[j]).max(T::zero()) * u[j];
                }
                s = s - two * neg;
            }
        }
        out[i] = coef * s;
    }
}

/// Fixed-point solve of `u = g + ∫_0^t F(u) ds` on successive windows.
///
/// Windows have length at most `1/(8 ‖α n s M‖_∞)`, which makes the map a
/// contraction with constant at most 1/2. Each window carries a uniform grid
/// of `n_steps` intervals with cumulative trapezoidal quadrature.
pub fn picard_solve<T: Scalar>(
    model: Model,
    k: &Kernel<T>,
    alpha: T,
    g: &[T],
    horizon: T,
    n_steps: usize,
    iters: usize,
) -> Result<PicardSolution<T>> {
    let grid = grid_of(k, "picard_solve")?;
    let n = grid.resolution();
    if g.len() != n {
        return Err(GraphonError::Dimension { expected: n, got: g.len() });
    }
    if n_steps == 0 || iters == 0 {
        return Err(GraphonError::param("picard_solve needs n_steps >= 1 and iters >= 1"));
    }
    if !(horizon >= T::zero()) {
        return Err(GraphonError::param("horizon must be nonnegative"));
    }
    let coef = alpha * k.scale();
    let sup_w = grid.as_slice().iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let sup_eff = (coef * T::from_usize_lossy(n) * sup_w).abs();

    let mut traj = OpinionTrajectory {
        model,
        times: vec![T::zero()],
        states: vec![g.to_vec()],
        alpha,
        source: Source::Grid { n },
    };
    if horizon == T::zero() {
        return Ok(PicardSolution {
            trajectory: traj,
            window_deltas: Vec::new(),
            window_length: T::zero(),
        });
    }
    let tau_max = if sup_eff > T::zero() {
        (T::one() / (T::lit(8.0) * sup_eff)).min(horizon)
    } else {
        horizon
    };
    let windows = (horizon / tau_max).ceil().to_usize().unwrap_or(1).max(1);
    let tau = horizon / T::from_usize_lossy(windows);
    let dt = tau / T::from_usize_lossy(n_steps);
    let tol = T::lit(PICARD_TOL);

    let mut window_deltas = Vec::with_capacity(windows);
    let mut u0 = g.to_vec();
    let mut f = vec![vec![T::zero(); n]; n_steps + 1];
    for w in 0..windows {
        let mut iterate = vec![u0.clone(); n_steps + 1];
        let mut deltas = Vec::new();
        let mut converged = false;
        for _ in 0..iters {
            for (fk, uk) in f.iter_mut().zip(&iterate) {
                picard_integrand(model, grid, coef, uk, fk);
            }
            let mut next = Vec::with_capacity(n_steps + 1);
            next.push(u0.clone());
            let mut acc = vec![T::zero(); n];
            for s in 1..=n_steps {
                for i in 0..n {
                    acc[i] = acc[i] + T::half() * dt * (f[s - 1][i] + f[s][i]);
                }
                next.push(u0.iter().zip(&acc).map(|(a, b)| *a + *b).collect());
            }
            let delta = next
                .iter()
                .zip(&iterate)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).abs()))
                .fold(T::zero(), T::max);
            iterate = next;
            deltas.push(delta);
            if !delta.is_finite() {
                break;
            }
            if delta < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(GraphonError::NoConvergence {
                what: "picard iteration",
                iters,
                last: f64::NAN,
                residual: deltas.last().map_or(f64::NAN, |d| d.to_f64_lossy()),
            });
        }
        let t0 = T::from_usize_lossy(w) * tau;
        for (s, state) in iterate.iter().enumerate().skip(1) {
            traj.times.push(t0 + T::from_usize_lossy(s) * dt);
            traj.states.push(state.clone());
        }
        u0 = iterate.pop().expect("window grid is nonempty");
        window_deltas.push(deltas);
    }
    Ok(PicardSolution {
        trajectory: traj,
        window_deltas,
        window_length: tau,
    })
}
