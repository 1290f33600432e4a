//! Convergence sweeps and bound verification over `(n, seed)` runs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use graphon_core::analysis::{degree_report, error_report, sorted_degree_gap, ErrorReport};
use graphon_core::dynamics::{default_step, integrate, sample_initial};
use graphon_core::sampler::{make_latents, sample_adjacency, step_graphon};
use graphon_core::{Discretization, GraphonError, InitialCondition, Kernel64, Model, OpinionTrajectory, Source};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SparsitySpec};
use crate::error::HarnessError;
use crate::output::{self, Provenance, TOOL_VERSION};
use crate::registry::{build_initial, build_kernel};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Replaces the derived `α_n = 1/(n ε_n)`. Outputs carry a warning.
    pub alpha_override: Option<f64>,
}

/// Kernel, initial condition and time grid shared by every run of a config.
pub struct Setup {
    pub kernel: Kernel64,
    pub initial: InitialCondition<f64>,
    pub m: usize,
    pub step: f64,
    pub schedules: Vec<SparsitySpec>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Self, HarnessError> {
        let kernel = build_kernel(&cfg.kernel, cfg)?;
        let initial = build_initial(&cfg.initial)?;
        let schedules = cfg.schedules();
        let step = match cfg.step {
            Some(h) => h,
            None => default_step(cfg.horizon, lipschitz_bound(cfg, &schedules, opts)),
        };
        Ok(Setup {
            kernel,
            initial,
            m: cfg.reference_resolution(),
            step,
            schedules,
        })
    }

    /// Kernel against which operator norms are measured: the kernel itself
    /// when it is a grid refined by `M` (then the reference solution is
    /// exact), otherwise its midpoint discretization at `M`.
    fn norm_reference(&self, reference_grid: &Kernel64) -> Kernel64 {
        match self.kernel.resolution() {
            Some(r) if self.m.is_multiple_of(r) => self.kernel.clone(),
            _ => reference_grid.clone(),
        }
    }
}

/// `4 nα_n` with the degree bound `‖d_{|W_n|}‖_∞ ≤ 1`, maximized over runs.
fn lipschitz_bound(cfg: &ExperimentConfig, schedules: &[SparsitySpec], opts: RunOptions) -> f64 {
    let mut l: f64 = 4.0;
    for s in schedules {
        for &n in &cfg.n_list {
            let n_alpha = match (opts.alpha_override, s.schedule().eps(n)) {
                (Some(a), _) => n as f64 * a.abs(),
                (None, Ok(e)) => 1.0 / e,
                (None, Err(_)) => continue,
            };
            l = l.max(4.0 * n_alpha);
        }
    }
    l
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub max_norm_deg: f64,
    pub avg_norm_deg: f64,
    pub scaled_max: f64,
    pub scaled_avg: f64,
    pub expected_max: f64,
    pub expected_avg: f64,
    pub bound_gamma: f64,
    pub sorted_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub model: String,
    pub sparsity: String,
    pub n: usize,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub sup_error: Option<f64>,
    pub min_bound_margin: Option<f64>,
    pub min_bound_margin_squared: Option<f64>,
    pub final_bound: Option<f64>,
    pub g_error: Option<f64>,
    pub op_norm_diff: Option<f64>,
    pub op_norm_diff_pos: Option<f64>,
    pub op_norm_diff_neg: Option<f64>,
    pub deg_sup: Option<f64>,
    pub c_u_t: Option<f64>,
    pub deg: Option<DegreeSummary>,
    pub status: String,
    /// `(t, l2_error, bound)` at every recorded time.
    #[serde(skip)]
    pub curve: Vec<(f64, f64, f64)>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub tool_version: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub reference_resolution: usize,
    pub step: f64,
    pub runs: Vec<RunRecord>,
    /// model → sparsity label → n → median sup_error over successful runs.
    pub medians_by_n: BTreeMap<String, BTreeMap<String, BTreeMap<usize, f64>>>,
}

impl SweepSummary {
    pub fn failed(&self) -> usize {
        self.runs.iter().filter(|r| !r.is_ok()).count()
    }
}

pub fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

fn run_pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))
}

/// Reference trajectory on the `M`-grid with `α = 1/M`.
pub fn reference_trajectory(
    setup: &Setup,
    model: Model,
    horizon: f64,
) -> Result<(Kernel64, OpinionTrajectory<f64>), HarnessError> {
    let grid = setup.kernel.discretize(setup.m, Discretization::Midpoint)?;
    let g0 = setup.initial.on_midpoints(setup.m)?;
    let traj = integrate(model, &grid, 1.0 / setup.m as f64, &g0, horizon, setup.step)?
        .with_source(Source::GraphonGrid { m: setup.m });
    Ok((grid, traj))
}

fn failed(model: Model, sched: SparsitySpec, n: usize, seed: u64, eps: Option<f64>, alpha: Option<f64>, e: &dyn std::fmt::Display) -> RunRecord {
    RunRecord {
        model: model.name().into(),
        sparsity: sched.label(),
        n,
        eps,
        alpha,
        seed,
        sup_error: None,
        min_bound_margin: None,
        min_bound_margin_squared: None,
        final_bound: None,
        g_error: None,
        op_norm_diff: None,
        op_norm_diff_pos: None,
        op_norm_diff_neg: None,
        deg_sup: None,
        c_u_t: None,
        deg: None,
        status: format!("failed: {e}"),
        curve: Vec::new(),
    }
}

struct References {
    norm_kernel: Kernel64,
    by_model: Vec<(Model, OpinionTrajectory<f64>)>,
}

fn one_graph(
    cfg: &ExperimentConfig,
    setup: &Setup,
    refs: &References,
    opts: RunOptions,
    sched: SparsitySpec,
    n: usize,
    seed: u64,
) -> Vec<RunRecord> {
    let models: Vec<Model> = refs.by_model.iter().map(|(m, _)| *m).collect();
    let eps = match sched.schedule().eps(n) {
        Ok(e) => e,
        Err(e) => return models.iter().map(|&m| failed(m, sched, n, seed, None, None, &e)).collect(),
    };
    let alpha = opts.alpha_override.unwrap_or(1.0 / (n as f64 * eps));
    let prepared = (|| -> Result<_, GraphonError> {
        let lat = make_latents(n, cfg.latent_scheme.into(), seed)?;
        let adj = sample_adjacency(&setup.kernel, &lat, eps, seed)?;
        let wn = step_graphon(&adj, 1.0)?;
        let g_n = sample_initial(&setup.initial, &lat)?;
        let d = degree_report(&adj, &setup.kernel, cfg.nu)?;
        let deg = DegreeSummary {
            max_norm_deg: d.max_norm_deg,
            avg_norm_deg: d.avg_norm_deg,
            scaled_max: d.scaled_max,
            scaled_avg: d.scaled_avg,
            expected_max: d.expected_max,
            expected_avg: d.expected_avg,
            bound_gamma: d.bound_gamma,
            sorted_gap: sorted_degree_gap(&adj, &setup.kernel)?,
        };
        Ok((wn, g_n, deg))
    })();
    let (wn, g_n, deg) = match prepared {
        Ok(p) => p,
        Err(e) => return models.iter().map(|&m| failed(m, sched, n, seed, Some(eps), Some(alpha), &e)).collect(),
    };
    refs.by_model
        .iter()
        .map(|(model, reference)| {
            let report = integrate(*model, &wn, alpha, &g_n, cfg.horizon, setup.step)
                .and_then(|u| error_report(&u, reference, &refs.norm_kernel, &wn, n as f64 * alpha));
            match report {
                Ok(r) => record(*model, sched, n, seed, eps, alpha, &r, deg.clone()),
                Err(e) => failed(*model, sched, n, seed, Some(eps), Some(alpha), &e),
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn record(model: Model, sched: SparsitySpec, n: usize, seed: u64, eps: f64, alpha: f64, r: &ErrorReport<f64>, deg: DegreeSummary) -> RunRecord {
    RunRecord {
        model: model.name().into(),
        sparsity: sched.label(),
        n,
        eps: Some(eps),
        alpha: Some(alpha),
        seed,
        sup_error: Some(r.sup_error),
        min_bound_margin: Some(r.min_margin),
        min_bound_margin_squared: Some(r.min_margin_squared),
        final_bound: Some(r.final_bound()),
        g_error: Some(r.g_error),
        op_norm_diff: Some(r.op_norm_diff),
        op_norm_diff_pos: r.op_norm_diff_pos,
        op_norm_diff_neg: r.op_norm_diff_neg,
        deg_sup: Some(r.deg_sup),
        c_u_t: Some(r.c_u_t),
        deg: Some(deg),
        status: "ok".into(),
        curve: r
            .times
            .iter()
            .zip(&r.l2_errors)
            .zip(&r.bound_values)
            .map(|((t, e), b)| (*t, *e, *b))
            .collect(),
    }
}

/// Runs every `(sparsity, n, seed)` graph against one reference solution
/// per model. Failed runs are recorded and never abort the sweep.
pub fn run_sweep(cfg: &ExperimentConfig, opts: RunOptions) -> Result<SweepSummary, HarnessError> {
    let setup = Setup::new(cfg, opts)?;
    let pool = run_pool(cfg.workers)?;
    let models = cfg.model.models();
    let by_model = pool.install(|| {
        models
            .par_iter()
            .map(|&m| reference_trajectory(&setup, m, cfg.horizon).map(|(_, t)| (m, t)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let reference_grid = setup.kernel.discretize(setup.m, Discretization::Midpoint)?;
    let refs = References {
        norm_kernel: setup.norm_reference(&reference_grid),
        by_model,
    };
    drop(reference_grid);

    let tasks: Vec<(SparsitySpec, usize, u64)> = setup
        .schedules
        .iter()
        .flat_map(|&s| cfg.n_list.iter().flat_map(move |&n| cfg.seeds.iter().map(move |&seed| (s, n, seed))))
        .collect();
    let nested: Vec<Vec<RunRecord>> =
        pool.install(|| tasks.par_iter().map(|&(s, n, seed)| one_graph(cfg, &setup, &refs, opts, s, n, seed)).collect());
    let mut runs: Vec<RunRecord> = Vec::with_capacity(nested.len() * models.len());
    for model in &models {
        runs.extend(nested.iter().flatten().filter(|r| r.model == model.name()).cloned());
    }

    let mut groups: BTreeMap<String, BTreeMap<String, BTreeMap<usize, Vec<f64>>>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.is_ok()) {
        groups
            .entry(r.model.clone())
            .or_default()
            .entry(r.sparsity.clone())
            .or_default()
            .entry(r.n)
            .or_default()
            .push(r.sup_error.unwrap_or(f64::NAN));
    }
    let medians_by_n = groups
        .into_iter()
        .map(|(m, by_s)| {
            let inner = by_s
                .into_iter()
                .map(|(s, by_n)| (s, by_n.into_iter().filter_map(|(n, mut v)| median(&mut v).map(|x| (n, x))).collect()))
                .collect();
            (m, inner)
        })
        .collect();

    let prov = provenance(cfg, opts);
    Ok(SweepSummary {
        tool_version: TOOL_VERSION.into(),
        config_hash: prov.config_hash.clone(),
        warning: prov.warning(),
        reference_resolution: setup.m,
        step: setup.step,
        runs,
        medians_by_n,
    })
}

pub fn provenance(cfg: &ExperimentConfig, opts: RunOptions) -> Provenance {
    Provenance {
        config_hash: cfg.hash(),
        alpha_override: opts.alpha_override,
    }
}

/// `sweep_<model>.csv` with columns `model,n,eps,seed,t,l2_error,bound`
/// for each model, and `summary.json`.
pub fn write_sweep(summary: &SweepSummary, prov: &Provenance, dir: &Path) -> Result<(), HarnessError> {
    let mut models: Vec<&str> = summary.runs.iter().map(|r| r.model.as_str()).collect();
    models.dedup();
    for model in models {
        let mut w = output::create(dir, &format!("sweep_{model}.csv"))?;
        prov.write_csv_preamble(&mut w)?;
        writeln!(w, "model,n,eps,seed,t,l2_error,bound")?;
        for r in summary.runs.iter().filter(|r| r.model == model && r.is_ok()) {
            let eps = output::opt(r.eps);
            for (t, e, b) in &r.curve {
                writeln!(w, "{model},{},{eps},{},{t},{e},{b}", r.n, r.seed)?;
            }
        }
        w.flush()?;
    }
    output::write_json(dir, "summary.json", summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckSummary {
    pub tool_version: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    /// Smallest `min_t (bound − error)` over successful runs.
    pub global_min_margin: Option<f64>,
    pub global_min_margin_squared: Option<f64>,
    pub violations: usize,
    pub failed_runs: usize,
    pub runs: Vec<RunRecord>,
}

impl BoundCheckSummary {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

pub fn run_bound_check(cfg: &ExperimentConfig, opts: RunOptions) -> Result<BoundCheckSummary, HarnessError> {
    let sweep = run_sweep(cfg, opts)?;
    let ok = || sweep.runs.iter().filter(|r| r.is_ok());
    let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.min(v))));
    let global_min_margin = fold_min(&mut ok().filter_map(|r| r.min_bound_margin));
    let global_min_margin_squared = fold_min(&mut ok().filter_map(|r| r.min_bound_margin_squared));
    let violations = ok().filter(|r| r.min_bound_margin.is_some_and(|m| m < 0.0)).count();
    Ok(BoundCheckSummary {
        tool_version: sweep.tool_version,
        config_hash: sweep.config_hash,
        warning: sweep.warning,
        global_min_margin,
        global_min_margin_squared,
        violations,
        failed_runs: sweep.runs.iter().filter(|r| !r.is_ok()).count(),
        runs: sweep.runs,
    })
}

/// `bound_check.csv` (one row per run), `bound_check.json`, and, when the
/// bound is violated, `bound_violations.csv` with every offending time.
pub fn write_bound_check(summary: &BoundCheckSummary, prov: &Provenance, dir: &Path) -> Result<(), HarnessError> {
    let mut w = output::create(dir, "bound_check.csv")?;
    prov.write_csv_preamble(&mut w)?;
    writeln!(w, "model,sparsity,n,eps,seed,sup_error,min_margin,min_margin_squared,final_bound,status")?;
    for r in &summary.runs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.sparsity,
            r.n,
            output::opt(r.eps),
            r.seed,
            output::opt(r.sup_error),
            output::opt(r.min_bound_margin),
            output::opt(r.min_bound_margin_squared),
            output::opt(r.final_bound),
            r.status.replace(',', ";")
        )?;
    }
    w.flush()?;
    if !summary.holds() {
        let mut w = output::create(dir, "bound_violations.csv")?;
        prov.write_csv_preamble(&mut w)?;
        writeln!(w, "model,n,eps,seed,t,l2_error,bound")?;
        for r in summary.runs.iter().filter(|r| r.is_ok()) {
            for (t, e, b) in r.curve.iter().filter(|(_, e, b)| e > b) {
                writeln!(w, "{},{},{},{},{t},{e},{b}", r.model, r.n, output::opt(r.eps), r.seed)?;
            }
        }
        w.flush()?;
    }
    output::write_json(dir, "bound_check.json", summary)
}
