//! `graphon` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use graphon_core::dynamics::{integrate, sample_initial};
use graphon_core::sampler::{make_latents, sample_adjacency, step_graphon};
use graphon_core::OpinionTrajectory;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::output::{self, Provenance};
use crate::sweep::{self, reference_trajectory, RunOptions, Setup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// `t,i,u`, one row per node and time
    Long,
    /// `t,u_1,...,u_n`, one row per time
    Wide,
}

#[derive(Debug, Parser)]
#[command(name = "graphon", version, about = "Opinion dynamics on signed graphs and their graphon limits")]
pub struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Replaces the config's seed list with this single seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Use this α instead of 1/(n ε_n). Outputs are marked as tainted.
    #[arg(long, global = true, value_name = "ALPHA")]
    pub alpha_override: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample latents and a signed adjacency matrix.
    Sample {
        /// Node count; defaults to the first entry of `n_list`.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Integrate the dynamics on one sampled graph.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Layout::Long)]
        layout: Layout,
    },
    /// Solve the graphon dynamics on the reference grid.
    SolveGraphon {
        #[arg(long, value_enum, default_value_t = Layout::Long)]
        layout: Layout,
    },
    /// Convergence sweep over n, seeds and sparsity schedules.
    Sweep,
    /// Sweep and check the error bound at every recorded time.
    BoundCheck,
    /// Monte Carlo degree statistics.
    Degrees,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("graphon: {e}");
            e.exit_code()
        }
    }
}

struct Context {
    cfg: ExperimentConfig,
    opts: RunOptions,
    prov: Provenance,
    out: PathBuf,
    format: Format,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, HarnessError> {
        let path = cli
            .config
            .as_deref()
            .ok_or_else(|| HarnessError::Config("--config <PATH> is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = cli.seed {
            cfg.seeds = vec![seed];
        }
        if let Some(a) = cli.alpha_override {
            if !a.is_finite() {
                return Err(HarnessError::Config(format!("--alpha-override {a} is not finite")));
            }
        }
        let opts = RunOptions {
            alpha_override: cli.alpha_override,
        };
        let out = cli.out.clone().unwrap_or_else(|| cfg.resolve(&cfg.output_dir));
        Ok(Context {
            prov: sweep::provenance(&cfg, opts),
            cfg,
            opts,
            out,
            format: cli.format,
        })
    }

    fn warn(&self) {
        if let Some(w) = self.prov.warning() {
            eprintln!("graphon: {w}");
        }
    }
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    let ctx = Context::new(cli)?;
    ctx.warn();
    match &cli.command {
        Command::Sample { n } => sample(&ctx, *n),
        Command::Simulate { n, layout } => simulate(&ctx, *n, *layout),
        Command::SolveGraphon { layout } => solve(&ctx, *layout),
        Command::Sweep => {
            let s = sweep::run_sweep(&ctx.cfg, ctx.opts)?;
            sweep::write_sweep(&s, &ctx.prov, &ctx.out)?;
            match s.failed() {
                0 => Ok(()),
                k => Err(HarnessError::Finding(format!("{k} of {} runs failed; see summary.json", s.runs.len()))),
            }
        }
        Command::BoundCheck => {
            let s = sweep::run_bound_check(&ctx.cfg, ctx.opts)?;
            sweep::write_bound_check(&s, &ctx.prov, &ctx.out)?;
            let margin = s.global_min_margin.map_or("n/a".into(), |m| m.to_string());
            println!("runs: {}  failed: {}  violations: {}  min margin: {margin}", s.runs.len(), s.failed_runs, s.violations);
            if !s.holds() {
                Err(HarnessError::Finding(format!(
                    "bound violated in {} run(s); offending times in bound_violations.csv",
                    s.violations
                )))
            } else if s.failed_runs > 0 {
                Err(HarnessError::Finding(format!("{} run(s) failed; see bound_check.json", s.failed_runs)))
            } else {
                Ok(())
            }
        }
        Command::Degrees => degrees(&ctx),
    }
}

fn first_n(ctx: &Context, n: Option<usize>) -> usize {
    n.unwrap_or(ctx.cfg.n_list[0])
}

fn sample(ctx: &Context, n: Option<usize>) -> Result<(), HarnessError> {
    let setup = Setup::new(&ctx.cfg, ctx.opts)?;
    let n = first_n(ctx, n);
    let seed = ctx.cfg.seeds[0];
    let eps = setup.schedules[0].schedule().eps(n)?;
    let lat = make_latents(n, ctx.cfg.latent_scheme.into(), seed)?;
    let adj = sample_adjacency(&setup.kernel, &lat, eps, seed)?;
    match ctx.format {
        Format::Csv => {
            let mut w = output::create(&ctx.out, "adjacency.csv")?;
            adj.write_csv(&mut w, &ctx.prov.lines())?;
            w.flush()?;
            let mut w = output::create(&ctx.out, "latents.csv")?;
            ctx.prov.write_csv_preamble(&mut w)?;
            writeln!(w, "i,x")?;
            for (i, x) in lat.points().iter().enumerate() {
                writeln!(w, "{},{x}", i + 1)?;
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Sample<'a> {
                tool_version: &'a str,
                config_hash: &'a str,
                n: usize,
                eps: f64,
                seed: u64,
                scheme: &'a str,
                latents: &'a [f64],
                edges: Vec<(usize, usize, i8)>,
            }
            let edges = adj.edges().map(|(i, j, s)| (i + 1, j + 1, s)).collect();
            let body = Sample {
                tool_version: output::TOOL_VERSION,
                config_hash: &ctx.prov.config_hash,
                n,
                eps,
                seed,
                scheme: lat.scheme().tag(),
                latents: lat.points(),
                edges,
            };
            output::write_json(&ctx.out, "adjacency.json", &body)?;
        }
    }
    Ok(())
}

fn write_trajectory(ctx: &Context, stem: &str, traj: &OpinionTrajectory<f64>, layout: Layout) -> Result<(), HarnessError> {
    match ctx.format {
        Format::Csv => {
            let mut w = output::create(&ctx.out, &format!("{stem}.csv"))?;
            match layout {
                Layout::Long => traj.write_long(&mut w, &ctx.prov.lines())?,
                Layout::Wide => traj.write_wide(&mut w, &ctx.prov.lines())?,
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Traj<'a> {
                tool_version: &'a str,
                config_hash: &'a str,
                #[serde(skip_serializing_if = "Option::is_none")]
                warning: Option<String>,
                model: &'a str,
                alpha: f64,
                times: &'a [f64],
                states: &'a [Vec<f64>],
            }
            let body = Traj {
                tool_version: output::TOOL_VERSION,
                config_hash: &ctx.prov.config_hash,
                warning: ctx.prov.warning(),
                model: traj.model.name(),
                alpha: traj.alpha,
                times: &traj.times,
                states: &traj.states,
            };
            output::write_json(&ctx.out, &format!("{stem}.json"), &body)?;
        }
    }
    Ok(())
}

fn simulate(ctx: &Context, n: Option<usize>, layout: Layout) -> Result<(), HarnessError> {
    let setup = Setup::new(&ctx.cfg, ctx.opts)?;
    let n = first_n(ctx, n);
    let seed = ctx.cfg.seeds[0];
    let eps = setup.schedules[0].schedule().eps(n)?;
    let alpha = ctx.opts.alpha_override.unwrap_or(1.0 / (n as f64 * eps));
    let lat = make_latents(n, ctx.cfg.latent_scheme.into(), seed)?;
    let adj = sample_adjacency(&setup.kernel, &lat, eps, seed)?;
    let wn = step_graphon(&adj, 1.0)?;
    let g = sample_initial(&setup.initial, &lat)?;
    for model in ctx.cfg.model.models() {
        let traj = integrate(model, &wn, alpha, &g, ctx.cfg.horizon, setup.step)?;
        write_trajectory(ctx, &format!("trajectory_{}", model.name()), &traj, layout)?;
    }
    Ok(())
}

fn solve(ctx: &Context, layout: Layout) -> Result<(), HarnessError> {
    let setup = Setup::new(&ctx.cfg, ctx.opts)?;
    for model in ctx.cfg.model.models() {
        let (_, traj) = reference_trajectory(&setup, model, ctx.cfg.horizon)?;
        write_trajectory(ctx, &format!("reference_{}", model.name()), &traj, layout)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct DegreeRow {
    sparsity: String,
    n: usize,
    eps: f64,
    seed: u64,
    #[serde(flatten)]
    deg: sweep::DegreeSummary,
    gap_within_bound: bool,
}

fn degrees(ctx: &Context) -> Result<(), HarnessError> {
    use graphon_core::analysis::{degree_report, sorted_degree_gap};
    use rayon::prelude::*;

    let setup = Setup::new(&ctx.cfg, ctx.opts)?;
    let cfg = &ctx.cfg;
    let tasks: Vec<_> = setup
        .schedules
        .iter()
        .flat_map(|&s| cfg.n_list.iter().flat_map(move |&n| cfg.seeds.iter().map(move |&seed| (s, n, seed))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<DegreeRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, n, seed)| -> Result<DegreeRow, HarnessError> {
                let eps = s.schedule().eps(n)?;
                let lat = make_latents(n, cfg.latent_scheme.into(), seed)?;
                let adj = sample_adjacency(&setup.kernel, &lat, eps, seed)?;
                let d = degree_report(&adj, &setup.kernel, cfg.nu)?;
                let gap = sorted_degree_gap(&adj, &setup.kernel)?;
                Ok(DegreeRow {
                    sparsity: s.label(),
                    n,
                    eps,
                    seed,
                    gap_within_bound: gap <= d.bound_gamma,
                    deg: sweep::DegreeSummary {
                        max_norm_deg: d.max_norm_deg,
                        avg_norm_deg: d.avg_norm_deg,
                        scaled_max: d.scaled_max,
                        scaled_avg: d.scaled_avg,
                        expected_max: d.expected_max,
                        expected_avg: d.expected_avg,
                        bound_gamma: d.bound_gamma,
                        sorted_gap: gap,
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    match ctx.format {
        Format::Csv => {
            let mut w = output::create(&ctx.out, "degrees.csv")?;
            ctx.prov.write_csv_preamble(&mut w)?;
            writeln!(
                w,
                "sparsity,n,eps,seed,max_norm_deg,avg_norm_deg,scaled_max,scaled_avg,expected_max,expected_avg,bound_gamma,sorted_gap,gap_within_bound"
            )?;
            for r in &rows {
                let d = &r.deg;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.sparsity, r.n, r.eps, r.seed, d.max_norm_deg, d.avg_norm_deg, d.scaled_max, d.scaled_avg,
                    d.expected_max, d.expected_avg, d.bound_gamma, d.sorted_gap, r.gap_within_bound
                )?;
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                tool_version: &'a str,
                config_hash: &'a str,
                rows: &'a [DegreeRow],
            }
            output::write_json(
                &ctx.out,
                "degrees.json",
                &Body {
                    tool_version: output::TOOL_VERSION,
                    config_hash: &ctx.prov.config_hash,
                    rows: &rows,
                },
            )?;
        }
    }
    Ok(())
}

