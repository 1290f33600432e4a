//! Named kernels and initial conditions.

use std::f64::consts::PI;

use graphon_core::{InitialCondition, Kernel64};

use crate::config::{ExperimentConfig, InitialSpec, KernelSpec};
use crate::error::HarnessError;

pub fn build_kernel(spec: &KernelSpec, cfg: &ExperimentConfig) -> Result<Kernel64, HarnessError> {
    let k = match spec {
        // a one-cell grid keeps operator norms on the coarse common refinement
        KernelSpec::Constant { p } => Kernel64::block(&[vec![*p]])?,
        KernelSpec::Block { values } => Kernel64::block(values)?,
        KernelSpec::Product => Kernel64::product(),
        KernelSpec::Polarized { a } => Kernel64::polarized(*a)?,
        KernelSpec::GridFile { path } => {
            let full = cfg.resolve(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| HarnessError::Config(format!("cannot read grid file {}: {e}", full.display())))?;
            parse_grid(&text).map_err(|msg| HarnessError::Config(format!("{}: {msg}", full.display())))?
        }
    };
    Ok(k)
}

/// Square CSV matrix; symmetry is checked to 1e−12 before symmetrizing.
pub fn parse_grid(text: &str) -> Result<Kernel64, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", lineno + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(format!("expected a square matrix, got {m} rows of lengths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>()));
    }
    Kernel64::grid(m, rows.concat()).map_err(|e| e.to_string())
}

pub fn build_initial(spec: &InitialSpec) -> Result<InitialCondition<f64>, HarnessError> {
    let g = match *spec {
        InitialSpec::Linear => InitialCondition::analytic(|x: f64| x)?,
        InitialSpec::Sine { k } => InitialCondition::analytic(move |x: f64| (2.0 * PI * k * x).sin())?,
        InitialSpec::Step { a, b } => InitialCondition::analytic(move |x: f64| if x <= 0.5 { a } else { b })?,
        InitialSpec::Constant { c } => InitialCondition::analytic(move |_| c)?,
    };
    Ok(g)
}
