//! Latent variables and W-random signed graphs.
//!
//! # Randomness
//!
//! Every random draw comes from a ChaCha8 stream keyed by the caller's seed.
//! Stochastic latent variables use a dedicated stream; edge `(i, j)` with
//! `i < j` is drawn from stream `i` at position `j − i − 1`. Each row is
//! therefore independent of the order rows are generated in.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GraphonError, Result};
use crate::kernel::Kernel;
use crate::scalar::Scalar;

const LATENT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatentScheme {
    Deterministic,
    Stochastic,
}

impl LatentScheme {
    pub fn tag(self) -> &'static str {
        match self {
            LatentScheme::Deterministic => "det",
            LatentScheme::Stochastic => "stoch",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "det" | "deterministic" => Some(LatentScheme::Deterministic),
            "stoch" | "stochastic" => Some(LatentScheme::Stochastic),
            _ => None,
        }
    }
}

/// Sorted node positions `X_1 ≤ … ≤ X_n` in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVariables<T> {
    points: Vec<T>,
    scheme: LatentScheme,
    seed: u64,
}

impl<T: Scalar> LatentVariables<T> {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn scheme(&self) -> LatentScheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One value per line, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for x in &self.points {
            writeln!(w, "{x}")?;
        }
        Ok(())
    }
}

/// `X_i = i/n`, or the order statistics of `n` seeded uniforms.
pub fn make_latents<T: Scalar>(n: usize, scheme: LatentScheme, rng_seed: u64) -> Result<LatentVariables<T>> {
    if n == 0 {
        return Err(GraphonError::param("latent variables need n >= 1"));
    }
    let points = match scheme {
        LatentScheme::Deterministic => {
            let nn = T::from_usize_lossy(n);
            (1..=n).map(|i| T::from_usize_lossy(i) / nn).collect()
        }
        LatentScheme::Stochastic => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(LATENT_STREAM);
            // 1 − U lies in (0, 1]
            let mut u: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
            u.sort_by(f64::total_cmp);
            u.into_iter().map(T::lit).collect()
        }
    };
    Ok(LatentVariables {
        points,
        scheme,
        seed: rng_seed,
    })
}

/// Edge-probability scaling `ε_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsitySchedule {
    Constant { c: f64 },
    /// `ε_n = n^(−τ)`
    Power { tau: f64 },
    /// `ε_n = c (log n)^q / n`
    Polylog { c: f64, q: f64 },
}

impl SparsitySchedule {
    /// Evaluates `ε_n`; values outside `(0, 1]` are an error, never clamped.
    pub fn eps(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let e = match *self {
            SparsitySchedule::Constant { c } => c,
            SparsitySchedule::Power { tau } => nf.powf(-tau),
            SparsitySchedule::Polylog { c, q } => c * nf.ln().powf(q) / nf,
        };
        if e > 0.0 && e <= 1.0 {
            Ok(e)
        } else {
            Err(GraphonError::param(format!("sparsity schedule {self:?} gives eps = {e} at n = {n}, outside (0, 1]")))
        }
    }
}

/// Symmetric sparse `{−1, 0, +1}` matrix with empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedAdjacency<T> {
    n: usize,
    /// Per-node neighbour lists sorted by index, both directions stored.
    neighbors: Vec<Vec<(usize, i8)>>,
    eps: T,
    latents: Option<LatentVariables<T>>,
    seed: u64,
}

impl<T: Scalar> SignedAdjacency<T> {
    /// Builds from an upper-triangle edge list of `(i, j, sign)`, 0-based.
    pub fn from_edges(n: usize, edges: &[(usize, usize, i8)], eps: T, seed: u64) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j, s) in edges {
            if i >= n || j >= n || i == j {
                return Err(GraphonError::param(format!("invalid edge ({i}, {j}) for n = {n}")));
            }
            if s != 1 && s != -1 {
                return Err(GraphonError::param(format!("edge sign must be ±1, got {s}")));
            }
            neighbors[i].push((j, s));
            neighbors[j].push((i, s));
        }
        for row in &mut neighbors {
            row.sort_unstable_by_key(|&(j, _)| j);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(GraphonError::param("duplicate edge"));
            }
        }
        Ok(SignedAdjacency {
            n,
            neighbors,
            eps,
            latents: None,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn latents(&self) -> Option<&LatentVariables<T>> {
        self.latents.as_ref()
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.neighbors[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|p| self.neighbors[i][p].1)
            .unwrap_or(0)
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, i8)] {
        &self.neighbors[i]
    }

    /// Number of incident edges regardless of sign.
    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Upper-triangle edges `(i, j, sign)` with `i < j`, 0-based, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&(j, _)| j > i).map(move |&(j, s)| (i, j, s)))
    }

    /// Positive and negative parts `A⁺`, `A⁻` (both with `+1` entries).
    pub fn split_signs(&self) -> (SignedAdjacency<T>, SignedAdjacency<T>) {
        let part = |sign: i8| SignedAdjacency {
            n: self.n,
            neighbors: self
                .neighbors
                .iter()
                .map(|row| row.iter().filter(|e| e.1 == sign).map(|&(j, _)| (j, 1)).collect())
                .collect(),
            eps: self.eps,
            latents: self.latents.clone(),
            seed: self.seed,
        };
        (part(1), part(-1))
    }

    pub fn to_dense(&self) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for (i, row) in self.neighbors.iter().enumerate() {
            for &(j, s) in row {
                out[i * n + j] = if s > 0 { T::one() } else { -T::one() };
            }
        }
        out
    }

    /// Edge list `i,j,sign` (1-based, `i < j`) after a `# n=… eps=… seed=… scheme=…`
    /// line. `preamble` lines are written first, each prefixed with `# `.
    pub fn write_csv<W: Write>(&self, mut w: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        let scheme = self.latents.as_ref().map(|l| l.scheme().tag()).unwrap_or("det");
        writeln!(w, "# n={} eps={} seed={} scheme={}", self.n, self.eps, self.seed, scheme)?;
        writeln!(w, "i,j,sign")?;
        for (i, j, s) in self.edges() {
            writeln!(w, "{},{},{}", i + 1, j + 1, s)?;
        }
        Ok(())
    }

    /// Reads the format written by [`SignedAdjacency::write_csv`]. Latent
    /// variables are not part of the edge list and come back as `None`.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta: Option<(usize, T, u64)> = None;
        let mut edges = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let bad = |msg: &str| GraphonError::Parse {
                line: lineno + 1,
                msg: msg.to_string(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if rest.starts_with("n=") {
                    let mut n = None;
                    let mut eps = None;
                    let mut seed = 0;
                    for tok in rest.split_whitespace() {
                        match tok.split_once('=') {
                            Some(("n", v)) => n = v.parse::<usize>().ok(),
                            Some(("eps", v)) => eps = v.parse::<f64>().ok(),
                            Some(("seed", v)) => seed = v.parse::<u64>().map_err(|_| bad("bad seed"))?,
                            _ => {}
                        }
                    }
                    let n = n.ok_or_else(|| bad("missing n"))?;
                    let eps = eps.ok_or_else(|| bad("missing eps"))?;
                    meta = Some((n, T::lit(eps), seed));
                }
                continue;
            }
            if !saw_header {
                if line != "i,j,sign" {
                    return Err(bad("expected header i,j,sign"));
                }
                saw_header = true;
                continue;
            }
            let (n, _, _) = meta.ok_or_else(|| bad("edge before metadata line"))?;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(bad("expected three fields"));
            }
            let i: usize = f[0].parse().map_err(|_| bad("bad i"))?;
            let j: usize = f[1].parse().map_err(|_| bad("bad j"))?;
            let s: i8 = f[2].parse().map_err(|_| bad("bad sign"))?;
            if i == 0 || j == 0 || i >= j || j > n {
                return Err(bad("indices must satisfy 1 <= i < j <= n"));
            }
            edges.push((i - 1, j - 1, s));
        }
        let (n, eps, seed) = meta.ok_or_else(|| GraphonError::Parse {
            line: 0,
            msg: "missing metadata line".into(),
        })?;
        Self::from_edges(n, &edges, eps, seed)
    }
}

/// Samples `A_ij = sign(W(X_i, X_j)) · Bernoulli(ε |W(X_i, X_j)|)` for `i < j`.
pub fn sample_adjacency<T: Scalar>(
    k: &Kernel<T>,
    lat: &LatentVariables<T>,
    eps: T,
    rng_seed: u64,
) -> Result<SignedAdjacency<T>> {
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(GraphonError::param(format!("eps = {eps} outside (0, 1]")));
    }
    let n = lat.n();
    let x = lat.points();
    let mut upper: Vec<Vec<(usize, i8)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(i as u64);
        let mut row = Vec::new();
        for j in (i + 1)..n {
            let w = k.evaluate(x[i], x[j])?;
            if !(w.abs() <= T::one()) {
                return Err(GraphonError::param(format!("kernel value {w} outside [-1, 1]")));
            }
            let u = T::lit(rng.random::<f64>());
            if w != T::zero() && u < eps * w.abs() {
                row.push((j, if w > T::zero() { 1 } else { -1 }));
            }
        }
        upper.push(row);
    }
    let mut neighbors: Vec<Vec<(usize, i8)>> = vec![Vec::new(); n];
    for (i, row) in upper.iter().enumerate() {
        for &(j, s) in row {
            neighbors[j].push((i, s));
        }
    }
    for (i, row) in upper.into_iter().enumerate() {
        neighbors[i].extend(row);
    }
    Ok(SignedAdjacency {
        n,
        neighbors,
        eps,
        latents: Some(lat.clone()),
        seed: rng_seed,
    })
}

/// The weighted graph `Ā_ij = W(X_i, X_j)` as a step graphon, diagonal
/// included. The kernel's scale is kept.
pub fn expected_matrix<T: Scalar>(k: &Kernel<T>, lat: &LatentVariables<T>) -> Result<Kernel<T>> {
    let n = lat.n();
    let x = lat.points();
    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let w = k.raw(x[i], x[j]);
            values[i * n + j] = w;
            values[j * n + i] = w;
        }
    }
    let g = if k.is_bounded() {
        Kernel::grid(n, values)?
    } else {
        Kernel::grid_unbounded(n, values)?
    };
    g.with_scale(k.scale())
}

/// `W_n` with cell `(i, j)` equal to `A_ij`, times `scale`.
pub fn step_graphon<T: Scalar>(adj: &SignedAdjacency<T>, scale: T) -> Result<Kernel<T>> {
    Kernel::grid(adj.n(), adj.to_dense())?.with_scale(scale)
}
