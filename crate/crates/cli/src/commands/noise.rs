use std::path::Path;

use clap::{Args, Subcommand};
use msqg_wn::noise::{
    covariance_panel, covariance_test, sample_draw, weighted_sobolev_norm_sq, write_wnf1,
    FieldGrid, WeightSpec,
};
use msqg_wn::stats::{par_draws, Estimate};
use serde::{Deserialize, Serialize};

use super::{execute, Common, Verdict};
use crate::cells;
use crate::config::{check_at_least, check_increasing, check_positive, CliError, CliResult, Params};
use crate::output::{sibling, Outputs, Table};

#[derive(Subcommand, Debug)]
pub enum NoiseCommand {
    /// Coefficient tables of white-noise draws
    Sample(SampleFlags),
    /// Empirical covariance of pairings against the L2 inner products
    CovarianceTest(CovarianceFlags),
    /// Monte Carlo mean of the weighted negative Sobolev norm per torus side
    WeightedNorm(WeightedFlags),
    /// One draw on a grid, as a binary WNF1 file
    Dump(DumpFlags),
}

pub fn run(cmd: &NoiseCommand) -> CliResult<u8> {
    match cmd {
        NoiseCommand::Sample(f) => execute("noise sample", &f.common, f, sample),
        NoiseCommand::CovarianceTest(f) => execute("noise covariance-test", &f.common, f, covariance),
        NoiseCommand::WeightedNorm(f) => execute("noise weighted-norm", &f.common, f, weighted),
        NoiseCommand::Dump(f) => execute("noise dump", &f.common, f, dump),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    pub side: f64,
    pub cutoff: usize,
    pub draws: usize,
    pub seed: u64,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams {
            side: 8.0,
            cutoff: 8,
            draws: 1,
            seed: 0,
        }
    }
}

impl Params for SampleParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 1)?;
        check_at_least("draws", self.draws, 1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SampleFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn sample(p: &SampleParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let mut t = Table::new(&["draw", "k1", "k2", "re", "im"]);
    for i in 0..p.draws as u64 {
        let f = sample_draw(p.side, p.cutoff, p.seed, i)?;
        for (k, c) in f.modes().iter() {
            t.row(cells![i, k[0], k[1], c.re, c.im]);
        }
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceParams {
    pub side: f64,
    pub cutoff: usize,
    pub draws: usize,
    pub seed: u64,
}

impl Default for CovarianceParams {
    fn default() -> Self {
        CovarianceParams {
            side: 4.0,
            cutoff: 2,
            draws: 100_000,
            seed: 0,
        }
    }
}

impl Params for CovarianceParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 2)?;
        check_at_least("draws", self.draws, 2)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CovarianceFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn covariance(p: &CovarianceParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let panel = covariance_panel(p.side)?;
    let rows = covariance_test(p.side, p.cutoff, &panel, p.draws, p.seed)?;
    let mut t = Table::new(&["phi", "psi", "draws", "empirical", "target", "stderr", "z", "pass"]);
    for r in &rows {
        t.row(cells![r.phi.as_str(), r.psi.as_str(), r.draws, r.empirical, r.target, r.stderr, r.z, r.pass]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedParams {
    pub sides: Vec<f64>,
    pub cutoff: usize,
    pub sigma: f64,
    pub s: f64,
    pub draws: usize,
    pub seed: u64,
}

impl Default for WeightedParams {
    fn default() -> Self {
        WeightedParams {
            sides: vec![4.0, 8.0, 16.0, 32.0],
            cutoff: 4,
            sigma: 3.0,
            s: -1.5,
            draws: 10,
            seed: 0,
        }
    }
}

impl Params for WeightedParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_increasing("sides", &self.sides)?;
        check_positive("sides", self.sides[0])?;
        check_at_least("cutoff", self.cutoff, 1)?;
        if !(self.sigma > 2.0 && self.sigma.is_finite()) {
            return Err(CliError::invalid(format!(
                "sigma = {} is outside the valid range (2, inf)",
                self.sigma
            )));
        }
        if !(self.s <= 0.0 && self.s.is_finite()) {
            return Err(CliError::invalid(format!(
                "s = {} is outside the valid range (-inf, 0]",
                self.s
            )));
        }
        check_at_least("draws", self.draws, 2)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct WeightedFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    sides: Option<Vec<f64>>,
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Sobolev index, e.g. -1.5
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn weighted(p: &WeightedParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let mut t = Table::new(&[
        "side", "cutoff", "draws", "mean", "stderr", "max_tail", "half_width", "grid_points",
    ]);
    for &m in &p.sides {
        let spec = WeightSpec::default_for(m, p.cutoff, p.sigma, p.s);
        spec.validate(m, p.cutoff)?;
        let norms = par_draws(p.draws, |i| {
            sample_draw(m, p.cutoff, p.seed, i).and_then(|f| weighted_sobolev_norm_sq(&f, &spec))
        })
        .into_iter()
        .collect::<msqg_wn::Result<Vec<_>>>()?;
        let values: Vec<f64> = norms.iter().map(|n| n.value).collect();
        let est = Estimate::of(&values);
        let tail = norms.iter().map(|n| n.tail).fold(0.0, f64::max);
        t.row(cells![
            m, p.cutoff, p.draws, est.mean, est.stderr, tail, norms[0].half_width, norms[0].grid_points
        ]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DumpParams {
    pub side: f64,
    pub cutoff: usize,
    pub seed: u64,
    /// draw index within the seeded ensemble
    pub index: u64,
    /// grid points per direction
    pub grid: usize,
}

impl Default for DumpParams {
    fn default() -> Self {
        DumpParams {
            side: 8.0,
            cutoff: 16,
            seed: 0,
            index: 0,
            grid: 64,
        }
    }
}

impl Params for DumpParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 1)?;
        check_at_least("grid", self.grid, 2 * self.cutoff + 1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct DumpFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    index: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
}

/// Binary grid at `out` plus a one-row CSV description next to it.
fn dump(p: &DumpParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    if sibling(out, "csv") == out {
        return Err(CliError::invalid("the WNF1 output needs another extension than .csv"));
    }
    let f = sample_draw(p.side, p.cutoff, p.seed, p.index)?;
    let grid = FieldGrid::from_field(&f, p.grid)?;
    let mut bytes = Vec::new();
    write_wnf1(&mut bytes, &grid)?;
    o.add(out.to_path_buf(), bytes);
    let s = &grid.samples;
    let h2 = (p.side / p.grid as f64).powi(2);
    let mut t = Table::new(&["nx", "ny", "side", "min", "max", "mean", "l2_norm_sq"]);
    t.row(cells![
        grid.nx,
        grid.ny,
        grid.side,
        s.iter().cloned().fold(f64::INFINITY, f64::min),
        s.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        s.iter().sum::<f64>() / s.len() as f64,
        s.iter().map(|v| v * v).sum::<f64>() * h2
    ]);
    o.add(sibling(out, "csv"), t.into_bytes());
    Ok(Verdict::Done)
}
