use std::path::Path;

use clap::{Args, Subcommand};
use msqg_wn::quadform::{
    band_distance_sq, bikernel_panel, h_l2_norm_sq, hl2_bound, identity_check, nonlinear_estimate, BandCutoff,
    Ensemble,
};
use msqg_wn::{sample_draw, Bump, Vec2};
use serde::{Deserialize, Serialize};

use super::{execute, Common, Verdict};
use crate::cells;
use crate::config::{check_at_least, check_epsilon, check_positive, CliError, CliResult, Params};
use crate::output::{sibling, Outputs, Table};

#[derive(Subcommand, Debug)]
pub enum QuadformCommand {
    /// Monte Carlo mean and variance of the quadratic form for five bikernels
    Identities(IdentitiesFlags),
    /// Mean-square Cauchy diagnostics of the nonlinear estimator
    Cauchy(CauchyFlags),
    /// L2 distance of the approximants to H
    FnConvergence(FnConvergenceFlags),
}

pub fn run(cmd: &QuadformCommand) -> CliResult<u8> {
    match cmd {
        QuadformCommand::Identities(f) => execute("quadform identities", &f.common, f, identities),
        QuadformCommand::Cauchy(f) => execute("quadform cauchy", &f.common, f, cauchy),
        QuadformCommand::FnConvergence(f) => {
            execute("quadform fn-convergence", &f.common, f, fn_convergence)
        }
    }
}

fn check_schedule(s: &[u32]) -> CliResult<()> {
    if s.is_empty() || s[0] == 0 || s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::invalid(format!(
            "schedule = {s:?} must be a non-empty increasing list of integers >= 1"
        )));
    }
    Ok(())
}

/// Centred bump used as the test function.
fn bump(radius: f64) -> CliResult<Bump> {
    Ok(Bump::new(Vec2::ZERO, radius, 1.0)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesParams {
    pub side: f64,
    pub cutoff: usize,
    pub draws: usize,
    pub seed: u64,
}

impl Default for IdentitiesParams {
    fn default() -> Self {
        IdentitiesParams {
            side: 4.0,
            cutoff: 2,
            draws: 100_000,
            seed: 0,
        }
    }
}

impl Params for IdentitiesParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 2)?;
        check_at_least("draws", self.draws, 2)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct IdentitiesFlags {
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

fn identities(p: &IdentitiesParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let panel = bikernel_panel(p.side)?;
    let rows = identity_check(&panel, p.side, p.cutoff, p.draws, p.seed)?;
    let mut t = Table::new(&[
        "bikernel", "draws", "mean", "mean_stderr", "diagonal", "mean_z", "variance",
        "variance_stderr", "target_variance", "variance_z", "renormalized_mean", "pass",
    ]);
    for r in &rows {
        t.row(cells![
            r.bikernel.as_str(), r.draws, r.mean, r.mean_stderr, r.diagonal, r.mean_z, r.variance,
            r.variance_stderr, r.target_variance, r.variance_z, r.renormalized_mean, r.pass
        ]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CauchyParams {
    pub epsilon: f64,
    pub side: f64,
    pub cutoff: usize,
    pub schedule: Vec<u32>,
    pub draws: usize,
    /// radius of the centred bump test function
    pub radius: f64,
    pub seed: u64,
}

impl Default for CauchyParams {
    fn default() -> Self {
        CauchyParams {
            epsilon: 0.5,
            side: 4.0,
            cutoff: 6,
            schedule: vec![2, 4, 8, 16],
            draws: 400,
            radius: 1.0,
            seed: 0,
        }
    }
}

impl Params for CauchyParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 1)?;
        check_schedule(&self.schedule)?;
        check_at_least("draws", self.draws, 2)?;
        check_positive("radius", self.radius)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CauchyFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    /// comma-separated increasing list of n
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<u32>>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

/// The estimate is taken on draw number `draws` of the seeded ensemble, which the Cauchy
/// diagnostics (draws `0..draws`) do not use.
fn cauchy(p: &CauchyParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let phi = bump(p.radius)?;
    let field = sample_draw(p.side, p.cutoff, p.seed, p.draws as u64)?;
    let est = nonlinear_estimate(
        &field,
        &phi,
        p.epsilon,
        &p.schedule,
        Ensemble {
            draws: p.draws,
            seed: p.seed,
        },
    )?;
    let mut t = Table::new(&["n", "m", "mean_sq", "stderr", "bound", "pass"]);
    for r in &est.cauchy {
        t.row(cells![r.n, r.m, r.mean_sq, r.stderr, r.bound, r.pass]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    let mut l = Table::new(&["n", "value", "alt_value", "alt_distance", "h_distance"]);
    for r in &est.levels {
        l.row(cells![r.n, r.value, r.alt_value, r.alt_distance, r.h_distance]);
    }
    o.add(sibling(out, "levels.csv"), l.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FnConvergenceParams {
    pub epsilon: f64,
    pub schedule: Vec<u32>,
    pub radius: f64,
}

impl Default for FnConvergenceParams {
    fn default() -> Self {
        FnConvergenceParams {
            epsilon: 0.5,
            schedule: vec![2, 4, 8, 16],
            radius: 1.0,
        }
    }
}

impl Params for FnConvergenceParams {
    const STOCHASTIC: bool = false;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_schedule(&self.schedule)?;
        check_positive("radius", self.radius)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct FnConvergenceFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<u32>>,
    #[arg(long)]
    radius: Option<f64>,
}

fn fn_convergence(p: &FnConvergenceParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    // f_n - H lives in the band |x - y| < n^-6, where the torus kernel is the plane kernel
    let phi = bump(p.radius)?;
    let norm = h_l2_norm_sq(&phi, p.epsilon)?.sqrt();
    let bound = hl2_bound(&phi, p.epsilon)?.bound.sqrt();
    let mut t = Table::new(&[
        "n", "delta", "h_distance", "next_distance", "decreasing", "h_l2_norm", "h_l2_bound",
    ]);
    let mut prev = f64::INFINITY;
    for (i, &n) in p.schedule.iter().enumerate() {
        let cut = BandCutoff::new(n);
        let d = band_distance_sq(&phi, p.epsilon, None, Some(cut), None)?.sqrt();
        let next = match p.schedule.get(i + 1) {
            Some(&m) => Some(
                band_distance_sq(&phi, p.epsilon, None, Some(cut), Some(BandCutoff::new(m)))?
                    .sqrt(),
            ),
            None => None,
        };
        t.row(cells![n, cut.delta(), d, next, d < prev, norm, bound]);
        prev = d;
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}
