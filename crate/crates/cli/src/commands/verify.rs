use std::path::Path;

use clap::{Args, Subcommand, ValueEnum};
use msqg_wn::verify::{
    invariance_experiment, residual_refinement, vortex_marginal_experiment, GaussianityReport,
    InvarianceConfig, ResidualConfig, TimeQuadrature, VortexMarginalConfig,
};
use serde::Serialize;
use serde_json::json;

use super::{execute, Common, Verdict};
use crate::cells;
use crate::config::{check_at_least, check_epsilon, check_positive, CliError, CliResult, Params};
use crate::output::{sibling, Outputs, Table};

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Gaussian marginals of white noise along the Galerkin flow
    Invariance(InvarianceFlags),
    /// Residual of the weak formulation under refinement
    Residual(ResidualFlags),
    /// Gaussian marginals of random vortex clouds
    VortexMarginals(VortexMarginalFlags),
}

pub fn run(cmd: &VerifyCommand) -> CliResult<u8> {
    match cmd {
        VerifyCommand::Invariance(f) => execute("verify invariance", &f.common, f, invariance),
        VerifyCommand::Residual(f) => execute("verify residual", &f.common, f, residual),
        VerifyCommand::VortexMarginals(f) => {
            execute("verify vortex-marginals", &f.common, f, vortex_marginals)
        }
    }
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::invalid(format!("alpha = {alpha} is outside the valid range (0, 1)")))
    }
}

fn check_panel(panel: usize) -> CliResult<()> {
    if (1..=20).contains(&panel) {
        Ok(())
    } else {
        Err(CliError::invalid(format!("panel = {panel} is outside the valid range [1, 20]")))
    }
}

fn report_table(reports: &[GaussianityReport]) -> Vec<u8> {
    let mut t = Table::new(&[
        "phi", "t", "sample_size", "ks_statistic", "p_value", "mean", "variance",
        "target_variance", "pass",
    ]);
    for r in reports {
        t.row(cells![
            r.phi.as_str(), r.t, r.sample_size, r.ks_statistic, r.p_value, r.mean, r.variance,
            r.target_variance, r.pass
        ]);
    }
    t.into_bytes()
}

impl Params for InvarianceConfig {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 4)?;
        check_at_least("ensemble", self.ensemble, 100)?;
        check_panel(self.panel)?;
        check_alpha(self.alpha)?;
        self.steps()?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct InvarianceFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// number of test functions, at most 20
    #[arg(long)]
    panel: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn invariance(p: &InvarianceConfig, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let r = invariance_experiment(p)?;
    o.add(out.to_path_buf(), report_table(&r.reports));
    o.add_json(
        sibling(out, "summary.json"),
        &json!({
            "pass": r.pass,
            "times": r.times,
            "panel_size": r.panel_size,
            "pass_initial": r.pass_initial,
            "pass_final": r.pass_final,
            "proportion_p_value": r.proportion_p_value,
            "indistinguishable": r.indistinguishable,
            "panel_pass": r.panel_pass,
        }),
    )?;
    Ok(Verdict::Checked(r.pass))
}

impl Params for ResidualConfig {
    const STOCHASTIC: bool = false;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_positive("side", self.side)?;
        check_positive("t_final", self.t_final)?;
        check_at_least("levels", self.levels.len(), 1)?;
        for l in &self.levels {
            check_positive("levels.dt", l.dt)?;
            check_at_least("levels.cutoff", l.cutoff, 2)?;
        }
        check_positive("tolerance", self.tolerance)
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureFlag {
    Trapezoid,
    EndCorrected,
}

impl From<QuadratureFlag> for TimeQuadrature {
    fn from(q: QuadratureFlag) -> Self {
        match q {
            QuadratureFlag::Trapezoid => TimeQuadrature::Trapezoid,
            QuadratureFlag::EndCorrected => TimeQuadrature::EndCorrected,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ResidualFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    /// time quadrature of the nonlinear term
    #[arg(long, value_enum)]
    quadrature: Option<QuadratureFlag>,
    #[arg(long)]
    min_order: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

/// Refinement table at `out`, residuals per level and time in `<stem>.residuals.csv`.
fn residual(p: &ResidualConfig, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let r = residual_refinement(p)?;
    let mut t = Table::new(&["dt", "cutoff", "max_abs", "order"]);
    for row in &r.rows {
        t.row(cells![row.dt, row.cutoff, row.max_abs, row.order]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    let mut d = Table::new(&["level", "dt", "cutoff", "phi", "t", "residual"]);
    for (i, (rep, row)) in r.reports.iter().zip(&r.rows).enumerate() {
        for (&time, &res) in rep.times.iter().zip(&rep.residuals) {
            d.row(cells![i, row.dt, row.cutoff, rep.phi.as_str(), time, res]);
        }
    }
    o.add(sibling(out, "residuals.csv"), d.into_bytes());
    o.add_json(
        sibling(out, "summary.json"),
        &json!({
            "pass": r.pass,
            "rows": r.rows,
            "quadrature": p.quadrature,
        }),
    )?;
    Ok(Verdict::Checked(r.pass))
}

impl Params for VortexMarginalConfig {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_positive("side", self.side)?;
        check_at_least("vortices", self.vortices, 16)?;
        check_at_least("ensemble", self.ensemble, 100)?;
        check_positive("t_final", self.t_final)?;
        check_positive("dt", self.dt)?;
        check_panel(self.panel)?;
        check_alpha(self.alpha)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VortexMarginalFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    /// number of vortices
    #[arg(long = "N", visible_alias = "vortices")]
    vortices: Option<usize>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    panel: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn vortex_marginals(p: &VortexMarginalConfig, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let r = vortex_marginal_experiment(p)?;
    o.add(out.to_path_buf(), report_table(&r.reports));
    o.add_json(
        sibling(out, "summary.json"),
        &json!({
            "pass": r.pass,
            "times": r.times,
            "panel_size": r.panel_size,
            "collisions": r.collisions,
            "pass_initial": r.pass_initial,
            "pass_final": r.pass_final,
            "proportion_p_value": r.proportion_p_value,
        }),
    )?;
    Ok(Verdict::Checked(r.pass))
}
