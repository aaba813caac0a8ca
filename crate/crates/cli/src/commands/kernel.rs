use clap::{Args, Subcommand, ValueEnum};
use msqg_wn::kernels::{
    convergence_points, kernel_bound_scan, kernel_convergence, kernel_plane, kernel_torus_images,
    kernel_torus_spectral, poisson_coefficients, KernelEvaluator, KernelSpec, LatticeTruncation,
};
use msqg_wn::Vec2;
use serde::{Deserialize, Serialize};

use super::{execute, Common, Verdict};
use crate::cells;
use crate::config::{check_at_least, check_epsilon, check_increasing, check_positive, CliResult, Params};
use crate::output::{sibling, Table};

#[derive(Subcommand, Debug)]
pub enum KernelCommand {
    /// Evaluate K on the plane or the torus at given points
    Eval(EvalFlags),
    /// sup |x|^(2-eps) |K^M(x)| over log-radial samples, per epsilon and M
    BoundScan(BoundScanFlags),
    /// Fourier coefficients of the periodized plane kernel against the closed form
    PoissonCheck(PoissonFlags),
    /// Relative error of K^M against K as M doubles
    Converge(ConvergeFlags),
}

pub fn run(cmd: &KernelCommand) -> CliResult<u8> {
    match cmd {
        KernelCommand::Eval(f) => execute("kernel eval", &f.common, f, eval),
        KernelCommand::BoundScan(f) => execute("kernel bound-scan", &f.common, f, bound_scan),
        KernelCommand::PoissonCheck(f) => execute("kernel poisson-check", &f.common, f, poisson),
        KernelCommand::Converge(f) => execute("kernel converge", &f.common, f, converge),
    }
}

pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected a point `x,y`")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([p(a)?, p(b)?])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    /// closed form on the plane, tabulated Ewald splitting on the torus
    #[default]
    Fast,
    /// square partial sums of the Fourier series
    Spectral,
    /// paired lattice-image sums
    Images,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub epsilon: f64,
    /// torus side; absent for the plane
    pub side: Option<f64>,
    pub evaluator: Evaluator,
    /// series truncation; 24 for images and 384 for the spectral sum when absent
    pub n_max: Option<usize>,
    pub tail_tol: f64,
    pub points: Vec<[f64; 2]>,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            epsilon: 0.5,
            side: None,
            evaluator: Evaluator::Fast,
            n_max: None,
            tail_tol: 1e-6,
            points: convergence_points().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl Params for EvalParams {
    const STOCHASTIC: bool = false;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        if let Some(m) = self.side {
            check_positive("side", m)?;
        }
        check_positive("tail_tol", self.tail_tol)?;
        check_at_least("points", self.points.len(), 1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct EvalFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    /// torus side M; the plane when absent
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    #[arg(long, value_enum)]
    evaluator: Option<Evaluator>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    /// evaluation point `x,y`; repeat for several
    #[arg(long = "point", value_parser = parse_point, allow_hyphen_values = true)]
    points: Option<Vec<[f64; 2]>>,
}

fn eval(p: &EvalParams, out: &std::path::Path, o: &mut crate::output::Outputs) -> CliResult<Verdict> {
    let mut t = Table::new(&["x", "y", "kx", "ky", "norm", "shell_change", "converged"]);
    let spec = match p.side {
        Some(m) => KernelSpec::torus(p.epsilon, m)?,
        None => KernelSpec::plane(p.epsilon)?,
    };
    let fast = KernelEvaluator::new(&spec)?;
    for &[x, y] in &p.points {
        let v = Vec2::new(x, y);
        let (k, change, converged) = match (p.side, p.evaluator) {
            (None, _) => (kernel_plane(&spec, v)?, 0.0, true),
            (Some(_), Evaluator::Fast) => {
                if v.norm() == 0.0 {
                    return Err(msqg_wn::Error::Singularity(v).into());
                }
                (fast.kernel(v), 0.0, true)
            }
            (Some(_), Evaluator::Spectral) => {
                let trunc = LatticeTruncation::new(p.n_max.unwrap_or(384), p.tail_tol);
                let s = kernel_torus_spectral(&spec, v, &trunc)?;
                (s.value, s.shell_change, s.converged)
            }
            (Some(_), Evaluator::Images) => {
                let trunc = LatticeTruncation::new(p.n_max.unwrap_or(24), p.tail_tol);
                let s = kernel_torus_images(&spec, v, &trunc)?;
                (s.value, s.shell_change, s.converged)
            }
        };
        t.row(cells![x, y, k.x, k.y, k.norm(), change, converged]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundScanParams {
    pub epsilons: Vec<f64>,
    pub sides: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BoundScanParams {
    fn default() -> Self {
        BoundScanParams {
            epsilons: vec![0.25, 0.5, 0.75],
            sides: vec![1.0, 2.0, 4.0, 8.0],
            samples: 10_000,
            seed: 0,
        }
    }
}

impl Params for BoundScanParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_at_least("epsilons", self.epsilons.len(), 1)?;
        for &e in &self.epsilons {
            check_epsilon(e)?;
        }
        check_increasing("sides", &self.sides)?;
        check_positive("sides", self.sides[0])?;
        check_at_least("samples", self.samples, 1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BoundScanFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// comma-separated list
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// comma-separated torus sides
    #[arg(long, value_delimiter = ',')]
    sides: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn bound_scan(
    p: &BoundScanParams,
    out: &std::path::Path,
    o: &mut crate::output::Outputs,
) -> CliResult<Verdict> {
    let mut t = Table::new(&["epsilon", "side", "samples", "sup", "argmax_x", "argmax_y", "ratio"]);
    for &eps in &p.epsilons {
        let scans = p
            .sides
            .iter()
            .map(|&m| kernel_bound_scan(&KernelSpec::torus(eps, m)?, p.samples, p.seed))
            .collect::<msqg_wn::Result<Vec<_>>>()?;
        let max = scans.iter().map(|s| s.sup).fold(0.0, f64::max);
        let min = scans.iter().map(|s| s.sup).fold(f64::INFINITY, f64::min);
        for (s, &m) in scans.iter().zip(&p.sides) {
            t.row(cells![eps, m, s.samples, s.sup, s.argmax.x, s.argmax.y, max / min]);
        }
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonParams {
    pub epsilon: f64,
    /// all `k` with `0 < |k|_inf <= k_max`
    pub k_max: usize,
    /// Gauss-Legendre order per cell
    pub resolution: usize,
}

impl Default for PoissonParams {
    fn default() -> Self {
        PoissonParams {
            epsilon: 0.5,
            k_max: 4,
            resolution: 6,
        }
    }
}

impl Params for PoissonParams {
    const STOCHASTIC: bool = false;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_at_least("k_max", self.k_max, 1)?;
        check_at_least("resolution", self.resolution, 2)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct PoissonFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
}

fn poisson(p: &PoissonParams, out: &std::path::Path, o: &mut crate::output::Outputs) -> CliResult<Verdict> {
    let n = p.k_max as i64;
    let ks: Vec<[i64; 2]> = (-n..=n)
        .flat_map(|a| (-n..=n).map(move |b| [a, b]))
        .filter(|k| *k != [0, 0])
        .collect();
    let res = poisson_coefficients(p.epsilon, &ks, p.resolution)?;
    let mut t = Table::new(&[
        "k1", "k2", "computed_x_re", "computed_x_im", "computed_y_re", "computed_y_im",
        "expected_x_re", "expected_x_im", "expected_y_re", "expected_y_im", "rel_error",
    ]);
    for c in &res {
        t.row(cells![
            c.k[0], c.k[1], c.computed[0].re, c.computed[0].im, c.computed[1].re, c.computed[1].im,
            c.expected[0].re, c.expected[0].im, c.expected[1].re, c.expected[1].im, c.rel_error
        ]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    Ok(Verdict::Done)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeParams {
    pub epsilon: f64,
    pub sides: Vec<f64>,
    pub n_max: usize,
    pub tail_tol: f64,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        ConvergeParams {
            epsilon: 0.5,
            sides: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            n_max: 24,
            tail_tol: 1e-6,
        }
    }
}

impl Params for ConvergeParams {
    const STOCHASTIC: bool = false;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_increasing("sides", &self.sides)?;
        check_positive("tail_tol", self.tail_tol)?;
        check_at_least("n_max", self.n_max, 1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConvergeFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    sides: Option<Vec<f64>>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
}

fn converge(p: &ConvergeParams, out: &std::path::Path, o: &mut crate::output::Outputs) -> CliResult<Verdict> {
    let trunc = LatticeTruncation::new(p.n_max, p.tail_tol);
    let r = kernel_convergence(p.epsilon, &convergence_points(), &p.sides, &trunc)?;
    let mut t = Table::new(&["point", "x", "y", "side", "rel_error"]);
    for row in &r.rows {
        t.row(cells![row.point, row.x.x, row.x.y, row.side, row.rel_error]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    let mut s = Table::new(&["point", "x", "y", "final_rel_error", "non_monotone_steps", "pass"]);
    for pt in &r.points {
        s.row(cells![pt.point, pt.x.x, pt.x.y, pt.final_rel_error, pt.non_monotone_steps, pt.pass]);
    }
    o.add(sibling(out, "points.csv"), s.into_bytes());
    Ok(Verdict::Done)
}
