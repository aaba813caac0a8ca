use std::path::Path;

use clap::{Args, Subcommand, ValueEnum};
use msqg_wn::dynamics::{integrate_galerkin, integrate_vortex, SpectralState, VortexState, VortexSystem};
use msqg_wn::noise::{write_wnf1, FieldGrid};
use msqg_wn::verify::{trig_panel, two_mode_state};
use msqg_wn::{sample_draw, KernelSpec, Pairing, TestFunction};
use serde::{Deserialize, Serialize};

use super::{execute, Common, Verdict};
use crate::cells;
use crate::config::{check_at_least, check_epsilon, check_positive, CliError, CliResult, Params};
use crate::output::{ndjson, sibling, Outputs, Table};

#[derive(Subcommand, Debug)]
pub enum DynCommand {
    /// Point vortices with Gaussian intensities and uniform positions
    Vortex(VortexFlags),
    /// Galerkin-truncated spectral solver
    Galerkin(GalerkinFlags),
}

pub fn run(cmd: &DynCommand) -> CliResult<u8> {
    match cmd {
        DynCommand::Vortex(f) => execute("dyn vortex", &f.common, f, vortex),
        DynCommand::Galerkin(f) => execute("dyn galerkin", &f.common, f, galerkin),
    }
}

fn check_dt(dt: f64) -> CliResult<()> {
    if dt.is_finite() && dt != 0.0 {
        Ok(())
    } else {
        Err(CliError::invalid(format!("dt = {dt} must be finite and non-zero")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VortexDomain {
    #[default]
    Torus,
    Plane,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VortexParams {
    pub epsilon: f64,
    pub domain: VortexDomain,
    /// torus side, also the side of the square holding the initial positions on the plane
    pub side: f64,
    pub vortices: usize,
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    /// record positions in the trajectory
    pub positions: bool,
    pub seed: u64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            epsilon: 0.5,
            domain: VortexDomain::Torus,
            side: 8.0,
            vortices: 64,
            dt: 1e-3,
            steps: 1000,
            sample_every: 10,
            positions: false,
            seed: 0,
        }
    }
}

impl Params for VortexParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_positive("side", self.side)?;
        check_at_least("vortices", self.vortices, 1)?;
        check_dt(self.dt)?;
        check_at_least("sample_every", self.sample_every, 1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VortexFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    domain: Option<VortexDomain>,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    /// number of vortices
    #[arg(long = "N", visible_alias = "vortices")]
    vortices: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    sample_every: Option<usize>,
    #[arg(long)]
    positions: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Diagnostics CSV at `out`, trajectory records in `<stem>.ndjson`.
fn vortex(p: &VortexParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let spec = match p.domain {
        VortexDomain::Torus => KernelSpec::torus(p.epsilon, p.side)?,
        VortexDomain::Plane => KernelSpec::plane(p.epsilon)?,
    };
    let system = VortexSystem::new(&spec)?;
    let state = VortexState::random(p.side, p.vortices, p.seed, 0)?;
    let run = integrate_vortex(&state, &system, p.dt, p.steps, p.sample_every, p.positions)?;
    let mut t = Table::new(&["t", "hamiltonian", "circulation", "min_distance"]);
    for s in &run.samples {
        t.row(cells![s.t, s.hamiltonian, s.circulation, s.min_distance]);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    o.add(sibling(out, "ndjson"), ndjson(&run.samples)?);
    Ok(Verdict::Done)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Initial {
    /// a draw of truncated white noise
    #[default]
    WhiteNoise,
    /// the smooth modes (1, 0) and (0, 2)
    TwoMode,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalerkinParams {
    pub epsilon: f64,
    pub side: f64,
    pub cutoff: usize,
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    pub initial: Initial,
    /// amplitude of the two-mode data
    pub amplitude: f64,
    /// number of panel test functions paired with the state
    pub panel: usize,
    /// grid points per direction of the final-state WNF1 dump, 0 for none
    pub dump_grid: usize,
    pub seed: u64,
}

impl Default for GalerkinParams {
    fn default() -> Self {
        GalerkinParams {
            epsilon: 0.5,
            side: 8.0,
            cutoff: 16,
            dt: 1e-3,
            steps: 1000,
            sample_every: 10,
            initial: Initial::WhiteNoise,
            amplitude: 1.0,
            panel: 4,
            dump_grid: 0,
            seed: 0,
        }
    }
}

impl Params for GalerkinParams {
    const STOCHASTIC: bool = true;
    fn validate(&self) -> CliResult<()> {
        check_epsilon(self.epsilon)?;
        check_positive("side", self.side)?;
        check_at_least("cutoff", self.cutoff, 4)?;
        check_dt(self.dt)?;
        check_at_least("sample_every", self.sample_every, 1)?;
        if self.panel > 20 {
            return Err(CliError::invalid(format!("panel = {} must be at most 20", self.panel)));
        }
        if self.dump_grid != 0 {
            check_at_least("dump_grid", self.dump_grid, 2 * self.cutoff + 1)?;
        }
        Ok(())
    }

    fn needs_seed(&self) -> bool {
        self.initial == Initial::WhiteNoise
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GalerkinFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "M", visible_alias = "side")]
    side: Option<f64>,
    /// mode cutoff
    #[arg(long = "N", visible_alias = "cutoff")]
    cutoff: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    sample_every: Option<usize>,
    #[arg(long, value_enum)]
    initial: Option<Initial>,
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long)]
    panel: Option<usize>,
    #[arg(long)]
    dump_grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Diagnostics CSV at `out`, records in `<stem>.ndjson` and the optional final field in
/// `<stem>.final.wnf`.
fn galerkin(p: &GalerkinParams, out: &Path, o: &mut Outputs) -> CliResult<Verdict> {
    let state = match p.initial {
        Initial::WhiteNoise => SpectralState::new(sample_draw(p.side, p.cutoff, p.seed, 0)?),
        Initial::TwoMode => two_mode_state(p.side, p.cutoff, p.amplitude)?,
    };
    let panel = if p.panel > 0 { trig_panel(p.side, p.panel)? } else { Vec::new() };
    let pairings: Vec<Pairing> = panel
        .iter()
        .map(|f| Pairing::new(f, p.side, p.cutoff))
        .collect::<msqg_wn::Result<_>>()?;
    let run = integrate_galerkin(&state, p.epsilon, p.dt, p.steps, p.sample_every, &pairings)?;
    let mut header = vec!["t".to_string(), "zero_mode".into(), "l2_norm_sq".into()];
    header.extend(panel.iter().map(|f| format!("pair_{}", f.id())));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header);
    for s in &run.samples {
        let mut row = cells![s.t, s.zero_mode, s.l2_norm_sq].to_vec();
        row.extend(s.pairings.iter().map(|&v| v.into()));
        t.row(&row);
    }
    o.add(out.to_path_buf(), t.into_bytes());
    o.add(sibling(out, "ndjson"), ndjson(&run.samples)?);
    if p.dump_grid > 0 {
        let grid = FieldGrid::from_field(&run.final_state.field, p.dump_grid)?;
        let mut bytes = Vec::new();
        write_wnf1(&mut bytes, &grid)?;
        o.add(sibling(out, "final.wnf"), bytes);
    }
    Ok(Verdict::Done)
}
