//! Grid, boundary conditions and the explicit first-order update
//!
//! ```text
//! w_i^{n+1} = w_i^n - dt/dx (F_{i+1/2} - F_{i-1/2}) + dt/dx (S^+_{i-1/2} + S^-_{i+1/2})
//! ```
//!
//! for every combination of homogeneous flux and source treatment.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{omega_flux, roe_flux_with_fix, FluxKind, OmegaRule};
use crate::hydrostatic::{hr_interface_terms, GateOutcome, GatePolicy, HrTerms, HrVariant};
use crate::linalg::{add, scale, Vec2};
use crate::physics::{flux_unchecked, ExtState, PhysConstants, PhysState};
use crate::upwind::{
    omega_source_split, roe_source_split, roe_source_split_regularized, SonicMode,
    SonicRegularization, SourceSplit, UpwindForm,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 cells, got {n_cells}")));
        }
        if !(x_right > x_left) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::InvalidConfig(format!("empty domain [{x_left}, {x_right}]")));
        }
        Ok(Self {
            x_left,
            x_right,
            n_cells,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_cells as f64
    }

    /// Centre of cell `i` (zero based).
    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Index of the cell whose centre is closest to `x`, clamped to the grid.
    pub fn nearest_cell(&self, x: f64) -> usize {
        let k = ((x - self.x_left) / self.dx() - 0.5).round();
        k.clamp(0.0, (self.n_cells - 1) as f64) as usize
    }
}

/// Scheme labels of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    Roe,
    ForceHr,
    ForceWb,
    GforceHr,
    GforceWb,
    Hr,
    ModifiedHr,
    /// Subsonic-well-balanced reconstruction; listed but not implemented.
    Subsonic,
}

impl SchemeId {
    pub const ALL: [SchemeId; 8] = [
        SchemeId::Roe,
        SchemeId::ForceHr,
        SchemeId::ForceWb,
        SchemeId::GforceHr,
        SchemeId::GforceWb,
        SchemeId::Hr,
        SchemeId::ModifiedHr,
        SchemeId::Subsonic,
    ];

    pub fn implemented() -> impl Iterator<Item = SchemeId> {
        Self::ALL.into_iter().filter(|s| *s != SchemeId::Subsonic)
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Roe => "roe",
            SchemeId::ForceHr => "force-hr",
            SchemeId::ForceWb => "force-wb",
            SchemeId::GforceHr => "gforce-hr",
            SchemeId::GforceWb => "gforce-wb",
            SchemeId::Hr => "hr",
            SchemeId::ModifiedHr => "modified-hr",
            SchemeId::Subsonic => "subsonic",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SchemeId::Roe => "Roe flux with upwind (projected) source",
            SchemeId::ForceHr => "hydrostatic reconstruction with the FORCE flux",
            SchemeId::ForceWb => "well-balanced FORCE (omega = 1/2) with upwind source",
            SchemeId::GforceHr => "hydrostatic reconstruction with the GFORCE flux",
            SchemeId::GforceWb => "well-balanced GFORCE (omega = 1/(1+CFL)) with upwind source",
            SchemeId::Hr => "hydrostatic reconstruction with the Roe flux",
            SchemeId::ModifiedHr => "modified hydrostatic reconstruction with the Roe flux",
            SchemeId::Subsonic => "subsonic-well-balanced reconstruction (not implemented)",
        }
    }

    pub fn is_implemented(self) -> bool {
        self != SchemeId::Subsonic
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

/// Source treatment and homogeneous flux behind a scheme label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Treatment {
    Roe,
    OmegaWb(OmegaRule),
    Hydrostatic { flux: FluxKind, variant: HrVariant },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: SchemeId,
    pub cfl: f64,
    pub sonic: SonicRegularization,
    pub gate: GatePolicy,
    /// Replaces the homogeneous flux of the reconstruction schemes.
    pub hr_flux: Option<FluxKind>,
    /// Harten entropy fix parameter for the Roe flux, off by default.
    pub roe_fix: Option<f64>,
    /// Placement of 1/2 in the centred-family source; `None` means decided
    /// by the water-at-rest self-test when the solver is built.
    pub upwind_form: Option<UpwindForm>,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeId) -> Self {
        Self {
            scheme,
            cfl: 0.9,
            sonic: SonicRegularization::default(),
            gate: GatePolicy::Dimensional,
            hr_flux: None,
            roe_fix: None,
            upwind_form: None,
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_hr_flux(mut self, flux: FluxKind) -> Self {
        self.hr_flux = Some(flux);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidConfig(format!("CFL must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.sonic.eps > 0.0) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.sonic.eps)));
        }
        if self.hr_flux.is_some()
            && !matches!(
                self.scheme,
                SchemeId::Hr | SchemeId::ModifiedHr | SchemeId::ForceHr | SchemeId::GforceHr
            )
        {
            return Err(Error::InvalidConfig(format!(
                "a homogeneous flux override only applies to reconstruction schemes, not `{}`",
                self.scheme
            )));
        }
        Ok(())
    }

    pub fn treatment(&self) -> Result<Treatment> {
        let hr = |flux: FluxKind, variant| Treatment::Hydrostatic {
            flux: self.hr_flux.unwrap_or(flux),
            variant,
        };
        Ok(match self.scheme {
            SchemeId::Roe => Treatment::Roe,
            SchemeId::ForceWb => Treatment::OmegaWb(OmegaRule::Force),
            SchemeId::GforceWb => Treatment::OmegaWb(OmegaRule::Gforce),
            SchemeId::ForceHr => hr(FluxKind::Omega(OmegaRule::Force), HrVariant::Original),
            SchemeId::GforceHr => hr(FluxKind::Omega(OmegaRule::Gforce), HrVariant::Original),
            SchemeId::Hr => hr(FluxKind::Roe, HrVariant::Original),
            SchemeId::ModifiedHr => hr(FluxKind::Roe, HrVariant::Modified),
            SchemeId::Subsonic => {
                return Err(Error::NotImplemented(
                    "scheme `subsonic` (subsonic-well-balanced reconstruction, Bouchut et al., \
                     SIAM J. Numer. Anal. 48, 2010) is not implemented"
                        .into(),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    ImposedDischarge(f64),
    ImposedDepth(f64),
    ImposedBoth { h: f64, q: f64 },
    Open,
    /// Wraps around to the opposite end; used for conservation checks.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl Boundaries {
    pub const PERIODIC: Boundaries = Boundaries {
        left: BoundaryCondition::Periodic,
        right: BoundaryCondition::Periodic,
    };
    pub const OPEN: Boundaries = Boundaries {
        left: BoundaryCondition::Open,
        right: BoundaryCondition::Open,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    FinalTime(f64),
    /// Stop once the residual drops by `tol` relative to the first step,
    /// or at `max_time`.
    Steady { tol: f64, max_time: f64 },
}

impl StopRule {
    pub fn steady(max_time: f64) -> Self {
        StopRule::Steady {
            tol: 1e-8,
            max_time,
        }
    }

    fn horizon(&self) -> f64 {
        match *self {
            StopRule::FinalTime(t) => t,
            StopRule::Steady { max_time, .. } => max_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub name: String,
    pub x: f64,
}

pub type Sampler<T> = Arc<dyn Fn(f64) -> T + Send + Sync>;

/// Complete description of one run.
#[derive(Clone)]
pub struct SimSpec {
    pub grid: Grid,
    /// Bottom depth, sampled at cell centres.
    pub bathymetry: Sampler<f64>,
    pub initial: Sampler<PhysState>,
    pub boundaries: Boundaries,
    pub stop: StopRule,
    /// Extra snapshot times; the final state is always recorded.
    pub output_times: Vec<f64>,
    pub probes: Vec<Probe>,
    pub max_steps: usize,
}

impl fmt::Debug for SimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimSpec")
            .field("grid", &self.grid)
            .field("boundaries", &self.boundaries)
            .field("stop", &self.stop)
            .field("output_times", &self.output_times)
            .field("probes", &self.probes)
            .finish_non_exhaustive()
    }
}

impl SimSpec {
    pub fn new(grid: Grid, bathymetry: Sampler<f64>, initial: Sampler<PhysState>, boundaries: Boundaries, stop: StopRule) -> Self {
        Self {
            grid,
            bathymetry,
            initial,
            boundaries,
            stop,
            output_times: Vec::new(),
            probes: Vec::new(),
            max_steps: 20_000_000,
        }
    }

    pub fn initial_state(&self, c: &PhysConstants) -> Result<SimState> {
        let xs = self.grid.centers();
        let depth: Vec<f64> = xs.iter().map(|&x| (self.bathymetry)(x)).collect();
        let mut cells = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let mut w = (self.initial)(x);
            if !(w.h.is_finite() && w.q.is_finite() && depth[i].is_finite()) {
                return Err(Error::NonFinite { cell: i, time: 0.0 });
            }
            if w.h < 0.0 {
                return Err(Error::NegativeDepth(w.h));
            }
            if w.h <= c.h_dry {
                w.q = 0.0;
            }
            cells.push(w);
        }
        Ok(SimState {
            time: 0.0,
            cells,
            depth,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub cells: Vec<PhysState>,
    /// Bottom depth per cell, fixed after setup.
    pub depth: Vec<f64>,
}

impl SimState {
    pub fn ext(&self, i: usize) -> ExtState {
        ExtState {
            state: self.cells[i],
            depth: self.depth[i],
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn depths(&self) -> Vec<f64> {
        self.cells.iter().map(|w| w.h).collect()
    }

    pub fn total_mass(&self, dx: f64) -> f64 {
        self.cells.iter().map(|w| w.h).sum::<f64>() * dx
    }
}

/// `CFL dx / max(|u| + sqrt(g h))` over the wet cells.
pub fn cfl_dt(state: &SimState, cfg: &SchemeConfig, grid: &Grid, c: &PhysConstants) -> Result<f64> {
    let speed = max_speed(state.cells.iter(), c).ok_or(Error::AllDry)?;
    Ok(cfg.cfl * grid.dx() / speed)
}

fn max_speed<'a>(cells: impl Iterator<Item = &'a PhysState>, c: &PhysConstants) -> Option<f64> {
    let mut best: Option<f64> = None;
    for w in cells.filter(|w| w.is_wet(c)) {
        let s = (w.q / w.h).abs() + (c.g * w.h).sqrt();
        best = Some(best.map_or(s, |b: f64| b.max(s)));
    }
    best.filter(|s| *s > 0.0)
}

fn ghost(bc: BoundaryCondition, interior: ExtState, opposite: ExtState) -> ExtState {
    let mut g = interior;
    match bc {
        BoundaryCondition::Open => {}
        BoundaryCondition::ImposedDischarge(q) => g.state.q = q,
        BoundaryCondition::ImposedDepth(h) => g.state.h = h,
        BoundaryCondition::ImposedBoth { h, q } => g.state = PhysState::new(h, q),
        BoundaryCondition::Periodic => g = opposite,
    }
    g
}

/// Ghost states to the left and right of the grid.
pub fn apply_boundaries(state: &SimState, bc: &Boundaries) -> (ExtState, ExtState) {
    let n = state.len();
    let first = state.ext(0);
    let last = state.ext(n - 1);
    (ghost(bc.left, first, last), ghost(bc.right, last, first))
}

/// Flux and source split of one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceTerms {
    pub flux: Vec2,
    pub split: SourceSplit,
    /// Reconstruction details for the hydrostatic family.
    pub hr: Option<HrTerms>,
    /// The Roe projection hit a sonic point and was regularised.
    pub sonic: bool,
}

fn dry_terms(w_l: ExtState, w_r: ExtState, c: &PhysConstants) -> InterfaceTerms {
    InterfaceTerms {
        flux: scale(0.5, add(flux_unchecked(w_l.state, c), flux_unchecked(w_r.state, c))),
        split: SourceSplit::ZERO,
        hr: None,
        sonic: false,
    }
}

/// Everything needed to advance states of one configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    pub grid: Grid,
    pub boundaries: Boundaries,
    pub cfg: SchemeConfig,
    pub constants: PhysConstants,
    treatment: Treatment,
    upwind_form: UpwindForm,
}

/// Result of one explicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SimState,
    /// Cells whose depth went negative and was reset to zero.
    pub clip_events: usize,
    /// Negative depths below `-h_dry`.
    pub severe_clips: usize,
    /// Smallest depth before clipping.
    pub min_raw_depth: f64,
    pub sonic_interfaces: usize,
    pub large_steps: usize,
    pub gate_failures: usize,
}

impl Solver {
    pub fn new(grid: Grid, boundaries: Boundaries, cfg: SchemeConfig, constants: PhysConstants) -> Result<Self> {
        cfg.validate()?;
        let treatment = cfg.treatment()?;
        let upwind_form = match cfg.upwind_form {
            Some(f) => f,
            None => select_upwind_form(&cfg, &constants)?,
        };
        Ok(Self {
            grid,
            boundaries,
            cfg,
            constants,
            treatment,
            upwind_form,
        })
    }

    pub fn treatment(&self) -> Treatment {
        self.treatment
    }

    pub fn upwind_form(&self) -> UpwindForm {
        self.upwind_form
    }

    /// Time step from the CFL condition, including the ghost states.
    pub fn dt(&self, state: &SimState) -> Result<f64> {
        let (gl, gr) = apply_boundaries(state, &self.boundaries);
        let ghosts = [gl.state, gr.state];
        let speed = max_speed(state.cells.iter().chain(ghosts.iter()), &self.constants).ok_or(Error::AllDry)?;
        Ok(self.cfg.cfl * self.grid.dx() / speed)
    }

    pub fn interface_terms(&self, w_l: ExtState, w_r: ExtState, dt: f64) -> Result<InterfaceTerms> {
        let c = &self.constants;
        let dx = self.grid.dx();
        match self.treatment {
            Treatment::Hydrostatic { flux, variant } => {
                let t = hr_interface_terms(w_l, w_r, flux, variant, self.cfg.gate, dx, dt, self.cfg.cfl, c)?;
                Ok(InterfaceTerms {
                    flux: t.flux,
                    split: t.split,
                    hr: Some(t),
                    sonic: false,
                })
            }
            _ if !w_l.state.is_wet(c) && !w_r.state.is_wet(c) => Ok(dry_terms(w_l, w_r, c)),
            Treatment::Roe => {
                let flux = roe_flux_with_fix(w_l.state, w_r.state, self.cfg.roe_fix, c)?;
                let (split, sonic) = match roe_source_split(w_l, w_r, c) {
                    Ok(s) => (s, false),
                    Err(Error::SonicInterface { .. }) => (roe_source_split_regularized(w_l, w_r, c)?, true),
                    Err(e) => return Err(e),
                };
                Ok(InterfaceTerms {
                    flux,
                    split,
                    hr: None,
                    sonic,
                })
            }
            Treatment::OmegaWb(rule) => {
                let omega = rule.omega(self.cfg.cfl);
                let flux = omega_flux(w_l.state, w_r.state, omega, dx, dt, c)?;
                let split = omega_source_split(w_l, w_r, omega, dx, dt, self.cfg.sonic, self.upwind_form, c)?;
                Ok(InterfaceTerms {
                    flux,
                    split,
                    hr: None,
                    sonic: false,
                })
            }
        }
    }

    /// All interface terms of `state`; entry `k` sits between cells `k-1` and `k`,
    /// with the ghosts at positions `-1` and `n`.
    pub fn all_interface_terms(&self, state: &SimState, dt: f64) -> Result<Vec<InterfaceTerms>> {
        let n = state.len();
        let (gl, gr) = apply_boundaries(state, &self.boundaries);
        let ext = |k: isize| -> ExtState {
            if k < 0 {
                gl
            } else if k as usize >= n {
                gr
            } else {
                state.ext(k as usize)
            }
        };
        (0..=n as isize).map(|k| self.interface_terms(ext(k - 1), ext(k), dt)).collect()
    }

    /// Assembles the update from precomputed interface terms.
    pub fn assemble(&self, state: &SimState, terms: &[InterfaceTerms], dt: f64) -> Result<StepOutcome> {
        let n = state.len();
        if terms.len() != n + 1 {
            return Err(Error::LengthMismatch(terms.len(), n + 1));
        }
        let c = &self.constants;
        let lambda = dt / self.grid.dx();
        let mut cells = Vec::with_capacity(n);
        let mut clip_events = 0;
        let mut severe_clips = 0;
        let mut min_raw_depth = f64::INFINITY;
        let time = state.time + dt;
        for i in 0..n {
            let (left, right) = (&terms[i], &terms[i + 1]);
            let w = state.cells[i];
            let h = w.h - lambda * (right.flux[0] - left.flux[0]) + lambda * (left.split.plus[0] + right.split.minus[0]);
            let q = w.q - lambda * (right.flux[1] - left.flux[1]) + lambda * (left.split.plus[1] + right.split.minus[1]);
            if !(h.is_finite() && q.is_finite()) {
                return Err(Error::NonFinite { cell: i, time });
            }
            min_raw_depth = min_raw_depth.min(h);
            let mut next = PhysState::new(h, q);
            if h < 0.0 {
                clip_events += 1;
                if h < -c.h_dry {
                    severe_clips += 1;
                }
                next = PhysState::DRY;
            } else if h <= c.h_dry {
                next.q = 0.0;
            }
            cells.push(next);
        }
        let mut sonic_interfaces = 0;
        let mut large_steps = 0;
        let mut gate_failures = 0;
        for t in terms {
            sonic_interfaces += t.sonic as usize;
            if let Some(hr) = &t.hr {
                large_steps += hr.iface.large_step as usize;
                gate_failures += (hr.corrections.outcome == GateOutcome::EmergingFailed) as usize;
            }
        }
        Ok(StepOutcome {
            state: SimState {
                time,
                cells,
                depth: state.depth.clone(),
            },
            clip_events,
            severe_clips,
            min_raw_depth,
            sonic_interfaces,
            large_steps,
            gate_failures,
        })
    }

    pub fn step(&self, state: &SimState, dt: f64) -> Result<StepOutcome> {
        let terms = self.all_interface_terms(state, dt)?;
        self.assemble(state, &terms, dt)
    }
}

/// Decides the placement of 1/2 in the centred-family source by checking
/// which form keeps water at rest over a step exactly. The literal form is
/// tried first.
pub fn select_upwind_form(cfg: &SchemeConfig, c: &PhysConstants) -> Result<UpwindForm> {
    if !matches!(cfg.treatment()?, Treatment::OmegaWb(_)) {
        return Ok(UpwindForm::Halved);
    }
    for form in [UpwindForm::AsPrinted, UpwindForm::Halved] {
        if rest_residual(cfg, form, c)? <= 1e-12 {
            return Ok(form);
        }
    }
    Err(Error::InvalidConfig(format!(
        "no source form of `{}` preserves water at rest",
        cfg.scheme
    )))
}

fn rest_residual(cfg: &SchemeConfig, form: UpwindForm, c: &PhysConstants) -> Result<f64> {
    let grid = Grid::new(0.0, 1.0, 8)?;
    let depth: Vec<f64> = (0..8).map(|i| [0.5, 0.5, 0.3, 0.35, 0.6, 0.2, 0.25, 0.25][i]).collect();
    let cells = depth.iter().map(|d| PhysState::new(0.8 + d, 0.0)).collect();
    let state = SimState {
        time: 0.0,
        cells,
        depth,
    };
    let mut probe_cfg = *cfg;
    probe_cfg.upwind_form = Some(form);
    // the default sonic mode reduces to J^{-1} at rest, unlike the literal one
    if probe_cfg.sonic.mode == SonicMode::MuInverse {
        probe_cfg.sonic.mode = SonicMode::MuScaled;
    }
    let solver = Solver::new(grid, Boundaries::OPEN, probe_cfg, *c)?;
    let dt = solver.dt(&state)?;
    let next = solver.step(&state, dt)?.state;
    Ok(max_update(&state, &next))
}

/// `max_i |dh_i| + |dq_i|` between two states.
pub fn max_update(a: &SimState, b: &SimState) -> f64 {
    a.cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| (x.h - y.h).abs() + (x.q - y.q).abs())
        .fold(0.0, f64::max)
}

/// `dx * sum(|dh| + |dq|) / dt`.
pub fn residual(a: &SimState, b: &SimState, dx: f64, dt: f64) -> f64 {
    let s: f64 = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| (x.h - y.h).abs() + (x.q - y.q).abs())
        .sum();
    s * dx / dt
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub cells: Vec<PhysState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeValue {
    pub name: String,
    pub x: f64,
    pub cell: usize,
    pub h: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub scheme: SchemeId,
    pub n_cells: usize,
    pub cfl: f64,
    pub eps: f64,
    pub sonic_mode: SonicMode,
    pub gate: GatePolicy,
    pub homogeneous_flux: Option<&'static str>,
    pub upwind_form: UpwindForm,
}

/// Outcome of a full run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub meta: RunMeta,
    pub x: Vec<f64>,
    pub depth: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// `(t, residual)` after every step.
    pub residuals: Vec<(f64, f64)>,
    pub probes: Vec<ProbeValue>,
    pub steps: usize,
    pub final_time: f64,
    /// `Some` for steady-state stop rules.
    pub met_steady: Option<bool>,
    pub clip_events: usize,
    pub severe_clips: usize,
    pub min_raw_depth: f64,
    pub sonic_interfaces: usize,
    pub gate_failures: usize,
}

impl RunReport {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("runs always record the final state")
    }

    pub fn final_state(&self) -> SimState {
        SimState {
            time: self.final_time,
            cells: self.final_snapshot().cells.clone(),
            depth: self.depth.clone(),
        }
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().map(|r| r.1)
    }

    pub fn probe(&self, name: &str) -> Option<&ProbeValue> {
        self.probes.iter().find(|p| p.name == name)
    }
}

/// Hook called after every step with the states before and after.
pub trait StepObserver {
    fn observe(&mut self, solver: &Solver, before: &SimState, after: &StepOutcome, dt: f64) -> Result<()>;
}

impl StepObserver for () {
    fn observe(&mut self, _: &Solver, _: &SimState, _: &StepOutcome, _: f64) -> Result<()> {
        Ok(())
    }
}

pub fn run(spec: &SimSpec, cfg: &SchemeConfig, c: &PhysConstants) -> Result<RunReport> {
    run_observed(spec, cfg, c, &mut ())
}

pub fn run_observed(
    spec: &SimSpec,
    cfg: &SchemeConfig,
    c: &PhysConstants,
    observer: &mut dyn StepObserver,
) -> Result<RunReport> {
    let solver = Solver::new(spec.grid, spec.boundaries, *cfg, *c)?;
    let mut state = spec.initial_state(c)?;
    let horizon = spec.stop.horizon();
    if !(horizon >= 0.0) {
        return Err(Error::InvalidConfig(format!("stop time must be nonnegative, got {horizon}")));
    }
    let mut pending: Vec<f64> = spec.output_times.iter().copied().filter(|t| *t > 0.0 && *t < horizon).collect();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let mut pending = pending.into_iter().peekable();

    let mut snapshots = Vec::new();
    if spec.output_times.contains(&0.0) {
        snapshots.push(Snapshot {
            time: 0.0,
            cells: state.cells.clone(),
        });
    }
    let mut residuals = Vec::new();
    let mut steps = 0usize;
    let mut first_residual: Option<f64> = None;
    let mut met_steady = matches!(spec.stop, StopRule::Steady { .. }).then_some(false);
    let (mut clip_events, mut severe_clips, mut sonic_interfaces, mut gate_failures) = (0, 0, 0, 0);
    let mut min_raw_depth = state.cells.iter().map(|w| w.h).fold(f64::INFINITY, f64::min);
    let dx = spec.grid.dx();

    while state.time < horizon {
        if steps >= spec.max_steps {
            return Err(Error::MaxSteps(spec.max_steps));
        }
        let mut dt = solver.dt(&state)?;
        let target = pending.peek().copied().unwrap_or(horizon);
        let mut hit_target = false;
        if state.time + dt >= target {
            dt = target - state.time;
            hit_target = true;
        }
        if !(dt > 0.0) {
            break;
        }
        let out = solver.step(&state, dt)?;
        observer.observe(&solver, &state, &out, dt)?;
        let r = residual(&state, &out.state, dx, dt);
        clip_events += out.clip_events;
        severe_clips += out.severe_clips;
        sonic_interfaces += out.sonic_interfaces;
        gate_failures += out.gate_failures;
        min_raw_depth = min_raw_depth.min(out.min_raw_depth);
        state = out.state;
        if hit_target {
            // land exactly on the requested time
            state.time = target;
        }
        steps += 1;
        residuals.push((state.time, r));
        if hit_target && pending.peek().is_some() && target < horizon {
            pending.next();
            snapshots.push(Snapshot {
                time: state.time,
                cells: state.cells.clone(),
            });
        }
        if let StopRule::Steady { tol, .. } = spec.stop {
            let r0 = *first_residual.get_or_insert(r);
            if r <= tol * (r0 + 1e-30) {
                met_steady = Some(true);
                break;
            }
        }
    }

    snapshots.push(Snapshot {
        time: state.time,
        cells: state.cells.clone(),
    });
    let probes = spec
        .probes
        .iter()
        .map(|p| {
            let cell = spec.grid.nearest_cell(p.x);
            ProbeValue {
                name: p.name.clone(),
                x: spec.grid.center(cell),
                cell,
                h: state.cells[cell].h,
                q: state.cells[cell].q,
            }
        })
        .collect();
    Ok(RunReport {
        meta: RunMeta {
            scheme: cfg.scheme,
            n_cells: spec.grid.n_cells,
            cfl: cfg.cfl,
            eps: cfg.sonic.eps,
            sonic_mode: cfg.sonic.mode,
            gate: cfg.gate,
            homogeneous_flux: match solver.treatment {
                Treatment::Hydrostatic { flux, .. } => Some(flux.name()),
                Treatment::Roe => Some("roe"),
                Treatment::OmegaWb(r) => Some(r.name()),
            },
            upwind_form: solver.upwind_form,
        },
        x: spec.grid.centers(),
        depth: state.depth.clone(),
        snapshots,
        residuals,
        probes,
        steps,
        final_time: state.time,
        met_steady,
        clip_events,
        severe_clips,
        min_raw_depth,
        sonic_interfaces,
        gate_failures,
    })
}
