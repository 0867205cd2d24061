//! Hydrostatic reconstruction of interface states, and the modified variant
//! that accounts for the full height of large bottom steps.
//!
//! Sign conventions. Sources are the `S^-`/`S^+` of the generic update
//! `w_i += dt/dx (S^+_{i-1/2} + S^-_{i+1/2})`. The corrections `T^-`, `T^+`
//! are expressed in the interface-flux form used by the entropy analysis,
//! where the left cell sees `F + (0, p(h_l) - p(h^-) + T^-)` and the right
//! cell `F + (0, p(h_r) - p(h^+) + T^+)`. Hence
//!
//! ```text
//! S^- = (0, p(h^-) - p(h_l) - T^-)      S^+ = (0, p(h_r) - p(h^+) + T^+)
//! ```
//!
//! and with corrections active both sources become straight-segment
//! integrals of `g h dH` across the whole step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{numerical_flux, FluxKind};
use crate::linalg::{add, scale, Vec2};
use crate::physics::{flux_unchecked, ExtState, PhysConstants, PhysState};
use crate::upwind::SourceSplit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HrVariant {
    Original,
    Modified,
}

/// Right-hand side used by the emerging-bottom energy gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GatePolicy {
    /// `(3/2) (g |q|)^(2/3)`: `g` times the critical specific energy.
    #[default]
    Dimensional,
    /// `(3/2) sqrt((g h |u|)^3)` taken literally.
    AsPrinted,
}

impl std::str::FromStr for GatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimensional" => Ok(GatePolicy::Dimensional),
            "as-printed" => Ok(GatePolicy::AsPrinted),
            other => Err(Error::InvalidConfig(format!("unknown gate policy `{other}`"))),
        }
    }
}

/// Reconstructed interface data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrInterface {
    /// `min(H_l, H_r)`
    pub depth_star: f64,
    pub w_minus: PhysState,
    pub w_plus: PhysState,
    /// Donor-cell velocities carried by the reconstructed states.
    pub u_minus: f64,
    pub u_plus: f64,
    /// One free surface lies below the other cell's bottom.
    pub large_step: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateOutcome {
    /// No large step, corrections vanish.
    NotLargeStep,
    /// Large step between two wet cells, corrections always applied.
    WetLargeStep,
    /// Emerging bottom with enough energy to climb the step.
    EmergingPassed,
    /// Emerging bottom without enough energy; original reconstruction kept.
    EmergingFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrCorrections {
    pub t_minus: f64,
    pub t_plus: f64,
    pub outcome: GateOutcome,
}

impl HrCorrections {
    pub const NONE: HrCorrections = HrCorrections {
        t_minus: 0.0,
        t_plus: 0.0,
        outcome: GateOutcome::NotLargeStep,
    };

    pub fn gate_applied(&self) -> bool {
        matches!(self.outcome, GateOutcome::EmergingPassed | GateOutcome::EmergingFailed)
    }
}

pub fn hr_reconstruct(w_l: ExtState, w_r: ExtState, c: &PhysConstants) -> HrInterface {
    let depth_star = w_l.depth.min(w_r.depth);
    let raw_minus = w_l.h() - w_l.depth + depth_star;
    let raw_plus = w_r.h() - w_r.depth + depth_star;
    let h_minus = raw_minus.max(0.0);
    let h_plus = raw_plus.max(0.0);
    let u_minus = w_l.state.velocity(c);
    let u_plus = w_r.state.velocity(c);
    HrInterface {
        depth_star,
        w_minus: PhysState::new(h_minus, h_minus * u_minus),
        w_plus: PhysState::new(h_plus, h_plus * u_plus),
        u_minus,
        u_plus,
        large_step: raw_minus < 0.0 || raw_plus < 0.0,
    }
}

/// Pressure-difference sources of the original reconstruction.
pub fn hr_source(w_l: ExtState, w_r: ExtState, iface: &HrInterface, c: &PhysConstants) -> SourceSplit {
    SourceSplit {
        minus: [0.0, c.pressure(iface.w_minus.h) - c.pressure(w_l.h())],
        plus: [0.0, c.pressure(w_r.h()) - c.pressure(iface.w_plus.h)],
    }
}

fn gate_passes(w: ExtState, depth_other: f64, policy: GatePolicy, c: &PhysConstants) -> bool {
    let (h, u) = (w.h(), w.state.velocity(c));
    let lhs = 0.5 * u * u + c.g * (h - w.depth + depth_other);
    let flow = c.g * h * u.abs();
    let rhs = match policy {
        GatePolicy::Dimensional => 1.5 * (flow * flow).cbrt(),
        GatePolicy::AsPrinted => 1.5 * (flow * flow * flow).sqrt(),
    };
    lhs > rhs
}

/// Large-step corrections of the modified reconstruction.
pub fn modified_hr_corrections(
    w_l: ExtState,
    w_r: ExtState,
    iface: &HrInterface,
    gate: GatePolicy,
    c: &PhysConstants,
) -> HrCorrections {
    if !iface.large_step {
        return HrCorrections::NONE;
    }
    let emerging_right = w_r.h() <= c.h_dry && w_l.h() - w_l.depth + w_r.depth < 0.0;
    let emerging_left = w_l.h() <= c.h_dry && w_r.h() - w_r.depth + w_l.depth < 0.0;
    let outcome = if emerging_right {
        if w_l.state.velocity(c) > 0.0 && gate_passes(w_l, w_r.depth, gate, c) {
            GateOutcome::EmergingPassed
        } else {
            GateOutcome::EmergingFailed
        }
    } else if emerging_left {
        if w_r.state.velocity(c) < 0.0 && gate_passes(w_r, w_l.depth, gate, c) {
            GateOutcome::EmergingPassed
        } else {
            GateOutcome::EmergingFailed
        }
    } else {
        GateOutcome::WetLargeStep
    };
    if outcome == GateOutcome::EmergingFailed {
        return HrCorrections {
            t_minus: 0.0,
            t_plus: 0.0,
            outcome,
        };
    }
    let p = |h: f64| c.pressure(h);
    let (hl, hr) = (w_l.h(), w_r.h());
    let (hm, hp) = (iface.w_minus.h, iface.w_plus.h);
    let t_minus = p(hm) - p(hl) + 0.5 * c.g * (hl + hm) * (w_l.depth - iface.depth_star);
    let t_plus = p(hp) - p(hr) + 0.5 * c.g * (hr + hp) * (w_r.depth - iface.depth_star);
    HrCorrections {
        t_minus,
        t_plus,
        outcome,
    }
}

/// Everything one interface contributes to the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrTerms {
    pub flux: Vec2,
    pub split: SourceSplit,
    pub iface: HrInterface,
    pub corrections: HrCorrections,
}

/// Homogeneous flux between reconstructed states, with zero mass flux when
/// both reconstructed states are dry.
pub fn reconstructed_flux(
    iface: &HrInterface,
    flux: FluxKind,
    dx: f64,
    dt: f64,
    cfl: f64,
    c: &PhysConstants,
) -> Result<Vec2> {
    let (wm, wp) = (iface.w_minus, iface.w_plus);
    if !wm.is_wet(c) && !wp.is_wet(c) {
        return Ok(scale(0.5, add(flux_unchecked(wm, c), flux_unchecked(wp, c))));
    }
    numerical_flux(flux, wm, wp, dx, dt, cfl, c)
}

#[allow(clippy::too_many_arguments)]
pub fn hr_interface_terms(
    w_l: ExtState,
    w_r: ExtState,
    flux: FluxKind,
    variant: HrVariant,
    gate: GatePolicy,
    dx: f64,
    dt: f64,
    cfl: f64,
    c: &PhysConstants,
) -> Result<HrTerms> {
    let iface = hr_reconstruct(w_l, w_r, c);
    let f = reconstructed_flux(&iface, flux, dx, dt, cfl, c)?;
    let mut split = hr_source(w_l, w_r, &iface, c);
    let corrections = match variant {
        HrVariant::Original => HrCorrections::NONE,
        HrVariant::Modified => modified_hr_corrections(w_l, w_r, &iface, gate, c),
    };
    if corrections.t_minus != 0.0 || corrections.t_plus != 0.0 {
        split.minus[1] -= corrections.t_minus;
        split.plus[1] += corrections.t_plus;
    }
    Ok(HrTerms {
        flux: f,
        split,
        iface,
        corrections,
    })
}
