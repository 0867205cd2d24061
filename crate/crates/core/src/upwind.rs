//! Upwind splittings of the bottom source term between the two cells of an
//! interface: Roe projections and the well-balanced centred family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{roe_average, RoeData};
use crate::linalg::{add, scale, sub, Mat2, Vec2};
use crate::physics::{ExtState, PhysConstants};

/// Source contributions of one interface: `minus` goes to the left cell,
/// `plus` to the right cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceSplit {
    pub minus: Vec2,
    pub plus: Vec2,
}

impl SourceSplit {
    pub const ZERO: SourceSplit = SourceSplit {
        minus: [0.0, 0.0],
        plus: [0.0, 0.0],
    };

    pub fn sum(&self) -> Vec2 {
        add(self.minus, self.plus)
    }
}

/// Replacement for `J^{-1}` near sonic points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SonicMode {
    /// The regularised inverse exactly as printed in the source method:
    /// `(1/mu) [[0, 1], [c^2, 2u]]`. Not C-property preserving.
    MuInverse,
    /// `J^{-1}` with the factor `1 - Fr^2` of its determinant replaced by `mu`;
    /// equals `J^{-1}` whenever `|1 - Fr^2| >= eps`.
    MuScaled,
    /// Inverse of `[[0, 1], [c^2, 0]]`.
    StarInverse,
}

impl std::str::FromStr for SonicMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu-inverse" | "mu-as-printed" => Ok(SonicMode::MuInverse),
            "mu-scaled" | "mu" => Ok(SonicMode::MuScaled),
            "star" | "star-inverse" => Ok(SonicMode::StarInverse),
            other => Err(Error::InvalidConfig(format!("unknown sonic regularization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SonicRegularization {
    pub mode: SonicMode,
    pub eps: f64,
}

impl Default for SonicRegularization {
    fn default() -> Self {
        Self {
            mode: SonicMode::MuScaled,
            eps: 1e-6,
        }
    }
}

impl SonicRegularization {
    /// `mu = max(eps, |1 - Fr^2|) sgn(1 - Fr^2)`, with `sgn(0) = 1`.
    pub fn mu(&self, roe: &RoeData) -> f64 {
        let d = 1.0 - roe.froude_squared();
        let s = if d < 0.0 { -1.0 } else { 1.0 };
        self.eps.max(d.abs()) * s
    }

    /// Regularised replacement for `J^{-1}`.
    pub fn inverse(&self, roe: &RoeData) -> Mat2 {
        let (u, c2) = (roe.u_roe, roe.c_roe * roe.c_roe);
        match self.mode {
            SonicMode::MuInverse => Mat2([[0.0, 1.0], [c2, 2.0 * u]]).scale(1.0 / self.mu(roe)),
            SonicMode::MuScaled => {
                Mat2([[-2.0 * u, 1.0], [c2 - u * u, 0.0]]).scale(1.0 / (self.mu(roe) * c2))
            }
            SonicMode::StarInverse => Mat2([[0.0, 1.0 / c2], [1.0, 0.0]]),
        }
    }
}

/// Placement of the factor 1/2 in the centred-family source splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpwindForm {
    /// `S^± = (S dH)/2 ± M S dH`
    AsPrinted,
    /// `S^± = (S dH)/2 ± (M S dH)/2`, mirroring the 1/2 of the flux viscosity.
    Halved,
}

/// Sonic detection threshold for the Roe projections.
pub fn lambda_floor(roe: &RoeData) -> f64 {
    1e-8 * (roe.u_roe.abs() + roe.c_roe).max(1.0)
}

fn roe_source_vector(roe: &RoeData, w_l: &ExtState, w_r: &ExtState) -> Vec2 {
    [0.0, roe.c_roe * roe.c_roe * (w_r.depth - w_l.depth)]
}

/// Roe splitting `S^± = P^± S dH`, `P^± = (Id ± |J| J^{-1})/2`.
pub fn roe_source_split(w_l: ExtState, w_r: ExtState, c: &PhysConstants) -> Result<SourceSplit> {
    let roe = roe_average(w_l.state, w_r.state, c)?;
    let floor = lambda_floor(&roe);
    let smallest = roe.lambda[0].abs().min(roe.lambda[1].abs());
    if smallest < floor {
        return Err(Error::SonicInterface {
            lambda: smallest,
            floor,
        });
    }
    Ok(project(&roe, &w_l, &w_r, floor))
}

/// Roe splitting that assigns half of the component along a sonic
/// eigenvector to each side instead of failing.
pub fn roe_source_split_regularized(
    w_l: ExtState,
    w_r: ExtState,
    c: &PhysConstants,
) -> Result<SourceSplit> {
    let roe = roe_average(w_l.state, w_r.state, c)?;
    let floor = lambda_floor(&roe);
    Ok(project(&roe, &w_l, &w_r, floor))
}

fn project(roe: &RoeData, w_l: &ExtState, w_r: &ExtState, floor: f64) -> SourceSplit {
    if w_l.depth == w_r.depth {
        return SourceSplit::ZERO;
    }
    let s = roe_source_vector(roe, w_l, w_r);
    let coeffs = roe.eigvecs_inv.apply(s);
    let mut minus = [0.0; 2];
    let mut plus = [0.0; 2];
    for k in 0..2 {
        let lam = roe.lambda[k];
        let part = scale(coeffs[k], [1.0, lam]);
        let w_plus = if lam.abs() < floor {
            0.5
        } else if lam > 0.0 {
            1.0
        } else {
            0.0
        };
        plus = add(plus, scale(w_plus, part));
        minus = add(minus, scale(1.0 - w_plus, part));
    }
    SourceSplit { minus, plus }
}

/// Splitting of the well-balanced centred family with weight `omega`.
#[allow(clippy::too_many_arguments)]
pub fn omega_source_split(
    w_l: ExtState,
    w_r: ExtState,
    omega: f64,
    dx: f64,
    dt: f64,
    reg: SonicRegularization,
    form: UpwindForm,
    c: &PhysConstants,
) -> Result<SourceSplit> {
    if !(dx > 0.0 && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dx = {dx} and dt = {dt} must be positive")));
    }
    let roe = roe_average(w_l.state, w_r.state, c)?;
    if w_l.depth == w_r.depth {
        return Ok(SourceSplit::ZERO);
    }
    let s = roe_source_vector(&roe, &w_l, &w_r);
    let m = reg.inverse(&roe).scale((1.0 - omega) * dx / dt) + roe.jacobian.scale(omega * dt / dx);
    let centred = scale(0.5, s);
    let upwind = match form {
        UpwindForm::AsPrinted => m.apply(s),
        UpwindForm::Halved => scale(0.5, m.apply(s)),
    };
    Ok(SourceSplit {
        minus: sub(centred, upwind),
        plus: add(centred, upwind),
    })
}

/// Integral of the source along the straight segment joining the two states.
pub fn path_source_trapezoid(w_l: ExtState, w_r: ExtState, c: &PhysConstants) -> Vec2 {
    [0.0, 0.5 * c.g * (w_l.h() + w_r.h()) * (w_r.depth - w_l.depth)]
}
