//! Numerical fluxes for the homogeneous system: Roe and the centred
//! FORCE/GFORCE family parametrised by a blending weight `omega`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, scale, sub, Mat2, Vec2};
use crate::physics::{flux_unchecked, PhysConstants, PhysState};

/// Roe linearisation at one interface together with its eigen-decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeData {
    pub u_roe: f64,
    pub c_roe: f64,
    pub jacobian: Mat2,
    pub abs_jacobian: Mat2,
    /// Columns are the eigenvectors `(1, lambda_k)`.
    pub eigvecs: Mat2,
    pub eigvecs_inv: Mat2,
    pub lambda: [f64; 2],
}

impl RoeData {
    /// `J^{-1}` in closed form, `None` when an eigenvalue vanishes.
    pub fn jacobian_inverse(&self) -> Option<Mat2> {
        let [l1, l2] = self.lambda;
        if l1 == 0.0 || l2 == 0.0 {
            return None;
        }
        Some(self.eigvecs * Mat2::diag(1.0 / l1, 1.0 / l2) * self.eigvecs_inv)
    }

    /// Squared Froude number of the averaged state.
    pub fn froude_squared(&self) -> f64 {
        self.u_roe * self.u_roe / (self.c_roe * self.c_roe)
    }
}

/// Rule fixing the weight of the centred family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaRule {
    /// omega = 1/2
    Force,
    /// omega = 1/(1 + CFL)
    Gforce,
    /// omega = 0
    LaxFriedrichs,
    /// omega = 1
    LaxWendroff,
}

impl OmegaRule {
    pub fn omega(self, cfl: f64) -> f64 {
        match self {
            OmegaRule::Force => 0.5,
            OmegaRule::Gforce => 1.0 / (1.0 + cfl),
            OmegaRule::LaxFriedrichs => 0.0,
            OmegaRule::LaxWendroff => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OmegaRule::Force => "force",
            OmegaRule::Gforce => "gforce",
            OmegaRule::LaxFriedrichs => "lf",
            OmegaRule::LaxWendroff => "lw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxKind {
    Roe,
    Omega(OmegaRule),
}

impl FluxKind {
    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Roe => "roe",
            FluxKind::Omega(r) => r.name(),
        }
    }
}

impl std::str::FromStr for FluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "roe" => FluxKind::Roe,
            "force" => FluxKind::Omega(OmegaRule::Force),
            "gforce" => FluxKind::Omega(OmegaRule::Gforce),
            "lf" | "lax-friedrichs" => FluxKind::Omega(OmegaRule::LaxFriedrichs),
            "lw" | "lax-wendroff" => FluxKind::Omega(OmegaRule::LaxWendroff),
            other => return Err(Error::InvalidConfig(format!("unknown flux `{other}`"))),
        })
    }
}

pub fn roe_average(w_l: PhysState, w_r: PhysState, c: &PhysConstants) -> Result<RoeData> {
    if w_l.h < 0.0 {
        return Err(Error::NegativeDepth(w_l.h));
    }
    if w_r.h < 0.0 {
        return Err(Error::NegativeDepth(w_r.h));
    }
    if !w_l.is_wet(c) && !w_r.is_wet(c) {
        return Err(Error::DryInterface);
    }
    let (sl, sr) = (w_l.h.sqrt(), w_r.h.sqrt());
    let u_roe = (sl * w_l.velocity(c) + sr * w_r.velocity(c)) / (sl + sr);
    let c2 = 0.5 * c.g * (w_l.h + w_r.h);
    let c_roe = c2.sqrt();
    let lambda = [u_roe - c_roe, u_roe + c_roe];
    let jacobian = Mat2([[0.0, 1.0], [c2 - u_roe * u_roe, 2.0 * u_roe]]);
    let eigvecs = Mat2([[1.0, 1.0], [lambda[0], lambda[1]]]);
    let inv_span = 1.0 / (lambda[1] - lambda[0]);
    let eigvecs_inv = Mat2([
        [lambda[1] * inv_span, -inv_span],
        [-lambda[0] * inv_span, inv_span],
    ]);
    let abs_jacobian = eigvecs * Mat2::diag(lambda[0].abs(), lambda[1].abs()) * eigvecs_inv;
    Ok(RoeData {
        u_roe,
        c_roe,
        jacobian,
        abs_jacobian,
        eigvecs,
        eigvecs_inv,
        lambda,
    })
}

/// Roe flux without entropy fix.
pub fn roe_flux(w_l: PhysState, w_r: PhysState, c: &PhysConstants) -> Result<Vec2> {
    roe_flux_with_fix(w_l, w_r, None, c)
}

/// Roe flux with an optional Harten fix: eigenvalues with `|lambda| < delta * c_roe`
/// are replaced by `(lambda^2 + d^2) / (2 d)`, `d = delta * c_roe`.
pub fn roe_flux_with_fix(
    w_l: PhysState,
    w_r: PhysState,
    harten: Option<f64>,
    c: &PhysConstants,
) -> Result<Vec2> {
    let roe = roe_average(w_l, w_r, c)?;
    let abs_j = match harten {
        None => roe.abs_jacobian,
        Some(delta) => {
            let d = delta * roe.c_roe;
            let fix = |l: f64| {
                if l.abs() < d {
                    (l * l + d * d) / (2.0 * d)
                } else {
                    l.abs()
                }
            };
            roe.eigvecs * Mat2::diag(fix(roe.lambda[0]), fix(roe.lambda[1])) * roe.eigvecs_inv
        }
    };
    Ok(centred_minus(w_l, w_r, &abs_j, c))
}

/// Member of the centred family with weight `omega`.
pub fn omega_flux(
    w_l: PhysState,
    w_r: PhysState,
    omega: f64,
    dx: f64,
    dt: f64,
    c: &PhysConstants,
) -> Result<Vec2> {
    if !(dx > 0.0 && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dx = {dx} and dt = {dt} must be positive")));
    }
    let roe = roe_average(w_l, w_r, c)?;
    let j2 = roe.jacobian * roe.jacobian;
    let visc = Mat2::IDENTITY.scale((1.0 - omega) * dx / dt) + j2.scale(omega * dt / dx);
    Ok(centred_minus(w_l, w_r, &visc, c))
}

/// `(F(w_l) + F(w_r))/2 - D (w_r - w_l)/2`.
fn centred_minus(w_l: PhysState, w_r: PhysState, visc: &Mat2, c: &PhysConstants) -> Vec2 {
    let avg = scale(0.5, add(flux_unchecked(w_l, c), flux_unchecked(w_r, c)));
    let jump = sub(w_r.as_array(), w_l.as_array());
    sub(avg, scale(0.5, visc.apply(jump)))
}

/// Dispatches on the flux kind. `cfl` only matters for GFORCE.
pub fn numerical_flux(
    kind: FluxKind,
    w_l: PhysState,
    w_r: PhysState,
    dx: f64,
    dt: f64,
    cfl: f64,
    c: &PhysConstants,
) -> Result<Vec2> {
    match kind {
        FluxKind::Roe => roe_flux(w_l, w_r, c),
        FluxKind::Omega(rule) => omega_flux(w_l, w_r, rule.omega(cfl), dx, dt, c),
    }
}
